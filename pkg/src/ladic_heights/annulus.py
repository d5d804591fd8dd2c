"""Certified arithmetic for analytic functions on closed annuli.

A function h on the closed annulus {v2 <= v(t) <= v1} (inner radius
ell^{-v1}, outer ell^{-v2}) is represented by a finite Laurent polynomial and
two error bounds: v^{v1}(h - rep) >= B1 and v^{v2}(h - rep) >= B2, where
v^w(sum a_i t^i) = min_i (v(a_i) + w i).  Bounds of None mean +infinity.

Coefficients are tower elements; a coefficient that is indistinguishable from
zero is never stored, its possible contribution is folded into the bounds.
v1 = None encodes a punctured disc (inner radius 0): representations there
must have an exact principal part, and v^w bounds extend to all w >= v2.

Everything here tracks precision rigorously: decompose certifies that every
function within the bounds is a unit, pow_half implements the binomial-series
inverse/forward square root with explicit tail bounds, and integrate applies
the epsilon-shrink bound through delta(eps) = min_{i>0} (eps i - v(i)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .errors import (
    DegenerateDomain,
    InsufficientPrecision,
    NonzeroResidue,
    NotAUnit,
    OddExponent,
    PrecisionExhausted,
    ValidationError,
)
from .padic import TowerElt, TowerField, val_int

Frac = Fraction


def fmin(*xs):
    """min with None = +infinity."""
    vals = [x for x in xs if x is not None]
    return None if not vals else min(vals)


def fadd(a, b):
    return None if a is None or b is None else a + b


class AnnulusFunction:
    __slots__ = ("K", "v1", "v2", "coeffs", "B1", "B2")

    def __init__(self, K: TowerField, v1, v2, coeffs: dict, B1, B2):
        self.K = K
        self.v1 = None if v1 is None else Frac(v1)
        self.v2 = Frac(v2)
        if self.v1 is not None and self.v2 > self.v1:
            raise DegenerateDomain(f"outer level {v2} above inner level {v1}")
        B1 = None if B1 is None else Frac(B1)
        B2 = None if B2 is None else Frac(B2)
        clean = {}
        for i, c in coeffs.items():
            if c.is_zeroish():
                # fold the unknown coefficient into the bounds
                B1 = fmin(B1, fadd(c.prec, None if self.v1 is None else self.v1 * i))
                B2 = fmin(B2, c.prec + self.v2 * i)
            else:
                # fold the coefficient's own precision into the bounds
                B1 = fmin(B1, None if self.v1 is None else c.prec + self.v1 * i)
                B2 = fmin(B2, c.prec + self.v2 * i)
                clean[i] = c
        self.coeffs = clean
        self.B1 = B1
        self.B2 = B2

    # -- basic views -----------------------------------------------------------

    def bound_at(self, w) -> Frac | None:
        """Certified lower bound for v^w(h - rep) at a level w in the domain."""
        if self.v1 is None:
            if w < self.v2:
                raise ValidationError("level outside domain")
            # error is a power series: v^w nondecreasing in w
            return self.B2
        if not (self.v2 <= w <= self.v1):
            raise ValidationError("level outside domain")
        if self.B1 is None or self.B2 is None:
            return fmin(self.B1, self.B2) if (self.B1 is None) != (self.B2 is None) else None
        if self.v1 == self.v2:
            return min(self.B1, self.B2)
        lam = (w - self.v2) / (self.v1 - self.v2)
        return lam * self.B1 + (1 - lam) * self.B2

    def vw(self, w) -> tuple:
        """(min value of v(a_i) + w i, attaining index, unique?) over the rep."""
        best, idx, unique = None, None, True
        for i, c in self.coeffs.items():
            v = c.valuation() + w * i
            if best is None or v < best:
                best, idx, unique = v, i, True
            elif v == best:
                unique = False
                if i < idx:
                    idx = i
        return best, idx, unique

    def support(self):
        return sorted(self.coeffs)

    def coeff(self, i) -> TowerElt:
        c = self.coeffs.get(i)
        if c is None:
            # zero, with precision given by the bounds
            prec = fmin(
                None if self.B1 is None or self.v1 is None else self.B1 - self.v1 * i,
                None if self.B2 is None else self.B2 - self.v2 * i,
            )
            if prec is None:
                prec = Frac(200)  # effectively exact at working scales
            return self.K.zero(prec)
        return c

    def same_domain(self, other) -> bool:
        return self.v1 == other.v1 and self.v2 == other.v2

    def __repr__(self):
        terms = ", ".join(f"t^{i}" for i in self.support())
        return f"AnnulusFunction([{self.v2},{self.v1}], terms={terms}, B=({self.B1},{self.B2}))"

    # -- ring operations ---------------------------------------------------------

    def __add__(self, other):
        assert self.same_domain(other)
        coeffs = dict(self.coeffs)
        for i, c in other.coeffs.items():
            coeffs[i] = coeffs[i] + c if i in coeffs else c
        return AnnulusFunction(
            self.K, self.v1, self.v2, coeffs, fmin(self.B1, other.B1), fmin(self.B2, other.B2)
        )

    def __neg__(self):
        return AnnulusFunction(
            self.K, self.v1, self.v2, {i: -c for i, c in self.coeffs.items()}, self.B1, self.B2
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        assert self.same_domain(other)
        coeffs = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                k = i + j
                t = a * b
                coeffs[k] = coeffs[k] + t if k in coeffs else t
        # error(fg) = f~ * err_g + g~ * err_f + err_f * err_g
        def vw_of(f, w):
            if not f.coeffs:
                return None
            return f.vw(w)[0]

        B1 = None
        if self.v1 is not None:
            B1 = fmin(
                fadd(self.B1, vw_of(other, self.v1)),
                fadd(other.B1, vw_of(self, self.v1)),
                fadd(self.B1, other.B1),
            )
        else:
            B1 = None
        B2 = fmin(
            fadd(self.B2, vw_of(other, self.v2)),
            fadd(other.B2, vw_of(self, self.v2)),
            fadd(self.B2, other.B2),
        )
        out = AnnulusFunction(self.K, self.v1, self.v2, coeffs, B1, B2)
        return out.compress()

    def scalar(self, c: TowerElt):
        v = c.val_lower()
        return AnnulusFunction(
            self.K,
            self.v1,
            self.v2,
            {i: a * c for i, a in self.coeffs.items()},
            fadd(self.B1, v),
            fadd(self.B2, v),
        )

    def shift_powers(self, k: int):
        """Multiply by t^k exactly."""
        return AnnulusFunction(
            self.K,
            self.v1,
            self.v2,
            {i + k: c for i, c in self.coeffs.items()},
            None if self.B1 is None or self.v1 is None else self.B1 + self.v1 * k,
            None if self.B2 is None else self.B2 + self.v2 * k,
        )

    def compress(self):
        """Drop terms whose contribution is below both bounds (folds them in)."""
        if self.B1 is None and self.B2 is None:
            return self
        drop = []
        for i, c in self.coeffs.items():
            v = c.valuation()
            ok1 = self.B1 is not None and (self.v1 is not None) and v + self.v1 * i >= self.B1
            if self.v1 is None:
                ok1 = i > 0 and self.B2 is not None and v + self.v2 * i >= self.B2
            ok2 = self.B2 is not None and v + self.v2 * i >= self.B2
            if ok1 and ok2:
                drop.append(i)
        if not drop:
            return self
        coeffs = {i: c for i, c in self.coeffs.items() if i not in drop}
        return AnnulusFunction(self.K, self.v1, self.v2, coeffs, self.B1, self.B2)

    # -- calculus -----------------------------------------------------------------

    def derivative(self):
        coeffs = {i - 1: c.scale_int(i) for i, c in self.coeffs.items() if i != 0}
        B1 = None if self.B1 is None or self.v1 is None else self.B1 - self.v1
        B2 = None if self.B2 is None else self.B2 - self.v2
        # d/dt can lose one digit per ell-divisible exponent; the bound above is
        # crude but safe: v(i a_i) + w(i-1) >= v(a_i) + w i - w
        return AnnulusFunction(self.K, self.v1, self.v2, coeffs, B1, B2)

    def residue(self, orientation: int = 1) -> TowerElt:
        """orientation * a_{-1}, precision capped by the bounds."""
        prec_cap = fmin(
            None if self.B1 is None or self.v1 is None else self.B1 + self.v1,
            None if self.B2 is None else self.B2 + self.v2,
        )
        c = self.coeff(-1)
        if prec_cap is not None and prec_cap < c.prec:
            c = c.at_prec(prec_cap)
        if c.prec <= (c.valuation() if not c.is_zeroish() else c.prec - 1):
            raise PrecisionExhausted("residue has no certain digit")
        return c if orientation == 1 else -c

    def drop_residue_term(self):
        """Zero out a nearly-zero t^{-1} term, folding it into the bounds."""
        c = self.coeffs.get(-1)
        if c is None:
            return self
        coeffs = {i: x for i, x in self.coeffs.items() if i != -1}
        v = c.val_lower()
        return AnnulusFunction(
            self.K,
            self.v1,
            self.v2,
            coeffs,
            fmin(self.B1, None if self.v1 is None else v - self.v1),
            fmin(self.B2, v - self.v2),
        )

    def evaluate(self, t0: TowerElt) -> TowerElt:
        w = t0.valuation()
        if w is None:
            raise ValidationError("cannot evaluate at an approximate zero")
        bound = self.bound_at(w)
        acc = self.K.zero(bound if bound is not None else Frac(200))
        for i, c in self.coeffs.items():
            if i >= 0:
                acc = acc + c * _int_pow(t0, i)
            else:
                acc = acc + c * _int_pow(t0.inv(), -i)
        if bound is not None:
            acc = acc.cap_prec(min(acc.prec, bound))
        return acc


def _int_pow(x: TowerElt, n: int) -> TowerElt:
    r = x.field.one(x.prec + 4)
    b = x
    while n:
        if n & 1:
            r = r * b
        b = b * b
        n >>= 1
    return r


def af_constant(K, c: TowerElt, v1, v2):
    return AnnulusFunction(K, v1, v2, {0: c}, None, None)


def af_zero(K, v1, v2):
    return AnnulusFunction(K, v1, v2, {}, None, None)


# -- decomposition and series ---------------------------------------------------


def decompose(h: AnnulusFunction):
    """(c, d, g) with h = c t^d (1 + g), certified for every represented
    function; raises NotAUnit / InsufficientPrecision per the unit criterion."""
    if not h.coeffs:
        raise InsufficientPrecision("representation is identically zero")
    levels = [h.v2] if h.v1 is None else [h.v1, h.v2]
    idxs = []
    for w in levels:
        val, idx, unique = h.vw(w)
        B = h.B1 if (h.v1 is not None and w == h.v1) else h.B2
        if B is not None and val >= B:
            raise InsufficientPrecision(
                "minimum of the representation does not beat its error bound"
            )
        if not unique:
            raise NotAUnit("tied minima: some represented function vanishes")
        idxs.append(idx)
    if h.v1 is None:
        # punctured disc: also require the principal support to match d
        d = idxs[0]
        if any(i < d for i in h.coeffs):
            raise NotAUnit("lower-order principal term present")
    elif idxs[0] != idxs[1]:
        raise NotAUnit("leading index differs between boundaries")
    d = idxs[0]
    c = h.coeffs[d]
    vc = c.valuation()
    cinv = c.inv()
    g_coeffs = {}
    for i, a in h.coeffs.items():
        if i != d:
            g_coeffs[i - d] = a * cinv
    B1 = None if (h.B1 is None or h.v1 is None) else h.B1 - vc - h.v1 * d
    B2 = None if h.B2 is None else h.B2 - vc - h.v2 * d
    g = AnnulusFunction(h.K, h.v1, h.v2, g_coeffs, B1, B2)
    return c, d, g


def _binom_half(num: int, i: int) -> Frac:
    """binomial(num/2, i) as an exact rational (num odd, e.g. -1 or 1)."""
    top = Frac(num, 2)
    out = Frac(1)
    for k in range(i):
        out *= (top - k) / (k + 1)
    return out


def pow_half(h: AnnulusFunction, num: int, terms: int, sign: int = 1) -> AnnulusFunction:
    """h^{num/2} for odd num (typically +-1), via decomposition and binomial
    series with `terms` terms; `sign` flips the square-root branch."""
    c, d, g = decompose(h)
    if (d * num) % 2:
        raise OddExponent(f"t-exponent {d} times {num}/2 is not an integer")
    croot = c.sqrt()  # may raise NotASquare / OddValuation
    cpow = croot if num == 1 else _int_pow(croot.inv(), -num) if num < 0 else _int_pow(croot, num)
    if sign == -1:
        cpow = -cpow
    K = h.K
    vc = c.valuation()
    # series sum_{i<=terms} binom(num/2, i) g^i
    one = af_constant(K, K.one(cpow.prec + 4), h.v1, h.v2)
    acc = one
    gi = one
    for i in range(1, terms + 1):
        gi = gi * g
        coef = K.from_rational(_binom_half(num, i), cpow.prec + 4)
        acc = acc + gi.scalar(coef)
    # bounds: truncation tail (terms+1) * v^w(g), plus propagated input error
    m1 = None
    if h.v1 is not None:
        m1 = g.vw(h.v1)[0] if g.coeffs else None
        m1 = fmin(m1, g.B1)
        if m1 is not None and m1 <= 0:
            raise InsufficientPrecision("series argument is not small on the inner boundary")
    m2 = g.vw(h.v2)[0] if g.coeffs else None
    m2 = fmin(m2, g.B2)
    if m2 is not None and m2 <= 0:
        raise InsufficientPrecision("series argument is not small on the outer boundary")
    vcp = Frac(num, 2) * vc

    def out_bound(Bg, m, w):
        # error of (1+g)^{num/2}: truncation + input perturbation (Lipschitz 1)
        tail = None if m is None else (terms + 1) * m
        return fmin(tail, Bg)

    B1 = None
    if h.v1 is not None:
        B1 = out_bound(g.B1, m1, h.v1)
        B1 = None if B1 is None else B1 + vcp + Frac(num * d, 2) * h.v1
    B2 = out_bound(g.B2, m2, h.v2)
    B2 = None if B2 is None else B2 + vcp + Frac(num * d, 2) * h.v2
    series = AnnulusFunction(h.K, h.v1, h.v2, acc.coeffs, fmin(acc.B1, B1), fmin(acc.B2, B2))
    out = series.scalar(cpow).shift_powers(num * d // 2)
    return out.compress()


def inv_sqrt(h: AnnulusFunction, terms: int, sign: int = 1) -> AnnulusFunction:
    return pow_half(h, -1, terms, sign)


def af_inv(h: AnnulusFunction, terms: int) -> AnnulusFunction:
    """1/h via the geometric series on the decomposition, certified bounds."""
    c, d, g = decompose(h)
    K = h.K
    cinv = c.inv()
    one = af_constant(K, K.one(cinv.prec + 4), h.v1, h.v2)
    acc = one
    gi = one
    for i in range(1, terms + 1):
        gi = gi * g
        acc = acc + (gi if i % 2 == 0 else -gi)
    m1 = None if h.v1 is None else fmin(g.vw(h.v1)[0] if g.coeffs else None, g.B1)
    m2 = fmin(g.vw(h.v2)[0] if g.coeffs else None, g.B2)
    for m in (m1, m2):
        if m is not None and m <= 0:
            raise InsufficientPrecision("geometric series argument not small")
    B1 = None
    if h.v1 is not None:
        B1 = fmin(None if m1 is None else (terms + 1) * m1, g.B1)
        B1 = None if B1 is None else B1 - c.valuation() - d * h.v1
    B2 = fmin(None if m2 is None else (terms + 1) * m2, g.B2)
    B2 = None if B2 is None else B2 - c.valuation() - d * h.v2
    series = AnnulusFunction(K, h.v1, h.v2, acc.coeffs, fmin(acc.B1, B1), fmin(acc.B2, B2))
    return series.scalar(cinv).shift_powers(-d).compress()


def delta_eps(eps: Frac, ell: int) -> Frac:
    """min_{i > 0} (eps*i - v_ell(i)); the minimum is attained at i = ell^k."""
    eps = Frac(eps)
    if eps <= 0:
        raise ValidationError("shrink must be positive")
    best = None
    k, misses = 0, 0
    while misses < 2:
        cand = eps * ell**k - k
        if best is None or cand < best:
            best, misses = cand, 0
        else:
            misses += 1
        k += 1
    return best


def integrate(h: AnnulusFunction, eps: Frac) -> AnnulusFunction:
    """Termwise antiderivative on the eps-shrunk annulus, certified bounds."""
    K = h.K
    eps = Frac(eps)
    if -1 in h.coeffs:
        raise NonzeroResidue("t^{-1} coefficient present")
    nv1 = None if h.v1 is None else h.v1 - eps
    nv2 = h.v2 + eps
    if nv1 is not None and nv1 <= nv2:
        raise DegenerateDomain("shrunk annulus is empty")
    coeffs = {}
    for i, c in h.coeffs.items():
        coeffs[i + 1] = c * K.from_rational(Frac(1, i + 1), c.prec + abs(val_int(i + 1, K.ell) or 0) + 2)
    d_eps = delta_eps(eps, K.ell)
    width = None if h.v1 is None else (h.v1 - eps - h.v2)
    d_wide = None if width is None else delta_eps(width, K.ell)
    if h.v1 is None:
        B1 = None
        B2 = None if h.B2 is None else h.B2 + h.v2 - d_eps
    else:
        B1 = fmin(
            None if h.B1 is None else h.B1 + h.v1 - d_eps,
            None if h.B2 is None or d_wide is None else h.B2 + h.v2 - d_wide,
        )
        B2 = fmin(
            None if h.B2 is None else h.B2 + h.v2 - d_eps,
            None if h.B1 is None or d_wide is None else h.B1 + h.v1 - d_wide,
        )
    return AnnulusFunction(K, nv1, nv2, coeffs, B1, B2)


def restrict(h: AnnulusFunction, v1, v2) -> AnnulusFunction:
    """Restrict to a subannulus [v2, v1] of the domain."""
    nb1 = h.bound_at(v1) if v1 is not None else h.B1
    nb2 = h.bound_at(v2)
    return AnnulusFunction(h.K, v1, v2, dict(h.coeffs), nb1, nb2)
