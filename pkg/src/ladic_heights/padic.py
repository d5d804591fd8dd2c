"""Arithmetic in tame two-level extensions K = Q_ell(w, pi) with tracked precision.

A tower is determined by an odd prime ell, an unramified degree f (w is a root
of a fixed monic integer polynomial irreducible mod ell) and a ramification
index e coprime to ell, with pi^e = ell.  The valuation is normalized so that
v(ell) = 1 and v(pi) = 1/e; all valuations are Fractions with denominator
dividing e.

Elements carry an absolute precision N: the element is only known modulo
{v >= N}.  Internally an element is

    pi^{-shift} * sum_{i<e, j<f} c[i*f+j] * w^j * pi^i

with integer coefficients, each stored reduced modulo the power of ell that
matches the absolute precision of its basis slot.  Since the basis valuations
(i - shift)/e + Z are distinct mod 1 across rows i, the valuation of a nonzero
element is read off coefficient-wise, exactly.
"""

from __future__ import annotations

from fractions import Fraction

from . import ffield
from .errors import (
    DivisionByIndistinguishableZero,
    EvenPrime,
    NegativeValuation,
    NotASquare,
    OddValuation,
    PrecisionExhausted,
    ValidationError,
    WildRamification,
)

Frac = Fraction


def _ceil_frac(x: Frac) -> int:
    return -((-x.numerator) // x.denominator)


def _floor_frac(x: Frac) -> int:
    return x.numerator // x.denominator


def val_int(n: int, ell: int) -> int | None:
    """ell-adic valuation of an integer, None for 0."""
    if n == 0:
        return None
    v = 0
    while n % ell == 0:
        n //= ell
        v += 1
    return v


def _deterministic_unram_poly(ell: int, f: int) -> tuple[int, ...]:
    """Monic degree-f lift with the smallest coefficient encoding that is
    irreducible mod ell."""
    if f == 1:
        return (0, 1)
    base = ffield.FiniteField(ell, (0, 1))
    total = ell**f
    for code in range(total):
        c, coeffs = code, []
        for _ in range(f):
            coeffs.append(c % ell)
            c //= ell
        poly = [base.from_int(a) for a in coeffs] + [base.one]
        if ffield.is_irreducible(base, poly):
            return tuple(coeffs) + (1,)
    raise AssertionError("no irreducible polynomial found")


class TowerField:
    """K = Q_ell(w, pi), w unramified of degree f, pi^e = ell, gcd(e, ell) = 1."""

    def __init__(self, ell: int, f: int, e: int, unram_poly: tuple[int, ...] | None = None):
        if ell == 2:
            raise EvenPrime("ell = 2 is not supported")
        if not ffield.is_prime(ell):
            raise ValidationError(f"{ell} is not prime")
        if e <= 0 or f <= 0:
            raise ValidationError("f, e must be positive")
        if e % ell == 0:
            raise WildRamification(f"ell={ell} divides ramification index e={e}")
        self.ell = ell
        self.f = f
        self.e = e
        self.unram_poly = unram_poly or _deterministic_unram_poly(ell, f)
        if len(self.unram_poly) != f + 1 or self.unram_poly[-1] != 1:
            raise ValidationError("unram_poly must be monic of degree f")
        self.residue_field = ffield.FiniteField(ell, tuple(c % ell for c in self.unram_poly))
        if f > 1:
            base = ffield.FiniteField(ell, (0, 1))
            lifted = [base.from_int(c) for c in self.unram_poly]
            if not ffield.is_irreducible(base, lifted):
                raise ValidationError("unram_poly is reducible mod ell")

    def __eq__(self, other):
        return isinstance(other, TowerField) and (self.ell, self.f, self.e, self.unram_poly) == (
            other.ell,
            other.f,
            other.e,
            other.unram_poly,
        )

    def __hash__(self):
        return hash((self.ell, self.f, self.e, self.unram_poly))

    def __repr__(self):
        return f"TowerField(ell={self.ell}, f={self.f}, e={self.e})"

    # -- constructors --------------------------------------------------------

    def make(self, shift: int, coeffs, prec: Frac) -> "TowerElt":
        return TowerElt(self, shift, tuple(coeffs), Frac(prec))

    def zero(self, prec) -> "TowerElt":
        return self.make(0, (0,) * (self.e * self.f), prec)

    def one(self, prec) -> "TowerElt":
        return self.from_int(1, prec)

    def from_int(self, n: int, prec) -> "TowerElt":
        c = [0] * (self.e * self.f)
        c[0] = n
        return self.make(0, c, prec)

    def from_rational(self, q, prec) -> "TowerElt":
        q = Frac(q)
        num, den = q.numerator, q.denominator
        t = val_int(den, self.ell)
        if t is None:
            return self.zero(prec) if num == 0 else self.from_int(num, prec)
        den_unit = den // self.ell**t
        # value = num / (ell^t * den_unit) = pi^{-t e} * num * den_unit^{-1}
        shift = t * self.e
        m = _ceil_frac(Frac(prec) + t) + 1
        if m <= 0:
            return self.make(shift, (0,) * (self.e * self.f), prec)
        inv = pow(den_unit, -1, self.ell**m)
        c = [0] * (self.e * self.f)
        c[0] = num * inv
        return self.make(shift, c, prec)

    def pi_pow(self, k: int, prec) -> "TowerElt":
        """pi^k at absolute precision prec."""
        c = [0] * (self.e * self.f)
        if k >= 0:
            c[(k % self.e) * self.f] = self.ell ** (k // self.e)
            return self.make(0, c, prec)
        c[0] = 1
        return self.make(-k, c, prec)

    def omega(self, prec) -> "TowerElt":
        c = [0] * (self.e * self.f)
        if self.f == 1:
            return self.zero(prec)
        c[1] = 1
        return self.make(0, c, prec)

    def from_residue(self, r, prec) -> "TowerElt":
        """Lift of a residue-field element (integer-coefficient lift)."""
        c = [0] * (self.e * self.f)
        for j in range(self.f):
            c[j] = r[j]
        return self.make(0, c, prec)


def make_field(ell: int, f: int, e: int) -> TowerField:
    return TowerField(ell, f, e)


class TowerElt:
    __slots__ = ("field", "shift", "coeffs", "prec")

    def __init__(self, field: TowerField, shift: int, coeffs: tuple, prec: Frac):
        self.field = field
        self.prec = Frac(prec)
        shift, coeffs = self._normalized(shift, coeffs)
        self.shift = shift
        self.coeffs = coeffs

    # -- representation maintenance -------------------------------------------

    def _normalized(self, shift: int, coeffs) -> tuple:
        """Reduce each coefficient modulo its slot precision and lower the
        shift to the canonical minimum (0 for integral elements)."""
        K = self.field
        e, f, ell = K.e, K.f, K.ell
        reduced = []
        for i in range(e):
            m = _ceil_frac(self.prec - Frac(i - shift, e))
            if m <= 0:
                reduced.extend([0] * f)
            else:
                mod = ell**m
                reduced.extend(c % mod for c in coeffs[i * f : (i + 1) * f])
        # minimal pi-exponent present (in pi-units, relative to the shift)
        mu = None
        for i in range(e):
            for j in range(f):
                c = reduced[i * f + j]
                if c:
                    t = i - shift + e * val_int(c, ell)
                    if mu is None or t < mu:
                        mu = t
        target = 0 if mu is None else max(0, -mu)
        if target == shift:
            return shift, tuple(reduced)
        d = target - shift
        out = [0] * (e * f)
        for i in range(e):
            m_i = _ceil_frac(self.prec - Frac(i - shift, e))
            for j in range(f):
                c = reduced[i * f + j]
                if c == 0:
                    continue
                k = i + d
                q, r = divmod(k, e)
                if q >= 0:
                    out[r * f + j] += c * ell**q
                else:
                    denom = ell**-q
                    if c % denom:
                        if m_i + q <= 0:
                            continue  # below slot precision at the new shift
                        raise NegativeValuation("cannot lower shift: valuation too low")
                    out[r * f + j] += c // denom
        # re-reduce at the new shift
        final = []
        for i in range(e):
            m = _ceil_frac(self.prec - Frac(i - target, e))
            if m <= 0:
                final.extend([0] * f)
            else:
                mod = ell**m
                final.extend(c % mod for c in out[i * f : (i + 1) * f])
        return target, tuple(final)

    def _modulus_exp(self, row: int) -> int:
        # coefficient of pi^{row - shift}: store mod ell^ceil(prec - (row-shift)/e)
        return _ceil_frac(self.prec - Frac(row - self.shift, self.field.e))

    def with_shift(self, new_shift: int) -> "TowerElt":
        """Re-express with a different shift (raising is always possible,
        lowering requires the element to have high enough valuation)."""
        K = self.field
        if new_shift == self.shift:
            return self
        d = new_shift - self.shift
        out = [0] * (K.e * K.f)
        for i in range(K.e):
            for j in range(K.f):
                c = self.coeffs[i * K.f + j]
                if c == 0:
                    continue
                k = i + d
                q, r = divmod(k, K.e)
                if q >= 0:
                    out[r * K.f + j] += c * K.ell**q
                else:
                    denom = K.ell**-q
                    if c % denom:
                        if self._modulus_exp(i) + q <= 0:
                            continue
                        raise NegativeValuation("cannot lower shift: valuation too low")
                    out[r * K.f + j] += c // denom
        res = TowerElt.__new__(TowerElt)
        res.field = K
        res.prec = self.prec
        res.shift = new_shift
        res.coeffs = res._plain_reduce(new_shift, out)
        return res

    def _plain_reduce(self, shift, coeffs) -> tuple:
        K = self.field
        out = []
        for i in range(K.e):
            m = _ceil_frac(self.prec - Frac(i - shift, K.e))
            if m <= 0:
                out.extend([0] * K.f)
            else:
                mod = K.ell**m
                out.extend(c % mod for c in coeffs[i * K.f : (i + 1) * K.f])
        return tuple(out)

    # -- basic queries ---------------------------------------------------------

    def is_zeroish(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def valuation(self):
        """Exact valuation as a Fraction, or None if indistinguishable from 0."""
        K = self.field
        best = None
        for i in range(K.e):
            for j in range(K.f):
                c = self.coeffs[i * K.f + j]
                if c:
                    v = Frac(i - self.shift, K.e) + val_int(c, K.ell)
                    if best is None or v < best:
                        best = v
        return best

    def val_lower(self) -> Frac:
        v = self.valuation()
        return self.prec if v is None else v

    @property
    def abs_prec(self) -> Frac:
        return self.prec

    def at_prec(self, prec) -> "TowerElt":
        if Frac(prec) > self.prec:
            raise PrecisionExhausted("cannot increase precision")
        return TowerElt(self.field, self.shift, self.coeffs, Frac(prec))

    def cap_prec(self, prec) -> "TowerElt":
        prec = Frac(prec)
        return self.at_prec(prec) if prec < self.prec else self

    # -- arithmetic --------------------------------------------------------------

    def __neg__(self):
        return TowerElt(self.field, self.shift, tuple(-c for c in self.coeffs), self.prec)

    def _aligned(self, other):
        s = max(self.shift, other.shift)
        return self.with_shift(s), other.with_shift(s)

    def __add__(self, other):
        if not isinstance(other, TowerElt):
            return NotImplemented
        a, b = self._aligned(other)
        prec = min(a.prec, b.prec)
        return TowerElt(self.field, a.shift, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)), prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TowerElt):
            return NotImplemented
        K = self.field
        prec = min(self.prec + other.val_lower(), other.prec + self.val_lower())
        shift = self.shift + other.shift
        e, f, ell = K.e, K.f, K.ell
        # polynomial multiplication in w (reduced by unram_poly) and pi (pi^e = ell)
        acc = [0] * (e * (2 * f - 1)) if f > 1 else [0] * e
        for i1 in range(e):
            row1 = self.coeffs[i1 * f : (i1 + 1) * f]
            if not any(row1):
                continue
            for i2 in range(e):
                row2 = other.coeffs[i2 * f : (i2 + 1) * f]
                if not any(row2):
                    continue
                k = i1 + i2
                q, r = divmod(k, e)
                scale = ell**q
                base = r * (2 * f - 1) if f > 1 else r
                for j1, c1 in enumerate(row1):
                    if c1:
                        for j2, c2 in enumerate(row2):
                            if c2:
                                acc[base + j1 + j2] += c1 * c2 * scale
        # reduce w-degree by the unram polynomial
        out = [0] * (e * f)
        if f > 1:
            u = K.unram_poly
            for r in range(e):
                seg = acc[r * (2 * f - 1) : (r + 1) * (2 * f - 1)]
                for k in range(2 * f - 2, f - 1, -1):
                    c = seg[k]
                    if c:
                        seg[k] = 0
                        for j in range(f):
                            seg[k - f + j] -= c * u[j]
                out[r * f : (r + 1) * f] = seg[:f]
        else:
            out = acc
        return TowerElt(K, shift, tuple(out), prec)

    def scale_int(self, n: int) -> "TowerElt":
        prec = self.prec + (val_int(n, self.field.ell) or 0) if n else self.prec
        if n == 0:
            return self.field.zero(self.prec)
        return TowerElt(self.field, self.shift, tuple(n * c for c in self.coeffs), prec)

    def scale_pi(self, k: int) -> "TowerElt":
        """Multiply by pi^k exactly."""
        return TowerElt(self.field, self.shift - k, self.coeffs, self.prec + Frac(k, self.field.e))

    def unit_part(self):
        """(u, v) with self = pi^{e v} * u, v = valuation, u a unit."""
        v = self.valuation()
        if v is None:
            raise DivisionByIndistinguishableZero("no unit part of (approximate) zero")
        k = v * self.field.e
        assert k.denominator == 1
        return self.scale_pi(-int(k)), v

    def inv(self) -> "TowerElt":
        K = self.field
        u, v = self.unit_part()
        n_target = u.prec
        if n_target <= 0:
            raise PrecisionExhausted("no certain digit in inverse")
        r = u.residue()
        z = K.from_residue(K.residue_field.inv(r), n_target)
        two = K.from_int(2, n_target + 1)
        # Newton iteration doubles the number of correct digits each round.
        steps = max(1, (int(n_target * K.e) + 1).bit_length() + 1)
        for _ in range(steps):
            z = z * (two - u * z)
        out = z.scale_pi(-int(v * K.e))
        return out.cap_prec(self.prec - 2 * v)

    def __truediv__(self, other):
        if not isinstance(other, TowerElt):
            return NotImplemented
        return self * other.inv()

    def sqrt(self) -> "TowerElt":
        """Canonical square root (Hensel); see sqrt_hensel."""
        K = self.field
        if self.is_zeroish():
            return K.zero(self.prec / 2)
        u, v = self.unit_part()
        k = int(v * K.e)
        if k % 2:
            raise OddValuation(f"valuation {v} is not twice a representable valuation")
        r = u.residue()
        s0 = K.residue_field.sqrt(r)
        if s0 is None:
            raise NotASquare("residue is not a square in the residue field")
        n_target = u.prec
        if n_target <= 0:
            raise PrecisionExhausted("no certain digit in square root")
        z = K.from_residue(s0, n_target)
        inv2 = K.from_rational(Frac(1, 2), n_target + 1)
        steps = max(1, (int(n_target * K.e) + 1).bit_length() + 1)
        for _ in range(steps):
            z = (z + u * z.inv()) * inv2
        z = z.scale_pi(k // 2)

        def stable_key(t):
            # compare the first two significant digits only, so the canonical
            # choice does not depend on the working precision
            vv = t.valuation()
            capped = t.cap_prec(min(t.prec, (vv if vv is not None else 0) + 2))
            return (capped.shift, capped.coeffs)

        cand = min((z, -z), key=stable_key)
        return cand.cap_prec(self.prec - v / 2)

    # -- reduction and coordinates ----------------------------------------------

    def residue(self):
        """Image in the residue field; requires v >= 0 and positive precision."""
        if self.prec <= 0:
            raise PrecisionExhausted("no digits available for reduction")
        v = self.valuation()
        if v is not None and v < 0:
            raise NegativeValuation("cannot reduce an element of negative valuation")
        x = self.with_shift(0)
        K = self.field
        return tuple(c % K.ell for c in x.coeffs[: K.f])

    def rational_coord(self):
        """(value mod ell^k as centered int, k) if the element lies in Z_ell.

        Raises ValidationError if any w- or pi-coordinate is nonzero, or
        NegativeValuation if v < 0.
        """
        x = self.with_shift(0)
        K = self.field
        k = _floor_frac(x.prec)
        if k <= 0:
            raise PrecisionExhausted("no integer digits available")
        if any(c for idx, c in enumerate(x.coeffs) if idx != 0):
            raise ValidationError("element is not rational to working precision")
        mod = K.ell**k
        r = x.coeffs[0] % mod
        if r > mod // 2:
            r -= mod
        return r, k

    # -- comparisons and display ---------------------------------------------------

    def eq_approx(self, other) -> bool:
        return (self - other).is_zeroish()

    def __repr__(self):
        K = self.field
        if self.is_zeroish():
            return f"O({K.ell}^{self.prec})"
        terms = []
        for i in range(K.e):
            for j in range(K.f):
                c = self.coeffs[i * K.f + j]
                if c:
                    t = str(c)
                    if j:
                        t += "*w" + (f"^{j}" if j > 1 else "")
                    if i - self.shift:
                        t += "*pi" + (f"^{i - self.shift}" if i - self.shift != 1 else "")
                    terms.append(t)
        return " + ".join(terms) + f" + O({K.ell}^{self.prec})"

    def to_json(self):
        return {
            "shift": self.shift,
            "coeffs": list(self.coeffs),
            "prec": str(self.prec),
        }


# -- polynomials over a tower field ------------------------------------------------
#
# Polynomials are plain lists of TowerElt, ascending degree.  They are not
# trimmed automatically since a leading coefficient may be an approximate zero;
# callers strip exact structural zeros explicitly.


def tp_from_rationals(K: TowerField, coeffs, prec):
    return [K.from_rational(c, prec) for c in coeffs]


def tp_add(a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        if i < len(a) and i < len(b):
            out.append(a[i] + b[i])
        elif i < len(a):
            out.append(a[i])
        else:
            out.append(b[i])
    return out


def tp_neg(a):
    return [-c for c in a]


def tp_scale(a, c):
    return [x * c for x in a]


def tp_mul(a, b):
    if not a or not b:
        return []
    K = (a[0] if a else b[0]).field
    out = [None] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            t = x * y
            out[i + j] = t if out[i + j] is None else out[i + j] + t
    return out


def tp_eval(a, x):
    if not a:
        return x.field.zero(x.prec)
    r = a[-1]
    for c in reversed(a[:-1]):
        r = r * x + c
    return r


def tp_deriv(a):
    return [a[i].scale_int(i) for i in range(1, len(a))]


def tp_shift_var(a, c):
    """p(x) -> p(x + c), by Horner."""
    out = []
    for coef in reversed(a):
        # out = out * (x + c) + coef
        new = [coef] + out
        for i in range(len(out)):
            new[i] = new[i] + out[i] * c
        out = new
    return out


def tp_scale_var(a, c):
    """p(x) -> p(c x)."""
    out = []
    pw = c.field.one(c.prec)
    for coef in a:
        out.append(coef * pw)
        pw = pw * c
    return out


def tp_degree_truncate(a, n):
    return a[: n + 1]


def tp_divmod(a, b):
    """Polynomial division by a divisor with unit leading coefficient."""
    binv = b[-1].inv()
    a = list(a)
    q = []
    while len(a) >= len(b):
        c = a[-1] * binv
        q.append(c)
        d = len(a) - len(b)
        for i in range(len(b)):
            a[d + i] = a[d + i] - c * b[i]
        a.pop()
    q.reverse()
    return q, a
