"""Second-kind differential bases and cup products for y^2 = f(x).

Differentials are written as P(x) dx/(2y) with deg P <= 2g.  For even-degree f
the monomial x^i dx/(2y) has residue +- r_i lc^{-1/2} at the two points at
infinity, with r_i rational in the coefficients of f; a form is of the second
kind iff sum_i c_i r_i = 0.  For odd degree all monomials up to x^{2g-1} are
second kind.

The canonical basis keeps x^i for i != g (0 <= i <= 2g) and corrects each by
a multiple of x^g, the anchor whose residue never vanishes:
    beta_i = x^i - (r_i / r_g) x^g.
For sparse polynomials this reduces to the familiar {x^i, i <= 2g-1} with the
middle monomial corrected; it also covers curves where r_{2g} = 0.

Cup products are computed from expansions at infinity (series in the local
parameter), giving an oracle that is independent of the annulus machinery.
The same code runs over Q (Fractions) and over tower fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NotIndependent, NotSecondKind, ValidationError

Frac = Fraction


class QOps:
    """Field adapter for exact rationals."""

    zero = Frac(0)
    one = Frac(1)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def inv(a):
        return 1 / a

    @staticmethod
    def from_frac(q):
        return Frac(q)

    @staticmethod
    def is_zero(a):
        return a == 0


class TowerOps:
    """Field adapter for tower elements at a fixed working precision."""

    def __init__(self, K, prec):
        self.K = K
        self.prec = Frac(prec)
        self.zero = K.zero(self.prec)
        self.one = K.one(self.prec)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def inv(a):
        return a.inv()

    def from_frac(self, q):
        return self.K.from_rational(q, self.prec)

    @staticmethod
    def is_zero(a):
        return a.is_zeroish()


def _series_mul(ops, a, b, order):
    out = [ops.zero] * (order + 1)
    for i, x in enumerate(a):
        if i > order:
            break
        for j, y in enumerate(b):
            if i + j > order:
                break
            out[i + j] = ops.add(out[i + j], ops.mul(x, y))
    return out


def _series_inv(ops, a, order):
    inv0 = ops.inv(a[0])
    out = [inv0] + [ops.zero] * order
    for k in range(1, order + 1):
        s = ops.zero
        for j in range(1, min(k, len(a) - 1) + 1):
            s = ops.add(s, ops.mul(a[j], out[k - j]))
        out[k] = ops.neg(ops.mul(inv0, s))
    return out


def _series_sqrt_one(ops, a, order):
    """sqrt of a series with a[0] = 1, principal branch."""
    out = [ops.one] + [ops.zero] * order
    half = ops.from_frac(Frac(1, 2))
    for k in range(1, order + 1):
        s = a[k] if k < len(a) else ops.zero
        for j in range(1, k):
            s = ops.add(s, ops.neg(ops.mul(out[j], out[k - j])))
        out[k] = ops.mul(half, s)
    return out


def infinity_residue_vector(ops, f_coeffs, order=None):
    """[r_0, ..., r_{2g}] with Res at infinity^{+-} of x^i dx/2y = +- r_i lc^{-1/2}.

    For odd-degree f this is the zero vector (single ramified infinity)."""
    N = len(f_coeffs) - 1
    g = (N - 1) // 2 if N % 2 else (N - 2) // 2
    if N % 2 == 1:
        return [ops.zero] * (2 * g + 1)
    order = order if order is not None else 2 * g + 2
    lc = f_coeffs[-1]
    lcinv = ops.inv(lc)
    rev = [ops.mul(f_coeffs[N - k], lcinv) for k in range(order + 1) if N - k >= 0]
    rev += [ops.zero] * (order + 1 - len(rev))
    s = _series_sqrt_one(ops, rev, order)
    sinv = _series_inv(ops, s, order)
    out = []
    half = ops.from_frac(Frac(1, 2))
    for i in range(2 * g + 1):
        k = i - g
        out.append(ops.mul(half, sinv[k]) if 0 <= k <= order else ops.zero)
    return out


def infinity_residues(f_coeffs, i: int):
    """Rational r_i for a rational polynomial (spec operation)."""
    ops = QOps()
    vec = infinity_residue_vector(ops, [Frac(c) for c in f_coeffs])
    if i < len(vec):
        return vec[i]
    return Frac(0)


@dataclass
class DifferentialBasis:
    curve: list  # coefficients of f
    forms: list  # each a coefficient vector of length 2g+1 (numerator of dx/2y)
    genus: int
    residues: list  # r-vector of the monomials


def second_kind_basis(ops, f_coeffs) -> DifferentialBasis:
    N = len(f_coeffs) - 1
    g = (N - 1) // 2 if N % 2 else (N - 2) // 2
    if g < 1:
        raise ValidationError("genus must be at least 1")
    r = infinity_residue_vector(ops, f_coeffs)
    forms = []
    if N % 2 == 1:
        for i in range(2 * g):
            vec = [ops.zero] * (2 * g + 1)
            vec[i] = ops.one
            forms.append(vec)
    else:
        rg_inv = ops.inv(r[g])  # r_g = 1/2, never zero
        for i in range(2 * g + 1):
            if i == g:
                continue
            vec = [ops.zero] * (2 * g + 1)
            vec[i] = ops.one
            corr = ops.neg(ops.mul(r[i], rg_inv))
            if not ops.is_zero(corr):
                vec[g] = corr
            forms.append(vec)
    return DifferentialBasis(curve=list(f_coeffs), forms=forms, genus=g, residues=r)


def validate_user_basis(forms, f_coeffs) -> DifferentialBasis:
    """Accept rational combinations of monomial forms iff independent and of
    the second kind.  A full basis has 2g forms; fewer forms are allowed when
    they span a pushforward-invariant subspace (e.g. the holomorphic forms),
    which suffices whenever no positive-genus vertices occur."""
    ops = QOps()
    f_coeffs = [Frac(c) for c in f_coeffs]
    N = len(f_coeffs) - 1
    g = (N - 1) // 2 if N % 2 else (N - 2) // 2
    if not 1 <= len(forms) <= 2 * g:
        raise ValidationError(f"expected at most {2 * g} forms, got {len(forms)}")
    r = infinity_residue_vector(ops, f_coeffs)
    vecs = []
    for form in forms:
        vec = [Frac(c) for c in form] + [Frac(0)] * (2 * g + 1 - len(form))
        if len(vec) > 2 * g + 1:
            raise ValidationError("form involves monomials beyond x^{2g}")
        if N % 2 == 0:
            res = sum(vec[i] * r[i] for i in range(2 * g + 1))
            if res != 0:
                raise NotSecondKind(f"form {form} has nonzero residue at infinity")
        vecs.append(vec)
    M = [list(row) for row in vecs]
    rank = _rational_rank(M)
    if rank != len(forms):
        raise NotIndependent("forms are linearly dependent")
    return DifferentialBasis(curve=f_coeffs, forms=vecs, genus=g, residues=r)


def _rational_rank(M):
    M = [list(map(Frac, row)) for row in M]
    rank = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = 1 / M[rank][c]
        M[rank] = [x * inv for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[rank])]
        rank += 1
    return rank


def cup_matrix(ops, f_coeffs, forms, order_extra: int = 6):
    """Antisymmetric Gram matrix of cup products via expansions at infinity.

    cup(a dx/2y, b dx/2y) = sum over infinity points of Res(omega int(eta));
    the lc^{-1/2} factors square to lc^{-1}, so everything stays in the field.
    """
    N = len(f_coeffs) - 1
    g = (N - 1) // 2 if N % 2 else (N - 2) // 2
    order = 4 * g + 4 + order_extra
    lc = f_coeffs[-1]
    lcinv = ops.inv(lc)
    rev = [ops.mul(f_coeffs[N - k], lcinv) if N - k >= 0 else ops.zero for k in range(order + 1)]
    if N % 2 == 0:
        s = _series_sqrt_one(ops, rev, order)
        sinv = _series_inv(ops, s, order)

        def laurent_of(vec):
            # omega = sum_i vec[i] u^{g-1-i} * Sinv(u) du, offset so indices >= 0
            off = g + 1  # lowest exponent is g-1-2g = -(g+1)
            out = [ops.zero] * (order + 1)
            for i, c in enumerate(vec):
                if ops.is_zero(c):
                    continue
                e0 = g - 1 - i + off
                for k, sv in enumerate(sinv):
                    if e0 + k <= order:
                        out[e0 + k] = ops.add(out[e0 + k], ops.mul(c, sv))
            return out, off

        def cup(a, b):
            A, off = laurent_of(a)
            B, _ = laurent_of(b)
            # integrate B: exponent e-off -> e-off+1, divide; residue pairing
            IB = [ops.zero] * (order + 2)
            for e, c in enumerate(B):
                k = e - off
                if ops.is_zero(c):
                    continue
                if k == -1:
                    raise NotSecondKind("eta has a residue at infinity")
                IB[e + 1] = ops.mul(c, ops.from_frac(Frac(1, k + 1)))
            # Res_u(A * IB): coefficient of u^{-1}: indices with (i-off)+(j-off-... )
            total = ops.zero
            for i, ca in enumerate(A):
                j = (2 * off - 1) - i  # (i-off) + (j-off) = -1
                if 0 <= j < len(IB) and not ops.is_zero(ca):
                    total = ops.add(total, ops.mul(ca, IB[j]))
            # two infinity points, each contributing (1/(2 lc^{1/2}))^2 = 1/(4 lc)
            return ops.mul(total, ops.mul(ops.from_frac(Frac(1, 2)), lcinv))

    else:
        s = _series_sqrt_one(ops, rev, order)  # series in tau^2 conceptually
        sinv = _series_inv(ops, s, order)

        def laurent_of(vec):
            # omega = -(1/sqrt(lc)) sum_i vec[i] tau^{2g-2-2i} Sinv(tau^2) dtau
            off = 2 * g  # lowest exponent 2g-2-2(2g-1)... allow down to -(2g)
            out = [ops.zero] * (2 * order + 2)
            for i, c in enumerate(vec):
                if ops.is_zero(c):
                    continue
                e0 = 2 * g - 2 - 2 * i + off
                for k, sv in enumerate(sinv):
                    if e0 + 2 * k <= 2 * order + 1 and e0 + 2 * k >= 0:
                        out[e0 + 2 * k] = ops.add(out[e0 + 2 * k], ops.mul(c, sv))
            return out, off

        def cup(a, b):
            A, off = laurent_of(a)
            B, _ = laurent_of(b)
            IB = [ops.zero] * (len(B) + 1)
            for e, c in enumerate(B):
                k = e - off
                if ops.is_zero(c):
                    continue
                if k == -1:
                    raise NotSecondKind("eta has a residue at infinity")
                IB[e + 1] = ops.mul(c, ops.from_frac(Frac(1, k + 1)))
            total = ops.zero
            for i, ca in enumerate(A):
                j = (2 * off - 1) - i
                if 0 <= j < len(IB) and not ops.is_zero(ca):
                    total = ops.add(total, ops.mul(ca, IB[j]))
            return ops.mul(total, lcinv)

    n = len(forms)
    out = [[ops.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i < j:
                out[i][j] = cup(forms[i], forms[j])
            elif i > j:
                out[i][j] = ops.neg(out[j][i])
    return out
