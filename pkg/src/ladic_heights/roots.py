"""Roots of squarefree rational polynomials in tame towers over Q_ell.

The solver recurses on Newton polygon segments: clear a slope by substituting
x -> pi^c x, factor the residual polynomial over the residue field, Hensel-lift
simple residual roots, and recurse with a shift on repeated residual roots.
Whenever the current tower is too small (fractional slope, residual factor of
higher degree) the whole computation restarts in an enlarged tower; nothing is
ever embedded across towers.

Clusters whose internal structure would need a wildly ramified extension are
returned as *wild stubs*: a tame center, the number of roots, their common
distance-to-center level, the monic local factor over the tower (obtained by
Hensel factor lifting), and the multiset of internal pairwise valuations
(obtained from the Newton polygon of a resultant, no roots needed).  Stubs are
only supported when those internal valuations are all equal (a "flat" cluster,
all children singletons); anything deeper raises WildRamification.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import ffield
from .errors import (
    IndistinguishableRoots,
    PrecisionExhausted,
    SquarefreeViolation,
    TowerTooSmall,
    ValidationError,
    WildRamification,
)
from .padic import (
    TowerElt,
    TowerField,
    _ceil_frac,
    tp_add,
    tp_deriv,
    tp_eval,
    tp_from_rationals,
    tp_mul,
    tp_scale,
    tp_scale_var,
    tp_shift_var,
    val_int,
)

Frac = Fraction


# -- Newton polygons ----------------------------------------------------------


@dataclass
class NewtonPolygon:
    vertices: list  # [(index, valuation)]
    slopes: list  # [(root valuation, multiplicity)], ascending valuation


def _lower_hull(points):
    """Lower convex hull of (i, v) points, i strictly increasing."""
    hull = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above segment hull[-2] -> p
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def newton_polygon(coeffs, ell: int) -> NewtonPolygon:
    """Newton polygon of a rational polynomial; slopes are root valuations."""
    pts = []
    for i, c in enumerate(coeffs):
        c = Frac(c)
        if c != 0:
            v = Frac(val_int(c.numerator, ell) - val_int(c.denominator, ell))
            pts.append((i, v))
    if not pts:
        raise ValidationError("newton polygon of the zero polynomial")
    hull = _lower_hull(pts)
    slopes = []
    for (i0, v0), (i1, v1) in zip(hull, hull[1:]):
        m = -(v1 - v0) / (i1 - i0)  # root valuation
        slopes.append((m, i1 - i0))
    slopes.sort(key=lambda t: t[0])
    return NewtonPolygon(vertices=hull, slopes=slopes)


def residual_factor(F: ffield.FiniteField, poly):
    """Factorization over the residue field: [(monic irreducible, mult)]."""
    _, pieces = ffield.factor(F, list(poly))
    return pieces


# -- wild stubs and root sets ---------------------------------------------------


@dataclass
class WildStub:
    center: TowerElt
    count: int
    level: Frac  # v(root - center), equal for all roots of the stub
    inner_val: Frac  # common pairwise valuation v(root_i - root_j) inside
    factor: list  # monic local factor over the tower, degree == count


@dataclass
class RootSet:
    field: TowerField
    roots: list  # TowerElt, finite roots
    stubs: list  # WildStub
    pairwise: dict  # (i, j) -> Fraction, i < j over all indices
    poly: list  # original rational coefficients

    @property
    def n(self) -> int:
        return len(self.roots) + sum(s.count for s in self.stubs)

    def stub_of(self, idx: int):
        """The WildStub owning a virtual index, or None for a finite root."""
        k = len(self.roots)
        if idx < k:
            return None
        for s in self.stubs:
            if idx < k + s.count:
                return s
            k += s.count
        raise IndexError(idx)

    def val_diff(self, i: int, j: int) -> Frac:
        if i == j:
            raise ValueError("no self-distance")
        a, b = min(i, j), max(i, j)
        return self.pairwise[(a, b)]


# -- precision-exact Newton data over a tower -------------------------------------


def _tower_newton_points(poly):
    pts = []
    for i, c in enumerate(poly):
        if not c.is_zeroish():
            pts.append((i, c.valuation(), False))
        else:
            pts.append((i, c.prec, True))  # lower bound only
    return pts


def _hull_segments(poly):
    """Hull segments [(i0, v0, i1, v1)] of a tower polynomial; raises
    PrecisionExhausted when a vertex would rest on an unknown coefficient."""
    pts = _tower_newton_points(poly)
    known = [(i, v) for i, v, fuzzy in pts if not fuzzy]
    if not known:
        raise PrecisionExhausted("all coefficients indistinguishable from zero")
    hull = _lower_hull(known)
    # any fuzzy coefficient lying at-or-below the hull makes the hull unreliable
    for i, v, fuzzy in pts:
        if not fuzzy:
            continue
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= i <= x2:
                seg_v = y1 + (y2 - y1) * Frac(i - x1, x2 - x1)
                if v <= seg_v:
                    raise PrecisionExhausted("newton polygon obscured by precision")
    return [(a[0], a[1], b[0], b[1]) for a, b in zip(hull, hull[1:])]


# -- Hensel machinery ---------------------------------------------------------------


def hensel_root(poly, dpoly, y0: TowerElt, stop_val: Frac) -> TowerElt:
    """Newton iteration from a simple residual root.

    Converges until poly(y) is indistinguishable from zero; the returned root
    precision is capped at v(poly(y)) - v(poly'(y)), the honest accuracy.
    """
    y = y0
    last = None
    for _ in range(100):
        fy = tp_eval(poly, y)
        dfy = tp_eval(dpoly, y)
        if fy.is_zeroish():
            return y.cap_prec(fy.val_lower() - dfy.val_lower())
        v = fy.val_lower()
        y = y - fy * dfy.inv()
        if last is not None and v <= last:
            raise PrecisionExhausted("Newton iteration stalled")
        last = v
    raise PrecisionExhausted("Newton iteration did not converge")


def _ff_poly_bezout(F, a, b):
    """(s, t) with s*a + t*b = 1 for coprime a, b over the residue field."""
    r0, r1 = list(a), list(b)
    s0, s1 = [F.one], []
    t0, t1 = [], [F.one]
    while r1:
        q, r = ffield.pdivmod(F, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, ffield.padd(F, s0, ffield.pscale(F, ffield.pmul(F, q, s1), F.neg(F.one)))
        t0, t1 = t1, ffield.padd(F, t0, ffield.pscale(F, ffield.pmul(F, q, t1), F.neg(F.one)))
    if len(r0) != 1:
        raise ValidationError("factors are not coprime in the residue field")
    inv = F.inv(r0[0])
    return ffield.pscale(F, s0, inv), ffield.pscale(F, t0, inv)


def _residue_poly(K, poly):
    F = K.residue_field
    return ffield.ptrim(F, [c.residue() for c in poly])


def _lift_ff_poly(K, p, prec):
    return [K.from_residue(c, prec) for c in p]


def hensel_factor(K: TowerField, poly, abar, prec) -> tuple:
    """Split a unit-content tower polynomial as A*B with A monic, A = abar mod pi.

    abar must be a monic residue-field polynomial coprime to (poly/abar) mod pi.
    Lifting is linear in pi-digits, quadratically convergent not needed here.
    """
    F = K.residue_field
    pbar = _residue_poly(K, poly)
    bbar, rem = ffield.pdivmod(F, pbar, abar)
    if rem:
        raise ValidationError("abar does not divide poly mod pi")
    s, t = _ff_poly_bezout(F, abar, bbar)  # s*abar + t*bbar = 1
    A = _lift_ff_poly(K, abar, prec)
    B = _lift_ff_poly(K, bbar, prec)
    steps = _ceil_frac(Frac(prec) * K.e) + 1
    for k in range(1, steps + 1):
        E = tp_add(poly, tp_neg_list(tp_mul(A, B)))
        # E should be divisible by pi^k; extract the digit
        digit = [c.scale_pi(-k) for c in E]
        dbar = []
        ok = True
        for c in digit:
            v = c.valuation()
            if v is not None and v < 0:
                ok = False
                break
        if not ok:
            raise PrecisionExhausted("hensel factor digit extraction failed")
        dbar = ffield.ptrim(F, [c.residue() if c.prec > 0 else F.zero for c in digit])
        if not dbar:
            continue
        # solve da*B + db*A = digit mod pi with deg(da) < deg(A)
        da = ffield.pmod(F, ffield.pmul(F, t, dbar), abar)
        db, r2 = ffield.pdivmod(
            F, ffield.padd(F, dbar, ffield.pscale(F, ffield.pmul(F, da, bbar), F.neg(F.one))), abar
        )
        A = tp_add(A, [c.scale_pi(k) for c in _lift_ff_poly(K, da, prec)])
        B = tp_add(B, [c.scale_pi(k) for c in _lift_ff_poly(K, db, prec)])
        A = A[: len(abar)]
    return A, B


def tp_neg_list(a):
    return [-c for c in a]


# -- difference valuations via resultants ---------------------------------------


def pair_valuation_multiset(K: TowerField, fac, prec):
    """Multiset of (v(alpha_i - alpha_j), count), i < j, for the roots of a
    monic tower polynomial, from the Newton polygon of Res_y(f(y), f(y+x))/x^d.

    The resultant over K[x] is computed by Laplace expansion of the Sylvester
    matrix; local factors are small (degree <= 4), so this stays cheap."""
    from math import comb

    d = len(fac) - 1
    if d < 2:
        return []
    zero_poly = [K.zero(prec)]
    const = [[c] for c in fac]  # f(y): coefficients constant in x
    shifted = []  # f(y + x): coefficient of y^k = sum_j C(j,k) fac[j] x^{j-k}
    for k in range(d + 1):
        coeff = [K.zero(prec)] * (d - k + 1)
        for j in range(k, d + 1):
            coeff[j - k] = fac[j].scale_int(comb(j, k))
        shifted.append(coeff)
    size = 2 * d
    M = [[zero_poly] * size for _ in range(size)]
    for i in range(d):
        for j, c in enumerate(const):
            M[i][i + (d - j)] = c
        for j, c in enumerate(shifted):
            M[d + i][i + (d - j)] = c

    def det(row, colset):
        if row == size:
            return [K.one(prec)]
        acc = None
        for idx, c in enumerate(colset):
            entry = M[row][c]
            if len(entry) == 1 and entry[0].is_zeroish():
                continue
            term = tp_mul(entry, det(row + 1, colset[:idx] + colset[idx + 1 :]))
            if idx % 2:
                term = [-cc for cc in term]
            acc = term if acc is None else tp_add(acc, term)
        return acc if acc is not None else list(zero_poly)

    R = det(0, tuple(range(size)))
    pts = []
    for i, c in enumerate(R):
        if i >= d and not c.is_zeroish():
            pts.append((i - d, c.valuation()))
    if not pts or pts[0][0] != 0:
        raise PrecisionExhausted("resultant lacks a unit part at working precision")
    hull = _lower_hull(pts)
    out = []
    for (i0, v0), (i1, v1) in zip(hull, hull[1:]):
        out.append((-(v1 - v0) / (i1 - i0), (i1 - i0) // 2))
    return out


# -- the solver ----------------------------------------------------------------


def _sqfree_check(coeffs):
    a = [Frac(c) for c in coeffs]
    b = [i * a[i] for i in range(1, len(a))]

    def polymod(p, q):
        p = p[:]
        while len(p) >= len(q) and any(x != 0 for x in p):
            while p and p[-1] == 0:
                p.pop()
            if len(p) < len(q):
                break
            f = p[-1] / q[-1]
            d = len(p) - len(q)
            for i in range(len(q)):
                p[d + i] -= f * q[i]
            p.pop()
        while p and p[-1] == 0:
            p.pop()
        return p

    p, q = a[:], b[:]
    while q and any(x != 0 for x in q):
        p, q = q, polymod(p, q)
    while p and p[-1] == 0:
        p.pop()
    return len(p) == 1


class _WildSegment(Exception):
    def __init__(self, center, scale_pow, count, slope):
        self.center = center  # TowerElt, in the original x coordinate
        self.scale_pow = scale_pow  # int: roots live at v = (scale_pow/e) + slope
        self.count = count
        self.slope = slope  # Fraction, relative valuation of (root - center)/pi^scale


def _find_roots(K: TowerField, poly, work_prec, allow_wild, depth=0, only_positive=False):
    """All roots of a tower polynomial (squarefree) plus wild stub seeds.

    Returns (roots, stub_seeds); raises TowerTooSmall to request a restart.
    Roots and centers are in the polynomial's own variable.  With
    only_positive, segments of non-positive root valuation are skipped (used
    in shift recursion, where those roots belong to sibling branches).
    """
    if depth > 64:
        raise PrecisionExhausted("root recursion too deep")
    e = K.e
    roots, seeds = [], []
    if poly[0].is_zeroish():
        # the expansion center itself is a root to working precision
        dfy = tp_eval(tp_deriv(poly), K.zero(poly[0].prec))
        if dfy.is_zeroish():
            raise PrecisionExhausted("center is a near-multiple root")
        roots.append(K.zero(poly[0].prec - dfy.val_lower()))
    for i0, v0, i1, v1 in _hull_segments(poly):
        m = -(v1 - v0) / (i1 - i0)  # root valuation of this segment
        if only_positive and m <= 0:
            continue
        ce = m * e
        if ce.denominator != 1:
            d = ce.denominator
            if d % K.ell == 0:
                if not allow_wild:
                    raise WildRamification(f"slope {m} needs ell | e")
                seeds.append(_WildSegment(K.zero(work_prec), 0, i1 - i0, m))
                continue
            raise TowerTooSmall(K.f, K.e * d)
        c = int(ce)
        pi_c = K.pi_pow(c, work_prec + abs(Frac(c, e)) + 2)
        G = tp_scale_var(poly, pi_c)
        mu = min(x.val_lower() for x in G if not x.is_zeroish())
        emu = int(mu * e)
        G = [x.scale_pi(-emu) for x in G]
        F = K.residue_field
        rbar = ffield.ptrim(F, [x.residue() if x.prec > 0 else F.zero for x in G])
        # restrict to this segment's residual part [i0, i1]
        seg = rbar[: i1 + 1]
        low = next((k for k, cc in enumerate(seg) if not F.is_zero(cc)), 0)
        R = seg[low:]
        for phi, mult in residual_factor(F, R):
            if len(phi) - 1 > 1:
                raise TowerTooSmall(K.f * (len(phi) - 1), K.e)
            z0 = K.from_residue(F.neg(phi[0]), work_prec)
            if mult == 1:
                y = hensel_root(G, tp_deriv(G), z0, work_prec)
                roots.append(pi_c * y)
            else:
                H = tp_shift_var(G, z0)
                sub_roots, sub_seeds = _find_roots(
                    K, H, work_prec, allow_wild, depth + 1, only_positive=True
                )
                if len(sub_roots) + sum(s.count for s in sub_seeds) != mult:
                    raise PrecisionExhausted("repeated residual root did not resolve")
                for r in sub_roots:
                    roots.append(pi_c * (z0 + r))
                for s in sub_seeds:
                    center = pi_c * (z0 + s.center)
                    seeds.append(_WildSegment(center, s.scale_pow + c, s.count, s.slope))
    return roots, seeds


def _stub_from_seed(K, poly_t, seed, work_prec):
    """Build a WildStub for a wild segment: local factor by Hensel splitting of
    the polynomial recentered/rescaled at the seed."""
    center = seed.center
    level = Frac(seed.scale_pow, K.e) + seed.slope
    # recenter at the stub and rescale by pi^{scale_pow}: the stub's roots become
    # the valuation-"slope" roots of the rescaled polynomial
    H = tp_shift_var(poly_t, center)
    pi_c = K.pi_pow(seed.scale_pow, work_prec + abs(Frac(seed.scale_pow, K.e)) + 2)
    G = tp_scale_var(H, pi_c)
    mu = min(x.val_lower() for x in G if not x.is_zeroish())
    G = [x.scale_pi(-int(mu * K.e)) for x in G]
    # roots of the stub = roots of G with valuation slope > 0; every other root
    # of G has valuation <= 0, so the stub factor reduces to z^count mod pi ...
    # after a further rescale by the integer part? slope is fractional with
    # denominator divisible by ell; 0 < slope < 1/e can be assumed only after
    # clearing integer pi powers, so rescale by floor(slope * e) first.
    extra = _floor_frac0(seed.slope * K.e)
    if extra:
        pi_x = K.pi_pow(extra, work_prec + abs(Frac(extra, K.e)) + 2)
        G = tp_scale_var(G, pi_x)
        mu = min(x.val_lower() for x in G if not x.is_zeroish())
        G = [x.scale_pi(-int(mu * K.e)) for x in G]
    F = K.residue_field
    rbar = ffield.ptrim(F, [x.residue() if x.prec > 0 else F.zero for x in G])
    low = next((k for k, cc in enumerate(rbar) if not F.is_zero(cc)), 0)
    if low != seed.count:
        raise WildRamification("wild cluster is not isolated at its own scale")
    abar = [F.zero] * low + [F.one]  # z^count
    # hensel needs abar coprime to the cofactor: true since cofactor(0) != 0
    A, _ = hensel_factor(K, G, abar, work_prec)
    # map the factor back to the original variable: A(z) with x = center + pi^{sp+extra} z
    sp = seed.scale_pow + extra
    pi_inv = K.pi_pow(-sp, work_prec + abs(Frac(sp, K.e)) + 2)
    Ax = tp_scale_var(A, pi_inv)  # A((x - center)/pi^sp) up to scaling
    Ax = tp_shift_var(Ax, -center)
    # normalize monic
    lead = Ax[-1]
    Ax = [cc * lead.inv() for cc in Ax]
    vals = pair_valuation_multiset(K, Ax, work_prec)
    if len(vals) != 1:
        raise WildRamification("wild cluster with nested structure is unsupported")
    inner = vals[0][0]
    return WildStub(center=center, count=seed.count, level=level, inner_val=inner, factor=Ax)


def _floor_frac0(x: Frac) -> int:
    return x.numerator // x.denominator


def splitting_roots(coeffs, ell: int, target_prec, allow_wild=True, max_fe=64, min_tower=(1, 1)) -> RootSet:
    """Find all roots of a squarefree rational polynomial in a tame tower.

    Grows the tower on demand by restarting; wild clusters become stubs when
    allow_wild is set, otherwise WildRamification is raised.  min_tower starts
    the search at a prescribed (f, e), used when downstream square roots have
    already requested an enlargement.
    """
    coeffs = [Frac(c) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise ValidationError("polynomial must have positive degree")
    if not _sqfree_check(coeffs):
        raise SquarefreeViolation("polynomial is not squarefree over Q")
    target_prec = Frac(target_prec)
    f_deg, e_deg = min_tower
    full_coeffs = list(coeffs)
    zero_root = coeffs[0] == 0
    if zero_root:
        coeffs = coeffs[1:]

    while True:
        K = TowerField(ell, f_deg, e_deg)
        work = target_prec + 8
        poly = tp_from_rationals(K, coeffs, work + max(0, -_min_val(coeffs, ell)) + 4)
        try:
            roots, seeds = _find_roots(K, poly, work, allow_wild)
            stubs = [_stub_from_seed(K, poly, s, work) for s in seeds]
            break
        except TowerTooSmall as exc:
            nf = max(f_deg, exc.res_degree)
            ne = max(e_deg, exc.ram_index)
            if nf * ne > max_fe:
                raise PrecisionExhausted(f"tower exceeded cap: f={nf}, e={ne}")
            if ne % ell == 0:
                raise WildRamification("required ramification index divisible by ell")
            f_deg, e_deg = nf, ne

    if zero_root:
        roots.append(K.zero(work))
    expected = len(coeffs) - 1 + (1 if zero_root else 0)
    if len(roots) + sum(s.count for s in stubs) != expected:
        raise PrecisionExhausted(f"found {len(roots)} roots + stubs, expected {expected}")
    roots.sort(key=lambda r: (r.shift, r.coeffs))
    rs = RootSet(field=K, roots=roots, stubs=stubs, pairwise={}, poly=full_coeffs)
    _fill_pairwise(rs, target_prec)
    return rs


def _min_val(coeffs, ell):
    vals = []
    for c in coeffs:
        c = Frac(c)
        if c != 0:
            vals.append(val_int(c.numerator, ell) - val_int(c.denominator, ell))
    return min(vals) if vals else 0


def _fill_pairwise(rs: RootSet, target_prec):
    roots, stubs = rs.roots, rs.stubs
    k = len(roots)
    idx_stub = []
    base = k
    for s in stubs:
        idx_stub.append((base, s))
        base += s.count
    n = rs.n
    for i in range(n):
        for j in range(i + 1, n):
            si, sj = rs.stub_of(i), rs.stub_of(j)
            if si is None and sj is None:
                d = roots[i] - roots[j]
                if d.is_zeroish():
                    raise IndistinguishableRoots(
                        "two roots agree to working precision"
                    )
                v = d.valuation()
            elif si is not None and si is sj:
                v = si.inner_val
            else:
                v = _cross_val(rs, i, j)
            rs.pairwise[(i, j)] = v


def _cross_val(rs: RootSet, i: int, j: int):
    si, sj = rs.stub_of(i), rs.stub_of(j)
    if si is None:
        si, sj = sj, si
        i, j = j, i
    # i belongs to stub si; j is a finite root or another stub
    if sj is None:
        d = rs.roots[j] - si.center
        vc = si.level if d.is_zeroish() else d.valuation()
        if vc == si.level:
            raise WildRamification("tame root at exactly the wild level")
        return min(vc, si.level)
    d = si.center - sj.center
    vc = d.valuation() if not d.is_zeroish() else None
    cands = [si.level, sj.level] + ([vc] if vc is not None else [])
    lo = min(cands)
    if cands.count(lo) > 1 and lo == si.level == sj.level and (vc is None or vc > lo):
        raise WildRamification("overlapping wild clusters are unsupported")
    return lo


def check_ultrametric(rs: RootSet) -> bool:
    n = rs.n
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a = rs.val_diff(i, j)
                b = rs.val_diff(i, k)
                c = rs.val_diff(j, k)
                lo = sorted([a, b, c])
                if lo[0] != lo[1]:
                    return False
    return True
