"""Expansions of algebraic functions on the annuli of a cluster picture.

This module turns polynomials and their square roots into certified
AnnulusFunction representations on computation bands inside the annuli of the
semistable covering, and fixes the square-root branch data:

* canonical per-band square roots come from the decomposition (pow_half);
* coherent square roots across several bands of one wide open use the
  principal-series product construction: one scalar square root per function
  times principal binomial series anchored at fixed reference roots, which
  analytically continue across the wide open;
* the uebereven compatibility pass compares branch leading scalars on child
  annuli and records the sign flips that make
  h_s^{1/2}|_{A_{s'}} = (g_{s'} h_{s'})^{1/2}|_{A_{s'}} hold.

Odd-cluster annuli are double covers; for a tame branch point alpha the cover
coordinate is t with x = alpha + t^2, and for wild flat clusters the cover is
parametrized by sigma with tau = x - c0 solved as a series in sigma from
sigma^2 = g_s(x)/tau^{2m}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .annulus import (
    AnnulusFunction,
    af_constant,
    af_inv,
    decompose,
    fadd,
    fmin,
    pow_half,
)
from .clusters import Cluster, ClusterPicture
from .errors import (
    FactorVanishes,
    InsufficientPrecision,
    TowerTooSmall,
    ValidationError,
    WildRamification,
)
from .padic import TowerElt, TowerField, tp_eval, tp_shift_var
from .errors import NotASquare, OddValuation

Frac = Fraction




def _work_prec(*afs) -> Frac:
    """Working precision for constants: track the finest coefficient present."""
    best = None
    for af in afs:
        for c in af.coeffs.values():
            if best is None or c.prec > best:
                best = c.prec
    return (best or Frac(32)) + 4


# -- bands ------------------------------------------------------------------------


@dataclass
class Band:
    center: TowerElt
    v1: Frac  # inner level (larger)
    v2: Frac  # outer level


def annulus_band(cp: ClusterPicture, cl: Cluster, pos=Frac(1, 4)) -> Band:
    """A closed computation band inside the annulus of a non-top cluster
    (between the parent depth and the cluster's tame ceiling)."""
    hi = cp.band_ceiling(cl)
    lo = cl.parent.depth if cl.parent is not None else hi - 1
    width = hi - lo
    return Band(center=cp.alpha_elt(cl), v1=hi - width * pos, v2=lo + width * pos)


def outer_band(cp: ClusterPicture, cl: Cluster, pos=Frac(1, 4)) -> Band:
    """A band just below a cluster's depth, on the outside of its disc (used
    for the outer boundary annulus of the cluster's own wide open)."""
    hi = cp.band_ceiling(cl)
    lo = cl.parent.depth if cl.parent is not None else hi - 1
    width = hi - lo
    return Band(center=cp.alpha_elt(cl), v1=hi - width * pos, v2=lo + width * pos)


# -- basic expansions ----------------------------------------------------------------


def expand_poly(poly, band: Band, v1=None) -> AnnulusFunction:
    """Exact expansion of a tower polynomial p(x) with x = center + t."""
    K = band.center.field
    shifted = tp_shift_var(poly, band.center)
    coeffs = {i: c for i, c in enumerate(shifted)}
    return AnnulusFunction(K, band.v1 if v1 is None else v1, band.v2, coeffs, None, None)


def expand_linpow(a: TowerElt, m: int, band: Band, terms: int) -> AnnulusFunction:
    """(t - a)^m on the band, where a = rho - center for a root rho.

    For m < 0 this is a certified geometric series; the dominance side is
    decided by comparing v(a) with the band levels."""
    K = a.field
    if m >= 0:
        af = AnnulusFunction(K, band.v1, band.v2, {0: -a, 1: K.one(a.prec)}, None, None)
        return _af_pow(af, m)
    va = a.val_lower() if a.is_zeroish() else a.valuation()
    if a.is_zeroish() or va > band.v1:
        # t dominates: (t - a)^{-1} = t^{-1} (1 - a/t)^{-1}
        base = AnnulusFunction(K, band.v1, band.v2, {0: K.one(a.prec), -1: -a}, None, None)
        inv = af_inv(base, terms)
        out = inv.shift_powers(-1)
    elif va < band.v2:
        base = AnnulusFunction(K, band.v1, band.v2, {0: -a, 1: K.one(a.prec)}, None, None)
        inv = af_inv(base, terms)
        out = inv
    else:
        raise ValidationError("linear factor vanishes on the band")
    return _af_pow(out, -m)


def _af_pow(af: AnnulusFunction, n: int) -> AnnulusFunction:
    K = af.K
    out = af_constant(K, K.one(_work_prec(af)), af.v1, af.v2)
    b = af
    while n:
        if n & 1:
            out = out * b
        b = b * b
        n >>= 1
    return out


def binom_series(u: AnnulusFunction, num: int, terms: int) -> AnnulusFunction:
    """Principal branch (1 + u)^{num/2} as a truncated binomial series.

    Requires v^w(u) > 0 on both boundaries; num odd (or +-2 for 1/(1+u))."""
    K = u.K
    m1 = None
    if u.v1 is not None:
        m1 = fmin(u.vw(u.v1)[0] if u.coeffs else None, u.B1)
        if m1 is not None and m1 <= 0:
            raise InsufficientPrecision("series argument not small on inner boundary")
    m2 = fmin(u.vw(u.v2)[0] if u.coeffs else None, u.B2)
    if m2 is not None and m2 <= 0:
        raise InsufficientPrecision("series argument not small on outer boundary")
    prec = _work_prec(u)
    acc = af_constant(K, K.one(prec), u.v1, u.v2)
    ui = acc
    coef = Frac(1)
    for i in range(1, terms + 1):
        ui = ui * u
        coef = coef * (Frac(num, 2) - (i - 1)) / i
        acc = acc + ui.scalar(K.from_rational(coef, prec))
    B1 = acc.B1
    if u.v1 is not None and m1 is not None:
        B1 = fmin(B1, (terms + 1) * m1, u.B1)
    B2 = fmin(acc.B2, None if m2 is None else (terms + 1) * m2, u.B2)
    return AnnulusFunction(K, u.v1, u.v2, acc.coeffs, B1, B2).compress()


def sqrt_one_unit(x: TowerElt) -> TowerElt:
    """Square root of a 1-unit whose residue is 1 (the principal branch)."""
    r = x.sqrt()
    K = x.field
    if r.residue() == K.residue_field.one:
        return r
    return -r


# -- coherent square roots across a wide open --------------------------------------


@dataclass
class PairGroup:
    rho0: TowerElt  # reference root
    others: list  # remaining roots in the same disc group


@dataclass
class OutsidePart:
    finite: list  # roots beta outside the wide open
    stub_factors: list  # monic tower polynomials of wild groups outside


@dataclass
class CoherentSqrt:
    """A fixed branch of sqrt(lc * prod groups * outside) on a wide open."""

    K: TowerField
    lc: TowerElt
    center: TowerElt  # the owning cluster's expansion center (gamma_s)
    groups: list  # [PairGroup], each of even total size
    outside: OutsidePart
    sign: int = 1

    def scalar_part(self) -> TowerElt:
        """sqrt(lc * prod_outside (gamma - beta) * prod stubF(gamma)), canonical."""
        s = self.lc
        for beta in self.outside.finite:
            s = s * (self.center - beta)
        for F in self.outside.stub_factors:
            s = s * tp_eval(F, self.center)
        root = s.sqrt()
        return root if self.sign == 1 else -root

    def leading_on(self, band: Band):
        """(scalar, t_degree) of the branch's decomposition on the band."""
        lead = self.scalar_part()
        deg = 0
        for grp in self.groups:
            n = 1 + len(grp.others)
            if n % 2:
                raise WildRamification("odd pair group in a square root")
            a0 = grp.rho0 - band.center
            if a0.is_zeroish() or a0.valuation() > band.v1:
                # group sits inside the inner disc: t-dominant, leading t^{n/2}
                deg += n // 2
            else:
                # sibling side: constant-dominant, multiply principal values
                lead = lead * _group_leading_value(grp, band.center)
        for beta in self.outside.finite:
            u = (band.center - self.center) * (self.center - beta).inv()
            lead = lead * sqrt_one_unit(self.K.one(u.prec) + u)
        for F in self.outside.stub_factors:
            val = tp_eval(F, band.center)
            base = tp_eval(F, self.center)
            lead = lead * sqrt_one_unit(val * base.inv())
        return lead, deg

    def expand_on(self, band: Band, terms: int) -> AnnulusFunction:
        K = self.K
        acc = af_constant(K, self.scalar_part(), band.v1, band.v2)
        prec = self.scalar_part().prec + 4
        for grp in self.groups:
            acc = acc * _group_expansion(grp, band, terms)
        for beta in self.outside.finite:
            # (1 + (x - gamma)/(gamma - beta))^{1/2}, x - gamma = (center' - gamma) + t
            inv = (self.center - beta).inv()
            c0 = (band.center - self.center) * inv
            u = AnnulusFunction(K, band.v1, band.v2, {0: c0, 1: inv}, None, None)
            acc = acc * binom_series(u, 1, terms)
        for F in self.outside.stub_factors:
            base = tp_eval(F, self.center)
            exp = expand_poly(F, band).scalar(base.inv())
            one = af_constant(K, K.one(prec), band.v1, band.v2)
            acc = acc * binom_series(exp - one, 1, terms)
        return acc.compress()


def _group_leading_value(grp: PairGroup, center: TowerElt) -> TowerElt:
    n = 1 + len(grp.others)
    base = center - grp.rho0
    val = base if n % 2 else _pow_elt(base, n // 2)
    if n % 2:
        raise WildRamification("odd pair group in a square root")
    val = _pow_elt(base, n // 2)
    inv = base.inv()
    for rho in grp.others:
        u = (rho - grp.rho0) * inv
        val = val * sqrt_one_unit(u.field.one(u.prec) - u)
    return val


def _pow_elt(x: TowerElt, n: int) -> TowerElt:
    out = x.field.one(x.prec + 2)
    for _ in range(n):
        out = out * x
    return out


def _group_expansion(grp: PairGroup, band: Band, terms: int) -> AnnulusFunction:
    """[(x - rho0)^n prod (1 - (rho - rho0)/(x - rho0))]^{1/2} on the band."""
    K = grp.rho0.field
    n = 1 + len(grp.others)
    if n % 2:
        raise WildRamification("odd pair group in a square root")
    a0 = grp.rho0 - band.center
    lin_half = expand_linpow(a0, n // 2, band, terms)
    xinv = expand_linpow(a0, -1, band, terms)
    acc = lin_half
    for rho in grp.others:
        u = xinv.scalar(-(rho - grp.rho0))
        acc = acc * binom_series(u, 1, terms)
    return acc


def coherent_sqrt_h(cp: ClusterPicture, cl: Cluster, sign: int = 1) -> CoherentSqrt:
    """The branch data of h_cl^{1/2} on the wide open of cl.

    h_cl = f / g_cl; its roots inside proper children form pair groups, the
    rest (including wild stubs outside cl) contribute to the outside part."""
    rs = cp.rootset
    K = cp.field
    gamma = cp.alpha_elt(cl)
    excluded = set()
    for ch in cl.odd_children():
        excluded.add(ch.alpha_idx)
    if not cl.is_proper:
        excluded = {cl.members[0]}
    groups = []
    used = set(excluded)
    for ch in cl.proper_children():
        idxs = [i for i in ch.members if i not in excluded]
        if not idxs:
            continue
        if ch.stub is not None:
            raise WildRamification("coherent branch across a wild subgroup")
        roots = [rs.roots[i] for i in idxs]
        groups.append(PairGroup(rho0=roots[0], others=roots[1:]))
        used.update(idxs)
    finite, stub_factors = [], []
    base = len(rs.roots)
    for s in rs.stubs:
        rng = set(range(base, base + s.count))
        base += s.count
        if rng & set(cl.members):
            if not rng <= used:
                raise WildRamification("coherent branch across a wild subgroup")
            continue
        stub_factors.append(s.factor)
        used.update(rng)
    for i, r in enumerate(rs.roots):
        if i in used or i in excluded:
            continue
        if i in cl.members:
            # a root of h inside cl but not in a proper child: impossible for
            # h_cl (they are exactly the odd-children alphas, excluded)
            raise ValidationError("unexpected interior root in h")
        finite.append(r)
    prec = min((r.prec for r in rs.roots), default=None)
    if prec is None:
        prec = min(s.factor[0].prec for s in rs.stubs)
    lc = K.from_rational(cp.leading_coeff, prec)
    return CoherentSqrt(
        K=K, lc=lc, center=gamma, groups=groups, outside=OutsidePart(finite, stub_factors), sign=sign
    )


# -- seed table (square_root_data) ---------------------------------------------------


def square_root_data(cp: ClusterPicture, terms: int = 8) -> dict:
    """Sign seeds: for every proper cluster a gh_sign (branch of
    (g h)^{1/2} = f^{1/2} on its annulus, relative to the per-band canonical
    choice) and an h_sign for the coherent h branch.

    The uebereven compatibility pass fixes gh_sign of children of uebereven
    clusters so that h_s^{1/2} restricted to a child annulus equals the
    child's (g h)^{1/2} branch; everything else keeps the canonical seed."""
    seeds = {cl.label: {"gh_sign": 1, "h_sign": 1} for cl in cp.proper_clusters()}
    K = cp.field
    for cl in cp.proper_clusters():
        if not cl.uebereven:
            continue
        hbranch = coherent_sqrt_h(cp, cl, sign=seeds[cl.label]["h_sign"])
        for ch in cl.proper_children():
            band = annulus_band(cp, ch)
            lead_h, deg_h = hbranch.leading_on(band)
            fpoly = _f_poly(cp)
            c_f, d_f, _ = decompose(expand_poly(fpoly, band))
            try:
                root_cf = c_f.sqrt()
            except (NotASquare, OddValuation):
                raise TowerTooSmall(K.f * 2, K.e * 2, "square root of leading scalar")
            if 2 * deg_h != d_f:
                raise ValidationError("branch leading degrees disagree")
            ratio = lead_h * root_cf.inv()
            sgn = _round_sign(ratio)
            seeds[ch.label]["gh_sign"] = sgn
    return seeds


def _round_sign(x: TowerElt) -> int:
    """Sign of a unit known to be +-1 times (1 + positive valuation)."""
    K = x.field
    one = K.one(x.prec)
    d_plus = x - one
    d_minus = x + one
    vp = d_plus.val_lower() if not d_plus.is_zeroish() else d_plus.prec
    vm = d_minus.val_lower() if not d_minus.is_zeroish() else d_minus.prec
    if vp > 0 and vm <= 0:
        return 1
    if vm > 0 and vp <= 0:
        return -1
    raise ValidationError("branch ratio is not +-1 times a 1-unit")


def _f_poly(cp: ClusterPicture):
    from .padic import tp_from_rationals

    prec = min((r.prec for r in cp.rootset.roots), default=None)
    if prec is None:
        prec = min(s.factor[0].prec for s in cp.rootset.stubs)
    return tp_from_rationals(cp.field, cp.f_coeffs, prec)


def f_inv_sqrt_on_band(cp: ClusterPicture, cl: Cluster, band: Band, terms: int, seeds) -> AnnulusFunction:
    """(g_cl h_cl)^{-1/2} = f^{-1/2} on a band of cl's annulus, with the
    branch fixed by the cluster's gh seed."""
    try:
        return pow_half(expand_poly(_f_poly(cp), band), -1, terms, sign=seeds[cl.label]["gh_sign"])
    except (NotASquare, OddValuation) as exc:
        raise TowerTooSmall(cp.field.f * 2, cp.field.e * 2, str(exc))


# -- odd covers -----------------------------------------------------------------------


def to_branch_cover(af: AnnulusFunction) -> AnnulusFunction:
    """Pull an expansion in x - alpha back through x - alpha = t^2 (exact
    branch point): indices double, levels and bounds halve."""
    coeffs = {2 * i: c for i, c in af.coeffs.items()}
    v1 = None if af.v1 is None else af.v1 / 2
    return AnnulusFunction(af.K, v1, af.v2 / 2, coeffs, af.B1, af.B2)


@dataclass
class SigmaCover:
    """Parametrization of the connected double cover u^2 = g(x) over a band
    where g decomposes with odd t-degree 2m+1: sigma = u / tau^m,
    tau = x - c0 = tau(sigma)."""

    tau: AnnulusFunction  # tau as a series in sigma
    dtau: AnnulusFunction  # d tau / d sigma
    u: AnnulusFunction  # u as a series in sigma
    v1: Frac
    v2: Frac

    def pull(self, af_x: AnnulusFunction, terms: int) -> AnnulusFunction:
        """Compose an expansion in tau with tau(sigma)."""
        return af_compose(af_x, self.tau, terms)


def sigma_cover(g_poly, band: Band, terms: int) -> SigmaCover:
    """Solve tau(sigma) from sigma^2 = g(x)/tau^{2m}, certify a posteriori."""
    K = band.center.field
    gexp = expand_poly(g_poly, band)
    c_g, d_g, gg = decompose(gexp)
    if d_g % 2 == 0:
        raise ValidationError("even leading degree: cover is split, not connected")
    m = (d_g - 1) // 2
    vc = c_g.valuation()
    sv1 = (vc + band.v1) / 2
    sv2 = (vc + band.v2) / 2
    one = af_constant(K, K.one(c_g.prec + 4), sv1, sv2)
    # S = sigma^2 / c_g as a series in sigma; fixed point tau = S/(1 + g(tau))
    S = AnnulusFunction(K, sv1, sv2, {2: c_g.inv()}, None, None)
    tau = S
    for _ in range(max(4, terms)):
        gt = af_compose_af(gg, tau, terms)
        tau = S * af_inv(one + gt, terms)
    # a posteriori certification: residual R = c_g tau (1 + g(tau)) - sigma^2
    gt = af_compose_af(gg, tau, terms)
    sig2 = AnnulusFunction(K, sv1, sv2, {2: K.one(c_g.prec + 4)}, None, None)
    R = (tau * (one + gt)).scalar(c_g) - sig2
    rb1 = fmin(R.vw(sv1)[0] if R.coeffs else None, R.B1)
    rb2 = fmin(R.vw(sv2)[0] if R.coeffs else None, R.B2)
    tau = AnnulusFunction(
        K,
        sv1,
        sv2,
        tau.coeffs,
        fmin(tau.B1, None if rb1 is None else rb1 - vc),
        fmin(tau.B2, None if rb2 is None else rb2 - vc),
    )
    dtau = tau.derivative()
    # with sigma^2 = g(x)/tau^{2m}, the cover coordinate satisfies u = sigma tau^m
    sig = AnnulusFunction(K, sv1, sv2, {1: K.one(c_g.prec + 4)}, None, None)
    u = sig * _af_pow(tau, m)
    return SigmaCover(tau=tau, dtau=dtau, u=u, v1=sv1, v2=sv2)


def af_compose(af_x: AnnulusFunction, tau: AnnulusFunction, terms: int) -> AnnulusFunction:
    return af_compose_af(af_x, tau, terms)


def af_compose_af(outer: AnnulusFunction, tau: AnnulusFunction, terms: int) -> AnnulusFunction:
    """outer(tau(sigma)) for a finite Laurent outer; bounds are transported
    through the level map w_sigma -> w_x."""
    K = outer.K
    v1, v2 = tau.v1, tau.v2
    acc = af_constant(K, K.zero(_work_prec(outer, tau)), v1, v2)
    tinv = None
    pows = {0: af_constant(K, K.one(_work_prec(outer, tau)), v1, v2)}

    def tp(n):
        if n in pows:
            return pows[n]
        if n > 0:
            pows[n] = tp(n - 1) * tau
        else:
            nonlocal tinv
            if tinv is None:
                tinv = af_inv(tau, terms)
            pows[n] = tp(n + 1) * tinv
        return pows[n]

    for i, c in sorted(outer.coeffs.items()):
        acc = acc + tp(i).scalar(c)
    # transported representation error: tau maps the sigma-boundaries to the
    # x-boundaries, so outer's bounds carry over directly; tau's own error is
    # already propagated through the power products above.
    acc = AnnulusFunction(K, v1, v2, acc.coeffs, fmin(acc.B1, outer.B1), fmin(acc.B2, outer.B2))
    return acc.compress()
