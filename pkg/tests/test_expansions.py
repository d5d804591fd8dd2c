from fractions import Fraction as F

from ladic_heights.annulus import decompose, pow_half
from ladic_heights.clusters import build_cluster_picture
from ladic_heights.expansions import (
    Band,
    annulus_band,
    binom_series,
    coherent_sqrt_h,
    expand_linpow,
    expand_poly,
    f_inv_sqrt_on_band,
    sigma_cover,
    sqrt_one_unit,
    square_root_data,
    to_branch_cover,
)
from ladic_heights.padic import make_field, tp_from_rationals
from ladic_heights.roots import splitting_roots

K3 = make_field(3, 1, 1)


def _af_close(a, b):
    d = a - b
    for i, c in d.coeffs.items():
        w = d.v2
        assert d.B2 is None or c.valuation() + w * i >= d.B2 - 2, (i, c)


def test_expand_poly_exact():
    poly = tp_from_rationals(K3, [2, 0, 1], 20)  # x^2 + 2
    band = Band(center=K3.from_int(1, 20), v1=F(2), v2=F(1))
    af = expand_poly(poly, band)
    # (1+t)^2 + 2 = 3 + 2t + t^2
    assert af.coeffs[0].coeffs[0] == 3
    assert af.coeffs[1].coeffs[0] == 2
    assert af.coeffs[2].coeffs[0] == 1


def test_expand_linpow_inverse_roundtrip():
    band = Band(center=K3.zero(20), v1=F(3), v2=F(2))
    a = K3.from_int(81, 20)  # v = 4 > band: t-dominant
    inv = expand_linpow(a, -1, band, 12)
    lin = expand_linpow(a, 1, band, 12)
    prod = inv * lin
    c0 = prod.coeff(0)
    assert (c0 - K3.one(c0.prec)).is_zeroish()
    for i, c in prod.coeffs.items():
        if i != 0:
            assert c.valuation() + prod.v2 * i >= prod.B2


def test_binom_series_square():
    band = Band(center=K3.zero(24), v1=F(3), v2=F(2))
    u = expand_linpow(K3.zero(24), 1, band, 8).scalar(K3.from_int(3, 24))  # u = 3t
    s = binom_series(u, 1, 6)  # (1+3t)^{1/2}
    sq = s * s
    # should represent 1 + 3t
    d0 = sq.coeff(0) - K3.one(20)
    d1 = sq.coeff(1) - K3.from_int(3, 20)
    assert d0.is_zeroish() and d1.is_zeroish()


def test_sqrt_one_unit_principal():
    x = K3.from_int(1 + 3 * 5, 12)
    r = sqrt_one_unit(x)
    assert r.residue() == K3.residue_field.one
    assert (r * r - x).is_zeroish()


def test_coherent_sqrt_squares_to_h():
    # Shimura curve at 3: h of a twin cluster, expanded on its own annulus
    coeffs = [1, -6, 5, 6, 2, 0, 1]
    rs = splitting_roots(coeffs, 3, 16)
    cp = build_cluster_picture(rs, 1)
    twins = [c for c in cp.top.children if c.size == 2]
    tw = twins[0]
    br = coherent_sqrt_h(cp, tw, sign=1)
    band = annulus_band(cp, tw)
    exp = br.expand_on(band, 12)
    sq = exp * exp
    # h_tw = f / g_tw where g_tw = product over odd children of tw: tw is even
    # with two odd (singleton) children -> g_tw = (x-a)(x-b), h = f/g
    from ladic_heights.padic import tp_from_rationals as tfr

    K = cp.field
    f_poly = tfr(K, coeffs, 16)
    hexp_full = expand_poly(f_poly, band)
    g = cp.g_poly(tw)
    gexp = expand_poly(g, band)
    lhs = sq * gexp
    _af_close(lhs, hexp_full)


def test_leading_scalar_matches_expansion():
    coeffs = [1, -6, 5, 6, 2, 0, 1]
    rs = splitting_roots(coeffs, 3, 16)
    cp = build_cluster_picture(rs, 1)
    tw = [c for c in cp.top.children if c.size == 2][0]
    br = coherent_sqrt_h(cp, tw, sign=1)
    band = annulus_band(cp, tw)
    lead, deg = br.leading_on(band)
    exp = br.expand_on(band, 10)
    c, d, _ = decompose(exp)
    assert d == deg
    # leading scalars agree up to a 1-unit (series corrections)
    ratio = c * lead.inv()
    diff = ratio - cp.field.one(ratio.prec)
    assert diff.is_zeroish() or diff.valuation() > 0


def test_f_inv_sqrt_certifies():
    coeffs = [1, -6, 5, 6, 2, 0, 1]
    rs = splitting_roots(coeffs, 3, 16)
    cp = build_cluster_picture(rs, 1)
    tw = [c for c in cp.top.children if c.size == 2][0]
    seeds = square_root_data(cp)
    band = annulus_band(cp, tw)
    r = f_inv_sqrt_on_band(cp, tw, band, 12, seeds)
    f_poly = tp_from_rationals(cp.field, coeffs, 16)
    sq = r * r * expand_poly(f_poly, band)
    # sq represents 1 within its certified bounds at both boundary levels
    one = sq.coeff(0) - cp.field.one(20)
    for w, B in ((sq.v1, sq.B1), (sq.v2, sq.B2)):
        assert B is not None and B > 0
        if not one.is_zeroish():
            assert one.valuation() >= B
        for i, c in sq.coeffs.items():
            if i != 0:
                assert c.valuation() + w * i >= B


def test_square_root_data_uebereven_consistency():
    # bielliptic curve: top is uebereven; after seeding, h_top^(1/2) restricted
    # to each child annulus must equal the child's seeded f^(1/2) branch
    def polymul(a, b):
        out = [F(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return out

    q = 3
    f = polymul(polymul([F(-(q**2)), F(0), F(1)], [F(1 - q), F(-2), F(1)]), [F(1 - q), F(2), F(1)])
    rs = splitting_roots(f, q, 14)
    cp = build_cluster_picture(rs, 1)
    assert cp.top.uebereven
    seeds = square_root_data(cp)
    hbr = coherent_sqrt_h(cp, cp.top, sign=seeds[cp.top.label]["h_sign"])
    for ch in cp.top.proper_children():
        band = annulus_band(cp, ch)
        lhs = hbr.expand_on(band, 10)
        rhs = pow_half(
            expand_poly(tp_from_rationals(cp.field, f, 16), band),
            1,
            10,
            sign=seeds[ch.label]["gh_sign"],
        )
        _af_close(lhs, rhs)


def test_to_branch_cover_levels():
    band = Band(center=K3.zero(20), v1=F(2), v2=F(1))
    poly = tp_from_rationals(K3, [1, 1], 20)
    af = expand_poly(poly, band)
    cov = to_branch_cover(af)
    assert cov.v1 == F(1) and cov.v2 == F(1, 2)
    assert set(cov.coeffs) == {0, 2}


def test_sigma_cover_parametrizes_cubic():
    # g = x(x-9)(x-18) at ell 3 on a band 0 < w < 1 around 0 hits d=3:
    # actually use band below valuation 2 cluster {0, 9, 18}: levels (0, 2)
    g = [F(0), F(162), F(-27), F(1)]
    gp = tp_from_rationals(K3, g, 24)
    band = Band(center=K3.zero(24), v1=F(3, 2), v2=F(1, 2))
    cov = sigma_cover(gp, band, 14)
    # check u^2 = g(c0 + tau) as series in sigma
    gexp = expand_poly(gp, band)
    gs = cov.pull(gexp, 14)
    diff = cov.u * cov.u - gs
    for i, c in diff.coeffs.items():
        assert diff.B2 is None or c.valuation() + diff.v2 * i >= diff.B2 - 2, (i, c)
