from fractions import Fraction as F

import pytest

from ladic_heights.annulus import (
    AnnulusFunction,
    af_constant,
    decompose,
    delta_eps,
    integrate,
    inv_sqrt,
    pow_half,
    restrict,
)
from ladic_heights.errors import (
    DegenerateDomain,
    NonzeroResidue,
    NotAUnit,
    OddExponent,
)
from ladic_heights.padic import make_field

K3 = make_field(3, 1, 1)


def af(K, v1, v2, entries, B1=None, B2=None, prec=20):
    coeffs = {i: K.from_rational(F(c), prec) for i, c in entries.items()}
    return AnnulusFunction(K, v1, v2, coeffs, B1, B2)


def test_decompose_monomial():
    h = af(K3, 3, 1, {3: 5})
    c, d, g = decompose(h)
    assert d == 3 and c.coeffs[0] == 5
    assert not g.coeffs


def test_decompose_t_plus_3_unit_domain():
    # h = t + 3 on v1=3, v2=2: minima at i=0 for both boundaries -> (3, 0, t/3)
    h = af(K3, 3, 2, {0: 3, 1: 1})
    c, d, g = decompose(h)
    assert d == 0 and c.valuation() == 1
    # g = t/3: coefficient of t has valuation -1
    assert g.coeffs[1].valuation() == -1


def test_decompose_t_plus_3_not_unit():
    # on v1=2, v2=1 the minima tie at the outer boundary: zero on the annulus
    h = af(K3, 2, 1, {0: 3, 1: 1})
    with pytest.raises(NotAUnit):
        decompose(h)


def test_inv_sqrt_t_squared():
    # ideal bounds are infinite; with finite-precision coefficients the bounds
    # degrade gracefully to the folded coefficient precision
    h = af(K3, 4, 2, {2: 1}, prec=20)
    r = inv_sqrt(h, 3)
    assert r.support() == [-1]
    assert r.coeffs[-1].coeffs[0] == 1
    assert r.B1 >= 10 and r.B2 >= 10


def test_inv_sqrt_binomial_oracle():
    # h = 4(1 + 3t) -> h^{-1/2} = (1/2)(1 - (3/2) t + (27/8) t^2 - ...)
    h = af(K3, 3, 1, {0: 4, 1: 12})
    r = inv_sqrt(h, 2)
    # canonical sqrt(4) = 2 (least representative), so leading is 1/2
    c0 = r.coeffs[0]
    assert (c0 - K3.from_rational(F(1, 2), c0.prec)).is_zeroish()
    c1 = r.coeffs[1]
    assert (c1 - K3.from_rational(F(1, 2) * F(-3, 2), c1.prec)).is_zeroish()
    c2 = r.coeffs[2]
    assert (c2 - K3.from_rational(F(1, 2) * F(27, 8), c2.prec)).is_zeroish()
    # certified: r^2 * h represents 1 within bounds
    sq = r * r * h
    one = sq.coeff(0)
    assert (one - K3.one(one.prec)).is_zeroish()
    for i, c in sq.coeffs.items():
        if i != 0:
            assert c.valuation() + sq.v2 * i >= sq.B2


def test_pow_half_odd_exponent():
    h = af(K3, 4, 2, {3: 1})
    with pytest.raises(OddExponent):
        pow_half(h, -1, 3)


def test_residue_orientation_antisymmetric():
    h = af(K3, 2, 1, {-1: 1})
    r1 = h.residue(1)
    r2 = h.residue(-1)
    assert (r1 + r2).is_zeroish()
    assert r1.coeffs[0] == 1


def test_residue_geometric_pole_outside():
    # 1/(t - 3) on an annulus where the pole v(3)=1 lies outside the outer
    # boundary: the expansion -(1/3) sum (t/3)^n has no t^{-1} term
    from ladic_heights.annulus import af_inv

    h = af(K3, F(3), F(2), {0: -3, 1: 1})
    inv = af_inv(h, 12)
    r = inv.residue()
    assert r.is_zeroish()
    c0 = inv.coeffs[0]
    assert (c0 - K3.from_rational(F(-1, 3), c0.prec)).is_zeroish()


def test_residue_geometric_pole_inside():
    # on 1/4 < v(t) < 3/4 the pole sits inside the inner disc: the expansion is
    # t^{-1} sum (3/t)^n and the residue is 1
    from ladic_heights.annulus import af_inv

    h = af(K3, F(3, 4), F(1, 4), {0: -3, 1: 1})
    inv = af_inv(h, 12)
    r = inv.residue()
    assert (r - K3.one(r.prec)).is_zeroish()


def test_integrate_monomial_no_ell_loss():
    K5 = make_field(5, 1, 1)
    h = af(K5, 4, 2, {2: 1})
    out = integrate(h, F(1, 2))
    c = out.coeffs[3]
    assert (c.scale_int(3) - K5.one(c.prec)).is_zeroish()


def test_integrate_delta_loss_at_3():
    # delta(eps) = min_i (eps i - v(i)): at ell=3, eps=1/2: i=3 gives 1/2
    assert delta_eps(F(1, 2), 3) == F(1, 2)
    assert delta_eps(F(1, 6), 3) == F(-1, 2)
    h = af(K3, 4, 2, {2: 1}, B1=F(10), B2=F(8))
    out = integrate(h, F(1, 2))
    # B1' = min(B1 + v1 - delta(eps), B2 + v2 - delta(v1-eps-v2))
    d_eps = delta_eps(F(1, 2), 3)
    d_wide = delta_eps(F(4) - F(1, 2) - F(2), 3)
    assert out.B1 == min(F(10) + 4 - d_eps, F(8) + 2 - d_wide)
    assert out.B2 == min(F(8) + 2 - d_eps, F(10) + 4 - d_wide)


def test_integrate_rejects_residue_term():
    h = af(K3, 4, 2, {-1: 1})
    with pytest.raises(NonzeroResidue):
        integrate(h, F(1, 2))


def test_integrate_rejects_degenerate():
    h = af(K3, 3, 2, {1: 1})
    with pytest.raises(DegenerateDomain):
        integrate(h, F(1))


def test_integrate_then_derivative_roundtrip():
    h = af(K3, 4, 2, {0: 2, 1: 7, 3: -5}, B1=F(12), B2=F(9))
    out = integrate(h, F(1, 2))
    back = out.derivative()
    for i, c in h.coeffs.items():
        d = back.coeff(i) - c
        assert d.is_zeroish()


def test_evaluate_within_bounds():
    h = af(K3, 3, 1, {0: 1, 1: 1}, B1=F(8), B2=F(6))
    t0 = K3.from_int(9, 15)  # v = 2, midpoint level
    val = h.evaluate(t0)
    assert (val - K3.from_int(10, val.prec)).is_zeroish()
    assert val.prec == F(7)  # interpolated bound at w=2


def test_punctured_disc_representation():
    # principal part exact, power series tail bounded
    h = af(K3, None, 1, {-2: 1, 0: 1, 1: 5}, B2=F(9))
    assert h.bound_at(F(5)) == F(9)
    r = restrict(h, F(3), F(2))
    assert r.v1 == 3 and r.B1 == F(9)


def test_compress_folds_small_terms():
    h = af(K3, 3, 2, {0: 1, 5: 3**12}, B1=F(10), B2=F(10))
    out = h.compress()
    assert 5 not in out.coeffs
    assert out.B1 == F(10)
