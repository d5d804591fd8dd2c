from fractions import Fraction as F

import pytest

from ladic_heights.errors import SquarefreeViolation
from ladic_heights.padic import tp_eval, tp_from_rationals
from ladic_heights.roots import (
    check_ultrametric,
    newton_polygon,
    pair_valuation_multiset,
    splitting_roots,
)


def test_newton_polygon_eisenstein():
    np_ = newton_polygon([-3, 0, 1], 3)  # x^2 - 3
    assert np_.slopes == [(F(1, 2), 2)]


def test_newton_polygon_units():
    np_ = newton_polygon([-1, 0, 1], 3)  # x^2 - 1
    assert np_.slopes == [(F(0), 2)]


def test_newton_polygon_two_slopes():
    # (x-3)(x-9) = x^2 - 12x + 27, derived hull by hand: slopes {1, 2}
    np_ = newton_polygon([27, -12, 1], 3)
    assert sorted(np_.slopes) == [(F(1), 1), (F(2), 1)]


def test_splitting_roots_rational_triple():
    rs = splitting_roots([2, -1, -2, 1], 7, 10)  # (x-1)(x+1)(x-2)
    assert rs.field.f == 1 and rs.field.e == 1
    vals = sorted(r.coeffs[0] % 7 for r in rs.roots)
    assert vals == [1, 2, 6]
    for (i, j), v in rs.pairwise.items():
        assert v == 0
    assert check_ultrametric(rs)


def test_splitting_roots_shimura_curve_at_3():
    # two roots in Q_3, one congruent to -5 mod 27
    coeffs = [1, -6, 5, 6, 2, 0, 1]
    rs = splitting_roots(coeffs, 3, 12)
    assert rs.n == 6 and not rs.stubs
    q3_roots = [r for r in rs.roots if all(c == 0 for c in r.coeffs[1:]) or rs.field.f == 1]
    # the tower is Q_9 (f=2, e=1); Q_3-rational roots have no omega component
    assert rs.field.e == 1 and rs.field.f == 2
    rational = [r for r in rs.roots if r.with_shift(0).coeffs[1] == 0]
    assert len(rational) == 2
    assert any(r.coeffs[0] % 27 == (-5) % 27 for r in rational)
    # polynomial vanishes at each root
    poly = tp_from_rationals(rs.field, coeffs, 14)
    for r in rs.roots:
        val = tp_eval(poly, r)
        assert val.is_zeroish()


def test_splitting_roots_ramified():
    # x^4 - 3x^2 + 36: Newton slopes 1/2, roots in a ramified quadratic tower
    coeffs = [36, 0, -3, 0, 1]
    rs = splitting_roots(coeffs, 3, 10)
    assert rs.field.e == 2
    assert all(r.valuation() == F(1, 2) for r in rs.roots)
    poly = tp_from_rationals(rs.field, coeffs, 14)
    for r in rs.roots:
        assert tp_eval(poly, r).is_zeroish()


def test_splitting_roots_rejects_non_squarefree():
    with pytest.raises(SquarefreeViolation):
        splitting_roots([1, 2, 1], 5, 8)  # (x+1)^2


def test_newton_consistency_sum_of_valuations():
    coeffs = [27, -12, 1]
    rs = splitting_roots(coeffs, 3, 10)
    total = sum(r.valuation() for r in rs.roots)
    assert total == 3  # v(a0/an) = v(27) = 3


def test_ultrametric_property_structured():
    # roots 1, 1+3, 1+9, 2 at ell=3: nested clusters
    # f = (x-1)(x-4)(x-10)(x-2)
    import math

    def expand(roots):
        poly = [F(1)]
        for r in roots:
            poly = [a * (-r) for a in poly] + [F(0)]
            poly = [poly[i] + (poly[i + 1] if False else 0) for i in range(len(poly))]
        return poly

    # direct expansion
    poly = [F(1)]
    for r in [1, 4, 10, 2]:
        new = [F(0)] * (len(poly) + 1)
        for i, a in enumerate(poly):
            new[i + 1] += a
            new[i] += -r * a
        poly = new
    rs = splitting_roots(poly, 3, 12)
    assert check_ultrametric(rs)
    vals = sorted(rs.pairwise.values())
    assert vals == [0, 0, 0, 1, 1, 2]


def test_wild_stub_qc_curve_at_3():
    # quadratic Chabauty curve: roots fall in wildly ramified cubics; the
    # solver must return two flat wild stubs with depths 1/2 and 5/6
    coeffs = [F(1, 5), F(6, 5), F(9, 5), F(6, 5), F(18, 5), 0, 1]
    rs = splitting_roots(coeffs, 3, 12)
    assert len(rs.stubs) == 2 and not rs.roots
    inner = sorted(s.inner_val for s in rs.stubs)
    assert inner == [F(1, 2), F(5, 6)]
    assert all(s.count == 3 for s in rs.stubs)
    # cross-stub distances are 0 (the clusters sit at residues 1 and -1)
    assert rs.val_diff(0, 3) == 0
    assert check_ultrametric(rs)


def test_pair_valuation_multiset_tame_oracle():
    # roots {1, 1+9, 1+2*9}: all pairwise valuations 2
    poly = [F(1)]
    for r in [1, 10, 19]:
        new = [F(0)] * (len(poly) + 1)
        for i, a in enumerate(poly):
            new[i + 1] += a
            new[i] += -r * a
        poly = new
    rs = splitting_roots(poly, 3, 12)
    K = rs.field
    fac = tp_from_rationals(K, poly, 16)
    ms = pair_valuation_multiset(K, fac, 16)
    assert ms == [(F(2), 3)]
