import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirackit.poly import Chart, Poly, compile_polys, monomials, random_poly


def test_arithmetic_and_evaluation():
    x, y = Poly.var(0, 2), Poly.var(1, 2)
    p = (x + 2 * y) * (x - y) + 3
    assert p([1.0, 2.0]) == pytest.approx((1 + 4) * (1 - 2) + 3)
    assert (p - p).is_zero()
    assert (x ** 3).degree() == 3


def test_diff_of_monomial():
    p = Poly.monomial([2, 1], 3.0)
    assert p.diff(0) == Poly.monomial([1, 1], 6.0)
    assert p.diff(1) == Poly.monomial([2, 0], 3.0)


def test_json_round_trip_and_bad_exponent():
    p = Poly(2, {(1, 0): 1.5, (0, 2): -2.0})
    assert Poly.from_json(p.to_json(), 2) == p
    with pytest.raises(ValueError):
        Poly.from_json({"(1,0,0)": 1.0}, 2)


def test_compiled_polynomials_agree_with_direct_evaluation():
    rng = np.random.default_rng(3)
    ps = [random_poly(rng, 3, 3) for _ in range(4)]
    f = compile_polys(ps, 3)
    x = rng.normal(size=3)
    assert np.allclose(f(x), [p(x) for p in ps])


def test_monomial_count():
    assert len(list(monomials(3, 2))) == 10


def test_angle_direction_differentiates_cos_and_sin():
    ch = Chart.with_angles(1, 1)
    c, s = ch.var(1), ch.var(2)
    assert ch.partial(c, 1) == -s
    assert ch.partial(s, 1) == c
    v = ch.lift([0.3, 0.7])
    assert v[1] == pytest.approx(math.cos(0.7))
    assert ch.coordinates(v) == pytest.approx([0.3, 0.7])


def test_cotangent_chart_adds_flat_momenta():
    T = Chart.with_angles(1, 1, names=["x", "phi"]).cotangent()
    assert T.dim == 4 and T.nvars == 5
    assert T.names == ["x", "phi", "p_x", "p_phi"]


@given(st.integers(0, 10_000))
def test_product_rule(seed):
    rng = np.random.default_rng(seed)
    f, g = random_poly(rng, 3, 2), random_poly(rng, 3, 2)
    for j in range(3):
        assert ((f * g).diff(j) - (f.diff(j) * g + f * g.diff(j))).max_abs() <= 1e-10


@given(st.integers(0, 10_000))
def test_mixed_partials_commute_on_angle_chart(seed):
    rng = np.random.default_rng(seed)
    ch = Chart.with_angles(2, 1)
    p = random_poly(rng, ch.nvars, 3)
    for i in range(ch.dim):
        for j in range(ch.dim):
            lhs = ch.partial(ch.partial(p, i), j)
            rhs = ch.partial(ch.partial(p, j), i)
            assert (lhs - rhs).max_abs() <= 1e-10
