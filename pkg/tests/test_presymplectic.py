import numpy as np
import pytest

from dirackit.blackbox import BlackBoxField, jacobian, lie_bracket_at, partial
from dirackit.calculus import lie_bracket
from dirackit.fields import one_form, two_form, vector
from dirackit.poly import Chart, Poly
from dirackit.presymplectic import (
    InadmissibleError,
    NotContactError,
    presymplectic_bracket,
    presymplectic_check,
    reeb_vector,
)

CH = Chart.euclidean(3)
X1, X2, X3 = (Poly.var(i, 3) for i in range(3))
PTS = [np.array([0.1, -0.4, 0.7]), np.array([1.0, 2.0, -1.0])]


def test_constant_rank_presymplectic_form():
    w = two_form(CH, {(0, 1): 1.0})
    rep = presymplectic_check(w, PTS)
    assert rep["closed"] and rep["constant_kernel_rank"]
    assert rep["kernel_ranks"] == [1, 1]


def test_non_closed_form_is_reported():
    rep = presymplectic_check(two_form(CH, {(1, 2): X1}), PTS)
    assert not rep["closed"]
    assert rep["max_d_omega_coefficient"] == 1.0


def test_kernel_rank_jump_is_reported():
    rep = presymplectic_check(two_form(CH, {(0, 1): X3}), [np.array([0.0, 0, 0]), np.array([0.0, 0, 1])])
    assert not rep["constant_kernel_rank"]


def test_presymplectic_bracket_and_admissibility():
    w = two_form(CH, {(0, 1): 1.0})
    assert presymplectic_bracket(w, X1, X2, PTS[0]) == pytest.approx(1.0)
    with pytest.raises(InadmissibleError):
        presymplectic_bracket(w, X1, X3, PTS[0])


def test_reeb_field_of_standard_contact_form():
    # xi = dz - y dx on (x, y, z)
    xi = one_form(CH, [-X2, 0, 1])
    assert np.allclose(reeb_vector(xi, PTS[0]), [0, 0, 1])


def test_reeb_refuses_closed_form():
    with pytest.raises(NotContactError, match="kernel rank 2"):
        reeb_vector(one_form(CH, [1, 0, 0]), PTS[0])


def test_finite_difference_is_exact_for_cubics():
    f = lambda x: x[0] ** 3 - 2 * x[0] * x[1]  # noqa: E731
    x = np.array([0.3, -1.2])
    assert partial(f, x, 0) == pytest.approx(3 * 0.09 + 2.4, abs=1e-9)
    assert jacobian(lambda x: np.array([x[0] * x[1], x[1]]), x) == pytest.approx(np.array([[-1.2, 0.3], [0, 1]]))


def test_blackbox_bracket_matches_polynomial_bracket():
    X = vector(CH, [X2 * X3, X1, 1.0])
    Y = vector(CH, [0, X1 * X1, X2])
    exact = lie_bracket(X, Y)
    bx, by = BlackBoxField(X.at, 3), BlackBoxField(Y.at, 3)
    for p in PTS:
        assert np.allclose(lie_bracket_at(bx, by, p), exact.at(p), atol=1e-6)
