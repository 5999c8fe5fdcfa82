import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirackit.calculus import (
    LocalAlgebroid,
    TangentCalculus,
    apply_vector,
    cartan_residual,
    exterior_derivative,
    lie_bracket,
    lie_derivative_form,
)
from dirackit.courant import (
    CYCLIC_CONSTANT,
    IdentityError,
    Pair,
    big_pairing,
    bracket_forms_residual,
    courant_bracket,
    courant_tensor,
    courant_tensor_lie_form,
    dorfman_bracket,
    jacobiator_check,
    tangent_pair,
)
from dirackit.fields import (
    FieldError,
    Kind,
    PolyField,
    bivector,
    field_from_json,
    interior,
    one_form,
    pair,
    poisson_bracket,
    section,
    sharp,
    two_form,
    vector,
)
from dirackit.poly import Chart, Poly, random_poly

CH = Chart.euclidean(3)
X1, X2, X3 = (Poly.var(i, 3) for i in range(3))


def rvec(rng, deg=2):
    return vector(CH, [random_poly(rng, 3, deg) for _ in range(3)])


def rform(rng, k, deg=2):
    keys = {1: [(0,), (1,), (2,)], 2: [(0, 1), (0, 2), (1, 2)]}[k]
    return PolyField(CH, {1: Kind.ONE_FORM, 2: Kind.TWO_FORM}[k], {key: random_poly(rng, 3, deg) for key in keys})


def rpair(rng, deg=2):
    return Pair(rvec(rng, deg), rform(rng, 1, deg))


# -- fields -------------------------------------------------------------------

def test_antisymmetric_storage_and_sign():
    w = two_form(CH, {(1, 0): X1})
    assert w[0, 1] == -X1
    assert w[1, 0] == X1
    assert w[2, 2].is_zero()


def test_repeated_index_with_nonzero_value_is_refused():
    with pytest.raises(FieldError):
        two_form(CH, {(1, 1): X1})


def test_interior_product_signs():
    w = two_form(CH, {(1, 2): X1})
    e2 = vector(CH, [0, 1, 0])
    e3 = vector(CH, [0, 0, 1])
    assert interior(e2, w)[2] == X1
    assert interior(e3, w)[1] == -X1


def test_sharp_convention_and_poisson_table():
    pi = bivector(CH, {(0, 1): 1.0, (0, 2): X1})
    v = sharp(pi, one_form(CH, [1, 0, 0]))
    assert v[1] == Poly.const(1.0, 3) and v[2] == X1
    assert poisson_bracket(pi, X1, X2) == 1.0
    assert poisson_bracket(pi, X1, X3) == X1


def test_json_uses_one_based_labels():
    w = two_form(CH, {(1, 2): X1})
    obj = w.to_json()
    assert "2,3" in obj["components"]
    back = field_from_json(obj)
    assert (back - w).is_zero()


# -- tangent calculus ---------------------------------------------------------

def test_lie_bracket_of_coordinate_fields():
    X = vector(CH, [1, 0, 0])
    Y = vector(CH, [0, X1, 0])
    assert lie_bracket(X, Y)[1] == 1.0


@given(st.integers(0, 10_000))
def test_d_squared_vanishes(seed):
    rng = np.random.default_rng(seed)
    f = PolyField(CH, Kind.SCALAR, {(): random_poly(rng, 3, 3)})
    assert exterior_derivative(exterior_derivative(f)).is_zero(1e-10)
    assert exterior_derivative(exterior_derivative(rform(rng, 1, 3))).is_zero(1e-10)


@given(st.integers(0, 10_000))
def test_lie_bracket_jacobi_identity(seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = rvec(rng), rvec(rng), rvec(rng)
    jac = lie_bracket(lie_bracket(X, Y), Z) + lie_bracket(lie_bracket(Y, Z), X) + lie_bracket(lie_bracket(Z, X), Y)
    assert jac.max_coeff() <= 1e-9


@given(st.integers(0, 10_000))
def test_cartan_formula_on_tangent_bundle(seed):
    rng = np.random.default_rng(seed)
    calc = TangentCalculus(CH)
    X = rvec(rng)
    assert cartan_residual(calc, X, rform(rng, 1)) <= 1e-9
    assert cartan_residual(calc, X, rform(rng, 2)) <= 1e-9


def test_lie_derivative_of_function_differential():
    X = vector(CH, [X2, 0, 0])
    df = exterior_derivative(PolyField(CH, Kind.SCALAR, {(): X1}))
    # L_X dx1 = d(X(x1)) = d(x2)
    assert lie_derivative_form(X, df)[1] == 1.0
    assert apply_vector(X, X1) == X2


# -- algebroid ----------------------------------------------------------------

def consistent_algebroid():
    ch = Chart.euclidean(2)
    x1 = Poly.var(0, 2)
    anchor = [vector(ch, [1, 0]), vector(ch, [x1, 0])]
    return ch, LocalAlgebroid(ch, anchor, {(0, 1): [Poly.const(-1.0, 2), Poly.zero(2)]})


def test_algebroid_structure_is_consistent():
    _, A = consistent_algebroid()
    assert A.anchor_residual() == 0.0
    assert A.jacobi_residual() == 0.0


def test_algebroid_d_squared_and_cartan():
    ch, A = consistent_algebroid()
    rng = np.random.default_rng(0)
    f = random_poly(rng, 2, 3)
    assert A.d(A.scalar_d(f)).is_zero(1e-10)
    s = section(ch, [random_poly(rng, 2, 2), random_poly(rng, 2, 2)])
    w = one_form(ch, [random_poly(rng, 2, 2), random_poly(rng, 2, 2)], size=2)
    assert cartan_residual(A, s, w) <= 1e-9


def test_inconsistent_anchor_is_reported():
    ch = Chart.euclidean(2)
    x1 = Poly.var(0, 2)
    A = LocalAlgebroid(ch, [vector(ch, [1, 0]), vector(ch, [x1, 0])], {(0, 1): [Poly.zero(2), Poly.zero(2)]})
    assert A.anchor_residual() > 0.5


# -- Courant bracket ----------------------------------------------------------

def test_bracket_pins():
    one = Poly.const(1.0, 3)
    a = tangent_pair(CH, [one, 0, 0], [0, 0, 0])
    b = tangent_pair(CH, [0, 0, 0], [X1, 0, 0])
    got = courant_bracket(a, b)
    assert got.vec.is_zero() and got.form[0] == 0.5
    c = tangent_pair(CH, [one, 0, 0], [0, 0, X2])
    d = tangent_pair(CH, [0, one, 0], [0, 0, 0])
    got = courant_bracket(c, d)
    assert got.vec.is_zero() and got.form[2] == -1.0 and got.form[0].is_zero()


@given(st.integers(0, 10_000))
def test_courant_bracket_is_skew(seed):
    rng = np.random.default_rng(seed)
    a, b = rpair(rng), rpair(rng)
    assert (courant_bracket(a, b) + courant_bracket(b, a)).max_coeff() <= 1e-10


@given(st.integers(0, 10_000))
def test_skew_and_non_skew_forms_differ_by_half_d_pairing(seed):
    rng = np.random.default_rng(seed)
    res = bracket_forms_residual(rpair(rng), rpair(rng))
    assert res["corrected"] <= 1e-10
    # the uncorrected comparison only works when the pairing is constant
    if res["pairing"] > 1e-6:
        assert res["literal"] > 0


def test_check_flag_passes_on_valid_input():
    rng = np.random.default_rng(1)
    courant_bracket(rpair(rng), rpair(rng), check=True)


@given(st.integers(0, 10_000))
def test_jacobiator_is_exact_differential(seed):
    rng = np.random.default_rng(seed)
    rep = jacobiator_check(rpair(rng, 1), rpair(rng, 1), rpair(rng, 1))
    assert rep.ok and rep.constant == CYCLIC_CONSTANT
    assert rep.literal_residual > 0 or rep.cyclic_pairing.is_constant(1e-10)


def test_tensor_lie_form_agrees_on_isotropic_sections():
    rng = np.random.default_rng(5)
    w = rform(rng, 2)
    sections = [Pair(X, interior(X, w)) for X in (rvec(rng), rvec(rng), rvec(rng))]
    T = courant_tensor(*sections, check=True)
    assert (T - courant_tensor_lie_form(*sections)).max_abs() <= 1e-10
    assert big_pairing(sections[0], sections[1]).max_abs() <= 1e-12


def test_dorfman_equals_courant_plus_half_d_pairing():
    rng = np.random.default_rng(2)
    a, b = rpair(rng), rpair(rng)
    calc = TangentCalculus(CH)
    half = calc.scalar_d(big_pairing(a, b)).scale(0.5)
    diff = dorfman_bracket(a, b) - courant_bracket(a, b)
    assert diff.vec.is_zero(1e-10)
    assert (diff.form - half).max_coeff() <= 1e-10


def test_identity_error_is_an_assertion():
    assert issubclass(IdentityError, AssertionError)


def test_algebroid_courant_bracket_jacobiator():
    ch, A = consistent_algebroid()
    rng = np.random.default_rng(7)

    def rp():
        s = section(ch, [random_poly(rng, 2, 1) for _ in range(2)])
        return Pair(s, one_form(ch, [random_poly(rng, 2, 1) for _ in range(2)], size=2))

    rep = jacobiator_check(rp(), rp(), rp(), algebroid=A)
    assert rep.ok
