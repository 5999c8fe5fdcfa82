"""Courant bracket on sections ``(r, a)`` of ``A ⊕ A*`` with polynomial coefficients.

Convention (the skew bracket)::

    [(r, a), (s, b)] = ([r, s], L_r b - L_s a + 1/2 d(a(s) - b(r)))

The non-skew form ``([r, s], i_r db - i_s da + d(b(r)))`` differs from it by
``1/2 d<<., .>>`` with ``<<(r, a), (s, b)>> = a(s) + b(r)``, and the two
agree on pairs of sections taken from one isotropic subbundle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .calculus import TangentCalculus, calculus_for
from .fields import FieldError, Kind, PolyField, interior, pair
from .poly import Chart, Poly


@dataclass(frozen=True)
class Pair:
    """A section ``(vec, form)`` of ``A ⊕ A*``."""

    vec: PolyField
    form: PolyField

    def __post_init__(self):
        if self.vec.kind not in (Kind.VECTOR, Kind.SECTION) or self.form.kind is not Kind.ONE_FORM:
            raise FieldError("a Pair is (vector or section, 1-form)")
        if self.vec.size != self.form.size:
            raise FieldError("vector and form parts have different sizes")

    @property
    def chart(self) -> Chart:
        return self.vec.chart

    def __add__(self, other: "Pair") -> "Pair":
        return Pair(self.vec + other.vec, self.form + other.form)

    def __sub__(self, other: "Pair") -> "Pair":
        return Pair(self.vec - other.vec, self.form - other.form)

    def __neg__(self) -> "Pair":
        return Pair(-self.vec, -self.form)

    def scale(self, f) -> "Pair":
        return Pair(self.vec.scale(f), self.form.scale(f))

    def max_coeff(self) -> float:
        return max(self.vec.max_coeff(), self.form.max_coeff())

    def at(self, point):
        import numpy as np

        return np.concatenate([self.vec.at(point), self.form.at(point)])

    def to_json(self) -> dict:
        return {"vector": self.vec.to_json(), "form": self.form.to_json()}


def big_pairing(a: Pair, b: Pair) -> Poly:
    """``<<a, b>> = alpha(s) + beta(r)`` (no factor 1/2)."""
    return pair(a.form, b.vec) + pair(b.form, a.vec)


def _scalar(calc, f: Poly) -> PolyField:
    return calc.scalar_d(f)


class IdentityError(AssertionError):
    """An identity that must hold exactly failed beyond tolerance."""


def courant_bracket(a: Pair, b: Pair, algebroid=None, check: bool = False, tol: float = 1e-10) -> Pair:
    """Skew Courant bracket; with ``check`` also confirms it against the non-skew form."""
    if check:
        res = bracket_forms_residual(a, b, algebroid)["corrected"]
        if res > tol:
            raise IdentityError(f"bracket forms disagree (residual {res:.3e})")
    calc = calculus_for(a.chart, algebroid)
    r, alpha = a.vec, a.form
    s, beta = b.vec, b.form
    vec = calc.bracket(r, s)
    form = calc.lie(r, beta) - calc.lie(s, alpha) + _scalar(calc, pair(alpha, s) - pair(beta, r)).scale(0.5)
    return Pair(vec, form)


def dorfman_bracket(a: Pair, b: Pair, algebroid=None) -> Pair:
    """Non-skew form ``([r, s], i_r d beta - i_s d alpha + d(beta(r)))``."""
    calc = calculus_for(a.chart, algebroid)
    r, alpha = a.vec, a.form
    s, beta = b.vec, b.form
    vec = calc.bracket(r, s)
    form = interior(r, calc.d(beta)) - interior(s, calc.d(alpha)) + _scalar(calc, pair(beta, r))
    return Pair(vec, form)


def bracket_forms_residual(a: Pair, b: Pair, algebroid=None) -> dict:
    """Compare the two bracket forms.

    ``corrected`` measures ``skew - (non_skew - 1/2 d<<a, b>>)``, which should
    vanish for all sections; ``literal`` measures ``skew - non_skew``, which
    vanishes when ``<<a, b>>`` is locally constant (e.g. isotropic pairs).
    """
    calc = calculus_for(a.chart, algebroid)
    cb = courant_bracket(a, b, algebroid)
    db = dorfman_bracket(a, b, algebroid)
    half = _scalar(calc, big_pairing(a, b)).scale(0.5)
    return {
        "corrected": (cb - Pair(db.vec, db.form - half)).max_coeff(),
        "literal": (cb - db).max_coeff(),
        "pairing": big_pairing(a, b).max_abs(),
    }


def courant_tensor(a1: Pair, a2: Pair, a3: Pair, algebroid=None, check: bool = False,
                   tol: float = 1e-10) -> Poly:
    """``T(a1, a2, a3) = <<[a1, a2], a3>>`` (trilinear on sections of an isotropic subbundle).

    With ``check``, mutually isotropic inputs are also run through
    :func:`courant_tensor_lie_form` and the two results must agree.
    """
    T = big_pairing(courant_bracket(a1, a2, algebroid), a3)
    if check and isotropy_residual([a1, a2, a3]) <= tol:
        res = (T - courant_tensor_lie_form(a1, a2, a3, algebroid)).max_abs()
        if res > tol * max(1.0, T.max_abs()):
            raise IdentityError(f"tensor forms disagree on isotropic sections (residual {res:.3e})")
    return T


def courant_tensor_lie_form(a1: Pair, a2: Pair, a3: Pair, algebroid=None) -> Poly:
    """The Lie-derivative expression ``L_r beta(t) + L_s gamma(r) + L_t alpha(s)``.

    Equal to :func:`courant_tensor` when the three sections lie in one
    isotropic subbundle.
    """
    calc = calculus_for(a1.chart, algebroid)
    (r, alpha), (s, beta), (t, gamma) = (a1.vec, a1.form), (a2.vec, a2.form), (a3.vec, a3.form)
    return (pair(calc.lie(r, beta), t) + pair(calc.lie(s, gamma), r) + pair(calc.lie(t, alpha), s))


def isotropy_residual(sections, algebroid=None) -> float:
    """Largest coefficient of ``<<a_i, a_j>>`` over the given sections (``i <= j``)."""
    worst = 0.0
    for i, j in itertools.combinations_with_replacement(range(len(sections)), 2):
        worst = max(worst, big_pairing(sections[i], sections[j]).max_abs())
    return worst


@dataclass
class JacobiatorReport:
    vector_residual: float
    form_residual: float
    literal_residual: float
    cyclic_pairing: Poly
    constant: float
    isotropic: bool = False
    tensor_residual: float | None = None

    @property
    def ok(self) -> bool:
        return (self.vector_residual == 0.0 and self.form_residual == 0.0
                and not self.tensor_residual)

    def to_json(self) -> dict:
        return {
            "vector_residual": self.vector_residual,
            "form_residual": self.form_residual,
            "literal_residual": self.literal_residual,
            "constant": self.constant,
            "isotropic": self.isotropic,
            "tensor_residual": self.tensor_residual,
            "ok": self.ok,
        }


CYCLIC_CONSTANT = 1.0 / 6.0
LITERAL_CONSTANT = -1.0 / 3.0


def jacobiator(a1: Pair, a2: Pair, a3: Pair, algebroid=None) -> Pair:
    """Cyclic sum ``[[a1, a2], a3] + [[a2, a3], a1] + [[a3, a1], a2]``."""
    b = lambda x, y: courant_bracket(x, y, algebroid)  # noqa: E731
    return b(b(a1, a2), a3) + b(b(a2, a3), a1) + b(b(a3, a1), a2)


def jacobiator_check(a1: Pair, a2: Pair, a3: Pair, algebroid=None, tol: float = 1e-9) -> JacobiatorReport:
    """Check that the Jacobiator is ``(0, 1/6 d(cyclic sum of <<[a_i, a_j], a_k>>))``.

    ``literal_residual`` reports the same comparison with constant ``-1/3``
    in place of ``1/6``; it is nonzero in general.  When the three sections
    are mutually isotropic, ``tensor_residual`` measures ``J_2 - 1/2 dT``.
    Residuals below ``tol`` (relative to the coefficient scale) are reported
    as exactly zero.
    """
    calc = calculus_for(a1.chart, algebroid)
    jac = jacobiator(a1, a2, a3, algebroid)
    cyc = (courant_tensor(a1, a2, a3, algebroid) + courant_tensor(a2, a3, a1, algebroid)
           + courant_tensor(a3, a1, a2, algebroid))
    dcyc = _scalar(calc, cyc)
    scale = max(1.0, jac.max_coeff(), dcyc.max_coeff())
    vec_res = jac.vec.max_coeff()
    form_res = (jac.form - dcyc.scale(CYCLIC_CONSTANT)).max_coeff()
    literal = (jac.form - dcyc.scale(LITERAL_CONSTANT)).max_coeff()

    def clip(v):
        return 0.0 if v <= tol * scale else v

    isotropic = isotropy_residual([a1, a2, a3]) <= tol
    tensor_res = None
    if isotropic:
        dT = _scalar(calc, courant_tensor(a1, a2, a3, algebroid))
        tensor_res = clip((jac.form - dT.scale(0.5)).max_coeff())
    return JacobiatorReport(clip(vec_res), clip(form_res), clip(literal), cyc, CYCLIC_CONSTANT,
                            isotropic, tensor_res)


def tangent_pair(chart: Chart, vec_comps, form_comps) -> Pair:
    """Convenience constructor for ``(X, alpha)`` on the tangent bundle."""
    from .fields import one_form, vector

    return Pair(vector(chart, vec_comps), one_form(chart, form_comps))


__all__ = [
    "Pair",
    "big_pairing",
    "courant_bracket",
    "dorfman_bracket",
    "bracket_forms_residual",
    "courant_tensor",
    "courant_tensor_lie_form",
    "isotropy_residual",
    "jacobiator",
    "jacobiator_check",
    "JacobiatorReport",
    "IdentityError",
    "tangent_pair",
    "TangentCalculus",
]
