"""Cartan calculus for polynomial fields, on the tangent bundle or a local Lie algebroid.

Both :class:`TangentCalculus` and :class:`LocalAlgebroid` expose the same
operations (``apply``, ``bracket``, ``d``, ``lie``) so the Courant-level code
can run unchanged on either.
"""

from __future__ import annotations

import itertools
from typing import Sequence

from .fields import (
    DEGREE_OF_FORM,
    FORM_OF_DEGREE,
    FieldError,
    Kind,
    PolyField,
    _sort_sign,
    evaluate_form,
    form_degree,
    interior,
    section,
    vector,
)
from .poly import Chart, Poly


# -- tangent bundle -----------------------------------------------------------

def apply_vector(X: PolyField, f: Poly) -> Poly:
    """Directional derivative ``X(f)``."""
    ch = X.chart
    out = ch.zero()
    for (i,), xi in X.comps.items():
        df = ch.partial(f, i)
        if df.terms:
            out = out + xi * df
    return out


def lie_bracket(X: PolyField, Y: PolyField) -> PolyField:
    """``[X, Y]^j = X(Y^j) - Y(X^j)``."""
    if X.kind is not Kind.VECTOR or Y.kind is not Kind.VECTOR:
        raise FieldError("lie_bracket needs two vector fields")
    n = X.size
    return vector(X.chart, [apply_vector(X, Y[j]) - apply_vector(Y, X[j]) for j in range(n)])


def exterior_derivative(w: PolyField) -> PolyField:
    """Coordinate exterior derivative of a k-form, k <= 2."""
    k = form_degree(w)
    if k >= 3:
        raise FieldError("exterior derivative implemented up to 2-forms")
    if w.size != w.chart.dim:
        raise FieldError("coordinate d needs a tangent form; use an algebroid for E-forms")
    ch = w.chart
    out: dict = {}
    for key, p in w.comps.items():
        for i in range(ch.dim):
            if i in key:
                continue
            dp = ch.partial(p, i)
            if not dp.terms:
                continue
            skey, sign = _sort_sign((i,) + key)
            term = dp if sign > 0 else -dp
            out[skey] = out[skey] + term if skey in out else term
    return PolyField(ch, FORM_OF_DEGREE[k + 1], out)


def lie_derivative_form(X: PolyField, w: PolyField) -> PolyField:
    """``L_X w = i_X dw + d i_X w`` on the tangent bundle."""
    k = form_degree(w)
    if k == 0:
        return PolyField(w.chart, Kind.SCALAR, {(): apply_vector(X, w.scalar)})
    out = interior(X, exterior_derivative(w)) if k < 3 else None
    dix = exterior_derivative(interior(X, w))
    return dix if out is None else out + dix


class TangentCalculus:
    """The tangent bundle of a chart seen as a Lie algebroid with identity anchor."""

    def __init__(self, chart: Chart):
        self.chart = chart
        self.rank = chart.dim
        self.section_kind = Kind.VECTOR

    def apply(self, X: PolyField, f: Poly) -> Poly:
        return apply_vector(X, f)

    def anchor(self, X: PolyField) -> PolyField:
        return X

    def bracket(self, X: PolyField, Y: PolyField) -> PolyField:
        return lie_bracket(X, Y)

    def d(self, w: PolyField) -> PolyField:
        return exterior_derivative(w)

    def lie(self, X: PolyField, w: PolyField) -> PolyField:
        return lie_derivative_form(X, w)

    def scalar_d(self, f: Poly) -> PolyField:
        return self.d(PolyField(self.chart, Kind.SCALAR, {(): f}))


# -- local Lie algebroid ------------------------------------------------------

class LocalAlgebroid:
    """Rank-``k`` algebroid over a chart in a frame ``e_1..e_k``.

    ``anchor[a]`` is the vector field ``rho(e_a)``; ``structure[(a, b)]`` lists
    the functions ``C^c_ab`` for ``a < b`` (skew in ``a, b``).  The frame
    bracket is ``[e_a, e_b] = -C^c_ab e_c``, matching the section bracket

        [s, v]^c = rho(s)(v^c) - rho(v)(s^c) - sum C^c_ab s^a v^b.
    """

    section_kind = Kind.SECTION

    def __init__(self, chart: Chart, anchor: Sequence[PolyField], structure: dict | None = None):
        self.chart = chart
        self.rank = len(anchor)
        for r in anchor:
            if r.kind is not Kind.VECTOR or r.chart != chart:
                raise FieldError("anchor entries must be vector fields on the chart")
        self.anchor_fields = list(anchor)
        self._C: dict = {}
        for (a, b), cs in (structure or {}).items():
            if a == b:
                raise FieldError("structure functions are skew; diagonal entries must vanish")
            if len(cs) != self.rank:
                raise FieldError(f"structure entry {(a, b)} needs {self.rank} components")
            cs = [c if isinstance(c, Poly) else chart.const(float(c)) for c in cs]
            if a > b:
                a, b, cs = b, a, [-c for c in cs]
            self._C[(a, b)] = cs

    @classmethod
    def tangent(cls, chart: Chart) -> "LocalAlgebroid":
        from .fields import coordinate_vector

        return cls(chart, [coordinate_vector(chart, i) for i in range(chart.dim)])

    def C(self, a: int, b: int) -> list[Poly]:
        if a == b:
            return [self.chart.zero()] * self.rank
        if a < b:
            return self._C.get((a, b), [self.chart.zero()] * self.rank)
        return [-c for c in self._C.get((b, a), [self.chart.zero()] * self.rank)]

    def rho_apply(self, a: int, f: Poly) -> Poly:
        return apply_vector(self.anchor_fields[a], f)

    def anchor(self, s: PolyField) -> PolyField:
        out = vector(self.chart, [self.chart.zero()] * self.chart.dim)
        for (a,), sa in s.comps.items():
            out = out + self.anchor_fields[a].scale(sa)
        return out

    def apply(self, s: PolyField, f: Poly) -> Poly:
        return apply_vector(self.anchor(s), f)

    def _check_section(self, s: PolyField):
        if s.kind is not Kind.SECTION or s.size != self.rank:
            raise FieldError(f"expected an algebroid section of rank {self.rank}")

    def bracket(self, s: PolyField, v: PolyField) -> PolyField:
        self._check_section(s)
        self._check_section(v)
        rs, rv = self.anchor(s), self.anchor(v)
        out = []
        for c in range(self.rank):
            val = apply_vector(rs, v[c]) - apply_vector(rv, s[c])
            for (a,), sa in s.comps.items():
                for (b,), vb in v.comps.items():
                    if a == b:
                        continue
                    cab = self.C(a, b)[c]
                    if cab.terms:
                        val = val - cab * sa * vb
            out.append(val)
        return section(self.chart, out)

    def _frame_bracket_pair(self, a: int, b: int) -> list[Poly]:
        return [-c for c in self.C(a, b)]

    def d(self, w: PolyField) -> PolyField:
        """Algebroid differential of an E-form of degree <= 2 (Koszul formula in the frame)."""
        k = form_degree(w)
        if w.size != self.rank:
            raise FieldError("E-form size does not match the algebroid rank")
        if k >= 3:
            raise FieldError("algebroid differential implemented up to 2-forms")
        out: dict = {}
        for idx in itertools.combinations(range(self.rank), k + 1):
            val = self.chart.zero()
            for i in range(k + 1):
                rest = idx[:i] + idx[i + 1 :]
                term = self.rho_apply(idx[i], w[rest]) if k else self.rho_apply(idx[i], w[()])
                val = val + term if i % 2 == 0 else val - term
            for i, j in itertools.combinations(range(k + 1), 2):
                br = self._frame_bracket_pair(idx[i], idx[j])
                rest = tuple(x for m, x in enumerate(idx) if m not in (i, j))
                acc = self.chart.zero()
                for c, bc in enumerate(br):
                    if bc.terms:
                        acc = acc + bc * w[(c,) + rest]
                val = val + acc if (i + j) % 2 == 0 else val - acc
            if val.terms:
                out[idx] = val
        return PolyField(self.chart, FORM_OF_DEGREE[k + 1], out, self.rank)

    def lie(self, s: PolyField, w: PolyField) -> PolyField:
        """Lie derivative of an E-form along a section.

        1-forms use the component formula
        ``(L_s a)_b = rho(s)(a_b) + sum_c a_c rho_b(s^c) + sum_{a,c} a_c C^c_ab s^a``;
        other degrees go through Cartan's formula.
        """
        self._check_section(s)
        k = form_degree(w)
        if k == 0:
            return PolyField(self.chart, Kind.SCALAR, {(): self.apply(s, w.scalar)})
        if k != 1:
            dix = self.d(interior(s, w))
            return dix if k >= 3 else interior(s, self.d(w)) + dix
        rs = self.anchor(s)
        comps = []
        for b in range(self.rank):
            val = apply_vector(rs, w[b])
            for (c,), ac in w.comps.items():
                sc = s[c]
                if sc.terms:
                    val = val + ac * self.rho_apply(b, sc)
            for (a,), sa in s.comps.items():
                if a == b:
                    continue
                cab = self.C(a, b)
                for (c,), ac in w.comps.items():
                    if cab[c].terms:
                        val = val + ac * cab[c] * sa
            comps.append(val)
        return PolyField(self.chart, Kind.ONE_FORM, {(b,): p for b, p in enumerate(comps)}, self.rank)

    def scalar_d(self, f: Poly) -> PolyField:
        return self.d(PolyField(self.chart, Kind.SCALAR, {(): f}, self.rank))

    # diagnostics
    def jacobi_residual(self) -> float:
        """Largest coefficient of the frame Jacobiator, exact in the polynomial ring."""
        worst = 0.0
        k = self.rank
        for a, b, c in itertools.combinations(range(k), 3):
            ea, eb, ec = (section(self.chart, [self.chart.const(1.0 if i == j else 0.0) for i in range(k)])
                          for j in (a, b, c))
            jac = (self.bracket(self.bracket(ea, eb), ec) + self.bracket(self.bracket(eb, ec), ea)
                   + self.bracket(self.bracket(ec, ea), eb))
            worst = max(worst, jac.max_coeff())
        return worst

    def anchor_residual(self) -> float:
        """How far ``rho`` is from a bracket morphism on frame pairs."""
        worst = 0.0
        k = self.rank
        frame = [section(self.chart, [self.chart.const(1.0 if i == j else 0.0) for i in range(k)])
                 for j in range(k)]
        for a, b in itertools.combinations(range(k), 2):
            lhs = self.anchor(self.bracket(frame[a], frame[b]))
            rhs = lie_bracket(self.anchor_fields[a], self.anchor_fields[b])
            worst = max(worst, (lhs - rhs).max_coeff())
        return worst


def calculus_for(chart: Chart, algebroid: LocalAlgebroid | None = None):
    return algebroid if algebroid is not None else TangentCalculus(chart)


def cartan_residual(calc, s: PolyField, w: PolyField) -> float:
    """Coefficient size of ``L_s w - (i_s d w + d i_s w)`` for a 1-form ``w``."""
    lhs = calc.lie(s, w)
    rhs = interior(s, calc.d(w)) + calc.d(interior(s, w))
    return (lhs - rhs).max_coeff()


__all__ = [
    "TangentCalculus",
    "LocalAlgebroid",
    "apply_vector",
    "lie_bracket",
    "exterior_derivative",
    "lie_derivative_form",
    "calculus_for",
    "cartan_residual",
    "evaluate_form",
    "DEGREE_OF_FORM",
]
