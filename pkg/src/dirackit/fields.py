"""Polynomial tensor fields on a chart: scalars, vectors, forms, bivectors, algebroid sections."""

from __future__ import annotations

import enum
import itertools
from typing import Sequence

import numpy as np

from .poly import Chart, Poly


class Kind(str, enum.Enum):
    SCALAR = "Scalar"
    VECTOR = "Vector"
    ONE_FORM = "OneForm"
    TWO_FORM = "TwoForm"
    THREE_FORM = "ThreeForm"
    BIVECTOR = "Bivector"
    SECTION = "AlgebroidSection"


RANK = {
    Kind.SCALAR: 0,
    Kind.VECTOR: 1,
    Kind.SECTION: 1,
    Kind.ONE_FORM: 1,
    Kind.TWO_FORM: 2,
    Kind.BIVECTOR: 2,
    Kind.THREE_FORM: 3,
}
FORM_OF_DEGREE = {0: Kind.SCALAR, 1: Kind.ONE_FORM, 2: Kind.TWO_FORM, 3: Kind.THREE_FORM}
DEGREE_OF_FORM = {v: k for k, v in FORM_OF_DEGREE.items()}


class FieldError(ValueError):
    pass


def _sort_sign(idx: tuple) -> tuple[tuple, int]:
    """Sort an index tuple, returning the sign of the permutation (0 on repeats)."""
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    if len(set(idx)) != len(idx):
        return tuple(idx), 0
    return tuple(idx), sign


class PolyField:
    """Components of a field, keyed by strictly increasing index tuples.

    ``size`` is the range of each index: the chart dimension for tangent
    objects, the fibre dimension for algebroid sections and their forms.
    """

    __slots__ = ("chart", "kind", "size", "comps")

    def __init__(self, chart: Chart, kind: Kind, comps: dict | None = None, size: int | None = None):
        self.chart = chart
        self.kind = Kind(kind)
        self.size = chart.dim if size is None else size
        r = RANK[self.kind]
        out: dict = {}
        for key, p in (comps or {}).items():
            key = (key,) if isinstance(key, int) else tuple(key)
            if len(key) != r:
                raise FieldError(f"{self.kind.value} components need {r} indices, got {key}")
            if any(not 0 <= k < self.size for k in key):
                raise FieldError(f"index {key} out of range for size {self.size}")
            if not isinstance(p, Poly):
                p = Poly.const(float(p), chart.nvars)
            if p.nvars != chart.nvars:
                raise FieldError("component polynomial lives in the wrong ring")
            skey, sign = _sort_sign(key) if r > 1 else (key, 1)
            if sign == 0:
                if not p.is_zero():
                    raise FieldError(f"repeated index {key} in an antisymmetric field")
                continue
            acc = out.get(skey)
            term = p if sign > 0 else -p
            out[skey] = term if acc is None else acc + term
        self.comps = {k: v for k, v in out.items() if v.terms}

    # access
    def __getitem__(self, key) -> Poly:
        key = (key,) if isinstance(key, (int, np.integer)) else tuple(key)
        if RANK[self.kind] > 1:
            skey, sign = _sort_sign(key)
            if sign == 0:
                return self.chart.zero()
            p = self.comps.get(skey)
            if p is None:
                return self.chart.zero()
            return p if sign > 0 else -p
        return self.comps.get(key, self.chart.zero())

    def components(self) -> list[Poly]:
        """Dense list for rank-one fields, the scalar for scalars."""
        if self.kind is Kind.SCALAR:
            return [self[()]]
        if RANK[self.kind] != 1:
            raise FieldError("dense component list only for rank-one fields")
        return [self[i] for i in range(self.size)]

    @property
    def scalar(self) -> Poly:
        if self.kind is not Kind.SCALAR:
            raise FieldError("not a scalar field")
        return self[()]

    def like(self, comps: dict) -> "PolyField":
        return PolyField(self.chart, self.kind, comps, self.size)

    # linear structure
    def _check(self, other: "PolyField"):
        if not isinstance(other, PolyField):
            raise FieldError("expected a PolyField")
        if other.kind is not self.kind or other.size != self.size or other.chart != self.chart:
            raise FieldError(f"cannot combine {self.kind.value}[{self.size}] with {other.kind.value}[{other.size}]")

    def __add__(self, other: "PolyField") -> "PolyField":
        self._check(other)
        out = dict(self.comps)
        for k, p in other.comps.items():
            out[k] = out[k] + p if k in out else p
        return self.like(out)

    def __neg__(self) -> "PolyField":
        return self.like({k: -p for k, p in self.comps.items()})

    def __sub__(self, other: "PolyField") -> "PolyField":
        return self + (-other)

    def scale(self, f) -> "PolyField":
        """Multiply by a number or a scalar polynomial."""
        if isinstance(f, PolyField):
            f = f.scalar
        return self.like({k: p * f for k, p in self.comps.items()})

    def __mul__(self, f) -> "PolyField":
        return self.scale(f)

    __rmul__ = __mul__

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(p.is_zero(tol) for p in self.comps.values())

    def max_coeff(self) -> float:
        return max((p.max_abs() for p in self.comps.values()), default=0.0)

    def degree(self) -> int:
        return max((p.degree() for p in self.comps.values()), default=0)

    # evaluation
    def at(self, point: Sequence[float]) -> np.ndarray | float:
        """Value at a point given in chart direction coordinates."""
        v = self.chart.lift(point)
        return self.at_ring(v)

    def at_ring(self, v: np.ndarray):
        r = RANK[self.kind]
        if r == 0:
            return self[()](v)
        out = np.zeros((self.size,) * r)
        for key, p in self.comps.items():
            val = p(v)
            for perm in itertools.permutations(range(r)):
                pk = tuple(key[i] for i in perm)
                _, sign = _sort_sign(pk)
                out[pk] = sign * val
        return out

    # serialisation
    def to_json(self) -> dict:
        comps = {}
        for key in sorted(self.comps):
            label = ",".join(str(k + 1) for k in key) if key else "0"
            comps[label] = self.comps[key].to_json()
        out = {"dim": self.chart.dim, "kind": self.kind.value, "components": comps}
        if self.size != self.chart.dim:
            out["size"] = self.size
        return out

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {p!r}" for k, p in sorted(self.comps.items()))
        return f"{self.kind.value}[{self.size}]({inner})"


def field_from_json(obj: dict, chart: Chart | None = None) -> PolyField:
    """Read a field written as ``{"dim": n, "kind": ..., "components": {"1,2": {"(1,0,0)": 1.0}}}``.

    Component labels are 1-based, comma-separated indices; ``"0"`` (or an
    empty label) addresses the single component of a scalar.
    """
    kind = Kind(obj["kind"])
    chart = chart or Chart.euclidean(int(obj["dim"]))
    if chart.dim != int(obj["dim"]):
        raise FieldError("field dimension does not match the chart")
    size = int(obj.get("size", chart.dim))
    comps = {}
    for label, mono in obj.get("components", {}).items():
        label = label.strip().strip("()")
        if kind is Kind.SCALAR:
            key = ()
        else:
            key = tuple(int(t) - 1 for t in label.split(",") if t.strip())
        comps[key] = Poly.from_json(mono, chart.nvars)
    return PolyField(chart, kind, comps, size)


# -- constructors -------------------------------------------------------------

def scalar(chart: Chart, p) -> PolyField:
    if not isinstance(p, Poly):
        p = Poly.const(float(p), chart.nvars)
    return PolyField(chart, Kind.SCALAR, {(): p})


def vector(chart: Chart, comps: Sequence) -> PolyField:
    return PolyField(chart, Kind.VECTOR, {(i,): p for i, p in enumerate(comps)})


def one_form(chart: Chart, comps: Sequence, size: int | None = None) -> PolyField:
    return PolyField(chart, Kind.ONE_FORM, {(i,): p for i, p in enumerate(comps)}, size)


def section(chart: Chart, comps: Sequence) -> PolyField:
    return PolyField(chart, Kind.SECTION, {(i,): p for i, p in enumerate(comps)}, len(comps))


def two_form(chart: Chart, comps: dict, size: int | None = None) -> PolyField:
    return PolyField(chart, Kind.TWO_FORM, comps, size)


def three_form(chart: Chart, comps: dict, size: int | None = None) -> PolyField:
    return PolyField(chart, Kind.THREE_FORM, comps, size)


def bivector(chart: Chart, comps: dict) -> PolyField:
    return PolyField(chart, Kind.BIVECTOR, comps)


def form(chart: Chart, degree: int, comps: dict, size: int | None = None) -> PolyField:
    return PolyField(chart, FORM_OF_DEGREE[degree], comps, size)


def zero_like_form(chart: Chart, degree: int, size: int | None = None) -> PolyField:
    return PolyField(chart, FORM_OF_DEGREE[degree], {}, size)


def coordinate_vector(chart: Chart, i: int) -> PolyField:
    return vector(chart, [chart.const(1.0) if j == i else chart.zero() for j in range(chart.dim)])


def coordinate_covector(chart: Chart, i: int, size: int | None = None) -> PolyField:
    size = chart.dim if size is None else size
    return one_form(chart, [chart.const(1.0) if j == i else chart.zero() for j in range(size)], size)


# -- algebra ------------------------------------------------------------------

def form_degree(w: PolyField) -> int:
    if w.kind not in DEGREE_OF_FORM:
        raise FieldError(f"{w.kind.value} is not a form")
    return DEGREE_OF_FORM[w.kind]


def interior(X: PolyField, w: PolyField) -> PolyField:
    """``i_X w`` for a vector (or section) X and a k-form w, k >= 1."""
    k = form_degree(w)
    if X.kind not in (Kind.VECTOR, Kind.SECTION):
        raise FieldError("interior product needs a vector field or section")
    if X.size != w.size:
        raise FieldError("interior product of mismatched sizes")
    if k == 0:
        raise FieldError("interior product of a scalar")
    out: dict = {}
    for key, p in w.comps.items():
        for m, i in enumerate(key):
            xi = X.comps.get((i,))
            if xi is None:
                continue
            rest = key[:m] + key[m + 1 :]
            term = xi * p
            if m % 2:
                term = -term
            out[rest] = out[rest] + term if rest in out else term
    return PolyField(w.chart, FORM_OF_DEGREE[k - 1], out, w.size)


def evaluate_form(w: PolyField, vectors: Sequence[PolyField]) -> Poly:
    """``w(X_1, ..., X_k)`` as a polynomial."""
    k = form_degree(w)
    if len(vectors) != k:
        raise FieldError(f"a {k}-form takes {k} arguments")
    cur = w
    for X in vectors:
        cur = interior(X, cur)
    return cur.scalar if k else w.scalar


def pair(alpha: PolyField, X: PolyField) -> Poly:
    """``alpha(X)`` for a 1-form and a vector (or E-form and section)."""
    return evaluate_form(alpha, [X])


def sharp(pi: PolyField, alpha: PolyField) -> PolyField:
    """``pi♯(alpha)`` with components ``sum_i alpha_i pi^{ij}``."""
    if pi.kind is not Kind.BIVECTOR or alpha.kind is not Kind.ONE_FORM:
        raise FieldError("sharp needs a bivector and a 1-form")
    n = pi.size
    out = []
    for j in range(n):
        acc = pi.chart.zero()
        for i in range(n):
            a = alpha.comps.get((i,))
            if a is not None and i != j:
                pij = pi[i, j]
                if pij.terms:
                    acc = acc + a * pij
        out.append(acc)
    return vector(pi.chart, out)


def flat(w: PolyField, X: PolyField) -> PolyField:
    """``w♭(X) = i_X w`` for a 2-form."""
    if w.kind is not Kind.TWO_FORM:
        raise FieldError("flat needs a 2-form")
    return interior(X, w)


def poisson_bracket(pi: PolyField, f: Poly, g: Poly) -> Poly:
    """``{f, g} = sum_{ij} pi^{ij} d_i f d_j g`` straight from the bivector table."""
    ch = pi.chart
    out = ch.zero()
    for (i, j), p in pi.comps.items():
        fi, fj = ch.partial(f, i), ch.partial(f, j)
        gi, gj = ch.partial(g, i), ch.partial(g, j)
        out = out + p * (fi * gj - fj * gi)
    return out


def matrix_at(w: PolyField, point: Sequence[float]) -> np.ndarray:
    """Dense ``n x n`` matrix of a 2-form or bivector at a point."""
    if RANK[w.kind] != 2:
        raise FieldError("matrix_at needs a rank-two field")
    return np.asarray(w.at(point), dtype=float)
