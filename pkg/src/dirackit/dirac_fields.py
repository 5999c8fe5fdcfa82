"""Dirac structures given by polynomial data: graphs of bivectors and 2-forms, and ``D_Q^F``.

``D_Q^F = {(u, i_u Q + a) : u in F, a in F°}`` for a distribution ``F`` cut out
by constraint 1-forms and an optional 2-form ``Q``; with ``Q = 0`` this is
``F ⊕ F°``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .calculus import exterior_derivative, lie_bracket
from .courant import Pair, courant_tensor
from .fields import (
    FieldError,
    Kind,
    PolyField,
    coordinate_covector,
    coordinate_vector,
    evaluate_form,
    field_from_json,
    interior,
    one_form,
    pair,
    sharp,
    vector,
)
from .linear_dirac import verify_dirac
from .poly import Chart, Poly, random_poly
from .subspaces import PontryaginSpace, Subspace, null_space, span

INVOLUTIVITY_TOL = 1e-10
DEFAULT_BUDGET = 30


class FieldKind(str, enum.Enum):
    BIVECTOR_GRAPH = "BivectorGraph"
    TWO_FORM_GRAPH = "TwoFormGraph"
    DISTRIBUTION = "DistributionPlusAnnihilator"


def _det(rows: list[list[Poly]], zero: Poly) -> Poly:
    """Polynomial determinant by cofactor expansion (small sizes only)."""
    k = len(rows)
    if k == 0:
        return zero + 1.0
    if k == 1:
        return rows[0][0]
    out = zero
    for j in range(k):
        if not rows[0][j].terms:
            continue
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        term = rows[0][j] * _det(minor, zero)
        out = out + term if j % 2 == 0 else out - term
    return out


def spanning_fields(chart: Chart, forms: Sequence[PolyField]) -> list[PolyField]:
    """Vector fields annihilated by every constraint form, from generalized cross products.

    For each set of ``k + 1`` directions the signed ``k x k`` minors of the
    constraint matrix give a field in the common kernel.  Wherever the forms
    are independent these fields span the kernel; identically zero ones are
    dropped.
    """
    n, k = chart.dim, len(forms)
    if k == 0:
        return [coordinate_vector(chart, i) for i in range(n)]
    rows = [f.components() for f in forms]
    out = []
    for idx in itertools.combinations(range(n), k + 1):
        comps = [chart.zero() for _ in range(n)]
        for m, i in enumerate(idx):
            cols = idx[:m] + idx[m + 1 :]
            minor = [[r[c] for c in cols] for r in rows]
            val = _det(minor, chart.zero())
            comps[i] = val if m % 2 == 0 else -val
        v = vector(chart, comps)
        if not v.is_zero():
            out.append(v)
    return _prune_redundant(chart, out)


def _prune_redundant(chart: Chart, fields: list[PolyField], probes: int = 6) -> list[PolyField]:
    """Drop fields that never enlarge the span of those kept before them at generic probe points."""
    rng = np.random.default_rng(12345)
    points = random_points(chart, probes, rng)
    kept: list[PolyField] = []
    ranks = [0] * probes
    for f in fields:
        new_ranks = []
        for k, p in enumerate(points):
            M = np.array([g.at(p) for g in kept + [f]])
            new_ranks.append(int(np.linalg.matrix_rank(M, tol=1e-9 * max(1.0, np.abs(M).max()))))
        if any(nr > r for nr, r in zip(new_ranks, ranks)):
            kept.append(f)
            ranks = new_ranks
    return kept


@dataclass
class DiracField:
    """A Dirac structure on a chart described by polynomial data."""

    kind: FieldKind
    chart: Chart
    pi: PolyField | None = None
    omega: PolyField | None = None
    forms: list = field(default_factory=list)
    Q: PolyField | None = None
    fields_: list = field(default_factory=list)

    def __post_init__(self):
        self.kind = FieldKind(self.kind)
        if self.kind is FieldKind.BIVECTOR_GRAPH:
            if self.pi is None or self.pi.kind is not Kind.BIVECTOR:
                raise FieldError("BivectorGraph needs a Bivector payload")
        elif self.kind is FieldKind.TWO_FORM_GRAPH:
            if self.omega is None or self.omega.kind is not Kind.TWO_FORM:
                raise FieldError("TwoFormGraph needs a TwoForm payload")
        else:
            for f in self.forms:
                if f.kind is not Kind.ONE_FORM or f.chart != self.chart:
                    raise FieldError("constraint forms must be 1-forms on the chart")
            if self.Q is not None and self.Q.kind is not Kind.TWO_FORM:
                raise FieldError("Q must be a 2-form")
            if not self.fields_:
                self.fields_ = spanning_fields(self.chart, self.forms)

    # constructors
    @classmethod
    def from_bivector(cls, pi: PolyField) -> "DiracField":
        return cls(FieldKind.BIVECTOR_GRAPH, pi.chart, pi=pi)

    @classmethod
    def from_two_form(cls, omega: PolyField) -> "DiracField":
        return cls(FieldKind.TWO_FORM_GRAPH, omega.chart, omega=omega)

    @classmethod
    def from_constraints(cls, chart: Chart, forms: Sequence[PolyField], Q: PolyField | None = None,
                         fields: Sequence[PolyField] | None = None) -> "DiracField":
        return cls(FieldKind.DISTRIBUTION, chart, forms=list(forms), Q=Q, fields_=list(fields or []))

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def spanning(self) -> list[PolyField]:
        return list(self.fields_)

    # sections
    def section_from_vector(self, X: PolyField) -> Pair:
        if self.kind is FieldKind.TWO_FORM_GRAPH:
            return Pair(X, interior(X, self.omega))
        if self.kind is FieldKind.DISTRIBUTION:
            form = interior(X, self.Q) if self.Q is not None else one_form(self.chart, [self.chart.zero()] * self.dim)
            return Pair(X, form)
        raise FieldError("bivector graphs are parametrized by 1-forms")

    def section_from_form(self, alpha: PolyField) -> Pair:
        if self.kind is not FieldKind.BIVECTOR_GRAPH:
            raise FieldError("only bivector graphs are parametrized by 1-forms")
        return Pair(sharp(self.pi, alpha), alpha)

    def frame_sections(self) -> list[Pair]:
        """Sections spanning the structure at every point where the data is regular."""
        ch, n = self.chart, self.dim
        if self.kind is FieldKind.BIVECTOR_GRAPH:
            return [self.section_from_form(coordinate_covector(ch, i)) for i in range(n)]
        if self.kind is FieldKind.TWO_FORM_GRAPH:
            return [self.section_from_vector(coordinate_vector(ch, i)) for i in range(n)]
        zero_vec = vector(ch, [ch.zero()] * n)
        return ([self.section_from_vector(f) for f in self.fields_]
                + [Pair(zero_vec, w) for w in self.forms])

    def random_section(self, rng: np.random.Generator, degree: int = 2) -> Pair:
        ch, n = self.chart, self.dim

        def rp():
            return random_poly(rng, ch.nvars, degree)

        if self.kind is FieldKind.BIVECTOR_GRAPH:
            return self.section_from_form(one_form(ch, [rp() for _ in range(n)]))
        if self.kind is FieldKind.TWO_FORM_GRAPH:
            return self.section_from_vector(vector(ch, [rp() for _ in range(n)]))
        out = None
        for f in self.fields_:
            term = self.section_from_vector(f.scale(rp()))
            out = term if out is None else out + term
        zero_vec = vector(ch, [ch.zero()] * n)
        for w in self.forms:
            term = Pair(zero_vec, w.scale(rp()))
            out = term if out is None else out + term
        if out is None:
            out = Pair(zero_vec, one_form(ch, [ch.zero()] * n))
        return out

    # pointwise linear algebra
    def subspace_at(self, point: Sequence[float], tol: float = 1e-10) -> Subspace:
        """The fibre ``D(x)`` inside ``T_x ⊕ T*_x`` (ordering: vector part, then covector part)."""
        n = self.dim
        if self.kind is FieldKind.BIVECTOR_GRAPH:
            P = np.asarray(self.pi.at(point))
            rows = np.hstack([P, np.eye(n)])
        elif self.kind is FieldKind.TWO_FORM_GRAPH:
            W = np.asarray(self.omega.at(point))
            rows = np.hstack([np.eye(n), W])
        else:
            W = np.array([f.at(point) for f in self.forms]).reshape(len(self.forms), n)
            F = null_space(W, tol) if len(self.forms) else np.eye(n)
            Qx = np.asarray(self.Q.at(point)) if self.Q is not None else np.zeros((n, n))
            top = np.hstack([F, F @ Qx])
            bottom = np.hstack([np.zeros_like(W), W])
            rows = np.vstack([top, bottom])
        return span(rows, 2 * n, tol)

    def linear_at(self, point: Sequence[float]):
        P = PontryaginSpace.full_dual(self.dim)
        return verify_dirac(self.subspace_at(point), P)

    # serialisation
    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value, "chart": chart_to_json(self.chart)}
        if self.pi is not None:
            out["pi"] = self.pi.to_json()
        if self.omega is not None:
            out["omega"] = self.omega.to_json()
        if self.kind is FieldKind.DISTRIBUTION:
            out["forms"] = [f.to_json() for f in self.forms]
            if self.Q is not None:
                out["Q"] = self.Q.to_json()
        return out


def chart_to_json(chart: Chart) -> dict:
    return {"dim": chart.dim, "angles": len(chart.angle_pairs)}


def chart_from_json(obj: dict | None, dim: int) -> Chart:
    """``{"dim": n, "angles": a}``: the last ``a`` directions are angles."""
    if not obj:
        return Chart.euclidean(dim)
    n = int(obj.get("dim", dim))
    a = int(obj.get("angles", 0))
    return Chart.with_angles(n - a, a) if a else Chart.euclidean(n)


def dirac_field_from_json(obj: dict) -> DiracField:
    kind = FieldKind(obj["kind"])
    if "system" in obj:
        from .mechanics import build_system

        sysm = build_system({"name": obj["system"], "params": obj.get("params", {})})
        return DiracField.from_constraints(sysm.chart, sysm.constraint_forms)
    dim = int(obj.get("dim") or obj.get("chart", {}).get("dim", 0))
    chart = chart_from_json(obj.get("chart"), dim)
    if kind is FieldKind.BIVECTOR_GRAPH:
        return DiracField.from_bivector(field_from_json(obj["pi"], chart))
    if kind is FieldKind.TWO_FORM_GRAPH:
        return DiracField.from_two_form(field_from_json(obj["omega"], chart))
    forms = [field_from_json(f, chart) for f in obj.get("forms", [])]
    Q = field_from_json(obj["Q"], chart) if obj.get("Q") else None
    fields = [field_from_json(f, chart) for f in obj.get("spanning_fields", [])]
    return DiracField.from_constraints(chart, forms, Q, fields)


# -- involutivity -------------------------------------------------------------

def random_points(chart: Chart, count: int, rng: np.random.Generator, radius: float = 1.0) -> list[np.ndarray]:
    """Sample points in a box, angles drawn from the full circle."""
    angle_dirs = {d for d, _, _ in chart.angle_pairs}
    pts = []
    for _ in range(count):
        p = rng.uniform(-radius, radius, chart.dim)
        for d in angle_dirs:
            p[d] = rng.uniform(-math.pi, math.pi)
        pts.append(p)
    return pts


@dataclass
class InvolutivityReport:
    verdict: str
    max_tensor: float
    triples_checked: int
    samples: int
    witness: dict | None
    pointwise_certified: bool
    max_isotropy: float
    distribution: dict | None = None

    @property
    def involutive(self) -> bool:
        return self.verdict == "Involutive"

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "max_abs_tensor": float(self.max_tensor),
            "triples_checked": self.triples_checked,
            "samples": self.samples,
            "witness": self.witness,
            "pointwise_certified": bool(self.pointwise_certified),
            "max_isotropy_residual": float(self.max_isotropy),
        }
        if self.distribution is not None:
            out["distribution"] = self.distribution
        return out


def _max_at(p: Poly, ring_points) -> tuple[float, int]:
    best, where = 0.0, -1
    for k, v in enumerate(ring_points):
        val = float(abs(p(v)))
        if val > best:
            best, where = val, k
    return best, where


def _distribution_report(D: DiracField, ring_points, tol: float) -> dict:
    fields = D.fields_
    worst_bracket = 0.0
    for f, g in itertools.combinations(fields, 2):
        br = lie_bracket(f, g)
        for w in D.forms:
            worst_bracket = max(worst_bracket, _max_at(pair(w, br), ring_points)[0])
    worst_dq = 0.0
    if D.Q is not None and len(fields) >= 3:
        dQ = exterior_derivative(D.Q)
        for trip in itertools.combinations(fields, 3):
            worst_dq = max(worst_dq, _max_at(evaluate_form(dQ, list(trip)), ring_points)[0])
    return {
        "spanning_fields": len(fields),
        "closes_under_bracket": bool(worst_bracket <= tol),
        "max_bracket_leak": float(worst_bracket),
        "restricted_form_closed": bool(worst_dq <= tol),
        "max_restricted_dQ": float(worst_dq),
    }


def involutivity_check(D: DiracField, samples: Sequence[Sequence[float]], section_budget: int = DEFAULT_BUDGET,
                       seed: int = 0, tol: float = INVOLUTIVITY_TOL, degree: int = 2) -> InvolutivityReport:
    """Sample the Courant tensor over section triples of ``D``.

    Triples from :meth:`DiracField.frame_sections` come first, then random
    graph sections with coefficients of degree at most ``degree``, up to
    ``section_budget`` triples in total.  The witness is the first triple and
    sample whose tensor value exceeds ``tol``.
    """
    samples = [np.asarray(s, dtype=float) for s in samples]
    if not samples:
        raise ValueError("empty sample set")
    ring_points = [D.chart.lift(s) for s in samples]
    rng = np.random.default_rng(seed)

    frame = D.frame_sections()
    triples: list[tuple[str, tuple, tuple]] = []
    for idx in itertools.combinations(range(len(frame)), 3):
        if len(triples) >= section_budget:
            break
        triples.append(("frame", idx, tuple(frame[i] for i in idx)))
    r = 0
    while len(triples) < section_budget:
        trip = tuple(D.random_section(rng, degree) for _ in range(3))
        triples.append(("random", (r,), trip))
        r += 1

    worst, witness = 0.0, None
    for origin, idx, trip in triples:
        T = courant_tensor(*trip)
        val, _ = _max_at(T, ring_points)
        if val > tol and witness is None:
            first = next(k for k, v in enumerate(ring_points) if abs(T(v)) > tol)
            witness = {"source": origin, "index": list(idx), "sample_index": first,
                       "point": [float(t) for t in samples[first]], "value": float(T(ring_points[first]))}
        worst = max(worst, val)

    certified, iso = True, 0.0
    for s in samples:
        ld = D.linear_at(s)
        certified = certified and ld.certified
        iso = max(iso, ld.diagnostics["isotropy_residual"])

    dist = _distribution_report(D, ring_points, tol) if D.kind is FieldKind.DISTRIBUTION else None
    verdict = "Involutive" if worst <= tol else "NotInvolutive"
    if dist is not None:
        dist["criterion_consistent"] = bool((verdict == "Involutive") == (
            dist["closes_under_bracket"] and dist["restricted_form_closed"]))
    return InvolutivityReport(verdict, worst, len(triples), len(samples), witness, certified, iso, dist)
