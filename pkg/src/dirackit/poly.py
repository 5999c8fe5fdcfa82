"""Sparse multivariate polynomials and coordinate charts.

A :class:`Poly` maps exponent tuples to float coefficients.  A
:class:`Chart` says how coordinate directions act on the polynomial ring:
on a flat chart direction ``i`` is plain ``d/dx_i``, while an angle
direction acts on a ``(c, s)`` pair through ``dc = -s``, ``ds = c``.
"""

from __future__ import annotations

import ast
import math
import operator
from typing import Iterable, Sequence

import numpy as np

PRUNE = 1e-12


def _add_exp(a: tuple, b: tuple) -> tuple:
    return tuple(map(operator.add, a, b))


def _glex_key(e: tuple):
    return (sum(e), e)


class Poly:
    """Polynomial in ``nvars`` variables with real coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None, prune: float = PRUNE):
        self.nvars = nvars
        if terms:
            self.terms = {e: float(c) for e, c in terms.items() if abs(c) > prune}
        else:
            self.terms = {}

    # constructors
    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars)

    @classmethod
    def const(cls, c: float, nvars: int) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, i: int, nvars: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1.0})

    @classmethod
    def monomial(cls, exps: Sequence[int], coef: float = 1.0) -> "Poly":
        return cls(len(exps), {tuple(int(k) for k in exps): coef})

    # arithmetic
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError(f"polynomials in {self.nvars} and {other.nvars} variables")
            return other
        return Poly.const(float(other), self.nvars)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            k = float(other)
            if k == 0.0:
                return Poly(self.nvars)
            return Poly(self.nvars, {e: c * k for e, c in self.terms.items()})
        other = self._coerce(other)
        out: dict = {}
        get, add = out.get, operator.add
        right = list(other.terms.items())
        for e1, c1 in self.terms.items():
            for e2, c2 in right:
                e = tuple(map(add, e1, e2))
                out[e] = get(e, 0.0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> "Poly":
        return self * (1.0 / float(k))

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(1.0, self.nvars)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Poly, int, float)):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    # calculus
    def diff(self, j: int) -> "Poly":
        out: dict = {}
        for e, c in self.terms.items():
            k = e[j]
            if k:
                e2 = e[:j] + (k - 1,) + e[j + 1 :]
                out[e2] = out.get(e2, 0.0) + c * k
        return Poly(self.nvars, out)

    def __call__(self, x: Sequence[float]) -> float:
        total = 0.0
        for e, c in self.terms.items():
            t = c
            for xi, k in zip(x, e):
                if k:
                    t *= xi**k
            total += t
        return total

    evaluate = __call__

    # inspection
    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_constant(self, tol: float = 0.0) -> bool:
        return all(sum(e) == 0 or abs(c) <= tol for e, c in self.terms.items())

    def constant_term(self) -> float:
        return self.terms.get((0,) * self.nvars, 0.0)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: _glex_key(t[0]))

    def to_json(self) -> dict:
        return {"(" + ",".join(str(k) for k in e) + ")": c for e, c in self.sorted_terms()}

    @classmethod
    def from_json(cls, obj: dict, nvars: int) -> "Poly":
        terms = {}
        for key, c in obj.items():
            e = ast.literal_eval(key)
            e = (e,) if isinstance(e, int) else tuple(e)
            if len(e) != nvars:
                raise ValueError(f"monomial {key} has {len(e)} exponents, expected {nvars}")
            if any(k < 0 for k in e):
                raise ValueError(f"negative exponent in {key}")
            terms[e] = terms.get(e, 0.0) + float(c)
        return cls(nvars, terms)

    def to_source(self, names: Sequence[str]) -> str:
        """Python expression for fast repeated evaluation."""
        if not self.terms:
            return "0.0"
        parts = []
        for e, c in self.sorted_terms():
            factors = [repr(c)]
            for name, k in zip(names, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}**{k}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for e, c in self.sorted_terms():
            mono = "*".join(f"x{i}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            out.append(f"{c:g}" + ("*" + mono if mono else ""))
        return " + ".join(out)


def compile_polys(polys: Sequence[Poly], nvars: int):
    """Compile a list of polynomials into one function ``f(x) -> ndarray``.

    Generated Python source avoids per-term dictionary walks in tight loops
    such as the integrator's stage evaluations.
    """
    names = [f"v{i}" for i in range(nvars)]
    body = ", ".join(p.to_source(names) for p in polys)
    unpack = ", ".join(names) + ("," if nvars == 1 else "")
    src = f"def _f(x):\n    {unpack} = x\n    return _np.array([{body}], dtype=float)\n"
    ns = {"_np": np}
    exec(compile(src, "<compiled-polys>", "exec"), ns)  # noqa: S102 - source built from numeric coefficients only
    return ns["_f"]


class Chart:
    """Coordinate directions acting as derivations of a polynomial ring.

    ``derivations[i]`` maps ring-variable index ``j`` to the polynomial
    ``d_i(v_j)``; variables absent from the map are constant along ``i``.
    """

    def __init__(self, nvars: int, derivations: list[dict], names: Sequence[str] | None = None,
                 angle_pairs: Sequence[tuple[int, int, int]] = ()):
        self.nvars = nvars
        self.derivations = derivations
        self.dim = len(derivations)
        self.names = list(names) if names else [f"x{i + 1}" for i in range(self.dim)]
        # (direction, cos var, sin var) for every angle direction
        self.angle_pairs = tuple(angle_pairs)
        self._simple = []
        for der in derivations:
            simple = None
            if len(der) == 1:
                (j, p), = der.items()
                if p.is_constant() and p.constant_term() == 1.0:
                    simple = j
            self._simple.append(simple)

    @classmethod
    def euclidean(cls, n: int, names: Sequence[str] | None = None) -> "Chart":
        ders = [{i: Poly.const(1.0, n)} for i in range(n)]
        return cls(n, ders, names)

    @classmethod
    def with_angles(cls, n_linear: int, n_angles: int, names: Sequence[str] | None = None) -> "Chart":
        """Flat coordinates followed by angles, each angle carried by a ``(c, s)`` pair."""
        nvars = n_linear + 2 * n_angles
        ders: list[dict] = [{i: Poly.const(1.0, nvars)} for i in range(n_linear)]
        pairs = []
        for a in range(n_angles):
            ci, si = n_linear + 2 * a, n_linear + 2 * a + 1
            ders.append({ci: -Poly.var(si, nvars), si: Poly.var(ci, nvars)})
            pairs.append((n_linear + a, ci, si))
        return cls(nvars, ders, names, pairs)

    @property
    def is_euclidean(self) -> bool:
        return self.nvars == self.dim and all(s == i for i, s in enumerate(self._simple))

    def zero(self) -> Poly:
        return Poly.zero(self.nvars)

    def const(self, c: float) -> Poly:
        return Poly.const(c, self.nvars)

    def var(self, j: int) -> Poly:
        return Poly.var(j, self.nvars)

    def coordinate(self, i: int) -> Poly:
        """The polynomial representing coordinate function ``i`` (flat directions only)."""
        if self._simple[i] is None:
            raise ValueError(f"direction {i} is an angle and has no polynomial coordinate")
        return self.var(self._simple[i])

    def partial(self, p: Poly, i: int) -> Poly:
        j = self._simple[i]
        if j is not None:
            return p.diff(j)
        out = Poly.zero(self.nvars)
        for j, dv in self.derivations[i].items():
            dp = p.diff(j)
            if dp.terms:
                out = out + dp * dv
        return out

    def lift(self, point: Sequence[float]) -> np.ndarray:
        """Ring-variable values at a point given in direction coordinates."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise ValueError(f"point must have {self.dim} coordinates")
        out = np.zeros(self.nvars)
        angle_dirs = {d: (c, s) for d, c, s in self.angle_pairs}
        for i in range(self.dim):
            if i in angle_dirs:
                c, s = angle_dirs[i]
                out[c], out[s] = math.cos(point[i]), math.sin(point[i])
            else:
                out[self._simple[i]] = point[i]
        return out

    def coordinates(self, values: Sequence[float]) -> np.ndarray:
        """Inverse of :meth:`lift` (angles in (-pi, pi])."""
        values = np.asarray(values, dtype=float)
        out = np.zeros(self.dim)
        angle_dirs = {d: (c, s) for d, c, s in self.angle_pairs}
        for i in range(self.dim):
            if i in angle_dirs:
                c, s = angle_dirs[i]
                out[i] = math.atan2(values[s], values[c])
            else:
                out[i] = values[self._simple[i]]
        return out

    def normalize(self, values: np.ndarray) -> np.ndarray:
        """Project every ``(c, s)`` pair back onto the unit circle."""
        values = np.array(values, dtype=float)
        for _, c, s in self.angle_pairs:
            r = math.hypot(values[c], values[s])
            values[c] /= r
            values[s] /= r
        return values

    def evaluate(self, p: Poly, point: Sequence[float]) -> float:
        return p(self.lift(point))

    def cotangent(self) -> "Chart":
        """Chart on T*Q: the directions of Q followed by one flat momentum per direction."""
        n, nv = self.dim, self.nvars
        nvars = nv + n

        def widen(p: Poly) -> Poly:
            return Poly(nvars, {e + (0,) * n: c for e, c in p.terms.items()})

        ders = [{j: widen(p) for j, p in der.items()} for der in self.derivations]
        ders += [{nv + i: Poly.const(1.0, nvars)} for i in range(n)]
        names = self.names + [f"p_{nm}" for nm in self.names]
        return Chart(nvars, ders, names, self.angle_pairs)

    def widen(self, p: Poly, target: "Chart") -> Poly:
        """Re-express a polynomial of this chart's ring in a larger ring that extends it."""
        extra = target.nvars - self.nvars
        return Poly(target.nvars, {e + (0,) * extra: c for e, c in p.terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chart):
            return NotImplemented
        return (self.nvars == other.nvars and self.dim == other.dim
                and self.angle_pairs == other.angle_pairs and self._simple == other._simple)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Chart(dim={self.dim}, nvars={self.nvars}, angles={len(self.angle_pairs)})"


def random_poly(rng: np.random.Generator, nvars: int, degree: int, density: float = 1.0,
                scale: float = 1.0) -> Poly:
    """Random polynomial with all monomials up to ``degree``, each kept with probability ``density``."""
    terms = {}
    for e in monomials(nvars, degree):
        if density >= 1.0 or rng.random() < density:
            terms[e] = scale * rng.uniform(-1.0, 1.0)
    return Poly(nvars, terms)


def monomials(nvars: int, degree: int) -> Iterable[tuple]:
    """All exponent tuples of total degree at most ``degree`` in graded order."""
    out = []

    def rec(prefix, remaining, left):
        if left == 0:
            out.append(tuple(prefix))
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, left - 1)

    rec([], degree, nvars)
    return sorted(out, key=_glex_key)
