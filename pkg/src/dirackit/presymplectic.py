"""Presymplectic and contact checks for polynomial forms."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .calculus import exterior_derivative
from .fields import FieldError, Kind, PolyField
from .poly import Poly
from .subspaces import null_space, numerical_rank

BRACKET_TOL = 1e-9


class InadmissibleError(ValueError):
    """A function whose differential is not in the image of the flat map."""


class NotContactError(ValueError):
    pass


def _rank(M: np.ndarray, tol: float = 1e-10) -> int:
    """Rank with a relative cutoff; the zero matrix has rank 0."""
    if not M.size or np.abs(M).max() == 0.0:
        return 0
    return numerical_rank(M, tol)


def presymplectic_check(omega: PolyField, samples: Sequence[Sequence[float]], tol: float = 1e-10) -> dict:
    """Closedness (exact) plus pointwise kernel rank of the flat map at each sample."""
    if omega.kind is not Kind.TWO_FORM:
        raise FieldError("presymplectic_check needs a 2-form")
    d_omega = exterior_derivative(omega)
    n = omega.size
    kernel_ranks, image_ranks, kernels = [], [], []
    for x in samples:
        W = np.asarray(omega.at(x))
        r = _rank(W, tol)
        image_ranks.append(r)
        kernel_ranks.append(n - r)
        K = null_space(W, tol) if r else np.eye(n)
        kernels.append(K.tolist())
    return {
        "closed": d_omega.is_zero(tol),
        "max_d_omega_coefficient": d_omega.max_coeff(),
        "kernel_ranks": kernel_ranks,
        "constant_kernel_rank": len(set(kernel_ranks)) <= 1,
        "image_ranks": image_ranks,
        "constant_image_rank": len(set(image_ranks)) <= 1,
        "kernels": kernels,
    }


def _grad(f: Poly | PolyField, chart, x) -> np.ndarray:
    if isinstance(f, PolyField):
        f = f.scalar
    v = chart.lift(x)
    return np.array([chart.partial(f, i)(v) for i in range(chart.dim)])


def _hamiltonian_vector(Wt: np.ndarray, dg: np.ndarray, tol: float, label: str) -> np.ndarray:
    X, *_ = np.linalg.lstsq(Wt, dg, rcond=None)
    res = float(np.linalg.norm(Wt @ X - dg))
    if res > tol * max(1.0, float(np.linalg.norm(dg))):
        raise InadmissibleError(f"{label} is not admissible: d{label} is outside the image of the flat map "
                                f"(least-squares residual {res:.3e})")
    return X


def presymplectic_bracket(omega: PolyField, f, g, x: Sequence[float], tol: float = BRACKET_TOL) -> float:
    """``{f, g} = df(X_g)`` where ``i_{X_g} omega = dg``.

    Any solution ``X_g`` works; the value is checked to be unchanged when
    ``X_g`` moves along the kernel, and ``{g, f} = -{f, g}`` is checked too.
    """
    if omega.kind is not Kind.TWO_FORM:
        raise FieldError("presymplectic_bracket needs a 2-form")
    ch = omega.chart
    W = np.asarray(omega.at(x))
    # (i_X omega)_j = sum_i X^i W[i, j]
    Wt = W.T
    df, dg = _grad(f, ch, x), _grad(g, ch, x)
    Xg = _hamiltonian_vector(Wt, dg, tol, "g")
    Xf = _hamiltonian_vector(Wt, df, tol, "f")
    value = float(df @ Xg)
    scale = max(1.0, float(np.linalg.norm(df)) * float(np.linalg.norm(Xg)))
    if _rank(W) < W.shape[0]:
        for k in null_space(W, 1e-10):
            shifted = float(df @ (Xg + k))
            if abs(shifted - value) > tol * scale:
                raise AssertionError("bracket depends on the choice of Hamiltonian vector field")
    other = float(dg @ Xf)
    if abs(other + value) > tol * scale:
        raise AssertionError(f"bracket is not antisymmetric ({value} vs {other})")
    return value


def reeb_vector(xi: PolyField, x: Sequence[float], tol: float = 1e-10) -> np.ndarray:
    """The vector ``X`` with ``xi(X) = 1`` and ``i_X d xi = 0`` at ``x``."""
    if xi.kind is not Kind.ONE_FORM:
        raise FieldError("reeb_vector needs a 1-form")
    n = xi.size
    W = np.asarray(exterior_derivative(xi).at(x))
    a = np.asarray(xi.at(x))
    kernel_dim = n - _rank(W, tol)
    if kernel_dim != 1:
        system = np.vstack([a[None, :], W.T])
        joint = n - _rank(system, tol)
        raise NotContactError(f"not a contact point: kernel of d xi has dimension {kernel_dim}, "
                              f"kernel rank {joint} for (xi, d xi) jointly")
    k = null_space(W, tol)[0]
    val = float(a @ k)
    if abs(val) <= tol * max(1.0, float(np.linalg.norm(a))):
        raise NotContactError("not a contact point: xi vanishes on the kernel of d xi")
    return k / val
