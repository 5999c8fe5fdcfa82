"""Subspace arithmetic over a partial Pontryagin space.

Vectors of the ambient space ``E ⊕ E♭`` are stored as flat arrays
``(u, a)`` where ``u`` are coordinates on ``E`` and ``a`` are coordinates
of a covector in the chosen basis of ``E♭``.  The rows of ``pairing_B``
realise those basis covectors as functionals on ``E``, so that
``<alpha, u> = a @ B @ u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL_RANK = 1e-10
# Absolute cutoff on sines of principal angles between orthonormal bases.
ANGLE_TOL = 1e-9
EQUAL_ATOL = 1e-9


class DimensionError(ValueError):
    """Raised when operands live in spaces of different dimension."""


def numerical_rank(M: np.ndarray, tol: float = DEFAULT_TOL_RANK, scale: float | None = None) -> int:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    ref = s[0] if scale is None else scale
    if ref <= 0.0:
        return 0
    return int(np.sum(s > tol * ref))


def null_space(M: np.ndarray, tol: float = DEFAULT_TOL_RANK, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (as rows) of the right kernel of ``M``.

    The cutoff is ``tol * scale`` where ``scale`` defaults to the largest
    singular value of ``M``.  Callers that know the natural size of the
    data (for example the norm of a pairing matrix) should pass it, so a
    product that is zero up to rounding is not mistaken for a full-rank
    matrix.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    ncols = M.shape[1]
    if M.shape[0] == 0 or ncols == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    ref = (s[0] if s.size else 0.0) if scale is None else scale
    rank = 0 if ref <= 0.0 else int(np.sum(s > tol * ref))
    return vt[rank:].copy()


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace stored through an orthonormal basis (one vector per row)."""

    ambient_dim: int
    basis: np.ndarray
    tol_rank: float = DEFAULT_TOL_RANK

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float).reshape(-1, self.ambient_dim)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def project(self, v: np.ndarray) -> np.ndarray:
        return self.basis.T @ (self.basis @ np.asarray(v, dtype=float))

    def contains(self, v: np.ndarray, atol: float = EQUAL_ATOL) -> bool:
        v = np.asarray(v, dtype=float)
        return float(np.linalg.norm(v - self.project(v))) <= atol * max(1.0, float(np.linalg.norm(v)))

    def to_json(self) -> dict:
        return {"ambient": self.ambient_dim, "basis": self.basis.tolist()}

    @classmethod
    def from_json(cls, obj: dict, tol: float = DEFAULT_TOL_RANK) -> "Subspace":
        return span(obj.get("basis", []), int(obj["ambient"]), tol)

    def __repr__(self) -> str:
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def zero(ambient_dim: int) -> Subspace:
    return Subspace(ambient_dim, np.zeros((0, ambient_dim)))


def whole(ambient_dim: int) -> Subspace:
    return Subspace(ambient_dim, np.eye(ambient_dim))


def span(vectors, ambient_dim: int, tol: float = DEFAULT_TOL_RANK, scale: float | None = None) -> Subspace:
    """Span of a list of vectors; dimension equals the numerical rank at ``tol``."""
    vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
    for v in vecs:
        if v.shape[0] != ambient_dim:
            raise DimensionError(f"vector of length {v.shape[0]} in ambient dimension {ambient_dim}")
    if not vecs:
        return Subspace(ambient_dim, np.zeros((0, ambient_dim)), tol)
    M = np.vstack(vecs)
    _, s, vt = np.linalg.svd(M, full_matrices=False)
    ref = s[0] if scale is None else scale
    rank = 0 if ref <= 0.0 else int(np.sum(s > tol * ref))
    return Subspace(ambient_dim, vt[:rank], tol)


def _check_same(X: Subspace, Y: Subspace):
    if X.ambient_dim != Y.ambient_dim:
        raise DimensionError(f"ambient dimensions differ: {X.ambient_dim} vs {Y.ambient_dim}")


def containment_residual(X: Subspace, Y: Subspace) -> float:
    """Largest distance from a unit basis vector of X to Y (0 when X ⊆ Y)."""
    _check_same(X, Y)
    if X.dim == 0:
        return 0.0
    R = X.basis - X.basis @ Y.basis.T @ Y.basis
    return float(np.max(np.linalg.norm(R, axis=1)))


def subspace_residual(X: Subspace, Y: Subspace) -> float:
    """Symmetric distance between two subspaces; ``inf`` when dimensions differ."""
    _check_same(X, Y)
    if X.dim != Y.dim:
        return float("inf")
    return max(containment_residual(X, Y), containment_residual(Y, X))


def is_subset(X: Subspace, Y: Subspace, atol: float = EQUAL_ATOL) -> bool:
    return containment_residual(X, Y) <= atol


def subspace_equal(X: Subspace, Y: Subspace, atol: float = EQUAL_ATOL) -> bool:
    return is_subset(X, Y, atol) and is_subset(Y, X, atol)


def intersect(X: Subspace, Y: Subspace, angle_tol: float = ANGLE_TOL) -> Subspace:
    """Intersection via the directions of X left fixed by projection onto Y."""
    _check_same(X, Y)
    if X.dim == 0 or Y.dim == 0:
        return zero(X.ambient_dim)
    # Singular values of (I - P_Y) X^T are the sines of the principal angles.
    R = X.basis.T - Y.basis.T @ (Y.basis @ X.basis.T)
    _, s, vt = np.linalg.svd(R, full_matrices=True)
    s_full = np.zeros(X.dim)
    s_full[: s.size] = s
    coeffs = vt[s_full <= angle_tol]
    if coeffs.shape[0] == 0:
        return zero(X.ambient_dim)
    return span(coeffs @ X.basis, X.ambient_dim, X.tol_rank)


def sum_(X: Subspace, Y: Subspace) -> Subspace:
    _check_same(X, Y)
    return span(list(X.basis) + list(Y.basis), X.ambient_dim, min(X.tol_rank, Y.tol_rank))


def orthogonal_complement(X: Subspace) -> Subspace:
    """Euclidean orthogonal complement (used to pick quotient representatives)."""
    if X.dim == 0:
        return whole(X.ambient_dim)
    return Subspace(X.ambient_dim, null_space(X.basis, scale=1.0), X.tol_rank)


def complement_in(X: Subspace, Y: Subspace) -> Subspace:
    """Euclidean complement of ``X ∩ Y`` inside ``Y``; used as a quotient representative of Y/X."""
    _check_same(X, Y)
    if Y.dim == 0:
        return zero(Y.ambient_dim)
    coeffs = null_space(X.basis @ Y.basis.T, scale=1.0) if X.dim else np.eye(Y.dim)
    return span(coeffs @ Y.basis, Y.ambient_dim, Y.tol_rank)


def image(M: np.ndarray, X: Subspace, tol: float = DEFAULT_TOL_RANK) -> Subspace:
    """Image of X under the linear map with matrix ``M`` (acting on columns)."""
    M = np.asarray(M, dtype=float)
    if M.shape[1] != X.ambient_dim:
        raise DimensionError(f"map with {M.shape[1]} columns applied in dimension {X.ambient_dim}")
    scale = max(float(np.linalg.norm(M, 2)), 0.0) if M.size else 0.0
    return span(list((M @ X.basis.T).T), M.shape[0], tol, scale=scale or None)


def preimage(M: np.ndarray, X: Subspace, tol: float = DEFAULT_TOL_RANK) -> Subspace:
    """Preimage ``{v : M v ∈ X}``."""
    M = np.asarray(M, dtype=float)
    if M.shape[0] != X.ambient_dim:
        raise DimensionError("map codomain does not match subspace ambient dimension")
    comp = orthogonal_complement(X)
    A = comp.basis @ M
    scale = float(np.linalg.norm(M, 2)) if M.size else 0.0
    return Subspace(M.shape[1], null_space(A, tol, scale=scale or 1.0), tol)


@dataclass(frozen=True, eq=False)
class PontryaginSpace:
    """The model ``E ⊕ E♭`` with ``E♭`` realised by the rows of ``pairing_B``."""

    dim_E: int
    pairing_B: np.ndarray
    tol: float = DEFAULT_TOL_RANK
    _gram: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        B = np.asarray(self.pairing_B, dtype=float).reshape(-1, self.dim_E)
        if self.dim_E <= 0:
            raise ValueError("dim_E must be positive")
        if B.shape[0] > self.dim_E:
            raise ValueError("E♭ cannot be larger than E")
        if B.shape[0] and numerical_rank(B, self.tol) != B.shape[0]:
            raise ValueError("pairing matrix must have full row rank")
        B.setflags(write=False)
        object.__setattr__(self, "pairing_B", B)
        n, m = self.dim_E, B.shape[0]
        G = np.zeros((n + m, n + m))
        G[:n, n:] = B.T
        G[n:, :n] = B
        G.setflags(write=False)
        object.__setattr__(self, "_gram", G)

    @classmethod
    def full_dual(cls, n: int, tol: float = DEFAULT_TOL_RANK) -> "PontryaginSpace":
        return cls(n, np.eye(n), tol)

    @property
    def dim_Eflat(self) -> int:
        return self.pairing_B.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.dim_E + self.dim_Eflat

    @property
    def is_full_dual(self) -> bool:
        return self.dim_Eflat == self.dim_E

    @property
    def scale(self) -> float:
        """Spectral norm of the pairing, the natural size for rank cutoffs."""
        return float(np.linalg.norm(self.pairing_B, 2)) if self.dim_Eflat else 1.0

    def gram(self) -> np.ndarray:
        return self._gram

    def pair(self, a: np.ndarray, u: np.ndarray) -> float:
        """``<alpha, u>`` for covector coordinates ``a`` and vector ``u``."""
        return float(np.asarray(a) @ self.pairing_B @ np.asarray(u))

    def big_pair(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.asarray(x) @ self._gram @ np.asarray(y))

    def split(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        return x[..., : self.dim_E], x[..., self.dim_E :]

    def join(self, u: np.ndarray, a: np.ndarray) -> np.ndarray:
        return np.concatenate([np.asarray(u, dtype=float), np.asarray(a, dtype=float)])

    def E_part(self) -> Subspace:
        """The subspace ``E ⊕ {0}``."""
        n, m = self.dim_E, self.dim_Eflat
        return Subspace(n + m, np.hstack([np.eye(n), np.zeros((n, m))]))

    def Eflat_part(self) -> Subspace:
        """The subspace ``{0} ⊕ E♭``."""
        n, m = self.dim_E, self.dim_Eflat
        return Subspace(n + m, np.hstack([np.zeros((m, n)), np.eye(m)]))

    def embed_E(self, X: Subspace) -> Subspace:
        return Subspace(self.ambient_dim, np.hstack([X.basis, np.zeros((X.dim, self.dim_Eflat))]))

    def embed_Eflat(self, X: Subspace) -> Subspace:
        return Subspace(self.ambient_dim, np.hstack([np.zeros((X.dim, self.dim_E)), X.basis]))

    def to_json(self) -> dict:
        return {"dimE": self.dim_E, "pairing": self.pairing_B.tolist()}


def partial_annihilator(X: Subspace, P: PontryaginSpace) -> Subspace:
    """Covectors of ``E♭`` (in ``E♭`` coordinates) vanishing on ``X ⊆ E``."""
    if X.ambient_dim != P.dim_E:
        raise DimensionError("subspace does not live in E")
    m = P.dim_Eflat
    if X.dim == 0:
        return whole(m) if m else zero(0)
    if m == 0:
        return zero(0)
    A = X.basis @ P.pairing_B.T  # rows: the functional a -> <a, x_i>
    return Subspace(m, null_space(A, P.tol, scale=P.scale), P.tol)


def biannihilator(F0: Subspace, P: PontryaginSpace) -> Subspace:
    """Vectors of ``E`` killed by every covector in ``F0 ⊆ E♭``."""
    if F0.ambient_dim != P.dim_Eflat:
        raise DimensionError("subspace does not live in E♭")
    if F0.dim == 0:
        return whole(P.dim_E)
    A = F0.basis @ P.pairing_B
    return Subspace(P.dim_E, null_space(A, P.tol, scale=P.scale), P.tol)


def big_orthogonal(D: Subspace, P: PontryaginSpace) -> Subspace:
    """The ``<<.,.>>``-orthogonal of ``D`` inside ``E ⊕ E♭``."""
    if D.ambient_dim != P.ambient_dim:
        raise DimensionError("subspace does not live in E ⊕ E♭")
    if D.dim == 0:
        return whole(P.ambient_dim)
    return Subspace(P.ambient_dim, null_space(D.basis @ P.gram(), P.tol, scale=P.scale), P.tol)


def isotropy_residual(D: Subspace, P: PontryaginSpace) -> float:
    if D.dim == 0:
        return 0.0
    return float(np.max(np.abs(D.basis @ P.gram() @ D.basis.T)))
