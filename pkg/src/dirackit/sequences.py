"""Truncated ascending and projective sequences of linear Dirac structures."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linear_dirac import (
    LinearDirac,
    construct_from_json,
    construct_graph_flat,
    direct_sum,
    induced_tensors,
    pullback,
    pushforward,
)
from .subspaces import (
    DEFAULT_TOL_RANK,
    EQUAL_ATOL,
    PontryaginSpace,
    containment_residual,
    image,
    intersect,
    numerical_rank,
    span,
    subspace_residual,
    zero,
)

COHERENCE_TOL = 1e-12

ORIENTATION_NOTE = (
    "projective links map level n+1 onto level n; level n is checked as the "
    "pushforward of level n+1 along that link"
)


class Kind(str, enum.Enum):
    ASCENDING = "ascending"
    PROJECTIVE = "projective"


class SequenceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiracSequence:
    kind: Kind
    levels: list  # LinearDirac per level
    links: list  # ascending: E_n -> E_{n+1}; projective: E_{n+1} -> E_n

    def __post_init__(self):
        if len(self.levels) < 2:
            raise SequenceError("a sequence needs at least two levels")
        if len(self.links) != len(self.levels) - 1:
            raise SequenceError("expected one link between consecutive levels")
        for i, phi in enumerate(self.links):
            lo, hi = self.levels[i].space.dim_E, self.levels[i + 1].space.dim_E
            want = (hi, lo) if self.kind is Kind.ASCENDING else (lo, hi)
            if np.shape(phi) != want:
                raise SequenceError(f"link {i + 1} has shape {np.shape(phi)}, expected {want}")

    @property
    def depth(self) -> int:
        return len(self.levels)

    def prefix(self, k: int) -> "DiracSequence":
        return DiracSequence(self.kind, self.levels[:k], self.links[: k - 1])


def _require_certified(seq: DiracSequence):
    for i, ld in enumerate(seq.levels, start=1):
        if not ld.certified:
            raise SequenceError(f"level {i} is not certified ({ld.status.value})")


def locate_levels(failing_links: list[int], depth: int) -> dict:
    """Turn failing links (numbered from 1) into blamed levels.

    A perturbed interior level breaks both adjacent links, so maximal runs
    of failing links are covered by as few levels as possible.  Runs whose
    cover is not unique are reported as ambiguous.
    """
    bad = sorted(set(failing_links))
    runs, cur = [], []
    for j in bad:
        if cur and j == cur[-1] + 1:
            cur.append(j)
        else:
            if cur:
                runs.append(cur)
            cur = [j]
    if cur:
        runs.append(cur)
    levels, ambiguous = [], []
    for run in runs:
        first_level, last_level = run[0], run[-1] + 1
        if len(run) % 2 == 0:
            levels += list(range(first_level + 1, last_level, 2))
        elif first_level == 1:
            levels += list(range(first_level, last_level, 2))
        elif last_level == depth:
            levels += list(range(last_level, first_level - 1, -2))[::-1]
        else:
            ambiguous.append(list(range(first_level, last_level + 1)))
    levels = sorted(set(levels))
    candidates = levels + [lv for amb in ambiguous for lv in amb]
    return {
        "violating_levels": levels,
        "ambiguous_levels": ambiguous,
        "first_violating_level": min(candidates) if candidates else None,
    }


def _rowspace(M: np.ndarray, n: int, tol: float):
    return span(list(M), n, tol) if M.shape[0] else zero(n)


def validate_ascending(seq: DiracSequence) -> dict:
    if seq.kind is not Kind.ASCENDING:
        raise SequenceError("validate_ascending needs an ascending sequence")
    _require_certified(seq)
    links = []
    for i, eps in enumerate(seq.links):
        lo, hi = seq.levels[i], seq.levels[i + 1]
        eps = np.asarray(eps, dtype=float)
        entry = {"link": i + 1, "levels": [i + 1, i + 2]}
        entry["injective"] = numerical_rank(eps, lo.space.tol) == eps.shape[1]
        pulled = _rowspace(hi.space.pairing_B @ eps, eps.shape[1], lo.space.tol)
        own = _rowspace(lo.space.pairing_B, eps.shape[1], lo.space.tol)
        entry["ALD1_residual"] = subspace_residual(pulled, own)
        entry["ALD1"] = entry["ALD1_residual"] <= EQUAL_ATOL
        if entry["injective"] and entry["ALD1"]:
            pb = pullback(eps, hi, lo.space)
            entry["ALD2_residual"] = subspace_residual(pb.D, lo.D)
            entry["ALD2"] = bool(pb.certified and entry["ALD2_residual"] <= EQUAL_ATOL)
        else:
            entry["ALD2_residual"] = None
            entry["ALD2"] = False
        entry["ok"] = bool(entry["injective"] and entry["ALD1"] and entry["ALD2"])
        links.append(entry)
    return _summarise(seq, links, header=None)


def validate_projective(seq: DiracSequence) -> dict:
    if seq.kind is not Kind.PROJECTIVE:
        raise SequenceError("validate_projective needs a projective sequence")
    _require_certified(seq)
    links = []
    for i, lam in enumerate(seq.links):
        lo, hi = seq.levels[i], seq.levels[i + 1]
        lam = np.asarray(lam, dtype=float)
        entry = {"link": i + 1, "levels": [i + 1, i + 2]}
        entry["surjective"] = numerical_rank(lam, hi.space.tol) == lam.shape[0]
        pulled = _rowspace(lo.space.pairing_B @ lam, lam.shape[1], hi.space.tol)
        own = _rowspace(hi.space.pairing_B, lam.shape[1], hi.space.tol)
        entry["SPLD1_residual"] = containment_residual(pulled, own)
        entry["SPLD1"] = entry["SPLD1_residual"] <= EQUAL_ATOL
        if entry["surjective"] and entry["SPLD1"]:
            pf = pushforward(lam, hi, lo.space)
            entry["SPLD2_residual"] = subspace_residual(pf.D, lo.D)
            entry["SPLD2"] = bool(pf.certified and entry["SPLD2_residual"] <= EQUAL_ATOL)
        else:
            entry["SPLD2_residual"] = None
            entry["SPLD2"] = False
        entry["ok"] = bool(entry["surjective"] and entry["SPLD1"] and entry["SPLD2"])
        links.append(entry)
    return _summarise(seq, links, header=ORIENTATION_NOTE)


def _summarise(seq: DiracSequence, links: list, header: str | None) -> dict:
    failing = [e["link"] for e in links if not e["ok"]]
    loc = locate_levels(failing, seq.depth)
    out = {"kind": seq.kind.value, "depth": seq.depth}
    if header:
        out["note"] = header
    out.update({"valid": not failing, "failing_links": failing, **loc, "links": links})
    return out


def validate(seq: DiracSequence) -> dict:
    return validate_ascending(seq) if seq.kind is Kind.ASCENDING else validate_projective(seq)


def _form_residual(A, Omega_hi, Omega_lo, phi) -> float:
    """max |Omega_hi(phi x, phi y) - Omega_lo(x, y)| over basis pairs of A (rows)."""
    if A.shape[0] == 0:
        return 0.0
    hi = A @ phi.T @ Omega_hi @ phi @ A.T
    lo = A @ Omega_lo @ A.T
    return float(np.max(np.abs(hi - lo)))


def coherence_report(seq: DiracSequence, strict: bool = True, tol: float = COHERENCE_TOL) -> dict:
    """Level-wise coherence of the induced forms and the stabilised pairing.

    With ``strict`` the sequence must validate first; ``strict=False``
    computes coherence anyway so that a perturbed level can be located.
    """
    validation = validate(seq)
    if strict and not validation["valid"]:
        raise SequenceError(f"sequence does not validate (first violating level {validation['first_violating_level']})")
    tensors = [induced_tensors(ld) for ld in seq.levels]
    omegas = [t.omega_ambient() for t in tensors]
    links = []
    for i, phi in enumerate(seq.links):
        phi = np.asarray(phi, dtype=float)
        lo_t, hi_t = tensors[i], tensors[i + 1]
        entry = {"link": i + 1, "levels": [i + 1, i + 2]}
        if seq.kind is Kind.ASCENDING:
            # eps^* Omega_{n+1} = Omega_n on L_n, and eps(L_n) ⊆ L_{n+1}.
            entry["L_containment_residual"] = containment_residual(image(phi, lo_t.L), hi_t.L)
            entry["omega_residual"] = _form_residual(lo_t.L.basis, omegas[i + 1], omegas[i], phi)
        else:
            # Omega_{n+1}(u, v) = Omega_n(lam u, lam v) on the part of L_{n+1}
            # whose covectors come from level n.
            hi_ld, lo_ld = seq.levels[i + 1], seq.levels[i]
            A = _pulled_back_part(hi_ld, lo_ld.space, phi)
            entry["omega_residual"] = _form_residual(A, omegas[i], omegas[i + 1], phi)
            entry["L_containment_residual"] = containment_residual(image(phi, hi_t.L), lo_t.L)
        entry["pairing_residual"] = _stabilised_pairing(seq, i)
        entry["ok"] = bool(max(entry["omega_residual"], entry["L_containment_residual"], entry["pairing_residual"]) <= tol)
        links.append(entry)
    failing = [e["link"] for e in links if not e["ok"]]
    loc = locate_levels(failing, seq.depth)
    return {
        "kind": seq.kind.value,
        "depth": seq.depth,
        "validated": validation["valid"],
        "coherent": not failing,
        "max_omega_residual": max(e["omega_residual"] for e in links),
        "max_pairing_residual": max(e["pairing_residual"] for e in links),
        "failing_links": failing,
        **loc,
        "levels": [{"level": k + 1, "dim_L": t.L.dim, "Omega_L": (t.Omega_L + 0.0).tolist()} for k, t in enumerate(tensors)],
        "links": links,
        "limit": {"top_level": seq.depth, "certificate": "coherent" if not failing else "incoherent"},
    }


def _pulled_back_part(hi: LinearDirac, lo_space: PontryaginSpace, lam: np.ndarray) -> np.ndarray:
    """Rows spanning p({d in D_{n+1} : p♭(d) in lam^*(E♭_n)})."""
    P = hi.space
    n, m = P.dim_E, P.dim_Eflat
    T = np.linalg.pinv(P.pairing_B.T) @ lam.T @ lo_space.pairing_B.T  # (m, m_lo)
    rows = [np.concatenate([e, np.zeros(m)]) for e in np.eye(n)]
    rows += [np.concatenate([np.zeros(n), c]) for c in T.T]
    W = span(rows, n + m, P.tol)
    part = intersect(hi.D, W)
    return span(list(part.basis[:, :n]), n, P.tol, scale=1.0).basis


def _stabilised_pairing(seq: DiracSequence, i: int) -> float:
    """Pairings of elements of D_n, carried to level n+1, stay unchanged."""
    lo, hi = seq.levels[i], seq.levels[i + 1]
    phi = np.asarray(seq.links[i], dtype=float)
    Plo, Phi = lo.space, hi.space
    nlo, nhi = Plo.dim_E, Phi.dim_E
    if seq.kind is Kind.ASCENDING:
        # (u, eps^* a') in D_n comes from (eps u, a') in D_{n+1}.
        T = np.linalg.pinv(Plo.pairing_B.T) @ phi.T @ Phi.pairing_B.T
        base = lo.D.basis
        lifted = []
        for d in base:
            u, a = d[:nlo], d[nlo:]
            target_u = phi @ u
            # Solve for a' with (eps u, a') in D_{n+1} and T a' = a.
            A = np.vstack([hi.D.basis[:, :nhi].T, (T @ hi.D.basis[:, nhi:].T)])
            c, *_ = np.linalg.lstsq(A, np.concatenate([target_u, a]), rcond=None)
            lifted.append(c @ hi.D.basis)
        lo_pair = base[:, nlo:] @ Plo.pairing_B @ base[:, :nlo].T
        L = np.array(lifted)
        hi_pair = L[:, nhi:] @ Phi.pairing_B @ L[:, :nhi].T
        fit = np.max(np.abs(np.array([np.concatenate([phi @ d[:nlo], T @ l[nhi:]]) - np.concatenate([l[:nhi], d[nlo:]])
                                      for d, l in zip(base, L)]))) if len(L) else 0.0
    else:
        # (lam u', a) in D_n comes from (u', lam^* a) in D_{n+1}.
        T = np.linalg.pinv(Phi.pairing_B.T) @ phi.T @ Plo.pairing_B.T
        base = lo.D.basis
        lifted = []
        for d in base:
            u, a = d[:nlo], d[nlo:]
            A = np.vstack([phi @ hi.D.basis[:, :nhi].T, hi.D.basis[:, nhi:].T])
            c, *_ = np.linalg.lstsq(A, np.concatenate([u, T @ a]), rcond=None)
            lifted.append(c @ hi.D.basis)
        L = np.array(lifted)
        lo_pair = base[:, nlo:] @ Plo.pairing_B @ base[:, :nlo].T
        hi_pair = L[:, nhi:] @ Phi.pairing_B @ L[:, :nhi].T
        fit = np.max(np.abs(np.array([np.concatenate([phi @ l[:nhi], l[nhi:]]) - np.concatenate([d[:nlo], T @ d[nlo:]])
                                      for d, l in zip(base, L)]))) if len(L) else 0.0
    if len(base) == 0:
        return 0.0
    return float(max(np.max(np.abs(hi_pair - lo_pair)), fit))


# -- generators ---------------------------------------------------------------

def symplectic_block(k: int) -> np.ndarray:
    """Block-diagonal skew matrix with k copies of [[0, -1], [1, 0]]."""
    J = np.zeros((2 * k, 2 * k))
    for b in range(k):
        J[2 * b, 2 * b + 1] = -1.0
        J[2 * b + 1, 2 * b] = 1.0
    return J


def block_symplectic_ascending(depth: int = 5) -> DiracSequence:
    levels, links = [], []
    for n in range(1, depth + 1):
        P = PontryaginSpace.full_dual(2 * n)
        levels.append(construct_graph_flat(P, symplectic_block(n)))
        if n < depth:
            eps = np.zeros((2 * n + 2, 2 * n))
            eps[: 2 * n, : 2 * n] = np.eye(2 * n)
            links.append(eps)
    return DiracSequence(Kind.ASCENDING, levels, links)


def _product_factor(k: int) -> LinearDirac:
    """Certified factor used for level k of the product sequence, cycling through kinds."""
    r = k % 3
    if r == 1:
        return construct_graph_flat(PontryaginSpace.full_dual(2), symplectic_block(1))
    if r == 2:
        P = PontryaginSpace(3, np.array([[1.0, 0, 0], [0, 1.0, 0]]))
        return construct_graph_flat(P, None, span([[0, 1.0, 0], [0, 0, 1.0]], 3))
    return construct_graph_flat(PontryaginSpace.full_dual(1))


def product_projective(depth: int = 5, factors: list | None = None) -> DiracSequence:
    factors = factors or [_product_factor(k) for k in range(1, depth + 1)]
    levels = [factors[0]]
    for f in factors[1:depth]:
        levels.append(direct_sum(levels[-1], f))
    links = []
    for n in range(depth - 1):
        lo, hi = levels[n].space.dim_E, levels[n + 1].space.dim_E
        lam = np.zeros((lo, hi))
        lam[:, :lo] = np.eye(lo)
        links.append(lam)
    return DiracSequence(Kind.PROJECTIVE, levels, links)


def sequence_from_json(obj: dict, tol: float = DEFAULT_TOL_RANK) -> DiracSequence:
    kind = Kind(obj["kind"])
    levels = [construct_from_json(lv, tol) for lv in obj["levels"]]
    links = [np.asarray(m, dtype=float) for m in obj["links"]]
    return DiracSequence(kind, levels, links)
