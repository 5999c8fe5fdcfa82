"""Linear (partial) Dirac structures: certification, constructions, induced tensors, transport."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .subspaces import (
    DEFAULT_TOL_RANK,
    EQUAL_ATOL,
    DimensionError,
    PontryaginSpace,
    Subspace,
    big_orthogonal,
    biannihilator,
    complement_in,
    containment_residual,
    intersect,
    isotropy_residual,
    null_space,
    numerical_rank,
    partial_annihilator,
    span,
    subspace_equal,
    subspace_residual,
    whole,
    zero,
)

ISOTROPY_TOL = 1e-10

MSG_SEPARATION = "separation hypothesis fails"
MSG_BIANNIHILATOR = "biannihilator condition fails"


class Status(str, enum.Enum):
    CERTIFIED = "Certified"
    ISOTROPIC_ONLY = "IsotropicOnly"
    REJECTED = "Rejected"


class NotCertifiedError(ValueError):
    pass


class SkewnessError(ValueError):
    pass


class TransportError(ValueError):
    """Raised when a pullback or pushforward precondition fails."""


@dataclass(frozen=True, eq=False)
class LinearDirac:
    space: PontryaginSpace
    D: Subspace
    status: Status
    diagnostics: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED

    @property
    def notes(self) -> list:
        return list(self.diagnostics.get("notes", []))

    def require_certified(self):
        if not self.certified:
            raise NotCertifiedError(f"operation needs a certified structure, got {self.status.value}")

    def report(self) -> dict:
        return {"status": self.status.value, **self.diagnostics, "basis": self.D.basis.tolist()}


def _with_notes(ld: LinearDirac, extra: dict, notes: list[str]) -> LinearDirac:
    diag = dict(ld.diagnostics)
    diag.update(extra)
    diag["notes"] = list(diag.get("notes", [])) + notes
    return LinearDirac(ld.space, ld.D, ld.status, diag)


def verify_dirac(D: Subspace, P: PontryaginSpace, iso_tol: float = ISOTROPY_TOL,
                 atol: float = EQUAL_ATOL) -> LinearDirac:
    """Certify ``D = D⊥``; otherwise classify as isotropic-only or rejected."""
    if D.ambient_dim != P.ambient_dim:
        raise DimensionError(f"D lives in dimension {D.ambient_dim}, E ⊕ E♭ has {P.ambient_dim}")
    iso = isotropy_residual(D, P)
    Dperp = big_orthogonal(D, P)
    isotropic = iso <= iso_tol * max(1.0, P.scale)
    if isotropic and subspace_equal(D, Dperp, atol):
        status = Status.CERTIFIED
    elif isotropic:
        status = Status.ISOTROPIC_ONLY
    else:
        status = Status.REJECTED
    diag = {
        "isotropy_residual": iso,
        "dim_D": D.dim,
        "dim_Dperp": Dperp.dim,
        "orthogonal_residual": containment_residual(Dperp, D) if D.dim == Dperp.dim else None,
        "notes": [],
    }
    return LinearDirac(P, D, status, diag)


def _skew_residual(M: np.ndarray) -> float:
    return float(np.max(np.abs(M + M.T))) if M.size else 0.0


def construct_graph_flat(P: PontryaginSpace, Q: np.ndarray | None = None,
                         F: Subspace | None = None) -> LinearDirac:
    """``{(u, Q u + xi) : u in F, xi in F⁰}``; F defaults to E and Q to zero."""
    n, m = P.dim_E, P.dim_Eflat
    Q = np.zeros((m, n)) if Q is None else np.asarray(Q, dtype=float).reshape(m, n)
    # <Q u, v> = u^T Q^T B v, so skewness means Q^T B is antisymmetric.
    skew = _skew_residual(Q.T @ P.pairing_B)
    if skew > ISOTROPY_TOL * max(1.0, P.scale * float(np.abs(Q).max(initial=0.0))):
        raise SkewnessError(f"Q is not skew with respect to the pairing (residual {skew:.3g})")
    F = whole(n) if F is None else F
    if F.ambient_dim != n:
        raise DimensionError("F must be a subspace of E")
    F0 = partial_annihilator(F, P)
    rows = [np.concatenate([f, Q @ f]) for f in F.basis]
    rows += [np.concatenate([np.zeros(n), xi]) for xi in F0.basis]
    D = span(rows, n + m, P.tol)
    bi = biannihilator(F0, P)
    bi_ok = containment_residual(bi, F) <= EQUAL_ATOL
    ld = verify_dirac(D, P)
    notes = [] if (bi_ok or ld.certified) else [MSG_BIANNIHILATOR]
    if not bi_ok and ld.certified:
        notes = ["biannihilator condition fails but the result certifies"]
    return _with_notes(ld, {"construction": "graph_flat", "biannihilator_condition": bi_ok,
                            "skew_residual": skew}, notes)


def construct_graph_sharp(P: PontryaginSpace, Pmap: np.ndarray) -> LinearDirac:
    """Graph ``{(Pmap a, a)}`` of a skew map ``E♭ -> E``."""
    n, m = P.dim_E, P.dim_Eflat
    Pm = np.asarray(Pmap, dtype=float).reshape(n, m)
    skew = _skew_residual(P.pairing_B @ Pm)
    if skew > ISOTROPY_TOL * max(1.0, P.scale * float(np.abs(Pm).max(initial=0.0))):
        raise SkewnessError(f"Pmap is not skew with respect to the pairing (residual {skew:.3g})")
    rows = [np.concatenate([Pm[:, i], np.eye(m)[i]]) for i in range(m)]
    D = span(rows, n + m, P.tol)
    separated = numerical_rank(P.pairing_B, P.tol) == n if m else False
    surjective = numerical_rank(Pm, P.tol) == n if m else False
    ld = verify_dirac(D, P)
    notes = []
    if not ld.certified:
        if not separated:
            notes.append(MSG_SEPARATION)
        if not surjective:
            notes.append("Pmap is not surjective")
    return _with_notes(ld, {"construction": "graph_sharp", "separation_hypothesis": separated,
                            "surjective": surjective, "skew_residual": skew}, notes)


def direct_sum_space(P1: PontryaginSpace, P2: PontryaginSpace) -> PontryaginSpace:
    B = np.zeros((P1.dim_Eflat + P2.dim_Eflat, P1.dim_E + P2.dim_E))
    B[: P1.dim_Eflat, : P1.dim_E] = P1.pairing_B
    B[P1.dim_Eflat :, P1.dim_E :] = P2.pairing_B
    return PontryaginSpace(P1.dim_E + P2.dim_E, B, min(P1.tol, P2.tol))


def _embed_sum(x: np.ndarray, P1: PontryaginSpace, P2: PontryaginSpace, first: bool) -> np.ndarray:
    """Place an element of one summand into the ambient ordering (u1, u2, a1, a2)."""
    n1, n2, m1, m2 = P1.dim_E, P2.dim_E, P1.dim_Eflat, P2.dim_Eflat
    out = np.zeros(n1 + n2 + m1 + m2)
    if first:
        out[:n1] = x[:n1]
        out[n1 + n2 : n1 + n2 + m1] = x[n1:]
    else:
        out[n1 : n1 + n2] = x[:n2]
        out[n1 + n2 + m1 :] = x[n2:]
    return out


def direct_sum(D1: LinearDirac, D2: LinearDirac) -> LinearDirac:
    D1.require_certified()
    D2.require_certified()
    P = direct_sum_space(D1.space, D2.space)
    rows = [_embed_sum(d, D1.space, D2.space, True) for d in D1.D.basis]
    rows += [_embed_sum(d, D1.space, D2.space, False) for d in D2.D.basis]
    ld = verify_dirac(span(rows, P.ambient_dim, P.tol), P)
    return _with_notes(ld, {"construction": "direct_sum"}, [])


# -- decomposition ---------------------------------------------------------

def project_E(ld: LinearDirac) -> Subspace:
    """L = p(D)."""
    P = ld.space
    return span(list(ld.D.basis[:, : P.dim_E]), P.dim_E, P.tol, scale=1.0)


def project_Eflat(ld: LinearDirac) -> Subspace:
    """L♭ = p♭(D), in E♭ coordinates."""
    P = ld.space
    return span(list(ld.D.basis[:, P.dim_E :]), P.dim_Eflat, P.tol, scale=1.0)


def cap_E(ld: LinearDirac) -> Subspace:
    """D ∩ E, in E coordinates."""
    P = ld.space
    K = intersect(ld.D, P.E_part())
    return span(list(K.basis[:, : P.dim_E]), P.dim_E, P.tol, scale=1.0)


def cap_Eflat(ld: LinearDirac) -> Subspace:
    """D ∩ E♭, in E♭ coordinates."""
    P = ld.space
    K = intersect(ld.D, P.Eflat_part())
    return span(list(K.basis[:, P.dim_E :]), P.dim_Eflat, P.tol, scale=1.0)


def kernel_report(ld: LinearDirac) -> dict:
    """Check D∩E♭ = L⁰, L♭ = (D∩E)⁰ and the rank-nullity identities."""
    ld.require_certified()
    P = ld.space
    L, Lf, K, Kf = project_E(ld), project_Eflat(ld), cap_E(ld), cap_Eflat(ld)
    r1 = subspace_residual(Kf, partial_annihilator(L, P))
    r2 = subspace_residual(Lf, partial_annihilator(K, P))
    rank_ok = ld.D.dim == L.dim + Kf.dim == Lf.dim + K.dim
    return {
        "dim_D": ld.D.dim,
        "dim_L": L.dim,
        "dim_Lflat": Lf.dim,
        "dim_D_cap_E": K.dim,
        "dim_D_cap_Eflat": Kf.dim,
        "D_cap_Eflat_eq_L0_residual": r1,
        "Lflat_eq_D_cap_E_0_residual": r2,
        "D_cap_Eflat_eq_L0": r1 <= EQUAL_ATOL,
        "Lflat_eq_D_cap_E_0": r2 <= EQUAL_ATOL,
        "rank_nullity": bool(rank_ok),
        "ok": bool(r1 <= EQUAL_ATOL and r2 <= EQUAL_ATOL and rank_ok),
    }


@dataclass(frozen=True, eq=False)
class InducedTensors:
    L: Subspace
    Lflat: Subspace
    D_cap_E: Subspace
    D_cap_Eflat: Subspace
    P_L: np.ndarray  # E♭ coordinates of P_L(l_j), one column per basis vector of L
    P_Lflat: np.ndarray  # E coordinates of P_L♭(b_j), one column per basis vector of L♭
    Omega_L: np.ndarray  # Omega_L[i, j] = Omega(l_i, l_j)
    checks: dict

    def omega_ambient(self) -> np.ndarray:
        """Omega_L as a bilinear form on E, vanishing on the complement of L."""
        return self.L.basis.T @ self.Omega_L @ self.L.basis


def _lift(D: Subspace, coords: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Some element of D whose ``coords`` part equals ``target``."""
    A = D.basis[:, coords].T
    c, *_ = np.linalg.lstsq(A, target, rcond=None)
    return c @ D.basis


def induced_tensors(ld: LinearDirac) -> InducedTensors:
    ld.require_certified()
    P = ld.space
    n, m = P.dim_E, P.dim_Eflat
    B = P.pairing_B
    L, Lf, K, Kf = project_E(ld), project_Eflat(ld), cap_E(ld), cap_Eflat(ld)
    e_idx, f_idx = np.arange(n), np.arange(n, n + m)

    # Representatives orthogonal to the kernels, as the quotient convention.
    Kf_proj = Kf.basis.T @ Kf.basis if Kf.dim else np.zeros((m, m))
    K_proj = K.basis.T @ K.basis if K.dim else np.zeros((n, n))
    PL = np.zeros((m, L.dim))
    lift_res = 0.0
    for j, l in enumerate(L.basis):
        d = _lift(ld.D, e_idx, l)
        lift_res = max(lift_res, float(np.linalg.norm(d[:n] - l)))
        a = d[n:]
        PL[:, j] = a - Kf_proj @ a
    PLf = np.zeros((n, Lf.dim))
    for j, b in enumerate(Lf.basis):
        d = _lift(ld.D, f_idx, b)
        lift_res = max(lift_res, float(np.linalg.norm(d[n:] - b)))
        u = d[:n]
        PLf[:, j] = u - K_proj @ u

    # Omega(l_i, l_j) = -<P_L(l_j), l_i>.
    Omega = -(L.basis @ B.T @ PL) if L.dim else np.zeros((0, 0))
    skew = _skew_residual(Omega)

    # Kernel of P_L, measured in L-coordinates, must be D∩E.
    kerPL = span(list(null_space(PL, P.tol, scale=1.0) @ L.basis), n, P.tol) if L.dim else zero(n)
    ker_res = subspace_residual(kerPL, K)
    kerPLf = span(list(null_space(PLf, P.tol, scale=1.0) @ Lf.basis), m, P.tol) if Lf.dim else zero(m)
    kerf_res = subspace_residual(kerPLf, Kf) if m else 0.0

    # Quotient pairing rule <beta, u> = -<alpha, v> on basis pairs of D.
    U, A = ld.D.basis[:, :n], ld.D.basis[:, n:]
    S = A @ B @ U.T
    pairing_res = float(np.max(np.abs(S + S.T))) if S.size else 0.0

    # Graph recovery: {(u, alpha) : u in L, alpha in L♭, alpha|_L = P_L(u)|_L}.
    if L.dim:
        Kmat = Lf.basis @ B @ L.basis.T  # (dim L♭, dim L)
        Nmat = PL.T @ B @ L.basis.T  # (dim L, dim L)
        M = np.hstack([-Nmat.T, Kmat.T])
        sol = null_space(M, P.tol, scale=max(1.0, float(np.abs(M).max())))
        rows = [np.concatenate([s[: L.dim] @ L.basis, s[L.dim :] @ Lf.basis]) for s in sol]
    else:
        rows = [np.concatenate([np.zeros(n), b]) for b in Lf.basis]
    recovered = span(rows, n + m, P.tol)
    graph_res = subspace_residual(recovered, ld.D)

    # Quotient inverse on L/(D∩E) -> L♭/(D∩E♭) -> L/(D∩E).
    Lq, Lfq = complement_in(K, L), complement_in(Kf, Lf)
    Ahat = np.array([Lfq.basis @ _lift(ld.D, e_idx, u)[n:] for u in Lq.basis]).T.reshape(Lfq.dim, Lq.dim)
    Bhat = np.array([Lq.basis @ _lift(ld.D, f_idx, b)[:n] for b in Lfq.basis]).T.reshape(Lq.dim, Lfq.dim)
    if Lq.dim:
        inv_res = float(np.max(np.abs(Bhat @ Ahat - np.eye(Lq.dim))))
    else:
        inv_res = 0.0

    checks = {
        "lift_residual": lift_res,
        "omega_skew_residual": skew,
        "ker_P_L_residual": ker_res,
        "ker_P_Lflat_residual": kerf_res,
        "quotient_pairing_residual": pairing_res,
        "graph_recovery_residual": graph_res,
        "quotient_inverse_residual": inv_res,
    }
    return InducedTensors(L, Lf, K, Kf, PL, PLf, Omega, checks)


def classify(ld: LinearDirac) -> dict:
    """Evaluate predicates (a)-(h) and the three equivalence groups.

    Group (i) relies on ``E♭`` separating the points of ``E``; when that
    fails (always the case for a proper partial dual in finite dimension)
    the group is reported as not applicable rather than as a contradiction.
    """
    ld.require_certified()
    P = ld.space
    n, m = P.dim_E, P.dim_Eflat
    L, Lf, K, Kf = project_E(ld), project_Eflat(ld), cap_E(ld), cap_Eflat(ld)
    it = induced_tensors(ld)
    a = K.dim == 0
    b = Lf.dim == m
    # p♭ restricted to D is injective iff D∩E = 0 and onto iff L♭ = E♭.
    c = K.dim == 0 and Lf.dim == m
    d = Kf.dim == 0
    e = L.dim == n
    f = Kf.dim == 0 and L.dim == n
    g = bool(e and a and m == n and numerical_rank(it.P_L, P.tol) == n)
    h = bool(b and d and m == n and numerical_rank(it.P_Lflat, P.tol) == n)
    separated = m > 0 and numerical_rank(P.pairing_B, P.tol) == n
    preds = {"a": a, "b": b, "c": c, "d": d, "e": e, "f": f, "g": g, "h": h}
    groups = {}
    contradictions = []
    for name, members, applicable in (
        ("i", [a, b, c], separated),
        ("ii", [d, e, f], True),
        ("iii", [a and d, g, h], True),
    ):
        consistent = len(set(members)) == 1
        groups[name] = {
            "applicable": applicable,
            "consistent": consistent,
            "holds": bool(members[0]) if consistent else None,
        }
        if applicable and not consistent:
            contradictions.append(name)
    cases = [k for k, v in groups.items() if v["applicable"] and v["holds"]]
    return {
        "predicates": preds,
        "groups": groups,
        "separation_hypothesis": separated,
        "contradictions": contradictions,
        "cases": cases,
    }


# -- transport -------------------------------------------------------------

def _rowspace(M: np.ndarray, n: int, tol: float) -> Subspace:
    return span(list(M), n, tol) if M.shape[0] else zero(n)


def _covector_map(P_src: PontryaginSpace, P_dst: PontryaginSpace, phi: np.ndarray) -> np.ndarray:
    """Matrix taking E♭ coordinates on the codomain of ``phi`` to E♭ coordinates of phi^*."""
    # phi^*(a2) = a2^T B2 phi must equal a1^T B1, i.e. B1^T a1 = phi^T B2^T a2.
    return np.linalg.pinv(P_src.pairing_B.T) @ phi.T @ P_dst.pairing_B.T


def _solve_transport(constraint: np.ndarray, emit: np.ndarray, P: PontryaginSpace) -> Subspace:
    sol = null_space(constraint, P.tol, scale=max(1.0, float(np.abs(constraint).max(initial=0.0))))
    return span(list(sol @ emit.T), P.ambient_dim, P.tol)


def pullback(phi: np.ndarray, D2: LinearDirac, P1: PontryaginSpace | None = None) -> LinearDirac:
    """``phi^!(D2) = {(u1, phi^* a2) : (phi u1, a2) in D2}`` for injective ``phi``."""
    P2 = D2.space
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != P2.dim_E:
        raise DimensionError("phi must map into the space of D2")
    n1 = phi.shape[1]
    if numerical_rank(phi, P2.tol) != n1:
        raise TransportError("phi is not injective")
    pulled = _rowspace(P2.pairing_B @ phi, n1, P2.tol)
    if P1 is None:
        P1 = PontryaginSpace(n1, pulled.basis, P2.tol)
    else:
        if P1.dim_E != n1:
            raise DimensionError("P1 does not match the domain of phi")
        if not subspace_equal(pulled, _rowspace(P1.pairing_B, n1, P1.tol)):
            raise TransportError("phi^*(E2♭) differs from E1♭")
    T = _covector_map(P1, P2, phi) if P1.dim_Eflat else np.zeros((0, P2.dim_Eflat))
    n2, m2, m1 = P2.dim_E, P2.dim_Eflat, P1.dim_Eflat
    comp = null_space(D2.D.basis, scale=1.0)  # rows spanning the complement of D2
    lift = np.zeros((n2 + m2, n1 + m2))
    lift[:n2, :n1] = phi
    lift[n2:, n1:] = np.eye(m2)
    emit = np.zeros((n1 + m1, n1 + m2))
    emit[:n1, :n1] = np.eye(n1)
    emit[n1:, n1:] = T
    ld = verify_dirac(_solve_transport(comp @ lift, emit, P1), P1)
    return _with_notes(ld, {"construction": "pullback"}, [])


def pushforward(phi: np.ndarray, D1: LinearDirac, P2: PontryaginSpace | None = None) -> LinearDirac:
    """``phi_!(D1) = {(phi u1, a2) : (u1, phi^* a2) in D1}`` for surjective ``phi``."""
    P1 = D1.space
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[1] != P1.dim_E:
        raise DimensionError("phi must be defined on the space of D1")
    n2, n1 = phi.shape
    if numerical_rank(phi, P1.tol) != n2:
        raise TransportError("phi is not surjective")
    E1f = _rowspace(P1.pairing_B, n1, P1.tol)
    if P2 is None:
        # Largest E2♭ whose pullback lands in E1♭.
        comp = null_space(E1f.basis, scale=1.0) if E1f.dim else np.eye(n1)
        allowed = null_space(comp @ phi.T, P1.tol, scale=1.0) if comp.shape[0] else np.eye(n2)
        if allowed.shape[0] == 0:
            raise TransportError("no nonzero covector of E2 pulls back into E1♭")
        P2 = PontryaginSpace(n2, allowed, P1.tol)
    else:
        if P2.dim_E != n2:
            raise DimensionError("P2 does not match the codomain of phi")
        if containment_residual(_rowspace(P2.pairing_B @ phi, n1, P1.tol), E1f) > EQUAL_ATOL:
            raise TransportError("phi^*(E2♭) is not contained in E1♭")
    T = _covector_map(P1, P2, phi)
    m1, m2 = P1.dim_Eflat, P2.dim_Eflat
    comp = null_space(D1.D.basis, scale=1.0)
    lift = np.zeros((n1 + m1, n1 + m2))
    lift[:n1, :n1] = np.eye(n1)
    lift[n1:, n1:] = T
    emit = np.zeros((n2 + m2, n1 + m2))
    emit[:n2, :n1] = phi
    emit[n2:, n1:] = np.eye(m2)
    ld = verify_dirac(_solve_transport(comp @ lift, emit, P2), P2)
    return _with_notes(ld, {"construction": "pushforward"}, [])


# -- JSON construction specs -----------------------------------------------

def space_from_json(obj: dict, tol: float = DEFAULT_TOL_RANK) -> PontryaginSpace:
    n = int(obj["dimE"])
    pairing = obj.get("pairing")
    B = np.eye(n) if pairing is None else np.asarray(pairing, dtype=float).reshape(-1, n)
    return PontryaginSpace(n, B, tol)


def construct_from_json(obj: dict, tol: float = DEFAULT_TOL_RANK) -> LinearDirac:
    """Build a structure from ``{"space": ..., "construct": {"kind": ...}}``.

    A ``direct_sum`` carries its summands under ``"parts"``, each a full
    construction spec, and needs no ``"space"`` of its own.
    """
    spec = obj["construct"]
    kind = spec["kind"]
    if kind == "direct_sum":
        parts = [construct_from_json(p, tol) for p in spec["parts"]]
        if not parts:
            raise ValueError("direct_sum needs at least one part")
        acc = parts[0]
        for part in parts[1:]:
            acc = direct_sum(acc, part)
        return acc
    P = space_from_json(obj["space"], tol)
    n, m = P.dim_E, P.dim_Eflat
    if kind == "graph_flat":
        Q = spec.get("Q")
        F = spec.get("F")
        Fs = span(F, n, tol) if F is not None else None
        return construct_graph_flat(P, None if Q is None else np.asarray(Q, dtype=float), Fs)
    if kind == "graph_sharp":
        return construct_graph_sharp(P, np.asarray(spec["P"], dtype=float))
    if kind == "explicit":
        return verify_dirac(span(spec["basis"], n + m, tol), P)
    raise ValueError(f"unknown construction kind {kind!r}")
