"""Constrained Hamiltonian systems on T*Q and their induced Dirac structures.

A system is a configuration chart, constraint 1-forms ``w^a`` cutting out the
distribution ``Delta``, and a Hamiltonian ``H(q, p)``.  Motion satisfies

    q' in Delta(q),   q' = dH/dp,   dH/dq + p' in Delta°(q).

If ``H`` does not depend on some momenta ``p_d`` (degenerate Lagrangians such
as the capacitor charges of an LC circuit) the matching velocities are free
unknowns ``u`` and ``p_d = 0`` is kept as a primary constraint.  The unknowns
``(u, lambda)`` come from an affine system; rows whose coefficient matrix is
identically singular are traded for time derivatives of the state
constraints they imply (index reduction), so every constraint the dynamics
must respect ends up in :attr:`Dynamics.state_constraints`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fields import FieldError, Kind, PolyField, field_from_json, one_form
from .linear_dirac import verify_dirac
from .poly import Chart, Poly, compile_polys
from .subspaces import PontryaginSpace, null_space, span

MEMBERSHIP_TOL = 1e-8
PROJECTION_TOL = 1e-12
ADMISSIBLE_TOL = 1e-8
CONDITION_LIMIT = 1e12

DISK_DEFAULTS = {"m": 1.0, "I": 1.0, "J": 1.0, "R": 1.0}
LC_DEFAULTS = {"l": 1.0, "c1": 1.0, "c2": 1.0, "c3": 1.0}


class SystemSpecError(ValueError):
    """Bad system specification."""


class RankDeficientError(SystemSpecError):
    pass


class MultiplierSingularError(RuntimeError):
    pass


class InadmissibleStateError(ValueError):
    pass


@dataclass
class ConstrainedSystem:
    name: str
    params: dict
    qchart: Chart
    constraint_forms: list
    hamiltonian: Poly
    names: list

    def __post_init__(self):
        self.chart = self.qchart.cotangent()
        for w in self.constraint_forms:
            if w.kind is not Kind.ONE_FORM or w.chart != self.qchart:
                raise SystemSpecError("constraint forms must be 1-forms on the configuration chart")
        if self.hamiltonian.nvars != self.chart.nvars:
            raise SystemSpecError("Hamiltonian must live on the cotangent chart")

    @property
    def dim_Q(self) -> int:
        return self.qchart.dim

    @property
    def n_constraints(self) -> int:
        return len(self.constraint_forms)

    @property
    def state_names(self) -> list[str]:
        return list(self.names) + [f"p_{nm}" for nm in self.names]

    def widen(self, p: Poly) -> Poly:
        return self.qchart.widen(p, self.chart)

    def constraint_matrix(self, q: Sequence[float]) -> np.ndarray:
        """``k x n`` matrix of the constraint forms at a configuration."""
        n = self.dim_Q
        if not self.constraint_forms:
            return np.zeros((0, n))
        return np.array([w.at(q) for w in self.constraint_forms]).reshape(len(self.constraint_forms), n)

    def check_rank(self, samples: int = 16, seed: int = 0):
        rng = np.random.default_rng(seed)
        k = self.n_constraints
        if k > self.dim_Q:
            raise RankDeficientError(f"{k} constraints on a {self.dim_Q}-dimensional configuration space")
        for _ in range(samples):
            q = _random_configuration(self.qchart, rng)
            W = self.constraint_matrix(q)
            if k and np.linalg.matrix_rank(W) < k:
                raise RankDeficientError(f"constraint forms drop rank at q = {q.tolist()}")

    @property
    def dynamics(self) -> "Dynamics":
        dyn = getattr(self, "_dynamics", None)
        if dyn is None:
            dyn = Dynamics(self)
            self._dynamics = dyn
        return dyn


def _random_configuration(chart: Chart, rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
    q = rng.uniform(-radius, radius, chart.dim)
    for d, _, _ in chart.angle_pairs:
        q[d] = rng.uniform(-math.pi, math.pi)
    return q


def _positive(params: dict, defaults: dict) -> dict:
    out = dict(defaults)
    for k, v in params.items():
        if k not in defaults:
            raise SystemSpecError(f"unknown parameter {k!r}; expected {sorted(defaults)}")
        out[k] = float(v)
    for k, v in out.items():
        if not v > 0.0:
            raise SystemSpecError(f"parameter {k} must be positive, got {v}")
    return out


def rolling_disk(params: dict | None = None) -> ConstrainedSystem:
    """Vertical disk rolling without slipping; chart (x, y, theta, phi), phi an angle."""
    prm = _positive(params or {}, DISK_DEFAULTS)
    m, I, J, R = prm["m"], prm["I"], prm["J"], prm["R"]
    q = Chart.with_angles(3, 1, names=["x", "y", "theta", "phi"])
    c, s = q.var(3), q.var(4)
    one, zero = q.const(1.0), q.zero()
    forms = [one_form(q, [one, zero, -R * c, zero]), one_form(q, [zero, one, -R * s, zero])]
    T = q.cotangent()
    px, py, pt, pf = (T.var(q.nvars + i) for i in range(4))
    H = px * px * (0.5 / m) + py * py * (0.5 / m) + pt * pt * (0.5 / I) + pf * pf * (0.5 / J)
    sysm = ConstrainedSystem("rolling-disk", prm, q, forms, H, ["x", "y", "theta", "phi"])
    return sysm


def lc_circuit(params: dict | None = None) -> ConstrainedSystem:
    """Inductor and three capacitors; charges (q_l, q_c1, q_c2, q_c3)."""
    prm = dict(params or {})
    if "ell" in prm:
        prm["l"] = prm.pop("ell")
    prm = _positive(prm, LC_DEFAULTS)
    names = ["q_l", "q_c1", "q_c2", "q_c3"]
    q = Chart.euclidean(4, names=names)
    one, zero = q.const(1.0), q.zero()
    forms = [one_form(q, [-one, zero, one, zero]), one_form(q, [zero, -one, one, -one])]
    T = q.cotangent()
    pl = T.var(4)
    H = pl * pl * (0.5 / prm["l"])
    for i, cname in enumerate(("c1", "c2", "c3")):
        qc = T.var(1 + i)
        H = H + qc * qc * (0.5 / prm[cname])
    return ConstrainedSystem("lc-circuit", prm, q, forms, H, names)


def custom_system(spec: dict) -> ConstrainedSystem:
    """``{"dim": n, "angles": a, "forms": [...], "hamiltonian": {...}, "params": {...}}``.

    The last ``a`` configuration directions are angles.  Without a
    ``hamiltonian`` the free particle ``sum p_i^2 / (2 m)`` is used.
    """
    n = int(spec["dim"])
    a = int(spec.get("angles", 0))
    names = spec.get("names") or [f"x{i + 1}" for i in range(n)]
    q = Chart.with_angles(n - a, a, names=names) if a else Chart.euclidean(n, names=names)
    forms = [field_from_json(f, q) for f in spec.get("forms", [])]
    for f in forms:
        if f.kind is not Kind.ONE_FORM:
            raise SystemSpecError("constraint entries must be OneForm fields")
    T = q.cotangent()
    params = {k: float(v) for k, v in spec.get("params", {}).items()}
    if "hamiltonian" in spec:
        H = Poly.from_json(spec["hamiltonian"], T.nvars)
    else:
        mass = params.get("m", 1.0)
        if not mass > 0:
            raise SystemSpecError("parameter m must be positive")
        H = T.zero()
        for i in range(n):
            p = T.var(q.nvars + i)
            H = H + p * p * (0.5 / mass)
    return ConstrainedSystem(spec.get("label", "custom"), params, q, forms, H, list(names))


def build_system(name_or_spec) -> ConstrainedSystem:
    if isinstance(name_or_spec, str):
        spec = {"name": name_or_spec}
    else:
        spec = dict(name_or_spec)
    name = spec.get("name", "custom")
    if name == "rolling-disk":
        sysm = rolling_disk(spec.get("params"))
    elif name == "lc-circuit":
        sysm = lc_circuit(spec.get("params"))
    elif name == "custom":
        sysm = custom_system(spec)
    else:
        raise SystemSpecError(f"unknown system {name!r}")
    sysm.check_rank()
    return sysm


# -- dynamics -----------------------------------------------------------------

def _dot(row: Sequence[Poly], col: Sequence[Poly], zero: Poly) -> Poly:
    out = zero
    for a, b in zip(row, col):
        if a.terms and b.terms:
            out = out + a * b
    return out


class Dynamics:
    """Compiled right-hand side with index-reduced multiplier equations."""

    def __init__(self, sysm: ConstrainedSystem, probes: int = 8, seed: int = 0, max_rounds: int = 4):
        self.system = sysm
        ch = sysm.chart
        qch = sysm.qchart
        n, nvq, nv = sysm.dim_Q, qch.nvars, ch.nvars
        self.n, self.nv, self.nvq = n, nv, nvq
        zero = ch.zero()
        H = sysm.hamiltonian
        self.p_vars = [nvq + i for i in range(n)]
        dHdq = [ch.partial(H, i) for i in range(n)]
        dHdp = [ch.partial(H, n + i) for i in range(n)]
        self.degenerate = [i for i in range(n) if H.diff(nvq + i).is_zero()]
        nu, k = len(self.degenerate), sysm.n_constraints
        self.nu, self.k, self.nw = nu, k, nu + k
        nw = self.nw
        Om = [[sysm.widen(w[i]) for i in range(n)] for w in sysm.constraint_forms]

        # direction velocities as affine maps of w = (u, lambda)
        qdot0 = list(dHdp)
        Qw = [[zero] * nw for _ in range(n)]
        for j, d in enumerate(self.degenerate):
            Qw[d][j] = ch.const(1.0)
        pdot0 = [-g for g in dHdq]
        Pw = [[zero] * nw for _ in range(n)]
        for a in range(k):
            for i in range(n):
                Pw[i][nu + a] = Om[a][i]
        self.vel0 = qdot0 + pdot0
        self.velw = Qw + Pw

        # ring-variable rates
        f0 = [zero] * nv
        F = [[zero] * nw for _ in range(nv)]
        angle_dirs = {d: (c, s) for d, c, s in qch.angle_pairs}
        for i in range(n):
            if i in angle_dirs:
                c, s = angle_dirs[i]
                cv, sv = ch.var(c), ch.var(s)
                f0[c], f0[s] = -sv * qdot0[i], cv * qdot0[i]
                F[c] = [-sv * x for x in Qw[i]]
                F[s] = [cv * x for x in Qw[i]]
            else:
                j = qch._simple[i]
                f0[j], F[j] = qdot0[i], list(Qw[i])
        for i in range(n):
            f0[nvq + i], F[nvq + i] = pdot0[i], list(Pw[i])
        self.f0, self.F = f0, F

        # multiplier rows a + B w = 0
        rows_a, rows_B = [], []
        for a in range(k):
            rows_a.append(_dot(Om[a], qdot0, zero))
            rows_B.append([_dot(Om[a], [Qw[i][j] for i in range(n)], zero) for j in range(nw)])
        for d in self.degenerate:
            rows_a.append(pdot0[d])
            rows_B.append(list(Pw[d]))
        constraints = [ch.var(nvq + d) for d in self.degenerate]
        self.rounds = self._reduce(rows_a, rows_B, constraints, probes, seed, max_rounds)
        self.rows_a, self.rows_B, self.state_constraints = rows_a, rows_B, constraints

        # compiled evaluators
        flat_B = [b for row in rows_B for b in row]
        flat_F = [x for row in F for x in row]
        flat_vw = [x for row in self.velw for x in row]
        self._system = compile_polys(rows_a + flat_B, nv)
        self._rates = compile_polys(f0 + flat_F, nv)
        self._vel = compile_polys(self.vel0 + flat_vw, nv)
        grad = [ch.partial(H, i) for i in range(2 * n)]
        self._energy = compile_polys([H], nv)
        self._dH = compile_polys(grad, nv)
        self._omega = compile_polys([x for row in Om for x in row], nv) if k else None
        phi = constraints
        self._phi = compile_polys(phi, nv) if phi else None
        jac = [ch.partial(p, i) for p in phi for i in range(2 * n)]
        self._phi_jac = compile_polys(jac, nv) if phi else None
        mask = np.zeros((len(phi), 2 * n))
        for r, p in enumerate(phi):
            uses_p = any(not p.diff(v).is_zero() for v in self.p_vars)
            if uses_p:
                mask[r, n:] = 1.0
            else:
                mask[r, :n] = 1.0
        self._mask = mask

    # symbolic index reduction
    def _reduce(self, rows_a, rows_B, constraints, probes, seed, max_rounds) -> int:
        rng = np.random.default_rng(seed)
        ch = self.system.chart
        nv, nw = self.nv, self.nw
        points = []
        for _ in range(probes):
            q = _random_configuration(self.system.qchart, rng)
            p = rng.uniform(-1.0, 1.0, self.n)
            points.append(np.concatenate([self.system.qchart.lift(q), p]))
        rounds = 0
        for _ in range(max_rounds):
            if not rows_a:
                return rounds
            m = len(rows_a)
            if nw:
                blocks = [np.array([[b(z) for b in row] for row in rows_B]) for z in points]
                stacked = np.hstack(blocks)
                N = null_space(stacked.T, 1e-10, scale=max(1.0, float(np.abs(stacked).max())))
            else:
                N = np.eye(m)
            if N.shape[0] == 0:
                return rounds
            rounds += 1
            N = _row_echelon(N)
            replaced = []
            for nvec in N:
                piv = int(np.flatnonzero(np.abs(nvec) > 1e-10)[0])
                combo_B = [_dot([ch.const(float(c)) for c in nvec], [rows_B[r][j] for r in range(m)], ch.zero())
                           for j in range(nw)]
                if any(not b.is_zero(1e-9) for b in combo_B):
                    raise MultiplierSingularError("multiplier matrix loses rank in a state-dependent way")
                psi = _dot([ch.const(float(c)) for c in nvec], rows_a, ch.zero())
                if psi.is_zero(1e-12):
                    replaced.append((piv, None))
                    continue
                constraints.append(psi)
                grad = [psi.diff(j) for j in range(nv)]
                new_a = _dot(grad, self.f0, ch.zero())
                new_B = [_dot(grad, [self.F[j][l] for j in range(nv)], ch.zero()) for l in range(nw)]
                replaced.append((piv, (new_a, new_B)))
            for piv, new in sorted(replaced, key=lambda t: -t[0]):
                if new is None:
                    del rows_a[piv]
                    del rows_B[piv]
                else:
                    rows_a[piv], rows_B[piv] = new
        raise MultiplierSingularError("index reduction did not terminate")

    # numerics
    def multipliers(self, zr: np.ndarray, check: bool = False) -> np.ndarray:
        """Solve for ``(u, lambda)``; ``check`` adds a condition-number test."""
        if not self.nw:
            return np.zeros(0)
        m = len(self.rows_a)
        vals = self._system(zr)
        a, B = vals[:m], vals[m:].reshape(m, self.nw)
        if m == self.nw:
            if check:
                cond = np.linalg.cond(B)
                if not np.isfinite(cond) or cond > CONDITION_LIMIT:
                    raise MultiplierSingularError(f"singular multiplier matrix (condition estimate {cond:.3e})")
            try:
                return np.linalg.solve(B, -a)
            except np.linalg.LinAlgError as exc:
                raise MultiplierSingularError("singular multiplier matrix (condition estimate inf)") from exc
        w, *_ = np.linalg.lstsq(B, -a, rcond=None)
        return w

    def ring_rate(self, zr: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
        if w is None:
            w = self.multipliers(zr)
        vals = self._rates(zr)
        f0, F = vals[: self.nv], vals[self.nv :].reshape(self.nv, self.nw)
        return f0 + F @ w

    def velocity(self, zr: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Direction rates ``(q', p')``."""
        vals = self._vel(zr)
        v0, V = vals[: 2 * self.n], vals[2 * self.n :].reshape(2 * self.n, self.nw)
        return v0 + V @ w

    def energy(self, zr) -> float:
        return float(self._energy(zr)[0])

    def dH(self, zr) -> np.ndarray:
        return self._dH(zr)

    def dH_total(self, zr, w: np.ndarray) -> np.ndarray:
        """Differential of ``H + u . p_d``, the Hamiltonian with the free velocities attached."""
        out = np.array(self._dH(zr))
        for j, d in enumerate(self.degenerate):
            out[self.n + d] += w[j]
        return out

    def omega(self, zr) -> np.ndarray:
        if self._omega is None:
            return np.zeros((0, self.n))
        return self._omega(zr).reshape(self.k, self.n)

    def phi(self, zr) -> np.ndarray:
        return self._phi(zr) if self._phi is not None else np.zeros(0)

    def project(self, zr: np.ndarray, iterations: int = 6, tol: float = PROJECTION_TOL) -> tuple[np.ndarray, float]:
        """Newton projection onto the state constraints; returns the state and the correction size."""
        if self._phi is None:
            return zr, 0.0
        total = 0.0
        for _ in range(iterations):
            r = self._phi(zr)
            if np.max(np.abs(r)) <= tol:
                break
            J = self._phi_jac(zr).reshape(len(r), 2 * self.n) * self._mask
            delta, *_ = np.linalg.lstsq(J, -r, rcond=None)
            zr = apply_direction_step(self.system.chart, zr, delta)
            total += float(np.linalg.norm(delta))
        return zr, total


def _row_echelon(N: np.ndarray) -> np.ndarray:
    """Reduced row echelon form with partial pivoting (distinct pivot columns)."""
    A = np.array(N, dtype=float)
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        piv = r + int(np.argmax(np.abs(A[r:, c])))
        if abs(A[piv, c]) < 1e-10:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] /= A[r, c]
        for i in range(rows):
            if i != r:
                A[i] -= A[i, c] * A[r]
        r += 1
    return A[:r]


def apply_direction_step(chart: Chart, zr: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Move a ring state by ``delta`` in direction coordinates (angles rotate their (c, s) pair)."""
    out = np.array(zr, dtype=float)
    angle_dirs = {d: (c, s) for d, c, s in chart.angle_pairs}
    for i, dv in enumerate(delta):
        if dv == 0.0:
            continue
        if i in angle_dirs:
            c, s = angle_dirs[i]
            cd, sd = math.cos(dv), math.sin(dv)
            out[c], out[s] = out[c] * cd - out[s] * sd, out[s] * cd + out[c] * sd
        else:
            out[chart._simple[i]] += dv
    return out


def to_ring(sysm: ConstrainedSystem, z: Sequence[float]) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (2 * sysm.dim_Q,):
        raise ValueError(f"state must have {2 * sysm.dim_Q} entries (q then p)")
    return sysm.chart.lift(z)


# -- pointwise Dirac structure ------------------------------------------------

def delta_basis(sysm: ConstrainedSystem, q, W: np.ndarray | None = None) -> np.ndarray:
    W = sysm.constraint_matrix(q) if W is None else W
    if W.shape[0] == 0:
        return np.eye(sysm.dim_Q)
    return null_space(W, 1e-10)


def _dirac_rows(basis: np.ndarray, W: np.ndarray, n: int) -> np.ndarray:
    """Rows ``(q', p', alpha, omega)`` spanning the induced structure at one point."""
    rows = []
    for v in basis:
        rows.append(np.concatenate([v, np.zeros(n), np.zeros(n), v]))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(np.concatenate([np.zeros(n), e, -e, np.zeros(n)]))
    for w in W:
        rows.append(np.concatenate([np.zeros(n), np.zeros(n), w, np.zeros(n)]))
    return np.array(rows).reshape(len(rows), 4 * n)


@dataclass
class InducedDiracPoint:
    base: np.ndarray
    dirac: object
    delta: np.ndarray

    @property
    def certified(self) -> bool:
        return self.dirac.certified

    def to_json(self) -> dict:
        return {
            "base": self.base.tolist(),
            "status": self.dirac.status.value,
            "dim_D": self.dirac.D.dim,
            "ambient_dim": self.dirac.space.ambient_dim,
            "basis": self.dirac.D.basis.tolist(),
        }


def induced_dirac_at(sysm: ConstrainedSystem, z: Sequence[float]) -> InducedDiracPoint:
    """The induced structure at ``z = (q, p)`` as a linear Dirac structure on ``T_z(T*Q)``."""
    n = sysm.dim_Q
    z = np.asarray(z, dtype=float)
    q = z[:n]
    W = sysm.constraint_matrix(q)
    if W.shape[0] and np.linalg.matrix_rank(W) < W.shape[0]:
        raise RankDeficientError(f"constraint forms drop rank at q = {q.tolist()}")
    basis = delta_basis(sysm, q)
    rows = _dirac_rows(basis, W, n)
    P = PontryaginSpace.full_dual(2 * n)
    ld = verify_dirac(span(rows, 4 * n), P)
    return InducedDiracPoint(z, ld, basis)


def membership_residual(sysm: ConstrainedSystem, q, zdot: np.ndarray, dH: np.ndarray,
                        W: np.ndarray | None = None) -> float:
    """Distance from ``(z', dH(z))`` to the induced structure at ``q``."""
    n = sysm.dim_Q
    W = sysm.constraint_matrix(q) if W is None else W
    rows = _dirac_rows(delta_basis(sysm, q, W), W, n)
    Qm, _ = np.linalg.qr(rows.T)
    v = np.concatenate([zdot, dH])
    return float(np.linalg.norm(v - Qm @ (Qm.T @ v)))


def dynamics_rhs(sysm: ConstrainedSystem, z: Sequence[float]):
    """``(q', p', lambda)`` at a state given in direction coordinates."""
    dyn = sysm.dynamics
    zr = to_ring(sysm, z)
    w = dyn.multipliers(zr, check=True)
    vel = dyn.velocity(zr, w)
    n = sysm.dim_Q
    return vel[:n], vel[n:], w[dyn.nu :]


# -- integration --------------------------------------------------------------

@dataclass
class Trajectory:
    names: list
    times: np.ndarray
    states: np.ndarray
    energy: np.ndarray
    res_constraint: np.ndarray
    res_dirac: np.ndarray
    multipliers: np.ndarray
    controls: np.ndarray
    projection: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    def q(self) -> np.ndarray:
        return self.states[:, : self.n]

    def p(self) -> np.ndarray:
        return self.states[:, self.n :]

    def header(self) -> list[str]:
        lam = [f"lambda{i + 1}" for i in range(self.multipliers.shape[1])]
        return ["t"] + list(self.names) + ["energy", "res_constraint", "res_dirac"] + lam

    def rows(self):
        for i in range(len(self.times)):
            yield ([self.times[i]] + list(self.states[i]) + [self.energy[i], self.res_constraint[i],
                                                             self.res_dirac[i]] + list(self.multipliers[i]))

    def write_csv(self, handle):
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(self.header())
        for row in self.rows():
            writer.writerow([repr(float(v)) for v in row])


def _unwrap(prev: float, new: float) -> float:
    d = new - prev
    return prev + (d + math.pi) % (2 * math.pi) - math.pi


def integrate(sysm: ConstrainedSystem, z0: Sequence[float], h: float, T: float, check_admissible: bool = True,
              project: bool = True, admissible_tol: float = ADMISSIBLE_TOL) -> Trajectory:
    """Classical RK4 on the ring state, then circle renormalisation and constraint projection."""
    if not h > 0 or not T > 0:
        raise ValueError("step and horizon must be positive")
    dyn = sysm.dynamics
    ch = sysm.chart
    n = sysm.dim_Q
    zr = to_ring(sysm, z0)
    phi0 = dyn.phi(zr)
    if check_admissible and phi0.size and np.max(np.abs(phi0)) > admissible_tol:
        raise InadmissibleStateError(
            f"initial state violates the constraints (max residual {np.max(np.abs(phi0)):.3e}); "
            "use project_state() to move it onto the constraint set")
    steps = int(round(T / h))
    times = np.arange(steps + 1) * h
    states = np.zeros((steps + 1, 2 * n))
    energy = np.zeros(steps + 1)
    res_c = np.zeros(steps + 1)
    res_d = np.zeros(steps + 1)
    lam = np.zeros((steps + 1, dyn.k))
    ctl = np.zeros((steps + 1, dyn.nu))
    proj = np.zeros(steps + 1)
    angle_dirs = [d for d, _, _ in ch.angle_pairs]
    coords = np.asarray(z0, dtype=float).copy()

    def record(i, zr, coords):
        w = dyn.multipliers(zr, check=True)
        vel = dyn.velocity(zr, w)
        dH = dyn.dH_total(zr, w)
        Om = dyn.omega(zr)
        states[i] = coords
        energy[i] = dyn.energy(zr)
        res_c[i] = float(np.max(np.abs(Om @ vel[:n]))) if dyn.k else 0.0
        res_d[i] = membership_residual(sysm, coords[:n], vel, dH, Om)
        lam[i] = w[dyn.nu :]
        ctl[i] = w[: dyn.nu]

    record(0, zr, coords)
    for i in range(1, steps + 1):
        k1 = dyn.ring_rate(zr)
        k2 = dyn.ring_rate(zr + 0.5 * h * k1)
        k3 = dyn.ring_rate(zr + 0.5 * h * k2)
        k4 = dyn.ring_rate(zr + h * k3)
        zr = zr + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        zr = ch.normalize(zr)
        if project:
            zr, proj[i] = dyn.project(zr)
        new = ch.coordinates(zr)
        for d in angle_dirs:
            new[d] = _unwrap(coords[d], new[d])
        coords = new
        record(i, zr, coords)
    return Trajectory(sysm.state_names, times, states, energy, res_c, res_d, lam, ctl, proj)


def project_state(sysm: ConstrainedSystem, z: Sequence[float]) -> np.ndarray:
    """Move a state onto the constraint set (momenta for momentum-dependent constraints)."""
    zr, _ = sysm.dynamics.project(to_ring(sysm, z), iterations=20)
    out = sysm.chart.coordinates(zr)
    z = np.asarray(z, dtype=float)
    for d, _, _ in sysm.chart.angle_pairs:
        out[d] = _unwrap(z[d], out[d])
    return out


def diagnostics(traj: Trajectory) -> dict:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    drift = np.abs(traj.energy - traj.energy[0])
    lam_norm = np.linalg.norm(traj.multipliers, axis=1) if traj.multipliers.size else np.zeros(len(traj))
    return {
        "steps": len(traj) - 1,
        "energy_initial": float(traj.energy[0]),
        "energy_drift_max": float(drift.max()),
        "energy_drift_mean": float(drift.mean()),
        "constraint_residual_initial": float(traj.res_constraint[0]),
        "constraint_residual_max": float(traj.res_constraint.max()),
        "constraint_residual_mean": float(traj.res_constraint.mean()),
        "membership_residual_initial": float(traj.res_dirac[0]),
        "membership_residual_max": float(traj.res_dirac.max()),
        "membership_residual_mean": float(traj.res_dirac.mean()),
        "multiplier_norm_max": float(lam_norm.max()),
        "multiplier_norm_mean": float(lam_norm.mean()),
        "projection_max": float(traj.projection.max()) if traj.projection.size else 0.0,
    }


def disk_initial_state(sysm: ConstrainedSystem, theta_dot: float, phi_dot: float,
                       x: float = 0.0, y: float = 0.0, theta: float = 0.0, phi: float = 0.0) -> np.ndarray:
    """Admissible rolling-disk state with the given spin and turning rates."""
    prm = sysm.params
    m, I, J, R = prm["m"], prm["I"], prm["J"], prm["R"]
    xd, yd = R * math.cos(phi) * theta_dot, R * math.sin(phi) * theta_dot
    return np.array([x, y, theta, phi, m * xd, m * yd, I * theta_dot, J * phi_dot])
