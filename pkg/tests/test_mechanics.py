import io
import math

import numpy as np
import pytest

from dirackit.linear_dirac import classify
from dirackit.mechanics import (
    InadmissibleStateError,
    RankDeficientError,
    SystemSpecError,
    build_system,
    diagnostics,
    disk_initial_state,
    dynamics_rhs,
    induced_dirac_at,
    integrate,
    lc_circuit,
    project_state,
    rolling_disk,
)

LC_Z0 = [0.0, 0.5, 1.0, 0.5, 0.2, 0.0, 0.0, 0.0]
DX2 = {"dim": 2, "kind": "OneForm", "components": {"2": {"(0,0)": 1.0}}}


def test_lc_multipliers_match_capacitor_voltages():
    # lambda1 = q2/c2 + q3/c3, lambda2 = -q3/c3
    sysm = lc_circuit({"c2": 2.0, "c3": 4.0})
    qdot, pdot, lam = dynamics_rhs(sysm, [0.0, 0.5, 1.0, 2.0, 0.2, 0.0, 0.0, 0.0])
    assert lam == pytest.approx([1.0, -0.5])
    assert qdot == pytest.approx([0.2, 0.04, 0.2, 0.16])
    assert pdot == pytest.approx([-1.0, 0.0, 0.0, 0.0])


def test_lc_degenerate_momenta_and_secondary_constraint():
    dyn = lc_circuit().dynamics
    assert dyn.degenerate == [1, 2, 3]
    assert len(dyn.state_constraints) == 4


def test_disk_rhs_rolls_without_slipping():
    sysm = rolling_disk()
    qdot, pdot, _ = dynamics_rhs(sysm, disk_initial_state(sysm, 1.0, 0.5, phi=0.3))
    assert qdot == pytest.approx([math.cos(0.3), math.sin(0.3), 1.0, 0.5])
    assert pdot[:2] == pytest.approx([-0.5 * math.sin(0.3), 0.5 * math.cos(0.3)])


def test_custom_system_with_potential_and_wall():
    spec = {"name": "custom", "dim": 2, "forms": [DX2],
            "hamiltonian": {"(0,0,2,0)": 0.5, "(0,0,0,2)": 0.5, "(0,1,0,0)": 1.0}}
    qdot, pdot, lam = dynamics_rhs(build_system(spec), [0.0, 0.0, 1.0, 0.0])
    assert qdot == pytest.approx([1.0, 0.0])
    assert pdot == pytest.approx([0.0, 0.0])
    assert lam == pytest.approx([1.0])


def test_rank_deficient_constraints_are_refused():
    with pytest.raises(RankDeficientError):
        build_system({"name": "custom", "dim": 2, "forms": [DX2, DX2]})


def test_unknown_system_and_bad_parameters():
    with pytest.raises(SystemSpecError):
        build_system("pendulum")
    with pytest.raises(SystemSpecError):
        rolling_disk({"m": -1.0})


def test_induced_structure_on_disk_is_certified():
    pt = induced_dirac_at(rolling_disk(), disk_initial_state(rolling_disk(), 1.0, 0.5))
    assert pt.certified
    assert pt.dirac.D.dim == 8 and pt.dirac.space.ambient_dim == 16


def test_no_constraints_gives_symplectic_graph_case_iii():
    sysm = build_system({"name": "custom", "dim": 2})
    pt = induced_dirac_at(sysm, [0.1, 0.2, 0.3, 0.4])
    assert pt.certified
    assert "iii" in classify(pt.dirac)["cases"]


def test_inadmissible_start_is_refused_and_projection_repairs_it():
    sysm = rolling_disk()
    bad = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.5]
    with pytest.raises(InadmissibleStateError, match="project_state"):
        integrate(sysm, bad, 1e-2, 0.05)
    fixed = project_state(sysm, bad)
    tr = integrate(sysm, fixed, 1e-2, 0.05)
    assert tr.res_constraint.max() <= 1e-10


def test_unchecked_start_reports_its_residuals():
    sysm = rolling_disk()
    bad = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.5]
    tr = integrate(sysm, bad, 1e-2, 0.02, check_admissible=False)
    assert tr.res_dirac[0] > 1e-3


def test_short_lc_run_keeps_invariants():
    tr = integrate(lc_circuit(), LC_Z0, 1e-3, 0.5)
    d = diagnostics(tr)
    assert d["energy_drift_max"] <= 1e-12
    assert d["membership_residual_max"] <= 1e-10
    q = tr.q()
    assert np.abs(q[:, 1] - q[:, 3]).max() <= 1e-10


def test_csv_layout():
    tr = integrate(lc_circuit(), LC_Z0, 1e-2, 0.02)
    buf = io.StringIO()
    tr.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == ["t", "q_l", "q_c1", "q_c2", "q_c3", "p_q_l", "p_q_c1", "p_q_c2", "p_q_c3",
                                   "energy", "res_constraint", "res_dirac", "lambda1", "lambda2"]
    assert len(lines) == 1 + 3


def test_disk_angles_are_unwrapped():
    sysm = rolling_disk()
    tr = integrate(sysm, disk_initial_state(sysm, 1.0, 2.0), 1e-2, 4.0)
    assert tr.q()[-1, 3] == pytest.approx(8.0, abs=1e-6)
