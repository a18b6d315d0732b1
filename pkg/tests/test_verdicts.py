"""Verdict layer: frozen constant arithmetic and end-to-end reports.

Two kinds of coverage.  Constant formulas are checked against hand
arithmetic (gamma = 1/2 with K1 = K2 = 8 gives 0.09375 and 8.03125, the
dyadic k = -2 band is [7.295e-4, 5.355], and so on).  The checks
themselves run on a Taylor-Green trajectory, where symmetry pins the
fluxes near zero and every hypothesis misses by a wide measured margin,
and on a short nonlinear run, where the unconditional rows (the
two-sided shell estimate and the outer pre-band) must hold because they
are consequences of the balance identity alone.
"""

import numpy as np
import pytest

from cascade_probe import verdicts as vd
from cascade_probe.cutoffs import make_time_cutoff
from cascade_probe.solver import (
    SimConfig,
    Trajectory,
    run,
    synthesize_initial_vorticity,
    taylor_green_snapshot,
)
from cascade_probe.spectral import Grid

C0_TIME_REF = 40.112275886235494  # window steepness at the default delta


@pytest.fixture(scope="module")
def tg_traj():
    """Analytic decay sampled densely enough for the window quadrature."""
    grid = Grid(128)
    nu = 0.5
    traj = Trajectory(grid=grid, nu=nu, config={"analytic": "taylor-green"})
    for t in np.arange(0.0, 1.96 + 1e-12, 0.02):
        traj.snapshots.append(taylor_green_snapshot(nu, t, grid))
    return traj


@pytest.fixture(scope="module")
def nl_traj():
    """Genuine solver run long enough for T = R0^2/nu at R0 = 0.5."""
    grid = Grid(128)
    w0 = synthesize_initial_vorticity(
        grid, {"k_star": 6.0, "bandwidth": 2.0, "amplitude": 3.0, "seed": 11}
    )
    cfg = SimConfig(n=128, nu=0.2, dt=1e-3, t_end=2.5, stride=10)
    return run(cfg, w0)


# ----------------------------------------------------------- constants


def test_constants_reference_values():
    tk = vd.TheoremConstants.from_measured(8.0, 8.0, 1.0, 0.5)
    assert tk.c_0 == pytest.approx(0.09375, abs=1e-15)
    assert tk.c_1 == pytest.approx(8.03125, abs=1e-12)
    assert tk.c == pytest.approx(0.125, abs=1e-15)
    assert 0.0 < tk.c_0 < tk.c_1


def test_outer_constants_reference_values():
    tk = vd.TheoremConstants.from_measured(1.0, 2.0, 1.0, 0.4)
    assert tk.cbar_0 == pytest.approx(0.34, abs=1e-12)
    assert tk.cbar_1 == pytest.approx(1.16, abs=1e-12)


def test_outer_guard():
    tk = vd.TheoremConstants.from_measured(1.0, 2.0, 1.0, 0.9)
    assert tk.cbar_0 is None
    with pytest.raises(vd.GuardViolation):
        tk.outer()


def test_constants_input_validation():
    for g in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(ValueError):
            vd.TheoremConstants.from_measured(8.0, 8.0, 1.0, g)
    with pytest.raises(ValueError):
        vd.TheoremConstants.from_measured(0.5, 8.0, 1.0, 0.5)


def test_dyadic_band_reference_values():
    tk = vd.TheoremConstants.from_measured(8.0, 8.0, 1.0, 0.5)
    lo = tk.c_0 / tk.c_1 * 2.0 ** (2 * -2)
    hi = tk.c_1 / tk.c_0 * 2.0 ** (2 * -2)
    assert lo == pytest.approx(7.295e-4, rel=1e-3)
    assert hi == pytest.approx(5.355, rel=1e-3)


def test_band_slack_semantics():
    assert vd._band_ok(1.019, 0.5, 1.0)
    assert not vd._band_ok(1.021, 0.5, 1.0)
    assert vd._band_ok(0.49 * 0.98, 0.49, 1.0)
    # negative lower endpoints widen downward, not upward
    assert vd._band_ok(-1.019, -1.0, 1.0)
    assert not vd._band_ok(-1.03, -1.0, 1.0)


def test_time_cutoff_constant_matches_reference():
    tc = make_time_cutoff(0.7)
    val = vd.time_cutoff_constant(tc)
    assert val == pytest.approx(C0_TIME_REF, rel=1e-2)
    # dimensionless in T by construction
    assert vd.time_cutoff_constant(make_time_cutoff(7.0)) == pytest.approx(
        val, rel=1e-6
    )


# ----------------------------------------------------- reports on decay


def test_enstrophy_check_on_decay(tg_traj):
    rep = vd.check_enstrophy_cascade(tg_traj, 0.7, 0.5, [0.7, 0.35])
    assert rep.verdict == "vacuous"
    cond = rep.conditions["sigma0"]
    assert not cond["holds"] and cond["margin"] > 1.0
    assert all(c.ok is None for c in rep.checks)
    assert rep.constants.C0 > 40.0
    # margins and thresholds are reported even when nothing is asserted
    assert rep.measured["threshold"] == pytest.approx(
        rep.constants.c * 0.5 * 0.7
    )
    assert rep.measured["sigma0"] > rep.measured["threshold"]


def test_forward_energy_check_on_decay(tg_traj):
    rep = vd.check_forward_energy_cascade(tg_traj, 0.7, 0.5, [0.7])
    assert rep.verdict == "vacuous"
    # omega ~ x1 x2 near the stagnation point at the origin, so the
    # local Taylor scale sits well above the global 1/2
    assert 0.2 < rep.measured["tau0"] < 3.0


def test_checks_are_deterministic(tg_traj):
    a = vd.check_enstrophy_cascade(tg_traj, 0.7, 0.5, [0.35])
    b = vd.check_enstrophy_cascade(tg_traj, 0.7, 0.5, [0.35])
    assert a.to_json() == b.to_json()


def test_inverse_check_on_decay(tg_traj):
    rep = vd.check_inverse_cascade(tg_traj, 2.0 * np.pi, 0.7, 0.04, [1.4, 5.0])
    assert rep.verdict == "vacuous"
    pre = [c for c in rep.checks if c.condition is None and c.ok is not None]
    assert pre and all(c.ok for c in pre)
    skipped = [c for c in rep.checks if "no outer region" in c.note]
    assert len(skipped) == 1 and skipped[0].scale == 5.0


def test_inverse_gamma_guard_rejected(tg_traj):
    with pytest.raises(vd.GuardViolation):
        vd.check_inverse_cascade(tg_traj, 2.0 * np.pi, 0.7, 0.4, [1.4])


def test_shell_locality_on_decay(tg_traj):
    rep = vd.check_shell_locality(
        tg_traj, [((0.0, 0.0), 0.5, 0.25)], 0.5, R0=0.7
    )
    assert rep.verdict == "vacuous"
    two_sided = [c for c in rep.checks if c.condition is None]
    assert all(c.ok for c in two_sided)
    sh = rep.measured["shells"][0]
    band = [c for c in rep.checks if c.condition is not None][0]
    # symmetric factors at gamma = 1/2
    assert band.lower == pytest.approx(0.75 * tg_traj.nu * sh["P"])
    assert band.upper == pytest.approx(1.25 * tg_traj.nu * sh["P"])


def test_ensemble_shell_check_on_decay(tg_traj):
    rep = vd.check_ensemble_shell_cascade_and_ratios(
        tg_traj, 0.7, 0.5, [0.35, 0.175], [-1, 0]
    )
    assert rep.verdict == "vacuous"
    tk = rep.constants
    k0 = [c for c in rep.checks if c.name == "dyadic ratio k=0"][0]
    assert k0.lower == pytest.approx(tk.c_0 / tk.c_1)
    assert k0.upper == pytest.approx(tk.c_1 / tk.c_0)
    thin = [c for c in rep.checks if "unresolvable" in c.note]
    assert thin  # 0.0875 half-thickness is under two cells at n = 128


def test_horizon_validation(tg_traj):
    with pytest.raises(ValueError, match="window"):
        vd.check_enstrophy_cascade(tg_traj, 0.7, 0.5, [0.35], T=0.5)
    with pytest.raises(ValueError, match="before the window"):
        vd.check_enstrophy_cascade(tg_traj, 0.7, 0.5, [0.35], T=3.0)


# ------------------------------------------------ reports on real data


def test_unconditional_rows_hold_on_nonlinear_run(nl_traj):
    """Balance-identity consequences must survive a genuine flow."""
    rep = vd.check_inverse_cascade(nl_traj, 2.0 * np.pi, 0.5, 0.04, [1.2])
    pre = [c for c in rep.checks if c.condition is None and c.ok is not None]
    assert pre and all(c.ok for c in pre)

    rep2 = vd.check_shell_locality(
        nl_traj, [((0.0, 0.0), 0.4, 0.24)], 0.5, R0=0.5
    )
    two_sided = [c for c in rep2.checks if c.condition is None]
    assert two_sided and all(c.ok for c in two_sided)


def test_cascade_hypotheses_measured_on_nonlinear_run(nl_traj):
    """The hypotheses are measured, not assumed; this data misses them
    and the report must say by how much."""
    rep = vd.check_enstrophy_cascade(nl_traj, 0.5, 0.5, [0.5, 0.25])
    assert rep.verdict == "vacuous"
    assert rep.conditions["sigma0"]["margin"] > 1.0
    rep2 = vd.check_forward_energy_cascade(nl_traj, 0.5, 0.5, [0.25])
    assert rep2.verdict == "vacuous"


def test_plain_mode_swaps_lower_reference(nl_traj):
    cone = vd.check_enstrophy_cascade(nl_traj, 0.5, 0.5, [0.25])
    plain = vd.check_enstrophy_cascade(nl_traj, 0.5, 0.5, [0.25], "plain")
    g_P0 = cone.measured["P0"]
    g_Pp = plain.measured["P_prime"]
    row_c = cone.checks[0]
    row_p = plain.checks[0]
    assert row_c.lower == pytest.approx(cone.constants.c_0 * nl_traj.nu * g_P0)
    assert row_p.lower == pytest.approx(plain.constants.c_0 * nl_traj.nu * g_Pp)
    assert row_p.upper == pytest.approx(plain.constants.c_1 * nl_traj.nu * plain.measured["P0"])


# ------------------------------------------------------------ exit codes


def _report(verdict):
    tk = vd.TheoremConstants.from_measured(8.0, 8.0, 1.0, 0.5)
    return vd.CascadeReport(
        theorem="t", constants=tk, conditions={}, checks=[],
        verdict=verdict, boundary_mode="cone",
    )


def test_suite_exit_codes():
    assert vd.suite_exit_code([_report("pass")]) == 0
    assert vd.suite_exit_code([_report("pass"), _report("vacuous")]) == 0
    assert vd.suite_exit_code([_report("vacuous"), _report("vacuous")]) == 2
    assert vd.suite_exit_code([_report("pass"), _report("fail")]) == 1
    assert vd.suite_exit_code([]) == 0
