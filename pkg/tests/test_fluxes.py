"""Localized bookkeeping against closed forms and exact identities.

The Taylor-Green field gives machine-checkable oracles: with w = 2 sin x1
sin x2 e^(-2 nu t), the whole-box integrals are

    kinetic energy      pi^2 e^(-4 nu t)
    enstrophy           2 pi^2 e^(-4 nu t)
    palinstrophy        8 pi^2 e^(-4 nu t)

so the box scale ratios sqrt(e/E_grad) and sqrt(2 E / P) are both exactly
1/2, time-independent.  The shell difference identity and the quadratic /
cubic scaling laws hold to rounding on any field, solution or not; only
the balance residual needs a genuine trajectory.
"""

import numpy as np
import pytest

from cascade_probe import fluxes as fx
from cascade_probe.cutoffs import (
    DELTA_DEFAULT,
    make_ball_cutoff,
    make_outer_cutoff,
    make_shell_cutoff,
    make_time_cutoff,
)
from cascade_probe.coverings import make_ball_covering
from cascade_probe.solver import (
    SimConfig,
    Snapshot,
    Trajectory,
    run,
    synthesize_initial_vorticity,
    taylor_green_snapshot,
)
from cascade_probe.spectral import Grid

PI2 = np.pi**2


def analytic_tg(grid, nu, times):
    traj = Trajectory(grid=grid, nu=nu, config={"analytic": "taylor-green"})
    for t in times:
        traj.snapshots.append(taylor_green_snapshot(nu, t, grid))
    return traj


def snapshot_traj(grid, fields, nu=0.05, dt_snap=0.1):
    """Trajectory wrapper around prescribed vorticity fields."""
    traj = Trajectory(grid=grid, nu=nu, config={})
    for j, w in enumerate(fields):
        traj.snapshots.append(Snapshot(j * dt_snap, grid, w=w.copy()))
    return traj


@pytest.fixture(scope="module")
def grid128():
    return Grid(128)


@pytest.fixture(scope="module")
def random_traj(grid128):
    """Short genuine run; dense snapshots so time quadrature is not the
    bottleneck in the balance checks."""
    w0 = synthesize_initial_vorticity(
        grid128, {"k_star": 6.0, "bandwidth": 2.0, "amplitude": 3.0, "seed": 42}
    )
    cfg = SimConfig(n=128, nu=0.05, dt=1e-3, t_end=0.8, stride=4)
    return run(cfg, w0)


# ------------------------------------------------------- closed forms


def test_tg_unit_weight_quantities(grid128):
    nu = 0.02
    times = [0.0, 0.3, 0.7]
    traj = analytic_tg(grid128, nu, times)
    q = fx.local_quantities(traj, None)
    decay = np.exp(-4.0 * nu * np.asarray(times))
    assert np.allclose(q.e, PI2 * decay, rtol=1e-12)
    assert np.allclose(q.E, 2.0 * PI2 * decay, rtol=1e-12)
    assert np.allclose(q.E_prime, 2.0 * PI2 * decay, rtol=1e-12)
    assert np.allclose(q.P, 8.0 * PI2 * decay, rtol=1e-10)


def test_tg_box_scales(grid128):
    nu = 0.03
    T = 0.25
    times = np.linspace(0.0, 2 * T, 81)
    traj = analytic_tg(grid128, nu, times)
    avgs = fx.global_quantities(traj, R0=0.7, T=T)
    sc = fx.scales(avgs)
    # both length ratios are exactly 1/2 for Taylor-Green, at every time,
    # hence also after any time averaging
    assert abs(sc["tau_box"] - 0.5) < 1e-12


def test_unit_weight_E_equals_E_prime(random_traj):
    q = fx.local_quantities(random_traj, None)
    assert np.array_equal(q.E, q.E_prime)


# ------------------------------------------------------- time averaging


def test_time_average_quadrature():
    T = 0.5
    t = np.linspace(0.0, 2 * T, 501)
    assert abs(fx.time_average(t, np.ones_like(t), T) - 2.0) < 1e-13
    # linear ramp: trapz is exact
    assert abs(fx.time_average(t, t, T) - 1.0) < 1e-13


def test_time_average_short_horizon():
    t = np.linspace(0.0, 0.9, 10)
    with pytest.raises(ValueError):
        fx.time_average(t, np.ones_like(t), T=0.5)


# ------------------------------------------------------- scaling laws


def test_quadratic_cubic_scaling(grid128):
    rng = np.random.default_rng(3)
    w = synthesize_initial_vorticity(
        grid128, {"k_star": 5.0, "bandwidth": 2.0, "amplitude": 2.0, "seed": 9}
    )
    lam = 1.0 + rng.random()
    t1 = snapshot_traj(grid128, [w])
    t2 = snapshot_traj(grid128, [lam * w])
    c = make_ball_cutoff((0.1, -0.2), 0.3, 0.7)
    q1 = fx.local_quantities(t1, c)
    q2 = fx.local_quantities(t2, c)
    for a, b in ((q1.e, q2.e), (q1.E, q2.E), (q1.P, q2.P)):
        assert np.allclose(lam**2 * a, b, rtol=1e-11)
    f1 = fx.flux_enstrophy(t1, c)
    f2 = fx.flux_enstrophy(t2, c)
    assert np.allclose(lam**3 * f1.Psi, f2.Psi, rtol=1e-11)
    g1 = fx.flux_energy(t1, c)
    g2 = fx.flux_energy(t2, c)
    assert np.allclose(lam**3 * g1.Phi, g2.Phi, rtol=1e-11)


def test_zero_field_quantities(grid128):
    traj = snapshot_traj(grid128, [np.zeros((128, 128))])
    q = fx.local_quantities(traj, make_ball_cutoff((0.0, 0.0), 0.3, 0.7))
    assert q.e[0] == 0.0 and q.P[0] == 0.0
    with pytest.raises(fx.ScaleError):
        fx.scales({"e0": np.float64(0.0), "E_prime0": np.float64(0.0)})


# ------------------------------------------------------- shell identity


def test_shell_flux_difference_identity(grid128):
    """The shell weight is built as ball(R1) minus ball(R2/2), so its flux
    must equal the difference of the two ball fluxes to rounding."""
    w = synthesize_initial_vorticity(
        grid128, {"k_star": 7.0, "bandwidth": 3.0, "amplitude": 4.0, "seed": 17}
    )
    traj = snapshot_traj(grid128, [w])
    cases = [
        ((0.0, 0.0), 0.55, 0.275),
        ((0.12, -0.07), 0.6, 0.24),
        ((-0.1, 0.15), 0.5, 0.3),
    ]
    for x0, R1, R2 in cases:
        sh = make_shell_cutoff(x0, R1, R2, 0.7)
        outer = make_ball_cutoff(x0, R1, 0.7)
        inner = make_ball_cutoff(x0, R2 / 2.0, 0.7)
        psi_sh = fx.flux_enstrophy(traj, sh).Psi[0]
        diff = (
            fx.flux_enstrophy(traj, outer).Psi[0]
            - fx.flux_enstrophy(traj, inner).Psi[0]
        )
        scale = max(abs(psi_sh), abs(diff), 1e-30)
        assert abs(psi_sh - diff) / scale < 1e-10


# ------------------------------------------------------- balance residual


def test_balance_residual_random_run(random_traj):
    T = 0.4
    tc = make_time_cutoff(T)
    # R >= 0.3 keeps the ramps above ~6 cells at n = 128; thinner ramps
    # push the spatial quadrature error of the energy form past 1e-2
    for x0, R in (((0.0, 0.0), 0.35), ((0.15, -0.1), 0.3), ((-0.2, 0.05), 0.3)):
        c = make_ball_cutoff(x0, R, 0.7).with_time(tc)
        for which in ("enstrophy", "energy"):
            r = fx.balance_residual(random_traj, c, which=which)
            assert r < 1e-2, f"{which} residual {r:.2e} at {x0}, R={R}"


def test_balance_residual_tg_analytic(grid128):
    # exact solution sampled densely; residual limited by the spatial
    # quadrature of the ramp region at this resolution
    nu = 0.05
    T = 0.4
    times = np.arange(0.0, 0.8 + 1e-12, 0.005)
    traj = analytic_tg(grid128, nu, times)
    c = make_ball_cutoff((0.0, 0.0), 0.35, 0.7).with_time(make_time_cutoff(T))
    assert fx.balance_residual(traj, c, which="enstrophy") < 1e-2
    assert fx.balance_residual(traj, c, which="energy") < 1e-2


def test_balance_residual_needs_window(random_traj):
    c = make_ball_cutoff((0.0, 0.0), 0.3, 0.7)
    with pytest.raises(ValueError):
        fx.balance_residual(random_traj, c)


def test_balance_residual_zero_field(grid128):
    fields = [np.zeros((128, 128))] * 9
    traj = snapshot_traj(grid128, fields, dt_snap=0.1)
    c = make_ball_cutoff((0.0, 0.0), 0.3, 0.7).with_time(make_time_cutoff(0.4))
    assert fx.balance_residual(traj, c) == 0.0


# ------------------------------------------------------- covering paths


def test_covering_series_matches_local_quantities(random_traj):
    T = 0.4
    tc = make_time_cutoff(T)
    cov = make_ball_covering(0.7, 0.35)
    cuts = [c.with_time(tc) for c in fx.covering_cutoffs(cov)]
    series = fx.covering_series(random_traj, cuts, T)
    i = len(cuts) // 2
    q = fx.local_quantities(random_traj, cuts[i])
    for name, ref in (("e", q.e), ("E", q.E), ("P", q.P)):
        num = np.abs(series[name][i] - ref)
        den = np.maximum(np.abs(ref), 1e-30)
        assert np.max(num / den) < 1e-9


def test_single_ball_covering_reproduces_global(random_traj):
    """Ratio R/R0 = 1 covers with one centered ball, so the ensemble
    average must equal the global average of the same quantity."""
    T = 0.4
    R0 = 0.7
    tc = make_time_cutoff(T)
    cov = make_ball_covering(R0, R0)
    assert cov.n == 1
    cuts = [c.with_time(tc) for c in fx.covering_cutoffs(cov)]
    series = fx.covering_series(random_traj, cuts, T)
    avg_e = fx.element_time_averages(series, T)["e"]
    ens = fx.ensemble_average(avg_e, cov)
    g = fx.global_quantities(random_traj, R0, T)
    assert abs(ens - g["e0"]) / g["e0"] < 1e-12


def test_lemma_energy_band(random_traj):
    """Covering element averages of the energy sit inside the K1/K2 band
    around the global density at each tested ratio."""
    T = 0.4
    R0 = 0.7
    tc = make_time_cutoff(T)
    g = fx.global_quantities(random_traj, R0, T)
    for ratio in (1.0, 0.5):
        cov = make_ball_covering(R0, ratio * R0)
        cuts = [c.with_time(tc) for c in fx.covering_cutoffs(cov)]
        series = fx.covering_series(random_traj, cuts, T, quantities=("e",))
        ens = fx.ensemble_average(
            fx.element_time_averages(series, T)["e"], cov
        )
        lo = (1.0 / cov.K1) * g["e0"]
        hi = cov.K2 * g["e0"]
        slack = 1e-12 * g["e0"]
        assert lo - slack <= ens <= hi + slack, (ratio, lo, ens, hi)


def test_ensemble_average_modes(grid128):
    vals = np.array([1.0, 2.0, 3.0])
    cov = make_ball_covering(0.7, 0.35)
    with pytest.raises(ValueError):
        fx.ensemble_average(vals, cov, mode="bogus")
    with pytest.raises(ValueError):
        fx.ensemble_average(np.array([]), cov)
    # uniform weighting is tied to the square sampling, not a covering
    with pytest.raises(ValueError):
        fx.ensemble_average(vals, cov, mode="uniform")


def test_covering_series_input_checks(random_traj):
    cov = make_ball_covering(0.7, 0.35)
    cuts = fx.covering_cutoffs(cov)
    with pytest.raises(ValueError):
        fx.covering_series(random_traj, [], 0.4)
    with pytest.raises(ValueError):
        fx.covering_series(random_traj, cuts, 0.4, quantities=("nope",))


def test_uniform_sample_geometry():
    us = fx.uniform_sample(0.7, 0.2)
    r = np.hypot(us.centers[:, 0], us.centers[:, 1])
    assert np.all(r <= 0.7 + 1e-12)
    assert us.cell_area > 0.0
    assert len(us.centers) > 10


# ------------------------------------------------------- delta edge cases


def test_half_delta_uses_support_indicator(grid128):
    """At delta = 1/2 the energy weight is psi^0; mass entirely outside
    the support must not leak in through numpy's 0**0 = 1."""
    c = make_ball_cutoff((0.0, 0.0), 0.2, 0.7, delta=0.5)
    f = c.sample(grid128)
    # vorticity dipole far from the ball: inside B(0, 0.4) support it is 0
    x1, x2 = grid128.mesh()
    w = np.sin(x1) * np.sin(x2) * (np.hypot(x1 - np.pi, x2 - np.pi) < 1.0)
    w = w - w.mean()
    traj = snapshot_traj(grid128, [w])
    q = fx.local_quantities(traj, c)
    box = fx.local_quantities(traj, None)
    assert q.E[0] < 1e-3 * box.E[0]
    # and on the support the indicator matches the exact mask integral
    w2 = np.sqrt(2.0) * np.sin(x1)
    traj2 = snapshot_traj(grid128, [w2])
    qE = fx.local_quantities(traj2, c).E[0]
    mask = (f.psi > 0).astype(float)
    ref = 0.5 * np.sum(mask * w2 * w2) * grid128.dx**2
    assert abs(qE - ref) / ref < 1e-12


def test_outer_quantities_shapes(random_traj):
    from cascade_probe.coverings import make_outer_pair

    cov = make_outer_pair(2 * np.pi, 1.4, 0.7)
    out = fx.outer_quantities(random_traj, cov, T=0.4, delta=DELTA_DEFAULT)
    for key in ("e", "E", "Phi"):
        assert key in out and len(out[key]) == 2


def test_shell_quantities_ratio_fields(random_traj):
    out = fx.shell_quantities(
        random_traj, (0.0, 0.0), R1=0.5, R2=0.25, R0=0.7, T=0.4
    )
    assert out["R_tilde"] == pytest.approx(0.25)
    assert out["sigma"] > 0.0 and out["tau"] > 0.0
