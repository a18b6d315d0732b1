"""Time integration: exactness on Taylor-Green, order of accuracy,
monotone decay, and trajectory persistence."""

import numpy as np
import pytest

from cascade_probe import solver
from cascade_probe.spectral import Grid, integrate


@pytest.fixture(scope="module")
def grid64():
    return Grid(64)


def test_config_validation():
    with pytest.raises(ValueError, match="integer number"):
        solver.SimConfig(n=32, nu=0.1, dt=0.3, t_end=1.0)
    with pytest.raises(ValueError, match="viscosity"):
        solver.SimConfig(n=32, nu=0.0, dt=1e-3, t_end=1.0)
    with pytest.raises(ValueError, match="stride"):
        solver.SimConfig(n=32, nu=0.1, dt=1e-3, t_end=1.0, stride=0)
    assert solver.SimConfig(n=32, nu=0.1, dt=1e-3, t_end=1.0).n_steps == 1000


def test_taylor_green_one_step(grid64):
    nu, dt = 0.01, 1e-3
    w0 = solver.taylor_green_fields(grid64, nu, 0.0)[0]
    wh1 = solver.step(grid64.rfft2(w0), grid64, nu, dt)
    w_exact = solver.taylor_green_fields(grid64, nu, dt)[0]
    assert np.max(np.abs(grid64.irfft2(wh1) - w_exact)) <= 1e-10


def test_taylor_green_long_run():
    g = Grid(32)
    nu = 0.05
    w0 = solver.taylor_green_fields(g, nu, 0.0)[0]
    traj = solver.run(solver.SimConfig(n=32, nu=nu, dt=2e-3, t_end=0.5, stride=50), w0)
    w_exact = solver.taylor_green_fields(g, nu, 0.5)[0]
    assert np.max(np.abs(traj.snapshots[-1].w - w_exact)) <= 1e-10
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(0.5)


def test_snapshot_times_are_exact_multiples():
    g = Grid(32)
    w0 = solver.taylor_green_fields(g, 0.05, 0.0)[0]
    traj = solver.run(solver.SimConfig(n=32, nu=0.05, dt=1e-3, t_end=0.01, stride=3), w0)
    # Stride snapshots plus the final step, no duplicates.
    assert traj.times.tolist() == [k * 1e-3 for k in (0, 3, 6, 9, 10)]


def test_self_convergence_fourth_order(grid64):
    w0 = solver.synthesize_initial_vorticity(
        grid64, {"k_star": 6, "bandwidth": 3, "amplitude": 2.0, "seed": 3}
    )
    nu, t_end = 0.02, 0.08

    def final(dt):
        cfg = solver.SimConfig(n=64, nu=nu, dt=dt, t_end=t_end, stride=10**6)
        return solver.run(cfg, w0).snapshots[-1].w

    ref = final(2.5e-4)
    e1 = np.max(np.abs(final(2e-3) - ref))
    e2 = np.max(np.abs(final(1e-3) - ref))
    assert e2 <= 1e-8
    # Richardson ratio for a 4th order scheme is 16; leave slack for the
    # reference-error contamination at this resolution.
    assert 10.0 < e1 / e2 < 22.0


def test_energy_enstrophy_monotone(grid64):
    w0 = solver.synthesize_initial_vorticity(
        grid64, {"k_star": 8, "bandwidth": 4, "amplitude": 3.0, "seed": 12}
    )
    traj = solver.run(solver.SimConfig(n=64, nu=0.05, dt=2e-3, t_end=0.3, stride=15), w0)
    s = traj.global_series()
    e = np.array(s["energy"])
    z = np.array(s["enstrophy"])
    assert np.all(np.diff(e) <= 1e-12 * e[:-1])
    assert np.all(np.diff(z) <= 1e-12 * z[:-1])
    assert np.all(np.array(s["palinstrophy"]) > 0)


def test_global_enstrophy_balance(grid64):
    # With Z = int w^2/2 and P = int |grad w|^2: d/dt Z = -nu P.
    # Checked with a centered difference across snapshots.
    nu = 0.02
    w0 = solver.synthesize_initial_vorticity(
        grid64, {"k_star": 6, "bandwidth": 3, "amplitude": 2.0, "seed": 5}
    )
    dt = 1e-3
    traj = solver.run(solver.SimConfig(n=64, nu=nu, dt=dt, t_end=0.02, stride=1), w0)
    s = traj.global_series()
    z = np.array(s["enstrophy"])
    p = np.array(s["palinstrophy"])
    lhs = (z[2:] - z[:-2]) / (2 * dt)
    rhs = -nu * p[1:-1]
    assert np.max(np.abs(lhs - rhs)) <= 1e-6 * np.max(np.abs(rhs)) + 1e-6


def test_cfl_violation_raises():
    g = Grid(32)
    w0 = 50.0 * solver.taylor_green_fields(g, 0.01, 0.0)[0]
    with pytest.raises(solver.CFLViolation):
        solver.run(solver.SimConfig(n=32, nu=0.01, dt=0.05, t_end=0.1, stride=1), w0)


def test_nonzero_mean_rejected():
    g = Grid(32)
    w0 = solver.taylor_green_fields(g, 0.01, 0.0)[0] + 0.1
    with pytest.raises(ValueError, match="zero mean"):
        solver.run(solver.SimConfig(n=32, nu=0.01, dt=1e-3, t_end=0.01), w0)


def test_save_load_bit_exact(tmp_path, grid64):
    w0 = solver.synthesize_initial_vorticity(
        grid64, {"k_star": 8, "bandwidth": 3, "amplitude": 1.0, "seed": 1}
    )
    traj = solver.run(solver.SimConfig(n=64, nu=0.05, dt=2e-3, t_end=0.02, stride=5), w0)
    traj.save(tmp_path / "run")
    back = solver.Trajectory.load(tmp_path / "run")
    assert back.nu == traj.nu
    assert back.config == traj.config
    assert back.times.tolist() == traj.times.tolist()
    for a, b in zip(traj, back):
        np.testing.assert_array_equal(a.w, b.w)


def test_snapshot_lazy_fields(grid64):
    snap = solver.taylor_green_snapshot(0.03, 0.4, grid64)
    _, u1, u2, p = solver.taylor_green_fields(grid64, 0.03, 0.4)
    got_u = snap.u
    assert snap.u is got_u  # cached
    np.testing.assert_allclose(got_u[0], u1, atol=1e-10)
    np.testing.assert_allclose(got_u[1], u2, atol=1e-10)
    np.testing.assert_allclose(snap.p, p, atol=1e-9)
    snap.release()
    assert snap._u is None and snap._p is None
    assert snap.w is not None  # array-backed snapshots keep their data


def test_synthesize_properties(grid64):
    spec = {"k_star": 10, "bandwidth": 4, "amplitude": 3.0, "seed": 42}
    w = solver.synthesize_initial_vorticity(grid64, spec)
    assert np.sqrt(np.mean(w * w)) == pytest.approx(3.0, rel=1e-12)
    assert abs(np.mean(w)) <= 1e-14
    kh = grid64.rfft2(w)
    kmag = np.sqrt(grid64.k_sq)
    live = np.abs(kh) > 1e-10 * np.max(np.abs(kh))
    assert kmag[live].min() >= 6.0 - 1e-9
    assert kmag[live].max() <= 14.0 + 1e-9
    # Determinism and seed sensitivity.
    np.testing.assert_array_equal(w, solver.synthesize_initial_vorticity(grid64, spec))
    other = solver.synthesize_initial_vorticity(grid64, {**spec, "seed": 43})
    assert np.max(np.abs(w - other)) > 0.1


def test_synthesize_rejects_bad_band(grid64):
    with pytest.raises(ValueError):
        solver.synthesize_initial_vorticity(
            grid64, {"k_star": 4, "bandwidth": 5, "amplitude": 1.0, "seed": 0}
        )


def test_enstrophy_to_palinstrophy_scale_inside_band(grid64):
    w = solver.synthesize_initial_vorticity(
        grid64, {"k_star": 10, "bandwidth": 4, "amplitude": 1.0, "seed": 9}
    )
    from cascade_probe.spectral import gradient

    wx1, wx2 = gradient(w, grid64)
    z = integrate(0.5 * w * w, grid64)
    p = integrate(wx1 * wx1 + wx2 * wx2, grid64)
    sigma = np.sqrt(2 * z / p)
    assert 1.0 / 14.0 <= sigma <= 1.0 / 6.0
