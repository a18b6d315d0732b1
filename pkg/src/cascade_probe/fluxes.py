"""Localized energy and enstrophy bookkeeping along a trajectory.

Per-snapshot quadratures of the weighted quantities (kinetic energy, two
enstrophy weightings, palinstrophy) and of the inward fluxes, plus the
averaging layers on top: time averages against the temporal window,
ensemble averages over covering elements, uniform center-sampled
averages, and global reference quantities on the analysis disk.

One rule fixes every weight power: quantities that pair with the time
derivative of the window (kinetic energy, the primary enstrophy) carry
phi^(2 delta - 1); the dissipation-side quantities (plain-weighted
enstrophy, palinstrophy) and both fluxes carry phi itself.  Here
phi(t,x) = eta(t) psi(x) and delta is the cutoff's own exponent.

Column names in emitted tables match the attribute names used here:
e, E, E_prime, P, Phi, Psi.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .coverings import Covering
from .cutoffs import (
    DELTA_DEFAULT,
    Cutoff,
    TimeCutoff,
    domain_bump,
    make_ball_cutoff,
    make_outer_cutoff,
    make_shell_cutoff,
    make_time_cutoff,
)
from .spectral import Grid, gradient, integrate

__all__ = [
    "LocalizedQuantities",
    "FluxSeries",
    "UniformSample",
    "ScaleError",
    "local_quantities",
    "flux_energy",
    "flux_enstrophy",
    "time_average",
    "covering_cutoffs",
    "covering_series",
    "element_time_averages",
    "ensemble_average",
    "uniform_sample",
    "uniform_average",
    "global_quantities",
    "outer_quantities",
    "shell_quantities",
    "scales",
    "balance_residual",
]

ALL_QUANTITIES = ("e", "E", "E_prime", "P", "Phi", "Psi")


class ScaleError(ValueError):
    """A length scale was requested with a nonpositive denominator."""


@dataclass
class LocalizedQuantities:
    """Per-snapshot weighted integrals for one cutoff.

    e and E carry the phi^(2 delta - 1) weight, E_prime and P the plain
    phi weight; all are window-weighted in time when the cutoff has one.
    """

    t: np.ndarray
    e: np.ndarray
    E: np.ndarray
    E_prime: np.ndarray
    P: np.ndarray
    delta: float


@dataclass
class FluxSeries:
    """Inward flux through one cutoff per snapshot; sign free either way."""

    t: np.ndarray
    kind: str
    Phi: Optional[np.ndarray] = None
    Psi: Optional[np.ndarray] = None


class UniformSample(NamedTuple):
    """Center-sampled stand-in for the continuum average over the disk."""

    centers: np.ndarray
    cell_area: float
    R0: float
    R: float


# ------------------------------------------------------- single cutoff


def _frac_power(arr: np.ndarray, p: float) -> np.ndarray:
    """arr ** p with the convention 0 ** 0 = 0.

    At delta = 1/2 the weight exponent 2*delta - 1 vanishes and the
    power must degrade to the support indicator, not to all-ones.
    """
    if p == 0.0:
        return (arr > 0.0).astype(arr.dtype)
    return arr**p


def _weight_fields(c: Optional[Cutoff], grid: Grid):
    if c is None:
        one = np.ones((grid.n, grid.n))
        zero = np.zeros((grid.n, grid.n))
        return one, zero, zero, zero, DELTA_DEFAULT
    f = c.sample(grid)
    return f.psi, f.g1, f.g2, f.lap, c.delta


def _eta_arrays(tc: Optional[TimeCutoff], t: np.ndarray, delta: float):
    if tc is None:
        one = np.ones_like(t)
        return one, one
    eta = tc.eta(t)
    return eta, _frac_power(eta, 2.0 * delta - 1.0)


def local_quantities(traj, c: Optional[Cutoff], eta: Optional[TimeCutoff] = None):
    """Weighted energy, enstrophy (both weightings) and palinstrophy.

    c = None means the unit spatial weight over the whole box; a time
    window still applies if given (the cutoff's own window wins).
    """
    grid = traj.grid
    psi, _, _, _, delta = _weight_fields(c, grid)
    psi_pow = _frac_power(psi, 2.0 * delta - 1.0)
    t = traj.times
    e = np.empty(len(t))
    E = np.empty(len(t))
    Ep = np.empty(len(t))
    P = np.empty(len(t))
    for j, snap in enumerate(traj):
        u1, u2 = snap.u
        w = snap.w
        wx1, wx2 = gradient(w, grid)
        usq = u1 * u1 + u2 * u2
        wsq = w * w
        e[j] = 0.5 * integrate(usq * psi_pow, grid)
        E[j] = 0.5 * integrate(wsq * psi_pow, grid)
        Ep[j] = 0.5 * integrate(wsq * psi, grid)
        P[j] = integrate((wx1 * wx1 + wx2 * wx2) * psi, grid)
        snap.release()
    tc = c.time if (c is not None and c.time is not None) else eta
    w1, wpow = _eta_arrays(tc, t, delta)
    return LocalizedQuantities(
        t=t, e=e * wpow, E=E * wpow, E_prime=Ep * w1, P=P * w1, delta=delta
    )


def _flux(traj, c: Cutoff, with_pressure: bool) -> np.ndarray:
    grid = traj.grid
    _, g1, g2, _, delta = _weight_fields(c, grid)
    t = traj.times
    out = np.empty(len(t))
    for j, snap in enumerate(traj):
        u1, u2 = snap.u
        if with_pressure:
            carrier = 0.5 * (u1 * u1 + u2 * u2) + snap.p
        else:
            w = snap.w
            carrier = 0.5 * w * w
        out[j] = integrate(carrier * (u1 * g1 + u2 * g2), grid)
        snap.release()
    eta, _ = _eta_arrays(c.time, t, delta)
    return out * eta


def flux_energy(traj, c: Cutoff) -> FluxSeries:
    """Total (kinetic plus pressure) inward energy flux per snapshot."""
    return FluxSeries(t=traj.times, kind=c.kind, Phi=_flux(traj, c, True))


def flux_enstrophy(traj, c: Cutoff) -> FluxSeries:
    return FluxSeries(t=traj.times, kind=c.kind, Psi=_flux(traj, c, False))


def time_average(times: np.ndarray, values: np.ndarray, T: float) -> float:
    """Trapezoid of an already window-weighted series over [0,2T], per T."""
    times = np.asarray(times, dtype=float)
    if times[-1] < 2.0 * T * (1.0 - 1e-9):
        raise ValueError(
            f"series ends at t={times[-1]:g} before the window closes at {2 * T:g}"
        )
    return float(np.trapezoid(np.asarray(values, dtype=float), times) / T)


# -------------------------------------------------------- covering layer


def covering_cutoffs(
    cov: Covering,
    delta: float = DELTA_DEFAULT,
    boundary_mode: str = "cone",
) -> list:
    """One weight per covering element, of the kind the covering implies."""
    if cov.kind == "balls":
        return [
            make_ball_cutoff(tuple(x), cov.R, cov.R0, delta, boundary_mode)
            for x in cov.centers
        ]
    if cov.kind == "shells":
        return [
            make_shell_cutoff(tuple(x), 2.0 * cov.R, cov.R, cov.R0, delta, boundary_mode)
            for x in cov.centers
        ]
    if cov.kind == "outer_pair":
        return [
            make_outer_cutoff(tuple(x), cov.R, cov.R0, cov.domain, delta)
            for x in cov.centers
        ]
    raise ValueError(f"unknown covering kind {cov.kind!r}")


def covering_series(
    traj,
    cutoffs: Sequence[Cutoff],
    T: float,
    quantities: Sequence[str] = ALL_QUANTITIES,
) -> dict:
    """Per-element, per-snapshot quantities for a family of cutoffs.

    Shared physical fields are computed once per snapshot; the cutoffs
    enter through stacked weight matrices, so the cost is one pass over
    the trajectory however many elements the covering has.
    """
    if not cutoffs:
        raise ValueError("empty covering")
    grid = traj.grid
    delta = cutoffs[0].delta
    if any(abs(c.delta - delta) > 1e-12 for c in cutoffs):
        raise ValueError("covering elements must share one delta")
    unknown = set(quantities) - set(ALL_QUANTITIES)
    if unknown:
        raise ValueError(f"unknown quantities {sorted(unknown)}")

    need_pow = bool({"e", "E"} & set(quantities))
    need_psi = bool({"E_prime", "P"} & set(quantities))
    need_grad = bool({"Phi", "Psi"} & set(quantities))
    pow_mat = psi_mat = g1_mat = g2_mat = None
    rows_pow, rows_psi, rows_g1, rows_g2 = [], [], [], []
    for c in cutoffs:
        f = c.sample(grid)
        if need_pow:
            rows_pow.append(_frac_power(f.psi, 2.0 * delta - 1.0).ravel())
        if need_psi:
            rows_psi.append(f.psi.ravel())
        if need_grad:
            rows_g1.append(f.g1.ravel())
            rows_g2.append(f.g2.ravel())
    if need_pow:
        pow_mat = np.vstack(rows_pow)
    if need_psi:
        psi_mat = np.vstack(rows_psi)
    if need_grad:
        g1_mat = np.vstack(rows_g1)
        g2_mat = np.vstack(rows_g2)
    del rows_pow, rows_psi, rows_g1, rows_g2

    t = traj.times
    n = len(cutoffs)
    out = {q: np.empty((n, len(t))) for q in quantities}
    dA = grid.dx * grid.dx
    need_p = "Phi" in quantities
    for j, snap in enumerate(traj):
        u1, u2 = snap.u
        w = snap.w
        usq = (u1 * u1 + u2 * u2).ravel()
        wsq = (w * w).ravel()
        if "e" in out:
            out["e"][:, j] = 0.5 * dA * (pow_mat @ usq)
        if "E" in out:
            out["E"][:, j] = 0.5 * dA * (pow_mat @ wsq)
        if "E_prime" in out:
            out["E_prime"][:, j] = 0.5 * dA * (psi_mat @ wsq)
        if "P" in out:
            wx1, wx2 = gradient(w, grid)
            out["P"][:, j] = dA * (psi_mat @ (wx1 * wx1 + wx2 * wx2).ravel())
        if "Phi" in out:
            carrier = 0.5 * usq + snap.p.ravel()
            out["Phi"][:, j] = dA * (
                g1_mat @ (carrier * u1.ravel()) + g2_mat @ (carrier * u2.ravel())
            )
        if "Psi" in out:
            out["Psi"][:, j] = 0.5 * dA * (
                g1_mat @ (wsq * u1.ravel()) + g2_mat @ (wsq * u2.ravel())
            )
        snap.release()

    tc = make_time_cutoff(T, delta)
    eta, eta_pow = _eta_arrays(tc, t, delta)
    for q in quantities:
        out[q] *= eta_pow if q in ("e", "E") else eta
    out["t"] = t
    return out


def element_time_averages(series: dict, T: float) -> dict:
    """Collapse a covering_series dict to per-element scalars."""
    t = series["t"]
    return {
        q: np.array([time_average(t, row, T) for row in series[q]])
        for q in series
        if q != "t"
    }


def ensemble_average(values, cov, mode: str = "ensemble") -> float:
    """Average per-element scalars down to one number at scale R."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty covering")
    if mode == "ensemble":
        return float(values.mean() / cov.R**2)
    if mode == "uniform":
        if not isinstance(cov, UniformSample):
            raise ValueError("uniform mode needs a UniformSample")
        return float(values.sum() * cov.cell_area / (cov.R0**2 * cov.R**2))
    raise ValueError(f"unknown mode {mode!r}")


def uniform_sample(R0: float, R: float, spacing: Optional[float] = None) -> UniformSample:
    """Square grid of centers filling B(0,R0) for the uniform average.

    Default spacing R/2, floored at R0/8 to cap the element count; the
    bands being approximated are wide enough that this resolution is
    immaterial.
    """
    if spacing is None:
        spacing = max(R / 2.0, R0 / 8.0)
    m = int(np.floor(R0 / spacing))
    ax = (np.arange(-m, m + 1) + 0.5) * spacing
    cx, cy = np.meshgrid(ax, ax, indexing="ij")
    pts = np.column_stack([cx.ravel(), cy.ravel()])
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= R0]
    return UniformSample(centers=pts, cell_area=spacing**2, R0=R0, R=R)


def uniform_average(
    traj,
    R: float,
    R0: float,
    T: float,
    delta: float = DELTA_DEFAULT,
    quantities: Sequence[str] = ("e", "E", "P"),
    boundary_mode: str = "cone",
    spacing: Optional[float] = None,
) -> dict:
    """Center-sampled uniform averages of the requested quantities."""
    us = uniform_sample(R0, R, spacing)
    cutoffs = [
        make_ball_cutoff(tuple(x), R, R0, delta, boundary_mode) for x in us.centers
    ]
    series = covering_series(traj, cutoffs, T, quantities)
    tavg = element_time_averages(series, T)
    return {q: ensemble_average(tavg[q], us, mode="uniform") for q in quantities}


# ------------------------------------------------------ global reference


def global_quantities(
    traj, R0: float, T: float, delta: float = DELTA_DEFAULT
) -> dict:
    """Reference quantities the cascade bounds are phrased against.

    Disk quantities (suffix 0) are normalized by T R0^2 and weighted by
    the domain bump; P_prime swaps the bump for the sharp disk indicator
    and a plain time window.  Box quantities (suffix _box) integrate over
    the whole torus with the time window only and are normalized by T
    alone.  tilde_E0 and tilde_P0 are the area-unnormalized companions
    R0^2 E0 and R0^2 P0.
    """
    grid = traj.grid
    bump = domain_bump(R0, delta)
    psi0 = bump.sample(grid).psi
    psi0_pow = _frac_power(psi0, 2.0 * delta - 1.0)
    d1 = grid.x1 - grid.length * np.round(grid.x1 / grid.length)
    d2 = grid.x2 - grid.length * np.round(grid.x2 / grid.length)
    disk = np.hypot(d1, d2) <= R0

    t = traj.times
    raw = {k: np.empty(len(t)) for k in
           ("e0", "E0", "E_prime0", "P0", "P_prime", "e_box", "E_box")}
    for j, snap in enumerate(traj):
        u1, u2 = snap.u
        w = snap.w
        wx1, wx2 = gradient(w, grid)
        usq = u1 * u1 + u2 * u2
        wsq = w * w
        gw = wx1 * wx1 + wx2 * wx2
        raw["e0"][j] = 0.5 * integrate(usq * psi0_pow, grid)
        raw["E0"][j] = 0.5 * integrate(wsq * psi0_pow, grid)
        raw["E_prime0"][j] = 0.5 * integrate(wsq * psi0, grid)
        raw["P0"][j] = integrate(gw * psi0, grid)
        raw["P_prime"][j] = integrate(np.where(disk, gw, 0.0), grid)
        raw["e_box"][j] = 0.5 * integrate(usq, grid)
        u1x, u1y = gradient(u1, grid)
        u2x, u2y = gradient(u2, grid)
        raw["E_box"][j] = integrate(
            u1x * u1x + u1y * u1y + u2x * u2x + u2y * u2y, grid
        )
        snap.release()

    tc = make_time_cutoff(T, delta)
    eta, eta_pow = _eta_arrays(tc, t, delta)
    area = R0 * R0
    out = {
        "e0": time_average(t, raw["e0"] * eta_pow, T) / area,
        "E0": time_average(t, raw["E0"] * eta_pow, T) / area,
        "E_prime0": time_average(t, raw["E_prime0"] * eta, T) / area,
        "P0": time_average(t, raw["P0"] * eta, T) / area,
        "P_prime": time_average(t, raw["P_prime"] * eta, T) / area,
        "e_box": time_average(t, raw["e_box"] * eta, T),
        "e_box_pow": time_average(t, raw["e_box"] * eta_pow, T),
        "E_box": time_average(t, raw["E_box"] * eta, T),
    }
    out["tilde_E0"] = area * out["E0"]
    out["tilde_P0"] = area * out["P0"]
    return out


def outer_quantities(
    traj, cov: Covering, T: float, delta: float = DELTA_DEFAULT
) -> dict:
    """Per-element outer energy, full-gradient enstrophy and outward flux.

    Values are time averages (per T); the pair average is their mean.
    """
    if cov.kind != "outer_pair":
        raise ValueError("outer quantities need an outer_pair covering")
    grid = traj.grid
    cutoffs = covering_cutoffs(cov, delta)
    fields = [c.sample(grid) for c in cutoffs]
    t = traj.times
    n = len(cutoffs)
    e_r = np.empty((n, len(t)))
    E_r = np.empty((n, len(t)))
    F_r = np.empty((n, len(t)))
    for j, snap in enumerate(traj):
        u1, u2 = snap.u
        usq = u1 * u1 + u2 * u2
        u1x, u1y = gradient(u1, grid)
        u2x, u2y = gradient(u2, grid)
        gu = u1x * u1x + u1y * u1y + u2x * u2x + u2y * u2y
        carrier = 0.5 * usq + snap.p
        for i, f in enumerate(fields):
            e_r[i, j] = 0.5 * integrate(usq * _frac_power(f.psi, 2.0 * delta - 1.0), grid)
            E_r[i, j] = integrate(gu * f.psi, grid)
            F_r[i, j] = integrate(carrier * (u1 * f.g1 + u2 * f.g2), grid)
        snap.release()
    tc = make_time_cutoff(T, delta)
    eta, eta_pow = _eta_arrays(tc, t, delta)
    return {
        "e": np.array([time_average(t, row * eta_pow, T) for row in e_r]),
        "E": np.array([time_average(t, row * eta, T) for row in E_r]),
        "Phi": np.array([time_average(t, row * eta, T) for row in F_r]),
    }


def shell_quantities(
    traj,
    x0,
    R1: float,
    R2: float,
    R0: float,
    T: float,
    delta: float = DELTA_DEFAULT,
    boundary_mode: str = "cone",
) -> dict:
    """Time-averaged quantities, fluxes and local scales for one shell."""
    tc = make_time_cutoff(T, delta)
    c = make_shell_cutoff(x0, R1, R2, R0, delta, boundary_mode).with_time(tc)
    loc = local_quantities(traj, c)
    t = loc.t
    out = {
        "e": time_average(t, loc.e, T),
        "E": time_average(t, loc.E, T),
        "E_prime": time_average(t, loc.E_prime, T),
        "P": time_average(t, loc.P, T),
        "Phi": time_average(t, flux_energy(traj, c).Phi, T),
        "Psi": time_average(t, flux_enstrophy(traj, c).Psi, T),
        "R_tilde": min(R2, R1 - R2),
    }
    out["tau"] = scales({"e0": out["e"], "E_prime0": out["E_prime"]})["tau0"]
    out["sigma"] = scales({"E0": out["E"], "P0": out["P"]})["sigma0"]
    return out


def scales(avgs: dict) -> dict:
    """Length scales sqrt(energy/enstrophy) and sqrt(enstrophy/palinstrophy).

    Emits whichever of tau0, sigma0, tau_box its inputs allow; a needed
    denominator at or below zero raises ScaleError.
    """

    def ratio(num, den, name):
        if den <= 0.0:
            raise ScaleError(f"{name} undefined: denominator {den:g} <= 0")
        return float(np.sqrt(num / den))

    out = {}
    if "e0" in avgs and "E_prime0" in avgs:
        out["tau0"] = ratio(avgs["e0"], avgs["E_prime0"], "tau0")
    if "E0" in avgs and "P0" in avgs:
        out["sigma0"] = ratio(avgs["E0"], avgs["P0"], "sigma0")
    if "e_box" in avgs and "E_box" in avgs:
        out["tau_box"] = ratio(avgs["e_box"], avgs["E_box"], "tau_box")
    if not out:
        raise ScaleError("no recognizable numerator/denominator pairs")
    return out


# ------------------------------------------------------ balance residual


def balance_residual(traj, c: Cutoff, which: str = "enstrophy") -> float:
    """Relative defect of the weighted space-time balance identity.

    For the energy form: 2 nu (grad u, phi) against the window-derivative
    and transport terms; enstrophy analogously with the vorticity and no
    pressure.  The time window must be present and closed inside the
    trajectory span, otherwise boundary terms are dropped silently.
    """
    if which not in ("energy", "enstrophy"):
        raise ValueError("which must be 'energy' or 'enstrophy'")
    if c.time is None:
        raise ValueError("balance needs a cutoff with a time window")
    grid = traj.grid
    f = c.sample(grid)
    t = traj.times
    if t[-1] < 2.0 * c.time.T * (1.0 - 1e-9):
        raise ValueError("trajectory ends before the time window closes")
    nu = traj.nu
    diss = np.empty(len(t))
    weight = np.empty(len(t))
    lap_term = np.empty(len(t))
    transport = np.empty(len(t))
    for j, snap in enumerate(traj):
        u1, u2 = snap.u
        if which == "energy":
            u1x, u1y = gradient(u1, grid)
            u2x, u2y = gradient(u2, grid)
            gsq = u1x * u1x + u1y * u1y + u2x * u2x + u2y * u2y
            qsq = u1 * u1 + u2 * u2
            carrier = qsq + 2.0 * snap.p
        else:
            w = snap.w
            wx1, wx2 = gradient(w, grid)
            gsq = wx1 * wx1 + wx2 * wx2
            qsq = w * w
            carrier = qsq
        diss[j] = 2.0 * nu * integrate(gsq * f.psi, grid)
        weight[j] = integrate(qsq * f.psi, grid)
        lap_term[j] = integrate(qsq * f.lap, grid)
        transport[j] = integrate(carrier * (u1 * f.g1 + u2 * f.g2), grid)
        snap.release()
    tc = c.time
    eta = tc.eta(t)
    eta_dt = tc.eta_dt(t)
    A = np.trapezoid(diss * eta, t)
    B = np.trapezoid(weight * eta_dt + nu * lap_term * eta, t)
    C = np.trapezoid(transport * eta, t)
    top = max(abs(A), abs(B), abs(C))
    if top == 0.0:
        return 0.0
    return float(abs(A - B - C) / top)
