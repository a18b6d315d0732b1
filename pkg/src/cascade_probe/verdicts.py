"""Turn proved flux bounds into checkable verdicts on measured data.

Every check has the same anatomy.  A hypothesis comparing a measured
length scale against a threshold built from the steepness constant C0 and
the covering constants K1, K2; a set of band inequalities the hypothesis
guarantees; and a verdict:

    pass      hypothesis held and every guaranteed band held
    fail      some band that was actually guaranteed (or holds
              unconditionally) was violated beyond the quadrature slack
    vacuous   the hypothesis did not hold, so the bands assert nothing

Vacuous is not a failure: the inequalities are sufficient conditions, and
data is free to miss them.  Reports always carry the measured scales and
margins so a vacuous verdict still says how far away the data was.

Bands are checked with a multiplicative slack EPS_QUADRATURE on each
endpoint, covering time-trapezoid and cutoff-sampling quadrature error.
All constants entering thresholds are measured on the actual cutoffs and
coverings used, never assumed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cutoffs import (
    DELTA_DEFAULT,
    TimeCutoff,
    make_shell_cutoff,
    make_time_cutoff,
    validate_cutoff,
)
from .coverings import make_ball_covering, make_outer_pair, make_shell_covering
from .fluxes import (
    covering_cutoffs,
    covering_series,
    element_time_averages,
    ensemble_average,
    flux_energy,
    global_quantities,
    outer_quantities,
    scales,
    shell_quantities,
    time_average,
    uniform_average,
)

__all__ = [
    "EPS_QUADRATURE",
    "UNIFORM_K1",
    "UNIFORM_K2",
    "GuardViolation",
    "TheoremConstants",
    "BoundCheck",
    "CascadeReport",
    "time_cutoff_constant",
    "check_enstrophy_cascade",
    "check_forward_energy_cascade",
    "check_inverse_cascade",
    "check_shell_locality",
    "check_ensemble_shell_cascade_and_ratios",
    "suite_exit_code",
]

EPS_QUADRATURE = 0.02

# Center-sampled uniform averages replace the covering constants with the
# fixed pair below; the covering multiplicity argument is not involved.
UNIFORM_K1 = 4.0
UNIFORM_K2 = 16.0


class GuardViolation(ValueError):
    """gamma is too large for the outer-region constants to be positive."""


@dataclass(frozen=True)
class TheoremConstants:
    """Constants entering thresholds and bands, derived from (K1,K2,C0,gamma).

    cbar_0 and cbar_1 exist only below the outer guard gamma < 1/sqrt(2 C0);
    above it the lower outer constant would be nonpositive and the outer
    band means nothing.
    """

    K1: float
    K2: float
    C0: float
    gamma: float
    c: float
    c_0: float
    c_1: float
    cbar_0: Optional[float]
    cbar_1: Optional[float]

    @classmethod
    def from_measured(
        cls, K1: float, K2: float, C0: float, gamma: float
    ) -> "TheoremConstants":
        if not 0.0 < gamma < 1.0:
            raise ValueError(f"gamma must be in (0,1), got {gamma:g}")
        if C0 <= 0.0 or K1 < 1.0 or K2 < 1.0:
            raise ValueError(f"bad constants: C0={C0:g}, K1={K1:g}, K2={K2:g}")
        c = 1.0 / np.sqrt(C0 * K1 * K2)
        c_0 = (1.0 - gamma**2) / K1
        c_1 = K2 * (1.0 + gamma**2 / (K1 * K2))
        if not 0.0 < c_0 < c_1:
            raise ValueError(f"degenerate band constants: {c_0:g}, {c_1:g}")
        if gamma < 1.0 / np.sqrt(2.0 * C0):
            cbar_0: Optional[float] = 0.5 * (1.0 - 2.0 * C0 * gamma**2)
            cbar_1: Optional[float] = 1.0 + C0 * gamma**2
        else:
            cbar_0 = cbar_1 = None
        return cls(
            K1=float(K1), K2=float(K2), C0=float(C0), gamma=float(gamma),
            c=float(c), c_0=float(c_0), c_1=float(c_1),
            cbar_0=cbar_0, cbar_1=cbar_1,
        )

    def outer(self) -> tuple:
        if self.cbar_0 is None:
            raise GuardViolation(
                f"gamma={self.gamma:g} >= 1/sqrt(2 C0)={1.0 / np.sqrt(2.0 * self.C0):g}: "
                "outer band constants undefined"
            )
        return self.cbar_0, self.cbar_1

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class BoundCheck:
    """One band inequality at one scale.

    ok is None when the row was not evaluated: either its hypothesis
    failed, the scale fell outside the guaranteed range, or the geometry
    was not constructible; the note says which.
    """

    name: str
    scale: float
    value: float
    lower: float
    upper: float
    condition: Optional[str]
    applicable: bool
    ok: Optional[bool]
    note: str = ""

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class CascadeReport:
    theorem: str
    constants: TheoremConstants
    conditions: dict
    checks: list
    verdict: str
    boundary_mode: str
    measured: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "constants": self.constants.to_json(),
            "conditions": self.conditions,
            "checks": [c.to_json() for c in self.checks],
            "verdict": self.verdict,
            "boundary_mode": self.boundary_mode,
            "measured": self.measured,
            "notes": list(self.notes),
        }


def _settle(conditions: dict, checks: Sequence[BoundCheck]) -> str:
    evaluated = [c for c in checks if c.applicable and c.ok is not None]
    if any(c.ok is False for c in evaluated):
        return "fail"
    if any(c.condition is not None for c in evaluated):
        return "pass"
    return "vacuous"


def _band_ok(value: float, lo: float, hi: float, eps: float = EPS_QUADRATURE) -> bool:
    lo_eff = lo * (1.0 - eps) if lo >= 0.0 else lo * (1.0 + eps)
    hi_eff = hi * (1.0 + eps) if hi >= 0.0 else hi * (1.0 - eps)
    return bool(lo_eff <= value <= hi_eff)


def _condition(lhs: float, rhs: float, description: str, strict: bool = True) -> dict:
    holds = lhs < rhs if strict else lhs <= rhs
    return {
        "description": description,
        "lhs": float(lhs),
        "rhs": float(rhs),
        "holds": bool(holds),
        "margin": float(lhs / rhs) if rhs > 0 else float("inf"),
    }


def _window(traj, R0: float, T: Optional[float]) -> float:
    floor = R0 * R0 / traj.nu
    if T is None:
        T = floor
    if T < floor * (1.0 - 1e-9):
        raise ValueError(
            f"averaging window T={T:g} under R0^2/nu={floor:g}: "
            "the window-derivative estimates need the longer window"
        )
    if traj.times[-1] < 2.0 * T * (1.0 - 1e-9):
        raise ValueError(
            f"trajectory ends at t={traj.times[-1]:g} before the window closes at {2 * T:g}"
        )
    return float(T)


def time_cutoff_constant(tc: TimeCutoff) -> float:
    """Measured steepness sup T |eta'| / eta^delta of the window."""
    t = np.linspace(0.0, 2.0 * tc.T, 8192)
    eta = tc.eta(t)
    d = np.abs(tc.eta_dt(t))
    live = eta > 1e-12
    return float(np.max(d[live] * eta[live] ** (-tc.delta)) * tc.T)


def _measured_c0(cutoff_families, grid, tc: TimeCutoff) -> tuple:
    """Steepness budget (total, time part, spatial part).

    The band derivations bound a window-derivative term and a Laplacian
    term and then fold both into a single C0; a bare max over the
    measured constants would undercount that sum by up to a factor two,
    so the total here is time constant plus the worst spatial constant.
    Thresholds built from it only get more conservative.
    """
    c0_time = time_cutoff_constant(tc)
    c0_space = 0.0
    for family in cutoff_families:
        for c in family:
            rep = validate_cutoff(c, grid)
            if not rep["ok"]:
                bad = [k for k, v in rep.items() if k.endswith("_ok") and not v]
                raise ValueError(f"cutoff failed validation ({c.kind}): {bad}")
            c0_space = max(c0_space, c.c0_grad, c.c0_lap)
    return c0_time + c0_space, c0_time, c0_space


# ------------------------------------------------- ball-covering cascades


def _ball_cascade(
    traj, R0, gamma, R_list, boundary_mode, delta, T, average,
    *, flux_name, scale_name, theorem,
):
    """Shared engine for the enstrophy and forward-energy checks.

    flux_name is "Psi" (checked against nu P0) or "Phi" (against nu E'0);
    scale_name picks the measured scale forming the hypothesis.
    """
    if average not in ("ensemble", "uniform"):
        raise ValueError(f"unknown averaging mode {average!r}")
    T = _window(traj, R0, T)
    grid = traj.grid
    nu = traj.nu
    tc = make_time_cutoff(T, delta)
    covs = [make_ball_covering(R0, R) for R in R_list]
    families = [covering_cutoffs(cov, delta, boundary_mode) for cov in covs]
    C0, c0_time, c0_space = _measured_c0(families, grid, tc)
    if average == "uniform":
        K1, K2 = UNIFORM_K1, UNIFORM_K2
    else:
        K1 = max(cov.K1 for cov in covs)
        K2 = max(cov.K2 for cov in covs)
    tk = TheoremConstants.from_measured(K1, K2, C0, gamma)

    g = global_quantities(traj, R0, T, delta)
    sc = scales(g)
    length = sc[scale_name]
    threshold = tk.c * gamma * R0
    conditions = {
        scale_name: _condition(length, threshold, f"{scale_name} < c gamma R0")
    }
    holds = conditions[scale_name]["holds"]
    R_min = length / (tk.c * gamma)

    if flux_name == "Psi":
        upper_ref = g["P0"]
        lower_ref = g["P_prime"] if boundary_mode == "plain" else g["P0"]
    else:
        upper_ref = g["E_prime0"]
        lower_ref = g["E_prime0"]

    checks = []
    for cov, family, R in zip(covs, families, R_list):
        if average == "uniform":
            flux = uniform_average(
                traj, R, R0, T, delta, (flux_name,), boundary_mode
            )[flux_name]
        else:
            series = covering_series(traj, family, T, (flux_name,))
            flux = ensemble_average(
                element_time_averages(series, T)[flux_name], cov
            )
        row = BoundCheck(
            name=f"{flux_name} band",
            scale=float(R),
            value=float(flux),
            lower=float(tk.c_0 * nu * lower_ref),
            upper=float(tk.c_1 * nu * upper_ref),
            condition=scale_name,
            applicable=holds,
            ok=None,
        )
        in_range = R >= R_min * (1.0 - 1e-12) and R <= R0 * (1.0 + 1e-12)
        if not in_range:
            row.note = "outside the guaranteed scale range"
        elif holds:
            row.ok = _band_ok(row.value, row.lower, row.upper)
        checks.append(row)

    measured = {
        scale_name: length,
        "threshold": threshold,
        "range_min": R_min,
        "P0": g["P0"],
        "P_prime": g["P_prime"],
        "E_prime0": g["E_prime0"],
        "C0_time": c0_time,
        "C0_spatial": c0_space,
        "T": T,
        "average": average,
    }
    notes = []
    if boundary_mode == "plain" and flux_name == "Psi":
        notes.append("plain mode: lower bound referenced to the sharp-disk palinstrophy")
    return CascadeReport(
        theorem=theorem,
        constants=tk,
        conditions=conditions,
        checks=checks,
        verdict=_settle(conditions, checks),
        boundary_mode=boundary_mode,
        measured=measured,
        notes=notes,
    )


def check_enstrophy_cascade(
    traj, R0: float, gamma: float, R_list: Sequence[float],
    boundary_mode: str = "cone", *,
    delta: float = DELTA_DEFAULT, T: Optional[float] = None,
    average: str = "ensemble",
) -> CascadeReport:
    """Enstrophy flux through ball coverings against nu P0 bands."""
    return _ball_cascade(
        traj, R0, gamma, R_list, boundary_mode, delta, T, average,
        flux_name="Psi", scale_name="sigma0", theorem="enstrophy-cascade",
    )


def check_forward_energy_cascade(
    traj, R0: float, gamma: float, R_list: Sequence[float],
    boundary_mode: str = "cone", *,
    delta: float = DELTA_DEFAULT, T: Optional[float] = None,
    average: str = "ensemble",
) -> CascadeReport:
    """Energy flux through ball coverings against nu E'0 bands."""
    return _ball_cascade(
        traj, R0, gamma, R_list, boundary_mode, delta, T, average,
        flux_name="Phi", scale_name="tau0", theorem="forward-energy-cascade",
    )


# ------------------------------------------------------ outer-region check


def check_inverse_cascade(
    traj, D_domain: float, R0: float, gamma: float, R_list: Sequence[float],
    *, delta: float = DELTA_DEFAULT, T: Optional[float] = None,
) -> CascadeReport:
    """Outward energy flux through outer-region pairs against nu E bands.

    Scales must sit in (R0, D/2).  The pre-band rows hold without any
    hypothesis; the band with the cbar constants needs tau <= gamma R0,
    and gamma itself must clear the outer guard or the configuration is
    rejected outright.
    """
    T = _window(traj, R0, T)
    grid = traj.grid
    nu = traj.nu
    tc = make_time_cutoff(T, delta)

    usable = [R for R in R_list if R0 < R < D_domain / 2.0]
    covs = [make_outer_pair(D_domain, R, R0) for R in usable]
    families = [covering_cutoffs(cov, delta) for cov in covs]
    C0, c0_time, c0_space = _measured_c0(families, grid, tc)
    if not gamma < 1.0 / np.sqrt(2.0 * C0):
        raise GuardViolation(
            f"gamma={gamma:g} >= 1/sqrt(2 C0)={1.0 / np.sqrt(2.0 * C0):g} "
            f"with measured C0={C0:g}: configuration rejected"
        )
    K1 = max((cov.K1 for cov in covs), default=1.0)
    K2 = max((cov.K2 for cov in covs), default=2.0)
    tk = TheoremConstants.from_measured(K1, K2, C0, gamma)
    cbar_0, cbar_1 = tk.outer()

    g = global_quantities(traj, R0, T, delta)
    sc = scales(g)
    tau = sc["tau_box"]
    E = g["E_box"]
    conditions = {"tau": _condition(tau, gamma * R0, "tau <= gamma R0", strict=False)}
    holds = conditions["tau"]["holds"]

    # The pre-band error term carries the steeper window weight, which
    # upweights the ramps relative to the plain-eta energy in tau.
    steep = C0 * g["e_box_pow"] / (E * R0**2)
    checks = []
    for R in R_list:
        if not R0 < R < D_domain / 2.0:
            checks.append(BoundCheck(
                name="Phi pre-band", scale=float(R), value=float("nan"),
                lower=float("nan"), upper=float("nan"), condition=None,
                applicable=True, ok=None,
                note="scale outside (R0, D/2): no outer region",
            ))
            continue
        cov = covs[usable.index(R)]
        out = outer_quantities(traj, cov, T, delta)
        phi_bar = float(np.mean(out["Phi"]))
        pre = BoundCheck(
            name="Phi pre-band",
            scale=float(R),
            value=phi_bar,
            lower=float(0.5 * nu * E * (1.0 - 2.0 * steep)),
            upper=float(nu * E * (1.0 + steep)),
            condition=None,
            applicable=True,
            ok=None,
        )
        pre.ok = _band_ok(pre.value, pre.lower, pre.upper)
        band = BoundCheck(
            name="Phi band",
            scale=float(R),
            value=phi_bar,
            lower=float(cbar_0 * nu * E),
            upper=float(cbar_1 * nu * E),
            condition="tau",
            applicable=holds,
            ok=None,
        )
        if holds:
            band.ok = _band_ok(band.value, band.lower, band.upper)
        checks.extend([pre, band])

    return CascadeReport(
        theorem="inverse-energy-cascade",
        constants=tk,
        conditions=conditions,
        checks=checks,
        verdict=_settle(conditions, checks),
        boundary_mode="outer",
        measured={"tau": tau, "E": E, "T": T, "steepness": steep,
                  "C0_time": c0_time, "C0_spatial": c0_space},
        notes=["upper constant is 1 + C0 gamma^2; lower is (1 - 2 C0 gamma^2)/2"],
    )


# ------------------------------------------------------- shell localities


def check_shell_locality(
    traj, shells: Sequence, gamma: float, *, R0: float,
    T: Optional[float] = None, delta: float = DELTA_DEFAULT,
    boundary_mode: str = "cone",
) -> CascadeReport:
    """Per-shell flux against nu P with symmetric (1 -+ gamma^2) factors.

    shells is a list of (x0, R1, R2).  Each shell gets an unconditional
    two-sided estimate using its measured sigma and a conditional band
    when sigma < gamma Rtilde / sqrt(C0).
    """
    T = _window(traj, R0, T)
    grid = traj.grid
    nu = traj.nu
    tc = make_time_cutoff(T, delta)
    cutoffs = [
        make_shell_cutoff(x0, R1, R2, R0, delta, boundary_mode)
        for (x0, R1, R2) in shells
    ]
    if not cutoffs:
        raise ValueError("no shells given")
    C0, c0_time, c0_space = _measured_c0([cutoffs], grid, tc)
    tk = TheoremConstants.from_measured(1.0, 1.0, C0, gamma)

    conditions = {}
    checks = []
    measured = {"T": T, "C0_time": c0_time, "C0_spatial": c0_space, "shells": []}
    for i, (x0, R1, R2) in enumerate(shells):
        sq = shell_quantities(traj, x0, R1, R2, R0, T, delta, boundary_mode)
        sigma, P, Psi, Rt = sq["sigma"], sq["P"], sq["Psi"], sq["R_tilde"]
        cname = f"sigma_shell_{i}"
        conditions[cname] = _condition(
            sigma, gamma * Rt / np.sqrt(C0), "sigma < gamma Rtilde / sqrt(C0)"
        )
        holds = conditions[cname]["holds"]
        wobble = C0 * sigma**2 / Rt**2
        pre = BoundCheck(
            name=f"shell {i} two-sided estimate",
            scale=float(Rt),
            value=float(Psi),
            lower=float(nu * P * (1.0 - wobble)),
            upper=float(nu * P * (1.0 + wobble)),
            condition=None,
            applicable=True,
            ok=None,
        )
        pre.ok = _band_ok(pre.value, pre.lower, pre.upper)
        band = BoundCheck(
            name=f"shell {i} band",
            scale=float(Rt),
            value=float(Psi),
            lower=float((1.0 - gamma**2) * nu * P),
            upper=float((1.0 + gamma**2) * nu * P),
            condition=cname,
            applicable=holds,
            ok=None,
        )
        if holds:
            band.ok = _band_ok(band.value, band.lower, band.upper)
        checks.extend([pre, band])
        measured["shells"].append(
            {"x0": list(x0), "R1": R1, "R2": R2, "R_tilde": Rt,
             "sigma": sigma, "P": P, "Psi": Psi}
        )

    return CascadeReport(
        theorem="shell-flux-locality",
        constants=tk,
        conditions=conditions,
        checks=checks,
        verdict=_settle(conditions, checks),
        boundary_mode=boundary_mode,
        measured=measured,
        notes=["covering constants are not involved; K1 = K2 = 1 recorded pro forma"],
    )


def check_ensemble_shell_cascade_and_ratios(
    traj, R0: float, gamma: float, R_list: Sequence[float],
    k_list: Sequence[int], *, delta: float = DELTA_DEFAULT,
    T: Optional[float] = None, boundary_mode: str = "cone",
    gamma_outer: Optional[float] = None, base_R: Optional[float] = None,
) -> CascadeReport:
    """Shell-covering flux bands, dyadic locality ratios, and the
    large-scale outward analogue.

    Scales at or below R0/2 get the forward shell bands (enstrophy
    against nu Ptilde0, energy against nu Etilde'0).  Dyadic ratio rows
    compare the shell flux at 2^k base_R with the ball flux at base_R.
    Scales in (R0, D/2) get the outward energy band with the cbar
    constants, evaluated with an uncapped shell since no analysis-disk
    cap applies at those scales; gamma_outer (default gamma) must clear
    the outer guard for those rows to be evaluated.
    """
    T = _window(traj, R0, T)
    grid = traj.grid
    nu = traj.nu
    L = grid.length
    tc = make_time_cutoff(T, delta)
    res = 2.0 * grid.dx

    fwd = [R for R in R_list if R <= R0 / 2.0 + 1e-12 and R / 2.0 >= res]
    inv = [R for R in R_list if R0 < R < L / 2.0]
    base = float(base_R if base_R is not None else (max(fwd) if fwd else R0 / 2.0))

    shell_covs = {R: make_shell_covering(R0, R) for R in fwd}
    ball_cov = make_ball_covering(R0, base)
    shell_fams = {
        R: covering_cutoffs(cov, delta, boundary_mode)
        for R, cov in shell_covs.items()
    }
    ball_fam = covering_cutoffs(ball_cov, delta, boundary_mode)

    # Large scales carry no analysis-disk cap: build each shell with a
    # cap radius past its own support so the cap multiplies by one.
    outer_shells = {}
    for R in inv:
        cap = 2.0 * (2.0 * R) * 1.02
        if 3.0 * cap <= L / 2.0 and R / 2.0 >= res:
            outer_shells[R] = make_shell_cutoff((0.0, 0.0), 2.0 * R, R, cap, delta)

    families = list(shell_fams.values()) + [ball_fam] + [
        [c] for c in outer_shells.values()
    ]
    C0, c0_time, c0_space = _measured_c0(families, grid, tc)
    K1 = max((cov.K1 for cov in shell_covs.values()), default=1.0)
    K2 = max((cov.K2 for cov in shell_covs.values()), default=1.0)
    tk = TheoremConstants.from_measured(K1, K2, C0, gamma)
    g_outer = float(gamma_outer) if gamma_outer is not None else float(gamma)
    guard_ok = g_outer < 1.0 / np.sqrt(2.0 * C0)

    g = global_quantities(traj, R0, T, delta)
    sc = scales(g)
    sigma0, tau0, tau_box = sc["sigma0"], sc["tau0"], sc["tau_box"]
    tilde_P0 = g["tilde_P0"]
    tilde_P_prime = R0 * R0 * g["P_prime"]
    tilde_E_prime0 = R0 * R0 * g["E_prime0"]
    E_box = g["E_box"]

    threshold = tk.c * gamma * R0
    conditions = {
        "sigma0": _condition(sigma0, threshold, "sigma0 < c gamma R0"),
        "tau0": _condition(tau0, threshold, "tau0 < c gamma R0"),
        "tau_box": _condition(tau_box, g_outer * R0, "tau <= gamma R0", strict=False),
    }
    s_holds = conditions["sigma0"]["holds"]
    t_holds = conditions["tau0"]["holds"]
    R_min_s = sigma0 / (tk.c * gamma)
    R_min_t = tau0 / (tk.c * gamma)

    plain = boundary_mode == "plain"
    lower_P = tilde_P_prime if plain else tilde_P0
    ratio_lo_fac = (tilde_P_prime / tilde_P0) if plain else 1.0
    ratio_hi_fac = (tilde_P0 / tilde_P_prime) if plain else 1.0

    checks = []
    shell_flux = {}
    shell_energy_flux = {}
    for R in fwd:
        series = covering_series(traj, shell_fams[R], T, ("Psi", "Phi"))
        tavg = element_time_averages(series, T)
        shell_flux[R] = float(np.mean(tavg["Psi"]))
        shell_energy_flux[R] = float(np.mean(tavg["Phi"]))
        area = (R / R0) ** 2
        in_s = R_min_s * (1.0 - 1e-12) <= R
        row = BoundCheck(
            name="shell Psi band", scale=float(R), value=shell_flux[R],
            lower=float(tk.c_0 * area * nu * lower_P),
            upper=float(tk.c_1 * area * nu * tilde_P0),
            condition="sigma0", applicable=s_holds, ok=None,
        )
        row2 = BoundCheck(
            name="shell Psi band, per area", scale=float(R),
            value=shell_flux[R] / R**2,
            lower=float(tk.c_0 * nu * (lower_P / R0**2)),
            upper=float(tk.c_1 * nu * g["P0"]),
            condition="sigma0", applicable=s_holds, ok=None,
        )
        for r in (row, row2):
            if not in_s:
                r.note = "outside the guaranteed scale range"
            elif s_holds:
                r.ok = _band_ok(r.value, r.lower, r.upper)
        erow = BoundCheck(
            name="shell Phi band", scale=float(R), value=shell_energy_flux[R],
            lower=float(tk.c_0 * area * nu * tilde_E_prime0),
            upper=float(tk.c_1 * area * nu * tilde_E_prime0),
            condition="tau0", applicable=t_holds, ok=None,
        )
        if not (R_min_t * (1.0 - 1e-12) <= R):
            erow.note = "outside the guaranteed scale range"
        elif t_holds:
            erow.ok = _band_ok(erow.value, erow.lower, erow.upper)
        checks.extend([row, row2, erow])

    series = covering_series(traj, ball_fam, T, ("Psi",))
    ball_tilde = base**2 * ensemble_average(
        element_time_averages(series, T)["Psi"], ball_cov
    )
    for k in k_list:
        Rk = float(2.0**k * base)
        name = f"dyadic ratio k={k}"
        if Rk not in shell_flux:
            feasible = Rk <= R0 / 2.0 + 1e-12 and Rk / 2.0 >= res
            if feasible:
                cov_k = make_shell_covering(R0, Rk)
                fam_k = covering_cutoffs(cov_k, delta, boundary_mode)
                sk = covering_series(traj, fam_k, T, ("Psi",))
                shell_flux[Rk] = float(
                    np.mean(element_time_averages(sk, T)["Psi"])
                )
            else:
                checks.append(BoundCheck(
                    name=name, scale=Rk, value=float("nan"),
                    lower=float("nan"), upper=float("nan"),
                    condition="sigma0", applicable=s_holds, ok=None,
                    note="shell thickness unresolvable or above R0/2",
                ))
                continue
        ratio = shell_flux[Rk] / ball_tilde if ball_tilde != 0.0 else float("inf")
        lo = (tk.c_0 / tk.c_1) * 4.0**k * ratio_lo_fac
        hi = (tk.c_1 / tk.c_0) * 4.0**k * ratio_hi_fac
        in_s = R_min_s * (1.0 - 1e-12) <= min(Rk, base)
        row = BoundCheck(
            name=name, scale=Rk, value=float(ratio),
            lower=float(lo), upper=float(hi),
            condition="sigma0", applicable=s_holds, ok=None,
        )
        norm = BoundCheck(
            name=f"normalized ratio k={k}", scale=Rk,
            value=float(ratio / 4.0**k),
            lower=float((tk.c_0 / tk.c_1) * ratio_lo_fac),
            upper=float((tk.c_1 / tk.c_0) * ratio_hi_fac),
            condition="sigma0", applicable=s_holds, ok=None,
        )
        for r in (row, norm):
            if not in_s:
                r.note = "outside the guaranteed scale range"
            elif s_holds:
                r.ok = _band_ok(r.value, r.lower, r.upper)
        checks.extend([row, norm])

    for R in inv:
        name = "outward shell Phi band"
        if R not in outer_shells:
            checks.append(BoundCheck(
                name=name, scale=float(R), value=float("nan"),
                lower=float("nan"), upper=float("nan"),
                condition="tau_box", applicable=False, ok=None,
                note="uncapped shell does not fit the box at this scale",
            ))
            continue
        c = outer_shells[R].with_time(tc)
        flux = flux_energy(traj, c)
        phi_t = time_average(flux.t, flux.Phi, T)
        area = (R / R0) ** 2
        if not guard_ok:
            checks.append(BoundCheck(
                name=name, scale=float(R), value=float(phi_t),
                lower=float("nan"), upper=float("nan"),
                condition="tau_box", applicable=False, ok=None,
                note="gamma_outer fails the outer guard; band undefined",
            ))
            continue
        cbar_0 = 0.5 * (1.0 - 2.0 * C0 * g_outer**2)
        cbar_1 = 1.0 + C0 * g_outer**2
        row = BoundCheck(
            name=name, scale=float(R), value=float(phi_t),
            lower=float(cbar_0 * area * nu * E_box),
            upper=float(cbar_1 * area * nu * E_box),
            condition="tau_box",
            applicable=conditions["tau_box"]["holds"],
            ok=None,
        )
        if row.applicable:
            row.ok = _band_ok(row.value, row.lower, row.upper)
        checks.append(row)

    measured = {
        "sigma0": sigma0, "tau0": tau0, "tau": tau_box,
        "threshold": threshold, "range_min": R_min_s,
        "tilde_P0": tilde_P0, "tilde_P_prime": tilde_P_prime,
        "tilde_E_prime0": tilde_E_prime0, "E_box": E_box,
        "base_R": base, "ball_flux_tilde": ball_tilde, "T": T,
        "gamma_outer": g_outer, "C0_time": c0_time, "C0_spatial": c0_space,
    }
    notes = []
    if plain:
        notes.append(
            "plain mode: lower references and ratio bands scaled by the "
            "sharp-disk to weighted palinstrophy ratio"
        )
    return CascadeReport(
        theorem="shell-ensemble-cascade-and-ratios",
        constants=tk,
        conditions=conditions,
        checks=checks,
        verdict=_settle(conditions, checks),
        boundary_mode=boundary_mode,
        measured=measured,
        notes=notes,
    )


def suite_exit_code(reports: Sequence[CascadeReport]) -> int:
    """1 on any failure; 2 when every verdict is vacuous; else 0."""
    verdicts = [r.verdict for r in reports]
    if any(v == "fail" for v in verdicts):
        return 1
    if verdicts and all(v == "vacuous" for v in verdicts):
        return 2
    return 0
