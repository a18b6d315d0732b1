"""Space-time weight functions with closed-form derivatives.

Every weight is assembled from one smooth ramp S (profiles.ramp_down):
S=1 then a flat-ended transition down to 0.  Spatial factors compose a few
primitives -- radial ramps about a center, a radial gate about the origin,
and an angular wedge -- so the value, gradient and Laplacian come out of
the chain/product rule with no numerical differentiation anywhere.

Families:
  domain bump    psi0  = 1 on B(0,R0), 0 outside B(0,2R0)
  ball           psi   = 1 on B(x0,R) inter B(0,R0), supported in B(x0,2R)
                 inside the analysis disk; near its edge either blended
                 into a cone (psi = psi0 along rays) or simply capped by
                 psi0 ("plain")
  shell          difference of two ball weights, plateau on an annulus
  outer          1 far from x0, 0 on B(x0, R-R0), transition width R0

All constructions are periodic (minimum-image distances); supports are
small enough relative to the box that the wrap never cuts a transition
band.  The steepness constants are never assumed: validate_cutoff measures
sup |grad psi| R / psi^delta and sup |lap psi| R^2 / psi^(2 delta - 1) on
the grid and stamps them on the object.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .profiles import ramp_down, ramp_down_d1, ramp_down_d2
from .spectral import Grid, laplacian

__all__ = [
    "DELTA_DEFAULT",
    "TimeCutoff",
    "Cutoff",
    "CutoffFields",
    "make_time_cutoff",
    "make_ball_cutoff",
    "make_shell_cutoff",
    "make_outer_cutoff",
    "domain_bump",
    "validate_cutoff",
]

DELTA_DEFAULT = 0.75


# ----------------------------------------------------------------- time part


@dataclass
class TimeCutoff:
    """Temporal weight: 0 at t<=0, 1 on [T/4, 5T/4], 0 at t>=2T."""

    T: float
    delta: float

    def eta(self, t):
        t = np.asarray(t, dtype=float)
        rise = ramp_down((self.T / 4.0 - t) / (self.T / 4.0))
        fall = ramp_down((t - 5.0 * self.T / 4.0) / (3.0 * self.T / 4.0))
        return rise * fall

    def eta_dt(self, t):
        t = np.asarray(t, dtype=float)
        a = self.T / 4.0
        b = 3.0 * self.T / 4.0
        rise = ramp_down((a - t) / a)
        fall = ramp_down((t - 5.0 * self.T / 4.0) / b)
        d_rise = ramp_down_d1((a - t) / a) * (-1.0 / a)
        d_fall = ramp_down_d1((t - 5.0 * self.T / 4.0) / b) * (1.0 / b)
        return d_rise * fall + rise * d_fall

    def measured_c0(self, n_samples: int = 100001) -> float:
        """sup |eta'| T / eta^delta over the support, by dense sampling."""
        t = np.linspace(0.0, 2.0 * self.T, n_samples)
        eta = self.eta(t)
        rate = np.abs(self.eta_dt(t))
        live = eta > 0.0
        return float(np.max(rate[live] * self.T / eta[live] ** self.delta, initial=0.0))

    def to_json(self) -> dict:
        return {"T": self.T, "delta": self.delta}


def make_time_cutoff(T: float, delta: float = DELTA_DEFAULT) -> TimeCutoff:
    if T <= 0.0:
        raise ValueError("averaging horizon T must be positive")
    if not 0.5 <= delta < 1.0:
        raise ValueError("delta must lie in [1/2, 1)")
    return TimeCutoff(T=T, delta=delta)


# -------------------------------------------------- spatial field arithmetic


class _Field:
    """(value, gradient, Laplacian) triple closed under + - * composition."""

    __slots__ = ("v", "g1", "g2", "lp")

    def __init__(self, v, g1, g2, lp):
        self.v, self.g1, self.g2, self.lp = v, g1, g2, lp

    @classmethod
    def const(cls, value, shape):
        z = np.zeros(shape)
        return cls(np.full(shape, float(value)), z, z.copy(), z.copy())

    def __add__(self, other):
        return _Field(
            self.v + other.v, self.g1 + other.g1, self.g2 + other.g2, self.lp + other.lp
        )

    def __sub__(self, other):
        return _Field(
            self.v - other.v, self.g1 - other.g1, self.g2 - other.g2, self.lp - other.lp
        )

    def __mul__(self, other):
        dot = self.g1 * other.g1 + self.g2 * other.g2
        return _Field(
            self.v * other.v,
            self.g1 * other.v + self.v * other.g1,
            self.g2 * other.v + self.v * other.g2,
            self.lp * other.v + 2.0 * dot + self.v * other.lp,
        )

    def where_plateau(self, mask, value):
        """Overwrite a region with a constant (used to mask out points whose
        raw formulas are singular but that a vanishing factor multiplies)."""
        v = np.where(mask, value, self.v)
        g1 = np.where(mask, 0.0, self.g1)
        g2 = np.where(mask, 0.0, self.g2)
        lp = np.where(mask, 0.0, self.lp)
        return _Field(v, g1, g2, lp)


def _minimage(delta, length):
    return delta - length * np.round(delta / length)


def _offsets(grid: Grid, x0):
    d1 = _minimage(grid.x1 - x0[0], grid.length)
    d2 = _minimage(grid.x2 - x0[1], grid.length)
    shape = (grid.n, grid.n)
    d1 = np.broadcast_to(d1, shape)
    d2 = np.broadcast_to(d2, shape)
    rho = np.hypot(d1, d2)
    return d1, d2, rho


def _radial_chain(d1, d2, rho, h1, h2):
    """Gradient and Laplacian of h(rho) given dh/drho and d2h/drho2.

    Every radial profile here is constant near its center, so h1 and h2
    vanish wherever rho could be small; the guarded division never sees
    rho = 0 with a live derivative.
    """
    live = (h1 != 0.0) | (h2 != 0.0)
    inv_rho = np.where(live & (rho > 0.0), 1.0 / np.where(rho > 0.0, rho, 1.0), 0.0)
    g1 = h1 * d1 * inv_rho
    g2 = h1 * d2 * inv_rho
    lp = h2 + h1 * inv_rho
    return g1, g2, np.where(live, lp, 0.0)


def _ramp_about(grid: Grid, x0, r_in: float, r_out: float) -> _Field:
    """1 inside rho <= r_in, 0 outside rho >= r_out, smooth between."""
    d1, d2, rho = _offsets(grid, x0)
    w = r_out - r_in
    s = (rho - r_in) / w
    v = ramp_down(s)
    h1 = ramp_down_d1(s) / w
    h2 = ramp_down_d2(s) / w**2
    g1, g2, lp = _radial_chain(d1, d2, rho, h1, h2)
    return _Field(v, g1, g2, lp)


def _gate_about_origin(grid: Grid, r_hi: float, width: float) -> _Field:
    """0 inside rho <= r_hi - width, 1 outside rho >= r_hi."""
    d1, d2, rho = _offsets(grid, (0.0, 0.0))
    s = (r_hi - rho) / width
    v = ramp_down(s)
    h1 = ramp_down_d1(s) * (-1.0 / width)  # d/drho flips the sign
    h2 = ramp_down_d2(s) / width**2
    g1, g2, lp = _radial_chain(d1, d2, rho, h1, h2)
    return _Field(v, g1, g2, lp)


def _wedge_about_direction(grid: Grid, x0, r_plateau, r_edge, R0) -> _Field:
    """Angular weight around the direction of x0: 1 on directions whose
    trace on the circle rho = R0 is within chord r_plateau of x0, 0 once
    that chord exceeds r_edge.  Constant along rays, hence purely angular.
    """
    a = float(np.hypot(*x0))
    if a < 1e-12 * R0:
        unit = (1.0, 0.0)  # direction degenerate; wedge is constant anyway
        a = 0.0
    else:
        unit = (x0[0] / a, x0[1] / a)
    d1, d2, rho = _offsets(grid, (0.0, 0.0))
    safe_rho = np.where(rho > 0.0, rho, 1.0)
    d = (d1 * unit[0] + d2 * unit[1]) / safe_rho

    c0 = R0 * R0 + a * a
    c1 = 2.0 * R0 * a
    chord = np.sqrt(np.maximum(c0 - c1 * d, 0.0))
    band = r_edge - r_plateau
    q = (chord - r_plateau) / band
    s = ramp_down(q)
    s1 = ramp_down_d1(q)
    s2 = ramp_down_d2(q)

    live = (s1 != 0.0) | (s2 != 0.0)
    # On the live band chord >= r_plateau > 0, so these are regular there.
    safe_ch = np.where(chord > 0.0, chord, 1.0)
    dch = np.where(live, -c1 / (2.0 * safe_ch), 0.0)
    d2ch = np.where(live, -(c1 * c1) / (4.0 * safe_ch**3), 0.0)
    G1 = s1 * dch / band
    G2 = s2 * (dch / band) ** 2 + s1 * d2ch / band

    # Chain through d(x): grad d = (unit - d x/rho)/rho, lap d = -d/rho^2.
    inv_rho = np.where(live, 1.0 / safe_rho, 0.0)
    dg1 = (unit[0] - d * d1 * inv_rho) * inv_rho
    dg2 = (unit[1] - d * d2 * inv_rho) * inv_rho
    grad_sq = (dg1 * dg1 + dg2 * dg2) * live
    lap_d = -d * inv_rho * inv_rho
    return _Field(s, G1 * dg1, G1 * dg2, G2 * grad_sq + G1 * lap_d)


# -------------------------------------------------------------- cutoff kinds


class CutoffFields(NamedTuple):
    psi: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    lap: np.ndarray


@dataclass
class Cutoff:
    """Immutable-by-convention spatial weight descriptor.

    Geometry is fixed at construction; sample(grid) materializes the
    fields.  c0_grad / c0_lap start unset and are stamped by
    validate_cutoff (they are measured, grid-dependent quantities).
    """

    kind: str
    x0: tuple
    R0: float
    delta: float
    R: Optional[float] = None
    R1: Optional[float] = None
    R2: Optional[float] = None
    omega: Optional[float] = None
    boundary_mode: Optional[str] = None
    time: Optional[TimeCutoff] = None
    c0_grad: Optional[float] = None
    c0_lap: Optional[float] = None

    @property
    def scale(self) -> float:
        """Length entering the steepness ratios: R for balls,
        min(R2, R1-R2) for shells, R0 for the outer/domain kinds."""
        if self.kind == "ball":
            return self.R
        if self.kind == "shell":
            return min(self.R2, self.R1 - self.R2)
        return self.R0

    @property
    def reaches_edge(self) -> bool:
        """Does the support stick out of the analysis disk B(0,R0)?"""
        a = float(np.hypot(*self.x0))
        if self.kind == "ball":
            return a + 2.0 * self.R > self.R0
        if self.kind == "shell":
            return a + 2.0 * self.R1 > self.R0
        return False

    def with_time(self, tc: TimeCutoff) -> "Cutoff":
        out = Cutoff(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        out.time = tc
        return out

    # -- sampling

    def _check_grid(self, grid: Grid) -> None:
        if self.kind in ("ball", "shell", "domain") and 3.0 * self.R0 > grid.length / 2.0 + 1e-12:
            raise ValueError("analysis disk too large for the box: need 3 R0 <= L/2")
        res = 2.0 * grid.dx
        if self.kind == "ball":
            if self.R < res:
                raise ValueError(f"ball radius {self.R:g} under 2 dx: unresolvable")
            if self.boundary_mode == "cone" and self.reaches_edge and self.R / 2.0 < res:
                raise ValueError("cone gate band under 2 dx: unresolvable")
        if self.kind == "shell":
            if self.R1 - self.R2 <= grid.dx or self.R2 / 2.0 < res:
                raise ValueError("degenerate shell: bands unresolvable on this grid")
        if self.kind == "outer":
            if abs(self.omega - grid.length) > 1e-9 * grid.length:
                raise ValueError("outer cutoff was built for a different box size")

    def _ball_field(self, grid: Grid, r: float) -> _Field:
        inner = _ramp_about(grid, self.x0, r, 2.0 * r)
        if not (float(np.hypot(*self.x0)) + 2.0 * r > self.R0):
            return inner  # support already inside B(0,R0): psi0 cap is a no-op
        psi0 = _ramp_about(grid, (0.0, 0.0), self.R0, 2.0 * self.R0)
        if self.boundary_mode == "plain":
            return psi0 * inner
        w_g = r / 2.0
        gate = _gate_about_origin(grid, self.R0, w_g)
        # Plateau chord R + w_g covers everything the ball projects into the
        # gate zone; edge chord sqrt(4R^2 - w_g^2) keeps the support inside
        # B(x0, 2R) on the analysis disk.  Sound for any gate width <= R/2:
        # in the gate zone |x - x0|^2 <= chord^2 + (R0 - rho)^2.
        wedge = _wedge_about_direction(
            grid, self.x0, r + w_g, float(np.sqrt(4.0 * r * r - w_g * w_g)), self.R0
        )
        _, _, rho = _offsets(grid, (0.0, 0.0))
        wedge = wedge.where_plateau(rho <= self.R0 - w_g, 1.0)
        blend = inner + gate * (wedge - inner)
        return psi0 * blend

    def _assemble(self, grid: Grid) -> _Field:
        if self.kind == "domain":
            return _ramp_about(grid, (0.0, 0.0), self.R0, 2.0 * self.R0)
        if self.kind == "ball":
            return self._ball_field(grid, self.R)
        if self.kind == "shell":
            return self._ball_field(grid, self.R1) - self._ball_field(grid, self.R2 / 2.0)
        if self.kind == "outer":
            d1, d2, rho = _offsets(grid, self.x0)
            s = (self.R - rho) / self.R0
            v = ramp_down(s)
            h1 = ramp_down_d1(s) * (-1.0 / self.R0)
            h2 = ramp_down_d2(s) / self.R0**2
            g1, g2, lp = _radial_chain(d1, d2, rho, h1, h2)
            return _Field(v, g1, g2, lp)
        raise ValueError(f"unknown cutoff kind {self.kind!r}")

    def sample(self, grid: Grid) -> CutoffFields:
        self._check_grid(grid)
        f = self._assemble(grid)
        return CutoffFields(f.v, f.g1, f.g2, f.lp)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "x0": list(self.x0),
            "R0": self.R0,
            "delta": self.delta,
            "boundary_mode": self.boundary_mode,
            "c0_grad": self.c0_grad,
            "c0_lap": self.c0_lap,
        }
        for name in ("R", "R1", "R2", "omega"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        if self.time is not None:
            out["time"] = self.time.to_json()
        return out


# ------------------------------------------------------------- constructors


def _check_delta(delta):
    if not 0.5 <= delta < 1.0:
        raise ValueError("delta must lie in [1/2, 1)")


def make_ball_cutoff(
    x0,
    R: float,
    R0: float,
    delta: float = DELTA_DEFAULT,
    boundary_mode: str = "cone",
) -> Cutoff:
    _check_delta(delta)
    if boundary_mode not in ("cone", "plain"):
        raise ValueError("boundary_mode must be 'cone' or 'plain'")
    if not 0.0 < R <= R0:
        raise ValueError("need 0 < R <= R0")
    if float(np.hypot(*x0)) > R0 + 1e-12:
        raise ValueError("ball center must lie in B(0,R0)")
    return Cutoff(
        kind="ball",
        x0=(float(x0[0]), float(x0[1])),
        R=float(R),
        R0=float(R0),
        delta=float(delta),
        boundary_mode=boundary_mode,
    )


def make_shell_cutoff(
    x0,
    R1: float,
    R2: float,
    R0: float,
    delta: float = DELTA_DEFAULT,
    boundary_mode: str = "cone",
) -> Cutoff:
    _check_delta(delta)
    if boundary_mode not in ("cone", "plain"):
        raise ValueError("boundary_mode must be 'cone' or 'plain'")
    if not 0.0 < R2 < R1 <= R0:
        raise ValueError("need 0 < R2 < R1 <= R0")
    if float(np.hypot(*x0)) > R0 + 1e-12:
        raise ValueError("shell center must lie in B(0,R0)")
    return Cutoff(
        kind="shell",
        x0=(float(x0[0]), float(x0[1])),
        R1=float(R1),
        R2=float(R2),
        R0=float(R0),
        delta=float(delta),
        boundary_mode=boundary_mode,
    )


def make_outer_cutoff(x0, R: float, R0: float, omega: float, delta: float = DELTA_DEFAULT) -> Cutoff:
    """Weight that is 1 away from x0 and dies on B(x0, R-R0); omega is the
    box side of the domain it complements."""
    _check_delta(delta)
    if R <= R0:
        raise ValueError("outer cutoff needs R > R0")
    if not R < omega / 2.0:
        raise ValueError("outer cutoff needs R < half the box side")
    return Cutoff(
        kind="outer",
        x0=(float(x0[0]), float(x0[1])),
        R=float(R),
        R0=float(R0),
        omega=float(omega),
        delta=float(delta),
    )


def domain_bump(R0: float, delta: float = DELTA_DEFAULT) -> Cutoff:
    _check_delta(delta)
    if R0 <= 0.0:
        raise ValueError("R0 must be positive")
    return Cutoff(kind="domain", x0=(0.0, 0.0), R0=float(R0), delta=float(delta))


# --------------------------------------------------------------- validation


def _sup_ratio(num, psi, power, floor=1e-12):
    # Below the floor the flat tail is roundoff-dominated (the profile's
    # derivative underflows to exact zero well before the value does, so
    # the true ratio vanishes there); the genuine supremum sits mid-band.
    live = psi > floor
    if not np.any(live):
        return 0.0
    return float(np.max(num[live] / psi[live] ** power))


def validate_cutoff(c: Cutoff, grid: Grid) -> dict:
    """Structural certification on the grid.

    Checks the exact plateau / zero regions for the kind at hand, the
    pointwise cap psi <= psi0, and smoothness (analytic vs spectral
    Laplacian).  Measures the steepness constants and stamps them on the
    cutoff.  Returns a report dict; structural failures set ok=False
    rather than raising.
    """
    f = c.sample(grid)
    psi, g1, g2, lap = f
    tol = 1e-13
    _, _, rho_o = _offsets(grid, (0.0, 0.0))
    report = {"kind": c.kind, "boundary_mode": c.boundary_mode}

    if c.kind in ("ball", "shell", "domain"):
        psi0 = domain_bump(c.R0, c.delta).sample(grid).psi
    else:
        psi0 = None

    # For supports poking out of the analysis disk the zero requirement
    # only applies inside it; the rest is governed by the cone conditions.
    edge_case = c.reaches_edge
    inside = rho_o <= c.R0

    if c.kind == "ball":
        _, _, rho_c = _offsets(grid, c.x0)
        plateau = (rho_c <= c.R) & inside
        zero = rho_c >= 2.0 * c.R
        if edge_case:
            zero &= inside
    elif c.kind == "shell":
        _, _, rho_c = _offsets(grid, c.x0)
        plateau = (rho_c >= c.R2) & (rho_c <= c.R1) & inside
        zero = (rho_c >= 2.0 * c.R1) | (rho_c <= c.R2 / 2.0)
        if edge_case:
            zero &= inside
    elif c.kind == "domain":
        plateau = inside
        zero = rho_o >= 2.0 * c.R0
    else:  # outer
        _, _, rho_c = _offsets(grid, c.x0)
        plateau = rho_c >= c.R
        zero = rho_c <= c.R - c.R0

    report["plateau_ok"] = bool(np.all(np.abs(psi[plateau] - 1.0) <= tol))
    report["support_ok"] = bool(np.all(np.abs(psi[zero]) <= tol))
    report["nonneg_ok"] = bool(np.all(psi >= -tol))
    if psi0 is not None:
        report["capped_ok"] = bool(np.all(psi <= psi0 + 1e-12))
    else:
        report["capped_ok"] = True

    if c.kind == "ball" and c.boundary_mode == "cone" and c.reaches_edge:
        d1o, d2o, _ = _offsets(grid, (0.0, 0.0))
        a = float(np.hypot(*c.x0))
        unit = (c.x0[0] / a, c.x0[1] / a) if a > 0 else (1.0, 0.0)
        safe = np.where(rho_o > 0, rho_o, 1.0)
        dcos = (d1o * unit[0] + d2o * unit[1]) / safe
        chord = np.sqrt(np.maximum(c.R0**2 + a * a - 2.0 * c.R0 * a * dcos, 0.0))
        between = (rho_o >= c.R0) & (rho_o <= 2.0 * c.R0)
        inner_cone = between & (chord <= c.R)
        outside_cone = between & (chord >= 2.0 * c.R)
        report["cone_match_ok"] = bool(
            np.all(np.abs(psi[inner_cone] - psi0[inner_cone]) <= tol)
        )
        report["cone_zero_ok"] = bool(np.all(np.abs(psi[outside_cone]) <= tol))

    # Steepness constants, dimensionless via the family scale.
    s = c.scale
    gmag = np.hypot(g1, g2)
    c.c0_grad = _sup_ratio(gmag * s, psi, c.delta)
    c.c0_lap = _sup_ratio(np.abs(lap) * s * s, psi, 2.0 * c.delta - 1.0)
    report["c0_grad"] = c.c0_grad
    report["c0_lap"] = c.c0_lap

    lap_spec = laplacian(psi, grid)
    scale = np.max(np.abs(lap_spec))
    report["lap_rel_err"] = float(np.max(np.abs(lap - lap_spec)) / scale) if scale > 0 else 0.0

    report["ok"] = all(
        v for k, v in report.items() if k.endswith("_ok") and isinstance(v, bool)
    )
    return report
