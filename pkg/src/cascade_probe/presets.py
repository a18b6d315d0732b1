"""Named run configurations and the config type behind the CLI.

A RunConfig bundles the solver parameters, the initial-condition recipe,
and the analysis geometry (window radius R0, cutoff steepness delta,
hypothesis parameters gamma, probe scales) into one flat record that
round-trips through JSON.  The shipped presets are pinned by seed so a
rerun reproduces the same trajectory byte for byte.

The seeded presets were tuned by hand: steepness delta = 0.55 keeps the
measured window constant C0 low, and the probe radii are the largest
that both the covering geometry and the grid resolution admit.  Even
so, the smallness conditions on the measured scales do not come within
an order of magnitude of their thresholds on this kind of decaying
data; the verdict reports carry the margins, and the preset notes say
what to expect.
"""

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Mapping, Optional

from .cutoffs import DELTA_DEFAULT
from .solver import (
    SimConfig,
    Trajectory,
    run,
    synthesize_initial_vorticity,
    taylor_green_snapshot,
)
from .spectral import Grid

TWO_PI = 2.0 * math.pi


def _as_shell(entry) -> tuple:
    (x0, y0), r1, r2 = entry
    return ((float(x0), float(y0)), float(r1), float(r2))


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run needs, in JSON-friendly form.

    Analysis fields are optional; a config with R0 = None is
    simulate-only and any attempt to analyze it is refused.
    """

    n: int
    nu: float
    dt: float
    t_end: float
    length: float = TWO_PI
    stride: int = 1
    init: Mapping[str, Any] = field(
        default_factory=lambda: {"kind": "taylor-green"}
    )
    seed: int = 0
    R0: Optional[float] = None
    delta: float = DELTA_DEFAULT
    gamma_direct: float = 0.5
    gamma_inverse: float = 0.1
    R_list: tuple = ()
    shells: tuple = ()
    k_list: tuple = ()
    base_R: Optional[float] = None
    boundary_mode: str = "cone"
    T: Optional[float] = None
    outdir: Optional[str] = None

    @property
    def window(self) -> float:
        """Averaging horizon; defaults to the dissipative time R0^2/nu."""
        if self.T is not None:
            return self.T
        if self.R0 is None:
            raise ValueError("no R0, so no default window")
        return self.R0 * self.R0 / self.nu

    def sim_config(self) -> SimConfig:
        return SimConfig(
            n=self.n,
            nu=self.nu,
            dt=self.dt,
            t_end=self.t_end,
            length=self.length,
            stride=self.stride,
        )

    def sim_key(self) -> tuple:
        """Hashable identity of the trajectory this config produces."""
        return (
            self.n, self.nu, self.dt, self.t_end, self.length, self.stride,
            tuple(sorted(self.init.items())), self.seed,
        )

    def validate(self, analysis: bool = False) -> None:
        if self.n < 8:
            raise ValueError(f"grid size {self.n} is too small")
        if self.dt <= 0.0 or self.t_end <= 0.0:
            raise ValueError("dt and t_end must be positive")
        if self.stride < 1:
            raise ValueError("stride must be at least 1")
        kind = self.init.get("kind")
        if kind not in ("taylor-green", "random"):
            raise ValueError(f"unknown initial condition kind: {kind!r}")
        if not analysis:
            return
        if self.R0 is None:
            raise ValueError("analysis requested but the config has no R0")
        if not 0.5 <= self.delta < 1.0:
            raise ValueError(f"delta={self.delta} outside [1/2, 1)")
        for name in ("gamma_direct", "gamma_inverse"):
            g = getattr(self, name)
            if not 0.0 < g < 1.0:
                raise ValueError(f"{name}={g} outside (0, 1)")
        if self.boundary_mode not in ("cone", "plain"):
            raise ValueError(f"unknown boundary mode {self.boundary_mode!r}")
        if 3.0 * self.R0 > self.length / 2.0 + 1e-12:
            raise ValueError(
                f"R0={self.R0} too large: need 3*R0 <= L/2 = {self.length / 2.0:.6g}"
            )
        T = self.window
        if T < self.R0 * self.R0 / self.nu * (1.0 - 1e-9):
            raise ValueError(
                f"window T={T:.6g} is shorter than R0^2/nu="
                f"{self.R0 * self.R0 / self.nu:.6g}"
            )
        if self.t_end < 2.0 * T * (1.0 - 1e-9):
            raise ValueError(
                f"trajectory ends at t_end={self.t_end:.6g}, before the "
                f"averaging window closes at 2T={2.0 * T:.6g}"
            )
        for R in self.R_list:
            if R <= 0.0:
                raise ValueError(f"probe radius {R} must be positive")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        kw = dict(data)
        if "init" in kw:
            kw["init"] = dict(kw["init"])
        for name in ("R_list", "k_list"):
            if name in kw:
                kw[name] = tuple(kw[name])
        if "shells" in kw:
            kw["shells"] = tuple(_as_shell(s) for s in kw["shells"])
        return cls(**kw)

    def to_json(self) -> dict:
        return asdict(self)


# Seeded configurations.  `direct` favors a band that stays alive into
# the window plateau (smallest sigma margins); `inverse` favors a finer
# band, which keeps the plain-window Taylor scale low.
PRESETS = {
    "taylor-green": RunConfig(
        n=64,
        nu=0.01,
        dt=1e-3,
        t_end=1.0,
        stride=50,
        init={"kind": "taylor-green"},
    ),
    "taylor-green-analysis": RunConfig(
        n=128,
        nu=0.5,
        dt=2e-3,
        t_end=2.0,
        stride=10,
        init={"kind": "taylor-green"},
        R0=0.7,
        T=0.98,
        gamma_inverse=0.05,
        R_list=(0.7, 0.35, 1.4),
        shells=(((0.0, 0.0), 0.5, 0.25),),
        k_list=(0,),
    ),
    "direct": RunConfig(
        n=128,
        nu=0.1,
        dt=5e-3,
        t_end=5.0,
        stride=10,
        init={"kind": "random", "k_star": 6.0, "bandwidth": 2.0,
              "amplitude": 3.0},
        seed=7,
        R0=0.5,
        delta=0.55,
        T=2.5,
        R_list=(0.5, 0.25),
    ),
    "inverse": RunConfig(
        n=128,
        nu=0.05,
        dt=5e-3,
        t_end=10.0,
        stride=20,
        init={"kind": "random", "k_star": 10.0, "bandwidth": 3.0,
              "amplitude": 3.0},
        seed=7,
        R0=0.5,
        delta=0.55,
        T=5.0,
        gamma_inverse=0.1,
        R_list=(1.2, 2.0),
    ),
    "locality": RunConfig(
        n=256,
        nu=0.1,
        dt=5e-3,
        t_end=20.0,
        stride=40,
        init={"kind": "random", "k_star": 6.0, "bandwidth": 2.0,
              "amplitude": 4.0},
        seed=23,
        R0=1.0,
        delta=0.55,
        T=10.0,
        R_list=(0.5, 0.25),
        base_R=0.5,
        k_list=(-1, 0),
        shells=(
            ((0.0, 0.0), 1.0, 0.5),
            ((0.8, -0.6), 0.9, 0.45),
            ((-0.5, 0.7), 0.8, 0.4),
        ),
    ),
}

PRESET_NOTES = {
    "taylor-green": "analytic decay oracle; simulate-only",
    "taylor-green-analysis": "analytic decay with a full analysis window",
    "direct": "small-scale-rich decay probing the enstrophy and "
              "forward-energy estimates at three radii",
    "inverse": "finer-banded decay probed from outside at two large "
               "radii (gamma chosen under the outer guard)",
    "locality": "higher resolution run for shell estimates, the shell "
                "ensemble, and dyadic flux ratios",
}


def initial_vorticity(grid: Grid, cfg: RunConfig):
    """Build the t = 0 vorticity field a config describes."""
    if cfg.init["kind"] == "taylor-green":
        return taylor_green_snapshot(cfg.nu, 0.0, grid).w
    params = {k: v for k, v in cfg.init.items() if k != "kind"}
    params["seed"] = cfg.seed
    return synthesize_initial_vorticity(grid, params)


def materialize(cfg: RunConfig) -> Trajectory:
    """Run the solver for a config and keep the trajectory in memory."""
    cfg.validate()
    grid = Grid(cfg.n, cfg.length)
    return run(cfg.sim_config(), initial_vorticity(grid, cfg))


def get_preset(name: str) -> RunConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


def list_presets() -> dict:
    return {name: PRESET_NOTES[name] for name in PRESETS}
