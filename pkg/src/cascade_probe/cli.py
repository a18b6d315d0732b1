"""Command line driver: simulate, analyze, verify, report.

The four subcommands form a pipeline.  ``simulate`` runs the solver and
persists the vorticity snapshots; ``analyze`` computes windowed averages,
certified cutoff and covering constants, and the derived length scales;
``verify`` runs the cascade estimate suite and writes one verdict
document per theorem; ``report`` bundles everything, plus plot-ready CSV
files, into a single directory.

Every emitted JSON embeds the resolved config.  All outputs are
deterministic; the single timestamp lives in the report header and
nothing else, so two runs of the same config differ in exactly that one
field.  Exit codes: 0 when nothing failed, 2 when every verdict was
vacuous, 1 on any non-vacuous failure or error.
"""

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import storage
from .coverings import make_ball_covering
from .cutoffs import domain_bump, make_time_cutoff, validate_cutoff
from .fluxes import (
    ALL_QUANTITIES,
    ScaleError,
    covering_cutoffs,
    covering_series,
    element_time_averages,
    ensemble_average,
    global_quantities,
    scales,
)
from .kernels import BACKEND
from .presets import PRESETS, RunConfig, get_preset, materialize
from .solver import CFLViolation, Snapshot, Trajectory
from .spectral import Grid
from .verdicts import (
    GuardViolation,
    check_ensemble_shell_cascade_and_ratios,
    check_enstrophy_cascade,
    check_forward_energy_cascade,
    check_inverse_cascade,
    check_shell_locality,
    suite_exit_code,
    time_cutoff_constant,
)

TRAJ_META = "meta.json"


# ------------------------------------------------------- trajectory I/O


def save_trajectory(traj: Trajectory, d: Path, cfg: RunConfig) -> None:
    d = Path(d)
    d.mkdir(parents=True, exist_ok=True)
    names = []
    for i, snap in enumerate(traj.snapshots):
        name = f"w_{i:05d}.cpf"
        storage.write_field(d / name, snap.w, traj.grid.length, snap.t)
        names.append(name)
    storage.write_json(
        d / TRAJ_META,
        {
            "format": "cascade-trajectory/1",
            "n": traj.grid.n,
            "length": traj.grid.length,
            "nu": traj.nu,
            "times": [s.t for s in traj.snapshots],
            "snapshots": names,
            "config": cfg.to_json(),
        },
    )


def load_trajectory(d) -> Trajectory:
    d = Path(d)
    meta_path = d / TRAJ_META
    if not meta_path.exists():
        raise FileNotFoundError(f"no trajectory at {d}: missing {TRAJ_META}")
    meta = storage.read_json(meta_path)
    grid = Grid(int(meta["n"]), float(meta["length"]))
    snaps = []
    for t, name in zip(meta["times"], meta["snapshots"]):
        path = d / name
        if not path.exists():
            raise FileNotFoundError(f"missing snapshot {path}")
        snaps.append(Snapshot(t=t, grid=grid, path=str(path)))
    return Trajectory(
        grid=grid,
        nu=float(meta["nu"]),
        config=meta.get("config"),
        snapshots=snaps,
    )


# ------------------------------------------------------------- analysis


def direct_radii(cfg: RunConfig, grid: Grid):
    """Split R_list into ball-coverable radii and the rest.

    A radius is usable for the interior estimates when it fits under R0
    and its narrowest cutoff band spans at least two cells.
    """
    keep, dropped = [], []
    res = 2.0 * grid.dx
    for R in cfg.R_list:
        half = R / 2.0 if cfg.boundary_mode == "cone" else R
        if R <= cfg.R0 + 1e-12 and half >= res:
            keep.append(float(R))
        else:
            dropped.append(float(R))
    return keep, dropped


def analyze(traj: Trajectory, cfg: RunConfig) -> dict:
    """Windowed averages, certified constants, scales and band tables."""
    cfg.validate(analysis=True)
    grid = traj.grid
    if grid.n != cfg.n or abs(traj.nu - cfg.nu) > 1e-12:
        raise ValueError(
            f"trajectory (n={grid.n}, nu={traj.nu}) does not match "
            f"config (n={cfg.n}, nu={cfg.nu})"
        )
    T = cfg.window
    tc = make_time_cutoff(T, cfg.delta)
    g = global_quantities(traj, cfg.R0, T, cfg.delta)

    sc = {}
    for name, num, den in (
        ("tau0", "e0", "E_prime0"),
        ("sigma0", "E0", "P0"),
        ("tau_box", "e_box", "E_box"),
    ):
        try:
            sc[name] = scales({num: g[num], den: g[den]})[name]
        except ScaleError:
            sc[name] = "undefined"

    keep, dropped = direct_radii(cfg, grid)
    notes = []
    if dropped:
        notes.append(
            "radii outside the ball-covering regime (skipped in the "
            f"averages table): {dropped}"
        )

    bump = domain_bump(cfg.R0, cfg.delta)
    bump_rep = validate_cutoff(bump, grid)
    cutoff_reports = [
        {
            "kind": "domain",
            "center": [0.0, 0.0],
            "scale": cfg.R0,
            "c0_grad": bump_rep["c0_grad"],
            "c0_lap": bump_rep["c0_lap"],
            "ok": bump_rep["ok"],
        }
    ]

    coverings = []
    tables = []
    lemma_rows = []
    for R in keep:
        cov = make_ball_covering(cfg.R0, R)
        cuts = covering_cutoffs(cov, cfg.delta, cfg.boundary_mode)
        for c in cuts:
            rep = validate_cutoff(c, grid)
            cutoff_reports.append(
                {
                    "kind": "ball",
                    "center": [float(v) for v in c.x0],
                    "scale": R,
                    "c0_grad": rep["c0_grad"],
                    "c0_lap": rep["c0_lap"],
                    "ok": rep["ok"],
                }
            )
        series = covering_series(traj, cuts, T)
        elem = element_time_averages(series, T)
        ens = {q: ensemble_average(elem[q], cov) for q in ALL_QUANTITIES}
        coverings.append(
            {"R": R, "n": cov.n, "K1": cov.K1, "K2": cov.K2}
        )
        tables.append(
            {
                "R": R,
                "centers": [[float(v) for v in x] for x in cov.centers],
                "elements": {q: elem[q].tolist() for q in ALL_QUANTITIES},
                "ensemble": ens,
            }
        )
        for q, ref in (
            ("e", "e0"),
            ("E", "E0"),
            ("E_prime", "E_prime0"),
            ("P", "P0"),
        ):
            if g[ref] > 0.0:
                ratio = ens[q] / g[ref]
                lemma_rows.append(
                    {
                        "R": R,
                        "quantity": q,
                        "ratio": ratio,
                        "lower": 1.0 / cov.K1,
                        "upper": cov.K2,
                        "ok": 1.0 / cov.K1 <= ratio <= cov.K2,
                    }
                )

    return {
        "config": cfg.to_json(),
        "backend": BACKEND,
        "window": {"T": T, "time_constant_C0": time_cutoff_constant(tc)},
        "averages": {k: float(v) for k, v in g.items()},
        "scales": sc,
        "cutoffs": cutoff_reports,
        "coverings": coverings,
        "tables": tables,
        "lemma_bands": lemma_rows,
        "notes": notes,
    }


def write_analysis(payload: dict, out: Path) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    storage.write_json(out / "analysis.json", payload)
    rows = []
    for tab in payload["tables"]:
        for i, (cx, cy) in enumerate(tab["centers"]):
            rows.append(
                [tab["R"], i, cx, cy]
                + [tab["elements"][q][i] for q in ALL_QUANTITIES]
            )
    storage.write_csv(
        out / "averages.csv",
        ["R", "element", "center1", "center2", *ALL_QUANTITIES],
        rows,
    )
    srows = [
        [tab["R"], cov["n"], cov["K1"], cov["K2"]]
        + [tab["ensemble"][q] for q in ALL_QUANTITIES]
        for tab, cov in zip(payload["tables"], payload["coverings"])
    ]
    storage.write_csv(
        out / "summary.csv",
        ["R", "n", "K1", "K2", *ALL_QUANTITIES],
        srows,
    )


# ----------------------------------------------------------- verdicts


def verify(traj: Trajectory, cfg: RunConfig):
    """Run every estimate the config makes constructible."""
    cfg.validate(analysis=True)
    reports = []
    notes = []
    keep, dropped = direct_radii(cfg, traj.grid)
    if dropped:
        notes.append(f"radii outside the interior estimates: {dropped}")
    if keep:
        reports.append(
            check_enstrophy_cascade(
                traj, cfg.R0, cfg.gamma_direct, keep, cfg.boundary_mode,
                delta=cfg.delta, T=cfg.T,
            )
        )
        reports.append(
            check_forward_energy_cascade(
                traj, cfg.R0, cfg.gamma_direct, keep, cfg.boundary_mode,
                delta=cfg.delta, T=cfg.T,
            )
        )
    else:
        notes.append("no usable interior radii; ball estimates skipped")
    outer = [float(R) for R in cfg.R_list if R > cfg.R0]
    if outer:
        reports.append(
            check_inverse_cascade(
                traj, cfg.length, cfg.R0, cfg.gamma_inverse, outer,
                delta=cfg.delta, T=cfg.T,
            )
        )
    if cfg.shells:
        reports.append(
            check_shell_locality(
                traj, [tuple(s) for s in cfg.shells], cfg.gamma_direct,
                R0=cfg.R0, T=cfg.T, delta=cfg.delta,
                boundary_mode=cfg.boundary_mode,
            )
        )
    if cfg.k_list or cfg.base_R is not None:
        reports.append(
            check_ensemble_shell_cascade_and_ratios(
                traj, cfg.R0, cfg.gamma_direct, list(cfg.R_list),
                list(cfg.k_list), delta=cfg.delta, T=cfg.T,
                boundary_mode=cfg.boundary_mode,
                gamma_outer=cfg.gamma_inverse, base_R=cfg.base_R,
            )
        )
    return reports, notes


def write_verdicts(reports, notes, cfg: RunConfig, out: Path) -> int:
    vdir = Path(out) / "verdicts"
    vdir.mkdir(parents=True, exist_ok=True)
    for rep in reports:
        storage.write_json(
            vdir / f"{rep.theorem}.json",
            {
                "header": {"format": "cascade-verdict/1"},
                "config": cfg.to_json(),
                "report": rep.to_json(),
            },
        )
    code = suite_exit_code(reports)
    storage.write_json(
        vdir / "summary.json",
        {
            "exit_code": code,
            "verdicts": {rep.theorem: rep.verdict for rep in reports},
            "notes": notes,
        },
    )
    return code


# ------------------------------------------------------------- report


def write_report(payload, reports, notes, cfg, out: Path) -> int:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    code = suite_exit_code(reports)
    storage.write_json(
        out / "report.json",
        {
            "header": {
                "format": "cascade-report/1",
                "created": datetime.now(timezone.utc).isoformat(
                    timespec="seconds"
                ),
            },
            "config": cfg.to_json(),
            "analysis": payload,
            "verdicts": {rep.theorem: rep.to_json() for rep in reports},
            "exit_code": code,
            "notes": notes,
        },
    )
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    flux_rows = [
        [tab["R"], tab["ensemble"]["Psi"], tab["ensemble"]["Phi"]]
        for tab in payload["tables"]
    ]
    storage.write_csv(plots / "flux_vs_R.csv", ["R", "Psi", "Phi"], flux_rows)
    loc_rows = []
    for rep in reports:
        if rep.theorem != "shell-ensemble-cascade-and-ratios":
            continue
        for chk in rep.checks:
            for prefix in ("dyadic ratio k=", "normalized ratio k="):
                if chk.name.startswith(prefix):
                    loc_rows.append(
                        [
                            int(chk.name.split("k=")[1]),
                            prefix.split()[0],
                            chk.scale,
                            chk.value,
                            chk.lower,
                            chk.upper,
                        ]
                    )
    storage.write_csv(
        plots / "locality_vs_k.csv",
        ["k", "form", "R", "ratio", "lower", "upper"],
        loc_rows,
    )
    return code


# ----------------------------------------------------------------- CLI


def _resolve_config(args) -> RunConfig:
    if (args.preset is None) == (args.config is None):
        raise ValueError("give exactly one of --preset or --config")
    if args.preset is not None:
        return get_preset(args.preset)
    return RunConfig.from_mapping(storage.read_json(args.config))


def _outdir(args, cfg: RunConfig) -> Path:
    if args.out is not None:
        return Path(args.out)
    if cfg.outdir:
        return Path(cfg.outdir)
    return Path("cascade-out")


def _trajdir(args, out: Path) -> Path:
    return Path(args.traj) if args.traj is not None else out / "trajectory"


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    cfg.validate(analysis=False)
    out = _outdir(args, cfg)
    tdir = _trajdir(args, out)
    traj = materialize(cfg)
    save_trajectory(traj, tdir, cfg)
    print(f"wrote {len(traj.snapshots)} snapshots to {tdir}")
    return 0


def cmd_analyze(args) -> int:
    cfg = _resolve_config(args)
    out = _outdir(args, cfg)
    traj = load_trajectory(_trajdir(args, out))
    payload = analyze(traj, cfg)
    write_analysis(payload, out)
    print(f"scales: {payload['scales']}")
    print(f"wrote analysis to {out}")
    return 0


def cmd_verify(args) -> int:
    cfg = _resolve_config(args)
    out = _outdir(args, cfg)
    traj = load_trajectory(_trajdir(args, out))
    reports, notes = verify(traj, cfg)
    code = write_verdicts(reports, notes, cfg, out)
    for rep in reports:
        print(f"{rep.theorem}: {rep.verdict}")
    return code


def cmd_report(args) -> int:
    cfg = _resolve_config(args)
    out = _outdir(args, cfg)
    tdir = _trajdir(args, out)
    if not (tdir / TRAJ_META).exists():
        cfg.validate(analysis=False)
        save_trajectory(materialize(cfg), tdir, cfg)
    traj = load_trajectory(tdir)
    payload = analyze(traj, cfg)
    write_analysis(payload, out)
    reports, notes = verify(traj, cfg)
    write_verdicts(reports, notes, cfg, out)
    code = write_report(payload, reports, notes, cfg, out)
    for rep in reports:
        print(f"{rep.theorem}: {rep.verdict}")
    print(f"wrote report to {out / 'report.json'} (exit {code})")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cascade-probe",
        description=(
            "Decaying 2D flow solver with localized cascade and flux "
            "locality diagnostics.  CASCADE_PROBE_THREADS caps FFT "
            "parallelism; CASCADE_PROBE_FORCE_PYTHON=1 pins the pure "
            "Python kernels."
        ),
    )
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "run the solver and persist snapshots",
        "analyze": "windowed averages, constants and scales",
        "verify": "run the cascade estimate suite",
        "report": "simulate if needed, analyze, verify, bundle",
    }
    for name, h in helps.items():
        s = sub.add_parser(name, help=h)
        s.add_argument("--preset", choices=sorted(PRESETS), help="named config")
        s.add_argument("--config", type=Path, help="JSON config file")
        s.add_argument("--out", type=Path, help="output directory")
        s.add_argument(
            "--traj", type=Path, help="trajectory directory (default OUT/trajectory)"
        )
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "simulate": cmd_simulate,
        "analyze": cmd_analyze,
        "verify": cmd_verify,
        "report": cmd_report,
    }[args.command]
    try:
        return handler(args)
    except GuardViolation as exc:
        print(f"configuration rejected: {exc}", file=sys.stderr)
        return 1
    except CFLViolation as exc:
        print(f"unstable step: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
