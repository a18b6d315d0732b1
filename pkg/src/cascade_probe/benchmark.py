"""Timing harness for the stepper kernels.

Runs the compiled extension and the numpy fallback on identical inputs,
reports per-kernel timings plus the measured agreement between the two,
and times a full solver step with whichever backend is active.  Run as

    python3 -m cascade_probe.benchmark --n 256 --steps 20

The numbers answer two questions: is the extension worth shipping, and
do both implementations compute the same thing.
"""

import argparse
import time

import numpy as np

from . import _kernels_np
from .kernels import BACKEND
from .solver import SimConfig, run, synthesize_initial_vorticity
from .spectral import Grid

try:
    from . import _kernels_cy
except ImportError:
    _kernels_cy = None

KERNELS = ("advect", "stage_shifted", "stage_offset", "stage_far", "rk4_final")


def _inputs(n: int, seed: int = 0):
    """One consistent set of operands for every kernel call.

    advect runs on real physical fields; the stage kernels run on the
    half-spectrum complex state, so the shapes mirror the solver's.
    """
    rng = np.random.default_rng(seed)
    r = lambda: rng.standard_normal((n, n))
    m = n // 2 + 1
    c = lambda: (
        rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    )
    dt = 1e-3
    e = np.exp(-rng.random((n, m)))
    return {
        "advect": lambda: (np.empty((n, n)), r(), r(), r(), r()),
        "stage_shifted": lambda: (
            np.empty((n, m), complex), e, c(), c(), 0.5 * dt,
        ),
        "stage_offset": lambda: (
            np.empty((n, m), complex), e, c(), c(), 0.5 * dt,
        ),
        "stage_far": lambda: (np.empty((n, m), complex), e * e, e, c(), dt),
        "rk4_final": lambda: (c(), e, e * e, c(), c(), c(), c(), dt),
    }


def _call(mod, name, args):
    if name == "rk4_final":
        # first operand doubles as the accumulator
        w, e, e2, n1, n2, n3, n4, dt = args
        return mod.rk4_final(w, e, e2, n1, n2, n3, n4, dt)
    return getattr(mod, name)(*args)


def _time_kernel(mod, name, args_factory, repeat: int, inner: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        calls = [args_factory() for _ in range(inner)]
        t0 = time.perf_counter()
        for args in calls:
            _call(mod, name, args)
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def agreement(n: int = 128, seed: int = 1) -> float:
    """Largest elementwise deviation between the two backends."""
    if _kernels_cy is None:
        raise RuntimeError("compiled kernels are not available")
    worst = 0.0
    for name in KERNELS:
        args_np = _inputs(n, seed)[name]()
        args_cy = tuple(
            a.copy() if isinstance(a, np.ndarray) else a for a in args_np
        )
        res_np = np.array(_call(_kernels_np, name, args_np))
        res_cy = np.array(_call(_kernels_cy, name, args_cy))
        worst = max(worst, float(np.max(np.abs(res_np - res_cy))))
    return worst


def run_benchmark(n: int = 256, steps: int = 20, repeat: int = 3) -> dict:
    inner = max(1, steps)
    results = {"n": n, "backend": BACKEND, "kernels": {}}
    for name in KERNELS:
        row = {
            "python_s": _time_kernel(
                _kernels_np, name, _inputs(n)[name], repeat, inner
            )
        }
        if _kernels_cy is not None:
            row["compiled_s"] = _time_kernel(
                _kernels_cy, name, _inputs(n)[name], repeat, inner
            )
            row["speedup"] = row["python_s"] / row["compiled_s"]
        results["kernels"][name] = row
    if _kernels_cy is not None:
        results["agreement"] = agreement(min(n, 128))

    grid = Grid(n)
    w0 = synthesize_initial_vorticity(
        grid, {"k_star": 6.0, "bandwidth": 2.0, "amplitude": 3.0, "seed": 5}
    )
    cfg = SimConfig(n=n, nu=0.05, dt=1e-3, t_end=steps * 1e-3, stride=steps)
    t0 = time.perf_counter()
    run(cfg, w0)
    results["step_s"] = (time.perf_counter() - t0) / steps
    return results


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    res = run_benchmark(args.n, args.steps, args.repeat)
    print(f"grid {res['n']}x{res['n']}, active backend: {res['backend']}")
    if "agreement" in res:
        print(f"backend agreement: max |delta| = {res['agreement']:.3e}")
    else:
        print("compiled kernels unavailable; timing the fallback only")
    header = f"{'kernel':<14}{'python':>12}{'compiled':>12}{'speedup':>9}"
    print(header)
    for name, row in res["kernels"].items():
        py = f"{row['python_s'] * 1e6:9.1f} us"
        if "compiled_s" in row:
            cy = f"{row['compiled_s'] * 1e6:9.1f} us"
            sp = f"{row['speedup']:8.2f}x"
        else:
            cy, sp = f"{'-':>12}", f"{'-':>9}"
        print(f"{name:<14}{py:>12}{cy:>12}{sp:>9}")
    print(f"full solver step ({res['backend']}): {res['step_s'] * 1e3:.2f} ms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
