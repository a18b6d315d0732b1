"""Compare the compiled stepper kernels against the numpy fallback.

Two views: per-kernel microbenchmarks (both backends imported directly,
same buffers) and an end-to-end timestepping run per backend, the latter
in subprocesses so the import-time dispatch is what is actually measured.

    python3 benchmarks/bench_kernels.py [--n 256] [--steps 50]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cascade_probe import _kernels_np

try:
    from cascade_probe import _kernels_cy
except ImportError:
    _kernels_cy = None


def micro(n, repeats=200):
    rng = np.random.default_rng(0)
    m = n // 2 + 1
    real = {k: rng.standard_normal((n, n)) for k in "abcde"}
    cplx = {
        k: rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        for k in "wxyzpq"
    }
    fac = np.exp(-rng.random((n, m)))
    fac2 = fac * fac

    cases = {
        "advect": lambda mod: mod.advect(
            real["e"], real["a"], real["b"], real["c"], real["d"]
        ),
        "stage_shifted": lambda mod: mod.stage_shifted(
            cplx["p"], fac, cplx["w"], cplx["x"], 0.5
        ),
        "stage_far": lambda mod: mod.stage_far(
            cplx["p"], fac2, fac, cplx["w"], cplx["x"], 0.5
        ),
        "rk4_final": lambda mod: mod.rk4_final(
            cplx["q"], fac, fac2, cplx["w"], cplx["x"], cplx["y"], cplx["z"], 0.01
        ),
    }
    backends = [("numpy", _kernels_np)]
    if _kernels_cy is not None:
        backends.append(("compiled", _kernels_cy))

    print(f"-- kernel microbenchmarks, n={n}, best of {repeats}")
    for name, call in cases.items():
        times = {}
        for label, mod in backends:
            times[label] = min(timeit.repeat(lambda: call(mod), number=1, repeat=repeats))
        line = f"{name:14s}"
        for label in times:
            line += f"  {label}: {times[label] * 1e6:9.1f} us"
        if len(times) == 2:
            line += f"  speedup: {times['numpy'] / times['compiled']:.2f}x"
        print(line)


STEP_SNIPPET = """
import time
import numpy as np
from cascade_probe import kernels, solver
from cascade_probe.spectral import Grid

n, steps = {n}, {steps}
g = Grid(n)
w0 = solver.synthesize_initial_vorticity(
    g, {{"k_star": n // 8, "bandwidth": n // 16, "amplitude": 2.0, "seed": 0}}
)
st = solver._Stepper(g, 1e-3, 1e-3)
wh = g.rfft2(w0)
st.advance(wh.copy())  # warm up FFT plans
t0 = time.perf_counter()
for _ in range(steps):
    wh = st.advance(wh)
dt = time.perf_counter() - t0
print(f"{{kernels.BACKEND}}: {{steps}} steps at n={{n}}: "
      f"{{dt:.3f}} s  ({{dt / steps * 1e3:.2f}} ms/step)")
"""


def end_to_end(n, steps):
    print(f"-- full stepper, n={n}, {steps} steps (subprocess per backend)")
    for force in ("0", "1"):
        env = dict(os.environ, CASCADE_PROBE_FORCE_PYTHON=force)
        out = subprocess.run(
            [sys.executable, "-c", STEP_SNIPPET.format(n=n, steps=steps)],
            env=env,
            capture_output=True,
            text=True,
        )
        print(out.stdout.strip() or out.stderr.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--steps", type=int, default=50)
    args = ap.parse_args()
    micro(args.n)
    end_to_end(args.n, args.steps)


if __name__ == "__main__":
    main()
