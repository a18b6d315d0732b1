"""One-dimensional ramp profile used by every cutoff function.

The ramp ``S`` descends from 1 to 0 across [0, 1] and is flat to all orders at
both endpoints, so any power ``S^q`` with q > 0 stays smooth and the
derivative-to-power ratios that the refined cutoffs require remain finite.

    b(s) = exp(-1/(s(1-s))) on (0,1),  S(s) = 1 - int_0^s b / int_0^1 b.

``S`` itself has no closed form; node values of the integral are precomputed
once with composite Simpson quadrature on a fine uniform grid and queried
through a cubic Hermite interpolant whose endpoint slopes are the *exact*
values of b.  The first and second derivatives of S are closed-form.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "bump",
    "bump_d1",
    "ramp_down",
    "ramp_down_d1",
    "ramp_down_d2",
    "ramp_integral",
]

_NODES = 8192  # Hermite segments; interpolation error ~ h^4 |b'''| < 1e-13


def bump(s):
    """exp(-1/(s(1-s))) extended by zero outside (0,1)."""
    s = np.asarray(s, dtype=float)
    inside = (s > 0.0) & (s < 1.0)
    out = np.zeros_like(s)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        t = np.where(inside, s * (1.0 - s), 1.0)
        out = np.where(inside, np.exp(-1.0 / t), 0.0)
    return out


def bump_d1(s):
    """Derivative of ``bump``; b'(s) = b(s)(1-2s)/(s(1-s))^2."""
    s = np.asarray(s, dtype=float)
    inside = (s > 0.0) & (s < 1.0)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        t = np.where(inside, s * (1.0 - s), 1.0)
        val = np.exp(-1.0 / t) * (1.0 - 2.0 * s) / (t * t)
    return np.where(inside, val, 0.0)


def _cumulative_bump() -> tuple[np.ndarray, np.ndarray, float]:
    # Composite Simpson on each of the _NODES segments (two panels apiece).
    grid = np.linspace(0.0, 1.0, 2 * _NODES + 1)
    vals = bump(grid)
    h = 1.0 / _NODES
    seg = (vals[:-2:2] + 4.0 * vals[1:-1:2] + vals[2::2]) * (h / 6.0)
    integral = np.concatenate(([0.0], np.cumsum(seg)))
    nodes = grid[::2]
    return nodes, integral, float(integral[-1])


_S_NODES, _S_INT, RAMP_NORM = _cumulative_bump()
_S_SLOPE = bump(_S_NODES)


def ramp_integral(s):
    """Cumulative integral int_0^s b, clamped to [0, 1]."""
    s = np.asarray(s, dtype=float)
    sc = np.clip(s, 0.0, 1.0)
    pos = sc * _NODES
    idx = np.minimum(pos.astype(np.int64), _NODES - 1)
    t = pos - idx
    h = 1.0 / _NODES
    y0 = _S_INT[idx]
    y1 = _S_INT[idx + 1]
    m0 = _S_SLOPE[idx]
    m1 = _S_SLOPE[idx + 1]
    t2 = t * t
    t3 = t2 * t
    val = (
        (1.0 - 3.0 * t2 + 2.0 * t3) * y0
        + (3.0 * t2 - 2.0 * t3) * y1
        + h * ((t - 2.0 * t2 + t3) * m0 + (t3 - t2) * m1)
    )
    return val


def ramp_down(s):
    """C-infinity step from 1 (s <= 0) to 0 (s >= 1), flat at both ends.

    Clipped to [0, 1]: the tabulated integral can overshoot the norm by one
    ulp near s = 1, and downstream code raises the value to fractional
    powers, where a stray -2e-16 would turn into NaN.
    """
    return np.clip(1.0 - ramp_integral(s) / RAMP_NORM, 0.0, 1.0)


def ramp_down_d1(s):
    """S'(s) = -b(s)/norm; identically zero outside (0,1)."""
    return -bump(s) / RAMP_NORM


def ramp_down_d2(s):
    """S''(s) = -b'(s)/norm."""
    return -bump_d1(s) / RAMP_NORM
