"""Periodic pseudo-spectral machinery on the square torus.

Scalar fields are plain ``(n, n)`` float arrays sampled at ``x_i = i*dx`` in
each direction (index ``[i, j]`` is the point ``(x1_i, x2_j)``); vector fields
are ``(u1, u2)`` tuples.  Transforms use the real FFT over both axes, so hats
have shape ``(n, n//2 + 1)``.

Conventions baked into :class:`Grid`:

- integer wavenumbers scaled by 2*pi/length (identity when length = 2*pi);
- Nyquist modes are zeroed in first-derivative multipliers (they carry no
  usable phase for odd derivatives on an even grid);
- the 2/3-rule dealias mask keeps |m| <= floor(n/3) componentwise.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

__all__ = [
    "TWO_PI",
    "Grid",
    "gradient",
    "laplacian",
    "curl",
    "velocity_from_vorticity",
    "solve_pressure",
    "integrate",
]

TWO_PI = 2.0 * np.pi


def _workers() -> int:
    raw = os.environ.get("CASCADE_PROBE_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


_WORKERS = _workers()


@dataclass(frozen=True)
class Grid:
    """Uniform n-by-n periodic grid with cached spectral multipliers."""

    n: int
    length: float = TWO_PI

    def __post_init__(self):
        n = self.n
        if n < 4 or n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 4, got {n}")
        if not self.length > 0.0:
            raise ValueError("box length must be positive")
        dx = self.length / n
        x = np.arange(n) * dx
        scale = TWO_PI / self.length
        m1 = np.fft.fftfreq(n, d=1.0 / n)  # 0, 1, ..., -1 ordering
        m2 = np.arange(n // 2 + 1, dtype=float)
        k1 = (scale * m1)[:, None]
        k2 = (scale * m2)[None, :]
        k_sq = k1 * k1 + k2 * k2
        inv_k_sq = np.zeros_like(k_sq)
        nz = k_sq > 0.0
        inv_k_sq[nz] = 1.0 / k_sq[nz]

        # First-derivative multipliers with the Nyquist plane removed.
        d1 = 1j * np.broadcast_to(k1, k_sq.shape).copy()
        d2 = 1j * np.broadcast_to(k2, k_sq.shape).copy()
        d1[n // 2, :] = 0.0
        d2[:, -1] = 0.0

        keep = n // 3
        dealias = (np.abs(m1)[:, None] <= keep) & (m2[None, :] <= keep)

        for name, val in (
            ("dx", dx),
            ("cell_area", dx * dx),
            ("x", x),
            ("x1", x[:, None].copy()),
            ("x2", x[None, :].copy()),
            ("k1", k1),
            ("k2", k2),
            ("k_sq", k_sq),
            ("inv_k_sq", inv_k_sq),
            ("d1", d1),
            ("d2", d2),
            ("dealias", dealias),
        ):
            object.__setattr__(self, name, val)

    # -- transforms -------------------------------------------------------

    def rfft2(self, f: np.ndarray) -> np.ndarray:
        return _fft.rfft2(f, workers=_WORKERS)

    def irfft2(self, fh: np.ndarray) -> np.ndarray:
        return _fft.irfft2(fh, s=(self.n, self.n), workers=_WORKERS)

    def zeros(self) -> np.ndarray:
        return np.zeros((self.n, self.n))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Full (n, n) coordinate arrays."""
        return np.broadcast_to(self.x1, (self.n, self.n)), np.broadcast_to(
            self.x2, (self.n, self.n)
        )


# -- differential operators -----------------------------------------------


def gradient(f: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Spectral (d/dx1 f, d/dx2 f)."""
    fh = grid.rfft2(f)
    return grid.irfft2(grid.d1 * fh), grid.irfft2(grid.d2 * fh)


def laplacian(f: np.ndarray, grid: Grid) -> np.ndarray:
    fh = grid.rfft2(f)
    return grid.irfft2(-grid.k_sq * fh)


def curl(u: tuple[np.ndarray, np.ndarray], grid: Grid) -> np.ndarray:
    """Scalar vorticity d1 u2 - d2 u1 of a planar vector field."""
    u1h = grid.rfft2(u[0])
    u2h = grid.rfft2(u[1])
    return grid.irfft2(grid.d1 * u2h - grid.d2 * u1h)


def velocity_from_vorticity(w: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Invert the vorticity to the unique zero-mean divergence-free velocity.

    In hats: u1 = i k2 w / |k|^2, u2 = -i k1 w / |k|^2.

    Raises ValueError when the vorticity carries a mean, since the inversion
    only exists on zero-mean fields.
    """
    wh = grid.rfft2(w)
    scale = np.max(np.abs(w))
    mean = np.abs(wh[0, 0]) / (grid.n * grid.n)
    if scale > 0.0 and mean > 1e-12 * scale:
        raise ValueError(f"nonzero-mean vorticity: mean={mean:.3e}, max={scale:.3e}")
    psi_h = wh * grid.inv_k_sq  # sign folded into the multipliers below
    u1 = grid.irfft2(1j * np.broadcast_to(grid.k2, wh.shape) * psi_h)
    u2 = grid.irfft2(-1j * np.broadcast_to(grid.k1, wh.shape) * psi_h)
    return u1, u2


def solve_pressure(
    u: tuple[np.ndarray, np.ndarray], grid: Grid, nu: float = 0.0
) -> np.ndarray:
    """Zero-mean pressure from Delta p = -div((u.grad)u).

    The viscous contribution drops for divergence-free velocity, so ``nu`` is
    accepted only to mirror the solver call shape.  The advective products are
    formed on the grid and dealiased consistently with the time stepper.
    """
    del nu
    u1, u2 = u
    u1h = grid.rfft2(u1)
    u2h = grid.rfft2(u2)
    u1x1 = grid.irfft2(grid.d1 * u1h)
    u1x2 = grid.irfft2(grid.d2 * u1h)
    u2x1 = grid.irfft2(grid.d1 * u2h)
    u2x2 = grid.irfft2(grid.d2 * u2h)
    a1h = grid.rfft2(u1 * u1x1 + u2 * u1x2) * grid.dealias
    a2h = grid.rfft2(u1 * u2x1 + u2 * u2x2) * grid.dealias
    rhs_h = -(grid.d1 * a1h + grid.d2 * a2h)
    ph = -rhs_h * grid.inv_k_sq
    ph[0, 0] = 0.0
    return grid.irfft2(ph)


def integrate(f: np.ndarray, grid: Grid) -> float:
    """Box integral by the trapezoid/midpoint rule, exact for band-limited f."""
    return float(np.sum(f) * grid.cell_area)
