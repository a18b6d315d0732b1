"""Physical-scale cascade diagnostics for decaying 2D Navier-Stokes flows.

Subpackage map:

- ``spectral``   periodic grid, derivatives, vorticity inversion, pressure
- ``solver``     integrating-factor RK4 time stepper and trajectories
- ``cutoffs``    refined space/time cutoff functions with analytic derivatives
- ``coverings``  lattice coverings of the analysis ball with certified constants
- ``fluxes``     localized quantities, fluxes, averages, balance residuals
- ``verdicts``   cascade/locality checks producing pass/fail/vacuous reports
- ``storage``    binary field snapshots and deterministic JSON/CSV output
- ``cli``        ``cascade-probe`` command line entry point

Top-level import stays lightweight on purpose: the CLI applies the
CASCADE_PROBE_THREADS cap before any numerical module is pulled in.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
