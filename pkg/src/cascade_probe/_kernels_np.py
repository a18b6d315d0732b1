"""Numpy reference implementations of the stepper kernels.

Same call shapes as the compiled versions; used when the extension is absent
or when CASCADE_PROBE_FORCE_PYTHON=1.  Every function writes into ``out`` (or
updates its first argument) to keep allocation behavior comparable.
"""

from __future__ import annotations

import numpy as np


def advect(out, u1, u2, w1, w2):
    """out = u1*w1 + u2*w2, elementwise on real fields."""
    np.multiply(u1, w1, out=out)
    out += u2 * w2
    return out


def stage_shifted(out, e, w, nl, c):
    """out = e * (w + c*nl), integrating-factor half-step of a stage state."""
    np.multiply(nl, c, out=out)
    out += w
    out *= e
    return out


def stage_offset(out, e, w, nl, c):
    """out = e*w + c*nl."""
    np.multiply(e, w, out=out)
    out += c * nl
    return out


def stage_far(out, e2, e, w, nl, dt):
    """out = e2*w + dt*e*nl."""
    np.multiply(e2, w, out=out)
    out += dt * (e * nl)
    return out


def rk4_final(w, e, e2, n1, n2, n3, n4, dt):
    """w <- e2*w + dt/6 * (e2*n1 + 2e*(n2+n3) + n4), in place."""
    w *= e2
    acc = e2 * n1
    acc += 2.0 * (e * (n2 + n3))
    acc += n4
    acc *= dt / 6.0
    w += acc
    return w
