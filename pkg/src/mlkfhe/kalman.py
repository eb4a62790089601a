"""Measurement-update arithmetic for a static-state Kalman filter.

The state has a single scalar variance; updates are elementwise over whatever
shape the state values carry (score matrices, weight vectors, scalars). There
is no time-update step: the estimated state is assumed static and only the
measurement update is ever applied.
"""

from __future__ import annotations

import numpy as np

# Below this total variance the state is treated as already certain and a
# (noiseless) measurement cannot improve it; the gain is defined as 0.
GAIN_EPS = 1e-12


def kalman_gain(p: float, r: float) -> float:
    """Fusion coefficient k = p / (p + r).

    p is the variance of the current estimate, r the variance (noise) of the
    incoming measurement. The result lies in [0, 1]: 1 means the measurement
    fully replaces the estimate, 0 means it is ignored.
    """
    p = float(p)
    r = float(r)
    if p < 0:
        raise ValueError(f"estimate variance must be nonnegative, got {p}")
    if r < 0:
        raise ValueError(f"measurement noise must be nonnegative, got {r}")
    if p + r < GAIN_EPS:
        return 0.0
    return p / (p + r)


def measurement_update(prev_estimate, z, k: float):
    """Blend an estimate with a measurement: prev + k * (z - prev), elementwise.

    Every output entry is a convex combination of the corresponding prev and z
    entries. Shapes of prev_estimate and z must match exactly.
    """
    k = float(k)
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"gain must lie in [0, 1], got {k}")
    prev = np.asarray(prev_estimate, dtype=np.float64)
    meas = np.asarray(z, dtype=np.float64)
    if prev.shape != meas.shape:
        raise ValueError(
            f"estimate and measurement shapes differ: {prev.shape} vs {meas.shape}"
        )
    out = prev + k * (meas - prev)
    if out.ndim == 0:
        return float(out)
    return out


def variance_update(p: float, k: float) -> float:
    """Post-measurement variance (1 - k) * p; never exceeds p."""
    p = float(p)
    k = float(k)
    if p < 0:
        raise ValueError(f"estimate variance must be nonnegative, got {p}")
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"gain must lie in [0, 1], got {k}")
    return (1.0 - k) * p
