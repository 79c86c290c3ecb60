"""Data-cost construction from intensity volumes.

Two cost families: a separable 5x5x5 derivative filter along z selecting an
edge polarity, and inversion of an externally produced probability map.
Costs are shifted nonnegative per volume before graph assembly; the shift
is returned so reported energies can be mapped back to the original costs.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d, gaussian_filter

from .core import Volume
from .errors import ProbabilityOutOfRange, SurfcutError

DARK_TO_BRIGHT = "dark-to-bright"
BRIGHT_TO_DARK = "bright-to-dark"

# separable 5-tap smoothing / derivative taps, normalized to unit DC and
# unit gradient gain so responses stay in intensity units per voxel
_SMOOTH = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
_DERIV = np.array([-1.0, -2.0, 0.0, 2.0, 1.0]) / 8.0


def gradient_cost(volume: Volume, polarity: str = DARK_TO_BRIGHT) -> Volume:
    """Edge cost from a signed z-derivative response, low along the edge.

    The filter is the separable outer product of smoothing taps across x
    and y with derivative taps along z; borders are replicated.  The signed
    response is negated for dark-to-bright so the selected polarity gets
    the minimum, then the volume minimum is shifted to zero.
    """
    if polarity not in (DARK_TO_BRIGHT, BRIGHT_TO_DARK):
        raise SurfcutError(f"unknown polarity {polarity!r}")
    resp = correlate1d(volume.data, _SMOOTH, axis=0, mode="nearest")
    resp = correlate1d(resp, _SMOOTH, axis=1, mode="nearest")
    resp = correlate1d(resp, _DERIV, axis=2, mode="nearest")
    raw = -resp if polarity == DARK_TO_BRIGHT else resp
    return Volume(raw - raw.min(), volume.spacing)


def probability_to_cost(prob: Volume) -> Volume:
    """Cost (1 - p) * 255 from a probability map in [0, 1]."""
    data = prob.data
    if data.min() < 0.0 or data.max() > 1.0:
        raise ProbabilityOutOfRange(
            f"probabilities must lie in [0, 1], got [{data.min()}, {data.max()}]"
        )
    return Volume((1.0 - data) * 255.0, prob.spacing)


def normalize_cost(cost: Volume):
    """Shift the volume minimum to zero; returns (volume, shift).

    shift is the original minimum, so original = normalized + shift per
    voxel.  Adding a constant per column never changes the argmin labeling.
    """
    shift = float(cost.data.min())
    return Volume(cost.data - shift, cost.spacing), shift


def gaussian_smooth(volume: Volume, sigma) -> Volume:
    """Basic separable Gaussian denoising, replicated borders."""
    return Volume(gaussian_filter(volume.data, sigma, mode="nearest"), volume.spacing)
