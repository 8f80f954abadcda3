"""Fixed-point indices as winding numbers, and local models realizing them."""

from __future__ import annotations

from typing import Callable

import numpy as np


class VanishingField(ValueError):
    """The displacement vanishes (numerically) on the sampling circle."""


class CoarseSampling(ValueError):
    pass


def winding_index(fmap: Callable, point: complex, radius: float, samples: int = 4096) -> int:
    """Winding number of z -> fmap(z) - z around a circle about ``point``.

    ``fmap`` takes and returns complex arrays.  Raises VanishingField when
    the displacement gets too small on the circle (retry with another
    radius) and CoarseSampling when consecutive samples turn too far.
    """
    theta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    z = complex(point) + radius * np.exp(1j * theta)
    v = np.asarray(fmap(z), dtype=complex) - z
    mag = np.abs(v)
    if not np.all(np.isfinite(mag)) or mag.min() <= 1e-12 * max(1.0, mag.max()):
        raise VanishingField(f"displacement vanishes near the circle of radius {radius}")
    ang = np.angle(np.append(v, v[0]))
    steps = np.diff(ang)
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    if np.max(np.abs(steps)) > np.pi / 4:
        raise CoarseSampling(f"{samples} samples too coarse for this field")
    total = steps.sum() / (2 * np.pi)
    return int(round(total))


def planar(fn: Callable) -> Callable:
    """Adapt a map of (x, y) arrays with shape (..., 2) to complex input."""
    def wrapped(z):
        z = np.asarray(z, dtype=complex)
        out = fn(np.stack([z.real, z.imag], axis=-1))
        return out[..., 0] + 1j * out[..., 1]
    return wrapped


def _exponents(index: int):
    # w^a conj(w)^b winds a - b times
    if index >= 1:
        return index, 0
    return 1, 1 - index


def sector_model(index: int, delta: float = 0.1) -> Callable:
    """A map fixing 0 whose displacement near 0 winds ``index`` times."""
    a, b = _exponents(index)
    return lambda w: w + delta * w ** a * np.conj(w) ** b


def branched_lift_model(index: int, k: int, rotated: bool = False, delta: float = 0.1) -> Callable:
    """Lift through z -> z**k of the downstairs sector model of given index.

    G(z)**k = H(z**k) where H is the downstairs map; a rotated lift is G
    composed with rotation by 2 pi / k.  Sample on the unit circle, where the
    relative displacement of H is exactly ``delta``.
    """
    a, b = _exponents(index)

    def G(z):
        u = delta * (z ** k) ** (a - 1) * np.conj(z ** k) ** b
        lifted = z * (1 + u) ** (1.0 / k)
        if rotated:
            lifted = lifted * np.exp(2j * np.pi / k)
        return lifted
    return G
