"""Rotation-number calculus for reducing annuli and pA boundary circles.

Rotation numbers are exact :class:`fractions.Fraction` values throughout the
combinatorial layer.  The one floating-point routine,
:func:`rotation_number_numeric`, is only used by the numerical lab.

Lift convention: the two side rotations of an annulus are rotation numbers
of lifts of the return map that are both equivariantly isotopic to one common
lift of the return map on the whole annulus.  Under that convention the
annulus is untwisted exactly when the two numbers are equal as rationals
(not merely equal mod 1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Tuple

import numpy as np

from .graph import AnnulusRecord


class IncompatibleRotation(ValueError):
    pass


class InvalidLift(ValueError):
    pass


class IndeterminateTwist(ValueError):
    """Raised by callers that need a definite twist class but lack rotations."""


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` (or an integer) into a reduced Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"rational must be a 'p/q' string, got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad rational {text!r}") from exc


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class TwistClass:
    flipped: bool
    # None when a side rotation is unspecified
    twisted: Optional[bool]

    @property
    def untwisted(self) -> Optional[bool]:
        return None if self.twisted is None else not self.twisted

    @property
    def indeterminate(self) -> bool:
        return self.twisted is None


def classify_annulus(a: AnnulusRecord) -> TwistClass:
    r0, r1 = a.rotations
    if r0 is None or r1 is None:
        return TwistClass(a.flipped, None)
    if a.flipped:
        # the square of the return map must fix points on both sides
        return TwistClass(True, not (r0 == 0 and r1 == 0))
    return TwistClass(False, r0 != r1)


def flip_square_rotation(rho: Fraction) -> Fraction:
    """Rotation on the far side of a flipped annulus, given the near side."""
    return -Fraction(rho)


class CollapseChoice(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class BoundaryOrbit:
    prongs: int
    rotation: Fraction
    period: int
    collapsed_group_size: int
    # the two non-conjugate collapses only exist for fixed boundary points
    collapse_choices: Tuple[CollapseChoice, ...] = ()

    @property
    def leaf_count(self) -> int:
        return 2 * self.prongs


def boundary_orbit_structure(prongs: int, rotation: Fraction) -> BoundaryOrbit:
    """Periodic orbit left on a blown-up singularity after collapsing leaves.

    The blown-up circle carries ``2 * prongs`` periodic points (prong and
    separatrix ends).  Collapsing adjacent groups of ``2*prongs/q - 1``
    degenerate leaves leaves a single orbit of period ``q``.
    """
    if prongs < 1:
        raise ValueError("prong count must be positive")
    rotation = Fraction(rotation)
    q = (rotation % 1).denominator
    if (2 * prongs) % q:
        raise IncompatibleRotation(
            f"rotation {format_rational(rotation)} needs q={q} dividing 2*prongs={2 * prongs}")
    choices = (CollapseChoice.LEFT, CollapseChoice.RIGHT) if q == 1 else ()
    return BoundaryOrbit(prongs, rotation, q, 2 * prongs // q - 1, choices)


# ---------------------------------------------------------------------------
# numerical rotation numbers


@dataclass(frozen=True)
class RotationEstimate:
    value: object  # float, or an array for batched lifts
    error: object
    iterations: int
    method: str

    def __float__(self) -> float:
        return float(self.value)


def _check_lift(lift: Callable, batch_shape: tuple = (), samples: int = 1024) -> None:
    x = np.linspace(0.0, 1.0, samples, endpoint=False).reshape((samples,) + (1,) * len(batch_shape))
    x = x + np.zeros(batch_shape)
    y = np.asarray(lift(x), dtype=float)
    if y.shape != x.shape or not np.all(np.isfinite(y)):
        raise InvalidLift("lift must map arrays to finite arrays of the same shape")
    if np.any(np.diff(y, axis=0) < -1e-12):
        raise InvalidLift("lift is not monotone")
    shift = np.asarray(lift(x + 1.0), dtype=float) - y
    if not np.allclose(shift, 1.0, atol=1e-9):
        raise InvalidLift("lift does not have degree one (F(x+1) != F(x)+1)")


def _bump_weights(n: int) -> np.ndarray:
    t = (np.arange(n) + 0.5) / n
    w = np.exp(-1.0 / (t * (1.0 - t)))
    return w / w.sum()


def rotation_number_numeric(lift: Callable, iterations: int = 100_000, tol: float = 0.0,
                            x0=0.0, method: str = "plain") -> RotationEstimate:
    """Estimate the rotation number of a circle-map lift.

    ``lift`` must accept floats and numpy arrays.  Passing an array ``x0``
    runs a batch: entry i of the lift's output may depend on its own
    parameters (broadcast along the last axis), giving one estimate per
    entry.

    ``method="plain"`` is the Birkhoff average ``(F^N(x0) - x0) / N``, whose
    error is at most ``1/N``.  ``method="weighted"`` averages the
    displacements ``F(x_j) - x_j`` with a smooth bump weight; for smooth maps
    this converges far faster than ``1/N``, and its error estimate is the
    disagreement between the full run and its first half.
    """
    if iterations < 1:
        raise ValueError("iterations must be positive")
    if method not in ("plain", "weighted"):
        raise ValueError(f"unknown method {method!r}")
    batch = np.ndim(x0) > 0
    x = np.array(x0, dtype=float) if batch else float(x0)
    _check_lift(lift, np.shape(x))
    if method == "plain":
        y = x
        for _ in range(iterations):
            y = lift(y) if batch else float(lift(y))
        value = (y - x) / iterations
        err = np.full(np.shape(x), max(1.0 / iterations, tol)) if batch else max(1.0 / iterations, tol)
        return RotationEstimate(value, err, iterations, method)

    steps = np.empty((iterations,) + np.shape(x))
    y = x
    for j in range(iterations):
        z = lift(y) if batch else float(lift(y))
        steps[j] = z - y
        # keep the orbit in [0, 1) to avoid losing precision
        y = z - np.floor(z)
    full = _bump_weights(iterations) @ steps.reshape(iterations, -1)
    half = iterations // 2
    if half >= 2:
        err = np.abs(full - _bump_weights(half) @ steps[:half].reshape(half, -1))
    else:
        err = np.ones_like(full)
    err = np.maximum(err, tol)
    if batch:
        return RotationEstimate(full.reshape(np.shape(x)), err.reshape(np.shape(x)), iterations, method)
    return RotationEstimate(float(full[0]), float(err[0]), iterations, method)


def rigid_rotation(theta: float) -> Callable:
    return lambda x: np.asarray(x, dtype=float) + theta


def arnold_lift(omega: float, amplitude: float) -> Callable:
    """Lift ``x + omega + amplitude*sin(2*pi*x)``; monotone when amplitude < 1/(2*pi)."""
    return lambda x: (np.asarray(x, dtype=float) + omega
                      + amplitude * np.sin(2 * np.pi * np.asarray(x, dtype=float)))
