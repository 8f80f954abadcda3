"""Numerical experiments on annulus maps that interchange the boundary circles.

The annulus is S^1 x [-1, 1] with x taken mod 1.  S(x, y) = (-x, -y) is the
rigid flip.  A boundary-preserving map h with boundary lifts H_1 (top) and
H_-1 (bottom) gives the flipping map f = S o h; f^2 preserves each boundary
circle, and the two boundary rotation numbers of f^2 should be negatives.

The second experiment builds g = S o psi o alpha, where psi is the time-one
map of a flow that is odd under S and alpha interpolates the boundary maps
outside |y| <= 1/4, and certifies that g has exactly two fixed points, each
of index +1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import optimize

from ..annulus import rotation_number_numeric
from .winding import CoarseSampling, VanishingField, winding_index


@dataclass(frozen=True)
class CircleLift:
    """x + omega + amp * sin(2 pi (x + phase)); monotone when amp < 1/(2 pi)."""

    omega: float
    amp: float = 0.0
    phase: float = 0.0

    def __call__(self, x):
        return x + self.omega + self.amp * np.sin(2 * np.pi * (x + self.phase))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "CircleLift":
        return cls(float(rng.random()), float(rng.uniform(0.0, 0.12)), float(rng.random()))


def smoothstep_weight(r):
    """0 for r <= 1/4, 1 at r = 1, C^1 in between."""
    t = np.clip((np.abs(r) - 0.25) / 0.75, 0.0, 1.0)
    return t * t * (3 - 2 * t)


@dataclass(frozen=True)
class FlipAnnulusMap:
    top: CircleLift  # H_1
    bottom: CircleLift  # H_-1

    def h(self, x, y):
        """Boundary-preserving map interpolating H_1, H_-1 towards the boundaries."""
        wt = smoothstep_weight(np.maximum(y, 0.0))
        wb = smoothstep_weight(np.minimum(y, 0.0))
        return x + wt * (self.top(x) - x) + wb * (self.bottom(x) - x), y

    def f(self, x, y):
        hx, hy = self.h(x, y)
        return -hx, -hy

    def square_on_boundary(self, side: int):
        """Lift of f^2 restricted to the boundary circle y = side."""
        def lift(x):
            x1, y1 = self.f(x, float(side))
            x2, _ = self.f(x1, y1)
            return x2
        return lift


def stack_maps(maps: List[FlipAnnulusMap]) -> FlipAnnulusMap:
    """One map whose circle-lift parameters are arrays, for batched iteration."""
    def lifts(attr):
        ls = [getattr(m, attr) for m in maps]
        return CircleLift(np.array([l.omega for l in ls]), np.array([l.amp for l in ls]),
                          np.array([l.phase for l in ls]))
    return FlipAnnulusMap(lifts("top"), lifts("bottom"))


def boundary_rotations(maps: List[FlipAnnulusMap], iterations: int = 100_000,
                       method: str = "weighted") -> List[Tuple[float, float, float]]:
    """(rho on y=1, rho on y=-1, combined error estimate) of f^2, per map."""
    batch = stack_maps(maps)
    x0 = np.zeros(len(maps))
    top = rotation_number_numeric(batch.square_on_boundary(1), iterations, x0=x0, method=method)
    bottom = rotation_number_numeric(batch.square_on_boundary(-1), iterations, x0=x0, method=method)
    return [(float(a), float(b), float(ea + eb))
            for a, b, ea, eb in zip(top.value, bottom.value, top.error, bottom.error)]


# ---------------------------------------------------------------------------
# the two-fixed-point map


def flow_field(x, y, c: float):
    """S-odd field vanishing on the boundary; zeros in the interior at (0,0), (1/2,0)."""
    damp = 1 - y * y
    return c * np.sin(2 * np.pi * x) * damp, -y * damp


def time_one(x, y, c: float, steps: int = 64):
    """RK4 time-one map of ``flow_field`` (vectorized)."""
    h = 1.0 / steps
    for _ in range(steps):
        k1 = flow_field(x, y, c)
        k2 = flow_field(x + h / 2 * k1[0], y + h / 2 * k1[1], c)
        k3 = flow_field(x + h / 2 * k2[0], y + h / 2 * k2[1], c)
        k4 = flow_field(x + h * k3[0], y + h * k3[1], c)
        x = x + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y = y + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return x, y


@dataclass(frozen=True)
class PinchMap:
    """g = S o psi o alpha on S^1 x [-1, 1]."""

    boundary: FlipAnnulusMap
    c: float = 0.3

    def alpha(self, x, y):
        return self.boundary.h(x, y)

    def __call__(self, x, y):
        ax, ay = self.alpha(x, y)
        px, py = time_one(ax, ay, self.c)
        return -px, -py


@dataclass(frozen=True)
class FixedPoint:
    x: float
    y: float
    index: Optional[int]


@dataclass(frozen=True)
class FixedPointReport:
    status: str  # "certified" or "inconclusive"
    points: Tuple[FixedPoint, ...]
    index_sum: Optional[int]
    grid: int
    detail: str = ""

    @property
    def count(self) -> int:
        return len(self.points)


def _displacement(g: PinchMap, x, y):
    gx, gy = g(x, y)
    dx = (gx - x + 0.5) % 1.0 - 0.5
    return dx, gy - y


def find_fixed_points(g: PinchMap, grid: int = 200, radius: float = 0.02,
                      samples: int = 2048) -> FixedPointReport:
    """Locate and certify the fixed points of ``g`` and compute their indices.

    Candidates are grid points whose displacement is small; each is refined
    by a root finder on the chart z -> g(z) - (j, 0) - z.  Certification
    requires the displacement on the grid away from the roots to exceed a
    Lipschitz bound times the grid's covering radius.
    """
    xs = (np.arange(grid) + 0.5) / grid
    ys = -1 + (np.arange(grid) + 0.5) * (2.0 / grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    dx, dy = _displacement(g, X, Y)
    mag = np.hypot(dx, dy)
    hx, hy = 1.0 / grid, 2.0 / grid
    # Lipschitz estimate from finite differences, doubled for safety
    lip = 2 * max(np.max(np.abs(np.diff(mag, axis=0))) / hx,
                  np.max(np.abs(np.diff(mag, axis=1))) / hy)
    cover = 0.5 * np.hypot(hx, hy)
    threshold = lip * cover

    # candidates: grid-local minima of the displacement that are small enough
    padded = np.pad(mag, 1, mode="edge")
    padded[0, :], padded[-1, :] = padded[-2, :], padded[1, :]  # x is periodic
    neigh = np.min(np.stack([padded[1 + di:1 + di + grid, 1 + dj:1 + dj + grid]
                             for di in (-1, 0, 1) for dj in (-1, 0, 1)
                             if (di, dj) != (0, 0)]), axis=0)
    roots: List[Tuple[float, float]] = []
    for i, j in zip(*np.nonzero((mag < 4 * threshold) & (mag <= neigh))):
        x0, y0 = X[i, j], Y[i, j]
        jump = round(float(g(x0, y0)[0] - x0))

        def chart(v, jump=jump):
            gx, gy = g(v[0], v[1])
            return [gx - jump - v[0], gy - v[1]]

        sol = optimize.root(chart, [x0, y0], method="hybr", tol=1e-13)
        if not sol.success or abs(sol.x[1]) >= 1:
            continue
        rx, ry = sol.x[0] % 1.0, sol.x[1]
        if rx > 1.0 - 1e-12:
            rx = 0.0
        if max(np.abs(chart(sol.x))) > 1e-9:
            continue
        if all(np.hypot((rx - a + 0.5) % 1.0 - 0.5, ry - b) > 1e-6 for a, b in roots):
            roots.append((rx, ry))
    roots.sort()

    # away from the roots the displacement must stay clear of zero
    far = np.ones_like(mag, dtype=bool)
    for a, b in roots:
        far &= np.hypot((X - a + 0.5) % 1.0 - 0.5, Y - b) > 4 * radius
    certified = bool(np.all(mag[far] > threshold))

    points = []
    for a, b in roots:
        jump = round(float(g(a, b)[0] - a))

        def as_complex(z, jump=jump):
            gx, gy = g(z.real, z.imag)
            return (gx - jump) + 1j * gy
        try:
            idx = winding_index(as_complex, complex(a, b), radius, samples)
        except (VanishingField, CoarseSampling):
            idx = None
        points.append(FixedPoint(float(a), float(b), idx))
    idxs = [p.index for p in points]
    total = None if any(i is None for i in idxs) else sum(idxs)
    status = "certified" if certified and total is not None else "inconclusive"
    detail = "" if certified else f"refine the grid beyond {grid}"
    return FixedPointReport(status, tuple(points), total, grid, detail)


# ---------------------------------------------------------------------------
# combined experiment


@dataclass(frozen=True)
class FlipReport:
    rotations: Tuple[Tuple[float, float, float], ...]  # (rho top, rho bottom, error) per map
    max_rotation_sum: float
    fixed_points: FixedPointReport
    seed: int

    def ok(self, tol: float = 1e-6) -> bool:
        fp = self.fixed_points
        return (self.max_rotation_sum < tol and fp.status == "certified" and fp.count == 2
                and all(p.index not in (None, 0) for p in fp.points) and fp.index_sum == 2)


def random_flip_maps(seed: int, count: int) -> List[FlipAnnulusMap]:
    rng = np.random.default_rng(seed)
    return [FlipAnnulusMap(CircleLift.random(rng), CircleLift.random(rng)) for _ in range(count)]


def flip_annulus_experiment(seed: int = 0, maps: int = 10, iterations: int = 100_000,
                            c: float = 0.3, grid: int = 200,
                            boundary: Optional[List[FlipAnnulusMap]] = None) -> FlipReport:
    """Boundary rotation negation for random flips, then the fixed points of g."""
    family = boundary if boundary is not None else random_flip_maps(seed, maps)
    rows = tuple(boundary_rotations(family, iterations))
    worst = max(abs(a + b) for a, b, _ in rows) if rows else 0.0
    fp = find_fixed_points(PinchMap(family[0], c), grid)
    return FlipReport(rows, float(worst), fp, seed)
