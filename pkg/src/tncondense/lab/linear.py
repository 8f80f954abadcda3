"""Linear hyperbolic torus models and their eigen-pseudo-metrics."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import sqrt
from typing import List, Sequence, Tuple

import numpy as np

CAT_MAP = ((2, 1), (1, 1))


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class LinearModel:
    matrix: Tuple[Tuple[int, int], Tuple[int, int]]

    def __post_init__(self):
        (a, b), (c, d) = self.matrix
        if a * d - b * c != 1:
            raise DomainError(f"matrix must have determinant 1, got {a * d - b * c}")
        if abs(a + d) <= 2:
            raise DomainError("matrix must be hyperbolic (|trace| > 2)")

    @classmethod
    def from_entries(cls, entries: Sequence[int]) -> "LinearModel":
        a, b, c, d = (int(v) for v in entries)
        return cls(((a, b), (c, d)))

    @property
    def A(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @property
    def A_int(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    @property
    def trace(self) -> int:
        return self.matrix[0][0] + self.matrix[1][1]

    @property
    def discriminant(self) -> int:
        return self.trace ** 2 - 4

    @property
    def mu(self) -> float:
        """Eigenvalue of modulus greater than one (negative when the trace is)."""
        t = self.trace
        return (t + np.sign(t) * sqrt(self.discriminant)) / 2

    @property
    def lam(self) -> float:
        return abs(self.mu)

    def _eigvec(self, value: float) -> np.ndarray:
        (a, b), (c, d) = self.matrix
        # (A - value) v = 0 with c != 0 for hyperbolic SL2(Z)
        v = np.array([value - d, c], dtype=float)
        return v / np.linalg.norm(v)

    @property
    def unstable(self) -> np.ndarray:
        return self._eigvec(self.mu)

    @property
    def stable(self) -> np.ndarray:
        return self._eigvec(1 / self.mu)

    @property
    def covectors(self) -> np.ndarray:
        """Rows (u*, s*) dual to the unit eigenvectors (e_u, e_s)."""
        return np.linalg.inv(np.column_stack([self.unstable, self.stable]))


def d_components(x, y, model: LinearModel):
    """Unstable, stable and total eigen-separations of points in the plane.

    Works elementwise on arrays of shape (..., 2).
    """
    w = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    cov = model.covectors
    du = np.abs(w @ cov[0])
    ds = np.abs(w @ cov[1])
    return du, ds, du + ds


# ---------------------------------------------------------------------------
# exact expansion check


def _exact_pairing(model: LinearModel, w: Tuple[int, int], unstable: bool) -> float:
    """``2 <v, w>`` for the left eigenvector v = (c, mu - a), accurate to an ulp.

    ``w`` is an integer vector (points rescaled by a power of two).  The
    value is I + J*sqrt(D) with I, J integers.  When the two terms have
    opposite signs it is evaluated as (I^2 - J^2 D) / (I - J sqrt(D)) so no
    cancellation occurs.
    """
    (a, b), (c, d) = model.matrix
    t, D = model.trace, model.discriminant
    sign = 1 if (t > 0) == unstable else -1
    I = 2 * c * w[0] + (t - 2 * a) * w[1]
    J = sign * w[1]
    if I == 0 or J == 0 or (I > 0) == (J > 0):
        return float(I) + float(J) * sqrt(D)
    return float(I * I - J * J * D) / (float(I) - float(J) * sqrt(D))


def _scaled_difference(x, y) -> Tuple[int, int]:
    """x - y as an integer vector times 2**-E, exactly."""
    ratios = [float(v).as_integer_ratio() for v in (x[0], x[1], y[0], y[1])]
    den = max(q for _, q in ratios)
    (p0, q0), (p1, q1), (p2, q2), (p3, q3) = ratios
    return (p0 * (den // q0) - p2 * (den // q2), p1 * (den // q1) - p3 * (den // q3))


@dataclass(frozen=True)
class ExpansionReport:
    ok: bool
    samples: int
    lam: float
    worst_relative_error: float
    worst_pair: Tuple[Tuple[float, float], Tuple[float, float]]
    tolerance: float


def verify_expansion(model: LinearModel, pairs: Sequence, tol: float = 1e-12) -> ExpansionReport:
    """Check d_u(Ax, Ay) = lam d_u(x, y) and d_s(A^-1 x, A^-1 y) = lam d_s(x, y).

    Points are taken as exact binary fractions, images are computed exactly,
    and each pseudo-metric value is evaluated to an ulp, so the check
    measures the metric rather than floating-point cancellation.
    """
    (a, b), (c, d) = model.matrix
    lam = model.lam
    worst, worst_pair = 0.0, ((0.0, 0.0), (0.0, 0.0))
    for x, y in pairs:
        w = _scaled_difference(x, y)
        fw = (a * w[0] + b * w[1], c * w[0] + d * w[1])
        bw = (d * w[0] - b * w[1], -c * w[0] + a * w[1])
        for unstable, image in ((True, fw), (False, bw)):
            before = abs(_exact_pairing(model, w, unstable))
            after = abs(_exact_pairing(model, image, unstable))
            if before == 0.0:
                err = 0.0 if after == 0.0 else float("inf")
            else:
                err = abs(after / before - lam) / lam
            if err > worst:
                worst, worst_pair = err, (tuple(map(float, x)), tuple(map(float, y)))
    return ExpansionReport(bool(worst <= tol), len(pairs), lam, float(worst), worst_pair, tol)


def shadowing_constant(R: float, lam: float) -> float:
    if not lam > 1:
        raise DomainError(f"expansion constant must exceed 1, got {lam}")
    if R < 0:
        raise DomainError("displacement bound must be non-negative")
    return 2 * (R + 1) / (lam - 1)


@dataclass(frozen=True)
class ShadowingParams:
    lam: float
    R: float

    @property
    def C(self) -> float:
        return shadowing_constant(self.R, self.lam)


# ---------------------------------------------------------------------------
# periodic points


def matrix_power(model: LinearModel, n: int) -> np.ndarray:
    out = np.eye(2, dtype=object)
    base = np.array(model.matrix, dtype=object)
    for _ in range(abs(n)):
        out = out.dot(base)
    if n < 0:
        (p, q), (r, s) = out
        out = np.array([[s, -q], [-r, p]], dtype=object)
    return out


def periodic_point_count(model: LinearModel, n: int) -> int:
    """|det(A^n - I)| = |2 - trace(A^n)| via the trace recursion."""
    t = model.trace
    prev, cur = 2, t
    for _ in range(n - 1):
        prev, cur = cur, t * cur - prev
    return abs(2 - cur)


@dataclass(frozen=True)
class PeriodicPoints:
    n: int
    denominator: int
    numerators: np.ndarray  # shape (count, 2); points are numerators / denominator
    translations: np.ndarray  # (A^n - I) x, integer vectors

    @property
    def count(self) -> int:
        return len(self.numerators)

    @property
    def points(self) -> np.ndarray:
        return self.numerators / self.denominator


def linear_periodic_points(model: LinearModel, n: int) -> PeriodicPoints:
    """All x in [0,1)^2 with A^n x = x mod Z^2, as exact rationals."""
    if n < 1:
        raise ValueError("period must be positive")
    M = matrix_power(model, n) - np.eye(2, dtype=object)
    det = int(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    if det == 0:
        raise DomainError("A^n - I is singular")
    D = abs(det)
    # solutions are adj(M) k / det; the numerators form the subgroup of
    # (Z/D)^2 generated by the columns of sign(det) * adj(M)
    adj = np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]], dtype=object)
    if det < 0:
        adj = -adj
    gens = [(int(adj[0, j]) % D, int(adj[1, j]) % D) for j in range(2)]
    seen = {(0, 0)}
    queue = deque([(0, 0)])
    while queue:
        p = queue.popleft()
        for g in gens:
            q = ((p[0] + g[0]) % D, (p[1] + g[1]) % D)
            if q not in seen:
                seen.add(q)
                queue.append(q)
    nums = np.array(sorted(seen), dtype=np.int64)
    Mi = np.array(M, dtype=np.int64)
    trans = (nums @ Mi.T) // D
    if np.any((nums @ Mi.T) % D):
        raise ArithmeticError("non-integral translation for a periodic point")
    if len(nums) != periodic_point_count(model, n):
        raise ArithmeticError("periodic point enumeration disagrees with the trace count")
    return PeriodicPoints(n, D, nums, trans)
