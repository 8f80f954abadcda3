"""Perturbed torus maps, periodic-point matching and the shadowing bounds.

A perturbed map is f(x) = A x + eps * P(x) with P a doubly periodic
trigonometric displacement field, lifted to the plane as the lift that is
equivariantly isotopic to the linear one.  Its period-n points are found by
Newton continuation from the exact rational periodic points of A.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .linear import (LinearModel, PeriodicPoints, d_components, linear_periodic_points,
                     matrix_power, shadowing_constant)


@dataclass(frozen=True)
class TrigField:
    """Sum of modes a*cos(2 pi k.x) + b*sin(2 pi k.x), per component, sup-norm <= 1."""

    modes: np.ndarray  # (M, 2) integer wave vectors
    cos_coef: np.ndarray  # (M, 2)
    sin_coef: np.ndarray  # (M, 2)

    @classmethod
    def random(cls, seed: int, n_modes: int = 6, max_wave: int = 2) -> "TrigField":
        rng = np.random.default_rng(seed)
        waves = [(i, j) for i in range(-max_wave, max_wave + 1)
                 for j in range(-max_wave, max_wave + 1) if (i, j) != (0, 0)]
        pick = rng.choice(len(waves), size=min(n_modes, len(waves)), replace=False)
        modes = np.array([waves[i] for i in sorted(pick)], dtype=float)
        a = rng.normal(size=(len(modes), 2))
        b = rng.normal(size=(len(modes), 2))
        # dividing by the coefficient l1-norm bounds each component by 1
        norm = np.abs(a).sum(axis=0) + np.abs(b).sum(axis=0)
        return cls(modes, a / norm, b / norm)

    @classmethod
    def zero(cls) -> "TrigField":
        return cls(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros((0, 2)))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        phase = 2 * np.pi * (np.asarray(x) @ self.modes.T)
        return np.cos(phase) @ self.cos_coef + np.sin(phase) @ self.sin_coef

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Shape (..., 2, 2) derivative of the field."""
        phase = 2 * np.pi * (np.asarray(x) @ self.modes.T)
        # d/dx_j of component i: sum_m 2 pi k_mj (-a_mi sin + b_mi cos)
        w = -np.sin(phase)[..., :, None] * self.cos_coef + np.cos(phase)[..., :, None] * self.sin_coef
        return 2 * np.pi * np.einsum("...mi,mj->...ij", w, self.modes)


@dataclass(frozen=True)
class PerturbedMap:
    base: LinearModel
    eps: float
    field: TrigField

    @classmethod
    def sinusoidal(cls, base: LinearModel, eps: float, seed: int = 0) -> "PerturbedMap":
        return cls(base, eps, TrigField.random(seed) if eps else TrigField.zero())

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = x @ self.base.A.T
        if self.eps:
            out = out + self.eps * self.field(x)
        return out

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        J = np.broadcast_to(self.base.A, x.shape[:-1] + (2, 2)).copy()
        if self.eps:
            J += self.eps * self.field.jacobian(x)
        return J

    def iterate(self, x: np.ndarray, n: int) -> np.ndarray:
        for _ in range(n):
            x = self(x)
        return x

    def inverse(self, z: np.ndarray, tol: float = 1e-13, max_iter: int = 50) -> np.ndarray:
        """Lifted inverse by Newton from the linear preimage."""
        z = np.asarray(z, dtype=float)
        Ainv = np.linalg.inv(self.base.A)
        x = z @ Ainv.T
        for _ in range(max_iter):
            r = self(x) - z
            if np.max(np.abs(r), initial=0.0) < tol:
                break
            x = x - np.linalg.solve(self.jacobian(x), r[..., None])[..., 0]
        return x


# ---------------------------------------------------------------------------
# displacement bound


def measure_R(fmap: PerturbedMap, grid: int = 256) -> Tuple[float, dict]:
    """Sup of d_Phi(f(x), A x) and d_Phi(f^-1(z), A^-1 z) over the plane.

    Both displacements are periodic: f(x) - A x = eps P(x), and writing
    z = f(x), f^-1(z) - A^-1 z = -eps A^-1 P(x).  Each sup is taken on a
    grid and inflated by a Lipschitz bound times the grid's covering radius.
    """
    if not fmap.eps:
        return 0.0, {"forward": 0.0, "inverse": 0.0, "inflation": 0.0}
    model = fmap.base
    s = (np.arange(grid) + 0.5) / grid
    X = np.stack(np.meshgrid(s, s, indexing="ij"), axis=-1).reshape(-1, 2)
    P = fmap.field(X)
    cov = model.covectors
    Ainv = np.linalg.inv(model.A)
    fwd = fmap.eps * (np.abs(P @ cov[0]) + np.abs(P @ cov[1]))
    Q = P @ Ainv.T
    inv = fmap.eps * (np.abs(Q @ cov[0]) + np.abs(Q @ cov[1]))
    # Lipschitz bound of w -> |<eps M P(w), u>| + |<eps M P(w), s>|
    lip_P = _field_lipschitz(fmap.field)
    lip = fmap.eps * lip_P * max(
        np.linalg.norm(cov[0]) + np.linalg.norm(cov[1]),
        np.linalg.norm(cov[0] @ Ainv) + np.linalg.norm(cov[1] @ Ainv))
    radius = np.sqrt(2) / (2 * grid)
    inflation = lip * radius
    R = max(fwd.max(), inv.max()) + inflation
    return float(R), {"forward": float(fwd.max()), "inverse": float(inv.max()),
                      "inflation": float(inflation)}


def _field_lipschitz(field: TrigField) -> float:
    """Bound on the operator norm of the field's derivative."""
    if not len(field.modes):
        return 0.0
    k = np.linalg.norm(field.modes, axis=1)
    per_component = (2 * np.pi * k[:, None] * (np.abs(field.cos_coef) + np.abs(field.sin_coef))).sum(axis=0)
    return float(np.linalg.norm(per_component))


# ---------------------------------------------------------------------------
# matching


@dataclass(frozen=True)
class MatchedPairs:
    """Matched period-n points, one row per linear periodic point."""

    n: int
    x: np.ndarray  # linear points in [0,1)^2
    numerators: np.ndarray
    denominator: int
    k: np.ndarray  # integer translations (A^n - I) x
    y: np.ndarray  # perturbed lifts with f^n(y) = y + k
    residual: np.ndarray
    matched: np.ndarray  # bool
    du: np.ndarray
    ds: np.ndarray

    @property
    def d_phi(self) -> np.ndarray:
        return self.du + self.ds

    def __len__(self) -> int:
        return len(self.x)


def _newton_periodic(fmap: PerturbedMap, x: np.ndarray, k: np.ndarray, n: int,
                     tol: float, max_iter: int = 30):
    """Multiple-shooting Newton for f(y_i) = y_(i+1), f(y_(n-1)) = y_0 + k.

    Shooting keeps every equation's residual of size eps, whereas a single
    equation f^n(y) = y + k starts with residuals amplified by lam^n.
    Returns y_0 and the residual of the single equation at y_0.
    """
    N = len(x)
    Y = np.empty((N, n, 2))
    Y[:, 0] = x
    A = fmap.base.A
    for i in range(1, n):
        Y[:, i] = Y[:, i - 1] @ A.T
    shift = np.zeros((N, n, 2))
    shift[:, -1] = k
    eye = np.eye(2)
    for _ in range(max_iter):
        FY = fmap(Y)
        F = FY - np.roll(Y, -1, axis=1) - shift
        if np.max(np.abs(F)) < tol * 1e-2:
            break
        J = fmap.jacobian(Y)
        big = np.zeros((N, 2 * n, 2 * n))
        for i in range(n):
            j = (i + 1) % n
            big[:, 2 * i:2 * i + 2, 2 * i:2 * i + 2] = J[:, i]
            big[:, 2 * i:2 * i + 2, 2 * j:2 * j + 2] -= eye
        step = np.linalg.solve(big, F.reshape(N, 2 * n, 1))[..., 0]
        Y = Y - step.reshape(N, n, 2)
    y = Y[:, 0]
    res = np.max(np.abs(fmap.iterate(y, n) - y - k), axis=-1)
    res = np.where(np.isfinite(res), res, np.inf)
    return y, res


def match_periodic_points(model: LinearModel, fmap: PerturbedMap, n: int,
                          tol: float = 1e-11) -> MatchedPairs:
    """Newton-continue every linear period-n point to a period-n point of f."""
    pts: PeriodicPoints = linear_periodic_points(model, n)
    x = pts.points
    k = pts.translations.astype(float)
    y, res = _newton_periodic(fmap, x, k, n, tol)
    matched = np.isfinite(res) & (res < tol)
    du, ds, _ = d_components(x, y, model)
    return MatchedPairs(n, x, pts.numerators, pts.denominator, k, y, res, matched, du, ds)


@dataclass(frozen=True)
class MatchReport:
    lam: float
    R: float
    C: float
    max_d_phi: float
    margin: float
    pairs: int
    unmatched: int
    violations: int
    per_period: Dict[int, dict]

    @property
    def ok(self) -> bool:
        return self.unmatched == 0 and self.violations == 0


def shadowing_experiment(model: LinearModel, eps: float, max_period: int, seed: int = 0,
                         tol: float = 1e-11, grid: int = 256):
    """Match all periodic points up to ``max_period`` and compare against C."""
    fmap = PerturbedMap.sinusoidal(model, eps, seed)
    R, _ = measure_R(fmap, grid)
    C = shadowing_constant(R, model.lam)
    sets = [match_periodic_points(model, fmap, n, tol) for n in range(1, max_period + 1)]
    per = {}
    worst, unmatched, bad = 0.0, 0, 0
    for s in sets:
        d = s.d_phi
        per[s.n] = {"points": len(s), "max_d_phi": float(d.max()),
                    "unmatched": int((~s.matched).sum()), "violations": int((d >= C).sum())}
        worst = max(worst, float(d.max()))
        unmatched += int((~s.matched).sum())
        bad += int((d >= C).sum())
    report = MatchReport(model.lam, R, C, worst, C - worst, sum(len(s) for s in sets),
                         unmatched, bad, per)
    return fmap, sets, report


# ---------------------------------------------------------------------------
# two-sided bound


def _orbit_offsets(fmap: PerturbedMap, s: MatchedPairs, m_values: Sequence[int]):
    """For each m, the linear image A^m x and the offset f^m(y) - A^m x.

    Uses f^(qn + r)(y) = f^r(y) + A^r t_q where t_q is the integer lift
    translation after q returns; the same t_q serves x under A, so the
    offset is f^r(y) - A^r x and stays bounded.
    """
    n = s.n
    model = fmap.base
    out = {}
    fr = [s.y]
    for _ in range(n - 1):
        fr.append(fmap(fr[-1]))
    for m in m_values:
        q, r = divmod(m, n)
        Ar = np.array(matrix_power(model, r), dtype=float)
        Am = np.array(matrix_power(model, m), dtype=float)
        offset = fr[r] - s.x @ Ar.T
        out[m] = (s.x @ Am.T, offset)
    return out


@dataclass(frozen=True)
class TwoSidedReport:
    bound: float
    max_difference: float
    comparisons: int

    @property
    def ok(self) -> bool:
        return self.max_difference <= self.bound


def two_sided_bound_check(fmap: PerturbedMap, sets: Sequence[MatchedPairs], C: float,
                          m_range: Tuple[int, int] = (-20, 20), chunk: int = 512) -> TwoSidedReport:
    """max over pairs of pairs and m of |d_Phi(A^m x1, A^m x2) - d_Phi(f^m y1, f^m y2)|."""
    model = fmap.base
    cov = model.covectors
    ms = list(range(m_range[0], m_range[1] + 1))
    per_set = [_orbit_offsets(fmap, s, ms) for s in sets]
    worst, count = 0.0, 0
    for m in ms:
        lin = np.concatenate([o[m][0] for o in per_set])
        off = np.concatenate([o[m][1] for o in per_set])
        U, S = lin @ cov[0], lin @ cov[1]
        eu, es = off @ cov[0], off @ cov[1]
        N = len(U)
        for start in range(0, N, chunk):
            sl = slice(start, start + chunk)
            dU = U[sl, None] - U[None, :]
            dS = S[sl, None] - S[None, :]
            lin_d = np.abs(dU) + np.abs(dS)
            per_d = np.abs(dU + eu[sl, None] - eu[None, :]) + np.abs(dS + es[sl, None] - es[None, :])
            worst = max(worst, float(np.max(np.abs(lin_d - per_d))))
            count += dU.size
    return TwoSidedReport(2 * C, worst, count)


# ---------------------------------------------------------------------------
# semiconjugacy


class OrbitNotClosed(ValueError):
    pass


@dataclass(frozen=True)
class SemiconjugacyReport:
    max_defect: float
    max_lift_deviation: float
    C: float
    points: int

    def ok(self, tol: float = 1e-6) -> bool:
        return self.max_defect < tol and self.max_lift_deviation <= self.C


def _torus_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = (a - b + 0.5) % 1.0 - 0.5
    return np.linalg.norm(d, axis=-1)


def semiconjugacy_check(fmap: PerturbedMap, sets: Sequence[MatchedPairs], C: float
                        ) -> SemiconjugacyReport:
    """Defect of alpha(f(y)) = A alpha(y) where alpha sends each y to its x.

    Pairs are keyed by the exact rational x mod 1; the pair at A x mod 1
    must exist, and its y is compared with f(y) on the torus.
    """
    A = fmap.base.A_int
    worst, dev, total = 0.0, 0.0, 0
    for s in sets:
        D = s.denominator
        index = {tuple(p): i for i, p in enumerate(s.numerators.tolist())}
        img = (s.numerators @ A.T) % D
        try:
            j = np.array([index[tuple(p)] for p in img.tolist()], dtype=int)
        except KeyError as exc:
            raise OrbitNotClosed(f"period-{s.n} matched set is not closed under the map") from exc
        defect = _torus_distance(fmap(s.y), s.y[j])
        worst = max(worst, float(defect.max()))
        dev = max(dev, float(s.d_phi.max()))
        total += len(s)
    return SemiconjugacyReport(worst, dev, C, total)


def pairs_table(sets: Sequence[MatchedPairs]) -> List[dict]:
    rows = []
    for s in sets:
        for i in range(len(s)):
            rows.append({"period": s.n, "x0": s.x[i, 0], "x1": s.x[i, 1],
                         "y0": s.y[i, 0], "y1": s.y[i, 1], "d_u": s.du[i], "d_s": s.ds[i],
                         "d_phi": s.du[i] + s.ds[i], "residual": s.residual[i],
                         "matched": bool(s.matched[i])})
    return rows
