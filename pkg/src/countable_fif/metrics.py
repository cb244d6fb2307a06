"""Metric primitives on the strip [a,b] x Y.

Everything here is elementary but load-bearing: the weighted product metric

    d_theta((x,y), (x',y')) = |x - x'| + theta * |y - y'|,   0 < theta < 1,

the Hausdorff distance between finite point sets, and a small model of
comparison functions phi used to certify contraction properties by sampling.

Y is always a compact real interval with the absolute-value metric.  All
functions are pure; point sets are immutable after construction, so everything
is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidInputError

#: default tolerance for membership / invariant checks
MEMBERSHIP_TOL = 1e-9
#: default tolerance for exact algebraic identities
ALGEBRAIC_TOL = 1e-12

# cap on the number of matrix cells held at once by the pairwise scan
_CHUNK_CELLS = 5_000_000


@dataclass(frozen=True)
class Point2:
    """A point of [a,b] x Y."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInputError(f"non-finite point ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class ThetaMetric:
    """Weight for the product metric |dx| + theta*|dy|; theta in (0,1)."""

    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and 0.0 < self.theta < 1.0):
            raise InvalidInputError(f"theta must lie in (0,1), got {self.theta}")


class PointSet:
    """A finite, deduplicated set of points approximating a compact subset.

    Points closer than ``dedup_tol`` (per coordinate) are merged by snapping
    to a grid of that spacing.  The array is read-only after construction.
    """

    __slots__ = ("pts", "dedup_tol")

    def __init__(self, pts: np.ndarray | Iterable, dedup_tol: float = 1e-7,
                 snap: bool = True):
        """``snap=False`` records the tolerance without snapping; the caller
        then guarantees the separation invariant (used when re-pinning exact
        anchor points after a coarsening pass)."""
        arr = np.asarray(pts, dtype=float)
        if arr.ndim == 1 and arr.size == 2:
            arr = arr.reshape(1, 2)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
            raise InvalidInputError("a point set needs shape (n, 2) with n >= 1")
        if not np.isfinite(arr).all():
            raise InvalidInputError("point set contains non-finite coordinates")
        if not (math.isfinite(dedup_tol) and dedup_tol >= 0.0):
            raise InvalidInputError(f"bad dedup tolerance {dedup_tol}")
        if snap and dedup_tol > 0.0:
            arr = snap_dedup(arr, dedup_tol)
        arr = arr.copy() if not arr.flags.owndata or arr.flags.writeable else arr
        arr.setflags(write=False)
        self.pts = arr
        self.dedup_tol = dedup_tol

    def __len__(self) -> int:
        return self.pts.shape[0]

    def __repr__(self) -> str:
        return f"PointSet({len(self)} points, dedup_tol={self.dedup_tol:g})"

    @classmethod
    def from_points(cls, points: Sequence[Point2], dedup_tol: float = 1e-7) -> "PointSet":
        return cls(np.array([(p.x, p.y) for p in points]), dedup_tol)


def snap_dedup(arr: np.ndarray, tol: float) -> np.ndarray:
    """Merge points by snapping coordinates to multiples of ``tol``.

    Distinct survivors are separated by at least ``tol`` per coordinate (up
    to float rounding); each point moves by at most tol/2 per coordinate.
    """
    q = np.round(arr / tol)
    q = np.unique(q, axis=0)
    return q * tol


def d_theta(p: Point2 | tuple, q: Point2 | tuple, metric: ThetaMetric) -> float:
    """Weighted product metric |px - qx| + theta * |py - qy|."""
    px, py = (p.x, p.y) if isinstance(p, Point2) else p
    qx, qy = (q.x, q.y) if isinstance(q, Point2) else q
    if not all(math.isfinite(v) for v in (px, py, qx, qy)):
        raise InvalidInputError("d_theta requires finite coordinates")
    return abs(px - qx) + metric.theta * abs(py - qy)


def _directed_hausdorff(A: np.ndarray, B: np.ndarray, theta: float) -> float:
    """sup over A of inf over B, exhaustive pairwise scan (chunked rows)."""
    worst = 0.0
    step = max(1, _CHUNK_CELLS // B.shape[0])
    for i in range(0, A.shape[0], step):
        chunk = A[i:i + step]
        dx = np.abs(chunk[:, 0, None] - B[None, :, 0])
        dy = np.abs(chunk[:, 1, None] - B[None, :, 1])
        d = dx + theta * dy
        worst = max(worst, float(d.min(axis=1).max()))
    return worst


def hausdorff(A: PointSet | np.ndarray, B: PointSet | np.ndarray,
              metric: ThetaMetric | None = None) -> float:
    """Hausdorff distance between two finite point sets.

    ``metric=None`` selects d_1 (theta = 1); otherwise the weighted metric is
    used.  Computed by brute-force pairwise scan: O(|A| * |B|), exact.
    """
    a = A.pts if isinstance(A, PointSet) else np.asarray(A, dtype=float)
    b = B.pts if isinstance(B, PointSet) else np.asarray(B, dtype=float)
    if a.size == 0 or b.size == 0:
        raise InvalidInputError("hausdorff distance needs non-empty sets")
    theta = 1.0 if metric is None else metric.theta
    return max(_directed_hausdorff(a, b, theta), _directed_hausdorff(b, a, theta))


# ---------------------------------------------------------------------------
# comparison functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonFunction:
    """A comparison function phi: [0,inf) -> [0,inf) with phi(0) = 0.

    Three kinds:

    * ``banach`` -- phi(t) = c*t with 0 <= c < 1,
    * ``rakotch-hyperbolic`` -- phi(t) = t/(1+t),
    * ``custom`` -- a user-supplied evaluator.

    For the first two, t -> phi(t)/t is non-increasing and < 1 on (0,inf),
    which is exactly what ``certify_rakotch`` checks by sampling.
    """

    kind: str
    c: float = 0.0
    fn: Callable[[float], float] | None = field(default=None, compare=False)
    description: str = ""

    @classmethod
    def banach(cls, c: float) -> "ComparisonFunction":
        if not (0.0 <= c < 1.0):
            raise InvalidInputError(f"banach factor must lie in [0,1), got {c}")
        return cls("banach", c=c, description=f"phi(t) = {c:g}*t")

    @classmethod
    def rakotch_hyperbolic(cls) -> "ComparisonFunction":
        return cls("rakotch-hyperbolic", description="phi(t) = t/(1+t)")

    @classmethod
    def custom(cls, fn: Callable[[float], float], description: str = "custom") -> "ComparisonFunction":
        return cls("custom", fn=fn, description=description)

    def __call__(self, t):
        """Evaluate phi at t (scalar or array), t >= 0."""
        t_arr = np.asarray(t, dtype=float)
        if (t_arr < 0).any():
            raise InvalidInputError("comparison functions are defined for t >= 0")
        if self.kind == "banach":
            out = self.c * t_arr
        elif self.kind == "rakotch-hyperbolic":
            out = t_arr / (1.0 + t_arr)
        elif self.kind == "custom":
            out = np.vectorize(self.fn, otypes=[float])(t_arr)
        else:  # pragma: no cover - constructors enforce the kind
            raise InvalidInputError(f"unknown comparison kind {self.kind!r}")
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def iterate(self, t: float, k: int) -> float:
        """k-fold composition phi^[k](t)."""
        v = float(t)
        for _ in range(k):
            v = float(self(v))
        return v


def phi_eval(phi: ComparisonFunction, t: float) -> float:
    """Functional form of phi evaluation (same contract as phi(t))."""
    return float(phi(t))


@dataclass(frozen=True)
class RakotchCertificate:
    """Sampled evidence that phi is a Rakotch comparison function.

    status is "pass", "fail", or "inconclusive" ("inconclusive" marks a
    custom phi whose sampled ratio t -> phi(t)/t is not non-increasing, so
    the sampled evidence neither confirms nor refutes the property).
    """

    status: str
    grid: tuple
    alphas: tuple
    worst_alpha: float
    alpha_below_one: bool
    alpha_nonincreasing: bool
    phi_nondecreasing: bool
    worst_margin: float  # min over grid of (1 - alpha)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def certify_rakotch(phi: ComparisonFunction, grid: Sequence[float]) -> RakotchCertificate:
    """Check, on a sampled grid of t > 0, that alpha(t) = phi(t)/t is
    non-increasing and < 1, and that phi itself is non-decreasing.

    Sampling is the only generic executable check for a property quantified
    over all of (0, inf); closed-form kinds also have exact arguments, which
    the test-suite records.
    """
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise InvalidInputError("certification grid needs at least two points")
    if (g <= 0).any() or not np.isfinite(g).all():
        raise InvalidInputError("certification grid must be positive and finite")
    if (np.diff(g) <= 0).any():
        raise InvalidInputError("certification grid must be strictly increasing")

    values = np.array([float(phi(t)) for t in g])
    alphas = values / g
    below = bool((alphas < 1.0).all())
    noninc = bool((np.diff(alphas) <= ALGEBRAIC_TOL).all())
    nondec = bool((np.diff(values) >= -ALGEBRAIC_TOL).all())

    if below and noninc and nondec:
        status = "pass"
    elif phi.kind == "custom" and not noninc:
        status = "inconclusive"
    else:
        status = "fail"
    return RakotchCertificate(
        status=status,
        grid=tuple(float(t) for t in g),
        alphas=tuple(float(x) for x in alphas),
        worst_alpha=float(alphas.max()),
        alpha_below_one=below,
        alpha_nonincreasing=noninc,
        phi_nondecreasing=nondec,
        worst_margin=float((1.0 - alphas).min()),
    )
