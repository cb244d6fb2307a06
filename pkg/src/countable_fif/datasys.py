"""Countable systems of data.

A system is a countable family of nodes (x_n, y_n), n >= 0, with x_n strictly
increasing and bounded and y_n convergent.  We store the *generators* of both
sequences together with their declared limits, so the endpoints

    a = x_0,   b = lim x_n,   m = y_0,   M = lim y_n

are exact user inputs rather than numerical extrapolations.  Computation
truncates the family at a depth N; the leftover region (x_N, b] is the "tail"
and is handled through the decay of the map images (see ``tail_bound``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import math
import numpy as np

from .errors import InvalidInputError, DomainError, ValidationError

#: indices beyond the truncation depth probed when validating decay
PROBE_WINDOW = 64


class _Tail:
    """Marker for the region (x_N, b] beyond the truncation depth."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TAIL"


TAIL = _Tail()


@dataclass(frozen=True)
class SequenceSpec:
    """A real sequence given by a closed-form generator plus its exact limit.

    kinds:
      * ``geometric``:  s_n = offset + scale * base**n, |base| < 1, limit = offset
      * ``harmonic``:   s_n = offset + scale / (n + 1), limit = offset
      * ``table``:      finite list of values; the limit must be supplied
      * ``custom``:     arbitrary generator; the limit must be supplied
    """

    kind: str
    declared_limit: float
    generator: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    params: tuple = ()

    @classmethod
    def geometric(cls, base: float, scale: float, offset: float) -> "SequenceSpec":
        if not abs(base) < 1.0:
            raise InvalidInputError(f"geometric sequence needs |base| < 1, got {base}")
        return cls("geometric", offset,
                   lambda n: offset + scale * np.power(base, np.asarray(n, dtype=float)),
                   params=(base, scale, offset))

    @classmethod
    def harmonic(cls, scale: float, offset: float) -> "SequenceSpec":
        return cls("harmonic", offset,
                   lambda n: offset + scale / (np.asarray(n, dtype=float) + 1.0),
                   params=(scale, offset))

    @classmethod
    def constant(cls, value: float) -> "SequenceSpec":
        return cls("geometric", value, lambda n: np.full_like(np.asarray(n, dtype=float), value),
                   params=(0.0, 0.0, value))

    @classmethod
    def table(cls, values: Sequence[float], limit: float) -> "SequenceSpec":
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or vals.size == 0 or not np.isfinite(vals).all():
            raise InvalidInputError("table sequence needs a non-empty finite value list")
        if not math.isfinite(limit):
            raise InvalidInputError("table sequence needs an explicit finite limit")

        def gen(n):
            idx = np.asarray(n)
            if (idx < 0).any() or (idx >= vals.size).any():
                raise IndexError("table sequence index out of range")
            return vals[idx]

        return cls("table", limit, gen, params=tuple(vals))

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], np.ndarray], limit: float) -> "SequenceSpec":
        if not math.isfinite(limit):
            raise InvalidInputError("custom sequence needs an explicit finite limit")
        return cls("custom", limit, fn)

    def value(self, n: int) -> float:
        return float(self.generator(np.asarray(n)))

    def values(self, n) -> np.ndarray:
        return np.asarray(self.generator(np.asarray(n)), dtype=float)


@dataclass(frozen=True)
class CountableDataSystem:
    """A validated, truncated countable system of data.

    Stores node arrays for n = 0..N plus the exact limits.  Node x-values are
    strictly increasing with node(N).x < b; y-values and M lie in
    Y = [y_lo, y_hi].  Immutable; lookups are pure functions.
    """

    xs: SequenceSpec
    ys: SequenceSpec
    depth: int
    y_lo: float
    y_hi: float
    node_x: np.ndarray = field(repr=False, compare=False)
    node_y: np.ndarray = field(repr=False, compare=False)

    @property
    def a(self) -> float:
        return float(self.node_x[0])

    @property
    def b(self) -> float:
        return float(self.xs.declared_limit)

    @property
    def m(self) -> float:
        return float(self.node_y[0])

    @property
    def M(self) -> float:
        return float(self.ys.declared_limit)

    def node(self, n: int) -> tuple[float, float]:
        """The n-th data point (x_n, y_n), 0 <= n <= depth."""
        if not (0 <= n <= self.depth):
            raise IndexError(f"node index {n} outside 0..{self.depth}")
        return float(self.node_x[n]), float(self.node_y[n])

    def find_interval(self, x: float):
        """Index n with x in [x_{n-1}, x_n], or TAIL for x in (x_N, b].

        Shared endpoints x = x_n resolve to the left interval n; the operator
        value is the same through either neighbour (the join identity
        W_n(b, M) = W_{n+1}(a, m) = y_n), so this is only a determinism
        convention.
        """
        if not (self.a - 1e-12 <= x <= self.b + 1e-12):
            raise DomainError(f"x = {x} outside [{self.a}, {self.b}]")
        if x > self.node_x[self.depth]:
            return TAIL
        n = int(np.searchsorted(self.node_x, x, side="left"))
        return max(n, 1)

    def find_intervals(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized interval lookup: (indices clipped to 1..N, tail mask)."""
        x = np.asarray(x, dtype=float)
        if (x < self.a - 1e-12).any() or (x > self.b + 1e-12).any():
            raise DomainError("coordinates outside [a, b]")
        tail = x > self.node_x[self.depth]
        idx = np.searchsorted(self.node_x, x, side="left")
        idx = np.clip(idx, 1, self.depth)
        return idx, tail


def build_system(xs: SequenceSpec, ys: SequenceSpec, depth: int,
                 y_interval: tuple[float, float]) -> CountableDataSystem:
    """Validate and assemble a countable data system truncated at ``depth``.

    Checks, up to depth plus a probe window:
      * x strictly increasing, all x_n < b, with |x_n - b| eventually decreasing;
      * y_n and M contained in Y;
      * a < b and Y a proper interval.
    """
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    y_lo, y_hi = float(y_interval[0]), float(y_interval[1])
    if not (math.isfinite(y_lo) and math.isfinite(y_hi) and y_lo < y_hi):
        raise ValidationError(f"invalid y-interval [{y_lo}, {y_hi}]")

    probe_to = depth if xs.kind == "table" or ys.kind == "table" else depth + PROBE_WINDOW
    ns = np.arange(0, probe_to + 1)
    try:
        xv = xs.values(ns)
        yv = ys.values(ns)
    except IndexError as exc:
        raise ValidationError(f"sequence too short for depth {depth}: {exc}") from exc
    if not (np.isfinite(xv).all() and np.isfinite(yv).all()):
        raise ValidationError("sequence generator produced non-finite values")

    diffs = np.diff(xv[:depth + 1])
    bad = np.nonzero(diffs <= 0)[0]
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            f"x-sequence not strictly increasing at index {i + 1}: "
            f"x_{i} = {xv[i]:.17g}, x_{i + 1} = {xv[i + 1]:.17g}")
    b = xs.declared_limit
    # strictly below the limit up to the truncation depth (beyond it the
    # generated doubles may legitimately round onto b)
    if (xv[:depth + 1] >= b).any():
        raise ValidationError(
            f"declared x-limit {b:.17g} is not above the generated values "
            f"(x_{int(np.argmax(xv >= b))} already reaches it)")
    if (xv[:probe_to + 1] > b + 1e-12).any():
        raise ValidationError("x-sequence exceeds its declared limit")
    # probed values must keep approaching the declared limit
    gaps = b - xv[depth:probe_to + 1]
    if (np.diff(gaps) > 1e-15).any():
        raise ValidationError("x-sequence stops approaching its declared limit")

    off = (yv[:depth + 1] < y_lo - 1e-9) | (yv[:depth + 1] > y_hi + 1e-9)
    if off.any():
        i = int(np.argmax(off))
        raise ValidationError(
            f"y_{i} = {yv[i]:.17g} outside Y = [{y_lo}, {y_hi}]")
    M = ys.declared_limit
    if not (y_lo - 1e-9 <= M <= y_hi + 1e-9):
        raise ValidationError(f"y-limit {M:.17g} outside Y = [{y_lo}, {y_hi}]")
    a = float(xv[0])
    if not a < b:
        raise ValidationError(f"need a < b, got a = {a}, b = {b}")

    node_x = xv[:depth + 1].copy()
    node_y = yv[:depth + 1].copy()
    node_x.setflags(write=False)
    node_y.setflags(write=False)
    return CountableDataSystem(xs=xs, ys=ys, depth=depth, y_lo=y_lo, y_hi=y_hi,
                               node_x=node_x, node_y=node_y)


def tail_bound(sys: CountableDataSystem, maps) -> float:
    """Upper bound on sup over n > N of
    diam(Im W_n) + |M - y_n| + (x_n - x_{n-1}).

    This controls the error of replacing the whole region beyond the
    truncation depth by the single limit point (b, M).  The per-n image
    diameters come from the map family's closed-form bounds; the supremum is
    evaluated over a probe window past N, which attains it for the built-in
    (decaying) families.
    """
    if maps.sys is not sys:
        raise InvalidInputError("map system was built over a different data system")
    N = sys.depth
    ns = np.arange(N + 1, N + 1 + PROBE_WINDOW)
    diam = maps.W.diam_bound(ns)
    yv = sys.ys.values(ns)
    xv = sys.xs.values(ns)
    xv_prev = sys.xs.values(ns - 1)
    comp = diam + np.abs(sys.M - yv) + (xv - xv_prev)
    return float(comp.max())
