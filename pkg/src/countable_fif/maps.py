"""Map families over a countable data system.

For each subinterval index n >= 1 the system carries a pair of maps:

* an affine homeomorphism l_n of [a,b] onto [x_{n-1}, x_n],

      l_n(x) = (x_n - x_{n-1})/(b - a) * x + (b*x_{n-1} - a*x_n)/(b - a),

* a vertical map W_n(x, y) pinned at W_n(a, m) = y_{n-1}, W_n(b, M) = y_n,
  with image diameters shrinking to zero in n.  Two families:

      A:  W_n(x, y) = c_n*x + d_n*y + g_n          (contraction factor d_n)
      B:  W_n(x, y) = c_n*x + y/(1 + n*y) + g_n    (hyperbolic in y)

Family A is a plain Banach contraction in y.  Family B is the interesting
one: |W_n(x,y) - W_n(x,y')| <= |y-y'| / (1 + |y-y'|) on Y contained in
[0, inf), a bound whose ratio to |y - y'| tends to 1 near zero, so no uniform
factor < 1 exists.  Composing with l_n, each point map

      f_n(x, y) = (l_n(x), W_n(x, y))

contracts the weighted metric |dx| + theta*|dy| with comparison function
psi(t) = t * max(sup L_n + theta*(L+1), phi(t)/t), where L_n is the slope of
l_n, L = sup |c_n|, and theta = (1 - sup L_n) / (2 (L + 1)).  That choice of
theta makes the first branch equal (1 + sup L_n)/2 < 1.

The vertical families A and B need not map the declared data interval Y into
itself (the interpolant can overshoot the data range), so construction
computes the smallest enlargement Y_eval of Y that every W_n maps into
itself, using the exact per-map range bounds.  Evaluations are range-checked
against Y_eval; a violation signals a genuinely misconfigured family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .datasys import CountableDataSystem, SequenceSpec, PROBE_WINDOW
from .errors import (DomainError, InvalidInputError, RangeViolationError,
                     ValidationError)
from .metrics import ComparisonFunction, Point2, certify_rakotch

_DOMAIN_TOL = 1e-9


@dataclass(frozen=True)
class SubintervalMap:
    """Affine map of [a,b] onto [x_{n-1}, x_n]; slope = contraction ratio L_n."""

    n: int
    slope: float
    intercept: float
    a: float
    b: float

    @property
    def L_n(self) -> float:
        return self.slope

    def __call__(self, x: float) -> float:
        if not (self.a - _DOMAIN_TOL <= x <= self.b + _DOMAIN_TOL):
            raise DomainError(f"l_{self.n}: x = {x} outside [{self.a}, {self.b}]")
        return self.slope * x + self.intercept

    def inverse(self, x: float) -> float:
        lo = self.slope * self.a + self.intercept
        hi = self.slope * self.b + self.intercept
        if not (lo - _DOMAIN_TOL <= x <= hi + _DOMAIN_TOL):
            raise DomainError(
                f"l_{self.n}^-1: x = {x} outside [{lo}, {hi}]")
        u = (x - self.intercept) / self.slope
        return min(max(u, self.a), self.b)


def l_eval(m: SubintervalMap, x: float) -> float:
    return m(x)


def l_inverse(m: SubintervalMap, x: float) -> float:
    return m.inverse(x)


class VerticalMapFamily:
    """The family (W_n) with per-index coefficients and closed-form bounds.

    Coefficient arrays cover n = 1 .. n_max (truncation depth plus a probe
    window when generators allow), so tail bounds can query indices past the
    truncation depth.
    """

    def __init__(self, kind, c, g, d, phi, sys, y_eval, d_spec=None):
        self.kind = kind                      # "A" or "B"
        self.c = c                            # index 0 unused
        self.g = g
        self.d = d                            # family A only (zeros for B)
        self.phi = phi
        self.sys = sys
        self.y_eval = y_eval                  # (lo, hi) working interval
        self.d_spec = d_spec
        self.n_max = len(c) - 1

    def evaluate(self, n: int, x: float, y: float, check_range: bool = True) -> float:
        """W_n(x, y); raises RangeViolationError if the value leaves Y_eval."""
        sys = self.sys
        if not (1 <= n <= self.n_max):
            raise IndexError(f"vertical map index {n} outside 1..{self.n_max}")
        if not (sys.a - _DOMAIN_TOL <= x <= sys.b + _DOMAIN_TOL):
            raise DomainError(f"W_{n}: x = {x} outside [{sys.a}, {sys.b}]")
        lo, hi = self.y_eval
        if not (lo - _DOMAIN_TOL <= y <= hi + _DOMAIN_TOL):
            raise DomainError(f"W_{n}: y = {y} outside Y_eval = [{lo}, {hi}]")
        if self.kind == "A":
            out = self.c[n] * x + self.d[n] * y + self.g[n]
        else:
            out = self.c[n] * x + y / (1.0 + n * y) + self.g[n]
        if check_range and not (lo - _DOMAIN_TOL <= out <= hi + _DOMAIN_TOL):
            raise RangeViolationError(
                f"W_{n}({x}, {y}) = {out} leaves Y_eval = [{lo}, {hi}]; "
                f"enlarge the y-interval of the system")
        return float(out)

    def evaluate_array(self, n, x, y) -> np.ndarray:
        """Vectorized W evaluation; n may be a scalar or a per-point array."""
        n = np.asarray(n)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "A":
            return self.c[n] * x + self.d[n] * y + self.g[n]
        return self.c[n] * x + y / (1.0 + n * y) + self.g[n]

    def diam_bound(self, n) -> np.ndarray:
        """Closed-form upper bound for diam(Im W_n) over [a,b] x Y_eval.

        Family A: (b-a)|c_n| + diam(Y_eval) * d_n.
        Family B: (b-a)|c_n| + [hi/(1+n*hi) - lo/(1+n*lo)], the exact sweep
        of the hyperbolic part (y -> y/(1+n*y) is increasing).  Both decay
        to 0 as n grows.
        """
        n = np.asarray(n)
        if (n < 1).any() or (n > self.n_max).any():
            raise IndexError(f"diam_bound index outside 1..{self.n_max}")
        sys = self.sys
        lo, hi = self.y_eval
        xpart = (sys.b - sys.a) * np.abs(self.c[n])
        if self.kind == "A":
            return xpart + (hi - lo) * self.d[n]
        return xpart + (hi / (1.0 + n * hi) - lo / (1.0 + n * lo))


def w_eval(fam: VerticalMapFamily, n: int, x: float, y: float) -> float:
    return fam.evaluate(n, x, y)


@dataclass(frozen=True)
class MapSystem:
    """The complete truncated map system with its contraction data.

    sup_ln approximates sup over n >= 1 of L_n (attained within the probe
    window for decaying gap sequences); L is the max of |c_n| over
    n = 1..depth+1, checked not to be exceeded in the probe window.  theta is
    the metric weight (1 - sup_ln) / (2 (L + 1)).
    """

    sys: CountableDataSystem
    l: tuple
    W: VerticalMapFamily
    sup_ln: float
    L: float
    theta: float

    @property
    def y_eval(self) -> tuple[float, float]:
        return self.W.y_eval

    @property
    def family(self) -> str:
        return self.W.kind

    def subinterval_map(self, n: int) -> SubintervalMap:
        if not (1 <= n <= self.sys.depth):
            raise IndexError(f"subinterval index {n} outside 1..{self.sys.depth}")
        return self.l[n - 1]

    def f_eval(self, n: int, p: Point2) -> Point2:
        """The point map f_n(x, y) = (l_n(x), W_n(x, y))."""
        ln = self.subinterval_map(n)
        return Point2(ln(p.x), self.W.evaluate(n, p.x, p.y))


def f_eval(ms: MapSystem, n: int, p: Point2) -> Point2:
    return ms.f_eval(n, p)


def compute_theta(sup_ln: float, L: float) -> float:
    """theta = (1 - sup L_n) / (2 (L + 1)), asserted to lie in (0, 1)."""
    if not (0.0 <= sup_ln < 1.0):
        raise ValidationError(f"sup L_n must lie in [0,1), got {sup_ln}")
    if not (math.isfinite(L) and L >= 0.0):
        raise ValidationError(f"L must be a finite nonnegative real, got {L}")
    theta = (1.0 - sup_ln) / (2.0 * (L + 1.0))
    if not (0.0 < theta < 1.0):
        raise ValidationError(f"theta = {theta} outside (0,1)")
    return theta


def _stable_y_interval(kind, sys, c, g, d, n_hi) -> tuple[float, float]:
    """Smallest interval containing Y that every W_n (n <= n_hi) maps into
    itself, found by iterating the exact per-map range bounds.

    The y-coefficient of every range bound is < 1 (d_n for family A, the
    hyperbolic slope for family B), so the iteration contracts; failure to
    stabilize means the family is misconfigured.
    """
    lo, hi = sys.y_lo, sys.y_hi
    span0 = hi - lo
    ns = np.arange(1, n_hi + 1)
    cx_hi = np.maximum(c[1:n_hi + 1] * sys.a, c[1:n_hi + 1] * sys.b)
    cx_lo = np.minimum(c[1:n_hi + 1] * sys.a, c[1:n_hi + 1] * sys.b)
    for _ in range(200):
        if kind == "A":
            ymax = cx_hi + d[1:n_hi + 1] * hi + g[1:n_hi + 1]
            ymin = cx_lo + d[1:n_hi + 1] * lo + g[1:n_hi + 1]
        else:
            ymax = cx_hi + hi / (1.0 + ns * hi) + g[1:n_hi + 1]
            ymin = cx_lo + lo / (1.0 + ns * lo) + g[1:n_hi + 1]
        new_lo = min(lo, float(ymin.min()))
        new_hi = max(hi, float(ymax.max()))
        if kind == "B" and new_lo < -1e-12:
            raise RangeViolationError(
                "family B requires a y-interval inside [0, inf) but the maps "
                f"reach down to {new_lo}; the family is misconfigured")
        if new_hi - new_lo > 100.0 * span0:
            raise RangeViolationError(
                "the vertical maps do not stabilize any bounded y-interval; "
                "the family is misconfigured")
        if abs(new_lo - lo) <= 1e-13 and abs(new_hi - hi) <= 1e-13:
            return new_lo, new_hi
        lo, hi = new_lo, new_hi
    raise RangeViolationError("y-interval enlargement did not converge")


def build_map_system(sys: CountableDataSystem, family: str = "A",
                     d_spec: SequenceSpec | None = None,
                     relax_tail_decay: bool = False) -> MapSystem:
    """Build the map system for a data system and one of the two families.

    Family A takes an optional d-sequence (default d_n = 2^-n); it must take
    values in [0,1) with sup < 1, and its declared limit must be 0 so the
    image diameters shrink (``relax_tail_decay=True`` lifts only the limit
    requirement, for contraction experiments that do not need a tail).
    Family B requires Y inside [0, inf).
    """
    if family not in ("A", "B"):
        raise ValidationError(f"family must be 'A' or 'B', got {family!r}")
    N = sys.depth
    a, b, m, M = sys.a, sys.b, sys.m, sys.M
    span = b - a

    def reachable(spec, lo_idx=0):
        # largest index <= N + PROBE_WINDOW the generator can produce
        hi = N + PROBE_WINDOW
        while hi > N:
            try:
                spec.values(np.arange(lo_idx, hi + 1))
                return hi
            except IndexError:
                hi = N + 1 if hi > N + 1 else N
        return hi

    n_max = min(reachable(sys.xs), reachable(sys.ys))
    if family == "A" and d_spec is not None:
        n_max = min(n_max, reachable(d_spec, lo_idx=1))
    ns = np.arange(0, n_max + 1)
    yv = sys.ys.values(ns)

    c = np.zeros(n_max + 1)
    g = np.zeros(n_max + 1)
    d = np.zeros(n_max + 1)
    nn = ns[1:]
    if family == "A":
        if d_spec is None:
            d_spec = SequenceSpec.geometric(0.5, 1.0, 0.0)
        dv = d_spec.values(nn)
        if (dv < 0.0).any() or (dv >= 1.0).any():
            i = int(np.argmax((dv < 0.0) | (dv >= 1.0)))
            raise ValidationError(
                f"family A needs d_n in [0,1); d_{i + 1} = {dv[i]:.17g}")
        if not (0.0 <= d_spec.declared_limit < 1.0):
            raise ValidationError(
                f"family A d-sequence limit {d_spec.declared_limit} outside [0,1)")
        if d_spec.declared_limit != 0.0 and not relax_tail_decay:
            raise ValidationError(
                "family A needs d_n -> 0 for the image diameters to shrink; "
                "pass relax_tail_decay=True to build without a usable tail")
        d[1:] = dv
        c[1:] = (yv[1:] - yv[:-1]) / span - dv * (M - m) / span
        g[1:] = (b * yv[:-1] - a * yv[1:]) / span - dv * (b * m - a * M) / span
        sup_d = max(float(dv.max()), float(d_spec.declared_limit))
        if sup_d >= 1.0:
            raise ValidationError(f"sup d_n = {sup_d} must stay below 1")
        phi = ComparisonFunction.banach(sup_d)
    else:
        if d_spec is not None:
            raise ValidationError("family B takes no d-sequence")
        if sys.y_lo < -1e-12:
            raise RangeViolationError(
                f"family B requires Y inside [0, inf); got y_lo = {sys.y_lo}")
        c[1:] = (yv[1:] - yv[:-1]) / span \
            - (M / (1.0 + nn * M) - m / (1.0 + nn * m)) / span
        g[1:] = yv[:-1] - a * (yv[1:] - yv[:-1]) / span \
            + (a / span) * M / (1.0 + nn * M) - (b / span) * m / (1.0 + nn * m)
        phi = ComparisonFunction.rakotch_hyperbolic()

    # slopes L_n over the probe range; sup must stay below 1
    xv = sys.xs.values(np.arange(0, n_max + 1))
    slopes_all = np.diff(xv) / span
    sup_ln = float(slopes_all.max())
    if sup_ln >= 1.0:
        raise ValidationError(f"sup L_n = {sup_ln} must stay below 1")

    # L = sup |c_n|, realised as the max over n = 1..N+1 and checked against
    # the probe window (boundedness for arbitrary custom sequences is the
    # caller's obligation)
    upto = min(N + 1, n_max)
    L = float(np.abs(c[1:upto + 1]).max())
    if n_max > upto:
        probe_max = float(np.abs(c[upto + 1:]).max())
        if probe_max > L * (1.0 + 1e-12) + 1e-15:
            raise ValidationError(
                f"|c_n| keeps growing past the truncation depth "
                f"({probe_max:.6g} > {L:.6g}); increase the depth")

    theta = compute_theta(sup_ln, L)
    y_eval = _stable_y_interval(family, sys, c, g, d, n_max)

    W = VerticalMapFamily(family, c, g, d, phi, sys, y_eval, d_spec)
    lmaps = tuple(
        SubintervalMap(n=n, slope=(sys.node_x[n] - sys.node_x[n - 1]) / span,
                       intercept=(b * sys.node_x[n - 1] - a * sys.node_x[n]) / span,
                       a=a, b=b)
        for n in range(1, N + 1))
    for lm in lmaps:
        if not (0.0 < lm.slope < 1.0):
            raise ValidationError(f"subinterval {lm.n} has slope {lm.slope} outside (0,1)")
    return MapSystem(sys=sys, l=lmaps, W=W, sup_ln=sup_ln, L=L, theta=theta)


# ---------------------------------------------------------------------------
# sampled contraction certificate for the point maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MapContractionReport:
    """Result of sweeping d_theta(f_n p, f_n q) <= psi(d_theta(p, q)).

    psi(t) = t * max(sup_ln + theta*(L+1), phi(t)/t).  worst_ratio is the
    largest observed lhs/psi; any sample exceeding 1 + slack/psi counts as a
    violation.  status mirrors the phi certificate: "inconclusive" when a
    custom phi fails its own sampled monotonicity precondition.
    """

    status: str
    n_pairs: int
    n_skipped: int
    n_violations: int
    worst_ratio: float
    slack: float
    theta: float
    sup_ln: float
    L: float
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class NonBanachWitness:
    """A sampled y-pair whose vertical-map difference ratio approaches 1.

    For family B the ratio |W_n(x,y) - W_n(x,y')| / |y - y'| equals
    1/((1+n*y)(1+n*y')), which tends to 1 as y, y' -> 0: no uniform factor
    below 1 exists, so the family is not a Banach contraction in y even
    though the contraction certificate passes.
    """

    ratio: float
    n: int
    y: float
    y_prime: float
    found: bool


def non_banach_witness(ms: MapSystem, n: int = 1,
                       threshold: float = 0.999) -> NonBanachWitness:
    """Search small y-pairs for a difference ratio >= threshold."""
    x = ms.sys.a
    ys = np.geomspace(1e-9, max(ms.y_eval[1], 1e-6), 400)
    ys = ys[ys <= ms.y_eval[1]]
    w = ms.W.evaluate_array(n, np.full(ys.size, x), ys)
    ratios = np.abs(np.diff(w)) / np.diff(ys)
    i = int(np.argmax(ratios))
    best = float(ratios[i])
    return NonBanachWitness(ratio=best, n=n, y=float(ys[i]),
                            y_prime=float(ys[i + 1]), found=best >= threshold)


def sample_point_pairs(ms: MapSystem, count: int, seed: int = 42) -> np.ndarray:
    """Seeded uniform point pairs in [a,b] x Y_eval, shape (count, 2, 2)."""
    rng = np.random.default_rng(seed)
    lo, hi = ms.y_eval
    pts = rng.uniform(size=(count, 2, 2))
    pts[:, :, 0] = ms.sys.a + (ms.sys.b - ms.sys.a) * pts[:, :, 0]
    pts[:, :, 1] = lo + (hi - lo) * pts[:, :, 1]
    return pts


def rakotch_certificate(ms: MapSystem, pairs, slack: float = 1e-10,
                        seed: int | None = None) -> MapContractionReport:
    """Verify the sampled contraction inequality for every pair and every
    n = 1..depth.  Degenerate pairs (p = q) are skipped: the ratio function
    is only defined for distinct points.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[1:] != (2, 2):
        raise InvalidInputError("pairs must have shape (k, 2, 2)")

    status = "pass"
    if ms.W.phi.kind == "custom":
        probe = certify_rakotch(ms.W.phi, np.geomspace(1e-6, 10.0, 40))
        if not probe.alpha_nonincreasing:
            status = "inconclusive"

    p, q = arr[:, 0, :], arr[:, 1, :]
    t = np.abs(p[:, 0] - q[:, 0]) + ms.theta * np.abs(p[:, 1] - q[:, 1])
    keep = t > 0.0
    n_skipped = int((~keep).sum())
    p, q, t = p[keep], q[keep], t[keep]

    branch = ms.sup_ln + ms.theta * (ms.L + 1.0)
    phi_t = np.asarray(ms.W.phi(t), dtype=float)
    psi = t * np.maximum(branch, phi_t / t)

    worst = 0.0
    violations = 0
    N = ms.sys.depth
    for n in range(1, N + 1):
        ln = ms.l[n - 1]
        lhs = (np.abs(ln.slope * (p[:, 0] - q[:, 0]))
               + ms.theta * np.abs(ms.W.evaluate_array(n, p[:, 0], p[:, 1])
                                   - ms.W.evaluate_array(n, q[:, 0], q[:, 1])))
        ratio = lhs / psi
        worst = max(worst, float(ratio.max()) if ratio.size else 0.0)
        violations += int((lhs > psi + slack).sum())

    if status == "pass" and violations > 0:
        status = "fail"
    return MapContractionReport(
        status=status, n_pairs=int(arr.shape[0]), n_skipped=n_skipped,
        n_violations=violations, worst_ratio=worst, slack=slack,
        theta=ms.theta, sup_ln=ms.sup_ln, L=ms.L, seed=seed)
