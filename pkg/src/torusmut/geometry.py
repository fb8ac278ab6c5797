"""Torus geometry: points, balls, coverage levels and union volumes.

The ambient space is the flat torus [0, L)^d with d in {1, 2, 3}.  Distances
use the minimum-image convention per coordinate, so the largest possible
separation is sqrt(d) * L / 2.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

import itertools

# Two-sided 99% normal quantile for Monte Carlo confidence half-widths.
_Z99 = 2.5758293035489004

_ALLOWED_DIMS = (1, 2, 3)


@dataclass(frozen=True)
class TorusPoint:
    """A point on [0, L)^d; coordinates are canonicalized modulo L."""

    coords: Tuple[float, ...]
    L: float

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"torus side length must be positive, got {self.L}")
        if len(self.coords) not in _ALLOWED_DIMS:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(self.coords)}")
        canonical = tuple(float(c) % self.L for c in self.coords)
        object.__setattr__(self, "coords", canonical)

    @property
    def d(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class Ball:
    """Closed metric ball on the torus."""

    center: TorusPoint
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"ball radius must be nonnegative, got {self.radius}")

    def contains(self, x: TorusPoint) -> bool:
        return torus_distance(self.center, x) <= self.radius


def torus_distance(x: TorusPoint, y: TorusPoint) -> float:
    """Minimum-image Euclidean distance between two torus points."""
    if x.d != y.d:
        raise ValueError(f"dimension mismatch: {x.d} vs {y.d}")
    if x.L != y.L:
        raise ValueError(f"torus size mismatch: {x.L} vs {y.L}")
    total = 0.0
    for a, b in zip(x.coords, y.coords):
        delta = abs(a - b)
        delta = min(delta, x.L - delta)
        total += delta * delta
    return math.sqrt(total)


def wrapped_sq_dists(point: np.ndarray, centers: np.ndarray, L: float) -> np.ndarray:
    """Squared minimum-image distances from one point to an (n, d) array of centers."""
    diff = np.abs(centers - point)
    np.minimum(diff, L - diff, out=diff)
    if diff.ndim == 1:
        return diff * diff
    return np.einsum("ij,ij->i", diff, diff)


def covered_level(x, t, log, alpha, index: Optional["GridIndex"] = None) -> int:
    """Mutation count of point x at time t against a log of events.

    The level is the largest j such that some accepted type-j event (y, s)
    in the log satisfies torus_distance(x, y) <= alpha * (t - s); it is 0
    when no accepted ball covers x.  Rejected events never contribute.  A
    grid index built for the same (log, t, alpha) snapshot may be supplied;
    it changes the lookup cost, never the answer.
    """
    if alpha <= 0:
        raise ValueError(f"growth rate must be positive, got {alpha}")
    if index is not None:
        events = (log[i] for i in index.query(x))
    else:
        events = iter(log)
    level = 0
    for ev in events:
        if not ev.accepted:
            continue
        if ev.time > t:
            raise ValueError(f"event at time {ev.time} lies after query time {t}")
        if ev.mtype <= level:
            continue
        if torus_distance(x, ev.origin) <= alpha * (t - ev.time):
            level = ev.mtype
    return level


class GridIndex:
    """Uniform-grid acceleration for coverage queries at a fixed time.

    Cells per axis m = ceil(L / cell_width), default cell_width = L / 16.
    Each cell lists the accepted events whose ball bounding box at time t
    touches the cell.  The index is immutable once built; queries return a
    superset of the covering events, and covered_level still performs the
    exact distance check.
    """

    def __init__(self, log: Sequence, t: float, alpha: float, L: float, d: int,
                 cell_width: Optional[float] = None):
        if d not in _ALLOWED_DIMS:
            raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
        if cell_width is None:
            cell_width = L / 16.0
        if cell_width <= 0:
            raise ValueError(f"cell width must be positive, got {cell_width}")
        self.t = t
        self.alpha = alpha
        self.L = L
        self.d = d
        self.m = int(math.ceil(L / cell_width))
        self.w = L / self.m
        self._cells = {}
        for i, ev in enumerate(log):
            if not ev.accepted:
                continue
            if ev.time > t:
                raise ValueError(f"event at time {ev.time} lies after index time {t}")
            radius = alpha * (t - ev.time)
            for cell in self._cells_touching(ev.origin.coords, radius):
                self._cells.setdefault(cell, []).append(i)

    def _axis_cells(self, center: float, radius: float) -> List[int]:
        if 2.0 * radius >= self.L:
            return list(range(self.m))
        lo = int(math.floor((center - radius) / self.w))
        hi = int(math.floor((center + radius) / self.w))
        seen = []
        for k in range(lo, hi + 1):
            cell = k % self.m
            if cell not in seen:
                seen.append(cell)
        return seen

    def _cells_touching(self, coords: Tuple[float, ...], radius: float):
        axes = [self._axis_cells(c, radius) for c in coords]
        return itertools.product(*axes)

    def cell_of(self, x) -> Tuple[int, ...]:
        return tuple(min(int(c / self.w), self.m - 1) for c in x.coords)

    def query(self, x) -> List[int]:
        """Indices into the log whose ball bounding box touches x's cell."""
        return self._cells.get(self.cell_of(x), [])


def _merged_arc_length(arcs: List[Tuple[float, float]]) -> float:
    """Total length of a union of [start, end] intervals (already unwrapped)."""
    arcs = sorted(arcs)
    total = 0.0
    cur_start, cur_end = arcs[0]
    for start, end in arcs[1:]:
        if start > cur_end:
            total += cur_end - cur_start
            cur_start, cur_end = start, end
        else:
            cur_end = max(cur_end, end)
    total += cur_end - cur_start
    return total


def _exact_union_1d(balls: Sequence[Ball], L: float) -> float:
    arcs = []
    for ball in balls:
        if 2.0 * ball.radius >= L:
            return L
        if ball.radius == 0.0:
            continue
        start = (ball.center.coords[0] - ball.radius) % L
        end = start + 2.0 * ball.radius
        if end <= L:
            arcs.append((start, end))
        else:
            arcs.append((start, L))
            arcs.append((0.0, end - L))
    if not arcs:
        return 0.0
    return _merged_arc_length(arcs)


def union_volume(balls: Sequence[Ball], method: str = "exact-1d",
                 n: int = 65536, seed: int = 0,
                 stratified: bool = True) -> Tuple[float, float]:
    """Volume of a union of torus balls with an error bound.

    exact-1d merges wrapped arcs and returns (length, 0.0); it rejects
    dimensions other than 1.  monte-carlo uses hit-or-miss sampling over
    the torus (stratified jittered grid by default, plain uniform when
    stratified=False) and returns the estimate with its 99% binomial
    confidence half-width.  If any ball radius reaches sqrt(d) * L / 2 the
    whole torus is covered and (L**d, 0.0) is returned exactly.
    """
    if not balls:
        return 0.0, 0.0
    L = balls[0].center.L
    d = balls[0].center.d
    for ball in balls:
        if ball.center.L != L or ball.center.d != d:
            raise ValueError("all balls must live on the same torus")
    N = float(L) ** d
    max_dist = math.sqrt(d) * L / 2.0
    if any(ball.radius >= max_dist for ball in balls):
        return N, 0.0

    if method == "exact-1d":
        if d != 1:
            raise ValueError(f"exact-1d supports d=1 only, got d={d}")
        return _exact_union_1d(balls, L), 0.0

    if method != "monte-carlo":
        raise ValueError(f"unknown union-volume method {method!r}")
    if n <= 0:
        raise ValueError(f"sample count must be positive, got {n}")

    rng = np.random.Generator(np.random.Philox(key=np.array(
        [int(seed) & ((1 << 64) - 1), 0x756E696F6E], dtype=np.uint64)))
    if stratified:
        g = int(math.ceil(n ** (1.0 / d)))
        n_eff = g ** d
        cell = L / g
        grid_axes = np.meshgrid(*[np.arange(g) for _ in range(d)], indexing="ij")
        base = np.stack([axis.ravel() for axis in grid_axes], axis=1).astype(float)
        points = (base + rng.random((n_eff, d))) * cell
    else:
        n_eff = int(n)
        points = rng.random((n_eff, d)) * L

    hit = np.zeros(n_eff, dtype=bool)
    for ball in balls:
        center = np.asarray(ball.center.coords)
        diff = np.abs(points - center)
        np.minimum(diff, L - diff, out=diff)
        sq = np.einsum("ij,ij->i", diff, diff)
        hit |= sq <= ball.radius * ball.radius
    p = hit.mean()
    estimate = p * N
    half_width = _Z99 * math.sqrt(p * (1.0 - p) / n_eff) * N
    return estimate, half_width
