"""Exact event-driven simulation of nested mutation spread.

Each mutation type j has an independent Poisson candidate stream of temporal
rate N * mu_j with uniform locations on the torus.  A candidate of type j at
(x, t) is accepted exactly when the current level of x is j - 1; accepted
events grow closed balls at radial rate alpha forever.  The simulator
advances the globally earliest pending candidate, so acceptance decisions
are made against a complete event history and the sampled passage times are
exact draws from the model, not approximations.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import Ball, TorusPoint, covered_level, torus_distance, union_volume, wrapped_sq_dists
from .rng import PURPOSE_LOCATIONS, PURPOSE_TIMES, PURPOSE_VOLUME, substream

_REL_TOL_N = 1e-12

# Candidate arrival times are drawn in blocks of this size; the value only
# affects speed, never the sampled sequence.
_TIME_BLOCK = 512
_SKIP_BLOCK = 8192


@dataclass(frozen=True)
class ModelParams:
    """Model parameters on the torus [0, L)^d with N = L**d sites of volume."""

    d: int
    L: float
    alpha: float
    mu: Tuple[float, ...]
    K: int
    N: float

    def __init__(self, d, L, alpha, mu, K=None, N=None):
        if d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
        if L <= 0:
            raise ValueError(f"L must be positive, got {L}")
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        mu = tuple(float(m) for m in mu)
        if not mu:
            raise ValueError("at least one mutation rate is required")
        if any(m <= 0 for m in mu):
            raise ValueError(f"mutation rates must be positive, got {mu}")
        if K is None:
            K = len(mu)
        if K < 1:
            raise ValueError(f"K must be at least 1, got {K}")
        if len(mu) < K:
            raise ValueError(f"need {K} mutation rates, got {len(mu)}")
        expected_N = float(L) ** d
        if N is None:
            N = expected_N
        elif abs(N - expected_N) > _REL_TOL_N * max(abs(N), expected_N):
            raise ValueError(f"N={N} inconsistent with L**d={expected_N}")
        if any(mu[i] > mu[i + 1] for i in range(K - 1)):
            warnings.warn("mutation rates are not nondecreasing; the model "
                          "targets increasing rates", stacklevel=2)
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "L", float(L))
        object.__setattr__(self, "alpha", float(alpha))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "K", int(K))
        object.__setattr__(self, "N", float(N))


@dataclass(frozen=True)
class Guards:
    """Resource limits for one replicate."""

    max_events: int = 10_000_000
    max_time: float = 1e6

    def __post_init__(self):
        if self.max_events <= 0:
            raise ValueError(f"max_events must be positive, got {self.max_events}")
        if self.max_time <= 0:
            raise ValueError(f"max_time must be positive, got {self.max_time}")


@dataclass(frozen=True)
class MutationEvent:
    mtype: int
    time: float
    origin: TorusPoint
    accepted: bool


@dataclass(frozen=True)
class CandidateCounts:
    generated: int
    accepted: int
    rejected: int


@dataclass(frozen=True)
class PassageRecord:
    """Observables of one replicate, stopped at the first type-K acceptance.

    sigma2[j-1] is the first post-sigma_j type-j candidate landing at level
    >= j - 1 (the point whose arrival leaves the evolution unchanged yet
    breaks the single-nested-ball picture); entries not observed by sigma_K
    hold sigma_K and are flagged censored.
    """

    sigma: Tuple[float, ...]
    sigma2: Tuple[float, ...]
    sigma2_censored: Tuple[bool, ...]
    first_locations: Tuple[TorusPoint, ...]
    distances: Dict[Tuple[int, int], float]
    candidate_counts: Tuple[CandidateCounts, ...]
    seed: int
    replicate_index: int


class ResourceLimitError(RuntimeError):
    """A guard tripped before the replicate finished."""

    def __init__(self, message, counts):
        super().__init__(message)
        self.counts = counts


def accept_candidate(candidate: MutationEvent, log: Sequence[MutationEvent],
                     alpha: float) -> bool:
    """True iff the candidate lands exactly on level mtype - 1."""
    for ev in log:
        if ev.accepted and ev.time > candidate.time:
            raise ValueError("candidate time precedes an accepted event in the log")
    level = covered_level(candidate.origin, candidate.time, log, alpha)
    return level == candidate.mtype - 1


class _TypeState:
    """Per-type candidate stream and accepted-event storage."""

    __slots__ = ("rate", "time_gen", "loc_gen", "last_time", "times_buf",
                 "times_pos", "locs_buf", "locs_pos", "pending_time",
                 "acc_times", "acc_coords", "acc_count", "generated",
                 "accepted", "rejected", "active")

    def __init__(self, rate, time_gen, loc_gen, d):
        self.rate = rate
        self.time_gen = time_gen
        self.loc_gen = loc_gen
        self.last_time = 0.0
        self.times_buf = None
        self.times_pos = 0
        self.locs_buf = None
        self.locs_pos = 0
        self.pending_time = None
        self.acc_times = np.empty(64)
        self.acc_coords = np.empty((64, d))
        self.acc_count = 0
        self.generated = 0
        self.accepted = 0
        self.rejected = 0
        self.active = False

    def _refill_times(self, block):
        incs = self.time_gen.standard_exponential(block) / self.rate
        self.times_buf = self.last_time + np.cumsum(incs)
        self.last_time = float(self.times_buf[-1])
        self.times_pos = 0

    def next_arrival(self) -> float:
        if self.times_buf is None or self.times_pos >= len(self.times_buf):
            self._refill_times(_TIME_BLOCK)
        t = float(self.times_buf[self.times_pos])
        self.times_pos += 1
        return t

    def next_location(self, d, L) -> np.ndarray:
        if self.locs_buf is None or self.locs_pos >= len(self.locs_buf):
            self.locs_buf = self.loc_gen.random((_TIME_BLOCK, d)) * L
            self.locs_pos = 0
        x = self.locs_buf[self.locs_pos]
        self.locs_pos += 1
        return x

    def skip_until(self, horizon: float, budget: int) -> int:
        """Discard arrivals at times < horizon, returning how many were skipped.

        Used at activation: candidates of type j arriving before the first
        type j-1 acceptance are rejected regardless of location, so only
        their count matters.  Leaves pending_time at the first arrival at or
        after the horizon.
        """
        skipped = 0
        while True:
            if self.times_buf is None or self.times_pos >= len(self.times_buf):
                self._refill_times(_SKIP_BLOCK)
            buf = self.times_buf[self.times_pos:]
            idx = int(np.searchsorted(buf, horizon, side="left"))
            skipped += idx
            if skipped > budget:
                self.times_pos += idx
                return skipped
            if idx < len(buf):
                self.pending_time = float(buf[idx])
                self.times_pos += idx + 1
                return skipped
            self.times_pos = len(self.times_buf)

    def store_accepted(self, t, x):
        if self.acc_count == len(self.acc_times):
            self.acc_times = np.concatenate([self.acc_times, np.empty_like(self.acc_times)])
            self.acc_coords = np.concatenate([self.acc_coords, np.empty_like(self.acc_coords)])
        self.acc_times[self.acc_count] = t
        self.acc_coords[self.acc_count] = x
        self.acc_count += 1

    def covers(self, x, t, alpha, L) -> bool:
        n = self.acc_count
        if n == 0:
            return False
        sq = wrapped_sq_dists(x, self.acc_coords[:n], L)
        radius = alpha * (t - self.acc_times[:n])
        return bool((sq <= radius * radius).any())


class _Simulation:
    def __init__(self, params: ModelParams, seed: int, guards: Guards,
                 replicate_index: int):
        self.params = params
        self.seed = int(seed)
        self.guards = guards
        self.replicate_index = int(replicate_index)
        self.types: List[_TypeState] = []
        for j in range(1, params.K + 1):
            state = _TypeState(
                rate=params.N * params.mu[j - 1],
                time_gen=substream(seed, replicate_index, j, PURPOSE_TIMES),
                loc_gen=substream(seed, replicate_index, j, PURPOSE_LOCATIONS),
                d=params.d,
            )
            self.types.append(state)
        self.sigma = [None] * params.K
        self.sigma2 = [None] * params.K
        self.first_locations = [None] * params.K
        self.total_generated = 0
        self.types[0].active = True
        self.types[0].pending_time = self.types[0].next_arrival()

    def _counts(self):
        return tuple(CandidateCounts(s.generated, s.accepted, s.rejected)
                     for s in self.types)

    def _check_budget(self):
        if self.total_generated > self.guards.max_events:
            raise ResourceLimitError(
                f"candidate budget of {self.guards.max_events} events exhausted",
                self._counts())

    def _level(self, x, t) -> int:
        # Level sets are nested, so scanning types upward until the first
        # uncovered one yields the maximum covering type.
        level = 0
        alpha = self.params.alpha
        L = self.params.L
        for j, state in enumerate(self.types, start=1):
            if state.covers(x, t, alpha, L):
                level = j
            else:
                break
        return level

    def _activate(self, j: int, horizon: float):
        state = self.types[j - 1]
        state.active = True
        budget = self.guards.max_events - self.total_generated
        skipped = state.skip_until(horizon, budget)
        state.generated += skipped
        state.rejected += skipped
        self.total_generated += skipped
        self._check_budget()

    def run(self, stop_at_sigma_k: bool = True,
            horizon: Optional[float] = None) -> None:
        params = self.params
        guards = self.guards
        types = self.types
        K = params.K
        while True:
            jstar = -1
            tstar = math.inf
            for idx, state in enumerate(types):
                if state.active and state.pending_time < tstar:
                    tstar = state.pending_time
                    jstar = idx
            if horizon is not None and tstar > horizon:
                return
            if tstar > guards.max_time:
                raise ResourceLimitError(
                    f"simulation time {tstar} exceeds guard {guards.max_time}",
                    self._counts())
            state = types[jstar]
            j = jstar + 1
            x = state.next_location(params.d, params.L)
            state.pending_time = state.next_arrival()
            state.generated += 1
            self.total_generated += 1
            self._check_budget()

            level = self._level(x, tstar)
            if level == j - 1:
                state.store_accepted(tstar, x)
                state.accepted += 1
                if self.sigma[j - 1] is None:
                    self.sigma[j - 1] = tstar
                    self.first_locations[j - 1] = TorusPoint(tuple(x), params.L)
                    if j < K:
                        self._activate(j + 1, tstar)
                    elif stop_at_sigma_k:
                        return
                elif self.sigma2[j - 1] is None:
                    self.sigma2[j - 1] = tstar
            else:
                state.rejected += 1
                if (self.sigma[j - 1] is not None and self.sigma2[j - 1] is None
                        and level >= j - 1):
                    self.sigma2[j - 1] = tstar

    def record(self) -> PassageRecord:
        params = self.params
        K = params.K
        if any(s is None for s in self.sigma):
            raise RuntimeError("record requested before sigma_K was reached")
        sigma_k = self.sigma[K - 1]
        sigma2 = []
        censored = []
        for j in range(K - 1):
            if self.sigma2[j] is None:
                sigma2.append(sigma_k)
                censored.append(True)
            else:
                sigma2.append(self.sigma2[j])
                censored.append(False)
        distances = {}
        for i in range(1, K + 1):
            for j in range(i + 1, K + 1):
                distances[(i, j)] = torus_distance(self.first_locations[i - 1],
                                                   self.first_locations[j - 1])
        return PassageRecord(
            sigma=tuple(self.sigma),
            sigma2=tuple(sigma2),
            sigma2_censored=tuple(censored),
            first_locations=tuple(self.first_locations),
            distances=distances,
            candidate_counts=self._counts(),
            seed=self.seed,
            replicate_index=self.replicate_index,
        )


def simulate_replicate(params: ModelParams, seed: int,
                       guards: Guards = Guards(),
                       replicate_index: int = 0) -> PassageRecord:
    """Run one replicate to the first type-K acceptance.

    The result is a deterministic function of (params, seed, guards,
    replicate_index).  Raises ResourceLimitError with partial candidate
    counts if a guard trips first.
    """
    sim = _Simulation(params, seed, guards, replicate_index)
    sim.run(stop_at_sigma_k=True)
    return sim.record()


def replicate_event_log(params: ModelParams, seed: int,
                        guards: Guards = Guards(),
                        replicate_index: int = 0):
    """Run one replicate and return (record, accepted events sorted by time).

    Identical dynamics to simulate_replicate; the log carries every accepted
    mutation event, which is what figure generators need.
    """
    sim = _Simulation(params, seed, guards, replicate_index)
    sim.run(stop_at_sigma_k=True)
    events = []
    for j, state in enumerate(sim.types, start=1):
        for i in range(state.acc_count):
            events.append(MutationEvent(
                mtype=j,
                time=float(state.acc_times[i]),
                origin=TorusPoint(tuple(state.acc_coords[i]), params.L),
                accepted=True,
            ))
    events.sort(key=lambda ev: ev.time)
    return sim.record(), events


def volume_snapshot(params: ModelParams, seed: int, times: Sequence[float],
                    level: int, guards: Guards = Guards(),
                    replicate_index: int = 0, mc_points: int = 65536) -> List[Tuple[float, float, float]]:
    """Occupied volume Y_level(t) for one replicate at the requested times.

    The replicate keeps running until max(times) rather than stopping at
    sigma_K.  Volumes are exact in d=1 (arc merge) and hit-or-miss Monte
    Carlo estimates otherwise; each entry is (t, estimate, half_width).
    """
    if level < 1 or level > params.K:
        raise ValueError(f"level must be in 1..{params.K}, got {level}")
    times = [float(t) for t in times]
    if any(t < 0 for t in times):
        raise ValueError("snapshot times must be nonnegative")
    sim = _Simulation(params, seed, guards, replicate_index)
    horizon = max(times) if times else 0.0
    sim.run(stop_at_sigma_k=False, horizon=horizon)
    state = sim.types[level - 1]
    out = []
    vol_seed_gen = substream(seed, replicate_index, level, PURPOSE_VOLUME)
    for t in times:
        n = int(np.searchsorted(state.acc_times[:state.acc_count], t, side="right"))
        balls = [Ball(TorusPoint(tuple(state.acc_coords[i]), params.L),
                      params.alpha * (t - state.acc_times[i]))
                 for i in range(n)]
        if params.d == 1:
            est, hw = union_volume(balls, method="exact-1d")
        else:
            mc_seed = int(vol_seed_gen.integers(0, 2 ** 63))
            est, hw = union_volume(balls, method="monte-carlo", n=mc_points,
                                   seed=mc_seed)
        out.append((t, est, hw))
    return out
