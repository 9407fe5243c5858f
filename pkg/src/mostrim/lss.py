"""Lightweight scheduler sampling for probabilistic automata.

Schedulers are drawn uniformly by keying a counter-based random stream on
(master seed, scheduler index, state id), so a scheduler is carried around
as a couple of integers and materialized lazily per visited state.  Each
sampled scheduler's safety probability is estimated from Monte Carlo traces
sized by the additive Hoeffding bound, and the minimum over schedulers is
reported.  An exact-solve mode swaps trace estimation for the linear-system
solve, isolating scheduler-sampling effects from estimation noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import pmc
from .pa import PA, ActionLabel, count_schedulers, enabled_actions, enumerate_schedulers
from .pmc import SafetyProperty
from .rng import SCHEDULER_TAG, TRACE_TAG, CounterStream, KeyedStreams

DEFAULT_HORIZON = 10 ** 4
FSD_SLACK = 1e-12


def sample_size(epsilon: float, delta: float) -> int:
    """Trace count guaranteeing P(|estimate - p| > epsilon) <= delta."""
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    return math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon))


class SeededScheduler:
    """Uniform random scheduler identified by (master seed, index).

    The choice at each state is an independent uniform draw over the
    enabled actions, keyed by the state id, which makes the induced
    distribution over memoryless schedulers exactly uniform.
    """

    __slots__ = ("pa", "master_seed", "index")

    def __init__(self, pa: PA, master_seed: int, index: int):
        self.pa = pa
        self.master_seed = master_seed
        self.index = index

    def __getitem__(self, state: int) -> ActionLabel:
        menu = enabled_actions(self.pa, state)
        if not menu:
            raise KeyError(state)
        stream = CounterStream(self.master_seed, SCHEDULER_TAG, self.index, state)
        return menu[stream.randint_below(len(menu))]


class ProjectedScheduler:
    """Scheduler forced to fixed actions at trimmed states, else delegating."""

    __slots__ = ("base", "forced")

    def __init__(self, base, forced: dict[int, ActionLabel]):
        self.base = base
        self.forced = forced

    def __getitem__(self, state: int) -> ActionLabel:
        if state in self.forced:
            return self.forced[state]
        return self.base[state]


def sample_scheduler(m: PA, index: int, master_seed: int = 0) -> SeededScheduler:
    return SeededScheduler(m, master_seed, index)


def _trace_satisfies(m: PA, sigma, prop: SafetyProperty, stream: CounterStream,
                     horizon: int) -> bool:
    """Walk one trace under ``sigma``; True when no bad label is seen.

    Bounded invariants inspect exactly the first ``prop.horizon`` steps; a
    walk truncated by the step cap without violation counts as satisfied,
    matching the invariant's finite-falsifiability semantics.
    """
    steps = horizon if prop.horizon is None else min(prop.horizon, horizon)
    s = m.initial
    if prop.bad_label in m.labels[s]:
        return False
    for _ in range(steps):
        if m.is_terminal(s):
            return True
        dist = m.distribution(s, sigma[s])
        s = dist.sample(stream.uniform())
        if prop.bad_label in m.labels[s]:
            return False
    return True


def estimate_prob(m: PA, sigma, prop: SafetyProperty, epsilon: float, delta: float,
                  streams: KeyedStreams, horizon: int = DEFAULT_HORIZON) -> float:
    """Monte Carlo estimate of the satisfaction probability under ``sigma``.

    Runs ceil(ln(2/delta) / (2 epsilon^2)) Bernoulli trials, one counter
    stream per trace, and returns the mean.
    """
    n = sample_size(epsilon, delta)
    hits = 0
    for i in range(n):
        if _trace_satisfies(m, sigma, prop, streams.stream(i), horizon):
            hits += 1
    return hits / n


@dataclass(frozen=True)
class LssConfig:
    n: int = 10
    epsilon: float = 0.05
    delta: float = 0.2
    master_seed: int = 0
    horizon: int = DEFAULT_HORIZON

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < self.epsilon < 1 or not 0 < self.delta < 1:
            raise ValueError("epsilon and delta must lie in (0, 1)")


@dataclass(frozen=True)
class LssResult:
    estimates: tuple[float, ...]
    minimum: float
    traces_per_scheduler: int
    seeds: tuple[int, ...]
    master_seed: int
    exact: bool
    exhaustive: bool = False

    def to_json_obj(self) -> dict:
        return {
            "estimates": list(self.estimates),
            "minimum": self.minimum,
            "traces_per_scheduler": self.traces_per_scheduler,
            "seeds": list(self.seeds),
            "master_seed": self.master_seed,
            "exact": self.exact,
            "exhaustive": self.exhaustive,
        }


def _evaluate(m: PA, sigma, prop: SafetyProperty, cfg: LssConfig, seed_index: int,
              exact: bool) -> float:
    if exact:
        return pmc.prob_under_scheduler(m, sigma, prop)
    streams = KeyedStreams(cfg.master_seed, TRACE_TAG, seed_index)
    return estimate_prob(m, sigma, prop, cfg.epsilon, cfg.delta, streams, cfg.horizon)


def lss_min(m: PA, prop: SafetyProperty, cfg: LssConfig, exact: bool = False) -> LssResult:
    """Sample ``cfg.n`` schedulers, estimate each, return the minimum.

    Fully deterministic for a fixed config.  In exact mode with ``n`` at
    least the scheduler count, sampling is replaced by full enumeration so
    the result coincides with the model-checking minimum.
    """
    if exact and cfg.n >= count_schedulers(m):
        estimates = tuple(
            pmc.prob_under_scheduler(m, sigma, prop)
            for sigma in enumerate_schedulers(m))
        return LssResult(estimates, min(estimates), 0, tuple(range(len(estimates))),
                         cfg.master_seed, exact=True, exhaustive=True)

    traces = 0 if exact else sample_size(cfg.epsilon, cfg.delta)
    seeds = tuple(range(1, cfg.n + 1))
    estimates = tuple(
        _evaluate(m, sample_scheduler(m, i, cfg.master_seed), prop, cfg, i, exact)
        for i in seeds)
    return LssResult(estimates, min(estimates), traces, seeds, cfg.master_seed, exact)


def kept_actions(m_trimmed: PA, sources: Sequence[int]) -> dict[int, ActionLabel]:
    """Surviving action at each trimmed state (must be unique)."""
    forced = {}
    for s in sources:
        menu = enabled_actions(m_trimmed, s)
        if len(menu) != 1:
            raise ValueError(f"trimmed state {s} does not have a unique surviving action")
        forced[s] = menu[0]
    return forced


def coupled_lss(m: PA, m_trimmed: PA, trimmed_sources: Sequence[int],
                prop: SafetyProperty, cfg: LssConfig,
                exact: bool = False) -> tuple[LssResult, LssResult]:
    """Run sampling on a model and its trimmed version with coupled schedulers.

    Each scheduler drawn on the original model is projected onto the
    trimmed model by forcing the kept action at every trimmed state;
    per-seed trace randomness is shared between the two models.
    """
    forced = kept_actions(m_trimmed, trimmed_sources)
    for s, a in forced.items():
        if a not in enabled_actions(m, s):
            raise ValueError(f"kept action {a!r} at state {s} is not enabled in the original model")

    traces = 0 if exact else sample_size(cfg.epsilon, cfg.delta)
    seeds = tuple(range(1, cfg.n + 1))
    originals = []
    projected = []
    for i in seeds:
        sigma = sample_scheduler(m, i, cfg.master_seed)
        sigma_trim = ProjectedScheduler(sigma, forced)
        originals.append(_evaluate(m, sigma, prop, cfg, i, exact))
        projected.append(_evaluate(m_trimmed, sigma_trim, prop, cfg, i, exact))
    a = LssResult(tuple(originals), min(originals), traces, seeds, cfg.master_seed, exact)
    b = LssResult(tuple(projected), min(projected), traces, seeds, cfg.master_seed, exact)
    return a, b


@dataclass(frozen=True)
class FsdResult:
    dominates: bool
    max_gap: float


def fsd_check(samples_a: Sequence[float], samples_b: Sequence[float]) -> FsdResult:
    """First-order stochastic dominance of ``a`` over ``b`` (empirical CDFs).

    ``a`` dominates when its empirical CDF lies at or below ``b``'s at every
    pooled sample point; the largest (signed) exceedance is returned.
    """
    if not len(samples_a) or not len(samples_b):
        raise ValueError("both sample sets must be non-empty")
    a = np.sort(np.asarray(samples_a, dtype=float))
    b = np.sort(np.asarray(samples_b, dtype=float))
    points = np.union1d(a, b)
    fa = np.searchsorted(a, points, side="right") / a.size
    fb = np.searchsorted(b, points, side="right") / b.size
    gap = float(np.max(fa - fb))
    return FsdResult(dominates=gap <= FSD_SLACK, max_gap=gap)
