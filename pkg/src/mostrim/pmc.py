"""Exact probabilistic model checking of invariant safety properties.

A safety property is "never reach a bad-labeled state", optionally within a
step bound.  Minimum/maximum satisfaction probability over all schedulers is
computed by value iteration on the reach-bad objective; per-scheduler
probabilities solve the induced chain's hitting-probability linear system
(unbounded) or run backward induction (bounded).
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .pa import PA, Dtmc, ModelError, apply_scheduler, enumerate_schedulers

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10 ** 6
MIN_SCHEDULER_TIE_TOL = 1e-9


class NonConvergence(ModelError):
    """Value iteration hit the sweep cap before reaching the tolerance."""


@dataclass(frozen=True)
class SafetyProperty:
    """Invariant "never see ``bad_label``", optionally within ``horizon`` steps."""

    bad_label: str
    horizon: int | None = None

    @property
    def bounded(self) -> bool:
        return self.horizon is not None


@dataclass(frozen=True)
class CheckResult:
    probability: float
    iterations: int
    residual: float
    wall_time_s: float


def bad_states(m: PA, prop: SafetyProperty) -> frozenset[int]:
    return frozenset(s for s in m.states if prop.bad_label in m.labels[s])


def make_bad_absorbing(m: PA, prop: SafetyProperty) -> PA:
    """Drop outgoing transitions of bad states so they are sinks.

    Satisfaction of the invariant is unchanged: paths are censored only
    after the property is already falsified.
    """
    bad = bad_states(m, prop)
    kept = tuple(t for t in m.transitions if t[0] not in bad)
    if len(kept) == len(m.transitions):
        return m
    log.warning("rewrote %d transition(s) out of bad states to make them absorbing",
                len(m.transitions) - len(kept))
    return replace(m, transitions=kept)


def _vi_iterates(m: PA, bad: frozenset[int], maximize: bool) -> Iterator[tuple[dict[int, float], float]]:
    """Value-iteration sweeps for the reach-bad probability, from below.

    Yields (values, sup-norm residual) after each sweep over the reachable
    states; iterates are monotone non-decreasing.
    """
    states = m.reachable
    x = {s: (1.0 if s in bad else 0.0) for s in states}
    pick = max if maximize else min
    while True:
        residual = 0.0
        nxt = {}
        for s in states:
            if s in bad or m.is_terminal(s):
                nxt[s] = x[s]
                continue
            best = pick(
                sum(p * x[t] for t, p in dist.support)
                for _, dist in m.outgoing(s)
            )
            nxt[s] = best
            residual = max(residual, abs(best - x[s]))
        x = nxt
        yield x, residual


def _bounded_reach(m: PA, bad: frozenset[int], horizon: int, maximize: bool) -> dict[int, float]:
    """Probability of hitting bad within ``horizon`` steps (backward induction)."""
    states = m.reachable
    x = {s: (1.0 if s in bad else 0.0) for s in states}
    pick = max if maximize else min
    for _ in range(horizon):
        nxt = {}
        for s in states:
            if s in bad or m.is_terminal(s):
                nxt[s] = x[s]
            else:
                nxt[s] = pick(
                    sum(p * x[t] for t, p in dist.support)
                    for _, dist in m.outgoing(s)
                )
        x = nxt
    return x


def _extreme_safety(m: PA, prop: SafetyProperty, tol: float, max_iter: int,
                    adversarial: bool) -> CheckResult:
    start = time.perf_counter()
    m = make_bad_absorbing(m, prop)
    bad = bad_states(m, prop)
    if prop.bounded:
        x = _bounded_reach(m, bad, prop.horizon, maximize=adversarial)
        return CheckResult(1.0 - x[m.initial], prop.horizon, 0.0,
                           time.perf_counter() - start)
    iters = 0
    for values, residual in _vi_iterates(m, bad, maximize=adversarial):
        iters += 1
        if residual < tol:
            return CheckResult(1.0 - values[m.initial], iters, residual,
                               time.perf_counter() - start)
        if iters >= max_iter:
            raise NonConvergence(
                f"value iteration did not converge in {max_iter} sweeps "
                f"(residual {residual:.3e}); model may have a pathological end component")


def min_safety_prob(m: PA, prop: SafetyProperty, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER) -> CheckResult:
    """Minimum over schedulers of the probability that the invariant holds."""
    return _extreme_safety(m, prop, tol, max_iter, adversarial=True)


def max_safety_prob(m: PA, prop: SafetyProperty, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER) -> CheckResult:
    """Maximum over schedulers of the probability that the invariant holds."""
    return _extreme_safety(m, prop, tol, max_iter, adversarial=False)


def _chain_reach_bad(d: Dtmc, bad_label: str, horizon: int | None) -> dict[int, float]:
    """Reach-bad probability from every chain state.

    Unbounded case solves the linear hitting system restricted to states
    that can actually reach a bad state; bounded case runs ``horizon``
    backward-induction steps.
    """
    bad = {s for s in d.states if bad_label in d.labels.get(s, frozenset())}
    if horizon is not None:
        x = {s: (1.0 if s in bad else 0.0) for s in d.states}
        for _ in range(horizon):
            nxt = {}
            for s in d.states:
                row = d.row(s)
                if s in bad or row is None:
                    nxt[s] = x[s]
                else:
                    nxt[s] = sum(p * x[t] for t, p in row.support)
            x = nxt
        return x

    # Backward reachability: states with some path into bad.
    preds: dict[int, set[int]] = {s: set() for s in d.states}
    for s in d.states:
        row = d.row(s)
        if row is None or s in bad:
            continue
        for t, _ in row.support:
            preds[t].add(s)
    can_reach = set(bad)
    queue = list(bad)
    while queue:
        t = queue.pop()
        for s in preds[t]:
            if s not in can_reach:
                can_reach.add(s)
                queue.append(s)

    unknown = [s for s in d.states if s in can_reach and s not in bad]
    x = {s: 0.0 for s in d.states}
    for s in bad:
        x[s] = 1.0
    if unknown:
        pos = {s: i for i, s in enumerate(unknown)}
        n = len(unknown)
        a = np.eye(n)
        b = np.zeros(n)
        for s in unknown:
            row = d.row(s)
            for t, p in row.support:
                if t in bad:
                    b[pos[s]] += p
                elif t in pos:
                    a[pos[s], pos[t]] -= p
        try:
            sol = np.linalg.solve(a, b)
        except np.linalg.LinAlgError as exc:
            raise ModelError(f"singular hitting-probability system: {exc}") from exc
        for s in unknown:
            x[s] = float(sol[pos[s]])
    return x


def prob_under_scheduler(m: PA, sigma, prop: SafetyProperty) -> float:
    """Exact satisfaction probability of the invariant under one scheduler."""
    m = make_bad_absorbing(m, prop)
    chain = apply_scheduler(m, sigma)
    reach = _chain_reach_bad(chain, prop.bad_label, prop.horizon)
    return 1.0 - reach[chain.initial]


def scheduler_value_vector(m: PA, sigma, prop: SafetyProperty) -> dict[int, float]:
    """Satisfaction probability from every state under one total scheduler.

    The scheduler must cover every non-terminal state; the chain is taken
    over the whole state space so re-rooted probabilities for all states
    come out of a single solve.
    """
    m = make_bad_absorbing(m, prop)
    rows = {}
    labels = {}
    for s in m.states:
        labels[s] = m.labels[s]
        if m.is_terminal(s):
            continue
        action = sigma[s]
        rows[s] = m.distribution(s, action)
    chain = Dtmc(states=tuple(m.states), initial=m.initial, rows=rows, labels=labels)
    reach = _chain_reach_bad(chain, prop.bad_label, prop.horizon)
    return {s: 1.0 - reach[s] for s in m.states}


def min_schedulers(m: PA, prop: SafetyProperty, tol: float = MIN_SCHEDULER_TIE_TOL,
                   cap: int = 10 ** 6) -> list[dict]:
    """All schedulers within ``tol`` of the enumerated minimum probability."""
    best = None
    scored = []
    for sigma in enumerate_schedulers(m, cap=cap):
        p = prob_under_scheduler(m, sigma, prop)
        scored.append((p, sigma))
        best = p if best is None else min(best, p)
    return [sigma for p, sigma in scored if p <= best + tol]


def _enumerate_chain_paths(d: Dtmc) -> Iterator[tuple[tuple[int, ...], float]]:
    """All maximal finite paths with their probabilities (chain must be acyclic)."""
    stack: list[tuple[int, tuple[int, ...], float]] = [(d.initial, (d.initial,), 1.0)]
    while stack:
        s, path, p = stack.pop()
        row = d.row(s)
        if row is None:
            yield path, p
            continue
        for t, q in row.support:
            if t in path:
                raise ModelError("model has infinite paths under this scheduler")
            stack.append((t, path + (t,), p * q))


def _assert_acyclic(d: Dtmc) -> None:
    color: dict[int, int] = {}

    def visit(s: int):
        color[s] = 1
        row = d.row(s)
        if row is not None:
            for t, _ in row.support:
                c = color.get(t, 0)
                if c == 1:
                    raise ModelError("model has infinite paths under this scheduler")
                if c == 0:
                    visit(t)
        color[s] = 2

    visit(d.initial)


def decomposition_check(m: PA, sigma, prop: SafetyProperty, s: int) -> float:
    """Residual of splitting the satisfaction probability around visits to ``s``.

    For a finite-path chain the probability of the invariant equals the mass
    of safe paths avoiding ``s`` plus the mass reaching ``s`` times the
    probability when restarted from ``s``.  Each term is computed by an
    independent route (linear solve, path enumeration, re-rooted solve) and
    the absolute defect is returned.  Only unbounded invariants are
    decomposable this way: a step bound would not survive re-rooting.
    """
    if prop.bounded:
        raise ModelError("decomposition is defined for unbounded invariants only")
    m = make_bad_absorbing(m, prop)
    chain = apply_scheduler(m, sigma)
    _assert_acyclic(chain)

    full = prob_under_scheduler(m, sigma, prop)

    safe_avoiding = 0.0
    reach_s = 0.0
    for path, p in _enumerate_chain_paths(chain):
        visits = s in path
        bad = any(prop.bad_label in chain.labels.get(t, frozenset()) for t in path)
        if visits:
            reach_s += p
        elif not bad:
            safe_avoiding += p

    from_s = prob_under_scheduler(replace(m, initial=s), sigma, prop)
    return abs(full - (safe_avoiding + reach_s * from_s))
