"""Finite probabilistic automata: states, labeled transitions, schedulers.

States are dense integer ids 0..n-1.  A transition is (state, action,
distribution); several enabled actions in one state model non-determinism,
which a scheduler (memoryless, deterministic map state -> enabled action)
resolves into a fully probabilistic chain (:class:`Dtmc`).

All model objects are immutable after construction and safe to share
read-only across workers.  Sampling takes explicit random streams; nothing
here touches global randomness.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterator, Mapping

from .rng import CounterStream

# Action origins.  Reachability-choice actions are the Dirac branches added
# by interval abstraction; only those are ever trimmed.  Perception-input
# actions synchronize with a perception component in a parallel composition.
PERCEPTION = "perception-input"
REACHABILITY = "reachability-choice"
INTERNAL = "internal"

MASS_TOL = 1e-12
DEFAULT_SCHEDULER_CAP = 10 ** 6


class ModelError(Exception):
    """Structurally invalid model or unusable argument."""


class CapExceeded(ModelError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"{count} schedulers exceed the cap of {cap}")
        self.count = count
        self.cap = cap


@dataclass(frozen=True, order=True)
class ActionLabel:
    name: str
    origin: str = INTERNAL

    def __repr__(self) -> str:
        return f"{self.name}@{self.origin}"


@dataclass(frozen=True)
class Distribution:
    """Probability distribution over successor state ids.

    Support entries keep construction order; inverse-CDF sampling and
    product distributions iterate in that order, which keeps every
    downstream result reproducible.
    """

    support: tuple[tuple[int, float], ...]

    @classmethod
    def dirac(cls, state: int) -> "Distribution":
        return cls(((state, 1.0),))

    @classmethod
    def of(cls, pairs) -> "Distribution":
        return cls(tuple((int(s), float(p)) for s, p in pairs))

    @property
    def is_dirac(self) -> bool:
        return len(self.support) == 1 and abs(self.support[0][1] - 1.0) <= MASS_TOL

    def states(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.support)

    def mass(self) -> float:
        return sum(p for _, p in self.support)

    def prob(self, state: int) -> float:
        return sum(p for s, p in self.support if s == state)

    def sample(self, u: float) -> int:
        cum = 0.0
        for s, p in self.support:
            cum += p
            if u < cum:
                return s
        return self.support[-1][0]


@dataclass(frozen=True)
class PA:
    """Probabilistic automaton over dense integer states.

    ``labels`` maps states to atomic propositions; ``features`` optionally
    attaches the numeric/interval attributes that monotonic-safety orders
    compare (None for states that no order should relate).
    """

    n_states: int
    initial: int
    alphabet: frozenset[ActionLabel]
    transitions: tuple[tuple[int, ActionLabel, Distribution], ...]
    labels: tuple[frozenset[str], ...]
    features: tuple[Mapping[str, Hashable] | None, ...] = None  # type: ignore[assignment]
    state_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.features is None:
            object.__setattr__(self, "features", tuple([None] * self.n_states))

    @classmethod
    def build(cls, n_states, initial, transitions, labels=None, features=None,
              state_names=None, alphabet=None) -> "PA":
        trans = tuple((int(s), a, d) for s, a, d in transitions)
        if alphabet is None:
            alphabet = frozenset(a for _, a, _ in trans)
        if labels is None:
            labs = tuple([frozenset()] * n_states)
        elif isinstance(labels, Mapping):
            labs = tuple(frozenset(labels.get(s, ())) for s in range(n_states))
        else:
            labs = tuple(frozenset(x) for x in labels)
        feats = None
        if features is not None:
            if isinstance(features, Mapping):
                feats = tuple(features.get(s) for s in range(n_states))
            else:
                feats = tuple(features)
        return cls(n_states, int(initial), frozenset(alphabet), trans, labs,
                   feats, tuple(state_names) if state_names else None)

    @property
    def states(self) -> range:
        return range(self.n_states)

    @cached_property
    def _outgoing(self) -> tuple[tuple[tuple[ActionLabel, Distribution], ...], ...]:
        out: list[list[tuple[ActionLabel, Distribution]]] = [[] for _ in range(self.n_states)]
        for s, a, d in self.transitions:
            out[s].append((a, d))
        return tuple(tuple(x) for x in out)

    def outgoing(self, s: int) -> tuple[tuple[ActionLabel, Distribution], ...]:
        if not 0 <= s < self.n_states:
            raise ModelError(f"unknown state id {s}")
        return self._outgoing[s]

    def distribution(self, s: int, a: ActionLabel) -> Distribution:
        for act, dist in self.outgoing(s):
            if act == a:
                return dist
        raise ModelError(f"action {a!r} not enabled in state {s}")

    def is_terminal(self, s: int) -> bool:
        return not self.outgoing(s)

    def name_of(self, s: int) -> str:
        if self.state_names is not None:
            return self.state_names[s]
        return str(s)

    @cached_property
    def reachable(self) -> tuple[int, ...]:
        """States reachable from the initial state under any scheduler (BFS order)."""
        seen = {self.initial}
        order = [self.initial]
        queue = [self.initial]
        while queue:
            s = queue.pop(0)
            for _, dist in self._outgoing[s]:
                for t, _ in dist.support:
                    if t not in seen:
                        seen.add(t)
                        order.append(t)
                        queue.append(t)
        return tuple(order)


@dataclass(frozen=True)
class Dtmc:
    """Fully probabilistic chain induced by fixing a scheduler."""

    states: tuple[int, ...]
    initial: int
    rows: Mapping[int, Distribution]  # absent key = terminal state
    labels: Mapping[int, frozenset[str]]

    def row(self, s: int) -> Distribution | None:
        return self.rows.get(s)


def validate(m: PA) -> list[str]:
    """Check the structural invariants; returns human-readable violations."""
    errs: list[str] = []
    if not 0 <= m.initial < m.n_states:
        errs.append(f"initial state {m.initial} out of range")
    if len(m.labels) != m.n_states:
        errs.append("label table length does not match state count")
    seen_pairs: set[tuple[int, ActionLabel]] = set()
    for s, a, dist in m.transitions:
        if not 0 <= s < m.n_states:
            errs.append(f"transition source {s} out of range")
            continue
        if a not in m.alphabet:
            errs.append(f"state {s}: action {a!r} not in alphabet")
        if (s, a) in seen_pairs:
            errs.append(f"state {s}: duplicate distribution for action {a!r}")
        seen_pairs.add((s, a))
        mass = dist.mass()
        if abs(mass - 1.0) > MASS_TOL:
            errs.append(f"state {s}, action {a.name}: distribution mass {mass!r} != 1")
        succs = dist.states()
        if len(set(succs)) != len(succs):
            errs.append(f"state {s}, action {a.name}: duplicate support entries")
        for t, p in dist.support:
            if not 0 <= t < m.n_states:
                errs.append(f"state {s}, action {a.name}: successor {t} out of range")
            if p <= 0.0:
                errs.append(f"state {s}, action {a.name}: non-positive probability {p!r}")
    return errs


def enabled_actions(m: PA, s: int) -> tuple[ActionLabel, ...]:
    """Actions with a transition out of ``s``, in stored (canonical) order."""
    return tuple(a for a, _ in m.outgoing(s))


def unreachable_states(m: PA) -> tuple[int, ...]:
    """Declared states no scheduler can reach (legal, but worth a warning)."""
    reachable = set(m.reachable)
    return tuple(s for s in m.states if s not in reachable)


def compose(m1: PA, m2: PA) -> PA:
    """Parallel composition restricted to the reachable product.

    Shared actions move both components with the product distribution;
    actions private to one alphabet move that component while the other
    stays put.  A shared action that one side enables with more than one
    distribution would make the product ambiguous and is rejected.
    """
    shared = {a for a in m1.alphabet if a in m2.alphabet}

    def dists_for(m: PA, s: int, a: ActionLabel) -> list[Distribution]:
        return [d for act, d in m.outgoing(s) if act == a]

    index: dict[tuple[int, int], int] = {}
    names: list[str] = []
    feats: list[Mapping[str, Hashable] | None] = []
    labels: list[frozenset[str]] = []
    transitions: list[tuple[int, ActionLabel, Distribution]] = []

    def intern(pair: tuple[int, int]) -> int:
        if pair not in index:
            index[pair] = len(names)
            s1, s2 = pair
            names.append(f"{m1.name_of(s1)}|{m2.name_of(s2)}")
            f1, f2 = m1.features[s1], m2.features[s2]
            merged: Mapping[str, Hashable] | None
            if f1 is None and f2 is None:
                merged = None
            else:
                merged = {**(f2 or {}), **(f1 or {})}
            feats.append(merged)
            labels.append(m1.labels[s1] | m2.labels[s2])
        return index[pair]

    root = intern((m1.initial, m2.initial))
    queue = [(m1.initial, m2.initial)]
    head = 0
    while head < len(queue):
        s1, s2 = queue[head]
        head += 1
        sid = index[(s1, s2)]
        moves: list[tuple[ActionLabel, Distribution, Distribution]] = []
        for a, d1 in m1.outgoing(s1):
            if a in shared:
                d2s = dists_for(m2, s2, a)
                if len(dists_for(m1, s1, a)) > 1 or len(d2s) > 1:
                    raise ModelError(
                        f"shared action {a!r} enabled with multiple distributions")
                if d2s:
                    moves.append((a, d1, d2s[0]))
            else:
                moves.append((a, d1, Distribution.dirac(s2)))
        for a, d2 in m2.outgoing(s2):
            if a not in shared:
                moves.append((a, Distribution.dirac(s1), d2))
        for a, d1, d2 in moves:
            support = []
            for (t1, p1), (t2, p2) in itertools.product(d1.support, d2.support):
                pair = (t1, t2)
                if pair not in index:
                    queue.append(pair)
                support.append((intern(pair), p1 * p2))
            transitions.append((sid, a, Distribution.of(support)))

    return PA.build(
        n_states=len(names), initial=root, transitions=transitions,
        labels=labels, features=feats, state_names=names,
        alphabet=m1.alphabet | m2.alphabet)


def apply_scheduler(m: PA, sigma) -> Dtmc:
    """Induce the fully probabilistic chain of ``m`` under scheduler ``sigma``.

    ``sigma`` is anything indexable by state id returning an enabled action.
    The chain covers exactly the sigma-reachable states.
    """
    rows: dict[int, Distribution] = {}
    labels: dict[int, frozenset[str]] = {}
    seen = {m.initial}
    order = [m.initial]
    queue = [m.initial]
    while queue:
        s = queue.pop(0)
        labels[s] = m.labels[s]
        if m.is_terminal(s):
            continue
        action = sigma[s]
        dist = None
        for a, d in m.outgoing(s):
            if a == action:
                dist = d
                break
        if dist is None:
            raise ModelError(f"scheduler picks non-enabled action {action!r} in state {s}")
        rows[s] = dist
        for t, _ in dist.support:
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    return Dtmc(states=tuple(order), initial=m.initial, rows=rows, labels=labels)


def _choice_states(m: PA) -> list[int]:
    return [s for s in m.states if m.outgoing(s)]


def count_schedulers(m: PA) -> int:
    """Number of memoryless deterministic schedulers (exact integer).

    Schedulers map every non-terminal state to an enabled action, so the
    count is the product of enabled-action counts.  Counting over all
    states (not just currently reachable ones) keeps the count law exact
    under trimming: removing branches at a state divides the count by
    exactly the removed factor even when parts of the model become
    unreachable.
    """
    count = 1
    for s in _choice_states(m):
        count *= len(m.outgoing(s))
    return count


def enumerate_schedulers(m: PA, cap: int = DEFAULT_SCHEDULER_CAP) -> Iterator[dict[int, ActionLabel]]:
    """Yield every scheduler once, lexicographic over (state id, action order)."""
    total = count_schedulers(m)
    if total > cap:
        raise CapExceeded(total, cap)
    states = _choice_states(m)
    menus = [enabled_actions(m, s) for s in states]
    for combo in itertools.product(*menus):
        yield dict(zip(states, combo))


def sample_path(d: Dtmc, horizon: int, stream: CounterStream) -> list[int]:
    """Sample a path of at most ``horizon`` steps, stopping at terminal states.

    Successors are drawn by inverse CDF over each row's stored support
    order, one uniform variate per step.
    """
    current = d.initial
    path = [current]
    for _ in range(horizon):
        row = d.row(current)
        if row is None:
            break
        current = row.sample(stream.uniform())
        path.append(current)
    return path
