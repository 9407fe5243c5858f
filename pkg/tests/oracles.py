"""Independent oracles and random model generators for the test suite.

Everything here deliberately avoids the library's own solution paths: the
linear solver is a hand-rolled Gaussian elimination, reachability counting
re-derives the synchronized product from the composition cases, and the
brute-force abstraction builder is a second implementation of the corner
image.  Where a library routine is checked against one of these, the
oracle side must stay library-free.
"""
from __future__ import annotations

import random

from mostrim.pa import (PA, PERCEPTION, REACHABILITY, ActionLabel, Distribution,
                        enumerate_schedulers)
from mostrim.pmc import SafetyProperty, scheduler_value_vector


def gauss_solve(a: list[list[float]], b: list[float]) -> list[float]:
    """Dense Gaussian elimination with partial pivoting (pure Python)."""
    n = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(m[r][col]))
        if abs(m[pivot][col]) < 1e-14:
            raise ZeroDivisionError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1.0 / m[col][col]
        for r in range(n):
            if r != col and m[r][col] != 0.0:
                factor = m[r][col] * inv
                for c in range(col, n + 1):
                    m[r][c] -= factor * m[col][c]
    return [m[i][n] / m[i][i] for i in range(n)]


def chain_safety_gauss(chain, bad_label: str) -> float:
    """Safety probability of a chain by an independent linear solve.

    Sets up the full hitting-probability system over the chain states:
    x = 1 at bad states, x = 0 at safe terminals, balance equations
    elsewhere.
    """
    states = list(chain.states)
    pos = {s: i for i, s in enumerate(states)}
    n = len(states)
    a = [[0.0] * n for _ in range(n)]
    b = [0.0] * n
    for s in states:
        i = pos[s]
        row = chain.row(s)
        bad = bad_label in chain.labels.get(s, frozenset())
        if bad:
            a[i][i] = 1.0
            b[i] = 1.0
        elif row is None:
            a[i][i] = 1.0
        else:
            a[i][i] = 1.0
            for t, p in row.support:
                a[i][pos[t]] -= p
    x = gauss_solve(a, b)
    return 1.0 - x[pos[chain.initial]]


def enumerate_chain_paths(chain):
    """All maximal paths (state tuples) with probabilities; chain must be finite."""
    out = []
    stack = [(chain.initial, (chain.initial,), 1.0)]
    while stack:
        s, path, p = stack.pop()
        row = chain.row(s)
        if row is None:
            out.append((path, p))
            continue
        for t, q in row.support:
            if path.count(t) > len(chain.states):
                raise RuntimeError("chain has unbounded paths")
            stack.append((t, path + (t,), p * q))
    return out


def product_transitions(m1: PA, m2: PA):
    """Reachable synchronized-product transitions, derived independently.

    Walks pairs (s1, s2) applying the three synchronization cases directly
    (shared actions need both sides enabled; private actions move one
    side) and records, per transition, which single case justified it.
    Returns (set of reachable pairs, set of transition fingerprints).
    """
    shared = {a for a in m1.alphabet if a in m2.alphabet}
    seen = {(m1.initial, m2.initial)}
    stack = [(m1.initial, m2.initial)]
    transitions = set()
    while stack:
        s1, s2 = stack.pop()
        out1 = {a: d for a, d in m1.outgoing(s1)}
        out2 = {a: d for a, d in m2.outgoing(s2)}
        moves = []
        for a, d1 in out1.items():
            cases = []
            if a in shared and a in out2:
                cases.append(("sync", [((t1, t2), p1 * p2)
                                       for t1, p1 in d1.support
                                       for t2, p2 in out2[a].support]))
            if a not in shared:
                cases.append(("left", [((t1, s2), p1) for t1, p1 in d1.support]))
            assert len(cases) <= 1
            moves.extend((a, support) for _, support in cases)
        for a, d2 in out2.items():
            if a not in shared:
                moves.append((a, [((s1, t2), p2) for t2, p2 in d2.support]))
        for a, support in moves:
            transitions.add(((s1, s2), a, tuple(sorted(
                (pair, round(p, 12)) for pair, p in support))))
            for pair, _ in support:
                if pair not in seen:
                    seen.add(pair)
                    stack.append(pair)
    return seen, transitions


def product_reachable_count(m1: PA, m2: PA) -> int:
    return len(product_transitions(m1, m2)[0])


def brute_force_cells(box, widths, lows, highs, corner_map):
    """Independent corner-propagation image: cells overlapping the image box.

    Returns index tuples of cells of the uniform grid that intersect
    [min corner, max corner) per dimension (closed point when degenerate).
    """
    dims = len(box)
    corners = [[]]
    for lo, hi in box:
        vals = [lo] if lo == hi else [lo, hi]
        corners = [c + [v] for c in corners for v in vals]
    images = [corner_map(tuple(c)) for c in corners]
    cells = set()

    def visit(d, prefix):
        if d == dims:
            cells.add(tuple(prefix))
            return
        vals = [img[d] for img in images]
        lo, hi = min(vals), max(vals)
        n = int(round((highs[d] - lows[d]) / widths[d]))
        for i in range(n):
            c_lo = lows[d] + i * widths[d]
            c_hi = c_lo + widths[d]
            if lo == hi:
                hit = c_lo <= lo < c_hi
            else:
                hit = lo < c_hi and hi > c_lo
            if hit:
                visit(d + 1, prefix + [i])

    visit(0, [])
    return cells


def random_dag_pa(rng: random.Random, max_states: int = 8, max_actions: int = 3,
                  bad_prob: float = 0.35) -> PA:
    """Random acyclic automaton mixing Dirac choice states and chance states.

    Transitions go only to higher state ids, so all paths are finite.  Bad
    states are sinks by construction.  Features carry the state id so test
    orders can be extensional.
    """
    n = rng.randint(4, max_states)
    bad = {s for s in range(1, n) if rng.random() < bad_prob}
    # the last state is always a safe terminal so safety is not trivially 0
    bad.discard(n - 1)
    transitions = []
    for s in range(n - 1):
        if s in bad:
            continue
        succs = list(range(s + 1, n))
        if rng.random() < 0.55:
            k = rng.randint(2, max_actions) if len(succs) >= 2 else 1
            dests = rng.sample(succs, min(k, len(succs)))
            for j, d in enumerate(dests):
                transitions.append((s, ActionLabel(f"r{s}.{j}", REACHABILITY),
                                    Distribution.dirac(d)))
        else:
            for j in range(rng.randint(1, max_actions)):
                size = rng.randint(1, min(3, len(succs)))
                dests = rng.sample(succs, size)
                weights = [rng.random() + 0.05 for _ in dests]
                total = sum(weights)
                support = [(d, w / total) for d, w in zip(dests, weights)]
                transitions.append((s, ActionLabel(f"a{s}.{j}", PERCEPTION),
                                    Distribution.of(support)))
    labels = {s: {"bad"} for s in bad}
    features = {s: {"id": s} for s in range(n)}
    return PA.build(n_states=n, initial=0, transitions=transitions,
                    labels=labels, features=features)


def random_acyclic_chain(rng: random.Random, max_states: int = 12) -> PA:
    """Random acyclic fully-probabilistic automaton (one action per state)."""
    n = rng.randint(4, max_states)
    bad = {s for s in range(1, n - 1) if rng.random() < 0.25}
    transitions = []
    for s in range(n - 1):
        if s in bad:
            continue
        succs = list(range(s + 1, n))
        size = rng.randint(1, min(3, len(succs)))
        dests = rng.sample(succs, size)
        weights = [rng.random() + 0.05 for _ in dests]
        total = sum(weights)
        support = [(d, w / total) for d, w in zip(dests, weights)]
        transitions.append((s, ActionLabel(f"a{s}", PERCEPTION),
                            Distribution.of(support)))
    labels = {s: {"bad"} for s in bad}
    return PA.build(n_states=n, initial=0, transitions=transitions, labels=labels)


def dominance_pairs(m: PA, prop: SafetyProperty, min_only: bool,
                    tie_tol: float = 1e-9, slack: float = 1e-12) -> set[tuple[int, int]]:
    """Maximal (safer, worse) pairs verified over (min) schedulers by enumeration."""
    vectors = [scheduler_value_vector(m, sigma, prop)
               for sigma in enumerate_schedulers(m)]
    if min_only:
        floor = min(v[m.initial] for v in vectors)
        vectors = [v for v in vectors if v[m.initial] <= floor + tie_tol]
    pairs = set()
    for a in m.states:
        for b in m.states:
            if a != b and all(v[a] >= v[b] - slack for v in vectors):
                pairs.add((a, b))
    return pairs
