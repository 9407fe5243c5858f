"""Monotonic-safety partial orders, transition trimming, and their validation.

A monotonic-safety order compares state features and declares one state at
least as likely to stay safe as another.  Trimming exploits the order to
delete non-deterministic Dirac reachability-choice transitions that lead to
safer destinations, shrinking the scheduler space while aiming to keep the
minimum safety probability (model-checking variant) or to bound sampled
estimates from below (scheduler-sampling variant).

Probabilistic perception transitions are never touched: only the Dirac
branches introduced by reachability non-determinism are candidates.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .pa import PA, REACHABILITY, ActionLabel, enumerate_schedulers
from .pmc import SafetyProperty, scheduler_value_vector

COMPARISON_SLACK = 1e-12

Features = Mapping[str, Hashable]


class Relation(enum.Enum):
    SAFER = "safer"            # left at least as safe as right, not known equal
    WORSE = "worse"            # right at least as safe as left
    EQUAL = "equal"            # ordered both ways (feature tie)
    INCOMPARABLE = "incomparable"

    def flipped(self) -> "Relation":
        if self is Relation.SAFER:
            return Relation.WORSE
        if self is Relation.WORSE:
            return Relation.SAFER
        return self


@dataclass(frozen=True)
class PartialOrder:
    """Named comparator over state features.

    Comparators must be reflexive and transitive; both are exercised by the
    property tests rather than enforced here.
    """

    name: str
    compare: Callable[[Features, Features], Relation]

    def at_least(self, fa: Features, fb: Features) -> bool:
        return self.compare(fa, fb) in (Relation.SAFER, Relation.EQUAL)


def negate(order: PartialOrder) -> PartialOrder:
    """Swap safer and worse; incomparable pairs stay incomparable."""
    def cmp(fa: Features, fb: Features) -> Relation:
        return order.compare(fa, fb).flipped()
    return PartialOrder(name=f"neg({order.name})", compare=cmp)


def _midpoint(value) -> float:
    if isinstance(value, tuple) and len(value) == 2:
        return 0.5 * (float(value[0]) + float(value[1]))
    return float(value)


def _others_equal(fa: Features, fb: Features, keys: Iterable[str]) -> bool:
    skip = set(keys) | {"sink", "rest"}
    ka = {k for k in fa if k not in skip and not k.startswith("_")}
    kb = {k for k in fb if k not in skip and not k.startswith("_")}
    if ka != kb:
        return False
    return all(fa[k] == fb[k] for k in ka)


def _sink_relation(fa: Features, fb: Features) -> Relation | None:
    """Universal extremes: bad sinks (safety 0) are dominated by everything,
    rest states (safely absorbed, safety 1) dominate everything."""
    a_sink = fa.get("sink") is not None
    b_sink = fb.get("sink") is not None
    if a_sink and b_sink:
        return Relation.EQUAL if fa["sink"] == fb["sink"] else Relation.INCOMPARABLE
    if b_sink:
        return Relation.SAFER
    if a_sink:
        return Relation.WORSE
    a_rest = bool(fa.get("rest"))
    b_rest = bool(fb.get("rest"))
    if a_rest and b_rest:
        return Relation.EQUAL
    if a_rest:
        return Relation.SAFER
    if b_rest:
        return Relation.WORSE
    return None


def _component_verdict(va: float, vb: float, spec) -> Relation:
    if va == vb:
        return Relation.EQUAL
    if isinstance(spec, tuple) and spec[0] == "middle":
        middle = spec[1]
        if va <= middle and vb <= middle:
            return Relation.SAFER if va > vb else Relation.WORSE
        if va >= middle and vb >= middle:
            return Relation.SAFER if va < vb else Relation.WORSE
        return Relation.INCOMPARABLE
    if spec == "larger":
        return Relation.SAFER if va > vb else Relation.WORSE
    if spec == "smaller":
        return Relation.SAFER if va < vb else Relation.WORSE
    raise ValueError(f"unknown component spec {spec!r}")


def component_order(name: str, key: str, safer: str = "larger") -> PartialOrder:
    """Order a single feature; every other feature must match exactly."""
    return product_order(name, [(key, safer)])


def product_order(name: str, components: Sequence[tuple[str, object]]) -> PartialOrder:
    """Componentwise order over several features.

    A component spec is "larger" or "smaller" (that direction is safer) or
    ("middle", m) for the two-branch rule where values nearer ``m`` from
    the same side are safer.  Two states relate when every component
    agrees on a direction (ties allowed) and all unlisted features are
    equal; bad sinks are dominated by every ordinary state.
    """
    comps = tuple(components)

    def cmp(fa: Features, fb: Features) -> Relation:
        sink = _sink_relation(fa, fb)
        if sink is not None:
            return sink
        if not _others_equal(fa, fb, [k for k, _ in comps]):
            return Relation.INCOMPARABLE
        verdicts = []
        for key, spec in comps:
            if key not in fa or key not in fb:
                return Relation.INCOMPARABLE
            v = _component_verdict(_midpoint(fa[key]), _midpoint(fb[key]), spec)
            if v is Relation.INCOMPARABLE:
                return Relation.INCOMPARABLE
            verdicts.append(v)
        if all(v is Relation.EQUAL for v in verdicts):
            return Relation.EQUAL
        if all(v in (Relation.SAFER, Relation.EQUAL) for v in verdicts):
            return Relation.SAFER
        if all(v in (Relation.WORSE, Relation.EQUAL) for v in verdicts):
            return Relation.WORSE
        return Relation.INCOMPARABLE

    return PartialOrder(name=name, compare=cmp)


def toward_middle_order(name: str, key: str, middle: float) -> PartialOrder:
    """Two-branch order: closer to ``middle`` from the same side is safer."""
    return product_order(name, [(key, ("middle", middle))])


def extensional_order(name: str, ge_pairs: Iterable[tuple[int, int]],
                      key: str = "id") -> PartialOrder:
    """Order given by an explicit set of (safer, worse) id pairs."""
    pairs = frozenset((int(a), int(b)) for a, b in ge_pairs)

    def cmp(fa: Features, fb: Features) -> Relation:
        if key not in fa or key not in fb:
            return Relation.INCOMPARABLE
        a, b = fa[key], fb[key]
        if a == b:
            return Relation.EQUAL
        ge = (a, b) in pairs
        le = (b, a) in pairs
        if ge and le:
            return Relation.EQUAL
        if ge:
            return Relation.SAFER
        if le:
            return Relation.WORSE
        return Relation.INCOMPARABLE

    return PartialOrder(name=name, compare=cmp)


@dataclass(frozen=True)
class TrimmedPair:
    source: int
    removed_action: ActionLabel
    removed_destination: int
    kept_destination: int


@dataclass(frozen=True)
class TrimReport:
    order: str
    pairs: tuple[TrimmedPair, ...]

    @property
    def transitions_removed(self) -> int:
        return len(self.pairs)

    def trimmed_sources(self) -> tuple[int, ...]:
        return tuple(sorted({p.source for p in self.pairs}))

    def destination_pairs(self) -> tuple[tuple[int, int], ...]:
        """Deduplicated (safer removed, worse kept) destination pairs."""
        seen = []
        for p in self.pairs:
            pair = (p.removed_destination, p.kept_destination)
            if pair not in seen and pair[0] != pair[1]:
                seen.append(pair)
        return tuple(seen)

    def to_json_obj(self, m: PA | None = None) -> dict:
        rows = []
        for p in self.pairs:
            row = {
                "source": p.source,
                "removed_action": p.removed_action.name,
                "removed_destination": p.removed_destination,
                "kept_destination": p.kept_destination,
            }
            if m is not None:
                row["source_name"] = m.name_of(p.source)
                row["removed_destination_name"] = m.name_of(p.removed_destination)
                row["kept_destination_name"] = m.name_of(p.kept_destination)
            rows.append(row)
        return {"order": self.order, "transitions_removed": self.transitions_removed,
                "pairs": rows}

    def csv_rows(self, m: PA | None = None) -> tuple[list[str], list[list]]:
        header = ["source", "removed_action", "removed_destination", "kept_destination"]
        if m is not None:
            header += ["source_name", "removed_destination_name", "kept_destination_name"]
        rows = []
        for p in self.pairs:
            row = [p.source, p.removed_action.name, p.removed_destination, p.kept_destination]
            if m is not None:
                row += [m.name_of(p.source), m.name_of(p.removed_destination),
                        m.name_of(p.kept_destination)]
            rows.append(row)
        return header, rows


def _dirac_choice_entries(m: PA, s: int) -> list[tuple[int, ActionLabel, int]]:
    """(transition index, action, destination) of Dirac reachability branches."""
    entries = []
    for i, (src, a, dist) in enumerate(m.transitions):
        if src == s and a.origin == REACHABILITY and dist.is_dirac:
            entries.append((i, a, dist.support[0][0]))
    return entries


def _strip(m: PA, removed: set[int]) -> PA:
    if not removed:
        return m
    kept = tuple(t for i, t in enumerate(m.transitions) if i not in removed)
    return replace(m, transitions=kept)


def _trim_state_pairs(m: PA, s: int, order: PartialOrder,
                      removed: set[int], pairs: list[TrimmedPair]) -> None:
    """Pairwise trimming at one state until no ordered pair remains."""
    entries = [e for e in _dirac_choice_entries(m, s) if e[0] not in removed]
    changed = True
    while changed:
        changed = False
        for x in range(len(entries)):
            for y in range(x + 1, len(entries)):
                ia, aa, da = entries[x]
                ib, ab, db = entries[y]
                if da == db:
                    continue
                fa, fb = m.features[da], m.features[db]
                if fa is None or fb is None:
                    continue
                rel = order.compare(fa, fb)
                if rel is Relation.INCOMPARABLE:
                    continue
                if rel is Relation.EQUAL:
                    # Feature tie between distinct states: keep the
                    # lexicographically smallest destination.
                    drop = x if da > db else y
                elif rel is Relation.SAFER:
                    drop = x
                else:
                    drop = y
                keep = y if drop == x else x
                idx, action, dest = entries[drop]
                removed.add(idx)
                pairs.append(TrimmedPair(s, action, dest, entries[keep][2]))
                del entries[drop]
                changed = True
                break
            if changed:
                break


def trim_pmc_state(m: PA, s: int, order: PartialOrder) -> tuple[PA, TrimReport]:
    """Remove Dirac reachability branches of ``s`` whose destination is
    safer-or-equal to another branch's destination."""
    removed: set[int] = set()
    pairs: list[TrimmedPair] = []
    _trim_state_pairs(m, s, order, removed, pairs)
    return _strip(m, removed), TrimReport(order.name, tuple(pairs))


def trim_pmc(m: PA, order: PartialOrder) -> tuple[PA, TrimReport]:
    """Pairwise trimming applied to every state, ascending id order."""
    removed: set[int] = set()
    pairs: list[TrimmedPair] = []
    for s in m.states:
        _trim_state_pairs(m, s, order, removed, pairs)
    return _strip(m, removed), TrimReport(order.name, tuple(pairs))


def _trim_state_worst(m: PA, s: int, order: PartialOrder,
                      removed: set[int], pairs: list[TrimmedPair]) -> None:
    entries = [e for e in _dirac_choice_entries(m, s) if e[0] not in removed]
    # The collapse applies only where reachability choices are the whole
    # menu of the state.
    enabled = [a for a, _ in m.outgoing(s)]
    if len(enabled) != len(entries) or len(entries) < 2:
        return
    feats = [m.features[d] for _, _, d in entries]
    if any(f is None for f in feats):
        return
    candidates = []
    for j, (_, _, dj) in enumerate(entries):
        if all(i == j or order.at_least(feats[i], feats[j]) for i in range(len(entries))):
            candidates.append(j)
    if not candidates:
        return
    worst = min(candidates, key=lambda j: entries[j][2])
    kept_dest = entries[worst][2]
    for j, (idx, action, dest) in enumerate(entries):
        if j == worst:
            continue
        removed.add(idx)
        pairs.append(TrimmedPair(s, action, dest, kept_dest))


def trim_lss_state(m: PA, s: int, order: PartialOrder) -> tuple[PA, TrimReport]:
    """Collapse a state whose Dirac destinations all dominate a worst one.

    When every enabled action of ``s`` is a Dirac reachability choice and
    some destination is dominated by all others, only the transition to
    that worst destination survives (ties keep the smallest id).
    """
    removed: set[int] = set()
    pairs: list[TrimmedPair] = []
    _trim_state_worst(m, s, order, removed, pairs)
    return _strip(m, removed), TrimReport(order.name, tuple(pairs))


def trim_lss(m: PA, order: PartialOrder) -> tuple[PA, TrimReport]:
    """Worst-destination collapse applied to every state, ascending order."""
    removed: set[int] = set()
    pairs: list[TrimmedPair] = []
    for s in m.states:
        _trim_state_worst(m, s, order, removed, pairs)
    return _strip(m, removed), TrimReport(order.name, tuple(pairs))


def scheduler_reduction_factor(m: PA, report: TrimReport) -> Fraction:
    """Exact factor by which trimming divided the scheduler count.

    Each trimmed state contributes its pre-trim enabled-action count over
    its post-trim count.  After worst-destination collapse every trimmed
    state keeps one action, so the factor is the integer product of the
    branch degrees; pairwise trimming can leave several survivors, hence
    the exact rational return type.
    """
    factor = Fraction(1)
    removed_at: dict[int, int] = {}
    for p in report.pairs:
        removed_at[p.source] = removed_at.get(p.source, 0) + 1
    for s, k in removed_at.items():
        before = len(m.outgoing(s))
        after = before - k
        if after <= 0:
            raise ValueError("trim report inconsistent with model")
        factor *= Fraction(before, after)
    return factor


@dataclass(frozen=True)
class MosValidationRow:
    s1: int
    s2: int
    p: float
    p_min_schedulers: float
    scheduler_count: int


@dataclass(frozen=True)
class MosValidationReport:
    property: SafetyProperty
    rows: tuple[MosValidationRow, ...]

    def to_json_obj(self, m: PA | None = None) -> dict:
        rows = []
        for r in self.rows:
            row = {"s1": r.s1, "s2": r.s2, "p": r.p,
                   "p_min_schedulers": r.p_min_schedulers,
                   "scheduler_count": r.scheduler_count}
            if m is not None:
                row["s1_name"] = m.name_of(r.s1)
                row["s2_name"] = m.name_of(r.s2)
            rows.append(row)
        return {"bad_label": self.property.bad_label,
                "horizon": self.property.horizon, "rows": rows}

    def csv_rows(self, m: PA | None = None) -> tuple[list[str], list[list]]:
        header = ["s1", "s2", "p", "p_min_schedulers", "scheduler_count"]
        if m is not None:
            header += ["s1_name", "s2_name"]
        rows = []
        for r in self.rows:
            row = [r.s1, r.s2, repr(r.p), repr(r.p_min_schedulers), r.scheduler_count]
            if m is not None:
                row += [m.name_of(r.s1), m.name_of(r.s2)]
            rows.append(row)
        return header, rows


def validate_mos(m: PA, prop: SafetyProperty, pairs: Sequence[tuple[int, int]],
                 cap: int = 10 ** 6, slack: float = COMPARISON_SLACK,
                 min_tie_tol: float = 1e-9) -> MosValidationReport:
    """Proportion of schedulers under which each (safer, worse) pair holds.

    For every enumerated scheduler the safety probability is computed from
    each state of the model (one solve per scheduler); a pair counts as
    held when the safer state's probability is at least the worse state's
    minus a tiny slack.  The all-scheduler proportion is reported next to
    the proportion over minimum schedulers only.
    """
    pair_list = [(int(a), int(b)) for a, b in pairs]
    scored: list[tuple[float, list[bool]]] = []
    for sigma in enumerate_schedulers(m, cap=cap):
        vec = scheduler_value_vector(m, sigma, prop)
        flags = [vec[s1] >= vec[s2] - slack for s1, s2 in pair_list]
        scored.append((vec[m.initial], flags))

    total = len(scored)
    minimum = min(v for v, _ in scored) if scored else 0.0
    min_flags = [f for v, f in scored if v <= minimum + min_tie_tol]

    rows = []
    for i, (s1, s2) in enumerate(pair_list):
        p_all = sum(1 for _, f in scored if f[i]) / total if total else 1.0
        p_min = (sum(1 for f in min_flags if f[i]) / len(min_flags)) if min_flags else 1.0
        rows.append(MosValidationRow(s1, s2, p_all, p_min, total))
    return MosValidationReport(property=prop, rows=tuple(rows))
