"""Water tanks: draining dynamics, fill controller, perceived-level errors.

Each tank drains a constant amount per step; a controller with a single
water source starts filling a tank whose perceived level is below the low
threshold (least perceived water first, ties to the lowest id) and keeps
filling until the perceived level reaches the high threshold.  Safety means
no tank ever runs empty or overflows within the horizon.

Perception reports the true level plus a categorical error: integer offsets
inside a window, plus spurious "empty" and "full" readings.  The shipped
desk error model is synthetic and fully determined by
:func:`tank_desk_params` (triangular offset weights, a positive skew via
the spurious-full mass); it serializes with the parameter set.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Sequence

from ..abstraction import (Box, ControllerPlantSpec, IntervalGrid,
                           build_interval_abstraction)
from ..mos import PartialOrder, product_order
from ..pa import PA, PERCEPTION, ActionLabel, Distribution, ModelError, compose
from ..pmc import SafetyProperty

UNSAFE = "unsafe"

_WIDE = 1e12


@dataclass(frozen=True)
class ErrorModel:
    """Categorical perceived-level error: offsets plus spurious extremes."""

    offsets: tuple[tuple[int, float], ...] = ()
    p_empty: float = 0.0
    p_full: float = 0.0

    @classmethod
    def triangular(cls, half_width: int = 6, mass: float = 0.9,
                   p_empty: float = 0.04, p_full: float = 0.06) -> "ErrorModel":
        weights = {e: half_width + 1 - abs(e) for e in range(-half_width, half_width + 1)}
        total = sum(weights.values())
        offsets = tuple((e, mass * w / total) for e, w in sorted(weights.items()))
        return cls(offsets=offsets, p_empty=p_empty, p_full=p_full)

    def total_mass(self) -> float:
        return sum(p for _, p in self.offsets) + self.p_empty + self.p_full

    def outcomes(self, level: float, capacity: float) -> list[tuple[float, float]]:
        """Perceived levels with probabilities for one tank at ``level``."""
        acc: dict[float, float] = {}
        for e, p in self.offsets:
            perceived = min(max(level + e, 0.0), capacity)
            acc[perceived] = acc.get(perceived, 0.0) + p
        if self.p_empty:
            acc[0.0] = acc.get(0.0, 0.0) + self.p_empty
        if self.p_full:
            acc[capacity] = acc.get(capacity, 0.0) + self.p_full
        return sorted(acc.items())


@dataclass(frozen=True)
class TankParams:
    tanks: int = 1
    capacity: float = 100.0
    outflow: float = 3.0
    inflow: float = 40.0
    low_threshold: float = 20.0
    high_threshold: float = 80.0
    horizon: int = 4
    errors: ErrorModel = field(default_factory=ErrorModel.triangular)

    def __post_init__(self):
        if not 0 < self.low_threshold < self.high_threshold <= self.capacity:
            raise ModelError("thresholds must satisfy 0 < low < high <= capacity")
        if abs(self.errors.total_mass() - 1.0) > 1e-9:
            raise ModelError("error model probabilities must sum to 1")

    def to_json_obj(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TankParams":
        data = dict(obj)
        errors = dict(obj.get("errors", {}))
        errors["offsets"] = tuple(tuple(o) for o in errors.get("offsets", ()))
        data["errors"] = ErrorModel(**errors)
        return cls(**data)


def tank_control(perceived: Sequence[float], filling: int | None,
                 params: TankParams) -> int | None:
    """Fill target given perceived levels and the currently filled tank."""
    if filling is not None and perceived[filling] < params.high_threshold:
        return filling
    candidates = [i for i, w in enumerate(perceived) if w < params.low_threshold]
    if not candidates:
        return None
    return min(candidates, key=lambda i: (perceived[i], i))


def tank_step(levels: Sequence[float], target: int | None,
              params: TankParams) -> tuple[float, ...]:
    """All tanks drain; the targeted tank (if any) additionally receives inflow."""
    return tuple(
        w - params.outflow + (params.inflow if i == target else 0.0)
        for i, w in enumerate(levels))


def _representative(box: Box) -> tuple[float, ...]:
    """Level the perception conditions on: exact for points, rounded midpoint for cells."""
    return tuple(lo if lo == hi else float(round(0.5 * (lo + hi))) for lo, hi in box)


def _perceived_vectors(params: TankParams, levels: Sequence[float]
                       ) -> list[tuple[tuple[float, ...], float]]:
    """Joint perceived-level outcomes, tanks independent."""
    joint: list[tuple[tuple[float, ...], float]] = [((), 1.0)]
    for w in levels:
        per_tank = params.errors.outcomes(w, params.capacity)
        joint = [(vec + (val,), p * q) for vec, p in joint for val, q in per_tank]
    merged: dict[tuple[float, ...], float] = {}
    for vec, p in joint:
        merged[vec] = merged.get(vec, 0.0) + p
    return sorted(merged.items())


def _possible_levels(params: TankParams, initial: Sequence[float]) -> list[tuple[float, ...]]:
    """True level vectors reachable within the horizon (exact dynamics)."""
    frontier = {tuple(float(w) for w in initial)}
    seen = set(frontier)
    for _ in range(params.horizon):
        nxt = set()
        for levels in frontier:
            if any(w <= 0.0 or w >= params.capacity for w in levels):
                continue
            targets = set()
            for perceived, _ in _perceived_vectors(params, levels):
                for filling in [None] + list(range(params.tanks)):
                    targets.add(tank_control(perceived, filling, params))
            for t in targets:
                nxt.add(tank_step(levels, t, params))
        frontier = nxt - seen
        seen |= nxt
    return sorted(seen)


def _make_plant_spec(params: TankParams, grid: IntervalGrid | None,
                     inputs: tuple, registry: dict[str, tuple[float, ...]]
                     ) -> ControllerPlantSpec:
    exact = grid is None
    n = params.tanks
    if exact:
        bounds = tuple((-_WIDE, _WIDE) for _ in range(n))
        exits = tuple((None, None) for _ in range(n))
    else:
        bounds = tuple((grid.lows[i], grid.highs[i]) for i in range(n))
        exits = tuple((UNSAFE, UNSAFE) for _ in range(n))

    def input_class(filling, perceived):
        return tank_control(perceived, filling, params)

    def apply_class(point, filling, target):
        return tank_step(point, target, params), target

    def modes(box, filling, target):
        return [target]

    def apply_mode(point, filling, target, mode):
        return tank_step(point, target, params), target

    def cell_labels(box, filling):
        # A cell is unsafe when it contains a violating level: w <= 0 is in
        # a half-open cell iff the cell starts at or below 0; w >= capacity
        # can only be hit by exact points (grid cells stay below the top).
        for lo, hi in box:
            if lo == hi:
                if lo <= 0.0 or lo >= params.capacity:
                    return frozenset({UNSAFE})
            elif lo <= 0.0:
                return frozenset({UNSAFE})
        return frozenset()

    def transmit_symbol(box, filling):
        rep = _representative(box)
        sym = "lv" + ",".join(f"{w:g}" for w in rep)
        registry.setdefault(sym, rep)
        return sym

    def input_symbol(perceived):
        return "p" + ",".join(f"{w:g}" for w in perceived)

    return ControllerPlantSpec(
        dim_names=tuple(f"w{i}" for i in range(n)), bounds=bounds, inputs=inputs,
        input_class=input_class, apply_class=apply_class, modes=modes,
        apply_mode=apply_mode, exit_labels=exits, cell_labels=cell_labels,
        transmit_symbol=transmit_symbol, input_symbol=input_symbol,
        ctl_init=None, horizon=params.horizon,
        absorbing_labels=frozenset({UNSAFE}))


def build_level_perception(params: TankParams, registry: dict[str, tuple[float, ...]],
                           inputs: tuple) -> PA:
    """Stateless perception: receive true levels, emit a perceived vector.

    The declared alphabet covers every perceived vector of the channel,
    emitted or not, so composition synchronizes (and blocks) on all of
    them instead of treating unemitted readings as free-running plant
    moves.
    """
    symbols = sorted(registry)
    index: dict[tuple, int] = {}
    names: list[str] = []
    transitions = []

    def intern(key, name) -> int:
        if key not in index:
            index[key] = len(names)
            names.append(name)
        return index[key]

    def out_symbol(perceived) -> str:
        return "p" + ",".join(f"{w:g}" for w in perceived)

    wait = intern(("wait",), "per:wait")
    emits = {}
    for sym in symbols:
        support = []
        for perceived, p in _perceived_vectors(params, registry[sym]):
            if perceived not in emits:
                emits[perceived] = intern(("emit", perceived), f"per:emit{perceived}")
            support.append((emits[perceived], p))
        transitions.append((wait, ActionLabel(sym, PERCEPTION), Distribution.of(support)))
    for perceived, sid in emits.items():
        transitions.append((sid, ActionLabel(out_symbol(perceived), PERCEPTION),
                            Distribution.dirac(wait)))

    alphabet = {a for _, a, _ in transitions}
    alphabet |= {ActionLabel(out_symbol(k), PERCEPTION) for k in inputs}
    return PA.build(n_states=len(names), initial=wait, transitions=transitions,
                    state_names=names, alphabet=alphabet)


def build_tank_model(params: TankParams, grid: IntervalGrid | None,
                     initial: Sequence[float]) -> tuple[PA, SafetyProperty]:
    """Compose level perception with the (abstracted or exact) tank loop."""
    if grid is None:
        levels = _possible_levels(params, initial)
        perceived_set = set()
        for vec in levels:
            for perceived, _ in _perceived_vectors(params, vec):
                perceived_set.add(perceived)
        inputs = tuple(sorted(perceived_set))
    else:
        per_tank_values: list[set[float]] = [set() for _ in range(params.tanks)]
        for i in range(params.tanks):
            for j in range(grid.cells_per_dim(i)):
                lo = grid.lows[i] + j * grid.widths[i]
                hi = min(lo + grid.widths[i], grid.highs[i])
                rep = float(round(0.5 * (lo + hi)))
                for val, _ in params.errors.outcomes(rep, params.capacity):
                    per_tank_values[i].add(val)
        inputs = tuple(sorted(itertools.product(*map(sorted, per_tank_values))))

    registry: dict[str, tuple[float, ...]] = {}
    spec = _make_plant_spec(params, grid, inputs, registry)
    plant = build_interval_abstraction(spec, grid, tuple(float(w) for w in initial))
    perception = build_level_perception(params, registry, inputs)
    return compose(perception, plant), SafetyProperty(UNSAFE)


def tank_order(params: TankParams) -> PartialOrder:
    """Level nearer the half-capacity middle (per tank, same side) is safer."""
    middle = params.capacity / 2.0
    comps = [(f"w{i}", ("middle", middle)) for i in range(params.tanks)]
    return product_order("level-toward-middle", comps)


def tank_desk_params() -> TankParams:
    """Desk-scale single tank with the documented synthetic error model."""
    return TankParams(
        tanks=1, capacity=30.0, outflow=3.0, inflow=18.0,
        low_threshold=10.0, high_threshold=20.0, horizon=3,
        errors=ErrorModel.triangular(half_width=6, mass=0.9,
                                     p_empty=0.04, p_full=0.06))


def tank_desk_model(width: float = 5.0, initial: float = 12.5,
                    ) -> tuple[PA, SafetyProperty, IntervalGrid, TankParams]:
    params = tank_desk_params()
    grid = IntervalGrid(lows=(0.0,), highs=(params.capacity,), widths=(width,))
    model, prop = build_tank_model(params, grid, (initial,))
    return model, prop, grid, params


def tank_sampling_params() -> TankParams:
    """Tank configuration at scheduler-sampling scale.

    The enumerable desk model is too small to show sampling dilution: with
    around a thousand schedulers, ten uniform draws almost always include a
    near-worst one.  This configuration (finer grid, longer horizon, same
    error model) has far too many schedulers to enumerate, which is exactly
    the regime where trimming buys sampling accuracy.
    """
    return TankParams(
        tanks=1, capacity=30.0, outflow=2.5, inflow=8.0,
        low_threshold=12.0, high_threshold=22.0, horizon=20,
        errors=ErrorModel.triangular(half_width=6, mass=0.9,
                                     p_empty=0.04, p_full=0.06))


def tank_sampling_model(width: float = 1.0, initial: float = 16.5,
                        ) -> tuple[PA, SafetyProperty, IntervalGrid, TankParams]:
    params = tank_sampling_params()
    grid = IntervalGrid(lows=(0.0,), highs=(params.capacity,), widths=(width,))
    model, prop = build_tank_model(params, grid, (initial,))
    return model, prop, grid, params
