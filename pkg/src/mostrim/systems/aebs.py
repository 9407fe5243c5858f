"""Emergency braking: kinematics, threshold controller, detection model.

A car approaches a stationary obstacle; a perception channel reports
detections whose probability depends on distance and on the recent
detection history, a majority-vote filter smooths them, and the controller
picks a braking power from time-to-collision and warning-index thresholds.
Safety means the gap never shrinks to the minimum allowed distance.

The shipped detection table is synthetic (the probability falls off
affinely with the distance bin and is nudged by the count of recent
detections); its constants live in :func:`aebs_desk_params` and serialize
with the parameter set, so every desk result is reproducible from the
JSON alone.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from ..abstraction import (Box, ControllerPlantSpec, IntervalGrid,
                           build_interval_abstraction)
from ..mos import PartialOrder, product_order
from ..pa import PA, PERCEPTION, ActionLabel, Distribution, ModelError, compose
from ..pmc import SafetyProperty

DETECT = "detect"
NO_DETECT = "nodetect"
COLLIDED = "collided"

_WIDE = 1e12


@dataclass(frozen=True)
class DetectionModel:
    """Probability of a low-level detection given distance and history.

    kinds:
      table          -- base probability per distance bin, shifted by the
                        share of detections in the current history window
      ceil_fraction  -- 1 - ceil(d)/denominator (distance-dependent ramp)
      constant       -- fixed probability
    """

    kind: str = "table"
    bin_width: float = 10.0
    base: tuple[float, ...] = ()
    history_weight: float = 0.1
    value: float = 0.5
    denominator: float = 20.0

    def prob(self, distance: float, history: tuple[int, ...]) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "ceil_fraction":
            return min(1.0, max(0.0, 1.0 - math.ceil(distance) / self.denominator))
        if self.kind == "table":
            if not self.base:
                raise ModelError("table detection model needs base probabilities")
            b = min(max(int(distance // self.bin_width), 0), len(self.base) - 1)
            shift = 0.0
            if history:
                ones = sum(history)
                shift = self.history_weight * (2.0 * ones - len(history)) / len(history)
            return min(0.99, max(0.01, self.base[b] + shift))
        raise ModelError(f"unknown detection model kind {self.kind!r}")


@dataclass(frozen=True)
class BrakingRule:
    """Braking-power selection once a detection is reported.

    kinds:
      ttc_wi          -- the two-threshold table over TTC and warning index
      distance_steps  -- first (threshold, power) with d <= threshold,
                         else default_power
      constant        -- always default_power
    """

    kind: str = "ttc_wi"
    steps: tuple[tuple[float, float], ...] = ()
    default_power: float = 0.0


@dataclass(frozen=True)
class AebsParams:
    tau: float = 1.0
    b1: float = 3.0
    b2: float = 10.0
    c1: float = 1.0
    c2: float = 3.0
    t_h: float = 2.0
    t_s: float = 0.0
    friction: float = 1.0
    min_gap: float = 5.0
    history: int = 3
    filter_window: int = 3
    initial_history: tuple[int, ...] | None = None  # None = all misses
    detection: DetectionModel = field(default_factory=DetectionModel)
    braking: BrakingRule = field(default_factory=BrakingRule)

    def to_json_obj(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AebsParams":
        data = dict(obj)
        data["detection"] = DetectionModel(**{
            **obj.get("detection", {}),
            "base": tuple(obj.get("detection", {}).get("base", ()))})
        braking = dict(obj.get("braking", {}))
        braking["steps"] = tuple(tuple(s) for s in braking.get("steps", ()))
        data["braking"] = BrakingRule(**braking)
        if data.get("initial_history") is not None:
            data["initial_history"] = tuple(data["initial_history"])
        return cls(**data)


def aebs_step(d: float, v: float, power: float, tau: float) -> tuple[float, float]:
    """One kinematic step: distance shrinks by tau*v, speed drops by tau*power."""
    return d - tau * v, max(0.0, v - tau * power)


def _ttc_wi_power(d: float, v: float, p: AebsParams) -> float:
    ttc = d / v
    d_br = v * p.t_s + p.friction * v * v / (2.0 * p.b2)
    wi = (d - d_br) / (v * p.t_h)
    near_wi = wi <= p.c1
    near_ttc = ttc <= p.c2
    if near_wi and near_ttc:
        return p.b2
    if near_wi or near_ttc:
        return p.b1
    return 0.0


def aebs_control(d: float, v: float, detected: bool, params: AebsParams) -> float:
    """Braking power for the current state; no detection means no braking.

    At v = 0 the threshold metrics are undefined and the car is already
    stopped, so the power is 0 by convention.
    """
    if not detected or v <= 0.0:
        return 0.0
    rule = params.braking
    if rule.kind == "constant":
        return rule.default_power
    if rule.kind == "distance_steps":
        for threshold, power in rule.steps:
            if d <= threshold:
                return power
        return rule.default_power
    if rule.kind == "ttc_wi":
        return _ttc_wi_power(d, v, params)
    raise ModelError(f"unknown braking rule kind {rule.kind!r}")


def _possible_powers(box: Box, detected: bool, p: AebsParams) -> list[float]:
    """Braking powers possibly realized somewhere in the cell box.

    Both threshold metrics are monotone over the box (increasing in d,
    decreasing in v), so their ranges come from opposite corners; cells
    straddling a threshold contribute the modes of both sides.
    """
    if not detected:
        return [0.0]
    (d1, d2), (v1, v2) = box
    rule = p.braking
    if rule.kind == "constant":
        return [rule.default_power]
    if rule.kind == "distance_steps":
        # Step i covers distances in (previous threshold, threshold];
        # collect the powers of every segment the d-interval touches.
        powers = []
        prev = -math.inf
        for threshold, power in rule.steps:
            if d1 <= threshold and d2 > prev and power not in powers:
                powers.append(power)
            prev = threshold
        if d2 > prev and rule.default_power not in powers:
            powers.append(rule.default_power)
        return powers
    if rule.kind == "ttc_wi":
        if v2 <= 0.0:
            return [0.0]

        def metrics(d: float, v: float) -> tuple[float, float]:
            if v <= 0.0:
                return math.inf, math.inf
            d_br = v * p.t_s + p.friction * v * v / (2.0 * p.b2)
            return d / v, (d - d_br) / (v * p.t_h)

        ttc_min, wi_min = metrics(d1, v2)
        ttc_max, wi_max = metrics(d2, v1)
        wi_true = wi_min <= p.c1
        wi_false = wi_max > p.c1
        ttc_true = ttc_min <= p.c2
        ttc_false = ttc_max > p.c2
        powers = []
        for near_wi in (True, False):
            if (near_wi and not wi_true) or (not near_wi and not wi_false):
                continue
            for near_ttc in (True, False):
                if (near_ttc and not ttc_true) or (not near_ttc and not ttc_false):
                    continue
                power = p.b2 if (near_wi and near_ttc) else (
                    0.0 if not (near_wi or near_ttc) else p.b1)
                if power not in powers:
                    powers.append(power)
        # Stopped sub-states of a cell touching v = 0 never brake or move.
        if v1 <= 0.0 and 0.0 not in powers:
            powers.append(0.0)
        return powers
    raise ModelError(f"unknown braking rule kind {rule.kind!r}")


def _make_plant_spec(params: AebsParams, grid: IntervalGrid | None,
                     registry: dict[str, float]) -> ControllerPlantSpec:
    exact = grid is None
    if exact:
        bounds = ((-_WIDE, _WIDE), (0.0, _WIDE))
        exits = ((None, None), (None, None))
    else:
        bounds = ((grid.lows[0], grid.highs[0]), (grid.lows[1], grid.highs[1]))
        exits = ((COLLIDED, None), (None, None))

    def input_class(ctl, k):
        return k

    def apply_class(point, ctl, detected):
        d, v = point
        power = aebs_control(d, v, detected, params)
        return aebs_step(d, v, power, params.tau), None

    def modes(box, ctl, detected):
        return _possible_powers(box, detected, params)

    def apply_mode(point, ctl, detected, power):
        d, v = point
        return aebs_step(d, v, power, params.tau), None

    def cell_labels(box, ctl):
        if box[0][0] <= params.min_gap:
            return frozenset({COLLIDED})
        return frozenset()

    def transmit_symbol(box, ctl):
        d_lo, d_hi = box[0]
        mid = 0.5 * (d_lo + d_hi)
        if exact:
            sym = f"d={d_lo:g}"
        else:
            sym = f"d{int(d_lo // params.detection.bin_width)}"
        registry.setdefault(sym, mid)
        return sym

    def input_symbol(k):
        return DETECT if k else NO_DETECT

    def is_rest(box, ctl):
        return box[1][0] == box[1][1] == 0.0

    return ControllerPlantSpec(
        dim_names=("d", "v"), bounds=bounds, inputs=(True, False),
        input_class=input_class, apply_class=apply_class, modes=modes,
        apply_mode=apply_mode, exit_labels=exits, cell_labels=cell_labels,
        transmit_symbol=transmit_symbol, input_symbol=input_symbol,
        ctl_init=None, horizon=None, absorbing_labels=frozenset({COLLIDED}),
        is_rest=is_rest)


def build_detection_automaton(params: AebsParams, registry: dict[str, float]) -> PA:
    """History automaton of the filtered perception channel.

    Waits for a distance symbol, draws a low-level reading with the
    distance- and history-conditioned probability (the only probabilistic
    transition in the whole system), then emits the majority vote over the
    last readings.
    """
    w = params.history
    nf = params.filter_window
    if not 1 <= nf <= w:
        raise ModelError("filter window must be within the history length")
    start_hist = params.initial_history or (0,) * w
    if len(start_hist) != w or any(r not in (0, 1) for r in start_hist):
        raise ModelError("initial history must be a 0/1 tuple of the history length")
    symbols = sorted(registry)

    index: dict[tuple, int] = {}
    names: list[str] = []
    feats: list[dict] = []
    transitions = []
    queue: list[tuple] = []

    def intern(key) -> int:
        if key not in index:
            index[key] = len(names)
            phase, hist = key
            names.append(f"per:{phase}:{''.join(map(str, hist))}")
            feats.append({"hist": "".join(map(str, hist))})
            queue.append(key)
        return index[key]

    start = ("wait", start_hist)
    intern(start)
    head = 0
    while head < len(queue):
        key = queue[head]
        head += 1
        phase, hist = key
        sid = index[key]
        if phase == "wait":
            for sym in symbols:
                p = params.detection.prob(registry[sym], hist)
                support = []
                if p > 0.0:
                    support.append((intern(("emit", hist[1:] + (1,))), p))
                if p < 1.0:
                    support.append((intern(("emit", hist[1:] + (0,))), 1.0 - p))
                transitions.append((sid, ActionLabel(sym, PERCEPTION),
                                    Distribution.of(support)))
        else:
            votes = sum(hist[-nf:])
            out = DETECT if 2 * votes >= nf else NO_DETECT
            transitions.append((sid, ActionLabel(out, PERCEPTION),
                                Distribution.dirac(intern(("wait", hist)))))

    # Both channel outputs are declared even when one is never emitted
    # (e.g. certain detection), so composition blocks on the other instead
    # of letting the plant consume it unsynchronized.
    alphabet = {a for _, a, _ in transitions}
    alphabet |= {ActionLabel(DETECT, PERCEPTION), ActionLabel(NO_DETECT, PERCEPTION)}
    return PA.build(n_states=len(names), initial=index[start],
                    transitions=transitions, features=feats, state_names=names,
                    alphabet=alphabet)


def build_aebs_model(params: AebsParams, grid: IntervalGrid | None,
                     initial: tuple[float, float]) -> tuple[PA, SafetyProperty]:
    """Compose perception with the (abstracted or exact) braking loop."""
    registry: dict[str, float] = {}
    spec = _make_plant_spec(params, grid, registry)
    plant = build_interval_abstraction(spec, grid, initial)
    perception = build_detection_automaton(params, registry)
    return compose(perception, plant), SafetyProperty(COLLIDED)


def aebs_orders() -> dict[str, PartialOrder]:
    """Monotonic-safety orders: farther is safer, slower is safer."""
    return {
        "distance": product_order("distance-up", [("d", "larger")]),
        "speed": product_order("speed-down", [("v", "smaller")]),
        "default": product_order("distance-up-speed-down",
                                 [("d", "larger"), ("v", "smaller")]),
    }


def aebs_desk_params() -> AebsParams:
    """Desk-scale braking scenario with the documented synthetic detection table.

    Thresholds are scaled so that at ~1 m/s approach speeds the warning
    index and time-to-collision cross inside the modeled distance range,
    keeping all three braking powers reachable; the detection channel
    starts warm (two recent sightings), as if the obstacle had already
    been in view when the scenario begins.
    """
    return AebsParams(
        tau=1.0, b1=3.0, b2=10.0, c1=2.5, c2=7.5, t_h=2.0, t_s=0.0,
        friction=1.0, min_gap=5.0, history=3, filter_window=3,
        initial_history=(0, 1, 1),
        detection=DetectionModel(
            kind="table", bin_width=2.0,
            base=(0.97, 0.95, 0.92, 0.88, 0.82, 0.74, 0.66, 0.58),
            history_weight=0.1),
        braking=BrakingRule(kind="ttc_wi"))


def aebs_desk_model(widths: tuple[float, float] = (0.25, 0.4),
                    initial: tuple[float, float] = (9.0, 1.2),
                    ) -> tuple[PA, SafetyProperty, IntervalGrid, AebsParams]:
    params = aebs_desk_params()
    grid = IntervalGrid(lows=(params.min_gap, 0.0), highs=(13.0, 2.0), widths=widths)
    model, prop = build_aebs_model(params, grid, initial)
    return model, prop, grid, params
