"""Interval abstraction of deterministic controller/plant loops.

A concrete closed loop is a step function over a continuous state (plus a
small discrete controller mode) driven by perception inputs.  The abstract
model partitions the continuous space into half-open grid cells; a cell
moves under an input to every cell overlapping the image of its box, each
such branch carrying a fresh Dirac reachability-choice action.  The result
is a non-deterministic automaton that simulates every concrete trajectory
and, composed with a probabilistic perception model, is the object that
model checking and scheduler sampling analyze.

The loop is encoded in three phases per time step so that composition with
a perception automaton is plain shared-action synchronization:

    cell state --transmit symbol--> listen --input symbol--> choice state
    choice state --unique reachability action--> next cell state

Image boxes are computed by corner propagation, which is exact per
dimension for the piecewise-affine, per-dimension-monotone step functions
this supports; cells straddling a controller decision boundary take the
union of every possibly-realized control mode's image.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

from .pa import PA, PERCEPTION, REACHABILITY, ActionLabel, Distribution, ModelError

Box = tuple[tuple[float, float], ...]
Point = tuple[float, ...]


def _never_rest(box: Box, ctl: Hashable) -> bool:
    return False


@dataclass(frozen=True)
class IntervalGrid:
    """Uniform half-open cells [lo + i*w, lo + (i+1)*w) per dimension."""

    lows: tuple[float, ...]
    highs: tuple[float, ...]
    widths: tuple[float, ...]

    def __post_init__(self):
        for lo, hi, w in zip(self.lows, self.highs, self.widths):
            if w <= 0:
                raise ModelError("grid widths must be positive")
            if hi <= lo:
                raise ModelError("grid bounds must be non-empty")

    @property
    def dims(self) -> int:
        return len(self.widths)

    def cells_per_dim(self, d: int) -> int:
        span = self.highs[d] - self.lows[d]
        n = span / self.widths[d]
        if abs(n - round(n)) < 1e-9:
            return int(round(n))
        return math.ceil(n)

    def cell_of(self, point: Point) -> tuple[int, ...]:
        idx = []
        for d, x in enumerate(point):
            if not self.lows[d] <= x < self.highs[d]:
                raise ModelError(f"point {point} outside grid bounds in dimension {d}")
            # Nudge against float error so points on a cell boundary land in
            # the upper (closed-low) cell they belong to.
            i = math.floor((x - self.lows[d]) / self.widths[d] + 1e-9)
            i = min(max(i, 0), self.cells_per_dim(d) - 1)
            idx.append(i)
        return tuple(idx)

    def box(self, idx: Sequence[int]) -> Box:
        out = []
        for d, i in enumerate(idx):
            lo = self.lows[d] + i * self.widths[d]
            hi = min(lo + self.widths[d], self.highs[d])
            out.append((lo, hi))
        return tuple(out)

    def _overlaps_1d(self, d: int, lo: float, hi: float, closed_hi: bool) -> tuple[list[int], bool, bool]:
        """Cell indices overlapping [lo, hi) (or [lo, hi]) plus exit flags."""
        below = lo < self.lows[d]
        if closed_hi:
            above = hi >= self.highs[d]
        else:
            above = hi > self.highs[d]
        cells = []
        n = self.cells_per_dim(d)
        first = max(0, int((lo - self.lows[d]) // self.widths[d]) - 1)
        for i in range(first, n):
            clo = self.lows[d] + i * self.widths[d]
            chi = min(clo + self.widths[d], self.highs[d])
            if closed_hi or hi == lo:
                hit = lo < chi and hi >= clo
            else:
                hit = lo < chi and hi > clo
            if hit:
                cells.append(i)
            elif cells:
                break
        return cells, below, above

    def overlapping(self, intervals: Sequence[tuple[float, float, bool]]
                    ) -> tuple[list[tuple[int, ...]], set[int], set[int]]:
        """Cells overlapping a per-dimension interval box, with exit dims."""
        per_dim = []
        below_dims: set[int] = set()
        above_dims: set[int] = set()
        for d, (lo, hi, closed_hi) in enumerate(intervals):
            cells, below, above = self._overlaps_1d(d, lo, hi, closed_hi)
            per_dim.append(cells)
            if below:
                below_dims.add(d)
            if above:
                above_dims.add(d)
        combos = [tuple(c) for c in itertools.product(*per_dim)] if all(per_dim) else []
        return combos, below_dims, above_dims


@dataclass(frozen=True)
class AbstractCell:
    indices: tuple[int, ...]
    box: Box


@dataclass(frozen=True)
class ControllerPlantSpec:
    """Deterministic closed loop prepared for interval abstraction.

    ``apply_class`` is the exact concrete step given a resolved input class
    (e.g. a detection flag or a fill decision); ``modes``/``apply_mode``
    expose its piecewise-affine structure: ``modes`` lists every control
    mode possibly realized inside a box and ``apply_mode`` evaluates the
    step under a forced mode.  Within one mode the map must be affine and
    monotone per dimension so corner propagation yields the exact image
    box.  Dynamics may depend on the raw input only through
    ``input_class``.
    """

    dim_names: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]
    inputs: tuple[Hashable, ...]
    input_class: Callable[[Hashable, Hashable], Hashable]
    apply_class: Callable[[Point, Hashable, Hashable], tuple[Point, Hashable]]
    modes: Callable[[Box, Hashable, Hashable], Sequence[Hashable]]
    apply_mode: Callable[[Point, Hashable, Hashable, Hashable], tuple[Point, Hashable]]
    exit_labels: tuple[tuple[str | None, str | None], ...]
    cell_labels: Callable[[Box, Hashable], frozenset[str]]
    transmit_symbol: Callable[[Box, Hashable], str]
    input_symbol: Callable[[Hashable], str]
    ctl_init: Hashable = None
    horizon: int | None = None
    absorbing_labels: frozenset[str] = frozenset()
    is_rest: Callable[[Box, Hashable], bool] = _never_rest


def _corners(box: Box) -> list[Point]:
    axes = [(lo,) if lo == hi else (lo, hi) for lo, hi in box]
    return [tuple(c) for c in itertools.product(*axes)]


def _mode_image(spec: ControllerPlantSpec, box: Box, ctl: Hashable, cls: Hashable,
                mode: Hashable) -> tuple[list[tuple[float, float, bool]], Hashable]:
    """Per-dimension image interval of a box under one control mode.

    Intervals are half-open [min-corner, max-corner) like the cells
    themselves, collapsing to closed points for degenerate dimensions.
    """
    images = []
    ctl_out = None
    for corner in _corners(box):
        nxt, c2 = spec.apply_mode(corner, ctl, cls, mode)
        images.append(nxt)
        if ctl_out is None:
            ctl_out = c2
        elif ctl_out != c2:
            raise ModelError("controller mode update must be uniform over a cell")
    intervals = []
    for d in range(len(box)):
        vals = [img[d] for img in images]
        lo, hi = min(vals), max(vals)
        intervals.append((lo, hi, lo == hi))
    return intervals, ctl_out


def image_successors(spec: ControllerPlantSpec, grid: IntervalGrid, box: Box,
                     ctl: Hashable, cls: Hashable
                     ) -> tuple[list[tuple[tuple[int, ...], Hashable]], list[str], list[Hashable]]:
    """Destination cells (with updated controller state), exit labels, rests.

    A mode whose image box satisfies the rest predicate (e.g. the whole
    cell brakes to exactly zero speed) sends its safe portion to an
    absorbing rest marker instead of ordinary cells: the point image is
    exact, so every covered concrete state provably stays put forever.
    Bad-labeled cells in such an image are kept as cell destinations.
    """
    dests: list[tuple[tuple[int, ...], Hashable]] = []
    exits: list[str] = []
    rests: list[Hashable] = []
    for mode in spec.modes(box, ctl, cls):
        intervals, ctl_out = _mode_image(spec, box, ctl, cls, mode)
        image_box = tuple((lo, hi) for lo, hi, _ in intervals)
        cells, below, above = grid.overlapping(intervals)
        at_rest = spec.is_rest(image_box, ctl_out)
        for c in cells:
            if at_rest and not spec.cell_labels(grid.box(c), ctl_out) & spec.absorbing_labels:
                if ctl_out not in rests:
                    rests.append(ctl_out)
                continue
            if (c, ctl_out) not in dests:
                dests.append((c, ctl_out))
        for d in below:
            label = spec.exit_labels[d][0]
            if label is None:
                raise ModelError(f"image exits dimension {spec.dim_names[d]} below bounds "
                                 "with no exit label declared")
            if label not in exits:
                exits.append(label)
        for d in above:
            label = spec.exit_labels[d][1]
            if label is None:
                raise ModelError(f"image exits dimension {spec.dim_names[d]} above bounds "
                                 "with no exit label declared")
            if label not in exits:
                exits.append(label)
    dests.sort(key=lambda dc: (repr(dc[1]), dc[0]))
    exits.sort()
    return dests, exits, rests


def reachable_cells(spec: ControllerPlantSpec, grid: IntervalGrid,
                    cell: AbstractCell | Sequence[int], k: Hashable,
                    ctl: Hashable = None) -> set[AbstractCell]:
    """Cells overlapping the image of ``cell`` under perception input ``k``."""
    idx = tuple(cell.indices if isinstance(cell, AbstractCell) else cell)
    if ctl is None:
        ctl = spec.ctl_init
    cls = spec.input_class(ctl, k)
    dests, _, _ = image_successors(spec, grid, grid.box(idx), ctl, cls)
    return {AbstractCell(c, grid.box(c)) for c, _ in dests}


def _point_successor(spec: ControllerPlantSpec, point: Point, ctl: Hashable,
                     cls: Hashable) -> tuple[Point | None, Hashable | None, str | None]:
    nxt, ctl_out = spec.apply_class(point, ctl, cls)
    for d, x in enumerate(nxt):
        lo, hi = spec.bounds[d]
        if x < lo:
            label = spec.exit_labels[d][0]
            if label is None:
                raise ModelError(f"state exits dimension {spec.dim_names[d]} below bounds")
            return None, None, label
        if x >= hi:
            label = spec.exit_labels[d][1]
            if label is None:
                raise ModelError(f"state exits dimension {spec.dim_names[d]} above bounds")
            return None, None, label
    return nxt, ctl_out, None


@dataclass(frozen=True)
class ConcreteTrace:
    states: tuple[tuple[Point, Hashable], ...]
    exit_label: str | None = None


def simulate_concrete(spec: ControllerPlantSpec, initial: Point,
                      inputs: Sequence[Hashable]) -> ConcreteTrace:
    """Iterate the exact step function along an input sequence.

    Stops early when the state leaves the declared bounds through a
    boundary with an exit label; leaving through an undeclared boundary is
    an error.
    """
    point = tuple(float(x) for x in initial)
    ctl = spec.ctl_init
    states = [(point, ctl)]
    for k in inputs:
        cls = spec.input_class(ctl, k)
        nxt, ctl2, exit_label = _point_successor(spec, point, ctl, cls)
        if exit_label is not None:
            return ConcreteTrace(tuple(states), exit_label)
        point, ctl = nxt, ctl2
        states.append((point, ctl))
    return ConcreteTrace(tuple(states))


def _fmt(value: float) -> str:
    return f"{value:g}"


class _ModelAssembler:
    """Shared BFS scaffolding for grid-based and exact-state builders."""

    def __init__(self, spec: ControllerPlantSpec):
        self.spec = spec
        self.index: dict[Hashable, int] = {}
        self.names: list[str] = []
        self.labels: list[frozenset[str]] = []
        self.features: list[dict | None] = []
        self.transitions: list[tuple[int, ActionLabel, Distribution]] = []
        self.queue: list[Hashable] = []

    def intern(self, key: Hashable, name: str, labels: frozenset[str] = frozenset(),
               features: dict | None = None) -> int:
        if key not in self.index:
            self.index[key] = len(self.names)
            self.names.append(name)
            self.labels.append(labels)
            self.features.append(features)
            self.queue.append(key)
        return self.index[key]

    def sink(self, label: str) -> int:
        return self.intern(("sink", label), f"sink:{label}",
                           labels=frozenset({label}), features={"sink": label})

    def rest(self, ctl) -> int:
        return self.intern(("rest", ctl), f"rest|{ctl}", features={"rest": True})

    def add(self, src: int, action: ActionLabel, dist: Distribution) -> None:
        self.transitions.append((src, action, dist))

    def finish(self, initial_key: Hashable) -> PA:
        return PA.build(
            n_states=len(self.names), initial=self.index[initial_key],
            transitions=self.transitions, labels=self.labels,
            features=self.features, state_names=self.names)


def _cell_features(spec: ControllerPlantSpec, box: Box, ctl: Hashable,
                   t: int) -> dict:
    feats: dict = {name: (lo, hi) if lo != hi else lo
                   for name, (lo, hi) in zip(spec.dim_names, box)}
    feats["ctl"] = ctl
    if spec.horizon is not None:
        feats["t"] = t
    return feats


def build_interval_abstraction(spec: ControllerPlantSpec, grid: IntervalGrid | None,
                               initial: Point) -> PA:
    """Build the abstract automaton over grid cells reachable from ``initial``.

    With ``grid=None`` the concrete reachable states are enumerated exactly
    instead (one point per "cell"), which is the right mode for systems
    whose dynamics visit finitely many states; reachability branches then
    have a single destination and the automaton is deterministic up to
    perception.
    """
    asm = _ModelAssembler(spec)
    exact = grid is None

    def cell_key(pos, ctl, t):
        return ("cell", pos, ctl, t)

    def box_of(pos) -> Box:
        if exact:
            return tuple((x, x) for x in pos)
        return grid.box(pos)

    def intern_cell(pos, ctl, t) -> int:
        box = box_of(pos)
        labels = spec.cell_labels(box, ctl)
        name = "c(" + ",".join(_fmt(lo) if lo == hi else f"[{_fmt(lo)},{_fmt(hi)})"
                               for lo, hi in box) + f")|{ctl}|t{t}"
        return asm.intern(cell_key(pos, ctl, t), name, labels=labels,
                          features=_cell_features(spec, box, ctl, t))

    if exact:
        start = tuple(float(x) for x in initial)
        for d, x in enumerate(start):
            lo, hi = spec.bounds[d]
            if not lo <= x < hi:
                raise ModelError(f"initial state outside bounds in dimension {spec.dim_names[d]}")
        init_pos: Hashable = start
    else:
        init_pos = grid.cell_of(tuple(float(x) for x in initial))
    root_key = cell_key(init_pos, spec.ctl_init, 0)
    intern_cell(init_pos, spec.ctl_init, 0)

    head = 0
    while head < len(asm.queue):
        key = asm.queue[head]
        head += 1
        if key[0] != "cell":
            continue
        _, pos, ctl, t = key
        sid = asm.index[key]
        box = box_of(pos)
        labels = asm.labels[sid]
        if labels & spec.absorbing_labels:
            continue
        if spec.horizon is not None and t >= spec.horizon:
            continue
        if spec.is_rest(box, ctl):
            continue

        listen_key = ("listen", pos, ctl, t)
        lid = asm.intern(listen_key, asm.names[sid] + "/L")
        asm.add(sid, ActionLabel(spec.transmit_symbol(box, ctl), PERCEPTION),
                Distribution.dirac(lid))

        seen_classes: dict[Hashable, int] = {}
        for k in spec.inputs:
            cls = spec.input_class(ctl, k)
            if cls not in seen_classes:
                ckey = ("choose", pos, ctl, t, cls)
                seen_classes[cls] = asm.intern(ckey, asm.names[sid] + f"/?{cls}")
            asm.add(lid, ActionLabel(spec.input_symbol(k), PERCEPTION),
                    Distribution.dirac(seen_classes[cls]))

        # The step counter only matters under a horizon; without one it
        # stays 0 so recurring cells fold onto themselves.
        t_next = t + 1 if spec.horizon is not None else 0
        for cls, cid in seen_classes.items():
            branch = 0
            if exact:
                nxt, ctl2, exit_label = _point_successor(spec, pos, ctl, cls)
                if exit_label is not None:
                    dest = asm.sink(exit_label)
                else:
                    dest = intern_cell(nxt, ctl2, t_next)
                asm.add(cid, ActionLabel(f"r{cid}.{branch}", REACHABILITY),
                        Distribution.dirac(dest))
            else:
                dests, exits, rests = image_successors(spec, grid, box, ctl, cls)
                for c, ctl2 in dests:
                    dest = intern_cell(c, ctl2, t_next)
                    asm.add(cid, ActionLabel(f"r{cid}.{branch}", REACHABILITY),
                            Distribution.dirac(dest))
                    branch += 1
                for label in exits:
                    dest = asm.sink(label)
                    asm.add(cid, ActionLabel(f"r{cid}.{branch}", REACHABILITY),
                            Distribution.dirac(dest))
                    branch += 1
                for ctl2 in rests:
                    dest = asm.rest(ctl2)
                    asm.add(cid, ActionLabel(f"r{cid}.{branch}", REACHABILITY),
                            Distribution.dirac(dest))
                    branch += 1

    return asm.finish(root_key)
