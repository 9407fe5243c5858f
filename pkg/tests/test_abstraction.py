import random

import pytest

from mostrim.abstraction import (AbstractCell, ControllerPlantSpec, IntervalGrid,
                                 ModelError, build_interval_abstraction,
                                 reachable_cells, simulate_concrete)
from mostrim.pa import REACHABILITY, enabled_actions

from oracles import brute_force_cells


def translation_spec(shift: float, lo=0.0, hi=40.0, horizon=None):
    return ControllerPlantSpec(
        dim_names=("x",), bounds=((lo, hi),), inputs=("go",),
        input_class=lambda ctl, k: k,
        apply_class=lambda p, ctl, k: ((p[0] + shift,), ctl),
        modes=lambda box, ctl, k: ["m"],
        apply_mode=lambda p, ctl, k, mode: ((p[0] + shift,), ctl),
        exit_labels=(("low", "high"),),
        cell_labels=lambda box, ctl: frozenset(),
        transmit_symbol=lambda box, ctl: f"x{box[0][0]:g}",
        input_symbol=lambda k: str(k),
        horizon=horizon)


def braking_spec(tau=1.0, power=0.0):
    def step(p, ctl, k):
        d, v = p
        return (d - tau * v, max(0.0, v - tau * power)), ctl

    return ControllerPlantSpec(
        dim_names=("d", "v"), bounds=((0.0, 40.0), (0.0, 10.0)),
        inputs=(True,),
        input_class=lambda ctl, k: k,
        apply_class=step,
        modes=lambda box, ctl, k: [power],
        apply_mode=lambda p, ctl, k, mode: step(p, ctl, k),
        exit_labels=(("collided", None), (None, None)),
        cell_labels=lambda box, ctl: frozenset(),
        transmit_symbol=lambda box, ctl: f"d{box[0][0]:g}",
        input_symbol=lambda k: "go")


class TestReachableCells:
    def test_kinematic_image_box(self):
        # box [10,20) x [5,6) coasting: d' in [10-6t, 20-5t), v unchanged
        from mostrim.abstraction import _mode_image
        spec = braking_spec(tau=1.0, power=0.0)
        intervals, ctl = _mode_image(spec, ((10.0, 20.0), (5.0, 6.0)), None, True, 0.0)
        assert intervals[0] == (4.0, 15.0, False)
        assert intervals[1] == (5.0, 6.0, False)
        grid = IntervalGrid((0.0, 0.0), (40.0, 10.0), (10.0, 1.0))
        cells = reachable_cells(spec, grid, (1, 5), True)
        assert {c.indices for c in cells} == {(0, 5), (1, 5)}

    def test_zero_shift_fixpoint(self):
        spec = translation_spec(0.0)
        grid = IntervalGrid((0.0,), (40.0,), (2.0,))
        cells = reachable_cells(spec, grid, (3,), "go")
        assert cells == {AbstractCell((3,), ((6.0, 8.0),))}

    def test_matches_independent_corner_propagation(self):
        rng = random.Random(5)
        spec = braking_spec(tau=1.0, power=2.0)
        grid = IntervalGrid((0.0, 0.0), (40.0, 10.0), (2.0, 1.0))
        for _ in range(50):
            idx = (rng.randrange(5, 18), rng.randrange(0, 9))
            got = {c.indices for c in reachable_cells(spec, grid, idx, True)}
            box = grid.box(idx)
            expected = brute_force_cells(
                box, grid.widths, grid.lows, grid.highs,
                lambda p: (p[0] - p[1], max(0.0, p[1] - 2.0)))
            assert got == expected

    def test_image_point_sampling_soundness(self):
        rng = random.Random(9)
        spec = braking_spec(tau=1.0, power=3.0)
        grid = IntervalGrid((0.0, 0.0), (40.0, 10.0), (1.5, 0.7))
        for _ in range(20):
            idx = (rng.randrange(8, 20), rng.randrange(0, 10))
            cells = {c.indices for c in reachable_cells(spec, grid, idx, True)}
            box = grid.box(idx)
            (d1, d2), (v1, v2) = box
            # Stay clear of the cell_of boundary nudge when shaving corners.
            eps = 1e-6
            points = [(d1, v1), (d1, v2 - eps), (d2 - eps, v1), (d2 - eps, v2 - eps)]
            points += [(rng.uniform(d1, d2 - eps), rng.uniform(v1, v2 - eps))
                       for _ in range(100)]
            for p in points:
                (nd, nv), _ = spec.apply_class(p, None, True)
                if not (grid.lows[0] <= nd < grid.highs[0]):
                    continue
                assert grid.cell_of((nd, nv)) in cells


class TestBuilder:
    def test_fine_grid_is_deterministic(self):
        # shift is an exact multiple of the cell width: one branch per input
        spec = translation_spec(4.0)
        grid = IntervalGrid((0.0,), (40.0,), (2.0,))
        m = build_interval_abstraction(spec, grid, (1.0,))
        for s in m.states:
            branches = [a for a in enabled_actions(m, s) if a.origin == REACHABILITY]
            assert len(branches) <= 1

    def test_horizon_zero_single_state(self):
        spec = translation_spec(4.0, horizon=0)
        grid = IntervalGrid((0.0,), (40.0,), (2.0,))
        m = build_interval_abstraction(spec, grid, (1.0,))
        assert m.n_states == 1
        assert m.features[0]["x"] == (0.0, 2.0)

    def test_counts_match_independent_builder_on_5x5(self):
        spec = braking_spec(tau=1.0, power=1.0)
        grid = IntervalGrid((0.0, 0.0), (5.0, 5.0), (1.0, 1.0))
        m = build_interval_abstraction(spec, grid, (4.5, 1.5))

        # Independent breadth-first construction over (cell, phase) keys.
        def succs(idx):
            got = brute_force_cells(
                grid.box(idx), grid.widths, grid.lows, grid.highs,
                lambda p: (p[0] - p[1], max(0.0, p[1] - 1.0)))
            exits = 0
            (d1, d2), (v1, v2) = grid.box(idx)
            if d1 - (v2) < 0.0:
                exits = 1
            return got, exits

        seen = {grid.cell_of((4.5, 1.5))}
        stack = [grid.cell_of((4.5, 1.5))]
        trans = 0
        states = 0
        sink_needed = False
        while stack:
            idx = stack.pop()
            states += 3  # arrival, listen, one choice state (single input)
            trans += 2   # transmit + input
            cells, exits = succs(idx)
            trans += len(cells) + exits
            if exits:
                sink_needed = True
            for c in cells:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        states += 1 if sink_needed else 0
        assert m.n_states == states
        assert len(m.transitions) == trans

    def test_initial_outside_grid_rejected(self):
        spec = translation_spec(1.0)
        grid = IntervalGrid((0.0,), (40.0,), (2.0,))
        with pytest.raises(ModelError):
            build_interval_abstraction(spec, grid, (45.0,))


class TestSimulateConcrete:
    def test_constant_braking_slows_linearly(self):
        spec = braking_spec(tau=1.0, power=3.0)
        trace = simulate_concrete(spec, (30.0, 9.0), [True, True, True])
        speeds = [s[0][1] for s in trace.states]
        assert speeds == [9.0, 6.0, 3.0, 0.0]

    def test_tank_drain_without_inflow(self):
        from mostrim.systems.tanks import TankParams, ErrorModel, tank_step
        params = TankParams(tanks=1, capacity=100.0, outflow=3.0, inflow=0.0,
                            low_threshold=10.0, high_threshold=20.0, horizon=4,
                            errors=ErrorModel(offsets=((0, 1.0),)))
        levels = (50.0,)
        for _ in range(3):
            levels = tank_step(levels, None, params)
        assert levels == (41.0,)

    def test_exit_label_recorded(self):
        spec = braking_spec(tau=1.0, power=0.0)
        trace = simulate_concrete(spec, (3.0, 2.0), [True, True])
        assert trace.exit_label == "collided"
        assert len(trace.states) == 2

    def test_undeclared_exit_raises(self):
        spec = translation_spec(50.0)
        spec = ControllerPlantSpec(**{**spec.__dict__, "exit_labels": ((None, None),)})
        with pytest.raises(ModelError):
            simulate_concrete(spec, (1.0,), ["go"])

    def test_concrete_traces_embed_into_abstraction(self):
        rng = random.Random(77)
        spec = braking_spec(tau=1.0, power=2.0)
        grid = IntervalGrid((0.0, 0.0), (40.0, 10.0), (2.0, 1.0))
        m = build_interval_abstraction(spec, grid, (30.0, 6.0))

        index = {}
        for s in m.states:
            f = m.features[s]
            if f and "d" in f:
                key = (f["d"], f["v"]) if isinstance(f["d"], tuple) else None
                if key:
                    index[key] = s

        def cell_state(point):
            box = grid.box(grid.cell_of(point))
            return index[(box[0], box[1])]

        for _ in range(10 ** 3):
            steps = rng.randrange(1, 6)
            trace = simulate_concrete(spec, (30.0, 6.0), [True] * steps)
            current = cell_state(trace.states[0][0])
            ok = True
            for (pt, _), (nxt, _) in zip(trace.states, trace.states[1:]):
                target = cell_state(nxt)
                moves = set()
                # follow transmit -> input -> every reachability branch
                (t_act, t_dist), = m.outgoing(current)
                listen = t_dist.support[0][0]
                for _, d in m.outgoing(listen):
                    choose = d.support[0][0]
                    for a2, d2 in m.outgoing(choose):
                        if a2.origin == REACHABILITY:
                            moves.add(d2.support[0][0])
                assert target in moves
                current = target
