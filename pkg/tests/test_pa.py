import random

import pytest

from mostrim.pa import (PA, PERCEPTION, REACHABILITY, ActionLabel, CapExceeded,
                        Distribution, ModelError, apply_scheduler, compose,
                        count_schedulers, enabled_actions, enumerate_schedulers,
                        sample_path, unreachable_states, validate)
from mostrim.pmc import SafetyProperty, min_safety_prob, prob_under_scheduler
from mostrim.rng import CounterStream

from oracles import chain_safety_gauss, product_reachable_count, product_transitions

A = ActionLabel("a", PERCEPTION)
B = ActionLabel("b", PERCEPTION)


def two_branch_pa():
    # 0 --a--> {1: 0.5, 2: 0.5}, 0 --b--> 2; 1, 2 terminal
    return PA.build(
        n_states=3, initial=0,
        transitions=[(0, A, Distribution.of([(1, 0.5), (2, 0.5)])),
                     (0, B, Distribution.dirac(2))])


class TestValidate:
    def test_mass_violation(self):
        m = PA.build(2, 0, [(0, A, Distribution.of([(1, 0.999999)]))])
        assert any("mass" in v for v in validate(m))

    def test_terminal_only_state_is_legal(self):
        m = PA.build(1, 0, [])
        assert validate(m) == []

    def test_action_outside_alphabet(self):
        m = PA.build(2, 0, [(0, A, Distribution.dirac(1))],
                     alphabet=frozenset({B}))
        assert any("alphabet" in v for v in validate(m))

    def test_duplicate_state_action(self):
        m = PA.build(2, 0, [(0, A, Distribution.dirac(1)),
                            (0, A, Distribution.dirac(0))])
        assert any("duplicate" in v for v in validate(m))

    def test_unreachable_states_reported_separately(self):
        m = PA.build(3, 0, [(0, A, Distribution.dirac(1))])
        assert validate(m) == []
        assert unreachable_states(m) == (2,)


class TestCompose:
    def test_terminal_partner_is_neutral(self):
        m1 = two_branch_pa()
        m2 = PA.build(1, 0, [], labels=[{"tag"}])
        c = compose(m1, m2)
        assert c.n_states == m1.n_states
        assert len(c.transitions) == len(m1.transitions)
        assert all("tag" in c.labels[s] for s in c.states)

    def test_product_distribution(self):
        m1 = PA.build(2, 0, [(0, A, Distribution.of([(0, 0.3), (1, 0.7)]))])
        m2 = PA.build(2, 0, [(0, A, Distribution.of([(0, 0.5), (1, 0.5)]))])
        c = compose(m1, m2)
        (src, act, dist), = c.transitions[:1]
        assert act == A
        assert sorted(p for _, p in dist.support) == [0.15, 0.15, 0.35, 0.35]

    def test_reachable_count_matches_brute_force_product(self):
        from mostrim.systems.aebs import (aebs_desk_params, _make_plant_spec,
                                          build_detection_automaton)
        from mostrim.abstraction import IntervalGrid, build_interval_abstraction
        params = aebs_desk_params()
        grid = IntervalGrid((5.0, 0.0), (13.0, 2.0), (1.0, 0.4))
        registry = {}
        spec = _make_plant_spec(params, grid, registry)
        plant = build_interval_abstraction(spec, grid, (9.0, 1.2))
        per = build_detection_automaton(params, registry)
        composed = compose(per, plant)
        assert composed.n_states == product_reachable_count(per, plant)

    def test_every_transition_justified_by_one_case(self):
        # Re-derive the whole synchronized product of the tank components
        # and compare transition fingerprints (source, action, distribution).
        from mostrim.abstraction import IntervalGrid, build_interval_abstraction
        from mostrim.systems.tanks import (_make_plant_spec,
                                           build_level_perception,
                                           tank_desk_params)
        pars = tank_desk_params()
        grid = IntervalGrid((0.0,), (30.0,), (10.0,))
        values = set()
        for j in range(3):
            rep = float(round(0.5 * (j * 10 + (j + 1) * 10)))
            for val, _ in pars.errors.outcomes(rep, 30.0):
                values.add(val)
        inputs = tuple(sorted((v,) for v in values))
        registry = {}
        spec = _make_plant_spec(pars, grid, inputs, registry)
        plant = build_interval_abstraction(spec, grid, (12.5,))
        per = build_level_perception(pars, registry, inputs)
        composed = compose(per, plant)

        pairs, expected = product_transitions(per, plant)
        assert len(pairs) == composed.n_states
        got = {
            (composed.name_of(s), a,
             tuple(sorted((composed.name_of(t), round(p, 12))
                          for t, p in dist.support)))
            for s, a, dist in composed.transitions}
        translated = {
            (f"{per.name_of(s1)}|{plant.name_of(s2)}", a,
             tuple(sorted((f"{per.name_of(t1)}|{plant.name_of(t2)}", p)
                          for (t1, t2), p in support)))
            for (s1, s2), a, support in expected}
        assert got == translated

    def test_commutative_up_to_relabeling(self):
        m1 = two_branch_pa()
        m2 = PA.build(2, 0, [(0, ActionLabel("x"), Distribution.dirac(1))],
                      labels=[set(), {"bad"}])
        c12 = compose(m1, m2)
        c21 = compose(m2, m1)
        assert c12.n_states == c21.n_states
        prop = SafetyProperty("bad")
        assert min_safety_prob(c12, prop).probability == pytest.approx(
            min_safety_prob(c21, prop).probability, abs=1e-12)

    def test_rejects_ambiguous_shared_action(self):
        m1 = PA(n_states=2, initial=0, alphabet=frozenset({A}),
                transitions=((0, A, Distribution.dirac(1)),
                             (0, A, Distribution.dirac(0))),
                labels=(frozenset(), frozenset()))
        m2 = PA.build(2, 0, [(0, A, Distribution.dirac(1))])
        with pytest.raises(ModelError):
            compose(m1, m2)


class TestEnabledActions:
    def test_terminal_state(self):
        m = two_branch_pa()
        assert enabled_actions(m, 1) == ()

    def test_two_actions(self):
        m = two_branch_pa()
        assert set(enabled_actions(m, 0)) == {A, B}

    def test_unknown_state(self):
        with pytest.raises(ModelError):
            enabled_actions(two_branch_pa(), 7)

    def test_choice_states_get_unique_labels_per_branch(self):
        # 1-d loop whose image spans 4 cells for each of the 2 inputs:
        # the two choice states carry 4 branch labels each, all distinct.
        from mostrim.abstraction import (ControllerPlantSpec, IntervalGrid,
                                         build_interval_abstraction)
        spec = ControllerPlantSpec(
            dim_names=("x",), bounds=((0.0, 32.0),), inputs=("u", "v"),
            input_class=lambda ctl, k: k,
            apply_class=lambda p, ctl, k: ((p[0] * 3.5,), ctl),
            modes=lambda box, ctl, k: ["lin"],
            apply_mode=lambda p, ctl, k, mode: ((p[0] * 3.5,), ctl),
            exit_labels=((None, "out"),),
            cell_labels=lambda box, ctl: frozenset(),
            transmit_symbol=lambda box, ctl: f"x{box[0][0]:g}",
            input_symbol=lambda k: str(k), horizon=1)
        grid = IntervalGrid((0.0,), (32.0,), (1.0,))
        m = build_interval_abstraction(spec, grid, (1.2,))
        choice_labels = [a for s in m.states for a, d in m.outgoing(s)
                         if a.origin == REACHABILITY]
        per_choice = {}
        for s in m.states:
            branch = [a for a, _ in m.outgoing(s) if a.origin == REACHABILITY]
            if branch:
                per_choice[s] = branch
        t0_choices = [v for v in per_choice.values() if len(v) == 4]
        assert len(t0_choices) == 2
        names = [a.name for v in t0_choices for a in v]
        assert len(names) == len(set(names)) == 8


class TestApplyScheduler:
    def test_deterministic_pa_is_isomorphic(self):
        m = PA.build(3, 0, [(0, A, Distribution.dirac(1)),
                            (1, A, Distribution.dirac(2))])
        chain = apply_scheduler(m, {0: A, 1: A})
        assert chain.states == (0, 1, 2)
        assert chain.row(0) == m.transitions[0][2]

    def test_left_branch_choice(self):
        m = two_branch_pa()
        chain = apply_scheduler(m, {0: B})
        assert chain.row(0) == Distribution.dirac(2)
        assert 1 not in chain.states

    def test_rows_are_input_distributions_unchanged(self):
        m = two_branch_pa()
        chain = apply_scheduler(m, {0: A})
        assert chain.row(0) is m.transitions[0][2]

    def test_non_enabled_action_rejected(self):
        m = PA.build(2, 0, [(0, A, Distribution.dirac(1))])
        with pytest.raises(ModelError):
            apply_scheduler(m, {0: B})

    def test_every_scheduler_matches_gauss_oracle_on_small_tank(self):
        from mostrim.systems.tanks import TankParams, ErrorModel, build_tank_model
        params = TankParams(tanks=1, capacity=30.0, outflow=3.0, inflow=18.0,
                            low_threshold=10.0, high_threshold=20.0, horizon=2,
                            errors=ErrorModel.triangular(6, 0.9, 0.04, 0.06))
        from mostrim.abstraction import IntervalGrid
        grid = IntervalGrid((0.0,), (30.0,), (5.0,))
        m, prop = build_tank_model(params, grid, (12.5,))
        assert count_schedulers(m) <= 256
        for sigma in enumerate_schedulers(m):
            chain = apply_scheduler(m, sigma)
            expected = chain_safety_gauss(chain, prop.bad_label)
            assert prob_under_scheduler(m, sigma, prop) == pytest.approx(
                expected, abs=1e-10)


class TestSchedulerCounting:
    def test_deterministic_pa(self):
        m = PA.build(2, 0, [(0, A, Distribution.dirac(1))])
        assert count_schedulers(m) == 1

    def test_product_law(self):
        m = PA.build(
            4, 0,
            [(0, A, Distribution.dirac(1)), (0, B, Distribution.dirac(2)),
             (1, A, Distribution.dirac(2)), (1, B, Distribution.dirac(3)),
             (1, ActionLabel("c"), Distribution.dirac(0)),
             (2, A, Distribution.dirac(3))])
        assert count_schedulers(m) == 2 * 3 * 1

    def test_enumeration_matches_count(self):
        rng = random.Random(7)
        from oracles import random_dag_pa
        for _ in range(25):
            m = random_dag_pa(rng)
            if count_schedulers(m) <= 10 ** 4:
                assert count_schedulers(m) == sum(1 for _ in enumerate_schedulers(m))

    def test_enumeration_order_is_lexicographic(self):
        m = PA.build(
            3, 0,
            [(0, A, Distribution.dirac(1)), (0, B, Distribution.dirac(2)),
             (1, A, Distribution.dirac(2)), (1, B, Distribution.dirac(2))])
        combos = [(sigma[0].name, sigma[1].name)
                  for sigma in enumerate_schedulers(m)]
        assert combos == [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]

    def test_cap_exceeded(self):
        m = two_branch_pa()
        with pytest.raises(CapExceeded):
            list(enumerate_schedulers(m, cap=1))


class TestSamplePath:
    def test_horizon_zero(self):
        chain = apply_scheduler(two_branch_pa(), {0: A})
        assert sample_path(chain, 0, CounterStream(1)) == [0]

    def test_deterministic_chain_stops_at_terminal(self):
        m = PA.build(4, 0, [(i, A, Distribution.dirac(i + 1)) for i in range(3)])
        chain = apply_scheduler(m, {i: A for i in range(3)})
        assert sample_path(chain, 10, CounterStream(1)) == [0, 1, 2, 3]

    def test_first_step_frequency(self):
        chain = apply_scheduler(two_branch_pa(), {0: A})
        n = 10 ** 5
        hits = sum(1 for i in range(n)
                   if sample_path(chain, 1, CounterStream(42, i))[1] == 1)
        # Binomial(n, 0.5): 3 sigma band
        sigma = (n * 0.25) ** 0.5
        assert abs(hits - 0.5 * n) < 3 * sigma

    def test_only_positive_probability_steps(self):
        rng = random.Random(3)
        from oracles import random_acyclic_chain
        for _ in range(20):
            m = random_acyclic_chain(rng)
            sigma = {s: enabled_actions(m, s)[0] for s in m.states
                     if enabled_actions(m, s)}
            chain = apply_scheduler(m, sigma)
            path = sample_path(chain, 50, CounterStream(5))
            for a, b in zip(path, path[1:]):
                assert chain.row(a).prob(b) > 0
