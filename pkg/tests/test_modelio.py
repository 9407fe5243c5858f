import json

import pytest

from mostrim.modelio import (ParseError, document_from_pa,
                             from_json_obj, lower, parse, serialize, to_json_obj)
from mostrim.mos import Relation
from mostrim.pa import ModelError, unreachable_states, validate
from mostrim.pmc import min_safety_prob

MINIMAL = """pam 1
state 0 init
"""

CHAIN = """pam 1
# a tiny risky chain
state 0 init features d=2.0
state 1 labels boom features d=1.0
state 2 features d=[0,4)
trans 0 go@per -> {1: 0.25, 2: 0.75}
property bad=boom
order byd larger-safer key=d
"""


class TestParse:
    def test_minimal_document(self):
        doc = parse(MINIMAL)
        assert len(doc.states) == 1
        assert doc.states[0].init

    def test_mass_error_carries_location(self):
        text = "pam 1\nstate 0 init\nstate 1\ntrans 0 go -> {0: 0.5, 1: 0.49}\n"
        with pytest.raises(ParseError) as err:
            parse(text)
        assert err.value.line == 4
        assert "mass" in err.value.reason

    def test_unknown_state_rejected(self):
        text = "pam 1\nstate 0 init\ntrans 0 go -> {3: 1}\n"
        with pytest.raises(ParseError):
            parse(text)

    def test_duplicate_state_action_rejected(self):
        text = ("pam 1\nstate 0 init\nstate 1\n"
                "trans 0 go -> {1: 1}\ntrans 0 go -> {0: 1}\n")
        with pytest.raises(ParseError):
            parse(text)

    def test_missing_header(self):
        with pytest.raises(ParseError):
            parse("state 0 init\n")

    def test_exactly_one_initial_state(self):
        with pytest.raises(ParseError):
            parse("pam 1\nstate 0\nstate 1\n")

    def test_lexical_error_location(self):
        text = "pam 1\nstate 0 init\ntrans 0 go -> {zig: 1}\n"
        with pytest.raises(ParseError) as err:
            parse(text)
        assert err.value.line == 3
        assert err.value.col > 1


class TestRoundTrip:
    def test_parse_serialize_parse_identity(self):
        doc = parse(CHAIN)
        assert parse(serialize(doc)) == doc

    def test_second_normalization_is_byte_stable(self):
        once = serialize(parse(CHAIN))
        assert serialize(parse(once)) == once

    def test_case_study_export_round_trips(self):
        from mostrim.systems import ce3_model
        m, prop = ce3_model(10.0)
        doc = document_from_pa(m, prop)
        text = serialize(doc)
        assert serialize(parse(text)) == text

    def test_json_mirror(self):
        doc = parse(CHAIN)
        obj = to_json_obj(doc)
        assert from_json_obj(json.loads(json.dumps(obj))) == doc


class TestLower:
    def test_minimal_lowering_validates(self):
        pa, prop, orders = lower(parse(MINIMAL))
        assert validate(pa) == []
        assert prop is None and orders == {}

    def test_probability_and_order_semantics(self):
        pa, prop, orders = lower(parse(CHAIN))
        assert prop.bad_label == "boom"
        assert min_safety_prob(pa, prop).probability == pytest.approx(0.75)
        order = orders["byd"]
        assert order.compare(pa.features[0], pa.features[1]) is Relation.SAFER

    def test_deterministic_lowering(self):
        a, _, _ = lower(parse(CHAIN))
        b, _, _ = lower(parse(CHAIN))
        assert a == b

    def test_sparse_ids_rejected(self):
        text = "pam 1\nstate 0 init\nstate 2\n"
        with pytest.raises(ModelError):
            lower(parse(text))

    def test_unreachable_states_kept(self):
        text = "pam 1\nstate 0 init\nstate 1\ntrans 0 go -> {0: 1}\n"
        pa, _, _ = lower(parse(text))
        assert pa.n_states == 2
        assert unreachable_states(pa) == (1,)

    def test_pairs_order_via_private_id(self):
        text = ("pam 1\nstate 0 init\nstate 1\nstate 2\n"
                "order ext pairs 1>=2\n")
        _, _, orders = lower(parse(text))
        order = orders["ext"]
        assert order.compare({"_id": 1}, {"_id": 2}) is Relation.SAFER
        assert order.compare({"_id": 2}, {"_id": 1}) is Relation.WORSE
        assert order.compare({"_id": 0}, {"_id": 2}) is Relation.INCOMPARABLE

    def test_ce3_document_end_to_end(self):
        from mostrim.systems import ce3_model
        m, prop = ce3_model(10.0)
        text = serialize(document_from_pa(m, prop))
        pa, prop2, _ = lower(parse(text))
        assert min_safety_prob(pa, prop2).probability == pytest.approx(0.6912, abs=1e-8)
