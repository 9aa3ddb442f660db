from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from orbitflow.interchange import (
    SchemaViolation,
    SemanticError,
    from_xml,
    replay_check,
    to_xml,
    to_xml_text,
    workorder_schema,
)
from orbitflow.workorders import IdSequence, default_rule_set
from orbitflow.xmlcore import parse, serialize
from orbitflow.xmlschema import validate
from orbitflow.workorders import create_work_order
from test_workorders import AWIFS_STANDARD
from util import random_walk


class TestToXml:
    def test_fresh_order_document_shape(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        doc = to_xml(wo)
        routing = doc.find("routing")
        assert routing.attributes["current"] == "0"
        assert all(
            s.attributes["status"] == "PENDING" for s in routing.find_all("step")
        )
        assert doc.attributes["status"] == "OPEN"

    def test_output_validates_against_shipped_schema(self, rules):
        rng = random.Random(31)
        ids = IdSequence()
        for _ in range(25):
            wo, _ = random_walk(rng, rules, ids)
            assert validate(to_xml(wo), workorder_schema()) == []

    def test_canonical_text_is_single_line(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        assert "\n" not in to_xml_text(wo)


class TestFromXml:
    def test_round_trip_identity(self, rules):
        rng = random.Random(7)
        ids = IdSequence()
        for _ in range(50):
            wo, _ = random_walk(rng, rules, ids)
            again = from_xml(to_xml_text(wo))
            assert again == wo
            assert list(again.parameters.items()) == list(wo.parameters.items())

    def test_round_trip_from_bytes(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 2.5, IdSequence())
        assert from_xml(to_xml_text(wo).encode("ascii")) == wo

    def test_tampered_cursor_is_semantic_error(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        doc = to_xml(wo)
        doc.find("routing").attributes["current"] = "9"
        with pytest.raises(SemanticError):
            from_xml(doc)

    def test_missing_required_id_is_schema_violation(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        doc = to_xml(wo)
        del doc.attributes["id"]
        with pytest.raises(SchemaViolation) as err:
            from_xml(doc)
        assert any(v.attribute == "id" for v in err.value.violations)

    def test_rework_status_rejected(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        doc = to_xml(wo)
        doc.find("routing").find_all("step")[0].attributes["status"] = "REWORK"
        with pytest.raises(SemanticError):
            from_xml(doc)

    def test_gapped_history_rejected(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        doc = to_xml(wo)
        doc.find("history").find_all("event")[0].attributes["seq"] = "2"
        with pytest.raises(SemanticError):
            from_xml(doc)

    def test_incoherent_statuses_rejected(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        doc = to_xml(wo)
        doc.find("routing").find_all("step")[2].attributes["status"] = "COMPLETED"
        with pytest.raises(SemanticError):
            from_xml(doc)

    def test_wrong_root_is_schema_violation(self):
        with pytest.raises(SchemaViolation):
            from_xml(parse("<not-an-order/>"))


def test_serialized_form_reparses_identically(rules):
    rng = random.Random(13)
    ids = IdSequence()
    for _ in range(20):
        wo, _ = random_walk(rng, rules, ids)
        text = to_xml_text(wo)
        assert serialize(parse(text)) == text


def test_replay_check_helper(rules):
    rng = random.Random(17)
    wo, _ = random_walk(rng, rules, IdSequence())
    assert replay_check(wo)


@given(seed=st.integers(0, 2**32 - 1))
def test_round_trip_property(seed):
    rules = default_rule_set()
    rng = random.Random(seed)
    wo, _ = random_walk(rng, rules, IdSequence(), max_events=25)
    assert from_xml(to_xml_text(wo)) == wo
