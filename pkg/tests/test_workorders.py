from __future__ import annotations

import random
from datetime import date

import pytest
from hypothesis import given, strategies as st

from orbitflow.workorders import (
    BadRejectTarget,
    CorrectionLevel,
    EventKind,
    IdSequence,
    IllegalTransition,
    InvalidRuleSet,
    Media,
    NotAtQc,
    NoMatchingRule,
    Outcome,
    OrderClosed,
    OrderStatus,
    ProductSpec,
    ProductType,
    StepStatus,
    UnknownSensor,
    WorkCenter,
    advance,
    create_work_order,
    default_rule_set,
    parse_rule_set,
    plan_route,
    replay_from_history,
    set_parameter,
)
from util import random_spec, random_walk

AWIFS_STANDARD = ProductSpec(
    satellite="IRS-P6",
    sensor="AWIFS",
    product_type=ProductType.STANDARD,
    correction_level=CorrectionLevel.GEO,
    media=Media.DIGITAL,
    path=100,
    row=60,
    acquisition_date=date(2026, 1, 5),
)


def centers(plan):
    return [s.center for s in plan.steps]


class TestPlanRoute:
    def test_standard_digital_default_route(self, rules):
        # Hand-evaluated against the shipped table: no special rule matches,
        # so the '*' rule applies.
        plan = plan_route(AWIFS_STANDARD, rules)
        assert centers(plan) == [
            WorkCenter.URP, WorkCenter.DP, WorkCenter.QC, WorkCenter.DISPATCH,
        ]
        assert plan.current_index == 0
        assert all(s.status is StepStatus.PENDING for s in plan.steps)

    def test_value_added_film_route(self, rules):
        # Hand-evaluated: first rule (VALUE_ADDED + FILM) matches.
        spec = ProductSpec(
            satellite="IRS-P6", sensor="AWIFS",
            product_type=ProductType.VALUE_ADDED,
            correction_level=CorrectionLevel.ORTHO, media=Media.FILM,
            path=1, row=1, acquisition_date=date(2026, 1, 3),
        )
        plan = plan_route(spec, rules)
        assert centers(plan) == [
            WorkCenter.URP, WorkCenter.DP, WorkCenter.VAL, WorkCenter.FILM,
            WorkCenter.QC, WorkCenter.DISPATCH,
        ]

    def test_unknown_sensor_rejected(self, rules):
        spec = ProductSpec(
            satellite="IRS-P6", sensor="NOPE",
            product_type=ProductType.STANDARD,
            correction_level=CorrectionLevel.RAW, media=Media.DIGITAL,
            path=1, row=1, acquisition_date=date(2026, 1, 3),
        )
        with pytest.raises(UnknownSensor):
            plan_route(spec, rules)

    def test_no_default_rule_is_corrupt(self):
        text = """
        [catalog]
        SAT: S1
        [rules]
        media=FILM : URP,DP,FILM,QC,DISPATCH
        """
        with pytest.raises(InvalidRuleSet):
            parse_rule_set(text)

    def test_first_match_wins(self):
        text = """
        [catalog]
        SAT: S1
        [rules]
        media=FILM : URP,DP,FILM,QC,DISPATCH
        media=FILM : URP,DP,QC,DISPATCH
        * : URP,DP,QC,DISPATCH
        """
        rules = parse_rule_set(text)
        spec = ProductSpec(
            satellite="SAT", sensor="S1",
            product_type=ProductType.STANDARD,
            correction_level=CorrectionLevel.RAW, media=Media.FILM,
            path=0, row=0, acquisition_date=date(2026, 2, 2),
        )
        assert WorkCenter.FILM in centers(plan_route(spec, rules))

    def test_missing_val_for_value_added_flagged(self):
        # A rule set whose default route cannot host VAL is corrupt for
        # value-added work.
        text = """
        [catalog]
        SAT: S1
        [rules]
        * : URP,DP,QC,DISPATCH
        """
        rules = parse_rule_set(text)
        spec = ProductSpec(
            satellite="SAT", sensor="S1",
            product_type=ProductType.VALUE_ADDED,
            correction_level=CorrectionLevel.RAW, media=Media.DIGITAL,
            path=0, row=0, acquisition_date=date(2026, 2, 2),
        )
        with pytest.raises(InvalidRuleSet):
            plan_route(spec, rules)


class TestCreate:
    def test_fresh_order_shape(self, rules):
        ids = IdSequence()
        wo = create_work_order(AWIFS_STANDARD, rules, 5.0, ids)
        assert wo.status is OrderStatus.OPEN
        assert wo.plan.current_index == 0
        assert [e.kind for e in wo.history] == [EventKind.CREATED]
        assert wo.plan.steps[0].center is WorkCenter.URP

    def test_ids_are_sequential(self, rules):
        ids = IdSequence()
        first = create_work_order(AWIFS_STANDARD, rules, 0.0, ids)
        second = create_work_order(AWIFS_STANDARD, rules, 0.0, ids)
        assert first.id == "WO-000001"
        assert second.id == "WO-000002"

    def test_failed_creation_consumes_no_id(self, rules):
        ids = IdSequence()
        bad = ProductSpec(
            satellite="IRS-P6", sensor="NOPE",
            product_type=ProductType.STANDARD,
            correction_level=CorrectionLevel.RAW, media=Media.DIGITAL,
            path=1, row=1, acquisition_date=date(2026, 1, 3),
        )
        with pytest.raises(UnknownSensor):
            create_work_order(bad, rules, 0.0, ids)
        assert ids.next_value == 1
        assert create_work_order(AWIFS_STANDARD, rules, 0.0, ids).id == "WO-000001"


class TestAdvance:
    def make(self, rules):
        return create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())

    def run_to_qc(self, rules):
        wo = self.make(rules)
        clock = 0.0
        for _ in range(2):  # URP, DP
            clock += 10
            wo, _ = advance(wo, Outcome.START, clock)
            clock += 10
            wo, _ = advance(wo, Outcome.COMPLETE, clock)
        return wo, clock

    def test_start_complete_moves_cursor(self, rules):
        wo = self.make(rules)
        wo, events = advance(wo, Outcome.START, 10.0)
        assert wo.plan.current_step().status is StepStatus.IN_PROGRESS
        assert wo.plan.current_step().entered_at == 10.0
        assert [e.topic for e in events] == ["workorder.started.urp"]
        wo, events = advance(wo, Outcome.COMPLETE, 70.0)
        assert wo.plan.current_index == 1
        assert wo.plan.steps[0].status is StepStatus.COMPLETED
        assert wo.plan.steps[0].exited_at == 70.0
        assert [e.topic for e in events] == [
            "workorder.completed.urp", "workorder.assigned.dp",
        ]

    def test_complete_on_dispatch_closes_order(self, rules):
        wo, clock = self.run_to_qc(rules)
        for _ in range(2):  # QC, DISPATCH
            clock += 5
            wo, _ = advance(wo, Outcome.START, clock)
            clock += 5
            wo, events = advance(wo, Outcome.COMPLETE, clock)
        assert wo.status is OrderStatus.COMPLETED
        assert wo.plan.current_index == len(wo.plan.steps)
        completed = [e for e in events if e.topic == "workorder.completed"]
        assert len(completed) == 1

    def test_reject_resets_rework_span(self, rules):
        # Hand-enumerated on the 4-step default plan.
        wo, clock = self.run_to_qc(rules)
        wo, _ = advance(wo, Outcome.START, clock + 1)
        wo, events = advance(wo, Outcome.REJECT, clock + 2, target=WorkCenter.DP)
        assert wo.plan.current_index == 1
        assert wo.plan.steps[1].status is StepStatus.PENDING
        assert wo.plan.steps[2].status is StepStatus.PENDING
        assert wo.plan.steps[0].status is StepStatus.COMPLETED
        assert wo.history[-1].kind is EventKind.REJECTED
        assert [e.topic for e in events] == [
            "workorder.rejected", "workorder.assigned.dp",
        ]

    def test_start_twice_is_illegal(self, rules):
        wo = self.make(rules)
        wo, _ = advance(wo, Outcome.START, 1.0)
        with pytest.raises(IllegalTransition):
            advance(wo, Outcome.START, 2.0)

    def test_complete_without_start_is_illegal(self, rules):
        wo = self.make(rules)
        with pytest.raises(IllegalTransition):
            advance(wo, Outcome.COMPLETE, 2.0)

    def test_reject_away_from_qc(self, rules):
        wo = self.make(rules)
        wo, _ = advance(wo, Outcome.START, 1.0)
        with pytest.raises(NotAtQc):
            advance(wo, Outcome.REJECT, 2.0, target=WorkCenter.URP)

    def test_reject_target_must_be_earlier(self, rules):
        wo, clock = self.run_to_qc(rules)
        wo, _ = advance(wo, Outcome.START, clock + 1)
        with pytest.raises(BadRejectTarget):
            advance(wo, Outcome.REJECT, clock + 2, target=WorkCenter.DISPATCH)
        with pytest.raises(BadRejectTarget):
            advance(wo, Outcome.REJECT, clock + 2, target=WorkCenter.VAL)

    def test_cancel_closes(self, rules):
        wo = self.make(rules)
        wo, events = advance(wo, Outcome.CANCEL, 3.0)
        assert wo.status is OrderStatus.CANCELLED
        assert [e.topic for e in events] == ["workorder.cancelled"]
        with pytest.raises(IllegalTransition):
            advance(wo, Outcome.START, 4.0)

    def test_inputs_never_mutated(self, rules):
        wo = self.make(rules)
        before = wo.copy()
        advance(wo, Outcome.START, 1.0)
        assert wo == before


class TestParameters:
    def test_last_write_wins_with_two_events(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        wo = set_parameter(wo, "scene_shift", "a", 1.0)
        wo = set_parameter(wo, "scene_shift", "b", 2.0)
        assert wo.parameters["scene_shift"] == "b"
        assert sum(1 for e in wo.history if e.kind is EventKind.PARAM_SET) == 2

    def test_closed_order_refuses(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        wo, _ = advance(wo, Outcome.CANCEL, 1.0)
        with pytest.raises(OrderClosed):
            set_parameter(wo, "k", "v", 2.0)

    def test_hundred_keys_keep_insertion_order(self, rules):
        wo = create_work_order(AWIFS_STANDARD, rules, 0.0, IdSequence())
        for i in range(100):
            wo = set_parameter(wo, f"key{i:03d}", str(i), float(i))
        assert len(wo.parameters) == 100
        assert list(wo.parameters) == [f"key{i:03d}" for i in range(100)]


@given(data=st.data())
def test_route_closure_property(data):
    """Any catalog-accepted spec yields a plan satisfying the rule-set shape."""
    rules = default_rule_set()
    rng = random.Random(data.draw(st.integers(0, 2**31)))
    spec = random_spec(rng, rules)
    plan = plan_route(spec, rules)
    cs = centers(plan)
    assert cs[0] is WorkCenter.URP
    assert cs[-1] is WorkCenter.DISPATCH
    assert cs.count(WorkCenter.QC) == 1
    assert cs[-2] is WorkCenter.QC
    assert [s.index for s in plan.steps] == list(range(len(cs)))
    if spec.product_type is ProductType.VALUE_ADDED:
        assert WorkCenter.VAL in cs


def test_progress_monotonicity_and_conservation():
    """current_index only moves backwards through REJECT and never skips."""
    rules = default_rule_set()
    rng = random.Random(777)
    for _ in range(150):
        ids = IdSequence()
        clock = 0.0
        from orbitflow.workorders import create_work_order as create
        wo = create(random_spec(rng, rules), rules, clock, ids)
        prev_index = 0
        seen_status = {wo.status}
        for _ in range(40):
            if wo.status is not OrderStatus.OPEN:
                break
            clock += 1.0
            step = wo.plan.current_step()
            roll = rng.random()
            if step.status is StepStatus.PENDING:
                wo, _ = advance(wo, Outcome.START, clock)
            elif step.center is WorkCenter.QC and roll < 0.3:
                earlier = [s.center for s in wo.plan.steps[: step.index]]
                wo, _ = advance(wo, Outcome.REJECT, clock, target=rng.choice(earlier))
                assert wo.history[-1].kind is EventKind.REJECTED
            else:
                wo, _ = advance(wo, Outcome.COMPLETE, clock)
                assert wo.plan.current_index in (prev_index, prev_index + 1)
            if wo.history[-1].kind is not EventKind.REJECTED:
                assert wo.plan.current_index >= prev_index
            prev_index = wo.plan.current_index
            seen_status.add(wo.status)
            # exactly one status at any time, and the plan invariant holds
            for s in wo.plan.steps:
                if s.index < wo.plan.current_index:
                    assert s.status is StepStatus.COMPLETED
                elif s.index > wo.plan.current_index:
                    assert s.status is StepStatus.PENDING
        assert wo.status in (OrderStatus.OPEN, OrderStatus.COMPLETED,
                             OrderStatus.CANCELLED)


def test_history_replay_oracle():
    """Folding history from CREATED reconstructs plan statuses and parameters."""
    rules = default_rule_set()
    rng = random.Random(4242)
    ids = IdSequence()
    for _ in range(120):
        wo, _ = random_walk(rng, rules, ids)
        replayed = replay_from_history(wo)
        assert replayed == wo
        assert list(replayed.parameters.items()) == list(wo.parameters.items())


def test_history_seqs_contiguous():
    rules = default_rule_set()
    rng = random.Random(99)
    ids = IdSequence()
    wo, _ = random_walk(rng, rules, ids, max_events=30)
    assert [e.seq for e in wo.history] == list(range(1, len(wo.history) + 1))


def test_no_matching_rule_without_default():
    # Bypass parse-time validation to exercise the runtime guard.
    rules = default_rule_set()
    from dataclasses import replace as dc_replace

    broken = dc_replace(rules, rules=tuple(r for r in rules.rules if not r.is_default))
    spec = ProductSpec(
        satellite="IRS-1A", sensor="LISS-1",
        product_type=ProductType.STANDARD,
        correction_level=CorrectionLevel.RAW, media=Media.DIGITAL,
        path=0, row=0, acquisition_date=date(2026, 1, 1),
    )
    with pytest.raises(NoMatchingRule):
        plan_route(spec, broken)
