import json
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from conftest import load_domain, load_problem
from mutations import MUTATIONS, clean_pair, codes_found, mutated_pair
from nl2pddl.pddl import Action, Atom, Literal, Predicate, TypedParam, parse_domain
from nl2pddl.validation import (
    ERROR, SEVERITY, WARNING, Code, check_domain, check_problem, cross_check, has_errors,
    prune_predicates, to_json, validate_pair,
)


def codes(found):
    return [d.code.value for d in found]


def test_ten_codes_are_stable():
    assert [c.value for c in Code] == [
        "UndeclaredPredicate", "ArityMismatch", "TypeError", "UnboundVariable", "UnusedPredicate",
        "UnknownObjectType", "UnreachableGoalAtom", "PredicateOnlyInProblem", "ContradictoryEffect",
        "DuplicateName"]
    assert {c for c in Code if SEVERITY[c] == WARNING} == {Code.UNUSED_PREDICATE, Code.UNREACHABLE_GOAL_ATOM}


def test_clean_four_operator_domain(bw_domain):
    assert check_domain(bw_domain) == []


def test_arity_mutation():
    d = parse_domain("""(define (domain d) (:predicates (clear ?x) (q))
        (:action a :parameters (?x ?y) :precondition (clear ?x ?y) :effect (q)))""")
    assert codes(check_domain(d)) == ["ArityMismatch"]


def test_unused_predicate_is_warning():
    d = parse_domain("(define (domain d) (:predicates (p) (q)) (:action a :parameters () :precondition (p) :effect (not (p))))")
    found = check_domain(d)
    assert codes(found) == ["UnusedPredicate"] and found[0].severity == WARNING
    assert not has_errors(found)
    assert check_domain(d, strict=True)[0].severity == ERROR


def test_pickup_only_listing_has_unused_on():
    found = check_domain(load_domain("blocksworld/pickup_domain.pddl"))
    assert [(d.code.value, d.location) for d in found] == [("UnusedPredicate", "predicates/on")]


def test_generated_task_against_typed_domain():
    d = load_domain("blocksworld/typed_domain.pddl")
    assert check_problem(d, load_problem("blocksworld/colored_blocks_problem.pddl")) == []


def test_init_over_undeclared_object(bw_domain, bw_problem):
    p = replace(bw_problem, init=bw_problem.init + (Atom("clear", ("z",)),))
    assert codes(check_problem(bw_domain, p)) == ["UnknownObjectType"]


def test_goal_wrong_arity(bw_domain, bw_problem):
    p = replace(bw_problem, goal=(Literal(Atom("on", ("a",))),))
    found = check_problem(bw_domain, p)
    assert codes(found) == ["ArityMismatch"] and found[0].location == "goal/0"


def test_matched_fixtures_cross_check(logistics, bw_domain, bw_problem):
    assert cross_check(*logistics) == []
    assert cross_check(bw_domain, bw_problem) == []


def test_problem_only_predicate(bw_domain, bw_problem):
    p = replace(bw_problem, init=bw_problem.init + (Atom("delivered", ("a",)),))
    assert codes(cross_check(bw_domain, p)) == ["PredicateOnlyInProblem"]


def test_unreachable_holding(bw_domain, bw_problem):
    no_add = replace(bw_domain, actions=tuple(
        replace(a, effects=tuple(l for l in a.effects if not (l.positive and l.predicate == "holding")))
        for a in bw_domain.actions))
    p = replace(bw_problem, goal=(Literal(Atom("holding", ("a",))),))
    found = cross_check(no_add, p)
    assert codes(found) == ["UnreachableGoalAtom"] and found[0].severity == WARNING


@pytest.mark.parametrize("code", list(MUTATIONS))
def test_single_fault_mutation(code):
    assert codes_found(*mutated_pair(code)) == [(code, ERROR)]
    assert codes_found(*clean_pair(code)) == []


def test_findings_ordered_and_deterministic():
    d = parse_domain("""(define (domain d) (:predicates (p ?x) (u))
        (:action b :parameters (?x) :precondition (and (p ?x ?x) (zz)) :effect (and (p ?y) (p ?x) (not (p ?x)))))""")
    first = check_domain(d)
    assert first == check_domain(d)
    assert codes(first) == ["UnusedPredicate", "UndeclaredPredicate", "ArityMismatch", "UnboundVariable",
                            "ContradictoryEffect"]


def test_rendering_and_json(bw_domain):
    bad = parse_domain("(define (domain d) (:predicates (p))\n (:action a :parameters () :precondition (q) :effect (p)))")
    found = check_domain(bad, file="d.pddl")
    text = str(found[0])
    assert text.startswith("d.pddl:2: error [UndeclaredPredicate]")
    payload = json.loads(to_json(found))
    assert payload[0]["code"] == "UndeclaredPredicate" and payload[0]["file"] == "d.pddl"


def test_type_cycle_reported():
    d = parse_domain("(define (domain d) (:requirements :typing) (:types a - b b - a))")
    assert "TypeError" in codes(check_domain(d))


def test_validate_pair_skips_cross_check_on_errors(bw_domain, bw_problem):
    p = replace(bw_problem, init=bw_problem.init + (Atom("clear", ("z",)), Atom("delivered", ("a",))))
    assert codes(validate_pair(bw_domain, p)) == ["UnknownObjectType"]


# pruning

def pred(name, arity=1, desc=""):
    return Predicate(name, tuple(TypedParam(f"?x{i}") for i in range(arity)), desc)


def act(*names):
    return Action("a", (TypedParam("?x0"),), tuple(Literal(Atom(n, ("?x0",))) for n in names), ())


def test_prune_removes_unreferenced():
    assert prune_predicates([pred("p"), pred("q")], [act("p")]) == [pred("p")]


def test_prune_empty_actions():
    assert prune_predicates([pred("p")], []) == []


def test_prune_duplicates_highest_arity_latest():
    first, wide, latest = pred("p", 1, "first"), pred("p", 2, "wide"), pred("p", 2, "latest")
    out = prune_predicates([pred("q"), first, wide, latest], [act("p", "q")])
    assert out == [pred("q"), latest]


@given(st.lists(st.tuples(st.sampled_from("pqrs"), st.integers(0, 2)), max_size=8),
       st.lists(st.sampled_from("pqrst"), max_size=4))
@settings(max_examples=200, deadline=None)
def test_prune_subset_and_fixpoint(specs, used):
    preds = [pred(n, k, f"{n}{i}") for i, (n, k) in enumerate(specs)]
    actions = [act(*used)]
    once = prune_predicates(preds, actions)
    assert all(p in preds for p in once)
    assert prune_predicates(once, actions) == once
    assert {p.name for p in once} == {n for n, _ in specs} & set(used)
