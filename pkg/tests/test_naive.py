"""The independent oracle evaluator, and its agreement with the main one.

Random agreement at scale lives in the acceptance tests; these pin down the
oracle's own behaviour and a few directed equivalence points, including the
error outcomes.
"""

import random

import pytest

from rasm.errors import EvalError
from rasm.evaluator import eval_rule
from rasm.naive import naive_eval_rule, naive_eval_term
from rasm.parser import parse_rule, parse_term
from rasm.state import FunctionSymbol, Location, Signature, State
from rasm.updates import Update, collapse
from rasm.values import Multiset, Natural
from conftest import random_rule, random_state


def small_state(**inits):
    sig = Signature((FunctionSymbol("f", 0), FunctionSymbol("g", 1)))
    return State(sig, {Location(n): v for n, v in inits.items()}, frozenset({Natural(0), Natural(1)}))


def test_naive_term_evaluation():
    s = small_state(f=Natural(1))
    assert naive_eval_term(s, {}, parse_term("f + 1")) == Natural(2)
    assert naive_eval_term(s, {}, parse_term("{| x | x : x < 2 |}")) == Multiset(
        (Natural(0), Natural(1))
    )


def test_naive_rule_collects_and_scans():
    s = small_state()
    us, ok = naive_eval_rule(s, {}, parse_rule("PAR f := 1 f := 1 ENDPAR"))
    assert ok
    assert us == frozenset({Update(Location("f"), Natural(1))})
    us, ok = naive_eval_rule(s, {}, parse_rule("PAR f := 1 f := 2 ENDPAR"))
    assert not ok
    assert len(us) == 2


def test_naive_rejects_partial_assignments():
    with pytest.raises(EvalError, match="unknown-operator"):
        naive_eval_rule(small_state(), {}, parse_rule("f <<= munion({| 1 |})"))


def test_naive_import_numbering_matches_main():
    s = small_state()
    r = parse_rule("IMPORT a DO IMPORT b DO PAR g(a) := 1 g(b) := 2 ENDPAR")
    us, ok = naive_eval_rule(s, {}, r)
    um = eval_rule(s, {}, r)
    assert ok
    assert us == frozenset(um)


@pytest.mark.parametrize(
    "text",
    [
        "f := f + 1",
        "IF f = 0 THEN f := 1 ELSE f := 2 ENDIF",
        "FORALL x WITH x < 2 DO g(x) := x ENDDO",
        "LET y = f IN g(y) := y",
        "IMPORT a DO g(a) := 1",
        "PAR f := 1 f := 2 ENDPAR",
    ],
)
def test_directed_equivalence(text):
    s = small_state(f=Natural(0))
    r = parse_rule(text)
    us, ok = naive_eval_rule(s, {}, r)
    um = eval_rule(s, {}, r)
    col = collapse(s, um)
    assert col.updates == us
    assert col.consistent == ok


@pytest.mark.parametrize(
    "text,code",
    [
        ("IF undef < 0 THEN f := 1 ENDIF", "condition-undef"),
        ("IF 5 THEN f := 1 ENDIF", "non-boolean-guard"),
        ("missing := 1", "unknown-symbol"),
        ("g(1, 2) := 1", "arity-mismatch"),
        ("f := ?loose", "unbound-variable"),
        # a let name never reaches head position under substitution
        ("LET y = 1 IN y := 2", "unknown-symbol"),
        ("IMPORT a DO a := 1", "bound-variable-as-location"),
        ("FORALL x WITH true DO x := 1 ENDDO", "bound-variable-as-location"),
    ],
)
def test_error_outcomes_agree(text, code):
    s = small_state()
    r = parse_rule(text)
    with pytest.raises(EvalError) as main_exc:
        eval_rule(s, {}, r)
    with pytest.raises(EvalError) as naive_exc:
        naive_eval_rule(s, {}, r)
    assert main_exc.value.code == code
    assert naive_exc.value.code == code


def test_unused_erroring_let_binding_is_no_error():
    # substitution drops an unused binding, so neither evaluator may raise
    s = small_state()
    r = parse_rule("LET y = missing IN f := 1")
    assert eval_rule(s, {}, r) == eval_rule(s, {}, parse_rule("f := 1"))
    us, ok = naive_eval_rule(s, {}, r)
    assert ok and us == frozenset({Update(Location("f"), Natural(1))})


def test_used_erroring_let_binding_raises_in_both():
    s = small_state()
    r = parse_rule("LET y = missing IN f := y")
    with pytest.raises(EvalError, match="unknown-symbol"):
        eval_rule(s, {}, r)
    with pytest.raises(EvalError, match="unknown-symbol"):
        naive_eval_rule(s, {}, r)


def test_random_spot_equivalence():
    rng = random.Random(97)
    agreements = 0
    for _ in range(150):
        s = random_state(rng)
        r = random_rule(rng, depth=3)
        try:
            want = ("ok",) + naive_eval_rule(s, {}, r)
        except EvalError as e:
            want = ("error", e.code)
        try:
            um = eval_rule(s, {}, r)
            col = collapse(s, um)
            got = ("ok", col.updates, col.consistent)
        except EvalError as e:
            got = ("error", e.code)
        assert got == want
        agreements += 1
    assert agreements == 150
