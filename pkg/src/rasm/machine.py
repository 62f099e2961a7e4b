"""The reflective step: raise the stored program, run it, apply, repeat.

Every step re-reads pgm, so a program that rewrites its own tree behaves
differently on the very next step.  Phase order is strict: raise, evaluate
against the pre-state, collapse against pre-state values, apply.  The
signature used for evaluation is raised from pgm and may only grow along a
run; shrinking it is an error, not a stutter.
"""

from __future__ import annotations

from dataclasses import dataclass

from .encoding import Program, as_program
from .errors import EncodingError, MachineError
from .evaluator import eval_rule_with_cursor
from .state import PGM_LOCATION, Signature, State
from .terms import Rule
from .updates import UpdateMultiset, UpdateSet, apply_update_set, collapse
from .values import TreeVal

DEFAULT_MAX_STEPS = 1000


@dataclass(frozen=True, slots=True)
class StepReport:
    state: State
    next: State
    raised_rule: Rule
    update_multiset: UpdateMultiset
    update_set: UpdateSet
    consistent: bool


def _stored_program(s: State) -> Program:
    v = s.value_of(PGM_LOCATION)
    if not isinstance(v, TreeVal):
        raise EncodingError("malformed-program-tree", f"pgm holds {v!r}, not a tree value")
    return as_program(v.tree)


def step(s: State) -> StepReport:
    prog = _stored_program(s)
    if not prog.signature.contains_all(s.signature):
        missing = sorted(s.signature.pairs() - prog.signature.pairs())
        raise MachineError("signature-shrunk", f"encoded signature dropped {missing}")
    eval_sig = s.signature.extended(prog.signature)
    pre = s.with_signature(eval_sig)

    um, cursor = eval_rule_with_cursor(pre, {}, prog.rule)
    us = collapse(pre, um)
    nxt = apply_update_set(pre, us).with_cursor(cursor)
    nxt = nxt.with_signature(_grown_signature(eval_sig, nxt))
    return StepReport(s, nxt, prog.rule, um, us, us.consistent)


def _grown_signature(current: Signature, nxt: State) -> Signature:
    """Symbols the step introduced into pgm's signature subtree, folded in.

    A malformed rewritten pgm is not this step's error: the signature stays
    put and the next step's raise reports it.  A well-formed rewrite that
    dropped symbols is an error now.
    """
    v = nxt.value_of(PGM_LOCATION)
    if not isinstance(v, TreeVal):
        return current
    try:
        prog = as_program(v.tree)
    except EncodingError:
        return current
    if not prog.signature.contains_all(current):
        missing = sorted(current.pairs() - prog.signature.pairs())
        raise MachineError("signature-shrunk", f"rewritten pgm dropped {missing}")
    return current.extended(prog.signature)


def validate_initial(s: State) -> None:
    """An initial state's declared signature must be the one its pgm encodes."""
    prog = _stored_program(s)
    if prog.signature != s.signature:
        raise EncodingError(
            "initial-signature-mismatch",
            f"declared signature {sorted(s.signature.pairs())} vs encoded {sorted(prog.signature.pairs())}",
        )


def run(s: State, steps: int | None = None, max_steps: int = DEFAULT_MAX_STEPS) -> list[StepReport]:
    """Iterate `step`.  `steps=None` runs to a fixpoint (next state equal to
    the current one), guarded by `max_steps`; a step count runs exactly that
    many steps."""
    reports: list[StepReport] = []
    if steps is None:
        for _ in range(max_steps):
            rep = step(s)
            reports.append(rep)
            if rep.next == s:
                break
            s = rep.next
    else:
        for _ in range(steps):
            rep = step(s)
            reports.append(rep)
            s = rep.next
    return reports
