"""Executable checks of the behavioural postulates on concrete instances.

Each check returns a CheckReport rather than asserting, so the CLI and the
test suite can both consume them.  A failed precondition (states that do
not coincide where the postulate demands it) is a note, never a violation:
the postulates are conditional statements and only their conclusions are
checkable.

The step function and the update-multiset function are injectable so
deliberately broken implementations can prove the checks have teeth.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

from . import machine
from .encoding import as_program, beta_rule
from .errors import RasmError
from .evaluator import BACKGROUND_OPS, eval_rule, eval_term
from .naive import naive_eval_rule
from .printer import print_rule, print_state
from .state import PGM_LOCATION, State, atoms_of_state, atoms_of_value, rename_state
from .terms import Forall, If, Import, Let, Par, PartialAssign, Rule
from .updates import UpdateMultiset, collapse
from .values import TreeVal, Value


@dataclass(frozen=True, slots=True)
class Violation:
    description: str
    data: dict  # replay payload: the exact inputs that re-trigger the failure


@dataclass(frozen=True, slots=True)
class CheckReport:
    name: str
    instances: int
    violations: tuple[Violation, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def text(self) -> str:
        lines = [f"check {self.name}", f"instances {self.instances}"]
        for n in self.notes:
            lines.append("note " + n)
        lines.append(f"violations {len(self.violations)}")
        for v in self.violations:
            lines.append("violation " + v.description)
        return "\n".join(lines)


def merge_reports(reports: Sequence[CheckReport]) -> str:
    blocks = [r.text() for r in sorted(reports, key=lambda r: r.name)]
    return "\n\n".join(blocks) + "\n"


def combine_reports(reports: Sequence[CheckReport]) -> CheckReport:
    """Fold same-named reports (one per instance) into a single tally."""
    names = {r.name for r in reports}
    if len(names) != 1:
        raise ValueError(f"cannot combine differently named reports: {sorted(names)}")
    return CheckReport(
        names.pop(),
        sum(r.instances for r in reports),
        tuple(v for r in reports for v in r.violations),
        tuple(n for r in reports for n in r.notes),
    )


def rule_has_partial_assign(r: Rule) -> bool:
    if isinstance(r, PartialAssign):
        return True
    if isinstance(r, If):
        return rule_has_partial_assign(r.then_branch) or rule_has_partial_assign(r.else_branch)
    if isinstance(r, Par):
        return any(rule_has_partial_assign(c) for c in r.rules)
    if isinstance(r, (Forall, Let, Import)):
        return rule_has_partial_assign(r.body)
    return False


StepFn = Callable[[State], object]  # anything with a .next state


# ---------------------------------------------------- isomorphism closure

def _movable_atoms(s: State) -> list[str]:
    # Renaming a symbol-name atom would detach the encoded program from the
    # signature, and the reserve namespace is the step function's own.  Atoms
    # spelled into the stored program are syntax rather than data: a machine
    # may raise them into symbol names later (signature growth), and symbols
    # never move.  Bijections act on what remains.
    names = {sym.name for sym in s.signature}
    in_program = atoms_of_value(s.value_of(PGM_LOCATION))
    return sorted(
        a
        for a in atoms_of_state(s)
        if a not in names
        and a not in in_program
        and not a.startswith("$")
        and a not in BACKGROUND_OPS
    )


def _extend_identity(pi: dict, s: State) -> dict:
    out = dict(pi)
    for a in atoms_of_state(s):
        out.setdefault(a, a)
    return out


def _commutes(s: State, pi: dict, step_fn: StepFn) -> tuple[bool, str]:
    try:
        lhs = step_fn(rename_state(s, _extend_identity(pi, s))).next
    except RasmError as e:
        return False, f"step failed on the renamed state: {e}"
    plain = step_fn(s).next
    rhs = rename_state(plain, _extend_identity(pi, plain))
    if lhs == rhs:
        return True, ""
    return False, "step and renaming do not commute"


def check_isomorphism_closure(
    s: State, trials: int, seed: int = 0, step_fn: StepFn | None = None
) -> CheckReport:
    """Random atom bijections must commute with the step function.

    The bijection is extended identically to reserve atoms, so programs
    whose import draws are paired by enumeration order are outside this
    check's reach; the bundled machines draw nothing.
    """
    fn = step_fn if step_fn is not None else machine.step
    rng = random.Random(seed)
    movable = _movable_atoms(s)
    violations: list[Violation] = []
    notes: list[str] = []
    if not movable:
        notes.append("no movable atoms; only the identity bijection was tried")
    for trial in range(trials):
        if movable and rng.random() < 0.3:
            # Map a slice of the atoms onto fresh spellings.
            taken = set(atoms_of_state(s)) | {sym.name for sym in s.signature}
            sub = [a for a in movable if rng.random() < 0.5] or movable[:1]
            pi = {a: f"iso{trial}_{i}" for i, a in enumerate(sub) if f"iso{trial}_{i}" not in taken}
        else:
            image = movable[:]
            rng.shuffle(image)
            pi = dict(zip(movable, image))
        ok, why = _commutes(s, pi, fn)
        if ok:
            continue
        violations.append(_minimize_iso(s, pi, fn, why))
        break
    return CheckReport("isomorphism-closure", trials, tuple(violations), tuple(notes))


def _minimize_iso(s: State, pi: dict, fn: StepFn, why: str) -> Violation:
    # A single transposition that already breaks commutation is a far more
    # readable witness than a full shuffle.
    moved = sorted(a for a, b in pi.items() if a != b)
    for i, a in enumerate(moved):
        for b in moved[i + 1 :]:
            tau = {a: b, b: a}
            ok, tau_why = _commutes(s, tau, fn)
            if not ok:
                return Violation(
                    f"{tau_why}; witness swaps {a!r} and {b!r}",
                    {"state": s, "pi": tau},
                )
    rendering = ", ".join(f"{a}->{b}" for a, b in sorted(pi.items()) if a != b)
    return Violation(f"{why}; witness renames {rendering}", {"state": s, "pi": dict(pi)})


# ---------------------------------------------------- bounded exploration

UpdatesFn = Callable[[State, Rule], UpdateMultiset]


def _raised_updates(s: State, r: Rule) -> UpdateMultiset:
    return eval_rule(s, {}, r)


def check_bounded_exploration(
    s1: State, s2: State, updates_fn: UpdatesFn | None = None
) -> CheckReport:
    """States agreeing on pgm and on every extracted read term must yield
    the same update multiset.  Give the states equal reserve cursors, or
    fresh-atom spellings will differ for reasons the postulate ignores."""
    fn = updates_fn if updates_fn is not None else _raised_updates
    name = "bounded-exploration"
    if s1.signature != s2.signature:
        return CheckReport(name, 1, (), ("signatures differ; coincidence precondition failed",))
    p1 = s1.value_of(PGM_LOCATION)
    p2 = s2.value_of(PGM_LOCATION)
    if p1 != p2:
        return CheckReport(name, 1, (), ("pgm values differ; coincidence precondition failed",))
    if not isinstance(p1, TreeVal):
        return CheckReport(name, 1, (), ("pgm holds no tree; nothing to check",))
    prog = as_program(p1.tree)
    e1 = s1.with_signature(s1.signature.extended(prog.signature))
    e2 = s2.with_signature(s2.signature.extended(prog.signature))
    reads: list[tuple[Value, Value]] = []
    for b in beta_rule(prog.rule):
        reads.append((eval_term(e1, {}, b), eval_term(e2, {}, b)))
    if any(v1 != v2 for v1, v2 in reads):
        return CheckReport(name, 1, (), ("read-term values differ; coincidence precondition failed",))
    um1 = fn(e1, prog.rule)
    um2 = fn(e2, prog.rule)
    if um1 == um2:
        return CheckReport(name, 1)
    v = Violation(
        "states coincide on pgm and all read terms but the update multisets differ",
        {"s1": s1, "s2": s2, "rule": prog.rule},
    )
    return CheckReport(name, 1, (v,))


# ------------------------------------------- runs and initial states

def check_signature_monotonicity(run: Sequence[State]) -> CheckReport:
    violations = []
    for i in range(len(run) - 1):
        if not run[i + 1].signature.contains_all(run[i].signature):
            lost = sorted(run[i].signature.pairs() - run[i + 1].signature.pairs())
            violations.append(
                Violation(f"step {i + 1} dropped symbols {lost}", {"before": run[i], "after": run[i + 1]})
            )
    return CheckReport("signature-monotonicity", max(len(run) - 1, 0), tuple(violations))


def check_initial_agreement(inits: Sequence[State]) -> CheckReport:
    violations = []
    if inits:
        first = inits[0].value_of(PGM_LOCATION)
        for i, s in enumerate(inits[1:], 1):
            if s.value_of(PGM_LOCATION) != first:
                violations.append(
                    Violation(f"initial state {i} disagrees on pgm", {"first": inits[0], "other": s})
                )
    return CheckReport("initial-agreement", len(inits), tuple(violations))


# ---------------------------------------------------- oracle equivalence

def check_naive_equivalence(s: State, r: Rule) -> CheckReport:
    """evalRule+collapse against the naive evaluator on one (state, rule)
    pair; errors count as outcomes and must match too."""
    try:
        us = collapse(s, eval_rule(s, {}, r))
        main = ("ok", us.updates, us.consistent)
    except RasmError as e:
        main = ("error", e.code)
    try:
        updates, consistent = naive_eval_rule(s, {}, r)
        ref = ("ok", updates, consistent)
    except RasmError as e:
        ref = ("error", e.code)
    if main == ref:
        return CheckReport("naive-equivalence", 1)
    v = Violation(
        f"evaluators disagree on {print_rule(r)!r}: {main[:2]} vs {ref[:2]}",
        {"state": s, "rule": r, "main": main, "naive": ref, "printed_state": print_state(s)},
    )
    return CheckReport("naive-equivalence", 1, (v,))
