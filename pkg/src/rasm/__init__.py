"""Reflective parallel abstract state machines.

A machine's program lives in its own state under the nullary symbol `pgm`,
encoded as a tree.  Every step raises that tree back into a rule, evaluates
it against the current state, and applies the collapsed update set; because
`pgm` is an ordinary location, the program can rewrite itself with the same
update machinery, including partial updates built from tree-algebra
operations.  The `conformance` module turns the behavioural postulates such
machines are meant to satisfy into executable checks.
"""

from .conformance import (
    CheckReport,
    Violation,
    check_bounded_exploration,
    check_initial_agreement,
    check_isomorphism_closure,
    check_naive_equivalence,
    check_signature_monotonicity,
    merge_reports,
)
from .encoding import Program, as_program, beta, beta_rule, drop_program, drop_rule, raise_rule
from .errors import (
    DiffError,
    EncodingError,
    EvalError,
    MachineError,
    ParseError,
    RasmError,
    TreeAlgebraError,
)
from .evaluator import eval_comprehension, eval_rule, eval_term
from .machine import StepReport, run, step, validate_initial
from .parser import parse_rule, parse_state, parse_term, parse_tree, parse_value
from .printer import (
    format_trace,
    print_rule,
    print_state,
    print_term,
    print_tree,
    print_value,
    rule_hash,
)
from .state import FunctionSymbol, Location, Signature, State, rename_state
from .treediff import eval_algebra, serialize_algebra, tree_diff_theta, tree_diff_updates
from .trees import Context, Hedge, Tree
from .updates import SharedUpdate, Update, UpdateMultiset, UpdateSet, collapse
from .values import (
    FALSE,
    TRUE,
    UNDEF,
    Atom,
    Boolean,
    Multiset,
    Natural,
    TreeVal,
    TupleVal,
    Undef,
)

__version__ = "0.1.0"
