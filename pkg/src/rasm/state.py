"""States: signatures, locations, interpretations, and atom renaming.

A state is a finite interpretation of a signature: a mapping from locations
(function symbol + argument tuple) to values, undef everywhere else.  The
distinguished nullary symbol ``pgm`` holds the machine's self-representation.

`rename_state` applies a bijection on atoms pointwise to every location and
value, including values quoted inside dropped terms and rules; it is the
workhorse behind the isomorphism-commutation check.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Optional

from dataclasses import dataclass

from .errors import RasmError
from .trees import Node, Path, Tree, _TreeBase, subtree
from . import terms as T
from .values import (
    UNDEF,
    Atom,
    DroppedRule,
    DroppedTerm,
    Multiset,
    TreeVal,
    TupleVal,
    Value,
    value_key,
)

PGM = "pgm"


@dataclass(frozen=True, slots=True)
class FunctionSymbol:
    name: str
    arity: int
    kind: str = "dynamic"  # dynamic | static | relational; metadata only

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError("arity must be non-negative")
        if self.kind not in ("dynamic", "static", "relational"):
            raise ValueError(f"unknown symbol kind {self.kind!r}")


class Signature:
    """Ordered set of function symbols, unique by name.

    Equality compares the (name, arity) set; kinds are declarative metadata
    and declaration order only matters for deterministic printing/encoding.
    """

    __slots__ = ("_by_name",)

    def __init__(self, symbols: Iterable[FunctionSymbol] = ()):
        by_name: dict[str, FunctionSymbol] = {}
        for sym in symbols:
            if sym.name in by_name:
                raise RasmError("duplicate-symbol", f"symbol {sym.name!r} declared twice")
            by_name[sym.name] = sym
        object.__setattr__(self, "_by_name", by_name)

    def __setattr__(self, *_):
        raise AttributeError("Signature is immutable")

    def lookup(self, name: str) -> Optional[FunctionSymbol]:
        return self._by_name.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self) -> Iterator[FunctionSymbol]:
        return iter(self._by_name.values())

    def __len__(self) -> int:
        return len(self._by_name)

    def pairs(self) -> frozenset[tuple[str, int]]:
        return frozenset((s.name, s.arity) for s in self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Signature):
            return NotImplemented
        return self.pairs() == other.pairs()

    def __hash__(self) -> int:
        return hash(self.pairs())

    def contains_all(self, other: "Signature") -> bool:
        """Does every (name, arity) of `other` appear here?"""
        return other.pairs() <= self.pairs()

    def extended(self, symbols: Iterable[FunctionSymbol]) -> "Signature":
        """This signature plus any genuinely new symbols, order preserved.

        A symbol whose name is already bound keeps its existing entry; a
        redeclaration at a different arity is an error.
        """
        out = dict(self._by_name)
        for sym in symbols:
            have = out.get(sym.name)
            if have is None:
                out[sym.name] = sym
            elif have.arity != sym.arity:
                raise RasmError(
                    "arity-conflict",
                    f"symbol {sym.name!r} redeclared at arity {sym.arity}, have {have.arity}",
                )
        return Signature(out.values())

    def __repr__(self) -> str:
        return "Signature(" + ", ".join(f"{s.name}/{s.arity}" for s in self) + ")"


@dataclass(frozen=True, slots=True)
class Location:
    """A function symbol name with an argument tuple.

    ``path`` names a node sublocation of a tree-valued root location: the
    value at the node reached by that child-index path.  Sublocations are
    write-targets only for shared updates produced by the tree differ.
    """

    symbol: str
    args: tuple[Value, ...] = ()
    path: Optional[Path] = None

    @property
    def base(self) -> "Location":
        return self if self.path is None else Location(self.symbol, self.args)

    def key(self) -> tuple:
        return (
            self.symbol,
            len(self.args),
            tuple(value_key(a) for a in self.args),
            self.path if self.path is not None else (-1,),
        )


PGM_LOCATION = Location(PGM)


class State:
    """A finite first-order structure plus run metadata.

    ``interp`` never stores undef (absence means undef).  ``universe`` holds
    extra declared base-set values beyond those occurring in the
    interpretation.  ``reserve_cursor``/``reserve_seed`` drive deterministic
    fresh-atom draws and are excluded from equality.
    """

    __slots__ = ("signature", "interp", "universe", "reserve_cursor", "reserve_seed", "_domain")

    def __init__(
        self,
        signature: Signature,
        interp: Mapping[Location, Value] | Iterable[tuple[Location, Value]] = (),
        universe: Iterable[Value] = (),
        reserve_cursor: int = 0,
        reserve_seed: int = 0,
    ):
        items = interp.items() if isinstance(interp, Mapping) else interp
        clean: dict[Location, Value] = {}
        for loc, val in items:
            if loc.path is not None:
                raise RasmError("sublocation-write", "interpretations store root locations only")
            if val != UNDEF:
                clean[loc] = val
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "interp", clean)
        object.__setattr__(self, "universe", frozenset(universe))
        object.__setattr__(self, "reserve_cursor", reserve_cursor)
        object.__setattr__(self, "reserve_seed", reserve_seed)
        object.__setattr__(self, "_domain", None)

    def __setattr__(self, *_):
        raise AttributeError("State is immutable; use with_* helpers")

    # -- reads ------------------------------------------------------------

    def value_of(self, loc: Location) -> Value:
        """Value at a location; node sublocations read into the tree value."""
        base_val = self.interp.get(loc.base, UNDEF)
        if loc.path is None:
            return base_val
        if not isinstance(base_val, TreeVal):
            return UNDEF
        t = base_val.tree
        try:
            o = t.node_at_path(loc.path)
        except RasmError:
            return UNDEF
        return TreeVal(subtree(t, o))

    def locations(self) -> tuple[Location, ...]:
        return tuple(sorted(self.interp, key=Location.key))

    # -- derived sets -----------------------------------------------------

    def active_domain(self) -> tuple[Value, ...]:
        """Every value occurring in the interpretation (recursively) plus the
        declared universe, in canonical order.  Quantifiers range over this."""
        if self._domain is None:
            seen: set[Value] = set(self.universe)
            for loc, val in self.interp.items():
                for a in loc.args:
                    _collect_values(a, seen)
                _collect_values(val, seen)
            object.__setattr__(self, "_domain", tuple(sorted(seen, key=value_key)))
        return self._domain

    def reserve_atom(self, offset: int = 0) -> Atom:
        k = self.reserve_cursor + offset
        if self.reserve_seed:
            return Atom(f"$r{self.reserve_seed}_{k}")
        return Atom(f"$r{k}")

    # -- functional updates ----------------------------------------------

    def with_interp(self, interp: Mapping[Location, Value]) -> "State":
        return State(self.signature, interp, self.universe, self.reserve_cursor, self.reserve_seed)

    def with_signature(self, signature: Signature) -> "State":
        return State(signature, self.interp, self.universe, self.reserve_cursor, self.reserve_seed)

    def with_cursor(self, cursor: int) -> "State":
        return State(self.signature, self.interp, self.universe, cursor, self.reserve_seed)

    # -- comparison -------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, State):
            return NotImplemented
        return (
            self.signature == other.signature
            and self.interp == other.interp
            and self.universe == other.universe
        )

    def __hash__(self) -> int:
        return hash((self.signature, frozenset(self.interp.items()), self.universe))

    def __repr__(self) -> str:
        entries = ", ".join(f"{loc.symbol}{loc.args}={val!r}" for loc, val in list(self.interp.items())[:4])
        more = "..." if len(self.interp) > 4 else ""
        return f"State({self.signature!r}, {{{entries}{more}}})"


def _collect_values(v: Value, out: set) -> None:
    out.add(v)
    if isinstance(v, TupleVal):
        for x in v.items:
            _collect_values(x, out)
    elif isinstance(v, Multiset):
        for x in v.items:
            _collect_values(x, out)
    elif isinstance(v, TreeVal):
        for _o, n, _p in v.tree.iter_nodes():
            if n.value is not None:
                _collect_values(n.value, out)
    elif isinstance(v, DroppedTerm):
        for lit in _term_literals(v.term):
            _collect_values(lit, out)
    elif isinstance(v, DroppedRule):
        for lit in _rule_literals(v.rule):
            _collect_values(lit, out)


def _term_literals(t: T.Term) -> Iterator[Value]:
    if isinstance(t, T.Literal):
        yield t.value
    elif isinstance(t, (T.Apply, T.BackgroundOp)):
        for a in t.args:
            yield from _term_literals(a)
    elif isinstance(t, T.Comprehension):
        yield from _term_literals(t.head)
        yield from _term_literals(t.guard)


def _rule_literals(r: T.Rule) -> Iterator[Value]:
    if isinstance(r, T.Assign):
        for a in r.args + (r.rhs,):
            yield from _term_literals(a)
    elif isinstance(r, T.PartialAssign):
        for a in r.args + r.operands:
            yield from _term_literals(a)
    elif isinstance(r, T.If):
        yield from _term_literals(r.cond)
        yield from _rule_literals(r.then_branch)
        yield from _rule_literals(r.else_branch)
    elif isinstance(r, T.Par):
        for x in r.rules:
            yield from _rule_literals(x)
    elif isinstance(r, T.Forall):
        yield from _term_literals(r.guard)
        yield from _rule_literals(r.body)
    elif isinstance(r, T.Let):
        yield from _term_literals(r.binding)
        yield from _rule_literals(r.body)
    elif isinstance(r, T.Import):
        yield from _rule_literals(r.body)


# ----------------------------------------------------------- the subtree order

def subsumes(l1: Location, l2: Location, s: State) -> bool:
    """Does the value at `l1` determine the value at `l2`?

    Only the decidable fragment is answered positively: a location subsumes
    itself, and a tree-valued root location subsumes every node sublocation
    of its tree (shallower paths subsume deeper ones on the same base).
    Everything else answers False.
    """
    if l1 == l2:
        return True
    if l1.base != l2.base:
        return False
    p1 = l1.path if l1.path is not None else ()
    p2 = l2.path if l2.path is not None else ()
    return len(p1) <= len(p2) and p2[: len(p1)] == p1


def depends_on(l1: Location, l2: Location, s: State) -> bool:
    """True when val(l2) = undef forces val(l1) = undef.

    A node sublocation depends on its root location: no tree, no node.
    Same decidable fragment as `subsumes`, False elsewhere.
    """
    return subsumes(l2, l1, s)


# ------------------------------------------------------------- atom renaming

def atoms_of_value(v: Value) -> frozenset[str]:
    found: set[Value] = set()
    _collect_values(v, found)
    return frozenset(x.name for x in found if isinstance(x, Atom))


def atoms_of_state(s: State) -> frozenset[str]:
    out: set[str] = set()
    for loc, val in s.interp.items():
        for a in loc.args:
            out |= atoms_of_value(a)
        out |= atoms_of_value(val)
    for v in s.universe:
        out |= atoms_of_value(v)
    return frozenset(out)


def rename_value(v: Value, pi: Mapping[str, str]) -> Value:
    if isinstance(v, Atom):
        return Atom(pi.get(v.name, v.name))
    if isinstance(v, TupleVal):
        return TupleVal(tuple(rename_value(x, pi) for x in v.items))
    if isinstance(v, Multiset):
        return Multiset(rename_value(x, pi) for x in v.items)
    if isinstance(v, TreeVal):
        return TreeVal(type(v.tree)(_rename_node(v.tree.root_node, pi)))
    if isinstance(v, DroppedTerm):
        return DroppedTerm(rename_term(v.term, pi))
    if isinstance(v, DroppedRule):
        return DroppedRule(rename_rule(v.rule, pi))
    return v


def _rename_node(n: Node, pi: Mapping[str, str]) -> Node:
    if n.is_leaf:
        val = None if n.value is None else rename_value(n.value, pi)
        return Node(n.label, (), val)
    return Node(n.label, tuple(_rename_node(c, pi) for c in n.children))


def rename_term(t: T.Term, pi: Mapping[str, str]) -> T.Term:
    """Rename atoms inside literals; variables and symbol names are not atoms."""
    if isinstance(t, T.Literal):
        return T.Literal(rename_value(t.value, pi))
    if isinstance(t, T.Apply):
        return T.Apply(t.func, tuple(rename_term(a, pi) for a in t.args))
    if isinstance(t, T.BackgroundOp):
        return T.BackgroundOp(t.op, tuple(rename_term(a, pi) for a in t.args))
    if isinstance(t, T.Comprehension):
        return T.Comprehension(rename_term(t.head, pi), t.binders, rename_term(t.guard, pi))
    return t


def rename_rule(r: T.Rule, pi: Mapping[str, str]) -> T.Rule:
    if isinstance(r, T.Assign):
        return T.Assign(r.func, tuple(rename_term(a, pi) for a in r.args), rename_term(r.rhs, pi))
    if isinstance(r, T.PartialAssign):
        return T.PartialAssign(
            r.func,
            tuple(rename_term(a, pi) for a in r.args),
            r.op,
            tuple(rename_term(a, pi) for a in r.operands),
        )
    if isinstance(r, T.If):
        return T.If(rename_term(r.cond, pi), rename_rule(r.then_branch, pi), rename_rule(r.else_branch, pi))
    if isinstance(r, T.Par):
        return T.Par(tuple(rename_rule(x, pi) for x in r.rules))
    if isinstance(r, T.Forall):
        return T.Forall(r.var, rename_term(r.guard, pi), rename_rule(r.body, pi))
    if isinstance(r, T.Let):
        return T.Let(r.var, rename_term(r.binding, pi), rename_rule(r.body, pi))
    if isinstance(r, T.Import):
        return T.Import(r.var, rename_rule(r.body, pi))
    raise TypeError(f"not a rule: {r!r}")


def rename_state(s: State, pi: Mapping[str, str]) -> State:
    """Apply a bijection on atom names to the whole state.

    The bijection must cover every atom occurring in the state and must not
    merge two of them.  Booleans, naturals and undef are fixed.  The
    signature is untouched: isomorphisms act on the base set, not on the
    vocabulary.
    """
    occurring = atoms_of_state(s)
    missing = occurring - set(pi)
    if missing:
        raise RasmError("partial-bijection", f"bijection misses atoms {sorted(missing)[:5]}")
    relevant = {k: pi[k] for k in occurring}
    if len(set(relevant.values())) != len(relevant):
        raise RasmError("not-a-bijection", "renaming merges atoms")
    interp = {
        Location(loc.symbol, tuple(rename_value(a, pi) for a in loc.args)): rename_value(val, pi)
        for loc, val in s.interp.items()
    }
    universe = [rename_value(v, pi) for v in s.universe]
    return State(s.signature, interp, universe, s.reserve_cursor, s.reserve_seed)
