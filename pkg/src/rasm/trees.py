"""Immutable unranked labelled trees, contexts and hedges.

A tree is a finite, non-empty, ordered tree whose nodes carry labels and whose
leaves may carry values.  A context is a tree with exactly one leaf labelled
with the hole marker ``^`` (rendered that way in canonical text); substituting
a tree for the hole turns it back into a tree.  A hedge is a finite sequence
of trees (possibly empty).

Node identifiers are canonical: the nodes of a tree are numbered 0..n-1 in
preorder, so every operation returns a freshly renumbered result and identity
of nodes across operations is tracked by child-index paths, not by ids.
Leaf values are opaque here; the runtime stores `values.Value` instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .errors import TreeAlgebraError

XI = "^"  # label of the context hole; forbidden everywhere else

Path = tuple[int, ...]  # child-index path from the root


@dataclass(frozen=True, slots=True)
class Node:
    """One tree node: a label, an ordered child tuple, an optional leaf value.

    Internal nodes never carry values; this is enforced on construction.
    """

    label: str
    children: tuple["Node", ...] = ()
    value: object = None

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise TreeAlgebraError("bad-label", f"label must be a non-empty string, got {self.label!r}")
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))
        if self.children and self.value is not None:
            raise TreeAlgebraError("value-on-internal-node", f"node {self.label!r} has children and a value")

    @property
    def is_leaf(self) -> bool:
        return not self.children


def node(label: str, *children: Node) -> Node:
    return Node(label, tuple(children))


def leaf(label: str, value: object = None) -> Node:
    return Node(label, (), value)


def _count_holes(n: Node) -> int:
    total = 1 if n.label == XI else 0
    for c in n.children:
        total += _count_holes(c)
    return total


def _walk(n: Node, parent: int, path: Path, out: list) -> None:
    # Preorder: a node's id is its position in this list.
    mine = len(out)
    out.append((n, parent, path))
    for i, c in enumerate(n.children):
        _walk(c, mine, path + (i,), out)


class _TreeBase:
    """Shared accessors over a root Node; ids are preorder positions."""

    __slots__ = ("_root", "_index", "_hash")

    def __init__(self, root: Node):
        self._root = root
        self._index: Optional[list] = None
        self._hash: Optional[int] = None

    @property
    def root_node(self) -> Node:
        return self._root

    @property
    def root(self) -> int:
        return 0

    def _ensure_index(self) -> list:
        if self._index is None:
            out: list = []
            _walk(self._root, -1, (), out)
            self._index = out
        return self._index

    @property
    def size(self) -> int:
        return len(self._ensure_index())

    @property
    def domain(self) -> range:
        return range(self.size)

    def node(self, o: int) -> Node:
        idx = self._ensure_index()
        if not 0 <= o < len(idx):
            raise TreeAlgebraError("unknown-node", f"node {o} not in domain of size {len(idx)}")
        return idx[o][0]

    def label_of(self, o: int) -> str:
        return self.node(o).label

    def value_of(self, o: int) -> object:
        return self.node(o).value

    def parent_of(self, o: int) -> Optional[int]:
        self.node(o)
        p = self._index[o][1]
        return None if p < 0 else p

    def path_of(self, o: int) -> Path:
        self.node(o)
        return self._index[o][2]

    def children_of(self, o: int) -> tuple[int, ...]:
        n = self.node(o)
        ids = []
        nxt = o + 1
        for c in n.children:
            ids.append(nxt)
            nxt += _node_size(c)
        return tuple(ids)

    def node_at_path(self, path: Sequence[int]) -> int:
        o = 0
        for i in path:
            kids = self.children_of(o)
            if not 0 <= i < len(kids):
                raise TreeAlgebraError("unknown-node", f"path {tuple(path)} leaves the tree at {o}")
            o = kids[i]
        return o

    def iter_nodes(self) -> Iterator[tuple[int, Node, Path]]:
        for o, (n, _p, path) in enumerate(self._ensure_index()):
            yield o, n, path

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, _TreeBase):
            return NotImplemented
        return self._root == other._root

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._root)
        return self._hash

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._root!r})"


def _node_size(n: Node) -> int:
    return 1 + sum(_node_size(c) for c in n.children)


class Tree(_TreeBase):
    """A hole-free tree."""

    __slots__ = ()

    def __init__(self, root: Node):
        if _count_holes(root) != 0:
            raise TreeAlgebraError("unexpected-hole", "a Tree must contain no hole leaf")
        super().__init__(root)


class Context(_TreeBase):
    """A tree with exactly one hole leaf (label ``^``, no value)."""

    __slots__ = ()

    def __init__(self, root: Node):
        if _count_holes(root) != 1:
            raise TreeAlgebraError("not-a-context", f"a Context needs exactly one hole, found {_count_holes(root)}")
        super().__init__(root)

    @property
    def hole(self) -> int:
        """NodeId of the hole leaf."""
        for o, n, _path in self.iter_nodes():
            if n.label == XI:
                if not n.is_leaf or n.value is not None:
                    raise TreeAlgebraError("not-a-context", "hole must be a bare leaf")
                return o
        raise TreeAlgebraError("not-a-context", "no hole found")  # unreachable


HOLE = Context(Node(XI))  # the trivial context

Hedge = tuple[Tree, ...]


def hedge(*trees: Tree) -> Hedge:
    return tuple(trees)


def _rebuild(n: Node, path: Path, depth: int, replacement) -> Node:
    """Replace the subtree at `path` below `n`; `replacement` is a Node or a
    hedge-splice marker (list of Nodes) handled by the caller for hedges."""
    if depth == len(path):
        return replacement
    i = path[depth]
    kids = list(n.children)
    kids[i] = _rebuild(kids[i], path, depth + 1, replacement)
    return Node(n.label, tuple(kids), n.value)


def _splice(n: Node, path: Path, depth: int, items: tuple[Node, ...]) -> Node:
    """Replace the node at `path` by zero or more siblings spliced in place."""
    i = path[depth]
    kids = list(n.children)
    if depth == len(path) - 1:
        kids[i:i + 1] = list(items)
    else:
        kids[i] = _splice(kids[i], path, depth + 1, items)
    return Node(n.label, tuple(kids), n.value)


# ---------------------------------------------------------------- selectors

def subtree(t: _TreeBase, o: int) -> Tree | Context:
    """Largest subtree rooted at node `o`, canonically renumbered."""
    n = t.node(o)
    holes = _count_holes(n)
    if holes == 0:
        return Tree(n)
    if holes == 1:
        return Context(n)
    raise TreeAlgebraError("not-a-context", "subtree contains several holes")  # only via malformed input


def context_at(t: _TreeBase, o1: int, o2: int) -> Context:
    """The subtree at `o1` with the subtree at `o2` punched out as the hole.

    `o2` must lie strictly below `o1`.
    """
    p1, p2 = t.path_of(o1), t.path_of(o2)
    if len(p2) <= len(p1) or p2[: len(p1)] != p1:
        raise TreeAlgebraError("not-an-ancestor", f"node {o1} is not a strict ancestor of {o2}")
    sub = t.node(o1)
    rel = p2[len(p1):]
    return Context(_rebuild(sub, rel, 0, Node(XI)))


# ------------------------------------------------------------ substitutions

def subst_tt(t1: Tree, o: int, t2: Tree) -> Tree:
    """t1 with the largest subtree at `o` replaced by t2."""
    path = t1.path_of(o)
    return Tree(_rebuild(t1.root_node, path, 0, t2.root_node))


def subst_tc(t1: Tree, o: int, c: Context = HOLE) -> Context:
    """t1 with the subtree at `o` replaced by the context c.

    With the trivial context this punches a hole at `o`; the general form is
    the shortcut composition through the trivial-hole intermediate.
    """
    path = t1.path_of(o)
    punched = Context(_rebuild(t1.root_node, path, 0, Node(XI)))
    if c is HOLE or c == HOLE:
        return punched
    return subst_cc(punched, c)


def subst_cc(c1: Context, c2: Context) -> Context:
    """c1 with its hole replaced by c2 (context composition)."""
    path = c1.path_of(c1.hole)
    return Context(_rebuild(c1.root_node, path, 0, c2.root_node))


def subst_ct(c: Context, t: Tree) -> Tree:
    """c with its hole replaced by t; no hole remains."""
    path = c.path_of(c.hole)
    return Tree(_rebuild(c.root_node, path, 0, t.root_node))


# ---------------------------------------------------------------- operators

def label_hedge(a: str, h: Sequence[Tree]) -> Tree:
    """A new root labelled `a` over the hedge's trees (empty hedge: a leaf)."""
    if a == XI:
        raise TreeAlgebraError("xi-label-forbidden", "the hole label cannot label a new root")
    return Tree(Node(a, tuple(t.root_node for t in h)))


def label_context(a: str, c: Context) -> Context:
    """A new root labelled `a` over the context."""
    if a == XI:
        raise TreeAlgebraError("xi-label-forbidden", "the hole label cannot label a new root")
    return Context(Node(a, (c.root_node,)))


def left_extend(h: Sequence[Tree], c: Context) -> Context:
    """Prepend the hedge's trees to the root children of c."""
    root = c.root_node
    if root.label == XI:
        raise TreeAlgebraError("trivial-context-not-extendable", "cannot extend the trivial context")
    return Context(Node(root.label, tuple(t.root_node for t in h) + root.children, root.value))


def right_extend(h: Sequence[Tree], c: Context) -> Context:
    """Append the hedge's trees to the root children of c."""
    root = c.root_node
    if root.label == XI:
        raise TreeAlgebraError("trivial-context-not-extendable", "cannot extend the trivial context")
    return Context(Node(root.label, root.children + tuple(t.root_node for t in h), root.value))


def concat_hedges(h1: Sequence[Tree], h2: Sequence[Tree]) -> Hedge:
    return tuple(h1) + tuple(h2)


def inject_hedge(c: Context, h: Sequence[Tree]) -> Tree:
    """Replace the hole by the hedge's trees spliced at the hole position.

    An empty (or multi-tree) hedge needs the hole to sit below the root: the
    result must still be a single non-empty tree.
    """
    items = tuple(t.root_node for t in h)
    path = c.path_of(c.hole)
    if not path:  # hole at root
        if len(items) == 1:
            return Tree(items[0])
        code = "empty-hedge-at-root" if not items else "hedge-at-root"
        raise TreeAlgebraError(code, f"cannot splice {len(items)} trees at a root hole")
    return Tree(_splice(c.root_node, path, 0, items))


def inject_context(c1: Context, c2: Context) -> Context:
    """Replace c1's hole by the context c2 (alias of composition)."""
    return subst_cc(c1, c2)


def trees_equal(t1: _TreeBase, t2: _TreeBase) -> bool:
    """Structural equality: labels, sibling order and leaf values, ids ignored."""
    return t1.root_node == t2.root_node
