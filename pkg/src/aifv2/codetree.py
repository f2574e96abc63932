"""Code trees for binary AIFV-2 codes.

A tree is stored as a flat tuple of :class:`Node` records in preorder
(0-child before 1-child).  Construction does not validate; call
:func:`validate` (or :func:`check`) to get the list of violated rules.
"""
from __future__ import annotations

import enum
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping


class NodeKind(enum.Enum):
    COMPLETE = "complete"
    MASTER = "master"
    SLAVE = "slave"
    LEAF = "leaf"


class TreeKind(enum.Enum):
    T0 = "T0"
    T1 = "T1"


COMPLETE, MASTER, SLAVE, LEAF = NodeKind.COMPLETE, NodeKind.MASTER, NodeKind.SLAVE, NodeKind.LEAF
T0, T1 = TreeKind.T0, TreeKind.T1


class TreeError(ValueError):
    """Raised for unparsable tree text or structurally invalid trees."""


class ReducedTreeWarning(UserWarning):
    """A structurally valid tree that is not reduced."""


@dataclass(frozen=True)
class Node:
    parent: int | None
    edge: int | None
    kind: NodeKind
    symbol: int | None = None


@dataclass(frozen=True)
class Violation:
    code: str
    node: int | None
    message: str
    reduced_only: bool = False

    def __str__(self):
        where = "" if self.node is None else f" (node {self.node})"
        return f"{self.code}{where}: {self.message}"


# violation codes
MALFORMED = "malformed"
ROOT_NOT_COMPLETE = "root-not-complete"
T1_ROOT_0CHILD = "t1-root-0-child-not-slave"
T1_ROOT_00 = "t1-root-has-00-grandchild"
COMPLETE_MISSING_CHILD = "complete-missing-child"
INCOMPLETE_ONE_CHILD = "incomplete-has-1-child"
LEAF_HAS_CHILD = "leaf-has-child"
MASTER_NO_SLAVE = "master-child-not-slave"
SLAVE_NO_CHILD = "slave-without-child"
SYMBOL_ON_INTERNAL = "symbol-on-internal"
SYMBOL_RANGE = "symbol-out-of-range"
SYMBOL_DUPLICATE = "symbol-duplicate"
SYMBOL_MISSING = "symbol-missing"
# reduced-tree rules
UNASSIGNED = "unassigned-leaf-or-master"
SLAVE_CHAIN = "slave-has-slave-child"
ORPHAN_SLAVE = "slave-without-master"
EMPTY_MASTER = "master-without-descendant-symbol"
TOO_MANY_NODES = "too-many-nodes"


@dataclass(frozen=True)
class CodeTree:
    kind: TreeKind
    n: int
    nodes: tuple[Node, ...]

    @cached_property
    def children(self) -> tuple[list, ...]:
        """``children[v] == [child0, child1]`` (``None`` where absent)."""
        kids = tuple([None, None] for _ in self.nodes)
        for v, node in enumerate(self.nodes):
            if node.parent is not None and 0 <= node.parent < len(self.nodes) and node.edge in (0, 1):
                kids[node.parent][node.edge] = v
        return kids

    @cached_property
    def codewords(self) -> tuple[str, ...]:
        """Edge labels from the root to each node (requires a well-formed tree)."""
        words = [""] * len(self.nodes)
        for v in _top_down(self):
            node = self.nodes[v]
            if node.parent is not None:
                words[v] = words[node.parent] + str(node.edge)
        return tuple(words)

    @cached_property
    def symbol_nodes(self) -> dict[int, int]:
        return {node.symbol: v for v, node in enumerate(self.nodes) if node.symbol is not None}

    def codeword(self, symbol: int) -> str:
        return self.codewords[self.symbol_nodes[symbol]]

    def is_master_symbol(self, symbol: int) -> bool:
        return self.nodes[self.symbol_nodes[symbol]].kind is MASTER

    @property
    def height(self) -> int:
        return max(len(w) for w in self.codewords)

    @classmethod
    def from_codewords(cls, kind: TreeKind, n: int, words: Mapping[int, str]) -> "CodeTree":
        """Build a tree from symbol -> codeword, inferring the unlabelled nodes.

        A symbol node with a child becomes a master, otherwise a leaf.  An
        unlabelled node with two children is complete, with one child a
        slave, with none an (unassigned) leaf.
        """
        prefixes = {""}
        for w in words.values():
            if not set(w) <= {"0", "1"}:
                raise TreeError(f"bad codeword {w!r}")
            prefixes.update(w[:k] for k in range(len(w) + 1))
        owner = {}
        for sym, w in words.items():
            if w in owner:
                raise TreeError(f"codeword {w!r} assigned twice")
            owner[w] = sym
        spec = {}
        for w in prefixes:
            has0, has1 = w + "0" in prefixes, w + "1" in prefixes
            if w in owner:
                kind_ = MASTER if (has0 or has1) else LEAF
            elif has0 and has1:
                kind_ = COMPLETE
            elif has0 or has1:
                kind_ = SLAVE
            else:
                kind_ = LEAF
            spec[w] = (kind_, owner.get(w))
        return cls.from_node_map(kind, n, spec)

    @classmethod
    def from_node_map(cls, kind: TreeKind, n: int, spec: Mapping[str, tuple]) -> "CodeTree":
        """Build from ``codeword -> (NodeKind, symbol)``; every prefix must be present."""
        index = {}
        nodes = []

        def visit(word, parent):
            index[word] = len(nodes)
            kind_, sym = spec[word]
            nodes.append(Node(parent, int(word[-1]) if word else None, kind_, sym))
            me = index[word]
            for bit in "01":
                if word + bit in spec:
                    visit(word + bit, me)

        if "" not in spec:
            raise TreeError("missing root")
        for w in spec:
            if w and w[:-1] not in spec:
                raise TreeError(f"codeword {w!r} has no parent node")
        visit("", None)
        return cls(kind, n, tuple(nodes))


# ---------------------------------------------------------------------------
# validation


def _graph_violations(tree: CodeTree) -> list[Violation]:
    out = []
    nodes = tree.nodes
    if not nodes:
        return [Violation(MALFORMED, None, "tree has no nodes")]
    roots = [v for v, nd in enumerate(nodes) if nd.parent is None]
    if len(roots) != 1:
        out.append(Violation(MALFORMED, None, f"expected one root, found {len(roots)}"))
    seen_edges = {}
    for v, nd in enumerate(nodes):
        if nd.parent is None:
            if nd.edge is not None:
                out.append(Violation(MALFORMED, v, "root has an incoming edge label"))
            continue
        if not 0 <= nd.parent < len(nodes) or nd.parent == v:
            out.append(Violation(MALFORMED, v, f"bad parent index {nd.parent}"))
            continue
        if nd.edge not in (0, 1):
            out.append(Violation(MALFORMED, v, f"bad edge label {nd.edge!r}"))
            continue
        key = (nd.parent, nd.edge)
        if key in seen_edges:
            out.append(Violation(MALFORMED, v, f"node {nd.parent} has two {nd.edge}-children"))
        seen_edges[key] = v
    if out:
        return out
    # every node must reach the root without revisiting
    root = roots[0]
    for v in range(len(nodes)):
        seen = set()
        u = v
        while u != root:
            if u in seen:
                return [Violation(MALFORMED, v, "cycle in parent links")]
            seen.add(u)
            u = nodes[u].parent
    if root != 0:
        out.append(Violation(MALFORMED, root, "root must be node 0"))
    return out


def validate(tree: CodeTree) -> list[Violation]:
    """Every violated rule, structural and reduced (``reduced_only=True``)."""
    out = _graph_violations(tree)
    if out:
        return out
    nodes, kids = tree.nodes, tree.children
    t1_slave = None
    root = nodes[0]
    if root.kind is not COMPLETE:
        out.append(Violation(ROOT_NOT_COMPLETE, 0, f"{tree.kind.value} root must be complete"))
    if tree.kind is T1:
        c0 = kids[0][0]
        if c0 is None or nodes[c0].kind is not SLAVE:
            out.append(Violation(T1_ROOT_0CHILD, c0 if c0 is not None else 0,
                                 "T1 root 0-child must be slave"))
        else:
            t1_slave = c0
            if kids[c0][0] is not None:
                out.append(Violation(T1_ROOT_00, kids[c0][0], "T1 root has a 00 grandchild"))
            if kids[c0][1] is None:
                out.append(Violation(SLAVE_NO_CHILD, c0, "T1 root 0-child needs a 1-child"))

    for v, nd in enumerate(nodes):
        c0, c1 = kids[v]
        if nd.kind is COMPLETE:
            if c0 is None or c1 is None:
                out.append(Violation(COMPLETE_MISSING_CHILD, v, "complete node needs both children"))
        elif nd.kind is LEAF:
            if c0 is not None or c1 is not None:
                out.append(Violation(LEAF_HAS_CHILD, v, "leaf has a child"))
        elif v != t1_slave:
            if c1 is not None:
                out.append(Violation(INCOMPLETE_ONE_CHILD, v, f"{nd.kind.value} node has a 1-child"))
            if nd.kind is MASTER and (c0 is None or nodes[c0].kind is not SLAVE):
                out.append(Violation(MASTER_NO_SLAVE, v, "master's child must be a slave"))
            if nd.kind is SLAVE and c0 is None:
                out.append(Violation(SLAVE_NO_CHILD, v, "slave node has no child"))
        if nd.symbol is not None and nd.kind not in (LEAF, MASTER):
            out.append(Violation(SYMBOL_ON_INTERNAL, v, "symbols only on leaves/masters"))

    owners: dict[int, int] = {}
    for v, nd in enumerate(nodes):
        if nd.symbol is None:
            continue
        if not 0 <= nd.symbol < tree.n:
            out.append(Violation(SYMBOL_RANGE, v, f"symbol {nd.symbol} outside 0..{tree.n - 1}"))
        elif nd.symbol in owners:
            out.append(Violation(SYMBOL_DUPLICATE, v, f"symbol {nd.symbol} assigned twice"))
        else:
            owners[nd.symbol] = v
    for s in range(tree.n):
        if s not in owners:
            out.append(Violation(SYMBOL_MISSING, None, f"symbol {s} is not assigned"))

    out.extend(_reduced_violations(tree, t1_slave))
    return out


def _reduced_violations(tree: CodeTree, t1_slave: int | None) -> list[Violation]:
    out = []
    nodes, kids = tree.nodes, tree.children
    if len(nodes) > 3 * tree.n:
        out.append(Violation(TOO_MANY_NODES, None, f"{len(nodes)} nodes exceeds 3n = {3 * tree.n}", True))
    # has_sym[v]: some symbol in the subtree rooted at v
    has_sym = [nd.symbol is not None for nd in nodes]
    for v in reversed(_top_down(tree)):
        if has_sym[v] and nodes[v].parent is not None:
            has_sym[nodes[v].parent] = True
    for v, nd in enumerate(nodes):
        if nd.kind in (LEAF, MASTER) and nd.symbol is None:
            out.append(Violation(UNASSIGNED, v, f"{nd.kind.value} carries no symbol", True))
        if nd.kind is SLAVE:
            c0 = kids[v][0]
            if c0 is not None and nodes[c0].kind is SLAVE:
                out.append(Violation(SLAVE_CHAIN, v, "slave has a slave child", True))
            parent = nd.parent
            if v != t1_slave and (parent is None or nodes[parent].kind is not MASTER):
                out.append(Violation(ORPHAN_SLAVE, v, "slave does not hang under a master", True))
        if nd.kind is MASTER:
            s = kids[v][0]
            g = kids[s][0] if s is not None else None
            if g is None or not has_sym[g]:
                out.append(Violation(EMPTY_MASTER, v, "no symbol below the master's grandchild", True))
    return out


def _top_down(tree: CodeTree) -> list[int]:
    order, stack = [], [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(c for c in tree.children[v] if c is not None)
    return order


def structural_violations(tree: CodeTree) -> list[Violation]:
    return [v for v in validate(tree) if not v.reduced_only]


def is_valid(tree: CodeTree) -> bool:
    return not structural_violations(tree)


def is_reduced(tree: CodeTree) -> bool:
    return not validate(tree)


def check(tree: CodeTree, reduced: bool = False) -> CodeTree:
    """Raise :class:`TreeError` on structural violations.

    Reduced-rule violations raise when ``reduced`` is true and only warn
    otherwise.
    """
    violations = validate(tree)
    hard = [v for v in violations if not v.reduced_only or reduced]
    if hard:
        raise TreeError("; ".join(str(v) for v in hard))
    soft = [v for v in violations if v.reduced_only]
    if soft:
        warnings.warn("tree is not reduced: " + "; ".join(str(v) for v in soft), ReducedTreeWarning,
                      stacklevel=2)
    return tree


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class TreeMetrics:
    L: Fraction
    q0: Fraction
    q1: Fraction


def metrics(tree: CodeTree, dist) -> TreeMetrics:
    """Expected codeword length and leaf/master probability mass."""
    if tree.n != dist.n:
        raise TreeError(f"tree has {tree.n} symbols, distribution has {dist.n}")
    check_quiet(tree)
    L = q0 = q1 = Fraction(0)
    words = tree.codewords
    for v, nd in enumerate(tree.nodes):
        if nd.symbol is None:
            continue
        p = dist.probs[nd.symbol]
        L += p * len(words[v])
        if nd.kind is MASTER:
            q1 += p
        else:
            q0 += p
    return TreeMetrics(L, q0, q1)


def check_quiet(tree: CodeTree) -> None:
    hard = structural_violations(tree)
    if hard:
        raise TreeError("; ".join(str(v) for v in hard))


# ---------------------------------------------------------------------------
# text format

_HEADER_RE = re.compile(r"^tree\s+(T0|T1)\s+n=(\d+)$")
_FIELDS = ("parent", "edge", "kind", "symbol")


def serialize(tree: CodeTree) -> str:
    lines = [f"tree {tree.kind.value} n={tree.n}"]
    for v, nd in enumerate(tree.nodes):
        parent = "-" if nd.parent is None else nd.parent
        edge = "-" if nd.edge is None else nd.edge
        sym = "-" if nd.symbol is None else nd.symbol
        lines.append(f"node {v} parent={parent} edge={edge} kind={nd.kind.value} symbol={sym}")
    return "\n".join(lines) + "\n"


def deserialize(text: str, reduced: bool = False) -> CodeTree:
    """Parse the tree format; node ids may be arbitrary but are renumbered in preorder."""
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise TreeError("empty tree text")
    lineno, head = lines[0]
    m = _HEADER_RE.match(head)
    if not m:
        raise TreeError(f"line {lineno}: expected 'tree T0|T1 n=<n>'")
    kind, n = TreeKind(m.group(1)), int(m.group(2))

    records = {}
    for lineno, ln in lines[1:]:
        parts = ln.split()
        if len(parts) < 2 or parts[0] != "node":
            raise TreeError(f"line {lineno}: expected a node record")
        try:
            nid = int(parts[1])
        except ValueError:
            raise TreeError(f"line {lineno}: bad node id {parts[1]!r}") from None
        if nid in records:
            raise TreeError(f"line {lineno}: node {nid} defined twice")
        fields = {}
        for item in parts[2:]:
            key, sep, val = item.partition("=")
            if not sep or key not in _FIELDS:
                raise TreeError(f"line {lineno}: unexpected field {item!r}")
            if key in fields:
                raise TreeError(f"line {lineno}: field {key!r} given twice")
            fields[key] = val
        if set(fields) != set(_FIELDS):
            raise TreeError(f"line {lineno}: missing fields {sorted(set(_FIELDS) - set(fields))}")
        try:
            parent = None if fields["parent"] == "-" else int(fields["parent"])
            edge = None if fields["edge"] == "-" else int(fields["edge"])
            nkind = NodeKind(fields["kind"])
            sym = None if fields["symbol"] == "-" else int(fields["symbol"])
        except ValueError as exc:
            raise TreeError(f"line {lineno}: {exc}") from None
        records[nid] = (lineno, parent, edge, nkind, sym)

    # renumber in preorder
    kids: dict[int, dict[int, int]] = {}
    roots = []
    for nid, (lineno, parent, edge, _, _) in records.items():
        if parent is None:
            roots.append(nid)
            continue
        if parent not in records:
            raise TreeError(f"line {lineno}: unknown parent {parent}")
        if edge not in (0, 1):
            raise TreeError(f"line {lineno}: non-root node needs edge 0 or 1")
        slot = kids.setdefault(parent, {})
        if edge in slot:
            raise TreeError(f"line {lineno}: node {parent} already has a {edge}-child")
        slot[edge] = nid
    if len(roots) != 1:
        raise TreeError(f"expected exactly one root, found {len(roots)}")
    new_id: dict[int, int] = {}
    order = []
    stack = [roots[0]]
    while stack:
        nid = stack.pop()
        if nid in new_id:
            raise TreeError(f"line {records[nid][0]}: cycle through node {nid}")
        new_id[nid] = len(order)
        order.append(nid)
        for edge in (1, 0):
            if edge in kids.get(nid, {}):
                stack.append(kids[nid][edge])
    if len(order) != len(records):
        raise TreeError("some nodes are not connected to the root")
    nodes = []
    for nid in order:
        _, parent, edge, nkind, sym = records[nid]
        nodes.append(Node(None if parent is None else new_id[parent], edge, nkind, sym))
    tree = CodeTree(kind, n, tuple(nodes))
    return check(tree, reduced=reduced)


def read_tree(path, reduced: bool = False) -> CodeTree:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read(), reduced=reduced)


def write_tree(tree: CodeTree, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(tree))
