"""Exact tree optimizers by enumeration of reduced tree shapes.

A reduced tree is determined, for cost purposes, by its slots: the
(depth, is_master) pairs of its leaves and masters.  For a fixed ``x`` the
objective is linear in the slot costs, so the best assignment of a shape
puts the largest probability on the cheapest slot.

Shapes are generated from the grammar

    sub  := Leaf | Master(sub) | Complete(sub, sub)
    T0   := Complete(sub, sub)
    T1   := root with slave "0" -> sub at "01", and sub at "1"

where ``Master(sub)`` hangs ``sub`` two levels down, below the master's
slave.  Every such tree has 2n - 1 (T0) or 2n (T1) nodes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .codec import CodePair, average_length
from .codetree import (
    COMPLETE, LEAF, MASTER, SLAVE, T0, T1,
    CodeTree, Node, TreeKind, TreeMetrics, serialize,
)

N_MAX = 8
N_ORACLE = 5


class CapacityError(ValueError):
    """Problem size beyond the enumeration caps."""


_LEAF = ("L",)


@lru_cache(maxsize=None)
def _subtrees(k: int) -> tuple:
    out = [_LEAF] if k == 1 else []
    if k >= 2:
        out.extend(("M", s) for s in _subtrees(k - 1))
    for i in range(1, k):
        for a in _subtrees(i):
            for b in _subtrees(k - i):
                out.append(("C", a, b))
    return tuple(out)


def _slots(sub, depth, acc):
    tag = sub[0]
    if tag == "L":
        acc.append((depth, False))
    elif tag == "M":
        acc.append((depth, True))
        _slots(sub[1], depth + 2, acc)
    else:
        _slots(sub[1], depth + 1, acc)
        _slots(sub[2], depth + 1, acc)
    return acc


@dataclass(frozen=True)
class TreeShape:
    """A reduced tree without symbols; ``slots`` are in preorder."""

    kind: TreeKind
    left: tuple
    right: tuple

    @property
    def slots(self) -> tuple[tuple[int, bool], ...]:
        # T1 puts its 0-side subtree at "01" (depth 2)
        acc = _slots(self.left, 2 if self.kind is T1 else 1, [])
        return tuple(_slots(self.right, 1, acc))

    @property
    def n(self) -> int:
        return len(self.slots)

    def tree(self, assignment) -> CodeTree:
        """Fill slot ``i`` (preorder) with symbol ``assignment[i]``."""
        nodes = []
        it = iter(assignment)

        def emit(sub, parent, edge):
            me = len(nodes)
            tag = sub[0]
            if tag == "L":
                nodes.append(Node(parent, edge, LEAF, next(it)))
            elif tag == "M":
                nodes.append(Node(parent, edge, MASTER, next(it)))
                nodes.append(Node(me, 0, SLAVE, None))
                emit(sub[1], me + 1, 0)
            else:
                nodes.append(Node(parent, edge, COMPLETE, None))
                emit(sub[1], me, 0)
                emit(sub[2], me, 1)

        nodes.append(Node(None, None, COMPLETE, None))
        if self.kind is T1:
            nodes.append(Node(0, 0, SLAVE, None))
            emit(self.left, 1, 1)
        else:
            emit(self.left, 0, 0)
        emit(self.right, 0, 1)
        n = len(self.slots)
        return CodeTree(self.kind, n, tuple(nodes))


def _check_n(n: int, cap: int) -> None:
    if n < 2:
        raise CapacityError("need at least two symbols")
    if n > cap:
        raise CapacityError(f"n = {n} exceeds the enumeration cap {cap}")


def enumerate_shapes(n: int, kind: TreeKind, cap: int = N_MAX) -> Iterator[TreeShape]:
    """Every reduced shape with ``n`` slots, each exactly once."""
    _check_n(n, cap)
    kind = TreeKind(kind)
    for i in range(1, n):
        for a in _subtrees(i):
            for b in _subtrees(n - i):
                yield TreeShape(kind, a, b)


@lru_cache(maxsize=None)
def _groups(n: int, kind: TreeKind) -> tuple:
    """Shapes grouped by slot multiset: ``((depths, masters, shapes), ...)``."""
    by_sig: dict = {}
    for shape in enumerate_shapes(n, kind, cap=max(n, N_MAX)):
        sig = tuple(sorted(shape.slots))
        by_sig.setdefault(sig, []).append(shape)
    out = []
    for sig, shapes in sorted(by_sig.items()):
        depths = tuple(d for d, _ in sig)
        masters = tuple(m for _, m in sig)
        out.append((depths, masters, tuple(shapes)))
    return tuple(out)


def slot_cost(depth: int, is_master: bool, x: Fraction, kind: TreeKind) -> Fraction:
    """Per-unit-probability contribution of a slot to L + x*q1 (T0) or L - x*q0 (T1)."""
    if kind is T0:
        return depth + (x if is_master else 0)
    return depth - (0 if is_master else x)


def _assign(slots, x: Fraction, kind: TreeKind) -> list[int]:
    """Symbols for preorder slots: cheapest slot gets symbol 0 (largest p), leaves first on ties."""
    ranked = sorted(range(len(slots)), key=lambda i: (slot_cost(*slots[i], x, kind), slots[i][1], i))
    assignment = [0] * len(slots)
    for sym, i in enumerate(ranked):
        assignment[i] = sym
    return assignment


def _objective(tree_metrics: TreeMetrics, x: Fraction, kind: TreeKind) -> Fraction:
    if kind is T0:
        return tree_metrics.L + x * tree_metrics.q1
    return tree_metrics.L - x * tree_metrics.q0


def best_tree(x, dist, kind) -> tuple[CodeTree, Fraction]:
    """Minimize L + x*q1 over T0 trees, or L - x*q0 over T1 trees, exactly.

    Ties prefer smaller q1 (T0) or larger q0 (T1), then the lexicographically
    smallest serialization.
    """
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    _check_n(dist.n, N_MAX)
    return _best_tree(x, dist.counts, dist.b, TreeKind(kind))


@lru_cache(maxsize=8192)
def _best_tree(x: Fraction, counts: tuple, b: int, kind: TreeKind):
    n = len(counts)
    u, v = x.numerator, x.denominator
    t0 = kind is T0
    best_key = None
    tied = []
    for gi, (depths, masters, _) in enumerate(_groups(n, kind)):
        # integer slot costs scaled by v; leaves first among equal costs
        if t0:
            costs = sorted((d * v + u, True) if m else (d * v, False) for d, m in zip(depths, masters))
        else:
            costs = sorted((d * v, True) if m else (d * v - u, False) for d, m in zip(depths, masters))
        value = 0
        q = 0
        for c, (cost, m) in zip(counts, costs):
            value += c * cost
            if m == t0:
                q += c
        key = (value, q) if t0 else (value, -q)
        if best_key is None or key < best_key:
            best_key = key
            tied = [gi]
        elif key == best_key:
            tied.append(gi)
    tree = _resolve(n, kind, tuple(tied), x == 1)
    return tree, Fraction(best_key[0], v << b)


@lru_cache(maxsize=None)
def _resolve(n: int, kind: TreeKind, tied: tuple, at_one: bool) -> CodeTree:
    """Lexicographically smallest serialization among the tied groups.

    The slot ranking used by _assign is the same for every x in [0, 1)
    (masters sit strictly between leaves of adjacent depths), and changes
    only at x = 1, so one representative x per regime suffices.
    """
    x = Fraction(1) if at_one else Fraction(1, 2)
    groups = _groups(n, kind)
    best = None
    for gi in tied:
        for shape in groups[gi][2]:
            tree = shape.tree(_assign(shape.slots, x, kind))
            text = serialize(tree)
            if best is None or text < best[0]:
                best = (text, tree)
    return best[1]


# ---------------------------------------------------------------------------
# brute force


def tree_lines(dist, kind, cap: int = N_ORACLE) -> dict[tuple[Fraction, Fraction], tuple]:
    """All (L, q) pairs over every reduced shape and every assignment.

    ``q`` is q1 for T0 and q0 for T1.  Each pair maps to one witness
    ``(shape, assignment)``.  Does not use the sorted-assignment shortcut.
    """
    kind = TreeKind(kind)
    _check_n(dist.n, cap)
    counts = dist.counts
    scale = 1 << dist.b
    n = dist.n
    want_master = kind is T0
    found: dict = {}
    seen_sigs = set()
    for shape in enumerate_shapes(n, kind, cap=cap):
        slots = shape.slots
        sig = tuple(sorted(slots))
        if sig in seen_sigs:
            # another shape with the same slot multiset yields the same (L, q) set
            continue
        seen_sigs.add(sig)
        for perm in itertools.permutations(range(n)):
            L = q = 0
            for (d, m), sym in zip(slots, perm):
                c = counts[sym]
                L += c * d
                if m == want_master:
                    q += c
            key = (L, q)
            if key not in found:
                found[key] = (shape, perm)
    return {(Fraction(L, scale), Fraction(q, scale)): w for (L, q), w in found.items()}


def brute_best_value(x, dist, kind, cap: int = N_ORACLE) -> Fraction:
    """min over all (shape, assignment) of the parametric objective, without shortcuts."""
    x = Fraction(x)
    sign = 1 if TreeKind(kind) is T0 else -1
    return min(L + sign * x * q for L, q in tree_lines(dist, kind, cap))


def exhaustive_optimum(dist) -> tuple[CodePair, Fraction]:
    """Globally optimal code pair by enumerating both trees.

    For each switching mass q only the smallest L can matter, because the
    average length is non-decreasing in L(T0) and L(T1) at fixed q's.
    """
    _check_n(dist.n, N_ORACLE)
    fronts = []
    for kind in (T0, T1):
        front: dict = {}
        for (L, q), witness in tree_lines(dist, kind).items():
            if q not in front or L < front[q][0]:
                front[q] = (L, witness)
        fronts.append(front)
    best = None
    for q1, (L0, w0) in sorted(fronts[0].items()):
        for q0, (L1, w1) in sorted(fronts[1].items()):
            cost = average_length(TreeMetrics(L0, 1 - q1, q1), TreeMetrics(L1, q0, 1 - q0))
            if best is None or cost < best[0]:
                best = (cost, w0, w1)
    cost, (s0, a0), (s1, a1) = best
    pair = CodePair(s0.tree(a0), s1.tree(a1))
    return pair, cost
