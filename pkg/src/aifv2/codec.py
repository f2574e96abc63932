"""Encoding and decoding with a pair of AIFV-2 code trees, plus baselines."""
from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .codetree import (
    COMPLETE, LEAF, MASTER, T0, T1,
    CodeTree, Node, TreeError, TreeMetrics, check, metrics,
)


class CodecError(ValueError):
    """Raised for messages or streams that do not match the code."""


@dataclass(frozen=True)
class CodePair:
    t0: CodeTree
    t1: CodeTree

    def __post_init__(self):
        if self.t0.kind is not T0 or self.t1.kind is not T1:
            raise TreeError("a code pair needs a T0 tree and a T1 tree")
        if self.t0.n != self.t1.n:
            raise TreeError(f"trees disagree on n: {self.t0.n} vs {self.t1.n}")
        check(self.t0)
        check(self.t1)

    @property
    def n(self) -> int:
        return self.t0.n


@dataclass(frozen=True)
class BitStream:
    """A bit sequence held as a string of ``'0'``/``'1'`` characters."""

    bits: str = ""

    def __post_init__(self):
        if self.bits.strip("01"):
            raise CodecError("bit streams may only contain 0 and 1")

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return self.bits

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitStream":
        return cls("".join("1" if b else "0" for b in bits))

    def to_bytes(self) -> bytes:
        """MSB-first packing, final byte zero-padded."""
        if not self.bits:
            return b""
        pad = -len(self.bits) % 8
        padded = self.bits + "0" * pad
        return int(padded, 2).to_bytes(len(padded) // 8, "big")

    @classmethod
    def from_bytes(cls, data: bytes, nbits: int) -> "BitStream":
        if nbits > 8 * len(data) or nbits <= 8 * len(data) - 8 and data:
            raise CodecError(f"{len(data)} bytes cannot hold exactly {nbits} bits")
        if not data:
            if nbits:
                raise CodecError("empty payload but nonzero bit length")
            return cls("")
        bits = format(int.from_bytes(data, "big"), f"0{8 * len(data)}b")
        if bits[nbits:].strip("0"):
            raise CodecError("nonzero padding bits")
        return cls(bits[:nbits])


def _table(tree: CodeTree) -> list[tuple[str, bool]]:
    table = [None] * tree.n
    words = tree.codewords
    for v, node in enumerate(tree.nodes):
        if node.symbol is not None:
            table[node.symbol] = (words[v], node.kind is MASTER)
    return table


def encode(message: Sequence[int], code: CodePair) -> BitStream:
    """Start in T0; after a leaf codeword use T0 next, after a master use T1."""
    tables = (_table(code.t0), _table(code.t1))
    n = code.n
    state = 0
    out = []
    for pos, sym in enumerate(message):
        if not 0 <= sym < n:
            raise CodecError(f"symbol {sym} at position {pos} is outside 0..{n - 1}")
        word, master = tables[state][sym]
        out.append(word)
        state = 1 if master else 0
    return BitStream("".join(out))


def decode(stream: BitStream, count: int, code: CodePair) -> list[int]:
    """Inverse of :func:`encode` for a message of ``count`` symbols.

    At a master node the decoder peeks two bits: ``00`` continues through
    the slave to the grandchild; anything else (including end of stream)
    ends the codeword, since T1 codewords never begin with ``00``.
    """
    bits = stream.bits if isinstance(stream, BitStream) else str(stream)
    trees = (code.t0, code.t1)
    kids = (code.t0.children, code.t1.children)
    out = []
    pos = 0
    state = 0
    nbits = len(bits)
    while len(out) < count:
        tree, ch = trees[state], kids[state]
        v = 0
        start = pos
        while True:
            node = tree.nodes[v]
            if node.kind is LEAF:
                if node.symbol is None:
                    raise CodecError(f"codeword starting at bit {start} reaches an unassigned leaf")
                out.append(node.symbol)
                state = 0
                break
            if node.kind is MASTER and node.symbol is not None and bits[pos:pos + 2] != "00":
                out.append(node.symbol)
                state = 1
                break
            if pos >= nbits:
                raise CodecError(f"stream exhausted after {len(out)} of {count} symbols")
            child = ch[v][bits[pos] == "1"]
            if child is None:
                raise CodecError(f"bit {pos} leads outside the {tree.kind.value} tree")
            pos += 1
            v = child
    if pos != nbits:
        raise CodecError(f"{nbits - pos} trailing bits after {count} symbols")
    return out


# ---------------------------------------------------------------------------
# container

_CONTAINER_RE = re.compile(rb"^aifv2 n=(\d+) count=(\d+) bits=(\d+)\n")


def pack(stream: BitStream, n: int, count: int) -> bytes:
    header = f"aifv2 n={n} count={count} bits={len(stream)}\n".encode("ascii")
    return header + stream.to_bytes()


def unpack(data: bytes) -> tuple[BitStream, int, int]:
    """Return ``(stream, n, count)`` from a container."""
    m = _CONTAINER_RE.match(data)
    if not m:
        raise CodecError("not an aifv2 container")
    n, count, nbits = (int(g) for g in m.groups())
    return BitStream.from_bytes(data[m.end():], nbits), n, count


# ---------------------------------------------------------------------------
# costs


def stationary(m0: TreeMetrics, m1: TreeMetrics) -> tuple[Fraction, Fraction]:
    """Long-run fraction of symbols coded with T0 and with T1."""
    out0, out1 = m0.q1, m1.q0  # T0 -> T1 and T1 -> T0 switching mass
    if out0 == 0:
        return Fraction(1), Fraction(0)
    total = out0 + out1
    return out1 / total, out0 / total


def average_length(m0: TreeMetrics, m1: TreeMetrics) -> Fraction:
    p0, p1 = stationary(m0, m1)
    return p0 * m0.L + p1 * m1.L


def aifv_cost(code: CodePair, dist) -> Fraction:
    """Asymptotic bits per symbol of the code under ``dist``."""
    return average_length(metrics(code.t0, dist), metrics(code.t1, dist))


def entropy(dist) -> float:
    """Shannon entropy in bits (floating point, for reports only)."""
    return math.fsum(-float(p) * math.log2(float(p)) for p in dist.probs)


def entropy_sign(dist, c) -> int:
    """sign(H(dist) - c), decided exactly.

    With p_i = c_i / 2^b and c = u / w >= 0, H <= c is equivalent to
    2^(b w 2^b) <= 2^(u 2^b) * prod c_i^(c_i w), an integer comparison.
    That is only affordable for modest w; otherwise a 4096-bit evaluation
    decides, and a difference below its resolution raises ValueError.
    """
    c = Fraction(c)
    if c < 0:
        return 1
    gap = entropy(dist) - float(c)
    if abs(gap) > 1e-9:
        return 1 if gap > 0 else -1
    u, w = c.numerator, c.denominator
    b = dist.b
    if (w << b) * (b + max(u, 1)) <= 1 << 24:
        lhs = 1 << (b * w << b)
        rhs = 1 << (u << b)
        for ci in dist.counts:
            rhs *= ci ** (ci * w)
        return (lhs > rhs) - (lhs < rhs)
    ctx = mpmath.MPContext()
    ctx.prec = 4096
    h = ctx.fsum(-ctx.mpf(p.numerator) / p.denominator * ctx.log(ctx.mpf(p.numerator) / p.denominator, 2)
                 for p in dist.probs)
    diff = h - ctx.mpf(u) / w
    if abs(diff) < ctx.mpf(2) ** -4000:
        raise ValueError(f"cannot separate H from {c} at 4096 bits")
    return 1 if diff > 0 else -1


def huffman(dist) -> tuple[CodeTree, Fraction]:
    """Optimal single-tree prefix code as an all-leaf T0 tree.

    Ties are broken by the smallest symbol index in each subtree; the first
    node popped becomes the 0-child.
    """
    heap = [(p, i, ("leaf", i)) for i, p in enumerate(dist.probs)]
    heapq.heapify(heap)
    while len(heap) > 1:
        pa, ka, a = heapq.heappop(heap)
        pb, kb, b = heapq.heappop(heap)
        heapq.heappush(heap, (pa + pb, min(ka, kb), ("node", a, b)))
    root = heap[0][2]

    nodes = []

    def emit(item, parent, edge):
        me = len(nodes)
        if item[0] == "leaf":
            nodes.append(Node(parent, edge, LEAF, item[1]))
            return
        nodes.append(Node(parent, edge, COMPLETE, None))
        emit(item[1], me, 0)
        emit(item[2], me, 1)

    emit(root, None, None)
    tree = CodeTree(T0, dist.n, tuple(nodes))
    return tree, metrics(tree, dist).L
