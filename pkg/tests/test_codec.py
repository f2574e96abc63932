import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from aifv2.codec import (
    BitStream, CodecError, CodePair, aifv_cost, decode, encode, entropy, entropy_sign, huffman, pack,
    stationary, unpack, average_length,
)
from aifv2.codetree import COMPLETE, LEAF, T0, T1, ReducedTreeWarning, CodeTree, TreeMetrics, metrics, validate
from aifv2.numeric import make_dist
from treegen import random_instance, random_pair

A, B, C, D = range(4)


def worked_code():
    t0 = CodeTree.from_codewords(T0, 4, {A: "0", B: "10", C: "1000", D: "11"})
    t1 = CodeTree.from_codewords(T1, 4, {A: "01", B: "10", C: "11", D: "1100"})
    return CodePair(t0, t1)


def test_worked_codewords():
    code = worked_code()
    assert code.t0.is_master_symbol(B) and code.t1.is_master_symbol(C)
    assert not code.t1.is_master_symbol(D)


def test_worked_encode_decode():
    code = worked_code()
    msg = [B, D, B, C, A, A]
    bits = encode(msg, code).bits
    assert bits == "10" + "1100" + "10" + "11" + "01" + "0"
    assert decode(BitStream(bits), 6, code) == msg
    # the first five symbols alone give the 12-bit string
    assert encode(msg[:5], code).bits == "101100101101"
    assert decode(BitStream("101100101101"), 5, code) == msg[:5]


def test_empty_and_degenerate():
    code = worked_code()
    assert encode([], code).bits == ""
    assert decode(BitStream(""), 0, code) == []
    t0 = CodeTree.from_codewords(T0, 2, {0: "0", 1: "1"})
    t1 = CodeTree.from_codewords(T1, 2, {0: "1", 1: "01"})
    code = CodePair(t0, t1)
    assert encode([0, 1, 0], code).bits == "010"
    assert decode(BitStream("010"), 3, code) == [0, 1, 0]


def test_decode_errors():
    code = worked_code()
    with pytest.raises(CodecError, match="exhausted"):
        decode(BitStream("10"), 2, code)
    with pytest.raises(CodecError, match="trailing"):
        decode(BitStream("000"), 2, code)
    with pytest.raises(CodecError):
        encode([4], code)
    assert decode(BitStream("1000"), 1, code) == [C]
    # a valid but non-reduced T0 with an unassigned leaf at "11"
    t0 = CodeTree.from_node_map(T0, 2, {
        "": (COMPLETE, None), "0": (LEAF, 0), "1": (COMPLETE, None), "10": (LEAF, 1), "11": (LEAF, None)})
    t1 = CodeTree.from_codewords(T1, 2, {0: "1", 1: "01"})
    with pytest.warns(ReducedTreeWarning):
        loose = CodePair(t0, t1)
    assert decode(BitStream("010"), 2, loose) == [0, 1]
    with pytest.raises(CodecError, match="unassigned leaf"):
        decode(BitStream("11"), 1, loose)


def test_bitstream_bytes():
    s = BitStream("101100101101")
    data = s.to_bytes()
    assert data == bytes([0b10110010, 0b11010000])
    assert BitStream.from_bytes(data, 12) == s
    with pytest.raises(CodecError):
        BitStream.from_bytes(data, 20)
    with pytest.raises(CodecError):
        BitStream.from_bytes(bytes([0b10110010, 0b11010001]), 12)
    with pytest.raises(CodecError):
        BitStream("012")


def test_container():
    s = BitStream("1011001011010")
    blob = pack(s, 4, 6)
    assert blob.startswith(b"aifv2 n=4 count=6 bits=13\n")
    assert unpack(blob) == (s, 4, 6)
    with pytest.raises(CodecError):
        unpack(b"garbage")


def test_cost_examples():
    m0 = TreeMetrics(F(3, 2), F(3, 4), F(1, 4))
    m1 = TreeMetrics(F(2), F(1, 2), F(1, 2))
    assert stationary(m0, m1) == (F(2, 3), F(1, 3))
    assert average_length(m0, m1) == F(5, 3)
    d = make_dist([F(1, 2), F(1, 4), F(1, 4)])
    t0, cost = huffman(d)
    t1 = CodeTree.from_codewords(T1, 3, {0: "1", 1: "010", 2: "011"})
    assert aifv_cost(CodePair(t0, t1), d) == metrics(t0, d).L == cost


def test_huffman_examples():
    assert huffman(make_dist([F(1, 2), F(1, 4), F(1, 4)]))[1] == F(3, 2)
    assert huffman(make_dist([F(3, 4), F(1, 4)]))[1] == 1
    tree, cost = huffman(make_dist([F(1, 2), F(3, 8), F(1, 8)]))
    assert cost == F(3, 2)
    assert all(nd.kind is not LEAF or nd.symbol is not None for nd in tree.nodes)
    assert validate(tree) == []


def _brute_huffman(probs):
    """Minimal sum p_i * depth_i over depth vectors satisfying Kraft equality."""
    n = len(probs)
    best = None
    for depths in itertools.product(range(1, n), repeat=n):
        if sum(F(1, 2 ** k) for k in depths) == 1:
            v = sum(p * k for p, k in zip(probs, depths))
            best = v if best is None else min(best, v)
    return best


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_huffman_is_optimal(seed):
    d = random_instance(random.Random(seed), max_n=5)
    assert huffman(d)[1] == _brute_huffman(d.probs)


def test_entropy_examples():
    assert entropy(make_dist([F(1, 2), F(1, 2)])) == 1.0
    assert entropy(make_dist([F(1, 2), F(1, 4), F(1, 4)])) == 1.5
    assert entropy(make_dist([F(3, 4), F(1, 4)])) == pytest.approx(0.8113, abs=1e-4)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 7), st.integers(0, 40))
def test_roundtrip_random_codes(seed, n, length):
    rng = random.Random(seed)
    code = random_pair(rng, n)
    msg = [rng.randrange(n) for _ in range(length)]
    s = encode(msg, code)
    assert decode(s, len(msg), code) == msg
    back, n2, count = unpack(pack(s, n, len(msg)))
    assert decode(back, count, code) == msg and n2 == n


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_stationary_normalizes(seed):
    rng = random.Random(seed)
    d = random_instance(rng)
    code = random_pair(rng, d.n)
    m0, m1 = metrics(code.t0, d), metrics(code.t1, d)
    if m0.q1 + m1.q0:
        p0, p1 = stationary(m0, m1)
        assert p0 + p1 == 1 and p0 >= 0 and p1 >= 0
    cost = aifv_cost(code, d)
    assert min(m0.L, m1.L) <= cost <= max(m0.L, m1.L)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 9), st.fractions(0, 4, max_denominator=1000))
def test_entropy_sign_matches_float(seed, c):
    d = random_instance(random.Random(seed))
    h = entropy(d)
    if abs(h - float(c)) > 1e-9:
        assert entropy_sign(d, c) == (1 if h > c else -1)


def test_entropy_sign_dyadic_equality():
    d = make_dist([F(1, 2), F(1, 4), F(1, 4)])
    assert entropy_sign(d, F(3, 2)) == 0
    assert entropy_sign(d, F(3, 2) + F(1, 1 << 40)) == -1
    assert entropy_sign(d, F(3, 2) - F(1, 1 << 40)) == 1
    # irrational entropy very close to a rational: decided by the integer comparison
    d = make_dist([F(3, 4), F(1, 4)])
    c = F(round(entropy(d) * (1 << 36)), 1 << 36)
    assert entropy_sign(d, c) == (1 if entropy(d) > c else -1)
