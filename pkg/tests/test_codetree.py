import random
import warnings
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from aifv2 import codetree as ct
from aifv2.codetree import (
    COMPLETE, LEAF, MASTER, SLAVE, T0, T1, CodeTree, Node, ReducedTreeWarning, TreeError,
    check, deserialize, is_reduced, is_valid, metrics, serialize, validate,
)
from aifv2.numeric import make_dist
from treegen import random_tree


def codes(tree):
    return {v.code for v in validate(tree)}


def two_leaf():
    return CodeTree.from_codewords(T0, 2, {0: "0", 1: "1"})


def test_two_leaf_t0_is_valid():
    t = two_leaf()
    assert validate(t) == []
    assert [nd.kind for nd in t.nodes] == [COMPLETE, LEAF, LEAF]


def test_t1_root_zero_child_must_be_slave():
    t = CodeTree(T1, 2, (Node(None, None, COMPLETE), Node(0, 0, LEAF, 1), Node(0, 1, LEAF, 0)))
    v = [x for x in validate(t) if x.code == ct.T1_ROOT_0CHILD]
    assert v and v[0].node == 1 and "T1 root 0-child must be slave" in str(v[0])


def test_symbol_on_slave():
    t = CodeTree(T0, 3, (
        Node(None, None, COMPLETE), Node(0, 0, LEAF, 0), Node(0, 1, MASTER, 1),
        Node(2, 0, SLAVE, 2), Node(3, 0, LEAF, None),
    ))
    v = [x for x in validate(t) if x.code == ct.SYMBOL_ON_INTERNAL]
    assert v and v[0].node == 3 and "symbols only on leaves/masters" in str(v[0])
    with pytest.raises(TreeError):
        check(t)


def test_t1_rules():
    # "00" grandchild under the T1 root
    t = CodeTree.from_node_map(T1, 2, {
        "": (COMPLETE, None), "0": (SLAVE, None), "00": (LEAF, 1), "1": (LEAF, 0)})
    assert ct.T1_ROOT_00 in codes(t)
    t = CodeTree.from_node_map(T1, 2, {
        "": (COMPLETE, None), "0": (SLAVE, None), "01": (LEAF, 1), "1": (LEAF, 0)})
    assert validate(t) == []


def test_graph_errors():
    t = CodeTree(T0, 2, (Node(None, None, COMPLETE), Node(None, None, LEAF, 0)))
    assert codes(t) == {ct.MALFORMED}
    t = CodeTree(T0, 2, (Node(None, None, COMPLETE), Node(2, 0, LEAF, 0), Node(1, 1, LEAF, 1)))
    assert ct.MALFORMED in codes(t)
    t = CodeTree(T0, 2, (Node(None, None, COMPLETE), Node(0, 0, LEAF, 0), Node(0, 0, LEAF, 1)))
    assert ct.MALFORMED in codes(t)


def test_symbol_bookkeeping():
    t = CodeTree(T0, 2, (Node(None, None, COMPLETE), Node(0, 0, LEAF, 0), Node(0, 1, LEAF, 0)))
    assert {ct.SYMBOL_DUPLICATE, ct.SYMBOL_MISSING} <= codes(t)
    t = CodeTree(T0, 2, (Node(None, None, COMPLETE), Node(0, 0, LEAF, 0), Node(0, 1, LEAF, 5)))
    assert ct.SYMBOL_RANGE in codes(t)


def test_reduced_rules_only_warn():
    # master whose grandchild subtree is empty of symbols: valid, not reduced
    t = CodeTree.from_node_map(T0, 2, {
        "": (COMPLETE, None), "0": (LEAF, 0), "1": (MASTER, 1), "10": (SLAVE, None), "100": (LEAF, None)})
    assert is_valid(t) and not is_reduced(t)
    assert {ct.UNASSIGNED, ct.EMPTY_MASTER} <= codes(t)
    with pytest.warns(ReducedTreeWarning):
        check(t)
    with pytest.raises(TreeError):
        check(t, reduced=True)


def test_metrics_examples():
    d = make_dist([F(1, 2), F(1, 2)])
    m = metrics(two_leaf(), d)
    assert (m.L, m.q0, m.q1) == (1, 1, 0)
    d = make_dist([F(1, 2), F(1, 4), F(1, 4)])
    t = CodeTree.from_codewords(T0, 3, {0: "0", 1: "1", 2: "100"})
    assert t.nodes[t.symbol_nodes[1]].kind is MASTER
    m = metrics(t, d)
    assert m.L == F(3, 2) and m.q1 == F(1, 4) and m.q0 + m.q1 == 1
    d = make_dist([F(3, 4), F(1, 4)])
    t = CodeTree.from_codewords(T1, 2, {0: "1", 1: "01"})
    m = metrics(t, d)
    assert m.L == F(5, 4) and m.q0 == 1


def test_serialize_examples():
    t = two_leaf()
    text = serialize(t)
    assert text.splitlines()[0] == "tree T0 n=2"
    assert len(text.splitlines()) == 4
    assert deserialize(text) == t
    # T1 with master "11", slave "110", leaf "1100"
    t = CodeTree.from_codewords(T1, 4, {0: "01", 1: "10", 2: "11", 3: "1100"})
    assert t.nodes[t.symbol_nodes[2]].kind is MASTER
    assert deserialize(serialize(t)) == t


def test_deserialize_errors():
    good = serialize(two_leaf())
    lines = good.splitlines()
    with pytest.raises(TreeError, match="line 3"):
        deserialize("\n".join(lines[:2] + [lines[2] + " parent=0"] + lines[3:]))
    with pytest.raises(TreeError, match="line 1"):
        deserialize("tree T2 n=2\n" + "\n".join(lines[1:]))
    with pytest.raises(TreeError, match="line 4"):
        deserialize("\n".join(lines[:3] + [lines[2]]))
    with pytest.raises(TreeError):
        deserialize(good.replace("kind=leaf symbol=1", "kind=slave symbol=1"))


def test_deserialize_renumbers_to_preorder():
    text = "\n".join([
        "tree T0 n=2",
        "node 7 parent=- edge=- kind=complete symbol=-",
        "node 3 parent=7 edge=1 kind=leaf symbol=1",
        "node 5 parent=7 edge=0 kind=leaf symbol=0",
    ])
    assert deserialize(text) == two_leaf()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 7), st.sampled_from([T0, T1]))
def test_generated_trees_roundtrip_and_respect_bounds(seed, n, kind):
    t = random_tree(random.Random(seed), n, kind)
    assert validate(t) == []
    assert deserialize(serialize(t), reduced=True) == t
    assert len(t.nodes) <= 3 * n and t.height <= 3 * n
    counts = [1] * n
    counts[0] += (1 << n.bit_length()) - n
    d = make_dist([F(c, 1 << n.bit_length()) for c in counts])
    m = metrics(t, d)
    assert m.q0 + m.q1 == 1 and m.L >= 1
    words = t.codewords
    symbols = [words[t.symbol_nodes[s]] for s in range(n)]
    # no codeword of one symbol is a prefix of another unless through a master's "00"
    for i, a in enumerate(symbols):
        for j, c in enumerate(symbols):
            if i != j and c.startswith(a):
                assert t.is_master_symbol(i) and c[len(a):len(a) + 2] == "00"
