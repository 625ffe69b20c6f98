"""Co-occurrence graph construction and adjacency queries."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geocross.errors import UnknownNodeError
from geocross.hetnet import (
    ClusteredRecord,
    HetGraph,
    Node,
    build_network,
    neighbors_of_type,
    parse_node,
    record_edges,
)


def cr(t, l, words) -> ClusteredRecord:
    return ClusteredRecord(t, l, tuple(words))


TWO_RECORDS = [cr(1, 1, ["a"]), cr(1, 2, ["a"])]


class TestRecordEdges:
    def test_two_keywords_six_edges(self):
        edges = record_edges(cr(0, 0, ["w1", "w2"]))
        assert len(edges) == 6
        assert set(edges) == {
            (Node("L", 0), Node("T", 0)),
            (Node("T", 0), Node("W", "w1")),
            (Node("T", 0), Node("W", "w2")),
            (Node("L", 0), Node("W", "w1")),
            (Node("L", 0), Node("W", "w2")),
            (Node("W", "w1"), Node("W", "w2")),
        }

    def test_empty_keywords_single_edge(self):
        assert record_edges(cr(3, 4, [])) == [(Node("L", 4), Node("T", 3))]

    def test_one_keyword_three_edges(self):
        assert len(record_edges(cr(0, 0, ["w1"]))) == 3

    def test_duplicates_collapse(self):
        assert len(record_edges(cr(0, 0, ["w1", "w1"]))) == 3


class TestBuildNetwork:
    def test_identical_records_accumulate(self):
        g = build_network([cr(0, 0, ["w1"]), cr(0, 0, ["w1"])])
        assert g.num_edges == 3
        assert all(w == 2 for _, _, w in g.edges())

    def test_two_record_hand_enumeration(self):
        g = build_network(TWO_RECORDS)
        assert g.weight(Node("T", 1), Node("W", "a")) == 2
        assert g.weight(Node("L", 1), Node("W", "a")) == 1
        assert g.weight(Node("L", 2), Node("W", "a")) == 1
        assert g.weight(Node("T", 1), Node("L", 1)) == 1
        assert g.weight(Node("T", 1), Node("L", 2)) == 1
        assert g.num_edges == 5

    def test_empty_stream(self):
        g = build_network([])
        assert len(g) == 0 and g.num_edges == 0

    def test_symmetric_weights(self):
        g = build_network(TWO_RECORDS)
        for u, v, w in g.edges():
            assert g.weight(u, v) == g.weight(v, u) == w


class TestNeighborsOfType:
    def test_word_to_time(self):
        g = build_network(TWO_RECORDS)
        assert g.neighbors_of_type(Node("W", "a"), "T") == [(Node("T", 1), 2)]
        assert neighbors_of_type(g, Node("W", "a"), "T") == [(Node("T", 1), 2)]

    def test_no_neighbors_of_type(self):
        g = build_network([cr(0, 0, [])])
        assert g.neighbors_of_type(Node("T", 0), "W") == []

    def test_unknown_node(self):
        g = build_network(TWO_RECORDS)
        with pytest.raises(UnknownNodeError):
            g.neighbors_of_type(Node("W", "zz"), "T")

    def test_sorted_by_key(self):
        g = build_network([cr(0, 0, ["b", "a", "c"])])
        nbrs = g.neighbors_of_type(Node("T", 0), "W")
        assert [n.key for n, _ in nbrs] == ["a", "b", "c"]


words_strategy = st.lists(
    st.text(alphabet="abcdefgh", min_size=1, max_size=3), min_size=0, max_size=10
)


class TestCombinatorialProperties:
    @given(
        st.lists(
            st.tuples(
                st.integers(0, 3), st.integers(0, 3), words_strategy
            ),
            min_size=0,
            max_size=12,
        )
    )
    @settings(max_examples=80)
    def test_pair_count_symmetry_conservation(self, raw):
        records = [cr(t, l, ws) for t, l, ws in raw]
        expected_total = 0
        for r in records:
            m = len(set(r.keywords))
            pairs = record_edges(r)
            assert len(pairs) == (m + 2) * (m + 1) // 2
            expected_total += len(pairs)
        g = build_network(records)
        assert g.total_weight == expected_total
        for u, v, w in g.edges():
            assert g.weight(v, u) == w

    @given(
        st.lists(
            st.tuples(st.integers(0, 2), st.integers(0, 2), words_strategy),
            min_size=1,
            max_size=10,
        ),
        st.randoms(use_true_random=False),
    )
    @settings(max_examples=40)
    def test_order_independence(self, raw, rnd):
        records = [cr(t, l, ws) for t, l, ws in raw]
        shuffled = list(records)
        rnd.shuffle(shuffled)
        g1 = build_network(records)
        g2 = build_network(shuffled)
        assert list(g1.edges()) == list(g2.edges())


class TestGraphValidation:
    def test_no_self_loops(self):
        with pytest.raises(ValueError):
            HetGraph.from_edges([(Node("W", "a"), Node("W", "a"), 1)])

    def test_positive_integer_weights(self):
        with pytest.raises(ValueError):
            HetGraph.from_edges([(Node("W", "a"), Node("W", "b"), 0)])

    def test_duplicate_edges_rejected(self):
        with pytest.raises(ValueError):
            HetGraph.from_edges(
                [
                    (Node("W", "a"), Node("W", "b"), 1),
                    (Node("W", "b"), Node("W", "a"), 2),
                ]
            )


class TestNodeParsing:
    def test_roundtrip(self):
        for node in (Node("W", "beach"), Node("T", 3), Node("L", 17)):
            assert parse_node(node.render()) == node

    def test_word_keys_keep_colons_right_of_type(self):
        assert parse_node("W:a") == Node("W", "a")

    def test_bad_inputs(self):
        for text in ("X:1", "T:x", "W:", "beach", ""):
            with pytest.raises(ValueError):
                parse_node(text)
