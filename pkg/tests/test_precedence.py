import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factories import random_dag
from mmwalbp.errors import CyclicPrecedence, InvalidInstance
from mmwalbp.precedence import build_complete_matrix, correct_sequence, is_topological
from oracles import dfs_closure, respects, squaring_closure


def test_worked_example_matrix():
    # 1 -> 2 -> 4, 1 -> 3, 3 -> 4
    m = build_complete_matrix([(1, 2), (2, 4), (1, 3), (3, 4)], 4)
    expected = np.array(
        [
            [0, 1, 1, 1],
            [0, 0, 0, 1],
            [0, 0, 0, 1],
            [0, 0, 0, 0],
            [0, 1, 1, 3],
        ]
    )
    assert (m.matrix == expected).all()
    assert m.precedes(1, 4) and not m.precedes(4, 1)


def test_cycles_rejected():
    with pytest.raises(CyclicPrecedence):
        build_complete_matrix([(1, 2), (2, 3), (3, 1)], 3)
    with pytest.raises(CyclicPrecedence):
        build_complete_matrix([(2, 2)], 3)
    assert issubclass(CyclicPrecedence, InvalidInstance)


def test_closure_matches_oracles(rng):
    for _ in range(100):
        n = int(rng.integers(1, 13))
        perm = rng.permutation(n) + 1
        edges = [(int(perm[a - 1]), int(perm[b - 1])) for a, b in random_dag(rng, n, rng.uniform(0.05, 0.6))]
        m = build_complete_matrix(edges, n)
        assert (m.closure == dfs_closure(n, edges)).all()
        assert (m.closure == squaring_closure(n, edges)).all()
        assert (m.counts == m.closure.sum(axis=0)).all()


def test_correct_sequence_keeps_valid_orders():
    m = build_complete_matrix([(1, 2), (2, 3)], 4)
    assert correct_sequence([1, 4, 2, 3], m) == [1, 4, 2, 3]
    assert correct_sequence([4, 3, 2, 1], m) == [4, 1, 2, 3]


def test_correct_sequence_cyclic_scan_order():
    m = build_complete_matrix([(1, 2), (2, 3)], 4)
    # pass 1 emits 1 and 4; pass 2 skips 3, emits 2, then wraps around to emit 3
    assert correct_sequence([3, 2, 1, 4], m) == [1, 4, 2, 3]
    assert correct_sequence([2, 3, 4, 1], m) == [4, 1, 2, 3]


def test_counts_row_not_mutated():
    m = build_complete_matrix([(1, 2), (1, 3)], 3)
    before = m.counts.copy()
    correct_sequence([3, 2, 1], m)
    assert (m.counts == before).all()


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_repair_is_topological_and_idempotent(data):
    n = data.draw(st.integers(1, 12))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    perm = data.draw(st.permutations(range(1, n + 1)))
    m = build_complete_matrix(edges, n)
    out = correct_sequence(list(perm), m)
    assert respects(out, n, edges)
    assert is_topological(out, m)
    assert correct_sequence(out, m) == out
