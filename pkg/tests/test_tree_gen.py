"""Growing preferential-attachment trees: structure, measures, enumeration."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcpfluid.tree_gen import (
    GrowingTree,
    TreeParams,
    enumerate_exact,
    grow,
    measure,
    subtree_sizes,
)


def _path_tree(tau: int, alpha_t: float = 0.5) -> GrowingTree:
    parent = np.concatenate([[-1], np.arange(tau)]).astype(np.int64)
    return GrowingTree(
        alpha_t=alpha_t,
        tau=tau,
        parent=parent,
        in_degree=np.bincount(parent[1:], minlength=tau + 1),
    )


def test_grow_structure_is_valid():
    tree = grow(TreeParams(alpha_t=0.5, tau=200, seed=3))
    assert tree.parent[0] == -1
    # vertex t can only attach to an earlier vertex
    assert np.all(tree.parent[1:] < np.arange(1, 201))
    assert np.all(tree.parent[1:] >= 0)
    assert tree.in_degree.sum() == tree.tau
    want = np.bincount(tree.parent[1:], minlength=tree.tau + 1)
    assert np.array_equal(tree.in_degree, want)


def test_grow_seed_determinism():
    a = grow(TreeParams(alpha_t=0.5, tau=100, seed=8))
    b = grow(TreeParams(alpha_t=0.5, tau=100, seed=8))
    c = grow(TreeParams(alpha_t=0.5, tau=100, seed=9))
    assert np.array_equal(a.parent, b.parent)
    assert not np.array_equal(a.parent, c.parent)


def test_alpha_one_gives_star():
    tree = grow(TreeParams(alpha_t=1.0, tau=50, seed=0))
    assert np.all(tree.parent[1:] == 0)
    assert tree.in_degree[0] == 50


def test_alpha_zero_is_uniform_attachment():
    # root in-degree under uniform attachment: E = H_tau ~ ln(tau)
    taus = 2000
    reps = 60
    got = np.mean(
        [grow(TreeParams(alpha_t=0.0, tau=taus, seed=s)).in_degree[0] for s in range(reps)]
    )
    want = np.sum(1.0 / np.arange(1, taus + 1))
    assert got == pytest.approx(want, rel=0.25)


def test_subtree_sizes_on_path():
    tree = _path_tree(4)
    # chain 0-1-2-3-4: subtree below vertex v has 5-v vertices
    assert list(subtree_sizes(tree)) == [5, 4, 3, 2, 1]


def test_subtree_sizes_sum_identity():
    tree = grow(TreeParams(alpha_t=0.5, tau=300, seed=5))
    sizes = subtree_sizes(tree)
    # every vertex is counted once per ancestor chain: sum = total path length
    depth = np.zeros(tree.tau + 1, dtype=np.int64)
    for v in range(1, tree.tau + 1):
        depth[v] = depth[tree.parent[v]] + 1
    assert sizes.sum() == (depth + 1).sum()
    assert sizes[0] == tree.tau + 1


def test_measure_on_path():
    tau = 6
    tree = _path_tree(tau)
    mm = measure(tree)
    assert mm.tau == tau
    # edge (v, v-1): younger endpoint v has tau - v descendants
    assert np.array_equal(np.sort(mm.n), np.arange(tau))
    for child, n in zip(mm.child, mm.n):
        assert n == tau - child
    # each internal younger endpoint feeds one edge
    assert np.all(mm.q_younger == np.where(mm.child == tau, 0, 1))
    # chain betweenness is (n+1)(tau-n)
    assert np.array_equal(mm.betweenness, (mm.n + 1) * (tau - mm.n))


def test_measure_betweenness_identity_random_tree():
    tree = grow(TreeParams(alpha_t=0.5, tau=400, seed=12))
    mm = measure(tree)
    assert np.array_equal(mm.betweenness, (mm.n + 1) * (tree.tau - mm.n))
    # descendant counts: leaf edges have n = 0
    leaves = mm.q_younger == 0
    assert np.all(mm.n[leaves] == 0)
    assert mm.n.max() <= tree.tau - 1


def test_measure_degree_bookkeeping():
    tree = grow(TreeParams(alpha_t=0.5, tau=400, seed=13))
    mm = measure(tree)
    assert np.array_equal(mm.q_younger, tree.in_degree[mm.child])
    assert np.array_equal(mm.q_older, tree.in_degree[mm.parent])
    assert np.all(mm.q_older >= 1)


def test_path_edges_endpoints():
    tree = grow(TreeParams(alpha_t=0.5, tau=60, seed=2))
    child, parent = tree.edge_endpoints()
    assert child.shape == (60,)
    assert np.array_equal(parent, tree.parent[child])
    # the path between an edge's endpoints is that edge alone
    e = tree.path_edges(int(child[17]), int(parent[17]))
    assert list(e) == [17]


def test_path_edges_through_root():
    tree = _path_tree(5)
    # path from 5 to 0 walks every edge
    assert sorted(tree.path_edges(5, 0)) == [0, 1, 2, 3, 4]
    assert tree.path_edges(3, 3).size == 0


@given(st.integers(2, 40), st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_arrival_order_gives_acyclic_parents(tau, seed):
    tree = grow(TreeParams(alpha_t=0.5, tau=tau, seed=seed))
    assert np.all(tree.parent[1:] < np.arange(1, tau + 1))


def test_enumerate_exact_normalizes():
    for alpha in (1 / 3, 0.5, 2 / 3):
        table = enumerate_exact(TreeParams(alpha_t=alpha, tau=5, seed=0))
        assert table.total() == pytest.approx(1.0, abs=1e-14)


def test_enumerate_exact_tiny_case_by_hand():
    # tau=2, alpha=1/2 (a=1).  Vertex 2 picks the root with weight a+q_0=2
    # against a+q_1=1, so star 2/3, chain 1/3.  Star edges are both leaves;
    # the chain adds one edge with a single descendant and in-degree 1.
    table = enumerate_exact(TreeParams(alpha_t=0.5, tau=2, seed=0))
    assert table.prob(1, 1) == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert table.prob(0, 0) == pytest.approx(5.0 / 6.0, abs=1e-15)


def test_validation():
    with pytest.raises(ValueError):
        grow(TreeParams(alpha_t=-0.1, tau=5, seed=0))
    with pytest.raises(ValueError):
        grow(TreeParams(alpha_t=0.5, tau=0, seed=0))
