import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urysohn.errors import CentreDegreeMismatch, DegenerateSpider, HeftTooSmall, NotMetrizable
from urysohn.gadgets import (
    CrabNest,
    build_crab,
    build_crab_nest,
    build_rigid_tree,
    build_spider,
    gadget_metric,
    heft_schedule,
    tree_canonical_form,
    tree_endpoint,
    verify_crab,
    verify_crab_nest,
)
from urysohn.graph import SimpleGraph
from urysohn.metric import s_distance_graph, validate
from urysohn.symmetry import automorphism_group, is_rigid


def crab_size(n):
    # centre clique n+1, plus legs 1..n+1 of n-cliques
    return (n + 1) + n * (n + 1) * (n + 2) // 2


# --- trees ---


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 12))
def test_canonical_form_decides_isomorphism(seed, n):
    t1 = nx.random_labeled_tree(n, seed=seed)
    t2 = nx.random_labeled_tree(n, seed=seed + 1)
    perm = list(range(n))
    random.Random(seed).shuffle(perm)
    t3 = nx.relabel_nodes(t1, dict(zip(range(n), perm)))
    f1, f2, f3 = (tree_canonical_form(SimpleGraph.from_networkx(t)) for t in (t1, t2, t3))
    assert f1 == f3
    assert (f1 == f2) == nx.is_isomorphic(t1, t2)


def test_canonical_form_rejects_non_trees():
    with pytest.raises(ValueError):
        tree_canonical_form(SimpleGraph.from_networkx(nx.cycle_graph(4)))


def test_rigid_trees_are_distinct_and_rigid():
    shapes = []
    for _ in range(5):
        t = build_rigid_tree(7, forbidden=shapes)
        assert len(t) >= 7 and t.is_tree() and is_rigid(t)
        assert all(not nx.is_isomorphic(t.to_networkx(), s.to_networkx()) for s in shapes)
        shapes.append(t)
    assert tree_endpoint(shapes[0]) in shapes[0].vertices
    assert shapes[0].degree(tree_endpoint(shapes[0])) == 1


def test_rigid_tree_search_runs_out():
    with pytest.raises(ValueError):
        build_rigid_tree(7, max_vertices=6)


# --- spiders ---


def test_spider_shape():
    sp = build_spider([1, 2, 3])
    assert len(sp.graph) == 7 and sp.graph.is_tree()
    assert sp.graph.degree(sp.centre) == 3
    assert sp.endpoints == (1, 3, 6)
    assert sp.parent(3) == 2 and sp.parent(1) == 0 and sp.parent(0) is None


def test_spider_rigidity_depends_on_distinct_legs():
    assert is_rigid(build_spider([1, 2, 3]).graph)
    assert automorphism_group(build_spider([2, 2, 3]).graph).order == 2
    assert automorphism_group(build_spider([1, 1, 1]).graph).order == 6


def test_spider_errors():
    with pytest.raises(DegenerateSpider):
        build_spider([1, 2])
    with pytest.raises(ValueError):
        build_spider([0, 1, 2])


# --- crabs ---


@pytest.mark.parametrize("n", [5, 6])
def test_crab_structure(n):
    crab = build_crab(n)
    assert len(crab.graph) == crab_size(n)
    assert len(crab.cliques[crab.centre_clique]) == n + 1
    assert len(crab.end_cliques) == n + 1
    rep = verify_crab(crab.graph, n)
    assert rep.ok, rep.clauses
    assert {frozenset(c) for c in rep.details["cliques"]} == {frozenset(c) for c in crab.cliques}
    v = crab.designated_end_vertex
    assert any(v in crab.cliques[i] for i in crab.end_cliques)


def test_crab_sizes_are_frozen():
    assert [len(build_crab(n).graph) for n in (5, 6)] == [111, 175]


def test_crab_errors():
    with pytest.raises(HeftTooSmall):
        build_crab(4)
    with pytest.raises(CentreDegreeMismatch):
        build_crab(5, build_spider([1, 2, 3]))


def test_crab_with_custom_rigid_spider():
    crab = build_crab(5, build_spider([1, 2, 3, 4, 5, 7]))
    assert verify_crab(crab.graph, 5).ok
    assert is_rigid(crab.graph)


def test_verify_crab_detects_damage():
    crab = build_crab(5)
    g = crab.graph
    u, v = g.edges()[0]
    damaged = SimpleGraph(g.vertices, [e for e in g.edges() if e != (u, v)])
    assert not verify_crab(damaged, 5).ok
    assert not verify_crab(g, 6).ok
    # a spider with equal legs gives a crab-like graph whose clique tree is not rigid
    sym = build_crab(5, build_spider([1, 1, 3, 4, 5, 6]))
    rep = verify_crab(sym.graph, 5)
    assert not rep.ok and not is_rigid(sym.graph)


def test_crab_json_and_dot():
    crab = build_crab(5)
    data = crab.to_json()
    assert data["heft"] == 5 and data["legs"] == [1, 2, 3, 4, 5, 6]
    assert "centre" in crab.to_dot()


# --- crab nests ---


def test_heft_schedule():
    assert heft_schedule(3) == [5, 8, 11]


def test_nest_verifies():
    nest = build_crab_nest([5, 8])
    rep = verify_crab_nest(nest)
    assert rep.ok, rep.clauses
    assert len(nest.graph) == crab_size(5) + crab_size(8)
    cross = [(u, v) for u, v in nest.graph.edges() if u[0] != v[0]]
    assert len(cross) == 1 and nest.endpoints[1] in cross[0]


def test_nest_heft_growth_is_enforced():
    rep = verify_crab_nest(build_crab_nest([5, 7]))
    assert not rep.ok and rep.first_failure == "2"


def test_nest_cross_edges_are_enforced():
    nest = build_crab_nest([5, 8])
    g = nest.graph
    stray = ((1, 0, 0), (0, 0, 1))  # centre of H_1 into H_0, not through r_1
    bad = CrabNest(g.with_edges([stray]), nest.components, nest.hefts, nest.endpoints)
    assert verify_crab_nest(bad).first_failure == "4a"
    double = (nest.endpoints[1], (0, 0, 2))
    bad = CrabNest(g.with_edges([double]), nest.components, nest.hefts, nest.endpoints)
    assert verify_crab_nest(bad).first_failure == "4b"
    wrong_r = CrabNest(g, nest.components, nest.hefts, (nest.endpoints[0], (1, 0, 0)))
    assert not verify_crab_nest(wrong_r).ok


# --- gadget metric ---


def test_gadget_metric():
    tree = build_rigid_tree(7)
    gm = gadget_metric(tree, 1, 2)
    assert validate(gm.space) == []
    assert s_distance_graph(gm.space, 1) == tree
    with pytest.raises(NotMetrizable):
        gadget_metric(tree, 1, 3)
    with pytest.raises(ValueError):
        gadget_metric(tree, 1, 1)
