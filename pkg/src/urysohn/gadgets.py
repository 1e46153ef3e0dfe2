"""Rigid gadget graphs: asymmetric trees, spiders, crabs and crab nests, and
their two-distance metric realizations."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import networkx as nx

from .errors import CentreDegreeMismatch, DegenerateSpider, HeftTooSmall, NotMetrizable
from .graph import SimpleGraph
from .metric import FiniteMetricSpace
from .spectrum import as_rational
from .symmetry import is_rigid

__all__ = [
    "tree_canonical_form",
    "build_rigid_tree",
    "Spider",
    "build_spider",
    "Crab",
    "build_crab",
    "CheckReport",
    "verify_crab",
    "CrabNest",
    "build_crab_nest",
    "verify_crab_nest",
    "GadgetMetric",
    "gadget_metric",
]


# ---------------------------------------------------------------------------
# rigid trees
# ---------------------------------------------------------------------------


def _rooted_code(g: SimpleGraph, root, parent=None) -> str:
    kids = sorted(_rooted_code(g, c, root) for c in g.neighbors(root) if c != parent)
    return "(" + "".join(kids) + ")"


def tree_canonical_form(tree: SimpleGraph) -> str:
    """Isomorphism-invariant string of a tree (rooted at its centre or the
    lexicographically smaller rooting of its two centres)."""
    if not tree.is_tree():
        raise ValueError("not a tree")
    remaining = set(tree.vertices)
    degree = {v: tree.degree(v) for v in remaining}
    layer = [v for v in remaining if degree[v] <= 1]
    while len(remaining) > 2:
        nxt = []
        for leaf in layer:
            remaining.discard(leaf)
            for w in tree.neighbors(leaf):
                if w in remaining:
                    degree[w] -= 1
                    if degree[w] == 1:
                        nxt.append(w)
        layer = nxt
    return min(_rooted_code(tree, c) for c in remaining)


def build_rigid_tree(min_vertices: int = 7, forbidden: Iterable[SimpleGraph] = (), max_vertices: int = 30) -> SimpleGraph:
    """Smallest rigid tree with at least ``min_vertices`` vertices that is not
    isomorphic to any tree in ``forbidden``.

    Trees are enumerated by increasing size in the (deterministic) order of
    :func:`networkx.nonisomorphic_trees`; vertices are labelled ``0..n-1``.
    """
    if min_vertices < 7:
        min_vertices = 7  # no rigid tree exists on 2..6 vertices
    banned = {tree_canonical_form(t) for t in forbidden}
    for n in range(min_vertices, max_vertices + 1):
        for t in nx.nonisomorphic_trees(n):
            tree = SimpleGraph(sorted(t.nodes()), t.edges())
            if tree_canonical_form(tree) in banned:
                continue
            if is_rigid(tree):
                return tree
    raise ValueError(f"no admissible rigid tree up to {max_vertices} vertices")


def tree_endpoint(tree: SimpleGraph):
    """First leaf in vertex order."""
    return next(v for v in tree.vertices if tree.degree(v) == 1)


# ---------------------------------------------------------------------------
# spiders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Spider:
    graph: SimpleGraph
    centre: int
    legs: tuple[int, ...]
    leg_vertices: tuple[tuple[int, ...], ...]  # each from next-to-centre out to the endpoint

    @property
    def endpoints(self) -> tuple[int, ...]:
        return tuple(leg[-1] for leg in self.leg_vertices)

    def parent(self, v):
        if v == self.centre:
            return None
        for leg in self.leg_vertices:
            if v in leg:
                i = leg.index(v)
                return self.centre if i == 0 else leg[i - 1]
        raise KeyError(v)


def build_spider(leg_lengths: Sequence[int]) -> Spider:
    legs = tuple(int(x) for x in leg_lengths)
    if len(legs) < 3:
        raise DegenerateSpider(f"{len(legs)} legs give no vertex of degree > 2")
    if any(x < 1 for x in legs):
        raise ValueError("leg lengths must be positive")
    edges, leg_vertices, nxt = [], [], 1
    for length in legs:
        path = tuple(range(nxt, nxt + length))
        nxt += length
        edges.append((0, path[0]))
        edges.extend(zip(path, path[1:]))
        leg_vertices.append(path)
    return Spider(SimpleGraph(range(nxt), edges), 0, legs, tuple(leg_vertices))


# ---------------------------------------------------------------------------
# crabs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Crab:
    graph: SimpleGraph
    heft: int
    spider: Spider
    cliques: tuple[tuple, ...]  # cliques[i] belongs to spider vertex spider_map[i]
    spider_map: tuple[int, ...]
    centre_clique: int

    @property
    def end_cliques(self) -> tuple[int, ...]:
        ends = set(self.spider.endpoints)
        return tuple(i for i, u in enumerate(self.spider_map) if u in ends)

    @property
    def designated_end_vertex(self):
        """First vertex of the end clique on the longest leg."""
        longest = max(range(len(self.spider.legs)), key=lambda i: (self.spider.legs[i], -i))
        end = self.spider.leg_vertices[longest][-1]
        return self.cliques[self.spider_map.index(end)][0]

    def to_json(self) -> dict:
        return {
            "heft": self.heft,
            "legs": list(self.spider.legs),
            "cliques": [list(map(list, c)) for c in self.cliques],
            "centre_clique": self.centre_clique,
            "end_cliques": list(self.end_cliques),
        }

    def to_dot(self) -> str:
        attrs = {}
        for i, clique in enumerate(self.cliques):
            role = "centre" if i == self.centre_clique else ("end" if i in self.end_cliques else "body")
            for v in clique:
                attrs[v] = {"clique": i, "role": role}
        return self.graph.to_dot("crab", attrs)


def build_crab(heft: int, spider: Optional[Spider] = None) -> Crab:
    """Crab of the given heft over ``spider`` (default legs ``1..heft+1``).

    Vertex ``(u, j)`` is the j-th vertex of the clique of spider vertex ``u``.
    The clique of the i-th centre-adjacent spider vertex misses centre-clique
    vertex ``i``; along legs the matching is ``j -> j``.
    """
    n = int(heft)
    if n < 5:
        raise HeftTooSmall(f"heft {n} < 5")
    if spider is None:
        spider = build_spider(range(1, n + 2))
    if spider.graph.degree(spider.centre) != n + 1:
        raise CentreDegreeMismatch(
            f"spider centre degree {spider.graph.degree(spider.centre)} != heft + 1 = {n + 1}"
        )
    size = {u: (n + 1 if u == spider.centre else n) for u in spider.graph.vertices}
    cliques, spider_map, edges = [], [], []
    for u in spider.graph.vertices:
        members = tuple((u, j) for j in range(size[u]))
        cliques.append(members)
        spider_map.append(u)
        edges.extend((a, b) for i, a in enumerate(members) for b in members[i + 1:])
    for i, leg in enumerate(spider.leg_vertices):
        first = leg[0]
        for j in range(n):
            edges.append(((first, j), (spider.centre, j if j < i else j + 1)))
        for a, b in zip(leg, leg[1:]):
            edges.extend(((b, j), (a, j)) for j in range(n))
    verts = [v for c in cliques for v in c]
    return Crab(
        SimpleGraph(verts, edges),
        n,
        spider,
        tuple(cliques),
        tuple(spider_map),
        spider_map.index(spider.centre),
    )


@dataclass
class CheckReport:
    ok: bool
    clauses: dict = field(default_factory=dict)  # clause -> (passed, message)
    first_failure: Optional[str] = None
    details: dict = field(default_factory=dict)

    def record(self, clause: str, passed: bool, message: str = ""):
        self.clauses[clause] = (passed, message)
        if not passed and self.first_failure is None:
            self.first_failure = clause
            self.ok = False


def _adjacency(g: SimpleGraph, c1: Sequence, c2: Sequence) -> bool:
    """Whether two vertex-disjoint cliques are adjacent: an injection of the
    smaller into the larger accounts for exactly the edges between them."""
    small, big = (c1, c2) if len(c1) <= len(c2) else (c2, c1)
    bigset = set(big)
    hit = set()
    for x in small:
        nb = g.neighbors(x) & bigset
        if len(nb) != 1:
            return False
        (y,) = nb
        if y in hit:
            return False
        hit.add(y)
    return True


def verify_crab(graph: SimpleGraph, heft: int) -> CheckReport:
    """Check the four defining clauses of a crab independently.

    Cliques are the maximal cliques with at least three vertices; an edge
    joining two such cliques counts as a clique connection, and a connection
    that is not an adjacency fails clause 4.
    """
    rep = CheckReport(True)
    n = int(heft)
    if n < 5:
        rep.record("heft", False, f"heft {n} < 5")
        return rep
    nxg = graph.to_networkx()
    pos = graph.position
    cliques = sorted(
        (tuple(sorted(c, key=pos)) for c in nx.find_cliques(nxg) if len(c) >= 3),
        key=lambda c: pos(c[0]),
    )
    owner = {}
    multi = []
    for i, c in enumerate(cliques):
        for v in c:
            if v in owner:
                multi.append(v)
            owner[v] = i
    uncovered = [v for v in graph.vertices if v not in owner]
    rep.record("1", not multi and not uncovered,
               f"vertices in several cliques: {multi[:3]}, in none: {uncovered[:3]}")
    sizes = [len(c) for c in cliques]
    centre = [i for i, k in enumerate(sizes) if k == n + 1]
    rep.record(
        "2",
        len(centre) == 1 and all(k == n for i, k in enumerate(sizes) if i not in centre),
        f"clique orders {sorted(set(sizes))}, {len(centre)} of order n+1",
    )
    if rep.first_failure:
        return rep
    c0 = centre[0]
    connected = {}
    for u, v in graph.edges():
        a, b = owner[u], owner[v]
        if a != b:
            connected[frozenset((a, b))] = True
    adjacent = {key for key in connected if _adjacency(graph, *(cliques[i] for i in key))}
    neighbours_of_centre = [i for i in range(len(cliques)) if frozenset((i, c0)) in adjacent]
    ok3, msg3 = True, ""
    for x in cliques[c0]:
        missing = [i for i in neighbours_of_centre if not (graph.neighbors(x) & set(cliques[i]))]
        if len(missing) != 1:
            ok3, msg3 = False, f"centre vertex {x!r} is missed by {len(missing)} adjacent cliques"
            break
    rep.record("3", ok3, msg3)
    bad = [tuple(sorted(k)) for k in connected if k not in adjacent]
    clique_graph = SimpleGraph(range(len(cliques)), [tuple(k) for k in adjacent])
    big = [i for i in clique_graph.vertices if clique_graph.degree(i) > 2]
    spider_ok = (
        not bad
        and clique_graph.is_tree()
        and big == [c0]
        and clique_graph.degree(c0) == n + 1
        and is_rigid(clique_graph)
    )
    rep.record(
        "4",
        spider_ok,
        f"non-adjacent connections {bad[:3]}" if bad else "clique graph is not a rigid spider centred at the centre clique",
    )
    rep.details = {
        "cliques": cliques,
        "centre_clique": c0,
        "end_cliques": [i for i in clique_graph.vertices if clique_graph.degree(i) == 1],
    }
    return rep


# ---------------------------------------------------------------------------
# crab nests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrabNest:
    graph: SimpleGraph
    components: tuple[tuple, ...]  # vertex sets of H_0, H_1, ...
    hefts: tuple[int, ...]
    endpoints: tuple  # r_i, one per component

    def to_json(self) -> dict:
        return {
            "hefts": list(self.hefts),
            "components": [list(c) for c in self.components],
            "endpoints": list(self.endpoints),
        }


def heft_schedule(count: int, start: int = 5) -> list[int]:
    """Smallest hefts with heft_i + 2 < heft_{i+1}: 5, 8, 11, ..."""
    return [start + 3 * i for i in range(count)]


def build_crab_nest(hefts: Sequence[int]) -> CrabNest:
    """Disjoint crabs ``H_i`` (labels ``(i, u, j)``), each ``r_i`` joined to one
    vertex of the centre clique of ``H_{i-1}``."""
    comps, endpoints, edges, verts = [], [], [], []
    for i, h in enumerate(hefts):
        crab = build_crab(h)
        lab = {v: (i,) + v for v in crab.graph.vertices}
        g = crab.graph.relabel(lab)
        verts.extend(g.vertices)
        edges.extend(g.edges())
        comps.append(g.vertices)
        endpoints.append(lab[crab.designated_end_vertex])
        if i > 0:
            prev = build_crab(hefts[i - 1])
            target = (i - 1,) + prev.cliques[prev.centre_clique][0]
            edges.append((endpoints[-1], target))
    return CrabNest(SimpleGraph(verts, edges), tuple(comps), tuple(int(h) for h in hefts), tuple(endpoints))


def verify_crab_nest(nest: CrabNest) -> CheckReport:
    rep = CheckReport(True)
    g = nest.graph
    where = {}
    for i, comp in enumerate(nest.components):
        for v in comp:
            if v in where:
                rep.record("partition", False, f"{v!r} in two components")
                return rep
            where[v] = i
    rep.record("partition", set(where) == set(g.vertices), "components do not cover the graph")
    if len(nest.endpoints) != len(nest.components) or len(nest.hefts) != len(nest.components):
        rep.record("3", False, "need one endpoint and one heft per component")
        return rep
    sub_reports = []
    for i, comp in enumerate(nest.components):
        h = g.induced(comp)
        r = verify_crab(h, nest.hefts[i])
        sub_reports.append(r)
        connected = len(h.connected_components()) == 1
        rep.record("1", r.ok and connected, f"component {i} is not a crab (clause {r.first_failure})")
    for i in range(len(nest.hefts) - 1):
        rep.record("2", nest.hefts[i] + 2 < nest.hefts[i + 1],
                   f"heft({i})+2 = {nest.hefts[i] + 2} >= heft({i + 1}) = {nest.hefts[i + 1]}")
    for i, r_i in enumerate(nest.endpoints):
        ok = where.get(r_i) == i and sub_reports[i].ok
        if ok:
            cl = sub_reports[i].details["cliques"]
            ok = any(r_i in cl[e] for e in sub_reports[i].details["end_cliques"])
        rep.record("3", ok, f"r_{i} = {r_i!r} is not in an end clique of component {i}")
    down = {}
    for u, v in g.edges():
        i, j = where[u], where[v]
        if i == j:
            continue
        hi, lo = (u, v) if i > j else (v, u)
        k = max(i, j)
        rep.record("4a", hi == nest.endpoints[k],
                   f"cross edge ({hi!r}, {lo!r}) leaves component {k} away from r_{k}")
        down.setdefault(hi, []).append(lo)
    for r_i, targets in down.items():
        rep.record("4b", len(targets) <= 1, f"{r_i!r} has {len(targets)} edges to earlier components")
    rep.details = {"component_reports": sub_reports}
    return rep


# ---------------------------------------------------------------------------
# two-distance metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GadgetMetric:
    space: FiniteMetricSpace
    base_graph: SimpleGraph
    s: Fraction
    r: Fraction


def gadget_metric(graph: SimpleGraph, s, r) -> GadgetMetric:
    """Distance ``s`` on edges and ``r`` on non-edges."""
    s, r = as_rational(s), as_rational(r)
    if s <= 0 or r <= 0 or s == r:
        raise ValueError("need distinct positive s and r")
    if max(s, r) > 2 * min(s, r):
        raise NotMetrizable(f"max({s}, {r}) > 2 min({s}, {r})")
    return GadgetMetric(FiniteMetricSpace.from_graph(graph, s, r), graph, s, r)
