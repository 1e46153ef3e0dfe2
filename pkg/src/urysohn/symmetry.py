"""Automorphism groups of graphs and finite metric spaces.

Both kinds of structure are encoded as a dense matrix of edge colours (a
metric space is a complete graph whose edge colour is the exact distance)
plus an optional vertex colouring.  The search is the usual
individualization/refinement scheme:

* colour refinement to the coarsest equitable partition, with cells
  numbered canonically so that partitions of isomorphic branches compare
  equal;
* a leftmost path of individualizations gives a base ``b_0, b_1, ...``;
* from the deepest level upward, every vertex of the target cell not yet
  known to lie in the orbit of ``b_i`` is tested by searching for an
  automorphism of the pointwise stabilizer of ``b_0..b_{i-1}`` that maps
  ``b_i`` to it.

The group order is the product of the orbit lengths along the base.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Hashable, Iterable, Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import BudgetExceeded
from .graph import SimpleGraph
from .metric import FiniteMetricSpace

Structure = Union[SimpleGraph, FiniteMetricSpace]

DEFAULT_MAX_NODES = 500_000

__all__ = [
    "Coloring",
    "AutomorphismReport",
    "automorphism_group",
    "is_rigid",
    "color_preserving_automorphisms",
    "is_automorphism",
    "DistinguishingResult",
    "distinguishing_number_exact",
    "group_closure",
    "restricted_growth_colorings",
]


@dataclass(frozen=True)
class Coloring:
    """Total map from vertices/points to colours ``0..d-1``."""

    assignment: Mapping
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("a coloring needs at least one colour")
        bad = [c for c in self.assignment.values() if not 0 <= c < self.d]
        if bad:
            raise ValueError(f"colour out of range 0..{self.d - 1}: {bad[0]}")

    @classmethod
    def constant(cls, items: Iterable) -> "Coloring":
        return cls({v: 0 for v in items}, 1)

    @classmethod
    def from_sequence(cls, items: Sequence, colors: Sequence[int], d: Optional[int] = None) -> "Coloring":
        colors = list(colors)
        return cls(dict(zip(items, colors)), d if d is not None else (max(colors) + 1 if colors else 1))

    def __getitem__(self, v):
        return self.assignment[v]

    def classes(self) -> list[list]:
        out = [[] for _ in range(self.d)]
        for v, c in self.assignment.items():
            out[c].append(v)
        return out

    def to_json(self) -> dict:
        return {"d": self.d, "assignment": [[v, c] for v, c in self.assignment.items()]}

    @classmethod
    def from_json(cls, data) -> "Coloring":
        fix = lambda v: tuple(v) if isinstance(v, list) else v  # noqa: E731
        return cls({fix(v): int(c) for v, c in data["assignment"]}, int(data["d"]))


@dataclass
class AutomorphismReport:
    labels: tuple
    generators: list  # each a tuple: image of labels[i] at position i
    order: int
    nodes: int = 0
    base: tuple = ()
    orbit_lengths: tuple = ()

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    def generator_maps(self) -> list[dict]:
        return [dict(zip(self.labels, g)) for g in self.generators]

    def to_json(self) -> dict:
        return {
            "order": str(self.order),
            "is_trivial": self.is_trivial,
            "generators": [[[a, b] for a, b in zip(self.labels, g) if a != b] for g in self.generators],
            "base": list(self.base),
            "orbit_lengths": list(self.orbit_lengths),
            "search_nodes": self.nodes,
        }


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------


def _encode(structure: Structure) -> tuple[tuple, np.ndarray]:
    if isinstance(structure, FiniteMetricSpace):
        mat, _ = structure.index_matrix()
        return structure.points, mat
    if isinstance(structure, SimpleGraph):
        labels = structure.vertices
        n = len(labels)
        mat = np.zeros((n, n), dtype=np.int64)
        for u, v in structure.edges():
            i, j = structure.position(u), structure.position(v)
            mat[i, j] = mat[j, i] = 1
        return labels, mat
    raise TypeError(f"unsupported structure {type(structure).__name__}")


def _initial_colors(labels: tuple, coloring) -> np.ndarray:
    if coloring is None:
        return np.zeros(len(labels), dtype=np.int64)
    assign = coloring.assignment if isinstance(coloring, Coloring) else coloring
    missing = [v for v in labels if v not in assign]
    if missing:
        raise ValueError(f"coloring is not total; missing {missing[:3]}")
    raw = [assign[v] for v in labels]
    rank = {c: i for i, c in enumerate(sorted(set(raw)))}
    return np.array([rank[c] for c in raw], dtype=np.int64)


# ---------------------------------------------------------------------------
# refinement and search
# ---------------------------------------------------------------------------


class _Search:
    def __init__(self, mat: np.ndarray, colors: np.ndarray, max_nodes: int):
        self.mat = mat
        self.n = len(colors)
        self.orig = colors
        self.ecount = int(mat.max()) + 1 if self.n else 1
        self.max_nodes = max_nodes
        self.nodes = 0

    def refine(self, colors: np.ndarray) -> np.ndarray:
        """Coarsest equitable refinement, cells numbered canonically."""
        if self.n == 0:
            return colors
        cells = len(np.unique(colors))
        while True:
            keys = np.sort(colors[None, :] * self.ecount + self.mat, axis=1)
            table = np.concatenate([colors[:, None], keys], axis=1)
            _, new = np.unique(table, axis=0, return_inverse=True)
            new = np.asarray(new).reshape(-1).astype(np.int64)
            new_cells = int(new.max()) + 1
            colors = new
            if new_cells == cells:
                return colors
            cells = new_cells

    @staticmethod
    def individualize(colors: np.ndarray, v: int) -> np.ndarray:
        out = colors * 2
        out[v] += 1
        return out

    def target(self, colors: np.ndarray) -> Optional[int]:
        counts = np.bincount(colors)
        big = np.nonzero(counts > 1)[0]
        return int(big[0]) if len(big) else None

    def tick(self):
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise BudgetExceeded(f"automorphism search exceeded {self.max_nodes} nodes", explored=self.nodes)

    def is_automorphism(self, g: np.ndarray) -> bool:
        return bool(np.array_equal(self.orig[g], self.orig)) and bool(
            np.array_equal(self.mat[np.ix_(g, g)], self.mat)
        )

    def run(self, stop_at_first: bool = False):
        self.tick()
        path = [self.refine(self.orig.copy())]
        base = []
        while True:
            c = self.target(path[-1])
            if c is None:
                break
            v = int(np.nonzero(path[-1] == c)[0][0])
            base.append(v)
            self.tick()
            path.append(self.refine(self.individualize(path[-1], v)))
        self.path = path
        self.leaf = path[-1]
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        gens: list[np.ndarray] = []
        orbit_lengths = [1] * len(base)
        for i in range(len(base) - 1, -1, -1):
            b = base[i]
            cell = np.nonzero(path[i] == path[i][b])[0]
            for w in cell:
                w = int(w)
                if find(w) == find(b):
                    continue
                self.tick()
                g = self._find(i + 1, self.refine(self.individualize(path[i], w)))
                if g is None:
                    continue
                gens.append(g)
                for x in range(self.n):
                    rx, ry = find(x), find(int(g[x]))
                    if rx != ry:
                        parent[rx] = ry
                if stop_at_first:
                    return gens, None, base, None
            rb = find(b)
            orbit_lengths[i] = sum(1 for x in cell if find(int(x)) == rb)
        return gens, prod(orbit_lengths), base, orbit_lengths

    def _find(self, depth: int, colors: np.ndarray) -> Optional[np.ndarray]:
        ref = self.path[depth]
        if not np.array_equal(np.bincount(colors, minlength=len(ref)), np.bincount(ref, minlength=len(ref))):
            return None
        if depth == len(self.path) - 1:
            branch_vertex = np.argsort(colors)
            g = branch_vertex[self.leaf]
            return g if self.is_automorphism(g) else None
        c = self.target(ref)
        for u in np.nonzero(colors == c)[0]:
            self.tick()
            g = self._find(depth + 1, self.refine(self.individualize(colors, int(u))))
            if g is not None:
                return g
        return None


def automorphism_group(
    structure: Structure, coloring=None, *, max_nodes: int = DEFAULT_MAX_NODES
) -> AutomorphismReport:
    """Exact automorphism group (preserving ``coloring`` when given)."""
    labels, mat = _encode(structure)
    search = _Search(mat, _initial_colors(labels, coloring), max_nodes)
    gens, order, base, orbits = search.run()
    pos = {v: i for i, v in enumerate(labels)}
    images = [tuple(labels[int(x)] for x in g) for g in gens]
    images.sort(key=lambda t: [pos[x] for x in t])
    return AutomorphismReport(
        labels=tuple(labels),
        generators=images,
        order=order,
        nodes=search.nodes,
        base=tuple(labels[b] for b in base),
        orbit_lengths=tuple(orbits),
    )


def is_rigid(structure: Structure, coloring=None, *, max_nodes: int = DEFAULT_MAX_NODES) -> bool:
    """True iff only the identity preserves the structure (and the coloring).

    Stops at the first nontrivial automorphism found.
    """
    labels, mat = _encode(structure)
    search = _Search(mat, _initial_colors(labels, coloring), max_nodes)
    gens, _, _, _ = search.run(stop_at_first=True)
    return not gens


def color_preserving_automorphisms(
    structure: Structure, coloring, *, max_nodes: int = DEFAULT_MAX_NODES
) -> AutomorphismReport:
    return automorphism_group(structure, coloring, max_nodes=max_nodes)


def is_automorphism(structure: Structure, mapping: Mapping, coloring=None) -> bool:
    """Check that ``mapping`` (total on the structure) is a structure- and
    colour-preserving bijection."""
    labels, mat = _encode(structure)
    pos = {v: i for i, v in enumerate(labels)}
    if set(mapping) != set(labels) or set(mapping.values()) != set(labels):
        return False
    g = np.array([pos[mapping[v]] for v in labels], dtype=np.int64)
    if coloring is not None:
        assign = coloring.assignment if isinstance(coloring, Coloring) else coloring
        if any(assign[v] != assign[mapping[v]] for v in labels):
            return False
    return bool(np.array_equal(mat[np.ix_(g, g)], mat))


def group_closure(labels: Sequence, generators: Sequence[Sequence], cap: int = 100_000) -> set:
    """All elements generated by ``generators`` (as image tuples), by BFS."""
    pos = {v: i for i, v in enumerate(labels)}
    gens = [tuple(pos[x] for x in g) for g in generators]
    ident = tuple(range(len(labels)))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                hg = tuple(g[h[i]] for i in range(len(h)))
                if hg not in seen:
                    seen.add(hg)
                    if len(seen) > cap:
                        raise BudgetExceeded(f"group closure exceeds {cap} elements")
                    nxt.append(hg)
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# distinguishing number
# ---------------------------------------------------------------------------


def restricted_growth_colorings(n: int, d: int, exact: bool = False) -> Iterator[tuple[int, ...]]:
    """Colourings of ``n`` items with colours < ``d``, one per colour-permutation class."""
    seq = [0] * n

    def rec(i, used):
        if i == n:
            if not exact or used == d:
                yield tuple(seq)
            return
        if exact and d - used > n - i:
            return
        for c in range(min(used + 1, d)):
            seq[i] = c
            yield from rec(i + 1, max(used, c + 1))

    if n == 0:
        if not exact or d == 0:
            yield ()
        return
    yield from rec(0, 0)


@dataclass
class DistinguishingResult:
    d: Optional[int]  # None when every d <= max_d fails
    witness: Optional[Coloring]
    max_d: int
    colorings_tried: int = 0

    @property
    def exceeded(self) -> bool:
        return self.d is None


def distinguishing_number_exact(
    structure: Structure, max_d: int = 6, *, max_colorings: int = 2_000_000,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> DistinguishingResult:
    """Least number of colours admitting a coloring preserved only by the identity.

    Colourings are enumerated as restricted-growth strings (one per orbit of
    the colour-permutation group) using exactly ``d`` colours, since every
    coloring with fewer colours was already rejected at a smaller ``d``.
    """
    labels, mat = _encode(structure)
    n = len(labels)
    tried = 0
    for d in range(1, max_d + 1):
        if d > max(n, 1):
            break
        for seq in restricted_growth_colorings(n, d, exact=True):
            tried += 1
            if tried > max_colorings:
                raise BudgetExceeded(f"more than {max_colorings} colorings tried", explored=tried)
            search = _Search(mat, np.array(seq, dtype=np.int64), max_nodes)
            gens, _, _, _ = search.run(stop_at_first=True)
            if not gens:
                return DistinguishingResult(d, Coloring(dict(zip(labels, seq)), d), max_d, tried)
    return DistinguishingResult(None, None, max_d, tried)
