"""Exact finite metric spaces.

Points are opaque hashable labels; a space is value-semantic and every
"modification" returns a new space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Hashable, Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import BudgetExceeded, NotAJump, NotMetric
from .graph import SimpleGraph
from .spectrum import Spectrum, as_rational, format_rational, is_jump

__all__ = [
    "FiniteMetricSpace",
    "Violation",
    "validate",
    "validate_point",
    "spectrum_of",
    "s_distance_graph",
    "JumpPartition",
    "jump_classes",
    "DensityReport",
    "density_report",
    "is_dense",
    "PartialIsometry",
    "enumerate_partial_isometries",
]


class FiniteMetricSpace:
    __slots__ = ("points", "_pos", "_rows", "_cache")

    def __init__(self, points: Sequence[Hashable], rows: Sequence[Sequence[Fraction]]):
        self.points = tuple(points)
        self._pos = {p: i for i, p in enumerate(self.points)}
        if len(self._pos) != len(self.points):
            raise ValueError("duplicate point labels")
        if len(rows) != len(self.points) or any(len(r) != len(self.points) for r in rows):
            raise ValueError("distance table must be square over the points")
        self._rows = tuple(tuple(as_rational(x) for x in r) for r in rows)
        self._cache = {}

    # construction ---------------------------------------------------------

    @classmethod
    def from_pairs(cls, points: Sequence[Hashable], dist: Mapping) -> "FiniteMetricSpace":
        """Build from ``{(p, q): d}``; each unordered pair given once (either order)."""
        points = tuple(points)
        pos = {p: i for i, p in enumerate(points)}
        n = len(points)
        rows = [[Fraction(0)] * n for _ in range(n)]
        seen = set()
        for (p, q), d in dist.items():
            i, j = pos[p], pos[q]
            if i == j:
                raise ValueError(f"self distance given for {p!r}")
            key = (min(i, j), max(i, j))
            d = as_rational(d)
            if key in seen and rows[i][j] != d:
                raise ValueError(f"conflicting distances for ({p!r}, {q!r})")
            seen.add(key)
            rows[i][j] = rows[j][i] = d
        missing = n * (n - 1) // 2 - len(seen)
        if missing:
            raise ValueError(f"{missing} point pairs have no distance")
        return cls(points, rows)

    @classmethod
    def from_function(cls, points: Sequence[Hashable], fn) -> "FiniteMetricSpace":
        points = tuple(points)
        rows = [[Fraction(0) if p == q else as_rational(fn(p, q)) for q in points] for p in points]
        return cls(points, rows)

    @classmethod
    def from_graph(cls, graph: SimpleGraph, edge, nonedge) -> "FiniteMetricSpace":
        edge, nonedge = as_rational(edge), as_rational(nonedge)
        return cls.from_function(
            graph.vertices, lambda u, v: edge if graph.has_edge(u, v) else nonedge
        )

    @classmethod
    def single(cls, label=0) -> "FiniteMetricSpace":
        return cls((label,), ((Fraction(0),),))

    # access ---------------------------------------------------------------

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return p in self._pos

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace) or set(self.points) != set(other.points):
            return False
        return all(self.d(p, q) == other.d(p, q) for p in self.points for q in self.points)

    def __repr__(self):
        return f"FiniteMetricSpace(n={len(self)}, spectrum={self.spectrum_values()})"

    def index(self, p) -> int:
        return self._pos[p]

    def d(self, p, q) -> Fraction:
        return self._rows[self._pos[p]][self._pos[q]]

    def row(self, p) -> tuple[Fraction, ...]:
        return self._rows[self._pos[p]]

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def pairs(self) -> Iterator[tuple]:
        return combinations(self.points, 2)

    def spectrum_values(self) -> list[str]:
        return [format_rational(q) for q in sorted({x for r in self._rows for x in r})]

    def diameter(self) -> Fraction:
        return max((x for r in self._rows for x in r), default=Fraction(0))

    # derived spaces -------------------------------------------------------

    def restrict(self, subset: Iterable) -> "FiniteMetricSpace":
        keep = set(subset)
        idx = [i for i, p in enumerate(self.points) if p in keep]
        if len(idx) != len(keep):
            raise KeyError(f"points not in space: {keep - set(self.points)}")
        return FiniteMetricSpace(
            [self.points[i] for i in idx], [[self._rows[i][j] for j in idx] for i in idx]
        )

    def extend(self, label, dists: Mapping) -> "FiniteMetricSpace":
        """New space with one more point at the given distances to every old point."""
        return self.extend_many([label], {(label, p): dists[p] for p in self.points}, {})

    def extend_many(self, labels: Sequence, cross: Mapping, internal: Mapping) -> "FiniteMetricSpace":
        """Add ``labels`` with ``cross[(new, old)]`` and ``internal[(new, new')]``."""
        labels = tuple(labels)
        if any(l in self._pos for l in labels):
            raise ValueError("new labels collide with existing points")
        n, m = len(self.points), len(labels)
        rows = [list(r) + [None] * m for r in self._rows]
        rows += [[None] * (n + m) for _ in range(m)]
        for a, new in enumerate(labels):
            i = n + a
            rows[i][i] = Fraction(0)
            for j, old in enumerate(self.points):
                d = as_rational(cross[(new, old)])
                rows[i][j] = rows[j][i] = d
            for b in range(a + 1, m):
                other = labels[b]
                d = internal.get((new, other), internal.get((other, new)))
                if d is None:
                    raise ValueError(f"missing distance ({new!r}, {other!r})")
                rows[i][n + b] = rows[n + b][i] = as_rational(d)
        return FiniteMetricSpace(self.points + labels, rows)

    def relabel(self, mapping: Mapping) -> "FiniteMetricSpace":
        return FiniteMetricSpace([mapping.get(p, p) for p in self.points], self._rows)

    # numeric views --------------------------------------------------------

    def index_matrix(self) -> tuple[np.ndarray, tuple[Fraction, ...]]:
        """Distances replaced by their rank among the distinct values present."""
        if "index" not in self._cache:
            values = tuple(sorted({x for r in self._rows for x in r}))
            rank = {v: i for i, v in enumerate(values)}
            mat = np.array([[rank[x] for x in r] for r in self._rows], dtype=np.int64).reshape(
                len(self), len(self)
            )
            self._cache["index"] = (mat, values)
        return self._cache["index"]

    def scaled_matrix(self) -> np.ndarray:
        """Exact integer matrix: all distances times the lcm of their denominators."""
        if "scaled" not in self._cache:
            denom = 1
            for r in self._rows:
                for x in r:
                    denom = math.lcm(denom, x.denominator)
            ints = [[x.numerator * (denom // x.denominator) for x in r] for r in self._rows]
            peak = max((abs(v) for r in ints for v in r), default=0)
            dtype = np.int64 if peak < 2**61 else object
            self._cache["scaled"] = np.array(ints, dtype=dtype).reshape(len(self), len(self))
        return self._cache["scaled"]

    # interchange ----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "dist": [[p, q, format_rational(self.d(p, q))] for p, q in self.pairs()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "FiniteMetricSpace":
        fix = lambda v: tuple(v) if isinstance(v, list) else v  # noqa: E731
        points = [fix(p) for p in data["points"]]
        if len(points) == 1:
            return cls.single(points[0])
        return cls.from_pairs(points, {(fix(p), fix(q)): d for p, q, d in data["dist"]})


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


class Violation(NamedTuple):
    axiom: str  # "zero_diagonal" | "symmetry" | "positivity" | "triangle"
    points: tuple
    detail: str


def validate(space: FiniteMetricSpace, limit: int = 20) -> list[Violation]:
    """Metric-axiom violations, at most ``limit`` of them; empty means valid."""
    out: list[Violation] = []
    pts, rows = space.points, space.rows
    n = len(pts)
    for i in range(n):
        if rows[i][i] != 0:
            out.append(Violation("zero_diagonal", (pts[i],), f"d = {rows[i][i]}"))
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                out.append(Violation("symmetry", (pts[i], pts[j]), f"{rows[i][j]} != {rows[j][i]}"))
            if rows[i][j] <= 0:
                out.append(Violation("positivity", (pts[i], pts[j]), f"d = {rows[i][j]}"))
    if out:
        return out[:limit]
    mat = space.scaled_matrix()
    for k in range(n):
        bad = mat > mat[:, k, None] + mat[None, k, :]
        if bad.any():
            for i, j in zip(*np.nonzero(bad)):
                if i < j:
                    x, y, z = pts[i], pts[j], pts[k]
                    out.append(
                        Violation(
                            "triangle",
                            (x, y, z),
                            f"d({x!r},{y!r})={rows[i][j]} > {rows[i][k]} + {rows[k][j]}",
                        )
                    )
                    if len(out) >= limit:
                        return out
    return out


def validate_point(space: FiniteMetricSpace, p) -> list[Violation]:
    """Violations among triangles that contain ``p`` (cheap incremental check)."""
    mat = space.scaled_matrix()
    k = space.index(p)
    row = mat[k]
    pts = space.points
    out = []
    # d(i,j) <= d(i,p) + d(p,j)
    bad = mat > row[:, None] + row[None, :]
    # d(p,j) <= d(p,i) + d(i,j)
    bad2 = row[None, :] > row[:, None] + mat
    for i, j in zip(*np.nonzero(bad)):
        if i < j:
            out.append(Violation("triangle", (pts[i], pts[j], p), "opposite side too long"))
    for i, j in zip(*np.nonzero(bad2)):
        out.append(Violation("triangle", (p, pts[j], pts[i]), "side from p too long"))
    return out


def require_metric(space: FiniteMetricSpace, what: str = "space") -> FiniteMetricSpace:
    bad = validate(space)
    if bad:
        raise NotMetric(f"{what} is not a metric space: {bad[0].detail}", bad)
    return space


def spectrum_of(space: FiniteMetricSpace) -> list[Fraction]:
    """Sorted set of occurring distances, 0 included.

    Returned as a list because a one-point space has spectrum {0}, which is
    not a valid :class:`Spectrum` object.
    """
    vals = {Fraction(0)}
    for r in space.rows:
        vals.update(r)
    return sorted(vals)


def s_distance_graph(space: FiniteMetricSpace, s) -> SimpleGraph:
    s = as_rational(s)
    return SimpleGraph(space.points, [(p, q) for p, q in space.pairs() if space.d(p, q) == s])


# ---------------------------------------------------------------------------
# jump classes and density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpPartition:
    s: Fraction
    classes: tuple[tuple, ...]

    def class_of(self, p) -> tuple:
        for c in self.classes:
            if p in c:
                return c
        raise KeyError(p)


def _components_le(space: FiniteMetricSpace, s: Fraction, points=None) -> list[tuple]:
    pts = list(space.points if points is None else points)
    seen, comps = set(), []
    for root in pts:
        if root in seen:
            continue
        comp, stack = [], [root]
        seen.add(root)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in pts:
                if w not in seen and space.d(u, w) <= s:
                    seen.add(w)
                    stack.append(w)
        comps.append(tuple(sorted(comp, key=space.index)))
    return comps


def jump_classes(space: FiniteMetricSpace, s, spectrum: Spectrum | None = None) -> JumpPartition:
    """Classes of the relation d(x, y) <= s.

    Transitivity is checked directly on the space; :class:`NotAJump` is
    raised if it fails or if ``s`` is not a jump number of ``spectrum``.
    """
    s = as_rational(s)
    comps = _components_le(space, s)
    for comp in comps:
        for p, q in combinations(comp, 2):
            if space.d(p, q) > s:
                raise NotAJump(f"d({p!r},{q!r}) = {space.d(p, q)} > {s} inside one chain class")
    if spectrum is not None and (s not in spectrum or not is_jump(spectrum, s)):
        raise NotAJump(f"{s} is not a jump number of {spectrum}")
    return JumpPartition(s, tuple(comps))


@dataclass(frozen=True)
class DensityReport:
    dense: bool
    jump_numbers: tuple[Fraction, ...]
    missing: tuple  # (s, class) pairs the subset does not meet
    vacuous: bool  # no jump number below the space's diameter

    @property
    def note(self) -> str:
        if self.vacuous:
            return "vacuous: the spectrum has no jump number below the diameter of the space"
        return ""


def density_report(space: FiniteMetricSpace, subset: Iterable, spectrum: Spectrum) -> DensityReport:
    sub = set(subset)
    if not sub <= set(space.points):
        raise KeyError("subset leaves the space")
    jumps = tuple(s for s in spectrum.positive if is_jump(spectrum, s))
    diam = space.diameter()
    missing = []
    for s in jumps:
        for cls in jump_classes(space, s).classes:
            if not sub.intersection(cls):
                missing.append((s, cls))
    vacuous = not any(s < diam for s in jumps)
    return DensityReport(not missing, jumps, tuple(missing), vacuous)


def is_dense(space: FiniteMetricSpace, subset: Iterable, spectrum: Spectrum) -> bool:
    return density_report(space, subset, spectrum).dense


# ---------------------------------------------------------------------------
# partial isometries
# ---------------------------------------------------------------------------


class PartialIsometry(NamedTuple):
    domain: tuple
    image: tuple

    def as_dict(self) -> dict:
        return dict(zip(self.domain, self.image))


def enumerate_partial_isometries(
    space: FiniteMetricSpace, k: int, cap: int = 1_000_000
) -> list[PartialIsometry]:
    """Every distance-preserving injection between subspaces of 1..k points.

    Domains are taken in canonical (combination) order, images as ordered
    tuples, so each map is listed once.
    """
    if k > len(space):
        raise ValueError("k exceeds the number of points")
    pts = space.points
    out: list[PartialIsometry] = []

    def grow(dom, img):
        if len(out) > cap:
            raise BudgetExceeded(f"more than {cap} partial isometries", explored=len(out))
        i = len(img)
        if i == len(dom):
            out.append(PartialIsometry(dom, tuple(img)))
            return
        for q in pts:
            if q in img:
                continue
            if all(space.d(dom[j], dom[i]) == space.d(img[j], q) for j in range(i)):
                img.append(q)
                grow(dom, img)
                img.pop()

    for size in range(1, k + 1):
        for dom in combinations(pts, size):
            grow(dom, [])
    return out
