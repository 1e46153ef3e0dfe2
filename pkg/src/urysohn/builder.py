"""Finite saturated approximations of the universal homogeneous space over a
spectrum: one-point extensions, saturation and homogeneity audits."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Mapping, Optional, Sequence

from .amalgamation import amalgamate_oplus, amalgamate_search, make_instance
from .errors import BudgetExceeded, NotMetric
from .metric import FiniteMetricSpace, jump_classes, require_metric
from .spectrum import Spectrum, as_rational, format_rational, is_jump

__all__ = [
    "KatetovVector",
    "katetov_vectors",
    "is_realized",
    "realize_extension",
    "ExtensionRecord",
    "Approximation",
    "saturate",
    "HomogeneityReport",
    "check_local_homogeneity",
    "DenseRepresentation",
    "ensure_dense_representation",
    "grow_classes",
]


@dataclass(frozen=True)
class KatetovVector:
    """Prescribed distances from a new point to the points of ``base``."""

    base: tuple
    values: tuple[Fraction, ...]

    def as_dict(self) -> dict:
        return dict(zip(self.base, self.values))

    def is_valid(self, space: FiniteMetricSpace) -> bool:
        if any(v <= 0 for v in self.values):
            return False
        for i, j in combinations(range(len(self.base)), 2):
            d = space.d(self.base[i], self.base[j])
            if not abs(self.values[i] - self.values[j]) <= d <= self.values[i] + self.values[j]:
                return False
        return True

    def to_json(self) -> dict:
        return {"base": list(self.base), "values": [format_rational(v) for v in self.values]}


def katetov_vectors(
    space: FiniteMetricSpace, base: Sequence, S: Spectrum, bound=None, *, max_vectors: int = 200_000
) -> list[KatetovVector]:
    """Every one-point extension vector over ``base`` with values in S up to
    ``bound`` (default ``max(S)``), in lexicographic order."""
    base = tuple(base)
    bound = S.max if bound is None else as_rational(bound)
    vals = [v for v in S.positive if v <= bound]
    out: list[KatetovVector] = []
    cur: list[Fraction] = []

    def go(i: int):
        if i == len(base):
            if len(out) >= max_vectors:
                raise BudgetExceeded(f"more than {max_vectors} extension vectors", len(out))
            out.append(KatetovVector(base, tuple(cur)))
            return
        for v in vals:
            if all(abs(v - cur[j]) <= space.d(base[i], base[j]) <= v + cur[j] for j in range(i)):
                cur.append(v)
                go(i + 1)
                cur.pop()

    go(0)
    return out


def _witnesses(space: FiniteMetricSpace, vec: KatetovVector) -> int:
    base = set(vec.base)
    n = 0
    for z in space.points:
        if z not in base and all(space.d(z, x) == v for x, v in zip(vec.base, vec.values)):
            n += 1
    return n


def is_realized(space: FiniteMetricSpace, vec: KatetovVector) -> bool:
    return _witnesses(space, vec) > 0


def _fresh_label(space: FiniteMetricSpace):
    n = len(space)
    while n in space:
        n += 1
    return n


def realize_extension(
    space: FiniteMetricSpace, vec: KatetovVector, S: Spectrum, label=None, rng=None
) -> FiniteMetricSpace:
    """Add one point realizing ``vec``.

    Distances to points off the base come from the truncated-sum amalgam of
    ``space`` with ``base + z`` (plain search when the base is empty or the
    truncated sums are not metric).  Passing ``rng`` replaces the canonical
    completion with a randomized search.
    """
    if not vec.is_valid(space):
        raise ValueError(f"invalid extension vector {vec.to_json()}")
    z = _fresh_label(space) if label is None else label
    if z in space:
        raise ValueError(f"label {z!r} already in use")
    if len(vec.base) == len(space):
        return require_metric(space.extend(z, vec.as_dict()), "extension")
    small = space.restrict(vec.base).extend(z, vec.as_dict())
    inst = make_instance(space, small)
    if vec.base and rng is None:
        try:
            return amalgamate_oplus(inst, S).space
        except NotMetric:
            pass
    return require_metric(amalgamate_search(inst, S, rng=rng).space, "extension")


@dataclass(frozen=True)
class ExtensionRecord:
    point: object
    vector: KatetovVector

    def to_json(self) -> dict:
        return {"point": self.point, **self.vector.to_json()}


@dataclass
class Approximation:
    space: FiniteMetricSpace
    spectrum: Spectrum
    saturation: list = field(default_factory=list)  # dicts {k, bound, multiplicity, closed, points}
    log: list = field(default_factory=list)  # ExtensionRecord, in order
    unrealized: list = field(default_factory=list)  # KatetovVector left open at the end

    def to_json(self) -> dict:
        return {
            **self.space.to_json(),
            "spectrum": self.spectrum.to_strings(),
            "saturation": [
                {**lvl, "bound": format_rational(lvl["bound"])} for lvl in self.saturation
            ],
            "log": [r.to_json() for r in self.log],
            "unrealized": [v.to_json() for v in self.unrealized],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Approximation":
        space = FiniteMetricSpace.from_json(data)
        S = Spectrum(data["spectrum"])
        vec = lambda r: KatetovVector(tuple(r["base"]), tuple(as_rational(v) for v in r["values"]))  # noqa: E731
        return cls(
            space,
            S,
            [{**lvl, "bound": as_rational(lvl["bound"])} for lvl in data.get("saturation", [])],
            [ExtensionRecord(r["point"], vec(r)) for r in data.get("log", [])],
            [vec(r) for r in data.get("unrealized", [])],
        )


def saturate(
    S: Spectrum,
    k: int = 2,
    bound=None,
    max_points: int = 40,
    *,
    start: Optional[FiniteMetricSpace] = None,
    fill: bool = True,
    seed: Optional[int] = None,
) -> Approximation:
    """Realize extension vectors over every subset of at most ``k`` points.

    Subsets are visited by size, then in combination order; vectors in
    lexicographic order.  Passes repeat until nothing is added.  Once closed,
    and while ``fill`` is set and room remains, every vector is required to
    have one more witness and saturation resumes.

    With a ``seed``, distances from each new point to points off its base are
    drawn at random (reproducibly) instead of by the canonical completion;
    random completions close small levels far sooner.
    """
    bound = S.max if bound is None else as_rational(bound)
    space = start if start is not None else FiniteMetricSpace.single(0)
    approx = Approximation(space, S)
    mult = 1
    rng = random.Random(seed) if seed is not None else None

    def todo(space):
        for size in range(0, k + 1):
            for base in combinations(space.points, size):
                for vec in katetov_vectors(space, base, S, bound):
                    yield vec

    while True:
        closed = False
        while len(approx.space) < max_points:
            added = False
            for vec in todo(approx.space):
                if _witnesses(approx.space, vec) < mult:
                    approx.space = realize_extension(approx.space, vec, S, rng=rng)
                    approx.log.append(ExtensionRecord(approx.space.points[-1], vec))
                    added = True
                    if len(approx.space) >= max_points:
                        break
            if not added:
                closed = True
                break
        if not closed:
            # the point cap hit mid-pass; re-check whether that completed closure
            closed = all(_witnesses(approx.space, v) >= mult for v in todo(approx.space))
        approx.saturation.append(
            {"k": k, "bound": bound, "multiplicity": mult, "closed": closed, "points": len(approx.space)}
        )
        if not (closed and fill and len(approx.space) < max_points):
            break
        mult += 1
    approx.unrealized = [v for v in todo(approx.space) if _witnesses(approx.space, v) == 0]
    return approx


@dataclass
class HomogeneityReport:
    k: int
    checked: int
    covered: int
    uncovered: list  # (image tuple, vector values) with no matching extension

    @property
    def coverage(self) -> Fraction:
        return Fraction(self.covered, self.checked) if self.checked else Fraction(1)


def check_local_homogeneity(space: FiniteMetricSpace, k: int = 2, *, max_tuples: int = 500_000) -> HomogeneityReport:
    """For every isometry between ordered tuples of at most ``k`` points and
    every extension realized over its domain, check that the image has the
    matching extension too."""
    pts = space.points
    checked = covered = 0
    uncovered = []
    seen_tuples = 0
    for size in range(1, k + 1):
        groups: dict = {}
        for t in permutations(pts, size):
            seen_tuples += 1
            if seen_tuples > max_tuples:
                raise BudgetExceeded(f"more than {max_tuples} tuples", seen_tuples)
            shape = tuple(space.d(t[i], t[j]) for i in range(size) for j in range(i + 1, size))
            inside = set(t)
            real = {tuple(space.d(z, x) for x in t) for z in pts if z not in inside}
            groups.setdefault(shape, []).append((t, real))
        for members in groups.values():
            union = set().union(*(r for _, r in members))
            for t, real in members:
                for vec in sorted(union):
                    checked += 1
                    if vec in real:
                        covered += 1
                    else:
                        uncovered.append((t, vec))
    return HomogeneityReport(k, checked, covered, uncovered)


@dataclass
class DenseRepresentation:
    space: FiniteMetricSpace
    labels: dict  # point -> label
    added: list  # (point, label, s, class representative)
    vacuous: bool

    @property
    def note(self) -> str:
        return "vacuous: no jump number in the core" if self.vacuous else ""


def ensure_dense_representation(space: FiniteMetricSpace, labels: Mapping, S: Spectrum) -> DenseRepresentation:
    """Add points until every label meets every class of every jump relation.

    A missing label in a class is supplied by a new point at the least
    positive distance from the class's first member, which keeps it inside
    that class at every jump level.
    """
    labels = dict(labels)
    if set(labels) != set(space.points):
        raise ValueError("labels must cover exactly the points of the space")
    names = sorted(set(labels.values()), key=str)
    jumps = [s for s in S.positive if is_jump(S, s)]
    added = []
    if not jumps:
        return DenseRepresentation(space, labels, added, True)
    changed = True
    while changed:
        changed = False
        for s in jumps:
            for cls in jump_classes(space, s).classes:
                present = {labels[p] for p in cls}
                for name in names:
                    if name not in present:
                        rep = cls[0]
                        space = realize_extension(space, KatetovVector((rep,), (S.min_positive,)), S)
                        z = space.points[-1]
                        labels[z] = name
                        added.append((z, name, s, rep))
                        changed = True
            if changed:
                break
    return DenseRepresentation(space, labels, added, False)


def grow_classes(space: FiniteMetricSpace, s, size: int, S: Spectrum) -> FiniteMetricSpace:
    """Add points at the least positive distance from each class of
    ``d <= s`` until every class has at least ``size`` points."""
    s = as_rational(s)
    if S.min_positive > s:
        raise ValueError("the least positive distance must not exceed s")
    for cls in jump_classes(space, s).classes:
        rep = cls[0]
        for _ in range(size - len(cls)):
            space = realize_extension(space, KatetovVector((rep,), (S.min_positive,)), S)
    return space
