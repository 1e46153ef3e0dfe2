"""Amalgamation of finite metric spaces over a spectrum: exhaustive search,
completion with a distance floor, and the canonical truncated-sum amalgam."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .errors import (
    BudgetExceeded,
    CommonPartDisagrees,
    EmptyCommonPart,
    HypothesisViolated,
    NotMetric,
    Unamalgamable,
)
from .metric import FiniteMetricSpace, require_metric, spectrum_of
from .spectrum import FourValuesVerdict, Spectrum, as_rational, format_rational, oplus

__all__ = [
    "AmalgamationInstance",
    "Provenance",
    "AmalgamResult",
    "make_instance",
    "witness_instance",
    "amalgamate_search",
    "amalgamate_bounded",
    "amalgamate_oplus",
]


@dataclass(frozen=True)
class AmalgamationInstance:
    A: FiniteMetricSpace
    B: FiniteMetricSpace  # already relabelled so shared points carry A's labels
    common: tuple  # shared points in A's order

    @property
    def only_a(self) -> tuple:
        shared = set(self.common)
        return tuple(p for p in self.A.points if p not in shared)

    @property
    def only_b(self) -> tuple:
        shared = set(self.common)
        return tuple(p for p in self.B.points if p not in shared)

    @property
    def new_pairs(self) -> list[tuple]:
        return [(a, b) for a in self.only_a for b in self.only_b]

    def to_json(self) -> dict:
        return {"A": self.A.to_json(), "B": self.B.to_json(), "common": list(self.common)}


def make_instance(
    A: FiniteMetricSpace, B: FiniteMetricSpace, identification: Optional[Mapping] = None
) -> AmalgamationInstance:
    """Glue ``B`` onto ``A``.

    ``identification`` maps B-labels to the A-labels they are identified with;
    by default points carrying the same label are identified.  Unidentified
    B-labels must not clash with A-labels.
    """
    if identification is None:
        identification = {p: p for p in B.points if p in A}
    ident = dict(identification)
    if len(set(ident.values())) != len(ident):
        raise ValueError("identification is not injective")
    for b, a in ident.items():
        if b not in B or a not in A:
            raise ValueError(f"identification {b!r} -> {a!r} names a missing point")
    clash = [p for p in B.points if p not in ident and p in A]
    if clash:
        raise ValueError(f"B-labels {clash!r} clash with A but are not identified")
    B2 = B.relabel(ident)
    common = tuple(p for p in A.points if p in set(ident.values()))
    for i, x in enumerate(common):
        for y in common[i + 1:]:
            if A.d(x, y) != B2.d(x, y):
                raise CommonPartDisagrees(x, y, A.d(x, y), B2.d(x, y))
    return AmalgamationInstance(A, B2, common)


def witness_instance(verdict: FourValuesVerdict) -> AmalgamationInstance:
    """The two triangles over a common edge named by a failed 4-values check."""
    if verdict.holds or verdict.witness is None:
        raise ValueError("verdict carries no witness")
    m, (a, b), (c, e) = verdict.witness
    A = FiniteMetricSpace.from_pairs(["x", "y", "z"], {("x", "y"): m, ("x", "z"): a, ("y", "z"): b})
    B = FiniteMetricSpace.from_pairs(["x", "y", "w"], {("x", "y"): m, ("x", "w"): c, ("y", "w"): e})
    return make_instance(A, B)


@dataclass(frozen=True)
class Provenance:
    kind: str  # "search" | "bounded_lift" | "oplus"
    floor: Optional[Fraction] = None
    raised: bool = False
    mu: object = None

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "bounded_lift":
            out["floor"] = format_rational(self.floor)
            out["raised"] = self.raised
        if self.kind == "oplus":
            out["mu"] = self.mu
        return out


@dataclass
class AmalgamResult:
    space: FiniteMetricSpace
    provenance: dict = field(default_factory=dict)  # (a, b) -> Provenance
    explored: int = 0

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "provenance": [
                {"pair": [a, b], "distance": format_rational(self.space.d(a, b)), **p.to_json()}
                for (a, b), p in self.provenance.items()
            ],
        }


def _require_in_spectrum(inst: AmalgamationInstance, S: Spectrum):
    for name, X in (("A", inst.A), ("B", inst.B)):
        outside = [v for v in spectrum_of(X) if v not in S]
        if outside:
            raise HypothesisViolated(f"{name} uses distances {outside} outside S")


def _glue(inst: AmalgamationInstance, cross: Mapping) -> FiniteMetricSpace:
    only_b = inst.only_b
    ext = {}
    for b in only_b:
        for p in inst.A.points:
            ext[(b, p)] = cross[(p, b)] if (p, b) in cross else inst.B.d(b, p)
    internal = {(u, v): inst.B.d(u, v) for i, u in enumerate(only_b) for v in only_b[i + 1:]}
    return inst.A.extend_many(only_b, ext, internal)


def _trivial(inst: AmalgamationInstance) -> Optional[AmalgamResult]:
    if not inst.only_b:
        return AmalgamResult(inst.A)
    if not inst.only_a:
        return AmalgamResult(inst.B)
    return None


def _complete(inst: AmalgamationInstance, S: Spectrum, floor: Fraction, max_nodes: int, rng=None):
    """First completion in the search order, or ``None`` after an exhaustive
    refutation.  Returns ``(assignment, explored)``.  With ``rng`` the value
    order of each pair is shuffled instead of largest-first."""
    A, B = inst.A, inst.B
    pairs = inst.new_pairs
    vals = [v for v in S.positive if v >= floor]
    cands = {}
    for a, b in pairs:
        lo, hi = Fraction(0), None
        for x in inst.common:
            da, db = A.d(a, x), B.d(x, b)
            lo = max(lo, abs(da - db))
            hi = da + db if hi is None else min(hi, da + db)
        cands[(a, b)] = [v for v in reversed(vals) if v >= lo and (hi is None or v <= hi)]
        if rng is not None:
            rng.shuffle(cands[(a, b)])
    # tightest pairs first; stable on the canonical pair order
    order = sorted(pairs, key=lambda p: len(cands[p]))
    only_a, only_b = inst.only_a, inst.only_b
    assigned: dict = {}
    explored = 0

    def consistent(a, b, v) -> bool:
        for z in only_a:
            if z != a and (z, b) in assigned:
                u, w = A.d(a, z), assigned[(z, b)]
                if not (v <= u + w and u <= v + w and w <= u + v):
                    return False
        for z in only_b:
            if z != b and (a, z) in assigned:
                u, w = assigned[(a, z)], B.d(z, b)
                if not (v <= u + w and u <= v + w and w <= u + v):
                    return False
        return True

    def go(k: int) -> bool:
        nonlocal explored
        if k == len(order):
            return True
        a, b = order[k]
        for v in cands[(a, b)]:
            explored += 1
            if explored > max_nodes:
                raise BudgetExceeded(f"amalgamation search exceeded {max_nodes} nodes", explored)
            if consistent(a, b, v):
                assigned[(a, b)] = v
                if go(k + 1):
                    return True
                del assigned[(a, b)]
        return False

    return (dict(assigned) if go(0) else None), explored


def amalgamate_search(
    inst: AmalgamationInstance, S: Spectrum, *, max_nodes: int = 1_000_000, rng=None
) -> AmalgamResult:
    """Complete the amalgam by backtracking over the new cross pairs.

    Pairs are tried tightest-interval first, values largest first (or in a
    shuffled order drawn from ``rng``).  Raises :class:`Unamalgamable` only
    after the search space is exhausted.
    """
    _require_in_spectrum(inst, S)
    done = _trivial(inst)
    if done:
        return done
    cross, explored = _complete(inst, S, Fraction(0), max_nodes, rng)
    if cross is None:
        raise Unamalgamable(f"no completion with distances in S ({explored} nodes)", explored)
    space = _glue(inst, cross)
    return AmalgamResult(space, {p: Provenance("search") for p in inst.new_pairs}, explored)


def amalgamate_bounded(inst: AmalgamationInstance, S: Spectrum, s, *, max_nodes: int = 1_000_000) -> AmalgamResult:
    """Completion in which every cross distance is at least ``s``.

    A completion ``D`` is found first and each cross distance is then lifted
    to ``max(D, s)``.  The result is validated; if the lift is not metric (S
    may fail 4-values) or the common part is empty, the floor is imposed
    inside the search instead.
    """
    s = as_rational(s)
    if s not in S:
        raise HypothesisViolated(f"floor {s} is not an element of S")
    _require_in_spectrum(inst, S)
    for a in inst.only_a:
        for x in inst.common:
            for b in inst.only_b:
                if s > inst.A.d(a, x) + inst.B.d(x, b):
                    raise HypothesisViolated(
                        f"s = {s} exceeds d({a!r},{x!r}) + d({x!r},{b!r}) = {inst.A.d(a, x) + inst.B.d(x, b)}"
                    )
    done = _trivial(inst)
    if done:
        return done
    explored = 0
    if inst.common:
        base, explored = _complete(inst, S, Fraction(0), max_nodes)
        if base is None:
            raise Unamalgamable(f"no completion with distances in S ({explored} nodes)", explored)
        lifted = {p: max(v, s) for p, v in base.items()}
        space = _glue(inst, lifted)
        try:
            require_metric(space, "lifted amalgam")
            prov = {p: Provenance("bounded_lift", s, base[p] < s) for p in inst.new_pairs}
            return AmalgamResult(space, prov, explored)
        except NotMetric:
            pass
    cross, more = _complete(inst, S, s, max_nodes)
    explored += more
    if cross is None:
        raise Unamalgamable(f"no completion with all cross distances >= {s}", explored)
    space = require_metric(_glue(inst, cross), "floored amalgam")
    return AmalgamResult(space, {p: Provenance("bounded_lift", s, False) for p in inst.new_pairs}, explored)


def amalgamate_oplus(inst: AmalgamationInstance, S: Spectrum) -> AmalgamResult:
    """``d(a, b) = min_x d(a, x) (+) d(x, b)`` over shared ``x``.

    The witness ``mu(a, b)`` is the minimizer with the smallest real sum,
    ties going to the earlier shared point.  The output is validated.
    """
    _require_in_spectrum(inst, S)
    done = _trivial(inst)
    if done:
        return done
    if not inst.common:
        raise EmptyCommonPart("truncated-sum amalgam needs a shared point; use amalgamate_search")
    cross, prov = {}, {}
    for a, b in inst.new_pairs:
        best = None
        for x in inst.common:
            da, db = inst.A.d(a, x), inst.B.d(x, b)
            key = (oplus(S, da, db), da + db)
            if best is None or key < best[0]:
                best = (key, x)
        cross[(a, b)] = best[0][0]
        prov[(a, b)] = Provenance("oplus", mu=best[1])
    space = require_metric(_glue(inst, cross), "truncated-sum amalgam")
    return AmalgamResult(space, prov)
