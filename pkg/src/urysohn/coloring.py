"""Distinguishing 2-colorings by gadget stabilization, and color-preserving
automorphisms that defeat every finite coloring when none exists."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Optional, Sequence

from .amalgamation import amalgamate_oplus, make_instance
from .builder import saturate
from .errors import (
    BudgetExceeded,
    ClassTooSmall,
    DensityUnmet,
    InvariantBroken,
    NoQualifyingParameters,
    NoSuitableClass,
    StrategyRefused,
    TruncationTooShallow,
)
from .gadgets import (
    CrabNest,
    build_crab,
    build_rigid_tree,
    gadget_metric,
    heft_schedule,
    tree_canonical_form,
    tree_endpoint,
    verify_crab_nest,
)
from .graph import SimpleGraph
from .metric import FiniteMetricSpace, density_report, jump_classes, s_distance_graph, validate
from .spectrum import (
    LimitKind,
    ProfiledSpectrum,
    Spectrum,
    as_rational,
    format_rational,
    is_initial,
    is_jump,
    main_theorem_classify,
)
from .symmetry import (
    Coloring,
    automorphism_group,
    color_preserving_automorphisms,
    is_automorphism,
    is_rigid,
)

__all__ = [
    "StrategyKind",
    "Strategy",
    "plan_strategy",
    "select_ht_kt",
    "StabilizerState",
    "stabilize_pair",
    "DistinguishingCertificate",
    "build_two_coloring",
    "CertificateCheck",
    "verify_certificate",
    "Defeater",
    "defeat_no_limit",
    "dense_partition_involution",
    "defeat_zero_limit",
    "FINITE_SCALE_CAVEAT",
]

FINITE_SCALE_CAVEAT = (
    "finite-scale result: this certifies the built finite approximation under "
    "the given coloring, not the infinite homogeneous space itself"
)


def _fmt(q):
    return None if q is None else format_rational(q)


# ---------------------------------------------------------------------------
# strategy
# ---------------------------------------------------------------------------


class StrategyKind(str, enum.Enum):
    FOREST = "forest"
    CRAB_NEST = "crab_nest"
    BOUND_BELOW = "bound_below"
    INFINITE_DEFEAT = "infinite_defeat"


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind
    core: Spectrum
    s: Optional[Fraction] = None  # gadget edge distance
    r: Optional[Fraction] = None  # gadget non-edge distance; the limit for crab nests
    s1: Optional[Fraction] = None  # s' (crab nest)
    s2: Optional[Fraction] = None  # s'' (crab nest)
    nonedge: Optional[Fraction] = None  # crab gadget non-edge distance
    limit: Optional[Fraction] = None
    notes: tuple = ()

    @property
    def gadget_nonedge(self) -> Fraction:
        return self.nonedge if self.kind is StrategyKind.CRAB_NEST else self.r

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "s": _fmt(self.s),
            "r": _fmt(self.r),
            "s_prime": _fmt(self.s1),
            "s_double_prime": _fmt(self.s2),
            "gadget_nonedge": _fmt(self.gadget_nonedge) if self.s is not None else None,
            "limit": _fmt(self.limit),
            "notes": list(self.notes),
        }


def _forest_parameters(core: Spectrum, below: Optional[Fraction] = None):
    """Smallest positive non-jump ``s`` (below ``below`` if given) whose
    successor ``r`` is in the core, so that ``s < r <= 2s``."""
    for s in core.positive:
        if below is not None and s >= below:
            break
        if not is_jump(core, s) and s != core.max:
            return s, core.successor(s)
    return None


def plan_strategy(ps: ProfiledSpectrum) -> Strategy:
    """Pick the stabilization construction (or infinite defeat) for a profiled
    spectrum."""
    verdict = main_theorem_classify(ps)
    core = ps.core
    if not verdict.is_two:
        return Strategy(StrategyKind.INFINITE_DEFEAT, core, notes=(verdict.rationale,))
    kind = ps.profile.kind
    if kind is LimitKind.POSITIVE_LIMIT:
        lim = ps.profile.limit_value
        fp = _forest_parameters(core, below=lim)
        if fp is not None:
            return Strategy(StrategyKind.FOREST, core, fp[0], fp[1], limit=lim)
        inside = core.between(lim, 2 * lim, lo_open=True, hi_open=True)
        if len(inside) < 3:
            raise NoQualifyingParameters(
                f"need three core elements in ({format_rational(lim)}, {format_rational(2 * lim)}), "
                f"found {len(inside)}"
            )
        s, s1, s2 = inside[-3:]
        if lim in core:
            nonedge = lim
        else:
            nonedge = min(q for q in core.positive if q > lim and q != s)
        if max(s, nonedge) > 2 * min(s, nonedge):
            raise NoQualifyingParameters("crab gadget distances are not metrizable")
        return Strategy(StrategyKind.CRAB_NEST, core, s, lim, s1, s2, nonedge, lim)
    if kind is LimitKind.NO_LIMIT:
        a, b = verdict.witness
        p = core.min_positive
        for s in core.positive:
            if is_initial(core, s) and not is_jump(core, s) and s != core.max:
                r = core.successor(s)
                if r - s <= p:
                    notes = ()
                    if (s, r) != (a, b):
                        notes = (
                            f"bounded-below pair ({format_rational(s)}, {format_rational(r)}) "
                            f"differs from the classifier witness ({format_rational(a)}, {format_rational(b)})",
                        )
                    return Strategy(StrategyKind.BOUND_BELOW, core, s, r, notes=notes)
                break
        fp = _forest_parameters(core)
        if fp is None:
            raise NoQualifyingParameters("no non-jump element with a successor in the core")
        return Strategy(
            StrategyKind.FOREST, core, fp[0], fp[1],
            notes=("smallest initial non-jump has successor gap above p; using forest parameters",),
        )
    fp = _forest_parameters(core)
    if fp is None:
        raise NoQualifyingParameters("no non-jump element with a successor in the core")
    return Strategy(StrategyKind.FOREST, core, fp[0], fp[1])


def select_ht_kt(strategy: Strategy, t) -> tuple[Fraction, Fraction]:
    """Distances ``(h_t, k_t)`` from the gadget anchor to a pair at distance
    ``t``; always ``h_t < k_t`` and ``k_t - h_t <= t <= h_t + k_t``."""
    t = as_rational(t)
    core = strategy.core
    kind = strategy.kind
    if kind is StrategyKind.BOUND_BELOW:
        s, r = strategy.s, strategy.r
        return (s, r) if t <= r else (r, t)
    if kind is StrategyKind.CRAB_NEST:
        r, s = strategy.r, strategy.s
        if t >= 2 * r:
            return strategy.s1, t
        if t >= r:
            return strategy.s1, strategy.s2
        inner = core.between(r, s, lo_open=True, hi_open=True) + (s,)
        best = None
        for h, k in zip(inner, inner[1:]):
            if k - h <= t and k < s:
                best = (h, k)
        if best is None:
            raise NoQualifyingParameters(
                f"no consecutive core elements in ({format_rational(r)}, {format_rational(s)}) within {format_rational(t)}"
            )
        return best
    if kind is StrategyKind.FOREST:
        pos = core.positive
        lim = strategy.limit
        best, best_key = None, None
        for h, k in zip(pos, pos[1:]):
            if h <= strategy.s or not (k - h <= t <= h + k):
                continue
            key = (abs(h - lim) + abs(k - lim), h) if lim is not None else (k - h, h)
            if best_key is None or key < best_key:
                best, best_key = (h, k), key
        if best is None:
            raise NoQualifyingParameters(f"no anchor distances for t = {format_rational(t)}")
        return best
    raise NoQualifyingParameters(f"strategy {kind.value} has no anchor distances")


# ---------------------------------------------------------------------------
# stabilization
# ---------------------------------------------------------------------------


@dataclass
class GadgetRecord:
    kind: str  # "tree" | "crab"
    graph: SimpleGraph  # on space labels
    anchor: object
    shape: str  # canonical tree form, or "crab:<heft>"
    heft: Optional[int] = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "shape": self.shape, "anchor": self.anchor, "points": list(self.graph.vertices)}


@dataclass
class StabilizerState:
    strategy: Strategy
    space: FiniteMetricSpace
    M: list = field(default_factory=list)
    gadgets: list = field(default_factory=list)
    log: list = field(default_factory=list)

    def expected_graph(self) -> SimpleGraph:
        verts, edges = [], []
        for g in self.gadgets:
            verts.extend(g.graph.vertices)
            edges.extend(g.graph.edges())
        return SimpleGraph(verts, edges)

    def separator(self, x, y):
        for z in self.M:
            if self.space.d(x, z) != self.space.d(y, z):
                return z
        return None


def _gadget(state: StabilizerState, index: int) -> GadgetRecord:
    strat = state.strategy
    if strat.kind is StrategyKind.CRAB_NEST:
        heft = heft_schedule(index + 1)[-1]
        crab = build_crab(heft)
        lab = {v: f"g{index}:{i}" for i, v in enumerate(crab.graph.vertices)}
        g = crab.graph.relabel(lab)
        return GadgetRecord("crab", g, lab[crab.designated_end_vertex], f"crab:{heft}", heft)
    used = [
        SimpleGraph(range(len(g.graph)), [(g.graph.position(u), g.graph.position(v)) for u, v in g.graph.edges()])
        for g in state.gadgets
    ]
    tree = build_rigid_tree(7, forbidden=used)
    lab = {v: f"g{index}:{v}" for v in tree.vertices}
    return GadgetRecord("tree", tree.relabel(lab), lab[tree_endpoint(tree)], tree_canonical_form(tree))


def _verify_state(state: StabilizerState, pair, anchor) -> list[str]:
    strat = state.strategy
    problems = []
    sub = state.space.restrict(state.M)
    actual = s_distance_graph(sub, strat.s)
    expected = state.expected_graph()
    x, y = pair
    if state.space.d(x, anchor) == state.space.d(y, anchor):
        problems.append(f"anchor {anchor!r} does not separate {pair!r}")
    if strat.kind is StrategyKind.CRAB_NEST:
        extra = [e for e in actual.edges() if not expected.has_edge(*e)]
        nest = CrabNest(
            actual,
            tuple(g.graph.vertices for g in state.gadgets),
            tuple(g.heft for g in state.gadgets),
            tuple(g.anchor for g in state.gadgets),
        )
        rep = verify_crab_nest(nest)
        if not rep.ok:
            problems.append(f"crab nest clause {rep.first_failure} fails ({len(extra)} cross edges)")
        low = [(p, q) for p, q in sub.pairs() if sub.d(p, q) < strat.r]
        if low:
            problems.append(f"M-distance below r at {low[0]!r}")
    else:
        if actual != expected:
            problems.append("s-distance graph of M is not the registered forest")
        elif not actual.is_forest():
            problems.append("s-distance graph of M has a cycle")
    if not problems and not is_rigid(actual):
        problems.append("s-distance graph of M is not rigid")
    return problems


def stabilize_pair(state: StabilizerState, pair) -> StabilizerState:
    """Make sure some point of M separates ``pair``, attaching a fresh rigid
    gadget through a three-point anchor space if none does."""
    x, y = pair
    z = state.separator(x, y)
    if z is not None:
        state.log.append({"pair": [x, y], "action": "separated", "by": z})
        return state
    strat = state.strategy
    S = strat.core
    t = state.space.d(x, y)
    h, k = select_ht_kt(strat, t)
    gadget = _gadget(state, len(state.gadgets))
    e = gadget.anchor
    T = FiniteMetricSpace.from_pairs([x, y, e], {(x, y): t, (e, x): h, (e, y): k})
    C = gadget_metric(gadget.graph, strat.s, strat.gadget_nonedge).space
    C1 = amalgamate_oplus(make_instance(T, C), S).space
    state.space = amalgamate_oplus(make_instance(state.space, C1), S).space
    state.M.extend(gadget.graph.vertices)
    state.gadgets.append(gadget)
    entry = {
        "pair": [x, y],
        "action": "attached",
        "t": format_rational(t),
        "h": format_rational(h),
        "k": format_rational(k),
        "r_prime": format_rational(min(strat.gadget_nonedge, h)),
        "gadget": gadget.to_json() | {"points": len(gadget.graph)},
    }
    state.log.append(entry)
    problems = _verify_state(state, pair, e)
    if problems:
        raise InvariantBroken("; ".join(problems), transcript=state.log)
    return state


@dataclass
class DistinguishingCertificate:
    strategy: Strategy
    space: FiniteMetricSpace
    coloring: Coloring
    report: object  # AutomorphismReport of the color-preserving group
    transcript: list
    ambient: tuple

    @property
    def accepted(self) -> bool:
        return self.report.is_trivial

    def to_json(self) -> dict:
        return {
            "type": "distinguishing_certificate",
            "caveat": FINITE_SCALE_CAVEAT,
            "spectrum": self.strategy.core.to_strings(),
            "strategy": self.strategy.to_json(),
            "space": self.space.to_json(),
            "coloring": self.coloring.to_json(),
            "ambient_points": list(self.ambient),
            "verification": self.report.to_json(),
            "transcript": self.transcript,
        }


def build_two_coloring(
    ps: ProfiledSpectrum,
    *,
    ambient_points: Optional[int] = None,
    ambient_k: int = 1,
    min_points: int = 40,
    max_points: int = 5000,
    seed: int = 0,
    max_nodes: int = 500_000,
) -> DistinguishingCertificate:
    """Color a finite approximation with 2 colors so that only the identity
    preserves the coloring: M gets color 1, everything else color 0."""
    strat = plan_strategy(ps)
    if strat.kind is StrategyKind.INFINITE_DEFEAT:
        raise StrategyRefused(f"no distinguishing 2-coloring: {strat.notes[0]}")
    S = ps.core
    if ambient_points is None:
        ambient_points = 4 if strat.kind is StrategyKind.CRAB_NEST else 24
    ambient = saturate(S, ambient_k, max_points=ambient_points, seed=seed).space
    state = StabilizerState(strat, ambient)
    for pair in combinations(ambient.points, 2):
        state = stabilize_pair(state, pair)
        if len(state.space) > max_points:
            raise BudgetExceeded(f"approximation grew past {max_points} points", state.log)
    space = state.space
    if len(space) < min_points:
        raise BudgetExceeded(
            f"final approximation has {len(space)} < {min_points} points; enlarge the ambient space",
            state.log,
        )
    Mset = set(state.M)
    coloring = Coloring({p: int(p in Mset) for p in space.points}, 2)
    report = color_preserving_automorphisms(space, coloring, max_nodes=max_nodes)
    cert = DistinguishingCertificate(strat, space, coloring, report, state.log, ambient.points)
    if not cert.accepted:
        raise InvariantBroken(
            f"color-preserving group has order {report.order}", transcript=state.log
        )
    return cert


@dataclass
class CertificateCheck:
    ok: bool
    group: object  # AutomorphismReport of the colored space
    marked_graph_group: object  # AutomorphismReport of the s-distance graph of color 1
    unseparated: list
    problems: list

    def nontrivial_map(self) -> Optional[dict]:
        for rep in (self.group, self.marked_graph_group):
            if rep is not None and not rep.is_trivial:
                return {a: b for a, b in rep.generator_maps()[0].items() if a != b}
        return None

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "problems": self.problems,
            "color_preserving_group": self.group.to_json() if self.group else None,
            "marked_graph_group": self.marked_graph_group.to_json() if self.marked_graph_group else None,
            "unseparated_pairs": [list(p) for p in self.unseparated[:20]],
        }


def verify_certificate(data: Mapping, *, max_nodes: int = 500_000) -> CertificateCheck:
    """Re-check a serialized certificate from its space, coloring and gadget
    distance ``s``: the metric axioms, a trivial color-preserving group, a
    rigid s-distance graph on color 1, and a color-1 point separating every
    pair of color-0 points."""
    space = FiniteMetricSpace.from_json(data["space"])
    coloring = Coloring.from_json(data["coloring"])
    s = as_rational(data["strategy"]["s"])
    problems = [v.detail for v in validate(space, limit=5)]
    if set(coloring.assignment) != set(space.points):
        problems.append("coloring does not cover the space")
        return CertificateCheck(False, None, None, [], problems)
    if coloring.d > 2:
        problems.append(f"coloring uses {coloring.d} colors")
    group = color_preserving_automorphisms(space, coloring, max_nodes=max_nodes)
    if not group.is_trivial:
        problems.append(f"color-preserving group has order {group.order}")
    marked = [p for p in space.points if coloring[p] == 1]
    rest = [p for p in space.points if coloring[p] == 0]
    graph_group = automorphism_group(s_distance_graph(space.restrict(marked), s), max_nodes=max_nodes)
    if not graph_group.is_trivial:
        problems.append(f"s-distance graph of color 1 has {graph_group.order} automorphisms")
    unseparated = [
        (x, y) for x, y in combinations(rest, 2)
        if all(space.d(x, z) == space.d(y, z) for z in marked)
    ]
    if unseparated:
        problems.append(f"{len(unseparated)} color-0 pairs have no color-1 separator")
    return CertificateCheck(not problems, group, graph_group, unseparated, problems)


# ---------------------------------------------------------------------------
# defeaters
# ---------------------------------------------------------------------------


@dataclass
class Defeater:
    kind: str  # "transposition" | "dense_involution"
    mapping: dict  # moved points only
    coloring: Optional[Coloring]
    s: Optional[Fraction] = None
    domain: tuple = ()

    def full_map(self, space: FiniteMetricSpace) -> dict:
        return {p: self.mapping.get(p, p) for p in space.points}

    def to_json(self) -> dict:
        return {
            "type": "defeater",
            "kind": self.kind,
            "caveat": FINITE_SCALE_CAVEAT,
            "s": _fmt(self.s),
            "moved": [[a, b] for a, b in self.mapping.items()],
            "coloring": self.coloring.to_json() if self.coloring is not None else None,
        }


def _as_coloring(coloring) -> Coloring:
    if isinstance(coloring, Coloring):
        return coloring
    vals = dict(coloring)
    return Coloring(vals, max(vals.values()) + 1 if vals else 1)


def _checked(space, defeater: Defeater, coloring: Coloring) -> Defeater:
    full = defeater.full_map(space)
    if not defeater.mapping or all(a == b for a, b in full.items()):
        raise InvariantBroken("defeater is the identity")
    if not is_automorphism(space, full, coloring):
        raise InvariantBroken(f"{defeater.kind} is not a color-preserving automorphism")
    return defeater


def defeat_no_limit(space: FiniteMetricSpace, coloring, S: Spectrum) -> Defeater:
    """Swap two same-colored points of one class of ``d <= p`` (``p`` the least
    positive distance); all other points are equidistant from them."""
    coloring = _as_coloring(coloring)
    p = S.min_positive
    classes = jump_classes(space, p).classes
    for cls in classes:
        seen = {}
        for u in cls:
            c = coloring[u]
            if c in seen:
                v = seen[c]
                return _checked(space, Defeater("transposition", {v: u, u: v}, coloring, p), coloring)
            seen[c] = u
    biggest = max(len(c) for c in classes)
    raise ClassTooSmall(
        f"no class of d <= {format_rational(p)} repeats a color (largest class {biggest}, {coloring.d} colors)"
    )


def dense_partition_involution(
    space: FiniteMetricSpace,
    partition: Sequence[Sequence],
    s,
    S: Spectrum,
    *,
    domain: Optional[Sequence] = None,
    allow_fixed: bool = False,
    check_density: bool = True,
    max_nodes: int = 200_000,
) -> Defeater:
    """Involutive isometry ``f`` of ``space`` that maps each partition class to
    itself, moves every point of ``domain`` to a point at distance ``s``, and
    fixes everything outside ``domain``.

    The partition covers ``domain`` (default: all points).  Pairs are matched
    greedily in point order with backtracking; ``allow_fixed`` lets domain
    points stay put when no partner exists.
    """
    s = as_rational(s)
    dom = tuple(space.points if domain is None else domain)
    dset = set(dom)
    cls_of = {}
    for i, cls in enumerate(partition):
        for p in cls:
            if p not in dset:
                raise ValueError(f"partition point {p!r} lies outside the domain")
            cls_of[p] = i
    if set(cls_of) != dset:
        raise ValueError("partition must cover the domain")
    if check_density:
        sub = space.restrict(dom)
        for i, cls in enumerate(partition):
            rep = density_report(sub, cls, S)
            if not rep.dense:
                lvl, missed = rep.missing[0]
                raise DensityUnmet(
                    f"class {i} misses a class of d <= {format_rational(lvl)} (e.g. {missed[0]!r})"
                )
    fixed_out = [z for z in space.points if z not in dset]
    f: dict = {}
    nodes = 0
    d = space.d

    def fits(u, v) -> bool:
        if any(d(v, z) != d(u, z) for z in fixed_out):
            return False
        for a, b in f.items():
            if d(v, b) != d(u, a):
                return False
        return True

    def go(i: int) -> bool:
        nonlocal nodes
        while i < len(dom) and dom[i] in f:
            i += 1
        if i == len(dom):
            return True
        u = dom[i]
        for v in dom[i + 1:]:
            if v in f or cls_of[v] != cls_of[u] or d(u, v) != s:
                continue
            nodes += 1
            if nodes > max_nodes:
                raise BudgetExceeded(f"involution search exceeded {max_nodes} nodes", nodes)
            if fits(u, v) and all(d(u, b) == d(v, a) for a, b in f.items()):
                f[u], f[v] = v, u
                if go(i + 1):
                    return True
                del f[u], f[v]
        if allow_fixed and fits(u, u):
            f[u] = u
            if go(i + 1):
                return True
            del f[u]
        return False

    if not go(0):
        raise TruncationTooShallow(
            f"no class-preserving involution at distance {format_rational(s)} exists in this finite approximation"
        )
    moved = {a: b for a, b in f.items() if a != b}
    return Defeater("dense_involution", moved, None, s, dom)


def defeat_zero_limit(space: FiniteMetricSpace, coloring, S: Spectrum) -> Defeater:
    """Find a jump class on which the coloring is dense and build a
    class-preserving involution inside it; fall back to a transposition at
    the least positive distance."""
    coloring = _as_coloring(coloring)
    jumps = [q for q in S.positive if is_jump(S, q)]
    for level in reversed(jumps):
        finer = [q for q in jumps if q < level]
        if not finer:
            continue
        for cls in jump_classes(space, level).classes:
            if len(cls) < 2:
                continue
            parts = [[p for p in cls if coloring[p] == c] for c in range(coloring.d)]
            parts = [pt for pt in parts if pt]
            sub = space.restrict(cls)
            if not all(density_report(sub, pt, S).dense for pt in parts):
                continue
            for allow_fixed in (False, True):
                try:
                    dfe = dense_partition_involution(
                        space, parts, level, S, domain=cls, allow_fixed=allow_fixed, check_density=False
                    )
                except (TruncationTooShallow, BudgetExceeded):
                    continue
                if dfe.mapping:
                    dfe.coloring = coloring
                    return _checked(space, dfe, coloring)
    if jumps and jumps[0] == S.min_positive:
        try:
            return defeat_no_limit(space, coloring, S)
        except ClassTooSmall:
            pass
    raise NoSuitableClass("no jump class carries a dense coloring or a repeated color at the finest level")
