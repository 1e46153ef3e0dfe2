"""Acceptance suite.  Each test carries ``criterion(n, title)``; the summary
printed at the end of the run has one PASS/FAIL line per criterion."""

from __future__ import annotations

import random
import time
from fractions import Fraction
from itertools import combinations, product

import pytest
from networkx.algorithms.isomorphism import GraphMatcher

from support import (
    all_completions,
    cover_oracle,
    cube_ultrametric,
    distinguishing_oracle,
    four_values_oracle,
    gap_oracle,
    graph_automorphisms_oracle,
    initial_oracle,
    involution_violations,
    is_metric_oracle,
    oplus_oracle,
    random_core,
    random_instance_spaces,
    random_space,
)
from urysohn import catalog
from urysohn.amalgamation import (
    amalgamate_bounded,
    amalgamate_oplus,
    amalgamate_search,
    make_instance,
    witness_instance,
)
from urysohn.builder import grow_classes, saturate
from urysohn.coloring import (
    StrategyKind,
    build_two_coloring,
    defeat_no_limit,
    defeat_zero_limit,
    dense_partition_involution,
    verify_certificate,
)
from urysohn.errors import Unamalgamable
from urysohn.gadgets import build_crab, build_crab_nest, build_rigid_tree, verify_crab, verify_crab_nest
from urysohn.metric import FiniteMetricSpace, s_distance_graph
from urysohn.spectrum import (
    LimitKind,
    Spectrum,
    check_four_values,
    cover,
    gap_at,
    is_initial,
    is_metric_triangle,
    is_metric_triangle_oplus,
    main_theorem_classify,
    oplus,
)
from urysohn.symmetry import Coloring, automorphism_group, distinguishing_number_exact, restricted_growth_colorings

F = Fraction


def criterion(n, title):
    return pytest.mark.criterion(n, title)


def small_cores(top: int, max_size: int):
    """Every core {0} + X with X a nonempty subset of {1..top}, |X| <= max_size."""
    for k in range(1, max_size + 1):
        for xs in combinations(range(1, top + 1), k):
            yield Spectrum([0, *xs])


def rational_cores(n: int, seed: int):
    rng = random.Random(seed)
    return [random_core(rng, max_size=7) for _ in range(n)]


@pytest.fixture(scope="module")
def oplus_corpus():
    return list(small_cores(12, 7)) + rational_cores(1000, 1)


def oplus_table(core: Spectrum):
    els = core.elements
    idx = {x: i for i, x in enumerate(els)}
    return els, [[idx[oplus(core, r, t)] for t in els] for r in els]


def assoc_failure(tab):
    n = len(tab)
    for a in range(n):
        row = tab[a]
        for b in range(n):
            ab = row[b]
            tb = tab[b]
            for c in range(n):
                if tab[ab][c] != row[tb[c]]:
                    return (a, b, c)
    return None


# --- 1 ----------------------------------------------------------------------


@criterion(1, "oplus commutative, monotone, associative on every core (exact)")
def test_oplus_algebra(oplus_corpus, detail):
    start = time.perf_counter()
    broken = []
    for core in oplus_corpus:
        els, tab = oplus_table(core)
        n = len(els)
        for i in range(n):
            for j in range(n):
                assert els[tab[i][j]] == oplus_oracle(els, els[i], els[j])
                assert tab[i][j] == tab[j][i]
                if j + 1 < n:
                    assert tab[i][j] <= tab[i][j + 1]
        bad = assoc_failure(tab)
        if bad is not None:
            broken.append((core, tuple(els[k] for k in bad)))
    elapsed = time.perf_counter() - start
    detail(f"{len(oplus_corpus)} cores, {len(broken)} non-associative, {elapsed:.1f}s")
    assert elapsed < 60
    if broken:
        core, (a, b, c) = broken[0]
        detail(f"first: {core.to_strings()} at ({a},{b},{c})")
    assert not broken, f"{len(broken)} cores are not associative, e.g. {broken[0][0].to_strings()}"


def test_associativity_fails_exactly_off_four_values(oplus_corpus):
    # Supports the criterion 1 analysis: the non-associative cores are
    # exactly those failing 4-values, compared against a brute-force oracle.
    mismatched = []
    four_values = 0
    for core in oplus_corpus:
        _, tab = oplus_table(core)
        fv = check_four_values(core).holds
        four_values += fv
        if (assoc_failure(tab) is None) != fv:
            mismatched.append(core.to_strings())
    assert mismatched == []
    assert four_values > 1000
    for xs in ([1, 2, 3, 5], [F(1, 12), F(1, 6), F(2, 7)], [1, 3, 9], [1, 2, 4]):
        core = Spectrum([0, *xs])
        assert four_values_oracle(core.elements) == (assoc_failure(oplus_table(core)[1]) is None)


# --- 2 ----------------------------------------------------------------------


@criterion(2, "truncated-sum triangle test agrees with the real one")
def test_triangle_equivalence(oplus_corpus, detail):
    checked = 0
    for core in oplus_corpus:
        pos = core.positive
        for a, b, c in product(pos, repeat=3):
            real = a <= b + c and b <= a + c and c <= a + b
            assert is_metric_triangle_oplus(core, a, b, c) == real == is_metric_triangle(a, b, c)
            checked += 1
    detail(f"{checked} triples")


# --- 3 ----------------------------------------------------------------------


@criterion(3, "4-values cores amalgamate; failing cores have unamalgamable witnesses")
def test_four_values_gives_amalgamation(detail):
    start = time.perf_counter()
    rng = random.Random(3)
    good = bad = 0
    for core in small_cores(6, 4):
        fv = check_four_values(core)
        assert fv.holds == four_values_oracle(core.elements)
        if fv.holds:
            good += 1
            for _ in range(200):
                A, B = random_instance_spaces(rng, core, max_side=5)
                inst = make_instance(A, B)
                out = amalgamate_search(inst, core).space
                assert is_metric_oracle(out)
                assert all(out.d(p, q) in core for p, q in out.pairs())
                assert out.restrict(A.points) == A and out.restrict(B.points) == B
        else:
            bad += 1
            inst = witness_instance(fv)
            with pytest.raises(Unamalgamable):
                amalgamate_search(inst, core)
            assert all_completions(inst, core) == []
    elapsed = time.perf_counter() - start
    detail(f"{good} good cores x 200 instances, {bad} witnesses, {elapsed:.0f}s")
    assert elapsed < 600


def four_values_cores(rng, n, max_size=5):
    out = []
    while len(out) < n:
        core = random_core(rng, max_size=max_size, integers=rng.random() < 0.5)
        if check_four_values(core).holds:
            out.append(core)
    return out


# --- 4 ----------------------------------------------------------------------


@criterion(4, "search completions are dominated by the truncated-sum amalgam")
def test_oplus_domination(detail):
    rng = random.Random(4)
    brute = 0
    for core in four_values_cores(rng, 500):
        A, B = random_instance_spaces(rng, core, max_side=5, min_common=1)
        inst = make_instance(A, B)
        top = amalgamate_oplus(inst, core).space
        assert is_metric_oracle(top)
        completions = [amalgamate_search(inst, core).space]
        completions += [amalgamate_search(inst, core, rng=random.Random(i)).space for i in range(3)]
        for sp in completions:
            assert all(sp.d(a, b) <= top.d(a, b) for a, b in inst.new_pairs)
        if len(inst.new_pairs) <= 4:
            brute += 1
            every = all_completions(inst, core)
            assert every
            assert all(v <= top.d(*p) for c in every for p, v in c.items())
            assert {p: top.d(*p) for p in inst.new_pairs} in every
    detail(f"500 instances, {brute} checked against every completion")


# --- 5 ----------------------------------------------------------------------


@criterion(5, "bounded amalgam is metric, in spectrum and >= s across")
def test_bounded_amalgamation(detail):
    rng = random.Random(5)
    empty = 0
    for core in four_values_cores(rng, 500):
        A, B = random_instance_spaces(rng, core, max_side=5)
        inst = make_instance(A, B)
        limit = min(
            (A.d(a, x) + B.d(x, b) for a in inst.only_a for x in inst.common for b in inst.only_b),
            default=None,
        )
        choices = [s for s in core.positive if limit is None or s <= limit]
        s = rng.choice(choices)
        empty += not inst.common
        out = amalgamate_bounded(inst, core, s).space
        assert is_metric_oracle(out)
        assert all(out.d(p, q) in core for p, q in out.pairs())
        assert all(out.d(a, b) >= s for a, b in inst.new_pairs)
        assert out.restrict(A.points) == A and out.restrict(B.points) == B
    detail(f"500 instances, {empty} with empty common part")


# --- 6 ----------------------------------------------------------------------


@criterion(6, "close consecutive elements have an initial cover")
def test_cover_initiality(detail):
    cores = pairs = 0
    for core in small_cores(9, 5):
        if not check_four_values(core).holds:
            continue
        cores += 1
        els = core.elements
        pos = core.positive
        for r, t in zip(pos, pos[1:]):
            if 2 * r < t:
                continue
            c = cover(core, r, t)
            assert c == cover_oracle(els, r, t)
            assert is_initial(core, c) and initial_oracle(els, c)
            pairs += 1
    detail(f"{cores} cores, {pairs} pairs")


# --- 7 ----------------------------------------------------------------------


def nx_order_at_most(graph, cap: int = 2) -> int:
    g = graph.to_networkx()
    n = 0
    for _ in GraphMatcher(g, g).isomorphisms_iter():
        n += 1
        if n >= cap:
            break
    return n


@criterion(7, "crabs of heft 5 and 6 are rigid")
@pytest.mark.parametrize("heft", [5, 6])
def test_crab_rigidity(heft, detail):
    crab = build_crab(heft)
    start = time.perf_counter()
    report = automorphism_group(crab.graph)
    elapsed = time.perf_counter() - start
    assert report.order == 1
    assert elapsed < 60
    check = verify_crab(crab.graph, heft)
    assert check.ok, check.first_failure
    assert nx_order_at_most(crab.graph) == 1
    detail(f"heft {heft}: {len(crab.graph)} vertices, {elapsed:.2f}s")


# --- 8 ----------------------------------------------------------------------


@criterion(8, "crab nests (5,8) and (5,8,11) are rigid")
@pytest.mark.parametrize("hefts", [(5, 8), (5, 8, 11)])
def test_crab_nest_rigidity(hefts, detail):
    start = time.perf_counter()
    nest = build_crab_nest(hefts)
    report = automorphism_group(nest.graph)
    elapsed = time.perf_counter() - start
    assert report.order == 1
    check = verify_crab_nest(nest)
    assert check.ok, check.first_failure
    assert elapsed < 300
    detail(f"{hefts}: {len(nest.graph)} vertices, {elapsed:.1f}s")


# --- 9 ----------------------------------------------------------------------


def cycle_metric(n: int) -> FiniteMetricSpace:
    return FiniteMetricSpace.from_function(range(n), lambda p, q: min((p - q) % n, (q - p) % n))


@criterion(9, "distinguishing numbers of C5, K_n and rigid trees")
def test_distinguishing_fixtures():
    c5 = cycle_metric(5)
    assert distinguishing_number_exact(c5).d == 3 == distinguishing_oracle(c5)
    for n in range(1, 7):
        kn = FiniteMetricSpace.from_function(range(n), lambda p, q: 1)
        assert distinguishing_number_exact(kn, max_d=7).d == n
        if n <= 4:
            assert distinguishing_oracle(kn) == n
    forbidden = []
    for size in (7, 8, 9):
        tree = build_rigid_tree(size, forbidden)
        forbidden.append(tree)
        assert distinguishing_number_exact(tree).d == 1
        assert nx_order_at_most(tree) == 1
        if len(tree) <= 8:
            assert graph_automorphisms_oracle(list(tree.vertices), list(tree.edges())) == 1


# --- 10 ---------------------------------------------------------------------


def separated_by(space: FiniteMetricSpace, marked) -> bool:
    mset = set(marked)
    rest = [p for p in space.points if p not in mset]
    sig = {tuple(space.d(p, m) for m in marked) for p in rest}
    return len(sig) == len(rest)


@criterion(10, "two-coloring certificates for the three finite-answer strategies")
@pytest.mark.parametrize(
    "name, kind",
    [
        ("zero-one-two", StrategyKind.BOUND_BELOW),
        ("positive-limit", StrategyKind.CRAB_NEST),
        ("positive-limit-forest", StrategyKind.FOREST),
    ],
)
def test_two_coloring_certificates(name, kind, detail):
    start = time.perf_counter()
    cert = build_two_coloring(catalog.get(name).spectrum)
    elapsed = time.perf_counter() - start
    assert cert.strategy.kind is kind
    assert len(cert.space) >= 40
    assert cert.report.order == 1
    check = verify_certificate(cert.to_json())
    assert check.ok, check.problems
    assert elapsed < 600
    # Dual route: the marked s-graph is rigid and the marked points separate
    # the rest, so any color-preserving isometry fixes everything.
    marked = [p for p, c in cert.coloring.assignment.items() if c == 1]
    graph = s_distance_graph(cert.space.restrict(marked), cert.strategy.s)
    if kind is StrategyKind.CRAB_NEST:
        # each component is a crab of exactly one heft, no heft repeated
        hefts = []
        for comp in graph.connected_components():
            sub = graph.induced(comp)
            hefts.append([h for h in range(3, 15) if verify_crab(sub, h).ok])
        assert all(len(h) == 1 for h in hefts)
        assert len({h[0] for h in hefts}) == len(hefts)
    else:
        assert nx_order_at_most(graph) == 1
    assert separated_by(cert.space, marked)
    detail(f"{name}: {len(cert.space)} points, {len(marked)} marked, {elapsed:.0f}s")


# --- 11 and 12 ----------------------------------------------------------------


def defeater_fixture(name: str):
    ps = catalog.get(name).spectrum
    S = ps.core
    space = grow_classes(saturate(S, 1, max_points=3, fill=False).space, S.min_positive, 5, S)
    return ps, space


def preserves_coloring_oracle(space, full, coloring) -> bool:
    pts = space.points
    if sorted(map(repr, full.values())) != sorted(map(repr, pts)):
        return False
    if all(full[p] == p for p in pts):
        return False
    if any(coloring[p] != coloring[full[p]] for p in pts):
        return False
    return all(space.d(full[p], full[q]) == space.d(p, q) for p, q in combinations(pts, 2))


@pytest.fixture(scope="module")
def defeater_sweep():
    out = {}
    for name in ("unit", "powers-of-three", "geometric-small"):
        ps, space = defeater_fixture(name)
        defeat = defeat_zero_limit if ps.profile.kind is LimitKind.ZERO_LIMIT else defeat_no_limit
        start = time.perf_counter()
        found, bad = [], []
        for d in (1, 2, 3):
            for seq in restricted_growth_colorings(len(space), d, exact=True):
                col = Coloring.from_sequence(space.points, seq, d)
                try:
                    dfe = defeat(space, col, ps.core)
                except Exception as exc:  # noqa: BLE001
                    bad.append((seq, repr(exc)))
                    continue
                if not preserves_coloring_oracle(space, dfe.full_map(space), col):
                    bad.append((seq, "invalid"))
                found.append((col, dfe))
        out[name] = (space, found, bad, time.perf_counter() - start)
    return out


@criterion(11, "every coloring with at most 3 colors is defeated")
@pytest.mark.parametrize("name", ["unit", "powers-of-three", "geometric-small"])
def test_infinite_case_defeaters(name, defeater_sweep, detail):
    space, found, bad, elapsed = defeater_sweep[name]
    assert main_theorem_classify(catalog.get(name).spectrum).value == "omega"
    assert bad == []
    assert elapsed < 600
    kinds = sorted({d.kind for _, d in found})
    detail(f"{name}: {len(space)} points, {len(found)} colorings, {'/'.join(kinds)}, {elapsed:.1f}s")


@criterion(12, "dense involutions are class-preserving isometric involutions")
def test_dense_involution_contract(defeater_sweep, detail):
    space, found, _, _ = defeater_sweep["geometric-small"]
    checked = 0
    for col, dfe in found:
        if dfe.kind != "dense_involution":
            continue
        parts = [[p for p in dfe.domain if col[p] == c] for c in range(col.d)]
        parts = [pt for pt in parts if pt]
        assert involution_violations(space, dfe.mapping, parts, dfe.s, dfe.domain) == []
        checked += 1
    cube = cube_ultrametric()
    S = Spectrum([0, F(1, 9), F(1, 3), 1])
    for bits in range(256):
        assign = {p: (bits >> i) & 1 for i, p in enumerate(cube.points)}
        parts = [[p for p in cube.points if assign[p] == c] for c in (0, 1)]
        parts = [pt for pt in parts if pt]
        for s in (F(1, 3), F(1)):
            try:
                dfe = dense_partition_involution(cube, parts, s, S)
            except Exception:  # noqa: BLE001
                continue
            assert involution_violations(cube, dfe.mapping, parts, s) == []
            checked += 1
    assert checked > 0
    detail(f"{checked} involutions")


# --- 13 ---------------------------------------------------------------------


def verdict_oracle(ps) -> str:
    kind = ps.profile.kind
    if kind is LimitKind.POSITIVE_LIMIT:
        return "two"
    if kind is LimitKind.ZERO_LIMIT:
        return "two" if ps.profile.vanishing_gaps_at_infinity else "omega"
    p = ps.core.min_positive
    close = any(0 < b - a <= p for a in ps.core.positive for b in ps.core.positive)
    return "two" if close else "omega"


@criterion(13, "classifier matches the case table on the catalog")
def test_classifier_conformance(detail):
    seen = set()
    case_of = {LimitKind.POSITIVE_LIMIT: 1, LimitKind.ZERO_LIMIT: 2, LimitKind.NO_LIMIT: 3}
    for name in catalog.names():
        ps = catalog.get(name).spectrum
        v = main_theorem_classify(ps)
        assert v.case == case_of[ps.profile.kind]
        assert v.value == verdict_oracle(ps)
        seen.add((v.case, v.value))
    assert seen == {(1, "two"), (2, "two"), (2, "omega"), (3, "two"), (3, "omega")}
    detail(f"{len(catalog.names())} entries")


# --- 14 ---------------------------------------------------------------------


@criterion(14, "points closer than the gap see the same distances")
def test_gap_property(detail):
    rng = random.Random(14)
    triples = 0
    for _ in range(1000):
        core = random_core(rng, max_size=5)
        space = random_space(rng, core, rng.randint(2, 6))
        els = core.elements
        for x, y, z in product(space.points, repeat=3):
            xz = space.d(x, z)
            g = gap_at(core, xz)
            assert g == gap_oracle(els, xz)
            if space.d(x, y) < g:
                assert xz == space.d(y, z)
                triples += 1
    detail(f"1000 spaces, {triples} triples under the gap")
