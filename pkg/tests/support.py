"""Independent oracles and random generators shared by the test modules.

Nothing here calls the code under test for the property being checked: the
oracles recompute definitions by brute force.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, permutations, product

from urysohn.metric import FiniteMetricSpace
from urysohn.spectrum import Spectrum


# --- spectrum oracles ------------------------------------------------------


def oplus_oracle(elements, r, t):
    return max(x for x in elements if x <= r + t)


def initial_oracle(elements, s):
    return not any(s / 2 <= x < s for x in elements)


def jump_oracle(elements, s):
    return not any(s < x <= 2 * s for x in elements)


def cover_oracle(elements, r, t):
    return min(x for x in elements if x >= abs(r - t))


def gap_oracle(elements, s):
    others = [abs(x - s) for x in elements if x != s]
    return min(others)


def four_values_oracle(elements) -> bool:
    """Try every 4-point configuration x, y, z, w over a common edge xy and
    check a metric completion d(z, w) exists, using only the triangle
    inequality on the full 4-point table."""
    pos = [x for x in elements if x > 0]

    def metric(table):
        pts = range(4)
        return all(
            table[i][j] <= table[i][k] + table[k][j]
            for i in pts for j in pts for k in pts
        )

    for m, a, b, c, e in product(pos, repeat=5):
        if not (a <= m + b and b <= m + a and m <= a + b):
            continue
        if not (c <= m + e and e <= m + c and m <= c + e):
            continue
        ok = False
        for d in pos:
            t = [[0, m, a, c], [m, 0, b, e], [a, b, 0, d], [c, e, d, 0]]
            if metric(t):
                ok = True
                break
        if not ok:
            return False
    return True


# --- metric oracles --------------------------------------------------------


def is_metric_oracle(space: FiniteMetricSpace) -> bool:
    pts = space.points
    for p, q in combinations(pts, 2):
        if space.d(p, q) <= 0 or space.d(p, q) != space.d(q, p):
            return False
    for p, q, r in permutations(pts, 3):
        if space.d(p, q) > space.d(p, r) + space.d(r, q):
            return False
    return True


def is_isometry_oracle(space: FiniteMetricSpace, mapping: dict) -> bool:
    pts = space.points
    if sorted(map(repr, mapping.values())) != sorted(map(repr, pts)):
        return False
    return all(space.d(mapping[p], mapping[q]) == space.d(p, q) for p, q in combinations(pts, 2))


def graph_automorphisms_oracle(vertices, edges) -> int:
    es = {frozenset(e) for e in edges}
    n = 0
    for perm in permutations(vertices):
        m = dict(zip(vertices, perm))
        if all(frozenset((m[u], m[v])) in es for u, v in map(tuple, es)):
            n += 1
    return n


def metric_automorphisms_oracle(space: FiniteMetricSpace) -> list[dict]:
    pts = space.points
    out = []
    for perm in permutations(pts):
        m = dict(zip(pts, perm))
        if all(space.d(m[p], m[q]) == space.d(p, q) for p, q in combinations(pts, 2)):
            out.append(m)
    return out


def distinguishing_oracle(space: FiniteMetricSpace, max_d: int = 6) -> int:
    autos = [a for a in metric_automorphisms_oracle(space) if any(k != v for k, v in a.items())]
    pts = space.points
    for d in range(1, max_d + 1):
        for colors in product(range(d), repeat=len(pts)):
            col = dict(zip(pts, colors))
            if all(any(col[p] != col[a[p]] for p in pts) for a in autos):
                return d
    raise AssertionError("exceeded max_d")


# --- random generators -----------------------------------------------------


def random_core(rng: random.Random, max_size: int = 6, integers: bool = False) -> Spectrum:
    size = rng.randint(1, max_size)
    vals = set()
    while len(vals) < size:
        if integers:
            vals.add(Fraction(rng.randint(1, 12)))
        else:
            vals.add(Fraction(rng.randint(1, 60), rng.randint(1, 12)))
    return Spectrum([0, *vals])


def random_space(rng: random.Random, S: Spectrum, n: int, labels=None) -> FiniteMetricSpace:
    """Points added one at a time, each at a uniformly chosen admissible
    distance vector to all previous points (never empty: the constant
    maximum vector is always admissible)."""
    labels = list(range(n)) if labels is None else list(labels)
    pos = S.positive
    rows: list[list[Fraction]] = []
    for i in range(n):
        options = []

        def grow(vec):
            j = len(vec)
            if j == i:
                options.append(tuple(vec))
                return
            for v in pos:
                if all(abs(v - vec[k]) <= rows[j][k] <= v + vec[k] for k in range(j)):
                    grow(vec + [v])

        grow([])
        vec = rng.choice(options)
        for j in range(i):
            rows[j].append(vec[j])
        rows.append(list(vec) + [Fraction(0)])
    return FiniteMetricSpace(labels, rows)


def random_extension(rng, S: Spectrum, base: FiniteMetricSpace, extra_labels) -> FiniteMetricSpace:
    """``base`` plus new points, each at a uniformly chosen admissible vector."""
    pos = S.positive
    space = base
    for lab in extra_labels:
        options = []
        pts = space.points

        def grow(vec):
            j = len(vec)
            if j == len(pts):
                options.append(tuple(vec))
                return
            for v in pos:
                if all(abs(v - vec[k]) <= space.d(pts[j], pts[k]) <= v + vec[k] for k in range(j)):
                    grow(vec + [v])

        grow([])
        space = space.extend(lab, dict(zip(pts, rng.choice(options))))
    return space


def random_instance_spaces(rng, S: Spectrum, max_side: int = 5, min_common: int = 0):
    """Two spaces sharing a common part (same labels), each with at most
    ``max_side`` points."""
    k = rng.randint(min_common, max(min_common, min(3, max_side - 1)))
    common = random_space(rng, S, k, [f"c{i}" for i in range(k)]) if k else None
    na = rng.randint(1, max_side - k)
    nb = rng.randint(1, max_side - k)
    if common is None:
        A = random_space(rng, S, na, [f"a{i}" for i in range(na)])
        B = random_space(rng, S, nb, [f"b{i}" for i in range(nb)])
    else:
        A = random_extension(rng, S, common, [f"a{i}" for i in range(na)])
        B = random_extension(rng, S, common, [f"b{i}" for i in range(nb)])
    return A, B


def all_completions(inst, S: Spectrum):
    """Every metric completion of an amalgamation instance (brute force)."""
    pairs = inst.new_pairs
    pos = S.positive
    out = []
    for vals in product(pos, repeat=len(pairs)):
        cross = dict(zip(pairs, vals))
        pts = list(inst.A.points) + list(inst.only_b)

        def d(p, q):
            if p == q:
                return Fraction(0)
            if (p, q) in cross:
                return cross[(p, q)]
            if (q, p) in cross:
                return cross[(q, p)]
            if p in inst.A and q in inst.A:
                return inst.A.d(p, q)
            return inst.B.d(p, q)

        if all(d(p, q) <= d(p, r) + d(r, q) for p, q, r in permutations(pts, 3)):
            out.append(cross)
    return out


# --- coloring fixtures and contracts --------------------------------------


def cube_ultrametric() -> FiniteMetricSpace:
    """Points of {0,1}^3 at distance 1, 1/3 or 1/9 according to the first
    differing coordinate."""
    pts = list(product((0, 1), repeat=3))
    scale = (Fraction(1), Fraction(1, 3), Fraction(1, 9))

    def dist(p, q):
        return next(scale[i] for i in range(3) if p[i] != q[i])

    return FiniteMetricSpace.from_function(pts, dist)


def involution_violations(space, mapping, partition, s, domain=None) -> list[str]:
    """Contract of a dense-partition involution: f o f = id, d(x, f(x)) = s on
    moved points of the domain, identity off the domain, classes preserved,
    distances preserved."""
    dom = set(space.points if domain is None else domain)
    f = {p: mapping.get(p, p) for p in space.points}
    out = []
    for p in space.points:
        if f[f[p]] != p:
            out.append(f"f(f({p!r})) != {p!r}")
        if p not in dom and f[p] != p:
            out.append(f"{p!r} moved outside the domain")
        if p in mapping and space.d(p, f[p]) != s:
            out.append(f"d({p!r}, f({p!r})) = {space.d(p, f[p])} != {s}")
    cls = {p: i for i, c in enumerate(partition) for p in c}
    for p in dom:
        if cls.get(p) != cls.get(f[p]):
            out.append(f"{p!r} leaves its class")
    for p, q in combinations(space.points, 2):
        if space.d(f[p], f[q]) != space.d(p, q):
            out.append(f"distance ({p!r}, {q!r}) not preserved")
            break
    return out
