"""A minimal immutable simple graph with DOT export."""

from __future__ import annotations

from typing import Hashable, Iterable, Mapping


class SimpleGraph:
    """Undirected loopless graph on an ordered vertex sequence.

    The vertex order is the canonical order used for deterministic output.
    """

    __slots__ = ("vertices", "_adj", "_pos")

    def __init__(self, vertices: Iterable[Hashable], edges: Iterable = ()):
        self.vertices = tuple(vertices)
        self._pos = {v: i for i, v in enumerate(self.vertices)}
        if len(self._pos) != len(self.vertices):
            raise ValueError("duplicate vertex labels")
        adj = {v: set() for v in self.vertices}
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at {u!r}")
            if u not in adj or v not in adj:
                raise ValueError(f"edge ({u!r}, {v!r}) leaves the vertex set")
            adj[u].add(v)
            adj[v].add(u)
        self._adj = {v: frozenset(ns) for v, ns in adj.items()}

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v):
        return v in self._pos

    def __eq__(self, other):
        return (
            isinstance(other, SimpleGraph)
            and set(self.vertices) == set(other.vertices)
            and self._adj == other._adj
        )

    def __repr__(self):
        return f"SimpleGraph(|V|={len(self)}, |E|={self.num_edges})"

    def position(self, v) -> int:
        return self._pos[v]

    def neighbors(self, v) -> frozenset:
        return self._adj[v]

    def degree(self, v) -> int:
        return len(self._adj[v])

    def has_edge(self, u, v) -> bool:
        return v in self._adj.get(u, ())

    @property
    def num_edges(self) -> int:
        return sum(len(ns) for ns in self._adj.values()) // 2

    def edges(self) -> list[tuple]:
        """Edges as pairs in canonical (vertex-order) orientation and order."""
        pos = self._pos
        out = []
        for u in self.vertices:
            for v in self._adj[u]:
                if pos[u] < pos[v]:
                    out.append((u, v))
        out.sort(key=lambda e: (pos[e[0]], pos[e[1]]))
        return out

    def with_edges(self, extra: Iterable) -> "SimpleGraph":
        return SimpleGraph(self.vertices, list(self.edges()) + list(extra))

    def induced(self, subset: Iterable) -> "SimpleGraph":
        keep = set(subset)
        verts = [v for v in self.vertices if v in keep]
        return SimpleGraph(verts, [(u, v) for u, v in self.edges() if u in keep and v in keep])

    def relabel(self, mapping: Mapping) -> "SimpleGraph":
        return SimpleGraph(
            [mapping[v] for v in self.vertices],
            [(mapping[u], mapping[v]) for u, v in self.edges()],
        )

    def disjoint_union(self, other: "SimpleGraph") -> "SimpleGraph":
        return SimpleGraph(self.vertices + other.vertices, self.edges() + other.edges())

    def connected_components(self) -> list[tuple]:
        seen, comps = set(), []
        for root in self.vertices:
            if root in seen:
                continue
            comp, stack = [], [root]
            seen.add(root)
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in self._adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(tuple(sorted(comp, key=self._pos.__getitem__)))
        return comps

    def is_forest(self) -> bool:
        return self.num_edges == len(self) - len(self.connected_components())

    def is_tree(self) -> bool:
        return len(self) > 0 and self.is_forest() and len(self.connected_components()) == 1

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges())
        return g

    @classmethod
    def from_networkx(cls, g) -> "SimpleGraph":
        return cls(list(g.nodes()), list(g.edges()))

    def to_dot(self, name: str = "G", vertex_attrs: Mapping | None = None) -> str:
        lines = [f"graph {name} {{"]
        for v in self.vertices:
            attrs = ""
            if vertex_attrs and v in vertex_attrs:
                attrs = " [" + ", ".join(f'{k}="{val}"' for k, val in vertex_attrs[v].items()) + "]"
            lines.append(f'  "{v}"{attrs};')
        for u, v in self.edges():
            lines.append(f'  "{u}" -- "{v}";')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_json(cls, data) -> "SimpleGraph":
        verts = [tuple(v) if isinstance(v, list) else v for v in data["vertices"]]
        fix = lambda v: tuple(v) if isinstance(v, list) else v  # noqa: E731
        return cls(verts, [(fix(u), fix(v)) for u, v in data["edges"]])


def parse_dot(text: str) -> SimpleGraph:
    """Parse the undirected DOT subset written by :meth:`SimpleGraph.to_dot`
    (quoted or bare identifiers, ``--`` edges, attributes ignored)."""
    import re

    ident = r'"([^"]*)"|([A-Za-z0-9_.]+)'
    verts, edges = [], []
    seen = set()

    def add(v):
        if v not in seen:
            seen.add(v)
            verts.append(v)

    body = text[text.index("{") + 1 : text.rindex("}")]
    for stmt in re.split(r"[;\n]", body):
        stmt = re.sub(r"\[.*?\]", "", stmt).strip()
        if not stmt or "=" in stmt:
            continue
        parts = [p.strip() for p in stmt.split("--")]
        names = []
        for p in parts:
            m = re.fullmatch(ident, p)
            if not m:
                raise ValueError(f"cannot parse DOT statement {stmt!r}")
            names.append(m.group(1) if m.group(1) is not None else m.group(2))
        for n in names:
            add(n)
        edges.extend(zip(names, names[1:]))
    return SimpleGraph(verts, edges)
