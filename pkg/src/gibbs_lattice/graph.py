"""Finite graphs, edge/spin configurations and combinatorial primitives.

Graphs are immutable. Edges are indexed; parallel edges are allowed and
configurations always refer to edge indices, never to vertex pairs. When a
ghost vertex is present it is the last vertex and its edges occupy the index
range after the internal edges.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels
from .config import max_box_size


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeConfig:
    """Subset of the edges of a graph, stored as an integer bitmask.

    Bit ``i`` is set when edge ``i`` is open.
    """

    mask: int
    n_edges: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.n_edges:
            raise GraphError(f"mask {self.mask:#x} does not fit in {self.n_edges} edges")

    @classmethod
    def empty(cls, n_edges: int) -> EdgeConfig:
        return cls(0, n_edges)

    @classmethod
    def full(cls, n_edges: int) -> EdgeConfig:
        return cls((1 << n_edges) - 1, n_edges)

    @classmethod
    def from_edges(cls, edges: Iterable[int], n_edges: int) -> EdgeConfig:
        mask = 0
        for e in edges:
            if not 0 <= e < n_edges:
                raise GraphError(f"edge index {e} out of range")
            mask |= 1 << int(e)
        return cls(mask, n_edges)

    @classmethod
    def from_array(cls, bits) -> EdgeConfig:
        bits = np.asarray(bits).astype(bool)
        return cls.from_edges(np.flatnonzero(bits).tolist(), len(bits))

    @classmethod
    def from_hex(cls, text: str, n_edges: int) -> EdgeConfig:
        return cls(int(text, 16), n_edges)

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.n_edges, dtype=np.uint8)
        for e in self.open_edges():
            out[e] = 1
        return out

    def open_edges(self) -> list[int]:
        return [e for e in range(self.n_edges) if self.mask >> e & 1]

    def hex(self) -> str:
        width = max(1, (self.n_edges + 3) // 4)
        return format(self.mask, f"0{width}x")

    @property
    def n_open(self) -> int:
        return bin(self.mask).count("1")

    @property
    def n_closed(self) -> int:
        return self.n_edges - self.n_open

    def __contains__(self, e: int) -> bool:
        return bool(self.mask >> e & 1)

    def _check(self, other: EdgeConfig):
        if other.n_edges != self.n_edges:
            raise GraphError("configurations live on different edge sets")

    def __or__(self, other: EdgeConfig) -> EdgeConfig:
        self._check(other)
        return EdgeConfig(self.mask | other.mask, self.n_edges)

    def __and__(self, other: EdgeConfig) -> EdgeConfig:
        self._check(other)
        return EdgeConfig(self.mask & other.mask, self.n_edges)

    def __xor__(self, other: EdgeConfig) -> EdgeConfig:
        self._check(other)
        return EdgeConfig(self.mask ^ other.mask, self.n_edges)

    def issubset(self, other: EdgeConfig) -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0


@dataclass(frozen=True)
class SpinConfig:
    """A +-1 spin per vertex. The ghost spin, if any, is pinned to +1."""

    spins: tuple[int, ...]
    ghost: int | None = None

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.spins):
            raise GraphError("spins must be +1 or -1")
        if self.ghost is not None and self.spins[self.ghost] != 1:
            raise GraphError("ghost spin must be +1")

    @classmethod
    def from_array(cls, spins, ghost: int | None = None) -> SpinConfig:
        return cls(tuple(int(s) for s in spins), ghost)

    def to_array(self) -> np.ndarray:
        return np.array(self.spins, dtype=np.int8)

    def __getitem__(self, v: int) -> int:
        return self.spins[v]

    def __len__(self) -> int:
        return len(self.spins)


@dataclass(frozen=True)
class BoundaryCondition:
    """Partition of the boundary vertices; each block is identified to one vertex."""

    blocks: tuple[frozenset[int], ...]

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]]) -> BoundaryCondition:
        return cls(tuple(frozenset(int(v) for v in b) for b in blocks))

    @classmethod
    def free(cls, g: Graph) -> BoundaryCondition:
        return cls.of([v] for v in sorted(g.boundary))

    @classmethod
    def wired(cls, g: Graph) -> BoundaryCondition:
        return cls.of([sorted(g.boundary)]) if g.boundary else cls(())

    def validate(self, g: Graph) -> None:
        seen: set[int] = set()
        for block in self.blocks:
            if not block:
                raise GraphError("boundary condition has an empty block")
            if seen & block:
                raise GraphError("boundary condition blocks overlap")
            seen |= block
        if seen != set(g.boundary):
            raise GraphError("boundary condition does not cover exactly the boundary")


@dataclass(frozen=True)
class Graph:
    """Finite multigraph with optional ghost vertex, boundary and embedding.

    ``shifts`` holds the lattice displacement of each edge for tori, where the
    embedding alone cannot tell a wrap-around edge from a direct one.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    ghost: int | None = None
    boundary: frozenset[int] = frozenset()
    embedding: tuple[tuple[int, ...], ...] | None = None
    periods: tuple[int, ...] | None = None
    shifts: tuple[tuple[int, ...], ...] | None = None
    allow_loops: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        object.__setattr__(self, "boundary", frozenset(int(v) for v in self.boundary))
        n = self.n_vertices
        if n < 0:
            raise GraphError("negative vertex count")
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) has an invalid endpoint")
            if u == v and not self.allow_loops:
                raise GraphError(f"self-loop at vertex {u}")
        if not self.boundary <= set(range(n)):
            raise GraphError("boundary contains unknown vertices")
        if self.ghost is not None:
            if self.ghost != n - 1:
                raise GraphError("the ghost must be the last vertex")
            if self.ghost in self.boundary:
                raise GraphError("the ghost cannot be a boundary vertex")
            k = n - 1
            tail = self.edges[len(self.edges) - k:] if k else ()
            if len(self.edges) < k or sorted(min(e) for e in tail) != list(range(k)) or any(
                max(e) != self.ghost for e in tail
            ):
                raise GraphError("ghost edges must be the last n-1 edges, one per vertex")
            if any(self.ghost in e for e in self.edges[: len(self.edges) - k]):
                raise GraphError("internal edge touches the ghost")
        if self.embedding is not None and len(self.embedding) != len(self.real_vertices):
            raise GraphError("embedding must give coordinates for every non-ghost vertex")
        if self.shifts is not None and len(self.shifts) != len(self.edges):
            raise GraphError("shift table does not match edge count")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_internal_edges(self) -> int:
        return self.n_edges - (self.n_vertices - 1 if self.ghost is not None else 0)

    @property
    def ghost_edges(self) -> range:
        return range(self.n_internal_edges, self.n_edges)

    @property
    def real_vertices(self) -> range:
        return range(self.n_vertices - (1 if self.ghost is not None else 0))

    @property
    def dimension(self) -> int | None:
        if not self.embedding:
            return None
        return len(self.embedding[0])

    @cached_property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        eu = np.array([u for u, _ in self.edges], dtype=np.int32)
        ev = np.array([v for _, v in self.edges], dtype=np.int32)
        return eu, ev

    @cached_property
    def incidence(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR adjacency: (indptr, neighbour, edge id) over vertices."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_vertices)]
        for i, (u, v) in enumerate(self.edges):
            adj[u].append((v, i))
            if u != v:
                adj[v].append((u, i))
        indptr = np.zeros(self.n_vertices + 1, dtype=np.int32)
        indptr[1:] = np.cumsum([len(a) for a in adj])
        nbr = np.array([w for a in adj for w, _ in a], dtype=np.int32)
        eid = np.array([i for a in adj for _, i in a], dtype=np.int32)
        return indptr, nbr, eid

    @cached_property
    def coordinate_index(self) -> dict[tuple[int, ...], int]:
        if self.embedding is None:
            raise GraphError("graph has no embedding")
        return {c: i for i, c in enumerate(self.embedding)}

    def vertex(self, ref) -> int:
        """Resolve a vertex given by index or by coordinates."""
        if isinstance(ref, (list, tuple)):
            try:
                return self.coordinate_index[tuple(int(c) for c in ref)]
            except KeyError:
                raise GraphError(f"no vertex at coordinates {tuple(ref)}") from None
        v = int(ref)
        if not 0 <= v < self.n_vertices:
            raise GraphError(f"vertex {v} does not exist")
        return v

    def degree(self, v: int) -> int:
        return sum((u == v) + (w == v) for u, w in self.edges)

    def to_json(self) -> dict:
        out = {
            "vertices": self.n_vertices,
            "edges": [list(e) for e in self.edges],
            "ghost": self.ghost,
            "boundary": sorted(self.boundary),
            "embedding": [list(c) for c in self.embedding] if self.embedding is not None else None,
        }
        if self.periods is not None:
            out["periods"] = list(self.periods)
            out["shifts"] = [list(s) for s in self.shifts]
        if self.allow_loops:
            out["allow_loops"] = True
        return out

    @classmethod
    def from_json(cls, data: dict) -> Graph:
        emb = data.get("embedding")
        return cls(
            n_vertices=int(data["vertices"]),
            edges=tuple(tuple(e) for e in data["edges"]),
            ghost=data.get("ghost"),
            boundary=frozenset(data.get("boundary") or ()),
            embedding=tuple(tuple(c) for c in emb) if emb is not None else None,
            periods=tuple(data["periods"]) if data.get("periods") else None,
            shifts=tuple(tuple(s) for s in data["shifts"]) if data.get("shifts") else None,
            allow_loops=bool(data.get("allow_loops", False)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> Graph:
        return cls.from_json(json.loads(Path(path).read_text()))

    @cached_property
    def key(self) -> str:
        """Stable content hash, used to tag exports and batches."""
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def from_edges(n_vertices: int, edges: Iterable[Sequence[int]], **kwargs) -> Graph:
    return Graph(n_vertices, tuple(tuple(e) for e in edges), **kwargs)


def path_graph(n: int) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)], embedding=tuple((i,) for i in range(n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("a simple cycle needs at least 3 vertices")
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return from_edges(n, itertools.combinations(range(n), 2))


def disjoint_union(*graphs: Graph) -> Graph:
    edges, offset = [], 0
    for g in graphs:
        if g.ghost is not None:
            raise GraphError("cannot take unions of ghosted graphs")
        edges += [(u + offset, v + offset) for u, v in g.edges]
        offset += g.n_vertices
    return from_edges(offset, edges)


def grid_graph(width: int, height: int) -> Graph:
    """Rectangle of ``width`` x ``height`` vertices at coordinates (i, j)."""
    coords = [(i, j) for j in range(height) for i in range(width)]
    index = {c: k for k, c in enumerate(coords)}
    edges = []
    for (i, j), k in index.items():
        if i + 1 < width:
            edges.append((k, index[(i + 1, j)]))
        if j + 1 < height:
            edges.append((k, index[(i, j + 1)]))
    return from_edges(len(coords), edges, embedding=tuple(coords))


def build_box(d: int, n: int) -> Graph:
    """The box {x in Z^d : |x|_inf <= n} with nearest-neighbour edges."""
    if d < 1 or n < 0:
        raise GraphError("need d >= 1 and n >= 0")
    side = 2 * n + 1
    if d * side ** d > max_box_size():
        raise GraphError(f"box d={d}, n={n} exceeds the size limit")
    coords = list(itertools.product(range(-n, n + 1), repeat=d))
    index = {c: k for k, c in enumerate(coords)}
    edges = []
    for c, k in index.items():
        for axis in range(d):
            if c[axis] < n:
                nb = c[:axis] + (c[axis] + 1,) + c[axis + 1:]
                edges.append((k, index[nb]))
    boundary = frozenset(k for c, k in index.items() if max(map(abs, c)) == n)
    return Graph(len(coords), tuple(edges), boundary=boundary, embedding=tuple(coords))


def build_torus(d: int, n: int) -> Graph:
    """Torus (Z / 2n Z)^d with nearest-neighbour edges; needs n >= 2."""
    if d < 1:
        raise GraphError("need d >= 1")
    if n < 2:
        raise GraphError("torus needs n >= 2")
    return _torus(d, 2 * n)


def _torus(d: int, side: int) -> Graph:
    if d * side ** d > max_box_size():
        raise GraphError("torus exceeds the size limit")
    coords = list(itertools.product(range(side), repeat=d))
    index = {c: k for k, c in enumerate(coords)}
    edges, shifts = [], []
    for c, k in index.items():
        for axis in range(d):
            nb = c[:axis] + ((c[axis] + 1) % side,) + c[axis + 1:]
            edges.append((k, index[nb]))
            shifts.append(tuple(int(a == axis) for a in range(d)))
    return Graph(
        len(coords), tuple(edges), embedding=tuple(coords),
        periods=(side,) * d, shifts=tuple(shifts),
    )


def attach_ghost(g: Graph) -> Graph:
    """Add a ghost vertex joined to every vertex; internal edge indices are kept."""
    if g.ghost is not None:
        raise GraphError("graph already has a ghost")
    ghost = g.n_vertices
    edges = g.edges + tuple((v, ghost) for v in range(g.n_vertices))
    shifts = None
    if g.shifts is not None:
        shifts = g.shifts + tuple((0,) * len(g.periods) for _ in range(g.n_vertices))
    return Graph(
        g.n_vertices + 1, edges, ghost=ghost, boundary=g.boundary,
        embedding=g.embedding, periods=g.periods, shifts=shifts, allow_loops=g.allow_loops,
    )


def drop_ghost(g: Graph) -> Graph:
    if g.ghost is None:
        raise GraphError("graph has no ghost")
    return Graph(
        g.n_vertices - 1, g.edges[: g.n_internal_edges], boundary=g.boundary,
        embedding=g.embedding, periods=g.periods,
        shifts=g.shifts[: g.n_internal_edges] if g.shifts is not None else None,
        allow_loops=g.allow_loops,
    )


def apply_boundary_condition(g: Graph, bc: BoundaryCondition) -> tuple[Graph, list[int]]:
    """Identify the vertices within each block of ``bc``.

    Returns the quotient graph and the old -> new vertex map. Edges keep their
    index; edges inside a block become self-loops of the merged vertex.
    """
    bc.validate(g)
    rep = list(range(g.n_vertices))
    for block in bc.blocks:
        low = min(block)
        for v in block:
            rep[v] = low
    new_id: dict[int, int] = {}
    mapping = []
    for v in range(g.n_vertices):
        r = rep[v]
        if r not in new_id:
            new_id[r] = len(new_id)
        mapping.append(new_id[r])
    edges = tuple((mapping[u], mapping[v]) for u, v in g.edges)
    loops = g.allow_loops or any(u == v for u, v in edges)
    ghost = mapping[g.ghost] if g.ghost is not None else None
    boundary = frozenset(mapping[v] for v in g.boundary)
    if ghost is not None and ghost != len(new_id) - 1:
        raise GraphError("quotient must keep the ghost last")
    h = Graph(len(new_id), edges, ghost=ghost, boundary=boundary, allow_loops=loops)
    return h, mapping


def with_boundary(g: Graph, boundary: Iterable[int]) -> Graph:
    return replace(g, boundary=frozenset(boundary))


# ---------------------------------------------------------------------------
# Combinatorics
# ---------------------------------------------------------------------------

class Components(NamedTuple):
    labels: np.ndarray
    count: int


def connected_components(g: Graph, omega: EdgeConfig | None = None) -> Components:
    """Cluster labels of every vertex (ghost included) and the cluster count."""
    bits = _bits_row(g, omega)
    eu, ev = g.endpoints
    labels, counts = kernels.batch_components(bits[None, :], eu, ev, g.n_vertices)
    return Components(labels[0], int(counts[0]))


def _bits_row(g: Graph, omega: EdgeConfig | None) -> np.ndarray:
    if omega is None:
        return np.ones(g.n_edges, dtype=np.uint8)
    if omega.n_edges != g.n_edges:
        raise GraphError("configuration does not belong to this graph")
    return omega.to_array()


def spanning_forest(g: Graph, within: EdgeConfig | None = None) -> EdgeConfig:
    """Greedy maximal acyclic subset, scanning edges by increasing index.

    With ``within`` the forest spans the open subgraph of that configuration.
    """
    parent = list(range(g.n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    mask = 0
    candidates = range(g.n_edges) if within is None else within.open_edges()
    for e in candidates:
        u, v = g.edges[e]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            mask |= 1 << e
    return EdgeConfig(mask, g.n_edges)


def fundamental_cycle_basis(
    g: Graph, forest: EdgeConfig, within: EdgeConfig | None = None
) -> list[EdgeConfig]:
    """One cycle per non-forest edge: the unique cycle in ``forest + e``.

    ``within`` restricts the basis to the cycle space of an open subgraph, in
    which case ``forest`` must span that subgraph.
    """
    if forest.n_edges != g.n_edges:
        raise GraphError("forest does not belong to this graph")
    universe = EdgeConfig.full(g.n_edges) if within is None else within
    if not forest.issubset(universe):
        raise GraphError("forest uses edges outside the subgraph")
    # forest adjacency, rooted BFS for parent pointers
    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.n_vertices)]
    for e in forest.open_edges():
        u, v = g.edges[e]
        adj[u].append((v, e))
        adj[v].append((u, e))
    parent_edge = [-1] * g.n_vertices
    parent = [-1] * g.n_vertices
    depth = [-1] * g.n_vertices
    for root in range(g.n_vertices):
        if depth[root] >= 0:
            continue
        depth[root] = 0
        stack = [root]
        while stack:
            a = stack.pop()
            for b, e in adj[a]:
                if depth[b] < 0:
                    depth[b] = depth[a] + 1
                    parent[b] = a
                    parent_edge[b] = e
                    stack.append(b)
                elif e != parent_edge[a]:
                    raise GraphError("forest contains a cycle")
    basis = []
    for e in universe.open_edges():
        if e in forest:
            continue
        u, v = g.edges[e]
        mask = 1 << e
        a, b = u, v
        while a != b and a >= 0 and b >= 0:
            if depth[a] >= depth[b]:
                mask ^= 1 << parent_edge[a]
                a = parent[a]
            else:
                mask ^= 1 << parent_edge[b]
                b = parent[b]
        if a != b:
            raise GraphError("forest is not spanning: edge joins two trees")
        basis.append(EdgeConfig(mask, g.n_edges))
    return basis


def cycle_space_dimension(g: Graph, omega: EdgeConfig | None = None) -> int:
    n_open = g.n_edges if omega is None else omega.n_open
    return n_open - g.n_vertices + connected_components(g, omega).count


def is_even(g: Graph, eta: EdgeConfig) -> bool:
    """True when every vertex, ghost included, has even degree in ``eta``."""
    parity = [0] * g.n_vertices
    for e in eta.open_edges():
        u, v = g.edges[e]
        parity[u] ^= 1
        parity[v] ^= 1
    return not any(parity)


def even_subgraphs(g: Graph, within: EdgeConfig | None = None) -> list[EdgeConfig]:
    """All even subgraphs (of the open subgraph of ``within``), by XOR of basis cycles."""
    forest = spanning_forest(g, within)
    basis = fundamental_cycle_basis(g, forest, within)
    out = []
    for picks in itertools.product((0, 1), repeat=len(basis)):
        mask = 0
        for take, c in zip(picks, basis):
            if take:
                mask ^= c.mask
        out.append(EdgeConfig(mask, g.n_edges))
    return out


def incidence_matrix(g: Graph) -> np.ndarray:
    """Edge x vertex matrix counting endpoint multiplicity (loops count twice)."""
    inc = np.zeros((g.n_edges, g.n_vertices), dtype=np.int64)
    for i, (u, v) in enumerate(g.edges):
        inc[i, u] += 1
        inc[i, v] += 1
    return inc


def named_graph(name: str) -> Graph:
    """Parse short graph names used by the CLI and the test suite.

    Recognised: ``cycleN``, ``pathN`` (N vertices), ``KN``, ``gridWxH``,
    ``boxD:N``, ``torusD:N``; a trailing ``+ghost`` attaches a ghost.
    """
    import re

    ghost = name.endswith("+ghost")
    base = name[: -len("+ghost")] if ghost else name
    patterns = [
        (r"cycle-?(\d+)", lambda m: cycle_graph(int(m[1]))),
        (r"path-?(\d+)", lambda m: path_graph(int(m[1]))),
        (r"K(\d+)", lambda m: complete_graph(int(m[1]))),
        (r"grid(\d+)x(\d+)", lambda m: grid_graph(int(m[1]), int(m[2]))),
        (r"box(\d+):(\d+)", lambda m: build_box(int(m[1]), int(m[2]))),
        (r"torus(\d+):(\d+)", lambda m: build_torus(int(m[1]), int(m[2]))),
    ]
    for pat, make in patterns:
        m = re.fullmatch(pat, base)
        if m:
            g = make(m)
            return attach_ghost(g) if ghost else g
    raise GraphError(f"unknown graph name {name!r}")
