"""Filtered simplicial complexes on point clouds.

Both builders produce the same Filtration structure: parallel arrays of
filtration values, dimensions, and vertex tuples, canonically ordered by
(value, dimension, lexicographic vertices). Clique growth is shared: a
Vietoris-Rips complex is the flag complex of the distance-threshold graph,
and the witness complex is the flag complex of the witnessed-edge graph.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .linalg import pairwise_distances


class EmptyCloud(ValueError):
    """The point cloud has no points."""


class CountTooLarge(ValueError):
    """More landmarks requested than there are cloud points."""


class TooFewLandmarks(ValueError):
    """Witness construction needs at least two landmarks."""


class ResourceLimit(RuntimeError):
    """Simplex count exceeded the configured cap."""


class Simplex(NamedTuple):
    vertices: tuple[int, ...]
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


class Filtration:
    """Simplices ordered by (value, dim, lexicographic vertices).

    Stored as parallel arrays: ``values`` (float), ``dims`` (int), and
    ``verts``, an (m, width) int matrix padded with -1 past each simplex's
    vertex count. The order guarantees every face precedes its cofaces.
    """

    __slots__ = ("values", "dims", "verts", "vertex_count")

    def __init__(self, values: np.ndarray, dims: np.ndarray, verts: np.ndarray,
                 vertex_count: int, presorted: bool = False):
        self.values = np.ascontiguousarray(values, dtype=float)
        self.dims = np.ascontiguousarray(dims, dtype=np.int32)
        self.verts = np.ascontiguousarray(verts, dtype=np.int32)
        self.vertex_count = int(vertex_count)
        if not presorted:
            order = _canonical_order(self.values, self.dims, self.verts)
            self.values = self.values[order]
            self.dims = self.dims[order]
            self.verts = self.verts[order]

    @classmethod
    def from_simplices(cls, simplices, vertex_count: int) -> "Filtration":
        items = list(simplices)
        width = max((len(s.vertices) for s in items), default=1)
        verts = np.full((len(items), width), -1, dtype=np.int32)
        values = np.empty(len(items))
        dims = np.empty(len(items), dtype=np.int32)
        for i, s in enumerate(items):
            vs = tuple(s.vertices)
            if any(b <= a for a, b in zip(vs, vs[1:])):
                raise ValueError(f"simplex vertices must strictly increase: {vs}")
            verts[i, :len(vs)] = vs
            values[i] = s.value
            dims[i] = len(vs) - 1
        return cls(values, dims, verts, vertex_count)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def max_dim(self) -> int:
        return int(self.dims.max()) if len(self.dims) else 0

    def simplex(self, i: int) -> Simplex:
        d = int(self.dims[i])
        return Simplex(tuple(int(v) for v in self.verts[i, :d + 1]), float(self.values[i]))

    def simplices(self) -> Iterator[Simplex]:
        for i in range(len(self)):
            yield self.simplex(i)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Filtration):
            return NotImplemented
        return (self.vertex_count == other.vertex_count
                and np.array_equal(self.values, other.values)
                and np.array_equal(self.dims, other.dims)
                and self._trimmed_verts() == other._trimmed_verts())

    def _trimmed_verts(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in self.verts[i, :self.dims[i] + 1])
                for i in range(len(self))]

    def validate(self) -> None:
        """Check the canonical order and the face-before-coface property."""
        index = {}
        for i in range(len(self)):
            s = self.simplex(i)
            if i > 0:
                p = self.simplex(i - 1)
                if (p.value, p.dim, p.vertices) > (s.value, s.dim, s.vertices):
                    raise ValueError(f"simplices out of order at position {i}")
            for facet in _facets(s.vertices):
                j = index.get(facet)
                if j is None:
                    raise ValueError(f"face {facet} of {s.vertices} missing")
                if self.values[j] > s.value:
                    raise ValueError(f"face {facet} appears later in the parameter than {s.vertices}")
            index[s.vertices] = i


def _facets(vertices: tuple[int, ...]) -> list[tuple[int, ...]]:
    if len(vertices) == 1:
        return []
    return [vertices[:i] + vertices[i + 1:] for i in range(len(vertices))]


def _canonical_order(values, dims, verts) -> np.ndarray:
    keys = [verts[:, c] for c in range(verts.shape[1] - 1, -1, -1)]
    keys.extend([dims, values])
    return np.lexsort(tuple(keys))


def _flag_expand(vertex_count: int, edges: list[tuple[int, int]],
                 edge_values: list[float], value_rows: list[list[float]],
                 max_dim: int, max_simplices: int | None) -> "Filtration":
    """Grow the flag complex of an edge-weighted graph up to max_dim.

    A p-simplex is any (p+1)-clique; its value is the maximum of its edge
    values. Cliques are enumerated with ascending vertices so each appears
    once, and candidate sets shrink by bitmask intersection along the way.
    """
    top = max(max_dim, 1)
    val_buf = [array("d") for _ in range(top + 1)]
    vert_buf = [array("i") for _ in range(top + 1)]

    for v in range(vertex_count):
        val_buf[0].append(0.0)
        vert_buf[0].append(v)
    count = vertex_count + len(edges)
    if max_simplices is not None and count > max_simplices:
        raise ResourceLimit(f"simplex count exceeds cap {max_simplices}")

    nbr = [0] * vertex_count
    ev_buf, evert_buf = val_buf[1], vert_buf[1]
    for (i, j), val in zip(edges, edge_values):
        ev_buf.append(val)
        evert_buf.append(i)
        evert_buf.append(j)
        nbr[i] |= 1 << j
        nbr[j] |= 1 << i

    if max_dim >= 2:
        count = _expand_cliques(edges, edge_values, nbr, value_rows, max_dim,
                                max_simplices, val_buf, vert_buf, count)

    return _assemble(vertex_count, val_buf, vert_buf)


def _expand_cliques(edges, edge_values, nbr, value_rows, max_dim, max_simplices,
                    val_buf, vert_buf, count) -> int:
    def extend(prefix: list[int], val: float, cand: int) -> None:
        nonlocal count
        d = len(prefix)
        vals_d = val_buf[d]
        verts_d = vert_buf[d]
        deeper = d < max_dim
        c = cand
        while c:
            low = c & -c
            v = low.bit_length() - 1
            c ^= low
            nv = val
            for u in prefix:
                t = value_rows[u][v]
                if t > nv:
                    nv = t
            vals_d.append(nv)
            for u in prefix:
                verts_d.append(u)
            verts_d.append(v)
            count += 1
            if max_simplices is not None and count > max_simplices:
                raise ResourceLimit(f"simplex count exceeds cap {max_simplices}")
            if deeper:
                nc = c & nbr[v]
                if nc:
                    extend(prefix + [v], nv, nc)

    for (i, j), val in zip(edges, edge_values):
        cand = nbr[i] & nbr[j] & ~((1 << (j + 1)) - 1)
        if cand:
            extend([i, j], val, cand)
    return count


def _assemble(vertex_count: int, val_buf, vert_buf) -> Filtration:
    present = [d for d in range(len(val_buf)) if len(val_buf[d])]
    width = max(present) + 1
    total = sum(len(val_buf[d]) for d in present)
    values = np.empty(total)
    dims = np.empty(total, dtype=np.int32)
    verts = np.full((total, width), -1, dtype=np.int32)
    at = 0
    for d in present:
        cnt = len(val_buf[d])
        values[at:at + cnt] = np.frombuffer(val_buf[d], dtype=np.float64)
        dims[at:at + cnt] = d
        verts[at:at + cnt, :d + 1] = np.frombuffer(
            vert_buf[d], dtype=np.intc).reshape(cnt, d + 1)
        at += cnt
    return Filtration(values, dims, verts, vertex_count)


def vietoris_rips(cloud, r_max: float, max_dim: int,
                  max_simplices: int | None = None) -> Filtration:
    """Vietoris-Rips filtration: simplices with diameter strictly below r_max.

    Vertices enter at 0 and every other simplex at the largest pairwise
    distance among its vertices, so the complexes at growing parameters nest.
    """
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise EmptyCloud("need a nonempty 2-d point cloud")
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    n = pts.shape[0]
    dist = pairwise_distances(pts)
    np.fill_diagonal(dist, 0.0)

    edges: list[tuple[int, int]] = []
    edge_values: list[float] = []
    if max_dim >= 1:
        ii, jj = np.nonzero(np.triu(dist < r_max, k=1))
        edges = list(zip(ii.tolist(), jj.tolist()))
        edge_values = dist[ii, jj].tolist()
    return _flag_expand(n, edges, edge_values, dist.tolist(), max_dim, max_simplices)


@dataclass(frozen=True)
class LandmarkSet:
    """Chosen landmark indices plus their distance table to the whole cloud."""

    indices: np.ndarray
    distances: np.ndarray  # shape (len(indices), cloud size)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if len(set(idx.tolist())) != len(idx):
            raise ValueError("landmark indices must be distinct")
        if self.distances.shape[0] != len(idx):
            raise ValueError("distance table row count must match landmark count")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)


def _distance_rows(pts: np.ndarray, indices) -> np.ndarray:
    return pairwise_distances(pts[np.asarray(indices, dtype=np.int64)], pts)


def maxmin_landmarks(cloud, count: int, rng: np.random.Generator,
                     first: int | None = None) -> LandmarkSet:
    """Greedy landmark selection maximizing distance to the chosen set.

    The first landmark is drawn uniformly (or given explicitly); each later
    one is the cloud point farthest from all landmarks so far, ties going to
    the smallest index.
    """
    pts = np.asarray(cloud, dtype=float)
    n = pts.shape[0]
    if not 1 <= count <= n:
        raise CountTooLarge(f"need 1 <= count <= {n}, got {count}")
    if first is None:
        first = int(rng.integers(n))
    chosen = [first]
    rows = [_distance_rows(pts, [first])[0]]
    masked = rows[0].copy()
    masked[first] = -1.0
    while len(chosen) < count:
        nxt = int(np.argmax(masked))
        chosen.append(nxt)
        row = _distance_rows(pts, [nxt])[0]
        rows.append(row)
        np.minimum(masked, row, out=masked)
        masked[nxt] = -1.0
    return LandmarkSet(np.array(chosen), np.vstack(rows))


def random_landmarks(cloud, count: int, rng: np.random.Generator) -> LandmarkSet:
    """Landmarks drawn uniformly without replacement."""
    pts = np.asarray(cloud, dtype=float)
    n = pts.shape[0]
    if not 1 <= count <= n:
        raise CountTooLarge(f"need 1 <= count <= {n}, got {count}")
    idx = rng.choice(n, size=count, replace=False)
    return LandmarkSet(idx, _distance_rows(pts, idx))


def witness_edge_values(landmarks: LandmarkSet) -> np.ndarray:
    """Smallest parameter at which each landmark pair acquires a witness.

    A cloud point x witnesses the pair (a, b) at parameter R when both
    d(x, a) and d(x, b) are at most R plus x's distance to its nearest
    landmark other than a and b. The edge value is the minimum over x of
    max(d(x,a), d(x,b)) minus that excluded minimum, clamped at zero. With
    only two landmarks the excluded minimum is vacuous and the edge value
    is zero.
    """
    dist = landmarks.distances
    n_l = dist.shape[0]
    if n_l < 2:
        raise TooFewLandmarks("witness complex needs at least 2 landmarks")
    values = np.zeros((n_l, n_l))
    if n_l == 2:
        return values
    order = np.argsort(dist, axis=0, kind="stable")
    r1, r2 = order[0], order[1]
    cols = np.arange(dist.shape[1])
    s1, s2, s3 = dist[r1, cols], dist[r2, cols], dist[order[2], cols]
    for a in range(n_l):
        da = dist[a]
        for b in range(a + 1, n_l):
            reach = np.maximum(da, dist[b])
            excl = np.where((r1 != a) & (r1 != b), s1,
                            np.where((r2 != a) & (r2 != b), s2, s3))
            val = max(0.0, float(np.min(reach - excl)))
            values[a, b] = values[b, a] = val
    return values


def witness_filtration(cloud, landmarks: LandmarkSet, r_max: float, max_dim: int,
                       max_simplices: int | None = None) -> Filtration:
    """Lazy witness filtration on the landmark vertices.

    Edges carry the witness parameter from ``witness_edge_values`` and enter
    when their value is at most r_max; higher simplices are filled by the
    flag rule with the maximum of their edge values.
    """
    if r_max < 0:
        raise ValueError("r_max must be nonnegative")
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    values = witness_edge_values(landmarks)
    n_l = len(landmarks)
    edges: list[tuple[int, int]] = []
    edge_vals: list[float] = []
    if max_dim >= 1:
        for a in range(n_l):
            for b in range(a + 1, n_l):
                if values[a, b] <= r_max:
                    edges.append((a, b))
                    edge_vals.append(float(values[a, b]))
    return _flag_expand(n_l, edges, edge_vals, values.tolist(), max_dim, max_simplices)


def write_filtration(path, filtration: Filtration) -> None:
    """Text format: header ``dim_max vertex_count``, then ``value v0 ... vk`` lines."""
    with open(path, "w") as fh:
        fh.write(f"{filtration.max_dim} {filtration.vertex_count}\n")
        for i in range(len(filtration)):
            d = int(filtration.dims[i])
            vs = " ".join(str(int(v)) for v in filtration.verts[i, :d + 1])
            fh.write(f"{filtration.values[i]:.17g} {vs}\n")


def read_filtration(path) -> Filtration:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"malformed filtration header in {path}")
        dim_max, vertex_count = int(header[0]), int(header[1])
        simplices = []
        for line in fh:
            toks = line.split()
            if not toks:
                continue
            simplices.append(Simplex(tuple(int(t) for t in toks[1:]), float(toks[0])))
    width = dim_max + 1
    verts = np.full((len(simplices), width), -1, dtype=np.int32)
    values = np.empty(len(simplices))
    dims = np.empty(len(simplices), dtype=np.int32)
    for i, s in enumerate(simplices):
        verts[i, :len(s.vertices)] = s.vertices
        values[i] = s.value
        dims[i] = s.dim
    return Filtration(values, dims, verts, vertex_count, presorted=True)


def write_landmarks(path, landmarks: LandmarkSet) -> None:
    """One cloud index per line, in selection order."""
    with open(path, "w") as fh:
        for i in landmarks.indices:
            fh.write(f"{int(i)}\n")


def read_landmarks(path) -> list[int]:
    with open(path) as fh:
        return [int(line) for line in fh if line.strip()]
