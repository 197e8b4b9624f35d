"""Closed triangulated hull surfaces: validation, file I/O and procedural generators."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MeshFormatError, OpenMesh

MIN_AREA = 1e-8


@dataclass(frozen=True)
class HullMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    area_vectors: np.ndarray = field(init=False, repr=False)
    gauss_points: np.ndarray = field(init=False, repr=False)  # (nt, 3, 3): r12, r23, r31

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        T = np.asarray(self.triangles, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] != 3 or T.ndim != 2 or T.shape[1] != 3:
            raise MeshFormatError("vertices must be (nv, 3) and triangles (nt, 3)")
        if T.size and (T.min() < 0 or T.max() >= len(V)):
            raise MeshFormatError("triangle index out of range")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "triangles", T)
        a, b, c = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
        A = 0.5 * np.cross(b - a, c - a)
        object.__setattr__(self, "area_vectors", A)
        object.__setattr__(self, "gauss_points", np.stack([0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)], axis=1))
        self.validate()

    @property
    def n_elements(self) -> int:
        return len(self.triangles)

    def validate(self):
        areas = np.linalg.norm(self.area_vectors, axis=1)
        if np.any(areas <= MIN_AREA):
            raise OpenMesh(f"{int(np.sum(areas <= MIN_AREA))} degenerate triangle(s) with area <= {MIN_AREA}")
        edges = Counter()
        directed = Counter()
        for i, j, k in self.triangles:
            for e in ((i, j), (j, k), (k, i)):
                edges[tuple(sorted(e))] += 1
                directed[e] += 1
        bad = [e for e, n in edges.items() if n != 2]
        if bad:
            raise OpenMesh(f"OpenMesh: {len(bad)} edge(s) not shared by exactly two triangles, e.g. {bad[0]}")
        if any(n != 1 for n in directed.values()):
            raise OpenMesh("OpenMesh/orientation: inconsistent triangle winding")
        if self.signed_volume() <= 0:
            raise OpenMesh("OpenMesh/orientation: normals point inward (signed volume <= 0)")

    def signed_volume(self) -> float:
        V, T = self.vertices, self.triangles
        a, b, c = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
        return float(np.sum(np.einsum("ij,ij->i", a, np.cross(b, c))) / 6.0)

    def centroid(self) -> np.ndarray:
        V, T = self.vertices, self.triangles
        a, b, c = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
        vol6 = np.einsum("ij,ij->i", a, np.cross(b, c))
        return (vol6[:, None] * (a + b + c)).sum(axis=0) / (4.0 * vol6.sum())

    def translated(self, offset) -> "HullMesh":
        return HullMesh(self.vertices + np.asarray(offset, dtype=float), self.triangles)


def merge(*meshes: HullMesh) -> HullMesh:
    verts, tris, off = [], [], 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + off)
        off += len(m.vertices)
    return HullMesh(np.vstack(verts), np.vstack(tris))


def read_mesh(path) -> HullMesh:
    """Parse the ASCII mesh format: ``nv nt`` header, nv vertex lines, nt index lines."""
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines:
        raise MeshFormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 2:
        raise MeshFormatError(f"{path}:1: header must be 'nv nt'")
    try:
        nv, nt = int(head[0]), int(head[1])
    except ValueError:
        raise MeshFormatError(f"{path}:1: header must hold two integers") from None
    if len(lines) != 1 + nv + nt:
        raise MeshFormatError(f"{path}: expected {1 + nv + nt} lines, found {len(lines)}")
    V = np.empty((nv, 3))
    T = np.empty((nt, 3), dtype=np.int64)
    for n in range(nv):
        parts = lines[1 + n].split()
        try:
            if len(parts) != 3:
                raise ValueError
            V[n] = [float(p) for p in parts]
        except ValueError:
            raise MeshFormatError(f"{path}:{2 + n}: expected 'x y z'") from None
    for n in range(nt):
        parts = lines[1 + nv + n].split()
        try:
            if len(parts) != 3:
                raise ValueError
            T[n] = [int(p) for p in parts]
        except ValueError:
            raise MeshFormatError(f"{path}:{2 + nv + n}: expected 'i j k'") from None
    return HullMesh(V, T)


def write_mesh(path, vertices, triangles) -> None:
    with open(path, "w") as fh:
        fh.write(f"{len(vertices)} {len(triangles)}\n")
        for x, y, z in vertices:
            fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
        for i, j, k in triangles:
            fh.write(f"{i} {j} {k}\n")


def icosphere(subdivisions: int = 4, radius: float = 1.0) -> HullMesh:
    """Geodesic sphere with 20 * 4**subdivisions outward-oriented triangles."""
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    verts = [np.array(v, float) / np.linalg.norm(v) for v in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(subdivisions):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                v = verts[i] + verts[j]
                verts.append(v / np.linalg.norm(v))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return HullMesh(radius * np.array(verts), np.array(faces))


def box(lo, hi) -> HullMesh:
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    V = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    # vertex index = 4*ix + 2*iy + iz
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    T = []
    for a, b, c, d in quads:
        T += [(a, b, c), (a, c, d)]
    return HullMesh(V, np.array(T))


def body_of_revolution(length: float, radius: float, n_long: int = 60, n_circ: int = 32,
                       nose_frac: float = 0.2, tail_frac: float = 0.35, origin_from_nose: float | None = None) -> HullMesh:
    """Axisymmetric hull along the body x axis (forward positive), closed at both ends.

    Nose is elliptical, tail is a parabolic taper to a small transom radius.
    """
    if origin_from_nose is None:
        origin_from_nose = 0.5 * length
    s = 0.5 * (1 - np.cos(np.linspace(0.0, np.pi, n_long)))  # clustered at the ends
    xs = s * length  # distance from nose
    ln, lt = nose_frac * length, tail_frac * length
    r = np.full_like(xs, radius)
    nose = xs < ln
    r[nose] = radius * np.sqrt(np.clip(1 - ((ln - xs[nose]) / ln) ** 2, 0.0, 1.0))
    tail = xs > length - lt
    r[tail] = radius * (1 - 0.85 * ((xs[tail] - (length - lt)) / lt) ** 2)
    r[0] = 0.0
    rings = [i for i in range(n_long) if r[i] > 1e-9]
    ang = np.linspace(0, 2 * np.pi, n_circ, endpoint=False)
    V = [np.array([origin_from_nose - xs[0], 0.0, 0.0])]
    for i in rings:
        xb = origin_from_nose - xs[i]
        for a in ang:
            V.append([xb, r[i] * np.cos(a), r[i] * np.sin(a)])
    V.append([origin_from_nose - xs[rings[-1]], 0.0, 0.0])  # transom centre
    V = np.array(V, dtype=float)
    T = []
    idx = lambda ring, k: 1 + ring * n_circ + (k % n_circ)
    for k in range(n_circ):
        T.append((0, idx(0, k), idx(0, k + 1)))
    for ring in range(len(rings) - 1):
        for k in range(n_circ):
            a, b = idx(ring, k), idx(ring, k + 1)
            c, d = idx(ring + 1, k + 1), idx(ring + 1, k)
            T += [(a, d, c), (a, c, b)]
    last = len(V) - 1
    for k in range(n_circ):
        T.append((last, idx(len(rings) - 1, k + 1), idx(len(rings) - 1, k)))
    T = np.array(T)
    # winding chosen so that the nose cap is outward; flip globally if inverted
    try:
        return HullMesh(V, T)
    except OpenMesh:
        return HullMesh(V, T[:, ::-1])


def bb2_hull(n_long: int = 60, n_circ: int = 32) -> HullMesh:
    """Approximate BB2 envelope: 70.2 m body of revolution (9.6 m beam) plus a box sail.

    Body origin on the shaft axis, shifted longitudinally so that the centre of
    buoyancy sits at x = 0 (the trimmed CG position). The sail shell overlaps the
    hull by a few cubic metres; this is accepted.
    """
    hull = body_of_revolution(70.2, 4.8, n_long, n_circ, origin_from_nose=32.31)
    # sail: 14 m long, 2.4 m wide, top 11.4 m above the axis; x measured forward of origin
    sail = box((32.31 - 30.0, -1.2, -11.4), (32.31 - 16.0, 1.2, -4.6))
    mesh = merge(hull, sail)
    return mesh.translated((-mesh.centroid()[0], 0.0, 0.0))
