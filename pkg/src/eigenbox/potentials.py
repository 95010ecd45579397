"""Benchmark potentials, their piecewise-constant projections and sup bounds.

Every potential is stored shifted by ``offset`` so that its essential
infimum on the benchmark domain is zero; eigenvalues of the original problem
are the computed ones plus ``offset``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .mesh import Mesh

KINDS = ("zero", "harmonic", "lattice", "anderson", "piecewise_constant")


# --- quadrature ------------------------------------------------------------
@dataclass(frozen=True)
class QuadratureRule:
    """Rule on a triangle in barycentric coordinates; weights sum to one."""
    bary: np.ndarray
    weights: np.ndarray
    degree: int


@lru_cache(maxsize=None)
def triangle_rule(degree: int = 10) -> QuadratureRule:
    """Collapsed (Duffy) Gauss-Legendre product rule exact up to ``degree``."""
    n = degree // 2 + 1
    g, w = np.polynomial.legendre.leggauss(n)
    g, w = 0.5 * (g + 1), 0.5 * w
    u, v = np.meshgrid(g, g, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    x = u.ravel()
    y = (v * (1 - u)).ravel()
    weights = 2.0 * (wu * wv * (1 - u)).ravel()
    bary = np.column_stack([1 - x - y, x, y])
    return QuadratureRule(bary, weights, degree)


def quadrature_points(mesh: Mesh, rule: QuadratureRule) -> np.ndarray:
    """Physical quadrature points, shape (nt, nq, 2)."""
    return np.einsum("qi,tid->tqd", rule.bary, mesh.vertices[mesh.triangles])


# --- potentials ------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Potential:
    kind: str
    cells: np.ndarray | None = None
    values: np.ndarray | None = None
    seed: int | None = None
    offset: float = 0.0
    box: tuple = (0.0, 0.0, 1.0, 1.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @property
    def smooth(self) -> bool:
        """True when the potential is used exactly, not through its projection."""
        return self.kind in ("zero", "harmonic")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros(x.shape[:-1])
        if self.kind == "harmonic":
            return 0.5 * np.sum(x**2, axis=-1)
        if self.kind == "lattice":
            r = np.maximum(0.5 * np.sum(x**2, axis=-1) - 16.0, 0.0)
            s = np.sin(np.pi * x[..., 0] / 2) * np.sin(np.pi * x[..., 1] / 2)
            return r + np.floor(30.0 + 10.0 * s) - self.offset
        if self.kind == "anderson":
            i, j = self._cell_index(x)
            return self.cells[j, i]
        raise ValueError("piecewise_constant potentials have no point evaluation")

    def _cell_index(self, x):
        g = self.cells.shape[0]
        x0, y0, x1, y1 = self.box
        i = np.clip(np.floor((x[..., 0] - x0) / (x1 - x0) * g), 0, g - 1).astype(int)
        j = np.clip(np.floor((x[..., 1] - y0) / (y1 - y0) * g), 0, g - 1).astype(int)
        return i, j

    def is_piecewise_constant(self, mesh: Mesh) -> bool:
        if self.kind == "zero":
            return True
        if self.kind == "piecewise_constant":
            return len(self.values) == mesh.nt
        if self.kind == "anderson":
            return bool(np.all(self._cells_per_triangle(mesh)[1]))
        return False

    def _cells_per_triangle(self, mesh):
        g = self.cells.shape[0]
        x0, y0, x1, y1 = self.box
        p = mesh.vertices[mesh.triangles]
        sx = (p[..., 0] - x0) / (x1 - x0) * g
        sy = (p[..., 1] - y0) / (y1 - y0) * g
        eps = 1e-12 * g
        lo = np.floor(np.stack([sx.min(1), sy.min(1)], 1) + eps).astype(int)
        hi = np.ceil(np.stack([sx.max(1), sy.max(1)], 1) - eps).astype(int) - 1
        lo = np.clip(lo, 0, g - 1)
        hi = np.clip(hi, 0, g - 1)
        single = np.all(lo == hi, axis=1)
        return (lo, hi), single


def zero() -> Potential:
    return Potential("zero")


def harmonic() -> Potential:
    """``|x|^2 / 2``; its infimum on domains containing the origin is zero."""
    return Potential("harmonic")


def lattice() -> Potential:
    """``(|x|^2/2 - 16)_+ + floor(30 + 10 sin(pi x1/2) sin(pi x2/2))`` shifted by its infimum 20."""
    return Potential("lattice", offset=20.0)


def piecewise_constant(values, offset: float | None = None) -> Potential:
    values = np.asarray(values, dtype=float)
    if offset is None:
        offset = float(values.min()) if len(values) else 0.0
    return Potential("piecewise_constant", values=values - offset, offset=offset)


def load_piecewise_constant(path) -> Potential:
    """Per-triangle values, one per line, aligned with a mesh dump."""
    return piecewise_constant(np.loadtxt(Path(path), ndmin=1))


def splitmix64(seed: int):
    """Infinite stream of 64-bit outputs of the SplitMix64 generator."""
    mask = (1 << 64) - 1
    state = seed & mask
    while True:
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        yield z ^ (z >> 31)


def make_anderson(seed: int, grid: int = 8, vmax: int = 10_000) -> Potential:
    """Disordered potential on ``(0,1)^2``: integer cell values uniform on ``{0, ..., vmax-1}``.

    Values come from SplitMix64 with rejection of the biased tail, so they are
    exactly uniform and reproducible from ``seed``.
    """
    limit = (1 << 64) - ((1 << 64) % vmax)
    vals = []
    for z in splitmix64(seed):
        if z < limit:
            vals.append(z % vmax)
            if len(vals) == grid * grid:
                break
    cells = np.array(vals, dtype=float).reshape(grid, grid)  # cells[row j (y), col i (x)]
    m = cells.min()
    return Potential("anderson", cells=cells - m, seed=seed, offset=float(m))


# --- projections and bounds ------------------------------------------------
def pi0_project(V: Potential, mesh: Mesh) -> np.ndarray:
    """Triangle means of the (shifted) potential."""
    if V.kind == "zero":
        return np.zeros(mesh.nt)
    if V.kind == "piecewise_constant":
        if len(V.values) != mesh.nt:
            raise ValueError("piecewise-constant potential does not match the mesh")
        return V.values.copy()
    if V.kind == "harmonic":
        mid = mesh.edge_midpoints[mesh.tri_edges]
        return np.sum(mid**2, axis=(1, 2)) / 6.0
    if V.kind == "lattice":
        rule = triangle_rule(10)
        return V(quadrature_points(mesh, rule)) @ rule.weights
    return _anderson_means(V, mesh)


def _anderson_means(V: Potential, mesh: Mesh) -> np.ndarray:
    (lo, hi), single = V._cells_per_triangle(mesh)
    out = V.cells[lo[:, 1], lo[:, 0]].astype(float)
    g = V.cells.shape[0]
    x0, y0, x1, y1 = V.box
    dx, dy = (x1 - x0) / g, (y1 - y0) / g
    for t in np.flatnonzero(~single):
        poly = mesh.vertices[mesh.triangles[t]]
        acc = 0.0
        for j in range(lo[t, 1], hi[t, 1] + 1):
            for i in range(lo[t, 0], hi[t, 0] + 1):
                piece = clip_polygon(poly, x0 + i * dx, y0 + j * dy, x0 + (i + 1) * dx, y0 + (j + 1) * dy)
                acc += polygon_area(piece) * V.cells[j, i]
        out[t] = acc / mesh.areas[t]
    return out


def elementwise_sup(V: Potential, mesh: Mesh) -> np.ndarray:
    """Upper bounds of the (shifted) potential on every triangle."""
    if V.kind in ("zero", "piecewise_constant"):
        return pi0_project(V, mesh)
    p = mesh.vertices[mesh.triangles]
    if V.kind == "harmonic":
        return (0.5 * np.sum(p**2, axis=-1)).max(axis=1)  # convex: max at a vertex
    if V.kind == "anderson":
        (lo, hi), single = V._cells_per_triangle(mesh)
        out = V.cells[lo[:, 1], lo[:, 0]].astype(float)
        for t in np.flatnonzero(~single):
            out[t] = V.cells[lo[t, 1]:hi[t, 1] + 1, lo[t, 0]:hi[t, 0] + 1].max()
        return out
    # lattice: convex radial part at the vertices plus a box bound of the floor term
    radial = np.maximum(0.5 * np.sum(p**2, axis=-1) - 16.0, 0.0).max(axis=1)
    sx = _sin_range(p[..., 0].min(1), p[..., 0].max(1))
    sy = _sin_range(p[..., 1].min(1), p[..., 1].max(1))
    prods = np.stack([sx[0] * sy[0], sx[0] * sy[1], sx[1] * sy[0], sx[1] * sy[1]])
    return radial + np.floor(30.0 + 10.0 * prods.max(axis=0)) - V.offset


def _sin_range(a, b):
    """Range of ``sin(pi x / 2)`` over ``[a, b]`` (vectorised)."""
    lo = np.minimum(np.sin(np.pi * a / 2), np.sin(np.pi * b / 2))
    hi = np.maximum(np.sin(np.pi * a / 2), np.sin(np.pi * b / 2))
    # maxima at x = 1 + 4m, minima at x = -1 + 4m
    has_max = np.floor((b - 1) / 4) >= np.ceil((a - 1) / 4)
    has_min = np.floor((b + 1) / 4) >= np.ceil((a + 1) / 4)
    return np.where(has_min, -1.0, lo), np.where(has_max, 1.0, hi)


def sup_norm(V: Potential, mesh: Mesh) -> float:
    return float(elementwise_sup(V, mesh).max())


# --- polygon helpers -------------------------------------------------------
def clip_polygon(poly: np.ndarray, x0, y0, x1, y1) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon against an axis-aligned box."""
    out = [tuple(p) for p in poly]
    for axis, bound, keep_lower in ((0, x0, False), (0, x1, True), (1, y0, False), (1, y1, True)):
        if not out:
            break
        inp, out = out, []
        inside = (lambda p: p[axis] <= bound) if keep_lower else (lambda p: p[axis] >= bound)
        for k, cur in enumerate(inp):
            prev = inp[k - 1]
            if inside(cur):
                if not inside(prev):
                    out.append(_intersect(prev, cur, axis, bound))
                out.append(cur)
            elif inside(prev):
                out.append(_intersect(prev, cur, axis, bound))
    return np.array(out).reshape(-1, 2)


def _intersect(p, q, axis, bound):
    s = (bound - p[axis]) / (q[axis] - p[axis])
    return (p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]))


def polygon_area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
