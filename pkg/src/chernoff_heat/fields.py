"""Uniform padded grids, sampled scalar fields, and boundary-aware interpolation.

Scheme state lives on a uniform grid covering the domain's bounding box
plus a pad wide enough to hold the extension collar and the kernel
truncation radius.  :class:`GridFrame` caches the per-node geometry
(signed distances, membership masks, collar reflections) and builds the
sparse interpolation operators that evaluate a field, known only on the
closed-domain nodes, at off-node points such as reflected collar points.

Interpolation uses tensor-product Lagrange stencils.  Near the boundary
a stencil window is shifted inward until all of its nodes lie in the
closed domain, which keeps the operator a function of inside values
only; orders 1 and 3 are supported.  Shifted windows extrapolate, so
even order 1 is not exactly convex next to a curved boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage, sparse

from .errors import GridTooCoarse
from .geometry import DomainGeometry

__all__ = ["Grid", "ScalarField", "make_grid", "GridFrame"]


@dataclass(frozen=True)
class Grid:
    """Uniform grid with equal spacing along every axis."""

    origin: tuple[float, ...]
    spacing: float
    shape: tuple[int, ...]

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing * np.arange(self.shape[axis])

    def nodes(self) -> np.ndarray:
        """All node coordinates: shape ``(n,)`` in 1-d, ``(nx, ny, 2)`` in 2-d."""
        if self.ndim == 1:
            return self.axis_coords(0)
        axes = [self.axis_coords(i) for i in range(self.ndim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def sample(self, func) -> np.ndarray:
        return np.asarray(func(self.nodes()), dtype=float)


@dataclass
class ScalarField:
    """Node values of a scalar function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"value array shape {self.values.shape} does not match grid "
                f"shape {self.grid.shape}"
            )

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def make_grid(dom: DomainGeometry, h: float, pad: float) -> Grid:
    """Grid covering the domain's bounding box expanded by ``pad``.

    The origin is shifted by a whole number of spacings below the box so
    that the box corner itself lands on a node; interval endpoints are
    then exact grid nodes whenever ``(b - a) / h`` is integral.
    """
    if h <= 0:
        raise ValueError(f"grid spacing must be positive, got {h}")
    lo, hi = dom.bounding_box()
    m = math.ceil(pad / h - 1e-12)
    origin = lo - m * h
    counts = np.ceil((hi + pad - origin) / h - 1e-12).astype(int) + 1
    return Grid(
        origin=tuple(float(v) for v in origin),
        spacing=float(h),
        shape=tuple(int(c) for c in counts),
    )


class GridFrame:
    """Cached per-(domain, grid) geometry used by the field-path operators."""

    def __init__(self, dom: DomainGeometry, grid: Grid):
        if dom.ndim != grid.ndim:
            raise ValueError("domain and grid dimension mismatch")
        self.dom = dom
        self.grid = grid
        nodes = grid.nodes()
        self.distances = np.asarray(dom.signed_distance(nodes), dtype=float)
        tol = dom.tolerance
        half = 0.5 * dom.tubular_radius
        self.inside = self.distances <= tol
        self.strictly_inside = self.distances < -tol
        self.collar = (self.distances > tol) & (self.distances < half)
        if not self.inside.any():
            raise GridTooCoarse("grid holds no nodes of the closed domain")

    @cached_property
    def collar_points(self) -> np.ndarray:
        nodes = self.grid.nodes()
        return nodes[self.collar]

    @cached_property
    def collar_distances(self) -> np.ndarray:
        return self.distances[self.collar]

    @cached_property
    def collar_params(self) -> np.ndarray:
        return np.asarray(self.dom.closest_params(self.collar_points), dtype=float)

    @cached_property
    def collar_reflections(self) -> np.ndarray:
        return self.dom._reflect_inside_tube(self.collar_points, self.collar_distances)

    @cached_property
    def collar_feet(self) -> np.ndarray:
        """Closest boundary points of the collar nodes."""
        return np.asarray(self.dom.boundary_position(self.collar_params), dtype=float)

    def check_collar_layers(self, minimum: int = 4) -> None:
        """Reject grids whose collar holds fewer than ``minimum`` layers."""
        layers = 0.5 * self.dom.tubular_radius / self.grid.spacing
        if layers < minimum:
            raise GridTooCoarse(
                f"collar of width {0.5 * self.dom.tubular_radius:.6g} holds "
                f"{layers:.2f} grid layers; at least {minimum} are needed "
                "for reliable interpolation of reflected values"
            )

    @cached_property
    def _interp_cache(self) -> dict:
        return {}

    def reflection_matrix(self, order: int) -> sparse.csr_matrix:
        """Sparse map from flat node values to values at reflected collar points."""
        key = ("reflect", order)
        if key not in self._interp_cache:
            self._interp_cache[key] = interpolation_matrix(
                self.grid, self.inside, self.collar_reflections, order
            )
        return self._interp_cache[key]

    def foot_matrix(self, order: int) -> sparse.csr_matrix:
        """Sparse map from flat node values to values at collar boundary feet."""
        key = ("foot", order)
        if key not in self._interp_cache:
            self._interp_cache[key] = interpolation_matrix(
                self.grid, self.inside, self.collar_feet, order
            )
        return self._interp_cache[key]


def interpolation_matrix(
    grid: Grid, inside: np.ndarray, targets: np.ndarray, order: int
) -> sparse.csr_matrix:
    """Sparse interpolation from inside-node values to target points.

    Stencils are ``(order + 1)``-wide per axis.  Windows that would touch
    nodes outside the closed domain are shifted by up to two nodes per
    axis; targets for which no admissible window exists fall back to a
    convex window of width two and finally to the nearest inside node.
    """
    if order not in (1, 3):
        raise ValueError(f"supported interpolation orders are 1 and 3, got {order}")
    if grid.ndim == 1:
        return _interp_matrix_1d(grid, inside, np.asarray(targets, float), order)
    return _interp_matrix_2d(grid, inside, np.asarray(targets, float), order)


def _lagrange_weights(offsets: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Lagrange basis over integer ``offsets`` (m, k) evaluated at ``s`` (m,)."""
    m, k = offsets.shape
    w = np.ones((m, k))
    for j in range(k):
        for l in range(k):
            if l == j:
                continue
            w[:, j] *= (s - offsets[:, l]) / (offsets[:, j] - offsets[:, l])
    return w


def _interp_matrix_1d(grid, inside, targets, order):
    k = order + 1
    idx_inside = np.flatnonzero(inside)
    if idx_inside.size < k:
        raise GridTooCoarse("fewer inside nodes than the interpolation stencil width")
    i_lo, i_hi = idx_inside[0], idx_inside[-1]
    s = (targets - grid.origin[0]) / grid.spacing
    base = np.floor(s).astype(int) - (k // 2 - 1)
    base = np.clip(base, i_lo, i_hi - (k - 1))
    offsets = base[:, None] + np.arange(k)[None, :]
    w = _lagrange_weights(offsets, s)
    rows = np.repeat(np.arange(targets.size), k)
    mat = sparse.csr_matrix(
        (w.ravel(), (rows, offsets.ravel())), shape=(targets.size, grid.n_nodes)
    )
    return mat


def _window_validity(inside: np.ndarray, k: int) -> np.ndarray:
    """Boolean array: window of size ``k x k`` at (i, j) lies fully inside."""
    nx, ny = inside.shape
    p = np.zeros((nx + 1, ny + 1), dtype=np.int64)
    np.cumsum(np.cumsum(inside, axis=0), axis=1, out=p[1:, 1:])
    if nx < k or ny < k:
        return np.zeros((max(nx - k + 1, 0), max(ny - k + 1, 0)), dtype=bool)
    win = p[k:, k:] - p[:-k, k:] - p[k:, :-k] + p[:-k, :-k]
    return win == k * k


_SHIFTS = sorted(
    [(di, dj) for di in range(-2, 3) for dj in range(-2, 3)],
    key=lambda d: (d[0] * d[0] + d[1] * d[1], d),
)


def _choose_windows(valid: np.ndarray, base_i: np.ndarray, base_j: np.ndarray):
    """First admissible shifted window per target, or -1 where none exists."""
    vi, vj = valid.shape
    chosen_i = np.full(base_i.shape, -1, dtype=int)
    chosen_j = np.full(base_j.shape, -1, dtype=int)
    open_mask = np.ones(base_i.shape, dtype=bool)
    for di, dj in _SHIFTS:
        if not open_mask.any():
            break
        ci = base_i + di
        cj = base_j + dj
        ok = open_mask & (ci >= 0) & (ci < vi) & (cj >= 0) & (cj < vj)
        if ok.any():
            hit = np.zeros_like(ok)
            hit[ok] = valid[ci[ok], cj[ok]]
            chosen_i[hit] = ci[hit]
            chosen_j[hit] = cj[hit]
            open_mask &= ~hit
    return chosen_i, chosen_j, open_mask


def _interp_matrix_2d(grid, inside, targets, order):
    k = order + 1
    nx, ny = grid.shape
    m = targets.shape[0]
    sx = (targets[:, 0] - grid.origin[0]) / grid.spacing
    sy = (targets[:, 1] - grid.origin[1]) / grid.spacing

    rows_parts, cols_parts, data_parts = [], [], []
    remaining = np.arange(m)

    for width in ([k, 2] if k != 2 else [2]):
        if remaining.size == 0:
            break
        valid = _window_validity(inside, width)
        if valid.size == 0:
            continue
        bi = np.floor(sx[remaining]).astype(int) - (width // 2 - 1)
        bj = np.floor(sy[remaining]).astype(int) - (width // 2 - 1)
        ci, cj, unresolved = _choose_windows(valid, bi, bj)
        hit = ~unresolved
        if hit.any():
            tgt = remaining[hit]
            off_i = ci[hit][:, None] + np.arange(width)[None, :]
            off_j = cj[hit][:, None] + np.arange(width)[None, :]
            wx = _lagrange_weights(off_i, sx[tgt])
            wy = _lagrange_weights(off_j, sy[tgt])
            w2 = wx[:, :, None] * wy[:, None, :]
            flat = off_i[:, :, None] * ny + off_j[:, None, :]
            rows_parts.append(np.repeat(tgt, width * width))
            cols_parts.append(flat.reshape(-1))
            data_parts.append(w2.reshape(-1))
        remaining = remaining[unresolved]

    if remaining.size:
        # Last resort: copy the nearest inside node.
        _, (ni, nj) = ndimage.distance_transform_edt(~inside, return_indices=True)
        ti = np.clip(np.rint(sx[remaining]).astype(int), 0, nx - 1)
        tj = np.clip(np.rint(sy[remaining]).astype(int), 0, ny - 1)
        rows_parts.append(remaining)
        cols_parts.append(ni[ti, tj] * ny + nj[ti, tj])
        data_parts.append(np.ones(remaining.size))

    rows = np.concatenate(rows_parts) if rows_parts else np.empty(0, int)
    cols = np.concatenate(cols_parts) if cols_parts else np.empty(0, int)
    data = np.concatenate(data_parts) if data_parts else np.empty(0)
    return sparse.csr_matrix((data, (rows, cols)), shape=(m, grid.n_nodes))
