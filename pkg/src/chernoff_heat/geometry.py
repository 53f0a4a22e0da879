"""Closed-form domain geometry.

Every domain knows its signed distance (negative inside), the closest
boundary point with its parameter, the outward unit normal, and the
reflection of a near-boundary point through the boundary.  All point
operations are vectorised: 1-d domains take scalars or arrays of shape
``(...)``, 2-d domains take arrays of shape ``(..., 2)``.

The reflection map is only well defined inside the tubular neighbourhood
of radius :meth:`DomainGeometry.tubular_radius`; outside it the closest
boundary point is not unique and the point operations raise
:class:`~chernoff_heat.errors.OutsideTubularNeighborhood`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateGeometry, OutsideTubularNeighborhood

__all__ = [
    "BoundaryPoint",
    "DomainGeometry",
    "Interval",
    "Disk",
    "StarDomain",
]

# Samples used for dense boundary scans (reach estimate, bounding box).
_DENSE_SAMPLES = 4096
# Safety factor applied to the reach estimate of free-form boundaries.
_REACH_SAFETY = 0.5


@dataclass(frozen=True)
class BoundaryPoint:
    """A boundary location together with its parameter.

    ``param`` is the endpoint index (0 or 1) on an interval and the polar
    angle on a 2-d boundary.
    """

    position: np.ndarray
    param: float


class DomainGeometry:
    """Common interface of the supported domain families."""

    ndim: int

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def tolerance(self) -> float:
        """Geometric tolerance used for boundary membership tests."""
        return 1e-12 * self.diameter

    @property
    def tubular_radius(self) -> float:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def signed_distance(self, x):
        """Distance to the boundary, negative inside the domain.  Total."""
        raise NotImplementedError

    def contains(self, x):
        """Membership in the closed domain, up to ``tolerance``."""
        return self.signed_distance(x) <= self.tolerance

    def boundary_position(self, param):
        raise NotImplementedError

    def outward_normal(self, param):
        """Outward unit normal at the boundary point with parameter ``param``."""
        raise NotImplementedError

    def closest_params(self, x):
        """Closest-point parameters for an array of points.

        Total as a computation; uniqueness is only guaranteed strictly
        inside the tubular neighbourhood.
        """
        raise NotImplementedError

    def closest_boundary_point(self, x) -> BoundaryPoint:
        """Unique closest boundary point of a single point ``x``.

        Raises
        ------
        OutsideTubularNeighborhood
            If ``|signed_distance(x)| >= tubular_radius``, where the
            projection may fail to be unique.
        """
        d = float(self.signed_distance(x))
        if abs(d) >= self.tubular_radius:
            raise OutsideTubularNeighborhood(
                f"point at signed distance {d:.6g} lies outside the tubular "
                f"neighbourhood of radius {self.tubular_radius:.6g}"
            )
        param = self.closest_params(x)
        pos = self.boundary_position(param)
        return BoundaryPoint(position=np.asarray(pos, dtype=float), param=float(param))

    def reflect(self, x):
        """Mirror image through the boundary: ``x_tilde = x - 2 d nu``.

        Requires every point to lie strictly inside the tubular
        neighbourhood.
        """
        d = self.signed_distance(x)
        if np.any(np.abs(d) >= self.tubular_radius):
            raise OutsideTubularNeighborhood(
                "reflection requested outside the tubular neighbourhood"
            )
        return self._reflect_inside_tube(x, d)

    def _reflect_inside_tube(self, x, d):
        params = self.closest_params(x)
        nu = self.outward_normal(params)
        if self.ndim == 1:
            return np.asarray(x, dtype=float) - 2.0 * d * nu
        return np.asarray(x, dtype=float) - 2.0 * d[..., None] * nu


class Interval(DomainGeometry):
    """Open interval ``(a, b)`` on the line."""

    ndim = 1

    def __init__(self, a: float, b: float):
        if not b > a:
            raise DegenerateGeometry(f"interval requires a < b, got ({a}, {b})")
        self.a = float(a)
        self.b = float(b)

    def __repr__(self) -> str:
        return f"Interval({self.a}, {self.b})"

    @property
    def diameter(self) -> float:
        return self.b - self.a

    @property
    def tubular_radius(self) -> float:
        return 0.5 * (self.b - self.a)

    def bounding_box(self):
        return np.array([self.a]), np.array([self.b])

    def signed_distance(self, x):
        x = np.asarray(x, dtype=float)
        return np.maximum(self.a - x, x - self.b)

    def closest_params(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0.5 * (self.a + self.b), 0.0, 1.0)

    def boundary_position(self, param):
        param = np.asarray(param, dtype=float)
        return np.where(param < 0.5, self.a, self.b)

    def outward_normal(self, param):
        param = np.asarray(param, dtype=float)
        return np.where(param < 0.5, -1.0, 1.0)


class Disk(DomainGeometry):
    """Open disk with given center and radius."""

    ndim = 2

    def __init__(self, center, radius: float):
        if not radius > 0:
            raise DegenerateGeometry(f"disk radius must be positive, got {radius}")
        self.center = np.asarray(center, dtype=float).reshape(2)
        self.radius = float(radius)

    def __repr__(self) -> str:
        return f"Disk(center={self.center.tolist()}, radius={self.radius})"

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def tubular_radius(self) -> float:
        return self.radius

    def bounding_box(self):
        r = np.full(2, self.radius)
        return self.center - r, self.center + r

    def signed_distance(self, x):
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x - self.center, axis=-1) - self.radius

    def closest_params(self, x):
        x = np.asarray(x, dtype=float)
        rel = x - self.center
        return np.arctan2(rel[..., 1], rel[..., 0])

    def boundary_position(self, param):
        param = np.asarray(param, dtype=float)
        unit = np.stack([np.cos(param), np.sin(param)], axis=-1)
        return self.center + self.radius * unit

    def outward_normal(self, param):
        param = np.asarray(param, dtype=float)
        return np.stack([np.cos(param), np.sin(param)], axis=-1)

    def _reflect_inside_tube(self, x, d):
        x = np.asarray(x, dtype=float)
        rel = x - self.center
        r = np.linalg.norm(rel, axis=-1)
        scale = (2.0 * self.radius - r) / r
        return self.center + scale[..., None] * rel


class StarDomain(DomainGeometry):
    """Star-shaped 2-d domain with trigonometric-polynomial radius.

    The boundary is ``p(theta) = center + r(theta) (cos theta, sin theta)``
    with ``r(theta) = sum_k cos_coeffs[k] cos(k theta) + sin_coeffs[k]
    sin(k theta)``.  The radius function must stay strictly positive.

    Closest-point queries run a dense-sample lookup followed by Newton
    refinement of the squared distance; the tubular radius is a safety
    factor times a reach estimate combining the curvature bound with a
    pairwise chord test over dense boundary samples.
    """

    ndim = 2

    def __init__(self, center, cos_coeffs, sin_coeffs):
        self.center = np.asarray(center, dtype=float).reshape(2)
        self.cos_coeffs = np.atleast_1d(np.asarray(cos_coeffs, dtype=float))
        self.sin_coeffs = np.atleast_1d(np.asarray(sin_coeffs, dtype=float))

        theta = np.linspace(0.0, 2.0 * np.pi, _DENSE_SAMPLES, endpoint=False)
        r = self.radius_at(theta)
        if r.min() <= 0.0:
            raise DegenerateGeometry(
                f"radius function reaches {r.min():.6g}; boundary must stay "
                "strictly positive around the center"
            )
        self._theta_dense = theta
        self._pos_dense = self.boundary_position(theta)
        self._tree = cKDTree(self._pos_dense)
        self._tube = self._estimate_tubular_radius()
        if self._tube <= 0.0:
            raise DegenerateGeometry("tubular radius estimate is not positive")

    def __repr__(self) -> str:
        return (
            f"StarDomain(center={self.center.tolist()}, "
            f"cos={self.cos_coeffs.tolist()}, sin={self.sin_coeffs.tolist()})"
        )

    # -- radius function and derivatives ---------------------------------

    def radius_at(self, theta, order: int = 0):
        """``r(theta)`` or its ``order``-th derivative."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for k, c in enumerate(self.cos_coeffs):
            if c != 0.0 or (k == 0 and order == 0):
                out = out + c * _trig_deriv(np.cos, k, theta, order)
        for k, s in enumerate(self.sin_coeffs):
            if s != 0.0:
                out = out + s * _trig_deriv(np.sin, k, theta, order)
        return out

    @cached_property
    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    @property
    def tubular_radius(self) -> float:
        return self._tube

    def bounding_box(self):
        lo = self._pos_dense.min(axis=0)
        hi = self._pos_dense.max(axis=0)
        return lo, hi

    # -- boundary parametrisation ----------------------------------------

    def boundary_position(self, param):
        param = np.asarray(param, dtype=float)
        r = self.radius_at(param)
        unit = np.stack([np.cos(param), np.sin(param)], axis=-1)
        return self.center + r[..., None] * unit

    def _tangent(self, param):
        param = np.asarray(param, dtype=float)
        r = self.radius_at(param)
        dr = self.radius_at(param, order=1)
        ct, st = np.cos(param), np.sin(param)
        return np.stack([dr * ct - r * st, dr * st + r * ct], axis=-1)

    def outward_normal(self, param):
        t = self._tangent(param)
        n = np.stack([t[..., 1], -t[..., 0]], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def curvature(self, param):
        """Signed curvature of the boundary curve (positive for convex arcs)."""
        param = np.asarray(param, dtype=float)
        r = self.radius_at(param)
        dr = self.radius_at(param, order=1)
        ddr = self.radius_at(param, order=2)
        num = r * r + 2.0 * dr * dr - r * ddr
        return num / (r * r + dr * dr) ** 1.5

    # -- closest point ----------------------------------------------------

    def closest_params(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 2)
        _, idx = self._tree.query(flat)
        theta = self._theta_dense[idx]
        theta = self._newton_refine(flat, theta)
        return theta.reshape(x.shape[:-1])

    def _newton_refine(self, pts, theta, iters: int = 40):
        # Minimise g(theta) = |pts - p(theta)|^2 / 2 from the dense seed.
        tol = 1e-15 * max(self.diameter, 1.0)
        for _ in range(iters):
            p = self.boundary_position(theta)
            t = self._tangent(theta)
            rel = pts - p
            g1 = -np.einsum("ij,ij->i", rel, t)
            ddr = self.radius_at(theta, order=2)
            r = self.radius_at(theta)
            dr = self.radius_at(theta, order=1)
            ct, st = np.cos(theta), np.sin(theta)
            pdd = np.stack(
                [
                    (ddr - r) * ct - 2.0 * dr * st,
                    (ddr - r) * st + 2.0 * dr * ct,
                ],
                axis=-1,
            )
            g2 = np.einsum("ij,ij->i", t, t) - np.einsum("ij,ij->i", rel, pdd)
            g2 = np.where(g2 > 0.0, g2, np.einsum("ij,ij->i", t, t))
            step = g1 / g2
            theta = theta - step
            if np.max(np.abs(step)) * np.max(np.abs(t)) < tol:
                break
        return theta

    def signed_distance(self, x):
        x = np.asarray(x, dtype=float)
        theta = self.closest_params(x)
        p = self.boundary_position(theta)
        dist = np.linalg.norm(x - p, axis=-1)
        rel = x - self.center
        theta_x = np.arctan2(rel[..., 1], rel[..., 0])
        inside = np.linalg.norm(rel, axis=-1) < self.radius_at(theta_x)
        return np.where(inside, -dist, dist)

    def _estimate_tubular_radius(self) -> float:
        kappa = self.curvature(self._theta_dense)
        curv_bound = 1.0 / np.abs(kappa).max()
        # Pairwise reach bound |p-q|^2 / (2 |<q-p, nu_p>|); adjacent pairs
        # recover the curvature limit, distant pairs catch bottlenecks.
        pos = self._pos_dense[::4]
        nu = self.outward_normal(self._theta_dense[::4])
        diff = pos[None, :, :] - pos[:, None, :]
        dist2 = np.einsum("ijk,ijk->ij", diff, diff)
        proj = np.abs(np.einsum("ijk,ik->ij", diff, nu))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = dist2 / (2.0 * proj)
        np.fill_diagonal(ratio, np.inf)
        ratio[proj < 1e-14 * self.diameter] = np.inf
        pair_bound = float(ratio.min())
        return _REACH_SAFETY * min(curv_bound, pair_bound)


def _trig_deriv(base, k: int, theta, order: int):
    """``order``-th derivative of ``cos(k theta)`` or ``sin(k theta)``."""
    if k == 0:
        if base is np.cos:
            return np.ones_like(theta) if order == 0 else np.zeros_like(theta)
        return np.zeros_like(theta)
    arg = k * theta
    scale = float(k) ** order
    if base is np.cos:
        cycle = [np.cos(arg), -np.sin(arg), -np.cos(arg), np.sin(arg)]
    else:
        cycle = [np.sin(arg), np.cos(arg), -np.sin(arg), -np.cos(arg)]
    return scale * cycle[order % 4]
