"""Reference solutions the operator-splitting scheme is measured against.

Two independent routes are provided.  On an interval the heat equation
with Robin or Dirichlet ends is solved by eigenfunction expansion; the
eigenfrequencies come from bracketed root finding on the transcendental
secular equation and the coefficients from composite Simpson quadrature.
On a disk, radially symmetric data is handled by a Crank-Nicolson march
in the radius with Richardson extrapolation over a simultaneous mesh
halving, which also yields a defensible error estimate.

Nothing here shares code with the splitting scheme, so agreement
between the two is meaningful evidence rather than a tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded
from scipy.optimize import brentq
from scipy.special import j0, j1

from .errors import (
    ReferenceUnavailable,
    RootBracketFailure,
    StepRejected,
    TruncationInsufficient,
)
from .fields import ScalarField
from .geometry import Interval

__all__ = [
    "robin_eigenvalues",
    "IntervalEigenExpansion",
    "series_solve",
    "RadialSolution",
    "radial_crank_nicolson",
    "compare_fields",
    "disk_robin_frequency",
]

_BRENTQ_KW = dict(xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)


def _secular(omega: float, b0: float, b1: float) -> float:
    # (w^2 - b0 b1) sin w - (b0 + b1) w cos w = 0 on the unit interval.
    return (omega * omega - b0 * b1) * math.sin(omega) - (b0 + b1) * omega * math.cos(omega)


def robin_eigenvalues(beta_left: float, beta_right: float, count: int) -> np.ndarray:
    """First ``count`` eigenfrequencies of ``-u''`` on (0, 1) with
    ``u'(0) = beta_left u(0)`` and ``-u'(1) = beta_right u(1)``.

    Eigenvalues are the squares of the returned frequencies.  For the
    pure Neumann case the constant mode contributes a leading zero.
    """
    if beta_left < 0 or beta_right < 0:
        raise ValueError("Robin coefficients must be nonnegative")
    if count < 1:
        raise ValueError("need at least one eigenfrequency")
    if beta_left == 0.0 and beta_right == 0.0:
        return np.pi * np.arange(count)

    b0, b1 = float(beta_left), float(beta_right)
    omegas = []
    # Sturm theory puts exactly one frequency strictly inside each interval
    # ((k-1) pi, k pi).  A sign-change scan locates the bracket even when the
    # root crowds an endpoint (large coefficients), then brentq refines it.
    for k in range(1, count + 1):
        left, right = (k - 1) * math.pi, k * math.pi
        w = left + (right - left) * np.linspace(1e-9, 1.0, 2001)
        f = (w * w - b0 * b1) * np.sin(w) - (b0 + b1) * w * np.cos(w)
        flips = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
        exact = np.nonzero(f == 0.0)[0]
        if exact.size:
            omegas.append(float(w[exact[0]]))
        elif flips.size:
            i = flips[0]
            omegas.append(
                brentq(_secular, w[i], w[i + 1], args=(b0, b1), **_BRENTQ_KW)
            )
        else:
            raise RootBracketFailure(
                f"secular function does not change sign on [{left:.6g}, {right:.6g}]"
            )
    return np.array(omegas)


@dataclass(frozen=True)
class _Mode:
    omega: float
    decay: float          # eigenvalue on the physical interval
    amplitude: float      # L2 normalisation on the physical interval
    beta_left: float

    def profile(self, s: np.ndarray) -> np.ndarray:
        """Unnormalised eigenfunction on the unit interval coordinate."""
        if self.omega == 0.0:
            return np.ones_like(s)
        return np.cos(self.omega * s) + (self.beta_left / self.omega) * np.sin(self.omega * s)


class IntervalEigenExpansion:
    """Separation-of-variables heat solver on an interval.

    Parameters
    ----------
    domain:
        The interval to solve on.
    boundary:
        ``"robin"`` with coefficients ``(beta_left, beta_right)`` scaled
        for the physical interval, or ``"dirichlet"``.
    count:
        Number of modes retained.
    quad_points:
        Composite-Simpson node count for the coefficient integrals
        (odd; chosen from ``count`` when omitted).
    """

    def __init__(
        self,
        domain: Interval,
        boundary: str = "robin",
        beta: tuple[float, float] = (0.0, 0.0),
        count: int = 64,
        quad_points: int | None = None,
    ):
        if count < 1:
            raise ValueError("need at least one mode")
        self.domain = domain
        self.boundary = boundary
        length = domain.b - domain.a
        if quad_points is None:
            quad_points = max(4097, 64 * count + 1)
        if quad_points % 2 == 0:
            quad_points += 1
        self._squad = np.linspace(0.0, 1.0, quad_points)

        if boundary == "dirichlet":
            omegas = np.pi * np.arange(1, count + 1)
            beta_unit = float("nan")
        elif boundary == "robin":
            # The unit-interval coefficient absorbs one length factor.
            beta_unit = (beta[0] * length, beta[1] * length)
            omegas = robin_eigenvalues(beta_unit[0], beta_unit[1], count)
            beta_unit = beta_unit[0]
        else:
            raise ValueError(f"unknown boundary condition {boundary!r}")

        self.modes: list[_Mode] = []
        for omega in omegas:
            mode = _Mode(float(omega), (omega / length) ** 2, 1.0, 0.0 if boundary == "dirichlet" else beta_unit)
            if boundary == "dirichlet":
                prof = np.sin(omega * self._squad)
            else:
                prof = mode.profile(self._squad)
            norm_sq = simpson(prof * prof, x=self._squad) * length
            self.modes.append(
                _Mode(mode.omega, mode.decay, 1.0 / math.sqrt(norm_sq), mode.beta_left)
            )

    def _profiles(self, s: np.ndarray) -> np.ndarray:
        rows = []
        for mode in self.modes:
            if self.boundary == "dirichlet":
                rows.append(np.sin(mode.omega * s) * mode.amplitude)
            else:
                rows.append(mode.profile(s) * mode.amplitude)
        return np.array(rows)

    def coefficients(self, u0: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        a, b = self.domain.a, self.domain.b
        x = a + (b - a) * self._squad
        samples = np.asarray(u0(x), dtype=float)
        basis = self._profiles(self._squad)
        return simpson(basis * samples, x=self._squad, axis=-1) * (b - a)

    def solve(
        self,
        u0: Callable[[np.ndarray], np.ndarray],
        t: float,
        x: np.ndarray,
        tol: float = 1e-8,
    ) -> np.ndarray:
        """Evaluate the solution at time ``t`` on points ``x``.

        Raises
        ------
        TruncationInsufficient
            If the last retained term ``|c_K| exp(-lambda_K t)`` is not
            below ``tol``, so the truncation cannot be trusted.
        """
        if t < 0:
            raise ValueError("time must be nonnegative")
        coeff = self.coefficients(u0)
        decay = np.array([m.decay for m in self.modes])
        tail = abs(coeff[-1]) * math.exp(-decay[-1] * t)
        if tail > tol:
            raise TruncationInsufficient(
                f"last retained mode contributes {tail:.3e} > {tol:.3e}; "
                "raise the mode count or the solve time"
            )
        x = np.asarray(x, dtype=float)
        s = (x - self.domain.a) / (self.domain.b - self.domain.a)
        basis = self._profiles(s)
        return (coeff * np.exp(-decay * t)) @ basis


def series_solve(
    expansion: IntervalEigenExpansion,
    u0: Callable[[np.ndarray], np.ndarray],
    t: float,
    x: np.ndarray,
    tol: float = 1e-8,
) -> np.ndarray:
    """Functional wrapper around :meth:`IntervalEigenExpansion.solve`."""
    return expansion.solve(u0, t, x, tol=tol)


@dataclass(frozen=True)
class RadialSolution:
    """Radial profile with a Richardson error estimate."""

    radii: np.ndarray
    values: np.ndarray
    error_estimate: float
    beta: float

    def __call__(self, r) -> np.ndarray:
        # Clamped spline: even symmetry at the centre, the boundary
        # condition fixes the outer slope.
        spline = CubicSpline(
            self.radii,
            self.values,
            bc_type=((1, 0.0), (1, -self.beta * self.values[-1])),
        )
        return spline(np.abs(np.asarray(r, dtype=float)))


def _cn_march(radius: float, beta: float, u0_radial, t: float, m: int, steps: int) -> np.ndarray:
    dr = radius / m
    dt = t / steps
    r = np.arange(m + 1) * dr
    u = np.asarray(u0_radial(r), dtype=float).copy()

    # Rows of the radial operator u_rr + u_r / r in banded (1, 1) storage.
    lower = np.zeros(m + 1)
    diag = np.zeros(m + 1)
    upper = np.zeros(m + 1)
    diag[0], upper[0] = -4.0 / dr**2, 4.0 / dr**2
    i = np.arange(1, m)
    lower[i] = 1.0 / dr**2 - 1.0 / (2.0 * i * dr**2)
    diag[i] = -2.0 / dr**2
    upper[i] = 1.0 / dr**2 + 1.0 / (2.0 * i * dr**2)
    # Ghost node eliminated through u'(R) = -beta u(R).
    lower[m] = 2.0 / dr**2
    diag[m] = -2.0 / dr**2 - 2.0 * beta / dr - beta / radius

    ab = np.zeros((3, m + 1))
    ab[0, 1:] = -0.5 * dt * upper[:-1]
    ab[1, :] = 1.0 - 0.5 * dt * diag
    ab[2, :-1] = -0.5 * dt * lower[1:]
    for _ in range(steps):
        rhs = u + 0.5 * dt * (
            np.concatenate(([0.0], lower[1:] * u[:-1]))
            + diag * u
            + np.concatenate((upper[:-1] * u[1:], [0.0]))
        )
        u = solve_banded((1, 1), ab, rhs)
    return u


def radial_crank_nicolson(
    radius: float,
    beta: float,
    u0_radial: Callable[[np.ndarray], np.ndarray],
    t: float,
    dr: float,
    dt: float,
    tol: float = 1e-6,
) -> RadialSolution:
    """Heat flow of radial data on a disk with a Robin rim.

    The march runs twice, once on ``(dr, dt)`` and once on the halved
    pair; Richardson extrapolation of the second-order scheme gives the
    returned profile and an error estimate.

    Raises
    ------
    StepRejected
        If the estimate exceeds ``tol``; the message names the steps to
        halve.
    """
    if radius <= 0 or t <= 0 or dr <= 0 or dt <= 0:
        raise ValueError("radius, time and both steps must be positive")
    if beta < 0:
        raise ValueError("Robin coefficient must be nonnegative")
    m = max(4, round(radius / dr))
    steps = max(2, math.ceil(t / dt))
    coarse = _cn_march(radius, beta, u0_radial, t, m, steps)
    fine = _cn_march(radius, beta, u0_radial, t, 2 * m, 2 * steps)
    diff = float(np.max(np.abs(fine[::2] - coarse)))
    estimate = diff / 3.0
    if estimate > tol:
        raise StepRejected(
            f"Richardson estimate {estimate:.3e} exceeds {tol:.3e}; halve "
            f"dr={radius / m:.3e} and dt={t / steps:.3e} and retry"
        )
    values = (4.0 * fine[::2] - coarse) / 3.0
    return RadialSolution(
        radii=np.arange(m + 1) * (radius / m),
        values=values,
        error_estimate=estimate,
        beta=float(beta),
    )


def compare_fields(
    numeric: ScalarField,
    reference,
    mask: np.ndarray | None = None,
) -> tuple[float, float]:
    """Sup and grid-weighted L2 distance between a field and a reference.

    ``reference`` may be a plain array on the same grid, another field,
    or a callable evaluated on the grid nodes.  ``mask`` restricts the
    comparison, typically to the closed domain.
    """
    grid = numeric.grid
    if isinstance(reference, ScalarField):
        if reference.grid is not grid and (
            reference.grid.shape != grid.shape
            or abs(reference.grid.spacing - grid.spacing) > 1e-12 * grid.spacing
        ):
            raise ReferenceUnavailable("fields live on different grids")
        ref_values = reference.values
    elif callable(reference):
        ref_values = np.asarray(reference(grid.nodes()), dtype=float)
    else:
        ref_values = np.asarray(reference, dtype=float)
        if ref_values.shape != grid.shape:
            raise ReferenceUnavailable(
                f"reference shape {ref_values.shape} does not match grid {grid.shape}"
            )
    diff = numeric.values - ref_values
    if mask is not None:
        diff = diff[mask]
    if diff.size == 0:
        return 0.0, 0.0
    sup = float(np.max(np.abs(diff)))
    l2 = float(math.sqrt(grid.spacing ** grid.ndim * float(np.sum(diff * diff))))
    return sup, l2


def disk_robin_frequency(radius: float, beta: float, index: int = 1) -> float:
    """``index``-th positive root of ``beta J0(w R) = w J1(w R)``.

    These are the radial eigenfrequencies of a disk with a Robin rim;
    the associated eigenvalue is the square of the returned value.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if beta <= 0:
        raise ValueError("a positive Robin coefficient is required here")
    if index < 1:
        raise ValueError("index counts from 1")

    def f(w: float) -> float:
        return beta * j0(w * radius) - w * j1(w * radius)

    # Scan for sign changes; roots are simple and O(pi / R) apart.
    step = 0.05 * math.pi / radius
    found = 0
    w_prev, f_prev = step * 1e-3, f(step * 1e-3)
    w = step
    for _ in range(200000):
        f_cur = f(w)
        if f_prev == 0.0:
            found += 1
            if found == index:
                return w_prev
        elif f_prev * f_cur < 0:
            found += 1
            if found == index:
                return brentq(f, w_prev, w, **_BRENTQ_KW)
        w_prev, f_prev = w, f_cur
        w += step
    raise RootBracketFailure(
        f"could not locate radial frequency {index} within {w:.3g}"
    )
