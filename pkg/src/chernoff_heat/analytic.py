"""Closed-form test functions with exact first and second derivatives.

These feed the analytic (callable-path) checks: boundary-condition
residuals, one-step consistency against the exact Laplacian, and
free-space comparisons.  ``value``, ``gradient`` and ``laplacian`` are
vectorised with the same point conventions as the geometry module.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import j0, j1

__all__ = [
    "SmoothTestFunction",
    "Polynomial1D",
    "SineMode1D",
    "CosineMode1D",
    "GaussianBump1D",
    "Constant",
    "RadialPolynomial2D",
    "DiskBesselMode",
    "SeparableProduct2D",
    "one_sided_laplacian",
]


class SmoothTestFunction:
    """Scalar function with exact gradient and Laplacian."""

    ndim: int

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def laplacian(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)


class Polynomial1D(SmoothTestFunction):
    """Polynomial ``sum_k coeffs[k] x^k`` on the line."""

    ndim = 1

    def __init__(self, coeffs):
        self.poly = Polynomial(np.asarray(coeffs, dtype=float))
        self._d1 = self.poly.deriv(1)
        self._d2 = self.poly.deriv(2)

    def value(self, x):
        return self.poly(np.asarray(x, dtype=float))

    def gradient(self, x):
        return self._d1(np.asarray(x, dtype=float))

    def laplacian(self, x):
        return self._d2(np.asarray(x, dtype=float))


class _Mode1D(SmoothTestFunction):
    ndim = 1

    def __init__(self, k: int, a: float = 0.0, b: float = 1.0):
        self.k = int(k)
        self.a, self.b = float(a), float(b)
        self.omega = self.k * np.pi / (self.b - self.a)

    def _phase(self, x):
        return self.omega * (np.asarray(x, dtype=float) - self.a)


class SineMode1D(_Mode1D):
    """``sin(k pi (x - a) / (b - a))``; vanishes at both endpoints."""

    def value(self, x):
        return np.sin(self._phase(x))

    def gradient(self, x):
        return self.omega * np.cos(self._phase(x))

    def laplacian(self, x):
        return -self.omega**2 * np.sin(self._phase(x))


class CosineMode1D(_Mode1D):
    """``cos(k pi (x - a) / (b - a))``; Neumann-compatible at both endpoints."""

    def value(self, x):
        return np.cos(self._phase(x))

    def gradient(self, x):
        return -self.omega * np.sin(self._phase(x))

    def laplacian(self, x):
        return -self.omega**2 * np.cos(self._phase(x))


class GaussianBump1D(SmoothTestFunction):
    """``exp(-(x - c)^2 / (4 s))``: free-space heat evolution stays Gaussian."""

    ndim = 1

    def __init__(self, center: float, s: float):
        self.center = float(center)
        self.s = float(s)

    def value(self, x):
        z = np.asarray(x, dtype=float) - self.center
        return np.exp(-(z * z) / (4.0 * self.s))

    def gradient(self, x):
        z = np.asarray(x, dtype=float) - self.center
        return -z / (2.0 * self.s) * self.value(x)

    def laplacian(self, x):
        z = np.asarray(x, dtype=float) - self.center
        return (z * z / (4.0 * self.s**2) - 1.0 / (2.0 * self.s)) * self.value(x)

    def evolved(self, t: float) -> "GaussianBump1D":
        """Closed-form free-space evolution by time ``t`` (unnormalised)."""
        out = GaussianBump1D(self.center, self.s + t)
        out._scale = np.sqrt(self.s / (self.s + t))
        return out

    _scale = 1.0

    def __call__(self, x):
        return self._scale * self.value(x)


class Constant(SmoothTestFunction):
    def __init__(self, value: float, ndim: int = 1):
        self.c = float(value)
        self.ndim = int(ndim)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape if self.ndim == 1 else x.shape[:-1]
        return np.full(shape, self.c)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self.ndim == 1:
            return np.zeros(x.shape)
        return np.zeros(x.shape)

    def laplacian(self, x):
        return np.zeros_like(self.value(x))


class RadialPolynomial2D(SmoothTestFunction):
    """``sum_k coeffs[k] r^{2k}`` about a center; smooth through r = 0."""

    ndim = 2

    def __init__(self, coeffs, center=(0.0, 0.0)):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.center = np.asarray(center, dtype=float).reshape(2)

    def _r2(self, x):
        rel = np.asarray(x, dtype=float) - self.center
        return np.einsum("...i,...i->...", rel, rel), rel

    def value(self, x):
        r2, _ = self._r2(x)
        out = np.zeros_like(r2)
        for k in range(len(self.coeffs) - 1, -1, -1):
            out = out * r2 + self.coeffs[k]
        return out

    def gradient(self, x):
        r2, rel = self._r2(x)
        # d/dx sum a_k (r^2)^k = (sum a_k k (r^2)^{k-1}) * 2 rel
        acc = np.zeros_like(r2)
        for k in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * r2 + k * self.coeffs[k]
        return 2.0 * acc[..., None] * rel

    def laplacian(self, x):
        r2, _ = self._r2(x)
        out = np.zeros_like(r2)
        for k in range(len(self.coeffs) - 1, 0, -1):
            out = out * r2 + 4.0 * k * k * self.coeffs[k]
        return out

    def radial_profile(self):
        """The profile as a function of the radius, for radial references."""
        coeffs = self.coeffs

        def profile(r):
            r2 = np.asarray(r, dtype=float) ** 2
            out = np.zeros_like(r2)
            for k in range(len(coeffs) - 1, -1, -1):
                out = out * r2 + coeffs[k]
            return out

        return profile


class DiskBesselMode(SmoothTestFunction):
    """``J0(omega r)`` about a center; ``laplacian = -omega^2 J0(omega r)``."""

    ndim = 2

    def __init__(self, omega: float, center=(0.0, 0.0)):
        self.omega = float(omega)
        self.center = np.asarray(center, dtype=float).reshape(2)

    def value(self, x):
        rel = np.asarray(x, dtype=float) - self.center
        r = np.linalg.norm(rel, axis=-1)
        return j0(self.omega * r)

    def gradient(self, x):
        rel = np.asarray(x, dtype=float) - self.center
        r = np.linalg.norm(rel, axis=-1)
        # J0' = -J1; J1(z)/z -> 1/2 as z -> 0 keeps the limit finite.
        with np.errstate(invalid="ignore", divide="ignore"):
            factor = np.where(
                r > 0.0,
                -self.omega * j1(self.omega * r) / np.where(r > 0.0, r, 1.0),
                -0.5 * self.omega**2,
            )
        return factor[..., None] * rel

    def laplacian(self, x):
        return -self.omega**2 * self.value(x)

    def radial_profile(self):
        omega = self.omega
        return lambda r: j0(omega * np.asarray(r, dtype=float))


class SeparableProduct2D(SmoothTestFunction):
    """Product ``f(x) g(y)`` of two 1-d test functions."""

    ndim = 2

    def __init__(self, fx: SmoothTestFunction, fy: SmoothTestFunction):
        self.fx, self.fy = fx, fy

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.fx.value(x[..., 0]) * self.fy.value(x[..., 1])

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        gx = self.fx.gradient(x[..., 0]) * self.fy.value(x[..., 1])
        gy = self.fx.value(x[..., 0]) * self.fy.gradient(x[..., 1])
        return np.stack([gx, gy], axis=-1)

    def laplacian(self, x):
        x = np.asarray(x, dtype=float)
        return self.fx.laplacian(x[..., 0]) * self.fy.value(x[..., 1]) + self.fx.value(
            x[..., 0]
        ) * self.fy.laplacian(x[..., 1])


def one_sided_laplacian(f, base, normal, eps: float, side: int):
    """Boundary limit of the Laplacian of ``f`` approached from one side.

    ``side`` is +1 along the outward normal and -1 against it.  The
    estimate is the Richardson combination ``2 L(eps) - L(2 eps)`` of
    centred second differences ``L`` taken at offset points, so every
    sample stays strictly on the chosen side and the offset bias cancels
    to second order.  Useful for detecting Laplacian jumps of extended
    fields across the boundary.
    """
    if side not in (-1, 1):
        raise ValueError("side must be +1 (outward) or -1 (inward)")
    if eps <= 0:
        raise ValueError("offset must be positive")
    base = np.asarray(base, dtype=float)
    normal = np.asarray(normal, dtype=float)

    def second_difference(s: float) -> float:
        center = base + side * s * normal
        arm = 0.5 * s
        if base.ndim == 0 or base.shape == ():
            stencil = f(center - arm) - 2.0 * f(center) + f(center + arm)
        elif base.shape[-1] == 1:
            e = np.array([arm])
            stencil = f(center - e) - 2.0 * f(center) + f(center + e)
        else:
            e1 = np.array([arm, 0.0])
            e2 = np.array([0.0, arm])
            stencil = (
                f(center - e1)
                + f(center + e1)
                + f(center - e2)
                + f(center + e2)
                - 4.0 * f(center)
            )
        return float(stencil) / arm**2

    return 2.0 * second_difference(eps) - second_difference(2.0 * eps)
