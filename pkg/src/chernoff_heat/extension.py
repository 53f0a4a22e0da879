"""Extension operators that push boundary data into the collar.

The Robin extension copies a function across the boundary by reflection
and multiplies it with a kinking factor ``rho1(beta, d) = exp(-2 beta d)
chi(d)``, which bends the normal derivative to match the Robin condition
while keeping the Laplacian continuous through the boundary.  Variants:
sign-flipped reflection for Dirichlet, sharp zero extension, and the
constant-along-normals extension whose Laplacian jumps at the boundary
(kept as a counterexample).

Each operator has two routes.  The callable path composes exact
evaluations of ``u`` and is what the analytic invariant checks use; on
that route positivity and sup-contraction hold to the letter, since the
collar value is ``rho in [0, 1]`` times an exact evaluation of ``u`` at
a reflected point of the closed domain.  The field path acts on node
values with precomputed sparse interpolation at reflected points.  Its
stencils read closed-domain nodes only (windows shift inward near the
boundary), so collar values depend on the inside restriction alone; the
shifted windows extrapolate, which costs exact convexity at curved
boundaries but keeps the full interpolation order.
"""

from __future__ import annotations

import numpy as np

from .errors import CollarTooWide, NegativeArgument
from .fields import GridFrame, ScalarField
from .geometry import DomainGeometry

__all__ = [
    "smoothstep",
    "KinkProfile",
    "RobinCoefficient",
    "EndpointRobin",
    "FourierRobin",
    "RobinReflectionExtension",
    "DirichletReflectionExtension",
    "ZeroExtension",
    "ConstantNormalExtension",
    "extend_robin",
    "extend_dirichlet",
    "extend_zero",
    "extend_constant_normal",
    "interior_cutoff",
    "check_robin_bc",
]

_ORDER = {"linear": 1, "cubic": 3}


def smoothstep(s):
    """The classical flat step ``f(s) / (f(s) + f(1-s))`` with ``f = e^{-1/s}``.

    Identically 0 for ``s <= 0`` and 1 for ``s >= 1``, with all
    derivatives vanishing at both ends.
    """
    s_arr = np.asarray(s, dtype=float)
    out = np.zeros(s_arr.shape)
    out[s_arr >= 1.0] = 1.0
    mid = (s_arr > 0.0) & (s_arr < 1.0)
    if mid.any():
        sm = s_arr[mid]
        fa = np.exp(-1.0 / sm)
        fb = np.exp(-1.0 / (1.0 - sm))
        out[mid] = fa / (fa + fb)
    return out if isinstance(s, np.ndarray) else float(out)


class KinkProfile:
    """Kinking factor ``rho1(gamma, t) = exp(-2 gamma t) chi(t)``.

    ``chi`` is 1 on ``[0, ramp_start]`` and 0 from ``delta / 2`` on, with
    a smoothstep ramp in between.  ``ramp_start`` defaults to ``3 delta /
    8``: the plateau must reach at least ``delta / 8``, and a deep
    plateau keeps the kernel tail that leaks past the faithful part of
    the reflected collar negligible for the step sizes of interest.

    ``rho1(gamma, 0) = 1`` with time derivatives ``-2 gamma`` and
    ``4 gamma^2`` at 0, and ``rho1`` vanishes for ``t >= delta / 2``.
    """

    def __init__(self, delta: float, ramp_start: float | None = None):
        if delta <= 0:
            raise ValueError(f"tubular radius must be positive, got {delta}")
        self.delta = float(delta)
        self.ramp_start = 0.375 * delta if ramp_start is None else float(ramp_start)
        if not (delta / 8.0 <= self.ramp_start < delta / 2.0):
            raise ValueError(
                "ramp_start must lie in [delta / 8, delta / 2); the plateau "
                "has to cover at least the inner eighth of the tube"
            )

    def chi(self, t):
        """Cutoff: 1 on the plateau, 0 beyond ``delta / 2``."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise NegativeArgument("chi expects nonnegative distances")
        width = 0.5 * self.delta - self.ramp_start
        return smoothstep((0.5 * self.delta - np.asarray(t, float)) / width)

    def rho1(self, gamma, t, *, allow_negative_gamma: bool = False):
        """Kink value ``exp(-2 gamma t) chi(t)`` for ``gamma, t >= 0``.

        Negative couplings model boundary production instead of cooling
        and void the contraction property; they must be requested
        explicitly.
        """
        g_arr = np.asarray(gamma, dtype=float)
        if not allow_negative_gamma and np.any(g_arr < 0):
            raise NegativeArgument("negative Robin coupling passed to rho1")
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise NegativeArgument("rho1 expects nonnegative distances")
        out = np.exp(-2.0 * g_arr * t_arr) * self.chi(t_arr)
        return out if isinstance(out, np.ndarray) and out.shape else float(out)


class RobinCoefficient:
    """Nonnegative boundary coupling ``beta`` as a function of the parameter."""

    allow_negative = False

    def value_at_param(self, params):
        raise NotImplementedError


class EndpointRobin(RobinCoefficient):
    """Coupling pair ``(left, right)`` for interval domains."""

    def __init__(self, left: float, right: float, *, allow_negative: bool = False):
        if not allow_negative and (left < 0 or right < 0):
            raise ValueError(
                f"Robin couplings must be nonnegative, got ({left}, {right})"
            )
        self.left = float(left)
        self.right = float(right)
        self.allow_negative = bool(allow_negative)

    def value_at_param(self, params):
        params = np.asarray(params, dtype=float)
        return np.where(params < 0.5, self.left, self.right)


class FourierRobin(RobinCoefficient):
    """Trigonometric-polynomial coupling ``beta(theta)`` for 2-d boundaries."""

    def __init__(self, cos_coeffs, sin_coeffs, *, allow_negative: bool = False):
        self.cos_coeffs = np.atleast_1d(np.asarray(cos_coeffs, dtype=float))
        self.sin_coeffs = np.atleast_1d(
            np.asarray(sin_coeffs if len(np.atleast_1d(sin_coeffs)) else [0.0], float)
        )
        self.allow_negative = bool(allow_negative)
        theta = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
        low = float(self.value_at_param(theta).min())
        if not allow_negative and low < 0:
            raise ValueError(f"beta(theta) reaches {low:.6g}; must be nonnegative")

    def value_at_param(self, params):
        theta = np.asarray(params, dtype=float)
        out = np.zeros_like(theta)
        for k, c in enumerate(self.cos_coeffs):
            out = out + c * np.cos(k * theta)
        for k, s in enumerate(self.sin_coeffs):
            if k > 0:
                out = out + s * np.sin(k * theta)
        return out


def constant_beta(dom: DomainGeometry, value: float) -> RobinCoefficient:
    """Constant coupling in the representation matching the domain family."""
    if dom.ndim == 1:
        return EndpointRobin(value, value, allow_negative=value < 0)
    return FourierRobin([value], [], allow_negative=value < 0)


# ---------------------------------------------------------------------------
# Field-path operators


class _FieldExtension:
    """Shared machinery: pass through inside nodes, fill the collar."""

    needs_layers = True

    def __init__(self, frame: GridFrame, interpolation: str = "cubic"):
        if interpolation not in _ORDER:
            raise ValueError(f"unknown interpolation {interpolation!r}")
        self.frame = frame
        self.interpolation = interpolation
        if self.needs_layers:
            frame.check_collar_layers(4)

    def _collar_values(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply(self, values: np.ndarray) -> np.ndarray:
        frame = self.frame
        out = np.where(frame.inside, values, 0.0)
        if frame.collar.any():
            out[frame.collar] = self._collar_values(values)
        return out

    def apply_field(self, field: ScalarField) -> ScalarField:
        return ScalarField(field.grid, self.apply(field.values))


class RobinReflectionExtension(_FieldExtension):
    """Field path of the kinked reflection extension."""

    def __init__(
        self,
        frame: GridFrame,
        beta: RobinCoefficient,
        profile: KinkProfile,
        interpolation: str = "cubic",
    ):
        super().__init__(frame, interpolation)
        self.beta = beta
        self.profile = profile
        gammas = beta.value_at_param(frame.collar_params)
        self.rho = profile.rho1(
            gammas,
            frame.collar_distances,
            allow_negative_gamma=beta.allow_negative,
        )
        self._matrix = frame.reflection_matrix(_ORDER[interpolation])

    def _collar_values(self, values):
        return self.rho * (self._matrix @ values.ravel())


class DirichletReflectionExtension(_FieldExtension):
    """Sign-flipped reflection with the plain cutoff, no coupling."""

    def __init__(self, frame: GridFrame, profile: KinkProfile, interpolation="cubic"):
        super().__init__(frame, interpolation)
        self.profile = profile
        self.rho = profile.chi(frame.collar_distances)
        self._matrix = frame.reflection_matrix(_ORDER[interpolation])

    def _collar_values(self, values):
        return -self.rho * (self._matrix @ values.ravel())


class ZeroExtension(_FieldExtension):
    """Sharp zero extension: multiplication by the open-domain indicator."""

    needs_layers = False

    def __init__(self, frame: GridFrame):
        super().__init__(frame, "linear")

    def apply(self, values: np.ndarray) -> np.ndarray:
        return np.where(self.frame.strictly_inside, values, 0.0)


class ConstantNormalExtension(_FieldExtension):
    """Extend by the boundary value along normals, cut off with ``chi``.

    The Laplacian of the result jumps across the boundary; the operator
    exists to demonstrate that the product formula then fails.
    """

    def __init__(self, frame: GridFrame, profile: KinkProfile, interpolation="cubic"):
        super().__init__(frame, interpolation)
        self.profile = profile
        self.rho = profile.chi(frame.collar_distances)
        self._matrix = frame.foot_matrix(_ORDER[interpolation])

    def _collar_values(self, values):
        return self.rho * (self._matrix @ values.ravel())


# ---------------------------------------------------------------------------
# Callable path and functional wrappers


def _callable_extension(dom, u, collar_value):
    """Build ``x -> E u(x)`` from a rule for the collar region."""
    half = 0.5 * dom.tubular_radius
    tol = dom.tolerance

    def extended(x):
        d = np.asarray(dom.signed_distance(x), dtype=float)
        scalar = d.ndim == 0
        d = np.atleast_1d(d)
        x_arr = np.asarray(x, dtype=float)
        if dom.ndim == 1:
            x_arr = np.atleast_1d(x_arr)
        else:
            x_arr = x_arr.reshape(-1, 2) if x_arr.ndim == 1 else x_arr
            x_arr = np.atleast_2d(x_arr)
        out = np.zeros(d.shape)
        inside = d <= tol
        if inside.any():
            out[inside] = u(x_arr[inside])
        collar = (d > tol) & (d < half)
        if collar.any():
            out[collar] = collar_value(x_arr[collar], d[collar])
        return float(out[0]) if scalar else out.reshape(np.shape(dom.signed_distance(x)))

    return extended


def extend_robin(dom, beta, profile, u, interpolation: str = "cubic"):
    """Kinked reflection extension ``E_beta u``.

    ``u`` may be a callable (exact path) or a :class:`ScalarField`
    sampled on a grid framing the domain (interpolated path).
    """
    if isinstance(u, ScalarField):
        frame = GridFrame(dom, u.grid)
        op = RobinReflectionExtension(frame, beta, profile, interpolation)
        return op.apply_field(u)

    def collar_value(pts, d):
        params = dom.closest_params(pts)
        gammas = beta.value_at_param(params)
        rho = profile.rho1(gammas, d, allow_negative_gamma=beta.allow_negative)
        return rho * np.asarray(u(dom._reflect_inside_tube(pts, d)), dtype=float)

    return _callable_extension(dom, u, collar_value)


def extend_dirichlet(dom, profile, u, interpolation: str = "cubic"):
    """Sign-flipped reflection extension ``E_D u``."""
    if isinstance(u, ScalarField):
        frame = GridFrame(dom, u.grid)
        op = DirichletReflectionExtension(frame, profile, interpolation)
        return op.apply_field(u)

    def collar_value(pts, d):
        rho = profile.chi(d)
        return -rho * np.asarray(u(dom._reflect_inside_tube(pts, d)), dtype=float)

    return _callable_extension(dom, u, collar_value)


def extend_zero(dom, u):
    """Zero extension: ``u`` on the closed domain, 0 elsewhere."""
    if isinstance(u, ScalarField):
        frame = GridFrame(dom, u.grid)
        return ZeroExtension(frame).apply_field(u)

    def collar_value(pts, d):
        return np.zeros(d.shape)

    return _callable_extension(dom, u, collar_value)


def extend_constant_normal(dom, profile, u, interpolation: str = "cubic"):
    """Constant-along-normals extension with the plain cutoff."""
    if isinstance(u, ScalarField):
        frame = GridFrame(dom, u.grid)
        op = ConstantNormalExtension(frame, profile, interpolation)
        return op.apply_field(u)

    def collar_value(pts, d):
        params = dom.closest_params(pts)
        feet = dom.boundary_position(params)
        return profile.chi(d) * np.asarray(u(feet), dtype=float)

    return _callable_extension(dom, u, collar_value)


def interior_cutoff(dom: DomainGeometry, width: float, x=None, frame: GridFrame = None):
    """Smooth interior cutoff: 1 at depth ``width`` and below, 0 on the boundary.

    With ``frame`` given, returns the node values on the frame's grid;
    otherwise evaluates at the points ``x``.
    """
    if width <= 0:
        raise ValueError(f"cutoff width must be positive, got {width}")
    if width >= dom.tubular_radius:
        raise CollarTooWide(
            f"cutoff width {width:.6g} reaches the tubular radius "
            f"{dom.tubular_radius:.6g}"
        )
    if frame is not None:
        d = frame.distances
    else:
        d = np.asarray(dom.signed_distance(x), dtype=float)
    return smoothstep(-d / width)


def check_robin_bc(dom, beta, u, tol: float = 1e-8, samples: int = 2048):
    """Largest boundary residual ``|grad u . nu + beta u|`` over dense samples.

    Returns ``(ok, residual)``.
    """
    if dom.ndim == 1:
        params = np.array([0.0, 1.0])
    else:
        params = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    pts = np.asarray(dom.boundary_position(params), dtype=float)
    nu = np.asarray(dom.outward_normal(params), dtype=float)
    grad = np.asarray(u.gradient(pts), dtype=float)
    if dom.ndim == 1:
        normal_deriv = grad * nu
    else:
        normal_deriv = np.einsum("...i,...i->...", grad, nu)
    residual = normal_deriv + beta.value_at_param(params) * np.asarray(
        u.value(pts), dtype=float
    )
    worst = float(np.max(np.abs(residual)))
    return worst <= tol, worst
