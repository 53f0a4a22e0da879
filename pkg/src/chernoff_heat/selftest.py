"""Built-in invariant suite behind the ``selftest`` subcommand.

Each group re-derives a structural property from scratch at small scale:
reflection is an involution, the kink profile has the advertised value
and derivative structure at the boundary, the reflection extension is
the identity on the domain and contracts the sup norm, one-sided
Laplacians of an extended compatible function agree across the
boundary, and kernel plans carry unit mass with the right spread.

The ``fault`` hook deliberately corrupts the kink profile so callers
can verify that a broken build is reported as such; it exists for
testing the reporting path, not for use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .analytic import Polynomial1D, one_sided_laplacian
from .extension import (
    EndpointRobin,
    KinkProfile,
    RobinReflectionExtension,
    constant_beta,
    extend_robin,
)
from .fields import GridFrame, make_grid
from .geometry import Disk, Interval, StarDomain
from .heat_kernel import make_plan

__all__ = ["GroupResult", "run_selftest", "GROUPS"]

GROUPS = (
    "geometry_involution",
    "kink_properties",
    "extension_contractivity",
    "laplacian_matching",
    "kernel_moments",
)


@dataclass(frozen=True)
class GroupResult:
    name: str
    passed: bool
    detail: str = ""


class _SignFlippedKink(KinkProfile):
    """Fault-injection profile: negated kink, violates the [0, 1] bound."""

    def rho1(self, gamma, t, *, allow_negative_gamma=False):
        return -super().rho1(gamma, t, allow_negative_gamma=allow_negative_gamma)


def _first_derivative_at_zero(f, e: float) -> float:
    # One-sided third-order stencil, Richardson-combined to fourth order.
    def d(step):
        return (
            -11.0 * f(0.0) + 18.0 * f(step) - 9.0 * f(2 * step) + 2.0 * f(3 * step)
        ) / (6.0 * step)

    return (8.0 * d(e / 2.0) - d(e)) / 7.0


def _second_derivative_at_zero(f, e: float) -> float:
    def d(step):
        return (
            2.0 * f(0.0) - 5.0 * f(step) + 4.0 * f(2 * step) - f(3 * step)
        ) / step**2

    return (4.0 * d(e / 2.0) - d(e)) / 3.0


def check_geometry_involution(rng: np.random.Generator) -> GroupResult:
    worst = 0.0
    for dom in (
        Interval(0.0, 1.0),
        Disk((0.0, 0.0), 1.0),
        StarDomain((0.0, 0.0), [1.0, 0.0, 0.0, 0.2], [0.0]),
    ):
        delta = dom.tubular_radius
        lo, hi = dom.bounding_box()
        lo, hi = np.atleast_1d(lo) - delta, np.atleast_1d(hi) + delta
        pts = rng.uniform(lo, hi, size=(2000, len(lo)))
        if dom.ndim == 1:
            pts = pts[:, 0]
        d = np.asarray(dom.signed_distance(pts))
        keep = np.abs(d) < 0.9 * delta
        pts, d = pts[keep], d[keep]
        back = dom.reflect(dom.reflect(pts))
        worst = max(worst, float(np.max(np.abs(back - pts))) / dom.diameter)
        flipped = np.asarray(dom.signed_distance(dom.reflect(pts)))
        worst = max(worst, float(np.max(np.abs(flipped + d))) / dom.diameter)
    if worst <= 1e-10:
        return GroupResult("geometry_involution", True)
    return GroupResult(
        "geometry_involution", False, f"max relative defect {worst:.3e} > 1e-10"
    )


def check_kink_properties(profile: KinkProfile | None = None) -> GroupResult:
    if profile is None:
        profile = KinkProfile(0.5)
    delta = profile.delta
    gammas = np.array([0.0, 0.5, 1.0, 3.0, 10.0])
    ts = np.linspace(0.0, 0.7 * delta, 211)
    gg, tt = np.meshgrid(gammas, ts, indexing="ij")
    vals = profile.rho1(gg, tt)
    if vals.min() < 0.0 or vals.max() > 1.0:
        return GroupResult(
            "kink_properties",
            False,
            f"values leave [0, 1]: range [{vals.min():.3e}, {vals.max():.3e}]",
        )
    support = vals[:, ts >= 0.5 * delta]
    if np.any(support != 0.0):
        return GroupResult("kink_properties", False, "support exceeds half the collar")
    at_zero = profile.rho1(gammas, np.zeros_like(gammas))
    if np.any(at_zero != 1.0):
        return GroupResult("kink_properties", False, "value at the boundary is not 1")
    for gamma in gammas:
        f = lambda t: float(profile.rho1(gamma, t))
        d1 = _first_derivative_at_zero(f, 1e-3)
        # Smaller step: the e^3 rho'''' truncation term breaches the
        # 1e-6 budget at gamma=10 with e=1e-3, roundoff only at ~1e-5.
        d2 = _second_derivative_at_zero(f, 2.5e-4)
        scale1 = max(1.0, abs(2.0 * gamma))
        scale2 = max(1.0, abs(4.0 * gamma * gamma))
        if abs(d1 + 2.0 * gamma) > 1e-6 * scale1:
            return GroupResult(
                "kink_properties",
                False,
                f"slope at 0 for gamma={gamma}: {d1:.8f} vs {-2.0 * gamma}",
            )
        if abs(d2 - 4.0 * gamma * gamma) > 1e-6 * scale2:
            return GroupResult(
                "kink_properties",
                False,
                f"curvature at 0 for gamma={gamma}: {d2:.8f} vs {4.0 * gamma * gamma}",
            )
    return GroupResult("kink_properties", True)


def _random_polys(dom, rng, count):
    for _ in range(count):
        if dom.ndim == 1:
            c = rng.uniform(-1.0, 1.0, size=5)
            yield lambda x, c=c: npoly.polyval(x, c)
        else:
            c = rng.uniform(-1.0, 1.0, size=(4, 4))
            yield lambda x, c=c: npoly.polyval2d(x[..., 0], x[..., 1], c)


def check_extension_contractivity(
    rng: np.random.Generator, count: int = 50
) -> GroupResult:
    # Contraction and positivity are exact on the callable route only:
    # there the collar value is rho times an evaluation of u at a point
    # of the closed domain, and the sup is taken over exactly the points
    # the operator reads.  The field path is checked for what it does
    # guarantee: bitwise pass-through on inside nodes and linearity.
    for dom in (Interval(0.0, 1.0), Disk((0.0, 0.0), 1.0)):
        profile = KinkProfile(dom.tubular_radius)
        beta = constant_beta(dom, 1.0)
        half = 0.5 * dom.tubular_radius
        lo, hi = dom.bounding_box()
        lo, hi = np.atleast_1d(lo) - half, np.atleast_1d(hi) + half
        pts = rng.uniform(lo, hi, size=(4000, len(lo)))
        if dom.ndim == 1:
            pts = pts[:, 0]
        d = np.asarray(dom.signed_distance(pts))
        inner = pts[d <= dom.tolerance]
        collar = pts[(d > dom.tolerance) & (d < half)]
        mirrored = dom.reflect(collar)
        first = None
        for u in _random_polys(dom, rng, count):
            if first is None:
                first = u
            ext = extend_robin(dom, beta, profile, u)
            through = np.asarray(ext(inner))
            if not np.array_equal(through, np.asarray(u(inner), dtype=float)):
                return GroupResult(
                    "extension_contractivity",
                    False,
                    "domain values not passed through unchanged",
                )
            read = np.asarray(u(mirrored), dtype=float)
            sup_u = max(float(np.max(np.abs(through))), float(np.max(np.abs(read))))
            on_collar = np.asarray(ext(collar))
            sup_e = max(float(np.max(np.abs(through))), float(np.max(np.abs(on_collar))))
            if sup_e > sup_u:
                return GroupResult(
                    "extension_contractivity", False, "sup norm grew under extension"
                )
            shift = min(float(through.min()), float(read.min()))
            pos = extend_robin(dom, beta, profile, lambda x: u(x) - shift)
            if min(float(np.min(pos(inner))), float(np.min(pos(collar)))) < 0.0:
                return GroupResult(
                    "extension_contractivity", False, "positivity lost under extension"
                )
            combo = extend_robin(
                dom, beta, profile, lambda x: 2.0 * u(x) - 0.5 * first(x)
            )(collar)
            parts = 2.0 * on_collar - 0.5 * np.asarray(
                extend_robin(dom, beta, profile, first)(collar)
            )
            scale = max(1.0, float(np.max(np.abs(combo))))
            if float(np.max(np.abs(combo - parts))) > 1e-12 * scale:
                return GroupResult(
                    "extension_contractivity", False, "extension is not linear"
                )
        # Field path: pass-through and linearity on sampled node values.
        h = 0.01 if dom.ndim == 1 else 0.05
        grid = make_grid(dom, h, half + 2 * h)
        frame = GridFrame(dom, grid)
        op = RobinReflectionExtension(frame, beta, profile)
        nodes = grid.nodes()
        for u in _random_polys(dom, rng, 10):
            values = np.asarray(u(nodes), dtype=float)
            masked = np.where(frame.inside, values, 0.0)
            out = op.apply(masked)
            if not np.array_equal(out[frame.inside], masked[frame.inside]):
                return GroupResult(
                    "extension_contractivity", False, "inside nodes not passed through"
                )
            other = np.where(frame.inside, np.roll(masked, 3, axis=0), 0.0)
            combo = op.apply(2.0 * masked - 0.5 * other)
            parts = 2.0 * op.apply(masked) - 0.5 * op.apply(other)
            scale = max(1.0, float(np.max(np.abs(combo))))
            if float(np.max(np.abs(combo - parts))) > 1e-12 * scale:
                return GroupResult(
                    "extension_contractivity", False, "field path is not linear"
                )
    return GroupResult("extension_contractivity", True)


def check_laplacian_matching() -> GroupResult:
    dom = Interval(0.0, 1.0)
    profile = KinkProfile(dom.tubular_radius)
    u = Polynomial1D([1.0, 1.0, -1.0])  # satisfies the coefficient-1 Robin rule
    extended = extend_robin(dom, EndpointRobin(1.0, 1.0), profile, u)
    gaps = []
    for eps in (1e-3, 5e-4, 2.5e-4, 1.25e-4):
        inner = one_sided_laplacian(extended, 1.0, 1.0, eps, -1)
        outer = one_sided_laplacian(extended, 1.0, 1.0, eps, +1)
        gaps.append(abs(outer - inner))
    if gaps[0] > 5e-2:
        return GroupResult(
            "laplacian_matching", False, f"gap {gaps[0]:.3e} at eps=1e-3 exceeds 5e-2"
        )
    for wide, tight in zip(gaps, gaps[1:]):
        if not tight * 3.0 <= wide:
            return GroupResult(
                "laplacian_matching",
                False,
                f"gap sequence {['%.3e' % g for g in gaps]} shrinks slower than 3x",
            )
    return GroupResult("laplacian_matching", True)


def check_kernel_moments() -> GroupResult:
    for t, h in ((0.01, 0.001), (0.05, 0.005), (0.002, 0.0004)):
        plan = make_plan(t, h, 1)
        w = plan.weights
        if w.min() < 0.0:
            return GroupResult("kernel_moments", False, "negative kernel weight")
        if abs(float(w.sum()) - 1.0) > 1e-14:
            return GroupResult("kernel_moments", False, "weights do not sum to 1")
        if not np.array_equal(w, w[::-1]):
            return GroupResult("kernel_moments", False, "weights are not symmetric")
        offsets = (np.arange(len(w)) - plan.half_width) * h
        moment = float(np.sum(w * offsets * offsets))
        if abs(moment - 2.0 * t) > 0.01 * 2.0 * t:
            return GroupResult(
                "kernel_moments",
                False,
                f"second moment {moment:.6e} vs {2.0 * t:.6e} off by more than 1%",
            )
    return GroupResult("kernel_moments", True)


def run_selftest(seed: int = 0, fault: str | None = None) -> list[GroupResult]:
    """Run every group; ``fault='kink_sign'`` corrupts the kink on purpose."""
    if fault not in (None, "kink_sign"):
        raise ValueError(f"unknown fault hook {fault!r}")
    rng = np.random.default_rng(seed)
    profile = _SignFlippedKink(0.5) if fault == "kink_sign" else None
    return [
        check_geometry_involution(rng),
        check_kink_properties(profile),
        check_extension_contractivity(rng),
        check_laplacian_matching(),
        check_kernel_moments(),
    ]
