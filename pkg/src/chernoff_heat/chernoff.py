"""Product-formula iteration approximating the heat semigroup.

One step applies extend, free-space Gaussian, restrict; composing the
step n times with step length t/n approximates the boundary-value
semigroup at time t.  The boundary condition enters only through the
choice of extension operator:

``robin``
    Kinked reflection carrying a nonnegative boundary coefficient.
``neumann``
    The same reflection with coefficient zero.
``dirichlet``
    Sign-flipped reflection; after each Gaussian the field is damped by
    a smooth interior cutoff whose collar width shrinks with the step.
``dirichlet_l2``
    Sharp zero extension and sharp indicator restriction; converges in
    the mean-square sense rather than uniformly.
``constant_ext``
    Constant continuation along normals.  Deliberately defective: its
    Laplacian jumps at the boundary, so the step is not consistent
    there and the iteration cannot converge near the boundary.  Kept as
    a regression guard for the design choice the kink encodes.

All runs for one study share a single padded grid, so differences
between step counts reflect the iteration alone and never a change of
discretisation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence, TextIO

import numpy as np

from .errors import MismatchedGrid
from .extension import (
    ConstantNormalExtension,
    DirichletReflectionExtension,
    KinkProfile,
    RobinCoefficient,
    RobinReflectionExtension,
    ZeroExtension,
    constant_beta,
    interior_cutoff,
)
from .fields import GridFrame, ScalarField, make_grid
from .geometry import DomainGeometry
from .heat_kernel import KernelPlan, apply_gaussian, make_plan
from .reference import RadialSolution, compare_fields

__all__ = [
    "VARIANTS",
    "SchemeConfig",
    "ChernoffScheme",
    "robin_step",
    "evolve",
    "StudyRow",
    "ConvergenceReport",
    "convergence_study",
    "consistency_scan",
    "ProbeRow",
    "ProbeReport",
    "boundary_diffusion_probe",
]

VARIANTS = ("robin", "neumann", "dirichlet", "dirichlet_l2", "constant_ext")


@dataclass(frozen=True)
class SchemeConfig:
    """Discretisation and iteration parameters for one study.

    ``beta`` is accepted only by the ``robin`` variant (``neumann`` is
    the coefficient-zero case and must not carry one), and the collar
    law ``width = collar_cw * diameter * step**collar_alpha`` applies
    only to the ``dirichlet`` variant.
    """

    variant: str
    t: float
    steps: Sequence[int]
    h: float
    kernel_tol: float = 1e-12
    beta: RobinCoefficient | None = None
    collar_cw: float = 1.0
    collar_alpha: float = 1.0
    interpolation: str = "cubic"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(
                f"unknown variant {self.variant!r}; expected one of {VARIANTS}"
            )
        if not self.t > 0:
            raise ValueError(f"final time must be positive, got {self.t}")
        steps = tuple(int(n) for n in self.steps)
        if not steps or any(n < 1 for n in steps):
            raise ValueError(f"step counts must be positive integers, got {self.steps}")
        object.__setattr__(self, "steps", steps)
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if self.variant == "robin":
            if self.beta is None:
                raise ValueError("the robin variant requires a boundary coefficient")
        elif self.beta is not None:
            raise ValueError(
                f"variant {self.variant!r} does not take a boundary coefficient"
            )
        if self.collar_cw <= 0 or self.collar_alpha <= 0:
            raise ValueError("collar law parameters must be positive")


class ChernoffScheme:
    """Iteration driver bound to one domain, grid and extension operator.

    The grid pad is sized for the largest step in the configuration, so
    every planned run stays clear of the grid edge.
    """

    def __init__(
        self,
        dom: DomainGeometry,
        cfg: SchemeConfig,
        profile: KinkProfile | None = None,
    ):
        self.dom = dom
        self.cfg = cfg
        self.profile = profile if profile is not None else KinkProfile(dom.tubular_radius)
        self.tau_max = cfg.t / min(cfg.steps)
        reach = 2.0 * math.sqrt(self.tau_max * math.log(1.0 / cfg.kernel_tol))
        pad = 0.5 * dom.tubular_radius + reach + 2.0 * cfg.h
        self.grid = make_grid(dom, cfg.h, pad)
        self.frame = GridFrame(dom, self.grid)
        self.extension = self._build_extension()
        self._cutoffs: dict[float, np.ndarray] = {}

    def _build_extension(self):
        cfg, frame, prof = self.cfg, self.frame, self.profile
        if cfg.variant == "robin":
            return RobinReflectionExtension(frame, cfg.beta, prof, cfg.interpolation)
        if cfg.variant == "neumann":
            zero = constant_beta(self.dom, 0.0)
            return RobinReflectionExtension(frame, zero, prof, cfg.interpolation)
        if cfg.variant == "dirichlet":
            return DirichletReflectionExtension(frame, prof, cfg.interpolation)
        if cfg.variant == "dirichlet_l2":
            return ZeroExtension(frame)
        return ConstantNormalExtension(frame, prof, cfg.interpolation)

    def plan_for(self, tau: float) -> KernelPlan:
        if tau > self.tau_max * (1.0 + 1e-12):
            raise ValueError(
                f"step {tau:.6g} exceeds the padded-for maximum {self.tau_max:.6g}; "
                "rebuild the scheme with the larger step in the configuration"
            )
        return make_plan(tau, self.cfg.h, self.grid.ndim, self.cfg.kernel_tol)

    def _cutoff_for(self, tau: float) -> np.ndarray | None:
        if self.cfg.variant != "dirichlet":
            return None
        if tau not in self._cutoffs:
            width = self.cfg.collar_cw * self.dom.diameter * tau ** self.cfg.collar_alpha
            self._cutoffs[tau] = interior_cutoff(self.dom, width, frame=self.frame)
        return self._cutoffs[tau]

    def initial_field(self, u0) -> ScalarField:
        """Sample or adopt initial data, zeroed outside the closed domain."""
        grid = self.grid
        if isinstance(u0, ScalarField):
            other = u0.grid
            if (
                other.shape != grid.shape
                or abs(other.spacing - grid.spacing) > 1e-12 * grid.spacing
                or max(abs(a - b) for a, b in zip(other.origin, grid.origin)) > 1e-9 * grid.spacing
            ):
                raise MismatchedGrid("initial field lives on a different grid")
            values = np.where(self.frame.inside, u0.values, 0.0)
            boundary_values = None
        else:
            values = np.where(self.frame.inside, grid.sample(u0), 0.0)
            boundary_values = np.asarray(u0(self._boundary_samples()), dtype=float)
        if self.cfg.variant in ("dirichlet", "dirichlet_l2"):
            self._require_vanishing(values, boundary_values)
        return ScalarField(grid, values)

    def _boundary_samples(self) -> np.ndarray:
        if self.dom.ndim == 1:
            params = np.array([0.0, 1.0])
        else:
            params = np.linspace(0.0, 2.0 * np.pi, 512, endpoint=False)
        return self.dom.boundary_position(params)

    def _require_vanishing(self, values: np.ndarray, boundary_values) -> None:
        scale = max(1.0, float(np.max(np.abs(values))))
        if boundary_values is None:
            near = np.abs(self.frame.distances) <= self.dom.tolerance
            worst = float(np.max(np.abs(values[near]))) if near.any() else 0.0
        else:
            worst = float(np.max(np.abs(boundary_values)))
        if worst > 1e-6 * scale:
            raise ValueError(
                "initial data for a Dirichlet variant must vanish on the "
                f"boundary; largest boundary value {worst:.3e}"
            )

    def step_values(
        self, values: np.ndarray, plan: KernelPlan, cutoff: np.ndarray | None
    ) -> np.ndarray:
        extended = self.extension.apply(values)
        blurred = apply_gaussian(ScalarField(self.grid, extended), plan).values
        if self.cfg.variant == "dirichlet":
            return blurred * cutoff
        if self.cfg.variant == "dirichlet_l2":
            return np.where(self.frame.strictly_inside, blurred, 0.0)
        return np.where(self.frame.inside, blurred, 0.0)

    def one_step(self, u: ScalarField, tau: float) -> ScalarField:
        plan = self.plan_for(tau)
        out = self.step_values(u.values, plan, self._cutoff_for(tau))
        return ScalarField(self.grid, out)

    def evolve(self, u0, n: int) -> ScalarField:
        """Run ``n`` steps of length ``t / n`` from the initial data."""
        if n < min(self.cfg.steps):
            raise ValueError(
                f"n={n} is below the smallest configured step count; the grid "
                "pad does not cover its kernel reach"
            )
        tau = self.cfg.t / n
        plan = self.plan_for(tau)
        cutoff = self._cutoff_for(tau)
        values = self.initial_field(u0).values
        for _ in range(n):
            values = self.step_values(values, plan, cutoff)
        return ScalarField(self.grid, values)


def robin_step(
    u: ScalarField,
    tau: float,
    dom: DomainGeometry,
    beta: RobinCoefficient,
    profile: KinkProfile | None = None,
    *,
    interpolation: str = "cubic",
    kernel_tol: float = 1e-12,
) -> ScalarField:
    """One restrict-gaussian-extend step on the field's own grid.

    The caller is responsible for a grid pad covering the kernel reach;
    otherwise the convolution refuses with an edge-clipping error.
    """
    frame = GridFrame(dom, u.grid)
    prof = profile if profile is not None else KinkProfile(dom.tubular_radius)
    ext = RobinReflectionExtension(frame, beta, prof, interpolation)
    plan = make_plan(tau, u.grid.spacing, u.grid.ndim, kernel_tol)
    blurred = apply_gaussian(ScalarField(u.grid, ext.apply(u.values)), plan)
    return ScalarField(u.grid, np.where(frame.inside, blurred.values, 0.0))


def evolve(
    dom: DomainGeometry,
    cfg: SchemeConfig,
    u0,
    n: int | None = None,
    profile: KinkProfile | None = None,
) -> ScalarField:
    """Convenience wrapper: build a scheme and run one step count."""
    scheme = ChernoffScheme(dom, cfg, profile)
    return scheme.evolve(u0, max(cfg.steps) if n is None else n)


# ---------------------------------------------------------------------------
# Convergence studies


@dataclass(frozen=True)
class StudyRow:
    n: int
    sup_error: float | None
    l2_error: float | None
    observed_order: float | None
    seconds: float


def _fmt(value) -> str:
    if value is None:
        return ""
    return format(value, ".17g")


@dataclass
class ConvergenceReport:
    """Error table of one study, exportable as CSV."""

    variant: str
    reference: str
    rows: list[StudyRow]
    fields: dict[int, ScalarField] | None = field(default=None, repr=False, compare=False)

    HEADER = "n,sup_error,l2_error,observed_order,seconds"

    def to_csv(self, target: str | Path | TextIO) -> None:
        lines = [self.HEADER]
        for row in self.rows:
            lines.append(
                ",".join(
                    (
                        str(row.n),
                        _fmt(row.sup_error),
                        _fmt(row.l2_error),
                        _fmt(row.observed_order),
                        _fmt(row.seconds),
                    )
                )
            )
        text = "\n".join(lines) + "\n"
        if hasattr(target, "write"):
            target.write(text)
        else:
            Path(target).write_text(text)

    def summary_lines(self) -> list[str]:
        out = [f"variant={self.variant} reference={self.reference}"]
        for row in self.rows:
            sup = "-" if row.sup_error is None else f"{row.sup_error:.6e}"
            l2 = "-" if row.l2_error is None else f"{row.l2_error:.6e}"
            order = "-" if row.observed_order is None else f"{row.observed_order:.3f}"
            out.append(f"n={row.n:<6d} sup={sup} l2={l2} order={order}")
        return out


def convergence_study(
    dom: DomainGeometry,
    cfg: SchemeConfig,
    u0,
    reference=None,
    profile: KinkProfile | None = None,
    keep_fields: bool = False,
    reference_label: str | None = None,
) -> ConvergenceReport:
    """Run every configured step count and tabulate errors.

    ``reference`` may be a callable of node coordinates, a field or
    array on the scheme grid, a radial profile (evaluated around the
    domain's centre), or ``None`` for self-convergence against the
    largest step count.
    """
    scheme = ChernoffScheme(dom, cfg, profile)
    u0_field = scheme.initial_field(u0)
    mask = scheme.frame.inside
    ns = sorted(set(cfg.steps))

    outputs: dict[int, ScalarField] = {}
    seconds: dict[int, float] = {}
    for n in ns:
        start = time.perf_counter()
        outputs[n] = scheme.evolve(u0_field, n)
        seconds[n] = time.perf_counter() - start

    if reference is None:
        label, ref = "self", outputs[ns[-1]]
    elif isinstance(reference, RadialSolution):
        center = getattr(dom, "center", None)
        if center is None:
            raise ValueError("a radial reference needs a domain with a centre")
        radii = np.linalg.norm(scheme.grid.nodes() - center, axis=-1)
        label, ref = "radial_cn", np.asarray(reference(radii), dtype=float)
    elif isinstance(reference, ScalarField) or isinstance(reference, np.ndarray):
        label, ref = "field", reference
    else:
        label, ref = "callable", reference
    if reference_label is not None:
        label = reference_label

    rows: list[StudyRow] = []
    prev: tuple[int, float] | None = None
    for n in ns:
        if reference is None and n == ns[-1]:
            rows.append(StudyRow(n, None, None, None, seconds[n]))
            continue
        sup, l2 = compare_fields(outputs[n], ref, mask=mask)
        order = None
        if prev is not None and prev[1] > 0 and sup > 0:
            order = math.log(prev[1] / sup) / math.log(n / prev[0])
        rows.append(StudyRow(n, sup, l2, order, seconds[n]))
        prev = (n, sup)

    return ConvergenceReport(
        variant=cfg.variant,
        reference=label,
        rows=rows,
        fields=outputs if keep_fields else None,
    )


def consistency_scan(
    dom: DomainGeometry,
    variant: str,
    u,
    taus: Sequence[float],
    h: float,
    *,
    beta: RobinCoefficient | None = None,
    band_depth: float | None = None,
    kernel_tol: float = 1e-12,
    interpolation: str = "cubic",
    profile: KinkProfile | None = None,
) -> np.ndarray:
    """Sup-norm residual of the one-step derivative quotient.

    For each step length the residual ``(V(tau) u - u) / tau - lap(u)``
    is measured over closed-domain nodes; ``band_depth`` restricts the
    measurement to nodes within that distance of the boundary, where
    the defect of an inconsistent extension shows up.  ``u`` must
    expose an analytic ``laplacian``.
    """
    taus = [float(tau) for tau in taus]
    if not taus or min(taus) <= 0:
        raise ValueError("step lengths must be positive")
    cfg = SchemeConfig(
        variant=variant,
        t=max(taus),
        steps=(1,),
        h=h,
        kernel_tol=kernel_tol,
        beta=beta,
        interpolation=interpolation,
    )
    scheme = ChernoffScheme(dom, cfg, profile)
    u0 = scheme.initial_field(u)
    lap = scheme.grid.sample(u.laplacian)
    mask = scheme.frame.inside.copy()
    if band_depth is not None:
        mask &= scheme.frame.distances >= -band_depth
    residuals = []
    for tau in taus:
        out = scheme.one_step(u0, tau)
        quotient = (out.values - u0.values) / tau
        residuals.append(float(np.max(np.abs(quotient - lap)[mask])))
    return np.array(residuals)


# ---------------------------------------------------------------------------
# Boundary-diffusion probe


@dataclass(frozen=True)
class ProbeRow:
    t: float
    mass_loss: float


@dataclass(frozen=True)
class ProbeReport:
    mode: str
    rows: tuple[ProbeRow, ...]
    slope: float

    def summary_lines(self) -> list[str]:
        out = [f"probe mode={self.mode} loglog_slope={self.slope:.4f}"]
        out.extend(f"t={row.t:.6e} loss={row.mass_loss:.6e}" for row in self.rows)
        return out


def boundary_diffusion_probe(
    dom: DomainGeometry,
    times: Sequence[float],
    h: float,
    mode: str = "zero",
    kernel_tol: float = 1e-12,
    profile: KinkProfile | None = None,
) -> ProbeReport:
    """Mass lost through the boundary by one Gaussian step on u = 1.

    With the sharp zero extension the loss scales like the square root
    of the step; a reflection extension suppresses it by orders of
    magnitude.  The log-log slope is reported, not asserted.
    """
    if mode not in ("zero", "reflect"):
        raise ValueError(f"unknown probe mode {mode!r}")
    times = sorted(float(t) for t in times)
    if not times or times[0] <= 0:
        raise ValueError("probe times must be positive")
    reach = 2.0 * math.sqrt(times[-1] * math.log(1.0 / kernel_tol))
    pad = 0.5 * dom.tubular_radius + reach + 2.0 * h
    grid = make_grid(dom, h, pad)
    frame = GridFrame(dom, grid)
    if mode == "zero":
        ext = ZeroExtension(frame)
    else:
        prof = profile if profile is not None else KinkProfile(dom.tubular_radius)
        ext = RobinReflectionExtension(frame, constant_beta(dom, 0.0), prof, "linear")
    ones = np.where(frame.inside, 1.0, 0.0)
    extended = ext.apply(ones)
    cell = grid.spacing ** grid.ndim
    rows = []
    for t in times:
        plan = make_plan(t, h, grid.ndim, kernel_tol)
        blurred = apply_gaussian(ScalarField(grid, extended), plan).values
        loss = cell * float(np.sum(1.0 - blurred[frame.inside]))
        rows.append(ProbeRow(t, loss))
    losses = np.maximum([row.mass_loss for row in rows], 1e-300)
    slope = float(np.polyfit(np.log(times), np.log(losses), 1)[0])
    return ProbeReport(mode=mode, rows=tuple(rows), slope=slope)
