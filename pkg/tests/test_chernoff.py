"""One-step operator, iteration driver and study helpers."""

import io

import numpy as np
import pytest

from chernoff_heat import (
    ChernoffScheme,
    Constant,
    GaussianBump1D,
    IntervalEigenExpansion,
    MismatchedGrid,
    Polynomial1D,
    RadialPolynomial2D,
    ScalarField,
    SchemeConfig,
    SineMode1D,
    VARIANTS,
    boundary_diffusion_probe,
    consistency_scan,
    constant_beta,
    convergence_study,
    evolve,
    robin_step,
)


def _robin_cfg(**kw):
    from chernoff_heat import Interval

    base = dict(
        variant="robin",
        t=0.05,
        steps=(4, 8),
        h=5e-3,
        beta=constant_beta(Interval(0.0, 1.0), 1.0),
    )
    base.update(kw)
    return SchemeConfig(**base)


# ---------------------------------------------------------------------------
# configuration validation


def test_variants_tuple():
    assert VARIANTS == ("robin", "neumann", "dirichlet", "dirichlet_l2", "constant_ext")


def test_config_validation(unit_interval):
    beta = constant_beta(unit_interval, 1.0)
    with pytest.raises(ValueError, match="unknown variant"):
        SchemeConfig(variant="periodic", t=0.1, steps=(4,), h=1e-2)
    with pytest.raises(ValueError, match="requires a boundary coefficient"):
        SchemeConfig(variant="robin", t=0.1, steps=(4,), h=1e-2)
    with pytest.raises(ValueError, match="does not take a boundary coefficient"):
        SchemeConfig(variant="neumann", t=0.1, steps=(4,), h=1e-2, beta=beta)
    with pytest.raises(ValueError, match="final time"):
        _robin_cfg(t=0.0)
    with pytest.raises(ValueError, match="step counts"):
        _robin_cfg(steps=())
    with pytest.raises(ValueError, match="step counts"):
        _robin_cfg(steps=(4, 0))
    with pytest.raises(ValueError, match="grid spacing"):
        _robin_cfg(h=-1e-2)
    with pytest.raises(ValueError, match="collar law"):
        SchemeConfig(variant="dirichlet", t=0.1, steps=(4,), h=1e-2, collar_cw=0.0)


def test_initial_field_grid_mismatch(unit_interval):
    scheme = ChernoffScheme(unit_interval, _robin_cfg())
    from chernoff_heat import Grid

    other = Grid(origin=(0.0,), spacing=1e-2, shape=(101,))
    with pytest.raises(MismatchedGrid):
        scheme.initial_field(ScalarField(other, np.zeros(101)))


def test_dirichlet_rejects_nonvanishing_data(unit_interval):
    cfg = SchemeConfig(variant="dirichlet", t=0.05, steps=(4,), h=5e-3)
    scheme = ChernoffScheme(unit_interval, cfg)
    with pytest.raises(ValueError, match="must vanish"):
        scheme.initial_field(Constant(1.0))
    scheme.initial_field(SineMode1D(1))  # compatible data sails through


def test_evolve_rejects_unpadded_step_counts(unit_interval):
    scheme = ChernoffScheme(unit_interval, _robin_cfg(steps=(8, 16)))
    with pytest.raises(ValueError, match="below the smallest configured"):
        scheme.evolve(Polynomial1D([1.0, 1.0, -1.0]), 4)
    with pytest.raises(ValueError, match="exceeds the padded-for maximum"):
        scheme.plan_for(0.05 / 4)


# ---------------------------------------------------------------------------
# single steps


def test_one_step_contracts_and_preserves_sign(unit_interval):
    scheme = ChernoffScheme(unit_interval, _robin_cfg(interpolation="linear"))
    u0 = scheme.initial_field(Polynomial1D([1.0, 1.0, -1.0]))
    out = scheme.one_step(u0, 0.05 / 8)
    assert np.max(np.abs(out.values)) <= np.max(np.abs(u0.values)) * (1 + 1e-13)
    assert np.min(out.values) >= -1e-15  # u0 >= 0 on [0, 1]


def test_one_step_matches_free_space_for_interior_bump(unit_interval):
    # the bump is ~1e-14 near the boundary, so the boundary correction
    # is invisible and the step must reproduce free-space evolution
    bump = GaussianBump1D(0.5, 2e-3)
    cfg = _robin_cfg(t=4e-5, steps=(1,), h=2e-3, kernel_tol=1e-14)
    scheme = ChernoffScheme(unit_interval, cfg)
    u0 = scheme.initial_field(bump)
    out = scheme.one_step(u0, 4e-5)
    nodes = scheme.grid.nodes()
    expect = np.where(scheme.frame.inside, bump.evolved(4e-5)(nodes), 0.0)
    gap = np.abs(out.values - expect)[scheme.frame.inside]
    assert np.max(gap) < 2e-13


def test_robin_step_function_matches_scheme(unit_interval):
    beta = constant_beta(unit_interval, 1.0)
    cfg = _robin_cfg(beta=beta)
    scheme = ChernoffScheme(unit_interval, cfg)
    u0 = scheme.initial_field(Polynomial1D([1.0, 1.0, -1.0]))
    tau = 0.05 / 8
    a = scheme.one_step(u0, tau)
    b = robin_step(u0, tau, unit_interval, beta)
    assert np.array_equal(a.values, b.values)


# ---------------------------------------------------------------------------
# consistency scans


def test_consistency_residual_shrinks_for_matched_extension(unit_interval):
    u = Polynomial1D([1.0, 1.0, -1.0])
    taus = (1.6e-2, 4e-3, 1e-3)
    res = consistency_scan(
        unit_interval,
        "robin",
        u,
        taus,
        h=1e-3,
        beta=constant_beta(unit_interval, 1.0),
    )
    assert res[0] > res[1] > res[2]
    assert res[2] < res[0] / 3


def test_consistency_residual_floors_for_constant_extension(unit_disk):
    u = RadialPolynomial2D([1.0, -2.0, 1.0])  # (1 - r^2)^2, zero normal slope
    taus = (4e-3, 1e-3)
    res = consistency_scan(
        unit_disk, "constant_ext", u, taus, h=0.025, band_depth=0.25
    )
    assert np.min(res) > 1.0  # the Laplacian jump keeps the defect O(1)


def test_consistency_scan_validation(unit_interval):
    with pytest.raises(ValueError):
        consistency_scan(
            unit_interval,
            "robin",
            Polynomial1D([1.0]),
            (0.0, 1e-3),
            h=1e-3,
            beta=constant_beta(unit_interval, 1.0),
        )


# ---------------------------------------------------------------------------
# convergence studies


def test_convergence_study_against_eigenexpansion(unit_interval):
    cfg = _robin_cfg(t=0.1, steps=(8, 32), h=2e-3)
    u0 = Polynomial1D([1.0, 1.0, -1.0])
    expansion = IntervalEigenExpansion(unit_interval, "robin", beta=(1.0, 1.0))
    report = convergence_study(
        unit_interval, cfg, u0, lambda x: expansion.solve(u0, 0.1, x)
    )
    assert report.variant == "robin"
    assert report.reference == "callable"
    sups = [row.sup_error for row in report.rows]
    assert sups[1] < sups[0]
    assert sups[1] < 2e-2
    # observed order recomputed from the raw errors
    expect = np.log(sups[0] / sups[1]) / np.log(32 / 8)
    assert report.rows[1].observed_order == pytest.approx(expect, rel=1e-12)
    assert report.rows[0].observed_order is None


def test_convergence_study_self_reference(unit_interval):
    cfg = _robin_cfg(steps=(4, 8, 16))
    report = convergence_study(unit_interval, cfg, Polynomial1D([1.0, 1.0, -1.0]))
    assert report.reference == "self"
    last = report.rows[-1]
    assert last.n == 16
    assert last.sup_error is None and last.l2_error is None
    assert last.observed_order is None
    assert report.rows[0].sup_error > report.rows[1].sup_error > 0


def test_report_csv_layout(unit_interval):
    cfg = _robin_cfg(steps=(4, 8))
    report = convergence_study(unit_interval, cfg, Polynomial1D([1.0, 1.0, -1.0]))
    buf = io.StringIO()
    report.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,sup_error,l2_error,observed_order,seconds"
    assert len(lines) == 3
    assert all(line.count(",") == 4 for line in lines)
    first = lines[1].split(",")
    assert first[0] == "4" and first[3] == ""  # no order for the first row
    assert float(first[1]) == report.rows[0].sup_error  # %.17g round-trips
    # summary uses dashes, not empty cells
    assert "order=-" in report.summary_lines()[1]


def test_evolve_wrapper_defaults_to_largest_step_count(unit_interval):
    cfg = _robin_cfg(steps=(4, 8))
    u0 = Polynomial1D([1.0, 1.0, -1.0])
    a = evolve(unit_interval, cfg, u0)
    b = evolve(unit_interval, cfg, u0, n=8)
    assert np.array_equal(a.values, b.values)


def test_dirichlet_variant_tracks_decay(unit_interval):
    cfg = SchemeConfig(variant="dirichlet", t=0.05, steps=(16,), h=5e-3)
    out = evolve(unit_interval, cfg, SineMode1D(1))
    scheme = ChernoffScheme(unit_interval, cfg)
    nodes = scheme.grid.nodes()
    exact = np.exp(-np.pi**2 * 0.05) * np.sin(np.pi * np.clip(nodes, 0.0, 1.0))
    gap = np.abs(out.values - np.where(scheme.frame.inside, exact, 0.0))
    assert np.max(gap[scheme.frame.inside]) < 5e-2


def test_sharp_truncation_variant_loses_mass_monotonically(unit_interval):
    cfg = SchemeConfig(variant="dirichlet_l2", t=0.02, steps=(4,), h=2e-3)
    scheme = ChernoffScheme(unit_interval, cfg)
    u = scheme.initial_field(SineMode1D(1))
    masses = [np.sum(u.values)]
    for _ in range(4):
        u = scheme.one_step(u, 0.005)
        masses.append(np.sum(u.values))
    assert all(b < a for a, b in zip(masses, masses[1:]))


# ---------------------------------------------------------------------------
# boundary-diffusion probe


def test_probe_slope_separates_extensions(unit_interval):
    # keep the kernel reach inside the kink plateau, or the reflect mode
    # legitimately sheds mass through the cutoff ramp
    times = (2.5e-5, 1e-4, 4e-4)
    sharp = boundary_diffusion_probe(unit_interval, times, h=1e-3, mode="zero")
    assert 0.3 < sharp.slope < 0.7
    assert all(row.mass_loss > 0 for row in sharp.rows)
    kept = boundary_diffusion_probe(unit_interval, times, h=1e-3, mode="reflect")
    for a, b in zip(kept.rows, sharp.rows):
        assert abs(a.mass_loss) < 1e-6 * b.mass_loss
    assert sharp.summary_lines()[0].startswith("probe mode=zero")


def test_probe_validation(unit_interval):
    with pytest.raises(ValueError):
        boundary_diffusion_probe(unit_interval, (0.0, 1e-3), h=1e-3)
    with pytest.raises(ValueError):
        boundary_diffusion_probe(unit_interval, (1e-3,), h=1e-3, mode="osmosis")
