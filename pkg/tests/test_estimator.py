"""Transformer facade: parameter plumbing and equivalence to the scheme."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from chernoff_heat import (
    ChernoffHeatPropagator,
    ChernoffScheme,
    Polynomial1D,
    SchemeConfig,
    constant_beta,
)


def _fitted(unit_interval, **kw):
    params = dict(domain=unit_interval, variant="robin", t=0.05, n=8, h=5e-3, beta=1.0)
    params.update(kw)
    return ChernoffHeatPropagator(**params).fit()


def test_requires_domain():
    with pytest.raises(ValueError, match="domain"):
        ChernoffHeatPropagator().fit()


def test_not_fitted_guard(unit_interval):
    est = ChernoffHeatPropagator(domain=unit_interval, beta=1.0)
    with pytest.raises(NotFittedError):
        est.transform(np.zeros((1, 3)))


def test_get_set_clone_round_trip(unit_interval):
    est = ChernoffHeatPropagator(domain=unit_interval, t=0.2, beta=3.0)
    params = est.get_params()
    assert params["t"] == 0.2 and params["beta"] == 3.0
    est.set_params(t=0.4)
    assert est.t == 0.4
    dup = clone(est)
    assert dup.get_params()["t"] == 0.4
    # clone deep-copies plain-object params; the geometry must survive it
    assert repr(dup.get_params()["domain"]) == repr(unit_interval)


def test_feature_layout(unit_interval):
    est = _fitted(unit_interval)
    assert est.n_features_in_ == est.node_coordinates_.shape[0]
    x = est.node_coordinates_
    assert np.all((x >= -1e-9) & (x <= 1.0 + 1e-9))  # closed domain, FP slack
    assert np.all(np.diff(x) > 0)  # flat C-order scan of a 1-d grid


def test_transform_matches_direct_evolution(unit_interval):
    est = _fitted(unit_interval)
    u0 = Polynomial1D([1.0, 1.0, -1.0])
    row = u0(est.node_coordinates_)
    out = est.transform(row[None, :])
    assert out.shape == (1, est.n_features_in_)

    cfg = SchemeConfig(
        variant="robin",
        t=0.05,
        steps=(8,),
        h=5e-3,
        beta=constant_beta(unit_interval, 1.0),
    )
    scheme = ChernoffScheme(unit_interval, cfg)
    direct = scheme.evolve(scheme.initial_field(u0), 8)
    assert np.array_equal(out[0], direct.values[scheme.frame.inside])


def test_transform_is_row_wise(unit_interval):
    est = _fitted(unit_interval)
    rng = np.random.default_rng(5)
    batch = rng.uniform(0.0, 1.0, size=(3, est.n_features_in_))
    together = est.transform(batch)
    separate = np.vstack([est.transform(row[None, :]) for row in batch])
    assert np.array_equal(together, separate)


def test_rejects_wrong_width(unit_interval):
    est = _fitted(unit_interval)
    with pytest.raises(ValueError, match="features"):
        est.transform(np.zeros((1, est.n_features_in_ + 1)))
    with pytest.raises(ValueError, match="entries"):
        est.field_from_row(np.zeros(3))


def test_field_from_row_round_trip(unit_interval):
    est = _fitted(unit_interval)
    row = np.linspace(0.0, 1.0, est.n_features_in_)
    field = est.field_from_row(row)
    assert field.grid is est.scheme_.grid
    assert np.array_equal(field.values[est.scheme_.frame.inside], row)
    assert np.all(field.values[~est.scheme_.frame.inside] == 0.0)


def test_disk_variant_smoke(unit_disk):
    est = ChernoffHeatPropagator(
        domain=unit_disk, variant="neumann", t=0.01, n=4, h=0.05
    ).fit()
    ones = np.ones((1, est.n_features_in_))
    out = est.transform(ones)
    # insulated disk: the constant survives up to collar interpolation
    assert np.max(np.abs(out - 1.0)) < 5e-2
