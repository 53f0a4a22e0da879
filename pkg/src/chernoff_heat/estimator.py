"""Scikit-learn style facade over the product-formula iteration.

Each sample is a field given by its values on the closed-domain nodes
of the scheme grid; ``transform`` returns the heat-evolved values on
the same nodes.  The column layout is fixed by ``fit`` and exposed via
``node_coordinates_``, so batches of initial conditions can be pushed
through one configured propagator.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .chernoff import ChernoffScheme, SchemeConfig
from .extension import KinkProfile, constant_beta
from .fields import ScalarField
from .geometry import DomainGeometry

__all__ = ["ChernoffHeatPropagator"]


class ChernoffHeatPropagator(BaseEstimator, TransformerMixin):
    """Evolve sampled initial data under the approximated heat semigroup.

    Parameters
    ----------
    domain:
        The geometry to solve on; required by ``fit``.
    variant:
        Boundary treatment: ``robin``, ``neumann``, ``dirichlet``,
        ``dirichlet_l2`` or ``constant_ext``.
    t:
        Final time.
    n:
        Number of product-formula steps.
    h:
        Grid spacing.
    beta:
        Robin coefficient for the ``robin`` variant; a plain number is
        promoted to a constant coefficient on the boundary.
    kernel_tol, collar_cw, collar_alpha, interpolation:
        Forwarded to the scheme configuration unchanged.

    Attributes
    ----------
    scheme_:
        The fitted iteration driver (grid, extension operator, plans).
    n_features_in_:
        Number of closed-domain grid nodes, the expected column count.
    node_coordinates_:
        Coordinates of those nodes, one row per feature column.
    """

    def __init__(
        self,
        domain: DomainGeometry | None = None,
        variant: str = "robin",
        t: float = 0.1,
        n: int = 64,
        h: float = 0.01,
        beta=None,
        kernel_tol: float = 1e-12,
        collar_cw: float = 1.0,
        collar_alpha: float = 1.0,
        interpolation: str = "cubic",
    ):
        self.domain = domain
        self.variant = variant
        self.t = t
        self.n = n
        self.h = h
        self.beta = beta
        self.kernel_tol = kernel_tol
        self.collar_cw = collar_cw
        self.collar_alpha = collar_alpha
        self.interpolation = interpolation

    def fit(self, X=None, y=None):
        """Build the grid and extension operator; ``X`` is optional.

        When ``X`` is given it is only validated against the resulting
        feature count, which depends on the domain and spacing alone.
        """
        if self.domain is None:
            raise ValueError("a domain is required to fit the propagator")
        beta = self.beta
        if isinstance(beta, numbers.Real):
            beta = constant_beta(self.domain, float(beta))
        cfg = SchemeConfig(
            variant=self.variant,
            t=self.t,
            steps=(int(self.n),),
            h=self.h,
            kernel_tol=self.kernel_tol,
            beta=beta,
            collar_cw=self.collar_cw,
            collar_alpha=self.collar_alpha,
            interpolation=self.interpolation,
        )
        self.scheme_ = ChernoffScheme(self.domain, cfg, KinkProfile(self.domain.tubular_radius))
        mask = self.scheme_.frame.inside
        self.n_features_in_ = int(mask.sum())
        self.node_coordinates_ = self.scheme_.grid.nodes()[mask]
        if X is not None:
            self._validate_columns(X)
        return self

    def _validate_columns(self, X) -> np.ndarray:
        X = check_array(X, dtype=float, ensure_2d=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, the fitted grid exposes "
                f"{self.n_features_in_} closed-domain nodes"
            )
        return X

    def transform(self, X) -> np.ndarray:
        """Evolve each row to time ``t`` with ``n`` steps."""
        check_is_fitted(self, "scheme_")
        X = self._validate_columns(X)
        scheme = self.scheme_
        mask = scheme.frame.inside
        template = np.zeros(scheme.grid.shape)
        out = np.empty_like(X)
        for i, row in enumerate(X):
            values = template.copy()
            values[mask] = row
            evolved = scheme.evolve(ScalarField(scheme.grid, values), int(self.n))
            out[i] = evolved.values[mask]
        return out

    def field_from_row(self, row) -> ScalarField:
        """Lift one feature row back onto the full padded grid."""
        check_is_fitted(self, "scheme_")
        row = np.asarray(row, dtype=float).ravel()
        if row.size != self.n_features_in_:
            raise ValueError(
                f"row has {row.size} entries, expected {self.n_features_in_}"
            )
        values = np.zeros(self.scheme_.grid.shape)
        values[self.scheme_.frame.inside] = row
        return ScalarField(self.scheme_.grid, values)
