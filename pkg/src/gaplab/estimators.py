"""scikit-learn style estimators for blow-up rates.

``PowerLawRegressor`` fits ``y = C eps^(-beta)`` to given data;
``BlowupRateEstimator`` produces that data itself by running a gap sweep.
Both follow the estimator conventions (parameters in ``__init__``, learned
attributes with a trailing underscore, ``fit`` returns ``self``).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_eps_array
from .errors import DomainError
from .experiments import DEFAULT_N_XI, FIT_POINTS, SweepConfig, fit_exponent, run_sweep
from .geometry import DEFAULT_C_GAP, DEFAULT_OUTER_RADIUS
from .linsolve import DEFAULT_TOLERANCE


def _as_eps(X):
    """Accept a 1-d array of eps or an ``(m, 1)`` design matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise DomainError(f"expected a single feature (eps), got {X.shape[1]}")
        X = X[:, 0]
    return check_eps_array(X)


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``log y = log C - beta log eps``.

    Parameters
    ----------
    last : int or None
        Use only the ``last`` smallest eps values (None: all).

    Attributes
    ----------
    beta_, stderr_, r_squared_, coef_ : float
        Exponent, its standard error, the fit's R^2 and the prefactor ``C``.
    """

    def __init__(self, last=None):
        self.last = last

    def fit(self, X, y):
        eps = _as_eps(X)
        y = np.asarray(y, dtype=float).ravel()
        if y.shape != eps.shape:
            raise DomainError(f"X has {eps.size} samples but y has {y.size}")
        order = np.argsort(-eps)
        eps, y = eps[order], y[order]
        if self.last is not None:
            eps, y = eps[-self.last :], y[-self.last :]
        self.beta_, self.stderr_, self.r_squared_ = fit_exponent(np.column_stack([eps, y]))
        self.coef_ = float(np.exp(np.mean(np.log(y) + self.beta_ * np.log(eps))))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "beta_")
        return self.coef_ * _as_eps(X) ** (-self.beta_)


class BlowupRateEstimator(BaseEstimator):
    """Measure the exponent of ``max_V |grad u|`` by solving at each requested gap.

    ``fit(eps)`` runs a sweep over the given gap widths (sorted decreasing)
    and stores the :class:`~gaplab.experiments.SweepResult`.  ``predict``
    extrapolates ``M_max`` with the fitted power law.
    """

    def __init__(
        self,
        n=3,
        k=1,
        n_xi=DEFAULT_N_XI,
        n_eta=None,
        tolerance=DEFAULT_TOLERANCE,
        c_gap=DEFAULT_C_GAP,
        outer_radius=DEFAULT_OUTER_RADIUS,
        fit_points=FIT_POINTS,
        jobs=1,
    ):
        self.n = n
        self.k = k
        self.n_xi = n_xi
        self.n_eta = n_eta
        self.tolerance = tolerance
        self.c_gap = c_gap
        self.outer_radius = outer_radius
        self.fit_points = fit_points
        self.jobs = jobs

    def fit(self, X, y=None):
        eps = np.sort(np.unique(_as_eps(X)))[::-1]
        config = SweepConfig(
            n=self.n,
            k=self.k,
            eps_list=tuple(eps),
            n_xi=self.n_xi,
            n_eta=self.n_eta,
            tolerance=self.tolerance,
            c_gap=self.c_gap,
            outer_radius=self.outer_radius,
            fit_points=min(self.fit_points, eps.size),
        )
        self.result_ = run_sweep(config, jobs=self.jobs, write=False)
        tail = slice(eps.size - config.fit_points, None)
        self.power_law_ = PowerLawRegressor().fit(self.result_.eps[tail], self.result_.column("M_max")[tail])
        self.beta_ = self.result_.beta
        self.stderr_ = self.result_.fit_stderr
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        return self.power_law_.predict(X)
