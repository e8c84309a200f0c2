"""Ordinary least squares for the three working models.

The outcome model regresses Y on exposure, both mediators, all their
products, and covariates; the second mediator's model depends on the
topology; the first mediator's model is exposure plus covariates. Solves
use an orthogonal decomposition of the design (never normal equations)
because the triple-product column can be badly scaled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .closed_form import ModelCoefficients
from .core import ConfigError, DataError, EstimationError, Topology


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric columns for one analysis.

    covariates is an (n, k) array, k possibly zero. Non-finite entries are
    rejected here; missing-value handling happens upstream at load time.
    """

    a: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    y: np.ndarray
    covariates: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    covariate_names: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("a", "m1", "m2", "y"):
            col = np.asarray(getattr(self, name), dtype=float)
            if col.ndim != 1:
                raise DataError(f"column {name!r} must be one-dimensional")
            object.__setattr__(self, name, col)
        n = self.a.shape[0]
        if n == 0:
            raise DataError("dataset has no rows")
        for name in ("m1", "m2", "y"):
            if getattr(self, name).shape[0] != n:
                raise DataError(f"column {name!r} length differs from exposure")
        cov = np.asarray(self.covariates, dtype=float)
        if cov.size == 0:
            cov = np.empty((n, 0))
        if cov.ndim != 2 or cov.shape[0] != n:
            raise DataError("covariates must be an (n, k) matrix")
        object.__setattr__(self, "covariates", cov)
        names = tuple(self.covariate_names)
        if not names:
            names = tuple(f"c{i + 1}" for i in range(cov.shape[1]))
        if len(names) != cov.shape[1]:
            raise DataError("covariate_names length must match covariate columns")
        object.__setattr__(self, "covariate_names", names)
        for name in ("a", "m1", "m2", "y"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DataError(f"column {name!r} contains non-finite values")
        if not np.all(np.isfinite(cov)):
            raise DataError("covariates contain non-finite values")

    @property
    def n(self) -> int:
        return int(self.a.shape[0])

    @property
    def k(self) -> int:
        return int(self.covariates.shape[1])

    def take(self, idx: np.ndarray) -> "Dataset":
        """Row subset (with repetition allowed), for resampling."""
        return Dataset(
            a=self.a[idx],
            m1=self.m1[idx],
            m2=self.m2[idx],
            y=self.y[idx],
            covariates=self.covariates[idx],
            covariate_names=self.covariate_names,
        )


@dataclass(frozen=True)
class FittedModels:
    """OLS output for all three models.

    coefficients feeds the closed forms; everything else is reporting. Keys of
    the per-model maps are "y", "m2", "m1". vcov entries are the usual
    s^2 (X'X)^{-1} matrices in the order given by design_names.
    """

    coefficients: ModelCoefficients
    stderr_diagnostics: dict
    r_squared: dict
    residual_sigma_m1: float
    vcov: dict
    design_names: dict
    n: int


def _design_names(topology: Topology, cov_names: tuple[str, ...]):
    cov = list(cov_names)
    y_names = ["intercept", "a", "m1", "m2", "a:m1", "a:m2", "m1:m2", "a:m1:m2"] + cov
    if topology is Topology.SEQUENTIAL:
        m2_names = ["intercept", "a", "m1", "a:m1"] + cov
    else:
        m2_names = ["intercept", "a"] + cov
    m1_names = ["intercept", "a"] + cov
    return {"y": y_names, "m2": m2_names, "m1": m1_names}


def _dependent_columns(x: np.ndarray, names) -> list[str]:
    """Columns linearly dependent on their predecessors, by a Gram-Schmidt sweep."""
    bad = []
    basis = []
    for j in range(x.shape[1]):
        v = x[:, j].copy()
        scale = np.linalg.norm(v)
        if scale == 0.0:
            bad.append(names[j])
            continue
        for q in basis:
            v = v - (q @ v) * q
        for q in basis:  # second pass tightens near-dependence detection
            v = v - (q @ v) * q
        r = np.linalg.norm(v)
        if r <= 1e-10 * scale:
            bad.append(names[j])
        else:
            basis.append(v / r)
    return bad


def _fit_one(x: np.ndarray, y: np.ndarray, names, label: str):
    n, p = x.shape
    coefs, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < p:
        bad = _dependent_columns(x, names)
        raise EstimationError(
            f"{label} design is rank-deficient; collinear columns: "
            + ", ".join(bad or ["(numerically degenerate)"])
        )
    resid = y - x @ coefs
    rss = float(resid @ resid)
    dof = n - p
    s2 = rss / dof if dof > 0 else 0.0
    r = np.linalg.qr(x, mode="r")
    rinv = np.linalg.solve(r, np.eye(p))
    xtx_inv = rinv @ rinv.T
    vcov = s2 * xtx_inv
    stderr = {nm: float(v) for nm, v in zip(names, np.sqrt(np.diag(vcov)))}
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0.0 else 1.0
    return coefs, stderr, r2, vcov, resid, s2


def fit_all(d: Dataset, topology: Topology) -> FittedModels:
    """Fit the outcome and both mediator models, returning plug-in coefficients.

    The residual variance of the first mediator's model (unbiased, denominator
    n - (2 + k)) supplies the sigma_m1 the closed forms need.
    """
    if not isinstance(topology, Topology):
        raise ConfigError(f"unknown topology {topology!r}")
    n, k = d.n, d.k
    if n <= 8 + k:
        raise DataError(
            f"need more than {8 + k} rows to fit the outcome design, got {n}"
        )
    names = _design_names(topology, d.covariate_names)
    a, m1, m2, y, c = d.a, d.m1, d.m2, d.y, d.covariates
    one = np.ones(n)

    x_y = np.column_stack([one, a, m1, m2, a * m1, a * m2, m1 * m2, a * m1 * m2, c])
    if topology is Topology.SEQUENTIAL:
        x_m2 = np.column_stack([one, a, m1, a * m1, c])
    else:
        x_m2 = np.column_stack([one, a, c])
    x_m1 = np.column_stack([one, a, c])

    theta, se_y, r2_y, v_y, _, s2_y = _fit_one(x_y, y, names["y"], "outcome")
    b_fit, se_m2, r2_m2, v_m2, _, s2_m2 = _fit_one(x_m2, m2, names["m2"], "m2")
    g_fit, se_m1, r2_m1, v_m1, resid_m1, _ = _fit_one(x_m1, m1, names["m1"], "m1")

    dof_m1 = n - (2 + k)
    sigma2_m1 = float(resid_m1 @ resid_m1) / dof_m1
    if topology is Topology.SEQUENTIAL:
        beta = (b_fit[0], b_fit[1], b_fit[2], b_fit[3])
        beta_c = tuple(b_fit[4:])
    else:
        beta = (b_fit[0], b_fit[1], 0.0, 0.0)
        beta_c = tuple(b_fit[2:])

    coefficients = ModelCoefficients(
        theta=tuple(theta[:8]),
        beta=beta,
        gamma=(g_fit[0], g_fit[1]),
        theta_c=tuple(theta[8:]),
        beta_c=beta_c,
        gamma_c=tuple(g_fit[2:]),
        sigma_m1=float(np.sqrt(sigma2_m1)),
        sigma_y=float(np.sqrt(s2_y)),
        sigma_m2=float(np.sqrt(s2_m2)),
    )
    return FittedModels(
        coefficients=coefficients,
        stderr_diagnostics={"y": se_y, "m2": se_m2, "m1": se_m1},
        r_squared={"y": r2_y, "m2": r2_m2, "m1": r2_m1},
        residual_sigma_m1=float(np.sqrt(sigma2_m1)),
        vcov={"y": v_y, "m2": v_m2, "m1": v_m1},
        design_names=names,
        n=n,
    )
