"""Percentile bootstrap intervals for every component and aggregate.

Case resampling: each replicate draws n rows with replacement, refits, and
decomposes. Replicate b's indices come from a generator seeded with
(seed, b), so results are reproducible and independent of execution order.
Rank-deficient (or empty-cell) resamples are excluded and counted; a run
with more than 5% exclusions is invalid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closed_form import decompose_closed_form
from .core import (
    AGGREGATE_NAMES,
    ComponentSet,
    ConfigError,
    EstimationError,
    InferenceError,
    ReferenceConfig,
    component_names,
)
from .empirical import decompose_empirical_sequential, estimate_tables
from .regression import Dataset, fit_all

ESTIMATORS = ("closed-form", "empirical-categorical")


@dataclass(frozen=True)
class BootstrapResult:
    """Point estimate with percentile bounds.

    lower/upper cover components and aggregates alike. A percentile interval
    may exclude the point estimate in skewed cases; lower <= upper always
    holds.
    """

    point: ComponentSet
    lower: dict
    upper: dict
    level: float
    replicates: int
    failed_replicates: int
    seed: int


def _estimate_once(d: Dataset, cfg: ReferenceConfig, estimator: str) -> ComponentSet:
    if estimator == "closed-form":
        fitted = fit_all(d, cfg.topology)
        return decompose_closed_form(fitted.coefficients, cfg)
    tables = estimate_tables(d, cfg)
    return decompose_empirical_sequential(tables, cfg)


def bootstrap_decomposition(
    d: Dataset,
    cfg: ReferenceConfig,
    B: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    estimator: str = "closed-form",
) -> BootstrapResult:
    """Point decomposition plus percentile confidence bounds.

    Quantiles are numpy's default linear interpolation between order
    statistics at probabilities (1 - level)/2 and (1 + level)/2.
    """
    if B < 100:
        raise ConfigError(f"bootstrap needs B >= 100 replicates, got {B}")
    if not (0.0 < level < 1.0):
        raise ConfigError(f"confidence level must be in (0, 1), got {level}")
    if seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed}")
    if estimator not in ESTIMATORS:
        raise ConfigError(
            f"unknown estimator {estimator!r}; choose one of {ESTIMATORS}"
        )

    point = _estimate_once(d, cfg, estimator)
    names = list(component_names(cfg.topology)) + list(AGGREGATE_NAMES)
    draws = {k: [] for k in names}
    n = d.n
    failed = 0
    for b in range(B):
        rng = np.random.default_rng([seed, b])
        idx = rng.integers(0, n, size=n)
        try:
            cs = _estimate_once(d.take(idx), cfg, estimator)
        except EstimationError:
            failed += 1
            continue
        for k in component_names(cfg.topology):
            draws[k].append(cs.component(k))
        for k in AGGREGATE_NAMES:
            draws[k].append(cs.aggregates[k])

    if failed > 0.05 * B:
        raise InferenceError(
            f"{failed} of {B} bootstrap replicates failed (> 5%); "
            "intervals would be unreliable"
        )
    lo_q = (1.0 - level) / 2.0
    hi_q = (1.0 + level) / 2.0
    lower = {}
    upper = {}
    for k in names:
        vals = np.asarray(draws[k])
        lower[k] = float(np.quantile(vals, lo_q))
        upper[k] = float(np.quantile(vals, hi_q))
    return BootstrapResult(
        point=point,
        lower=lower,
        upper=upper,
        level=level,
        replicates=B,
        failed_replicates=failed,
        seed=seed,
    )
