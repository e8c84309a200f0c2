"""Shared factories for randomized model instances."""

import numpy as np

from twomed import BinaryScm, LinearScm, ReferenceConfig, Topology


def random_linear_scm(rng, k=2, sequential=True, scale=1.0):
    beta = rng.normal(0.0, scale, 4)
    if not sequential:
        beta[2] = beta[3] = 0.0
    return LinearScm(
        theta=rng.normal(0.0, scale, 8),
        beta=beta,
        gamma=rng.normal(0.0, scale, 2),
        theta_c=rng.normal(0.0, scale, k),
        beta_c=rng.normal(0.0, scale, k),
        gamma_c=rng.normal(0.0, scale, k),
        sigma_y=float(rng.uniform(0.5, 1.5)),
        sigma_m1=float(rng.uniform(0.5, 1.5)),
        sigma_m2=float(rng.uniform(0.5, 1.5)),
    )


def random_binary_scm(rng, topology=Topology.SEQUENTIAL):
    p2 = {(x, m1): float(rng.uniform()) for x in (0, 1) for m1 in (0, 1)}
    if topology is Topology.NONSEQUENTIAL:
        p2[(0, 1)] = p2[(0, 0)]
        p2[(1, 1)] = p2[(1, 0)]
    return BinaryScm(
        p_m1_given_a={0: float(rng.uniform()), 1: float(rng.uniform())},
        p_m2_given_a_m1=p2,
        e_y_given_a_m1_m2={
            (x, m1, m2): float(rng.normal(0.0, 2.0))
            for x in (0, 1)
            for m1 in (0, 1)
            for m2 in (0, 1)
        },
        topology=topology,
    )


def random_reference(rng, topology=Topology.SEQUENTIAL, k=2, binary=False):
    if binary:
        return ReferenceConfig(
            a=1.0,
            a_star=0.0,
            m1_star=float(rng.integers(0, 2)),
            m2_star=float(rng.integers(0, 2)),
            covariates=(),
            topology=topology,
        )
    return ReferenceConfig(
        a=float(rng.normal(1.0, 0.5)),
        a_star=float(rng.normal(0.0, 0.5)),
        m1_star=float(rng.normal()),
        m2_star=float(rng.normal()),
        covariates=tuple(float(v) for v in rng.normal(0.0, 1.0, k)),
        topology=topology,
    )


def make_linear_dataset(scm, n, seed, exposure_p=0.5):
    """Noisy draws from a linear model, as a plain dict of arrays."""
    rng = np.random.default_rng(seed)
    a = rng.binomial(1, exposure_p, n).astype(float)
    k = scm.covariate_dim
    c = rng.standard_normal((n, k))
    m1 = (
        scm.gamma[0] + scm.gamma[1] * a + c @ np.asarray(scm.gamma_c)
        + rng.normal(0.0, scm.sigma_m1, n)
    )
    m2 = (
        scm.beta[0] + scm.beta[1] * a + scm.beta[2] * m1 + scm.beta[3] * a * m1
        + c @ np.asarray(scm.beta_c) + rng.normal(0.0, scm.sigma_m2, n)
    )
    t = scm.theta
    y = (
        t[0] + t[1] * a + t[2] * m1 + t[3] * m2 + t[4] * a * m1 + t[5] * a * m2
        + t[6] * m1 * m2 + t[7] * a * m1 * m2 + c @ np.asarray(scm.theta_c)
        + rng.normal(0.0, scm.sigma_y, n)
    )
    return {"a": a, "m1": m1, "m2": m2, "y": y, "covariates": c}
