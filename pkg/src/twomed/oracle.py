"""Ground-truth engines for the decomposition.

Three layers, from micro to macro:

- individual-level evaluators that apply the defining counterfactual contrasts
  to one individual's potential-value functions;
- exact expectation of the components for binary structural models, computed
  two independent ways (probability-weighted sums, and exhaustive enumeration
  of latent-threshold individuals);
- Monte Carlo averaging of the individual-level contrasts for linear-Gaussian
  structural models, with one error draw per individual shared across all of
  that individual's counterfactual worlds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .core import (
    AGGREGATE_NAMES,
    CDE,
    INT_REF_AM1,
    INT_REF_AM1M2,
    INT_REF_AM2,
    INT_REF_AM2_PLUS_AM1M2,
    NATINT_AM1,
    NATINT_AM1M2,
    NATINT_AM2,
    NATINT_M1M2,
    PDE,
    PIE_M1,
    PIE_M2,
    SIE_M1,
    TDE,
    TE,
    ComponentSet,
    ConfigError,
    EstimationError,
    ReferenceConfig,
    SingleMediatorComponents,
    Topology,
    component_names,
)


@dataclass(frozen=True)
class IndividualPotentials:
    """One individual's potential-value functions.

    m1_of(a) is the first mediator's potential value under exposure a;
    m2_of(a, m1) the second mediator's under exposure a with the first
    mediator at m1; y_of(a, m1, m2) the outcome's. All deterministic given the
    individual's latent draws, so the observed value equals the potential
    value at the observed inputs.
    """

    m1_of: Callable[[float], float]
    m2_of: Callable[[float, float], float]
    y_of: Callable[[float, float, float], float]


@dataclass(frozen=True)
class SingleMediatorPotentials:
    """Single-mediator reduction: m_of(a) and y_of(a, m)."""

    m_of: Callable[[float], float]
    y_of: Callable[[float, float], float]


def _sequential_from_values(w, y_a_nat_ref, y_s_nat_ref, y_a_ref_ref, y_s_ref_ref):
    """Nine sequential components + aggregates from nested-counterfactual values.

    w maps 1..8 to Y(x, M1(y), M2(z, M1(y))) at the eight exposure-slot
    settings; the remaining arguments anchor one or both mediators at their
    reference levels. Works elementwise on scalars and arrays alike.
    """
    comps = {
        CDE: y_a_ref_ref - y_s_ref_ref,
        INT_REF_AM1: y_a_nat_ref - y_s_nat_ref - y_a_ref_ref + y_s_ref_ref,
        INT_REF_AM2_PLUS_AM1M2: w[7] - y_a_nat_ref - w[8] + y_s_nat_ref,
        NATINT_AM1: w[2] - w[6] - w[7] + w[8],
        NATINT_AM2: w[3] - w[5] - w[7] + w[8],
        NATINT_AM1M2: w[1] - w[4] - w[3] + w[5] - w[2] + w[6] + w[7] - w[8],
        NATINT_M1M2: w[4] - w[5] - w[6] + w[8],
        PIE_M1: w[6] - w[8],
        PIE_M2: w[5] - w[8],
    }
    aggs = {
        PDE: w[7] - w[8],
        TDE: w[1] - w[4],
        SIE_M1: w[4] - w[5],
        TE: w[1] - w[8],
    }
    return comps, aggs


def _nonsequential_from_values(y):
    """Ten non-sequential components + aggregates.

    y maps (exposure_slot, m1_slot, m2_slot) to an outcome value, where the
    mediator slots are "a"/"s" for the natural potential under that exposure
    and "r" for the fixed reference level.
    """
    comps = {
        CDE: y["a", "r", "r"] - y["s", "r", "r"],
        INT_REF_AM1: (
            y["a", "s", "r"] - y["s", "s", "r"] - y["a", "r", "r"] + y["s", "r", "r"]
        ),
        INT_REF_AM2: (
            y["a", "r", "s"] - y["s", "r", "s"] - y["a", "r", "r"] + y["s", "r", "r"]
        ),
        INT_REF_AM1M2: (
            y["a", "s", "s"] - y["s", "s", "s"]
            - y["a", "r", "s"] + y["s", "r", "s"]
            - y["a", "s", "r"] + y["s", "s", "r"]
            + y["a", "r", "r"] - y["s", "r", "r"]
        ),
        NATINT_AM1: (
            y["a", "a", "s"] - y["s", "a", "s"] - y["a", "s", "s"] + y["s", "s", "s"]
        ),
        NATINT_AM2: (
            y["a", "s", "a"] - y["s", "s", "a"] - y["a", "s", "s"] + y["s", "s", "s"]
        ),
        NATINT_AM1M2: (
            y["a", "a", "a"] - y["s", "a", "a"]
            - y["a", "s", "a"] + y["s", "s", "a"]
            - y["a", "a", "s"] + y["s", "a", "s"]
            + y["a", "s", "s"] - y["s", "s", "s"]
        ),
        NATINT_M1M2: (
            y["s", "a", "a"] - y["s", "s", "a"] - y["s", "a", "s"] + y["s", "s", "s"]
        ),
        PIE_M1: y["s", "a", "s"] - y["s", "s", "s"],
        PIE_M2: y["s", "s", "a"] - y["s", "s", "s"],
    }
    aggs = {
        PDE: y["a", "s", "s"] - y["s", "s", "s"],
        TDE: y["a", "a", "a"] - y["s", "a", "a"],
        SIE_M1: y["s", "a", "a"] - y["s", "s", "a"],
        TE: y["a", "a", "a"] - y["s", "s", "s"],
    }
    return comps, aggs


def individual_components_sequential(
    p: IndividualPotentials, cfg: ReferenceConfig
) -> ComponentSet:
    """Nine-component decomposition of one individual, sequential topology."""
    if cfg.topology is not Topology.SEQUENTIAL:
        raise ConfigError("individual_components_sequential needs Sequential topology")
    a, s = cfg.a, cfg.a_star
    m1_a, m1_s = p.m1_of(a), p.m1_of(s)
    # the eight nested values Y(x, M1(y), M2(z, M1(y)))
    slots = {
        1: (a, a, a), 2: (a, a, s), 3: (a, s, a), 4: (s, a, a),
        5: (s, s, a), 6: (s, a, s), 7: (a, s, s), 8: (s, s, s),
    }
    m1_at = {a: m1_a, s: m1_s}
    w = {
        k: p.y_of(x, m1_at[yv], p.m2_of(z, m1_at[yv]))
        for k, (x, yv, z) in slots.items()
    }
    comps, aggs = _sequential_from_values(
        w,
        p.y_of(a, m1_s, cfg.m2_star),
        p.y_of(s, m1_s, cfg.m2_star),
        p.y_of(a, cfg.m1_star, cfg.m2_star),
        p.y_of(s, cfg.m1_star, cfg.m2_star),
    )
    return ComponentSet(Topology.SEQUENTIAL, comps, aggs)


def individual_components_nonsequential(
    p: IndividualPotentials, cfg: ReferenceConfig
) -> ComponentSet:
    """Ten-component decomposition of one individual, non-sequential topology.

    Rejects potentials whose m2_of actually varies with its first-mediator
    argument: without the M1 -> M2 edge the second mediator's potential value
    may depend on exposure only.
    """
    if cfg.topology is not Topology.NONSEQUENTIAL:
        raise ConfigError(
            "individual_components_nonsequential needs NonSequential topology"
        )
    a, s = cfg.a, cfg.a_star
    m1_a, m1_s = p.m1_of(a), p.m1_of(s)
    probe_m1 = (m1_a, m1_s, cfg.m1_star)
    m2_at = {}
    for z in (a, s):
        vals = [p.m2_of(z, m1v) for m1v in probe_m1]
        if any(v != vals[0] for v in vals[1:]):
            raise EstimationError(
                "m2_of varies with its m1 argument; not a non-sequential individual"
            )
        m2_at[z] = vals[0]
    m1_slot = {"a": m1_a, "s": m1_s, "r": cfg.m1_star}
    m2_slot = {"a": m2_at[a], "s": m2_at[s], "r": cfg.m2_star}
    x_slot = {"a": a, "s": s}
    y = {
        (x, i, j): p.y_of(x_slot[x], m1_slot[i], m2_slot[j])
        for x in ("a", "s")
        for i in ("a", "s", "r")
        for j in ("a", "s", "r")
    }
    comps, aggs = _nonsequential_from_values(y)
    return ComponentSet(Topology.NONSEQUENTIAL, comps, aggs)


def single_mediator_four_way(
    p: SingleMediatorPotentials, cfg: ReferenceConfig
) -> SingleMediatorComponents:
    """Four-way decomposition for a single mediator.

    cfg.m1_star serves as the mediator reference level m*; cfg.m2_star and the
    topology flag are ignored.
    """
    a, s, mr = cfg.a, cfg.a_star, cfg.m1_star
    m_a, m_s = p.m_of(a), p.m_of(s)
    cde = p.y_of(a, mr) - p.y_of(s, mr)
    int_ref = p.y_of(a, m_s) - p.y_of(s, m_s) - p.y_of(a, mr) + p.y_of(s, mr)
    int_med = p.y_of(a, m_a) - p.y_of(s, m_a) - p.y_of(a, m_s) + p.y_of(s, m_s)
    pie = p.y_of(s, m_a) - p.y_of(s, m_s)
    nde = p.y_of(a, m_s) - p.y_of(s, m_s)
    nie = p.y_of(a, m_a) - p.y_of(a, m_s)
    te = p.y_of(a, m_a) - p.y_of(s, m_s)
    return SingleMediatorComponents(cde, int_ref, int_med, pie, nde, nie, te)


# ---------------------------------------------------------------------------
# binary structural models
# ---------------------------------------------------------------------------

_BIN = (0, 1)


@dataclass(frozen=True)
class BinaryScm:
    """Bernoulli structural model over binary exposure and mediators.

    p_m1_given_a[a] = Pr(M1=1 | A=a); p_m2_given_a_m1[(a, m1)] = Pr(M2=1 | .);
    e_y_given_a_m1_m2[(a, m1, m2)] = mean outcome in that cell (any real).
    For the non-sequential topology the m1 index must not matter.
    """

    p_m1_given_a: Mapping[int, float]
    p_m2_given_a_m1: Mapping[tuple[int, int], float]
    e_y_given_a_m1_m2: Mapping[tuple[int, int, int], float]
    topology: Topology = Topology.SEQUENTIAL

    def __post_init__(self):
        p1 = {int(k): float(v) for k, v in self.p_m1_given_a.items()}
        p2 = {
            (int(k[0]), int(k[1])): float(v)
            for k, v in self.p_m2_given_a_m1.items()
        }
        ey = {
            (int(k[0]), int(k[1]), int(k[2])): float(v)
            for k, v in self.e_y_given_a_m1_m2.items()
        }
        if set(p1) != set(_BIN):
            raise ConfigError("p_m1_given_a must have exactly the keys 0 and 1")
        if set(p2) != {(x, m) for x in _BIN for m in _BIN}:
            raise ConfigError("p_m2_given_a_m1 must cover (a, m1) in {0,1}^2")
        if set(ey) != {(x, m, m2) for x in _BIN for m in _BIN for m2 in _BIN}:
            raise ConfigError("e_y_given_a_m1_m2 must cover (a, m1, m2) in {0,1}^3")
        for tag, table in (("p_m1_given_a", p1), ("p_m2_given_a_m1", p2)):
            for k, v in table.items():
                if not (0.0 <= v <= 1.0):
                    raise ConfigError(f"{tag}[{k}] = {v} outside [0, 1]")
        for v in ey.values():
            if not math.isfinite(v):
                raise ConfigError("e_y_given_a_m1_m2 values must be finite")
        if self.topology is Topology.NONSEQUENTIAL:
            for x in _BIN:
                if p2[(x, 0)] != p2[(x, 1)]:
                    raise ConfigError(
                        "non-sequential model requires p_m2_given_a_m1 constant "
                        f"in m1; differs at a={x}"
                    )
        object.__setattr__(self, "p_m1_given_a", p1)
        object.__setattr__(self, "p_m2_given_a_m1", p2)
        object.__setattr__(self, "e_y_given_a_m1_m2", ey)


def _check_binary_cfg(scm: BinaryScm, cfg: ReferenceConfig) -> tuple[int, int, int, int]:
    if cfg.topology is not scm.topology:
        raise ConfigError(
            f"config topology {cfg.topology.value} does not match model "
            f"topology {scm.topology.value}"
        )
    if cfg.covariates:
        raise ConfigError("binary structural models carry no covariates")
    levels = (cfg.a, cfg.a_star, cfg.m1_star, cfg.m2_star)
    out = []
    for name, v in zip(("a", "a_star", "m1_star", "m2_star"), levels):
        if v not in (0.0, 1.0):
            raise ConfigError(f"{name} must be 0 or 1 for a binary model, got {v}")
        out.append(int(v))
    return tuple(out)


def enumerate_binary_components(
    scm: BinaryScm, cfg: ReferenceConfig
) -> ComponentSet:
    """Exact expected components of a binary model, by probability-weighted sums.

    Plugs the true conditional tables into the iterated-conditional-expectation
    sums; no sampling error. Independent of the latent-threshold enumeration
    route (enumerate_binary_components_by_individuals), which must agree.
    """
    a, s, m1r, m2r = _check_binary_cfg(scm, cfg)
    ey = scm.e_y_given_a_m1_m2

    def pr1(m1: int, x: int) -> float:
        p = scm.p_m1_given_a[x]
        return p if m1 == 1 else 1.0 - p

    def pr2(m2: int, x: int, m1: int) -> float:
        p = scm.p_m2_given_a_m1[(x, m1)]
        return p if m2 == 1 else 1.0 - p

    def w(x: int, y: int, z: int) -> float:
        return math.fsum(
            ey[(x, m1, m2)] * pr1(m1, y) * pr2(m2, z, m1)
            for m1 in _BIN
            for m2 in _BIN
        )

    aggs = {
        PDE: w(a, s, s) - w(s, s, s),
        TDE: w(a, a, a) - w(s, a, a),
        SIE_M1: w(s, a, a) - w(s, s, a),
        TE: w(a, a, a) - w(s, s, s),
    }

    if scm.topology is Topology.SEQUENTIAL:
        comps = {
            CDE: ey[(a, m1r, m2r)] - ey[(s, m1r, m2r)],
            INT_REF_AM1: math.fsum(
                (
                    ey[(a, m1, m2r)] - ey[(a, m1r, m2r)]
                    - ey[(s, m1, m2r)] + ey[(s, m1r, m2r)]
                )
                * pr1(m1, s)
                for m1 in _BIN
            ),
            INT_REF_AM2_PLUS_AM1M2: math.fsum(
                (
                    ey[(a, m1, m2)] - ey[(a, m1, m2r)]
                    - ey[(s, m1, m2)] + ey[(s, m1, m2r)]
                )
                * pr1(m1, s) * pr2(m2, s, m1)
                for m1 in _BIN
                for m2 in _BIN
            ),
            NATINT_AM1: math.fsum(
                (ey[(a, m1, m2)] - ey[(s, m1, m2)])
                * pr2(m2, s, m1) * (pr1(m1, a) - pr1(m1, s))
                for m1 in _BIN
                for m2 in _BIN
            ),
            NATINT_AM2: math.fsum(
                (ey[(a, m1, m2)] - ey[(s, m1, m2)])
                * pr1(m1, s) * (pr2(m2, a, m1) - pr2(m2, s, m1))
                for m1 in _BIN
                for m2 in _BIN
            ),
            NATINT_AM1M2: math.fsum(
                (ey[(a, m1, m2)] - ey[(s, m1, m2)])
                * (pr1(m1, a) - pr1(m1, s)) * (pr2(m2, a, m1) - pr2(m2, s, m1))
                for m1 in _BIN
                for m2 in _BIN
            ),
            NATINT_M1M2: math.fsum(
                ey[(s, m1, m2)]
                * (pr1(m1, a) - pr1(m1, s)) * (pr2(m2, a, m1) - pr2(m2, s, m1))
                for m1 in _BIN
                for m2 in _BIN
            ),
            PIE_M1: math.fsum(
                ey[(s, m1, m2)] * pr2(m2, s, m1) * (pr1(m1, a) - pr1(m1, s))
                for m1 in _BIN
                for m2 in _BIN
            ),
            PIE_M2: math.fsum(
                ey[(s, m1, m2)] * pr1(m1, s) * (pr2(m2, a, m1) - pr2(m2, s, m1))
                for m1 in _BIN
                for m2 in _BIN
            ),
        }
        return ComponentSet(Topology.SEQUENTIAL, comps, aggs)

    # non-sequential: the same iterated expectations with M2 independent of M1
    def pr2x(m2: int, x: int) -> float:
        return pr2(m2, x, 0)

    comps = {
        CDE: ey[(a, m1r, m2r)] - ey[(s, m1r, m2r)],
        INT_REF_AM1: math.fsum(
            (
                ey[(a, m1, m2r)] - ey[(s, m1, m2r)]
                - ey[(a, m1r, m2r)] + ey[(s, m1r, m2r)]
            )
            * pr1(m1, s)
            for m1 in _BIN
        ),
        INT_REF_AM2: math.fsum(
            (
                ey[(a, m1r, m2)] - ey[(s, m1r, m2)]
                - ey[(a, m1r, m2r)] + ey[(s, m1r, m2r)]
            )
            * pr2x(m2, s)
            for m2 in _BIN
        ),
        INT_REF_AM1M2: math.fsum(
            (
                ey[(a, m1, m2)] - ey[(s, m1, m2)]
                - ey[(a, m1r, m2)] + ey[(s, m1r, m2)]
                - ey[(a, m1, m2r)] + ey[(s, m1, m2r)]
                + ey[(a, m1r, m2r)] - ey[(s, m1r, m2r)]
            )
            * pr1(m1, s) * pr2x(m2, s)
            for m1 in _BIN
            for m2 in _BIN
        ),
        NATINT_AM1: math.fsum(
            (ey[(a, m1, m2)] - ey[(s, m1, m2)])
            * pr2x(m2, s) * (pr1(m1, a) - pr1(m1, s))
            for m1 in _BIN
            for m2 in _BIN
        ),
        NATINT_AM2: math.fsum(
            (ey[(a, m1, m2)] - ey[(s, m1, m2)])
            * pr1(m1, s) * (pr2x(m2, a) - pr2x(m2, s))
            for m1 in _BIN
            for m2 in _BIN
        ),
        NATINT_AM1M2: math.fsum(
            (ey[(a, m1, m2)] - ey[(s, m1, m2)])
            * (pr1(m1, a) - pr1(m1, s)) * (pr2x(m2, a) - pr2x(m2, s))
            for m1 in _BIN
            for m2 in _BIN
        ),
        NATINT_M1M2: math.fsum(
            ey[(s, m1, m2)]
            * (pr1(m1, a) - pr1(m1, s)) * (pr2x(m2, a) - pr2x(m2, s))
            for m1 in _BIN
            for m2 in _BIN
        ),
        PIE_M1: math.fsum(
            ey[(s, m1, m2)] * pr2x(m2, s) * (pr1(m1, a) - pr1(m1, s))
            for m1 in _BIN
            for m2 in _BIN
        ),
        PIE_M2: math.fsum(
            ey[(s, m1, m2)] * pr1(m1, s) * (pr2x(m2, a) - pr2x(m2, s))
            for m1 in _BIN
            for m2 in _BIN
        ),
    }
    return ComponentSet(Topology.NONSEQUENTIAL, comps, aggs)


def _interval_cells(probs) -> list[tuple[float, float]]:
    cuts = sorted({0.0, 1.0, *probs})
    return [(lo, hi) for lo, hi in zip(cuts, cuts[1:]) if hi > lo]


def enumerate_binary_individuals(scm: BinaryScm):
    """Yield (weight, IndividualPotentials) covering all response types.

    Individuals are realized by independent latent uniforms with threshold
    response: M1(a) = 1 iff U1 < Pr(M1=1|a), likewise M2 against its table.
    Within a rectangle of the (U1, U2) unit square the whole response pattern
    is constant, so enumerating rectangles is exact. Components are linear in
    the outcome's potential values, so the outcome latent integrates out to
    the cell-mean outcome.
    """
    p1 = scm.p_m1_given_a
    p2 = scm.p_m2_given_a_m1
    ey = scm.e_y_given_a_m1_m2
    for lo1, hi1 in _interval_cells(p1.values()):
        u1 = 0.5 * (lo1 + hi1)
        for lo2, hi2 in _interval_cells(p2.values()):
            u2 = 0.5 * (lo2 + hi2)

            def m1_of(a, _u1=u1):
                return 1.0 if _u1 < p1[int(a)] else 0.0

            def m2_of(a, m1, _u2=u2):
                return 1.0 if _u2 < p2[(int(a), int(m1))] else 0.0

            def y_of(a, m1, m2):
                return ey[(int(a), int(m1), int(m2))]

            yield (hi1 - lo1) * (hi2 - lo2), IndividualPotentials(m1_of, m2_of, y_of)


def enumerate_binary_components_by_individuals(
    scm: BinaryScm, cfg: ReferenceConfig
) -> ComponentSet:
    """Exact expected components by exhaustive latent-threshold enumeration.

    Averages the individual-level contrasts over every latent rectangle; a
    fully independent route from enumerate_binary_components.
    """
    _check_binary_cfg(scm, cfg)
    evaluate = (
        individual_components_sequential
        if cfg.topology is Topology.SEQUENTIAL
        else individual_components_nonsequential
    )
    comp_terms: dict[str, list[float]] = {}
    agg_terms: dict[str, list[float]] = {}
    for weight, pot in enumerate_binary_individuals(scm):
        cs = evaluate(pot, cfg)
        for k, v in cs.components.items():
            comp_terms.setdefault(k, []).append(weight * v)
        for k, v in cs.aggregates.items():
            agg_terms.setdefault(k, []).append(weight * v)
    comps = {k: math.fsum(v) for k, v in comp_terms.items()}
    aggs = {k: math.fsum(v) for k, v in agg_terms.items()}
    return ComponentSet(cfg.topology, comps, aggs)


# ---------------------------------------------------------------------------
# linear-Gaussian structural models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearScm:
    """Linear-Gaussian ground truth for the two-mediator system.

    theta: outcome-model coefficients (intercept, exposure, m1, m2,
    exposure*m1, exposure*m2, m1*m2, exposure*m1*m2); theta_c the outcome's
    covariate coefficients. beta: second-mediator model (intercept, exposure,
    m1, exposure*m1) with covariate coefficients beta_c. gamma: first-mediator
    model (intercept, exposure) with covariate coefficients gamma_c. Errors
    are independent centered Gaussians with the given standard deviations.
    """

    theta: tuple[float, ...]
    beta: tuple[float, ...]
    gamma: tuple[float, ...]
    theta_c: tuple[float, ...] = ()
    beta_c: tuple[float, ...] = ()
    gamma_c: tuple[float, ...] = ()
    sigma_y: float = 1.0
    sigma_m1: float = 1.0
    sigma_m2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(v) for v in self.theta))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))
        object.__setattr__(self, "theta_c", tuple(float(v) for v in self.theta_c))
        object.__setattr__(self, "beta_c", tuple(float(v) for v in self.beta_c))
        object.__setattr__(self, "gamma_c", tuple(float(v) for v in self.gamma_c))
        if len(self.theta) != 8:
            raise ConfigError("theta must have 8 entries")
        if len(self.beta) != 4:
            raise ConfigError("beta must have 4 entries")
        if len(self.gamma) != 2:
            raise ConfigError("gamma must have 2 entries")
        if not (len(self.theta_c) == len(self.beta_c) == len(self.gamma_c)):
            raise ConfigError("covariate coefficient vectors must share one length")
        for tag in ("sigma_y", "sigma_m1", "sigma_m2"):
            v = float(getattr(self, tag))
            if not (v > 0.0) or not math.isfinite(v):
                raise ConfigError(f"{tag} must be a positive real, got {v}")
            object.__setattr__(self, tag, v)

    @property
    def covariate_dim(self) -> int:
        return len(self.theta_c)


@dataclass(frozen=True)
class MonteCarloResult:
    """Monte Carlo estimate of a decomposition with per-name standard errors.

    standard_errors covers every component and aggregate; each is the standard
    deviation of the per-individual values divided by sqrt(n).
    """

    components: ComponentSet
    standard_errors: Mapping[str, float]
    n: int
    seed: int


def _dot(coeffs: tuple[float, ...], values: tuple[float, ...], label: str) -> float:
    if len(coeffs) != len(values):
        raise ConfigError(
            f"covariate dimension mismatch: model has {len(coeffs)} {label} "
            f"coefficients, config supplies {len(values)} values"
        )
    return float(np.dot(coeffs, values)) if coeffs else 0.0


def simulate_linear_components(
    scm: LinearScm,
    cfg: ReferenceConfig,
    n: int,
    seed: int,
    shards: int = 1,
) -> MonteCarloResult:
    """Monte Carlo average of the individual-level contrasts.

    Each simulated individual gets ONE error triple, reused across every
    counterfactual world, so the per-individual sum identity holds exactly and
    the averages estimate the population components. Deterministic given
    (seed, shards); per-shard streams derive from (seed, shard index) and the
    shard merge uses exact compensated summation, so the result does not
    depend on merge order.
    """
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")
    if shards < 1 or shards > n:
        raise ConfigError("shards must be in [1, n]")
    if cfg.topology is Topology.NONSEQUENTIAL and (
        scm.beta[2] != 0.0 or scm.beta[3] != 0.0
    ):
        raise ConfigError(
            "non-sequential topology requires beta[2] = beta[3] = 0 "
            "(no first-mediator effect on the second)"
        )

    t = scm.theta
    b = scm.beta
    g = scm.gamma
    t8c = _dot(scm.theta_c, cfg.covariates, "outcome")
    b4c = _dot(scm.beta_c, cfg.covariates, "m2")
    g2c = _dot(scm.gamma_c, cfg.covariates, "m1")
    a, s = cfg.a, cfg.a_star

    names = list(component_names(cfg.topology)) + list(AGGREGATE_NAMES)
    sums = {k: [] for k in names}
    sumsqs = {k: [] for k in names}

    base = n // shards
    counts = [base + (1 if i < n % shards else 0) for i in range(shards)]

    for shard_idx, m in enumerate(counts):
        rng = np.random.default_rng([seed, shard_idx])
        e1 = rng.normal(0.0, scm.sigma_m1, size=m)
        e2 = rng.normal(0.0, scm.sigma_m2, size=m)
        ey = rng.normal(0.0, scm.sigma_y, size=m)

        def m1_of(x):
            return g[0] + g[1] * x + g2c + e1

        def m2_of(z, m1):
            return b[0] + b[1] * z + b[2] * m1 + b[3] * z * m1 + b4c + e2

        def y_of(x, m1, m2):
            return (
                t[0] + t[1] * x + t[2] * m1 + t[3] * m2 + t[4] * x * m1
                + t[5] * x * m2 + t[6] * m1 * m2 + t[7] * x * m1 * m2
                + t8c + ey
            )

        m1_at = {a: m1_of(a), s: m1_of(s)}
        if cfg.topology is Topology.SEQUENTIAL:
            slots = {
                1: (a, a, a), 2: (a, a, s), 3: (a, s, a), 4: (s, a, a),
                5: (s, s, a), 6: (s, a, s), 7: (a, s, s), 8: (s, s, s),
            }
            w = {
                k: y_of(x, m1_at[yv], m2_of(z, m1_at[yv]))
                for k, (x, yv, z) in slots.items()
            }
            comps, aggs = _sequential_from_values(
                w,
                y_of(a, m1_at[s], cfg.m2_star),
                y_of(s, m1_at[s], cfg.m2_star),
                y_of(a, cfg.m1_star, cfg.m2_star),
                y_of(s, cfg.m1_star, cfg.m2_star),
            )
        else:
            m2_nat = {a: m2_of(a, 0.0), s: m2_of(s, 0.0)}  # beta2 = beta3 = 0
            m1_slot = {"a": m1_at[a], "s": m1_at[s], "r": cfg.m1_star}
            m2_slot = {"a": m2_nat[a], "s": m2_nat[s], "r": cfg.m2_star}
            x_slot = {"a": a, "s": s}
            yvals = {
                (x, i, j): y_of(x_slot[x], m1_slot[i], m2_slot[j])
                for x in ("a", "s")
                for i in ("a", "s", "r")
                for j in ("a", "s", "r")
            }
            comps, aggs = _nonsequential_from_values(yvals)

        for k, arr in {**comps, **aggs}.items():
            arr = np.asarray(arr, dtype=float)
            sums[k].append(float(np.sum(arr)))
            sumsqs[k].append(float(np.sum(arr * arr)))

    means = {k: math.fsum(v) / n for k, v in sums.items()}
    ses = {}
    for k in names:
        total_sq = math.fsum(sumsqs[k])
        var = max(total_sq - n * means[k] ** 2, 0.0) / (n - 1) if n > 1 else 0.0
        ses[k] = math.sqrt(var / n)

    comp_names = component_names(cfg.topology)
    cs = ComponentSet(
        cfg.topology,
        {k: means[k] for k in comp_names},
        {k: means[k] for k in AGGREGATE_NAMES},
    )
    return MonteCarloResult(components=cs, standard_errors=ses, n=n, seed=seed)
