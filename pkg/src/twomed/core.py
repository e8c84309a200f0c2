"""Shared domain types: topologies, component naming, reference configuration.

Component names form a closed set per topology. In the sequential case the
reference interactions involving the second mediator are only defined as a
combined term (the separate pieces would require a counterfactual that sets
one mediator to two exposure levels at once, which no experiment can realize),
so the sequential name set simply has no entry for them individually and a
ComponentSet carrying one is unconstructible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 2)."""


class DataError(ValueError):
    """Unusable input data (CLI exit code 3)."""


class EstimationError(ValueError):
    """Estimation could not be carried out (CLI exit code 4)."""


class InferenceError(ValueError):
    """Bootstrap inference invalid, e.g. too many failed replicates."""


class Topology(Enum):
    SEQUENTIAL = "sequential"
    NONSEQUENTIAL = "nonsequential"


# Canonical component names, in fixed report order.
CDE = "CDE"
INT_REF_AM1 = "INT_ref_AM1"
INT_REF_AM2 = "INT_ref_AM2"
INT_REF_AM1M2 = "INT_ref_AM1M2"
INT_REF_AM2_PLUS_AM1M2 = "INT_ref_AM2+AM1M2"
NATINT_AM1 = "NatINT_AM1"
NATINT_AM2 = "NatINT_AM2"
NATINT_AM1M2 = "NatINT_AM1M2"
NATINT_M1M2 = "NatINT_M1M2"
PIE_M1 = "PIE_M1"
PIE_M2 = "PIE_M2"

PDE = "PDE"
TDE = "TDE"
SIE_M1 = "SIE_M1"
TE = "TE"

SEQUENTIAL_COMPONENT_NAMES: tuple[str, ...] = (
    CDE,
    INT_REF_AM1,
    INT_REF_AM2_PLUS_AM1M2,
    NATINT_AM1,
    NATINT_AM2,
    NATINT_AM1M2,
    NATINT_M1M2,
    PIE_M1,
    PIE_M2,
)

NONSEQUENTIAL_COMPONENT_NAMES: tuple[str, ...] = (
    CDE,
    INT_REF_AM1,
    INT_REF_AM2,
    INT_REF_AM1M2,
    NATINT_AM1,
    NATINT_AM2,
    NATINT_AM1M2,
    NATINT_M1M2,
    PIE_M1,
    PIE_M2,
)

AGGREGATE_NAMES: tuple[str, ...] = (PDE, TDE, SIE_M1, TE)

_INT_REF_NAMES = {
    Topology.SEQUENTIAL: (INT_REF_AM1, INT_REF_AM2_PLUS_AM1M2),
    Topology.NONSEQUENTIAL: (INT_REF_AM1, INT_REF_AM2, INT_REF_AM1M2),
}

# Relative tolerance for the internal consistency identities.
_IDENTITY_RTOL = 1e-10


def component_names(topology: Topology) -> tuple[str, ...]:
    """Canonical component-name order for a topology."""
    if topology is Topology.SEQUENTIAL:
        return SEQUENTIAL_COMPONENT_NAMES
    return NONSEQUENTIAL_COMPONENT_NAMES


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ReferenceConfig:
    """Contrast settings: exposure levels, mediator references, covariates.

    a and a_star may be equal; every component of the degenerate contrast is
    zero. covariates holds the conditioning values c and its length must match
    the covariate dimension of whatever model it is paired with.
    """

    a: float
    a_star: float
    m1_star: float
    m2_star: float
    covariates: tuple[float, ...] = ()
    topology: Topology = Topology.SEQUENTIAL

    def __post_init__(self):
        object.__setattr__(self, "a", _require_finite("a", self.a))
        object.__setattr__(self, "a_star", _require_finite("a_star", self.a_star))
        object.__setattr__(self, "m1_star", _require_finite("m1_star", self.m1_star))
        object.__setattr__(self, "m2_star", _require_finite("m2_star", self.m2_star))
        cov = tuple(_require_finite("covariate", v) for v in self.covariates)
        object.__setattr__(self, "covariates", cov)
        if not isinstance(self.topology, Topology):
            raise ConfigError(f"topology must be a Topology, got {self.topology!r}")


def _check_identity(label: str, lhs: float, rhs: float, scale: float) -> None:
    tol = _IDENTITY_RTOL * max(1.0, abs(scale))
    if not (abs(lhs - rhs) <= tol):
        raise EstimationError(
            f"component-set identity violated: {label}: "
            f"{lhs!r} != {rhs!r} (tolerance {tol:g})"
        )


@dataclass(frozen=True)
class ComponentSet:
    """A full decomposition: named components plus derived aggregates.

    components is an ordered map in canonical (report) order; the constructor
    accepts any mapping with exactly the right keys for the topology and
    re-orders it. aggregates holds PDE, TDE, SIE_M1, TE. The defining
    identities (components sum to TE; TDE = PDE + exposure-mediator
    interactions; SIE_M1 = PIE_M1 + NatINT_M1M2) are enforced at construction
    to 1e-10 relative.
    """

    topology: Topology
    components: Mapping[str, float]
    aggregates: Mapping[str, float]

    def __post_init__(self):
        names = component_names(self.topology)
        got = set(self.components)
        want = set(names)
        if got != want:
            missing = sorted(want - got)
            extra = sorted(got - want)
            detail = []
            if missing:
                detail.append(f"missing {missing}")
            if extra:
                detail.append(f"unexpected {extra}")
            raise EstimationError(
                f"{self.topology.value} component set malformed: " + ", ".join(detail)
            )
        ordered = {k: float(self.components[k]) for k in names}
        object.__setattr__(self, "components", ordered)

        if set(self.aggregates) != set(AGGREGATE_NAMES):
            raise EstimationError(
                f"aggregates must be exactly {AGGREGATE_NAMES}, "
                f"got {sorted(self.aggregates)}"
            )
        aggs = {k: float(self.aggregates[k]) for k in AGGREGATE_NAMES}
        object.__setattr__(self, "aggregates", aggs)

        te = aggs[TE]
        _check_identity("sum(components) = TE", sum(ordered.values()), te, te)
        pde_sum = ordered[CDE] + sum(
            ordered[n] for n in _INT_REF_NAMES[self.topology]
        )
        _check_identity("PDE = CDE + INT_ref terms", aggs[PDE], pde_sum, te)
        tde_sum = (
            aggs[PDE] + ordered[NATINT_AM1] + ordered[NATINT_AM2] + ordered[NATINT_AM1M2]
        )
        _check_identity("TDE = PDE + NatINT_A*", aggs[TDE], tde_sum, te)
        _check_identity(
            "SIE_M1 = PIE_M1 + NatINT_M1M2",
            aggs[SIE_M1],
            ordered[PIE_M1] + ordered[NATINT_M1M2],
            te,
        )
        _check_identity(
            "TE = TDE + SIE_M1 + PIE_M2",
            te,
            aggs[TDE] + aggs[SIE_M1] + ordered[PIE_M2],
            te,
        )

    def component(self, name: str) -> float:
        if name not in self.components:
            raise EstimationError(
                f"component {name!r} not defined for {self.topology.value} topology"
            )
        return self.components[name]


def total_from_components(cs: ComponentSet) -> float:
    """Arithmetic sum of all components; callers compare against aggregates[TE]."""
    total = 0.0
    for name in component_names(cs.topology):
        if name not in cs.components:
            raise EstimationError(f"component set is missing {name!r}")
        total += cs.components[name]
    return total


@dataclass(frozen=True)
class SingleMediatorComponents:
    """Four-way single-mediator decomposition plus the two-way split."""

    cde: float
    int_ref: float
    int_med: float
    pie: float
    nde: float
    nie: float
    te: float

    def __post_init__(self):
        tol = _IDENTITY_RTOL * max(1.0, abs(self.te))
        four = self.cde + self.int_ref + self.int_med + self.pie
        if abs(four - self.te) > tol:
            raise EstimationError(
                f"four-way identity violated: {four!r} != TE {self.te!r}"
            )
        if abs((self.nde + self.nie) - self.te) > tol:
            raise EstimationError(
                f"two-way identity violated: {self.nde + self.nie!r} != TE {self.te!r}"
            )
