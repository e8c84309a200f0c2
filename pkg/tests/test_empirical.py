"""Table-based plug-in estimator for categorical mediators."""

import numpy as np
import pytest

from conftest import random_binary_scm
from twomed import (
    BinaryScm,
    ConfigError,
    Dataset,
    EstimationError,
    ProbTables,
    ReferenceConfig,
    Topology,
    decompose_empirical_sequential,
    enumerate_binary_components,
    estimate_tables,
)

CFG = ReferenceConfig(
    a=1.0, a_star=0.0, m1_star=0.0, m2_star=0.0,
    covariates=(), topology=Topology.SEQUENTIAL,
)


def test_true_tables_reproduce_enumeration():
    rng = np.random.default_rng(100)
    for _ in range(50):
        scm = random_binary_scm(rng)
        t = ProbTables.from_binary_scm(scm)
        got = decompose_empirical_sequential(t, CFG)
        want = enumerate_binary_components(scm, CFG)
        for name, value in want.components.items():
            assert got.component(name) == pytest.approx(value, abs=1e-12), name
        for name, value in want.aggregates.items():
            assert got.aggregates[name] == pytest.approx(value, abs=1e-12), name


def test_exposure_additive_outcome_leaves_only_cde():
    # dyadic probabilities and integer cell means keep everything exact:
    # mediator laws ignore exposure and the outcome mean is f(m1, m2) + 2a,
    # so every sum but the direct contrast cancels term by term
    t = ProbTables(
        pr_m1={
            (a, m1, ()): (0.25 if m1 == 1.0 else 0.75)
            for a in (0.0, 1.0) for m1 in (0.0, 1.0)
        },
        pr_m2={
            (a, m1, m2, ()): (0.5 if m2 == 1.0 else 0.5)
            for a in (0.0, 1.0) for m1 in (0.0, 1.0) for m2 in (0.0, 1.0)
        },
        p_y={
            (a, m1, m2, ()): 2.0 * a + 3.0 * m1 * m2 - m1 + 4.0 * m2
            for a in (0.0, 1.0) for m1 in (0.0, 1.0) for m2 in (0.0, 1.0)
        },
        support_a=(0.0, 1.0),
        support_m1=(0.0, 1.0),
        support_m2=(0.0, 1.0),
    )
    cs = decompose_empirical_sequential(t, CFG)
    assert cs.component("CDE") == 2.0
    for name, value in cs.components.items():
        if name != "CDE":
            assert value == 0.0, name
    assert cs.aggregates["TE"] == 2.0


def test_eight_row_dataset_runs_and_decomposes():
    # one row per (a, m1, m2) cell with Y = A: the tables are exact, the
    # mediator laws come out exposure-free, and only the direct effect remains
    rows = [(a, m1, m2) for a in (0, 1) for m1 in (0, 1) for m2 in (0, 1)]
    d = Dataset(
        a=np.array([r[0] for r in rows], dtype=float),
        m1=np.array([r[1] for r in rows], dtype=float),
        m2=np.array([r[2] for r in rows], dtype=float),
        y=np.array([r[0] for r in rows], dtype=float),
    )
    t = estimate_tables(d, CFG)
    cs = decompose_empirical_sequential(t, CFG)
    assert cs.component("CDE") == 1.0
    assert cs.aggregates["TE"] == 1.0
    for name, value in cs.components.items():
        if name != "CDE":
            assert value == 0.0, name


def test_estimated_tables_converge_to_truth():
    rng = np.random.default_rng(321)
    scm = random_binary_scm(rng)
    n = 1_000_000
    a = rng.integers(0, 2, n)
    p1 = np.where(a == 1, scm.p_m1_given_a[1], scm.p_m1_given_a[0])
    m1 = (rng.random(n) < p1).astype(int)
    p2 = np.empty(n)
    for (x, v), p in scm.p_m2_given_a_m1.items():
        p2[(a == x) & (m1 == v)] = p
    m2 = (rng.random(n) < p2).astype(int)
    ey = np.empty(n)
    for (x, v, u), val in scm.e_y_given_a_m1_m2.items():
        ey[(a == x) & (m1 == v) & (m2 == u)] = val
    y = ey + rng.normal(0.0, 0.5, n)
    d = Dataset(a=a.astype(float), m1=m1.astype(float),
                m2=m2.astype(float), y=y)
    got = decompose_empirical_sequential(estimate_tables(d, CFG), CFG)
    want = enumerate_binary_components(scm, CFG)
    for name, value in want.components.items():
        assert got.component(name) == pytest.approx(value, abs=0.01), name


def _three_level_tables(seed, order1, order2):
    rng = np.random.default_rng(seed)
    levels = (0.0, 1.0, 2.0)
    pr1 = {}
    for a in (0.0, 1.0):
        p = rng.dirichlet(np.ones(3))
        for m1, v in zip(levels, p):
            pr1[(a, m1, ())] = float(v)
    pr2 = {}
    py = {}
    for a in (0.0, 1.0):
        for m1 in levels:
            p = rng.dirichlet(np.ones(3))
            for m2, v in zip(levels, p):
                pr2[(a, m1, m2, ())] = float(v)
                py[(a, m1, m2, ())] = float(rng.normal(0.0, 2.0))
    return ProbTables(
        pr_m1=pr1, pr_m2=pr2, p_y=py,
        support_a=(0.0, 1.0),
        support_m1=tuple(order1),
        support_m2=tuple(order2),
    )


def test_summation_order_robustness():
    base = _three_level_tables(9, (0.0, 1.0, 2.0), (0.0, 1.0, 2.0))
    shuffled = ProbTables(
        pr_m1=base.pr_m1, pr_m2=base.pr_m2, p_y=base.p_y,
        support_a=base.support_a,
        support_m1=(2.0, 0.0, 1.0),
        support_m2=(1.0, 2.0, 0.0),
    )
    one = decompose_empirical_sequential(base, CFG)
    two = decompose_empirical_sequential(shuffled, CFG)
    for name, value in one.components.items():
        assert two.component(name) == pytest.approx(value, abs=1e-12), name
    for name, value in one.aggregates.items():
        assert two.aggregates[name] == pytest.approx(value, abs=1e-12), name


def test_missing_needed_cell_raises_and_names_it():
    scm = random_binary_scm(np.random.default_rng(42))
    t = ProbTables.from_binary_scm(scm)
    del t.p_y[(1.0, 1.0, 0.0, ())]
    with pytest.raises(EstimationError) as err:
        decompose_empirical_sequential(t, CFG)
    assert "E[Y | A=1, M1=1, M2=0" in str(err.value)


def test_missing_zero_weight_cells_tolerated():
    # M1 is degenerate at 0 under both exposures, so every m1=1 cell carries
    # zero weight; dropping their outcome means must not matter
    scm = BinaryScm(
        p_m1_given_a={0: 0.0, 1: 0.0},
        p_m2_given_a_m1={(a, m): 0.3 + 0.4 * a for a in (0, 1) for m in (0, 1)},
        e_y_given_a_m1_m2={
            (a, m, v): float(a + 2 * v - a * v)
            for a in (0, 1) for m in (0, 1) for v in (0, 1)
        },
    )
    t = ProbTables.from_binary_scm(scm)
    for key in [k for k in t.p_y if k[1] == 1.0]:
        del t.p_y[key]
    got = decompose_empirical_sequential(t, CFG)
    want = enumerate_binary_components(scm, CFG)
    for name, value in want.components.items():
        assert got.component(name) == pytest.approx(value, abs=1e-12), name


def test_probability_sum_violation_rejected():
    with pytest.raises(EstimationError):
        ProbTables(
            pr_m1={(0.0, 0.0, ()): 0.5, (0.0, 1.0, ()): 0.4},
            pr_m2={},
            p_y={},
            support_a=(0.0,),
            support_m1=(0.0, 1.0),
            support_m2=(),
        )


def test_reference_levels_must_sit_in_support():
    t = ProbTables.from_binary_scm(random_binary_scm(np.random.default_rng(1)))
    off_support = ReferenceConfig(
        a=2.0, a_star=0.0, m1_star=0.0, m2_star=0.0,
        covariates=(), topology=Topology.SEQUENTIAL,
    )
    with pytest.raises(ConfigError):
        decompose_empirical_sequential(t, off_support)
    missing_stratum = ReferenceConfig(
        a=1.0, a_star=0.0, m1_star=0.0, m2_star=0.0,
        covariates=(5.0,), topology=Topology.SEQUENTIAL,
    )
    with pytest.raises(ConfigError):
        decompose_empirical_sequential(t, missing_stratum)
    wrong_topology = ReferenceConfig(
        a=1.0, a_star=0.0, m1_star=0.0, m2_star=0.0,
        covariates=(), topology=Topology.NONSEQUENTIAL,
    )
    with pytest.raises(ConfigError):
        decompose_empirical_sequential(t, wrong_topology)


def test_strata_are_independent_analyses():
    rng = np.random.default_rng(77)
    scm_a = random_binary_scm(rng)
    scm_b = random_binary_scm(rng)
    merged = {"pr_m1": {}, "pr_m2": {}, "p_y": {}}
    for stratum, scm in (((0.0,), scm_a), ((1.0,), scm_b)):
        t = ProbTables.from_binary_scm(scm)
        for (a, m1, _), p in t.pr_m1.items():
            merged["pr_m1"][(a, m1, stratum)] = p
        for (a, m1, m2, _), p in t.pr_m2.items():
            merged["pr_m2"][(a, m1, m2, stratum)] = p
        for (a, m1, m2, _), v in t.p_y.items():
            merged["p_y"][(a, m1, m2, stratum)] = v
    both = ProbTables(
        pr_m1=merged["pr_m1"], pr_m2=merged["pr_m2"], p_y=merged["p_y"],
        support_a=(0.0, 1.0), support_m1=(0.0, 1.0), support_m2=(0.0, 1.0),
        strata=((0.0,), (1.0,)),
    )
    for stratum, scm in (((0.0,), scm_a), ((1.0,), scm_b)):
        cfg = ReferenceConfig(
            a=1.0, a_star=0.0, m1_star=0.0, m2_star=0.0,
            covariates=stratum, topology=Topology.SEQUENTIAL,
        )
        got = decompose_empirical_sequential(both, cfg)
        want = enumerate_binary_components(scm, CFG)
        for name, value in want.components.items():
            assert got.component(name) == pytest.approx(value, abs=1e-12), name


def test_estimate_tables_counts_match_hand_tally():
    # all eight cells once, plus duplicates of (1,1,1) and (0,0,0)
    rows = [
        (0, 0, 0, 1.0), (0, 0, 1, 2.0), (0, 1, 0, 3.0), (0, 1, 1, 4.0),
        (1, 0, 0, 5.0), (1, 0, 1, 6.0), (1, 1, 0, 7.0), (1, 1, 1, 8.0),
        (1, 1, 1, 10.0), (0, 0, 0, 3.0),
    ]
    d = Dataset(
        a=np.array([r[0] for r in rows], dtype=float),
        m1=np.array([r[1] for r in rows], dtype=float),
        m2=np.array([r[2] for r in rows], dtype=float),
        y=np.array([r[3] for r in rows]),
    )
    t = estimate_tables(d, CFG)
    # exposure 0: five rows, two with m1=1
    assert t.pr_m1[(0.0, 1.0, ())] == 0.4
    # exposure 1, m1=1: three rows, two with m2=1
    assert t.pr_m2[(1.0, 1.0, 1.0, ())] == pytest.approx(2 / 3)
    # duplicated cells average their outcomes
    assert t.p_y[(1.0, 1.0, 1.0, ())] == 9.0
    assert t.p_y[(0.0, 0.0, 0.0, ())] == 2.0
