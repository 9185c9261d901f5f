#!/usr/bin/env python3
"""
Pruebas del particionado secuencial: elección del corte, test de uniformidad,
construcción del estimador y evaluación por descenso del árbol.
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from seqpart.estimators.engine import (
    choose_split, estimate, is_uniform, split_box, uniformity_threshold
)
from seqpart.models.base_model import EmptySubsetError, OutOfDomainError, ValidationError
from seqpart.models.criteria import (
    CriterionKind, EngineConfig, Method, MomentTolerances, StarSolverConfig, UniformityCriterion
)
from seqpart.models.geometry import AxisBox, SampleSet, contains
from seqpart.models.partition import PiecewiseConstantDensity, density_eval


def _subset(values):
    data = np.asarray(values, dtype=np.float64)
    if data.ndim == 1:
        data = data.reshape(-1, 1)
    return SampleSet(data).view()


def _beta_samples(n, d, seed):
    rng = np.random.default_rng(seed)
    return SampleSet(rng.beta(2.0, 5.0, size=(n, d)))


def _check_structure(pcd, samples, seed=0):
    """Masa 1, conteos que suman N y hojas que cubren el dominio sin solaparse."""
    assert abs(pcd.total_mass() - 1.0) <= 1e-10, f"Masa total {pcd.total_mass()}"
    assert sum(leaf.count for leaf in pcd.leaves) == samples.count

    rng = np.random.default_rng(seed)
    probes = pcd.domain.lo + rng.random((10_000, pcd.dim)) * pcd.domain.widths
    flags_per_leaf = [leaf.box.upper_flags(pcd.domain) for leaf in pcd.leaves]
    hits = np.zeros(probes.shape[0], dtype=np.int64)
    for leaf, flags in zip(pcd.leaves, flags_per_leaf):
        hits += leaf.box.contains_many(probes, flags)
    assert np.all(hits == 1), "Cada punto debe caer exactamente en una hoja"

    values = pcd.evaluate_many(probes)
    expected = [density_eval(pcd, p) for p in probes[:200]]
    assert np.array_equal(values[:200], expected)


# ====================================================================
# ELECCIÓN DEL CORTE
# ====================================================================

def test_choose_split_single_candidate():
    axis, i, s = choose_split(AxisBox.unit(1), _subset([0.1, 0.2, 0.3]), m=2)
    assert (axis, i, s) == (0, 1, 0.5)


def test_choose_split_most_unbalanced_candidate():
    axis, i, s = choose_split(AxisBox.unit(1), _subset([0.1, 0.2, 0.9]), m=4)
    assert (axis, i) == (0, 1)
    assert s == 0.25


def test_choose_split_tie_break_lowest_axis_then_index():
    stratified = [[0.25, 0.25], [0.75, 0.75]]
    assert choose_split(AxisBox.unit(2), _subset(stratified), m=2) == (0, 1, 0.5)


def test_choose_split_rejects_empty_subset():
    with pytest.raises(EmptySubsetError):
        choose_split(AxisBox.unit(1), _subset(np.empty((0, 1))), m=10)


def test_split_box_examples():
    lower, upper = split_box(AxisBox.unit(2), 0, 0.5)
    assert lower.to_dict() == {'lo': [0.0, 0.0], 'hi': [0.5, 1.0]}
    assert upper.to_dict() == {'lo': [0.5, 0.0], 'hi': [1.0, 1.0]}

    left, right = split_box(AxisBox.unit(1), 0, 0.25)
    assert left.volume + right.volume == 1.0
    with pytest.raises(ValidationError):
        split_box(AxisBox.unit(1), 0, 1.0)


# ====================================================================
# TEST DE UNIFORMIDAD
# ====================================================================

def test_uniformity_threshold():
    assert uniformity_threshold(0.1, 10 ** 6, 1) == pytest.approx(100.0)
    assert uniformity_threshold(0.1, 100, 100) == pytest.approx(0.01)


def test_single_point_is_uniform_under_large_threshold():
    criterion = UniformityCriterion.for_method(Method.DSP_MIX, theta=0.1)
    box = AxisBox.unit(3)
    assert is_uniform(_subset([[0.9, 0.1, 0.3]]), box, criterion, total_n=10 ** 6) is True


def test_moment_criterion_rejects_center_cluster():
    criterion = UniformityCriterion.for_method(Method.MSP, tol=MomentTolerances())
    box = AxisBox([0.0, 0.0], [2.0, 2.0])
    assert is_uniform(_subset(np.ones((30, 2))), box, criterion, total_n=30) is False


def test_marginal_shortcut_agrees_with_full_mixture_test():
    """La cota marginal nunca cambia la decisión del criterio de mezcla"""
    from seqpart.estimators.discrepancy import mixture_discrepancy
    rng = np.random.default_rng(21)
    criterion = UniformityCriterion.for_method(Method.DSP_MIX, theta=0.1)
    for _ in range(40):
        n = int(rng.integers(2, 200))
        pts = rng.beta(float(rng.uniform(0.5, 3)), float(rng.uniform(0.5, 3)), size=(n, 2))
        total_n = int(rng.integers(n, 20 * n))
        full = mixture_discrepancy(pts) <= uniformity_threshold(0.1, total_n, n)
        assert is_uniform(_subset(pts), AxisBox.unit(2), criterion, total_n) == full


def test_star_criterion_decides_with_exact_solver():
    criterion = UniformityCriterion.for_method(Method.DSP, theta=0.1, star=StarSolverConfig(seed=4))
    pts = np.random.default_rng(5).random((20, 2))
    assert is_uniform(_subset(pts), AxisBox.unit(2), criterion, total_n=20) is False
    assert is_uniform(_subset(pts), AxisBox.unit(2), criterion, total_n=10 ** 6) is True


def test_is_uniform_rejects_empty_subset():
    criterion = UniformityCriterion(CriterionKind.mixture, theta=0.1)
    with pytest.raises(EmptySubsetError):
        is_uniform(_subset(np.empty((0, 1))), AxisBox.unit(1), criterion, total_n=10)


# ====================================================================
# CONSTRUCCIÓN DEL ESTIMADOR
# ====================================================================

def test_accepting_criterion_gives_single_leaf():
    samples = SampleSet(np.random.default_rng(0).random((500, 2)) * [2.0, 1.0])
    domain = AxisBox([0.0, 0.0], [2.0, 1.0])
    criterion = UniformityCriterion.for_method(Method.DSP_MIX, theta=1e6)
    pcd = estimate(samples, domain, criterion)
    assert pcd.leaf_count == 1
    assert pcd.leaves[0].c == pytest.approx(0.5)
    assert pcd.stats['reasons']['uniform'] == 1
    assert density_eval(pcd, (2.0, 1.0)) == pytest.approx(0.5), "La cara superior del dominio es cerrada"


def test_two_leaf_constants():
    """N=4 con conteos {3, 1} en las mitades de [0,1] da c = {1.5, 0.5}"""
    samples = SampleSet(np.array([[0.1], [0.2], [0.3], [0.7]]))
    criterion = UniformityCriterion.for_method(Method.MSP, tol=MomentTolerances())
    pcd = estimate(samples, AxisBox.unit(1), criterion, EngineConfig(m=2, n_min=3))

    assert [leaf.count for leaf in pcd.leaves] == [3, 1]
    assert [leaf.c for leaf in pcd.leaves] == [1.5, 0.5]
    assert density_eval(pcd, [0.1]) == 1.5
    assert density_eval(pcd, [0.5]) == 0.5, "Un punto sobre el corte pertenece al hijo superior"
    assert pcd.stats['reasons']['n_min'] == 2
    assert pcd.stats['uniformity_tests'] == 1


def test_density_eval_errors_outside_domain():
    samples = SampleSet(np.array([[0.5]]))
    pcd = estimate(samples, AxisBox.unit(1), UniformityCriterion.for_method(Method.MSP))
    assert density_eval(pcd, [0.3]) == 1.0
    with pytest.raises(OutOfDomainError):
        density_eval(pcd, [1.5])


def test_estimate_rejects_samples_outside_domain():
    samples = SampleSet(np.array([[0.5], [1.5]]))
    with pytest.raises(OutOfDomainError) as exc:
        estimate(samples, AxisBox.unit(1), UniformityCriterion.for_method(Method.MSP))
    assert exc.value.row == 2


@pytest.mark.parametrize('method', [Method.DSP_MIX, Method.MSP])
def test_structural_invariants(method):
    samples = _beta_samples(3000, 2, seed=13)
    criterion = UniformityCriterion.for_method(method, theta=0.1)
    pcd = estimate(samples, AxisBox.unit(2), criterion)
    print(f"\n  {method.label}: {pcd.leaf_count} hojas, {pcd.stats['uniformity_tests']} tests")
    assert pcd.leaf_count > 1
    _check_structure(pcd, samples)


def test_star_criterion_structure_and_seed_determinism():
    samples = _beta_samples(400, 2, seed=2)
    criterion = UniformityCriterion.for_method(Method.DSP, theta=0.1,
                                               star=StarSolverConfig(restarts=5, iterations=100, seed=3))
    first = estimate(samples, AxisBox.unit(2), criterion)
    second = estimate(samples, AxisBox.unit(2), criterion)
    _check_structure(first, samples)
    assert first.to_dict() == second.to_dict()


def test_strategies_produce_identical_partitions():
    samples = _beta_samples(2000, 3, seed=8)
    criterion = UniformityCriterion.for_method(Method.DSP_MIX, theta=0.1)
    results = [estimate(samples, AxisBox.unit(3), criterion, strategy=s).to_dict()
               for s in ('fifo', 'lifo', 'restart')]
    assert results[0] == results[1] == results[2]

    with pytest.raises(ValidationError):
        estimate(samples, AxisBox.unit(3), criterion, strategy='random')


def test_max_leaves_truncates():
    samples = _beta_samples(2000, 2, seed=1)
    criterion = UniformityCriterion.for_method(Method.MSP, tol=MomentTolerances.uniform(0.01))
    pcd = estimate(samples, AxisBox.unit(2), criterion, EngineConfig(max_leaves=5))
    assert pcd.truncated is True
    assert pcd.leaf_count <= 5
    assert pcd.stats['reasons']['max_leaves'] >= 1
    _check_structure(pcd, samples)

    root_only = estimate(samples, AxisBox.unit(2), criterion, EngineConfig(max_leaves=1))
    assert root_only.leaf_count == 1 and root_only.truncated


def test_max_depth_and_duplicate_points():
    """Puntos repetidos: la profundidad máxima detiene la división"""
    samples = SampleSet(np.full((50, 1), 0.3))
    criterion = UniformityCriterion.for_method(Method.DSP_MIX, theta=0.1)
    pcd = estimate(samples, AxisBox.unit(1), criterion, EngineConfig(max_depth=6, n_min=1))
    assert pcd.stats['max_depth'] <= 6
    assert pcd.stats['reasons']['max_depth'] >= 1
    _check_structure(pcd, samples)


def test_partition_dict_round_trip_preserves_lookup():
    samples = _beta_samples(1500, 2, seed=4)
    pcd = estimate(samples, AxisBox.unit(2), UniformityCriterion.for_method(Method.MSP))
    restored = PiecewiseConstantDensity.from_dict(pcd.to_dict())
    probes = np.random.default_rng(0).random((500, 2))
    assert np.array_equal(restored.evaluate_many(probes), pcd.evaluate_many(probes))
    assert restored.to_dict() == pcd.to_dict()


def test_empty_sample_set_is_rejected():
    with pytest.raises(EmptySubsetError):
        estimate(SampleSet(np.empty((0, 2))), AxisBox.unit(2), UniformityCriterion.for_method(Method.MSP))


def test_smaller_theta_refines_partition():
    """Con θ₁ < θ₂ cada hoja de θ₂ es unión de hojas de θ₁"""
    samples = _beta_samples(2500, 2, seed=6)
    fine = estimate(samples, AxisBox.unit(2), UniformityCriterion.for_method(Method.DSP_MIX, theta=0.05))
    coarse = estimate(samples, AxisBox.unit(2), UniformityCriterion.for_method(Method.DSP_MIX, theta=0.2))
    assert fine.leaf_count >= coarse.leaf_count

    counts = np.zeros(coarse.leaf_count, dtype=np.int64)
    for leaf in fine.leaves:
        owner = coarse.leaf_index(leaf.box.center)
        outer = coarse.leaves[owner].box
        assert np.all(leaf.box.lo >= outer.lo) and np.all(leaf.box.hi <= outer.hi)
        counts[owner] += leaf.count
    assert counts.tolist() == [leaf.count for leaf in coarse.leaves]
