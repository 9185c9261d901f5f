#!/usr/bin/env python3
"""
Pruebas de momentos muestrales, momentos de la uniforme y del test de momentos.
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import time

import numpy as np
import pytest

from seqpart.estimators.invariance import reflect, rotate
from seqpart.estimators.moments import MomentSummary, moment_uniformity_test, sample_moments, uniform_moments
from seqpart.models.base_model import EmptySubsetError, ValidationError
from seqpart.models.criteria import MomentTolerances
from seqpart.models.geometry import AxisBox, SampleSet


def _midpoint_lattice(box, k):
    axes = [box.lo[j] + (np.arange(k) + 0.5) / k * box.widths[j] for j in range(box.dim)]
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def test_sample_moments_examples():
    summary = sample_moments(np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert summary.mean.tolist() == [0.5, 0.5]
    assert np.allclose(summary.covariance, [[0.25, 0.25], [0.25, 0.25]])

    single = sample_moments(np.array([[0.3, 0.7, 0.1]]))
    assert np.array_equal(single.mean, [0.3, 0.7, 0.1])
    assert np.all(single.covariance == 0.0), "Un único punto tiene covarianza nula"


def test_sample_moments_translation_and_numpy_agreement():
    rng = np.random.default_rng(9)
    data = rng.random((500, 4))
    summary = sample_moments(data)
    assert np.allclose(summary.mean, data.mean(axis=0), rtol=1e-12)
    assert np.allclose(summary.covariance, np.cov(data, rowvar=False, bias=True), rtol=1e-12, atol=1e-15)

    shifted = sample_moments(data + 3.0)
    assert np.allclose(shifted.mean, summary.mean + 3.0, rtol=1e-12)
    assert np.allclose(shifted.covariance, summary.covariance, rtol=1e-9, atol=1e-14)


def test_sample_moments_from_subset_view():
    samples = SampleSet(np.array([[0.1], [0.5], [0.9], [0.3]]))
    view = samples.view(np.array([0, 2]))
    assert sample_moments(view).mean[0] == pytest.approx(0.5)
    with pytest.raises(EmptySubsetError):
        sample_moments(samples.view(np.array([], dtype=np.int64)))


def test_uniform_moments_examples():
    one = uniform_moments(AxisBox([0.0], [1.0]))
    assert one.mean[0] == 0.5 and one.covariance[0, 0] == pytest.approx(1 / 12)

    two = uniform_moments(AxisBox([0.0], [2.0]))
    assert two.mean[0] == 1.0 and two.covariance[0, 0] == pytest.approx(1 / 3)

    cube = uniform_moments(AxisBox.unit(3))
    assert np.array_equal(cube.mean, [0.5, 0.5, 0.5])
    assert np.allclose(cube.covariance, np.eye(3) / 12)
    assert cube.covariance[0, 1] == 0.0


def test_moment_summary_validation():
    with pytest.raises(ValidationError):
        MomentSummary([0.0, 0.0], [[1.0, 0.5], [0.4, 1.0]])
    with pytest.raises(ValidationError):
        MomentSummary([0.0], [[-1.0]])


def test_moment_test_accepts_midpoint_lattice():
    box = AxisBox([0.0, -1.0], [2.0, 1.0])
    lattice = _midpoint_lattice(box, 40)
    assert moment_uniformity_test(lattice, box, MomentTolerances()) is True


def test_moment_test_rejects_center_cluster():
    box = AxisBox.unit(2)
    cluster = np.tile(box.center, (25, 1))
    assert moment_uniformity_test(cluster, box, MomentTolerances()) is False


def test_moment_test_one_dimension_has_no_covariance_clause():
    box = AxisBox([0.0], [1.0])
    pts = _midpoint_lattice(box, 100)
    assert moment_uniformity_test(pts, box, MomentTolerances(0.1, 0.1, 1e-12)) is True
    shifted = pts * 0.5
    assert moment_uniformity_test(shifted, box, MomentTolerances()) is False, "La media se desplaza 0.25"


def test_moment_test_invariance_under_reflection_and_rotation():
    rng = np.random.default_rng(31)
    box = AxisBox([0.0, -0.5, 1.0], [1.0, 0.5, 1.5])
    for _ in range(200):
        n = int(rng.integers(2, 64))
        pts = box.lo + rng.random((n, 3)) * box.widths
        tol = MomentTolerances(*rng.uniform(0.05, 0.5, size=3))
        base = moment_uniformity_test(pts, box, tol)
        assert moment_uniformity_test(reflect(pts, 1, box), box, tol) == base
        assert moment_uniformity_test(rotate(pts, 0, 1, box), box, tol) == base


@pytest.mark.skipif(os.getenv('SEQPART_RUN_BENCHMARKS') != '1',
                    reason="Medición de tiempos: exporte SEQPART_RUN_BENCHMARKS=1")
def test_moment_test_cost_is_linear_in_n():
    """Duplicar n cuesta como mucho ~2.5 veces más (mejor de varias repeticiones)"""
    box = AxisBox.unit(4)
    tol = MomentTolerances()
    rng = np.random.default_rng(0)
    small = rng.random((200_000, 4))
    large = rng.random((400_000, 4))
    moment_uniformity_test(small[:100], box, tol)

    def best_time(data):
        times = []
        for _ in range(7):
            start = time.perf_counter()
            moment_uniformity_test(data, box, tol)
            times.append(time.perf_counter() - start)
        return min(times)

    ratio = best_time(large) / best_time(small)
    assert ratio <= 2.5, f"t(2n)/t(n) = {ratio:.2f}"
