#!/usr/bin/env python3
"""
Pruebas de la verificación aleatorizada de invarianzas.
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from seqpart.estimators.discrepancy import star_discrepancy_exact
from seqpart.estimators.invariance import (
    find_star_witness, permute, reflect, rotate, run_invariance_suite
)
from seqpart.models.base_model import ValidationError
from seqpart.models.geometry import AxisBox


def test_transformations_on_unit_cube():
    pts = np.array([[0.1, 0.2, 0.3]])
    assert np.allclose(reflect(pts, 1), [[0.1, 0.8, 0.3]])
    assert np.allclose(rotate(pts, 0, 2), [[0.3, 0.2, 0.9]])
    assert permute(pts, np.array([2, 0, 1])).tolist() == [[0.3, 0.1, 0.2]]
    assert pts.tolist() == [[0.1, 0.2, 0.3]], "Las transformaciones no modifican la entrada"
    with pytest.raises(ValidationError):
        rotate(pts, 1, 1)


def test_transformations_on_box():
    box = AxisBox([0.0, 1.0], [2.0, 3.0])
    pts = np.array([[0.5, 1.5]])
    assert reflect(pts, 0, box).tolist() == [[1.5, 1.5]]
    assert rotate(pts, 0, 1, box).tolist() == [[0.5, 2.5]]
    with pytest.raises(ValidationError):
        rotate(pts, 0, 1, AxisBox([0.0, 0.0], [1.0, 2.0]))


def test_small_suite_passes():
    report = run_invariance_suite(50, seed=1)
    print(f"\n{report.to_text()}")
    assert report.passed
    assert {check.name for check in report.checks} == {
        'mixture reflection', 'mixture rotation', 'mixture permutation',
        'moment-test reflection', 'moment-test rotation',
    }
    assert all(check.trials > 0 for check in report.checks)
    assert report.to_dict()['passed'] is True
    assert report.to_text().endswith('PASSED')


def test_star_witness_is_genuine():
    witness = find_star_witness(np.random.default_rng(0))
    assert witness is not None
    pts = np.array(witness['points'])
    assert star_discrepancy_exact(pts).value == pytest.approx(witness['original'])
    assert star_discrepancy_exact(reflect(pts, 0)).value == pytest.approx(witness['reflected'])
    assert abs(witness['original'] - witness['reflected']) > 1e-6


def test_zero_trials_is_vacuous_pass():
    report = run_invariance_suite(0)
    assert report.passed
    assert report.checks == []
    assert len(report.warnings) == 1


def test_suite_is_reproducible():
    assert run_invariance_suite(20, seed=9).to_dict() == run_invariance_suite(20, seed=9).to_dict()


def test_negative_trials_rejected():
    with pytest.raises(ValidationError):
        run_invariance_suite(-1)


def test_missing_witness_fails_report(mocker):
    mocker.patch('seqpart.estimators.invariance.find_star_witness', return_value=None)
    report = run_invariance_suite(5, seed=0)
    assert not report.passed
    assert 'not found' in report.to_text()
