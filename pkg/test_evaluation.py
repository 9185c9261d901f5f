#!/usr/bin/env python3
"""
Pruebas del error L² relativo y del arnés de experimentos.
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import io
import itertools

import numpy as np
import pytest

from config import Config
from seqpart.estimators import evaluation
from seqpart.estimators.evaluation import (
    CSV_COLUMNS, SWEEP_COLUMNS, BenchContext, BenchRecord, bench_table, format_table, l2_relative_error,
    run_benchmark, summarize, sweep, write_records_csv
)
from seqpart.models.base_model import ValidationError
from seqpart.models.criteria import EngineConfig, Method, StarSolverConfig
from seqpart.models import distributions
from seqpart.models.distributions import BetaMixtureSpec, ReferenceDensity, SamplerSettings, preset
from seqpart.models.geometry import AxisBox
from seqpart.models.partition import Leaf, PiecewiseConstantDensity, TerminationReason, TreeNode


def _uniform_reference(dim=1):
    return ReferenceDensity.build(BetaMixtureSpec([1.0], [[[1.0, 1.0]] * dim], name='uniform'))


def _single_leaf(c, dim=1):
    box = AxisBox.unit(dim)
    return PiecewiseConstantDensity(domain=box, total_n=10, leaves=[Leaf(box, c, 10)],
                                    nodes=[TreeNode(leaf=0)])


def _two_halves(c_low, c_high):
    low, high = AxisBox([0.0], [0.5]), AxisBox([0.5], [1.0])
    return PiecewiseConstantDensity(
        domain=AxisBox.unit(1), total_n=4,
        leaves=[Leaf(low, c_low, 3, 1, TerminationReason.n_min), Leaf(high, c_high, 1, 1, TerminationReason.n_min)],
        nodes=[TreeNode(axis=0, value=0.5, left=1, right=2), TreeNode(leaf=0), TreeNode(leaf=1)],
    )


class FakeClock:
    """Reloj que avanza 1 s por lectura y cuenta las lecturas."""

    def __init__(self):
        self.ticks = itertools.count()
        self.calls = 0

    def __call__(self):
        self.calls += 1
        return float(next(self.ticks))


# ====================================================================
# ERROR L²
# ====================================================================

def test_l2_error_examples():
    ref = _uniform_reference()
    assert l2_relative_error(_single_leaf(1.0), ref) == 0.0
    assert l2_relative_error(_single_leaf(2.0), ref) == pytest.approx(1.0)
    assert l2_relative_error(_two_halves(1.5, 0.5), ref) == pytest.approx(0.5)


def test_l2_error_is_scale_consistent():
    spec = preset('betamix2d')
    ref = ReferenceDensity.build(spec)
    box = AxisBox.unit(2)
    leaves = [Leaf(AxisBox([0.0, 0.0], [0.5, 1.0]), 0.8, 4), Leaf(AxisBox([0.5, 0.0], [1.0, 1.0]), 1.2, 6)]
    nodes = [TreeNode(axis=0, value=0.5, left=1, right=2), TreeNode(leaf=0), TreeNode(leaf=1)]
    pcd = PiecewiseConstantDensity(box, 10, leaves, nodes)
    base = l2_relative_error(pcd, ref)
    assert base > 0.0

    scaled_leaves = [Leaf(leaf.box, 3.0 * leaf.c, leaf.count) for leaf in leaves]
    scaled_pcd = PiecewiseConstantDensity(box, 10, scaled_leaves, nodes)
    scaled_spec = BetaMixtureSpec(spec.weights, spec.components, name=spec.name)
    scaled_ref = ReferenceDensity(scaled_spec, log_normalizer=-np.log(3.0))
    assert l2_relative_error(scaled_pcd, scaled_ref) == pytest.approx(base, rel=1e-12)


def test_l2_error_requires_matching_domain():
    with pytest.raises(ValidationError):
        l2_relative_error(_single_leaf(1.0, dim=2), _uniform_reference(1))


# ====================================================================
# CELDAS DE EXPERIMENTO
# ====================================================================

def test_run_benchmark_times_only_the_estimate(mocker):
    """Solo estimate() queda entre las dos lecturas del reloj"""
    clock = FakeClock()
    spy = mocker.spy(evaluation, 'estimate')
    record = run_benchmark(preset('betamix2d'), Method.MSP, 2000, seed=3, clock=clock)
    assert spy.call_count == 1
    assert clock.calls == 2
    assert record.wall_time == 1.0
    assert record.method == 'MSP' and record.spec == 'betamix2d'
    assert record.d == 2 and record.N == 2000 and record.seed == 3
    assert record.leaf_count >= 1 and record.error >= 0.0


def test_run_benchmark_uses_cell_seed_for_star_search(mocker):
    spy = mocker.spy(evaluation, 'estimate')
    run_benchmark(preset('betamix2d'), Method.DSP, 200, seed=17, clock=FakeClock(),
                  star=StarSolverConfig(restarts=3, iterations=20, seed=0))
    criterion = spy.call_args.args[2]
    assert criterion.star.seed == 17


def test_benchmarks_follow_sampler_settings(mocker):
    """Los presupuestos del muestreo y del normalizador vienen de la configuración"""
    normalizer = mocker.spy(distributions, 'estimate_normalizer')
    draws = mocker.spy(distributions, 'sample')
    settings = SamplerSettings.from_config({'SAMPLER_BATCH': 4096, 'SAMPLER_PROBE': 50_000,
                                            'NORMALIZER_MC_SAMPLES': 12_345, 'NORMALIZER_SEED': 7})
    spec = preset('gauss2d')
    bench_table(1, [300], [Method.MSP], [0, 1], settings=settings, clock=FakeClock())

    assert normalizer.call_count == 1
    assert normalizer.call_args.args[1:] == (12_345, 7)
    assert draws.call_count == 2
    assert draws.call_args.kwargs == {'batch': 4096, 'probe': 50_000}

    context = BenchContext(spec=spec, method=Method.MSP, n=300, settings=settings)
    sweep('theta', [0.1], context, clock=FakeClock())
    assert normalizer.call_args.args[1:] == (12_345, 7)


def test_sampler_settings_default_to_config():
    settings = SamplerSettings.from_config({})
    assert settings == SamplerSettings()
    assert settings.mc_samples == Config.NORMALIZER_MC_SAMPLES


def test_bench_record_validation():
    with pytest.raises(ValidationError):
        BenchRecord('MSP', 'gauss2d', 2, 10, 0, error=-1.0, wall_time=1.0, leaf_count=1)
    with pytest.raises(ValidationError):
        BenchRecord('MSP', 'gauss2d', 2, 10, 0, error=0.1, wall_time=0.0, leaf_count=1)


def test_bench_table_cross_product_size():
    records = bench_table(1, [500], [Method.DSP_MIX, Method.MSP], [0, 1, 2, 3, 4], clock=FakeClock())
    assert len(records) == 10
    assert {r.spec for r in records} == {'gauss2d'}
    assert sorted({r.method for r in records}) == ['DSP-mix', 'MSP']


def test_bench_table_presets_and_dimension_filter():
    records = bench_table(4, [300], [Method.MSP], [0], dims=[2, 3], clock=FakeClock())
    assert [(r.spec, r.d) for r in records] == [('gaussmixNd', 2), ('gaussmixNd', 3)]
    records = bench_table(5, [300], [Method.MSP], [0], dims=[2], clock=FakeClock())
    assert records[0].spec == 'betamixNd'
    with pytest.raises(ValidationError):
        bench_table(6, [300], [Method.MSP], [0])
    with pytest.raises(ValidationError):
        bench_table(1, [300], [Method.MSP], [0], dims=[3])


def test_sweep_records_parameter_values():
    context = BenchContext(spec=preset('betamix2d'), method=Method.MSP, n=1000, seed=2,
                           engine=EngineConfig())
    records = sweep('eps', [0.05, 0.1, 0.2], context, clock=FakeClock())
    assert [r.value for r in records] == [0.05, 0.1, 0.2]
    assert {r.param for r in records} == {'eps'}

    by_n = sweep('N', [200.0, 400.0], context, clock=FakeClock())
    assert [r.N for r in by_n] == [200, 400]

    with pytest.raises(ValidationError):
        sweep('m', [2.0], context)
    with pytest.raises(ValidationError):
        sweep('theta', [], context)


# ====================================================================
# AGREGACIÓN Y SALIDA
# ====================================================================

def _records():
    return [
        BenchRecord('MSP', 'gauss2d', 2, 100, seed, error=e, wall_time=t, leaf_count=k)
        for seed, (e, t, k) in enumerate([(0.1, 1.0, 10), (0.2, 2.0, 20), (0.3, 3.0, 30)])
    ]


def test_summarize_mean_and_sample_std():
    rows = summarize(_records())
    assert len(rows) == 1
    row = rows[0]
    assert row.seeds == 3
    assert row.error_mean == pytest.approx(0.2)
    assert row.error_std == pytest.approx(0.1), "Desviación estándar muestral (ddof=1)"
    assert row.time_mean == pytest.approx(2.0)
    assert row.leaves_mean == pytest.approx(20.0)


def test_csv_columns():
    buffer = io.StringIO()
    write_records_csv(_records(), buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == ','.join(CSV_COLUMNS)
    assert lines[1] == 'MSP,gauss2d,2,100,0,0.1,1.0,10'
    assert len(lines) == 4

    buffer = io.StringIO()
    write_records_csv(_records(), buffer, with_sweep=True)
    assert buffer.getvalue().splitlines()[0] == ','.join(SWEEP_COLUMNS)


def test_format_table_layout():
    text = format_table(summarize(_records()))
    header, body = text.splitlines()
    assert header.split()[:4] == ['method', 'spec', 'd', 'N']
    assert '0.2000 ± 0.1000' in body
