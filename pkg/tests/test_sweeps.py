import math
import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
import sweeps.checks as checks
from core import kernels
from core.errors import CapExceededError, SpecError
from core.file_parsing import CSVFileParser, JsonReportParser
from sweeps.checks import (BATCH_CHECKS, BatchStats, budget_increment_terms, c1_terms,
                           check_truncation, run_batch_checks, small_side_failures, subcube_mask)
import sweeps.sweep_framework as sweep_framework
from sweeps.sweep_framework import C1_DELTAS, MAX_CHUNK_CELLS, SweepConfig, SweepFramework

ALL_BATCH = list(BATCH_CHECKS)


def run_sweep(tmp_path, **kwargs):
    config = SweepConfig(output=str(tmp_path / "sweep.csv"), **kwargs)
    return config, SweepFramework(config).run()


def test_subcube_mask_counts():
    # Non-empty sub-cubes of the 2-cube: 4 points, 4 edges and the whole cube.
    stats = BatchStats.of(kernels.all_tables(2), 2)
    assert int(subcube_mask(stats).sum()) == 9


def test_batch_checks_pass_for_every_small_function():
    for n in (1, 2, 3):
        columns = run_batch_checks(kernels.all_tables(n), n, ALL_BATCH)
        for check in ALL_BATCH:
            assert np.asarray(columns[checks.PASS_COLUMNS[check]]).all(), (n, check)


def test_exhaustive_two_bit_sweep(tmp_path):
    config, (frame, summary) = run_sweep(tmp_path, family='exhaustive-n', n=2, checks=ALL_BATCH)
    assert summary['functions'] == 16
    assert summary['all_passed']
    assert summary['iso_equality_count'] == 8
    assert summary['subcube_count'] == 9
    assert frame['index'].tolist() == list(range(16))
    assert frame.loc[8, 'spec'] == 'n=2:8'


def test_exhaustive_three_bit_sweep_writes_outputs(tmp_path):
    config, (frame, summary) = run_sweep(tmp_path, family='exhaustive-n', n=3, chunk_size=50)
    assert summary['iso_equality_count'] == 26
    assert summary['all_passed']
    read_back = CSVFileParser.read_csv(config.output)
    assert list(read_back.columns)[0] == 'schema_version'
    assert len(read_back) == 256
    assert read_back['spec'].tolist() == frame['spec'].tolist()
    stored = JsonReportParser.read_json(config.summary_path)
    assert stored['schema_version'] == '1'
    assert stored['functions'] == 256
    assert stored['min_medium_ratio']['value'] is not None
    assert SweepFramework.from_summary(config.summary_path).config == config


@pytest.mark.slow
def test_exhaustive_four_bit_sweep(tmp_path):
    config, (frame, summary) = run_sweep(tmp_path, family='exhaustive-n', n=4, checks=ALL_BATCH)
    assert summary['functions'] == 65536
    assert summary['all_passed']
    assert summary['iso_equality_count'] == 80
    assert summary['subcube_count'] == 81
    assert summary['checks']['compression']['applicable'] == int((frame['count'] <= 8).sum())
    assert summary['min_medium_ratio']['value'] is not None
    assert summary['c1_estimate']['witness'].startswith('n=4:')


def test_random_sweep_is_reproducible_and_parallel_safe(tmp_path):
    kwargs = dict(family='random', n=6, count=300, seed=17, chunk_size=100, checks=ALL_BATCH)
    _, (serial, summary) = run_sweep(tmp_path / "serial", **kwargs)
    _, (parallel, _) = run_sweep(tmp_path / "parallel", parallelism=2, **kwargs)
    assert summary['all_passed']
    pd.testing.assert_frame_equal(serial, parallel)


@pytest.mark.slow
def test_random_twelve_bit_sweep(tmp_path):
    _, (_, summary) = run_sweep(tmp_path, family='random', n=12, count=2000, seed=1,
                                checks=['iso', 'kkl', 'split-gain'])
    assert summary['all_passed']


def test_generator_grid_with_function_checks(tmp_path):
    grid = ['sharpness:w=2,l=0', 'sharpness:w=2,l=1', 'subcube:k=3,n=8', 'n=3:e8']
    _, (frame, summary) = run_sweep(tmp_path, family='generator-grid', grid=grid,
                                    checks=['iso', 'kkl', 'truncation', 'approx-cert'], eps=0.2)
    assert summary['all_passed']
    assert frame['spec'].tolist() == grid
    assert frame['n'].tolist() == [8, 9, 8, 3]
    assert frame.loc[2, 'approx_size'] == 1
    assert frame.loc[2, 'approx_error'] == 0.0


def test_failures_name_a_reproducer(tmp_path, monkeypatch):
    monkeypatch.setattr(checks, 'TOLERANCE', -10.0)
    _, (frame, summary) = run_sweep(tmp_path, family='exhaustive-n', n=2, checks=['kkl'])
    assert not summary['all_passed']
    assert summary['failure_count'] == 14
    assert summary['failures'][0] == {'index': 1, 'spec': 'n=2:1', 'failed_checks': ['kkl']}


def test_config_validation(tmp_path):
    output = str(tmp_path / "x.csv")
    with pytest.raises(CapExceededError):
        SweepConfig(family='exhaustive-n', n=5, output=output)
    with pytest.raises(SpecError):
        SweepConfig(family='exhaustive-n', n=2, checks=['sensitivity'], output=output)
    with pytest.raises(SpecError):
        SweepConfig(family='random', output=output)
    with pytest.raises(SpecError):
        SweepConfig(family='generator-grid', output=output)
    with pytest.raises(SpecError):
        SweepConfig(family='everything', n=2, output=output)
    with pytest.raises(SpecError):
        SweepConfig(family='random', n=4, eps=0, output=output)


def test_numbered_check_names_are_accepted(tmp_path):
    config = SweepConfig(family='exhaustive-n', n=2, output=str(tmp_path / "x.csv"),
                         checks=['iso', 'lemma6', 'lemma12', 'lemma14', 'split-gain'])
    assert config.checks == ('iso', 'compression', 'split-gain', 'truncation')


def test_summary_path():
    config = SweepConfig(family='exhaustive-n', n=1, output='out/results.csv')
    assert config.summary_path == 'out/results_summary.json'
    assert config.chunk_count == 1


def test_truncation_check():
    rng = np.random.default_rng(5)
    for _ in range(20):
        result = check_truncation(6, rng)
        assert result['truncation_pass']
        assert result['truncation_disagreement'] <= result['truncation_bound']


def test_constant_estimates():
    assert c1_terms([0.25], [0.5], [1.0], 0.5)[0] == pytest.approx(-0.5)
    assert np.isnan(c1_terms([0.75], [0.5], [1.0], 0.5)[0])
    assert small_side_failures([0.5], [0.9], [0.1], [0.0], [0.0], [0.1], 0.1)[0] == pytest.approx(0.2)
    assert np.isnan(small_side_failures([0.5], [0.99], [0.01], [0.0], [0.0], [1.0], 0.1)[0])
    expected = -0.1 * math.log2(0.1 * 0.2 / 1.8)
    assert budget_increment_terms([0.1], [0.5], [1.0], 0.1)[0] == pytest.approx(expected)


def test_chunk_rows_are_capped_by_table_length(tmp_path):
    output = str(tmp_path / "x.csv")
    wide = SweepConfig(family='random', n=20, count=10000, chunk_size=4096, output=output)
    assert wide.rows_per_chunk * (1 << 20) <= MAX_CHUNK_CELLS
    assert wide.chunk_count == math.ceil(10000 / wide.rows_per_chunk)
    assert SweepConfig(family='random', n=24, count=3, output=output).rows_per_chunk == 1
    narrow = SweepConfig(family='random', n=6, count=300, chunk_size=100, output=output)
    assert narrow.rows_per_chunk == 100
    assert narrow.chunk_count == 3


def test_capped_chunks_cover_every_index(tmp_path, monkeypatch):
    monkeypatch.setattr(sweep_framework, 'MAX_CHUNK_CELLS', 1 << 8)
    config, (frame, summary) = run_sweep(tmp_path, family='random', n=5, count=50, chunk_size=40,
                                         checks=['iso'])
    assert config.rows_per_chunk == 8
    assert config.chunk_count == 7
    assert frame['index'].tolist() == list(range(50))
    assert summary['all_passed']


def test_c1_estimate_is_a_curve_over_delta(tmp_path):
    config, (_, summary) = run_sweep(tmp_path, family='exhaustive-n', n=3, delta=0.3)
    estimate = summary['c1_estimate']
    deltas = [float(point['delta']) for point in estimate['curve']]
    assert deltas == sorted(set(C1_DELTAS) | {0.3})
    at_config = next(point for point in estimate['curve'] if float(point['delta']) == 0.3)
    assert estimate['value'] == at_config['value']
    assert estimate['witness'] == at_config['witness']
    for point in estimate['curve']:
        assert (point['value'] is None) == (point['witness'] is None)


@pytest.mark.slow
def test_kkl_on_hundred_thousand_twelve_bit_functions():
    rng = np.random.default_rng(2024)
    for _ in range(25):
        columns = run_batch_checks(kernels.random_tables(12, 4000, rng), 12, ['kkl'])
        assert np.asarray(columns['kkl_pass']).all()


@pytest.mark.slow
def test_compression_on_ten_thousand_random_functions():
    rng = np.random.default_rng(6)
    for n in range(2, 11):
        rows = 1112
        density = rng.uniform(0.0, 0.5, size=(rows, 1))
        tables = rng.random((rows, 1 << n)) < density
        columns = run_batch_checks(tables, n, ['compression'])
        applicable = np.asarray(columns['compression_applicable'])
        assert applicable.sum() > rows // 2
        assert np.asarray(columns['compression_pass']).all(), n


@pytest.mark.slow
def test_truncation_on_thousand_random_dnfs():
    rng = np.random.default_rng(14)
    for _ in range(1000):
        result = check_truncation(int(rng.integers(2, 11)), rng)
        assert result['truncation_pass']
