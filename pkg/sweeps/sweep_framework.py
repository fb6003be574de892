import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

import core.custom_logger as custom_logger
from core import kernels
from core.approx import DnfApproximator
from core.boolean_function import BooleanFunction, check_dimension
from core.config import get_config
from core.errors import CapExceededError, SpecError
from core.file_parsing import CSVFileParser, JsonReportParser, rows_to_frame
from core.generators import FunctionSpec
from sweeps.checks import (BATCH_CHECKS, CHECK_ALIASES, CHECKS, PASS_COLUMNS, budget_increment_terms,
                           c1_terms, canonical_check, check_approx_cert, check_truncation,
                           run_batch_checks, small_side_failures, sweep_columns)

FAMILIES = ('exhaustive-n', 'random', 'generator-grid')
DEFAULT_CHECKS = ('iso', 'kkl', 'infind', 'split-gain')
MAX_FAILURE_RECORDS = 100
# Deltas at which the KKL-style constant is reported, besides the configured one.
C1_DELTAS = (0.1, 0.25, 0.5, 0.75, 0.9)
# Truth-table cells held by one chunk of generated tables.
MAX_CHUNK_CELLS = 1 << 24


@dataclass
class SweepConfig:
    """
    One bound-verification sweep.

    family 'exhaustive-n' covers every function on n coordinates, 'random' draws count
    uniform tables on n coordinates from seed, and 'generator-grid' runs each FunctionSpec
    text in grid.
    """
    family: str
    n: Optional[int] = None
    count: int = 1000
    seed: int = 0
    checks: Tuple[str, ...] = DEFAULT_CHECKS
    output: str = 'sweep_results.csv'
    parallelism: Optional[int] = None
    chunk_size: Optional[int] = None
    grid: Tuple[str, ...] = ()
    eps: float = 0.1
    delta: float = 0.5

    def __post_init__(self):
        settings = get_config()
        if self.parallelism is None:
            self.parallelism = int(settings['sweep']['parallelism'])
        if self.chunk_size is None:
            self.chunk_size = int(settings['sweep']['chunk_size'])
        self.checks = tuple(dict.fromkeys(canonical_check(c) for c in self.checks))
        self.grid = tuple(self.grid)
        self.validate()

    def validate(self) -> None:
        limits = get_config()['limits']
        if self.family not in FAMILIES:
            raise SpecError(f"Unknown sweep family '{self.family}'; expected one of {FAMILIES}")
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown or not self.checks:
            raise SpecError(f"Unknown or empty checks {unknown}; "
                            f"expected a subset of {CHECKS + tuple(CHECK_ALIASES)}")
        if self.family == 'exhaustive-n':
            cap = min(int(limits['exhaustive_max_n']), kernels.MAX_ENUMERABLE_N)
            if self.n is None or not 1 <= self.n <= cap:
                raise CapExceededError(f"exhaustive-n sweeps support 1 <= n <= {cap}, got n={self.n}")
        elif self.family == 'random':
            if self.n is None:
                raise SpecError("random sweeps need n")
            check_dimension(self.n)
            if self.count < 1:
                raise SpecError(f"count must be positive, got {self.count}")
        elif not self.grid:
            raise SpecError("generator-grid sweeps need at least one spec in grid")
        if self.parallelism < 1 or self.chunk_size < 1:
            raise SpecError("parallelism and chunk_size must be positive")
        if self.eps <= 0 or not 0 < self.delta < 1:
            raise SpecError(f"eps must be positive and delta in (0, 1), got {self.eps}, {self.delta}")

    @property
    def summary_path(self) -> str:
        stem, _ = os.path.splitext(self.output)
        return f"{stem}_summary.json"

    @property
    def total(self) -> int:
        if self.family == 'exhaustive-n':
            return 1 << kernels.table_length(self.n)
        if self.family == 'random':
            return self.count
        return len(self.grid)

    @property
    def rows_per_chunk(self) -> int:
        """chunk_size, lowered so one chunk never holds more than MAX_CHUNK_CELLS table cells."""
        if self.family == 'generator-grid':
            return 1
        return max(1, min(self.chunk_size, MAX_CHUNK_CELLS >> self.n))

    @property
    def chunk_count(self) -> int:
        if self.family == 'generator-grid':
            return len(self.grid)
        return math.ceil(self.total / self.rows_per_chunk)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['checks'] = list(self.checks)
        data['grid'] = list(self.grid)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SweepConfig':
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})


def _hex_specs(tables: np.ndarray, n: int) -> List[str]:
    digits = max(1, kernels.table_length(n) // 4)
    return [f"n={n}:{kernels.table_to_int(t):0{digits}x}" for t in tables]


def _chunk_tables(config: SweepConfig, chunk: int) -> Tuple[np.ndarray, int, np.ndarray, List[str]]:
    """Tables, n, global indexes and reproducer specs of one work item."""
    if config.family == 'generator-grid':
        spec = FunctionSpec.parse(config.grid[chunk])
        f = spec.materialize()
        return f.table[None, :], f.n, np.array([chunk]), [spec.to_text()]
    start = chunk * config.rows_per_chunk
    stop = min(start + config.rows_per_chunk, config.total)
    if config.family == 'exhaustive-n':
        tables = kernels.all_tables(config.n)[start:stop]
        digits = max(1, kernels.table_length(config.n) // 4)
        specs = [f"n={config.n}:{r:0{digits}x}" for r in range(start, stop)]
        return tables, config.n, np.arange(start, stop), specs
    child = np.random.SeedSequence(config.seed).spawn(config.chunk_count)[chunk]
    tables = kernels.random_tables(config.n, stop - start, np.random.default_rng(child))
    return tables, config.n, np.arange(start, stop), _hex_specs(tables, config.n)


def run_chunk(config_data: Dict[str, Any], chunk: int) -> pd.DataFrame:
    """Evaluate one work item; a module-level function so process pools can pickle it."""
    config = SweepConfig.from_dict(config_data)
    tables, n, indexes, specs = _chunk_tables(config, chunk)
    columns: Dict[str, Any] = run_batch_checks(tables, n, [c for c in config.checks if c in BATCH_CHECKS])
    columns['index'] = indexes
    columns['spec'] = specs

    per_function: Dict[str, List[Any]] = {}
    if 'truncation' in config.checks or 'approx-cert' in config.checks:
        approximator = DnfApproximator()
        for row, index in enumerate(indexes):
            values: Dict[str, Any] = {}
            if 'truncation' in config.checks:
                rng = np.random.default_rng([config.seed, int(index)])
                values.update(check_truncation(n, rng))
            if 'approx-cert' in config.checks:
                values.update(check_approx_cert(BooleanFunction(n, tables[row]), config.eps, approximator))
            for key, value in values.items():
                per_function.setdefault(key, []).append(value)
    columns.update(per_function)

    passed = np.ones(len(indexes), dtype=bool)
    for check in config.checks:
        passed &= np.asarray(columns[PASS_COLUMNS[check]], dtype=bool)
    columns['passed'] = passed
    return rows_to_frame(columns, sweep_columns())


class SweepFramework:
    """
    Runs a sweep in chunks, writes the per-function CSV and the summary JSON.
    """

    def __init__(self, config: SweepConfig):
        self.config = config
        self.log = custom_logger.customLogger()

    @classmethod
    def from_summary(cls, summary_file: str) -> 'SweepFramework':
        """Rebuild a sweep from the configuration stored in its summary."""
        summary = JsonReportParser.read_json(summary_file)
        return cls(SweepConfig.from_dict(summary['config']))

    def collect(self) -> pd.DataFrame:
        config = self.config
        chunks = list(range(config.chunk_count))
        self.log.info(
            f"Sweep {config.family} n={config.n} over {config.total} functions in {len(chunks)} chunks "
            f"(checks={','.join(config.checks)}, seed={config.seed}, parallelism={config.parallelism})"
        )
        data = config.to_dict()
        if config.parallelism == 1 or len(chunks) == 1:
            frames = []
            for chunk in chunks:
                frames.append(run_chunk(data, chunk))
                self.log.debug(f"Chunk {chunk + 1}/{len(chunks)} done")
        else:
            with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
                frames = list(pool.map(run_chunk, [data] * len(chunks), chunks))
        return pd.concat(frames, ignore_index=True)

    def summarize(self, frame: pd.DataFrame) -> Dict[str, Any]:
        config = self.config
        real = JsonReportParser.real_to_json
        checks = {}
        for check in config.checks:
            column = frame[PASS_COLUMNS[check]].astype(bool)
            checks[check] = {'passed': int(column.sum()), 'failed': int((~column).sum())}
        for check, column in (('compression', 'compression_applicable'), ('split-gain', 'split_gain_applicable')):
            if check in checks:
                checks[check]['applicable'] = int(frame[column].astype(bool).sum())

        failed = frame[~frame['passed'].astype(bool)]
        failures = []
        for _, row in failed.head(MAX_FAILURE_RECORDS).iterrows():
            failures.append({
                'index': int(row['index']),
                'spec': row['spec'],
                'failed_checks': [c for c in config.checks if not bool(row[PASS_COLUMNS[c]])],
            })

        summary: Dict[str, Any] = {
            'generated_at': datetime.now().isoformat(timespec='seconds'),
            'config': config.to_dict(),
            'functions': int(len(frame)),
            'checks': checks,
            'all_passed': bool(failed.empty),
            'failure_count': int(len(failed)),
            'failures': failures,
            'csv': config.output,
        }
        if 'iso' in config.checks:
            summary['iso_equality_count'] = int(frame['iso_equality'].astype(bool).sum())
            summary['subcube_count'] = int(frame['is_subcube'].astype(bool).sum())
        if 'kkl' in config.checks:
            summary['min_kkl_margin'] = self._extremum(frame, frame['kkl_margin'], 'min')

        summary['min_medium_ratio'] = self._extremum(frame, frame['medium_ratio'], 'min')
        curve = []
        for delta in sorted(set(C1_DELTAS) | {config.delta}):
            c1 = c1_terms(frame['mu'], frame['max_influence'], frame['M'], delta)
            curve.append({'delta': real(delta), **self._extremum(frame, c1, 'max')})
        at_config = next(point for point in curve if point['delta'] == real(config.delta))
        summary['c1_estimate'] = {**at_config, 'curve': curve}
        rho = small_side_failures(frame['mu'], frame['mu1'], frame['mu0'],
                                  frame['M1'], frame['M0'], frame['M'], config.eps)
        rho_star = self._extremum(frame, rho, 'min')
        c6 = None if rho_star['value'] is None else -config.eps * math.log2(float(rho_star['value']))
        summary['small_side_constant'] = {
            'eps': real(config.eps), 'rho_star': rho_star['value'], 'value': real(c6),
            'witness': rho_star['witness'],
        }
        c5 = budget_increment_terms(frame['gain'], frame['mu'], frame['M'], config.eps)
        summary['budget_increment_constant'] = {'eps': real(config.eps), **self._extremum(frame, c5, 'max')}
        return summary

    @staticmethod
    def _extremum(frame: pd.DataFrame, values, mode: str) -> Dict[str, Any]:
        series = pd.Series(np.asarray(values, dtype=np.float64), index=frame.index)
        if series.isna().all():
            return {'value': None, 'witness': None}
        position = series.idxmin() if mode == 'min' else series.idxmax()
        return {
            'value': JsonReportParser.real_to_json(series[position]),
            'witness': frame.at[position, 'spec'],
        }

    def run(self) -> Tuple[pd.DataFrame, Dict[str, Any]]:
        """
        Run the sweep and write both outputs.

        Returns:
            (per-function frame, summary document)

        Raises:
            OSError: If the CSV or summary cannot be written
        """
        frame = self.collect()
        if not CSVFileParser.write_to_csv(frame, self.config.output):
            raise OSError(f"Could not write sweep results to {self.config.output}")
        summary = self.summarize(frame)
        JsonReportParser.write_json(summary, self.config.summary_path)
        self.log.info(
            f"Sweep finished: {summary['functions']} functions, {summary['failure_count']} failures; "
            f"results in {self.config.output}"
        )
        return frame, summary
