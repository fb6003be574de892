"""
Bound checks over batches of truth tables.

Batch checks work on arrays of shape (F, 2**n) and return columns keyed by CSV column
name. Exact comparisons are done on integer edge and point counts; bounds involving
logarithms use a 1e-9 tolerance.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional

import numpy as np

import core.custom_logger as custom_logger
from core import kernels
from core.approx import DnfApproximator
from core.boolean_function import BooleanFunction
from core.dnf import dnf_error, random_dnf, truncate, truncation_bound
from core.influence import (iso_check_counts, kkl_bound_values, kkl_tilde,
                            scaled_excess, small_side_bound)
from core.shifting import compress_tables

log = custom_logger.customLogger()

TOLERANCE = 1e-9

BATCH_CHECKS = ('iso', 'kkl', 'infind', 'compression', 'split-gain')
FUNCTION_CHECKS = ('truncation', 'approx-cert')
CHECKS = BATCH_CHECKS + FUNCTION_CHECKS
# Numbered names accepted on the command line.
CHECK_ALIASES = {'lemma6': 'compression', 'lemma12': 'split-gain', 'lemma14': 'truncation'}


def canonical_check(name: str) -> str:
    return CHECK_ALIASES.get(name, name)


# Pass column of each check; 'passed' in the CSV is the AND over the requested ones.
PASS_COLUMNS = {
    'iso': 'iso_pass',
    'kkl': 'kkl_pass',
    'infind': 'infind_pass',
    'compression': 'compression_pass',
    'split-gain': 'split_gain_pass',
    'truncation': 'truncation_pass',
    'approx-cert': 'approx_pass',
}

BASE_COLUMNS = [
    'index', 'spec', 'n', 'count', 'mu', 'total_influence', 'M', 'degenerate',
    'max_influence', 'max_coord',
]
SPLIT_COLUMNS = ['split_coord', 'mu1', 'mu0', 'M1', 'M0', 'gain', 'gain_bound', 'medium_ratio']
CHECK_COLUMNS = {
    'iso': ['iso_holds', 'iso_equality', 'iso_complement_holds', 'is_subcube', 'iso_pass'],
    'kkl': ['kkl_tilde', 'kkl_bound', 'kkl_margin', 'kkl_pass'],
    'infind': ['infind_pass'],
    'compression': ['compression_applicable', 'compression_pass'],
    'split-gain': ['split_gain_applicable', 'split_gain_pass'],
    'truncation': ['truncation_size', 'truncation_width', 'truncation_disagreement', 'truncation_bound', 'truncation_pass'],
    'approx-cert': ['approx_size', 'approx_width', 'approx_error', 'approx_budget', 'approx_pass'],
}


def sweep_columns():
    columns = BASE_COLUMNS + SPLIT_COLUMNS
    for check in CHECKS:
        columns = columns + CHECK_COLUMNS[check]
    return columns + ['passed']


@dataclass
class BatchStats:
    """Counts shared by every batch check."""
    n: int
    tables: np.ndarray
    counts: np.ndarray
    edges: np.ndarray

    @classmethod
    def of(cls, tables: np.ndarray, n: int) -> 'BatchStats':
        return cls(n, tables, kernels.popcounts(tables).astype(np.int64), kernels.edge_counts(tables, n))

    @property
    def totals(self) -> np.ndarray:
        return self.edges.sum(axis=-1)

    @property
    def mu(self) -> np.ndarray:
        return self.counts / float(kernels.table_length(self.n))

    @property
    def total_influence(self) -> np.ndarray:
        return self.totals / float(1 << (self.n - 1))

    @property
    def nonconstant(self) -> np.ndarray:
        return (self.counts > 0) & (self.counts < kernels.table_length(self.n))

    @property
    def split_coord(self) -> np.ndarray:
        """Coordinate of maximal influence, smallest index on ties."""
        return np.argmax(self.edges, axis=-1) + 1


def _excess_columns(mu: np.ndarray, total: np.ndarray) -> np.ndarray:
    """M per row, 0 for constants."""
    inside = (mu > 0) & (mu < 1)
    safe = np.where(inside, mu, 0.5)
    M = total / (2.0 * safe) + np.log2(safe)
    return np.where(inside, M, 0.0)


def base_columns(stats: BatchStats) -> Dict[str, np.ndarray]:
    mu = stats.mu
    total = stats.total_influence
    return {
        'n': np.full(stats.counts.shape, stats.n),
        'count': stats.counts,
        'mu': mu,
        'total_influence': total,
        'M': _excess_columns(mu, total),
        'degenerate': ~stats.nonconstant,
        'max_influence': stats.edges.max(axis=-1) / float(1 << (stats.n - 1)),
        'max_coord': stats.split_coord,
    }


def subcube_mask(stats: BatchStats) -> np.ndarray:
    """True where the table is the indicator of a non-empty sub-cube (constant 1 included)."""
    free = np.zeros(stats.counts.shape, dtype=np.int64)
    for k in range(1, stats.n + 1):
        view = kernels.split_view(stats.tables, stats.n, k)
        ones = np.count_nonzero(view[..., 1, :], axis=(-2, -1))
        zeros = np.count_nonzero(view[..., 0, :], axis=(-2, -1))
        free += (ones > 0) & (zeros > 0)
    return (stats.counts > 0) & (stats.counts == np.left_shift(1, free))


def check_iso(stats: BatchStats) -> Dict[str, np.ndarray]:
    """
    Edge isoperimetry for the set and its complement, with equality exactly on sub-cubes.

    Equality is only reported for non-constant functions; both constants satisfy the
    inequality with 0 = 0 and are excluded from the equality count.
    """
    length = kernels.table_length(stats.n)
    holds, equality = iso_check_counts(stats.counts, stats.totals, stats.n)
    comp_holds, _ = iso_check_counts(length - stats.counts, stats.totals, stats.n)
    equality = equality & stats.nonconstant
    subcube = subcube_mask(stats)
    return {
        'iso_holds': holds,
        'iso_equality': equality,
        'iso_complement_holds': comp_holds,
        'is_subcube': subcube,
        'iso_pass': holds & comp_holds & (equality == (subcube & stats.nonconstant)),
    }


def check_kkl(stats: BatchStats) -> Dict[str, np.ndarray]:
    nonconstant = stats.nonconstant
    tilde = kkl_tilde(stats.mu, stats.total_influence)
    tilde = np.where(nonconstant, tilde, np.nan)
    safe = np.where(nonconstant, tilde, 1.0)
    bound = np.where(nonconstant, kkl_bound_values(safe), np.nan)
    margin = stats.edges.max(axis=-1) / float(1 << (stats.n - 1)) - bound
    return {
        'kkl_tilde': tilde,
        'kkl_bound': bound,
        'kkl_margin': margin,
        'kkl_pass': np.where(nonconstant, margin >= -TOLERANCE, True),
    }


def check_infind(stats: BatchStats) -> Dict[str, np.ndarray]:
    """I(f) = (I(f_1) + I(f_0))/2 + I_i(f) for every i, compared as edge counts."""
    passed = np.ones(stats.counts.shape, dtype=bool)
    if stats.n < 2:
        return {'infind_pass': passed}
    totals = stats.totals
    for i in range(1, stats.n + 1):
        t1 = kernels.edge_counts(kernels.restrict_tables(stats.tables, stats.n, i, 1), stats.n - 1).sum(axis=-1)
        t0 = kernels.edge_counts(kernels.restrict_tables(stats.tables, stats.n, i, 0), stats.n - 1).sum(axis=-1)
        passed &= totals == t1 + t0 + stats.edges[..., i - 1]
    return {'infind_pass': passed}


def check_compression(stats: BatchStats) -> Dict[str, np.ndarray]:
    """
    Compression pipeline on the functions with mu <= 1/2: measure kept at every stage,
    I_i does not grow for i >= 2, I does not grow, and x_1 = 0 half is empty at the end.
    """
    n = stats.n
    applicable = 2 * stats.counts <= kernels.table_length(n)
    passed = np.ones(stats.counts.shape, dtype=bool)
    rows = np.flatnonzero(applicable)
    if rows.size:
        tables = stats.tables[rows]
        stages = compress_tables(tables, n)
        ok = np.ones(rows.size, dtype=bool)
        for stage in stages:
            ok &= kernels.popcounts(stage) == stats.counts[rows]
        final = stages[-1]
        final_edges = kernels.edge_counts(final, n)
        if n >= 2:
            ok &= np.all(final_edges[:, 1:] <= stats.edges[rows, 1:], axis=-1)
        ok &= final_edges.sum(axis=-1) <= stats.totals[rows]
        lower = final.reshape(rows.size, 1 << (n - 1), 2)[:, :, 0]
        ok &= ~lower.any(axis=-1)
        passed[rows] = ok
    return {'compression_applicable': applicable, 'compression_pass': passed}


def split_columns(stats: BatchStats) -> Dict[str, np.ndarray]:
    """
    Restriction data at the max-influence split: measures, excesses, the split gain
    2M mu - M_1 mu_1 - M_0 mu_0, its small-side bound and the medium-influence ratio.
    """
    n = stats.n
    shape = stats.counts.shape
    if n < 2:
        nan = np.full(shape, np.nan)
        return {'split_coord': np.zeros(shape, dtype=np.int64), 'mu1': nan, 'mu0': nan,
                'M1': nan, 'M0': nan, 'gain': nan, 'gain_bound': nan, 'medium_ratio': nan,
                'counts1': np.zeros(shape, dtype=np.int64), 'counts0': np.zeros(shape, dtype=np.int64)}

    coord = stats.split_coord
    counts1 = np.zeros(shape, dtype=np.int64)
    counts0 = np.zeros(shape, dtype=np.int64)
    totals1 = np.zeros(shape, dtype=np.int64)
    totals0 = np.zeros(shape, dtype=np.int64)
    for i in range(1, n + 1):
        rows = np.flatnonzero(coord == i)
        if not rows.size:
            continue
        sub = stats.tables[rows]
        for b, counts, totals in ((1, counts1, totals1), (0, counts0, totals0)):
            restricted = kernels.restrict_tables(sub, n, i, b)
            counts[rows] = kernels.popcounts(restricted)
            totals[rows] = kernels.edge_counts(restricted, n - 1).sum(axis=-1)

    half = float(1 << (n - 1))
    mu, total = stats.mu, stats.total_influence
    mu1, mu0 = counts1 / half, counts0 / half
    total1 = totals1 / float(1 << max(n - 2, 0))
    total0 = totals0 / float(1 << max(n - 2, 0))
    gain = 2.0 * scaled_excess(mu, total) - scaled_excess(mu1, total1) - scaled_excess(mu0, total0)
    influence_i = np.take_along_axis(stats.edges, (coord - 1)[..., None], axis=-1)[..., 0] / half
    floor = np.minimum(influence_i, np.minimum(mu1, mu0))
    ratio = np.where(floor > 0, gain / np.where(floor > 0, floor, 1.0), np.nan)
    return {
        'split_coord': coord,
        'mu1': mu1,
        'mu0': mu0,
        'M1': _excess_columns(mu1, total1),
        'M0': _excess_columns(mu0, total0),
        'gain': gain,
        'gain_bound': small_side_bound(mu, mu1, mu0),
        'medium_ratio': ratio,
        'counts1': counts1,
        'counts0': counts0,
    }


def check_split_gain(stats: BatchStats, split: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    """Split gain against its small-side bound, where both restrictions are non-constant."""
    half = 1 << (stats.n - 1)
    if stats.n < 2:
        applicable = np.zeros(stats.counts.shape, dtype=bool)
        return {'split_gain_applicable': applicable, 'split_gain_pass': ~applicable}
    c1, c0 = split['counts1'], split['counts0']
    applicable = (c1 > 0) & (c1 < half) & (c0 > 0) & (c0 < half)
    holds = split['gain'] >= split['gain_bound'] - TOLERANCE
    return {'split_gain_applicable': applicable, 'split_gain_pass': np.where(applicable, holds, True)}


def run_batch_checks(tables: np.ndarray, n: int, checks) -> Dict[str, np.ndarray]:
    """All requested batch checks on one chunk; split columns are always filled."""
    stats = BatchStats.of(tables, n)
    columns = base_columns(stats)
    split = split_columns(stats)
    columns.update({k: v for k, v in split.items() if k in SPLIT_COLUMNS})
    if 'iso' in checks:
        columns.update(check_iso(stats))
    if 'kkl' in checks:
        columns.update(check_kkl(stats))
    if 'infind' in checks:
        columns.update(check_infind(stats))
    if 'compression' in checks:
        columns.update(check_compression(stats))
    if 'split-gain' in checks:
        columns.update(check_split_gain(stats, split))
    return columns


# Per-function checks

def check_truncation(n: int, rng: np.random.Generator, max_size: int = 8) -> Dict[str, object]:
    """Truncation of a random DNF to a random width stays within size * 2^-w of the original."""
    dnf = random_dnf(n, int(rng.integers(1, max_size + 1)), n, rng)
    w = int(rng.integers(0, n + 1))
    truncated = truncate(dnf, w)
    disagreement = dnf_error(dnf.to_function(), truncated)
    bound = truncation_bound(dnf, w)
    return {
        'truncation_size': dnf.size,
        'truncation_width': w,
        'truncation_disagreement': float(disagreement),
        'truncation_bound': float(bound),
        'truncation_pass': disagreement <= bound and truncated.width <= w,
    }


def check_approx_cert(f: BooleanFunction, eps: float,
                      approximator: Optional[DnfApproximator] = None) -> Dict[str, object]:
    """Run the approximator and confirm its exact error is within eps * mu."""
    approximator = approximator or DnfApproximator()
    try:
        result = approximator.approximate(f, eps)
        return {
            'approx_size': result.size,
            'approx_width': result.width,
            'approx_error': float(result.error),
            'approx_budget': float(result.budget),
            'approx_pass': result.error <= Fraction(str(eps)) * f.measure(),
        }
    except Exception as e:
        log.error(f"Approximation failed for {f.to_hex()}: {e}")
        return {'approx_size': None, 'approx_width': None, 'approx_error': None,
                'approx_budget': None, 'approx_pass': False}


# Constant estimates over a finished sweep

def c1_terms(mu, max_influence, M, delta: float) -> np.ndarray:
    """delta * log2(mu / max_k I_k) / M on rows with mu < 1 - delta and M > 0, else nan."""
    mu = np.asarray(mu, dtype=np.float64)
    max_influence = np.asarray(max_influence, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    ok = (mu > 0) & (mu < 1.0 - delta) & (M > TOLERANCE) & (max_influence > 0)
    safe_ratio = np.where(ok, mu / np.where(max_influence > 0, max_influence, 1.0), 1.0)
    return np.where(ok, delta * np.log2(safe_ratio) / np.where(ok, M, 1.0), np.nan)


def small_side_failures(mu, mu1, mu0, M1, M0, M, eps: float) -> np.ndarray:
    """
    mu_small / mu where dropping the small side breaks the eps*M*mu allowance,
    i.e. eps*M_L*mu_L/2 + mu_small/2 > eps*M*mu; nan where the accounting closes.
    """
    mu, mu1, mu0 = (np.asarray(a, dtype=np.float64) for a in (mu, mu1, mu0))
    M1, M0, M = (np.asarray(a, dtype=np.float64) for a in (M1, M0, M))
    small_is_zero = mu0 <= mu1
    mu_small = np.where(small_is_zero, mu0, mu1)
    mu_large = np.where(small_is_zero, mu1, mu0)
    M_large = np.where(small_is_zero, M1, M0)
    fails = 0.5 * eps * M_large * mu_large + 0.5 * mu_small > eps * M * mu + TOLERANCE
    ok = fails & (mu > 0) & (mu_small > 0)
    return np.where(ok, mu_small / np.where(mu > 0, mu, 1.0), np.nan)


def budget_increment_terms(gain, mu, M, eps: float) -> np.ndarray:
    """-eps * log2(eps' - eps) with eps' - eps = eps*g/(2M - g), g = gain/mu, where 0 < g < 2M."""
    gain, mu, M = (np.asarray(a, dtype=np.float64) for a in (gain, mu, M))
    g = np.where(mu > 0, gain / np.where(mu > 0, mu, 1.0), np.nan)
    ok = (g > TOLERANCE) & (2.0 * M - g > TOLERANCE)
    increment = np.where(ok, eps * g / np.where(ok, 2.0 * M - g, 1.0), 1.0)
    return np.where(ok, -eps * np.log2(increment), np.nan)

