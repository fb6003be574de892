"""
Influences, the excess parameter M, and the isoperimetric / KKL lower bounds.

All logarithms are base 2; the sub-cube equality case of the edge isoperimetric
inequality is exact only in that base.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

import core.custom_logger as custom_logger
from core import kernels
from core.boolean_function import BooleanFunction
from core.errors import CoordinateError, DimensionError

log = custom_logger.customLogger()
from core.file_parsing import JsonReportParser

ISO_TOLERANCE = 1e-12


def entropy_term(mu):
    """mu * log2(1/mu), with the value 0 at mu = 0. Accepts scalars or arrays."""
    mu_arr = np.asarray(mu, dtype=np.float64)
    safe = np.where(mu_arr > 0, mu_arr, 1.0)
    value = np.where(mu_arr > 0, -mu_arr * np.log2(safe), 0.0)
    return float(value) if value.ndim == 0 else value


def scaled_excess(mu, total):
    """
    M * mu, computed as I/2 - mu*log2(1/mu).

    This is the product that enters the split-gain identity; it equals 0 for both
    constants, which matches the degenerate convention M = 0.
    """
    total_arr = np.asarray(total, dtype=np.float64)
    value = total_arr / 2.0 - entropy_term(mu)
    return float(value) if np.ndim(value) == 0 else value


def excess(mu: Fraction, total: Fraction) -> Tuple[float, bool]:
    """Return (M, degenerate) where I = 2*mu*(log2(1/mu) + M); constants give (0.0, True)."""
    if mu == 0 or mu == 1:
        return 0.0, True
    return float(total / (2 * mu)) - log2_fraction(1 / mu), False


def log2_fraction(q: Fraction) -> float:
    """log2 of a positive rational without overflowing the float range."""
    return math.log2(q.numerator) - math.log2(q.denominator)


def isoperimetric_bound(mu) -> float:
    """2 mu log2(1/mu)."""
    return 2.0 * entropy_term(float(mu))


def kkl_tilde(mu, total):
    """Normalized total influence I / (4 mu (1 - mu)); arrays allowed, constants give nan."""
    mu_arr = np.asarray(mu, dtype=np.float64)
    denom = 4.0 * mu_arr * (1.0 - mu_arr)
    safe = np.where(denom > 0, denom, 1.0)
    value = np.where(denom > 0, np.asarray(total, dtype=np.float64) / safe, np.nan)
    return float(value) if value.ndim == 0 else value


def kkl_bound_values(tilde):
    """(9 / tilde^2) * 9^(-tilde) for tilde > 0."""
    tilde_arr = np.asarray(tilde, dtype=np.float64)
    value = 9.0 / np.square(tilde_arr) * np.power(9.0, -tilde_arr)
    return float(value) if value.ndim == 0 else value


def small_side_bound(mu, mu1, mu0):
    """m * log2(mu / (2m)) for m = min(mu0, mu1); 0 when m = 0."""
    m = np.minimum(np.asarray(mu0, dtype=np.float64), np.asarray(mu1, dtype=np.float64))
    safe = np.where(m > 0, m, 1.0)
    value = np.where(m > 0, m * np.log2(np.asarray(mu, dtype=np.float64) / (2.0 * safe)), 0.0)
    return float(value) if value.ndim == 0 else value


def iso_check_counts(counts, edge_totals, n: int, tol: float = ISO_TOLERANCE):
    """
    Exact edge-isoperimetric comparison from integer counts.

    With p ones and E boundary edges, I >= 2 mu log2(1/mu) is E >= p (n - log2 p).
    Equality can only occur when p is a power of two, where the comparison is integral.

    Returns:
        (holds, equality) boolean arrays.
    """
    p = np.asarray(counts, dtype=np.int64)
    edges = np.asarray(edge_totals, dtype=np.int64)
    is_pow2 = (p > 0) & ((p & (p - 1)) == 0)
    safe_p = np.where(p > 0, p, 1)
    log_p = np.log2(safe_p.astype(np.float64))
    exact_rhs = np.where(is_pow2, p * (n - np.round(log_p).astype(np.int64)), 0)
    float_rhs = p * (n - log_p)
    scale = np.maximum(1.0, np.abs(float_rhs))
    holds = np.where(is_pow2, edges >= exact_rhs, edges - float_rhs >= -tol * scale)
    holds = np.where(p == 0, True, holds)
    equality = is_pow2 & (edges == exact_rhs)
    return holds, equality


@dataclass(frozen=True)
class InfluenceReport:
    """Influence profile of one function together with the bounds it is measured against."""
    n: int
    per_coord: Tuple[Fraction, ...]
    total: Fraction
    mu: Fraction
    M: float
    degenerate: bool
    iso_bound: float
    iso_bound_complement: float
    kkl_tilde: Optional[float]
    kkl_bound: Optional[float]
    max_coord: int

    @property
    def max_influence(self) -> Fraction:
        return self.per_coord[self.max_coord - 1]

    def to_dict(self) -> Dict[str, Any]:
        rational = JsonReportParser.rational_to_json
        real = JsonReportParser.real_to_json
        return {
            'n': self.n,
            'per_coord': [rational(v) for v in self.per_coord],
            'total': rational(self.total),
            'mu': rational(self.mu),
            'M': real(self.M),
            'degenerate': self.degenerate,
            'iso_bound': real(self.iso_bound),
            'iso_bound_complement': real(self.iso_bound_complement),
            'kkl_tilde': real(self.kkl_tilde),
            'kkl_bound': real(self.kkl_bound),
            'max_coord': self.max_coord,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'InfluenceReport':
        rational = JsonReportParser.rational_from_json
        real = JsonReportParser.real_from_json
        return cls(
            n=int(data['n']),
            per_coord=tuple(rational(v) for v in data['per_coord']),
            total=rational(data['total']),
            mu=rational(data['mu']),
            M=real(data['M']),
            degenerate=bool(data['degenerate']),
            iso_bound=real(data['iso_bound']),
            iso_bound_complement=real(data['iso_bound_complement']),
            kkl_tilde=real(data['kkl_tilde']),
            kkl_bound=real(data['kkl_bound']),
            max_coord=int(data['max_coord']),
        )


def _check_coordinate(f: BooleanFunction, k: int) -> None:
    if not 1 <= k <= f.n:
        log.error(f"Coordinate {k} out of range 1..{f.n}")
        raise CoordinateError(f"Coordinate {k} out of range 1..{f.n}")


def influence(f: BooleanFunction, k: int) -> Fraction:
    """Pr_x[f(x) != f(x xor e_k)]."""
    _check_coordinate(f, k)
    view = f.table.reshape(1 << (f.n - k), 2, 1 << (k - 1))
    flips = int(np.count_nonzero(view[:, 0, :] != view[:, 1, :]))
    return Fraction(flips, 1 << (f.n - 1))


def influences(f: BooleanFunction) -> List[Fraction]:
    edges = kernels.edge_counts(f.table, f.n)
    return [Fraction(int(e), 1 << (f.n - 1)) for e in edges]


def total_influence(f: BooleanFunction) -> Fraction:
    return Fraction(int(kernels.edge_counts(f.table, f.n).sum()), 1 << (f.n - 1))


def max_influence_coordinate(f: BooleanFunction) -> int:
    """Coordinate of maximal influence; ties go to the smallest index."""
    return int(np.argmax(kernels.edge_counts(f.table, f.n))) + 1


def report(f: BooleanFunction) -> InfluenceReport:
    per_coord = influences(f)
    total = sum(per_coord, Fraction(0))
    mu = f.measure()
    M, degenerate = excess(mu, total)
    tilde = None if degenerate else kkl_tilde(float(mu), float(total))
    return InfluenceReport(
        n=f.n,
        per_coord=tuple(per_coord),
        total=total,
        mu=mu,
        M=M,
        degenerate=degenerate,
        iso_bound=isoperimetric_bound(mu),
        iso_bound_complement=isoperimetric_bound(1 - mu),
        kkl_tilde=tilde,
        kkl_bound=None if tilde is None else kkl_bound_values(tilde),
        max_coord=max(range(1, f.n + 1), key=lambda k: (per_coord[k - 1], -k)),
    )


def decomposition_check(f: BooleanFunction, i: int) -> Tuple[Fraction, Fraction]:
    """Return (I(f), (I(f_1) + I(f_0))/2 + I_i(f)); the two are always equal."""
    if f.n < 2:
        log.error("Decomposition needs n >= 2")
        raise DimensionError("Decomposition needs n >= 2")
    _check_coordinate(f, i)
    lhs = total_influence(f)
    rhs = (total_influence(f.restrict(i, 1)) + total_influence(f.restrict(i, 0))) / 2 + influence(f, i)
    return lhs, rhs


def fourier_coefficients(f: BooleanFunction) -> np.ndarray:
    """f_hat(S) = E[f(x) (-1)^{<x,S>}], indexed by the bit mask of S."""
    return kernels.walsh_hadamard(f.table.astype(np.float64)) / float(1 << f.n)


def fourier_influences(f: BooleanFunction) -> np.ndarray:
    """I_k = 4 * sum over S containing k of f_hat(S)^2, for the 0/1-valued f."""
    weights = np.square(fourier_coefficients(f))
    result = np.empty(f.n)
    for k in range(1, f.n + 1):
        view = weights.reshape(1 << (f.n - k), 2, 1 << (k - 1))
        result[k - 1] = 4.0 * view[:, 1, :].sum()
    return result


def fourier_influence_check(f: BooleanFunction) -> float:
    """Largest deviation between counted influences and their Fourier expression."""
    exact = np.array([float(v) for v in influences(f)])
    return float(np.max(np.abs(exact - fourier_influences(f))))


def _split_parts(f: BooleanFunction, i: int):
    if f.n < 2:
        log.error("Splitting needs n >= 2")
        raise DimensionError("Splitting needs n >= 2")
    _check_coordinate(f, i)
    f1 = f.restrict(i, 1)
    f0 = f.restrict(i, 0)
    return f1, f0


def split_gain(f: BooleanFunction, i: int) -> float:
    """2*M*mu - M_1*mu_1 - M_0*mu_0 for the split on coordinate i (degenerate M taken as 0)."""
    f1, f0 = _split_parts(f, i)
    return (
        2.0 * scaled_excess(float(f.measure()), float(total_influence(f)))
        - scaled_excess(float(f1.measure()), float(total_influence(f1)))
        - scaled_excess(float(f0.measure()), float(total_influence(f0)))
    )


def split_gain_bound(f: BooleanFunction, i: int) -> float:
    """min(mu_0, mu_1) * log2(mu / (2 min(mu_0, mu_1))), the small-side lower bound on the gain."""
    f1, f0 = _split_parts(f, i)
    return small_side_bound(float(f.measure()), float(f1.measure()), float(f0.measure()))


def medium_influence_ratio(f: BooleanFunction, i: int) -> Optional[float]:
    """gain / (zeta * mu) with zeta = min(I_i, mu_0, mu_1) / mu; None when zeta = 0."""
    f1, f0 = _split_parts(f, i)
    floor = min(influence(f, i), f1.measure(), f0.measure())
    if floor == 0:
        return None
    return split_gain(f, i) / float(floor)
