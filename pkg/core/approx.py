"""
Certified recursive DNF approximation and the exhaustive oracles it is compared against.

The approximator splits on a coordinate of maximal influence and hands each restriction a
share of the parent's error allowance. Every node's error is exact, so the final error is
known exactly and checked against the granted budget before the result is returned.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

import core.custom_logger as custom_logger
from core import kernels
from core.boolean_function import BooleanFunction
from core.config import get_config
from core.dnf import Dnf, Term, dnf_error, exact_dnf, subcube_term
from core.errors import CapExceededError, CertificationError, PreconditionError, SpecError
from core.file_parsing import JsonReportParser
from core.influence import excess, scaled_excess

log = custom_logger.customLogger()

SPLIT_RULES = ('proportional-to-m-mu', 'proportional-to-mu', 'equal')
BUDGET_MODES = ('eps-mu', 'eps-m-mu')

BRANCH_EXACT_SUBCUBE = 'exact-subcube'
BRANCH_CONSTANT_ZERO = 'constant-zero'
BRANCH_SUBCUBE_BASE = 'subcube-base'
BRANCH_SPLIT = 'split'

# Weights are rounded to this denominator so child budgets stay small rationals.
_WEIGHT_DENOMINATOR = 1 << 20


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


# Sub-cube oracles

def _ternary_step(values: np.ndarray, axis: int) -> np.ndarray:
    zero = np.take(values, 0, axis=axis)
    one = np.take(values, 1, axis=axis)
    return np.stack((one, zero, zero + one), axis=axis)


@lru_cache(maxsize=None)
def _term_sizes(n: int) -> np.ndarray:
    """Point count 2^(free coordinates) of every term, shape (3,)*n."""
    sizes = np.ones((), dtype=np.int64)
    for _ in range(n):
        sizes = np.multiply.outer(sizes, np.array([1, 1, 2], dtype=np.int64))
    sizes.setflags(write=False)
    return sizes


def subcube_errors(f: BooleanFunction) -> np.ndarray:
    """
    Mismatch counts of every term against f.

    Returns:
        Integer array of shape (3,)*n; the entry at codes (c_1, ..., c_n) with c_k in
        {positive, negative, free} is the number of points where f differs from that term.
    """
    n = f.n
    reverse = tuple(range(n - 1, -1, -1))
    counts = f.table.astype(np.int64).reshape((2,) * n).transpose(reverse)
    for axis in range(n):
        counts = _ternary_step(counts, axis)
    return f.count() + _term_sizes(n) - 2 * counts


def best_subcube(f: BooleanFunction, cap: Optional[int] = None) -> Tuple[Optional[Term], Fraction]:
    """
    Best approximation of f by a single sub-cube or a constant.

    Args:
        f: Function to approximate
        cap: Largest n enumerated; defaults to limits.subcube_oracle_max_n

    Returns:
        (term, error) where term is None for the constant 0; ties go to the
        lexicographically least term and constant 0 ranks after every term.

    Raises:
        CapExceededError: If f.n is beyond the cap
    """
    cap = get_config()['limits']['subcube_oracle_max_n'] if cap is None else cap
    if f.n > cap:
        raise CapExceededError(f"best_subcube enumerates 3^n terms and supports n <= {cap}, got n={f.n}")
    errors = subcube_errors(f)
    flat = int(np.argmin(errors))
    best = int(errors.reshape(-1)[flat])
    length = kernels.table_length(f.n)
    if best > f.count():
        return None, Fraction(f.count(), length)
    codes = np.unravel_index(flat, errors.shape)
    return Term.from_codes([int(c) for c in codes]), Fraction(best, length)


def greedy_subcube(f: BooleanFunction) -> Tuple[Optional[Term], Fraction]:
    """Restriction-path heuristic: add the single literal that most lowers the error until none does."""
    ones_total = f.count()
    length = kernels.table_length(f.n)
    table = np.array(f.table)
    free = list(range(1, f.n + 1))
    pos: List[int] = []
    neg: List[int] = []
    current = length - ones_total

    while free:
        m = len(free)
        size = 1 << (m - 1)
        best = None
        for local, k in enumerate(free, start=1):
            view = table.reshape(1 << (m - local), 2, 1 << (local - 1))
            for b in (1, 0):
                inside = int(np.count_nonzero(view[:, b, :]))
                err = ones_total + size - 2 * inside
                if best is None or err < best[0]:
                    best = (err, local, k, b)
        if best[0] >= current:
            break
        current, local, k, b = best
        view = table.reshape(1 << (m - local), 2, 1 << (local - 1))
        table = np.ascontiguousarray(view[:, b, :]).reshape(-1)
        (pos if b else neg).append(k)
        free.remove(k)

    if current > ones_total:
        return None, Fraction(ones_total, length)
    return Term(pos, neg), Fraction(current, length)


def best_dnf_oracle(f: BooleanFunction, s: Optional[int] = None) -> Tuple[Dnf, Fraction]:
    """
    Exhaustive minimum-error DNF with at most s terms.

    Candidates are visited by size, and within a size in lexicographic term order; the first
    candidate reaching the minimum error is returned.

    Raises:
        CapExceededError: If n or s is beyond the configured oracle caps
    """
    limits = get_config()['limits']
    s = limits['dnf_oracle_max_size'] if s is None else s
    if f.n > limits['dnf_oracle_max_n']:
        raise CapExceededError(f"best_dnf_oracle supports n <= {limits['dnf_oracle_max_n']}, got n={f.n}")
    if not 0 <= s <= limits['dnf_oracle_max_size']:
        raise CapExceededError(f"best_dnf_oracle supports size 0..{limits['dnf_oracle_max_size']}, got s={s}")

    terms = [Term.from_codes(codes) for codes in product(range(3), repeat=f.n)]
    indicators = np.stack([t.indicator(f.n) for t in terms])
    best_terms: Tuple[int, ...] = ()
    best_mismatch = f.count()
    for size in range(1, s + 1):
        for chosen in combinations(range(len(terms)), size):
            covered = np.logical_or.reduce(indicators[list(chosen)], axis=0)
            mismatch = int(np.count_nonzero(covered != f.table))
            if mismatch < best_mismatch:
                best_terms, best_mismatch = chosen, mismatch
        if best_mismatch == 0:
            break
    dnf = Dnf(f.n, tuple(terms[i] for i in best_terms))
    return dnf, Fraction(best_mismatch, kernels.table_length(f.n))


# Approximator

@dataclass(frozen=True)
class BudgetPolicy:
    """How a node's allowance is divided among its restrictions."""
    split_rule: str = 'proportional-to-m-mu'
    small_side_factor: Fraction = Fraction(1, 16)
    oracle_cap: int = 4
    budget_mode: str = 'eps-mu'
    slack_forwarding: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'small_side_factor', _to_fraction(self.small_side_factor))
        if self.split_rule not in SPLIT_RULES:
            raise SpecError(f"Unknown split rule '{self.split_rule}'; expected one of {SPLIT_RULES}")
        if self.budget_mode not in BUDGET_MODES:
            raise SpecError(f"Unknown budget mode '{self.budget_mode}'; expected one of {BUDGET_MODES}")
        if not 0 < self.small_side_factor < 1:
            raise SpecError(f"small_side_factor must lie in (0, 1), got {self.small_side_factor}")
        if self.oracle_cap < 0:
            raise SpecError(f"oracle_cap must be non-negative, got {self.oracle_cap}")

    @classmethod
    def parse(cls, text: Optional[str]) -> 'BudgetPolicy':
        """
        Parse 'split_rule=equal,rho=1/8,budget_mode=eps-m-mu'; a bare split rule name is accepted too.
        """
        if not text:
            return cls()
        text = text.strip()
        if text in SPLIT_RULES:
            return cls(split_rule=text)
        values: Dict[str, Any] = {}
        for item in text.split(','):
            key, eq, raw = item.partition('=')
            key = key.strip()
            if not eq:
                raise SpecError(f"Bad policy item '{item}'; expected key=value")
            if key == 'split_rule':
                values['split_rule'] = raw.strip()
            elif key in ('rho', 'small_side_factor'):
                try:
                    values['small_side_factor'] = Fraction(raw.strip())
                except ValueError:
                    raise SpecError(f"rho must be a number or fraction, got '{raw}'")
            elif key == 'oracle_cap':
                values['oracle_cap'] = int(raw)
            elif key == 'budget_mode':
                values['budget_mode'] = raw.strip()
            elif key in ('slack', 'slack_forwarding'):
                values['slack_forwarding'] = raw.strip().lower() in ('1', 'true', 'yes', 'on')
            else:
                raise SpecError(f"Unknown policy key '{key}'")
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'split_rule': self.split_rule,
            'small_side_factor': JsonReportParser.rational_to_json(self.small_side_factor),
            'oracle_cap': self.oracle_cap,
            'budget_mode': self.budget_mode,
            'slack_forwarding': self.slack_forwarding,
        }


@dataclass
class TraceNode:
    """Record of one recursion node; path lists the root coordinates and bits fixed above it."""
    path: Tuple[Tuple[int, int], ...]
    n: int
    mu: Fraction
    M: float
    budget: Fraction
    branch: str = ''
    error: Fraction = Fraction(0)
    coord: Optional[int] = None
    mu1: Optional[Fraction] = None
    mu0: Optional[Fraction] = None
    M1: Optional[float] = None
    M0: Optional[float] = None
    child_budgets: Optional[Tuple[Fraction, Fraction]] = None
    small_side: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        rational = JsonReportParser.rational_to_json
        real = JsonReportParser.real_to_json
        maybe = lambda v, codec: None if v is None else codec(v)
        return {
            'path': ''.join(f"{'' if b else '!'}{k};" for k, b in self.path).rstrip(';'),
            'depth': len(self.path),
            'n': self.n,
            'branch': self.branch,
            'mu': rational(self.mu),
            'M': real(self.M),
            'budget': rational(self.budget),
            'error': rational(self.error),
            'coord': self.coord,
            'mu1': maybe(self.mu1, rational),
            'mu0': maybe(self.mu0, rational),
            'M1': maybe(self.M1, real),
            'M0': maybe(self.M0, real),
            'child_budgets': None if self.child_budgets is None else {
                'one': rational(self.child_budgets[0]),
                'zero': rational(self.child_budgets[1]),
            },
            'small_side': self.small_side,
        }


@dataclass
class ApproxResult:
    dnf: Dnf
    error: Fraction
    budget: Fraction
    eps: Fraction
    mu: Fraction
    policy: BudgetPolicy
    trace: List[TraceNode] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.dnf.size

    @property
    def width(self) -> int:
        return self.dnf.width

    @property
    def certified(self) -> bool:
        return self.error <= self.budget

    def to_dict(self) -> Dict[str, Any]:
        rational = JsonReportParser.rational_to_json
        return {
            'dnf': self.dnf.to_dict(),
            'error': rational(self.error),
            'budget': rational(self.budget),
            'eps': rational(self.eps),
            'mu': rational(self.mu),
            'size': self.size,
            'width': self.width,
            'certified': self.certified,
            'policy': self.policy.to_dict(),
            'trace': [node.to_dict() for node in self.trace],
        }


@dataclass(frozen=True)
class _NodeStats:
    """Counts of one node, computed once and shared by the trace, the budget split and the base cases."""
    n: int
    count: int
    edges: np.ndarray

    @classmethod
    def of(cls, g: BooleanFunction) -> '_NodeStats':
        return cls(g.n, g.count(), kernels.edge_counts(g.table, g.n))

    @property
    def length(self) -> int:
        return 1 << self.n

    @property
    def mu(self) -> Fraction:
        return Fraction(self.count, self.length)

    @property
    def total(self) -> Fraction:
        return Fraction(int(self.edges.sum()), max(self.length >> 1, 1))

    @property
    def M(self) -> float:
        M, _ = excess(self.mu, self.total)
        return max(M, 0.0)

    @property
    def split_coordinate(self) -> int:
        # Ties go to the smallest index.
        return int(np.argmax(self.edges)) + 1

    def is_subcube(self) -> bool:
        """Edge-isoperimetric equality: 2^j points with 2^j*(n-j) boundary edges."""
        p = self.count
        if p == 0 or p & (p - 1):
            return False
        return int(self.edges.sum()) == p * (self.n - (p.bit_length() - 1))

    def single_term_floor(self) -> int:
        """No term or constant misses f on fewer points: a term of size 2^j errs on at least |count - 2^j|."""
        return min([self.count] + [abs(self.count - (1 << j)) for j in range(self.n + 1)])


# Sentinel branch for the over-budget guard; never produced while child budgets add up.
_GUARD_BRANCH = 'oracle-fallback'


class DnfApproximator:
    """
    Recursive approximator. Node order in the trace is preorder with the x_i = 1 child first.
    """

    def __init__(self, policy: Optional[BudgetPolicy] = None):
        self.policy = policy or BudgetPolicy()
        self.log = custom_logger.customLogger()
        self.subcube_cap = get_config()['limits']['subcube_oracle_max_n']
        self.trace: List[TraceNode] = []

    def root_budget(self, f: BooleanFunction, eps: Fraction) -> Fraction:
        mu = f.measure()
        if self.policy.budget_mode == 'eps-m-mu':
            return eps * Fraction(_NodeStats.of(f).M) * mu
        return eps * mu

    def approximate(self, f: BooleanFunction, eps) -> ApproxResult:
        """
        Build a DNF whose exact error against f is within the policy's allowance.

        Args:
            f: Function to approximate
            eps: Relative error; the allowance is eps*mu (or eps*M*mu in eps-m-mu mode)

        Returns:
            ApproxResult with the exact error and the recursion trace

        Raises:
            PreconditionError: If eps <= 0
            CertificationError: If the exact error exceeds the allowance
        """
        eps = _to_fraction(eps)
        if eps <= 0:
            raise PreconditionError(f"eps must be positive, got {eps}")
        budget = self.root_budget(f, eps)
        self.trace = []
        terms, _ = self._node(f, _NodeStats.of(f), budget, list(range(1, f.n + 1)), ())
        dnf = Dnf(f.n, tuple(terms))
        error = dnf_error(f, dnf)
        if error > budget:
            self.log.error(f"Certification failed for {f!r}: error {error} > budget {budget}")
            raise CertificationError(f"Approximation error {error} exceeds budget {budget}")
        self.log.info(
            f"Approximated n={f.n} mu={f.measure()} eps={eps}: size={dnf.size} width={dnf.width} "
            f"error={error} budget={budget} nodes={len(self.trace)}"
        )
        return ApproxResult(dnf, error, budget, eps, f.measure(), self.policy, list(self.trace))

    def _node(self, g: BooleanFunction, stats: _NodeStats, budget: Fraction, coords: List[int],
              path: Tuple[Tuple[int, int], ...]) -> Tuple[List[Term], Fraction]:
        mu = stats.mu
        node = TraceNode(path=path, n=g.n, mu=mu, M=stats.M, budget=budget)
        self.trace.append(node)

        if stats.is_subcube():
            exact = subcube_term(g)
            if exact is not None:
                return self._finish(node, BRANCH_EXACT_SUBCUBE, [exact.relabel(coords)], Fraction(0))
        if mu <= budget:
            return self._finish(node, BRANCH_CONSTANT_ZERO, [], mu)

        if Fraction(stats.single_term_floor(), stats.length) <= budget:
            if g.n <= self.subcube_cap:
                term, err = best_subcube(g, cap=self.subcube_cap)
            else:
                term, err = greedy_subcube(g)
            if err <= budget:
                terms = [] if term is None else [term.relabel(coords)]
                return self._finish(node, BRANCH_SUBCUBE_BASE, terms, err)

        terms, err = self._split(node, g, stats, budget, coords, path)
        if err > budget:
            # Child allowances add up to twice the node's, so only an accounting error lands here.
            return self._guard(node, g, budget, coords)
        return self._finish(node, BRANCH_SPLIT, terms, err)

    def _split(self, node: TraceNode, g: BooleanFunction, stats: _NodeStats, budget: Fraction,
               coords: List[int], path: Tuple[Tuple[int, int], ...]) -> Tuple[List[Term], Fraction]:
        i = stats.split_coordinate
        root_i = coords[i - 1]
        child_coords = coords[:i - 1] + coords[i:]
        g1, g0 = g.restrict(i, 1), g.restrict(i, 0)
        s1, s0 = _NodeStats.of(g1), _NodeStats.of(g0)
        mu1, mu0 = s1.mu, s0.mu
        node.coord = root_i
        node.mu1, node.mu0 = mu1, mu0
        node.M1, node.M0 = s1.M, s0.M
        allowance = 2 * budget
        verbose = self.log.isEnabledFor(logging.DEBUG)

        small = 0 if mu0 <= mu1 else 1
        mu_small = mu0 if small == 0 else mu1
        if mu_small <= self.policy.small_side_factor * stats.mu and mu_small <= allowance:
            node.small_side = small
            large = 1 - small
            large_budget = allowance - mu_small
            node.child_budgets = (large_budget, mu_small) if large == 1 else (mu_small, large_budget)
            g_large, s_large = (g1, s1) if large == 1 else (g0, s0)
            large_terms, large_err = self._node(g_large, s_large, large_budget, child_coords,
                                                path + ((root_i, large),))
            terms = [t.with_literal(root_i, large) for t in large_terms]
            if verbose:
                self.log.debug(f"Split on {root_i}: side {small} dropped (mu={mu_small}), "
                               f"{large_budget} to side {large}")
            return terms, (large_err + mu_small) / 2

        w1 = self._weight_one(s1, s0)
        budget1 = allowance * w1
        budget0 = allowance - budget1
        terms1, err1 = self._node(g1, s1, budget1, child_coords, path + ((root_i, 1),))
        if self.policy.slack_forwarding:
            budget0 = allowance - err1
        node.child_budgets = (budget1, budget0)
        terms0, err0 = self._node(g0, s0, budget0, child_coords, path + ((root_i, 0),))
        if verbose:
            self.log.debug(f"Split on {root_i}: budgets {budget1} / {budget0}, errors {err1} / {err0}")
        terms = [t.with_literal(root_i, 1) for t in terms1] + [t.with_literal(root_i, 0) for t in terms0]
        return terms, (err1 + err0) / 2

    def _weight_one(self, s1: _NodeStats, s0: _NodeStats) -> Fraction:
        rule = self.policy.split_rule
        mu1, mu0 = s1.mu, s0.mu
        if rule == 'equal':
            return Fraction(1, 2)
        if rule == 'proportional-to-m-mu':
            a1 = max(0.0, scaled_excess(float(mu1), float(s1.total)))
            a0 = max(0.0, scaled_excess(float(mu0), float(s0.total)))
            if a1 + a0 > 0:
                return Fraction(a1 / (a1 + a0)).limit_denominator(_WEIGHT_DENOMINATOR)
        return mu1 / (mu1 + mu0)

    def _guard(self, node: TraceNode, g: BooleanFunction, budget: Fraction,
               coords: List[int]) -> Tuple[List[Term], Fraction]:
        """Replace an over-budget split by an exhaustive answer when g is small enough, else fail."""
        self.log.error(f"Split at {node.path} returned more error than its budget {budget}")
        if g.n > self.policy.oracle_cap:
            raise CertificationError(f"Node at {node.path} cannot meet budget {budget}")
        limits = get_config()['limits']
        dnf, err = (exact_dnf(g), Fraction(0))
        if g.n <= limits['dnf_oracle_max_n']:
            candidate, candidate_err = best_dnf_oracle(g)
            if candidate_err <= budget:
                dnf, err = candidate, candidate_err
        return self._finish(node, _GUARD_BRANCH, [t.relabel(coords) for t in dnf.terms], err)

    def _finish(self, node: TraceNode, branch: str, terms: List[Term],
                error: Fraction) -> Tuple[List[Term], Fraction]:
        node.branch = branch
        node.error = error
        return terms, error


def approximate(f: BooleanFunction, eps, policy: Optional[BudgetPolicy] = None) -> ApproxResult:
    return DnfApproximator(policy).approximate(f, eps)


def oracle_factor(result: ApproxResult, f: BooleanFunction) -> Optional[float]:
    """
    Size of the approximator's DNF over the smallest oracle size reaching the same budget.

    None when no DNF within the oracle's size cap reaches the budget; 0-size oracles count as 1.
    """
    limits = get_config()['limits']
    for s in range(0, limits['dnf_oracle_max_size'] + 1):
        _, err = best_dnf_oracle(f, s)
        if err <= result.budget:
            return result.size / max(s, 1)
    return None
