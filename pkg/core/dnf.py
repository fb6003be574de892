"""DNF formulas: terms as pairs of disjoint literal sets, DNFs as ordered term lists."""
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

import core.custom_logger as custom_logger
from core import kernels
from core.boolean_function import BooleanFunction, check_dimension
from core.errors import CoordinateError, DimensionError, PreconditionError, SpecError

log = custom_logger.customLogger()

EMPTY_DNF_TEXT = 'false'
EMPTY_TERM_TEXT = 'true'

# Per-coordinate codes used for the lexicographic order of terms.
POSITIVE, NEGATIVE, FREE = 0, 1, 2


@dataclass(frozen=True, init=False)
class Term:
    """AND of literals: every coordinate in pos is 1 and every coordinate in neg is 0."""
    pos: FrozenSet[int]
    neg: FrozenSet[int]

    def __init__(self, pos: Iterable[int] = (), neg: Iterable[int] = ()):
        pos = frozenset(int(k) for k in pos)
        neg = frozenset(int(k) for k in neg)
        if pos & neg:
            log.error(f"Term uses coordinates {sorted(pos & neg)} both positively and negatively")
            raise SpecError(f"Term uses coordinates {sorted(pos & neg)} both positively and negatively")
        if any(k < 1 for k in pos | neg):
            log.error("Term coordinates start at 1")
            raise CoordinateError("Term coordinates start at 1")
        object.__setattr__(self, 'pos', pos)
        object.__setattr__(self, 'neg', neg)

    @property
    def width(self) -> int:
        return len(self.pos) + len(self.neg)

    @property
    def coords(self) -> FrozenSet[int]:
        return self.pos | self.neg

    def validate(self, n: int) -> None:
        bad = [k for k in self.coords if k > n]
        if bad:
            log.error(f"Term coordinates {sorted(bad)} exceed n={n}")
            raise CoordinateError(f"Term coordinates {sorted(bad)} exceed n={n}")

    def codes(self, n: int) -> Tuple[int, ...]:
        return tuple(
            POSITIVE if k in self.pos else NEGATIVE if k in self.neg else FREE
            for k in range(1, n + 1)
        )

    @classmethod
    def from_codes(cls, codes: Sequence[int]) -> 'Term':
        return cls(
            [k for k, c in enumerate(codes, start=1) if c == POSITIVE],
            [k for k, c in enumerate(codes, start=1) if c == NEGATIVE],
        )

    def with_literal(self, k: int, b: int) -> 'Term':
        if k in self.coords:
            log.error(f"Term already constrains coordinate {k}")
            raise SpecError(f"Term already constrains coordinate {k}")
        return Term(self.pos | {k}, self.neg) if b else Term(self.pos, self.neg | {k})

    def relabel(self, mapping: Sequence[int]) -> 'Term':
        """Rename coordinate k to mapping[k-1]."""
        return Term([mapping[k - 1] for k in self.pos], [mapping[k - 1] for k in self.neg])

    def is_satisfied(self, x: Sequence[int]) -> bool:
        return all(x[k - 1] for k in self.pos) and not any(x[k - 1] for k in self.neg)

    def indicator(self, n: int) -> np.ndarray:
        self.validate(n)
        idx = kernels.index_array(n)
        pos_mask = np.uint64(kernels.mask_of(self.pos))
        neg_mask = np.uint64(kernels.mask_of(self.neg))
        return ((idx & pos_mask) == pos_mask) & ((idx & neg_mask) == 0)

    def evaluate_points(self, points: np.ndarray) -> np.ndarray:
        result = np.ones(points.shape[0], dtype=bool)
        for k in self.pos:
            result &= points[:, k - 1]
        for k in self.neg:
            result &= ~points[:, k - 1]
        return result

    def implies(self, other: 'Term') -> bool:
        """True when this sub-cube lies inside the other's."""
        return other.pos <= self.pos and other.neg <= self.neg

    def to_text(self) -> str:
        literals = sorted([(k, '') for k in self.pos] + [(k, '!') for k in self.neg])
        if not literals:
            return EMPTY_TERM_TEXT
        return '&'.join(f"{neg}{k}" for k, neg in literals)

    @classmethod
    def parse(cls, text: str) -> 'Term':
        text = text.strip()
        if text == EMPTY_TERM_TEXT:
            return cls()
        pos, neg = [], []
        for literal in text.split('&'):
            literal = literal.strip()
            negated = literal.startswith('!')
            body = literal[1:] if negated else literal
            if not body.isdigit():
                log.error(f"Bad literal '{literal}' in term '{text}'")
                raise SpecError(f"Bad literal '{literal}' in term '{text}'")
            (neg if negated else pos).append(int(body))
        if len(set(pos + neg)) != len(pos) + len(neg):
            log.error(f"Term '{text}' repeats a coordinate")
            raise SpecError(f"Term '{text}' repeats a coordinate")
        return cls(pos, neg)

    def to_dict(self) -> Dict[str, List[int]]:
        return {'pos': sorted(self.pos), 'neg': sorted(self.neg)}

    @classmethod
    def from_dict(cls, data: Dict[str, List[int]]) -> 'Term':
        return cls(data.get('pos', []), data.get('neg', []))


@dataclass(frozen=True)
class Dnf:
    """OR of terms over n coordinates; terms stay in insertion order."""
    n: int
    terms: Tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'terms', tuple(self.terms))
        if self.n < 1:
            log.error(f"A DNF needs n >= 1, got {self.n}")
            raise DimensionError(f"A DNF needs n >= 1, got {self.n}")
        for term in self.terms:
            term.validate(self.n)

    @property
    def size(self) -> int:
        return len(self.terms)

    @property
    def width(self) -> int:
        return max((t.width for t in self.terms), default=0)

    def evaluate(self, x: Sequence[int]) -> int:
        if len(x) != self.n:
            log.error(f"Point has {len(x)} coordinates, DNF has {self.n}")
            raise DimensionError(f"Point has {len(x)} coordinates, DNF has {self.n}")
        return int(any(t.is_satisfied(x) for t in self.terms))

    def evaluate_points(self, points: np.ndarray) -> np.ndarray:
        if points.shape[1] != self.n:
            log.error(f"Points have {points.shape[1]} coordinates, DNF has {self.n}")
            raise DimensionError(f"Points have {points.shape[1]} coordinates, DNF has {self.n}")
        result = np.zeros(points.shape[0], dtype=bool)
        for term in self.terms:
            result |= term.evaluate_points(points)
        return result

    def table(self) -> np.ndarray:
        check_dimension(self.n)
        result = np.zeros(kernels.table_length(self.n), dtype=bool)
        for term in self.terms:
            result |= term.indicator(self.n)
        return result

    def to_function(self) -> BooleanFunction:
        return BooleanFunction(self.n, self.table())

    def extend(self, terms: Iterable[Term]) -> 'Dnf':
        return Dnf(self.n, self.terms + tuple(terms))

    def normalize(self) -> 'Dnf':
        """Drop duplicate terms and terms implied by another term; order of survivors is kept."""
        unique: List[Term] = []
        for term in self.terms:
            if term not in unique:
                unique.append(term)
        kept = [
            t for t in unique
            if not any(o is not t and t.implies(o) for o in unique)
        ]
        return Dnf(self.n, tuple(kept))

    def to_text(self) -> str:
        if not self.terms:
            return EMPTY_DNF_TEXT
        return '|'.join(t.to_text() for t in self.terms)

    @classmethod
    def parse(cls, text: str, n: int) -> 'Dnf':
        """Parse '1&!2|2&3'; 'false' is the empty DNF and 'true' the empty term."""
        text = text.strip()
        if text == EMPTY_DNF_TEXT or text == '':
            return cls(n, ())
        return cls(n, tuple(Term.parse(part) for part in text.split('|')))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'text': self.to_text(),
            'size': self.size,
            'width': self.width,
            'terms': [t.to_dict() for t in self.terms],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Dnf':
        return cls(int(data['n']), tuple(Term.from_dict(t) for t in data['terms']))


def dnf_eval(dnf: Dnf, x: Sequence[int]) -> int:
    return dnf.evaluate(x)


def to_function(dnf: Dnf) -> BooleanFunction:
    return dnf.to_function()


def normalize(dnf: Dnf) -> Dnf:
    return dnf.normalize()


def dnf_error(f: BooleanFunction, dnf: Dnf) -> Fraction:
    """Exact Pr_x[f(x) != D(x)]."""
    if f.n != dnf.n:
        log.error(f"Function has n={f.n} but DNF has n={dnf.n}")
        raise DimensionError(f"Function has n={f.n} but DNF has n={dnf.n}")
    mismatches = int(np.count_nonzero(f.table != dnf.table()))
    return Fraction(mismatches, kernels.table_length(f.n))


def truncate(dnf: Dnf, w: int) -> Dnf:
    """Remove every term with more than w literals."""
    if w < 0:
        log.error(f"Width bound must be non-negative, got {w}")
        raise PreconditionError(f"Width bound must be non-negative, got {w}")
    return Dnf(dnf.n, tuple(t for t in dnf.terms if t.width <= w))


def truncation_bound(dnf: Dnf, w: int) -> Fraction:
    """size(D) * 2^-w, the allowed disagreement of truncate(D, w)."""
    return Fraction(dnf.size, 1 << w)


def union_bound(dnf: Dnf) -> Fraction:
    """Sum over terms of 2^-width, an upper bound on the measure of the DNF."""
    return sum((Fraction(1, 1 << t.width) for t in dnf.terms), Fraction(0))


def influence_sanity_bound(dnf: Dnf) -> Fraction:
    """Sum over terms of width * 2^-(width-1); each term adds at most a sub-cube's influence."""
    return sum(
        (Fraction(t.width, 1 << (t.width - 1)) for t in dnf.terms if t.width > 0),
        Fraction(0),
    )


def subcube_term(f: BooleanFunction) -> Optional[Term]:
    """The term whose indicator is f, or None when f is not a (non-empty) sub-cube."""
    ones = np.flatnonzero(f.table).astype(np.uint64)
    if ones.size == 0:
        return None
    common_ones = int(np.bitwise_and.reduce(ones))
    any_ones = int(np.bitwise_or.reduce(ones))
    pos = [k for k in range(1, f.n + 1) if common_ones >> (k - 1) & 1]
    neg = [k for k in range(1, f.n + 1) if not any_ones >> (k - 1) & 1]
    free = f.n - len(pos) - len(neg)
    if ones.size != 1 << free:
        return None
    return Term(pos, neg)


def exact_dnf(f: BooleanFunction) -> Dnf:
    """One full-width term per satisfying point."""
    terms = []
    for x in np.flatnonzero(f.table):
        x = int(x)
        terms.append(Term(
            [k for k in range(1, f.n + 1) if x >> (k - 1) & 1],
            [k for k in range(1, f.n + 1) if not x >> (k - 1) & 1],
        ))
    return Dnf(f.n, tuple(terms))


def random_dnf(n: int, size: int, max_width: int, rng: np.random.Generator) -> Dnf:
    """size random terms, each with a uniform width in 0..max_width and random signs."""
    max_width = min(max_width, n)
    terms = []
    for _ in range(size):
        width = int(rng.integers(0, max_width + 1))
        coords = rng.choice(np.arange(1, n + 1), size=width, replace=False)
        signs = rng.integers(0, 2, size=width)
        terms.append(Term(
            [int(k) for k, s in zip(coords, signs) if s],
            [int(k) for k, s in zip(coords, signs) if not s],
        ))
    return Dnf(n, tuple(terms))
