"""Combinatorial shifting operators S_ST and the compression pipeline built from them."""
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import FrozenSet, Iterable, List, Sequence

import numpy as np

import core.custom_logger as custom_logger
from core import kernels
from core.boolean_function import BooleanFunction
from core.errors import CoordinateError, PreconditionError, SpecError

log = custom_logger.customLogger()


@dataclass(frozen=True, init=False)
class ShiftSpec:
    S: FrozenSet[int]
    T: FrozenSet[int]

    def __init__(self, S: Iterable[int] = (), T: Iterable[int] = ()):
        object.__setattr__(self, 'S', frozenset(int(k) for k in S))
        object.__setattr__(self, 'T', frozenset(int(k) for k in T))

    def validate(self, n: int) -> None:
        overlap = self.S & self.T
        if overlap:
            log.error(f"Shift sets must be disjoint; both contain {sorted(overlap)}")
            raise SpecError(f"Shift sets must be disjoint; both contain {sorted(overlap)}")
        bad = [k for k in self.S | self.T if not 1 <= k <= n]
        if bad:
            log.error(f"Shift coordinates {sorted(bad)} out of range 1..{n}")
            raise CoordinateError(f"Shift coordinates {sorted(bad)} out of range 1..{n}")

    @classmethod
    def parse(cls, s_text: str, t_text: str) -> 'ShiftSpec':
        """Build from comma-separated lists such as '1,3' and '2' (empty string = empty set)."""
        def _coords(text: str) -> List[int]:
            text = (text or '').strip()
            if not text:
                return []
            try:
                return [int(part) for part in text.split(',') if part.strip()]
            except ValueError:
                log.error(f"Coordinate list must be comma-separated integers, got '{text}'")
                raise SpecError(f"Coordinate list must be comma-separated integers, got '{text}'")
        return cls(_coords(s_text), _coords(t_text))

    def label(self) -> str:
        def fmt(coords):
            return '{' + ','.join(str(k) for k in sorted(coords, reverse=True)) + '}'
        return f"S_{fmt(self.S)}{fmt(self.T)}"


def shift(f: BooleanFunction, spec: ShiftSpec) -> BooleanFunction:
    spec.validate(f.n)
    shifted = kernels.shift_tables(f.table, f.n, kernels.mask_of(spec.S), kernels.mask_of(spec.T))
    return BooleanFunction(f.n, shifted)


def compression_schedule(n: int) -> List[List[ShiftSpec]]:
    """
    Shifts producing each stage, listed in application order.

    Stage 0 applies S_{0{n}}, ..., S_{0{1}} (innermost operator first). Stage k, for
    1 <= k <= n-1, applies S_{A{1}} for every A within {2..n} of size k, starting with
    {2}, {3}, ... for k = 1. Stage n applies S_{{n..2}{1}}.
    """
    stages = [[ShiftSpec((), (j,)) for j in range(n, 0, -1)]]
    for k in range(1, n):
        stages.append([ShiftSpec(subset, (1,)) for subset in combinations(range(2, n + 1), k)])
    stages.append([ShiftSpec(range(2, n + 1), (1,))])
    return stages


def compress_tables(tables: np.ndarray, n: int) -> List[np.ndarray]:
    """Run the compression pipeline on a table or a batch; returns the tables of every stage."""
    current = tables
    stages = []
    for stage in compression_schedule(n):
        for spec in stage:
            current = kernels.shift_tables(current, n, kernels.mask_of(spec.S), kernels.mask_of(spec.T))
        stages.append(current)
    return stages


def compress_pipeline(f: BooleanFunction) -> List[BooleanFunction]:
    """
    Return [f^0, f^1, ..., f^n] of the compression pipeline.

    Raises:
        PreconditionError: If mu(f) > 1/2; complement explicitly instead.
    """
    if f.measure() > Fraction(1, 2):
        log.error(f"Compression pipeline refused a function of measure {f.measure()}")
        raise PreconditionError(
            f"Compression pipeline needs mu(f) <= 1/2, got {f.measure()}; complement the function first"
        )
    return [BooleanFunction(f.n, table) for table in compress_tables(f.table, f.n)]


def vanishes_on_lower_half(f: BooleanFunction) -> bool:
    """True when f(0, x_2, ..., x_n) = 0 everywhere."""
    view = f.table.reshape(1 << (f.n - 1), 2)
    return not bool(view[:, 0].any())


def stage_labels(n: int) -> List[Sequence[str]]:
    return [[spec.label() for spec in stage] for stage in compression_schedule(n)]
