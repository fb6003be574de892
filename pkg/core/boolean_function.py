"""Exact Boolean functions on {0,1}^n stored as truth tables."""
import re
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from core import kernels
from core.config import max_n
from core.errors import CapExceededError, CoordinateError, DimensionError, SpecError

_HEX_PATTERN = re.compile(r'^n=(\d+):([0-9a-f]+)$')


def check_dimension(n: int, cap: Optional[int] = None) -> None:
    """Refuse n outside 1..cap; callers beyond the cap belong in the sampling module."""
    cap = max_n() if cap is None else cap
    if n < 1:
        raise DimensionError(f"A Boolean function needs at least one coordinate, got n={n}")
    if n > cap:
        raise CapExceededError(
            f"n={n} exceeds the exact-mode cap of {cap}; use core.sampling for larger functions"
        )


class BooleanFunction:
    """
    Immutable Boolean function f: {0,1}^n -> {0,1}.

    The table has 2**n entries; entry x (x read as an n-bit integer with coordinate 1
    as the least-significant bit) is f(x).
    """

    __slots__ = ('n', 'table', '_count')

    def __init__(self, n: int, table, cap: Optional[int] = None):
        check_dimension(n, cap)
        bits = np.array(table, dtype=bool).reshape(-1)
        if bits.shape[0] != kernels.table_length(n):
            raise DimensionError(
                f"Table has {bits.shape[0]} entries, expected {kernels.table_length(n)} for n={n}"
            )
        bits.setflags(write=False)
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'table', bits)
        object.__setattr__(self, '_count', None)

    def __setattr__(self, name, value):
        raise AttributeError("BooleanFunction is immutable")

    # Construction

    @classmethod
    def constant(cls, n: int, value: int) -> 'BooleanFunction':
        return cls(n, np.full(kernels.table_length(n), bool(value)))

    @classmethod
    def from_callable(cls, n: int, func: Callable[[Sequence[int]], int]) -> 'BooleanFunction':
        """Tabulate func over all points; func receives a tuple (x_1, ..., x_n)."""
        check_dimension(n)
        values = [
            bool(func(tuple((x >> (k - 1)) & 1 for k in range(1, n + 1))))
            for x in range(kernels.table_length(n))
        ]
        return cls(n, values)

    @classmethod
    def from_hex(cls, text: str) -> 'BooleanFunction':
        """Parse the inline-hex format 'n=<k>:<hex>' (most-significant digit = highest indices)."""
        match = _HEX_PATTERN.match(text.strip())
        if not match:
            raise SpecError(f"Inline table must look like 'n=<k>:<lowercase hex>', got '{text}'")
        n = int(match.group(1))
        check_dimension(n)
        digits = match.group(2)
        expected = max(1, kernels.table_length(n) // 4)
        if len(digits) != expected:
            raise SpecError(f"n={n} needs {expected} hex digits, got {len(digits)}")
        try:
            table = kernels.table_from_int(int(digits, 16), n)
        except DimensionError as e:
            raise SpecError(f"Inline table '{text}' has bits beyond 2^{n} entries: {e}")
        return cls(n, table)

    def to_hex(self) -> str:
        digits = max(1, kernels.table_length(self.n) // 4)
        return f"n={self.n}:{kernels.table_to_int(self.table):0{digits}x}"

    # Basic queries

    def index_of(self, x: Sequence[int]) -> int:
        if len(x) != self.n:
            raise DimensionError(f"Point has {len(x)} coordinates, function has {self.n}")
        index = 0
        for k, bit in enumerate(x):
            if bit not in (0, 1, True, False):
                raise DimensionError(f"Coordinate {k + 1} of the point is {bit!r}, not a bit")
            index |= int(bit) << k
        return index

    def evaluate(self, x: Sequence[int]) -> int:
        return int(self.table[self.index_of(x)])

    def count(self) -> int:
        """Number of points where f = 1."""
        if self._count is None:
            object.__setattr__(self, '_count', int(kernels.popcounts(self.table)))
        return self._count

    def measure(self) -> Fraction:
        return Fraction(self.count(), kernels.table_length(self.n))

    def is_constant(self) -> bool:
        return self.count() in (0, kernels.table_length(self.n))

    # Relabelings

    def restrict(self, i: int, b: int) -> 'BooleanFunction':
        if self.n < 2:
            raise DimensionError("Restriction needs n >= 2")
        if b not in (0, 1):
            raise CoordinateError(f"Restriction value must be 0 or 1, got {b!r}")
        return BooleanFunction(self.n - 1, kernels.restrict_tables(self.table, self.n, i, b))

    def permute(self, perm: Sequence[int]) -> 'BooleanFunction':
        """Move coordinate j to position perm[j-1]."""
        perm = list(perm)
        if sorted(perm) != list(range(1, self.n + 1)):
            raise CoordinateError(f"{perm} is not a permutation of 1..{self.n}")
        return BooleanFunction(self.n, self.table[kernels.permutation_index(self.n, perm)])

    def negate_inputs(self, coords: Iterable[int]) -> 'BooleanFunction':
        """g(x) = f(x xor 1_S)."""
        coords = set(coords)
        bad = [k for k in coords if not 1 <= k <= self.n]
        if bad:
            raise CoordinateError(f"Coordinates {sorted(bad)} out of range 1..{self.n}")
        partner = (kernels.index_array(self.n) ^ np.uint64(kernels.mask_of(coords))).astype(np.int64)
        return BooleanFunction(self.n, self.table[partner])

    def complement(self) -> 'BooleanFunction':
        return BooleanFunction(self.n, ~self.table)

    # Dunder helpers

    def __eq__(self, other):
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.n, np.packbits(self.table).tobytes()))

    def __reduce__(self):
        return (BooleanFunction, (self.n, np.array(self.table)))

    def __repr__(self):
        if self.n <= 6:
            return f"BooleanFunction({self.to_hex()})"
        return f"BooleanFunction(n={self.n}, mu={self.measure()})"


def evaluate(f: BooleanFunction, x: Sequence[int]) -> int:
    return f.evaluate(x)


def measure(f: BooleanFunction) -> Fraction:
    return f.measure()


def restrict(f: BooleanFunction, i: int, b: int) -> BooleanFunction:
    return f.restrict(i, b)


def permute(f: BooleanFunction, perm: Sequence[int]) -> BooleanFunction:
    return f.permute(perm)


def negate_inputs(f: BooleanFunction, coords: Iterable[int]) -> BooleanFunction:
    return f.negate_inputs(coords)


def complement(f: BooleanFunction) -> BooleanFunction:
    return f.complement()
