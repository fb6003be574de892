"""
Bit-parallel truth-table kernels.

Every kernel works on a single table (shape ``(2**n,)``) or on a batch of tables
(shape ``(F, 2**n)``); the last axis is always the truth-table index. Bit ``k-1`` of an
index holds coordinate ``k`` (coordinate 1 is the least-significant bit).
"""
import numpy as np

from core.errors import CapExceededError, CoordinateError, DimensionError

# 2**(2**4) tables is the largest complete family that fits comfortably in memory.
MAX_ENUMERABLE_N = 4


def table_length(n: int) -> int:
    return 1 << n


def dimension_of(length: int) -> int:
    """Return n for a table of ``length`` entries."""
    if length < 1 or length & (length - 1):
        raise DimensionError(f"Truth-table length {length} is not a power of two")
    return length.bit_length() - 1


def mask_of(coords) -> int:
    """Bit mask with bit k-1 set for each coordinate k."""
    mask = 0
    for k in coords:
        mask |= 1 << (k - 1)
    return mask


def index_array(n: int) -> np.ndarray:
    return np.arange(table_length(n), dtype=np.uint64)


def coordinate_bit(n: int, k: int) -> np.ndarray:
    """Value of coordinate k at every index of a 2**n table."""
    return ((index_array(n) >> np.uint64(k - 1)) & np.uint64(1)).astype(bool)


def popcounts(tables: np.ndarray) -> np.ndarray:
    """Number of ones in each table."""
    return np.count_nonzero(tables, axis=-1)


def split_view(tables: np.ndarray, n: int, k: int) -> np.ndarray:
    if not 1 <= k <= n:
        raise CoordinateError(f"Coordinate {k} out of range 1..{n}")
    return tables.reshape(tables.shape[:-1] + (1 << (n - k), 2, 1 << (k - 1)))


def edge_counts(tables: np.ndarray, n: int) -> np.ndarray:
    """
    Count the boundary edges of each table in every direction.

    Returns:
        Integer array of shape ``tables.shape[:-1] + (n,)``; entry k-1 is the number of
        pairs {x, x xor e_k} on which the table takes different values, so that
        I_k = count / 2**(n-1).
    """
    counts = []
    for k in range(1, n + 1):
        view = split_view(tables, n, k)
        counts.append(np.count_nonzero(view[..., 0, :] != view[..., 1, :], axis=(-2, -1)))
    if not counts:
        return np.zeros(tables.shape[:-1] + (0,), dtype=np.int64)
    return np.stack(counts, axis=-1).astype(np.int64)


def restrict_tables(tables: np.ndarray, n: int, i: int, b: int) -> np.ndarray:
    """Fix coordinate i to bit b; surviving coordinates keep their relative order."""
    view = split_view(tables, n, i)
    return np.ascontiguousarray(view[..., int(b), :]).reshape(tables.shape[:-1] + (1 << (n - 1),))


def permutation_index(n: int, perm) -> np.ndarray:
    """
    Source index for g(x) = f(y) with y_j = x_{perm[j-1]}.

    Coordinate j of f therefore becomes coordinate perm[j-1] of g.
    """
    idx = index_array(n)
    source = np.zeros_like(idx)
    for j, target in enumerate(perm, start=1):
        source |= ((idx >> np.uint64(target - 1)) & np.uint64(1)) << np.uint64(j - 1)
    return source.astype(np.int64)


def shift_tables(tables: np.ndarray, n: int, s_mask: int, t_mask: int) -> np.ndarray:
    """
    Apply the shifting operator defined by the disjoint coordinate masks S and T.

    Where x_S = 1 and x_T = 0 the result is f(x) AND f(x xor 1_{S u T}); where x_T = 1 and
    x_S = 0 it is the OR; elsewhere f(x). Conditions on an empty set hold vacuously.
    """
    idx = index_array(n)
    s = np.uint64(s_mask)
    t = np.uint64(t_mask)
    partner = (idx ^ (s | t)).astype(np.int64)
    keep_both = ((idx & s) == s) & ((idx & t) == 0)
    take_either = ((idx & t) == t) & ((idx & s) == 0)

    other = tables[..., partner]
    shifted = tables.copy()
    shifted[..., keep_both] = tables[..., keep_both] & other[..., keep_both]
    shifted[..., take_either] = tables[..., take_either] | other[..., take_either]
    return shifted


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis: sum_x v(x) (-1)^{<x,S>}."""
    a = np.array(values, dtype=np.float64)
    length = a.shape[-1]
    dimension_of(length)
    lead = a.shape[:-1]
    h = 1
    while h < length:
        a = a.reshape(lead + (length // (2 * h), 2, h))
        x = a[..., 0, :]
        y = a[..., 1, :]
        a = np.stack((x + y, x - y), axis=-2).reshape(lead + (length,))
        h *= 2
    return a


def table_to_int(table: np.ndarray) -> int:
    """Integer whose bit x is table[x]."""
    packed = np.packbits(np.asarray(table, dtype=bool), bitorder='little')
    return int.from_bytes(packed.tobytes(), 'little')


def table_from_int(value: int, n: int) -> np.ndarray:
    length = table_length(n)
    if value < 0 or value >> length:
        raise DimensionError(f"Value does not fit a table of {length} bits")
    raw = value.to_bytes(max(1, (length + 7) // 8), 'little')
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder='little')
    return bits[:length].astype(bool)


def all_tables(n: int) -> np.ndarray:
    """Every Boolean function on n coordinates; row r is the table whose integer value is r."""
    if not 0 <= n <= MAX_ENUMERABLE_N:
        raise CapExceededError(f"Exhaustive enumeration supports n <= {MAX_ENUMERABLE_N}, got {n}")
    length = table_length(n)
    rows = np.arange(1 << length, dtype=np.uint32)[:, None]
    return ((rows >> np.arange(length, dtype=np.uint32)) & np.uint32(1)).astype(bool)


def random_tables(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=(count, table_length(n)), dtype=np.uint8).astype(bool)
