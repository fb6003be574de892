import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from core.boolean_function import (BooleanFunction, check_dimension, complement, evaluate, measure,
                                   negate_inputs, permute, restrict)
from core.errors import CapExceededError, CoordinateError, DimensionError, SpecError
from core.generators import junta_embed, parity, random_function, tribes


def and2():
    return BooleanFunction.from_hex("n=2:8")


def test_evaluate_and():
    f = and2()
    assert evaluate(f, (1, 1)) == 1
    assert evaluate(f, (0, 1)) == 0
    assert evaluate(f, (1, 0)) == 0


def test_evaluate_parity():
    assert evaluate(parity(3), (1, 1, 0)) == 0
    assert evaluate(parity(3), (1, 1, 1)) == 1


def test_evaluate_dimension_mismatch():
    with pytest.raises(DimensionError):
        evaluate(and2(), (1, 0, 1))


def test_measure_examples():
    assert measure(and2()) == Fraction(1, 4)
    assert measure(BooleanFunction.constant(3, 0)) == 0
    assert measure(tribes(2, 4)) == Fraction(175, 256)


def test_restrict_and():
    f = and2()
    dictator = restrict(f, 1, 1)
    assert dictator == BooleanFunction(1, [0, 1])
    assert measure(dictator) == Fraction(1, 2)
    assert restrict(f, 1, 0) == BooleanFunction.constant(1, 0)


def test_restrict_parity_gives_complemented_parity():
    assert restrict(parity(3), 2, 1) == complement(parity(2))


def test_restrict_errors():
    with pytest.raises(CoordinateError):
        restrict(parity(3), 4, 1)
    with pytest.raises(DimensionError):
        restrict(BooleanFunction(1, [0, 1]), 1, 0)


def test_permute_dictator():
    x1 = BooleanFunction.from_callable(2, lambda x: x[0])
    x2 = BooleanFunction.from_callable(2, lambda x: x[1])
    assert permute(x1, (2, 1)) == x2


def test_permute_rejects_non_permutation():
    with pytest.raises(CoordinateError):
        permute(and2(), (1, 1))


def test_negate_inputs_and():
    nor = BooleanFunction.from_callable(2, lambda x: (1 - x[0]) & (1 - x[1]))
    assert negate_inputs(and2(), {1, 2}) == nor


def test_negate_inputs_rejects_bad_coordinate():
    with pytest.raises(CoordinateError):
        negate_inputs(and2(), {3})


def test_complement_constant():
    assert complement(BooleanFunction.constant(4, 0)) == BooleanFunction.constant(4, 1)


def test_measure_invariants_on_random_functions():
    for seed in range(5):
        f = random_function(6, seed)
        assert measure(complement(f)) == 1 - measure(f)
        for i in range(1, 7):
            assert measure(f) == (measure(restrict(f, i, 0)) + measure(restrict(f, i, 1))) / 2
        assert measure(permute(f, (3, 1, 2, 6, 5, 4))) == measure(f)
        assert measure(negate_inputs(f, {2, 5})) == measure(f)


def test_junta_restriction_round_trip():
    g = random_function(2, 3)
    f = junta_embed(g, 5, [2, 4])
    assert f.restrict(5, 0).restrict(3, 0).restrict(1, 0) == g


def test_hex_format():
    assert and2().to_hex() == "n=2:8"
    assert BooleanFunction(1, [0, 1]).to_hex() == "n=1:2"
    f = random_function(5, 11)
    assert BooleanFunction.from_hex(f.to_hex()) == f


def test_hex_rejects_malformed_text():
    with pytest.raises(SpecError):
        BooleanFunction.from_hex("n=2:18")
    with pytest.raises(SpecError):
        BooleanFunction.from_hex("and")
    with pytest.raises(SpecError):
        BooleanFunction.from_hex("n=2:8F")


def test_dimension_caps():
    with pytest.raises(DimensionError):
        check_dimension(0)
    with pytest.raises(CapExceededError):
        check_dimension(25)
    with pytest.raises(CapExceededError):
        check_dimension(5, cap=4)


def test_table_length_checked():
    with pytest.raises(DimensionError):
        BooleanFunction(3, np.zeros(4, dtype=bool))


def test_functions_are_immutable():
    f = and2()
    with pytest.raises(AttributeError):
        f.n = 3
    with pytest.raises(ValueError):
        f.table[0] = True


def test_equality_and_hash():
    assert and2() == BooleanFunction(2, [0, 0, 0, 1])
    assert hash(and2()) == hash(BooleanFunction(2, [0, 0, 0, 1]))
    assert and2() != BooleanFunction(2, [0, 0, 1, 1])
