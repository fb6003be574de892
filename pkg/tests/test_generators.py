import os
import sys
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from core.boolean_function import BooleanFunction
from core.errors import CapExceededError, CoordinateError, DimensionError, SpecError
from core.generators import (FunctionSpec, constant, dual_tribes, junta_embed, lex_segment, majority,
                             parity, random_function, random_monotone, sharpness_example, subcube,
                             tribes)
from core.influence import influences, report, total_influence


def all_points(n):
    """Rows in truth-table order: row x holds the bits of x, coordinate 1 first."""
    idx = np.arange(1 << n)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(bool)


def brute_total_influence(f):
    flips = 0
    for x in range(1 << f.n):
        for k in range(f.n):
            flips += f.table[x] != f.table[x ^ (1 << k)]
    return Fraction(int(flips), 1 << f.n)


def test_tribes_measures():
    assert tribes(2, 4).measure() == Fraction(175, 256)
    assert tribes(1, 5).measure() == 1 - Fraction(1, 32)
    assert tribes(3, 1).measure() == Fraction(1, 8)


def test_dual_tribes_measures():
    assert dual_tribes(2, 4).measure() == Fraction(81, 256)
    assert dual_tribes(1, 1) == BooleanFunction(1, [0, 1])


def test_dual_tribes_is_complemented_flipped_tribes():
    for w, s in ((2, 3), (3, 2), (1, 4)):
        n = w * s
        assert dual_tribes(w, s) == tribes(w, s).negate_inputs(range(1, n + 1)).complement()


def test_dual_tribes_influence_matches_enumeration():
    f = dual_tribes(2, 4)
    assert total_influence(f) == brute_total_influence(f)


def test_sharpness_example():
    f = sharpness_example(2, 2)
    assert f.n == 10
    assert f.measure() == Fraction(81, 1024)
    assert sharpness_example(2, 0) == dual_tribes(2, 4)


def test_sharpness_excess_does_not_depend_on_l():
    base = report(sharpness_example(2, 0)).M
    for l in range(1, 5):
        assert report(sharpness_example(2, l)).M == pytest.approx(base, abs=1e-9)


def test_sharpness_cap():
    with pytest.raises(CapExceededError):
        sharpness_example(3, 1)


def test_lex_segment_half_is_dictator():
    assert lex_segment(4, 8) == BooleanFunction.from_callable(4, lambda x: x[0])


def test_lex_segment_power_of_two_is_subcube():
    for k in range(0, 4):
        f = lex_segment(4, 1 << (4 - k))
        assert f == subcube(4, pos=range(1, k + 1))
        assert report(f).M == pytest.approx(0.0, abs=1e-12)


def test_lex_segment_three_of_eight():
    f = lex_segment(3, 3)
    expected = BooleanFunction.from_callable(3, lambda x: x[0] & (x[1] | x[2]))
    assert f == expected
    assert influences(f) == [Fraction(3, 4), Fraction(1, 4), Fraction(1, 4)]
    assert total_influence(f) == Fraction(5, 4)


def test_lex_segment_endpoints_and_counts():
    assert lex_segment(3, 0) == constant(3, 0)
    assert lex_segment(3, 8) == constant(3, 1)
    for m in range(9):
        assert lex_segment(3, m).count() == m
    points = np.ones((4, 40), dtype=bool)
    assert not FunctionSpec.parse("lex-segment:n=40,m=0").evaluate_points(points).any()


def test_lex_segment_rejects_bad_m():
    with pytest.raises(SpecError):
        lex_segment(3, 9)


def test_majority_and_parity():
    assert majority(3).measure() == Fraction(1, 2)
    assert total_influence(majority(3)) == Fraction(3, 2)
    assert parity(4).measure() == Fraction(1, 2)
    with pytest.raises(SpecError):
        majority(4)


def test_constant_generator():
    assert constant(3) == BooleanFunction.constant(3, 0)
    assert constant(3, 1).measure() == 1


def test_junta_embed():
    f = junta_embed(BooleanFunction.from_hex("n=2:8"), 5, {2, 4})
    assert influences(f) == [0, Fraction(1, 2), 0, Fraction(1, 2), 0]
    with pytest.raises(CoordinateError):
        junta_embed(BooleanFunction.from_hex("n=2:8"), 5, [2, 2])
    with pytest.raises(CoordinateError):
        junta_embed(BooleanFunction.from_hex("n=2:8"), 5, [2, 6])


def test_random_function_is_reproducible():
    assert random_function(4, 7) == random_function(4, 7)
    assert random_function(6, 1) != random_function(6, 2)


def test_random_function_with_measure_has_exact_count():
    for n, mu in ((4, Fraction(1, 8)), (6, "1/3"), (8, 0.25), (5, 0), (5, 1)):
        f = random_function(n, 11, mu=mu)
        assert f.count() == int(Fraction(str(mu)) * (1 << n))
    assert random_function(7, 3, mu="1/4") == random_function(7, 3, mu="1/4")
    assert random_function(7, 3, mu="1/4") != random_function(7, 4, mu="1/4")


def test_random_spec_with_measure():
    spec = FunctionSpec.parse("random:n=6,seed=2,mu=1/8")
    assert spec.params["mu"] == Fraction(1, 8)
    assert spec.materialize().measure() == Fraction(1, 8)
    assert spec.to_text() == "random:seed=2,mu=1/8,n=6"
    assert FunctionSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(SpecError):
        FunctionSpec.parse("random:n=6,mu=3/2")
    with pytest.raises(SpecError):
        random_function(4, 0, mu="half")


def test_random_monotone_is_monotone():
    for seed in range(5):
        f = random_monotone(6, seed)
        for x in range(1 << 6):
            for k in range(6):
                assert f.table[x] <= f.table[x | (1 << k)]


def test_spec_parse_and_materialize():
    assert FunctionSpec.parse("tribes:w=2,s=4").materialize().measure() == Fraction(175, 256)
    cube = FunctionSpec.parse("subcube:k=3,n=8").materialize()
    assert cube.n == 8
    assert cube.measure() == Fraction(1, 8)
    assert FunctionSpec.parse("n=2:8").materialize() == BooleanFunction.from_hex("n=2:8")
    dnf_spec = FunctionSpec.parse("dnf:n=4,terms=1&!2|2&3")
    assert dnf_spec.materialize().measure() == Fraction(1, 2)
    assert FunctionSpec.parse("subcube:n=4,pos=1+2,neg=4").materialize() == subcube(4, [1, 2], [4])


def test_spec_text_round_trip():
    for text in ("tribes:w=2,s=4", "subcube:k=3,n=8", "n=3:e8", "lex-segment:n=5,m=7",
                 "random:seed=3,n=6", "dnf:n=4,terms=1&!2|2&3"):
        spec = FunctionSpec.parse(text)
        assert spec.to_text() == text
        assert FunctionSpec.from_dict(spec.to_dict()) == spec


def test_spec_errors():
    with pytest.raises(SpecError):
        FunctionSpec.parse("nope:n=3")
    with pytest.raises(SpecError):
        FunctionSpec.parse("tribes:w=2")
    with pytest.raises(SpecError):
        FunctionSpec.parse("tribes:w=2,s=4,q=1")
    with pytest.raises(SpecError):
        FunctionSpec.parse("tribes:w=two,s=4")
    with pytest.raises(SpecError):
        FunctionSpec.parse("majority:n=4")
    with pytest.raises(SpecError):
        FunctionSpec.parse("parity:n")


def test_spec_arity():
    assert FunctionSpec.parse("dual-tribes:w=4,s=16").arity == 64
    assert FunctionSpec.parse("sharpness:w=2,l=3").arity == 11
    assert FunctionSpec.parse("n=5:0000ffff").arity == 5


def test_spec_beyond_cap_only_evaluates_points():
    spec = FunctionSpec.parse("sharpness:w=3,l=1")
    with pytest.raises(CapExceededError):
        spec.materialize()
    points = np.ones((4, 25), dtype=bool)
    assert spec.evaluate_points(points).tolist() == [True] * 4
    with pytest.raises(CapExceededError):
        FunctionSpec.parse("random:n=30").evaluate_points(np.zeros((2, 30), dtype=bool))


def test_point_evaluation_matches_tables():
    for text in ("tribes:w=2,s=3", "dual-tribes:w=3,s=2", "sharpness:w=1,l=4", "lex-segment:n=6,m=21",
                 "parity:n=6", "majority:n=5", "subcube:n=6,pos=2,neg=5", "random:n=6,seed=3",
                 "random-monotone:n=6,seed=4", "dnf:n=6,terms=1&!2|2&3&6", "constant:n=6,value=1",
                 "n=2:6"):
        spec = FunctionSpec.parse(text)
        f = spec.materialize()
        assert spec.evaluate_points(all_points(f.n)).tolist() == f.table.tolist()


def test_point_evaluation_checks_width():
    with pytest.raises(DimensionError):
        FunctionSpec.parse("parity:n=4").evaluate_points(np.zeros((3, 5), dtype=bool))


def test_spec_from_function():
    f = random_function(3, 8)
    assert FunctionSpec.from_function(f).materialize() == f


def test_every_sub_cube_of_small_cube_has_zero_excess():
    for codes in product(range(3), repeat=3):
        pos = [k + 1 for k, c in enumerate(codes) if c == 0]
        neg = [k + 1 for k, c in enumerate(codes) if c == 1]
        rep = report(subcube(3, pos, neg))
        assert rep.M == pytest.approx(0.0, abs=1e-12)
