import itertools

import numpy as np
import pytest

from topocut.cuts import (Cut, CutPool, cut_value, exclusion_list, make_cut,
                          trust_region_row)


def test_cut_reproduces_anchor_value():
    rng = np.random.default_rng(0)
    anchor = (rng.random((12, 1)) < 0.5).astype(float)
    coeffs = rng.standard_normal((12, 1))
    cut = make_cut(0, anchor, 37.25, coeffs, 0.3)
    assert cut_value(cut, anchor) == pytest.approx(37.25, rel=1e-12)


def test_cut_linear_form():
    anchor = np.array([[1.0], [0.0]])
    coeffs = np.array([[2.0], [-3.0]])
    cut = make_cut(0, anchor, 5.0, coeffs, 0.1)
    assert cut.constant == pytest.approx(3.0)
    assert cut_value(cut, np.array([[0.0], [1.0]])) == pytest.approx(0.0)


def test_make_cut_checks_shapes():
    with pytest.raises(ValueError):
        make_cut(0, np.zeros((3, 1)), 0.0, np.zeros((4, 1)), 0.1)


def hamming_lhs(cut, values):
    coeffs, constant, _ = trust_region_row(cut)
    return float((coeffs * values).sum()) + constant


def test_trust_row_zero_at_binary_anchor():
    rng = np.random.default_rng(1)
    for _ in range(10):
        anchor = (rng.random((9, 1)) < 0.5).astype(float)
        cut = make_cut(0, anchor, 1.0, np.zeros((9, 1)), 0.25)
        assert hamming_lhs(cut, anchor) == pytest.approx(0.0, abs=1e-12)


def test_trust_row_single_material_exhaustive():
    # the left side must equal the fraction of flipped elements for every
    # pair of binary designs on every tiny mesh
    for n_e in (2, 4, 6):
        designs = [np.array(bits, dtype=float)[:, None]
                   for bits in itertools.product((0, 1), repeat=n_e)]
        for anchor in designs:
            cut = make_cut(0, anchor, 0.0, np.zeros((n_e, 1)), 0.5)
            for x in designs:
                expect = float(np.abs(anchor - x).sum()) / n_e
                assert hamming_lhs(cut, x) == pytest.approx(expect, abs=1e-12)


def test_trust_row_two_materials_exhaustive():
    # occupancy view: per element the states are void / mat1 / mat2; the
    # row charges occupancy changes, scaled by n_M * n_e
    n_e, n_m = 3, 2
    states = [np.array(v, dtype=float) for v in
              ((0, 0), (1, 0), (0, 1))]
    designs = [np.stack(combo) for combo in
               itertools.product(states, repeat=n_e)]
    for anchor in designs[::screen_step(len(designs))]:
        cut = make_cut(0, anchor, 0.0, np.zeros((n_e, n_m)), 0.5)
        occ_a = anchor.sum(axis=1)
        for x in designs:
            occ_x = x.sum(axis=1)
            expect = float(((occ_x - occ_a) ** 2).sum()) / (n_m * n_e)
            assert hamming_lhs(cut, x) == pytest.approx(expect, abs=1e-12)


def screen_step(n):
    return max(1, n // 9)


def test_trust_row_gray_anchor_constant():
    anchor = np.full((10, 1), 0.4)
    cut = make_cut(0, anchor, 0.0, np.zeros((10, 1)), 0.4)
    coeffs, constant, bound = trust_region_row(cut)
    assert constant == pytest.approx(0.16)
    assert bound == 0.4
    # at the anchor itself the row reads rho - rho^2 per element
    assert hamming_lhs(cut, anchor) == pytest.approx(0.4 - 0.16)


def test_trust_row_bound_is_the_cut_radius():
    anchor = np.zeros((4, 1))
    for radius in (0.05, 0.3, 0.6):
        cut = make_cut(0, anchor, 0.0, np.zeros((4, 1)), radius)
        _, _, bound = trust_region_row(cut)
        assert bound == radius


def test_pool_indices_and_clear():
    pool = CutPool()
    a = make_cut(0, np.zeros((2, 1)), 0.0, np.zeros((2, 1)), 0.1)
    pool.add(a)
    with pytest.raises(ValueError):
        pool.add(make_cut(2, np.zeros((2, 1)), 0.0, np.zeros((2, 1)), 0.1))
    pool.add(make_cut(1, np.zeros((2, 1)), 0.0, np.zeros((2, 1)), 0.1))
    pool.exclusions.append(frozenset([0]))
    assert len(pool) == 2
    assert exclusion_list(pool) == [frozenset([0])]
    copy = exclusion_list(pool)
    copy.append(frozenset([1]))
    assert len(pool.exclusions) == 1
    pool.clear()
    assert len(pool) == 0 and pool.exclusions == []


def test_radius_is_frozen_per_cut():
    # later radius decisions never touch existing cuts
    pool = CutPool()
    pool.add(make_cut(0, np.zeros((2, 1)), 0.0, np.zeros((2, 1)), 0.4))
    pool.add(make_cut(1, np.ones((2, 1)), 0.0, np.zeros((2, 1)), 0.1))
    assert [c.radius for c in pool.cuts] == [0.4, 0.1]
