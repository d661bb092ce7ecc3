"""Divided-difference kernel: closed forms, confluent limits, table
structure, and agreement with the generic recursion and the
extended-precision oracle."""

import math

import numpy as np
import pytest

from ddyson import (
    DegenerateNodesError,
    dd_recursive,
    dd_recursive_table,
    exp_dd,
    exp_dd_batch,
    exp_dd_stats,
    exp_dd_table,
    shift_inputs,
)
from ddyson.oracles import exp_dd_highprec

# t = 0.3 over [1.7, -0.4, 0.9, 0.0], frozen from the 60-digit recursion
# (stable against an 80-digit rerun).
FROZEN_4NODE = 0.000734560381643418 + 0.004412511618075642j


# -- closed forms ------------------------------------------------------------

def test_single_node_is_plain_exponential():
    for t in (0.0, 0.4, -1.3):
        for x in (0.7, -2.0 + 0.3j):
            assert exp_dd(t, [x]) == pytest.approx(np.exp(-1j * t * x), abs=1e-16)


def test_two_distinct_nodes_difference_quotient():
    t, a, b = 0.8, 1.3, -0.5
    expected = (np.exp(-1j * t * a) - np.exp(-1j * t * b)) / (a - b)
    assert exp_dd(t, [a, b]) == pytest.approx(expected, rel=1e-14)


def test_repeated_pair_confluent_limit():
    t, x = 0.6, 1.1
    expected = -1j * t * np.exp(-1j * t * x)
    assert exp_dd(t, [x, x]) == pytest.approx(expected, rel=1e-14)


def test_repeated_nodes_general_order():
    # q+1 equal nodes: (-it)^q e^{-itx} / q!
    t, x = 0.9, -0.7
    for q in (1, 3, 6, 10):
        expected = (-1j * t) ** q * np.exp(-1j * t * x) / math.factorial(q)
        assert exp_dd(t, [x] * (q + 1)) == pytest.approx(expected, rel=1e-13)


def test_frozen_four_node_value():
    value = exp_dd(0.3, [1.7, -0.4, 0.9, 0.0])
    assert value == pytest.approx(FROZEN_4NODE, rel=1e-12)


def test_zero_time_collapses_to_constant_function():
    assert exp_dd(0.0, [1.0]) == pytest.approx(1.0)
    assert exp_dd(0.0, [1.0, 2.0, 3.0]) == pytest.approx(0.0, abs=1e-16)


# -- invariants --------------------------------------------------------------

def test_permutation_invariance():
    rng = np.random.default_rng(11)
    for _ in range(50):
        q = int(rng.integers(1, 9))
        nodes = rng.uniform(-10, 10, q + 1) + 1j * rng.uniform(-2, 2, q + 1)
        t = float(rng.uniform(-1, 1))
        base = exp_dd(t, nodes)
        shuffled = exp_dd(t, rng.permutation(nodes))
        assert abs(shuffled - base) <= 1e-12 * abs(base)


def test_shift_identity_random_complex():
    rng = np.random.default_rng(12)
    for _ in range(200):
        q = int(rng.integers(0, 11))
        nodes = rng.uniform(-5, 5, q + 1) + 1j * rng.uniform(-2, 2, q + 1)
        c = complex(rng.uniform(-5, 5), rng.uniform(-2, 2))
        t = float(rng.uniform(0, 1))
        lhs = exp_dd(t, nodes)
        rhs = np.exp(-1j * t * c) * exp_dd(t, shift_inputs(nodes, c))
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1e-300)


def test_simplex_volume_bound_real_nodes():
    # real nodes ending in 0, real t >= 0: |value| <= t^q / q!
    rng = np.random.default_rng(13)
    for _ in range(100):
        q = int(rng.integers(1, 10))
        nodes = np.append(rng.uniform(-20, 20, q), 0.0)
        t = float(rng.uniform(0, 1))
        bound = t ** q / math.factorial(q)
        assert abs(exp_dd(t, nodes)) <= bound * (1 + 1e-12) + 1e-300


def test_recursion_consistency_well_separated():
    # gaps >= 0.6 and t >= 0.3 keep the recursion oracle itself accurate;
    # clustered nodes or tiny t cancel it far below the 1e-10 target.
    rng = np.random.default_rng(14)
    for _ in range(100):
        q = int(rng.integers(1, 7))
        nodes = np.sort(rng.uniform(-4, 4, q + 1)) + np.arange(q + 1) * 0.6
        t = float(rng.uniform(0.3, 1.0))
        reference = dd_recursive(np.exp(-1j * t * nodes), nodes)
        assert abs(exp_dd(t, nodes) - reference) <= 1e-10 * abs(reference)


# -- generic recursion oracle ------------------------------------------------

def test_recursive_linear_function_first_difference():
    nodes = np.array([2.0, -1.0])
    assert dd_recursive(nodes, nodes) == pytest.approx(1.0)


def test_recursive_matches_explicit_partial_fraction_sum():
    rng = np.random.default_rng(15)
    t = 0.45
    nodes = rng.uniform(-4, 4, 5)
    fvals = np.exp(-1j * t * nodes)
    explicit = sum(
        fvals[j] / np.prod([nodes[j] - nodes[k] for k in range(5) if k != j])
        for j in range(5)
    )
    assert dd_recursive(fvals, nodes) == pytest.approx(explicit, rel=1e-10)
    assert exp_dd(t, nodes) == pytest.approx(explicit, rel=1e-10)


def test_recursive_rejects_coincident_nodes():
    with pytest.raises(DegenerateNodesError):
        dd_recursive([1.0, 1.0], [2.0, 2.0])
    with pytest.raises(DegenerateNodesError):
        dd_recursive([1.0, 1.0], [2.0, 2.0 + 1e-14])


# -- tables ------------------------------------------------------------------

def test_table_diagonal_holds_function_values():
    t = 0.7
    nodes = np.array([0.3, -1.2, 2.4])
    table = exp_dd_table(t, nodes)
    for i, x in enumerate(nodes):
        assert table.entry(i, i) == pytest.approx(np.exp(-1j * t * x), rel=1e-14)


def test_table_entries_satisfy_gap_recursion():
    t = 0.5
    nodes = np.array([-3.0, -1.0, 0.5, 2.0, 4.5])
    table = exp_dd_table(t, nodes)
    n = nodes.size
    for span in range(1, n):
        for i in range(n - span):
            j = i + span
            recursed = (table.entry(i + 1, j) - table.entry(i, j - 1)) / (nodes[j] - nodes[i])
            assert abs(table.entry(i, j) - recursed) <= 1e-10 * abs(table.entry(i, j))


def test_table_top_right_equals_exp_dd():
    t = 0.9
    nodes = np.array([1.0, 1.0, -2.0, 0.3])
    table = exp_dd_table(t, nodes)
    assert table.entry(0, 3) == pytest.approx(exp_dd(t, nodes), rel=1e-13)


def test_recursive_table_agrees_with_exp_table():
    t = 0.4
    nodes = np.array([-2.0, 0.5, 1.5, 3.0])
    rec = dd_recursive_table(np.exp(-1j * t * nodes), nodes, f_label="exp(-i t x)")
    stable = exp_dd_table(t, nodes)
    for i in range(4):
        for j in range(i, 4):
            assert rec.entry(i, j) == pytest.approx(stable.entry(i, j), rel=1e-10)


# -- batch and stats ---------------------------------------------------------

def test_batch_matches_scalar_calls():
    rng = np.random.default_rng(16)
    rows = rng.uniform(-5, 5, (8, 4)) + 1j * rng.uniform(-1, 1, (8, 4))
    t = 0.6
    batched = exp_dd_batch(t, rows)
    for row, value in zip(rows, batched):
        assert value == pytest.approx(exp_dd(t, row), rel=1e-12)


def test_stats_reports_power_of_two_slices():
    _, stats = exp_dd_stats(1.0, np.linspace(-50, 50, 21))
    assert stats.n_slices & (stats.n_slices - 1) == 0
    assert stats.table_ops > 0


# -- extended-precision agreement --------------------------------------------

def test_matches_highprec_oracle_mixed_nodes():
    rng = np.random.default_rng(17)
    for _ in range(10):
        q = int(rng.integers(1, 13))
        nodes = rng.uniform(-30, 30, q + 1) + 1j * rng.uniform(-3, 3, q + 1)
        t = float(rng.uniform(0.05, 1.0))
        reference = exp_dd_highprec(t, nodes)
        assert abs(exp_dd(t, nodes) - reference) <= 1e-10 * abs(reference)


def test_highprec_rejects_duplicates():
    with pytest.raises(DegenerateNodesError):
        exp_dd_highprec(0.5, [1.0, 1.0, 2.0])


# -- argument validation -----------------------------------------------------

def test_rejects_empty_and_nonfinite_inputs():
    with pytest.raises(ValueError):
        exp_dd(0.5, [])
    with pytest.raises(ValueError):
        exp_dd(0.5, [np.inf])
    with pytest.raises(ValueError):
        exp_dd(np.nan, [1.0])
    with pytest.raises(ValueError):
        shift_inputs([1.0], np.inf)


def test_shift_inputs_values():
    assert np.allclose(shift_inputs([1.0, 2.0], 0.0), [1.0, 2.0])
    a, b, t = 2.2, 0.7, 0.9
    shifted = shift_inputs([a, b], b)
    assert np.allclose(shifted, [a - b, 0.0])
    lhs = exp_dd(t, [a, b])
    rhs = np.exp(-1j * t * b) * exp_dd(t, shifted)
    assert lhs == pytest.approx(rhs, rel=1e-12)
