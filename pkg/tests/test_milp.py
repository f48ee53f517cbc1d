"""Solver checks: LP relaxation, branch-and-bound vs exhaustion, fast paths."""

import numpy as np
import pytest

from topocut.milp import (
    BinaryProgram,
    MilpRow,
    brute_force,
    dump,
    solve,
    solve_lp_relaxation,
    _lagrangian_eta,
    _tighten_bound,
    _two_row_exact,
)


def random_program(rng, n=None, with_eta=False, with_groups=False,
                   with_fixings=False, unit_rows=False):
    """One random instance; coefficients rounded so ties actually occur."""
    if n is None:
        n = int(rng.integers(3, 13))
    rows = []
    objective = np.round(rng.normal(0.0, 3.0, n), 2)
    if with_eta:
        objective = np.zeros(n)
        for _ in range(int(rng.integers(1, 4))):
            c = np.round(rng.normal(0.0, 5.0, n), 2)
            rows.append(MilpRow(c, float(np.round(rng.normal(0.0, 4.0), 2)),
                                -1.0))
    for _ in range(int(rng.integers(1, 4))):
        if unit_rows:
            g = float(rng.choice([1.0, 0.5, 0.125]))
            s = rng.choice([-1.0, 1.0], n)
            if rng.random() < 0.4:
                s = np.ones(n)
            c = s * g
            bound = g * (float(rng.integers(-n // 2, n + 1))
                         + (0.37 if rng.random() < 0.3 else 0.0))
        else:
            c = np.round(rng.normal(0.0, 2.0, n), 2)
            bound = float(np.round(rng.uniform(-1.0, n), 2))
        rows.append(MilpRow(c, bound, 0.0))
    groups = []
    if with_groups:
        pool = rng.permutation(n)
        i = 0
        while i + 2 <= n and len(groups) < 2:
            size = int(rng.integers(2, 4))
            groups.append(np.asarray(pool[i:i + size], dtype=int))
            i += size
    fixings = {}
    if with_fixings:
        for idx in rng.choice(n, size=min(2, n), replace=False):
            fixings[int(idx)] = int(rng.integers(0, 2))
    return BinaryProgram(n_vars=n, objective=objective, rows=rows,
                         groups=groups, fixings=fixings, has_eta=with_eta,
                         offset=float(np.round(rng.normal(), 2)))


def check_feasible(program, result):
    x = result.assignment.astype(float)
    for idx, val in program.fixings.items():
        assert x[idx] == val
    for g in program.groups:
        assert x[np.asarray(g, dtype=int)].sum() <= 1
    for row in program.rows:
        lhs = float(row.coeffs @ x)
        if row.eta_coef != 0.0:
            assert lhs + row.eta_coef * result.eta <= row.bound + 1e-7
        else:
            assert lhs <= row.bound + 1e-7


# --- bound tightening -------------------------------------------------------

def test_tighten_bound_floors_onto_lattice():
    assert _tighten_bound(np.array([2.0, 4.0, -6.0]), 7.0) == 6.0
    assert _tighten_bound(np.array([0.5, 0.5, 0.5]), 1.3) == 1.0
    assert _tighten_bound(np.array([1.0, 1.0]), -0.4) == -1.0


def test_tighten_bound_leaves_irrational_ratios_alone():
    assert _tighten_bound(np.array([1.0, np.sqrt(2.0)]), 1.7) == 1.7
    assert _tighten_bound(np.zeros(3), 2.5) == 2.5


# --- LP relaxation ----------------------------------------------------------

def test_lp_relaxation_known_vertex():
    # min -x0 - 2 x1 st x0 + x1 <= 1.5: vertex x = (0.5, 1), value -2.5
    program = BinaryProgram(
        n_vars=2, objective=np.array([-1.0, -2.0]),
        rows=[MilpRow(np.array([1.0, 1.0]), 1.5)])
    got = solve_lp_relaxation(program)
    assert got["status"] == "optimal"
    assert got["value"] == pytest.approx(-2.5, abs=1e-9)
    assert got["fractional"] == [0]
    assert got["point"][1] == pytest.approx(1.0, abs=1e-9)


def test_lp_relaxation_fractional_support_is_small():
    # a vertex can't have more fractional entries than active rows
    rng = np.random.default_rng(7)
    for _ in range(25):
        program = random_program(rng, with_groups=True)
        got = solve_lp_relaxation(program)
        if got["status"] != "optimal":
            continue
        assert len(got["fractional"]) <= len(program.rows) + len(program.groups)


def test_lp_relaxation_detects_infeasible():
    program = BinaryProgram(
        n_vars=3, objective=np.zeros(3),
        rows=[MilpRow(np.ones(3), -1.0)])
    assert solve_lp_relaxation(program)["status"] == "infeasible"


# --- exhaustive equivalence -------------------------------------------------

def test_solve_matches_brute_force_across_families():
    rng = np.random.default_rng(91)
    kinds = [
        dict(),
        dict(with_groups=True),
        dict(with_eta=True),
        dict(with_fixings=True),
        dict(with_eta=True, unit_rows=True),
        dict(unit_rows=True),
        dict(with_eta=True, with_groups=True),
    ]
    checked = 0
    for trial in range(84):
        program = random_program(rng, **kinds[trial % len(kinds)])
        got = solve(program)
        ref = brute_force(program)
        assert got.status == ref.status, f"trial {trial}"
        if got.status == "optimal":
            scale = max(1.0, abs(ref.value))
            assert abs(got.value - ref.value) <= 1e-6 * scale, f"trial {trial}"
            check_feasible(program, got)
            checked += 1
    assert checked > 40  # the families shouldn't be mostly infeasible


def test_eta_reported_as_max_cut():
    cuts = [MilpRow(np.array([2.0, -1.0, 0.5]), 1.0, -1.0),
            MilpRow(np.array([-3.0, 0.5, 1.0]), -0.5, -1.0)]
    program = BinaryProgram(n_vars=3, objective=np.zeros(3), rows=cuts,
                            has_eta=True)
    got = solve(program)
    x = got.assignment.astype(float)
    etas = [float(r.coeffs @ x) - r.bound for r in cuts]
    assert got.eta == pytest.approx(max(etas), abs=1e-9)
    assert got.value == pytest.approx(max(etas), abs=1e-9)


def test_infeasible_program_is_reported():
    program = BinaryProgram(
        n_vars=4, objective=np.arange(4.0),
        rows=[MilpRow(np.ones(4), -0.5)])
    assert solve(program).status == "infeasible"
    assert brute_force(program).status == "infeasible"


def test_groups_enforced_and_fixings_propagate():
    # fixing x0 = 1 inside a group must force x1 out even though the
    # objective would rather keep both
    program = BinaryProgram(
        n_vars=3, objective=np.array([-1.0, -5.0, -2.0]),
        groups=[np.array([0, 1])], fixings={0: 1})
    got = solve(program)
    assert got.assignment[0] == 1
    assert got.assignment[1] == 0
    assert got.assignment[2] == 1
    assert got.value == pytest.approx(-3.0)


def test_offset_carried_through():
    program = BinaryProgram(n_vars=2, objective=np.array([1.0, 1.0]),
                            offset=4.25)
    assert solve(program).value == pytest.approx(4.25)
    assert brute_force(program).value == pytest.approx(4.25)


# --- search mechanics -------------------------------------------------------

def test_node_limit_is_honest():
    # mixed magnitudes dodge the closed-form paths, so the tree must run
    program = BinaryProgram(
        n_vars=2, objective=np.array([-5.0, -1.0]),
        rows=[MilpRow(np.array([3.0, 1.0]), 2.0)])
    got = solve(program, node_limit=1)
    assert got.status == "node_limit"
    full = solve(program)
    assert full.status == "optimal"
    assert full.value == pytest.approx(-1.0)
    assert full.nodes > 1


def test_solve_is_deterministic():
    rng = np.random.default_rng(5)
    program = random_program(rng, n=10, with_eta=True, unit_rows=True)
    first = solve(program)
    second = solve(program)
    assert first.value == second.value
    assert first.status == second.status
    assert np.array_equal(first.assignment, second.assignment)


# --- closed-form fast paths -------------------------------------------------

def test_two_row_exact_matches_brute_force():
    rng = np.random.default_rng(31)
    for n in (6, 10, 14):
        for _ in range(10):
            signs = rng.choice([-1.0, 1.0], n)
            rows = [MilpRow(signs / n, float(rng.integers(-3, 6)) / n),
                    MilpRow(np.ones(n) / n, float(rng.integers(0, n)) / n)]
            program = BinaryProgram(
                n_vars=n, objective=np.round(rng.normal(0, 2, n), 2),
                rows=rows)
            direct = _two_row_exact(program)
            assert direct is not None
            ref = brute_force(program)
            assert direct.status == ref.status
            if ref.status == "optimal":
                assert direct.value == pytest.approx(ref.value, abs=1e-9)
                assert direct.nodes == 0


def test_two_row_exact_rejects_other_shapes():
    n = 5
    uniform = MilpRow(np.ones(n), 2.0)
    split = MilpRow(np.array([1.0, -1.0, 1.0, -1.0, 1.0]), 1.0)
    ragged = MilpRow(np.array([1.0, 2.0, 1.0, 1.0, 1.0]), 2.0)
    obj = np.arange(n, dtype=float)
    assert _two_row_exact(BinaryProgram(n, obj, [uniform])) is None
    assert _two_row_exact(BinaryProgram(n, obj, [uniform, ragged])) is None
    assert _two_row_exact(BinaryProgram(n, obj, [split, split])) is None
    assert _two_row_exact(
        BinaryProgram(n, obj, [uniform, split], fixings={0: 1})) is None


def test_dual_bound_closes_pair_programs():
    # two cuts + per-anchor move rows + a resource row: the family that
    # branch-and-bound grinds on; the dual certificate must match
    # exhaustion exactly
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(6, 13))
        anchor0 = rng.integers(0, 2, n).astype(float)
        anchor1 = rng.integers(0, 2, n).astype(float)
        rows = []
        for _ in range(2):
            c = np.round(rng.normal(0.0, 8.0, n), 2)
            rows.append(MilpRow(c, float(np.round(rng.normal(0, 5), 2)), -1.0))
        for anchor in (anchor0, anchor1):
            s = np.where(anchor > 0.5, -1.0, 1.0) / n
            rows.append(MilpRow(s, (float(rng.integers(1, n)) - anchor.sum()) / n))
        rows.append(MilpRow(np.ones(n) / n, float(rng.integers(1, n)) / n))
        program = BinaryProgram(n_vars=n, objective=np.zeros(n), rows=rows,
                                has_eta=True)
        got = solve(program)
        ref = brute_force(program)
        assert got.status == ref.status
        if ref.status == "optimal":
            assert got.value == pytest.approx(ref.value, rel=1e-9, abs=1e-9)


def test_dual_bound_requires_clean_structure():
    n = 4
    cut = MilpRow(np.arange(1.0, n + 1.0), 0.5, -1.0)
    move = MilpRow(np.array([1.0, -1.0, 1.0, 1.0]) / n, 0.25)
    grouped = BinaryProgram(n, np.zeros(n), [cut, move], has_eta=True,
                            groups=[np.array([0, 1])])
    assert _lagrangian_eta(grouped) is None
    ragged = BinaryProgram(
        n, np.zeros(n),
        [cut, MilpRow(np.array([1.0, 2.0, 1.0, 1.0]), 1.0)], has_eta=True)
    assert _lagrangian_eta(ragged) is None


def test_dual_bound_ignores_vacuous_rows():
    # an all-zero row with slack bound constrains nothing and must not
    # disqualify the program from the dual fast path
    n = 6
    rng = np.random.default_rng(3)
    rows = [MilpRow(np.round(rng.normal(0, 4, n), 2), 1.0, -1.0),
            MilpRow(np.round(rng.normal(0, 4, n), 2), -2.0, -1.0),
            MilpRow(np.zeros(n), 0.15),
            MilpRow(np.ones(n) / n, 3.0 / n)]
    program = BinaryProgram(n_vars=n, objective=np.zeros(n), rows=rows,
                            has_eta=True)
    assert _lagrangian_eta(program) is not None
    got = solve(program)
    ref = brute_force(program)
    assert got.status == "optimal"
    assert got.value == pytest.approx(ref.value, rel=1e-9)
    # a violated all-zero row is a different story: structure bails
    rows[2] = MilpRow(np.zeros(n), -0.5)
    bad = BinaryProgram(n_vars=n, objective=np.zeros(n), rows=rows,
                        has_eta=True)
    assert _lagrangian_eta(bad) is None
    assert solve(bad).status == "infeasible"


# --- dump -------------------------------------------------------------------

def test_dump_writes_readable_instance(tmp_path):
    program = BinaryProgram(
        n_vars=3, objective=np.array([1.0, -2.0, 0.5]),
        rows=[MilpRow(np.array([1.0, 1.0, 0.0]), 1.0),
              MilpRow(np.array([2.0, 0.0, 1.0]), 1.5, -1.0)],
        groups=[np.array([1, 2])], fixings={0: 1}, has_eta=True)
    target = tmp_path / "instance.mps"
    dump(program, str(target))
    text = target.read_text()
    for section in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"):
        assert section in text
    assert text.count("BV BND") == 2
    assert "FX BND" in text
    assert "ETA" in text
