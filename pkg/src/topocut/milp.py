"""Exact solver for the binary master subproblems.

Instances are tiny in row count (a few cuts and trust-region rows plus one
resource row and optional per-element at-most-one groups) but wide in
variables, so the solver is a best-first branch-and-bound whose relaxations
are boxed LPs; basic LP optima then carry at most #rows fractional entries
and the trees stay shallow. The LP engine is scipy's HiGHS dual simplex;
everything above it (bounding, branching, incumbents, proofs of optimality)
lives here. A rounding heuristic at every node keeps the incumbent tight.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

__all__ = [
    "MilpRow",
    "BinaryProgram",
    "MilpResult",
    "solve_lp_relaxation",
    "solve",
    "brute_force",
    "dump",
]

INTEGRALITY_TOL = 1e-6
FEASIBILITY_TOL = 1e-9
GAP_TOL = 1e-9


@dataclass
class MilpRow:
    """One inequality: coeffs . x + eta_coef * eta <= bound."""

    coeffs: np.ndarray
    bound: float
    eta_coef: float = 0.0


@dataclass
class BinaryProgram:
    """minimize objective . x (+ eta) + offset over x in {0,1}^n.

    ``groups`` are at-most-one index sets (sum of members <= 1);
    ``fixings`` pin variables before the search starts. When ``has_eta``
    the program carries one free continuous variable eta with unit
    objective coefficient, used by multi-cut subproblems.
    """

    n_vars: int
    objective: np.ndarray
    rows: list[MilpRow] = field(default_factory=list)
    groups: list[np.ndarray] = field(default_factory=list)
    fixings: dict[int, int] = field(default_factory=dict)
    has_eta: bool = False
    offset: float = 0.0


@dataclass
class MilpResult:
    status: str                      # "optimal" | "infeasible" | "node_limit"
    value: float
    assignment: np.ndarray | None    # (n_vars,) int8
    eta: float | None
    nodes: int
    lp_iterations: int


def _tighten_bound(coeffs: np.ndarray, bound: float) -> float:
    """Floor a row's bound onto the lattice its coefficients generate.

    When every nonzero coefficient is an integer multiple of the smallest
    one, coeffs.x is a multiple of that step for any binary x, so the bound
    can be rounded down to the nearest multiple without excluding a single
    integer point. This closes the fractional-capacity gap that otherwise
    stalls bound-based pruning on resource and trust rows.
    """
    nz = coeffs[coeffs != 0.0]
    if nz.size == 0:
        return bound
    g = float(np.abs(nz).min())
    if g <= 0.0 or not np.isfinite(g):
        return bound
    ratios = nz / g
    if np.abs(ratios - np.rint(ratios)).max() > 1e-9:
        return bound
    floored = math.floor(bound / g + 1e-9) * g
    return min(bound, floored)


class _PreparedLP:
    """Shared LP data; only variable bounds change between tree nodes."""

    def __init__(self, program: BinaryProgram, tighten: bool = False):
        self.program = program
        n = program.n_vars
        self.n = n
        self.ncols = n + (1 if program.has_eta else 0)
        c = np.zeros(self.ncols)
        c[:n] = np.asarray(program.objective, dtype=float)
        if program.has_eta:
            c[n] = 1.0
        self.c = c
        blocks = []
        bounds = []
        if program.rows:
            dense = np.zeros((len(program.rows), self.ncols))
            for i, row in enumerate(program.rows):
                dense[i, :n] = row.coeffs
                if program.has_eta:
                    dense[i, n] = row.eta_coef
                b = row.bound
                if tighten and row.eta_coef == 0.0:
                    b = _tighten_bound(np.asarray(row.coeffs, float), b)
                bounds.append(b)
            blocks.append(sp.csr_matrix(dense))
        if program.groups:
            gi, gj = [], []
            for g_idx, members in enumerate(program.groups):
                gi.extend([g_idx] * len(members))
                gj.extend(int(m) for m in members)
            blocks.append(sp.coo_matrix(
                (np.ones(len(gi)), (gi, gj)),
                shape=(len(program.groups), self.ncols)).tocsr())
            bounds.extend([1.0] * len(program.groups))
        self.a_ub = sp.vstack(blocks).tocsr() if blocks else None
        self.b_ub = np.array(bounds) if bounds else None

    def solve(self, lower: np.ndarray, upper: np.ndarray):
        bounds = np.empty((self.ncols, 2))
        bounds[:self.n, 0] = lower
        bounds[:self.n, 1] = upper
        if self.program.has_eta:
            bounds[self.n] = (-np.inf, np.inf)
        res = linprog(self.c, A_ub=self.a_ub, b_ub=self.b_ub,
                      bounds=bounds, method="highs-ds")
        return res


def solve_lp_relaxation(program: BinaryProgram,
                        lower: np.ndarray | None = None,
                        upper: np.ndarray | None = None) -> dict:
    """Continuous relaxation over the [0,1] box (or tighter local bounds).

    Returns {status, value, point, fractional, iterations}; the value
    includes the program's constant offset, and ``fractional`` lists the
    binary indices away from 0/1 by more than the integrality tolerance.
    """
    prep = _PreparedLP(program)
    lb = np.zeros(program.n_vars) if lower is None else np.asarray(lower, float)
    ub = np.ones(program.n_vars) if upper is None else np.asarray(upper, float)
    for idx, val in program.fixings.items():
        lb[idx] = ub[idx] = float(val)
    res = prep.solve(lb, ub)
    if res.status == 2:
        return {"status": "infeasible", "value": np.inf, "point": None,
                "fractional": [], "iterations": int(res.nit)}
    if res.status != 0:
        raise RuntimeError(f"LP relaxation failed: {res.message}")
    x = res.x[:program.n_vars]
    frac = np.where(np.abs(x - np.rint(x)) > INTEGRALITY_TOL)[0]
    return {"status": "optimal", "value": float(res.fun) + program.offset,
            "point": res.x.copy(), "fractional": frac.tolist(),
            "iterations": int(res.nit)}


def _window_min(values: np.ndarray):
    """Sparse table for O(1) range-minimum queries over a 1-D array."""
    n = values.size
    levels = [values]
    span = 1
    while 2 * span <= n:
        prev = levels[-1]
        levels.append(np.minimum(prev[:-span], prev[span:]))
        span *= 2

    def query(lo: int, hi: int) -> float:
        width = hi - lo + 1
        j = width.bit_length() - 1
        return min(levels[j][lo], levels[j][hi - (1 << j) + 1])

    return query


def _two_row_exact(program: BinaryProgram) -> MilpResult | None:
    """Closed-form optimum for the two-cardinality-row pattern.

    Master singletons are "pick keeps and adds" problems: one row charges
    sign-split unit steps (the move limit), the other uniform unit steps
    (the resource), so after lattice flooring both act on counts alone.
    For a fixed number of adds and keeps, the best choice is a sorted
    prefix of each side; sweeping the add count with a range-minimum table
    over the keep prefix sums is exact and needs no search tree. Returns
    None when the program does not match the pattern.
    """
    if (program.has_eta or program.groups or program.fixings
            or len(program.rows) != 2):
        return None
    coeff_rows = [np.asarray(r.coeffs, dtype=float).ravel()
                  for r in program.rows]
    signs = []
    for c in coeff_rows:
        if c.shape != (program.n_vars,) or (c == 0.0).any():
            return None
        mags = np.abs(c)
        if mags.max() != mags.min():
            return None
        signs.append(np.sign(c))
    # one row must be all-positive (the resource); the other may sign-split
    if (signs[0] > 0).all():
        v_row, t_row = 0, 1
    elif (signs[1] > 0).all():
        v_row, t_row = 1, 0
    else:
        return None
    g_t = float(np.abs(coeff_rows[t_row][0]))
    g_v = float(coeff_rows[v_row][0])
    b_t = math.floor(program.rows[t_row].bound / g_t + 1e-9)
    b_v = math.floor(program.rows[v_row].bound / g_v + 1e-9)
    objective = np.asarray(program.objective, dtype=float)

    neg = np.where(signs[t_row] < 0)[0]
    pos = np.where(signs[t_row] > 0)[0]
    if b_v < 0 or b_t < -neg.size:
        return MilpResult("infeasible", np.inf, None, None, 0, 0)
    order_n = neg[np.argsort(objective[neg], kind="stable")]
    order_p = pos[np.argsort(objective[pos], kind="stable")]
    pref_n = np.concatenate([[0.0], np.cumsum(objective[order_n])])
    pref_p = np.concatenate([[0.0], np.cumsum(objective[order_p])])
    query = _window_min(pref_n)

    best = np.inf
    best_a = -1
    best_window = (0, 0)
    for a in range(0, min(pos.size, b_v) + 1):
        k_lo = max(0, a - b_t)
        k_hi = min(neg.size, b_v - a)
        if k_lo > k_hi:
            continue
        value = pref_p[a] + query(k_lo, k_hi)
        if value < best:
            best = value
            best_a = a
            best_window = (k_lo, k_hi)
    if best_a < 0:
        return MilpResult("infeasible", np.inf, None, None, 0, 0)
    k_lo, k_hi = best_window
    best_k = k_lo + int(np.argmin(pref_n[k_lo:k_hi + 1]))
    x = np.zeros(program.n_vars, dtype=np.int8)
    x[order_p[:best_a]] = 1
    x[order_n[:best_k]] = 1
    value, eta, feasible = _exact_value(program, x)
    if not feasible:
        raise AssertionError("cardinality sweep produced an infeasible point")
    return MilpResult("optimal", value, x, eta, 0, 0)


_IMPURE_CAP = 3000


def _canonical_form(program: BinaryProgram):
    """Lattice view of a program whose plain rows are unit-step rows.

    Returns (cuts, sign_mat, betas, b_v) where every eta row is scaled to
    ``eta >= coeffs.x - bound`` form, every sign-split plain row becomes a
    row of ``sign_mat`` (+-1 entries) with its Chvatal-floored bound in
    ``betas``, and the all-positive plain rows collapse into the single
    cardinality budget ``b_v``. None when any row breaks the pattern.
    """
    n = program.n_vars
    cuts = []
    sign_rows: dict[bytes, tuple[np.ndarray, int]] = {}
    b_v = n
    for row in program.rows:
        c = np.asarray(row.coeffs, dtype=float).ravel()
        if c.shape != (n,):
            return None
        if row.eta_coef != 0.0:
            if row.eta_coef > 0.0:
                return None
            scale = -row.eta_coef
            cuts.append((c / scale, row.bound / scale))
            continue
        if not c.any():
            if row.bound >= -FEASIBILITY_TOL:
                continue  # vacuous
            return None
        if (c == 0.0).any():
            return None
        mags = np.abs(c)
        if mags.max() != mags.min():
            return None
        g = float(mags[0])
        beta = math.floor(row.bound / g + 1e-9)
        s = np.sign(c).astype(np.int8)
        if (s > 0).all():
            b_v = min(b_v, beta)
        else:
            key = s.tobytes()
            if key in sign_rows:
                beta = min(beta, sign_rows[key][1])
            sign_rows[key] = (s, beta)
    if not sign_rows:
        sign_mat = np.zeros((0, n), dtype=np.int8)
        betas = np.zeros(0, dtype=int)
    else:
        sign_mat = np.stack([s for s, _ in sign_rows.values()])
        betas = np.array([b for _, b in sign_rows.values()], dtype=int)
    return cuts, sign_mat, betas, b_v


def _lattice_min(costs: np.ndarray, classes, betas: np.ndarray, b_v: int):
    """Exact min of ``costs . x`` over the canonical unit-step rows.

    ``classes`` is (pure_p, pure_n, impure) from sign-vector grouping:
    within a class all variables move every row identically, so only the
    count taken from each matters, and for a fixed count the cheapest
    sorted prefix wins. Impure counts are enumerated outright; the two
    pure classes are swept with the prefix-sum valley trick (the prefixes
    are convex, so a clipped argmin replaces any range query). Returns
    (value, x) or None when no count combination is feasible.
    """
    pure_p, pure_n, impure = classes
    op = pure_p[np.argsort(costs[pure_p], kind="stable")]
    on = pure_n[np.argsort(costs[pure_n], kind="stable")]
    pp = np.concatenate([[0.0], np.cumsum(costs[op])])
    pn = np.concatenate([[0.0], np.cumsum(costs[on])])
    valley_n = int((costs[on] < 0.0).sum())

    orders = []
    prefs = []
    sizes = []
    sig_cols = []
    for idx, sig in impure:
        o = idx[np.argsort(costs[idx], kind="stable")]
        orders.append(o)
        prefs.append(np.concatenate([[0.0], np.cumsum(costs[o])]))
        sizes.append(idx.size)
        sig_cols.append(sig)
    if sizes:
        grids = np.indices([s + 1 for s in sizes]).reshape(len(sizes), -1).T
        base = np.zeros(len(grids))
        for c, pref in enumerate(prefs):
            base += pref[grids[:, c]]
        sig_arr = np.stack(sig_cols).astype(float)  # (classes, rows)
        row_use = grids.astype(float) @ sig_arr  # (combos, rows)
        bt_all = (betas[None, :] - row_use).min(axis=1)
        bv_all = b_v - grids.sum(axis=1)
    else:
        grids = np.zeros((1, 0), dtype=int)
        base = np.zeros(1)
        bt_all = np.full(1, np.inf if betas.size == 0 else betas.min())
        bv_all = np.full(1, b_v)

    best = None
    for t in range(len(grids)):
        bv_eff = int(bv_all[t])
        if bv_eff < 0:
            continue
        bt_eff = bt_all[t]
        a_vals = np.arange(0, min(op.size, bv_eff) + 1)
        if np.isfinite(bt_eff):
            k_lo = np.maximum(0, a_vals - int(bt_eff))
        else:
            k_lo = np.zeros_like(a_vals)
        k_hi = np.minimum(on.size, bv_eff - a_vals)
        valid = k_lo <= k_hi
        if not valid.any():
            continue
        k_star = np.clip(valley_n, k_lo, k_hi)
        vals = pp[a_vals] + pn[np.minimum(k_star, on.size)] + base[t]
        vals[~valid] = np.inf
        i = int(np.argmin(vals))
        if not np.isfinite(vals[i]):
            continue
        if best is None or vals[i] < best[0] - 1e-15:
            best = (float(vals[i]), t, int(a_vals[i]), int(k_star[i]))
    if best is None:
        return None
    value, t, a, k = best
    x = np.zeros(costs.size)
    x[op[:a]] = 1.0
    x[on[:k]] = 1.0
    for c, o in enumerate(orders):
        x[o[:grids[t, c]]] = 1.0
    return value, x


def _lagrangian_eta(program: BinaryProgram):
    """Dual bound for min-max cut programs over unit-step rows.

    The subproblem min_x max_i (c_i.x - b_i) is dualized over the simplex:
    for fixed weights the inner minimization is a count problem solved
    exactly by _lattice_min, so the resulting bound respects integrality
    and routinely closes the LP gap outright. Every inner solution is also
    feasible, giving an incumbent for free. Returns a MilpResult when the
    bound certifies optimality (or infeasibility), (lower_bound, seed)
    when a gap remains, and None when the structure does not apply.
    """
    if program.groups or program.fixings:
        return None
    canon = _canonical_form(program)
    if canon is None:
        return None
    cuts, sign_mat, betas, b_v = canon
    if b_v < 0:
        return MilpResult("infeasible", np.inf, None, None, 0, 0)
    n = program.n_vars
    pos = sign_mat > 0
    all_pos = pos.all(axis=0)
    all_neg = (~pos).all(axis=0) & (sign_mat.shape[0] > 0)
    pure_p = np.where(all_pos | (sign_mat.shape[0] == 0))[0]
    pure_n = np.where(all_neg)[0]
    impure = []
    rest = np.where(~(all_pos | all_neg))[0] if sign_mat.shape[0] else \
        np.zeros(0, dtype=int)
    if rest.size:
        cols = pos[:, rest]
        seen: dict[bytes, list] = {}
        for pos_in_rest, j in enumerate(rest):
            key = cols[:, pos_in_rest].tobytes()
            seen.setdefault(key, []).append(j)
        cap = 1
        for members in seen.values():
            cap *= len(members) + 1
            if cap > _IMPURE_CAP:
                return None
        for members in seen.values():
            idx = np.asarray(members, dtype=int)
            impure.append((idx, np.where(pos[:, idx[0]], 1.0, -1.0)))
    classes = (pure_p, pure_n, impure)
    objective = np.asarray(program.objective, dtype=float)
    m = len(cuts)

    best_lb = -np.inf
    best_ub = np.inf
    best_x = None
    infeasible = False

    def evaluate(lam):
        nonlocal best_lb, best_ub, best_x, infeasible
        costs = objective.copy()
        shift = 0.0
        for weight, (ci, bi) in zip(lam, cuts):
            costs += weight * ci
            shift += weight * bi
        got = _lattice_min(costs, classes, betas, b_v)
        if got is None:
            infeasible = True
            return None
        value, x = got
        lb = value - shift
        if lb > best_lb:
            best_lb = lb
        slack = np.array([ci @ x - bi for ci, bi in cuts])
        ub = objective @ x + (slack.max() if m else 0.0)
        if ub < best_ub:
            best_ub = ub
            best_x = x
        return slack

    def closed():
        return (np.isfinite(best_ub)
                and best_ub - best_lb <= GAP_TOL * max(1.0, abs(best_ub)))

    if m == 0:
        evaluate(())
    elif m == 1:
        evaluate((1.0,))
    elif m == 2:
        lo, hi = 0.0, 1.0
        for t in (0.0, 1.0, 0.5):
            if evaluate((t, 1.0 - t)) is not None and closed():
                break
        it = 0
        while not infeasible and not closed() and it < 48:
            it += 1
            mid = 0.5 * (lo + hi)
            slack = evaluate((mid, 1.0 - mid))
            if slack is None:
                break
            if slack[0] - slack[1] > 0.0:
                lo = mid
            else:
                hi = mid
    else:
        lam = np.full(m, 1.0 / m)
        for it in range(72):
            slack = evaluate(lam)
            if slack is None or closed():
                break
            scale = np.abs(slack).max()
            if scale <= 0.0:
                break
            lam = lam + slack / scale / (it + 2.0)
            u = np.sort(lam)[::-1]
            css = np.cumsum(u) - 1.0
            rho = np.nonzero(u * (np.arange(m) + 1) > css)[0][-1]
            lam = np.maximum(lam - css[rho] / (rho + 1.0), 0.0)

    if infeasible:
        return MilpResult("infeasible", np.inf, None, None, 0, 0)
    if best_x is None:
        return None
    if closed():
        x = best_x.astype(np.int8)
        value, eta, feasible = _exact_value(program, x)
        if not feasible:
            raise AssertionError("dual sweep produced an infeasible point")
        return MilpResult("optimal", value, x, eta, 0, 0)
    return best_lb + program.offset, best_x.astype(np.int8)


def _symmetry_rows(program: BinaryProgram) -> list[MilpRow]:
    """Lexicographic tie-break rows over exactly identical columns.

    Variables whose objective, row coefficients, and group membership all
    coincide are interchangeable, so every solution can be permuted into
    one with nonincreasing values along each class; ordering rows keep the
    tree from exploring permuted copies of the same designs. Fixed
    variables stay out of the classes.
    """
    n = program.n_vars
    sig = [np.asarray(program.objective, dtype=float)]
    for row in program.rows:
        sig.append(np.asarray(row.coeffs, dtype=float).ravel())
    group_index = np.full(n, -1.0)
    for g_pos, g in enumerate(program.groups):
        group_index[np.asarray(g, dtype=int)] = g_pos
    sig.append(group_index)
    stacked = np.vstack(sig)
    classes: dict[bytes, list[int]] = {}
    for i in range(n):
        if i in program.fixings:
            continue
        classes.setdefault(stacked[:, i].tobytes(), []).append(i)
    rows = []
    for members in classes.values():
        for prev, nxt in zip(members, members[1:]):
            coeffs = np.zeros(n)
            coeffs[nxt] = 1.0
            coeffs[prev] = -1.0
            rows.append(MilpRow(coeffs, 0.0))
    return rows


def _exact_value(program: BinaryProgram, x_int: np.ndarray):
    """Exact objective and minimal feasible eta for an integer point.

    Returns (value, eta, feasible); eta is None for eta-free programs.
    """
    xf = x_int.astype(float)
    eta = None
    for g in program.groups:
        if x_int[np.asarray(g, dtype=int)].sum() > 1:
            return np.inf, None, False
    if program.has_eta:
        eta = -np.inf
        for row in program.rows:
            lhs = float(row.coeffs @ xf)
            if row.eta_coef != 0.0:
                # coeffs.x - eta <= bound  =>  eta >= coeffs.x - bound
                eta = max(eta, (lhs - row.bound) / -row.eta_coef)
            elif lhs > row.bound + FEASIBILITY_TOL:
                return np.inf, None, False
        if eta == -np.inf:
            raise ValueError("eta-bearing program without any eta row")
    else:
        for row in program.rows:
            if float(row.coeffs @ xf) > row.bound + FEASIBILITY_TOL:
                return np.inf, None, False
    value = float(np.asarray(program.objective, float) @ xf) + program.offset
    if eta is not None:
        value += eta
    return value, eta, True


def solve(program: BinaryProgram, node_limit: int = 10000,
          trace: list | None = None) -> MilpResult:
    """Prove-optimal branch-and-bound over the binary variables.

    Best-first on the parent relaxation bound; branches on the most
    fractional variable (lowest index on ties); a branch that sets a
    grouped variable to one drops its group siblings to zero. Every node
    feeds the incumbent two rounded candidates: plain nearest-integer
    rounding, and a floor-then-greedy pass that drops the fractional
    entries and re-adds them while that repairs violated rows or improves
    the objective without breaking any. ``trace``, when given, collects
    (global lower bound, incumbent value) per node for diagnostics.
    Exceeding ``node_limit`` returns status "node_limit" with the
    (unproven) incumbent rather than pretending optimality.

    Two-row cardinality programs skip the tree for an exact combinatorial
    sweep; min-max programs over unit-step rows get a simplex-dual bound
    whose inner problems are solved as count problems, which usually
    certifies the optimum before any branching. Identical columns get
    lexicographic ordering rows in the node relaxations only — the
    reported optimum never changes, but permutation-symmetric designs
    stop multiplying the frontier. Once an incumbent exists, variables
    whose reduced cost at a node already covers the remaining gap are
    pinned at their bound for that subtree (reduced-cost fixing).
    """
    direct = _two_row_exact(program)
    if direct is not None:
        return direct
    lag_lb = -np.inf
    lag_seed = None
    lag = _lagrangian_eta(program)
    if isinstance(lag, MilpResult):
        return lag
    if lag is not None:
        lag_lb, lag_seed = lag
    sym = _symmetry_rows(program)
    if sym:
        augmented = BinaryProgram(
            n_vars=program.n_vars, objective=program.objective,
            rows=list(program.rows) + sym, groups=program.groups,
            fixings=program.fixings, has_eta=program.has_eta,
            offset=program.offset)
        prep = _PreparedLP(augmented, tighten=True)
    else:
        prep = _PreparedLP(program, tighten=True)
    n = program.n_vars
    group_of: dict[int, np.ndarray] = {}
    for g in program.groups:
        arr = np.asarray(g, dtype=int)
        for m in arr:
            if int(m) in group_of:
                raise ValueError(f"variable {m} appears in two groups")
            group_of[int(m)] = arr
    lb = np.zeros(n)
    ub = np.ones(n)
    for idx, val in program.fixings.items():
        lb[idx] = ub[idx] = float(val)
        if val == 1 and idx in group_of:
            for m in group_of[idx]:
                if m != idx:
                    ub[m] = 0.0

    best_value = np.inf
    best_x = None
    best_eta = None
    nodes = 0
    lp_iters = 0
    counter = 0
    heap = [(-np.inf, counter, lb, ub)]

    objective = np.asarray(program.objective, dtype=float)
    plain = [r for r in program.rows if r.eta_coef == 0.0]
    plain_coeffs = (np.vstack([r.coeffs for r in plain])
                    if plain else np.zeros((0, n)))
    plain_bounds = np.array([r.bound for r in plain])
    group_index = np.full(n, -1, dtype=int)
    for g_pos, g in enumerate(program.groups):
        group_index[np.asarray(g, dtype=int)] = g_pos

    def consider(x_int):
        nonlocal best_value, best_x, best_eta
        value, eta, feasible = _exact_value(program, x_int)
        if feasible and value < best_value:
            best_value, best_x, best_eta = value, x_int, eta

    def greedy_fill(x, fractional):
        """Floor the fractional entries, then re-add them greedily.

        Additions are accepted when they shrink the total row violation,
        or (once feasible) when they improve the objective while keeping
        every row and group satisfied. Fixed-to-zero variables never show
        up fractional, so the pass cannot disturb the fixings.
        """
        cand = np.rint(x).astype(np.int8)
        cand[fractional] = 0
        lhs = plain_coeffs @ cand.astype(float)
        occupancy = np.array([cand[np.asarray(g, dtype=int)].sum()
                              for g in program.groups], dtype=int)
        violation = float(np.maximum(lhs - plain_bounds - FEASIBILITY_TOL,
                                     0.0).sum())
        for j in sorted(fractional, key=lambda i: (objective[i], i)):
            g_pos = group_index[j]
            if g_pos >= 0 and occupancy[g_pos] >= 1:
                continue
            new_lhs = lhs + plain_coeffs[:, j]
            new_violation = float(np.maximum(
                new_lhs - plain_bounds - FEASIBILITY_TOL, 0.0).sum())
            if (new_violation < violation
                    or (violation == 0.0 and new_violation == 0.0
                        and objective[j] < 0.0)):
                cand[j] = 1
                lhs, violation = new_lhs, new_violation
                if g_pos >= 0:
                    occupancy[g_pos] += 1
        return cand

    if lag_seed is not None:
        consider(lag_seed)

    status = "optimal"
    while heap:
        bound_key, _, lo, hi = heapq.heappop(heap)
        if (max(bound_key, lag_lb)
                >= best_value - GAP_TOL * max(1.0, abs(best_value))):
            continue
        if nodes >= node_limit:
            status = "node_limit"
            break
        nodes += 1
        if trace is not None:
            open_lb = min([bound_key] + [h[0] for h in heap])
            trace.append((open_lb, best_value))
        res = prep.solve(lo, hi)
        lp_iters += int(res.nit)
        if res.status == 2:
            continue
        if res.status != 0:
            raise RuntimeError(f"node relaxation failed: {res.message}")
        lp_value = float(res.fun) + program.offset
        if lp_value >= best_value - GAP_TOL * max(1.0, abs(best_value)):
            continue
        x = res.x[:n]
        frac = np.abs(x - np.rint(x))
        fractional = np.where(frac > INTEGRALITY_TOL)[0]
        x_round = np.rint(x).astype(np.int8)
        consider(x_round)
        if fractional.size == 0:
            continue  # relaxation integral: subtree settled
        consider(greedy_fill(x, fractional))
        if lp_value >= best_value - GAP_TOL * max(1.0, abs(best_value)):
            continue  # repaired incumbent already matches this bound
        base_lo, base_hi = lo, hi
        if np.isfinite(best_value):
            # Reduced-cost fixing: a variable nonbasic at a bound whose
            # reduced cost already covers the remaining gap cannot move in
            # any improving solution below this node, so pin it for both
            # children. Huge cut coefficients make this bite early.
            slack = (best_value - GAP_TOL * max(1.0, abs(best_value))
                     - lp_value)
            rc_low = res.lower.marginals[:n]
            rc_high = res.upper.marginals[:n]
            free = lo < hi - 0.5
            fix0 = free & (x < INTEGRALITY_TOL) & (rc_low >= slack)
            fix1 = free & (x > 1.0 - INTEGRALITY_TOL) & (-rc_high >= slack)
            if fix0.any() or fix1.any():
                base_lo = lo.copy()
                base_hi = hi.copy()
                base_hi[fix0] = 0.0
                base_lo[fix1] = 1.0
                for f in np.where(fix1)[0]:
                    if f in group_of:
                        for m in group_of[f]:
                            if m != f and base_lo[m] < 0.5:
                                base_hi[m] = 0.0
        j = int(fractional[np.argmax(frac[fractional])])
        # child x_j = 0
        hi0 = base_hi.copy()
        hi0[j] = 0.0
        counter += 1
        heapq.heappush(heap, (lp_value, counter, base_lo, hi0))
        # child x_j = 1 (forcing group siblings out)
        lo1 = base_lo.copy()
        hi1 = base_hi.copy()
        lo1[j] = 1.0
        if j in group_of:
            for m in group_of[j]:
                if m != j:
                    hi1[m] = 0.0
        counter += 1
        heapq.heappush(heap, (lp_value, counter, lo1, hi1))

    if best_x is None:
        final = "infeasible" if status == "optimal" else status
        return MilpResult(final, np.inf, None, None, nodes, lp_iters)
    return MilpResult(status, best_value, best_x, best_eta, nodes, lp_iters)


def brute_force(program: BinaryProgram, chunk: int = 1 << 16) -> MilpResult:
    """Exhaustive reference optimum for programs with at most 24 binaries."""
    n = program.n_vars
    if n > 24:
        raise ValueError("brute force capped at 24 variables")
    objective = np.asarray(program.objective, dtype=float)
    eta_rows = [r for r in program.rows if r.eta_coef != 0.0]
    plain_rows = [r for r in program.rows if r.eta_coef == 0.0]
    if program.has_eta and not eta_rows:
        raise ValueError("eta-bearing program without any eta row")
    best_value = np.inf
    best_x = None
    best_eta = None
    total = 1 << n
    bits = np.arange(n)
    for start in range(0, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        x = ((masks[:, None] >> bits[None, :]) & 1).astype(float)
        feasible = np.ones(len(masks), dtype=bool)
        for idx, val in program.fixings.items():
            feasible &= x[:, idx] == val
        for g in program.groups:
            feasible &= x[:, g].sum(axis=1) <= 1
        for row in plain_rows:
            feasible &= x @ row.coeffs <= row.bound + FEASIBILITY_TOL
        if not feasible.any():
            continue
        values = x @ objective + program.offset
        if program.has_eta:
            eta = np.full(len(masks), -np.inf)
            for row in eta_rows:
                eta = np.maximum(eta, (x @ row.coeffs - row.bound) / -row.eta_coef)
            values = values + eta
        values[~feasible] = np.inf
        i = int(np.argmin(values))
        if values[i] < best_value:
            best_value = float(values[i])
            best_x = x[i].astype(np.int8)
            best_eta = float(eta[i]) if program.has_eta else None
    if best_x is None:
        return MilpResult("infeasible", np.inf, None, None, 0, 0)
    return MilpResult("optimal", best_value, best_x, best_eta, 0, 0)


def dump(program: BinaryProgram, path: str) -> None:
    """Write the instance in MPS-style text for external cross-checking."""
    lines = ["NAME          TOPOCUT_SUBPROBLEM", "ROWS", " N  COST"]
    for i in range(len(program.rows)):
        lines.append(f" L  R{i}")
    for i in range(len(program.groups)):
        lines.append(f" L  G{i}")
    lines.append("COLUMNS")
    lines.append("    MARKER                 'MARKER'                 'INTORG'")
    member_of = {}
    for g_idx, g in enumerate(program.groups):
        for m in g:
            member_of.setdefault(int(m), []).append(g_idx)
    for j in range(program.n_vars):
        entries = [("COST", float(program.objective[j]))]
        for i, row in enumerate(program.rows):
            if row.coeffs[j] != 0.0:
                entries.append((f"R{i}", float(row.coeffs[j])))
        for g_idx in member_of.get(j, ()):
            entries.append((f"G{g_idx}", 1.0))
        for name, val in entries:
            lines.append(f"    X{j}  {name}  {val!r}")
    lines.append("    MARKER                 'MARKER'                 'INTEND'")
    if program.has_eta:
        lines.append("    ETA  COST  1.0")
        for i, row in enumerate(program.rows):
            if row.eta_coef != 0.0:
                lines.append(f"    ETA  R{i}  {row.eta_coef!r}")
    lines.append("RHS")
    for i, row in enumerate(program.rows):
        lines.append(f"    RHS  R{i}  {float(row.bound)!r}")
    for i in range(len(program.groups)):
        lines.append(f"    RHS  G{i}  1.0")
    lines.append("BOUNDS")
    for j in range(program.n_vars):
        if j in program.fixings:
            lines.append(f" FX BND  X{j}  {float(program.fixings[j])!r}")
        else:
            lines.append(f" BV BND  X{j}")
    if program.has_eta:
        lines.append(" FR BND  ETA")
    lines.append("ENDATA")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
