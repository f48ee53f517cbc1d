"""Master problem: choose the next design from the accumulated cuts.

Every iteration first solves the newest cut's single-cut subproblem, then
walks candidate active-cut selections in non-descending order of their
ranking key (the worst cached single-cut optimum among members), stopping
as soon as the incumbent beats the next key — each subproblem's optimum
can never undercut its members' own single-cut optima, so nothing better
can follow.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .cuts import CutPool, exclusion_list, trust_region_row
from .milp import BinaryProgram, MilpRow, solve
from .model import ConstraintSpec, MaterialSet

__all__ = [
    "Selection",
    "MasterResult",
    "MasterInfeasible",
    "build_subproblem",
    "enumerate_selections",
    "solve_master",
]

log = logging.getLogger(__name__)

RANKING_SLACK = 1e-6


class MasterInfeasible(RuntimeError):
    """No subproblem of this iteration admits a feasible design."""


@dataclass(frozen=True)
class Selection:
    """Candidate active-cut index set with its ranking key."""

    indices: frozenset[int]
    eta_bar: float


@dataclass
class MasterResult:
    design: np.ndarray            # (n_e, n_M) binary
    eta: float                    # lower bound: best subproblem optimum
    active: frozenset[int]
    n_subproblems: int
    trace: list[tuple[frozenset[int], float]]
    budget_exhausted: bool = False


def _resource_rows(constraint: ConstraintSpec, materials: MaterialSet,
                   n_e: int, n_m: int):
    """Volume or mass row (and at-most-one groups) over flattened variables."""
    if constraint.kind == "volume":
        coeffs = np.full(n_e * n_m, 1.0 / n_e)
        return [MilpRow(coeffs, constraint.target)], []
    dens = np.asarray(materials.densities, dtype=float)
    coeffs = np.tile(dens / n_e, n_e)
    groups = []
    if n_m > 1:
        base = np.arange(n_e) * n_m
        groups = [base[e] + np.arange(n_m) for e in range(n_e)]
    return [MilpRow(coeffs, constraint.target)], groups


def build_subproblem(selection: frozenset[int] | set[int], pool: CutPool,
                     constraint: ConstraintSpec,
                     materials: MaterialSet) -> BinaryProgram:
    """Binary program for one active-cut selection.

    Singletons fold their cut into the objective (no eta variable); larger
    selections minimize eta above every member cut. Each member also
    contributes its trust-region row, and the resource constraint closes
    the program.
    """
    members = sorted(selection)
    cuts = [pool.cuts[j] for j in members]
    n_e, n_m = cuts[0].anchor.shape
    n = n_e * n_m
    rows: list[MilpRow] = []
    if len(cuts) == 1:
        cut = cuts[0]
        objective = cut.coeffs.ravel().copy()
        offset = cut.constant
        has_eta = False
    else:
        objective = np.zeros(n)
        offset = 0.0
        has_eta = True
        for cut in cuts:
            # f_j + coeffs.(x - anchor) <= eta
            rows.append(MilpRow(cut.coeffs.ravel().copy(), -cut.constant,
                                eta_coef=-1.0))
    for cut in cuts:
        coeffs, constant, bound = trust_region_row(cut)
        flat = coeffs.ravel()
        if not flat.any() and bound - constant >= 0.0:
            # the uniform half-gray seed: every move keeps the distance
            # unchanged, so its trust region constrains nothing
            continue
        rows.append(MilpRow(flat, bound - constant))
    resource, groups = _resource_rows(constraint, materials, n_e, n_m)
    rows.extend(resource)
    return BinaryProgram(n_vars=n, objective=objective, rows=rows,
                         groups=groups, has_eta=has_eta, offset=offset)


def enumerate_selections(pool: CutPool, k: int) -> Iterator[Selection]:
    """Mandatory fresh single first, then multi-cut selections ranked
    non-descending by the worst member single-cut optimum.

    The multi-cut tail reads the cached single-cut optima lazily, so the
    fresh cut's cache may be filled after the head is consumed. Selections
    equal to a previously chosen active set are skipped. Singletons other
    than the fresh cut are never produced; every other nonempty subset of
    the cut indices appears exactly once, keyed by its highest-ranked
    member.
    """
    fresh = k - 1
    excluded = set(exclusion_list(pool))
    head = frozenset([fresh])
    if head not in excluded:
        yield Selection(head, -np.inf)
    singles = []
    for j in range(k):
        eta = pool.cuts[j].eta_single
        if eta is None:
            raise RuntimeError(f"cut {j} has no cached single-cut optimum")
        singles.append((eta, j))
    order = sorted(range(k), key=lambda j: singles[j])
    for rank in range(1, k):
        eta_bar = singles[order[rank]][0]
        lead = order[rank]
        lower = order[:rank]
        for mask in range(1, 1 << rank):
            members = frozenset(
                [lead] + [lower[b] for b in range(rank) if mask >> b & 1])
            if members in excluded:
                continue
            yield Selection(members, eta_bar)


def solve_master(pool: CutPool, constraint: ConstraintSpec,
                 materials: MaterialSet, budget: int = 32,
                 node_limit: int = 10000) -> MasterResult:
    """One master iteration over the current cut pool.

    Solves the fresh cut's single-cut program (caching its optimum for
    future ranking), then follows the ranked stream until the early-stop
    test fires, the stream ends, or the subproblem budget runs out. Ties
    go to the later-solved selection. Raises MasterInfeasible when nothing
    feasible was found.
    """
    k = len(pool.cuts)
    if k == 0:
        raise ValueError("empty cut pool")
    fresh = k - 1
    best_value = np.inf
    best_design = None
    best_active: frozenset[int] | None = None
    solved = 0
    trace: list[tuple[frozenset[int], float]] = []
    budget_exhausted = False
    n_e, n_m = pool.cuts[0].anchor.shape

    for sel in enumerate_selections(pool, k):
        if solved and best_value < sel.eta_bar:
            break
        if solved >= budget:
            budget_exhausted = True
            log.warning("master subproblem budget (%d) exhausted at k=%d",
                        budget, k)
            break
        program = build_subproblem(sel.indices, pool, constraint, materials)
        result = solve(program, node_limit=node_limit)
        solved += 1
        if result.status == "node_limit":
            raise RuntimeError(
                f"subproblem {sorted(sel.indices)} hit the node limit "
                f"({node_limit}) without an optimality proof")
        if sel.indices == frozenset([fresh]):
            pool.cuts[fresh].eta_single = (
                result.value if result.status == "optimal" else np.inf)
        if result.status != "optimal":
            trace.append((sel.indices, np.inf))
            continue
        trace.append((sel.indices, result.value))
        if np.isfinite(sel.eta_bar):
            slack = RANKING_SLACK * max(1.0, abs(sel.eta_bar))
            if result.value < sel.eta_bar - slack:
                raise AssertionError(
                    f"subproblem {sorted(sel.indices)} undercut its ranking "
                    f"key: {result.value} < {sel.eta_bar}")
        if result.value <= best_value:
            best_value = result.value
            best_design = result.assignment.reshape(n_e, n_m)
            best_active = sel.indices

    if best_design is None:
        raise MasterInfeasible(
            f"all {solved} subproblems infeasible with {k} cuts")
    return MasterResult(design=best_design.astype(float), eta=best_value,
                        active=best_active, n_subproblems=solved,
                        trace=trace, budget_exhausted=budget_exhausted)
