"""Stage loop: analyze, cut, solve master, adapt the trust-region radius.

A stage fixes the void stiffness and the resource target. Iteration 0
analyzes the seed (gray at the first stage, the previous stage's optimum
afterwards) and anchors cut 0; each following iteration solves the master
over all cuts so far, analyzes the proposed design, updates the incumbent
upper bound, tests the stop criteria, and — unless the radius is frozen —
sizes the next cut's trust region from the merit ratio of achieved to
predicted objective reduction.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import fem, sensitivity
from .cuts import CutPool, make_cut
from .master import MasterResult, solve_master
from .model import ConstraintSpec, DesignField, ProblemSpec, measure

__all__ = [
    "StageParams",
    "IterationRecord",
    "StageResult",
    "merit",
    "update_radius",
    "run_stage",
]

log = logging.getLogger(__name__)

MERIT_DEGENERATE = 1e-12

# The bound-crossing stop only counts when the lower bound overtakes the
# incumbent by at most this fraction of |U|.  The cuts are local models:
# far from their anchors they can predict values well above an incumbent
# that is still improvable (common in mechanism mode, where early
# incumbents sit near zero), and stopping on such an overshoot abandons
# the stage at whatever the incumbent happens to be.  A crossing within
# the band means the bounds actually met before crossing, which is the
# convergence signal the test is meant to catch.
CROSSING_BAND = 0.1


@dataclass(frozen=True)
class StageParams:
    """One stage's fixed parameters."""

    index: int
    e_min: float
    target: float
    d0: float
    adapt_radius: bool = True


@dataclass
class IterationRecord:
    stage: int
    k: int
    f: float
    eta: float
    upper: float
    d: float
    omega: float
    n_subproblems: int
    active: tuple[int, ...]
    fem_time: float


@dataclass
class StageResult:
    design: DesignField
    upper: float
    history: list[IterationRecord] = field(default_factory=list)
    n_fem: int = 0
    status: str = "max_iters"   # "gap" | "crossing" | "max_iters"


def merit(f_values: list[float], radii: list[float], f_k: float,
          eta_k: float) -> float:
    """Achieved-over-predicted reduction, worst case over the active cuts.

    A cut whose prediction is exact (f_j == eta_k to machine precision)
    contributes 1 when the step did not worsen its objective value and -1
    when it did, so the radius still moves in the right direction.
    """
    if not f_values:
        raise ValueError("merit needs a nonempty active set")
    ratios = []
    for f_j in f_values:
        denom = f_j - eta_k
        if abs(denom) <= MERIT_DEGENERATE * max(1.0, abs(f_j)):
            ratios.append(1.0 if f_j - f_k >= 0 else -1.0)
        else:
            ratios.append((f_j - f_k) / denom)
    return min(ratios)


def update_radius(spec: ProblemSpec, omega: float,
                  active_radii: list[float]) -> float:
    """Next cut's trust-region radius from the merit ratio.

    Grows from the tightest active radius when the prediction held
    (omega >= 1), shrinks by theta1 when the step under-delivered, and
    halves when the objective got worse; always clamped to
    [d_min, d_max].
    """
    d_star = min(active_radii)
    if omega >= 1.0:
        return min(spec.theta2 * d_star, spec.d_max)
    if omega >= 0.0:
        return max(spec.theta1 * d_star, spec.d_min)
    return max(0.5 * d_star, spec.d_min)


def _stop_test(eta: float, upper: float, eps: float) -> str | None:
    """Stop decision for one iteration.

    ``upper`` is the incumbent bound that was standing when the master
    produced ``eta`` — the bound the model was racing against.  Comparing
    against the post-update bound instead would abort a stage the moment a
    proposal lands below its own prediction, which is exactly the step
    worth keeping.

    A crossing (eta above the incumbent) terminates only when it lands
    within ``CROSSING_BAND`` of ``upper``; see the constant's note.
    """
    if not math.isfinite(upper):
        return None
    gap = abs(eta - upper)
    if abs(upper) >= 1e-12:
        if gap / abs(upper) < eps:
            return "gap"
        if upper < eta and gap <= CROSSING_BAND * abs(upper):
            return "crossing"
    else:
        if gap < eps:
            return "gap"
        if eta > upper:
            return "crossing"
    return None


def run_stage(spec: ProblemSpec, model: fem.FemModel, seed: DesignField,
              params: StageParams) -> StageResult:
    """Run one stage to its stop test (or the iteration cap).

    Returns the best binary design found, its objective value, and the
    per-iteration history. The seed itself only anchors cut 0; it never
    becomes the incumbent.
    """
    materials = spec.materials
    constraint = ConstraintSpec(spec.constraint.kind, params.target)
    filt = sensitivity.build_filter(spec.n_x, spec.n_y, spec.filter_radius)
    pool = CutPool()
    result = StageResult(design=seed, upper=np.inf)
    d_next = params.d0

    def analyzed_cut(index: int, design: DesignField, k_label: str):
        t0 = time.perf_counter()
        state = fem.analyze(model, design, materials, params.e_min,
                            context=f"stage {params.index}, "
                                    f"e_min={params.e_min:g}, {k_label}")
        elapsed = time.perf_counter() - t0
        w = sensitivity.raw_sensitivities(
            model, design, state["u"], state["adjoint"], materials,
            params.e_min)
        w_filtered = sensitivity.apply_filter(filt, w)
        cut = make_cut(index, design.values, state["value"], w_filtered,
                       d_next, stage=params.index)
        return state["value"], cut, elapsed

    f_0, cut0, t_fem = analyzed_cut(0, seed, "iteration 0")
    pool.add(cut0)
    result.n_fem = 1
    result.history.append(IterationRecord(
        stage=params.index, k=0, f=f_0, eta=math.nan, upper=math.inf,
        d=d_next, omega=math.nan, n_subproblems=0, active=(),
        fem_time=t_fem))

    upper = math.inf
    for k in range(1, spec.max_iters + 1):
        mres: MasterResult = solve_master(
            pool, constraint, materials, budget=spec.subproblem_budget)
        pool.exclusions.append(mres.active)
        design_k = DesignField(mres.design, binary=True)
        t0 = time.perf_counter()
        state = fem.analyze(model, design_k, materials, params.e_min,
                            context=f"stage {params.index}, "
                                    f"e_min={params.e_min:g}, iteration {k}")
        t_fem = time.perf_counter() - t0
        result.n_fem += 1
        f_k = state["value"]
        upper_prev = upper
        if f_k < upper:
            upper = f_k
            result.design = design_k
            result.upper = f_k

        stop = _stop_test(mres.eta, upper_prev, spec.eps)
        if stop is not None:
            result.history.append(IterationRecord(
                stage=params.index, k=k, f=f_k, eta=mres.eta, upper=upper,
                d=d_next, omega=math.nan,
                n_subproblems=mres.n_subproblems,
                active=tuple(sorted(mres.active)), fem_time=t_fem))
            result.status = stop
            break

        active = sorted(mres.active)
        omega = merit([pool.cuts[j].f_value for j in active],
                      [pool.cuts[j].radius for j in active], f_k, mres.eta)
        if params.adapt_radius:
            d_next = update_radius(
                spec, omega, [pool.cuts[j].radius for j in active])
        else:
            d_next = params.d0

        w = sensitivity.raw_sensitivities(
            model, design_k, state["u"], state["adjoint"], materials,
            params.e_min)
        w_filtered = sensitivity.apply_filter(filt, w)
        pool.add(make_cut(k, design_k.values, f_k, w_filtered, d_next,
                          stage=params.index))
        result.history.append(IterationRecord(
            stage=params.index, k=k, f=f_k, eta=mres.eta, upper=upper,
            d=d_next, omega=omega, n_subproblems=mres.n_subproblems,
            active=tuple(active), fem_time=t_fem))
    else:
        result.status = "max_iters"
        log.warning("stage %d hit the iteration cap (%d)", params.index,
                    spec.max_iters)

    if result.design is not seed:
        check = measure(result.design, constraint, materials)
        if not check["feasible"]:
            raise RuntimeError(
                f"stage {params.index} returned an infeasible design "
                f"(measure {check['value']:.6f} vs target {params.target})")
    return result
