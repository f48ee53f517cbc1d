"""Staged parameter relaxation chaining the stage loop.

Early stages run with a raised void stiffness (and, in the ramped scheme,
a loosened resource target) to keep the state problem well conditioned
while the design is far from binary-optimal; each stage seeds the next,
and the last stage enforces the true void stiffness and target.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from . import fem
from .model import DesignField, ProblemSpec, initial_design
from .optimizer import IterationRecord, StageParams, StageResult, run_stage

__all__ = ["Stage", "RunResult", "schedule", "build_stages", "run"]

log = logging.getLogger(__name__)

MODES = ("adaptive", "fixed", "gbd-e0", "gbd-vt")


@dataclass(frozen=True)
class Stage:
    e_min: float
    target: float


@dataclass
class RunResult:
    design: DesignField
    objective: float
    history: list[IterationRecord] = field(default_factory=list)
    n_fem: int = 0
    status: str = "ok"            # "ok" | "failed: <reason>"
    stages: list[StageResult] = field(default_factory=list)


def schedule(p0: float, pd: float, n_p: int, e0_relaxed: float = 1e-2,
             e0_final: float = 1e-9) -> list[Stage]:
    """Exponential target ramp from p0 to pd over n_p relaxed stages.

    Stage l runs at target p0 * exp(-((l-1)/(n_p-1)) * log(p0/pd)) with the
    relaxed void stiffness; a final extra stage enforces (e0_final, pd).
    Endpoints are exact: stage 1 is p0 and stage n_p is pd.
    """
    if not (p0 >= pd > 0):
        raise ValueError("need p0 >= pd > 0")
    if n_p < 2:
        raise ValueError("need at least two ramp stages")
    ratio = math.log(p0 / pd)
    targets = [p0 * math.exp(-(l / (n_p - 1)) * ratio) for l in range(n_p)]
    targets[0] = p0
    targets[-1] = pd
    stages = [Stage(e0_relaxed, t) for t in targets]
    stages.append(Stage(e0_final, pd))
    return stages


def build_stages(spec: ProblemSpec, mode: str = "adaptive") -> list[Stage]:
    """Stage list for a spec under the requested mode."""
    if mode not in MODES:
        raise ValueError(f"unknown mode '{mode}' (have: {', '.join(MODES)})")
    target = spec.constraint.target
    e0_final = spec.materials.e_min
    if mode == "gbd-vt":
        # Stepped-target baseline: start fully solid, tighten by dv per
        # stage, no stiffness relaxation, trust region left vacuous.
        stages = []
        t = 1.0
        while t > target + 1e-12:
            stages.append(Stage(e0_final, t))
            t -= spec.dv
        stages.append(Stage(e0_final, target))
        return stages
    if mode == "gbd-e0" or spec.scheme == "scheme-1":
        return [Stage(spec.e0_relaxed, target), Stage(e0_final, target)]
    return schedule(spec.relax_from, target, spec.relax_stages,
                    spec.e0_relaxed, e0_final)


def run(spec: ProblemSpec, mode: str = "adaptive") -> RunResult:
    """Full optimization: chained stages, each seeding the next.

    The first stage starts from the uniform gray field at its own target;
    every later stage restarts the cut pool and trust-region radius around
    the previous stage's binary optimum. A stage failure aborts the chain
    and returns the last feasible incumbent with a "failed" status.
    """
    stages = build_stages(spec, mode)
    model = fem.build_model(spec)
    fixed_radius = mode in ("fixed", "gbd-e0", "gbd-vt")
    d0 = 1.0 if mode in ("gbd-e0", "gbd-vt") else spec.d0
    out = RunResult(design=initial_design(spec, stages[0].target),
                    objective=math.inf)
    seed: DesignField = out.design
    for index, stage in enumerate(stages, start=1):
        params = StageParams(index=index, e_min=stage.e_min,
                             target=stage.target, d0=d0,
                             adapt_radius=not fixed_radius)
        try:
            sres: StageResult = run_stage(spec, model, seed, params)
        except Exception as exc:  # stage failure: keep the last incumbent
            log.error("stage %d failed: %s", index, exc)
            out.status = f"failed: {exc}"
            return out
        out.stages.append(sres)
        out.history.extend(sres.history)
        out.n_fem += sres.n_fem
        out.design = sres.design
        out.objective = sres.upper
        seed = sres.design
    return out
