"""topocut: binary topology optimization by cutting planes and trust regions.

The toolkit solves minimum-compliance and compliant-mechanism layout
problems with one or several candidate materials. Designs stay binary
throughout: each iteration analyzes the current design with a plane-stress
finite element model, anchors a filtered first-order cut there, and asks a
small exact binary program — cuts, per-cut trust regions, and the resource
constraint — for the next design. Staged relaxation of the void stiffness
and the resource target keeps early iterations well conditioned.
"""

from .model import (ConstraintSpec, DesignField, MaterialSet, ProblemSpec,
                    PRESET_NAMES, initial_design, measure, preset,
                    single_material, validate)
from .fem import (FemModel, SolverBreakdown, analyze, assemble, build_model,
                  element_stiffness, objective_and_adjoint, solve_state)
from .sensitivity import (apply_filter, build_filter, raw_multi,
                          raw_multi_gray, raw_single, raw_sensitivities)
from .cuts import Cut, CutPool, cut_value, exclusion_list, make_cut, trust_region_row
from .milp import (BinaryProgram, MilpResult, MilpRow, brute_force, solve,
                   solve_lp_relaxation)
from .master import (MasterInfeasible, MasterResult, Selection,
                     build_subproblem, enumerate_selections, solve_master)
from .optimizer import (IterationRecord, StageParams, StageResult, merit,
                        run_stage, update_radius)
from .relaxation import RunResult, Stage, build_stages, run, schedule

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "ConstraintSpec", "DesignField", "MaterialSet", "ProblemSpec",
    "PRESET_NAMES", "initial_design", "measure", "preset",
    "single_material", "validate",
    # fem
    "FemModel", "SolverBreakdown", "analyze", "assemble", "build_model",
    "element_stiffness", "objective_and_adjoint", "solve_state",
    # sensitivity
    "apply_filter", "build_filter", "raw_multi", "raw_multi_gray",
    "raw_single", "raw_sensitivities",
    # cuts
    "Cut", "CutPool", "cut_value", "exclusion_list", "make_cut",
    "trust_region_row",
    # milp
    "BinaryProgram", "MilpResult", "MilpRow", "brute_force", "solve",
    "solve_lp_relaxation",
    # master
    "MasterInfeasible", "MasterResult", "Selection", "build_subproblem",
    "enumerate_selections", "solve_master",
    # optimizer
    "IterationRecord", "StageParams", "StageResult", "merit", "run_stage",
    "update_radius",
    # relaxation
    "RunResult", "Stage", "build_stages", "run", "schedule",
]
