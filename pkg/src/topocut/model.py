"""Problem definitions: materials, constraints, design fields, presets.

The structured grid uses unit square elements. Nodes are numbered
column-by-column from the bottom-left corner (node = ix*(n_y+1) + iy) and
each node carries an x and a y displacement DOF (2*node, 2*node+1).
Elements are numbered the same way: e = ex*n_y + ey.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np

__all__ = [
    "MaterialSet",
    "ConstraintSpec",
    "DesignField",
    "ProblemSpec",
    "single_material",
    "preset",
    "PRESET_NAMES",
    "validate",
    "initial_design",
    "measure",
    "node_index",
    "element_centroids",
    "to_config",
    "parse_config",
    "from_config",
]


# ---------------------------------------------------------------------------
# grid helpers

def node_index(n_y: int, ix, iy):
    """Node id at grid position (ix, iy) on an n_x-by-n_y element grid."""
    return ix * (n_y + 1) + iy


def dof_x(node):
    return 2 * node


def dof_y(node):
    return 2 * node + 1


def element_centroids(n_x: int, n_y: int) -> np.ndarray:
    """(n_e, 2) element centroid coordinates, element id = ex*n_y + ey."""
    ex, ey = np.meshgrid(np.arange(n_x), np.arange(n_y), indexing="ij")
    return np.column_stack([ex.ravel() + 0.5, ey.ravel() + 0.5]).astype(float)


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class MaterialSet:
    """Candidate materials with a shared minimum (void) stiffness.

    Parameters
    ----------
    young_moduli : tuple of float
        Young's modulus of each candidate, dimensionless.
    densities : tuple of float
        Normalized density of each candidate (mass per fully occupied
        element, relative to the heaviest material being 1).
    e_min : float
        Stiffness assigned to void regions so the global matrix stays
        nonsingular. Relaxation stages may temporarily raise it.
    """

    young_moduli: tuple[float, ...] = (1.0,)
    densities: tuple[float, ...] = (1.0,)
    e_min: float = 1e-9

    @property
    def n_materials(self) -> int:
        return len(self.young_moduli)

    def violations(self) -> list[str]:
        out = []
        if len(self.young_moduli) != len(self.densities):
            out.append("materials: young_moduli and densities lengths differ")
        if len(self.young_moduli) == 0:
            out.append("materials: at least one candidate required")
        if not (self.e_min > 0):
            out.append("materials: e_min must be > 0")
        for m, e in enumerate(self.young_moduli):
            if not (e > self.e_min):
                out.append(f"materials: E_{m + 1} = {e} must exceed e_min = {self.e_min}")
        for m, d in enumerate(self.densities):
            if not (d > 0):
                out.append(f"materials: density {m + 1} must be > 0")
        return out


def single_material(e_min: float = 1e-9) -> MaterialSet:
    return MaterialSet((1.0,), (1.0,), e_min)


@dataclass(frozen=True)
class ConstraintSpec:
    """Resource constraint: total volume (single material) or total mass."""

    kind: str = "volume"  # "volume" | "mass"
    target: float = 0.5

    def violations(self, n_materials: int) -> list[str]:
        out = []
        if self.kind not in ("volume", "mass"):
            out.append(f"constraint: unknown kind '{self.kind}'")
        if not (0.0 < self.target <= 1.0):
            out.append(f"constraint: target {self.target} must lie in (0, 1]")
        if self.kind == "volume" and n_materials != 1:
            out.append("constraint: volume kind requires single material")
        return out


class DesignField:
    """Per-element, per-material occupancy values in [0, 1].

    ``binary`` marks fields whose entries are exactly 0/1 with at most one
    active material per element. Gray fields appear only as stage seeds.
    """

    __slots__ = ("values", "binary")

    def __init__(self, values, binary: bool = False):
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        self.values = v
        self.binary = bool(binary)

    @classmethod
    def uniform(cls, n_elements: int, n_materials: int, value: float) -> "DesignField":
        return cls(np.full((n_elements, n_materials), float(value)), binary=False)

    @property
    def n_elements(self) -> int:
        return self.values.shape[0]

    @property
    def n_materials(self) -> int:
        return self.values.shape[1]

    def occupancy(self) -> np.ndarray:
        """Per-element sum over material channels."""
        return self.values.sum(axis=1)

    def material_map(self) -> np.ndarray:
        """Per-element material index, 1-based; 0 = void. Binary fields only."""
        occ = self.occupancy()
        out = np.where(occ > 0.5, self.values.argmax(axis=1) + 1, 0)
        return out.astype(int)


@dataclass(frozen=True)
class ProblemSpec:
    """Full problem description: geometry, BCs, materials, and solver knobs."""

    name: str
    n_x: int
    n_y: int
    objective: str = "compliance"  # "compliance" | "mechanism"
    fixed_dofs: tuple[int, ...] = ()
    loads: tuple[tuple[int, float], ...] = ()
    springs: tuple[tuple[int, float], ...] = ()
    output_dof: int | None = None
    materials: MaterialSet = field(default_factory=single_material)
    constraint: ConstraintSpec = field(default_factory=ConstraintSpec)
    filter_radius: float = 2.0
    eps: float = 5e-3
    d0: float = 0.4
    theta1: float = 0.7
    theta2: float = 1.5
    d_min: float = 1e-3
    d_max: float = 0.6
    scheme: str = "scheme-1"  # "scheme-1" | "scheme-2"
    relax_from: float | None = None  # starting target of the scheme-2 ramp
    relax_stages: int = 0  # number of ramp stages in scheme-2
    e0_relaxed: float = 1e-2
    dv: float = 1.0 / 12.0  # per-stage target decrement of the stepped baseline
    max_iters: int = 100
    subproblem_budget: int = 32
    mirror_y: bool = False  # exports mirror the half model across its bottom edge

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_y

    @property
    def n_nodes(self) -> int:
        return (self.n_x + 1) * (self.n_y + 1)

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes


# ---------------------------------------------------------------------------
# operations

def validate(spec: ProblemSpec) -> list[str]:
    """Check every structural invariant; return human-readable violations."""
    out: list[str] = []
    if spec.n_x < 1 or spec.n_y < 1:
        out.append(f"resolution {spec.n_x}x{spec.n_y} must be at least 1x1")
    if spec.objective not in ("compliance", "mechanism"):
        out.append(f"unknown objective '{spec.objective}'")
    if spec.objective == "mechanism" and spec.output_dof is None:
        out.append("mechanism objective requires an output DOF")
    out.extend(spec.materials.violations())
    out.extend(spec.constraint.violations(spec.materials.n_materials))
    if not (spec.filter_radius >= 1):
        out.append("filter radius must be >= 1")
    if not (spec.eps > 0):
        out.append("eps must be > 0")
    if not (0 < spec.theta1 < 1):
        out.append("theta1 must lie in (0, 1)")
    if not (spec.theta2 > 1):
        out.append("theta2 must be > 1")
    if not (0 < spec.d_min < spec.d_max <= 1):
        out.append("need 0 < d_min < d_max <= 1")
    if not (0 < spec.d0 <= 1):
        out.append("d0 must lie in (0, 1]")
    if spec.scheme not in ("scheme-1", "scheme-2"):
        out.append(f"unknown scheme '{spec.scheme}'")
    if spec.scheme == "scheme-2":
        if spec.relax_stages < 2:
            out.append("scheme-2 needs relax_stages >= 2")
        if spec.relax_from is None or spec.relax_from < spec.constraint.target:
            out.append("scheme-2 needs relax_from >= the constraint target")
    if not (0 < spec.dv <= 1):
        out.append("dv must lie in (0, 1]")
    if spec.max_iters < 1:
        out.append("max_iters must be >= 1")
    if spec.subproblem_budget < 1:
        out.append("subproblem_budget must be >= 1")
    n_dofs = spec.n_dofs
    for d in spec.fixed_dofs:
        if not (0 <= d < n_dofs):
            out.append(f"fixed DOF {d} out of range")
    if len(set(spec.fixed_dofs)) != len(spec.fixed_dofs):
        out.append("fixed DOFs contain duplicates")
    for d, v in spec.loads:
        if not (0 <= d < n_dofs):
            out.append(f"load DOF {d} out of range")
        if d in spec.fixed_dofs:
            out.append(f"load applied to fixed DOF {d}")
    for d, k in spec.springs:
        if not (0 <= d < n_dofs):
            out.append(f"spring DOF {d} out of range")
        if not (k > 0):
            out.append(f"spring stiffness {k} must be > 0")
    if spec.output_dof is not None:
        if not (0 <= spec.output_dof < n_dofs):
            out.append(f"output DOF {spec.output_dof} out of range")
        if spec.output_dof in spec.fixed_dofs:
            out.append("output DOF is fixed")
    return out


def initial_design(spec: ProblemSpec, target: float | None = None) -> DesignField:
    """Uniform gray starting field at the given (or the spec's) target.

    Multi-material fields set every channel to the target; the per-element
    exclusivity rule applies to binary fields only, so the gray seed may
    exceed unit occupancy.
    """
    t = spec.constraint.target if target is None else float(target)
    return DesignField.uniform(spec.n_elements, spec.materials.n_materials, t)


def measure(design: DesignField, constraint: ConstraintSpec,
            materials: MaterialSet | None = None) -> dict:
    """Volume or mass fraction of a design and its feasibility.

    Returns ``{"value": fraction, "feasible": bool}``. Mass feasibility also
    requires at most unit occupancy per element.
    """
    values = design.values
    n_e = values.shape[0]
    tol = 1e-9
    if constraint.kind == "volume":
        if values.shape[1] != 1:
            raise ValueError("volume constraint expects a single-channel design")
        value = float(values.sum()) / n_e
        feasible = value <= constraint.target + tol
    else:
        if materials is None:
            raise ValueError("mass constraint needs the material set")
        if values.shape[1] != materials.n_materials:
            raise ValueError("design channel count does not match the material set")
        dens = np.asarray(materials.densities)
        value = float((values @ dens).sum()) / n_e
        exclusive = bool((values.sum(axis=1) <= 1 + tol).all())
        feasible = value <= constraint.target + tol and exclusive
    return {"value": value, "feasible": feasible}


# ---------------------------------------------------------------------------
# presets

MATERIALS_2 = MaterialSet((0.55, 1.0), (0.5, 1.0))
MATERIALS_5_SET1 = MaterialSet((0.4, 0.7, 0.85, 0.9, 1.0), (0.3, 0.5, 0.65, 0.8, 1.0))
MATERIALS_5_SET2 = MaterialSet((0.43, 0.7, 0.85, 0.94, 1.0), (0.3, 0.5, 0.65, 0.8, 1.0))


def _mbb(n_x: int, n_y: int) -> dict:
    # Half of a simply supported beam: symmetry plane on the left edge,
    # roller under the right end, unit downward load at the top-left corner.
    fixed = [dof_x(node_index(n_y, 0, iy)) for iy in range(n_y + 1)]
    fixed.append(dof_y(node_index(n_y, n_x, 0)))
    load = [(dof_y(node_index(n_y, 0, n_y)), -1.0)]
    return dict(objective="compliance", fixed_dofs=tuple(fixed), loads=tuple(load))


def _cantilever(n_x: int, n_y: int) -> dict:
    fixed = []
    for iy in range(n_y + 1):
        node = node_index(n_y, 0, iy)
        fixed += [dof_x(node), dof_y(node)]
    load = [(dof_y(node_index(n_y, n_x, n_y // 2)), -1.0)]
    return dict(objective="compliance", fixed_dofs=tuple(fixed), loads=tuple(load))


def _mechanism(n_x: int, n_y: int) -> dict:
    # Displacement inverter, upper half of a square domain. The bottom edge
    # is the symmetry line (u_y = 0); the input force pushes the bottom-left
    # corner to the right and the objective drives the bottom-right corner
    # to the left. Both ports carry grounding springs.
    fixed = [dof_y(node_index(n_y, ix, 0)) for ix in range(n_x + 1)]
    top_left = node_index(n_y, 0, n_y)
    fixed += [dof_x(top_left), dof_y(top_left)]
    dof_in = dof_x(node_index(n_y, 0, 0))
    dof_out = dof_x(node_index(n_y, n_x, 0))
    return dict(
        objective="mechanism",
        fixed_dofs=tuple(fixed),
        loads=((dof_in, 1.0),),
        springs=((dof_in, 0.1), (dof_out, 0.1)),
        output_dof=dof_out,
        mirror_y=True,
    )


_PRESETS = {
    "mbb": dict(
        build=_mbb, n_x=240, n_y=80, materials=single_material(),
        constraint=ConstraintSpec("volume", 0.4), filter_radius=4.0, d0=0.4,
        scheme="scheme-1",
    ),
    "cantilever": dict(
        build=_cantilever, n_x=240, n_y=120, materials=single_material(),
        constraint=ConstraintSpec("volume", 0.3), filter_radius=4.0, d0=0.5,
        scheme="scheme-1",
    ),
    "mechanism": dict(
        build=_mechanism, n_x=200, n_y=100, materials=single_material(),
        constraint=ConstraintSpec("volume", 0.3), filter_radius=2.0, d0=0.3,
        scheme="scheme-1",
    ),
    "mbb2mat": dict(
        build=_mbb, n_x=120, n_y=60, materials=MATERIALS_2,
        constraint=ConstraintSpec("mass", 0.4), filter_radius=2.0, d0=0.2,
        scheme="scheme-2", relax_from=0.6, relax_stages=7,
    ),
    "cantilever5mat": dict(
        build=_cantilever, n_x=120, n_y=80, materials=MATERIALS_5_SET1,
        constraint=ConstraintSpec("mass", 0.3), filter_radius=3.0, d0=0.5,
        scheme="scheme-2", relax_from=0.5, relax_stages=7,
    ),
    "mechanism5mat": dict(
        build=_mechanism, n_x=200, n_y=100, materials=MATERIALS_5_SET1,
        constraint=ConstraintSpec("mass", 0.3), filter_radius=2.0, d0=0.3,
        scheme="scheme-2", relax_from=0.5, relax_stages=7,
    ),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, n_x: int | None = None, n_y: int | None = None,
           **overrides) -> ProblemSpec:
    """Build a named preset, optionally at a different resolution.

    Keyword overrides are applied to the resulting :class:`ProblemSpec`
    fields (boundary conditions are regenerated for the chosen resolution
    first, so they cannot be overridden here).
    """
    if name not in _PRESETS:
        raise KeyError(f"unknown preset '{name}' (have: {', '.join(_PRESETS)})")
    p = dict(_PRESETS[name])
    build = p.pop("build")
    nx = int(n_x if n_x is not None else p.pop("n_x"))
    ny = int(n_y if n_y is not None else p.pop("n_y"))
    p.pop("n_x", None)
    p.pop("n_y", None)
    bc = build(nx, ny)
    spec = ProblemSpec(name=name, n_x=nx, n_y=ny, **bc, **p)
    if overrides:
        spec = replace(spec, **overrides)
    return spec


# ---------------------------------------------------------------------------
# flat key=value serialization

def _fmt_pairs(pairs) -> str:
    return ";".join(f"{d}:{v!r}" for d, v in pairs)


def _parse_pairs(text: str):
    if not text:
        return ()
    out = []
    for item in text.split(";"):
        d, v = item.split(":")
        out.append((int(d), float(v)))
    return tuple(out)


def _fmt_floats(vals) -> str:
    return ",".join(repr(float(v)) for v in vals)


def to_config(spec: ProblemSpec) -> str:
    """Serialize a spec to flat ``key = value`` text (lossless round-trip)."""
    lines = [
        f"name = {spec.name}",
        f"n_x = {spec.n_x}",
        f"n_y = {spec.n_y}",
        f"objective = {spec.objective}",
        f"fixed_dofs = {','.join(str(d) for d in spec.fixed_dofs)}",
        f"loads = {_fmt_pairs(spec.loads)}",
        f"springs = {_fmt_pairs(spec.springs)}",
        f"output_dof = {'' if spec.output_dof is None else spec.output_dof}",
        f"young_moduli = {_fmt_floats(spec.materials.young_moduli)}",
        f"densities = {_fmt_floats(spec.materials.densities)}",
        f"e_min = {spec.materials.e_min!r}",
        f"kind = {spec.constraint.kind}",
        f"target = {spec.constraint.target!r}",
        f"filter_radius = {spec.filter_radius!r}",
        f"eps = {spec.eps!r}",
        f"d0 = {spec.d0!r}",
        f"theta1 = {spec.theta1!r}",
        f"theta2 = {spec.theta2!r}",
        f"d_min = {spec.d_min!r}",
        f"d_max = {spec.d_max!r}",
        f"scheme = {spec.scheme}",
        f"relax_from = {'' if spec.relax_from is None else repr(spec.relax_from)}",
        f"relax_stages = {spec.relax_stages}",
        f"e0_relaxed = {spec.e0_relaxed!r}",
        f"dv = {spec.dv!r}",
        f"max_iters = {spec.max_iters}",
        f"subproblem_budget = {spec.subproblem_budget}",
        f"mirror_y = {int(spec.mirror_y)}",
    ]
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` text; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def from_config(cfg: dict[str, str]) -> ProblemSpec:
    """Rebuild a ProblemSpec from a full flat-config mapping."""
    def get(key, default=None):
        v = cfg.get(key, "")
        return v if v != "" else default

    materials = MaterialSet(
        tuple(float(x) for x in cfg["young_moduli"].split(",")),
        tuple(float(x) for x in cfg["densities"].split(",")),
        float(cfg["e_min"]),
    )
    constraint = ConstraintSpec(cfg["kind"], float(cfg["target"]))
    fixed = cfg.get("fixed_dofs", "")
    out_dof = get("output_dof")
    return ProblemSpec(
        name=cfg.get("name", "custom"),
        n_x=int(cfg["n_x"]),
        n_y=int(cfg["n_y"]),
        objective=cfg.get("objective", "compliance"),
        fixed_dofs=tuple(int(d) for d in fixed.split(",")) if fixed else (),
        loads=_parse_pairs(cfg.get("loads", "")),
        springs=_parse_pairs(cfg.get("springs", "")),
        output_dof=None if out_dof is None else int(out_dof),
        materials=materials,
        constraint=constraint,
        filter_radius=float(get("filter_radius", 2.0)),
        eps=float(get("eps", 5e-3)),
        d0=float(get("d0", 0.4)),
        theta1=float(get("theta1", 0.7)),
        theta2=float(get("theta2", 1.5)),
        d_min=float(get("d_min", 1e-3)),
        d_max=float(get("d_max", 0.6)),
        scheme=cfg.get("scheme", "scheme-1"),
        relax_from=None if get("relax_from") is None else float(cfg["relax_from"]),
        relax_stages=int(get("relax_stages", 0)),
        e0_relaxed=float(get("e0_relaxed", 1e-2)),
        dv=float(get("dv", 1.0 / 12.0)),
        max_iters=int(get("max_iters", 100)),
        subproblem_budget=int(get("subproblem_budget", 32)),
        mirror_y=bool(int(get("mirror_y", 0))),
    )
