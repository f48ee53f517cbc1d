"""Plane-stress bilinear-quad finite elements on a structured unit grid.

Assembly follows the classic vectorized pattern: one reference element
stiffness for unit Young's modulus, scaled per element by the design-
dependent modulus and scattered through a precomputed DOF map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import DesignField, MaterialSet, ProblemSpec

__all__ = [
    "FemModel",
    "SolverBreakdown",
    "element_stiffness",
    "build_model",
    "assemble",
    "solve_state",
    "objective_and_adjoint",
    "analyze",
]

POISSON = 0.3


class SolverBreakdown(RuntimeError):
    """Linear solve failed to reach the required residual."""


def element_stiffness(poisson_ratio: float = POISSON) -> np.ndarray:
    """8x8 stiffness of a unit-modulus, unit-square plane-stress quad.

    Node order is (bottom-left, bottom-right, top-right, top-left), two
    DOFs per node (x then y). Equals the 2x2 Gauss quadrature of B'CB.
    """
    nu = float(poisson_ratio)
    if not (0.0 < nu < 0.5):
        raise ValueError(f"poisson ratio {nu} outside (0, 0.5)")
    k = np.array([
        1 / 2 - nu / 6, 1 / 8 + nu / 8, -1 / 4 - nu / 12, -1 / 8 + 3 * nu / 8,
        -1 / 4 + nu / 12, -1 / 8 - nu / 8, nu / 6, 1 / 8 - 3 * nu / 8,
    ])
    ke = np.array([
        [k[0], k[1], k[2], k[3], k[4], k[5], k[6], k[7]],
        [k[1], k[0], k[7], k[6], k[5], k[4], k[3], k[2]],
        [k[2], k[7], k[0], k[5], k[6], k[3], k[4], k[1]],
        [k[3], k[6], k[5], k[0], k[7], k[2], k[1], k[4]],
        [k[4], k[5], k[6], k[7], k[0], k[1], k[2], k[3]],
        [k[5], k[4], k[3], k[2], k[1], k[0], k[7], k[6]],
        [k[6], k[3], k[4], k[1], k[2], k[7], k[0], k[5]],
        [k[7], k[2], k[1], k[4], k[3], k[6], k[5], k[0]],
    ]) / (1 - nu * nu)
    return ke


def _element_dofs(n_x: int, n_y: int) -> np.ndarray:
    """(n_e, 8) DOF indices per element, nodes ordered bl, br, tr, tl."""
    ex, ey = np.meshgrid(np.arange(n_x), np.arange(n_y), indexing="ij")
    n1 = ex * (n_y + 1) + ey            # bottom-left
    n2 = (ex + 1) * (n_y + 1) + ey      # bottom-right
    n3 = n2 + 1                         # top-right
    n4 = n1 + 1                         # top-left
    edof = np.stack(
        [2 * n1, 2 * n1 + 1, 2 * n2, 2 * n2 + 1,
         2 * n3, 2 * n3 + 1, 2 * n4, 2 * n4 + 1], axis=-1)
    return edof.reshape(n_x * n_y, 8)


@dataclass
class FemModel:
    """Immutable analysis-ready discretization of a ProblemSpec."""

    n_x: int
    n_y: int
    ke: np.ndarray
    edof: np.ndarray
    fixed: np.ndarray
    free: np.ndarray
    load: np.ndarray
    spring_dofs: np.ndarray
    spring_stiffness: np.ndarray
    objective: str
    output_dof: int | None

    @property
    def n_dofs(self) -> int:
        return self.load.size

    @property
    def n_elements(self) -> int:
        return self.edof.shape[0]


def build_model(spec: ProblemSpec) -> FemModel:
    n_dofs = spec.n_dofs
    load = np.zeros(n_dofs)
    for dof, val in spec.loads:
        load[dof] += val
    fixed = np.array(sorted(spec.fixed_dofs), dtype=int)
    free = np.setdiff1d(np.arange(n_dofs), fixed)
    sdofs = np.array([d for d, _ in spec.springs], dtype=int)
    svals = np.array([k for _, k in spec.springs], dtype=float)
    return FemModel(
        n_x=spec.n_x, n_y=spec.n_y,
        ke=element_stiffness(POISSON),
        edof=_element_dofs(spec.n_x, spec.n_y),
        fixed=fixed, free=free, load=load,
        spring_dofs=sdofs, spring_stiffness=svals,
        objective=spec.objective, output_dof=spec.output_dof,
    )


def _element_moduli(design: DesignField, materials: MaterialSet,
                    e_min: float | None) -> np.ndarray:
    e0 = materials.e_min if e_min is None else float(e_min)
    e = np.asarray(materials.young_moduli)
    return design.values @ (e - e0) + e0


def assemble(model: FemModel, design: DesignField, materials: MaterialSet,
             e_min: float | None = None) -> sp.csc_matrix:
    """Assembled stiffness on free DOFs (springs included, supports removed).

    Each element contributes (sum_m (E_m - e0) rho_em + e0) * ke; e_min
    overrides the material set's void stiffness for relaxation stages.
    """
    factors = _element_moduli(design, materials, e_min)
    edof = model.edof
    i_idx = np.repeat(edof, 8, axis=1).ravel()
    j_idx = np.tile(edof, (1, 8)).ravel()
    vals = (factors[:, None] * model.ke.ravel()[None, :]).ravel()
    n = model.n_dofs
    if model.spring_dofs.size:
        i_idx = np.concatenate([i_idx, model.spring_dofs])
        j_idx = np.concatenate([j_idx, model.spring_dofs])
        vals = np.concatenate([vals, model.spring_stiffness])
    k_full = sp.coo_matrix((vals, (i_idx, j_idx)), shape=(n, n)).tocsc()
    return k_full[model.free][:, model.free]


def solve_state(k_reduced: sp.spmatrix, f_reduced: np.ndarray,
                context: str = "") -> np.ndarray:
    """Solve K u = f on the reduced system to backward error 1e-8.

    Tries a sparse LU factorization first and falls back to conjugate
    gradients; raises SolverBreakdown (with the caller's context string)
    if neither passes the normwise backward-error test
    ||K u - f|| <= 1e-8 (||K|| ||u|| + ||f||).
    """
    return _factorize(k_reduced, context).solve(f_reduced)


class _Factor:
    """Reusable solve handle for one assembled stiffness matrix."""

    def __init__(self, k_reduced: sp.spmatrix, context: str = ""):
        self.k = k_reduced.tocsc()
        self.context = context
        # 1-norm of the symmetric matrix, for the backward-error test.
        self.norm_k = float(abs(self.k).sum(axis=0).max())
        try:
            self.lu = spla.splu(self.k)
        except RuntimeError:
            self.lu = None

    def _acceptable(self, u: np.ndarray, rhs: np.ndarray,
                    norm_rhs: float) -> bool:
        # Normwise backward error: the computed u solves a problem within
        # 1e-8 of this one. A plain ||r|| <= tol*||f|| test is unreachable
        # in double precision once void-to-solid stiffness ratios push
        # ||u|| many orders above ||f||.
        residual = np.linalg.norm(rhs - self.k @ u)
        return residual <= 1e-8 * (self.norm_k * np.linalg.norm(u) + norm_rhs)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        norm_rhs = np.linalg.norm(rhs)
        if norm_rhs == 0.0:
            return np.zeros_like(rhs)
        if self.lu is not None:
            u = self.lu.solve(rhs)
            # One refinement pass polishes moderately graded systems at the
            # cost of a single extra substitution with the factor in hand.
            if not np.isfinite(u).all() or not self._acceptable(u, rhs, norm_rhs):
                u = u + self.lu.solve(rhs - self.k @ u)
            if np.isfinite(u).all() and self._acceptable(u, rhs, norm_rhs):
                return u
        u, info = spla.cg(self.k, rhs, rtol=1e-10, maxiter=20000,
                          M=(spla.LinearOperator(self.k.shape, self.lu.solve)
                             if self.lu is not None else None))
        if info == 0 and self._acceptable(u, rhs, norm_rhs):
            return u
        raise SolverBreakdown(
            f"linear solve failed the backward-error test"
            f"{' (' + self.context + ')' if self.context else ''}")


def _factorize(k_reduced: sp.spmatrix, context: str = "") -> _Factor:
    return _Factor(k_reduced, context)


def objective_and_adjoint(model: FemModel, k_reduced: sp.spmatrix,
                          u: np.ndarray, factor: _Factor | None = None) -> dict:
    """Objective value and adjoint vector for the solved state.

    Compliance: f = load . u with adjoint -u (self-adjoint). Mechanism:
    f = u at the output DOF with adjoint -K^{-1} l for the unit selector l.
    Both u and the adjoint are full-length vectors (zeros on supports).
    """
    if model.objective == "compliance":
        value = float(model.load @ u)
        return {"value": value, "adjoint": -u}
    selector = np.zeros(model.n_dofs)
    selector[model.output_dof] = 1.0
    if factor is None:
        factor = _factorize(k_reduced, "adjoint solve")
    mu_free = factor.solve(-selector[model.free])
    mu = np.zeros(model.n_dofs)
    mu[model.free] = mu_free
    return {"value": float(u[model.output_dof]), "adjoint": mu}


def analyze(model: FemModel, design: DesignField, materials: MaterialSet,
            e_min: float | None = None, context: str = "") -> dict:
    """Assemble, solve, and evaluate one design: {value, u, adjoint}."""
    k_red = assemble(model, design, materials, e_min)
    factor = _factorize(k_red, context)
    u = np.zeros(model.n_dofs)
    u[model.free] = factor.solve(model.load[model.free])
    out = objective_and_adjoint(model, k_red, u, factor)
    out["u"] = u
    return out
