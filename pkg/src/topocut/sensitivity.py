"""Per-element objective sensitivities and conic-kernel filtering."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .fem import FemModel
from .model import DesignField, MaterialSet

__all__ = [
    "element_energies",
    "raw_single",
    "raw_multi",
    "raw_multi_gray",
    "raw_sensitivities",
    "build_filter",
    "apply_filter",
]


def element_energies(model: FemModel, u: np.ndarray, adjoint: np.ndarray) -> np.ndarray:
    """q_e = adjoint' K_e u per element (unit-modulus element matrix)."""
    ue = u[model.edof]
    me = adjoint[model.edof]
    return np.einsum("ea,ab,eb->e", me, model.ke, ue)


def raw_single(model: FemModel, design: DesignField, u: np.ndarray,
               adjoint: np.ndarray, materials: MaterialSet,
               e_min: float | None = None) -> np.ndarray:
    """Single-material sensitivity ((E1 - e0) rho_e + e0) * q_e, shape (n_e, 1).

    The modulus prefactor regularizes the plain derivative (E1 - e0) q_e so
    that void elements keep a vanishing, same-sign signal.
    """
    if design.n_materials != 1:
        raise ValueError("raw_single expects a single-material design")
    e0 = materials.e_min if e_min is None else float(e_min)
    e1 = materials.young_moduli[0]
    q = element_energies(model, u, adjoint)
    w = ((e1 - e0) * design.values[:, 0] + e0) * q
    return w[:, None]


def raw_multi(model: FemModel, design: DesignField, u: np.ndarray,
              adjoint: np.ndarray, materials: MaterialSet,
              e_min: float | None = None) -> np.ndarray:
    """Multi-material sensitivities for a binary design, shape (n_e, n_M).

    Channel m of element e scores the move to material m: keeping the
    current material m gives (E_m - e0) q_e; switching from material m' to
    m gives E_m (E_m' - e0) q_e; filling a void element gives e0 q_e, the
    same for every channel (lightest-density tie-break happens in the
    master problem through the mass row).
    """
    values = design.values
    if not np.isin(values, (0.0, 1.0)).all():
        raise ValueError("raw_multi expects a binary design")
    occ = values.sum(axis=1)
    if (occ > 1).any():
        raise ValueError("element with more than one active material")
    e0 = materials.e_min if e_min is None else float(e_min)
    e = np.asarray(materials.young_moduli)
    q = element_energies(model, u, adjoint)
    w = np.empty_like(values)
    void = occ == 0
    w[void] = e0 * q[void, None]
    solid = ~void
    holder = values[solid].argmax(axis=1)
    q_s = q[solid]
    # switch-to-m score for every channel, then overwrite the holder's own
    w[solid] = (e[holder] - e0)[:, None] * q_s[:, None] * e[None, :]
    w[solid, holder] = (e[holder] - e0) * q_s
    return w


def raw_multi_gray(model: FemModel, design: DesignField, u: np.ndarray,
                   adjoint: np.ndarray, materials: MaterialSet,
                   e_min: float | None = None) -> np.ndarray:
    """Multilinear extension of raw_multi to gray fields (stage seeds).

    Blends the keep/switch/fill cases by the channel values; on a binary
    exclusive design it reproduces raw_multi exactly.
    """
    values = design.values
    e0 = materials.e_min if e_min is None else float(e_min)
    e = np.asarray(materials.young_moduli)
    q = element_energies(model, u, adjoint)
    ediff = e - e0
    stiff = values @ ediff            # per-element design-weighted modulus
    occ = values.sum(axis=1)
    own = ediff[None, :] * values     # (n_e, n_M)
    w = own * q[:, None]
    w += e[None, :] * (stiff[:, None] - own) * q[:, None]
    w += e0 * (1.0 - occ)[:, None] * q[:, None]
    return w


def raw_sensitivities(model: FemModel, design: DesignField, u: np.ndarray,
                      adjoint: np.ndarray, materials: MaterialSet,
                      e_min: float | None = None) -> np.ndarray:
    """Dispatch on channel count and binariness."""
    if design.n_materials == 1:
        return raw_single(model, design, u, adjoint, materials, e_min)
    if design.binary:
        return raw_multi(model, design, u, adjoint, materials, e_min)
    return raw_multi_gray(model, design, u, adjoint, materials, e_min)


_FILTER_CACHE: dict[tuple[int, int, float], sp.csr_matrix] = {}


def build_filter(n_x: int, n_y: int, radius: float) -> sp.csr_matrix:
    """Row-normalized conic averaging operator over element centroids.

    Weight max(0, radius - distance) couples elements closer than the
    radius (in element units); each row is normalized to sum to one.
    Operators are cached per (n_x, n_y, radius).
    """
    if radius < 1:
        raise ValueError("filter radius must be >= 1")
    key = (int(n_x), int(n_y), float(radius))
    cached = _FILTER_CACHE.get(key)
    if cached is not None:
        return cached
    n_e = n_x * n_y
    reach = int(np.ceil(radius)) - 1
    rows, cols, vals = [], [], []
    for di in range(-reach, reach + 1):
        for dj in range(-reach, reach + 1):
            w = radius - np.hypot(di, dj)
            if w <= 0:
                continue
            ex = np.arange(max(0, -di), n_x - max(0, di))
            ey = np.arange(max(0, -dj), n_y - max(0, dj))
            e_to = (ex[:, None] * n_y + ey[None, :]).ravel()
            e_from = ((ex[:, None] + di) * n_y + (ey[None, :] + dj)).ravel()
            rows.append(e_to)
            cols.append(e_from)
            vals.append(np.full(e_to.size, w))
    op = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_e, n_e)).tocsr()
    norm = np.asarray(op.sum(axis=1)).ravel()
    op = sp.diags(1.0 / norm) @ op
    op = op.tocsr()
    _FILTER_CACHE[key] = op
    return op


def apply_filter(op: sp.csr_matrix, w: np.ndarray) -> np.ndarray:
    """Filtered field, each material channel averaged independently."""
    if op.shape[1] != w.shape[0]:
        raise ValueError("filter and field sizes do not match")
    return op @ w
