"""First-order cuts and trust-region rows for the master problem."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Cut", "CutPool", "make_cut", "cut_value", "trust_region_row",
           "exclusion_list"]


@dataclass
class Cut:
    """Linear model of the objective anchored at one analyzed design.

    The stored form is value(x) = constant + coeffs . x, with
    constant = f_value - coeffs . anchor, so the anchor reproduces
    f_value exactly. ``radius`` bounds the trust-region row built from the
    anchor; ``eta_single`` caches the cut's own single-cut optimum once the
    master has solved it.
    """

    index: int
    anchor: np.ndarray        # (n_e, n_M)
    f_value: float
    coeffs: np.ndarray        # filtered sensitivities, (n_e, n_M)
    radius: float
    constant: float
    stage: int = 0
    eta_single: float | None = None


@dataclass
class CutPool:
    """Cuts of the current stage plus the master solutions already taken."""

    cuts: list[Cut] = field(default_factory=list)
    exclusions: list[frozenset[int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cuts)

    def add(self, cut: Cut) -> None:
        if cut.index != len(self.cuts):
            raise ValueError("cut indices must be consecutive")
        self.cuts.append(cut)

    def clear(self) -> None:
        self.cuts.clear()
        self.exclusions.clear()


def make_cut(index: int, anchor: np.ndarray, f_value: float,
             coeffs: np.ndarray, radius: float, stage: int = 0) -> Cut:
    """Build a cut from an analyzed design and its filtered sensitivities."""
    anchor = np.atleast_2d(np.asarray(anchor, dtype=float))
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if anchor.shape != coeffs.shape:
        raise ValueError("anchor and coefficient shapes differ")
    constant = float(f_value) - float((coeffs * anchor).sum())
    return Cut(index=index, anchor=anchor, f_value=float(f_value),
               coeffs=coeffs, radius=float(radius), constant=constant,
               stage=stage)


def cut_value(cut: Cut, values: np.ndarray) -> float:
    """Evaluate the cut's linear form at a design value array."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return cut.constant + float((cut.coeffs * values).sum())


def trust_region_row(cut: Cut) -> tuple[np.ndarray, float, float]:
    """Linearized move limit around the cut's anchor.

    Returns (coefficients, constant, bound) with the constraint reading
    coefficients . x + constant <= bound. Every channel of element e gets
    the coefficient (1 - 2 * occupancy_e) / (n_M n_e); the constant is
    sum(occupancy^2) / (n_M n_e). For binary anchors the left side equals
    the fraction of elements whose occupancy pattern changed.
    """
    n_e, n_m = cut.anchor.shape
    occ = cut.anchor.sum(axis=1)
    scale = 1.0 / (n_m * n_e)
    coeffs = np.repeat((1.0 - 2.0 * occ)[:, None] * scale, n_m, axis=1)
    constant = float((occ ** 2).sum()) * scale
    return coeffs, constant, cut.radius


def exclusion_list(pool: CutPool) -> list[frozenset[int]]:
    """Index sets of previously chosen active-cut selections."""
    return list(pool.exclusions)
