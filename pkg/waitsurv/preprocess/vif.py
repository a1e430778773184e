"""Variance inflation factors and iterative multicollinearity screening."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from waitsurv.domain.errors import DataError
from waitsurv.domain.models import SurvivalDataset

logger = logging.getLogger(__name__)

# 1 - R^2 at or below this is treated as exact collinearity.
COLLINEAR_RESIDUAL = 1e-10


@dataclass(frozen=True)
class VifRemoval:
    step: int
    feature: str
    vif: float


def vif(dataset: SurvivalDataset) -> np.ndarray:
    """VIF_j = 1 / (1 - R_j^2), R_j^2 from regressing feature j on the rest plus an intercept.

    Exactly collinear features get +inf instead of an error.

    Raises:
        DataError: If n_samples <= n_features or a feature is constant.
    """
    X = dataset.features
    n, p = X.shape
    if n <= p:
        raise DataError(f"VIF needs more samples ({n}) than features ({p})")
    values = np.empty(p)
    ones = np.ones((n, 1))
    for j in range(p):
        target = X[:, j]
        centered = target - target.mean()
        total = float(centered @ centered)
        if total == 0.0:
            raise DataError("constant feature has no variance inflation factor", column=dataset.feature_names[j])
        design = np.hstack((ones, np.delete(X, j, axis=1)))
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        residual = target - design @ coef
        r_squared = max(0.0, 1.0 - float(residual @ residual) / total)
        unexplained = 1.0 - r_squared
        values[j] = np.inf if unexplained <= COLLINEAR_RESIDUAL else 1.0 / unexplained
    return values


def vif_screen(
    dataset: SurvivalDataset, threshold: float = 5.0
) -> Tuple[SurvivalDataset, List[VifRemoval]]:
    """Remove the feature with the highest VIF above `threshold`, recompute, repeat.

    On equal VIFs the feature listed last goes first, so of two identical
    columns the earlier one is kept.
    """
    current = dataset
    removals: List[VifRemoval] = []
    while current.n_features > 1:
        values = vif(current)
        worst = max(range(current.n_features), key=lambda j: (values[j], j))
        if not values[worst] > threshold:
            break
        name = current.feature_names[worst]
        removals.append(VifRemoval(step=len(removals) + 1, feature=name, vif=float(values[worst])))
        logger.info("VIF screen: removed %s (VIF=%s)", name, f"{values[worst]:.3f}")
        current = current.drop(name)
    return current, removals
