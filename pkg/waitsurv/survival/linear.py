"""Linear Cox proportional hazards model.

Log-risk is the dot product h = X @ coef (no intercept; a constant is absorbed
by the baseline hazard). Coefficients maximize the Breslow log partial
likelihood by Newton-Raphson with step halving; Wald standard errors come from
the inverse observed information at the optimum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, stats

from waitsurv.domain.errors import (
    DimensionMismatchError,
    NullModelError,
    SingularHessianError,
)
from waitsurv.domain.models import BaselineHazard, RiskScores, SurvivalDataset
from waitsurv.survival import core

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-8
MAX_HALVINGS = 30


@dataclass(frozen=True)
class LinearCphFit:
    """Fitted linear Cox model.

    `hazard_ratios` is computed as np.exp(coefficients), so the two always agree
    exactly. `log_likelihood` is the unpenalized log partial likelihood even when
    a ridge term was used.
    """

    feature_names: Tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    hazard_ratios: np.ndarray
    z_scores: np.ndarray
    p_values: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    gradient_norm: float
    baseline: BaselineHazard
    ridge: Optional[float] = None
    log_likelihood_trace: Tuple[float, ...] = field(default=(), repr=False)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.feature_names.index(name)])

    def p_value(self, name: str) -> float:
        return float(self.p_values[self.feature_names.index(name)])

    def summary_rows(self) -> List[Dict[str, Any]]:
        """Table rows: feature, coefficient, hazard ratio, standard error, z, p-value."""
        return [
            {
                "feature": name,
                "coefficient": float(self.coefficients[j]),
                "hazard_ratio": float(self.hazard_ratios[j]),
                "standard_error": float(self.standard_errors[j]),
                "z": float(self.z_scores[j]),
                "p_value": float(self.p_values[j]),
            }
            for j, name in enumerate(self.feature_names)
        ]


@dataclass(frozen=True)
class EliminationStep:
    step: int
    feature: str
    p_value: float


def _derivatives(
    dataset: SurvivalDataset, table: core.EventTable, beta: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of the log partial likelihood and the observed information matrix."""
    X = dataset.features
    eta = X @ beta
    nll_grad = core.nll_gradient(dataset, eta)
    gradient = -X.T @ nll_grad

    # pi_j = exp(eta_j) * sum_{t_k <= T_j} d_k / W_k
    pi = nll_grad + dataset.events.astype(np.float64)
    information = (X * pi[:, None]).T @ X

    weights = np.exp(eta - eta.max())
    ordered = table.order
    cum_weights = np.cumsum(weights[ordered])
    cum_weighted_x = np.cumsum(weights[ordered, None] * X[ordered], axis=0)
    last = table.at_risk_counts - 1
    means = cum_weighted_x[last] / cum_weights[last, None]
    information -= (means * table.event_counts[:, None]).T @ means
    return gradient, information


def _penalized(loglik: float, beta: np.ndarray, ridge: float) -> float:
    return loglik - 0.5 * ridge * float(beta @ beta)


def _factor(information: np.ndarray, n_features: int):
    try:
        factor = linalg.cho_factor(information, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SingularHessianError(
            f"Hessian of the log partial likelihood is singular ({n_features} features). "
            "Screen collinear features with VIF or set a ridge penalty."
        ) from exc
    if np.any(np.diag(factor[0]) <= 1e-12 * max(1.0, float(np.abs(information).max()))):
        raise SingularHessianError(
            "Hessian of the log partial likelihood is numerically singular. "
            "Screen collinear features with VIF or set a ridge penalty."
        )
    return factor


def fit(
    dataset: SurvivalDataset,
    *,
    max_iterations: int = 100,
    tolerance: float = 1e-8,
    ridge: Optional[float] = None,
) -> LinearCphFit:
    """Fit coefficients by Newton-Raphson.

    Converged when max |step| < tolerance or the gradient norm < 1e-8. A step
    that lowers the (penalized) log likelihood is halved up to 30 times.

    Raises:
        NoEventsError: If the dataset has no observed events.
        SingularHessianError: If the information matrix is not positive definite.
    """
    if dataset.n_features == 0:
        raise DimensionMismatchError("cannot fit a Cox model without features")
    table = core.event_table(dataset)
    penalty = float(ridge or 0.0)
    ridge_matrix = penalty * np.eye(dataset.n_features)
    X = dataset.features

    beta = np.zeros(dataset.n_features)
    loglik = -core.neg_log_partial_likelihood(dataset, X @ beta)
    objective = _penalized(loglik, beta, penalty)
    trace = [loglik]
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        gradient, information = _derivatives(dataset, table, beta)
        gradient = gradient - penalty * beta
        if np.linalg.norm(gradient) < GRADIENT_TOLERANCE:
            converged = True
            break
        factor = _factor(information + ridge_matrix, dataset.n_features)
        step = linalg.cho_solve(factor, gradient)

        candidate = beta + step
        candidate_ll = -core.neg_log_partial_likelihood(dataset, X @ candidate)
        candidate_obj = _penalized(candidate_ll, candidate, penalty)
        halvings = 0
        while candidate_obj < objective and halvings < MAX_HALVINGS:
            step = step / 2.0
            candidate = beta + step
            candidate_ll = -core.neg_log_partial_likelihood(dataset, X @ candidate)
            candidate_obj = _penalized(candidate_ll, candidate, penalty)
            halvings += 1

        if candidate_obj < objective:
            # No ascent direction left at floating-point resolution.
            converged = bool(np.max(np.abs(step)) < tolerance)
            break

        beta, loglik, objective = candidate, candidate_ll, candidate_obj
        trace.append(loglik)
        logger.debug(
            "Newton iteration %d: loglik=%.10f max|step|=%.3e halvings=%d",
            iterations, loglik, float(np.max(np.abs(step))), halvings,
        )
        if np.max(np.abs(step)) < tolerance:
            converged = True
            break

    if not converged:
        logger.warning(
            "Newton-Raphson did not converge in %d iterations (loglik=%.6f)",
            max_iterations, loglik,
        )

    gradient, information = _derivatives(dataset, table, beta)
    gradient = gradient - penalty * beta
    factor = _factor(information + ridge_matrix, dataset.n_features)
    covariance = linalg.cho_solve(factor, np.eye(dataset.n_features))
    standard_errors = np.sqrt(np.diag(covariance))
    z_scores = beta / standard_errors
    p_values = 2.0 * stats.norm.sf(np.abs(z_scores))

    return LinearCphFit(
        feature_names=dataset.feature_names,
        coefficients=beta,
        standard_errors=standard_errors,
        hazard_ratios=np.exp(beta),
        z_scores=z_scores,
        p_values=p_values,
        log_likelihood=loglik,
        iterations=iterations,
        converged=converged,
        gradient_norm=float(np.linalg.norm(gradient)),
        baseline=core.breslow_baseline(dataset, X @ beta),
        ridge=ridge,
        log_likelihood_trace=tuple(trace),
    )


def backward_eliminate(
    dataset: SurvivalDataset,
    alpha: float = 0.05,
    *,
    max_iterations: int = 100,
    tolerance: float = 1e-8,
    ridge: Optional[float] = None,
) -> Tuple[LinearCphFit, List[EliminationStep]]:
    """Drop the least significant feature until every p-value <= alpha.

    Ties on the largest p-value drop the lexicographically smallest name.

    Raises:
        NullModelError: If every feature would be eliminated.
    """
    current = dataset
    trace: List[EliminationStep] = []
    while True:
        result = fit(current, max_iterations=max_iterations, tolerance=tolerance, ridge=ridge)
        if not trace and not result.converged:
            logger.warning("Backward elimination starts from an unconverged fit")
        candidates = [
            (float(p), name)
            for name, p in zip(result.feature_names, result.p_values)
            if p > alpha
        ]
        if not candidates:
            return result, trace
        p_value, name = min(candidates, key=lambda item: (-item[0], item[1]))
        if current.n_features == 1:
            raise NullModelError(
                f"null model reached: last feature '{name}' has p={p_value:.4f} > {alpha}"
            )
        trace.append(EliminationStep(step=len(trace) + 1, feature=name, p_value=p_value))
        logger.info("Backward elimination step %d: removed %s (p=%.4f)", len(trace), name, p_value)
        current = current.drop(name)


def predict_risk(
    fit_result: LinearCphFit, features: SurvivalDataset | Sequence[float] | np.ndarray
) -> RiskScores:
    """Log-risk X @ coefficients for a dataset (columns matched by name) or raw matrix."""
    if isinstance(features, SurvivalDataset):
        matrix = features.select(fit_result.feature_names).features
    else:
        matrix = np.asarray(features, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2 or matrix.shape[1] != fit_result.n_features:
        raise DimensionMismatchError(
            f"expected {fit_result.n_features} features, got shape {matrix.shape}"
        )
    return RiskScores(matrix @ fit_result.coefficients)
