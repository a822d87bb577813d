"""Holder and Lehmer centralities of per-observation density values.

Everything is evaluated in the log domain through max-shifted
log-sum-exp: raw powers h^alpha overflow beyond |alpha| of roughly 30 on
realistic densities, and the order range of interest is wider than that.
Key special cases get exact branches: order zero (the geometric-mean /
likelihood limit) and orders beyond the cap (the min/max limits, which
floating point cannot distinguish from the mean anyway).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .data import WeightedSample
from .errors import PointOutsideSupport
from .models import PdfModel

#: orders below this magnitude use the analytic alpha -> 0 limit
ALPHA_ZERO_EPS = 1e-12
#: default cap beyond which evaluation switches to the exact min/max limit
DEFAULT_ALPHA_CAP = 50.0


class Kind(str, Enum):
    """Which centrality family is being evaluated."""

    HOLDER = "holder"
    LEHMER = "lehmer"


@dataclass(frozen=True)
class CentralityQuery:
    """Selects the centrality C_alpha(theta) to evaluate.

    ``epsilon`` is the cell size converting a density into a probability;
    it is a user-supplied constant that factors out of every estimation
    step, so the default of 1 is what fitting actually uses.
    """

    kind: Kind
    alpha: float
    epsilon: float = 1.0
    alpha_cap: float = DEFAULT_ALPHA_CAP

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.alpha_cap > 0:
            raise ValueError("alpha_cap must be positive")


@dataclass(frozen=True)
class LogCentralityValue:
    """Natural log of a centrality value, with the query echoed back.

    ``capped`` flags that |alpha| exceeded the cap and the exact min/max
    limit was returned instead of the mean formula.
    """

    log_value: float
    kind: Kind
    alpha: float
    theta: float
    capped: bool = False


def _active(sample: WeightedSample) -> tuple[np.ndarray, np.ndarray]:
    """Points carrying positive weight; zero weight contributes to no mean."""
    mask = sample.weights > 0
    return sample.points[mask], sample.weights[mask]


def _checked_log_pdf(model: PdfModel, x: np.ndarray, theta) -> np.ndarray:
    lp = model.log_pdf(x, theta)
    if np.any(np.isneginf(lp)):
        raise PointOutsideSupport(
            "sample contains positive-weight points outside the model support"
        )
    return np.asarray(lp, dtype=float)


def log_power_sum(
    sample: WeightedSample, model: PdfModel, theta: float, a: float
) -> float:
    """ln sum_i w_i h(x_i|theta)^a, exact 0 at a = 0 (weights sum to one)."""
    if a == 0:
        return 0.0
    x, w = _active(sample)
    lp = _checked_log_pdf(model, x, theta)
    return float(logsumexp(np.log(w) + a * lp))


def log_centrality_grid(
    sample: WeightedSample,
    model: PdfModel,
    thetas: np.ndarray,
    query: CentralityQuery,
) -> np.ndarray:
    """Log centrality over a vector of theta values (the grid path used by
    solvers and the surface renderer)."""
    x, w = _active(sample)
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    lp = _checked_log_pdf(model, x[None, :], th[:, None])
    logw = np.log(w)[None, :]
    a = query.alpha
    log_eps = math.log(query.epsilon)

    if abs(a) <= ALPHA_ZERO_EPS:
        if query.kind is Kind.HOLDER:
            # geometric-mean limit: the per-observation log likelihood mean
            return log_eps + lp @ w
        # Lehmer at order 0 is the weighted harmonic mean
        return log_eps - logsumexp(logw - lp, axis=1)
    if abs(a) > query.alpha_cap:
        # both families share the min/max limits
        return log_eps + (lp.max(axis=1) if a > 0 else lp.min(axis=1))
    if query.kind is Kind.HOLDER:
        return log_eps + logsumexp(logw + a * lp, axis=1) / a
    return log_eps + logsumexp(logw + a * lp, axis=1) - logsumexp(
        logw + (a - 1.0) * lp, axis=1
    )


def _log_centrality(sample, model, theta, query, kind) -> LogCentralityValue:
    q = query if query.kind is kind else CentralityQuery(
        kind, query.alpha, query.epsilon, query.alpha_cap
    )
    value = float(log_centrality_grid(sample, model, [theta], q)[0])
    return LogCentralityValue(
        log_value=value,
        kind=kind,
        alpha=q.alpha,
        theta=float(theta),
        capped=abs(q.alpha) > q.alpha_cap,
    )


def log_holder(
    sample: WeightedSample, model: PdfModel, theta: float, query: CentralityQuery
) -> LogCentralityValue:
    """Log of the Holder (power-mean) centrality at theta.

    ln eps + (1/alpha) ln sum_i w_i h_i^alpha for alpha != 0; the weighted
    geometric mean at alpha = 0 (where it coincides with the mean log
    likelihood for uniform weights); the exact min/max bound beyond the cap.
    """
    return _log_centrality(sample, model, theta, query, Kind.HOLDER)


def log_lehmer(
    sample: WeightedSample, model: PdfModel, theta: float, query: CentralityQuery
) -> LogCentralityValue:
    """Log of the Lehmer centrality at theta:
    ln eps + ln sum w h^alpha - ln sum w h^(alpha-1)."""
    return _log_centrality(sample, model, theta, query, Kind.LEHMER)


def log_centrality(
    sample: WeightedSample, model: PdfModel, theta: float, query: CentralityQuery
) -> LogCentralityValue:
    """Dispatch on the query's kind."""
    return _log_centrality(sample, model, theta, query, query.kind)


def tilt_weights(
    sample: WeightedSample, model: PdfModel, theta: float, a: float
) -> np.ndarray:
    """The order-a exponentially tilted reweighting of the sample:
    w_i h_i^a / sum_j w_j h_j^a, aligned with ``sample.points``.

    Zero-weight points stay at zero.  The result sums to one and is the
    distribution under which the first- and second-order conditions of the
    fit are plain expectations.
    """
    mask = sample.weights > 0
    out = np.zeros_like(sample.weights)
    if a == 0:
        out[mask] = sample.weights[mask]
        return out
    x = sample.points[mask]
    w = sample.weights[mask]
    lp = _checked_log_pdf(model, x, theta)
    logits = np.log(w) + a * lp
    out[mask] = np.exp(logits - logsumexp(logits))
    return out


def central_observation(
    sample: WeightedSample, model: PdfModel, theta: float, query: CentralityQuery
) -> list[float]:
    """Points whose density equals the centrality value (cell centers).

    Returns every preimage the model reports; exactly one element for
    the exponential family, which is bijective on its support.  An empty
    list means the centrality fell outside the density's range, which the
    mean bounds rule out for valid inputs.
    """
    value = _log_centrality(sample, model, theta, query, query.kind)
    p = math.exp(value.log_value - math.log(query.epsilon))
    return model.inverse(p, theta)
