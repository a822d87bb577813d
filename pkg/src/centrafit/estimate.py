"""Critical points of the log centrality in theta: analytic first and
second derivatives, the exponential fixed-point solver, a generic
bracketed scan, and the observed information at a maximum."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .centrality import (
    CentralityQuery,
    Kind,
    _active,
    _checked_log_pdf,
    log_centrality_grid,
)
from .data import WeightedSample
from .errors import (
    DegenerateSample,
    NoConvergence,
    NotACriticalPoint,
    NotAMaximum,
    PointOutsideSupport,
)
from .models import ExponentialModel, PdfModel


class Classification(str, Enum):
    MAXIMUM = "maximum"
    MINIMUM = "minimum"
    UNDETERMINED = "undetermined"


class SolverKind(str, Enum):
    FIXED_POINT = "fixed_point"
    BRACKETED = "bracketed"


@dataclass(frozen=True)
class CriticalPoint:
    """A solved critical point of the log centrality, classified by the
    sign of its second derivative."""

    theta_star: float
    kind: Kind
    alpha: float
    second_derivative: float
    classification: Classification
    observed_fisher: float
    solver: SolverKind
    iterations: int
    residual_derivative: float

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "alpha": float(self.alpha),
            "theta_star": float(self.theta_star),
            "classification": self.classification.value,
            "second_derivative": float(self.second_derivative),
            "observed_fisher": float(self.observed_fisher),
            "solver": self.solver.value,
            "iterations": int(self.iterations),
        }


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the solvers.

    ``tol`` bounds the relative theta change at convergence,
    ``theta_bracket`` overrides the scan interval (derived from the sample
    when omitted), ``grid_points`` log-spaced points seed the scan, and
    ``tol_class`` is the scale-adjusted curvature threshold separating
    maxima and minima from undetermined points.
    """

    tol: float = 1e-10
    max_iter: int = 500
    damping: float = 1.0
    theta_bracket: tuple[float, float] | None = None
    grid_points: int = 512
    tol_class: float = 1e-9

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must be in (0, 1]")
        if self.grid_points < 2:
            raise ValueError("grid scan needs at least two points")
        if not self.tol_class > 0:
            raise ValueError("tol_class must be positive")
        if self.theta_bracket is not None:
            lo, hi = self.theta_bracket
            if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo < hi):
                raise ValueError("theta_bracket must be a positive interval")


def _tilted_moments(sample, model, thetas, a):
    """Expectations of score, score^2, score' (and their magnitudes, and the
    centered score variance) under the order-a tilt, vectorized over a
    theta grid."""
    x, w = _active(sample)
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    xg = x[None, :]
    tg = th[:, None]
    lp = _checked_log_pdf(model, xg, tg)
    if a == 0:
        g = np.broadcast_to(w[None, :], lp.shape)
    else:
        logits = np.log(w)[None, :] + a * lp
        g = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
    s = np.asarray(model.score(xg, tg), dtype=float)
    sp = np.asarray(model.score_prime(xg, tg), dtype=float)
    m1 = np.einsum("tn,tn->t", g, s)
    m2 = np.einsum("tn,tn->t", g, s * s)
    # centered form: the uncentered m2 - m1^2 cancels catastrophically
    # under extreme tilts
    var = np.einsum("tn,tn->t", g, (s - m1[:, None]) ** 2)
    mp = np.einsum("tn,tn->t", g, sp)
    m1_abs = np.einsum("tn,tn->t", g, np.abs(s))
    mp_abs = np.einsum("tn,tn->t", g, np.abs(sp))
    return m1, m2, var, mp, m1_abs, mp_abs


def _slope_grid(sample, model, thetas, query):
    a = query.alpha
    if query.kind is Kind.HOLDER:
        m1, *_ = _tilted_moments(sample, model, thetas, a)
        return m1
    m1a, *_ = _tilted_moments(sample, model, thetas, a)
    m1b, *_ = _tilted_moments(sample, model, thetas, a - 1.0)
    return a * m1a - (a - 1.0) * m1b


def centrality_slope(
    sample: WeightedSample, model: PdfModel, theta: float, query: CentralityQuery
) -> float:
    """d/d theta of the log centrality (the first-order condition LHS).

    Holder: the tilted expectation of the score.  Lehmer: alpha times the
    order-alpha tilted score expectation minus (alpha - 1) times the
    order-(alpha - 1) one.
    """
    return float(_slope_grid(sample, model, [theta], query)[0])


def _slope_and_scale(sample, model, theta, query):
    a = query.alpha
    if query.kind is Kind.HOLDER:
        m1, _, _, _, m1_abs, _ = _tilted_moments(sample, model, [theta], a)
        return float(m1[0]), float(m1_abs[0])
    m1a, _, _, _, m1a_abs, _ = _tilted_moments(sample, model, [theta], a)
    m1b, _, _, _, m1b_abs, _ = _tilted_moments(sample, model, [theta], a - 1.0)
    slope = a * m1a[0] - (a - 1.0) * m1b[0]
    scale = abs(a) * m1a_abs[0] + abs(a - 1.0) * m1b_abs[0]
    return float(slope), float(scale)


def _curvature_and_scale(sample, model, theta, query):
    """Second derivative of the log centrality plus a magnitude scale for
    thresholding.

    The Holder branch uses the critical-point simplification (the squared
    slope term dropped), so it is meaningful only where the slope
    vanishes.  The Lehmer branch keeps the tilted variances and is exact
    at any theta; the simplified form obtained by dropping them does not
    match finite differences.
    """
    a = query.alpha
    if query.kind is Kind.HOLDER:
        _, m2, _, mp, _, mp_abs = _tilted_moments(sample, model, [theta], a)
        value = a * m2[0] + mp[0]
        scale = abs(a) * m2[0] + mp_abs[0]
        return float(value), float(scale)
    _, m2a, var_a, mpa, _, mpa_abs = _tilted_moments(sample, model, [theta], a)
    _, m2b, var_b, mpb, _, mpb_abs = _tilted_moments(sample, model, [theta], a - 1.0)
    b = a - 1.0
    value = a * a * var_a[0] + a * mpa[0] - b * b * var_b[0] - b * mpb[0]
    scale = a * a * m2a[0] + abs(a) * mpa_abs[0] + b * b * m2b[0] + abs(b) * mpb_abs[0]
    return float(value), float(scale)


def curvature_at_critical(
    sample: WeightedSample,
    model: PdfModel,
    theta: float,
    query: CentralityQuery,
    tol: float = 1e-6,
) -> float:
    """Second derivative of the log centrality at a critical theta.

    Raises NotACriticalPoint when the slope does not vanish there (relative
    to the magnitude of its constituent terms), because the simplified
    Holder form relies on the first-order condition.
    """
    slope, scale = _slope_and_scale(sample, model, theta, query)
    if abs(slope) >= tol * max(1.0, scale):
        raise NotACriticalPoint(
            f"slope {slope:.3e} at theta={theta!r} is not negligible"
        )
    value, _ = _curvature_and_scale(sample, model, theta, query)
    return value


def _classify(d2: float, scale: float, tol_class: float) -> Classification:
    threshold = tol_class * max(1.0, scale)
    if d2 < -threshold:
        return Classification.MAXIMUM
    if d2 > threshold:
        return Classification.MINIMUM
    return Classification.UNDETERMINED


def _make_point(sample, model, theta, query, solver, iterations, config):
    d2, scale = _curvature_and_scale(sample, model, theta, query)
    slope, _ = _slope_and_scale(sample, model, theta, query)
    return CriticalPoint(
        theta_star=float(theta),
        kind=query.kind,
        alpha=float(query.alpha),
        second_derivative=d2,
        classification=_classify(d2, scale, config.tol_class),
        observed_fisher=-d2,
        solver=solver,
        iterations=int(iterations),
        residual_derivative=abs(slope),
    )


def _resolve_bracket(sample, model, config):
    dom_lo, dom_hi = model.theta_domain
    if config.theta_bracket is not None:
        lo, hi = config.theta_bracket
        if lo <= dom_lo or hi >= dom_hi:
            raise ValueError(
                f"theta_bracket ({lo}, {hi}) not inside the model domain"
            )
        return float(lo), float(hi)
    x, w = _active(sample)
    xpos = x[x > 0]
    if xpos.size == 0:
        raise DegenerateSample("every sample point is zero")
    if isinstance(model, ExponentialModel):
        # any critical rate satisfies 1/theta strictly between min and max x
        return 0.4 / float(xpos.max()), 2.5 / float(xpos.min())
    theta0 = 1.0 / float(w @ x)
    lo, hi = theta0 * 1e-3, theta0 * 1e3
    if math.isfinite(dom_lo):
        lo = max(lo, dom_lo + 1e-12 * max(1.0, abs(dom_lo)))
    if math.isfinite(dom_hi):
        hi = min(hi, dom_hi - 1e-12 * max(1.0, abs(dom_hi)))
    if not lo < hi:
        raise ValueError("could not derive a theta bracket; pass one explicitly")
    return lo, hi


def suggest_theta_bracket(
    sample: WeightedSample, model: PdfModel, config: SolverConfig | None = None
) -> tuple[float, float]:
    """The theta interval the solvers scan when none is supplied."""
    return _resolve_bracket(sample, model, config or SolverConfig())


def find_critical_points(
    sample: WeightedSample,
    model: PdfModel,
    query: CentralityQuery,
    config: SolverConfig | None = None,
) -> list[CriticalPoint]:
    """Scan the slope on a log-spaced theta grid, bisect every sign change
    to tolerance, classify each root, and return them sorted by theta.

    Returns an empty list when the slope never changes sign over the
    bracket (degenerate samples land here rather than fabricating a root).
    """
    config = config or SolverConfig()
    lo, hi = _resolve_bracket(sample, model, config)
    grid = np.geomspace(lo, hi, config.grid_points)
    d = _slope_grid(sample, model, grid, query)

    roots = list(grid[np.flatnonzero(d == 0.0)])
    sign = np.sign(d)
    cells = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    iterations = 0
    if cells.size:
        los = grid[cells].astype(float)
        his = grid[cells + 1].astype(float)
        flo = d[cells].astype(float)
        for _ in range(config.max_iter):
            if np.all(his - los <= config.tol * np.maximum(1.0, np.abs(los))):
                break
            iterations += 1
            mids = np.sqrt(los * his)
            fm = _slope_grid(sample, model, mids, query)
            left = np.sign(fm) == np.sign(flo)
            los = np.where(left, mids, los)
            flo = np.where(left, fm, flo)
            his = np.where(left, his, mids)
        roots.extend(np.sqrt(los * his))

    points: list[CriticalPoint] = []
    for theta in sorted(float(t) for t in roots):
        if points and abs(theta - points[-1].theta_star) <= 10 * config.tol * max(
            1.0, abs(theta)
        ):
            continue
        points.append(
            _make_point(
                sample, model, theta, query, SolverKind.BRACKETED, iterations, config
            )
        )
    return points


def fixed_point_exponential(
    sample: WeightedSample,
    query: CentralityQuery,
    config: SolverConfig | None = None,
) -> CriticalPoint:
    """Solve the exponential-family self-consistency equation
    theta = 1 / (tilted mean of x) by damped Picard iteration.

    The iterate is cross-checked against the bracketed scan so the
    returned point is the global maximum whenever one exists; the solver
    field records which path produced it.  Falls back to the scan when the
    iteration leaves (0, inf) or fails to settle.
    """
    config = config or SolverConfig()
    model = ExponentialModel()
    x, w = _active(sample)
    if np.any(x < 0):
        raise PointOutsideSupport("exponential support is x >= 0")
    if not np.any(x > 0):
        raise DegenerateSample("every sample point is zero")
    a = query.alpha
    logw = np.log(w)

    def tilted_mean(theta, order):
        if order == 0:
            return float(np.dot(w, x))
        logits = logw - order * theta * x
        g = np.exp(logits - logsumexp(logits))
        return float(np.dot(g, x))

    def fp_map(theta):
        if query.kind is Kind.HOLDER:
            denom = tilted_mean(theta, a)
        else:
            denom = a * tilted_mean(theta, a) - (a - 1.0) * tilted_mean(theta, a - 1.0)
        if not math.isfinite(denom) or denom <= 0:
            return None
        return 1.0 / denom

    theta = 1.0 / float(np.dot(w, x))  # exact at order zero, close elsewhere
    converged = None
    iterations = 0
    for _ in range(config.max_iter):
        nxt = fp_map(theta)
        if nxt is None:
            break
        nxt = (1.0 - config.damping) * theta + config.damping * nxt
        iterations += 1
        if not (math.isfinite(nxt) and nxt > 0):
            break
        if abs(nxt - theta) <= config.tol * abs(theta):
            theta = nxt
            converged = theta
            break
        theta = nxt

    scan = find_critical_points(sample, model, query, config)
    maxima = [p for p in scan if p.classification is Classification.MAXIMUM]

    def level(point):
        return float(
            log_centrality_grid(sample, model, [point.theta_star], query)[0]
        )

    candidate = None
    if converged is not None:
        candidate = _make_point(
            sample, model, converged, query, SolverKind.FIXED_POINT, iterations, config
        )

    if candidate is not None and candidate.classification is Classification.MAXIMUM:
        if not maxima:
            return candidate
        best = max(maxima, key=level)
        gap = 1e-12 * max(1.0, abs(level(best)))
        return candidate if level(candidate) >= level(best) - gap else best
    if maxima:
        return max(maxima, key=level)
    if candidate is not None:
        return candidate
    if scan:
        return max(scan, key=level)
    raise NoConvergence(
        "fixed point did not settle and the bracketed scan found no critical point"
    )


def observed_fisher(point: CriticalPoint) -> float:
    """Negative curvature at a maximum: the observed information whose
    reciprocal is the uncertainty of the estimate."""
    if point.classification is not Classification.MAXIMUM:
        raise NotAMaximum(f"critical point at {point.theta_star!r} is not a maximum")
    return float(point.observed_fisher)


def tilted_variance(sample: WeightedSample, theta: float, alpha: float) -> float:
    """Variance of the points under the order-alpha exponential tilt.

    Non-negative, and strictly positive as soon as two distinct points
    carry weight; with the exponential family the Holder curvature at a
    critical point is alpha times this minus 1/theta^2.
    """
    x, w = _active(sample)
    if alpha == 0:
        g = w
    else:
        logits = np.log(w) - alpha * theta * x
        g = np.exp(logits - logsumexp(logits))
    mean = float(np.dot(g, x))
    return float(np.dot(g, (x - mean) ** 2))
