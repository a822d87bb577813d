"""Residual error means between observed and fitted densities, their
sampling densities, and the alpha sweep selecting the best estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import erf, logsumexp
from scipy.stats import norm

from .centrality import DEFAULT_ALPHA_CAP, CentralityQuery, Kind
from .data import WeightedSample
from .errors import AllFitsFailed, FitError, MissingDensities
from .estimate import Classification, SolverConfig, find_critical_points
from .models import PdfModel

DEFAULT_BETA = 2.0


@dataclass(frozen=True)
class ResidualQuery:
    """Selects the residual-error family: its mean order and kind."""

    beta: float
    kind: Kind

    def __post_init__(self):
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")


def _abs_residuals(sample, model, theta):
    if sample.densities is None:
        raise MissingDensities("sample carries no density estimates")
    mask = sample.weights > 0
    x = sample.points[mask]
    w = sample.weights[mask]
    d = sample.densities[mask]
    h = np.exp(np.asarray(model.log_pdf(x, theta), dtype=float))
    return np.abs(d - h), w


def _power_mean(values, weights, order, cap):
    """Weighted Holder mean of non-negative values, log domain.

    Order zero is the geometric mean; beyond the cap the exact min/max
    limit is returned.  Any zero value drags every order <= 0 mean to zero.
    """
    if np.all(values == 0):
        return 0.0
    if order > cap:
        return float(values.max())
    if order < -cap:
        return float(values.min())
    has_zero = np.any(values == 0)
    if order == 0:
        if has_zero:
            return 0.0
        return float(math.exp(np.dot(weights, np.log(values))))
    if order < 0 and has_zero:
        return 0.0
    pos = values > 0
    lse = logsumexp(np.log(weights[pos]) + order * np.log(values[pos]))
    return float(math.exp(lse / order))


def _contrast_mean(values, weights, order, cap):
    """Weighted Lehmer mean of non-negative values, log domain.

    The ratio of the order and order-1 weighted power sums; zero values
    dominate (send the mean to zero) once the denominator order drops
    below zero, and drop out of both sums above it.
    """
    if np.all(values == 0):
        return 0.0
    if order > cap:
        return float(values.max())
    if order < -cap:
        return float(values.min())
    if np.any(values == 0):
        if order - 1.0 < 0:
            return 0.0
        if order == 1.0:
            return float(np.dot(weights, values))
    pos = values > 0
    logw = np.log(weights[pos])
    logv = np.log(values[pos])
    num = logsumexp(logw + order * logv)
    den = logsumexp(logw + (order - 1.0) * logv)
    return float(math.exp(num - den))


def holder_residual(
    sample: WeightedSample,
    model: PdfModel,
    theta: float,
    beta: float = DEFAULT_BETA,
    beta_cap: float = DEFAULT_ALPHA_CAP,
) -> float:
    """Weighted power mean of |observed density - fitted density|.

    Order 2 is the root mean square error; order 0 uses the geometric-mean
    limit; beyond the cap the max (or min) residual is returned.
    """
    r, w = _abs_residuals(sample, model, theta)
    return _power_mean(r, w, beta, beta_cap)


def lehmer_residual(
    sample: WeightedSample,
    model: PdfModel,
    theta: float,
    beta: float = DEFAULT_BETA,
    beta_cap: float = DEFAULT_ALPHA_CAP,
) -> float:
    """Weighted Lehmer mean of |observed density - fitted density|;
    order 1 is the plain weighted mean, and a perfect fit gives zero."""
    r, w = _abs_residuals(sample, model, theta)
    return _contrast_mean(r, w, beta, beta_cap)


def residual_value(
    sample: WeightedSample, model: PdfModel, theta: float, query: ResidualQuery
) -> float:
    if query.kind is Kind.HOLDER:
        return holder_residual(sample, model, theta, query.beta)
    return lehmer_residual(sample, model, theta, query.beta)


def abs_error_power_moments(sigma: float, beta: float) -> tuple[float, float]:
    """Mean and variance of |e|^beta for e ~ Normal(0, sigma), by
    quadrature against the half-normal density."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if beta <= 0:
        raise ValueError("beta must be positive")
    half = math.sqrt(2.0 / math.pi) / sigma

    def moment(k):
        integrand = lambda t: t ** (k * beta) * half * math.exp(-(t * t) / (2 * sigma * sigma))
        value, _ = quad(integrand, 0.0, np.inf)
        return value

    m1 = moment(1)
    return m1, moment(2) - m1 * m1


def holder_residual_pdf(z, beta: float, n: int, mean_y: float, var_y: float):
    """Density of the order-beta residual statistic.

    The summed beta-powered absolute errors are treated as normal with
    mean n*mean_y and variance n*var_y (their count is n), truncated to
    the non-negative axis; the statistic is the beta-th root of that sum.
    The normalizer is computed from the normal survival function rather
    than taken on faith from any closed form.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if var_y <= 0:
        raise ValueError("var_y must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    z = np.asarray(z, dtype=float)
    loc = n * mean_y
    scale = math.sqrt(n * var_y)
    mass = norm.sf(0.0, loc=loc, scale=scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            z >= 0,
            beta * z ** (beta - 1.0) * norm.pdf(z**beta, loc=loc, scale=scale) / mass,
            0.0,
        )
    if out.ndim == 0:
        return float(out)
    return out


def _ratio_params(mu_num, mu_den, sigma_num, sigma_den):
    if mu_den == 0:
        raise ValueError("denominator mean must be nonzero")
    if sigma_num <= 0 or sigma_den <= 0:
        raise ValueError("standard deviations must be positive")
    # rho must be the denominator-to-numerator deviation ratio for the
    # expression below to be the exact ratio-of-normals density given the
    # mean ratio and denominator variation; see README for the provenance
    # of this parameter.
    rho = sigma_den / sigma_num
    mu = mu_num / mu_den
    delta = sigma_den / mu_den
    return rho, mu, delta


def _ratio_unnormalized(z, rho, mu, delta):
    z = np.asarray(z, dtype=float)
    q = (1.0 + mu * rho**2 * z) / (delta * np.sqrt(1.0 + rho**2 * z**2))
    # the e^{q^2/2} factor is folded into the exponent to avoid overflow
    body = np.exp(-((rho**2) * (mu**2) + 1.0) / (2.0 * delta**2)) + np.sqrt(
        np.pi / 2.0
    ) * q * erf(q / math.sqrt(2.0)) * np.exp(
        -(rho**2) * (z - mu) ** 2 / (2.0 * delta**2 * (1.0 + rho**2 * z**2))
    )
    return rho / (np.pi * (1.0 + rho**2 * z**2)) * body


@lru_cache(maxsize=64)
def _ratio_norm_const(rho, mu, delta):
    mass, _ = quad(lambda t: _ratio_unnormalized(t, rho, mu, delta), 0.0, np.inf, limit=200)
    return 1.0 / mass


def lehmer_residual_pdf(z, mu_num: float, mu_den: float, sigma_num: float, sigma_den: float):
    """Density of the ratio of two independent normals truncated to z >= 0.

    ``mu_num``/``sigma_num`` describe the order-beta power sum (the
    numerator of the Lehmer residual), ``mu_den``/``sigma_den`` the
    order-(beta-1) sum.  The truncation constant is computed numerically.
    """
    rho, mu, delta = _ratio_params(mu_num, mu_den, sigma_num, sigma_den)
    const = _ratio_norm_const(rho, mu, delta)
    z = np.asarray(z, dtype=float)
    out = np.where(z >= 0, const * _ratio_unnormalized(z, rho, mu, delta), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class FitEntry:
    """Per-alpha outcome of a sweep; failed fits keep their slot with a
    status marker instead of being dropped."""

    alpha: float
    theta_star: float | None
    classification: str | None
    residual: float | None
    observed_fisher: float | None
    status: str  # "ok" | "no-maximum" | "error: ..."

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class FitReport:
    """Sweep result: one entry per requested alpha plus the selected best."""

    model: str
    kind: Kind
    beta: float
    entries: list[FitEntry]
    best: int
    selection_rule: str

    @property
    def best_entry(self) -> FitEntry:
        return self.entries[self.best]

    def mle_entry(self) -> FitEntry | None:
        for entry in self.entries:
            if entry.alpha == 0.0:
                return entry
        return None

    def to_json_dict(self) -> dict:
        best = self.best_entry
        mle = self.mle_entry()
        return {
            "model": self.model,
            "kind": self.kind.value,
            "beta": float(self.beta),
            "entries": [
                {
                    "alpha": float(e.alpha),
                    "theta": None if e.theta_star is None else float(e.theta_star),
                    "classification": e.classification,
                    "residual": None if e.residual is None else float(e.residual),
                    "observed_fisher": None
                    if e.observed_fisher is None
                    else float(e.observed_fisher),
                    "status": e.status,
                }
                for e in self.entries
            ],
            "best_alpha": float(best.alpha),
            "best_theta": float(best.theta_star),
            "best_residual": float(best.residual),
            "mle_alpha_present": mle is not None,
            "mle_residual": None
            if mle is None or not mle.ok
            else float(mle.residual),
        }


def default_alpha_grid(lo: float = -2.0, hi: float = 2.0, steps: int = 81) -> np.ndarray:
    """Uniform grid with the exact zero inserted so the plain likelihood
    estimator is always a sweep candidate."""
    if steps < 1:
        raise ValueError("grid needs at least one point")
    grid = np.linspace(lo, hi, steps)
    grid[np.abs(grid) < 1e-12] = 0.0
    if lo < 0.0 < hi and not np.any(grid == 0.0):
        grid = np.sort(np.append(grid, 0.0))
    return np.unique(grid)


def sweep_alpha(
    sample: WeightedSample,
    model: PdfModel,
    alphas,
    kind: Kind,
    beta: float = DEFAULT_BETA,
    config: SolverConfig | None = None,
    residual_kind: Kind | None = None,
    model_name: str = "exponential",
    epsilon: float = 1.0,
) -> FitReport:
    """Fit every alpha on the grid, keep the maxima, score each by its
    residual, and select the smallest-residual maximum overall.

    The residual family defaults to the centrality kind being swept.
    Failed alphas are recorded, never silently dropped.
    """
    alphas = np.asarray(list(alphas), dtype=float)
    if alphas.size == 0 or not np.all(np.isfinite(alphas)):
        raise ValueError("alpha grid must be non-empty and finite")
    config = config or SolverConfig()
    rq = ResidualQuery(beta=beta, kind=residual_kind or kind)

    entries: list[FitEntry] = []
    for alpha in alphas:
        query = CentralityQuery(kind=kind, alpha=float(alpha), epsilon=epsilon)
        try:
            points = find_critical_points(sample, model, query, config)
        except FitError as exc:
            entries.append(
                FitEntry(float(alpha), None, None, None, None, f"error: {exc}")
            )
            continue
        maxima = [p for p in points if p.classification is Classification.MAXIMUM]
        if not maxima:
            entries.append(
                FitEntry(float(alpha), None, None, None, None, "no-maximum")
            )
            continue
        scored = [
            (residual_value(sample, model, p.theta_star, rq), p) for p in maxima
        ]
        residual, point = min(scored, key=lambda item: item[0])
        entries.append(
            FitEntry(
                alpha=float(alpha),
                theta_star=point.theta_star,
                classification=point.classification.value,
                residual=float(residual),
                observed_fisher=point.observed_fisher,
                status="ok",
            )
        )

    usable = [i for i, e in enumerate(entries) if e.ok]
    if not usable:
        raise AllFitsFailed("no alpha on the grid produced a maximum")
    best = min(usable, key=lambda i: entries[i].residual)
    rule = (
        f"smallest {rq.kind.value} residual (beta={beta!r}) among maxima "
        f"across the alpha grid; ties go to the smaller alpha"
    )
    return FitReport(
        model=model_name,
        kind=kind,
        beta=float(beta),
        entries=entries,
        best=best,
        selection_rule=rule,
    )
