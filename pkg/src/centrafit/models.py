"""Parametric PDF families: the scalar-parameter interface plus the
exponential member used throughout the case study."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np


class PdfModel(ABC):
    """A density family h(x|theta) with a scalar parameter.

    Implementations are stateless.  ``log_pdf``, ``score`` and
    ``score_prime`` accept scalars or numpy arrays and broadcast, so grid
    evaluation over (x, theta) works without loops.  ``log_pdf`` returns
    -inf outside the support; fitting operations reject samples containing
    such points because negative-order means are undefined there.
    """

    #: closed x-interval where the density may be positive
    support: tuple[float, float]
    #: open interval of admissible theta values
    theta_domain: tuple[float, float]

    @abstractmethod
    def log_pdf(self, x, theta):
        """ln h(x|theta)."""

    @abstractmethod
    def score(self, x, theta):
        """d ln h(x|theta) / d theta."""

    @abstractmethod
    def score_prime(self, x, theta):
        """d^2 ln h(x|theta) / d theta^2."""

    def inverse(self, p, theta) -> list[float]:
        """All x in the support with h(x|theta) = p; empty when p is
        outside the range of the density.  Optional."""
        raise NotImplementedError(f"{type(self).__name__} has no inverse")


class ExponentialModel(PdfModel):
    """h(x|theta) = theta * exp(-theta * x) on x >= 0 with rate theta > 0."""

    support = (0.0, math.inf)
    theta_domain = (0.0, math.inf)

    def log_pdf(self, x, theta):
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return np.where(x >= 0, np.log(theta) - theta * x, -np.inf)

    def score(self, x, theta):
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return 1.0 / theta - x

    def score_prime(self, x, theta):
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return -1.0 / theta**2 + 0.0 * x  # broadcast against x

    def inverse(self, p, theta) -> list[float]:
        return exponential_inverse(p, theta)


def exponential_inverse(p: float, theta: float) -> list[float]:
    """Solve theta * exp(-theta * x) = p for x >= 0.

    The density is a bijection from [0, inf) onto (0, theta], so the
    solution is unique when it exists and the list is empty for p <= 0 or
    p > theta.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    if p <= 0 or p > theta:
        return []
    return [-math.log(p / theta) / theta]


_MODELS = {"exponential": ExponentialModel}


def get_model(name: str) -> PdfModel:
    """Look up a shipped model by its CLI identifier."""
    try:
        return _MODELS[name]()
    except KeyError:
        raise ValueError(
            f"unknown model {name!r}; available: {', '.join(sorted(_MODELS))}"
        ) from None
