"""Bounded, symmetric, i.i.d. noise families."""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._seeding import make_rng

KINDS = ("uniform", "rademacher", "truncated_gaussian")


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean noise law supported on ``[-c, c]``.

    ``sigma`` is only used by ``truncated_gaussian``: the centred Gaussian
    of scale ``sigma`` restricted to ``[-c, c]`` and renormalised.
    """

    kind: str
    c: float = 1.0
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {KINDS}")
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValueError(f"noise bound c must be positive, got {self.c}")
        if self.kind == "truncated_gaussian":
            if self.sigma is None or not (np.isfinite(self.sigma) and self.sigma > 0):
                raise ValueError("truncated_gaussian needs sigma > 0")

    @classmethod
    def uniform(cls, c=1.0):
        return cls("uniform", c)

    @classmethod
    def rademacher(cls, c=1.0):
        return cls("rademacher", c)

    @classmethod
    def truncated_gaussian(cls, sigma, c):
        return cls("truncated_gaussian", c, sigma)

    def scaled(self, factor):
        sigma = None if self.sigma is None else self.sigma * factor
        return NoiseSpec(self.kind, self.c * factor, sigma)

    def variance(self):
        c = self.c
        if self.kind == "uniform":
            return c * c / 3.0
        if self.kind == "rademacher":
            return c * c
        bound = c / self.sigma
        return float(stats.truncnorm.var(-bound, bound, scale=self.sigma))


def sample_noise(spec, T, seed):
    """Draw ``T`` i.i.d. samples; the same ``(spec, T, seed)`` always agrees."""
    T = int(T)
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    rng = make_rng(seed)
    c = spec.c
    if spec.kind == "uniform":
        return rng.uniform(-c, c, size=T)
    if spec.kind == "rademacher":
        return c * (2.0 * rng.integers(0, 2, size=T) - 1.0)
    bound = c / spec.sigma
    return stats.truncnorm.rvs(-bound, bound, scale=spec.sigma, size=T, random_state=rng)


def sub_gaussian_sigma(spec):
    """A valid sub-Gaussian parameter.

    Hoeffding's lemma gives ``c`` for any zero-mean variable on ``[-c, c]``;
    it is exact for Rademacher and conservative for the other two families.
    """
    return float(spec.c)
