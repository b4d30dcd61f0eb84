"""Euclidean-ball parameter classes: projection, covering bounds and nets."""

from dataclasses import dataclass
import itertools
import math

import numpy as np

from .exceptions import DomainError, ResourceError
from ._validation import check_vector

DEFAULT_NET_CAP = 10_000_000


@dataclass(frozen=True)
class ParameterClass:
    """Closed ball ``{theta : ||theta|| <= radius}`` in ``R^dim``."""

    dim: int
    radius: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, theta, atol=0.0):
        theta = check_vector(theta, self.dim)
        return bool(np.linalg.norm(theta) <= self.radius + atol)


def project(theta, param_class):
    """Radial projection of ``theta`` onto the ball."""
    theta = check_vector(theta, param_class.dim)
    norm = np.linalg.norm(theta)
    if norm <= param_class.radius:
        return theta.copy()
    out = theta * (param_class.radius / norm)
    # rounding can leave the scaled point a hair outside
    n2 = np.linalg.norm(out)
    if n2 > param_class.radius:
        out *= param_class.radius / n2 * (1.0 - 1e-16)
    return out


def covering_number_bound(epsilon, param_class):
    """Upper bound ``(3 B / eps)^d`` on the covering number of the ball.

    Only stated for ``0 < eps <= B``; anything else raises
    :class:`DomainError`.
    """
    epsilon = float(epsilon)
    if not (0.0 < epsilon <= param_class.radius):
        raise DomainError(
            f"epsilon must lie in (0, {param_class.radius}], got {epsilon}"
        )
    return (3.0 * param_class.radius / epsilon) ** param_class.dim


def function_class_covering_bound(epsilon, param_class, L1):
    """Sup-norm covering bound ``(3 L1 B / eps)^d`` for the shifted predictors.

    Valid for ``0 < eps <= L1 * B`` where ``L1`` bounds the predictor
    gradients over the class.
    """
    epsilon = float(epsilon)
    scale = float(L1) * param_class.radius
    if L1 <= 0:
        raise DomainError(f"L1 must be positive, got {L1}")
    if not (0.0 < epsilon <= scale):
        raise DomainError(f"epsilon must lie in (0, {scale}], got {epsilon}")
    return (3.0 * scale / epsilon) ** param_class.dim


def build_epsilon_net(param_class, epsilon, max_points=DEFAULT_NET_CAP):
    """Cubic-lattice epsilon-net of the ball.

    The lattice has pitch ``2 eps / sqrt(d)``, so every point of space is
    within ``eps`` of a lattice vertex. Vertices within ``eps`` of the ball
    are kept and projected onto it; projection is 1-Lipschitz, so the
    covering radius is preserved and every returned point lies in the ball.

    Returns an ``(n, d)`` array in lexicographic order, origin included.
    """
    epsilon = float(epsilon)
    if not (np.isfinite(epsilon) and epsilon > 0):
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    d, radius = param_class.dim, param_class.radius
    pitch = 2.0 * epsilon / math.sqrt(d)
    reach = radius + epsilon
    m = int(math.floor(reach / pitch))
    per_axis = 2 * m + 1
    if per_axis ** d > max_points:
        raise ResourceError(
            f"lattice would hold {per_axis}**{d} candidate points, "
            f"cap is {max_points}"
        )

    ticks = np.arange(-m, m + 1) * pitch
    if d == 1:
        grid = ticks[:, None]
    else:
        grid = np.array(list(itertools.product(ticks, repeat=d)))
    norms = np.linalg.norm(grid, axis=1)
    keep = grid[norms <= reach]
    keep_norms = np.linalg.norm(keep, axis=1)
    outside = keep_norms > radius
    keep[outside] *= (radius / keep_norms[outside] * (1.0 - 4e-16))[:, None]

    keep = np.vstack([keep, np.zeros((1, d))])
    keep = np.unique(keep, axis=0)
    return keep
