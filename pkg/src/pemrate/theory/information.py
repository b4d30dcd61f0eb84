"""Information matrices, isometry events and Monte Carlo assumption constants.

Every quantity estimated here by simulation is an empirical *lower* bound
on the corresponding constant: a maximum over finitely many trajectories,
times and net points can only under-shoot a supremum.
"""

from dataclasses import dataclass
import math

import numpy as np

from ..exceptions import EstimationError
from ..param_space import build_epsilon_net
from .._seeding import derive_seed
from .._validation import check_series, check_vector

PSD_TOLERANCE = 1e-10


def empirical_info(model, theta_star, Y):
    """Gram matrix ``(1/T) sum_t Z_t Z_t'`` of the predictor gradients."""
    Y = check_series(Y)
    Z = model.gradients(check_vector(theta_star, model.dim), Y)
    G = Z.T @ Z / Y.shape[0]
    return 0.5 * (G + G.T)


@dataclass(frozen=True)
class InfoEstimate:
    sigma_bar: np.ndarray
    lambda0: float
    std_error: np.ndarray
    n_mc: int


def expected_info_mc(model, theta_star, noise, T, n_mc, seed):
    """Monte Carlo average of :func:`empirical_info` over fresh trajectories.

    ``lambda0`` is the smallest eigenvalue of the averaged matrix.
    """
    if n_mc < 2:
        raise ValueError("n_mc must be at least 2")
    mats = np.stack([
        empirical_info(model, theta_star,
                       model.simulate(theta_star, noise, T, derive_seed(seed, "info", r)).Y)
        for r in range(n_mc)
    ])
    sigma_bar = mats.mean(axis=0)
    sigma_bar = 0.5 * (sigma_bar + sigma_bar.T)
    se = mats.std(axis=0, ddof=1) / math.sqrt(n_mc)
    return InfoEstimate(
        sigma_bar=sigma_bar,
        lambda0=float(np.linalg.eigvalsh(sigma_bar)[0]),
        std_error=se,
        n_mc=n_mc,
    )


def fisher_info(sigma_bar, sigma_w):
    """Fisher information ``sigma_bar / sigma_w^2``."""
    if not sigma_w > 0:
        raise ValueError("sigma_w must be positive")
    return np.asarray(sigma_bar, dtype=np.float64) / sigma_w ** 2


@dataclass(frozen=True)
class IsometryRates:
    upper_violation_rate: float
    lower_violation_rate: float
    predicted_upper: float
    predicted_lower: float
    sigma_bar: np.ndarray
    n_mc: int


def predicted_isometry_bounds(T, lambda0, b1, b2, L1):
    """Tail bounds on the upper (factor 8) and lower (factor 1/16) isometry failures."""
    rate = lambda0 * T ** (1.0 - b2) / (b1 * L1 ** 2)
    return math.exp(-rate / 24.0), math.exp(-rate / 16.0)


def isometry_event_rates(model, theta_star, noise, T, n_mc, seed, *, lambda0, b1, b2, L1,
                         n_mc_bar=None, sigma_bar=None):
    """Frequencies of ``Sigma_hat not <= 8 Sigma_bar`` and ``Sigma_hat not >= Sigma_bar / 16``.

    ``sigma_bar`` is estimated from ``n_mc_bar`` trajectories (default
    ``max(n_mc, 2)``) on a seed stream disjoint from the replicates unless
    it is passed in directly.
    """
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    if sigma_bar is None:
        n_bar = n_mc_bar if n_mc_bar is not None else max(n_mc, 2)
        sigma_bar = expected_info_mc(model, theta_star, noise, T, n_bar,
                                     derive_seed(seed, "isometry-bar", 0)).sigma_bar
    sigma_bar = np.asarray(sigma_bar, dtype=np.float64)

    upper = lower = 0
    for r in range(n_mc):
        Y = model.simulate(theta_star, noise, T, derive_seed(seed, "info", r)).Y
        S = empirical_info(model, theta_star, Y)
        if np.linalg.eigvalsh(8.0 * sigma_bar - S)[0] < -PSD_TOLERANCE:
            upper += 1
        if np.linalg.eigvalsh(S - sigma_bar / 16.0)[0] < -PSD_TOLERANCE:
            lower += 1
    pred_up, pred_low = predicted_isometry_bounds(T, lambda0, b1, b2, L1)
    return IsometryRates(
        upper_violation_rate=upper / n_mc,
        lower_violation_rate=lower / n_mc,
        predicted_upper=pred_up,
        predicted_lower=pred_low,
        sigma_bar=sigma_bar,
        n_mc=n_mc,
    )


def _admissible_net(model, param_class, net_epsilon):
    net = build_epsilon_net(param_class, net_epsilon)
    keep = np.array([model.is_admissible(th) for th in net])
    return net[keep]


def quad_ident_constant_mc(model, param_class, theta_star, noise, T, net_epsilon, n_mc, seed):
    """Empirical quadratic identifiability constant.

    Returns ``max_theta ||theta - theta_star||^2 / G(theta)`` over the
    admissible points of a lattice net, where ``G`` is the Monte Carlo mean
    of ``(1/T) sum_t g_t^2``. Points whose mean is not clearly above zero
    (at most 10 standard errors, or exactly zero) are dropped.
    """
    theta_star = check_vector(theta_star, model.dim)
    net = _admissible_net(model, param_class, net_epsilon)
    gaps = np.empty((n_mc, net.shape[0]))
    for r in range(n_mc):
        Y = model.simulate(theta_star, noise, T, derive_seed(seed, "quad-ident", r)).Y
        base = model.predict(theta_star, Y)
        for k, theta in enumerate(net):
            g = model.predict(theta, Y) - base
            gaps[r, k] = np.dot(g, g) / T
    mean = gaps.mean(axis=0)
    se = gaps.std(axis=0, ddof=1) / math.sqrt(n_mc) if n_mc > 1 else np.zeros_like(mean)
    dist2 = np.sum((net - theta_star) ** 2, axis=1)
    usable = (mean > 0.0) & (mean > 10.0 * se) & (dist2 > 0.0)
    if not np.any(usable):
        raise EstimationError("every net point has a degenerate denominator",
                              {"net_size": int(net.shape[0])})
    return float(np.max(dist2[usable] / mean[usable]))


@dataclass(frozen=True)
class SmoothnessConstants:
    L1: float
    L2: float
    L3: float
    n_samples: int


def _sym_spectral_norm(V):
    """Spectral norms of a stack of symmetric matrices."""
    if V.shape[-1] == 0:
        return np.zeros(V.shape[:-2])
    return np.max(np.abs(np.linalg.eigvalsh(V)), axis=-1)


def smoothness_constants_mc(model, param_class, theta_star, noise, T, net_epsilon, n_mc, seed):
    """Empirical bounds on gradient norm, Hessian norm and Hessian Lipschitz constant.

    Maxima run over ``n_mc`` trajectories simulated under ``theta_star``,
    every time step, and the admissible points of a lattice net (pairs of
    net points for the Lipschitz ratio). Trajectory seeds form a prefix
    family, so the estimates never decrease as ``n_mc`` grows.
    """
    theta_star = check_vector(theta_star, model.dim)
    net = _admissible_net(model, param_class, net_epsilon)
    n = net.shape[0]
    L1 = L2 = L3 = 0.0
    for r in range(n_mc):
        Y = model.simulate(theta_star, noise, T, derive_seed(seed, "smoothness", r)).Y
        hess = []
        for theta in net:
            Z = model.gradients(theta, Y)
            L1 = max(L1, float(np.max(np.linalg.norm(Z, axis=1))))
            V = model.hessians(theta, Y)
            L2 = max(L2, float(np.max(_sym_spectral_norm(V))))
            hess.append(V)
        if not np.any([np.any(V) for V in hess]):
            continue
        for i in range(n - 1):
            diff = np.stack(hess[i + 1:]) - hess[i]
            dist = np.linalg.norm(net[i + 1:] - net[i], axis=1)
            ratio = np.max(_sym_spectral_norm(diff), axis=1) / dist
            L3 = max(L3, float(np.max(ratio)))
    return SmoothnessConstants(L1=L1, L2=L2, L3=L3, n_samples=n_mc * n * T)
