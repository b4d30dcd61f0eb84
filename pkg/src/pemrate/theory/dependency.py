"""Dependency matrices of finite-state Markov chains.

For a chain, the supremum over past events ``A`` and future events ``B``
in the dependency coefficient between times ``i < j`` reduces to

    max_z  TV(P^(j-i)(z, .), mu_j)

over states ``z`` charged by the time-``i`` marginal. Conditioning on the
past only matters through ``Z_i``, the conditional law of the future is a
mixture over ``z`` (and TV is convex), and the future after ``Z_j`` is
generated by the same kernel under both laws, so the trajectory TV equals
the TV of the ``Z_j`` marginals.
"""

from dataclasses import dataclass

import numpy as np

MAX_STATES = 64
MAX_HORIZON = 512


def _check_chain(P, initial):
    P = np.asarray(P, dtype=np.float64)
    initial = np.asarray(initial, dtype=np.float64).reshape(-1)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("transition matrix must be square")
    n = P.shape[0]
    if n > MAX_STATES:
        raise ValueError(f"at most {MAX_STATES} states supported, got {n}")
    if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
        raise ValueError("transition matrix is not stochastic")
    if initial.shape[0] != n or np.any(initial < 0) or abs(initial.sum() - 1.0) > 1e-12:
        raise ValueError("initial distribution is not a probability vector on the states")
    return P, initial


def stationary_distribution(P):
    """Left Perron vector of ``P`` normalised to sum to one."""
    P = np.asarray(P, dtype=np.float64)
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi = np.linalg.lstsq(A, b, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


@dataclass(frozen=True)
class DependencyMatrix:
    gamma: np.ndarray
    spectral_norm: float


def _reduced_kernel(P):
    """Action of ``P`` on zero-sum row vectors in the first ``n - 1`` coordinates.

    A zero-sum vector ``v`` is stored as ``u = v[:-1]`` (its last entry is
    ``-sum(u)``), and ``(v P)[:-1] = u R`` with ``R[l, m] = P[l, m] - P[-1, m]``.
    Rounding error then scales with ``|u|`` instead of with the O(1)
    entries of ``P^k``, which keeps tiny coefficients accurate.
    """
    return P[:-1, :-1] - P[-1, :-1][None, :]


def _expand(u):
    return np.concatenate([u, -u.sum(axis=-1, keepdims=True)], axis=-1)


def dependency_matrix_markov(P, initial, T):
    """Upper-triangular dependency matrix of the chain over ``T`` steps."""
    P, initial = _check_chain(P, initial)
    T = int(T)
    if not 1 <= T <= MAX_HORIZON:
        raise ValueError(f"T must lie in [1, {MAX_HORIZON}], got {T}")
    n = P.shape[0]
    gamma = np.eye(T)
    if n == 1 or T == 1:
        return DependencyMatrix(gamma=gamma, spectral_norm=1.0)

    marginals = np.empty((T, n))
    marginals[0] = initial
    for t in range(1, T):
        marginals[t] = marginals[t - 1] @ P
    charged = marginals > 0.0
    R = _reduced_kernel(P)

    # P^k(z, .) - mu_{i+k} = (e_z - e_last) P^k - (mu_i - e_last) P^k
    ref = np.eye(n)[-1]
    state_part = (np.eye(n) - ref)[:, :-1]
    drift = (marginals - ref)[:, :-1]
    for k in range(1, T):
        state_part = state_part @ R
        drift = drift[: T - k] @ R
        diff = state_part[None, :, :] - drift[:, None, :]
        tv = 0.5 * np.abs(_expand(diff)).sum(axis=2)
        tv = np.where(charged[: T - k], tv, 0.0)
        coeff = np.minimum(tv.max(axis=1), 1.0)
        idx = np.arange(T - k)
        gamma[idx, idx + k] = np.sqrt(2.0 * coeff)
    return DependencyMatrix(gamma=gamma, spectral_norm=float(np.linalg.norm(gamma, 2)))


@dataclass(frozen=True)
class DependencyGrowth:
    b1: float
    b2: float
    slope: float
    norms_sq: np.ndarray
    T_grid: np.ndarray


def fit_dependency_growth(P, initial, T_grid):
    """Fit ``||Gamma(T)||^2 <= b1 T^b2`` on a grid of horizons.

    ``b2`` is the least-squares slope of ``log ||Gamma||^2`` against
    ``log T`` clipped into ``[0, 1)``; ``b1`` is then the smallest constant
    making the bound hold at every grid point.
    """
    T_grid = np.asarray(T_grid, dtype=np.int64)
    if T_grid.ndim != 1 or T_grid.shape[0] < 3:
        raise ValueError("T_grid needs at least three horizons")
    if np.any(np.diff(T_grid) <= 0) or T_grid[0] < 1:
        raise ValueError("T_grid must be strictly ascending positive integers")
    norms_sq = np.array([
        dependency_matrix_markov(P, initial, int(T)).spectral_norm ** 2 for T in T_grid
    ])
    x = np.log(T_grid.astype(np.float64))
    slope = np.polyfit(x, np.log(norms_sq), 1)[0]
    b2 = float(np.clip(slope, 0.0, np.nextafter(1.0, 0.0)))
    b1 = float(np.max(norms_sq / T_grid.astype(np.float64) ** b2))
    return DependencyGrowth(b1=b1, b2=b2, slope=float(slope), norms_sq=norms_sq, T_grid=T_grid)
