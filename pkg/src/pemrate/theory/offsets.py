"""Martingale offsets and the Taylor decomposition of the offset at an estimate."""

from dataclasses import dataclass

import numpy as np

from .._validation import check_series, check_vector


def _aligned(Y, W):
    Y = check_series(Y)
    W = check_series(W, name="W")
    if Y.shape != W.shape:
        raise ValueError(f"Y and W lengths differ: {Y.shape[0]} vs {W.shape[0]}")
    return Y, W


def prediction_gap(model, theta, theta_star, Y):
    """``g_t = f_t(X_t, theta) - f_t(X_t, theta_star)`` along ``Y``."""
    theta = check_vector(theta, model.dim)
    theta_star = check_vector(theta_star, model.dim)
    return model.predict(theta, Y) - model.predict(theta_star, Y)


def martingale_offset(model, theta, theta_star, Y, W):
    """``M_T(theta) = (1/T) sum_t (4 W_t g_t - g_t^2)``."""
    Y, W = _aligned(Y, W)
    g = prediction_gap(model, theta, theta_star, Y)
    return float(np.mean(4.0 * W * g - g * g))


def linearized_offset(model, theta, theta_star, Y, W):
    """Offset with ``g_t`` replaced by its first-order term ``Z_t' (theta - theta_star)``.

    ``Z_t`` is the predictor gradient at ``theta_star`` and the quadratic
    term carries a factor 1/2.
    """
    Y, W = _aligned(Y, W)
    theta = check_vector(theta, model.dim)
    theta_star = check_vector(theta_star, model.dim)
    lin = model.gradients(theta_star, Y) @ (theta - theta_star)
    return float(np.mean(4.0 * W * lin - 0.5 * lin * lin))


def mean_squared_gap(model, theta, theta_star, Y):
    """``(1/T) sum_t g_t^2``, the in-sample prediction gap."""
    g = prediction_gap(model, theta, theta_star, Y)
    return float(np.mean(g * g))


def basic_inequality_holds(model, theta_hat, theta_star, Y, W, rtol=1e-12):
    """Check ``(1/T) sum g_t^2 <= M_T(theta_hat)``.

    This holds whenever ``L_T(theta_hat) <= L_T(theta_star)``; ``rtol``
    absorbs rounding relative to the sizes of the summands.
    """
    Y, W = _aligned(Y, W)
    g = prediction_gap(model, theta_hat, theta_star, Y)
    lhs = float(np.mean(g * g))
    rhs = float(np.mean(4.0 * W * g - g * g))
    scale = float(np.mean(np.abs(4.0 * W * g)) + np.mean(g * g))
    return lhs <= rhs + rtol * scale


@dataclass(frozen=True)
class TaylorCheck:
    lhs: float
    rhs: float
    holds: bool
    linearized: float
    hessian_term: float
    quartic_term: float

    @property
    def components(self):
        return (self.linearized, self.hessian_term, self.quartic_term)


def taylor_decomposition_check(model, theta_hat, theta_star, Y, W, L2, L3=0.0):
    """Evaluate both sides of the second-order bound on ``M_T(theta_hat)``.

    The right side is ``Mbar_T + ||(2/T) sum W_t V_t|| ||D||^2 + (L2^2/4) ||D||^4``
    with ``D = theta_hat - theta_star``. The Hessians ``V_t`` belong at an
    unknown point on the segment between the two parameters; they are
    evaluated at ``theta_star`` and the operator-norm term is inflated by
    ``(2/T) sum |W_t| * L3 * ||D||``, which dominates the difference when
    ``L3`` is a Lipschitz constant of the Hessians.
    """
    Y, W = _aligned(Y, W)
    theta_hat = check_vector(theta_hat, model.dim)
    theta_star = check_vector(theta_star, model.dim)
    delta = float(np.linalg.norm(theta_hat - theta_star))
    lhs = martingale_offset(model, theta_hat, theta_star, Y, W)
    lin = linearized_offset(model, theta_hat, theta_star, Y, W)

    V = model.hessians(theta_star, Y)
    weighted = 2.0 * np.tensordot(W, V, axes=(0, 0)) / Y.shape[0]
    op_norm = float(np.linalg.norm(weighted, 2)) if model.dim else 0.0
    slack = 2.0 * float(np.mean(np.abs(W))) * L3 * delta
    hess_term = (op_norm + slack) * delta ** 2
    quartic = 0.25 * L2 ** 2 * delta ** 4

    rhs = lin + hess_term + quartic
    tol = 1e-12 * (abs(lhs) + abs(rhs))
    return TaylorCheck(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs + tol),
                       linearized=lin, hessian_term=hess_term, quartic_term=quartic)
