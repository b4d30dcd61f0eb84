"""Quadratic prediction error estimation over a ball.

The estimator minimises ``L_T(theta) = (1/T) sum_t (f_t(X_t, theta) - Y_t)^2``
over the parameter class by projected Levenberg-Marquardt from several
starting points taken from a lattice net of the class. The global argmin
is not certified; ``loss(theta_hat)`` is only guaranteed to be no larger
than the loss at every start.
"""

from dataclasses import dataclass, field
import logging

import numpy as np
from scipy.optimize import brentq
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .arma import ArmaModel
from .exceptions import EstimationError
from .param_space import ParameterClass, build_epsilon_net, project
from ._seeding import derive_seed
from ._validation import check_series, check_vector

logger = logging.getLogger(__name__)

_MAX_DAMPING = 1e16


@dataclass(frozen=True)
class FitConfig:
    n_starts: int = 8
    start_net_epsilon: float | None = None  # None -> radius / 4
    max_iterations: int = 200
    gradient_tolerance: float = 1e-10
    levenberg_damping_init: float = 1e-3
    include_truth_start: bool = False

    def __post_init__(self):
        if int(self.n_starts) != self.n_starts or self.n_starts < 1:
            raise ValueError("n_starts must be a positive integer")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        for name in ("gradient_tolerance", "levenberg_damping_init"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.start_net_epsilon is not None and not self.start_net_epsilon > 0:
            raise ValueError("start_net_epsilon must be positive")


@dataclass(frozen=True)
class FitResult:
    theta_hat: np.ndarray
    loss: float
    starts_used: int
    iterations_total: int
    converged: bool
    start_points: np.ndarray = field(repr=False, default=None)
    start_losses: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class LMTrace:
    """Outcome of a single projected Levenberg-Marquardt run."""

    theta: np.ndarray
    loss: float
    iterations: int
    converged: bool
    loss_history: list


def loss(model, theta, Y):
    """Mean squared one-step prediction error ``L_T(theta)``."""
    Y = check_series(Y)
    theta = check_vector(theta, model.dim)
    e = Y - model.predict(theta, Y)
    return float(np.dot(e, e) / Y.shape[0])


def _loss_and_grad(model, theta, Y):
    yhat, J = model.predict_with_gradients(theta, Y)
    r = yhat - Y
    T = Y.shape[0]
    return float(np.dot(r, r) / T), r, J


def _projected_gradient_norm(theta, grad, param_class):
    return float(np.linalg.norm(theta - project(theta - grad, param_class)))


def _ball_step(A, g, theta, radius):
    """Minimise ``0.5 s'As + g's`` subject to ``||theta + s|| <= radius``.

    ``A`` is positive definite. When the free minimiser leaves the ball the
    constraint is active and the multiplier ``nu > 0`` solves
    ``||theta + s(nu)|| = radius`` with ``(A + nu I) s(nu) = -g - nu theta``;
    that norm decreases from above the radius towards zero, so a bracketing
    root finder applies.
    """
    d = theta.shape[0]
    eye = np.eye(d)
    step = np.linalg.solve(A, -g)
    if np.linalg.norm(theta + step) <= radius:
        return step

    def excess(nu):
        return np.linalg.norm(theta + np.linalg.solve(A + nu * eye, -g - nu * theta)) - radius

    hi = max(1.0, float(np.linalg.norm(A, 2)))
    while excess(hi) > 0:
        hi *= 10.0
        if hi > 1e300:
            return step
    nu = brentq(excess, 0.0, hi, xtol=1e-14 * hi, rtol=4 * np.finfo(float).eps)
    return np.linalg.solve(A + nu * eye, -g - nu * theta)


def levenberg_marquardt(model, Y, theta0, param_class, config=FitConfig()):
    """Projected Levenberg-Marquardt from ``theta0``.

    A trial step minimises the damped Gauss-Newton model over the ball
    (so steps along the boundary keep full Newton speed); it is accepted
    only if the predictor stays admissible and the loss does not increase. Convergence means the projected gradient
    ``||theta - P(theta - grad L)||`` fell below ``gradient_tolerance``.
    """
    Y = check_series(Y)
    theta = project(theta0, param_class)
    if not model.is_admissible(theta):
        raise EstimationError("start point is not admissible", {"theta0": theta0})
    T = Y.shape[0]
    cur_loss, r, J = _loss_and_grad(model, theta, Y)
    if not np.isfinite(cur_loss):
        raise EstimationError("non-finite loss at start", {"theta0": theta0})
    history = [cur_loss]
    mu = config.levenberg_damping_init
    converged = False
    iterations = 0
    d = theta.shape[0]

    while iterations < config.max_iterations:
        grad = 2.0 * (J.T @ r) / T
        if _projected_gradient_norm(theta, grad, param_class) <= config.gradient_tolerance:
            converged = True
            break
        iterations += 1
        JtJ = J.T @ J
        scale = max(np.trace(JtJ) / d, np.finfo(float).tiny)
        accepted = False
        while mu <= _MAX_DAMPING:
            try:
                step = _ball_step(JtJ + mu * scale * np.eye(d), J.T @ r, theta,
                                  param_class.radius)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            trial = project(theta + step, param_class)
            if model.is_admissible(trial):
                t_loss, t_r, t_J = _loss_and_grad(model, trial, Y)
                if np.isfinite(t_loss) and t_loss <= cur_loss:
                    accepted = True
                    break
            mu *= 10.0
        if not accepted:
            # no admissible descent direction left at working precision
            converged = _projected_gradient_norm(theta, grad, param_class) <= np.sqrt(
                config.gradient_tolerance
            )
            break
        moved = np.linalg.norm(trial - theta)
        theta, cur_loss, r, J = trial, t_loss, t_r, t_J
        history.append(cur_loss)
        mu = max(mu / 10.0, 1e-12)
        if moved == 0.0:
            converged = True
            break

    return LMTrace(theta=theta, loss=cur_loss, iterations=iterations,
                   converged=converged, loss_history=history)


def select_starts(model, param_class, n_starts, epsilon=None):
    """Deterministic spread of admissible start points from a lattice net.

    The origin comes first; further points are added by farthest-point
    sampling, ties going to the lexicographically smallest point.
    """
    if epsilon is None:
        epsilon = param_class.radius / 4.0
    net = build_epsilon_net(param_class, epsilon)
    ok = np.array([model.is_admissible(th) for th in net])
    net = net[ok]
    origin = np.zeros(param_class.dim)
    chosen = [origin]
    if net.shape[0] == 0:
        return np.array(chosen)
    dist = np.linalg.norm(net - origin, axis=1)
    while len(chosen) < n_starts:
        best = float(dist.max())
        if best == 0.0:
            break
        idx = int(np.flatnonzero(dist == best)[0])  # net is lexicographically sorted
        chosen.append(net[idx])
        dist = np.minimum(dist, np.linalg.norm(net - net[idx], axis=1))
    return np.array(chosen)


def _better(a, b):
    """Whether candidate ``a`` beats ``b`` (lower loss, then lexicographic theta)."""
    if a.loss != b.loss:
        return a.loss < b.loss
    return tuple(a.theta) < tuple(b.theta)


def fit(model, Y, param_class, config=FitConfig(), theta_star=None):
    """Approximate ``argmin_{theta in M} L_T(theta)`` by multi-start projected LM."""
    Y = check_series(Y)
    if Y.shape[0] < model.dim + 1:
        raise ValueError(f"need T >= d + 1 = {model.dim + 1} observations, got {Y.shape[0]}")
    if param_class.dim != model.dim:
        raise ValueError("parameter class dimension does not match the model")
    starts = select_starts(model, param_class, config.n_starts, config.start_net_epsilon)
    if config.include_truth_start:
        if theta_star is None:
            raise ValueError("include_truth_start requires theta_star")
        starts = np.vstack([starts, project(theta_star, param_class)])

    best = None
    failures = {}
    start_losses = []
    iterations = 0
    for k, theta0 in enumerate(starts):
        try:
            trace = levenberg_marquardt(model, Y, theta0, param_class, config)
        except EstimationError as exc:
            failures[k] = str(exc)
            start_losses.append(np.nan)
            continue
        start_losses.append(trace.loss_history[0])
        iterations += trace.iterations
        if best is None or _better(trace, best):
            best = trace
    if best is None:
        raise EstimationError("all optimizer starts failed", {"failures": failures})
    if failures:
        logger.debug("%d of %d starts failed: %s", len(failures), len(starts), failures)
    return FitResult(
        theta_hat=best.theta,
        loss=best.loss,
        starts_used=len(starts) - len(failures),
        iterations_total=iterations,
        converged=best.converged,
        start_points=starts,
        start_losses=np.array(start_losses),
    )


def closed_form_ar1(Y, param_class):
    """Exact constrained least-squares AR(1) coefficient.

    ``L_T`` is a quadratic in ``a_1``, so the constrained minimiser is the
    unconstrained one clipped to ``[-B, B]``. A zero regressor sum returns 0.
    """
    Y = check_series(Y)
    if Y.shape[0] < 2:
        raise ValueError("need at least two observations")
    den = float(np.dot(Y[:-1], Y[:-1]))
    if den == 0.0:
        return 0.0
    a = float(np.dot(Y[:-1], Y[1:])) / den
    return float(project([a], ParameterClass(1, param_class.radius))[0])


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n: int


def prediction_error_mc(model, theta_hat, theta_star, noise, T, n_mc, seed):
    """Monte Carlo estimate of the out-of-sample prediction error.

    Each replicate simulates a fresh trajectory under ``theta_star`` and
    records ``(1/T) sum_t (Yhat_t(theta_hat) - Yhat_t(theta_star))^2``.
    """
    if n_mc < 2:
        raise ValueError("n_mc must be at least 2")
    theta_hat = check_vector(theta_hat, model.dim)
    theta_star = check_vector(theta_star, model.dim)
    values = np.empty(n_mc)
    for r in range(n_mc):
        traj = model.simulate(theta_star, noise, T, derive_seed(seed, "pred-eval", r))
        gap = model.predict(theta_hat, traj.Y) - model.predict(theta_star, traj.Y)
        values[r] = np.dot(gap, gap) / T
    return MCEstimate(
        mean=float(values.mean()),
        std_error=float(values.std(ddof=1) / np.sqrt(n_mc)),
        n=n_mc,
    )


class ArmaPEM(TransformerMixin, BaseEstimator):
    """ARMA(p, q) prediction error estimator with an sklearn interface.

    ``fit(y)`` estimates the coefficients from a single series, ``predict(y)``
    returns one-step-ahead predictions, and ``transform(y)`` returns the
    prediction errors (the estimated innovations), so the estimator can
    whiten a series inside a :class:`~sklearn.pipeline.Pipeline`.

    Parameters
    ----------
    p, q : int
        AR and MA orders.
    radius : float
        Radius of the parameter ball searched.
    n_starts, start_net_epsilon, max_iter, tol, damping :
        Optimizer settings, see :class:`FitConfig`.

    Attributes
    ----------
    coef_ : ndarray of shape (p + q,)
        Estimated ``(a_1..a_p, b_1..b_q)``.
    ar_, ma_ : ndarray
        The AR and MA halves of ``coef_``.
    loss_ : float
        Training loss at ``coef_``.
    n_iter_ : int
        Total optimizer iterations across starts.
    converged_ : bool
    """

    def __init__(self, p=1, q=0, radius=0.99, n_starts=8, start_net_epsilon=None,
                 max_iter=200, tol=1e-10, damping=1e-3):
        self.p = p
        self.q = q
        self.radius = radius
        self.n_starts = n_starts
        self.start_net_epsilon = start_net_epsilon
        self.max_iter = max_iter
        self.tol = tol
        self.damping = damping

    def _model(self):
        return ArmaModel(self.p, self.q)

    def fit(self, y, X=None):
        y = check_series(y, name="y")
        model = self._model()
        config = FitConfig(
            n_starts=self.n_starts,
            start_net_epsilon=self.start_net_epsilon,
            max_iterations=self.max_iter,
            gradient_tolerance=self.tol,
            levenberg_damping_init=self.damping,
        )
        result = fit(model, y, ParameterClass(model.dim, self.radius), config)
        self.coef_ = result.theta_hat
        self.ar_ = result.theta_hat[: self.p]
        self.ma_ = result.theta_hat[self.p :]
        self.loss_ = result.loss
        self.n_iter_ = result.iterations_total
        self.converged_ = result.converged
        return self

    def predict(self, y):
        check_is_fitted(self, "coef_")
        return self._model().predict(self.coef_, check_series(y, name="y"))

    def transform(self, y):
        check_is_fitted(self, "coef_")
        return self._model().residuals(self.coef_, check_series(y, name="y"))

    def score(self, y, X=None):
        """Negative mean squared one-step prediction error on ``y``."""
        check_is_fitted(self, "coef_")
        return -loss(self._model(), self.coef_, y)
