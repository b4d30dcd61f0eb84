"""Scalar ARMA(p, q) models and their one-step-ahead predictor.

The model is

    Y_t = sum_i a_i Y_{t-i} + W_t + sum_j b_j W_{t-j}

with ``b_0 = 1`` and zero pre-history (``Y_t = W_t = 0`` for ``t < 0``).
Writing ``A(z) = 1 - sum a_i z^i`` and ``B(z) = 1 + sum b_j z^j``, the
predictor ``Yhat_t`` solves ``B(z^-1) Yhat_t = [B(z^-1) - A(z^-1)] Y_t``,
again from zero initial conditions. Every recursion below is a causal
linear filter with denominator ``B`` and is evaluated with
:func:`scipy.signal.lfilter`, which runs exactly that difference equation.

Derivatives follow from differentiating the predictor equation:

* ``B . dYhat/da_i = Y_{t-i}``
* ``B . dYhat/db_j = e_{t-j}`` where ``e = Y - Yhat``
* ``B . d2Yhat/da_i db_j = -dYhat_{t-j}/da_i``
* ``B . d2Yhat/db_j db_k = -dYhat_{t-k}/db_j - dYhat_{t-j}/db_k``

and the second derivatives in ``a`` vanish. Because shifting commutes with
the filter, each family reduces to one filtered base sequence plus shifts.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .noise import sample_noise
from ._validation import check_series, check_vector

DEFAULT_MARGIN = 0.05


@dataclass(frozen=True)
class ArmaParams:
    """AR coefficients ``a_1..a_p`` and MA coefficients ``b_1..b_q``."""

    ar: np.ndarray
    ma: np.ndarray

    def __init__(self, ar=(), ma=()):
        ar = np.array(ar, dtype=np.float64).reshape(-1)
        ma = np.array(ma, dtype=np.float64).reshape(-1)
        if not (np.all(np.isfinite(ar)) and np.all(np.isfinite(ma))):
            raise ValueError("ARMA coefficients must be finite")
        ar.setflags(write=False)
        ma.setflags(write=False)
        object.__setattr__(self, "ar", ar)
        object.__setattr__(self, "ma", ma)

    @property
    def p(self):
        return self.ar.shape[0]

    @property
    def q(self):
        return self.ma.shape[0]

    @property
    def dim(self):
        return self.p + self.q

    @property
    def theta(self):
        return np.concatenate([self.ar, self.ma])

    @classmethod
    def from_theta(cls, theta, p, q):
        theta = check_vector(theta, p + q)
        return cls(theta[:p], theta[p:])

    def __eq__(self, other):
        if not isinstance(other, ArmaParams):
            return NotImplemented
        return np.array_equal(self.ar, other.ar) and np.array_equal(self.ma, other.ma)

    def __hash__(self):
        return hash((self.ar.tobytes(), self.ma.tobytes()))

    def __repr__(self):
        return f"ArmaParams(ar={self.ar.tolist()}, ma={self.ma.tolist()})"


@dataclass(frozen=True)
class Trajectory:
    """Aligned output, noise and prediction sequences of a common length."""

    Y: np.ndarray
    W: np.ndarray | None = None
    yhat: np.ndarray | None = None

    def __post_init__(self):
        T = None
        for name in ("Y", "W", "yhat"):
            value = getattr(self, name)
            if value is None:
                continue
            arr = np.array(value, dtype=np.float64).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if T is None:
                T = arr.shape[0]
            elif arr.shape[0] != T:
                raise ValueError(f"{name} has length {arr.shape[0]}, expected {T}")
        if self.Y.shape[0] < 1:
            raise ValueError("trajectory must have T >= 1")

    @property
    def T(self):
        return self.Y.shape[0]


@dataclass(frozen=True)
class StabilityReport:
    ar_root_min_modulus: float
    ma_root_min_modulus: float
    stable: bool
    invertible: bool


def _min_root_modulus(lag_coeffs):
    """Smallest |root| of ``1 + sum_k c_k z^k`` (``inf`` if constant)."""
    coeffs = np.concatenate([[1.0], np.asarray(lag_coeffs, dtype=np.float64)])
    nz = np.flatnonzero(coeffs)
    coeffs = coeffs[: nz[-1] + 1]
    if coeffs.shape[0] == 1:
        return np.inf
    # np.roots works on companion-matrix eigenvalues, highest degree first
    roots = np.roots(coeffs[::-1])
    return float(np.min(np.abs(roots)))


def check_stability(params, margin=DEFAULT_MARGIN):
    """Root-location certificate for ``A`` (stability) and ``B`` (invertibility)."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    ar_min = _min_root_modulus(-params.ar)
    ma_min = _min_root_modulus(params.ma)
    return StabilityReport(
        ar_root_min_modulus=ar_min,
        ma_root_min_modulus=ma_min,
        stable=bool(ar_min > 1.0 + margin),
        invertible=bool(ma_min > 1.0 + margin),
    )


def _ar_poly(params):
    return np.concatenate([[1.0], -params.ar])


def _ma_poly(params):
    return np.concatenate([[1.0], params.ma])


def simulate_from_noise(params, W):
    """Run the ARMA recursion on a given noise sequence."""
    W = check_series(W, name="W")
    Y = lfilter(_ma_poly(params), _ar_poly(params), W)
    return Trajectory(Y=Y, W=W)


def simulate(params, noise, T, seed):
    """Simulate ``T`` steps driven by i.i.d. draws from ``noise``."""
    return simulate_from_noise(params, sample_noise(noise, T, seed))


def _shift(x, k):
    """``out[t] = x[t - k]`` with zeros before the start (``k >= 0``)."""
    if k == 0:
        return x
    out = np.zeros_like(x)
    if k < x.shape[0]:
        out[k:] = x[:-k]
    return out


def _predictor_numerator(params):
    n = max(params.p, params.q)
    num = np.zeros(n + 1)
    num[1 : params.p + 1] += params.ar
    num[1 : params.q + 1] += params.ma
    return num


def predict_sequence(params, Y):
    """One-step-ahead predictions ``Yhat_0..Yhat_{T-1}``.

    ``Yhat_t`` only uses ``Y_0..Y_{t-1}``. For ``q = 0`` this is exactly
    ``sum_i a_i Y_{t-i}``.
    """
    Y = check_series(Y)
    if params.dim == 0:
        return np.zeros_like(Y)
    return lfilter(_predictor_numerator(params), _ma_poly(params), Y)


def residuals(params, Y):
    """Prediction errors ``e_t = Y_t - Yhat_t``."""
    Y = check_series(Y)
    return Y - predict_sequence(params, Y)


def _first_order(params, Y):
    den = _ma_poly(params)
    yhat = predict_sequence(params, Y)
    base_y = lfilter([1.0], den, Y)
    base_e = lfilter([1.0], den, Y - yhat) if params.q else None
    return den, yhat, base_y, base_e


def _gradient_matrix(params, base_y, base_e):
    T = base_y.shape[0]
    Z = np.empty((T, params.dim))
    for i in range(1, params.p + 1):
        Z[:, i - 1] = _shift(base_y, i)
    for j in range(1, params.q + 1):
        Z[:, params.p + j - 1] = _shift(base_e, j)
    return Z


def predict_gradients(params, Y):
    """Rows ``Z_t = d Yhat_t / d theta`` as a ``(T, p + q)`` array."""
    Y = check_series(Y)
    _, _, base_y, base_e = _first_order(params, Y)
    return _gradient_matrix(params, base_y, base_e)


def predict_with_gradients(params, Y):
    """Predictions and their parameter Jacobian in one pass."""
    Y = check_series(Y)
    _, yhat, base_y, base_e = _first_order(params, Y)
    return yhat, _gradient_matrix(params, base_y, base_e)


def predict_hessians(params, Y):
    """Second derivatives ``d2 Yhat_t / d theta^2`` as a ``(T, d, d)`` array.

    Mixed entries are ``-S^{i+j} B^{-2} Y`` and MA-MA entries are
    ``-2 S^{j+k} B^{-2} e`` where ``S`` is the unit delay.
    """
    Y = check_series(Y)
    p, q = params.p, params.q
    T, d = Y.shape[0], params.dim
    H = np.zeros((T, d, d))
    if q == 0:
        return H
    den, _, base_y, base_e = _first_order(params, Y)
    base_y2 = lfilter([1.0], den, base_y)
    base_e2 = lfilter([1.0], den, base_e)
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            col = -_shift(base_y2, i + j)
            H[:, i - 1, p + j - 1] = col
            H[:, p + j - 1, i - 1] = col
    for j in range(1, q + 1):
        for k in range(j, q + 1):
            col = -2.0 * _shift(base_e2, j + k)
            H[:, p + j - 1, p + k - 1] = col
            H[:, p + k - 1, p + j - 1] = col
    return H


class ArmaModel:
    """ARMA(p, q) predictor family indexed by ``theta = (a, b)``.

    This is the object the estimator and the theory routines take as
    ``model``: anything exposing ``dim``, ``predict``, ``gradients``,
    ``hessians``, ``is_admissible`` and ``simulate`` with these signatures
    can stand in for it.
    """

    def __init__(self, p, q):
        if p < 0 or q < 0 or int(p) != p or int(q) != q:
            raise ValueError("orders must be nonnegative integers")
        self.p = int(p)
        self.q = int(q)

    def __repr__(self):
        return f"ArmaModel(p={self.p}, q={self.q})"

    @property
    def dim(self):
        return self.p + self.q

    def params(self, theta):
        return ArmaParams.from_theta(theta, self.p, self.q)

    def predict(self, theta, Y):
        return predict_sequence(self.params(theta), Y)

    def gradients(self, theta, Y):
        return predict_gradients(self.params(theta), Y)

    def predict_with_gradients(self, theta, Y):
        return predict_with_gradients(self.params(theta), Y)

    def hessians(self, theta, Y):
        return predict_hessians(self.params(theta), Y)

    def residuals(self, theta, Y):
        return residuals(self.params(theta), Y)

    def is_admissible(self, theta):
        """Whether the predictor filter is stable (``B`` roots outside the unit circle)."""
        if self.q == 0:
            return True
        return check_stability(self.params(theta), margin=0.0).invertible

    def simulate(self, theta, noise, T, seed):
        return simulate(self.params(theta), noise, T, seed)
