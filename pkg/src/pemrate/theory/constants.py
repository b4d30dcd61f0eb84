"""Burn-in times, the prediction-error envelope and the parameter-error bound.

All logarithms are natural. A burn-in term whose base is not a positive
finite number (a logarithm of an argument <= 1, or a nonpositive
excitation constant) is reported as 1 and its name is recorded in
``BurnInReport.flags``.
"""

from dataclasses import dataclass, field
import math

from .._validation import check_positive

LEADING_CONSTANT = 653.0


@dataclass(frozen=True)
class ConstantSet:
    """Problem constants entering the burn-in times and the rate bound.

    ``L2`` and ``L3`` may be zero (models linear in the parameter), and
    ``lambda0`` is not range-checked here so that degenerate excitation can
    be reported by :func:`burn_in_times` instead of rejected.
    """

    d_theta: int
    sigma_w: float
    B_theta: float
    L1: float
    L2: float
    L3: float
    a: float
    lambda0: float
    b1: float
    b2: float
    gamma: float

    def __post_init__(self):
        if int(self.d_theta) != self.d_theta or self.d_theta < 1:
            raise ValueError("d_theta must be a positive integer")
        for name in ("sigma_w", "B_theta", "L1", "a", "b1"):
            check_positive(getattr(self, name), name)
        for name in ("L2", "L3"):
            check_positive(getattr(self, name), name, strict=False)
        if not math.isfinite(self.lambda0):
            raise ValueError("lambda0 must be finite")
        if not 0.0 <= self.b2 < 1.0:
            raise ValueError(f"b2 must lie in [0, 1), got {self.b2}")
        if not 0.0 < self.gamma < 0.5:
            raise ValueError(f"gamma must lie in (0, 1/2), got {self.gamma}")


@dataclass(frozen=True)
class BurnInReport:
    T1: float
    T21: float
    T22: float
    T23: float
    T2: float
    T3: float
    C1: float
    C2: float
    C3: float
    C4: float
    C5: float
    T0: float
    flags: tuple = field(default=())

    def as_dict(self):
        return {
            "T0": self.T0, "T1": self.T1, "T2": self.T2, "T21": self.T21,
            "T22": self.T22, "T23": self.T23, "T3": self.T3, "C1": self.C1,
            "C2": self.C2, "C3": self.C3, "C4": self.C4, "C5": self.C5,
            "flags": ",".join(self.flags),
        }


def _power_term(name, base_fn, exponent, flags):
    try:
        base = base_fn()
    except (ValueError, ZeroDivisionError):
        base = math.nan
    if not (math.isfinite(base) and base > 0.0):
        flags.append(name)
        return 1.0
    try:
        return base ** exponent
    except OverflowError:
        return math.inf


def burn_in_times(k):
    """Evaluate the explicit burn-in times ``T1``, ``T2``, ``T3`` and ``C1..C5``."""
    flags = []
    d, s, B = k.d_theta, k.sigma_w, k.B_theta
    L1, L2, L3, a = k.L1, k.L2, k.L3, k.a
    lam, b1, b2, g = k.lambda0, k.b1, k.b2, k.gamma
    e_b = 1.0 / (1.0 - b2)
    log = math.log

    core1 = d * b1 * L1 ** 4 * a ** 2
    T1 = max(
        _power_term("T1[a]", lambda: 32.0 * core1 * log(8.0 * math.sqrt(8.0)), e_b, flags),
        _power_term(
            "T1[b]",
            lambda: 64.0 * core1 / (1.0 - b2) * log(128.0 * core1 / (1.0 - b2)),
            e_b,
            flags,
        ),
    )

    T21 = _power_term(
        "T21", lambda: 24.0 * d * b1 * L1 ** 2 / lam * log(6.0 * L1 / math.sqrt(lam)), e_b, flags
    )
    T22 = _power_term(
        "T22", lambda: 16.0 * d * b1 * L1 ** 2 / lam * log(15.0 * L1 / math.sqrt(lam)), e_b, flags
    )
    core23 = b1 * L1 ** 2 / (lam * (1.0 - b2)) if lam != 0 else math.nan
    T23 = max(
        _power_term("T23[a]", lambda: 192.0 * core23 * log(384.0 * core23), e_b, flags),
        _power_term(
            "T23[b]",
            lambda: 48.0 * b1 * L1 ** 2 * log(96.0 * (s ** 2 * d + 2.0 * s * L1 * B)) / lam,
            e_b,
            flags,
        ),
    )
    T2 = max(T21, T22, T23)

    C1 = 16.0 * (d * s ** 2 + 4.0 * s ** 2 + 10.0 * s * L1 * B + L1 ** 2 * B ** 2)
    rbar2 = 8.0 * a * C1 + 2.0 * a * L1 ** 2 * B ** 2
    C2 = rbar2 * (8.0 * s * L3 * math.sqrt(rbar2) + 18.0 * math.sqrt(d) * s * L2)
    C3 = 4.0 * B ** 2 * math.sqrt(2.0 * d * s ** 2 * (16.0 * L3 ** 2 * B ** 2 + 176.0 * L2 ** 2))
    C4 = L2 ** 2 * (rbar2 ** 2 + 16.0 * B ** 4)
    C5 = 2.0 * max(C2 + C3, C4)

    e_g = 3.0 / (1.0 - 2.0 * g)
    c5 = C5 ** (2.0 / 3.0)
    T3 = max(
        _power_term("T3[a]", lambda: c5 * log(3.0), e_g, flags),
        _power_term(
            "T3[b]",
            lambda: 6.0 * c5 / (1.0 - 2.0 * g) * log(12.0 * c5 / (1.0 - 2.0 * g)),
            e_g,
            flags,
        ),
    )

    return BurnInReport(
        T1=T1, T21=T21, T22=T22, T23=T23, T2=T2, T3=T3,
        C1=C1, C2=C2, C3=C3, C4=C4, C5=C5,
        T0=max(T1, T2, T3), flags=tuple(flags),
    )


def theorem1_bound(k, T, c=LEADING_CONSTANT):
    """``c d sigma_w^2 / T + (2 L1^2 B^2 + 16) / T^(1 + gamma)``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    higher = 2.0 * k.L1 ** 2 * k.B_theta ** 2 + 16.0
    return c * k.d_theta * k.sigma_w ** 2 / T + higher / T ** (1.0 + k.gamma)


def parameter_error_bound(a, M_T_hat, L1, B_theta, T):
    """Upper bound on ``||theta_hat - theta_star||^2`` from the martingale offset.

    A negative offset is clamped to zero, which only loosens the bound.
    """
    check_positive(a, "a")
    return 8.0 * a * max(M_T_hat, 0.0) + 2.0 * a * L1 ** 2 * B_theta ** 2 / T
