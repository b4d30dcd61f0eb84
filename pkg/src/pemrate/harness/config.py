"""Flat ``key = value`` configuration files.

One assignment per line, ``#`` starts a comment, and nesting is expressed
with dotted keys (``model.p``, ``noise.kind``). Lists are comma separated;
matrix rows are separated by ``;``. Unknown keys are rejected so that a
typo cannot silently fall back to a default.
"""

import configparser
from dataclasses import dataclass, field
import math

import numpy as np

from ..arma import ArmaParams, check_stability
from ..estimator import FitConfig
from ..exceptions import ConfigError
from ..noise import NoiseSpec, sub_gaussian_sigma
from ..param_space import ParameterClass
from ..theory.constants import LEADING_CONSTANT, ConstantSet
from ..theory.dependency import _check_chain

_ROOT = "root"
_U64 = 2 ** 64

KNOWN_KEYS = frozenset({
    "model.p", "model.q", "model.ar", "model.ma",
    "noise.kind", "noise.c", "noise.sigma",
    "class.radius",
    "T", "T_grid", "n_mc", "n_eval", "master_seed", "gamma", "output_path", "diagnostic",
    "fit.n_starts", "fit.start_net_epsilon", "fit.max_iterations",
    "fit.gradient_tolerance", "fit.levenberg_damping_init",
    "bound.c", "bound.L1", "bound.sigma_w",
    "constants.d_theta", "constants.sigma_w", "constants.B_theta", "constants.L1",
    "constants.L2", "constants.L3", "constants.a", "constants.lambda0",
    "constants.b1", "constants.b2", "constants.gamma",
    "diagnose.n_mc", "diagnose.net_epsilon", "diagnose.net_T",
    "markov.P", "markov.initial", "markov.T_grid",
})


def parse_config_text(text):
    """Parse config text into a ``{key: raw string}`` mapping."""
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
        interpolation=None, default_section="__unused__",
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{_ROOT}]\n{text}")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if parser.sections() != [_ROOT]:
        raise ConfigError("section headers are not allowed; use dotted keys")
    values = dict(parser[_ROOT])
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return values


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


class KeyValues:
    """Typed read access to a parsed config; every failure is a :class:`ConfigError`."""

    def __init__(self, values):
        self._values = dict(values)

    def __contains__(self, key):
        return key in self._values

    def set(self, key, value):
        self._values[key] = str(value)

    def _get(self, key, default, convert, what):
        if key not in self._values:
            if default is _REQUIRED:
                raise ConfigError(f"missing required key {key!r}")
            return default
        raw = self._values[key]
        try:
            return convert(raw)
        except (ValueError, TypeError):
            raise ConfigError(f"{key} = {raw!r} is not {what}") from None

    def get_str(self, key, default=None):
        return self._get(key, default, str, "a string")

    def get_int(self, key, default=None):
        return self._get(key, default, _parse_int, "an integer")

    def get_float(self, key, default=None):
        return self._get(key, default, _parse_float, "a finite number")

    def get_bool(self, key, default=False):
        return self._get(key, default, _parse_bool, "a boolean")

    def get_floats(self, key, default=None):
        return self._get(key, default, lambda s: tuple(_parse_float(x) for x in _split(s)),
                         "a comma separated list of numbers")

    def get_ints(self, key, default=None):
        return self._get(key, default, lambda s: tuple(_parse_int(x) for x in _split(s)),
                         "a comma separated list of integers")

    def get_matrix(self, key, default=None):
        def convert(s):
            rows = [tuple(_parse_float(x) for x in _split(r)) for r in s.split(";") if r.strip()]
            if not rows or len({len(r) for r in rows}) != 1:
                raise ValueError
            return np.array(rows)
        return self._get(key, default, convert, "a matrix with rows separated by ';'")


_REQUIRED = object()
REQUIRED = _REQUIRED


def _split(s):
    return [x for x in (part.strip() for part in s.split(",")) if x]


def _parse_int(s):
    s = s.strip()
    if s.lower().startswith("0x"):
        return int(s, 16)
    return int(s)


def _parse_float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError
    return v


def _parse_bool(s):
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError


@dataclass(frozen=True)
class ModelSpec:
    p: int
    q: int
    theta_star: np.ndarray
    noise: NoiseSpec
    param_class: ParameterClass


def model_spec_from(kv):
    """Model orders, true parameter, noise law and parameter class."""
    p = kv.get_int("model.p", 0)
    q = kv.get_int("model.q", 0)
    if p < 0 or q < 0 or p + q == 0:
        raise ConfigError("model.p and model.q must be nonnegative with p + q >= 1")
    ar = kv.get_floats("model.ar", (0.0,) * p)
    ma = kv.get_floats("model.ma", (0.0,) * q)
    if len(ar) != p or len(ma) != q:
        raise ConfigError(f"model.ar needs {p} entries and model.ma needs {q}")
    params = ArmaParams(ar, ma)
    report = check_stability(params)
    if not (report.stable and report.invertible):
        raise ConfigError(f"true parameter fails the stability/invertibility margin: {report}")

    kind = kv.get_str("noise.kind", "uniform")
    try:
        noise = NoiseSpec(kind, kv.get_float("noise.c", 1.0), kv.get_float("noise.sigma"))
        param_class = ParameterClass(p + q, kv.get_float("class.radius", 0.99))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not param_class.contains(params.theta):
        raise ConfigError("true parameter lies outside the parameter class")
    return ModelSpec(p=p, q=q, theta_star=params.theta, noise=noise, param_class=param_class)


def fit_config_from(kv):
    defaults = FitConfig()
    try:
        return FitConfig(
            n_starts=kv.get_int("fit.n_starts", defaults.n_starts),
            start_net_epsilon=kv.get_float("fit.start_net_epsilon", defaults.start_net_epsilon),
            max_iterations=kv.get_int("fit.max_iterations", defaults.max_iterations),
            gradient_tolerance=kv.get_float("fit.gradient_tolerance", defaults.gradient_tolerance),
            levenberg_damping_init=kv.get_float("fit.levenberg_damping_init",
                                            defaults.levenberg_damping_init),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def master_seed_from(kv):
    seed = kv.get_int("master_seed", 0)
    if not 0 <= seed < _U64:
        raise ConfigError("master_seed must be an unsigned 64-bit integer")
    return seed


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a rate experiment needs.

    ``n_eval`` is the number of held-out trajectories used to evaluate the
    prediction error of each fitted replicate. ``bound_L1`` and
    ``bound_sigma_w`` feed the reference bound column only.
    """

    model: ModelSpec
    T_grid: tuple
    n_mc: int
    master_seed: int
    gamma: float = 0.25
    n_eval: int = 10
    fit: FitConfig = field(default_factory=FitConfig)
    bound_c: float = LEADING_CONSTANT
    bound_L1: float = 1.0
    bound_sigma_w: float | None = None
    output_path: str | None = None
    diagnostic: bool = False

    def __post_init__(self):
        grid = tuple(int(t) for t in self.T_grid)
        if len(grid) < 2:
            raise ConfigError("T_grid needs at least two horizons")
        if any(t < 1 for t in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("T_grid must be strictly ascending positive integers")
        if min(grid) < self.model.param_class.dim + 1:
            raise ConfigError("every T must exceed the parameter dimension")
        object.__setattr__(self, "T_grid", grid)
        if self.n_mc < 2 or self.n_eval < 2:
            raise ConfigError("n_mc and n_eval must be at least 2")
        if not 0 <= self.master_seed < _U64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if not 0.0 < self.gamma < 0.5:
            raise ConfigError("gamma must lie in (0, 1/2)")
        if not (self.bound_c > 0 and self.bound_L1 > 0):
            raise ConfigError("bound.c and bound.L1 must be positive")

    @property
    def sigma_w(self):
        if self.bound_sigma_w is not None:
            return self.bound_sigma_w
        return sub_gaussian_sigma(self.model.noise)

    def bound_constants(self):
        """Constant set for the bound column; fields it does not use are placeholders."""
        return ConstantSet(
            d_theta=self.model.param_class.dim, sigma_w=self.sigma_w,
            B_theta=self.model.param_class.radius, L1=self.bound_L1, L2=0.0, L3=0.0,
            a=1.0, lambda0=1.0, b1=1.0, b2=0.0, gamma=self.gamma,
        )


def experiment_config_from(kv):
    return ExperimentConfig(
        model=model_spec_from(kv),
        T_grid=kv.get_ints("T_grid", REQUIRED),
        n_mc=kv.get_int("n_mc", REQUIRED),
        master_seed=master_seed_from(kv),
        gamma=kv.get_float("gamma", 0.25),
        n_eval=kv.get_int("n_eval", 10),
        fit=fit_config_from(kv),
        bound_c=kv.get_float("bound.c", LEADING_CONSTANT),
        bound_L1=kv.get_float("bound.L1", 1.0),
        bound_sigma_w=kv.get_float("bound.sigma_w"),
        output_path=kv.get_str("output_path"),
        diagnostic=kv.get_bool("diagnostic", False),
    )


def constant_set_from(kv):
    try:
        return ConstantSet(
            d_theta=kv.get_int("constants.d_theta", REQUIRED),
            sigma_w=kv.get_float("constants.sigma_w", REQUIRED),
            B_theta=kv.get_float("constants.B_theta", REQUIRED),
            L1=kv.get_float("constants.L1", REQUIRED),
            L2=kv.get_float("constants.L2", REQUIRED),
            L3=kv.get_float("constants.L3", REQUIRED),
            a=kv.get_float("constants.a", REQUIRED),
            lambda0=kv.get_float("constants.lambda0", REQUIRED),
            b1=kv.get_float("constants.b1", REQUIRED),
            b2=kv.get_float("constants.b2", REQUIRED),
            gamma=kv.get_float("constants.gamma", 0.25),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class MarkovSpec:
    P: np.ndarray
    initial: np.ndarray
    T_grid: tuple


def markov_spec_from(kv):
    P = kv.get_matrix("markov.P", REQUIRED)
    n = P.shape[0]
    initial = np.array(kv.get_floats("markov.initial", (1.0 / n,) * n))
    T_grid = kv.get_ints("markov.T_grid", (16, 32, 64, 128))
    try:
        P, initial = _check_chain(P, initial)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if len(T_grid) < 3 or any(b <= a for a, b in zip(T_grid, T_grid[1:])) or T_grid[0] < 1:
        raise ConfigError("markov.T_grid needs at least three ascending positive horizons")
    return MarkovSpec(P=P, initial=initial, T_grid=T_grid)
