"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 estimation failure,
4 numeric or domain error.
"""

import argparse
import csv
import io
import logging
import sys

import numpy as np

from ..arma import ArmaModel
from ..estimator import fit
from ..exceptions import ConfigError, DomainError, EstimationError, ResourceError
from ..theory.constants import burn_in_times, parameter_error_bound
from ..theory.dependency import fit_dependency_growth
from ..theory.information import (
    expected_info_mc,
    empirical_info,
    fisher_info,
    isometry_event_rates,
    quad_ident_constant_mc,
    smoothness_constants_mc,
)
from ..theory.offsets import (
    basic_inequality_holds,
    linearized_offset,
    martingale_offset,
    mean_squared_gap,
    taylor_decomposition_check,
)
from .._seeding import derive_seed
from .config import (
    KeyValues,
    experiment_config_from,
    constant_set_from,
    fit_config_from,
    load_config,
    markov_spec_from,
    master_seed_from,
    model_spec_from,
)
from .experiment import fit_rate_slope, run_rate_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ESTIMATION = 3
EXIT_NUMERIC = 4

logger = logging.getLogger("pemrate")


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, np.ndarray):
        if x.ndim == 2:
            return "; ".join(", ".join(_fmt(v) for v in row) for row in x)
        return ", ".join(_fmt(v) for v in x)
    return str(x)


def format_key_values(pairs):
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in pairs)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc}") from None


def _key_values(args):
    kv = KeyValues(load_config(args.config) if args.config else {})
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        kv.set("master_seed", args.seed)
    return kv


def cmd_simulate(args):
    kv = _key_values(args)
    spec = model_spec_from(kv)
    T = kv.get_int("T", 1024)
    if T < 1:
        raise ConfigError("T must be positive")
    model = ArmaModel(spec.p, spec.q)
    traj = model.simulate(spec.theta_star, spec.noise, T, master_seed_from(kv))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("t", "Y", "W"))
    for t in range(T):
        writer.writerow((t, _fmt(traj.Y[t]), _fmt(traj.W[t])))
    _emit(buf.getvalue(), args.out)


def read_trajectory(path):
    """Read a ``t,Y[,W]`` CSV; returns ``(Y, W or None)``."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or []
            if "Y" not in fields:
                raise ConfigError(f"{path}: trajectory CSV needs a Y column")
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory {path}: {exc}") from None
    try:
        Y = np.array([float(r["Y"]) for r in rows])
        W = np.array([float(r["W"]) for r in rows]) if "W" in fields else None
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: non-numeric trajectory entry") from None
    if Y.shape[0] == 0:
        raise ConfigError(f"{path}: empty trajectory")
    return Y, W


def cmd_fit(args):
    kv = _key_values(args)
    spec = model_spec_from(kv)
    Y, _ = read_trajectory(args.trajectory)
    model = ArmaModel(spec.p, spec.q)
    result = fit(model, Y, spec.param_class, fit_config_from(kv))
    _emit(format_key_values([
        ("p", spec.p), ("q", spec.q), ("T", Y.shape[0]),
        ("theta_hat", result.theta_hat),
        ("ar", result.theta_hat[: spec.p]), ("ma", result.theta_hat[spec.p:]),
        ("loss", result.loss), ("starts_used", result.starts_used),
        ("iterations_total", result.iterations_total), ("converged", result.converged),
    ]), args.out)


def cmd_rate(args):
    kv = _key_values(args)
    config = experiment_config_from(kv)
    table = run_rate_experiment(config, threads=args.threads)
    _emit(table.to_csv(), args.out or config.output_path)
    try:
        slope = fit_rate_slope(table)
        logger.info("log-log slope %.4f (r^2 %.4f)", slope.slope, slope.r_squared)
    except ValueError as exc:
        logger.info("slope not available: %s", exc)


def cmd_diagnose(args):
    kv = _key_values(args)
    spec = model_spec_from(kv)
    seed = master_seed_from(kv)
    T = kv.get_int("T", 1024)
    n_mc = kv.get_int("diagnose.n_mc", 50)
    net_eps = kv.get_float("diagnose.net_epsilon", spec.param_class.radius / 2.0)
    net_T = kv.get_int("diagnose.net_T", min(T, 256))
    b1 = kv.get_float("constants.b1", 1.0)
    b2 = kv.get_float("constants.b2", 0.0)
    if T < spec.p + spec.q + 1 or n_mc < 2 or net_T < 1:
        raise ConfigError("need T > d, diagnose.n_mc >= 2 and diagnose.net_T >= 1")

    model = ArmaModel(spec.p, spec.q)
    theta_star = spec.theta_star
    traj = model.simulate(theta_star, spec.noise, T, derive_seed(seed, "diagnose-sim", 0))
    result = fit(model, traj.Y, spec.param_class, fit_config_from(kv))
    theta_hat = result.theta_hat

    info = expected_info_mc(model, theta_star, spec.noise, T, n_mc,
                            derive_seed(seed, "diagnose-info", 0))
    smooth = smoothness_constants_mc(model, spec.param_class, theta_star, spec.noise, net_T,
                                     net_eps, min(n_mc, 5), derive_seed(seed, "diagnose-smooth", 0))
    a = quad_ident_constant_mc(model, spec.param_class, theta_star, spec.noise, net_T, net_eps,
                               min(n_mc, 20), derive_seed(seed, "diagnose-ident", 0))
    M_hat = martingale_offset(model, theta_hat, theta_star, traj.Y, traj.W)
    taylor = taylor_decomposition_check(model, theta_hat, theta_star, traj.Y, traj.W,
                                        smooth.L2, smooth.L3)
    iso = isometry_event_rates(model, theta_star, spec.noise, T, n_mc,
                               derive_seed(seed, "diagnose-isometry", 0),
                               lambda0=info.lambda0, b1=b1, b2=b2, L1=smooth.L1,
                               sigma_bar=info.sigma_bar)
    sigma_w2 = spec.noise.variance()
    _emit(format_key_values([
        ("T", T), ("theta_star", theta_star), ("theta_hat", theta_hat),
        ("loss", result.loss), ("converged", result.converged),
        ("param_error_sq", float(np.sum((theta_hat - theta_star) ** 2))),
        ("martingale_offset", M_hat),
        ("linearized_offset", linearized_offset(model, theta_hat, theta_star, traj.Y, traj.W)),
        ("mean_squared_gap", mean_squared_gap(model, theta_hat, theta_star, traj.Y)),
        ("basic_inequality_holds",
         basic_inequality_holds(model, theta_hat, theta_star, traj.Y, traj.W)),
        ("taylor_lhs", taylor.lhs), ("taylor_rhs", taylor.rhs), ("taylor_holds", taylor.holds),
        ("sigma_hat", empirical_info(model, theta_star, traj.Y)),
        ("sigma_bar", info.sigma_bar), ("lambda0", info.lambda0),
        ("fisher_info", fisher_info(info.sigma_bar, np.sqrt(sigma_w2))),
        ("isometry_upper_violation_rate", iso.upper_violation_rate),
        ("isometry_lower_violation_rate", iso.lower_violation_rate),
        ("isometry_predicted_upper", iso.predicted_upper),
        ("isometry_predicted_lower", iso.predicted_lower),
        ("L1_lower_bound", smooth.L1), ("L2_lower_bound", smooth.L2),
        ("L3_lower_bound", smooth.L3), ("a_lower_bound", a),
        ("parameter_error_bound",
         parameter_error_bound(a, M_hat, smooth.L1, spec.param_class.radius, T)),
    ]), args.out)


def cmd_burnin(args):
    kv = _key_values(args)
    report = burn_in_times(constant_set_from(kv))
    _emit(format_key_values(report.as_dict().items()), args.out)


def cmd_depmatrix(args):
    kv = _key_values(args)
    spec = markov_spec_from(kv)
    growth = fit_dependency_growth(spec.P, spec.initial, spec.T_grid)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("T", "spectral_norm", "spectral_norm_sq"))
    for T, n2 in zip(growth.T_grid, growth.norms_sq):
        writer.writerow((int(T), _fmt(float(np.sqrt(n2))), _fmt(float(n2))))
    _emit(buf.getvalue(), args.out)
    sys.stderr.write(format_key_values([("b1", growth.b1), ("b2", growth.b2)]))


COMMANDS = {
    "simulate": (cmd_simulate, "simulate a trajectory and write t,Y,W as CSV"),
    "fit": (cmd_fit, "fit a trajectory CSV and print the estimate"),
    "rate": (cmd_rate, "run the Monte Carlo rate experiment and write the rate table"),
    "diagnose": (cmd_diagnose, "offsets, information matrices and assumption constants"),
    "burnin": (cmd_burnin, "evaluate the burn-in times for a constant set"),
    "depmatrix": (cmd_depmatrix, "dependency-matrix norms of a finite Markov chain"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int, help="master seed, overrides the config")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pemrate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "fit":
            p.add_argument("trajectory", help="CSV with a Y column")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # usage errors exit with 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be positive")
    handler = COMMANDS[args.command][0]
    try:
        handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EstimationError as exc:
        print(f"estimation failure: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except (DomainError, ResourceError, ValueError, ArithmeticError,
            np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
