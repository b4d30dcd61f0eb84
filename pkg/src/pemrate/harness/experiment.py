"""Monte Carlo rate experiment and its CSV table."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import csv
import io
import logging
import math

import numpy as np
from scipy import stats

from ..arma import ArmaModel
from ..estimator import fit, prediction_error_mc
from ..exceptions import EstimationError
from ..theory.constants import theorem1_bound
from .._seeding import derive_seed

logger = logging.getLogger(__name__)

MAX_FAILURE_RATE = 0.05
COLUMNS = ("T", "mean_pred_error", "std_error", "mean_param_error_sq",
           "theorem1_bound", "n_mc")


@dataclass(frozen=True)
class RateRow:
    T: int
    mean_pred_error: float
    std_error: float
    mean_param_error_sq: float
    theorem1_bound: float
    n_mc: int


@dataclass(frozen=True)
class RateTable:
    rows: tuple

    def __post_init__(self):
        Ts = [r.T for r in self.rows]
        if any(b <= a for a, b in zip(Ts, Ts[1:])):
            raise ValueError("rows must ascend strictly in T")
        for r in self.rows:
            if min(r.mean_pred_error, r.std_error, r.mean_param_error_sq) < 0:
                raise ValueError(f"negative error field in row T={r.T}")

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self):
        """Render with a fixed header and 17 significant digits (exact float round trip)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in self.rows:
            writer.writerow([
                r.T, _fmt(r.mean_pred_error), _fmt(r.std_error),
                _fmt(r.mean_param_error_sq), _fmt(r.theorem1_bound), r.n_mc,
            ])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        rows = tuple(
            RateRow(int(d["T"]), float(d["mean_pred_error"]), float(d["std_error"]),
                    float(d["mean_param_error_sq"]), float(d["theorem1_bound"]), int(d["n_mc"]))
            for d in reader
        )
        return cls(rows)


def _fmt(x):
    return f"{x:.17g}"


@dataclass(frozen=True)
class CellResult:
    T: int
    replicate: int
    ok: bool
    pred_error: float = math.nan
    param_error_sq: float = math.nan
    message: str = ""


def run_cell(config, T, r):
    """Simulate, fit and evaluate one ``(T, replicate)`` cell.

    Pure given ``config``: the training trajectory comes from the ``sim``
    stream and the held-out evaluation from the disjoint ``eval`` stream.
    """
    spec = config.model
    model = ArmaModel(spec.p, spec.q)
    theta_star = spec.theta_star
    traj = model.simulate(theta_star, spec.noise, T, derive_seed(config.master_seed, "sim", (T, r)))
    if config.diagnostic:
        theta_hat = theta_star.copy()
    else:
        try:
            theta_hat = fit(model, traj.Y, spec.param_class, config.fit).theta_hat
        except EstimationError as exc:
            return CellResult(T, r, ok=False, message=str(exc))
    est = prediction_error_mc(model, theta_hat, theta_star, spec.noise, T, config.n_eval,
                              derive_seed(config.master_seed, "eval", (T, r)))
    err2 = float(np.sum((theta_hat - theta_star) ** 2))
    return CellResult(T, r, ok=True, pred_error=est.mean, param_error_sq=err2)


def _run_cell_args(args):
    return run_cell(*args)


def _aggregate(config, T, cells):
    good = [c for c in cells if c.ok]
    failures = len(cells) - len(good)
    if failures > MAX_FAILURE_RATE * len(cells):
        raise EstimationError(
            f"estimation failed in {failures} of {len(cells)} replicates at T={T}",
            {"T": T, "failures": {c.replicate: c.message for c in cells if not c.ok}},
        )
    pred = np.array([c.pred_error for c in good])
    err2 = np.array([c.param_error_sq for c in good])
    n = pred.shape[0]
    se = float(pred.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return RateRow(
        T=T,
        mean_pred_error=float(pred.mean()),
        std_error=se,
        mean_param_error_sq=float(err2.mean()),
        theorem1_bound=theorem1_bound(config.bound_constants(), T, config.bound_c),
        n_mc=n,
    )


def run_rate_experiment(config, threads=1):
    """Run every ``(T, replicate)`` cell and aggregate one row per ``T``.

    With ``threads > 1`` cells are fanned out to a process pool; results are
    re-ordered by ``(T, replicate)`` before aggregation, so the table does
    not depend on scheduling.
    """
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be positive")
    tasks = [(config, T, r) for T in config.T_grid for r in range(config.n_mc)]
    if threads == 1:
        cells = [run_cell(*t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * threads))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(_run_cell_args, tasks, chunksize=chunk))
    cells.sort(key=lambda c: (c.T, c.replicate))

    rows = []
    for T in config.T_grid:
        row = _aggregate(config, T, [c for c in cells if c.T == T])
        logger.info("T=%d mean_pred_error=%.4g se=%.2g", T, row.mean_pred_error, row.std_error)
        rows.append(row)
    return RateTable(tuple(rows))


@dataclass(frozen=True)
class RateSlope:
    slope: float
    intercept: float
    r_squared: float
    n_used: int


def fit_rate_slope(table):
    """OLS of ``log mean_pred_error`` on ``log T``; rows with nonpositive means are skipped."""
    T = table.column("T").astype(np.float64)
    err = table.column("mean_pred_error")
    keep = err > 0
    if int(keep.sum()) < 3:
        raise ValueError("need at least three rows with positive mean prediction error")
    res = stats.linregress(np.log(T[keep]), np.log(err[keep]))
    return RateSlope(slope=float(res.slope), intercept=float(res.intercept),
                     r_squared=float(res.rvalue ** 2), n_used=int(keep.sum()))
