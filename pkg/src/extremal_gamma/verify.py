"""Finite-n checks of the limit theorems.

Two tracks:

* exact: P[M_n <= x] = P(alpha_n, x)**n evaluated through the incomplete
  gamma function, compared against the limit CDF on a grid;
* Monte Carlo: sampled normalized maxima compared to the limit law through
  the one-sample KS distance, or through moment z-scores for laws that are
  only known by their moments.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import limits
from .errors import ExtremalGammaError, UnsupportedOperation, UsageError
from .family import ShapeFamily
from .limits import FAlpha, Gumbel, HLaw, ULambda, Uniform01
from .norming import dirichlet_norming, gamma_norming
from .sampling import simulate_batch, simulate_raw
from .special import log_gamma, log_reg_gamma_p, log_reg_gamma_p_logx, reg_gamma_q_eval

log = logging.getLogger(__name__)

DEFAULT_TOLERANCES = {
    "exact_tol": 0.02,
    "ks_tol": 0.05,
    "z_tol": 4.0,
    "monotone_slack": 0.10,
}


@dataclass(frozen=True)
class TailQuantities:
    x_n: float
    A_n: float
    B_n: float
    C_n_bound: float
    log_A_n: float
    log_B_n: float
    overflow: bool = False


def tail_quantities(n, alpha_n, x_n):
    """A_n = n Q(alpha_n, x_n), B_n = n x^(a-1) e^-x / Gamma(a), and the bound A_n / x_n on C_n."""
    if not x_n > 0:
        raise ValueError(f"x_n must be > 0, got {x_n!r}")
    log_n = math.log(n)
    log_a = log_n + reg_gamma_q_eval(alpha_n, x_n).log_value
    log_b = log_n - log_gamma(alpha_n) - x_n + (alpha_n - 1.0) * math.log(x_n)
    log_c = log_a - math.log(x_n)
    overflow = max(log_a, log_b, log_c) > 709.0

    def _exp(v):
        return math.exp(v) if v <= 709.0 else math.inf

    return TailQuantities(x_n, _exp(log_a), _exp(log_b), _exp(log_c), log_a, log_b, overflow)


def exact_gamma_max_cdf(n, alpha_n, x):
    """P[M_n <= x] = P(alpha_n, x)**n for the maximum of n iid Gamma(alpha_n, 1)."""
    if x <= 0:
        return 0.0
    return math.exp(n * log_reg_gamma_p(alpha_n, x))


def exact_power_max_cdf(n, alpha_n, x0, exponent=None):
    """P[M_n**e <= x0] with e = n * alpha_n by default, evaluated entirely in logs.

    The threshold x0**(1/e) usually underflows, so it is passed to the
    incomplete gamma function as its logarithm.
    """
    if x0 <= 0:
        return 0.0
    e = n * alpha_n if exponent is None else exponent
    return math.exp(n * log_reg_gamma_p_logx(alpha_n, math.log(x0) / e))


def default_grid(law):
    if isinstance(law, Gumbel):
        return list(np.linspace(-3.0, 9.0, 61))
    if isinstance(law, FAlpha):
        return list(np.geomspace(0.05, 20.0, 61))
    if isinstance(law, (Uniform01, ULambda)):
        return [round(0.05 * i, 2) for i in range(1, 20)]
    raise UnsupportedOperation(f"no CDF grid for {law.name}")


def exact_curve(shape, n, grid=None, norming=None):
    """Rows ``(x, exact finite-n CDF, limit CDF)`` for the gamma row maximum."""
    norming = norming or gamma_norming(n, shape)
    grid = default_grid(norming.limit) if grid is None else list(grid)
    a = norming.alpha_n
    rows = []
    kind = norming.transform.kind
    for x in grid:
        if kind in ("linear", "identity"):
            x_n = norming.c_n * x + norming.d_n
            if x_n <= 0:
                log.warning("grid point x=%g maps to x_n=%g <= 0; skipped", x, x_n)
                continue
            exact = exact_gamma_max_cdf(n, a, x_n)
        elif kind == "power":
            if not 0 < x < 1:
                log.warning("grid point x=%g outside (0, 1) for the power transform; skipped", x)
                continue
            exact = exact_power_max_cdf(n, a, x, norming.transform.exponent)
        else:
            raise UsageError(f"transform {kind!r} has no exact gamma track")
        rows.append((float(x), exact, limits.cdf(norming.limit, x)))
    return rows


def sup_diff_exact(shape, n, grid=None):
    """max over the grid of |P[(M_n - d_n)/c_n <= x] - F(x)| (or its power-transform analogue)."""
    rows = exact_curve(shape, n, grid)
    return max(abs(e - f) for _, e, f in rows) if rows else math.nan


def unified_lemma_diagnostic(n, family, x=0.0):
    """A_n / B_n - 1 at x_n = c_n x + d_n, next to the mechanism bound 3 |alpha_n - 1| / x_n."""
    norming = gamma_norming(n, family)
    x_n = norming.c_n * x + norming.d_n
    tq = tail_quantities(n, norming.alpha_n, x_n)
    return {
        "x_n": x_n,
        "A_n": tq.A_n,
        "B_n": tq.B_n,
        "relative_gap": math.expm1(tq.log_A_n - tq.log_B_n),
        "bound": 3.0 * abs(norming.alpha_n - 1.0) / x_n,
    }


def _atoms(law):
    return [1.0] if isinstance(law, ULambda) and law.uniform_weight < 1.0 else []


def ks_statistic(samples, law):
    """One-sample KS distance sup |ECDF - F|.

    For distinct samples and continuous F this is the classical
    max_i max(i/R - F(x_(i)), F(x_(i)) - (i-1)/R). Tied samples and atoms of
    F (U_lambda at 1) are handled by comparing right limits with right
    limits and left limits with left limits.
    """
    if isinstance(law, HLaw):
        raise UnsupportedOperation("H has no CDF; use moment_check")
    xs = np.sort(np.asarray(samples, dtype=float))
    r = xs.size
    if r == 0:
        raise UsageError("ks_statistic needs at least one sample")
    values, counts = np.unique(xs, return_counts=True)
    cum = np.cumsum(counts)
    d = 0.0
    for v, c_hi, c_cnt in zip(values, cum, counts):
        c_lo = c_hi - c_cnt
        d = max(d, abs(c_hi / r - limits.cdf(law, v)), abs(c_lo / r - limits.cdf_left(law, v)))
    for atom in _atoms(law):
        below = np.searchsorted(xs, atom, side="left") / r
        upto = np.searchsorted(xs, atom, side="right") / r
        d = max(d, abs(below - limits.cdf_left(law, atom)), abs(upto - limits.cdf(law, atom)))
    return float(d)


@dataclass
class MomentCheck:
    z: list
    mean_error: list
    flagged: list  # True where the sample variance of X**k is zero

    def max_abs_z(self):
        return max(abs(v) for v in self.z)

    def to_dict(self):
        return {
            "z": [_json_float(v) for v in self.z],
            "mean_error": self.mean_error,
            "zero_variance": self.flagged,
        }


def _json_float(v):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def moment_check(samples, law, k_max=3):
    """z_k = (mean of X^k - E X^k) / (sd of X^k / sqrt(R)) for k = 1..k_max.

    Zero sample variance is flagged; z is then 0 when the sample mean equals
    the theoretical moment exactly and +-inf otherwise.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise UsageError("moment_check needs at least two samples")
    if np.any((x < 0) | (x > 1)):
        raise UsageError("moment_check expects samples in [0, 1]")
    z, errs, flags = [], [], []
    for k in range(1, k_max + 1):
        xk = x**k
        err = float(np.mean(xk) - limits.moment(law, k))
        sd = float(np.std(xk, ddof=1))
        errs.append(err)
        if sd == 0.0:
            flags.append(True)
            z.append(0.0 if err == 0.0 else math.copysign(math.inf, err))
        else:
            flags.append(False)
            z.append(err / (sd / math.sqrt(x.size)))
    return MomentCheck(z, errs, flags)


def dirichlet_sum_variance(shape, beta, n, replicates, seed, workers=1):
    """Empirical vs predicted variance of (d_n/c_n)(T_n - 1) for Dirichlet draws.

    T_n ~ Gamma(n alpha_n + beta_n) / (n alpha_n + beta_n), so the prediction
    is (d_n/c_n)**2 / (n alpha_n + beta_n).
    """
    norming = dirichlet_norming(n, shape, beta)
    ratio = norming.d_n / norming.c_n
    samples = simulate_raw("dirichlet", shape, beta, n, replicates, seed, workers)
    t = np.array([s.t_n for s in samples])
    empirical = float(np.var(ratio * (t - 1.0), ddof=1))
    predicted = ratio**2 / norming.total_shape
    return empirical, predicted


@dataclass
class SuiteSpec:
    model: str
    shape: ShapeFamily
    n_grid: list
    beta: ShapeFamily = None
    grid: list = None
    replicates: int = None
    seed: int = None
    workers: int = 1
    track: str = None  # "exact" | "mc"; default exact for gamma, mc for Dirichlet
    k_max: int = 3
    tolerances: dict = field(default_factory=dict)


@dataclass
class ConvergenceReport:
    model: str
    shape: dict
    beta: dict
    track: str
    n_grid: list
    metric_per_n: list
    monotone_pass: bool
    final_pass: bool
    tolerances: dict
    limit: dict = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "model": self.model,
            "shape": self.shape,
            "beta": self.beta,
            "track": self.track,
            "limit": self.limit,
            "n_grid": self.n_grid,
            "metric_per_n": self.metric_per_n,
            "monotone_pass": self.monotone_pass,
            "final_pass": self.final_pass,
            "tolerances": self.tolerances,
            "notes": self.notes,
        }


def _headline(metric):
    if "sup_diff" in metric:
        return metric["sup_diff"]
    if "ks" in metric:
        return metric["ks"]
    if "moment" in metric:
        return max(abs(v) if isinstance(v, float) else math.inf for v in metric["moment"]["z"])
    return math.nan


def _ecdf_rows(values, law, grid):
    xs = np.sort(np.asarray(values, dtype=float))
    return [(float(x), float(np.searchsorted(xs, x, side="right") / xs.size), limits.cdf(law, x)) for x in grid]


def convergence_suite(spec, plot_rows=None):
    """Run the per-n checks of ``spec`` and summarize them.

    ``plot_rows``, when a dict, is filled with ``n -> [(x, ecdf, limit_cdf)]``.
    Per-n failures are recorded in the report instead of aborting the run.
    """
    if not spec.n_grid:
        raise UsageError("n_grid must not be empty")
    if spec.model not in ("gamma", "dirichlet"):
        raise UsageError(f"unknown model {spec.model!r}")
    if spec.model == "dirichlet" and spec.beta is None:
        raise UsageError("the Dirichlet model needs a beta family")
    tol = {**DEFAULT_TOLERANCES, **(spec.tolerances or {})}
    track = spec.track or ("exact" if spec.model == "gamma" else "mc")
    if spec.model == "dirichlet" and track != "mc":
        raise UsageError("the Dirichlet maximum has only a Monte Carlo track")
    if track == "mc" and (spec.seed is None or not spec.replicates):
        raise UsageError("Monte Carlo checks need a seed and replicates")
    metrics = []
    limit_dict = None
    for n in spec.n_grid:
        entry = {"n": n}
        try:
            if spec.model == "gamma":
                norming = gamma_norming(n, spec.shape)
            else:
                norming = dirichlet_norming(n, spec.shape, spec.beta)
            limit_dict = norming.limit.to_dict()
            if track == "exact":
                rows = exact_curve(spec.shape, n, spec.grid, norming)
                entry["sup_diff"] = max(abs(e - f) for _, e, f in rows)
            else:
                values = simulate_batch(
                    spec.model, spec.shape, spec.beta, n, spec.replicates, spec.seed, spec.workers, norming
                )
                if isinstance(norming.limit, HLaw):
                    entry["moment"] = moment_check(values, norming.limit, spec.k_max).to_dict()
                    rows = None
                else:
                    entry["ks"] = ks_statistic(values, norming.limit)
                    grid = default_grid(norming.limit) if spec.grid is None else spec.grid
                    rows = _ecdf_rows(values, norming.limit, grid)
            if plot_rows is not None and rows is not None:
                plot_rows[n] = rows
        except ExtremalGammaError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        metrics.append(entry)

    heads = [_headline(m) for m in metrics]
    failed = any("error" in m for m in metrics)
    slack = 1.0 + tol["monotone_slack"]
    monotone = not failed and all(b <= slack * a for a, b in zip(heads, heads[1:]))
    last = metrics[-1]
    if "error" in last:
        final = False
    elif "moment" in last:
        final = heads[-1] < tol["z_tol"]
    elif "ks" in last:
        final = heads[-1] < tol["ks_tol"]
    else:
        final = heads[-1] < tol["exact_tol"]
    return ConvergenceReport(
        model=spec.model,
        shape=spec.shape.to_dict(),
        beta=spec.beta.to_dict() if spec.beta is not None else None,
        track=track,
        n_grid=list(spec.n_grid),
        metric_per_n=metrics,
        monotone_pass=bool(monotone),
        final_pass=bool(final and not failed),
        tolerances=tol,
        limit=limit_dict,
        notes=["finite-n tolerances are artifact choices; the limit theorems carry no rates"],
    )
