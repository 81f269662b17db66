"""Log-domain gamma and Dirichlet-maximum sampling with per-replicate streams.

Every replicate ``r`` of a batch draws from its own Philox stream keyed by
``(seed, r)``, so results do not depend on how replicates are spread over
workers. Gamma variates are carried as logarithms because shapes like
alpha_n = n**-2 put essentially all of the mass below the smallest double.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, ResourceError, UsageError
from .family import ShapeFamily, alpha_at
from .norming import NormingConstants, dirichlet_norming, gamma_norming

BUDGET_ENV = "EXTREMAL_GAMMA_BUDGET"
DEFAULT_BUDGET = 10**9
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream identified by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if int(value) != value or not 0 <= value <= _MASK64:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def generator(self):
        """A fresh numpy Generator positioned at the start of this stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class LogSample:
    log_value: float


@dataclass(frozen=True)
class DirichletMaxSample:
    log_max: float  # log of the largest coordinate
    log_sum: float  # log S_n, S_n = sum of the n gammas plus the remainder gamma
    t_n: float  # S_n / (n alpha_n + beta_n); underflows to 0 only when the total shape is tiny
    log_t_n: float = math.nan


def _as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def sample_gamma_log(a, rng, size=None):
    """Logarithms of Gamma(a, 1) variates.

    For ``a >= 1`` numpy's Marsaglia-Tsang sampler is used and the log
    taken afterwards. For ``a < 1`` the draw is
    ``log G + log(U) / a`` with G ~ Gamma(a + 1) and U ~ Uniform(0, 1], which
    has the exact Gamma(a) law and never leaves the log scale.

    Returns a float when ``size`` is None, otherwise an ndarray.
    """
    if not (math.isfinite(a) and a > 0):
        raise DomainError(f"gamma shape must be > 0, got {a!r}")
    gen = _as_generator(rng)
    if a >= 1.0:
        out = np.log(gen.standard_gamma(a, size=size))
    else:
        boost = np.log(gen.standard_gamma(a + 1.0, size=size))
        u = 1.0 - gen.random(size=size)  # (0, 1]
        out = boost + np.log(u) / a
    return float(out) if size is None else out


def sample_row_max_log(n, alpha_n, rng):
    """log M_n for the maximum of ``n`` iid Gamma(alpha_n, 1) variates."""
    if n < 1:
        raise DomainError(f"row length must be >= 1, got {n!r}")
    logs = sample_gamma_log(alpha_n, rng, size=int(n))
    return LogSample(float(np.max(logs)))


def dirichlet_logs(n, alpha_n, beta_n, rng):
    """Log gamma draws for one Dirichlet vector: ``(n shape-alpha logs, remainder log)``."""
    gen = _as_generator(rng)
    logs = sample_gamma_log(alpha_n, gen, size=int(n))
    log_z = sample_gamma_log(beta_n, gen)
    return logs, log_z


def sample_dirichlet_max(n, alpha_n, beta_n, rng):
    """Maximum coordinate of Dirichlet(alpha_n, ..., alpha_n; beta_n) via the gamma representation."""
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n!r}")
    if not beta_n > 0:
        raise DomainError(f"beta_n must be > 0, got {beta_n!r}")
    logs, log_z = dirichlet_logs(n, alpha_n, beta_n, rng)
    log_sum = float(logsumexp(np.append(logs, log_z)))
    log_max = min(float(np.max(logs)) - log_sum, 0.0)
    log_t_n = log_sum - math.log(n * alpha_n + beta_n)
    return DirichletMaxSample(log_max, log_sum, math.exp(log_t_n), log_t_n)


def normalized_statistic(sample, norming, n=None, model=None):
    """Apply the norming transform to one sampled maximum."""
    model = model or norming.model
    n = norming.n if n is None else n
    kind = norming.transform.kind
    if model == "gamma":
        if not isinstance(sample, LogSample):
            raise UsageError("gamma model needs a LogSample")
        log_v = sample.log_value
        if kind == "power_scaled":
            raise UsageError("power_scaled transform applies to the Dirichlet model only")
    elif model == "dirichlet":
        if not isinstance(sample, DirichletMaxSample):
            raise UsageError("Dirichlet model needs a DirichletMaxSample")
        log_v = sample.log_max
        if kind == "power":
            raise UsageError("Dirichlet power transforms are power_scaled")
    else:
        raise UsageError(f"unknown model {model!r}")
    if kind == "identity":
        return math.exp(log_v)
    if kind == "linear":
        if model == "dirichlet":
            total = n * norming.alpha_n + norming.beta_n
            value = total * math.exp(log_v)
        else:
            value = math.exp(log_v)
        return (value - norming.d_n) / norming.c_n
    if kind == "power":
        return math.exp(norming.transform.exponent * log_v)
    if kind == "power_scaled":
        return math.exp(norming.transform.exponent * (math.log(norming.transform.sigma) + log_v))
    raise UsageError(f"unknown transform {kind!r}")


def budget():
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(float(raw))
    except ValueError as exc:
        raise UsageError(f"{BUDGET_ENV} must be a number, got {raw!r}") from exc


def check_budget(n, replicates):
    limit = budget()
    if replicates * n > limit:
        raise ResourceError(f"R * n = {replicates * n} exceeds the budget {limit} (set {BUDGET_ENV})")


def _norming_for(model, shape, beta, n):
    if model == "gamma":
        return gamma_norming(n, shape)
    if model == "dirichlet":
        if beta is None:
            raise UsageError("the Dirichlet model needs a beta family")
        return dirichlet_norming(n, shape, beta)
    raise UsageError(f"unknown model {model!r}")


def _draw(model, n, alpha_n, beta_n, seed, r):
    stream = RngStream(seed, r)
    if model == "gamma":
        return sample_row_max_log(n, alpha_n, stream)
    return sample_dirichlet_max(n, alpha_n, beta_n, stream)


def _run(fn, count, workers):
    if workers == 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count), chunksize=max(1, count // (4 * workers))))


def simulate_raw(model, shape, beta, n, replicates, seed, workers=1):
    """Raw samples (LogSample or DirichletMaxSample) for replicates 0..R-1, in order."""
    if replicates < 1:
        raise UsageError(f"replicates must be >= 1, got {replicates!r}")
    if workers < 1:
        raise UsageError(f"workers must be >= 1, got {workers!r}")
    check_budget(n, replicates)
    a = alpha_at(shape, n)
    b = alpha_at(beta, n) if beta is not None else math.nan
    if model == "dirichlet" and beta is None:
        raise UsageError("the Dirichlet model needs a beta family")
    return _run(lambda r: _draw(model, n, a, b, seed, r), replicates, workers)


def simulate_batch(model, shape, beta, n, replicates, seed, workers=1, norming=None):
    """Normalized maxima for replicates 0..R-1; identical for every ``workers`` value."""
    if not isinstance(shape, ShapeFamily):
        raise UsageError("shape must be a ShapeFamily")
    if replicates < 1:
        raise UsageError(f"replicates must be >= 1, got {replicates!r}")
    if norming is None:
        norming = _norming_for(model, shape, beta, n)
    elif not isinstance(norming, NormingConstants):
        raise UsageError("norming must be NormingConstants")
    samples = simulate_raw(model, shape, beta, n, replicates, seed, workers)
    return np.array([normalized_statistic(s, norming, n, model) for s in samples])


def write_batch_csv(stream, values):
    """CSV with header ``replicate,statistic``, one row per replicate in order."""
    stream.write("replicate,statistic\n")
    for r, v in enumerate(values):
        stream.write(f"{r},{float(v):.17g}\n")
