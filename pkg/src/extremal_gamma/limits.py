"""Limit laws of normalized maxima: CDFs, left limits, quantiles and moments.

Five laws appear:

* ``Gumbel``: exp(-exp(-x)).
* ``FAlpha``: exp(-alpha * E1(x)) on x > 0, the limit of the raw row maximum
  when n * alpha_n -> alpha.
* ``HLaw``: the Dirichlet analogue, known only through its moments
  mu_k / gamma_k.
* ``Uniform01``.
* ``ULambda``: a mixture putting mass 1/(1+lambda) on Uniform(0, 1) and the
  rest on the point 1.
"""

import json
import math
from dataclasses import dataclass

from scipy import integrate as sp_integrate

from .errors import DomainError, UnsupportedOperation, UsageError
from .quadrature import integrate
from .special import EULER_GAMMA, exp_integral_e1, log_gamma

_BISECT_ITER = 200


@dataclass(frozen=True)
class Gumbel:
    name = "gumbel"

    def to_dict(self):
        return {"law": self.name}


@dataclass(frozen=True)
class FAlpha:
    alpha: float
    name = "falpha"

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"F_alpha needs alpha > 0, got {self.alpha!r}")

    def to_dict(self):
        return {"law": self.name, "alpha": self.alpha}


@dataclass(frozen=True)
class HLaw:
    alpha: float
    beta: float
    name = "h"

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"H needs alpha > 0, got {self.alpha!r}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise DomainError(f"H needs beta >= 0, got {self.beta!r}")

    def to_dict(self):
        return {"law": self.name, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class Uniform01:
    name = "uniform01"

    def to_dict(self):
        return {"law": self.name}


@dataclass(frozen=True)
class ULambda:
    lam: float
    name = "ulambda"

    def __post_init__(self):
        if math.isnan(self.lam) or self.lam < 0:
            raise DomainError(f"lambda must lie in [0, inf], got {self.lam!r}")

    @property
    def uniform_weight(self):
        """P(B_lambda = 1) = 1 / (1 + lambda); zero at lambda = inf."""
        return 0.0 if self.lam == math.inf else 1.0 / (1.0 + self.lam)

    def to_dict(self):
        return {"law": self.name, "lambda": "inf" if self.lam == math.inf else self.lam}


LimitLaw = Gumbel | FAlpha | HLaw | Uniform01 | ULambda


def _law_from_dict(obj):
    kind = obj.get("law")
    if kind == "gumbel":
        return Gumbel()
    if kind == "falpha":
        return FAlpha(float(obj["alpha"]))
    if kind == "h":
        return HLaw(float(obj["alpha"]), float(obj.get("beta", 0.0)))
    if kind == "uniform01":
        return Uniform01()
    if kind == "ulambda":
        lam = obj.get("lambda", 0.0)
        return ULambda(math.inf if lam in ("inf", math.inf) else float(lam))
    raise UsageError(f"unknown law {kind!r}")


def parse_law(text):
    """Parse ``gumbel``, ``falpha:A``, ``h:A,B``, ``uniform01``, ``ulambda:L|inf`` or JSON."""
    if isinstance(text, dict):
        try:
            return _law_from_dict(text)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed law object {text!r}") from exc
    text = str(text).strip()
    if text.startswith("{"):
        try:
            return parse_law(json.loads(text))
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed law JSON {text!r}") from exc
    kind, _, args = text.partition(":")
    values = [v for v in args.split(",") if v] if args else []
    try:
        if kind == "gumbel" and not values:
            return Gumbel()
        if kind == "uniform01" and not values:
            return Uniform01()
        if kind == "falpha" and len(values) == 1:
            return FAlpha(float(values[0]))
        if kind == "h" and len(values) in (1, 2):
            return HLaw(float(values[0]), float(values[1]) if len(values) == 2 else 0.0)
        if kind == "ulambda" and len(values) == 1:
            return ULambda(float(values[0]))
    except ValueError as exc:
        raise UsageError(f"non-numeric law parameter in {text!r}") from exc
    raise UsageError(f"cannot parse law {text!r}")


def _no_cdf(law):
    return UnsupportedOperation(
        f"{law.name} has no closed-form CDF; it is determined by its moments (use moment_h / `moments`)"
    )


def cdf(law, x):
    """Distribution function of ``law`` at ``x``."""
    if isinstance(law, Gumbel):
        if x < -7.0:
            return math.exp(-math.exp(-x)) if x > -709.0 else 0.0
        return math.exp(-math.exp(-x))
    if isinstance(law, FAlpha):
        if x <= 0:
            return 0.0
        return math.exp(-law.alpha * exp_integral_e1(x))
    if isinstance(law, Uniform01):
        return min(max(x, 0.0), 1.0)
    if isinstance(law, ULambda):
        if x < 0:
            return 0.0
        if x >= 1:
            return 1.0
        return law.uniform_weight * x
    raise _no_cdf(law)


def cdf_left(law, x):
    """Left limit F(x-); differs from :func:`cdf` only at the atom of ``ULambda`` at 1."""
    if isinstance(law, ULambda) and x == 1.0:
        return law.uniform_weight
    return cdf(law, x)


def quantile(law, p):
    """Smallest x with cdf(law, x) >= p, for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile needs p in (0, 1), got {p!r}")
    if isinstance(law, Gumbel):
        return -math.log(-math.log(p))
    if isinstance(law, Uniform01):
        return p
    if isinstance(law, ULambda):
        w = law.uniform_weight
        if w == 0.0:
            raise UnsupportedOperation("U_inf is a point mass at 1; quantile is not supported")
        return p / w if p < w else 1.0
    if isinstance(law, FAlpha):
        return _falpha_quantile(law, p)
    raise _no_cdf(law)


def _falpha_quantile(law, p):
    # Bisection on u = log x; cdf is continuous and strictly increasing on x > 0.
    lo, hi = -700.0, math.log(740.0)
    for _ in range(_BISECT_ITER):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if cdf(law, math.exp(mid)) < p:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


def _check_order(k):
    if int(k) != k or k < 1:
        raise DomainError(f"moment order must be an integer >= 1, got {k!r}")


def moment_falpha(alpha, k, abs_tol=1e-12):
    """k-th moment of F_alpha: alpha * int_0^inf x^(k-1) exp(-x - alpha E1(x)) dx.

    On (0, 1) the substitution x = e^t turns the x^(k-1+alpha) endpoint
    behaviour into an exponential decay in t.
    """
    FAlpha(alpha)
    _check_order(k)

    def lower(t):
        x = math.exp(t)
        return alpha * math.exp(k * t - x - alpha * exp_integral_e1(x))

    def upper(x):
        return alpha * math.exp((k - 1) * math.log(x) - x - alpha * exp_integral_e1(x))

    # E1(x) >= -gamma - ln x bounds the (0, e^t0) piece by alpha e^(alpha gamma) e^((k+alpha) t0) / (k+alpha).
    rate = k + alpha
    t0 = (math.log(1e-17 * rate / alpha) - alpha * EULER_GAMMA) / rate
    # The (X, inf) piece is below alpha * Gamma(k, X) <= alpha * X^(k-1) e^-X * k for X >> k.
    x_max = 2.0 * k + 40.0
    while alpha * k * math.exp((k - 1) * math.log(x_max) - x_max) > 1e-17:
        x_max *= 1.5
    v1, _ = integrate(lower, t0, 0.0, abs_tol=abs_tol, rel_tol=1e-13, points=(t0 / 2, t0 / 8))
    v2, _ = integrate(upper, 1.0, x_max, abs_tol=abs_tol, rel_tol=1e-13, points=(k + 0.0, 2.0 * k + 5.0))
    return v1 + v2


def moment_falpha_tail(alpha, k):
    """k-th moment of F_alpha from the tail form int_0^inf k x^(k-1) (1 - F_alpha(x)) dx.

    Independent of :func:`moment_falpha`: different integrand and a different
    integrator (QUADPACK through scipy).
    """
    FAlpha(alpha)
    _check_order(k)

    def tail(x):
        return k * x ** (k - 1) * -math.expm1(-alpha * exp_integral_e1(x))

    head, _ = sp_integrate.quad(tail, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    rest, _ = sp_integrate.quad(tail, 1.0, math.inf, epsabs=1e-13, epsrel=1e-13, limit=200)
    return head + rest


def gamma_moment(shape, k):
    """E[W^k] for W ~ Gamma(shape, 1): Gamma(shape + k) / Gamma(shape)."""
    return math.exp(log_gamma(shape + k) - log_gamma(shape))


def moment_h(alpha, beta, k):
    """k-th moment of H(alpha, beta) = mu_k / gamma_k."""
    HLaw(alpha, beta)
    return moment_falpha(alpha, k) / gamma_moment(alpha + beta, k)


def moment_ulambda(lam, k):
    """k-th moment of U_lambda: lambda/(1+lambda) + 1/((1+lambda)(1+k))."""
    _check_order(k)
    w = ULambda(lam).uniform_weight
    return (1.0 - w) + w / (1.0 + k)


def moment(law, k):
    """k-th raw moment of a law supported in [0, 1] or of F_alpha."""
    if isinstance(law, HLaw):
        return moment_h(law.alpha, law.beta, k)
    if isinstance(law, ULambda):
        return moment_ulambda(law.lam, k)
    if isinstance(law, Uniform01):
        return moment_ulambda(0.0, k)
    if isinstance(law, FAlpha):
        return moment_falpha(law.alpha, k)
    raise UnsupportedOperation(f"moments of {law.name} are not provided")
