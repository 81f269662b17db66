"""Scalar special functions: log-gamma, regularized incomplete gamma, E1.

Everything here works on Python floats. The incomplete gamma routines are
written so that shapes as small as 1e-12 and arguments whose powers underflow
(x**a with x = exp(-1e6)) still produce accurate logarithms.
"""

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

EULER_GAMMA = 0.57721566490153286061
"""Euler-Mascheroni constant (20 significant digits)."""

TOL = 1e-12
MAX_ITER = 500
_FPMIN = 1e-300
_SMALL_SHAPE = 0.1
_LOG_UNDERFLOW = -745.0


@dataclass(frozen=True)
class SpecialEval:
    """A special-function value together with its logarithm.

    ``log_value`` stays meaningful when ``value`` underflows to zero.
    """

    value: float
    log_value: float
    abs_err_est: float = 0.0


def _check_shape(a):
    if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 0):
        raise DomainError(f"shape must be a positive finite real, got {a!r}")


def _check_arg(x):
    if not (math.isfinite(x) and x >= 0):
        raise DomainError(f"argument must be a finite real >= 0, got {x!r}")


def _iteration_cap(a):
    # Series and continued fraction both need O(sqrt(a)) terms near x ~ a.
    return MAX_ITER + int(20.0 * math.sqrt(a))


def log_gamma(a):
    """Natural log of the gamma function for ``a > 0``."""
    if not (math.isfinite(a) and a > 0):
        raise DomainError(f"log_gamma needs a > 0, got {a!r}")
    return math.lgamma(a)


def t_minus_log1p(t):
    """t - log(1 + t) without cancellation near t = 0."""
    if t <= -1.0:
        raise DomainError(f"t - log1p(t) needs t > -1, got {t!r}")
    if abs(t) >= 0.1:
        return t - math.log1p(t)
    total = 0.0
    power = -t
    for k in range(2, 40):
        power *= -t
        contrib = power / k
        total += contrib
        if abs(contrib) < 1e-17 * abs(total):
            break
    return total


def _stirling_correction(a):
    """lgamma(a + 1) - (a ln a - a + ln(2 pi a) / 2), for a >= 10."""
    r = 1.0 / a
    r2 = r * r
    return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 * (1.0 / 1680 - r2 / 1188))))


def _log_prefactor(a, x, log_x):
    """ln(x^a e^-x / Gamma(a+1)).

    For large shapes the three terms are each ~a ln a and cancel; the
    Stirling rearrangement -a (t - log1p t) - ln(2 pi a)/2 - correction with
    t = (x - a)/a keeps the result accurate.
    """
    t = (x - a) / a
    if a < 10.0 or t < -0.5:
        return a * log_x - x - math.lgamma(a + 1.0)
    return -a * t_minus_log1p(t) - 0.5 * math.log(2.0 * math.pi * a) - _stirling_correction(a)


def _log_p_series(a, x, log_x):
    """ln P(a, x) from the power series x^a e^-x / Gamma(a+1) * sum x^k / (a+1)...(a+k)."""
    term = 1.0
    total = 1.0
    ap = a
    for _ in range(_iteration_cap(a)):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * 1e-17:
            return _log_prefactor(a, x, log_x) + math.log(total)
    raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _log_q_contfrac(a, x):
    """ln Q(a, x) from the Legendre continued fraction (modified Lentz), x > a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _iteration_cap(a) + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return _log_prefactor(a, x, math.log(x)) + math.log(a) + math.log(h)
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def _q_small_shape(a, x):
    """Q(a, x) for a < 0.1 and x <= 1.5 without forming 1 - P.

    Uses Q = (1 - x^a/Gamma(a+1)) + x^a/Gamma(a+1) * a * sum_{k>=1} (-1)^(k+1) x^k / (k! (a+k)),
    which keeps full relative accuracy when Q ~ a * E1(x) is tiny.
    """
    t = a * math.log(x) - math.lgamma(a + 1.0)
    head = -math.expm1(t)
    total = 0.0
    term = 1.0
    for k in range(1, MAX_ITER + 1):
        term *= -x / k
        contrib = -term / (a + k)
        total += contrib
        if abs(contrib) < 1e-17 * abs(total):
            break
    else:
        raise ConvergenceError(f"small-shape incomplete gamma series did not converge (a={a}, x={x})")
    return head + math.exp(t) * a * total


def _use_small_shape(a, x):
    return a < _SMALL_SHAPE and x <= 1.5


def reg_gamma_q_eval(a, x):
    """Upper regularized incomplete gamma as a :class:`SpecialEval`."""
    _check_shape(a)
    _check_arg(x)
    if x == 0.0:
        return SpecialEval(1.0, 0.0, 0.0)
    if _use_small_shape(a, x):
        q = _q_small_shape(a, x)
        return SpecialEval(q, math.log(q) if q > 0 else -math.inf, 4e-16)
    if x < a + 1.0:
        log_p = _log_p_series(a, x, math.log(x))
        q = -math.expm1(log_p)
        return SpecialEval(q, math.log(q) if q > 0 else -math.inf, 1e-15)
    log_q = _log_q_contfrac(a, x)
    q = math.exp(log_q)
    return SpecialEval(q, log_q, 1e-15 * q)


def reg_gamma_q(a, x):
    """Q(a, x) = Gamma(a, x) / Gamma(a), the tail P[Y > x] of Gamma(a, 1)."""
    return reg_gamma_q_eval(a, x).value


def reg_gamma_p(a, x):
    """P(a, x) = 1 - Q(a, x), the CDF of Gamma(a, 1) at x."""
    _check_shape(a)
    _check_arg(x)
    if x == 0.0:
        return 0.0
    if _use_small_shape(a, x) or x >= a + 1.0:
        return 1.0 - reg_gamma_q(a, x)
    return math.exp(_log_p_series(a, x, math.log(x)))


def log_reg_gamma_p(a, x):
    """ln P(a, x), accurate in the log even when P underflows.

    Returns ``-math.inf`` at ``x == 0``; callers raising to a power ``n`` can
    use ``exp(n * log_reg_gamma_p(a, x))`` without intermediate underflow.
    """
    _check_shape(a)
    _check_arg(x)
    if x == 0.0:
        return -math.inf
    return _log_p(a, x, math.log(x))


def log_reg_gamma_p_logx(a, log_x):
    """ln P(a, exp(log_x)) for arguments given on the log scale.

    Needed when x = x0 ** (1 / (n * alpha_n)) underflows as a float.
    """
    _check_shape(a)
    if math.isnan(log_x) or log_x == math.inf:
        raise DomainError(f"log_x must be finite or -inf, got {log_x!r}")
    if log_x == -math.inf:
        return -math.inf
    if log_x < _LOG_UNDERFLOW:
        # x and every series correction are below the smallest subnormal.
        return a * log_x - math.lgamma(a + 1.0)
    return _log_p(a, math.exp(log_x), log_x)


def _log_p(a, x, log_x):
    if x == 0.0:
        return a * log_x - math.lgamma(a + 1.0)
    if _use_small_shape(a, x) or x >= a + 1.0:
        q = reg_gamma_q_eval(a, x).value
        if q < 0.5:
            return math.log1p(-q)
    return _log_p_series(a, x, log_x)


def exp_integral_e1(x):
    """Exponential integral E1(x) = int_x^inf e^-u / u du for x > 0."""
    if not (isinstance(x, (int, float)) and x > 0 and not math.isnan(x)):
        raise DomainError(f"E1 needs x > 0, got {x!r}")
    if x == math.inf:
        return 0.0
    if x <= 1.0:
        total = 0.0
        term = 1.0
        for k in range(1, MAX_ITER + 1):
            term *= -x / k
            contrib = -term / k
            total += contrib
            if abs(contrib) < 1e-17 * abs(total):
                return -EULER_GAMMA - math.log(x) + total
        raise ConvergenceError(f"E1 series did not converge at x={x}")
    if x > 745.0:
        return 0.0
    # e^-x / (x+1 - 1/(x+3 - 4/(x+5 - ...)))
    b = x + 1.0
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER + 1):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-x)
    raise ConvergenceError(f"E1 continued fraction did not converge at x={x}")
