"""Centering and scaling constants for gamma row maxima and Dirichlet maxima.

The three implicit constants (b_n, zeta_n / alpha_n and xi_n / log n) are
found by plain bisection on brackets that come from the convergence proofs,
so every solve either converges or fails loudly with a regime diagnosis.
"""

import math
from dataclasses import dataclass, field

from .errors import DomainError, RegimeError
from .family import (
    DirichletBranch,
    RegimeTag,
    ShapeFamily,
    alpha_at,
    classify,
    classify_dirichlet,
)
from .limits import FAlpha, Gumbel, HLaw, ULambda, Uniform01
from .special import log_gamma, t_minus_log1p

MAX_BISECT = 200
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Transform:
    """How a raw maximum becomes the normalized statistic.

    ``linear``: (V - d_n) / c_n; ``identity``: the raw maximum itself;
    ``power``: M ** exponent; ``power_scaled``: (sigma * M) ** exponent.
    """

    kind: str
    exponent: float = 1.0
    sigma: float = 1.0

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind in ("power", "power_scaled"):
            out["exponent"] = self.exponent
        if self.kind == "power_scaled":
            out["sigma"] = self.sigma
        return out


LINEAR = Transform("linear")
IDENTITY = Transform("identity")


@dataclass
class SolverDiag:
    root_name: str = "none"
    root: float = math.nan
    residual: float = 0.0
    iterations: int = 0
    bracket: tuple = (math.nan, math.nan)
    aux: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "root_name": self.root_name,
            "root": _real(self.root),
            "residual": self.residual,
            "iterations": self.iterations,
            "bracket": [_real(v) for v in self.bracket],
            "aux": {k: _real(v) for k, v in self.aux.items()},
            "warnings": list(self.warnings),
        }


def _real(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


@dataclass
class NormingConstants:
    c_n: float
    d_n: float
    transform: Transform
    limit: object
    diag: SolverDiag
    model: str = "gamma"
    n: int = 0
    alpha_n: float = math.nan
    beta_n: float = math.nan
    regime: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def total_shape(self):
        """n * alpha_n + beta_n, the shape of the Dirichlet normalizing sum."""
        return self.n * self.alpha_n + self.beta_n

    def to_dict(self):
        out = {
            "c_n": self.c_n,
            "d_n": self.d_n,
            "transform": self.transform.to_dict(),
            "limit": self.limit.to_dict(),
            "diag": self.diag.to_dict(),
            "model": self.model,
            "n": self.n,
            "alpha_n": self.alpha_n,
            "regime": self.regime,
        }
        if self.model == "dirichlet":
            out["beta_n"] = self.beta_n
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def bisect(f, lo, hi, max_iter=MAX_BISECT):
    """Root of ``f`` in ``[lo, hi]`` by bisection, run until the bracket stops shrinking.

    Returns ``(root, f(root), iterations)`` where root is the endpoint of the
    final bracket with the smaller ``|f|``.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo, f_lo, 0
    if f_hi == 0.0:
        return hi, f_hi, 0
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})")
    it = 0
    while it < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        it += 1
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid, f_mid, it
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    if abs(f_lo) <= abs(f_hi):
        return lo, f_lo, it
    return hi, f_hi, it


def _check_n(n):
    if int(n) != n or n < 3:
        raise DomainError(f"norming constants need integer n >= 3, got {n!r}")


def bn_equation(z, n, alpha_n):
    """Left side minus log n of  log z + log(2 pi)/2 + z sqrt(a) - a log(1 + z/sqrt(a)) = log n."""
    root_a = math.sqrt(alpha_n)
    # z sqrt(a) - a log(1 + z/sqrt(a)) = a (t - log1p t) with t = z / sqrt(a).
    return math.log(z) + _LOG_SQRT_2PI + alpha_n * t_minus_log1p(z / root_a) - math.log(n)


def solve_bn(n, alpha_n):
    """b_n for the alpha_n / log n -> inf regime, near sqrt(2 log n)."""
    _check_n(n)
    if not alpha_n > 0:
        raise DomainError(f"alpha_n must be > 0, got {alpha_n!r}")
    scale = math.sqrt(2.0 * math.log(n))
    lo, hi = 0.3 * scale, 3.0 * scale

    def f(z):
        return bn_equation(z, n, alpha_n)

    expansions = 0
    while (f(lo) > 0) == (f(hi) > 0):
        if expansions == 2:
            raise RegimeError(
                "b_n equation has no sign change near sqrt(2 log n); alpha_n is not in the alpha_n/log n -> inf regime",
                {"n": n, "alpha_n": alpha_n, "bracket": (lo, hi), "f_lo": f(lo), "f_hi": f(hi)},
            )
        lo, hi = lo / 3.0, hi * 3.0
        expansions += 1
    root, res, it = bisect(f, lo, hi)
    diag = SolverDiag("b_n", root, res, it, (lo, hi), {"sqrt_2_log_n": scale, "expansions": expansions})
    return diag


def zetan_equation(z, n, alpha_n):
    """RHS - z for  z = 1 + log n/a - (log sqrt(2 pi) + log(a)/2)/a + (1 - 1/a) log z."""
    a = alpha_n
    return 1.0 + math.log(n) / a - (_LOG_SQRT_2PI + 0.5 * math.log(a)) / a + (1.0 - 1.0 / a) * math.log(z) - z


def solve_zetan(n, alpha_n):
    """Root z = zeta_n / alpha_n > 1 for the alpha_n ~ log n regime; zeta_n is in ``aux``."""
    _check_n(n)
    if not alpha_n > 0:
        raise DomainError(f"alpha_n must be > 0, got {alpha_n!r}")
    warnings = []
    ratio = math.log(n) / alpha_n
    if alpha_n < 2.0:
        warnings.append(f"alpha_n = {alpha_n:.6g} < 2: outside the alpha_n -> inf regime")
    if not 0.01 < ratio < 100.0:
        warnings.append(f"log n / alpha_n = {ratio:.6g} outside (0.01, 100)")

    def g(z):
        return zetan_equation(z, n, alpha_n)

    lo = 1.0 + 1e-8
    if g(lo) <= 0:
        raise RegimeError(
            "zeta_n equation has no root above 1 at this n",
            {"n": n, "alpha_n": alpha_n, "g_at_1": g(lo), "warnings": warnings},
        )
    hi = 2.0
    while g(hi) >= 0:
        hi *= 2.0
    root, res, it = bisect(g, lo, hi)
    diag = SolverDiag("zeta_n", root, res, it, (lo, hi), {"zeta_n": root * alpha_n}, warnings)
    return diag


def xin_epsilon(n, alpha_n):
    """epsilon_n and m_n of the xi_n equation, written e^(m z) = 1 + epsilon + z."""
    log_n = math.log(n)
    r = alpha_n / log_n
    eps = (alpha_n - math.log(log_n)) / log_n + 0.5 * math.log(alpha_n) / log_n - r * math.log(r)
    m = log_n / (alpha_n - 1.0) if alpha_n != 1.0 else math.inf
    return eps, m


def xin_equation(z, n, alpha_n):
    """RHS - z for  z = ((a - 1)/log n) log(1 + epsilon_n + z)."""
    eps, _ = xin_epsilon(n, alpha_n)
    return (alpha_n - 1.0) / math.log(n) * math.log1p(eps + z) - z


def solve_xin(n, alpha_n):
    """Root z = xi_n / log n > 0 for alpha_n -> inf, alpha_n = o(log n); xi_n is in ``aux``."""
    _check_n(n)
    if not alpha_n > 1.0:
        raise DomainError(f"xi_n needs alpha_n > 1, got {alpha_n!r}")
    eps, m = xin_epsilon(n, alpha_n)
    diagnostics = {"n": n, "alpha_n": alpha_n, "epsilon_n": eps, "m_n": m}
    if eps <= 0:
        raise RegimeError("epsilon_n <= 0: n is too small for the alpha_n = o(log n) asymptotics", diagnostics)
    if m <= 1.0:
        raise RegimeError("m_n = log n / (alpha_n - 1) <= 1: alpha_n is not o(log n) at this n", diagnostics)
    log_n = math.log(n)
    hi = eps / (m - 1.0)

    def h(z):
        return (alpha_n - 1.0) / log_n * math.log1p(eps + z) - z

    root, res, it = bisect(h, 0.0, hi)
    aux = {"epsilon_n": eps, "m_n": m, "upper_bound": hi, "xi_n": root * log_n}
    return SolverDiag("xi_n", root, res, it, (0.0, hi), aux)


def gamma_norming(n, family):
    """(c_n, d_n), transform and limit law for the maximum of n iid Gamma(alpha_n, 1)."""
    _check_n(n)
    regime = classify(family)
    a = alpha_at(family, n)
    log_n = math.log(n)
    tag = regime.tag
    diag = SolverDiag()
    transform = LINEAR
    limit = Gumbel()
    if tag is RegimeTag.RAPID_GROWTH:
        diag = solve_bn(n, a)
        c_n = math.sqrt(a / (2.0 * log_n))
        d_n = a + diag.root * math.sqrt(a)
        diag.aux["d_n_corollary_form"] = a - diag.root * math.sqrt(a)
    elif tag is RegimeTag.LOG_COMPARABLE:
        diag = solve_zetan(n, a)
        zeta = diag.aux["zeta_n"]
        one_minus = 1.0 - a / zeta
        c_n = 1.0 / one_minus
        d_n = zeta - c_n * math.log(one_minus)
        diag.aux["d_n_corollary_form"] = zeta - one_minus * math.log(one_minus)
    elif tag is RegimeTag.SLOW_GROWTH:
        diag = solve_xin(n, a)
        c_n = 1.0
        d_n = log_n + (a - 1.0) * math.log(log_n) - log_gamma(a) + diag.aux["xi_n"]
    elif tag is RegimeTag.BOUNDED_SHAPE:
        c_n = 1.0
        d_n = log_n + (a - 1.0) * math.log(log_n) - log_gamma(a)
    elif tag is RegimeTag.POLY_DECAY:
        na = n * a
        if na <= math.e:
            raise RegimeError(
                "n * alpha_n <= e: log log(n alpha_n) is not positive at this n", {"n": n, "n_alpha_n": na}
            )
        c_n = 1.0
        d_n = math.log(na) + (a - 1.0) * math.log(math.log(na))
    elif tag is RegimeTag.STABLE_PRODUCT:
        c_n, d_n = 1.0, 0.0
        limit = FAlpha(regime.limit_params["alpha"])
    else:
        c_n, d_n = 1.0, 0.0
        transform = Transform("power", exponent=n * a)
        limit = Uniform01()
    return NormingConstants(
        c_n, d_n, transform, limit, diag, model="gamma", n=n, alpha_n=a, regime=regime.to_dict()
    )


def dirichlet_norming(n, shape, beta):
    """Constants for the maximum coordinate of Dirichlet(alpha_n, ..., alpha_n; beta_n)."""
    _check_n(n)
    if not isinstance(beta, ShapeFamily):
        raise DomainError("the Dirichlet model needs a beta family")
    dreg = classify_dirichlet(shape, beta)
    a = alpha_at(shape, n)
    b = alpha_at(beta, n)
    notes = []
    if dreg.branch is DirichletBranch.GUMBEL:
        g = gamma_norming(n, shape)
        c_n, d_n, transform, limit, diag = g.c_n, g.d_n, LINEAR, g.limit, g.diag
    elif dreg.branch is DirichletBranch.FALPHA:
        c_n = b / (n * a + b)
        d_n = 0.0
        transform, limit, diag = LINEAR, FAlpha(dreg.product_limit), SolverDiag()
        notes.append("simplifies to beta_n * M -> F_alpha")
    elif dreg.branch is DirichletBranch.H_LAW:
        c_n, d_n = 1.0, 0.0
        transform, limit, diag = IDENTITY, HLaw(dreg.product_limit, dreg.beta_limit), SolverDiag()
    else:
        sigma = b if dreg.beta_limit == math.inf else 1.0
        c_n, d_n = 1.0, 0.0
        transform = Transform("power_scaled", exponent=n * a, sigma=sigma)
        limit, diag = ULambda(dreg.lam), SolverDiag()
    return NormingConstants(
        c_n,
        d_n,
        transform,
        limit,
        diag,
        model="dirichlet",
        n=n,
        alpha_n=a,
        beta_n=b,
        regime=dreg.to_dict(),
        notes=notes,
    )
