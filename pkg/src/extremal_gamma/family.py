"""Closed-form shape sequences alpha_n = c * n**p * (log n)**q and their regimes."""

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import DomainError, UsageError


class RegimeTag(str, Enum):
    RAPID_GROWTH = "RapidGrowth"  # alpha_n / log n -> inf
    LOG_COMPARABLE = "LogComparable"  # alpha_n / log n -> ratio in (0, inf)
    SLOW_GROWTH = "SlowGrowth"  # alpha_n -> inf, alpha_n = o(log n)
    BOUNDED_SHAPE = "BoundedShape"  # alpha_n bounded, log alpha_n = o(log n)
    POLY_DECAY = "PolyDecay"  # n alpha_n -> inf, log alpha_n / log n bounded away from 0
    STABLE_PRODUCT = "StableProduct"  # n alpha_n -> alpha in (0, inf)
    VANISHING_PRODUCT = "VanishingProduct"  # n alpha_n -> 0


GUMBEL_REGIMES = frozenset(
    {
        RegimeTag.RAPID_GROWTH,
        RegimeTag.LOG_COMPARABLE,
        RegimeTag.SLOW_GROWTH,
        RegimeTag.BOUNDED_SHAPE,
        RegimeTag.POLY_DECAY,
    }
)


@dataclass(frozen=True)
class ShapeFamily:
    """The sequence ``c * n**p * (log n)**q`` for integer ``n >= 2``."""

    c: float
    p: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        for name in ("c", "p", "q"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"family parameter {name} must be finite, got {value!r}")
        if self.c <= 0:
            raise DomainError(f"family prefactor c must be > 0, got {self.c!r}")
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))

    def alpha_at(self, n):
        return alpha_at(self, n)

    def log_alpha_at(self, n):
        _check_n(n)
        return math.log(self.c) + self.p * math.log(n) + self.q * math.log(math.log(n))

    def to_string(self):
        return f"{_fmt(self.c)}*n^{_fmt(self.p)}*logn^{_fmt(self.q)}"

    def to_dict(self):
        return {"c": self.c, "p": self.p, "q": self.q}

    def __str__(self):
        return self.to_string()


def _fmt(v):
    return repr(float(v)) if v != int(v) else str(int(v))


def _check_n(n):
    if n < 2:
        raise DomainError(f"n must be >= 2 (log log n undefined below), got {n!r}")


def alpha_at(family, n):
    """Evaluate the family at row index ``n`` via exp(ln c + p ln n + q ln ln n)."""
    return math.exp(family.log_alpha_at(n))


_STRING_FORM = re.compile(
    r"^\s*(?P<c>[-+0-9.eE]+)\s*\*\s*n\s*\^\s*(?P<p>[-+0-9.eE]+)\s*\*\s*logn\s*\^\s*(?P<q>[-+0-9.eE]+)\s*$"
)


def parse_family(text):
    """Parse ``"c,p,q"``, ``"c*n^p*logn^q"`` or a JSON object ``{"c":..,"p":..,"q":..}``."""
    if isinstance(text, ShapeFamily):
        return text
    if isinstance(text, dict):
        obj = text
    else:
        text = str(text).strip()
        if text.startswith("{"):
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise UsageError(f"malformed family JSON: {text!r}") from exc
        else:
            m = _STRING_FORM.match(text)
            parts = [m["c"], m["p"], m["q"]] if m else text.split(",")
            if len(parts) != 3:
                raise UsageError(f"family must be 'c,p,q' or 'c*n^p*logn^q', got {text!r}")
            try:
                obj = dict(zip("cpq", (float(v) for v in parts)))
            except ValueError as exc:
                raise UsageError(f"non-numeric family component in {text!r}") from exc
    try:
        return ShapeFamily(float(obj["c"]), float(obj.get("p", 0.0)), float(obj.get("q", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"family object needs numeric c, p, q: {obj!r}") from exc


def _limit(c, p, q):
    """Limit of c * n**p * (log n)**q as n -> inf: 0.0, c, or math.inf."""
    if p > 0 or (p == 0 and q > 0):
        return math.inf
    if p == 0 and q == 0:
        return c
    return 0.0


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    limit_params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"tag": self.tag.value, **self.limit_params}


def classify(family):
    """Decide which limit theorem governs ``family`` from its exponents alone."""
    c, p, q = family.c, family.p, family.q
    if p > 0 or (p == 0 and q > 1):
        return Regime(RegimeTag.RAPID_GROWTH)
    if p == 0 and q == 1:
        return Regime(RegimeTag.LOG_COMPARABLE, {"ratio": c})
    if p == 0 and 0 < q < 1:
        return Regime(RegimeTag.SLOW_GROWTH)
    if p == 0:
        return Regime(RegimeTag.BOUNDED_SHAPE)
    if -1 < p < 0 or (p == -1 and q > 0):
        return Regime(RegimeTag.POLY_DECAY)
    if p == -1 and q == 0:
        return Regime(RegimeTag.STABLE_PRODUCT, {"alpha": c})
    return Regime(RegimeTag.VANISHING_PRODUCT)


class DirichletBranch(str, Enum):
    GUMBEL = "gumbel"  # n alpha_n -> inf, total diverges
    FALPHA = "falpha"  # n alpha_n -> alpha, beta_n -> inf
    H_LAW = "h"  # n alpha_n -> alpha, beta_n -> beta < inf
    ULAMBDA = "ulambda"  # n alpha_n -> 0


@dataclass(frozen=True)
class DirichletRegime:
    gamma_regime: Regime
    total_growth: str  # "Diverges" | "Bounded"
    lam: float  # lim n alpha_n / beta_n, may be math.inf
    beta_limit: float  # may be math.inf
    branch: DirichletBranch
    product_limit: float  # lim n alpha_n, may be math.inf

    def to_dict(self):
        return {
            "gamma_regime": self.gamma_regime.to_dict(),
            "total_growth": self.total_growth,
            "lambda": _json_real(self.lam),
            "beta_limit": _json_real(self.beta_limit),
            "branch": self.branch.value,
            "product_limit": _json_real(self.product_limit),
        }


def _json_real(v):
    return "inf" if v == math.inf else v


def classify_dirichlet(shape, beta):
    """Branch for the maximum of Dirichlet(alpha_n, ..., alpha_n; beta_n)."""
    regime = classify(shape)
    product = _limit(shape.c, shape.p + 1.0, shape.q)
    beta_lim = _limit(beta.c, beta.p, beta.q)
    lam = _limit(shape.c / beta.c, shape.p + 1.0 - beta.p, shape.q - beta.q)
    diverges = product == math.inf or beta_lim == math.inf
    total = "Diverges" if diverges else "Bounded"
    if product == math.inf:
        branch = DirichletBranch.GUMBEL
    elif product > 0:
        branch = DirichletBranch.FALPHA if beta_lim == math.inf else DirichletBranch.H_LAW
    else:
        branch = DirichletBranch.ULAMBDA
    return DirichletRegime(regime, total, lam, beta_lim, branch, product)
