"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in the terminal summary) and then
asserts the same condition. Tolerances and runtime budgets are pinned here.
"""

import contextlib
import io
import json
import math
import time

import numpy as np

from extremal_gamma.cli import main as cli_main
from extremal_gamma.family import ShapeFamily, alpha_at, classify
from extremal_gamma.limits import HLaw, ULambda, Uniform01, Gumbel, moment_falpha, moment_falpha_tail
from extremal_gamma.norming import (
    bn_equation,
    gamma_norming,
    solve_bn,
    solve_xin,
    solve_zetan,
    xin_equation,
    zetan_equation,
)
from extremal_gamma.sampling import RngStream, sample_gamma_log, simulate_batch
from extremal_gamma.special import exp_integral_e1, log_gamma, reg_gamma_p, reg_gamma_q
from extremal_gamma.verify import (
    SuiteSpec,
    convergence_suite,
    exact_power_max_cdf,
    ks_statistic,
    moment_check,
    sup_diff_exact,
)
import oracles

SEED = 11

# Criterion 1
COMPLEMENT_TOL = 1e-12
RECURRENCE_TOL = 1e-10
E1_TOL = 1e-12
SHAPES = [0.01, 0.5, 1.0, 2.0, 10.0, 100.0]
X_GRID = list(np.geomspace(1e-6, 1e3, 37))
# Criterion 2
ROOT_REL_TOL = 1e-11
# Criterion 3
EXACT_TOL_BOUNDED = 0.02
EXACT_TOL_GROWING = 0.05
MONOTONE_SLACK = 0.10
# Criteria 4, 5, 6
FALPHA_TOL = 0.02
POWER_TOL = 0.01
LEMMA_TOL = 0.02
# Criteria 7, 9
KS_TOL = 0.05
# Criteria 8, 9
Z_TOL = 4.0
DUAL_QUAD_TOL = 1e-7


@contextlib.contextmanager
def stopwatch():
    box = {}
    start = time.perf_counter()
    yield box
    box["elapsed"] = time.perf_counter() - start


def _monotone(values, slack=MONOTONE_SLACK):
    return all(b <= (1 + slack) * a for a, b in zip(values, values[1:]))


def test_criterion_01_special_identities(record_criterion):
    with stopwatch() as t:
        comp = max(abs(reg_gamma_p(a, x) + reg_gamma_q(a, x) - 1.0) for a in SHAPES for x in X_GRID)
        rec = 0.0
        for a in (s for s in SHAPES if s > 1):
            ratio = math.exp(log_gamma(a - 1) - log_gamma(a))
            for x in X_GRID:
                head = math.exp((a - 1) * math.log(x) - x - log_gamma(a))
                rec = max(rec, abs(reg_gamma_q(a, x) - head - (a - 1) * reg_gamma_q(a - 1, x) * ratio))
        e1_err = abs(exp_integral_e1(1.0) - oracles.e1_series(1.0))
    ok = comp <= COMPLEMENT_TOL and rec <= RECURRENCE_TOL and e1_err <= E1_TOL and t["elapsed"] < 1.0
    detail = f"P+Q-1 {comp:.2e} <= 1e-12, recurrence {rec:.2e} <= 1e-10, E1(1) err {e1_err:.2e} <= 1e-12, {t['elapsed']:.2f}s < 1s"
    record_criterion(1, ok, "special-function identities", detail)
    assert ok, detail


ROOT_CASES = [
    # RapidGrowth
    ((1, 1, 0), 10**3), ((1, 1, 0), 10**6), ((2, 0.5, 0), 10**4), ((1, 0.5, 0), 10**8),
    ((1, 0, 2), 10**4), ((1, 0, 3), 10**6), ((0.5, 2, 0), 10**5),
    # LogComparable
    ((1, 0, 1), 10**3), ((1, 0, 1), 10**6), ((1, 0, 1), 10**9), ((2, 0, 1), 10**5),
    ((0.5, 0, 1), 10**8), ((3, 0, 1), 10**12),
    # SlowGrowth
    ((1, 0, 0.5), 10**4), ((1, 0, 0.5), 10**8), ((1, 0, 0.75), 10**6), ((1, 0, 0.75), 10**10),
    ((2, 0, 0.5), 10**8), ((1, 0, 0.25), 10**12), ((1.5, 0, 0.6), 10**9),
]


def _root_check(family, n):
    fam = ShapeFamily(*family)
    a = alpha_at(fam, n)
    tag = classify(fam).tag.value
    log_n = math.log(n)
    if tag == "RapidGrowth":
        d = solve_bn(n, a)
        res = abs(bn_equation(d.root, n, a)) / log_n
        scale = math.sqrt(2 * log_n)
        in_region = 0.3 * scale <= d.root <= 3 * scale
        return tag, res, in_region, None
    if tag == "LogComparable":
        d = solve_zetan(n, a)
        res = abs(zetan_equation(d.root, n, a)) / max(1.0, d.root)
        return tag, res, d.root > 1, None
    d = solve_xin(n, a)
    res = abs(xin_equation(d.root, n, a)) / max(1.0, d.root)
    eps = d.aux["epsilon_n"]
    bound = eps * (a - 1) / (log_n - (a - 1))
    # The bound brackets z = xi_n / log n; xi_n itself is log n times larger.
    literal = d.aux["xi_n"] <= bound
    return tag, res, 0 < d.root <= bound, literal


def test_criterion_02_root_solvers(record_criterion):
    with stopwatch() as t:
        checks = [_root_check(f, n) for f, n in ROOT_CASES]
    tags = {c[0] for c in checks}
    worst = max(c[1] for c in checks)
    regions = all(c[2] for c in checks)
    literal = [c[3] for c in checks if c[3] is not None]
    ok = (
        len(checks) == 20
        and tags == {"RapidGrowth", "LogComparable", "SlowGrowth"}
        and worst <= ROOT_REL_TOL
        and regions
        and t["elapsed"] < 1.0
    )
    detail = (
        f"20 pairs, worst relative residual {worst:.2e} <= 1e-11, brackets honored {regions} "
        f"(xi bound applied to xi_n/log n; literal xi_n <= bound holds in {sum(literal)}/{len(literal)}), "
        f"{t['elapsed']:.2f}s < 1s"
    )
    record_criterion(2, ok, "root solvers", detail)
    assert ok, detail


def test_criterion_03_exact_gumbel_convergence(record_criterion):
    protocols = [
        ("BoundedShape alpha=2", (2, 0, 0), [10**2, 10**4, 10**6], EXACT_TOL_BOUNDED),
        ("SlowGrowth alpha=sqrt(log n)", (1, 0, 0.5), [10**2, 10**4, 10**6, 10**8], EXACT_TOL_GROWING),
        ("LogComparable alpha=log n", (1, 0, 1), [10**2, 10**4, 10**6, 10**8], EXACT_TOL_GROWING),
    ]
    parts, ok = [], True
    with stopwatch() as t:
        for name, family, grid, tol in protocols:
            diffs = [sup_diff_exact(ShapeFamily(*family), n) for n in grid]
            good = _monotone(diffs) and diffs[-1] < tol
            ok &= good
            parts.append(f"{name}: {', '.join(f'{d:.4f}' for d in diffs)} (final < {tol}: {good})")
    ok &= t["elapsed"] < 10.0
    detail = "; ".join(parts) + f"; {t['elapsed']:.2f}s < 10s"
    record_criterion(3, ok, "exact-track Gumbel convergence", detail)
    assert ok, detail


def test_criterion_04_stable_product(record_criterion):
    n = 10**5
    with stopwatch() as t:
        diffs = {a: sup_diff_exact(ShapeFamily(a, -1, 0), n) for a in (0.5, 1.0, 2.0)}
    ok = max(diffs.values()) < FALPHA_TOL and t["elapsed"] < 5.0
    detail = ", ".join(f"alpha={a}: {d:.2e}" for a, d in diffs.items()) + f" < 0.02; {t['elapsed']:.2f}s < 5s"
    record_criterion(4, ok, "n alpha_n -> alpha gives F_alpha", detail)
    assert ok, detail


def test_criterion_05_vanishing_product(record_criterion):
    n = 10**4
    a = float(n) ** -2
    with stopwatch() as t:
        errs = [abs(exact_power_max_cdf(n, a, x0) - x0) for x0 in np.round(np.arange(0.1, 1.0, 0.1), 1)]
    ok = max(errs) < POWER_TOL and t["elapsed"] < 1.0
    detail = f"max |P[M^(n alpha) <= x0] - x0| = {max(errs):.2e} < 0.01; {t['elapsed']:.2f}s < 1s"
    record_criterion(5, ok, "n alpha_n -> 0 gives Uniform(0,1)", detail)
    assert ok, detail


def test_criterion_06_small_shape_uniform(record_criterion):
    delta = 1e-3
    with stopwatch() as t:
        gaps = [abs(math.exp(log_gamma(delta * (1 + k)) - log_gamma(delta)) - 1 / (1 + k)) for k in (1, 2, 3)]
        u = np.exp(delta * sample_gamma_log(delta, RngStream(SEED), size=10**5))
        ks = ks_statistic(u, Uniform01())
    ok = max(gaps) < LEMMA_TOL and ks < LEMMA_TOL and t["elapsed"] < 5.0
    detail = f"moment gap {max(gaps):.2e} < 0.02, KS {ks:.4f} < 0.02; {t['elapsed']:.2f}s < 5s"
    record_criterion(6, ok, "V^delta -> Uniform for tiny shape", detail)
    assert ok, detail


def test_criterion_07_dirichlet_gumbel(record_criterion):
    n = R = 10**4
    with stopwatch() as t:
        values = simulate_batch("dirichlet", ShapeFamily(1, 0, 0), ShapeFamily(1, 1, 0), n, R, SEED, workers=4)
        ks = ks_statistic(values, Gumbel())
    ok = ks < KS_TOL and t["elapsed"] < 60.0
    detail = f"KS {ks:.4f} < 0.05; {t['elapsed']:.1f}s < 60s"
    record_criterion(7, ok, "Dirichlet maximum, Gumbel branch", detail)
    assert ok, detail


def test_criterion_08_h_law(record_criterion):
    n, R = 500, 2 * 10**4
    with stopwatch() as t:
        values = simulate_batch("dirichlet", ShapeFamily(2, -1, 0), ShapeFamily(1, 0, 0), n, R, SEED, workers=4)
        z = moment_check(values, HLaw(2.0, 1.0), k_max=3).z
        dual = max(abs(moment_falpha(2.0, k) - moment_falpha_tail(2.0, k)) for k in (1, 2, 3))
    ok = max(abs(v) for v in z) < Z_TOL and dual <= DUAL_QUAD_TOL and t["elapsed"] < 60.0
    detail = f"z = {', '.join(f'{v:.2f}' for v in z)} (|z| < 4), quadratures agree to {dual:.1e} <= 1e-7; {t['elapsed']:.1f}s < 60s"
    record_criterion(8, ok, "Dirichlet maximum, H law by moments", detail)
    assert ok, detail


def test_criterion_09_ulambda(record_criterion):
    n = R = 10**4
    shape = ShapeFamily(1, -2, 0)
    with stopwatch() as t:
        one = simulate_batch("dirichlet", shape, ShapeFamily(1, -1, 0), n, R, SEED, workers=4)
        ks_one = ks_statistic(one, ULambda(1.0))
        zero = simulate_batch("dirichlet", shape, ShapeFamily(3, 0, 0), n, R, SEED, workers=4)
        ks_zero = ks_statistic(zero, Uniform01())
        # lambda = inf: n alpha_n / beta_n = n^2 -> inf.
        inf = simulate_batch("dirichlet", shape, ShapeFamily(1, -3, 0), n, R, SEED, workers=4)
        z = moment_check(inf, ULambda(math.inf), k_max=3).z
    ok = ks_one < KS_TOL and ks_zero < KS_TOL and max(abs(v) for v in z) < Z_TOL and t["elapsed"] < 120.0
    detail = (
        f"lambda=1 KS {ks_one:.4f}, lambda=0 KS {ks_zero:.4f} (< 0.05); "
        f"lambda=inf z = {', '.join(f'{v:.2f}' for v in z)} (|z| < 4); {t['elapsed']:.1f}s < 120s"
    )
    record_criterion(9, ok, "powered Dirichlet maximum, U_lambda", detail)
    assert ok, detail


def _cli(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = cli_main(argv)
    return code, out.getvalue()


def test_criterion_10_determinism(record_criterion, tmp_path):
    sim = ["simulate", "--model", "dirichlet", "--family", "1,-2,0", "--beta", "1,-1,0", "--n", "2000"]
    ver = ["verify", "--model", "dirichlet", "--family", "2,-1,0", "--beta", "1,0,0", "--n-grid", "200,500"]
    with stopwatch() as t:
        files = []
        for workers in ("1", "8"):
            path = tmp_path / f"sim_{workers}.csv"
            code, _ = _cli([*sim, "--replicates", "2000", "--seed", str(SEED), "--workers", workers, "-o", str(path)])
            assert code == 0
            files.append(path.read_bytes())
        reports = [_cli([*ver, "--replicates", "2000", "--seed", str(SEED), "--workers", w])[1] for w in ("1", "8", "1")]
    same_files = files[0] == files[1]
    same_reports = reports[0] == reports[1] == reports[2]
    json.loads(reports[0])
    ok = same_files and same_reports and t["elapsed"] < 30.0
    detail = f"simulate bytes identical {same_files}, verify JSON identical over reruns {same_reports}; {t['elapsed']:.1f}s < 30s"
    record_criterion(10, ok, "determinism", detail)
    assert ok, detail
