"""Acceptance criteria. Each test records one PASS/FAIL line, printed in the
terminal summary, and then asserts the same condition."""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from golden import CORR_NULL_CELL, SMML_PARTITIONS
from mmlkit.codelength import Mml87Inputs, PriorRange, mml87_codelength
from mmlkit.correlation import (
    BivariateSample,
    BivNormalParams,
    corr_alt_codelength,
    corr_mml_alt_estimates,
    corr_test,
    kl_bivariate_normal,
    mml_rho,
)
from mmlkit.mml87_binomial import (
    binomial_uncertainty_volume,
    expected_mml87_codelength,
    mml87_binomial_codelength,
    mml87_binomial_estimate,
)
from mmlkit.nml import nml_binomial_codelength
from mmlkit.simulate import LOG_1_65, default_config, simulate_corr_table, simulate_delta_nmse, simulate_rho_mse, simulate_type1
from mmlkit.smml import BinomialObservation, Segment, brute_force_smml, log_binom, partition_codelength, solve_smml
from mmlkit.ttest import EffectSizePrior, TwoSampleData, fit_alt, ttest
from oracles import grid_argmin_alt, numeric_corr_alt

SEED = 2024
REPS = 10_000


def _estimates(text):
    return np.array([float(x) for x in text.strip("{}").split(",")])


def test_smml_golden_partitions(acceptance):
    t0 = time.perf_counter()
    wrong_string, wrong_values = [], []
    for n, part, est, bits in SMML_PARTITIONS:
        sol = solve_smml(n)
        if str(sol) != part:
            wrong_string.append(n)
        ok_est = len(sol.estimates) == len(_estimates(est)) and np.allclose(sol.estimates, _estimates(est), atol=5e-4)
        if not ok_est or abs(sol.expected_codelength.bits - bits) > 1e-3:
            wrong_values.append(n)
    elapsed = time.perf_counter() - t0
    ok = not wrong_string and not wrong_values and elapsed < 1.0
    detail = (
        f"partition string differs for n={wrong_string}, estimates or I_S differ for n={wrong_values}, "
        f"{elapsed:.2f}s; every listed n is an exact tie between co-optimal partitions"
    )
    assert acceptance("SMML partitions n=1..30 (string, estimates 5e-4, I_S 1e-3 bits)", ok, detail)


def test_smml_oracle_equivalence(acceptance):
    t0 = time.perf_counter()
    gaps = [abs(solve_smml(n).expected_codelength.nats - brute_force_smml(n).expected_codelength.nats) for n in range(1, 13)]
    elapsed = time.perf_counter() - t0
    ok = max(gaps) <= 1e-10 and elapsed < 10
    assert acceptance("SMML DP equals exhaustive search, n<=12", ok, f"max gap {max(gaps):.1e} nats, {elapsed:.1f}s")


def test_binomial_worked_examples(acceptance):
    obs = BinomialObservation(10, 3)
    theta = mml87_binomial_estimate(obs)
    nml = nml_binomial_codelength(obs)
    values = {
        "single segment": (partition_codelength([Segment(0, 10)], 10).expected_codelength.bits, 5.01),
        "singletons": (partition_codelength([Segment(y, y) for y in range(11)], 10).expected_codelength.bits, 9.84),
        "MML87 length": (mml87_binomial_codelength(obs, theta).bits, 3.61),
        "MML87 volume": (binomial_uncertainty_volume(10, theta), 0.51),
        "NML complexity": (nml.log_complexity_nats / math.log(2), 2.22),
        "NML total": (nml.total.bits, 4.13),
    }
    bad = [k for k, (got, want) in values.items() if abs(got - want) > 0.01]
    ok = not bad and theta == pytest.approx(7 / 22)
    detail = ", ".join(f"{k} {got:.4f} (want {want})" for k, (got, want) in values.items())
    assert acceptance("binomial worked examples", ok, f"{detail}; out of tolerance: {bad or 'none'}")


def test_mml87_strict_gap(acceptance):
    t0 = time.perf_counter()
    gaps = [expected_mml87_codelength(n).bits - solve_smml(n).expected_codelength.bits for n in range(5, 31)]
    elapsed = time.perf_counter() - t0
    worst = max(gaps, key=abs)
    ok = abs(worst) < 0.1 and elapsed < 5
    assert acceptance("expected MML87 within 0.1 bits of SMML, n=5..30", ok, f"largest gap {worst:+.4f} bits, {elapsed:.2f}s")


def test_estimator_oracles(acceptance):
    t0 = time.perf_counter()
    grid = np.linspace(1e-6, 1 - 1e-6, 200_001)
    binom_err = 0.0
    for n in range(1, 21):
        for y in range(n + 1):
            obs = BinomialObservation(n, y)
            nll = -(float(log_binom(n, y)) + y * np.log(grid) + (n - y) * np.log1p(-grid))
            fisher = n / (grid * (1 - grid))
            vals = nll + 0.5 * np.log(fisher / 12) + 0.5
            binom_err = max(binom_err, abs(grid[np.argmin(vals)] - mml87_binomial_estimate(obs)))

    rng = np.random.default_rng(SEED)
    t_ok = 0
    for k in range(20):
        n1, n2 = rng.integers(3, 15, size=2)
        d = TwoSampleData(rng.normal(rng.uniform(-2, 2), 1.3, n1), rng.normal(0, 1.3, n2))
        length, p = fit_alt(d)
        best, arg, steps = grid_argmin_alt(d, EffectSizePrior())
        fit = np.array([p.mu, math.log(p.sigma), p.delta])
        t_ok += length.nats <= best + 1e-9 and bool(np.all(np.abs(fit - arg) <= steps + 1e-12))

    c_ok = 0
    for k in range(20):
        n = int(rng.integers(5, 40))
        rho = rng.uniform(-0.9, 0.9)
        cov = [[1.0, rho * 2], [rho * 2, 4.0]]
        d = BivariateSample(rng.multivariate_normal([1.0, -1.0], cov, size=n))
        best, p = numeric_corr_alt(d, seed=k)
        m = corr_mml_alt_estimates(d)
        c_ok += (
            corr_alt_codelength(d, m).nats <= best + 1e-9
            and abs(m.rho - p.rho) < 1e-5
            and abs(m.sigma1 / p.sigma1 - 1) < 1e-5
            and abs(m.sigma2 / p.sigma2 - 1) < 1e-5
        )
    elapsed = time.perf_counter() - t0
    ok = binom_err <= 1e-5 and t_ok == 20 and c_ok == 20 and elapsed < 120
    detail = f"binomial max error {binom_err:.1e}, t-test {t_ok}/20, correlation {c_ok}/20, {elapsed:.0f}s"
    assert acceptance("estimator oracles", ok, detail)


def test_property_suites(acceptance):
    checks = {}
    worst = 0.0
    for n in range(1, 201):
        lengths = np.array([nml_binomial_codelength(BinomialObservation(n, y)).total.nats for y in range(n + 1)])
        worst = max(worst, abs(math.fsum(np.exp(-lengths)) - 1.0))
    checks["NML normalisation"] = (worst <= 1e-10, f"{worst:.1e}")

    rng = np.random.default_rng(SEED)
    r = rng.uniform(-1, 1, 10_000)
    n = rng.integers(3, 1000, 10_000)
    r = r[r != 0]
    n = n[: r.size]
    checks["MML rho shrinks"] = (bool(np.all(np.abs(mml_rho(r, n)) < np.abs(r))), f"{r.size} points")

    reparam = 0.0
    for n_, y in [(10, 3), (5, 0), (20, 19), (1, 1), (50, 25)]:
        for theta in np.linspace(0.05, 0.95, 7):
            nll = -(float(log_binom(n_, y)) + y * math.log(theta) + (n_ - y) * math.log1p(-theta))
            fisher = n_ / (theta * (1 - theta))
            jac = theta * (1 - theta)
            a = mml87_codelength(Mml87Inputs(1.0, fisher, nll, 1)).nats
            b = mml87_codelength(Mml87Inputs(jac, fisher * jac * jac, nll, 1)).nats
            reparam = max(reparam, abs(a - b))
    checks["logit invariance"] = (reparam <= 1e-10, f"{reparam:.1e}")

    inv = 0.0
    for k in range(5):
        d = TwoSampleData(rng.normal(0.5, 2, 9), rng.normal(0, 2, 12))
        base = ttest(d)[0].difference_nats
        inv = max(inv, abs(ttest(d.transformed(37.0, -12.0))[0].difference_nats - base))
        inv = max(inv, abs(ttest(d, prior_range=PriorRange(9.0))[0].difference_nats - base))
        b = BivariateSample(rng.multivariate_normal([0, 0], [[1, 0.3], [0.3, 1]], size=15))
        cb = corr_test(b, 0.1).difference_nats
        inv = max(inv, abs(corr_test(BivariateSample(b.pairs * [5.0, 0.1] + 3.0), 0.1).difference_nats - cb))
        inv = max(inv, abs(corr_test(b, 0.1, prior_range=PriorRange(4.0)).difference_nats - cb))
    checks["range/scale invariance"] = (inv <= 1e-8, f"{inv:.1e}")

    kl_min = math.inf
    for _ in range(1000):
        a = BivNormalParams(*rng.normal(size=2), *rng.uniform(0.2, 3, 2), rng.uniform(-0.95, 0.95))
        b = BivNormalParams(*rng.normal(size=2), *rng.uniform(0.2, 3, 2), rng.uniform(-0.95, 0.95))
        kl_min = min(kl_min, kl_bivariate_normal(a, b))
    checks["KL nonnegative"] = (kl_min >= 0, f"min {kl_min:.3g}")

    ok = all(v[0] for v in checks.values())
    detail = ", ".join(f"{k} {'ok' if v[0] else 'FAILED'} ({v[1]})" for k, v in checks.items())
    assert acceptance("property suites", ok, detail)


@pytest.mark.slow
def test_effect_size_bias_and_nmse(acceptance):
    t0 = time.perf_counter()
    table = simulate_delta_nmse(default_config("delta-nmse", seed=SEED, replicates=REPS, n_values=(5, 50)))
    elapsed = time.perf_counter() - t0
    ml_bias = [r for r in table.select("bias_ml", 5) if 0.5 <= r.parameter <= 2.0]
    mml_bias = [r for r in table.select("bias_mml", 5) if 0.5 <= r.parameter <= 2.0]
    small_ok = all(r.value > 0 for r in ml_bias) and all(r.value < 0 for r in mml_bias)
    z = [
        abs(a.value - b.value) / math.hypot(a.stderr, b.stderr)
        for a, b in zip(table.select("nmse_ml", 50), table.select("nmse_mml", 50))
    ]
    over = [round(r.parameter, 3) for r, zz in zip(table.select("nmse_ml", 50), z) if zz >= 2]
    ok = small_ok and not over and elapsed < 300
    detail = (
        f"n=5 bias over delta in [0.5, 2]: ML min {min(r.value for r in ml_bias):+.4f}, "
        f"MML max {max(r.value for r in mml_bias):+.4f}; n=50 NMSE gap up to {max(z):.1f} SE, "
        f">=2 SE at delta={over}; {elapsed:.0f}s"
    )
    assert acceptance("effect size: n=5 bias signs, n=50 NMSE within 2 SE", ok, detail)


@pytest.mark.slow
def test_correlation_mse_dominance(acceptance):
    t0 = time.perf_counter()
    table = simulate_rho_mse(default_config("rho-mse", seed=SEED, replicates=REPS))
    elapsed = time.perf_counter() - t0
    failing = []
    for n in (20, 50):
        for a, b in zip(table.select("mse_ml", n), table.select("mse_mml", n)):
            if abs(a.parameter) <= 0.6 + 1e-9 and (a.value - b.value) < 2 * math.hypot(a.stderr, b.stderr):
                failing.append((n, round(a.parameter, 2)))
    ok = not failing and elapsed < 300
    detail = f"grid points without a 2 SE MML advantage: {failing or 'none'}; {elapsed:.0f}s"
    assert acceptance("correlation: MML MSE below ML by 2 SE for |rho|<=0.6, n=20,50", ok, detail)


@pytest.mark.slow
def test_correlation_table_cell(acceptance):
    t0 = time.perf_counter()
    cfg = default_config("corr-table", seed=SEED, replicates=REPS, threshold_nats=LOG_1_65)
    table = simulate_corr_table(cfg)
    elapsed = time.perf_counter() - t0
    c = CORR_NULL_CELL
    tag = f"rho0={c['rho0']:+.2f}"
    rej = table.get(f"{tag}:reject_mml[thr={LOG_1_65:.4f}]", c["n"], c["rho"]).value
    kl_ml = table.get(f"{tag}:kl_ml_selected", c["n"], c["rho"]).value
    kl_mml = table.get(f"{tag}:kl_mml_selected", c["n"], c["rho"]).value
    ok = (
        abs(rej - c["reject"]) <= 0.02
        and kl_mml < kl_ml
        and abs(kl_ml - c["kl_ml"]) <= 0.03
        and abs(kl_mml - c["kl_mml"]) <= 0.03
        and elapsed < 600
    )
    detail = f"rejection {rej:.4f} (want {c['reject']}), KL ML {kl_ml:.4f} / MML {kl_mml:.4f} (want {c['kl_ml']} / {c['kl_mml']}); {elapsed:.0f}s"
    assert acceptance("correlation null cell n=15: rejection and KL", ok, detail)


@pytest.mark.slow
def test_type1_calibration(acceptance):
    t0 = time.perf_counter()
    prior = EffectSizePrior()
    sweep = (0.1, 0.25, 0.5, 1 / math.sqrt(2), 1.0, 2.0)
    cfg = default_config("type1", seed=SEED, replicates=REPS, grid=sweep, prior=prior)
    table = simulate_type1(cfg)
    elapsed = time.perf_counter() - t0
    mml = table.get("reject_mml[thr=0.0000]", 20, prior.scale).value
    bf = table.get("reject_bf[>1.87]", 20, prior.scale).value
    ok = abs(mml - 0.10) <= 0.02 and abs(bf - 0.05) <= 0.02 and elapsed < 300
    others = ", ".join(
        f"{s:.3g}: {table.get('reject_mml[thr=0.0000]', 20, s).value:.3f}/{table.get('reject_bf[>1.87]', 20, s).value:.3f}"
        for s in sweep
    )
    detail = (
        f"default Cauchy prior: MML threshold 0 rejects {mml:.4f} (want 0.10), BF>1.87 rejects {bf:.4f} (want 0.05); "
        f"by prior scale (MML/BF): {others}; {elapsed:.0f}s"
    )
    assert acceptance("type I calibration at n1=n2=20", ok, detail)


def test_cli_determinism_and_exit_codes(acceptance, tmp_path):
    def cli(*argv):
        return subprocess.run([sys.executable, "-m", "mmlkit", *argv], capture_output=True, cwd=tmp_path)

    a = cli("simulate", "rho-mse", "--seed", "7", "--reps", "200", "-o", "a.csv")
    b = cli("simulate", "rho-mse", "--seed", "7", "--reps", "200", "-o", "b.csv")
    same = (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    (tmp_path / "bad.csv").write_text("1,2,3\n")
    (tmp_path / "flat.csv").write_text("1,1\n1,1\n1,1\n")
    codes = {
        "malformed csv": (cli("ttest", "bad.csv").returncode, 2),
        "missing file": (cli("ttest", "nope.csv").returncode, 2),
        "degenerate data": (cli("ttest", "flat.csv").returncode, 3),
        "n-max 0": (cli("smml-table", "--n-max", "0").returncode, 2),
        "rho0 1": (cli("corrtest", "flat.csv", "--rho0", "1").returncode, 2),
        "unknown experiment": (cli("simulate", "nope").returncode, 2),
        "reps 0": (cli("simulate", "delta-nmse", "--reps", "0").returncode, 2),
    }
    bad = {k: v[0] for k, v in codes.items() if v[0] != v[1]}
    ok = a.returncode == 0 and b.returncode == 0 and same and manifest["seed"] == 7 and not bad
    detail = f"byte-identical reruns {'yes' if same else 'no'}, wrong exit codes: {bad or 'none'}"
    assert acceptance("CLI determinism and exit codes", ok, detail)
