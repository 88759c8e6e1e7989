import math

import numpy as np
import pytest
from scipy import stats

from mmlkit.codelength import DegenerateDataError, DomainError, PriorRange, log_kappa
from mmlkit.ttest import (
    AltParams,
    EffectSizePrior,
    NullParams,
    TwoSampleData,
    alt_codelength,
    alt_neg_log_likelihood,
    bayes_factor,
    bayes_factor_batch,
    fit_alt,
    fit_alt_delta,
    ml_alt_estimates,
    null_codelength,
    null_codelength_at,
    null_neg_log_likelihood,
    ttest,
    ttest_stats,
)
from oracles import alt_codelength_grid, grid_argmin_alt


def _data(seed, n1=8, n2=11, shift=0.7):
    rng = np.random.default_rng(seed)
    return TwoSampleData(rng.normal(shift, 1.3, n1) + 2, rng.normal(0, 1.3, n2) + 2)


def test_t_statistic_matches_scipy():
    d = _data(1)
    st = ttest_stats(d)
    ref = stats.ttest_ind(d.y1, d.y2, equal_var=True)
    assert st.t == pytest.approx(ref.statistic, rel=1e-12)
    assert st.nu == 17
    assert st.n_delta == pytest.approx(8 * 11 / 19)
    assert st.pooled_sd**2 == pytest.approx(((7 * d.y1.var(ddof=1)) + 10 * d.y2.var(ddof=1)) / 17)


def test_null_estimates_minimise_null_codelength():
    d = _data(2)
    length, params = null_codelength(d)
    y = d.stacked
    assert params.mu == pytest.approx(y.mean())
    assert params.sigma == pytest.approx(y.std(ddof=1))
    assert length.nats == pytest.approx(null_codelength_at(d, params).nats, rel=1e-13)
    for dm, ds in [(0.01, 0), (-0.01, 0), (0, 1.01), (0, 0.99)]:
        other = NullParams(params.mu + dm, params.sigma * (ds or 1))
        assert null_codelength_at(d, other).nats > length.nats


def test_alt_likelihood_reduces_to_null_at_zero_effect():
    d = _data(3)
    for mu, sigma in [(0.0, 1.0), (2.3, 0.4), (-1.0, 5.0)]:
        assert alt_neg_log_likelihood(d, AltParams(mu, sigma, 0.0)) == pytest.approx(
            null_neg_log_likelihood(d, NullParams(mu, sigma)), rel=1e-14
        )


def test_alt_codelength_uses_p3_constant():
    d = _data(4)
    p = AltParams(2.1, 1.2, 0.3)
    prior = EffectSizePrior()
    direct = alt_codelength_grid(d.y1, d.y2, np.array(2.1), np.log(1.2), np.array(0.3), prior)
    assert alt_codelength(d, p, prior).nats == pytest.approx(float(direct), rel=1e-13)
    assert math.exp(log_kappa(3)) == pytest.approx(19 / (192 * 2 ** (1 / 3)))


@pytest.mark.parametrize("seed", range(20))
def test_fit_alt_matches_grid_search(seed):
    rng = np.random.default_rng(100 + seed)
    n1, n2 = rng.integers(3, 15, size=2)
    d = _data(seed, n1, n2, shift=rng.uniform(-2, 2))
    prior = EffectSizePrior(1.0, rng.uniform(-0.5, 0.5), rng.uniform(0.3, 2.0))
    length, params = fit_alt(d, prior)
    best, arg, steps = grid_argmin_alt(d, prior)
    assert length.nats <= best + 1e-9
    fit = np.array([params.mu, math.log(params.sigma), params.delta])
    assert np.all(np.abs(fit - arg) <= steps + 1e-12)


def test_fit_alt_beats_ml_point():
    d = _data(5)
    length, _ = fit_alt(d)
    assert length.nats <= alt_codelength(d, ml_alt_estimates(d)).nats


def test_effect_shrunk_towards_prior_location():
    rng = np.random.default_rng(6)
    for _ in range(10):
        d = TwoSampleData(rng.normal(size=6), rng.normal(size=6))
        _, params = fit_alt(d)
        assert abs(params.delta) < abs(ml_alt_estimates(d).delta)


def test_identical_groups():
    y = np.array([1.0, 2.5, 0.3, 4.0])
    d = TwoSampleData(y, y.copy())
    res, _, alt = ttest(d)
    assert res.selected == "H0"
    # a flat quadratic minimum pins delta only to about sqrt(machine eps)
    assert alt.delta == pytest.approx(0.0, abs=1e-6)


def test_large_separation_selects_alternative():
    rng = np.random.default_rng(7)
    d = TwoSampleData(rng.normal(5, 1, 20), rng.normal(0, 1, 20))
    res, _, _ = ttest(d, threshold_nats=2.3)
    assert res.selected == "H1"
    assert res.difference_nats > 2.3


def test_prior_range_cancels():
    d = _data(8)
    a, _, _ = ttest(d)
    b, _, _ = ttest(d, prior_range=PriorRange(log_omega=17.5))
    assert b.i0.nats - a.i0.nats == pytest.approx(17.5)
    assert b.difference_nats == pytest.approx(a.difference_nats, abs=1e-8)


@pytest.mark.parametrize("scale,shift", [(3.0, 0.0), (0.01, 5.0), (250.0, -40.0)])
def test_location_scale_invariance(scale, shift):
    d = _data(9)
    a, _, pa = ttest(d)
    b, _, pb = ttest(d.transformed(scale, shift))
    assert b.difference_nats == pytest.approx(a.difference_nats, abs=1e-8)
    assert pb.delta == pytest.approx(pa.delta, abs=1e-7)


def test_bayes_factor_monte_carlo():
    d = _data(10)
    st = ttest_stats(d)
    prior = EffectSizePrior(1.0, 0.0, 0.707)
    rng = np.random.default_rng(11)
    delta = stats.t.rvs(prior.df, prior.location, prior.scale, size=1_000_000, random_state=rng)
    num = stats.nct.pdf(st.t, st.nu, math.sqrt(st.n_delta) * delta)
    den = stats.t.pdf(st.t, st.nu)
    mc = num.mean() / den
    se = num.std() / math.sqrt(num.size) / den
    assert abs(bayes_factor(d, prior) - mc) < 3 * se


def test_bayes_factor_decreases_with_prior_width():
    d = _data(12, shift=0.4)
    bfs = [bayes_factor(d, EffectSizePrior(1.0, 0.0, s)) for s in (1, 10, 100)]
    assert bfs[0] > bfs[1] > bfs[2]


def test_batched_bayes_factor_matches_adaptive():
    prior = EffectSizePrior(3.0, 0.2, 0.15)
    t = np.linspace(-7, 7, 29)
    ref = np.array([bayes_factor_from(t_i, 24, 6.0, prior) for t_i in t])
    assert np.allclose(bayes_factor_batch(t, 24, 6.0, prior), ref, rtol=1e-9)


def bayes_factor_from(t, nu, n_delta, prior):
    from mmlkit.ttest import _bayes_factor

    return _bayes_factor(t, nu, n_delta, prior, epsrel=1e-11)


def test_decisions_agree_with_bayes_factor():
    rng = np.random.default_rng(13)
    agree = []
    for delta in (0.0, 1.0):
        z = rng.normal(size=(400, 20, 2))
        m = z.mean(1)
        within = ((z - m[:, None, :]) ** 2).sum((1, 2))
        diff = m[:, 0] - m[:, 1] + delta
        var = (within + 10 * diff**2) / 39
        from mmlkit.ttest import null_codelength_from_var

        i0 = null_codelength_from_var(var, 40)
        _, _, i1 = fit_alt_delta(within, diff, 20, 20)
        t = math.sqrt(10) * diff / np.sqrt(within / 38)
        bf = bayes_factor_batch(t, 38, 10.0)
        agree.append(np.mean((i0 > i1) == (bf > 1)))
    assert min(agree) >= 0.8


def test_vectorised_null_matches_direct():
    from mmlkit.ttest import null_codelength_from_var

    d = _data(14)
    length, params = null_codelength(d)
    assert float(null_codelength_from_var(params.sigma**2, d.stacked.size)) == pytest.approx(length.nats)


def test_input_validation():
    with pytest.raises(DomainError):
        TwoSampleData([1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        TwoSampleData([1.0, np.nan], [1.0, 2.0])
    with pytest.raises(DegenerateDataError):
        ttest(TwoSampleData([1.0, 1.0], [1.0, 1.0]))
    with pytest.raises(DomainError):
        EffectSizePrior(scale=0.0)
    with pytest.raises(DomainError):
        AltParams(0.0, -1.0, 0.0)
