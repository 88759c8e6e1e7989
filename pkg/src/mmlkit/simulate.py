"""Monte Carlo experiments for the t-test and correlation estimators.

Every replicate owns a random stream derived from ``(seed, experiment,
replicate)``, so results do not depend on execution order. Within an
experiment one standard normal block per replicate is shared by all grid
cells (common random numbers), which keeps estimator comparisons sharp.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .correlation import _kl_arrays, corr_codelength_difference, mml_rho, mml_variance_factor, olkin_pratt
from .ttest import EffectSizePrior, bayes_factor_batch, fit_alt_delta, null_codelength_from_var

__all__ = [
    "SimConfig",
    "RiskRow",
    "RiskTable",
    "EXPERIMENTS",
    "CSV_COLUMNS",
    "default_config",
    "run_experiment",
    "simulate_delta_nmse",
    "simulate_rho_mse",
    "simulate_type1",
    "simulate_corr_table",
]

LOG_1_65 = math.log(1.65)
SUBSTANTIAL = 2.3
CSV_COLUMNS = ("name", "n", "parameter", "value", "stderr", "replicates", "seed")

# spawn-key prefixes, one per experiment, so streams never collide
_STREAM_ID = {"delta-nmse": 1, "rho-mse": 2, "type1": 3, "corr-table": 4}
_MAX_REDRAWS = 1000


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    replicates: int = 10_000
    grid: tuple = ()
    n_values: tuple = ()
    threshold_nats: float = 0.0
    prior: EffectSizePrior = field(default_factory=EffectSizePrior)
    # null correlations for the correlation table; ignored elsewhere
    null_values: tuple = (-0.3, 0.0, 0.7)

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "null_values", tuple(float(v) for v in self.null_values))
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not self.grid or not self.n_values:
            raise ValueError("grid and n_values must be non-empty")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if math.isnan(self.threshold_nats) or self.threshold_nats < 0:
            raise ValueError("threshold_nats must be non-negative")


@dataclass(frozen=True)
class RiskRow:
    name: str
    n: int
    parameter: float
    value: float
    stderr: float
    replicates: int
    seed: int


@dataclass
class RiskTable:
    rows: list
    redraws: int = 0

    def get(self, name: str, n: int, parameter: float) -> RiskRow:
        for row in self.rows:
            if row.name == name and row.n == n and math.isclose(row.parameter, parameter, abs_tol=1e-12):
                return row
        raise KeyError((name, n, parameter))

    def select(self, name: str, n: int | None = None) -> list:
        return [r for r in self.rows if r.name == name and (n is None or r.n == n)]

    def names(self) -> list:
        return sorted({r.name for r in self.rows})

    def write_csv(self, handle) -> None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow(
                [r.name, r.n, _fixed(r.parameter, 6), _fixed(r.value, 10), _fixed(r.stderr, 10), r.replicates, r.seed]
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _fixed(x: float, digits: int) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    out = f"{x:.{digits}f}"
    # avoid "-0.000" showing up for tiny negative values
    return out[1:] if out.startswith("-") and float(out) == 0 else out


def _mean_row(name, n, parameter, values, cfg) -> RiskRow:
    values = np.asarray(values, dtype=float)
    r = values.size
    se = float(values.std(ddof=1) / math.sqrt(r)) if r > 1 else 0.0
    return RiskRow(name, n, float(parameter), float(values.mean()), se, r, cfg.seed)


def _rate_row(name, n, parameter, hits, cfg) -> RiskRow:
    """Rejection frequency; the standard error uses the plus-two adjusted
    proportion so that it stays positive when every replicate agrees."""
    hits = np.asarray(hits, dtype=bool)
    r = hits.size
    k = int(hits.sum())
    adj = (k + 1.0) / (r + 2.0)
    se = math.sqrt(adj * (1.0 - adj) / (r + 2.0)) if r > 1 else 0.0
    return RiskRow(name, n, float(parameter), k / r, se, r, cfg.seed)


def _stream(seed: int, experiment: str, rep: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(_STREAM_ID[experiment], rep))
    return np.random.default_rng(ss)


def _draw_blocks(cfg: SimConfig, experiment: str, rows: int, acceptable):
    """One ``(rows, 2)`` standard normal block per replicate.

    A block that ``acceptable`` rejects is replaced by the next draw from
    the same replicate stream; the number of replacements is returned.
    """
    out = np.empty((cfg.replicates, rows, 2))
    redraws = 0
    for rep in range(cfg.replicates):
        rng = _stream(cfg.seed, experiment, rep)
        block = rng.standard_normal((rows, 2))
        tries = 0
        while not acceptable(block):
            tries += 1
            if tries > _MAX_REDRAWS:
                raise RuntimeError(f"replicate {rep} stayed degenerate after {_MAX_REDRAWS} redraws")
            block = rng.standard_normal((rows, 2))
        redraws += tries
        out[rep] = block
    return out, redraws


def _group_stats(block_n):
    """Group means and pooled within-group sum of squares for two columns."""
    m = block_n.mean(axis=1)
    within = ((block_n - m[:, None, :]) ** 2).sum(axis=(1, 2))
    return m[:, 0], m[:, 1], within


def _two_sample_ok(n_values):
    def ok(block):
        for n in n_values:
            b = block[:n]
            if not (b.var(axis=0) > 0).any():
                return False
        return True

    return ok


def _bivariate_ok(n_values):
    def ok(block):
        for n in n_values:
            d = block[:n] - block[:n].mean(axis=0)
            v = (d * d).sum(axis=0)
            if not (v > 0).all():
                return False
            r = (d[:, 0] * d[:, 1]).sum() / math.sqrt(v[0] * v[1])
            if abs(r) >= 1.0 - 1e-12:
                return False
        return True

    return ok


def _check_n(cfg: SimConfig, minimum: int) -> None:
    if min(cfg.n_values) < minimum:
        raise ValueError(f"sample sizes must be at least {minimum}")


def _check_rho_grid(values) -> None:
    if any(not -1.0 < v < 1.0 for v in values):
        raise ValueError("correlations must lie strictly inside (-1, 1)")


def simulate_delta_nmse(cfg: SimConfig) -> RiskTable:
    """NMSE ``(delta - estimate)^2 / delta`` and mean bias of ML and MML87 effect sizes.

    ``n_values`` are per-group sizes; data have mean 0 and unit variance
    apart from the effect ``delta``.
    """
    _check_n(cfg, 2)
    if any(d <= 0 for d in cfg.grid):
        raise ValueError("effect sizes must be positive")
    blocks, redraws = _draw_blocks(cfg, "delta-nmse", max(cfg.n_values), _two_sample_ok(cfg.n_values))
    rows = []
    for n in cfg.n_values:
        m1, m2, within = _group_stats(blocks[:, :n])
        base = m1 - m2
        for delta in cfg.grid:
            diff = base + delta
            ml = diff / np.sqrt(within / (2 * n))
            mml, _, _ = fit_alt_delta(within, diff, n, n, cfg.prior)
            for label, est in (("ml", ml), ("mml", mml)):
                rows.append(_mean_row(f"nmse_{label}", n, delta, (delta - est) ** 2 / delta, cfg))
                rows.append(_mean_row(f"bias_{label}", n, delta, est - delta, cfg))
    return RiskTable(rows, redraws)


def _sample_corr(blocks_n, rho):
    x = blocks_n[:, :, 0]
    y = rho * x + math.sqrt(1.0 - rho * rho) * blocks_n[:, :, 1]
    mx, my = x.mean(axis=1), y.mean(axis=1)
    dx, dy = x - mx[:, None], y - my[:, None]
    vx, vy = (dx * dx).mean(axis=1), (dy * dy).mean(axis=1)
    r = (dx * dy).mean(axis=1) / np.sqrt(vx * vy)
    return np.clip(r, -1.0, 1.0), mx, my, vx, vy


def simulate_rho_mse(cfg: SimConfig) -> RiskTable:
    """Squared-error risk of the ML, MML87 and Olkin-Pratt correlation estimates."""
    _check_n(cfg, 5)
    _check_rho_grid(cfg.grid)
    blocks, redraws = _draw_blocks(cfg, "rho-mse", max(cfg.n_values), _bivariate_ok(cfg.n_values))
    rows = []
    for n in cfg.n_values:
        for rho in cfg.grid:
            r = _sample_corr(blocks[:, :n], rho)[0]
            for label, est in (("ml", r), ("mml", mml_rho(r, n)), ("op", olkin_pratt(r, n))):
                rows.append(_mean_row(f"mse_{label}", n, rho, (est - rho) ** 2, cfg))
    return RiskTable(rows, redraws)


def _threshold_label(thr: float) -> str:
    return "inf" if math.isinf(thr) else f"{thr:.4f}"


def simulate_type1(cfg: SimConfig) -> RiskTable:
    """Null rejection rates of the MML and Bayes factor rules per prior scale.

    ``grid`` holds prior scales for the effect size; df and location come
    from ``cfg.prior``. MML is applied at threshold 0, at ``log 1.65`` and
    at ``cfg.threshold_nats``; the Bayes factor at cut-offs 1 and 1.87.
    """
    _check_n(cfg, 2)
    if any(s <= 0 for s in cfg.grid):
        raise ValueError("prior scales must be positive")
    blocks, redraws = _draw_blocks(cfg, "type1", max(cfg.n_values), _two_sample_ok(cfg.n_values))
    thresholds = sorted({0.0, LOG_1_65, float(cfg.threshold_nats)})
    rows = []
    for n in cfg.n_values:
        m1, m2, within = _group_stats(blocks[:, :n])
        diff = m1 - m2
        total = 2 * n
        # pooled variance of all 2n values, from within and between parts
        var = (within + 0.5 * n * diff * diff) / (total - 1)
        i0 = null_codelength_from_var(var, total)
        nu = total - 2
        t = math.sqrt(n / 2.0) * diff / np.sqrt(within / nu)
        for scale in cfg.grid:
            prior = replace(cfg.prior, scale=scale)
            _, _, i1 = fit_alt_delta(within, diff, n, n, prior)
            for thr in thresholds:
                rows.append(_rate_row(f"reject_mml[thr={_threshold_label(thr)}]", n, scale, i1 + thr < i0, cfg))
            bf = bayes_factor_batch(t, nu, n / 2.0, prior)
            for cut in (1.0, 1.87):
                rows.append(_rate_row(f"reject_bf[>{cut:.2f}]", n, scale, bf > cut, cfg))
    return RiskTable(rows, redraws)


def simulate_corr_table(cfg: SimConfig) -> RiskTable:
    """Rejection rates and KL risk for each (null, true correlation, n) cell.

    ``grid`` holds the true correlations and ``null_values`` the tested
    ones. Rejection is reported at thresholds 0, ``log 1.65``, 2.3 nats and
    ``cfg.threshold_nats``. KL risk ``KL(truth || fitted)`` is reported for
    the hypothesis selected at ``cfg.threshold_nats`` (``*_selected``) and
    for the alternative alone (``*_alt``), each with ML and MML87 fits.
    """
    _check_n(cfg, 5)
    _check_rho_grid(cfg.grid)
    _check_rho_grid(cfg.null_values)
    blocks, redraws = _draw_blocks(cfg, "corr-table", max(cfg.n_values), _bivariate_ok(cfg.n_values))
    thresholds = sorted({0.0, LOG_1_65, SUBSTANTIAL, float(cfg.threshold_nats)})
    rows = []
    for rho0 in cfg.null_values:
        tag = f"rho0={rho0:+.2f}"
        for n in cfg.n_values:
            for rho in cfg.grid:
                r, mx, my, vx, vy = _sample_corr(blocks[:, :n], rho)
                gap = corr_codelength_difference(r, n, rho0)
                for thr in thresholds:
                    rows.append(_rate_row(f"{tag}:reject_mml[thr={_threshold_label(thr)}]", n, rho, gap > thr, cfg))
                alt = gap > cfg.threshold_nats
                one_m0 = 1.0 - rho0 * rho0
                fits = {
                    "ml": (1.0, r, (1.0 - rho0 * r) / one_m0),
                    "mml": (mml_variance_factor(r, n), mml_rho(r, n), n * (1.0 - rho0 * r) / ((n - 1.0) * one_m0)),
                }
                for label, (f_alt, rho_alt, f_null) in fits.items():
                    for kind, use_alt in (("alt", True), ("selected", alt)):
                        f = np.where(use_alt, f_alt, f_null)
                        rho_hat = np.where(use_alt, rho_alt, rho0)
                        kl = _kl_arrays(0.0, 0.0, 1.0, 1.0, rho, mx, my, np.sqrt(vx * f), np.sqrt(vy * f), rho_hat)
                        rows.append(_mean_row(f"{tag}:kl_{label}_{kind}", n, rho, kl, cfg))
    return RiskTable(rows, redraws)


EXPERIMENTS = {
    "delta-nmse": simulate_delta_nmse,
    "rho-mse": simulate_rho_mse,
    "type1": simulate_type1,
    "corr-table": simulate_corr_table,
}


def default_config(experiment: str, seed: int = 0, replicates: int = 10_000, **overrides) -> SimConfig:
    """Desk-scale configuration for a named experiment."""
    if experiment == "delta-nmse":
        base = dict(grid=np.linspace(0.1, 5.0, 25), n_values=(5, 10, 50))
    elif experiment == "rho-mse":
        base = dict(grid=np.round(np.linspace(-0.95, 0.95, 39), 10), n_values=(20, 50))
    elif experiment == "type1":
        base = dict(grid=(0.1, 0.25, 0.5, 1 / math.sqrt(2), 1.0, 2.0), n_values=(20,))
    elif experiment == "corr-table":
        base = dict(grid=(-0.75, -0.3, 0.0, 0.5), n_values=(15, 30), threshold_nats=LOG_1_65)
    else:
        raise KeyError(f"unknown experiment {experiment!r}")
    base.update(overrides)
    return SimConfig(seed=seed, replicates=replicates, **base)


def run_experiment(experiment: str, cfg: SimConfig) -> RiskTable:
    try:
        fn = EXPERIMENTS[experiment]
    except KeyError:
        raise KeyError(f"unknown experiment {experiment!r}") from None
    return fn(cfg)
