"""Seeded Monte Carlo experiments for the count distribution dichotomy.

Two standardizations of the occurrence count Z are sampled over random
texts.  The normal route looks at S = (Z - E[Z]) / (p_w sigma_1), fully
in log space: S = expm1(ln Z - ln E[Z]) * exp(ln E[Z] - ln(p_w sigma_1)),
so no intermediate ever leaves double range.  The log-normal route, for
constant patterns a^m with m well below n p_a, looks at
T = (ln Z - ln C(n p_a, m)) / sqrt(b_n) with
b_n = n * ln(1 - m/(n p_a))^2 * p_a (1 - p_a).

Trial t always draws its text from the stream seed derived from
(master_seed, t), batches have a fixed size, and samples are written
sorted, so results are byte-identical for any worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.special import gammaln, ndtr
from scipy.stats import kurtosis, skew

from .counting import batched_ln_counts
from .moments import expected_count, log_binomial, sigma1_sq_normalized
from .source_model import (
    Alphabet,
    Pattern,
    SourceDist,
    batch_letters,
    derive_seed,
    generate_text,
)

BATCH_SIZE = 4096
KS_COEFF_5PCT = 1.358

# more than this fraction of zero-count trials marks a log-normal run non-conforming
ZERO_SKIP_LIMIT = 0.01

# the log-normal parameterization needs n p_a - m >= gap_factor * sqrt(n)
LOGNORMAL_GAP_FACTOR = 10.0


@dataclass(frozen=True)
class PatternSpec:
    """Pattern choice for an experiment: explicit word or a generator tag."""

    kind: str
    word: tuple[int, ...] | None = None
    symbol: int = 0
    m: int = 0
    pattern_seed: int = 0

    @classmethod
    def explicit(cls, word) -> "PatternSpec":
        return cls(kind="explicit", word=tuple(int(j) for j in word))

    @classmethod
    def constant(cls, symbol: int, m: int) -> "PatternSpec":
        return cls(kind="constant", symbol=symbol, m=m)

    @classmethod
    def alternating(cls, m: int) -> "PatternSpec":
        return cls(kind="alternating", m=m)

    @classmethod
    def random(cls, m: int, pattern_seed: int) -> "PatternSpec":
        return cls(kind="random", m=m, pattern_seed=pattern_seed)

    def resolve(self, dist: SourceDist) -> Pattern:
        if self.kind == "explicit":
            if not self.word:
                raise ValueError("explicit pattern spec has no word")
            return Pattern.from_indices(dist, self.word)
        if self.kind == "constant":
            if self.m < 1:
                raise ValueError("pattern length must be at least 1")
            return Pattern.from_indices(dist, (self.symbol,) * self.m)
        if self.kind == "alternating":
            if self.m < 1:
                raise ValueError("pattern length must be at least 1")
            if dist.alphabet.size < 2:
                raise ValueError("alternating pattern needs two symbols")
            return Pattern.from_indices(dist, tuple(j % 2 for j in range(self.m)))
        if self.kind == "random":
            if self.m < 1:
                raise ValueError("pattern length must be at least 1")
            drawn = generate_text(dist, self.m, derive_seed(self.pattern_seed, 0))
            return Pattern.from_indices(dist, drawn.letters)
        raise ValueError(f"unknown pattern spec kind {self.kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    dist: SourceDist
    pattern_spec: PatternSpec
    n: int
    trials: int
    master_seed: int
    regime: str
    standardization: str = "theoretical"
    zero_skip_limit: float = ZERO_SKIP_LIMIT
    gap_factor: float = LOGNORMAL_GAP_FACTOR

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.regime not in ("normal", "lognormal"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.standardization not in ("theoretical", "empirical"):
            raise ValueError(f"unknown standardization {self.standardization!r}")


@dataclass
class SimSummary:
    """Empirical diagnostics of one standardized-count experiment."""

    regime: str
    n: int
    m: int
    pattern: str
    standardization: str
    trials: int
    master_seed: int
    trials_used: int
    trials_skipped_zero: int
    skips_conforming: bool
    emp_mean: float
    emp_var: float
    skewness: float
    excess_kurtosis: float
    ks_stat: float | None
    ks_critical_5pct: float
    mean_rel_err: float
    var_rel_err: float
    pass_normality: bool

    def to_dict(self) -> dict:
        def clean(x):
            if x is None or (isinstance(x, float) and not math.isfinite(x)):
                return None
            return x

        return {
            "regime": self.regime,
            "n": self.n,
            "m": self.m,
            "pattern": self.pattern,
            "standardization": self.standardization,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "trials_used": self.trials_used,
            "trials_skipped_zero": self.trials_skipped_zero,
            "skips_conforming": self.skips_conforming,
            "emp_mean": clean(self.emp_mean),
            "emp_var": clean(self.emp_var),
            "skewness": clean(self.skewness),
            "excess_kurtosis": clean(self.excess_kurtosis),
            "ks_stat": clean(self.ks_stat),
            "ks_critical_5pct": self.ks_critical_5pct,
            "mean_rel_err": clean(self.mean_rel_err),
            "var_rel_err": clean(self.var_rel_err),
            "pass_normality": self.pass_normality,
        }


def ks_statistic(values: np.ndarray) -> float:
    """One-sample Kolmogorov statistic against the standard normal CDF."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("need at least one value")
    cdf = ndtr(x)
    up = np.arange(1, n + 1) / n - cdf
    down = cdf - np.arange(0, n) / n
    return float(max(up.max(), down.max()))


def ks_critical(trials: int) -> float:
    """Asymptotic 5% two-sided critical value."""
    return KS_COEFF_5PCT / math.sqrt(trials)


def _ln_binom_of_counts(counts: np.ndarray, m: int) -> np.ndarray:
    """ln C(counts, m) elementwise, -inf where counts < m."""
    out = np.full(counts.shape, -np.inf)
    ok = counts >= m
    if ok.any():
        c = counts[ok].astype(np.float64)
        out[ok] = gammaln(c + 1.0) - math.lgamma(m + 1) - gammaln(c - m + 1.0)
    return out


def collect_ln_counts(cfg: ExperimentConfig, pattern: Pattern, workers: int = 1) -> np.ndarray:
    """ln Z per trial (-inf for zero counts), invariant to the worker count."""
    const = pattern.is_constant
    symbol = pattern.word[0]
    m = pattern.length
    out = np.empty(cfg.trials)
    bounds = [
        (lo, min(lo + BATCH_SIZE, cfg.trials)) for lo in range(0, cfg.trials, BATCH_SIZE)
    ]

    def run_batch(span):
        lo, hi = span
        seeds = [derive_seed(cfg.master_seed, t) for t in range(lo, hi)]
        letters = batch_letters(cfg.dist, cfg.n, seeds)
        if const:
            counts = np.count_nonzero(letters == symbol, axis=1)
            return lo, hi, _ln_binom_of_counts(counts, m)
        return lo, hi, batched_ln_counts(letters, pattern.word)

    if workers <= 1:
        for span in bounds:
            lo, hi, lnz = run_batch(span)
            out[lo:hi] = lnz
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for lo, hi, lnz in pool.map(run_batch, bounds):
                out[lo:hi] = lnz
    return out


def _empirical_stats(values: np.ndarray):
    n = values.size
    mean = float(values.mean()) if n else math.nan
    if n >= 2:
        var = float(values.var(ddof=1))
        skw = float(skew(values))
        kur = float(kurtosis(values))
    else:
        var = skw = kur = math.nan
    return mean, var, skw, kur


def _write_outputs(out_dir, values: np.ndarray, summary: SimSummary) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["standardized_value"]
    lines.extend(repr(float(v)) for v in np.sort(values))
    (out / "samples.csv").write_text("\n".join(lines) + "\n")
    (out / "summary.json").write_text(
        json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n"
    )


def normal_scale_factors(dist: SourceDist, pattern: Pattern, n: int) -> tuple[float, float]:
    """(ln E[Z], ln(p_w sigma_1)) for the normal-route standardization."""
    ln_ez = expected_count(dist, pattern, n).ln_value()
    s1n = sigma1_sq_normalized(dist, pattern, n)
    if s1n <= 0.0:
        raise ValueError("sigma_1 is zero for this instance; nothing to standardize")
    ln_sigma1 = 0.5 * math.log(s1n) + log_binomial(n - 1, pattern.length - 1).ln_value()
    return ln_ez, pattern.log_pw + ln_sigma1


def summarize_normal(
    cfg: ExperimentConfig, pattern: Pattern, lnz: np.ndarray, out_dir=None
) -> SimSummary:
    """Diagnostics for S = (Z - E[Z]) / (p_w sigma_1) from collected ln counts."""
    ln_ez, ln_scale = normal_scale_factors(cfg.dist, pattern, cfg.n)
    factor = math.exp(ln_ez - ln_scale)
    # expm1 maps ln Z = -inf (zero count) to -1, so zero-count trials stay valid
    s_theo = np.expm1(lnz - ln_ez) * factor
    if cfg.standardization == "empirical":
        values = (s_theo - s_theo.mean()) / s_theo.std(ddof=1)
    else:
        values = s_theo
    mean, var, skw, kur = _empirical_stats(values)
    crit = ks_critical(cfg.trials)
    ks = ks_statistic(values) if cfg.trials >= 2 else None
    summary = SimSummary(
        regime="normal",
        n=cfg.n,
        m=pattern.length,
        pattern=pattern.to_string(),
        standardization=cfg.standardization,
        trials=cfg.trials,
        master_seed=cfg.master_seed,
        trials_used=int(values.size),
        trials_skipped_zero=0,
        skips_conforming=True,
        emp_mean=mean,
        emp_var=var,
        skewness=skw,
        excess_kurtosis=kur,
        ks_stat=ks,
        ks_critical_5pct=crit,
        mean_rel_err=float(np.expm1(lnz - ln_ez).mean()),
        var_rel_err=float(np.var(s_theo, ddof=1) - 1.0) if cfg.trials >= 2 else math.nan,
        pass_normality=(ks is not None and ks < crit),
    )
    if out_dir is not None:
        _write_outputs(out_dir, values, summary)
    return summary


def run_normal_experiment(
    cfg: ExperimentConfig, workers: int = 1, out_dir=None
) -> SimSummary:
    """Sample S = (Z - E[Z]) / (p_w sigma_1) and test it against N(0, 1)."""
    if cfg.regime != "normal":
        raise ValueError("config regime is not 'normal'")
    pattern = cfg.pattern_spec.resolve(cfg.dist)
    if cfg.n < pattern.length:
        raise ValueError("text length n must be at least the pattern length")
    lnz = collect_ln_counts(cfg, pattern, workers)
    return summarize_normal(cfg, pattern, lnz, out_dir)


def lognormal_parameters(n: int, m: int, p_a: float) -> tuple[float, float]:
    """(a_n, b_n): centering ln C(n p_a, m) and spread n ln(1 - m/(n p_a))^2 p_a (1 - p_a)."""
    np_a = n * p_a
    if not (m < np_a):
        raise ValueError("log-normal route needs m < n p_a")
    a_n = math.lgamma(np_a + 1.0) - math.lgamma(m + 1) - math.lgamma(np_a - m + 1.0)
    b_n = n * math.log1p(-m / np_a) ** 2 * p_a * (1.0 - p_a)
    return a_n, b_n


def summarize_lognormal(
    cfg: ExperimentConfig, pattern: Pattern, lnz: np.ndarray, out_dir=None
) -> SimSummary:
    """Diagnostics for T = (ln Z - a_n) / sqrt(b_n) from collected ln counts."""
    if not pattern.is_constant:
        raise ValueError("log-normal route requires a constant pattern a^m")
    n, m = cfg.n, pattern.length
    p_a = cfg.dist.probs[pattern.word[0]]
    a_n, b_n = lognormal_parameters(n, m, p_a)
    if n * p_a - m < cfg.gap_factor * math.sqrt(n):
        raise ValueError(
            f"log-normal route needs n p_a - m >= {cfg.gap_factor} sqrt(n); "
            f"got gap {n * p_a - m:.1f} vs {cfg.gap_factor * math.sqrt(n):.1f}"
        )
    keep = np.isfinite(lnz)
    used = lnz[keep]
    skipped = int(lnz.size - used.size)
    frac = skipped / lnz.size
    conforming = frac <= cfg.zero_skip_limit
    t_theo = (used - a_n) / math.sqrt(b_n)
    if cfg.standardization == "empirical" and used.size >= 2:
        values = (t_theo - t_theo.mean()) / t_theo.std(ddof=1)
    else:
        values = t_theo
    mean, var, skw, kur = _empirical_stats(values)
    crit = ks_critical(max(used.size, 1))
    ks = ks_statistic(values) if used.size >= 2 else None
    summary = SimSummary(
        regime="lognormal",
        n=n,
        m=m,
        pattern=pattern.to_string(),
        standardization=cfg.standardization,
        trials=cfg.trials,
        master_seed=cfg.master_seed,
        trials_used=int(used.size),
        trials_skipped_zero=skipped,
        skips_conforming=conforming,
        emp_mean=mean,
        emp_var=var,
        skewness=skw,
        excess_kurtosis=kur,
        ks_stat=ks,
        ks_critical_5pct=crit,
        mean_rel_err=(float(used.mean()) - a_n) / abs(a_n) if used.size else math.nan,
        var_rel_err=float(used.var(ddof=1)) / b_n - 1.0 if used.size >= 2 else math.nan,
        pass_normality=(ks is not None and ks < crit and conforming),
    )
    if out_dir is not None:
        _write_outputs(out_dir, values, summary)
    return summary


def run_lognormal_experiment(
    cfg: ExperimentConfig, workers: int = 1, out_dir=None
) -> SimSummary:
    """Sample T = (ln Z - ln C(n p_a, m)) / sqrt(b_n) for a constant pattern."""
    if cfg.regime != "lognormal":
        raise ValueError("config regime is not 'lognormal'")
    pattern = cfg.pattern_spec.resolve(cfg.dist)
    lnz = collect_ln_counts(cfg, pattern, workers)
    return summarize_lognormal(cfg, pattern, lnz, out_dir)


@dataclass(frozen=True)
class LasnReport:
    """Agreement of the two standardizations on one constant-pattern instance.

    When b_asym = (1/p_a - 1) m^2 / n is small the log route and the
    count route standardize to the same limit, so both KS statistics
    should clear the same critical value.
    """

    n: int
    m: int
    p_a: float
    trials: int
    b_asym: float
    equivalence_expected: bool
    ks_log_route: float
    ks_count_route: float
    ks_critical_5pct: float
    pass_log_route: bool
    pass_count_route: bool
    trials_skipped_zero: int


def lasn_consistency_check(
    n: int, m: int, p_a: float, trials: int, master_seed: int, workers: int = 1
) -> LasnReport:
    """Run both standardizations on shared constant-pattern samples."""
    if not (0.0 < p_a < 1.0):
        raise ValueError("p_a must lie strictly in (0, 1)")
    dist = SourceDist(Alphabet.from_string("ab"), (p_a, 1.0 - p_a))
    cfg = ExperimentConfig(
        dist=dist,
        pattern_spec=PatternSpec.constant(0, m),
        n=n,
        trials=trials,
        master_seed=master_seed,
        regime="lognormal",
    )
    pattern = cfg.pattern_spec.resolve(dist)
    a_n, b_n = lognormal_parameters(n, m, p_a)
    ln_ez, ln_scale = normal_scale_factors(dist, pattern, n)
    lnz = collect_ln_counts(cfg, pattern, workers)
    keep = np.isfinite(lnz)
    used = lnz[keep]
    skipped = int(lnz.size - used.size)
    t_log = (used - a_n) / math.sqrt(b_n)
    s_count = np.expm1(lnz - ln_ez) * math.exp(ln_ez - ln_scale)
    ks_log = ks_statistic(t_log)
    ks_count = ks_statistic(s_count)
    crit = ks_critical(trials)
    b_asym = (1.0 / p_a - 1.0) * m * m / n
    return LasnReport(
        n=n,
        m=m,
        p_a=p_a,
        trials=trials,
        b_asym=b_asym,
        equivalence_expected=b_asym <= 0.1,
        ks_log_route=ks_log,
        ks_count_route=ks_count,
        ks_critical_5pct=crit,
        pass_log_route=ks_log < crit,
        pass_count_route=ks_count < crit,
        trials_skipped_zero=skipped,
    )


def rerun_with_seed(cfg: ExperimentConfig, master_seed: int) -> ExperimentConfig:
    """Same experiment, different master seed."""
    return replace(cfg, master_seed=master_seed)
