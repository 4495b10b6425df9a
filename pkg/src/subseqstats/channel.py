"""Mutual information of the i.i.d. deletion channel via occurrence counts.

A binary input of length n passes a memoryless channel that deletes each
letter independently with probability d.  The output is a subsequence of
the input, and the channel law is governed by occurrence counts:
P(output = z | input = x) = Z_x(z) * d^(n-|z|) * (1-d)^|z|, with Z_x(z)
the number of occurrences of z as a subsequence of x.  Grouping the
mutual information by output word gives

    I = sum_w d^(n-|w|) (1-d)^|w| * (E[Z ln Z] - E[Z] ln E[Z]),

with Z = Z_X(w) over the random input X and the convention 0 ln 0 = 0.
The module evaluates that identity from exact count tables and, as an
independent route, evaluates H(output) - H(output | input) by direct
subset enumeration of the channel law; both are exact up to float
rounding and must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from .counting import batched_ln_counts
from .source_model import Pattern, SourceDist, batch_letters, derive_seed

# exact enumeration walks all 2^n inputs and their 2^n subsets
ENUM_N_LIMIT = 12


@dataclass(frozen=True)
class ChannelConfig:
    """Binary i.i.d. source of length n feeding a deletion channel."""

    dist: SourceDist
    n: int
    d: float

    def __post_init__(self):
        if self.dist.alphabet.size != 2:
            raise ValueError("deletion-channel analysis supports binary sources only")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not (0.0 < self.d < 1.0):
            raise ValueError("deletion probability d must lie strictly in (0, 1)")


def _check_enum(n: int) -> None:
    if n > ENUM_N_LIMIT:
        raise ValueError(
            f"exact channel enumeration supports n <= {ENUM_N_LIMIT}, got {n}"
        )


@lru_cache(maxsize=4)
def _count_tables(n: int):
    """For every binary input of length n, the map output -> occurrence count."""
    texts = list(product((0, 1), repeat=n))
    tables = []
    for x in texts:
        counts: dict = {}
        for k in range(n + 1):
            for subset in combinations(range(n), k):
                z = tuple(x[i] for i in subset)
                counts[z] = counts.get(z, 0) + 1
        tables.append(counts)
    return texts, tables


def _text_probs(cfg: ChannelConfig, texts) -> np.ndarray:
    p0, p1 = cfg.dist.probs
    out = np.empty(len(texts))
    for idx, x in enumerate(texts):
        ones = sum(x)
        out[idx] = p1**ones * p0 ** (len(x) - ones)
    return out


def exact_mutual_information_via_counts(cfg: ChannelConfig) -> float:
    """I in nats through the count-moment identity, grouped by output word."""
    _check_enum(cfg.n)
    texts, tables = _count_tables(cfg.n)
    px = _text_probs(cfg, texts)
    e_z: dict = {}
    e_zlnz: dict = {}
    for p, counts in zip(px, tables):
        for z, cnt in counts.items():
            e_z[z] = e_z.get(z, 0.0) + p * cnt
            if cnt > 1:
                e_zlnz[z] = e_zlnz.get(z, 0.0) + p * cnt * math.log(cnt)
    g = [cfg.d ** (cfg.n - k) * (1.0 - cfg.d) ** k for k in range(cfg.n + 1)]
    total = 0.0
    for z, ez in e_z.items():
        total += g[len(z)] * (e_zlnz.get(z, 0.0) - ez * math.log(ez))
    return total


def exact_mutual_information_direct(cfg: ChannelConfig) -> float:
    """I in nats as H(output) - H(output | input), law built subset by subset."""
    _check_enum(cfg.n)
    n = cfg.n
    g = [cfg.d ** (n - k) * (1.0 - cfg.d) ** k for k in range(n + 1)]
    texts = list(product((0, 1), repeat=n))
    px = _text_probs(cfg, texts)
    h_out_given_in = 0.0
    p_out: dict = {}
    for p, x in zip(px, texts):
        law: dict = {}
        for k in range(n + 1):
            mass = g[k]
            for subset in combinations(range(n), k):
                z = tuple(x[i] for i in subset)
                law[z] = law.get(z, 0.0) + mass
        h_row = -sum(pz * math.log(pz) for pz in law.values())
        h_out_given_in += p * h_row
        for z, pz in law.items():
            p_out[z] = p_out.get(z, 0.0) + p * pz
    h_out = -sum(pz * math.log(pz) for pz in p_out.values())
    return h_out - h_out_given_in


def conditional_row_sums(cfg: ChannelConfig) -> np.ndarray:
    """Total conditional mass per input; every entry must be 1."""
    _check_enum(cfg.n)
    texts, tables = _count_tables(cfg.n)
    g = [cfg.d ** (cfg.n - k) * (1.0 - cfg.d) ** k for k in range(cfg.n + 1)]
    sums = np.empty(len(texts))
    for idx, counts in enumerate(tables):
        sums[idx] = sum(cnt * g[len(z)] for z, cnt in counts.items())
    return sums


@dataclass(frozen=True)
class McMoments:
    """Monte Carlo estimates of E[Z] and E[Z ln Z] for one output word.

    ``e_z_ln`` carries the first moment on the log scale (-inf when the
    estimate is zero), which stays meaningful when E[Z] itself would
    crowd the top of the double range.
    """

    trials: int
    e_z: float
    e_z_ln: float
    e_z_stderr: float
    e_z_ln_z: float
    e_z_ln_z_stderr: float


def mc_count_moment(
    dist: SourceDist, pattern: Pattern, n: int, trials: int, master_seed: int
) -> McMoments:
    """Estimate the two count moments by sampling texts.

    Meant for moderate n where the moments fit doubles; the per-trial
    seeding matches the simulation engine, so estimates are reproducible
    for a fixed master seed.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if n < pattern.length:
        # every text gives Z = 0
        return McMoments(trials, 0.0, -math.inf, 0.0, 0.0, 0.0)
    z_sum = 0.0
    z_sq = 0.0
    zl_sum = 0.0
    zl_sq = 0.0
    batch = 4096
    for lo in range(0, trials, batch):
        hi = min(lo + batch, trials)
        seeds = [derive_seed(master_seed, t) for t in range(lo, hi)]
        letters = batch_letters(dist, n, seeds)
        lnz = batched_ln_counts(letters, pattern.word)
        finite = np.isfinite(lnz)
        z = np.where(finite, np.exp(lnz), 0.0)
        zl = z * np.where(finite, lnz, 0.0)
        z_sum += float(z.sum())
        z_sq += float((z * z).sum())
        zl_sum += float(zl.sum())
        zl_sq += float((zl * zl).sum())
    mean_z = z_sum / trials
    mean_zl = zl_sum / trials
    var_z = max(z_sq / trials - mean_z**2, 0.0)
    var_zl = max(zl_sq / trials - mean_zl**2, 0.0)
    return McMoments(
        trials=trials,
        e_z=mean_z,
        e_z_ln=math.log(mean_z) if mean_z > 0.0 else -math.inf,
        e_z_stderr=math.sqrt(var_z / trials),
        e_z_ln_z=mean_zl,
        e_z_ln_z_stderr=math.sqrt(var_zl / trials),
    )


@dataclass(frozen=True)
class McMutualInformation:
    trials: int
    mi: float
    stderr: float


def mc_mutual_information(cfg: ChannelConfig, trials: int, master_seed: int) -> McMutualInformation:
    """Monte Carlo estimate of I in nats, one (input, output) draw per trial.

    With P(z | x) = Z_x(z) d^(n-|z|) (1-d)^|z| and the output marginal
    P(z) = E[Z(z)] d^(n-|z|) (1-d)^|z|, the deletion weights cancel in
    the information density, leaving ln Z_x(z) - ln E[Z(z)] per sampled
    pair.  Each trial costs one count DP, so this route has no n cap.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    from .counting import count_subsequences
    from .moments import log_binomial
    from .source_model import Text

    n = cfg.n
    total = 0.0
    total_sq = 0.0
    for t in range(trials):
        gen = np.random.Generator(np.random.PCG64(derive_seed(master_seed, t)))
        letters = _sample_letters(cfg.dist, n, gen)
        kept = letters[gen.random(n) >= cfg.d]
        if kept.size == 0:
            continue  # empty output carries zero information density
        pat = Pattern.from_indices(cfg.dist, (int(v) for v in kept))
        ln_z = count_subsequences(Text(letters, cfg.dist.alphabet), pat, mode="float").log_value.ln_value()
        ln_ez = log_binomial(n, kept.size).ln_value() + pat.log_pw
        val = ln_z - ln_ez
        total += val
        total_sq += val * val
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0)
    return McMutualInformation(trials, mean, math.sqrt(var / trials))


def _sample_letters(dist: SourceDist, n: int, gen: np.random.Generator) -> np.ndarray:
    probs = np.asarray(dist.probs)
    return np.searchsorted(np.cumsum(probs), gen.random(n), side="right").astype(np.int8)


def nats_to_bits(value: float) -> float:
    return value / math.log(2.0)
