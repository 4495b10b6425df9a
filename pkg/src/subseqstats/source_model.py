"""Alphabet, source distribution, pattern and text types plus seeded generation.

Text letters are i.i.d. draws from a fixed distribution over a finite
alphabet.  Symbols are handled as integer indices internally; strings
appear only at construction and display time.  Generation is driven by a
per-stream seed so that a master seed plus a trial index always yields
the same text regardless of how trials are grouped into batches or
spread over workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, stream_index: int) -> int:
    """Map (master seed, stream index) to a 64-bit stream seed.

    SplitMix64 finalizer on master + index * golden-ratio increment.
    Distinct indices give well-spread seeds even for master seeds that
    differ by small amounts.
    """
    if stream_index < 0:
        raise ValueError("stream_index must be nonnegative")
    x = (master_seed + (stream_index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of single-character symbols."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 2:
            raise ValueError("alphabet needs at least 2 symbols")
        if any(len(s) != 1 for s in self.symbols):
            raise ValueError("symbols must be single characters")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("symbols must be distinct")

    @classmethod
    def from_string(cls, s: str) -> "Alphabet":
        return cls(tuple(s))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, ch: str) -> int:
        try:
            return self.symbols.index(ch)
        except ValueError:
            raise ValueError(f"symbol {ch!r} not in alphabet {''.join(self.symbols)!r}") from None

    def to_indices(self, s: str) -> tuple[int, ...]:
        return tuple(self.index(ch) for ch in s)

    def to_string(self, indices) -> str:
        return "".join(self.symbols[i] for i in indices)


@dataclass(frozen=True)
class SourceDist:
    """Letter distribution with all probabilities strictly inside (0, 1)."""

    alphabet: Alphabet
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != self.alphabet.size:
            raise ValueError("probs length must match alphabet size")
        if any(not (0.0 < p < 1.0) for p in self.probs):
            raise ValueError("each probability must lie strictly in (0, 1)")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(self.probs)!r}, not 1")

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "SourceDist":
        k = alphabet.size
        return cls(alphabet, tuple(1.0 / k for _ in range(k)))

    @property
    def min_prob(self) -> float:
        return min(self.probs)

    @property
    def b_const(self) -> float:
        """1/min_a p_a - 1, the scale constant in the variance bounds."""
        return 1.0 / self.min_prob - 1.0

    def rational_probs(self, max_denominator: int = 10**6) -> tuple[Fraction, ...]:
        """Rational rendering of the probabilities for exact arithmetic.

        Each probability is rationalized independently; the results must
        sum to exactly 1 or the rendering is rejected, since exact-route
        identities are meaningless under an inconsistent rationalization.
        """
        rats = tuple(Fraction(p).limit_denominator(max_denominator) for p in self.probs)
        if sum(rats) != 1:
            raise ValueError(
                "rationalized probabilities do not sum to 1 exactly; "
                "supply probabilities with small exact denominators"
            )
        return rats


@dataclass(frozen=True)
class Pattern:
    """Fixed pattern word over an alphabet, with its match probability.

    ``log_pw`` is the log-probability that m independent letters spell
    the word, i.e. the sum of letter log-probabilities.  ``symbol_counts``
    holds, per alphabet symbol, the number of pattern positions using it.
    """

    alphabet: Alphabet
    word: tuple[int, ...]
    log_pw: float
    symbol_counts: tuple[int, ...]

    @classmethod
    def from_indices(cls, dist: SourceDist, word) -> "Pattern":
        word = tuple(int(j) for j in word)
        if len(word) == 0:
            raise ValueError("pattern must be nonempty")
        k = dist.alphabet.size
        if any(not (0 <= j < k) for j in word):
            raise ValueError("pattern letter index out of alphabet range")
        counts = [0] * k
        for j in word:
            counts[j] += 1
        log_pw = sum(math.log(dist.probs[j]) for j in word)
        return cls(dist.alphabet, word, log_pw, tuple(counts))

    @classmethod
    def from_string(cls, dist: SourceDist, s: str) -> "Pattern":
        return cls.from_indices(dist, dist.alphabet.to_indices(s))

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def is_constant(self) -> bool:
        return len(set(self.word)) == 1

    def proportions(self) -> tuple[Fraction, ...]:
        """Per-symbol usage frequencies q_a = (# positions using a) / m."""
        m = self.length
        return tuple(Fraction(c, m) for c in self.symbol_counts)

    def to_string(self) -> str:
        return self.alphabet.to_string(self.word)


@dataclass(eq=False)
class Text:
    """Letter sequence as an int8 index array, optionally tagged with its alphabet."""

    letters: np.ndarray
    alphabet: Alphabet | None = None

    def __post_init__(self):
        arr = np.asarray(self.letters, dtype=np.int8)
        if arr.ndim != 1:
            raise ValueError("letters must be one-dimensional")
        if arr.size and arr.min() < 0:
            raise ValueError("letter indices must be nonnegative")
        if self.alphabet is not None and arr.size and arr.max() >= self.alphabet.size:
            raise ValueError("letter index out of alphabet range")
        arr.flags.writeable = False
        self.letters = arr

    @classmethod
    def from_string(cls, s: str, alphabet: Alphabet) -> "Text":
        return cls(np.array(alphabet.to_indices(s), dtype=np.int8), alphabet)

    @property
    def length(self) -> int:
        return int(self.letters.size)

    def to_string(self) -> str:
        if self.alphabet is None:
            raise ValueError("text has no alphabet attached")
        return self.alphabet.to_string(self.letters)


# ---- sampling --------------------------------------------------------

# alphabets up to this size use inverse-CDF search; larger ones an alias table
_SCAN_MAX = 4


def _alias_tables(probs):
    """Vose alias construction; deterministic for a fixed probs tuple."""
    k = len(probs)
    accept = np.zeros(k)
    alias = np.zeros(k, dtype=np.int64)
    scaled = [p * k for p in probs]
    small = [i for i, s in enumerate(scaled) if s < 1.0]
    large = [i for i, s in enumerate(scaled) if s >= 1.0]
    while small and large:
        lo = small.pop()
        hi = large.pop()
        accept[lo] = scaled[lo]
        alias[lo] = hi
        scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0
        if scaled[hi] < 1.0:
            small.append(hi)
        else:
            large.append(hi)
    for i in large:
        accept[i] = 1.0
        alias[i] = i
    for i in small:
        # only reachable through rounding; total mass is conserved
        accept[i] = 1.0
        alias[i] = i
    return accept, alias


def _sample_indices(dist: SourceDist, n: int, rng: np.random.Generator) -> np.ndarray:
    k = dist.alphabet.size
    u = rng.random(n)
    if k <= _SCAN_MAX:
        cum = np.cumsum(np.asarray(dist.probs))
        idx = np.searchsorted(cum, u, side="right")
        np.minimum(idx, k - 1, out=idx)
    else:
        accept, alias = _alias_tables(dist.probs)
        v = u * k
        idx = v.astype(np.int64)
        np.minimum(idx, k - 1, out=idx)
        frac = v - idx
        idx = np.where(frac < accept[idx], idx, alias[idx])
    return idx.astype(np.int8)


def generate_text(dist: SourceDist, n: int, seed: int) -> Text:
    """Draw n i.i.d. letters; same (dist, n, seed) always gives the same text."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    return Text(_sample_indices(dist, n, rng), dist.alphabet)


def batch_letters(dist: SourceDist, n: int, stream_seeds) -> np.ndarray:
    """Stack texts for several stream seeds into a (len(seeds), n) int8 array.

    Each row is generated from its own PCG64 stream, so the rows do not
    depend on how the seeds were grouped into batches.
    """
    seeds = list(stream_seeds)
    out = np.empty((len(seeds), n), dtype=np.int8)
    for row, s in enumerate(seeds):
        rng = np.random.Generator(np.random.PCG64(int(s)))
        out[row] = _sample_indices(dist, n, rng)
    return out


def proportion_distance(pattern: Pattern, dist: SourceDist) -> float:
    """Euclidean distance between pattern letter proportions and source probs."""
    if pattern.alphabet != dist.alphabet:
        raise ValueError("pattern and distribution use different alphabets")
    q = pattern.proportions()
    return math.sqrt(sum((float(qa) - pa) ** 2 for qa, pa in zip(q, dist.probs)))
