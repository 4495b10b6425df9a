"""Occurrence counts of a pattern as a subsequence of a text.

The count Z is the number of increasing index tuples at which the text
spells the pattern.  The exact route runs the standard prefix dynamic
program over big integers; the float route runs the same recurrence in
doubles with periodic rescaling so only the log of the count is trusted.
A subset-enumeration brute force serves as an independent oracle for
small instances, and constant patterns reduce to a binomial of the
letter count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lognum import LogNum
from .source_model import Pattern, Text

# instances with C(n, m) above this are rejected by the brute-force oracle
BRUTE_FORCE_LIMIT = 10_000_000

# float DP rescales whenever a state entry exceeds this
_RESCALE_LIMIT = 1e300
_RESCALE_FACTOR = 1e-280
_RESCALE_LN = math.log(1e280)


@dataclass(frozen=True)
class CountValue:
    """Occurrence count with a log-space companion.

    ``exact`` is None when only the float route was run.  When both are
    present they agree: ln(exact) == log_value.ln_abs to float precision.
    """

    exact: int | None
    log_value: LogNum


def _check_compatible(text: Text, pattern: Pattern) -> None:
    if text.alphabet is not None:
        if text.alphabet != pattern.alphabet:
            raise ValueError("text and pattern use different alphabets")
    elif text.length and int(text.letters.max()) >= pattern.alphabet.size:
        raise ValueError("text letter index out of pattern alphabet range")


def _positions_by_letter(word: tuple[int, ...]):
    """Pattern slots grouped by letter, each group in descending slot order.

    Descending order lets the in-place DP update read the previous
    state of slot j-1 before it is touched in the same step.
    """
    by = {}
    for j in range(len(word), 0, -1):
        by.setdefault(word[j - 1], []).append(j)
    return by


def count_subsequences(text: Text, pattern: Pattern, mode: str = "exact") -> CountValue:
    """Count occurrences of the pattern as a subsequence of the text.

    mode "exact" uses big integers; mode "float" runs in doubles with
    rescaling and reports only the log of the count.
    """
    _check_compatible(text, pattern)
    m = pattern.length
    if mode == "exact":
        state = [0] * (m + 1)
        state[0] = 1
        by = _positions_by_letter(pattern.word)
        for x in text.letters.tolist():
            js = by.get(x)
            if js:
                for j in js:
                    state[j] += state[j - 1]
        z = state[m]
        return CountValue(z, LogNum.from_int(z))
    if mode == "float":
        state = [0.0] * (m + 1)
        state[0] = 1.0
        shift = 0.0
        by = _positions_by_letter(pattern.word)
        for step, x in enumerate(text.letters.tolist()):
            js = by.get(x)
            if js:
                for j in js:
                    state[j] += state[j - 1]
            if (step & 31) == 31 and max(state) > _RESCALE_LIMIT:
                state = [v * _RESCALE_FACTOR for v in state]
                shift += _RESCALE_LN
        z = state[m]
        if z == 0.0:
            return CountValue(None, LogNum.zero())
        return CountValue(None, LogNum.from_ln(math.log(z) + shift))
    raise ValueError(f"unknown mode {mode!r}")


def brute_force_count(text: Text, pattern: Pattern) -> int:
    """Count by enumerating all index subsets; oracle for small instances."""
    from itertools import combinations

    _check_compatible(text, pattern)
    n, m = text.length, pattern.length
    total = math.comb(n, m)
    if total > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f"C({n}, {m}) = {total} subsets exceeds the brute-force limit of "
            f"{BRUTE_FORCE_LIMIT}"
        )
    letters = text.letters.tolist()
    word = list(pattern.word)
    count = 0
    for combo in combinations(range(n), m):
        if all(letters[i] == w for i, w in zip(combo, word)):
            count += 1
    return count


def constant_pattern_count(text: Text, symbol: int, m: int) -> CountValue:
    """Count for the constant pattern symbol^m: C(#occurrences of symbol, m)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if symbol < 0:
        raise ValueError("symbol index must be nonnegative")
    n_sym = int(np.count_nonzero(text.letters == symbol))
    z = math.comb(n_sym, m)
    return CountValue(z, LogNum.from_int(z))


def batched_ln_counts(texts: np.ndarray, word) -> np.ndarray:
    """log occurrence counts for a stack of texts, -inf where the count is 0.

    ``texts`` is a (batch, n) integer array; the recurrence is vectorized
    across the batch with per-row rescaling, so results are identical
    however the rows are grouped.
    """
    word = tuple(int(j) for j in word)
    mm = len(word)
    batch, n = texts.shape
    state = np.zeros((batch, mm + 1))
    state[:, 0] = 1.0
    shift = np.zeros(batch)
    letters_used = sorted(set(word))
    for i in range(n):
        col = texts[:, i]
        eq = {a: (col == a).astype(np.float64) for a in letters_used}
        for j in range(mm, 0, -1):
            state[:, j] += state[:, j - 1] * eq[word[j - 1]]
        if (i & 15) == 15:
            mx = state.max(axis=1)
            hot = mx > _RESCALE_LIMIT
            if hot.any():
                state[hot] *= _RESCALE_FACTOR
                shift[hot] += _RESCALE_LN
    with np.errstate(divide="ignore"):
        lnz = np.log(state[:, mm])
    return lnz + shift
