"""Orthogonal decomposition: exactness, orthogonality, identities."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from conftest import AB, binary_dist, make_pattern
from subseqstats.counting import count_subsequences
from subseqstats.decomposition import (
    coeff_c_general,
    decompose,
    identity_checks,
    phi,
    v_level,
)
from subseqstats.moments import binomial_exact, coeff_c_exact, sigma1_sq_exact
from subseqstats.source_model import SourceDist, Text


def all_binary_texts(n):
    for bits in itertools.product((0, 1), repeat=n):
        yield Text(np.asarray(bits, dtype=np.int8), AB)


def text_prob(dist, text):
    rats = dist.rational_probs()
    out = Fraction(1)
    for x in text.letters:
        out *= rats[int(x)]
    return out


def normalized_count(dist, text, pattern):
    z = count_subsequences(text, pattern).exact
    p_w = Fraction(1)
    rats = dist.rational_probs()
    for j in pattern.word:
        p_w *= rats[int(j)]
    return z / p_w


# ---- centered letter functions ---------------------------------------------


def test_phi_values_and_centering():
    dist = SourceDist(AB, (1.0 / 3.0, 2.0 / 3.0))
    assert phi(dist, 0, 0) == Fraction(2)  # 1/(1/3) - 1
    assert phi(dist, 0, 1) == Fraction(-1)
    assert phi(dist, 1, 1) == Fraction(1, 2)
    for a in range(2):
        rats = dist.rational_probs()
        mean = sum(rats[x] * phi(dist, a, x) for x in range(2))
        assert mean == 0


# ---- pinned-slot coefficients ----------------------------------------------


def test_coeff_c_general_level_one_matches_single_slot():
    n, m = 10, 4
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            assert coeff_c_general((i,), (j,), n, m) == coeff_c_exact(i, j, n, m)


def test_coeff_c_general_full_level_is_unit():
    n, m = 9, 4
    gamma = tuple(range(1, m + 1))
    for beta in itertools.combinations(range(1, n + 1), m):
        assert coeff_c_general(beta, gamma, n, m) == 1


def test_coeff_c_general_matches_enumeration():
    n, m, ell = 8, 3, 2
    for gamma in itertools.combinations(range(1, m + 1), ell):
        for beta in itertools.combinations(range(1, n + 1), ell):
            want = 0
            for alpha in itertools.combinations(range(1, n + 1), m):
                if all(alpha[g - 1] == b for g, b in zip(gamma, beta)):
                    want += 1
            assert coeff_c_general(beta, gamma, n, m) == want


def test_coeff_c_general_validation():
    with pytest.raises(ValueError):
        coeff_c_general((3, 2), (1, 2), 8, 3)  # beta not increasing
    with pytest.raises(ValueError):
        coeff_c_general((1, 2), (2, 1), 8, 3)  # gamma not increasing
    with pytest.raises(ValueError):
        coeff_c_general((1,), (1, 2), 8, 3)  # length mismatch


# ---- projection levels -----------------------------------------------------


def test_v_level_zero_is_binomial():
    dist = binary_dist(0.5)
    p = make_pattern("aba", dist)
    t = Text(np.zeros(7, dtype=np.int8), AB)
    assert v_level(t, dist, p, 0) == binomial_exact(7, 3)


def test_v_level_one_matches_direct_formula():
    dist = SourceDist(AB, (1.0 / 3.0, 2.0 / 3.0))
    p = make_pattern("aba", dist)
    rng = np.random.default_rng(5)
    for _ in range(10):
        t = Text(rng.integers(0, 2, size=9).astype(np.int8), AB)
        direct = sum(
            Fraction(coeff_c_exact(i, j, 9, 3)) * phi(dist, p.word[j - 1], int(t.letters[i - 1]))
            for i in range(1, 10)
            for j in range(1, 4)
        )
        assert v_level(t, dist, p, 1) == direct


def test_levels_sum_to_normalized_count():
    cases = [
        (binary_dist(0.5), "aba"),
        (SourceDist(AB, (1.0 / 3.0, 2.0 / 3.0)), "abb"),
    ]
    rng = np.random.default_rng(12)
    for dist, word in cases:
        p = make_pattern(word, dist)
        for _ in range(50):
            t = Text(rng.integers(0, 2, size=10).astype(np.int8), AB)
            total = sum(v_level(t, dist, p, ell) for ell in range(4))
            assert total == normalized_count(dist, t, p)


def test_decompose_report_residual_zero():
    dist = binary_dist(0.5)
    p = make_pattern("ab", dist)
    t = Text(np.asarray([0, 1, 0, 1], dtype=np.int8), AB)
    rep = decompose(t, dist, p)
    assert rep.count == 3
    assert rep.normalized_count == 12
    assert rep.residual == 0
    assert sum(rep.levels) == rep.normalized_count
    d = rep.to_dict()
    assert d["levels"] == ["6", "4", "2"]


def test_exhaustive_orthogonality():
    n = 6
    for dist in (binary_dist(0.5), SourceDist(AB, (1.0 / 3.0, 2.0 / 3.0))):
        p = make_pattern("ab", dist)
        moments = {}
        for ell in (1, 2):
            moments[ell] = []
        cross = Fraction(0)
        means = {1: Fraction(0), 2: Fraction(0)}
        for t in all_binary_texts(n):
            pt = text_prob(dist, t)
            v1 = v_level(t, dist, p, 1)
            v2 = v_level(t, dist, p, 2)
            means[1] += pt * v1
            means[2] += pt * v2
            cross += pt * v1 * v2
        assert means[1] == 0
        assert means[2] == 0
        assert cross == 0


def test_exhaustive_variance_of_first_level():
    n = 8
    dist = SourceDist(AB, (1.0 / 3.0, 2.0 / 3.0))
    p = make_pattern("aba", dist)
    var = Fraction(0)
    for t in all_binary_texts(n):
        v1 = v_level(t, dist, p, 1)
        var += text_prob(dist, t) * v1 * v1
    assert var == sigma1_sq_exact(dist, p, n)


def test_exhaustive_residual_variance_bound():
    # Var of the levels above 1 is at most B^2 m^2 C(n-1, m-1)^2
    n = 8
    dist = binary_dist(0.5)
    p = make_pattern("ab", dist)
    var = Fraction(0)
    for t in all_binary_texts(n):
        rest = normalized_count(dist, t, p) - v_level(t, dist, p, 0) - v_level(t, dist, p, 1)
        var += text_prob(dist, t) * rest * rest
    b = 1  # uniform binary: 1/min(p) - 1
    bound = b * b * p.length**2 * binomial_exact(n - 1, p.length - 1) ** 2
    assert var <= bound


def test_identity_checks():
    for n, m, ell in ((6, 3, 1), (9, 4, 2)):
        rep = identity_checks(n, m, ell)
        assert rep.all_ok
        assert rep.position_sum_target == binomial_exact(n, m)
        assert rep.slot_sum_target == binomial_exact(n - ell, m - ell)


def test_enumeration_guard():
    dist = binary_dist(0.5)
    p = make_pattern("ab" * 5, dist)
    t = Text(np.zeros(60, dtype=np.int8), AB)
    with pytest.raises(ValueError):
        v_level(t, dist, p, 5)
