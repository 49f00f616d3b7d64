import itertools
import math

import numpy as np
import pytest

from patspec.asymptotics import (
    BandKernel,
    MCConfig,
    band_toeplitz_hankel_moment,
    balanced_sign_count,
    count_pi_exact,
    hankel_limit_moment,
    jump_moment_check,
    pi_limit,
    profile_limit_moment,
    rc_limit_moment,
    richardson_extrapolate,
    sc_limit_moment,
    toeplitz_limit_moment,
    word_info,
)
from patspec.combin import classify, enumerate_partitions, word_of
from patspec.entries import ConstFn, MomentProfile, iid_profile, constant_profile
from patspec.errors import CapacityError
from patspec.patterns import Pattern, link_value

RC = Pattern.REVERSE_CIRCULANT
SC = Pattern.SYMMETRIC_CIRCULANT
T = Pattern.TOEPLITZ
H = Pattern.HANKEL


# --- brute-force oracle ------------------------------------------------------

def brute_count(word, pattern, n):
    """Direct enumeration of circuits over [1..n]^L with the exact
    equal-iff-same-letter matching condition."""
    L = len(word)
    total = 0
    for pi in itertools.product(range(1, n + 1), repeat=L):
        circ = (pi[-1],) + pi  # closure pi(0) = pi(L)
        vals = [link_value(pattern, n, circ[i - 1], circ[i]) for i in range(1, L + 1)]
        ok = True
        for i in range(L):
            for j in range(i + 1, L):
                if (word[i] == word[j]) != (vals[i] == vals[j]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            total += 1
    return total


@pytest.mark.parametrize("n", [4, 5])
@pytest.mark.parametrize(
    "word", ["aa", "ab", "aba", "abb", "aaa", "aabb", "abab", "abba", "aaaa", "aabc"]
)
def test_count_matches_brute_force(word, n):
    for pattern in Pattern:
        assert count_pi_exact(word, pattern, n).count == brute_count(word, pattern, n)


def test_count_matches_brute_force_longer_words_even_n():
    # even n exercises the self-negating step values (0 and n/2)
    for word in ("aabab", "aabbcc", "abcabc", "aaaaaa"):
        for pattern in Pattern:
            assert count_pi_exact(word, pattern, 6).count == brute_count(word, pattern, 6)


def test_count_aa_is_n_squared_every_pattern():
    for pattern in Pattern:
        for n in (7, 16):
            res = count_pi_exact("aa", pattern, n)
            assert res.count == n * n
            assert res.normalized == pytest.approx(1.0)


def test_count_closed_forms():
    # propagation forces pi(2) = pi(0) = pi(4); the cross-letter inequality
    # removes a 1/n fraction, leaving n^2 (n-1) exactly
    for n in (10, 25, 64):
        assert count_pi_exact("aabb", H, n).count == n**3 - n**2
        assert count_pi_exact("aabb", RC, n).count == n**3 - n**2


def test_toeplitz_abab_near_two_thirds():
    res = count_pi_exact("abab", T, 100)
    assert abs(res.normalized - 2.0 / 3.0) < 0.05


def test_hankel_abab_vanishes():
    # the closure equation collapses the two letter values onto each other
    res = count_pi_exact("abab", H, 100)
    assert res.normalized <= 2.0 / 100


def test_count_capacity_error():
    with pytest.raises(CapacityError):
        count_pi_exact("abcabc", T, 4000)


def test_normalized_counts_bounded():
    for word in ("aabb", "abab", "abba", "aaaa", "ababab"):
        k = len(word)
        for pattern in Pattern:
            res = count_pi_exact(word, pattern, 64)
            assert res.normalized <= 2.0**k


def test_rc_symmetric_word_deficit_is_order_one_over_n():
    # |normalized - 1| <= C/n with a small C, fitted over doubling n
    for word in ("abba", "aabb", "abccba"):
        cs = []
        for n in (32, 64, 128, 256):
            res = count_pi_exact(word, RC, n)
            cs.append(n * abs(res.normalized - 1.0))
        assert max(cs) <= 10.0, (word, cs)


def test_sc_even_word_converges_to_sign_set_product():
    for word in ("aabb", "aaaa", "aabbcc"):
        target = balanced_sign_count(word_info(word))
        res = count_pi_exact(word, SC, 128)
        assert abs(res.normalized - target) <= 10.0 / 128, word


# --- word limits -------------------------------------------------------------

def test_pi_limit_circulant_closed_forms():
    assert pi_limit("abba", RC).value == 1.0
    assert pi_limit("abab", RC).value == 0.0  # even but not symmetric
    assert pi_limit("aaaa", SC).value == 3.0  # C(3, 2)
    assert pi_limit("ababab", SC).value == 0.0  # letters appear 3 times: odd
    assert pi_limit("aabbcc", SC).value == 1.0
    assert pi_limit("abbbba", SC).value == 3.0  # C(1,1) * C(3,2)
    assert pi_limit("aab", SC).value == 0.0


def test_pi_limit_unmatched_and_odd_words_are_zero():
    for pattern in Pattern:
        assert pi_limit("abc", pattern).value == 0.0
        assert pi_limit("aab", pattern).value == 0.0
        assert pi_limit("aabbc", pattern).value == 0.0


def quad2d_abab_volume(grid=2000):
    """Oracle for the toeplitz abab volume: reduce to a 2-d integral over the
    first two vertex gaps a = x0+u1, b = x0+u2 in [0,1]^2 with the third
    constraint 0 <= a + b - x0 <= 1, i.e. volume = E[min(a+b,1) - max(a+b-1,0)]."""
    xs = (np.arange(grid) + 0.5) / grid
    a, b = np.meshgrid(xs, xs, indexing="ij")
    s = a + b
    return float(np.mean(np.minimum(s, 1.0) - np.maximum(s - 1.0, 0.0)))


def test_pi_limit_toeplitz_abab():
    oracle = quad2d_abab_volume()
    assert oracle == pytest.approx(2.0 / 3.0, abs=1e-5)
    lim = pi_limit("abab", T, MCConfig(samples=400_000, seed=3))
    assert abs(lim.value - 2.0 / 3.0) < 3 * lim.se + 1e-3


def test_pi_limit_hankel_aabb_is_exactly_one():
    lim = pi_limit("aabb", H, MCConfig(samples=50_000, seed=3))
    assert lim.value == 1.0
    assert lim.se == 0.0


def test_pi_limit_hankel_in_unit_interval():
    for k in (2, 4, 6):
        for p in enumerate_partitions(k):
            if not classify(p).symmetric:
                continue
            lim = pi_limit(word_of(p), H, MCConfig(samples=20_000, seed=4))
            assert 0.0 < lim.value <= 1.0 + 3 * lim.se


def test_toeplitz_limits_agree_with_exact_count_extrapolation():
    mc = MCConfig(samples=100_000, seed=9)
    for k in (2, 4, 6):
        for p in enumerate_partitions(k):
            if not classify(p).even:
                continue
            word = word_of(p)
            n = 100 if p.b <= 2 else 32
            f1 = count_pi_exact(word, T, n).normalized
            f2 = count_pi_exact(word, T, 2 * n).normalized
            extrap = richardson_extrapolate(f1, f2)
            fit_err = abs(f2 - f1) / 2 + 2e-3
            lim = pi_limit(word, T, mc)
            assert abs(lim.value - extrap) <= 3 * (lim.se + fit_err), (word, lim.value, extrap)


# --- circulant limit moments -------------------------------------------------

def test_rc_limit_moment_unit_variance_factorials():
    C = np.zeros(11)
    C[2] = 1.0
    want = {2: 1.0, 4: 2.0, 6: 6.0, 8: 24.0, 10: 120.0}
    for k, val in want.items():
        assert rc_limit_moment(C, k).beta == val
    assert rc_limit_moment(C, 3).beta == 0.0
    assert rc_limit_moment(C, 7).beta == 0.0


def test_rc_limit_moment_sparse_oracle():
    # brute force over S(4): two balanced pair partitions and the full block
    lam = 3.0
    C = np.full(5, lam)
    C[0] = 0.0
    got = rc_limit_moment(C, 4)
    brute = 0.0
    for p in enumerate_partitions(4):
        if classify(p).symmetric:
            brute += lam ** p.b
    assert got.beta == pytest.approx(brute) == pytest.approx(2 * lam**2 + lam)
    assert got.beta == pytest.approx(sum(t.value for t in got.terms))


def test_sc_limit_moment_values():
    C = np.zeros(9)
    C[2] = 1.0
    for k, val in ((2, 1.0), (4, 3.0), (6, 15.0), (8, 105.0)):
        assert sc_limit_moment(C, k).beta == val
    ones = np.ones(5)
    ones[0] = 0.0
    assert sc_limit_moment(ones, 4).beta == pytest.approx(3.0 + 3.0)  # pairs + a_4


def test_limit_moment_errors():
    C = np.zeros(3)
    C[2] = 1.0
    with pytest.raises(IndexError):
        rc_limit_moment(C, 4)
    with pytest.raises(CapacityError):
        rc_limit_moment(np.zeros(20), 12)


# --- toeplitz / hankel Monte-Carlo moments ------------------------------------

def test_toeplitz_beta4():
    rep = toeplitz_limit_moment(iid_profile(4), 4, MCConfig(samples=500_000, seed=11))
    # exact polytope volumes: aabb -> 1, abba -> 1, abab -> 2/3
    assert abs(rep.beta - 8.0 / 3.0) < 3 * rep.se + 2e-3
    assert toeplitz_limit_moment(iid_profile(5), 5, MCConfig(samples=100)).beta == 0.0


def test_toeplitz_beta2_exact():
    rep = toeplitz_limit_moment(iid_profile(2), 2, MCConfig(samples=1000, seed=1))
    assert rep.beta == 1.0
    assert rep.se == 0.0


def test_hankel_beta4_exact_two():
    rep = hankel_limit_moment(iid_profile(4), 4, MCConfig(samples=50_000, seed=11))
    assert rep.beta == 2.0
    assert rep.se == 0.0
    rep = hankel_limit_moment(iid_profile(2), 2, MCConfig(samples=1000, seed=1))
    assert rep.beta == 1.0


def test_moment_dominance_constant_profiles():
    # hankel <= reverse circulant and toeplitz <= symmetric circulant,
    # orderwise, for g identically 1 at every stored order
    mc = MCConfig(samples=60_000, seed=13)
    ones = np.ones(9)
    ones[0] = 0.0
    for k in (2, 4, 6, 8):
        g = constant_profile(ones, k)
        h = hankel_limit_moment(g, k, mc)
        r = rc_limit_moment(ones, k)
        assert h.beta <= r.beta + 3 * h.se, k
        t = toeplitz_limit_moment(g, k, mc)
        s = sc_limit_moment(ones, k)
        assert t.beta <= s.beta + 3 * t.se, k


def test_sign_set_capacity():
    mc = MCConfig(samples=100, sign_set_cap=2)
    with pytest.raises(CapacityError):
        pi_limit("aaaa", T, mc)  # needs C(3,2) = 3 sign sets


# --- profile and band moments --------------------------------------------------

def test_profile_limit_moment_linear_sigma():
    C = np.zeros(5)
    C[2] = 1.0
    alpha = np.zeros(5)
    alpha[2] = 1.0 / 3.0
    alpha[4] = 1.0 / 5.0
    assert profile_limit_moment(RC, alpha, C, 2).beta == pytest.approx(1.0 / 3.0)
    assert profile_limit_moment(RC, alpha, C, 4).beta == pytest.approx(2.0 / 9.0)
    assert profile_limit_moment(RC, alpha, C, 3).beta == 0.0


def test_profile_limit_moment_band_identity():
    # type I band at alpha = 1/2 with entries scaled by the bandwidth:
    # alpha * C_2 = 1 reproduces the full reverse circulant moments
    C = np.zeros(5)
    C[2] = 2.0
    alpha = np.full(5, 0.5)
    full = np.zeros(5)
    full[2] = 1.0
    assert profile_limit_moment(RC, alpha, C, 4).beta == rc_limit_moment(full, 4).beta == 2.0


def test_profile_limit_moment_sc_single_block():
    C = np.zeros(3)
    C[2] = 1.5
    alpha = np.zeros(3)
    alpha[2] = 0.2
    # a_2 * (2 alpha_2) * C_2
    assert profile_limit_moment(SC, alpha, C, 2).beta == pytest.approx(2 * 0.2 * 1.5)


def test_band1_alpha_one_equals_unmasked_toeplitz():
    C = np.zeros(5)
    C[2] = 1.0
    mc = MCConfig(samples=200_000, seed=17)
    full = toeplitz_limit_moment(iid_profile(4), 4, mc)
    banded = band_toeplitz_hankel_moment(T, BandKernel("band1", 1.0), C, 4, mc)
    assert banded.beta == pytest.approx(full.beta, abs=1e-12)


def test_band2_hankel_alpha_one_covers_everything():
    C = np.zeros(3)
    C[2] = 1.7
    rep = band_toeplitz_hankel_moment(H, BandKernel("band2", 1.0), C, 2, MCConfig(samples=10_000, seed=18))
    assert rep.beta == pytest.approx(1.7)
    assert rep.se <= 1e-8  # constant integrand up to float accumulation


def test_triangular_hankel_second_moment_is_half():
    # exact 2-simplex area oracle: vol{x + y <= 1} on the unit square = 1/2
    C = np.zeros(3)
    C[2] = 1.0
    rep = band_toeplitz_hankel_moment(H, BandKernel("tri"), C, 2, MCConfig(samples=400_000, seed=19))
    assert abs(rep.beta - 0.5) < 3 * rep.se + 1e-3


def test_triangular_sc_second_moment_is_half():
    C = np.zeros(3)
    C[2] = 1.0
    rep = band_toeplitz_hankel_moment(SC, BandKernel("tri"), C, 2, MCConfig(samples=400_000, seed=20))
    assert abs(rep.beta - 0.5) < 3 * rep.se + 1e-3


# --- jump distribution ---------------------------------------------------------

def test_jump_moments_match_binomial_halves():
    rng = np.random.default_rng(23)
    for order, want in ((2, 1.0), (4, 3.0), (6, 10.0)):
        mean, se = jump_moment_check(order, 1_000_000, rng)
        assert abs(mean - want) < 3 * se, order
    for order in (1, 3, 5):
        mean, se = jump_moment_check(order, 1_000_000, rng)
        assert abs(mean) < 3 * se, order


def test_limit_moments_cross_check_class_counts():
    # unit-variance C picks out exactly the pair partitions, so the moments
    # must equal the class-count tables
    from patspec.combin import class_counts

    C = np.zeros(11)
    C[2] = 1.0
    for k in range(1, 6):
        cc = class_counts(2 * k)
        assert rc_limit_moment(C, 2 * k).beta == cc.symmetric_by_blocks.get(k, 0)
        assert sc_limit_moment(C, 2 * k).beta == cc.even_by_blocks.get(k, 0)
