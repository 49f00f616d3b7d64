"""Exact circuit counting and all limiting spectral quantities.

A circuit of length L on an n x n patterned matrix is a map
pi: {0..L} -> {1..n} with pi(0) = pi(L); a word of length L fixes which
circuit edges must carry equal input indices (same letter) and which must
differ (different letters).  Pi(word) is the set of circuits matching that
equality pattern exactly, and |Pi(word)| / n^(b+1) (b = distinct letters)
converges pattern by pattern:

    reverse circulant    1 for symmetric words, else 0
    symmetric circulant  prod_i C(k_i - 1, k_i / 2) for even words, else 0
    toeplitz             sum over balanced sign sets of a polytope volume
    hankel               one polytope volume, in (0, 1], for symmetric words

Exact counts enumerate edge values rather than vertices: a circuit is
determined by pi(0) plus one input index per letter class together with, for
the Delta=2 patterns, one sign per repeat occurrence.  The pi(0) dimension
always reduces to a closed form (a free factor n, a congruence-solution
count, or an integer window), so the work is O(values^b * sign sets), fully
vectorised.  Circuits realising several sign assignments at once (zero or
self-negating steps) are counted once via explicit guards.

Limit moments follow the same split: closed-form partition sums for the
circulant patterns, Monte-Carlo polytope integrals for toeplitz/hankel, with
per-(partition, sign set) RNG streams derived from one master seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .combin import (
    KCAP_DEFAULT,
    Partition,
    a_coefficient,
    classify,
    enumerate_partitions,
    partition_of,
    word_of,
)
from .entries import ConstFn, IndicatorFn, MomentProfile, ProfileFn
from .errors import CapacityError, ConfigError
from .patterns import Pattern

#: Cap on enumeration cells (edge-value combinations x sign sets) per count.
DEFAULT_COUNT_BUDGET = 600_000_000

_PATTERN_CODE = {
    Pattern.REVERSE_CIRCULANT: 1,
    Pattern.SYMMETRIC_CIRCULANT: 2,
    Pattern.TOEPLITZ: 3,
    Pattern.HANKEL: 4,
}


@dataclass(frozen=True)
class MCConfig:
    """Monte-Carlo budget and reproducibility knobs.

    Each (partition, sign set) integral runs on its own stream derived from
    the master seed, so term-level results are reproducible and independent
    of evaluation order.
    """

    samples: int = 1_000_000
    seed: int = 0
    sign_set_cap: int = 10_000
    chunk: int = 1 << 19


# ---------------------------------------------------------------------------
# word structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordInfo:
    word: str
    length: int
    labels: tuple[int, ...]  # class of position i at labels[i-1]
    b: int
    first_pos: tuple[int, ...]  # 1-based first occurrence per class
    occurrences: tuple[tuple[int, ...], ...]
    sizes: tuple[int, ...]  # occurrences per class, in class order
    even: bool
    symmetric: bool


def word_info(word: str) -> WordInfo:
    p = partition_of(word)
    cls = classify(p)
    labels = p.rgs
    b = p.b
    occ: list[list[int]] = [[] for _ in range(b)]
    for pos, r in enumerate(labels, start=1):
        occ[r].append(pos)
    return WordInfo(
        word=word,
        length=len(labels),
        labels=labels,
        b=b,
        first_pos=tuple(o[0] for o in occ),
        occurrences=tuple(tuple(o) for o in occ),
        sizes=tuple(len(o) for o in occ),
        even=cls.even,
        symmetric=cls.symmetric,
    )


def balanced_sign_count(info: WordInfo) -> int:
    """Number of balanced sign sets: prod over classes of C(k_i-1, k_i/2)."""
    total = 1
    for k in info.sizes:
        if k % 2 != 0:
            return 0
        total *= math.comb(k - 1, k // 2)
    return total


def balanced_sign_sets(info: WordInfo):
    """Yield per-position sign vectors (index 0 unused) with the first
    occurrence of each class fixed +1 and equal +/- counts per class."""
    per_class = []
    for j in range(info.b):
        rest = info.occurrences[j][1:]
        minus = info.sizes[j] // 2
        per_class.append(list(itertools.combinations(rest, minus)))
    for combo in itertools.product(*per_class):
        signs = [0] * (info.length + 1)
        for pos in range(1, info.length + 1):
            signs[pos] = 1
        for chosen in combo:
            for pos in chosen:
                signs[pos] = -1
        yield tuple(signs)


def _all_sign_sets(info: WordInfo):
    """Every sign assignment with first occurrences fixed +1 (exact counts)."""
    per_class = [info.occurrences[j][1:] for j in range(info.b)]
    flat = [pos for rest in per_class for pos in rest]
    for bits in itertools.product((1, -1), repeat=len(flat)):
        signs = [1] * (info.length + 1)
        for pos, s in zip(flat, bits):
            signs[pos] = s
        yield tuple(signs)


# ---------------------------------------------------------------------------
# exact circuit counts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiCountResult:
    word: str
    pattern: Pattern
    n: int
    count: int
    b: int

    @property
    def normalized(self) -> float:
        return self.count / float(self.n) ** (self.b + 1)


def _value_axis(pattern: Pattern, n: int) -> tuple[int, int]:
    """(number of candidate edge values, smallest value) per class."""
    if pattern in (Pattern.REVERSE_CIRCULANT, Pattern.SYMMETRIC_CIRCULANT):
        return n, 0  # residues mod n
    if pattern is Pattern.TOEPLITZ:
        return 2 * n - 1, -(n - 1)  # exact differences
    return 2 * n - 1, 2  # hankel: exact sums


def _chunks(total: int, size: int):
    start = 0
    while start < total:
        yield start, min(start + size, total)
        start = start + size


def _decode(start: int, stop: int, b: int, n_vals: int, offset: int) -> list[np.ndarray]:
    """Mixed-radix decode of combo indices into per-class value arrays."""
    idx = np.arange(start, stop, dtype=np.int64)
    vals = []
    for j in range(b):
        stride = n_vals ** (b - 1 - j)
        vals.append(offset + (idx // stride) % n_vals)
    return vals


def _distinct_mask(pattern: Pattern, n: int, vals: list[np.ndarray]) -> np.ndarray:
    if pattern is Pattern.SYMMETRIC_CIRCULANT:
        links = [np.minimum(v, n - v) for v in vals]
    elif pattern is Pattern.TOEPLITZ:
        links = [np.abs(v) for v in vals]
    else:
        links = vals
    mask = np.ones(vals[0].shape, dtype=bool)
    for a in range(len(vals)):
        for c in range(a + 1, len(vals)):
            mask &= links[a] != links[c]
    return mask


def _alternating_coeffs(info: WordInfo) -> np.ndarray:
    """Rows Q_0..Q_L of the recursion Q_i = e_{class(i)} - Q_{i-1}.

    For additive links (reverse circulant mod n, hankel exact) every vertex
    satisfies pi(i) = (-1)^i pi(0) + Q_i . values.
    """
    rows = np.zeros((info.length + 1, info.b), dtype=np.int64)
    for i in range(1, info.length + 1):
        rows[i] = -rows[i - 1]
        rows[i, info.labels[i - 1]] += 1
    return rows


def _selfneg_values(pattern: Pattern, n: int) -> list[int]:
    """Edge values equal to their own negation (sign choice is moot)."""
    if pattern is Pattern.TOEPLITZ:
        return [0]
    vals = [0]
    if n % 2 == 0:
        vals.append(n // 2)
    return vals


def count_pi_exact(
    word: str,
    pattern: Pattern,
    n: int,
    budget: int = DEFAULT_COUNT_BUDGET,
    chunk: int = 1 << 20,
) -> PiCountResult:
    """Exact |Pi(word)|: circuits whose equality pattern matches the word,
    with equal link values on same letters and distinct values across letters.

    Work is (candidate values)^b x (sign sets); a CapacityError reports the
    cell count when it exceeds the budget.  Unmatched and odd-length words
    are legal inputs.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    info = word_info(word)
    n_vals, offset = _value_axis(pattern, n)
    signed = pattern in (Pattern.SYMMETRIC_CIRCULANT, Pattern.TOEPLITZ)
    n_eps = 2 ** (info.length - info.b) if signed else 1
    cells = n_vals**info.b * n_eps
    if cells > budget:
        raise CapacityError(
            f"count_pi_exact({word!r}, {pattern.short}, n={n}) needs {cells:.3g} "
            f"cells > budget {budget:.3g}"
        )

    total = 0
    if pattern is Pattern.REVERSE_CIRCULANT:
        coeff = _alternating_coeffs(info)[info.length]
        const = 2 * int(coeff.sum())  # link = (i + j - 2) mod n shifts values by 2
        for start, stop in _chunks(n_vals**info.b, chunk):
            vals = _decode(start, stop, info.b, n_vals, offset)
            mask = _distinct_mask(pattern, n, vals)
            q = np.full(vals[0].shape, const, dtype=np.int64)
            for j in range(info.b):
                q += coeff[j] * vals[j]
            q %= n
            if info.length % 2 == 0:
                total += n * int(np.count_nonzero(mask & (q == 0)))
            elif n % 2 == 1:
                total += int(np.count_nonzero(mask))  # unique pi(0) per combo
            else:
                total += 2 * int(np.count_nonzero(mask & (q % 2 == 0)))

    elif pattern is Pattern.SYMMETRIC_CIRCULANT:
        selfneg = _selfneg_values(pattern, n)
        for signs in _all_sign_sets(info):
            c = np.zeros(info.b, dtype=np.int64)
            allplus = [True] * info.b
            for pos in range(1, info.length + 1):
                j = info.labels[pos - 1]
                c[j] += signs[pos]
                if signs[pos] < 0:
                    allplus[j] = False
            for start, stop in _chunks(n_vals**info.b, chunk):
                vals = _decode(start, stop, info.b, n_vals, offset)
                mask = _distinct_mask(pattern, n, vals)
                for j in range(info.b):
                    if not allplus[j]:
                        for v in selfneg:
                            mask &= vals[j] != v
                q = np.zeros(vals[0].shape, dtype=np.int64)
                for j in range(info.b):
                    q += c[j] * vals[j]
                total += n * int(np.count_nonzero(mask & (q % n == 0)))

    elif pattern is Pattern.TOEPLITZ:
        for signs in _all_sign_sets(info):
            prefix = np.zeros((info.length + 1, info.b), dtype=np.int64)
            allplus = [True] * info.b
            for pos in range(1, info.length + 1):
                j = info.labels[pos - 1]
                prefix[pos] = prefix[pos - 1]
                prefix[pos, j] += signs[pos]
                if signs[pos] < 0:
                    allplus[j] = False
            for start, stop in _chunks(n_vals**info.b, chunk):
                vals = _decode(start, stop, info.b, n_vals, offset)
                mask = _distinct_mask(pattern, n, vals)
                for j in range(info.b):
                    if not allplus[j]:
                        mask &= vals[j] != 0
                hi = np.zeros(vals[0].shape, dtype=np.int64)
                lo = np.zeros(vals[0].shape, dtype=np.int64)
                last = None
                for i in range(1, info.length + 1):
                    p_i = np.zeros(vals[0].shape, dtype=np.int64)
                    for j in range(info.b):
                        if prefix[i, j]:
                            p_i += prefix[i, j] * vals[j]
                    np.maximum(hi, p_i, out=hi)
                    np.minimum(lo, p_i, out=lo)
                    last = p_i
                mask &= last == 0  # circuit closes
                width = n - (hi - lo)
                total += int(np.where(mask, np.maximum(width, 0), 0).sum())

    else:  # hankel
        qcoef = _alternating_coeffs(info)
        for start, stop in _chunks(n_vals**info.b, chunk):
            vals = _decode(start, stop, info.b, n_vals, offset)
            mask = _distinct_mask(pattern, n, vals)
            lo = np.ones(vals[0].shape, dtype=np.int64)
            hi = np.full(vals[0].shape, n, dtype=np.int64)
            q_last = None
            for i in range(1, info.length + 1):
                q_i = np.zeros(vals[0].shape, dtype=np.int64)
                for j in range(info.b):
                    if qcoef[i, j]:
                        q_i += qcoef[i, j] * vals[j]
                if i % 2 == 0:
                    np.maximum(lo, 1 - q_i, out=lo)
                    np.minimum(hi, n - q_i, out=hi)
                else:
                    np.maximum(lo, q_i - n, out=lo)
                    np.minimum(hi, q_i - 1, out=hi)
                q_last = q_i
            if info.length % 2 == 0:
                mask &= q_last == 0
                width = hi - lo + 1
                total += int(np.where(mask, np.maximum(width, 0), 0).sum())
            else:
                mask &= q_last % 2 == 0
                x = q_last // 2
                mask &= (x >= lo) & (x <= hi)
                total += int(np.count_nonzero(mask))

    return PiCountResult(word=word, pattern=pattern, n=n, count=total, b=info.b)


def richardson_extrapolate(f_n: float, f_2n: float) -> float:
    """Two-point fit in 1/n: the O(1/n) finite-size deficit cancels."""
    return 2.0 * f_2n - f_n


# ---------------------------------------------------------------------------
# Monte-Carlo word integrals
# ---------------------------------------------------------------------------


def _term_rng(mc: MCConfig, pattern: Pattern, k: int, part_idx: int, sign_idx: int):
    seq = np.random.SeedSequence((mc.seed, _PATTERN_CODE[pattern], k, part_idx, sign_idx))
    return np.random.default_rng(seq)


def _mc_word_integral(
    info: WordInfo,
    pattern: Pattern,
    signs: tuple[int, ...] | None,
    rng: np.random.Generator,
    samples: int,
    chunk: int,
    g_fns: list[ProfileFn] | None = None,
    triangular: bool = False,
) -> tuple[float, float]:
    """Mean and stderr of prod_j g_{k_j}(edge arg) x feasibility indicator.

    Generating vertices are sampled uniformly on [0,1]; non-generating ones
    propagate linearly (toeplitz: +- the class step; hankel: class sum minus
    the previous vertex; symmetric circulant: the class step mod 1).  The
    indicator requires every propagated vertex to stay inside [0,1]
    (automatic for the circulant mod-1 case) and, when ``triangular`` is
    set, every edge to satisfy v_{i-1} + v_i <= 1.
    """
    first = set(info.first_pos)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        v = [None] * (info.length + 1)
        v[0] = rng.random(m)
        ok = np.ones(m, dtype=bool)
        step: dict[int, np.ndarray] = {}
        for i in range(1, info.length + 1):
            j = info.labels[i - 1]
            if i in first:
                v[i] = rng.random(m)
                if pattern is Pattern.TOEPLITZ:
                    step[j] = v[i] - v[i - 1]
                elif pattern is Pattern.SYMMETRIC_CIRCULANT:
                    step[j] = (v[i] - v[i - 1]) % 1.0
            else:
                if pattern is Pattern.TOEPLITZ:
                    v[i] = v[i - 1] + signs[i] * step[j]
                    ok &= (v[i] >= 0.0) & (v[i] <= 1.0)
                elif pattern is Pattern.HANKEL:
                    a = info.first_pos[j]
                    v[i] = v[a - 1] + v[a] - v[i - 1]
                    ok &= (v[i] >= 0.0) & (v[i] <= 1.0)
                else:  # symmetric circulant, wraps
                    v[i] = (v[i - 1] + signs[i] * step[j]) % 1.0
        weight = np.ones(m)
        if g_fns:
            for j in range(info.b):
                a = info.first_pos[j]
                if pattern is Pattern.TOEPLITZ:
                    arg = np.abs(v[a - 1] - v[a])
                elif pattern is Pattern.HANKEL:
                    arg = v[a - 1] + v[a]
                else:
                    raise ConfigError("profile-weighted integrals need toeplitz/hankel")
                weight = weight * g_fns[j](arg)
        if triangular:
            for i in range(1, info.length + 1):
                ok &= v[i - 1] + v[i] <= 1.0
        sample_vals = np.where(ok, weight, 0.0)
        total += float(sample_vals.sum())
        total_sq += float((sample_vals**2).sum())
        done += m
    mean = total / samples
    if samples > 1:
        var = max(total_sq / samples - mean**2, 0.0) * samples / (samples - 1)
        se = math.sqrt(var / samples)
    else:
        se = 0.0
    return mean, se


@dataclass(frozen=True)
class PiLimitResult:
    word: str
    pattern: Pattern
    value: float
    se: float
    sign_sets: int


def pi_limit(word: str, pattern: Pattern, mc: MCConfig = MCConfig()) -> PiLimitResult:
    """Limit of |Pi(word)| / n^(b+1) with its Monte-Carlo stderr.

    Closed form (stderr 0) for the circulant patterns; Monte-Carlo polytope
    volumes summed over balanced sign sets for toeplitz, one volume for
    hankel.  Non-even / non-symmetric (in particular unmatched or odd) words
    give exactly 0.
    """
    info = word_info(word)
    if pattern is Pattern.REVERSE_CIRCULANT:
        return PiLimitResult(word, pattern, 1.0 if info.symmetric else 0.0, 0.0, 0)
    if pattern is Pattern.SYMMETRIC_CIRCULANT:
        val = float(balanced_sign_count(info)) if info.even else 0.0
        return PiLimitResult(word, pattern, val, 0.0, 0)
    if pattern is Pattern.TOEPLITZ:
        if not info.even:
            return PiLimitResult(word, pattern, 0.0, 0.0, 0)
        n_sets = balanced_sign_count(info)
        if n_sets > mc.sign_set_cap:
            raise CapacityError(
                f"word {word!r} needs {n_sets} sign sets > cap {mc.sign_set_cap}"
            )
        value = 0.0
        var = 0.0
        for sidx, signs in enumerate(balanced_sign_sets(info)):
            rng = _term_rng(mc, pattern, info.length, 0, sidx)
            mean, se = _mc_word_integral(
                info, pattern, signs, rng, mc.samples, mc.chunk
            )
            value += mean
            var += se**2
        return PiLimitResult(word, pattern, value, math.sqrt(var), n_sets)
    # hankel
    if not info.symmetric:
        return PiLimitResult(word, pattern, 0.0, 0.0, 0)
    rng = _term_rng(mc, pattern, info.length, 0, 0)
    mean, se = _mc_word_integral(info, pattern, None, rng, mc.samples, mc.chunk)
    return PiLimitResult(word, pattern, mean, se, 1)


# ---------------------------------------------------------------------------
# limit moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentTerm:
    block_sizes: tuple[int, ...]
    value: float
    se: float = 0.0
    count: int = 1  # partitions aggregated (closed forms) or sign sets (MC)
    word: str | None = None

    def as_dict(self) -> dict:
        out = {
            "block_sizes": list(self.block_sizes),
            "value": self.value,
            "se": self.se,
            "count": self.count,
        }
        if self.word is not None:
            out["word"] = self.word
        return out


@dataclass(frozen=True)
class LimitMomentReport:
    pattern: Pattern
    k: int
    beta: float
    se: float
    terms: tuple[MomentTerm, ...]
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "pattern": self.pattern.short,
            "k": self.k,
            "beta": self.beta,
            "se": self.se,
            "terms": [t.as_dict() for t in self.terms],
            "config": self.config,
        }


def _zero_report(pattern: Pattern, k: int, config: dict) -> LimitMomentReport:
    return LimitMomentReport(pattern, k, 0.0, 0.0, (), config)


def _check_order(k: int, kcap: int) -> None:
    if k < 1:
        raise ValueError(f"moment order must be >= 1, got {k}")
    if k > kcap:
        raise CapacityError(f"moment order {k} exceeds kcap {kcap}")


def _closed_moment(
    pattern: Pattern,
    k: int,
    weight_fn,
    kcap: int,
    config: dict,
    symmetric_only: bool,
) -> LimitMomentReport:
    """Sum weight_fn(block sizes) over S(k) or E(k), grouped by size multiset."""
    if k % 2 == 1:
        return _zero_report(pattern, k, config)
    _check_order(k, kcap)
    groups: dict[tuple[int, ...], tuple[int, float]] = {}
    for p in enumerate_partitions(k, kcap=kcap):
        cls = classify(p)
        if symmetric_only and not cls.symmetric:
            continue
        if not symmetric_only and not cls.even:
            continue
        sizes = p.block_sizes()
        cnt, _ = groups.get(sizes, (0, 0.0))
        groups[sizes] = (cnt + 1, weight_fn(sizes))
    terms = []
    beta = 0.0
    for sizes in sorted(groups, key=lambda s: (len(s), s)):
        cnt, per = groups[sizes]
        value = cnt * per
        beta += value
        terms.append(MomentTerm(block_sizes=sizes, value=value, count=cnt))
    return LimitMomentReport(pattern, k, beta, 0.0, tuple(terms), config)


def rc_limit_moment(C, k: int, kcap: int = KCAP_DEFAULT) -> LimitMomentReport:
    """beta_k for the reverse circulant limit: sum over symmetric partitions
    of the multiplicative extension of C (odd k gives 0)."""

    def weight(sizes):
        out = 1.0
        for s in sizes:
            if s >= len(C):
                raise IndexError(f"C defined up to order {len(C) - 1}, need C_{s}")
            out *= C[s]
        return out

    return _closed_moment(
        Pattern.REVERSE_CIRCULANT, k, weight, kcap, {"C": list(np.asarray(C, dtype=float))},
        symmetric_only=True,
    )


def sc_limit_moment(C, k: int, kcap: int = KCAP_DEFAULT) -> LimitMomentReport:
    """beta_k for the symmetric circulant limit: sum over even partitions of
    a_sigma C_sigma with block weights a_{2m} = C(2m, m)/2."""

    def weight(sizes):
        out = 1.0
        for s in sizes:
            if s >= len(C):
                raise IndexError(f"C defined up to order {len(C) - 1}, need C_{s}")
            out *= a_coefficient(s) * C[s]
        return out

    return _closed_moment(
        Pattern.SYMMETRIC_CIRCULANT, k, weight, kcap,
        {"C": list(np.asarray(C, dtype=float))},
        symmetric_only=False,
    )


def profile_limit_moment(
    pattern: Pattern, alpha, C, k: int, kcap: int = KCAP_DEFAULT
) -> LimitMomentReport:
    """Variance-profile moments for the circulant patterns.

    rc: sum over S(k) of prod alpha_{k_j} C_{k_j};
    sc: sum over E(k) of prod a_{k_j} (2 alpha_{k_j}) C_{k_j},

    where alpha_{2m} is the profile power average appropriate to the pattern
    (see entries.alpha_sequence: full-range for rc, half-range for sc).
    """
    if pattern not in (Pattern.REVERSE_CIRCULANT, Pattern.SYMMETRIC_CIRCULANT):
        raise ConfigError("profile_limit_moment applies to rc/sc")

    def weight(sizes):
        out = 1.0
        for s in sizes:
            if s >= len(C) or s >= len(alpha):
                raise IndexError(f"alpha/C defined below block size {s}")
            if pattern is Pattern.REVERSE_CIRCULANT:
                out *= alpha[s] * C[s]
            else:
                out *= a_coefficient(s) * 2.0 * alpha[s] * C[s]
        return out

    return _closed_moment(
        pattern, k, weight, kcap,
        {"alpha": list(np.asarray(alpha, dtype=float)), "C": list(np.asarray(C, dtype=float))},
        symmetric_only=pattern is Pattern.REVERSE_CIRCULANT,
    )


def _mc_partition_moment(
    pattern: Pattern,
    k: int,
    mc: MCConfig,
    kcap: int,
    config: dict,
    g_of_sizes,
    const_of_sizes,
    triangular: bool,
    symmetric_only: bool,
) -> LimitMomentReport:
    """Shared Monte-Carlo moment: sum over partitions and sign sets of
    polytope integrals, per-term stderrs aggregated in quadrature."""
    if k % 2 == 1:
        return _zero_report(pattern, k, config)
    _check_order(k, kcap)
    use_signs = pattern in (Pattern.TOEPLITZ, Pattern.SYMMETRIC_CIRCULANT)
    beta = 0.0
    var = 0.0
    terms = []
    for pidx, p in enumerate(enumerate_partitions(k, kcap=kcap)):
        cls = classify(p)
        if symmetric_only and not cls.symmetric:
            continue
        if not symmetric_only and not cls.even:
            continue
        word = word_of(p)
        info = word_info(word)
        g_fns = g_of_sizes(info.sizes)
        if g_fns is None:  # a zero factor kills the whole term
            continue
        const = const_of_sizes(info.sizes)
        if const == 0.0:
            continue
        if use_signs:
            n_sets = balanced_sign_count(info)
            if n_sets > mc.sign_set_cap:
                raise CapacityError(
                    f"partition {word} needs {n_sets} sign sets > cap {mc.sign_set_cap}"
                )
            sign_iter = balanced_sign_sets(info)
        else:
            n_sets = 1
            sign_iter = [None]
        term_val = 0.0
        term_var = 0.0
        for sidx, signs in enumerate(sign_iter):
            rng = _term_rng(mc, pattern, k, pidx, sidx)
            mean, se = _mc_word_integral(
                info, pattern, signs, rng, mc.samples, mc.chunk,
                g_fns=g_fns, triangular=triangular,
            )
            term_val += const * mean
            term_var += (const * se) ** 2
        beta += term_val
        var += term_var
        terms.append(
            MomentTerm(
                block_sizes=p.block_sizes(),
                value=term_val,
                se=math.sqrt(term_var),
                count=n_sets,
                word=word,
            )
        )
    return LimitMomentReport(pattern, k, beta, math.sqrt(var), tuple(terms), config)


def toeplitz_limit_moment(
    g: MomentProfile, k: int, mc: MCConfig = MCConfig(), kcap: int = KCAP_DEFAULT
) -> LimitMomentReport:
    """beta_k of the toeplitz limit: over even partitions and balanced sign
    sets, Monte-Carlo integrals of prod g_{k_j}(|x_{m_j} - x_{l_j}|) times the
    in-range indicator on [0,1]^(b+1).  Odd k gives 0."""

    def g_fns(sizes):
        fns = [g.fn(s) for s in sizes]
        if any(fn.is_zero for fn in fns):
            return None
        return fns

    return _mc_partition_moment(
        Pattern.TOEPLITZ, k, mc, kcap, {"kind": "toeplitz"},
        g_fns, lambda sizes: 1.0, triangular=False, symmetric_only=False,
    )


def hankel_limit_moment(
    g: MomentProfile, k: int, mc: MCConfig = MCConfig(), kcap: int = KCAP_DEFAULT
) -> LimitMomentReport:
    """beta_k of the hankel limit: over symmetric partitions, Monte-Carlo
    integrals of prod g_{k_j}(x_{m_j} + x_{l_j}) (arguments in [0,2]) times
    the in-range indicator."""

    def g_fns(sizes):
        fns = [g.fn(s) for s in sizes]
        if any(fn.is_zero for fn in fns):
            return None
        return fns

    return _mc_partition_moment(
        Pattern.HANKEL, k, mc, kcap, {"kind": "hankel"},
        g_fns, lambda sizes: 1.0, triangular=False, symmetric_only=True,
    )


@dataclass(frozen=True)
class BandKernel:
    """Multiplicative kernel for banded/triangular toeplitz-hankel moments."""

    kind: str  # band1 | band2 | tri
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("band1", "band2", "tri"):
            raise ConfigError(f"unknown kernel kind {self.kind!r}")
        if self.kind in ("band1", "band2"):
            if self.alpha is None or not 0.0 < self.alpha <= 1.0:
                raise ConfigError("band kernels need alpha in (0, 1]")


def _band_indicator(pattern: Pattern, kernel: BandKernel, height: float) -> ProfileFn:
    a = kernel.alpha
    if kernel.kind == "band1":
        return IndicatorFn(0.0, a, height)
    if pattern is Pattern.HANKEL:
        return IndicatorFn(1.0 - a, 1.0 + a, height)
    # toeplitz type II on |i-j|/n: small or wrapped-large differences
    if a >= 0.5:
        return ConstFn(height)
    return _UnionIndicator(((0.0, a), (1.0 - a, 1.0)), height)


@dataclass(frozen=True)
class _UnionIndicator(ProfileFn):
    intervals: tuple[tuple[float, float], ...]
    height: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        keep = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            keep |= (x >= lo) & (x <= hi)
        return np.where(keep, self.height, 0.0)

    @property
    def is_zero(self):
        return self.height == 0.0


def band_toeplitz_hankel_moment(
    pattern: Pattern,
    kernel: BandKernel,
    C,
    k: int,
    mc: MCConfig = MCConfig(),
    kcap: int = KCAP_DEFAULT,
) -> LimitMomentReport:
    """Banded / triangular limit moments via the toeplitz-hankel machinery.

    Band kernels multiply the integrand by the indicator of the surviving
    link range, i.e. the profile becomes g_{2m}(x) = C_{2m} 1_band(x).  The
    triangular kernel is positional: every circuit edge must satisfy
    x + y <= 1, enforced inside the Monte-Carlo integrand; triangular is also
    defined for the symmetric circulant (mod-1 vertex propagation).
    """
    config = {"kind": kernel.kind, "alpha": kernel.alpha, "C": list(np.asarray(C, dtype=float))}
    if kernel.kind in ("band1", "band2"):
        if pattern not in (Pattern.TOEPLITZ, Pattern.HANKEL):
            raise ConfigError("band kernels here apply to toeplitz/hankel")
        if kernel.kind == "band2" and pattern is Pattern.TOEPLITZ and kernel.alpha > 0.5:
            pass  # union saturates to the whole range; handled by _band_indicator
        g = {}
        kmax = k if k % 2 == 0 else k + 1
        for order in range(2, kmax + 1, 2):
            height = C[order] if order < len(C) else 0.0
            if height != 0.0:
                g[order] = _band_indicator(pattern, kernel, float(height))
        profile = MomentProfile(g=g, kmax=kmax)
        if pattern is Pattern.TOEPLITZ:
            rep = toeplitz_limit_moment(profile, k, mc, kcap)
        else:
            rep = hankel_limit_moment(profile, k, mc, kcap)
        return LimitMomentReport(rep.pattern, rep.k, rep.beta, rep.se, rep.terms, config)

    # triangular: weight C_sigma, eta indicator per edge
    if pattern not in (Pattern.TOEPLITZ, Pattern.HANKEL, Pattern.SYMMETRIC_CIRCULANT):
        raise ConfigError("triangular kernel applies to toeplitz/hankel/sc")

    def const(sizes):
        out = 1.0
        for s in sizes:
            if s >= len(C):
                raise IndexError(f"C defined up to order {len(C) - 1}, need C_{s}")
            out *= C[s]
        return out

    return _mc_partition_moment(
        pattern, k, mc, kcap, config,
        lambda sizes: [], const, triangular=True,
        symmetric_only=pattern is Pattern.HANKEL,
    )


# ---------------------------------------------------------------------------
# the symmetric-circulant jump distribution
# ---------------------------------------------------------------------------


def jump_distribution_sample(rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Samples of Z = X Y: X = 2 s sin(pi U / 2) (arcsine radius with a
    uniform sign), Y an independent Bernoulli(1/2) thinning.  E[Z^{2m}]
    equals the block weight a_{2m} = C(2m, m)/2; odd moments vanish."""
    u = rng.random(size)
    sign = rng.integers(0, 2, size) * 2 - 1
    x = 2.0 * sign * np.sin(0.5 * math.pi * u)
    y = rng.integers(0, 2, size).astype(float)
    return x * y


def jump_moment_check(order: int, samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo mean and stderr of Z**order."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    z = jump_distribution_sample(rng, samples)
    vals = z**order
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return mean, se
