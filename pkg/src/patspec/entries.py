"""Entry models for the triangular input array, their limit constants, and
moment-profile functions.

An entry model describes the distribution of the inputs x_{i,n} feeding a
patterned matrix at dimension n.  Two views of a model matter downstream:

    * sampling   draw the concrete input vector for one realisation;
    * limits     the constants C_k = lim n E[x_{0,n}^k] (iid-type models) or
                 the power averages alpha_{2k} of a variance profile.

Moment profiles hold the limiting scaled even moments g_{2k} as functions on
the scaled index (domain [0,1] for rc/sc/toeplitz, [0,2] for hankel).  Named
presets (constant, polynomial, indicator, tabulated grid) carry closed-form
integrals where available; everything else falls back to composite midpoint
quadrature on QUAD_PANELS uniform panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .patterns import Pattern, input_base, input_length

#: Midpoint-rule panel count for profile integrals without a closed form.
QUAD_PANELS = 4096


# ---------------------------------------------------------------------------
# profile function presets
# ---------------------------------------------------------------------------


class ProfileFn:
    """A bounded Riemann-integrable function on a link-index domain."""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def integral(self, lo: float, hi: float) -> float:
        """Integral over [lo, hi]; midpoint quadrature unless overridden."""
        xs = lo + (hi - lo) * (np.arange(QUAD_PANELS) + 0.5) / QUAD_PANELS
        return float(np.mean(self(xs)) * (hi - lo))

    def integral_with_error(self, lo: float, hi: float) -> tuple[float, float]:
        """(value, discretisation bound); the bound is 0 for closed forms,
        otherwise the change between the full and half-resolution grids."""
        fine = self.integral(lo, hi)
        half = QUAD_PANELS // 2
        xs = lo + (hi - lo) * (np.arange(half) + 0.5) / half
        coarse = float(np.mean(self(xs)) * (hi - lo))
        return fine, abs(fine - coarse)

    def sup(self, lo: float, hi: float) -> float:
        xs = np.linspace(lo, hi, QUAD_PANELS + 1)
        return float(np.max(np.abs(self(xs))))

    @property
    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class ConstFn(ProfileFn):
    c: float = 0.0

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.c)

    def integral(self, lo, hi):
        return self.c * (hi - lo)

    def integral_with_error(self, lo, hi):
        return self.integral(lo, hi), 0.0

    def sup(self, lo, hi):
        return abs(self.c)

    @property
    def is_zero(self):
        return self.c == 0.0


@dataclass(frozen=True)
class PolyFn(ProfileFn):
    """Polynomial with coefficients in ascending order: c0 + c1 x + ..."""

    coeffs: tuple[float, ...]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def integral(self, lo, hi):
        total = 0.0
        for j, c in enumerate(self.coeffs):
            total += c * (hi ** (j + 1) - lo ** (j + 1)) / (j + 1)
        return total

    def integral_with_error(self, lo, hi):
        return self.integral(lo, hi), 0.0

    @property
    def is_zero(self):
        return all(c == 0.0 for c in self.coeffs)


@dataclass(frozen=True)
class IndicatorFn(ProfileFn):
    """height * 1_[lo, hi]."""

    lo: float
    hi: float
    height: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), self.height, 0.0)

    def integral(self, lo, hi):
        overlap = max(0.0, min(hi, self.hi) - max(lo, self.lo))
        return self.height * overlap

    def integral_with_error(self, lo, hi):
        return self.integral(lo, hi), 0.0

    def sup(self, lo, hi):
        return abs(self.height) if max(lo, self.lo) <= min(hi, self.hi) else 0.0

    @property
    def is_zero(self):
        return self.height == 0.0


@dataclass(frozen=True)
class GridFn(ProfileFn):
    """Tabulated values with linear interpolation, clamped at the ends."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise ValueError("grid needs matching xs/ys with at least 2 nodes")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("grid xs must be strictly increasing")

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.ys)

    def integral(self, lo, hi):
        # the interpolant is linear between breakpoints, so the trapezoid
        # rule over the refined breakpoint list is exact
        pts = [lo] + [x for x in self.xs if lo < x < hi] + [hi]
        vals = self(np.asarray(pts))
        return float(np.trapezoid(vals, pts))

    def integral_with_error(self, lo, hi):
        return self.integral(lo, hi), 0.0

    @property
    def is_zero(self):
        return all(y == 0.0 for y in self.ys)


@dataclass(frozen=True)
class PowFn(ProfileFn):
    """coeff * base(x) ** power; used for sigma^{2k} style integrands."""

    base: ProfileFn
    power: int
    coeff: float = 1.0

    def __call__(self, x):
        return self.coeff * self.base(np.asarray(x, dtype=float)) ** self.power

    def integral(self, lo, hi):
        # closed forms survive exponentiation for the simple presets
        if isinstance(self.base, ConstFn):
            return self.coeff * self.base.c**self.power * (hi - lo)
        if isinstance(self.base, PolyFn):
            coeffs = (1.0,)
            for _ in range(self.power):
                coeffs = _poly_mul(coeffs, self.base.coeffs)
            return self.coeff * PolyFn(coeffs).integral(lo, hi)
        if isinstance(self.base, IndicatorFn):
            return self.coeff * self.base.height**self.power * IndicatorFn(
                self.base.lo, self.base.hi
            ).integral(lo, hi)
        return super().integral(lo, hi)

    def integral_with_error(self, lo, hi):
        if isinstance(self.base, (ConstFn, PolyFn, IndicatorFn)):
            return self.integral(lo, hi), 0.0
        return ProfileFn.integral_with_error(self, lo, hi)

    @property
    def is_zero(self):
        return self.coeff == 0.0 or self.base.is_zero


def _poly_mul(a: tuple[float, ...], b: tuple[float, ...]) -> tuple[float, ...]:
    out = [0.0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return tuple(out)


# ---------------------------------------------------------------------------
# moment profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentProfile:
    """Family of limiting scaled even moments g_{2k}, k up to kmax."""

    g: dict[int, ProfileFn]
    kmax: int

    def __post_init__(self):
        for order in self.g:
            if order < 2 or order % 2 != 0:
                raise ValueError(f"profile orders must be even >= 2, got {order}")
        if 2 in self.g:
            # g_2 is a limiting scaled second moment, hence nonnegative.
            fn = self.g[2]
            xs = np.linspace(0.0, 2.0, 257)
            if np.any(fn(xs) < -1e-12):
                raise ValueError("g_2 must be nonnegative")

    def fn(self, order: int) -> ProfileFn:
        if order % 2 != 0 or order < 2 or order > self.kmax:
            raise ValueError(f"profile has no g_{order} (kmax={self.kmax})")
        return self.g.get(order, ConstFn(0.0))

    def bound(self, order: int, domain_hi: float = 1.0) -> float:
        """Sup-norm bound M_{2k} on [0, domain_hi]."""
        return self.fn(order).sup(0.0, domain_hi)


def iid_profile(kmax: int, c2: float = 1.0) -> MomentProfile:
    """Unit-variance-style iid limit: g_2 = c2, higher g identically 0."""
    return MomentProfile(g={2: ConstFn(c2)}, kmax=kmax)


def constant_profile(C: Sequence[float], kmax: int) -> MomentProfile:
    """Triangular-iid limit: g_{2k} = C_{2k} constant."""
    g = {}
    for order in range(2, kmax + 1, 2):
        if order < len(C):
            g[order] = ConstFn(float(C[order]))
    return MomentProfile(g=g, kmax=kmax)


def sigma_power_profile(sigma: ProfileFn, C: Sequence[float], kmax: int) -> MomentProfile:
    """Continuous-variance-profile limit: g_{2k}(x) = C_{2k} sigma(x)^{2k}."""
    g = {}
    for order in range(2, kmax + 1, 2):
        if order < len(C) and C[order] != 0.0:
            g[order] = PowFn(sigma, order, float(C[order]))
    return MomentProfile(g=g, kmax=kmax)


def profile_constants(
    profile: MomentProfile,
    pattern: Pattern,
    kmax: int | None = None,
    with_error: bool = False,
):
    """Per-block constants C_{2m} of the rc/sc limiting moment formulas.

    rc: C_{2m} = integral of g_{2m} over [0, 1];
    sc: C_{2m} = 2 * integral of g_{2m} over [0, 1/2].

    Exact for constant/polynomial/indicator/grid presets; midpoint quadrature
    on QUAD_PANELS panels otherwise.  Returned as a 1-indexed array C[0..kmax]
    with odd entries 0; with_error adds the per-order discretisation bound
    (0 for closed forms).
    """
    if pattern not in (Pattern.REVERSE_CIRCULANT, Pattern.SYMMETRIC_CIRCULANT):
        raise ConfigError(f"profile_constants applies to rc/sc, not {pattern.short}")
    kmax = profile.kmax if kmax is None else kmax
    if kmax > profile.kmax:
        raise ValueError(f"profile stores orders up to {profile.kmax}, requested {kmax}")
    C = np.zeros(kmax + 1)
    err = np.zeros(kmax + 1)
    for order in range(2, kmax + 1, 2):
        fn = profile.fn(order)
        if pattern is Pattern.REVERSE_CIRCULANT:
            val, bound = fn.integral_with_error(0.0, 1.0)
        else:
            val, bound = fn.integral_with_error(0.0, 0.5)
            val, bound = 2.0 * val, 2.0 * bound
        C[order] = val
        err[order] = bound
    if with_error:
        return C, err
    return C


# ---------------------------------------------------------------------------
# entry models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Truncation:
    """Truncation level t_n = c * n**e; t_n = inf when c is None."""

    c: float | None = None
    e: float = 0.0

    def level(self, n: int) -> float:
        if self.c is None:
            return math.inf
        return self.c * n**self.e


_BASES = ("normal", "uniform", "rademacher")
_SCALES = ("sqrt_n", "sqrt_m", "none")


@dataclass(frozen=True)
class ScaledIID:
    """iid base draws with mean 0, variance 1, scaled by n^{-1/2} (or m^{-1/2}
    for band matrices scaled by their bandwidth)."""

    base: str = "normal"
    scale: str = "sqrt_n"
    trunc: Truncation = field(default_factory=Truncation)

    def __post_init__(self):
        if self.base not in _BASES:
            raise ConfigError(f"unknown base distribution {self.base!r}")
        if self.scale not in _SCALES:
            raise ConfigError(f"unknown scale {self.scale!r}")


@dataclass(frozen=True)
class SparseBernoulli:
    """Ber(lambda/n) entries, unscaled; n * E[x^k] -> lambda for every k."""

    lam: float
    trunc: Truncation = field(default_factory=Truncation)

    def __post_init__(self):
        if self.lam <= 0:
            raise ConfigError(f"lambda must be > 0, got {self.lam}")


@dataclass(frozen=True)
class BinomialSparse:
    """Bin(m, lambda/n) entries: the sum of m independent sparse matrices."""

    m: int
    lam: float
    trunc: Truncation = field(default_factory=Truncation)

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if self.lam <= 0:
            raise ConfigError(f"lambda must be > 0, got {self.lam}")


@dataclass(frozen=True)
class DiscreteVarianceProfile:
    """Inputs sigma_i * x_i with sigma_i cycling through a fixed period."""

    sigma: tuple[float, ...]
    inner: "EntryModel"

    def __post_init__(self):
        if not self.sigma:
            raise ConfigError("sigma period must be nonempty")
        if isinstance(self.inner, (DiscreteVarianceProfile, ContinuousVarianceProfile)):
            raise ConfigError("variance profiles cannot nest")

    @property
    def bound(self) -> float:
        return max(abs(s) for s in self.sigma)


@dataclass(frozen=True)
class ContinuousVarianceProfile:
    """Inputs sigma(i/n) * x_i for a bounded sigma on the index domain."""

    sigma: ProfileFn
    inner: "EntryModel"

    def __post_init__(self):
        if isinstance(self.inner, (DiscreteVarianceProfile, ContinuousVarianceProfile)):
            raise ConfigError("variance profiles cannot nest")


EntryModel = (
    ScaledIID | SparseBernoulli | BinomialSparse | DiscreteVarianceProfile | ContinuousVarianceProfile
)


def _base_draws(base: str, size: int, rng: np.random.Generator) -> np.ndarray:
    if base == "normal":
        return rng.standard_normal(size)
    if base == "uniform":
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size)
    # rademacher
    return rng.integers(0, 2, size).astype(float) * 2.0 - 1.0


def _iid_draws(
    model: EntryModel, n: int, size: int, rng: np.random.Generator, band_m: int | None
) -> np.ndarray:
    if isinstance(model, ScaledIID):
        x = _base_draws(model.base, size, rng)
        if model.scale == "sqrt_n":
            return x / math.sqrt(n)
        if model.scale == "sqrt_m":
            if band_m is None:
                raise ConfigError("scale sqrt_m needs a band mask bandwidth")
            return x / math.sqrt(band_m)
        return x
    if isinstance(model, SparseBernoulli):
        p = model.lam / n
        if p > 1.0:
            raise ConfigError(f"lambda/n = {p} > 1 at n = {n}")
        return (rng.random(size) < p).astype(float)
    if isinstance(model, BinomialSparse):
        p = model.lam / n
        if p > 1.0:
            raise ConfigError(f"lambda/n = {p} > 1 at n = {n}")
        return rng.binomial(model.m, p, size).astype(float)
    raise ConfigError(f"cannot sample from {type(model).__name__}")


def sample_inputs(
    model: EntryModel,
    pattern: Pattern,
    n: int,
    rng: np.random.Generator,
    band_m: int | None = None,
) -> np.ndarray:
    """One input vector for an n x n matrix of the given pattern.

    The array is indexed from input_base(pattern); variance-profile models
    multiply the inner draws by sigma_i (discrete) or sigma(i/n) (continuous,
    with i/n ranging over [0, 2] for hankel).  Identical (model, pattern, n,
    stream state) gives identical output.
    """
    size = input_length(pattern, n)
    base = input_base(pattern)
    if isinstance(model, DiscreteVarianceProfile):
        x = _iid_draws(model.inner, n, size, rng, band_m)
        period = np.asarray(model.sigma)
        idx = (np.arange(size) + base) % len(period)
        return x * period[idx]
    if isinstance(model, ContinuousVarianceProfile):
        x = _iid_draws(model.inner, n, size, rng, band_m)
        pos = (np.arange(size) + base) / n
        return x * model.sigma(pos)
    return _iid_draws(model, n, size, rng, band_m)


def inner_model(model: EntryModel) -> EntryModel:
    if isinstance(model, (DiscreteVarianceProfile, ContinuousVarianceProfile)):
        return model.inner
    return model


def limit_constants(
    model: EntryModel, kmax: int, band_alpha: float | None = None
) -> np.ndarray:
    """C_k = lim n E[x_{0,n}^k] for k = 1..kmax, as a 1-indexed array.

    scaled iid (unit variance): C_2 = 1 (or 1/alpha under sqrt_m band
    scaling), all other C_k = 0;
    sparse Bernoulli(lambda/n): C_k = lambda for all k;
    binomial(m, lambda/n):      C_k = m * lambda for all k.

    Variance profiles delegate to their inner model; the profile's own
    contribution enters through alpha_sequence.
    """
    model = inner_model(model)
    C = np.zeros(kmax + 1)
    if isinstance(model, ScaledIID):
        if model.scale == "none":
            raise ConfigError("unscaled iid entries have no finite limit constants")
        if model.scale == "sqrt_m":
            if band_alpha is None:
                raise ConfigError("sqrt_m scaling needs the band alpha to fix C_2")
            C[2] = 1.0 / band_alpha
        else:
            C[2] = 1.0
        return C
    if isinstance(model, SparseBernoulli):
        C[1:] = model.lam
        return C
    if isinstance(model, BinomialSparse):
        C[1:] = model.m * model.lam
        return C
    raise ConfigError(f"no limit constants implemented for {type(model).__name__}")


def alpha_sequence(model: EntryModel, kmax: int, pattern: Pattern) -> np.ndarray:
    """Power averages alpha_{2k} of the variance profile, 1-indexed array.

    rc uses the full-range limit lim (1/n) sum sigma_i^{2k} (continuous:
    integral over [0,1]); sc uses the half-range limit over indices below
    n/2 (continuous: integral over [0,1/2]) because only those indices feed
    the matrix -- the sc moment formula then applies weight 2*alpha per block.
    """
    if pattern not in (Pattern.REVERSE_CIRCULANT, Pattern.SYMMETRIC_CIRCULANT):
        raise ConfigError("alpha_sequence applies to rc/sc patterns")
    alpha = np.zeros(kmax + 1)
    if isinstance(model, DiscreteVarianceProfile):
        period = np.asarray(model.sigma)
        for order in range(2, kmax + 1, 2):
            full = float(np.mean(period**order))
            alpha[order] = full if pattern is Pattern.REVERSE_CIRCULANT else full / 2.0
        return alpha
    if isinstance(model, ContinuousVarianceProfile):
        for order in range(2, kmax + 1, 2):
            fn = PowFn(model.sigma, order)
            if pattern is Pattern.REVERSE_CIRCULANT:
                alpha[order] = fn.integral(0.0, 1.0)
            else:
                alpha[order] = fn.integral(0.0, 0.5)
        return alpha
    raise ConfigError(f"{type(model).__name__} carries no variance profile")


def truncation_residual(
    model: EntryModel,
    n: int,
    samples: int,
    rng: np.random.Generator,
    pattern: Pattern = Pattern.REVERSE_CIRCULANT,
) -> tuple[float, float]:
    """Monte-Carlo estimate (value, stderr) of sum_i E[x_i^2 1{|x_i| > t_n}].

    Indices are drawn uniformly from the pattern's input range, so the
    estimator is unbiased for the sum; exactly (0, 0) when t_n is infinite.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    inner = inner_model(model)
    t_n = inner.trunc.level(n)
    if math.isinf(t_n):
        return 0.0, 0.0
    size = input_length(pattern, n)
    base = input_base(pattern)
    idx = rng.integers(0, size, samples)
    draws = _iid_draws(inner, n, samples, rng, band_m=None)
    if isinstance(model, DiscreteVarianceProfile):
        period = np.asarray(model.sigma)
        draws = draws * period[(idx + base) % len(period)]
    elif isinstance(model, ContinuousVarianceProfile):
        draws = draws * model.sigma((idx + base) / n)
    vals = size * draws**2 * (np.abs(draws) > t_n)
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return est, se
