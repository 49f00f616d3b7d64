"""Link functions, band/triangular masks, and input-index bookkeeping.

Four symmetric patterns are supported.  Matrix positions are 1-based
(i, j in 1..n); each pattern maps a position to an index into a 1-d input
sequence:

    reverse circulant   (i + j - 2) mod n          indices 0 .. n-1
    symmetric circulant min(|i-j|, n - |i-j|)      indices 0 .. n//2
    toeplitz            |i - j|                    indices 0 .. n-1
    hankel              i + j                      indices 2 .. 2n

The symmetric-circulant form equals n/2 - |n/2 - |i-j|| exactly, including
odd n, but avoids fractional arithmetic.  Hankel indices keep their natural
2..2n range (not re-based) so that type II band masks can be stated on them
directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


class Pattern(enum.Enum):
    REVERSE_CIRCULANT = "rc"
    SYMMETRIC_CIRCULANT = "sc"
    TOEPLITZ = "toeplitz"
    HANKEL = "hankel"

    @property
    def delta(self) -> int:
        """Max number of columns per row sharing one input index (1 or 2)."""
        if self in (Pattern.REVERSE_CIRCULANT, Pattern.HANKEL):
            return 1
        return 2

    @property
    def short(self) -> str:
        return self.value


def parse_pattern(name: str) -> Pattern:
    aliases = {
        "rc": Pattern.REVERSE_CIRCULANT,
        "sc": Pattern.SYMMETRIC_CIRCULANT,
        "toeplitz": Pattern.TOEPLITZ,
        "t": Pattern.TOEPLITZ,
        "hankel": Pattern.HANKEL,
        "h": Pattern.HANKEL,
    }
    key = name.strip().lower()
    if key not in aliases:
        raise ConfigError(f"unknown pattern {name!r}; expected rc|sc|toeplitz|hankel")
    return aliases[key]


def input_base(pattern: Pattern) -> int:
    """Smallest input index used by the pattern (0, except 2 for Hankel)."""
    return 2 if pattern is Pattern.HANKEL else 0


def input_length(pattern: Pattern, n: int) -> int:
    """Number of distinct input indices an n x n matrix of this pattern reads."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if pattern in (Pattern.REVERSE_CIRCULANT, Pattern.TOEPLITZ):
        return n
    if pattern is Pattern.SYMMETRIC_CIRCULANT:
        return n // 2 + 1
    return 2 * n - 1  # hankel: 2 .. 2n


def link_value(pattern: Pattern, n: int, i: int, j: int) -> int:
    """Input index feeding matrix position (i, j); symmetric in (i, j)."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"position ({i}, {j}) outside [1, {n}]^2")
    if pattern is Pattern.REVERSE_CIRCULANT:
        return (i + j - 2) % n
    if pattern is Pattern.SYMMETRIC_CIRCULANT:
        d = abs(i - j)
        return min(d, n - d)
    if pattern is Pattern.TOEPLITZ:
        return abs(i - j)
    return i + j  # hankel


def link_matrix(pattern: Pattern, n: int) -> np.ndarray:
    """Dense n x n array of link values (vectorised link_value)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    i = np.arange(1, n + 1)[:, None]
    j = np.arange(1, n + 1)[None, :]
    if pattern is Pattern.REVERSE_CIRCULANT:
        return (i + j - 2) % n
    if pattern is Pattern.SYMMETRIC_CIRCULANT:
        d = np.abs(i - j)
        return np.minimum(d, n - d)
    if pattern is Pattern.TOEPLITZ:
        return np.abs(i - j)
    return i + j


class MaskKind(enum.Enum):
    NONE = "none"
    BAND_I = "band1"
    BAND_II = "band2"
    TRIANGULAR = "tri"


# Type II banding is defined only for these patterns; the triangular cut of a
# reverse circulant coincides with the triangular Hankel matrix and is
# rejected to keep the mapping one-to-one.
_BAND_II_OK = (Pattern.REVERSE_CIRCULANT, Pattern.TOEPLITZ, Pattern.HANKEL)
_TRIANGULAR_OK = (Pattern.HANKEL, Pattern.TOEPLITZ, Pattern.SYMMETRIC_CIRCULANT)


@dataclass(frozen=True)
class MaskSpec:
    """Band or triangular truncation of a patterned matrix.

    For band kinds, ``m`` is the bandwidth at a concrete n and ``alpha``
    records the intended limit of m/n; alpha is carried explicitly so that
    asymptotic formulas use the target ratio, never a rounded m/n.
    """

    kind: MaskKind = MaskKind.NONE
    m: int | None = None
    alpha: float | None = None

    def __post_init__(self):
        if self.kind in (MaskKind.BAND_I, MaskKind.BAND_II):
            if self.alpha is None and self.m is None:
                raise ConfigError("band mask needs m or alpha")
            if self.alpha is not None and not 0.0 < self.alpha <= 1.0:
                raise ConfigError(f"band alpha must be in (0, 1], got {self.alpha}")
            if self.m is not None and self.m < 1:
                raise ConfigError(f"band m must be >= 1, got {self.m}")

    def bandwidth(self, n: int) -> int:
        """Concrete m at dimension n.

        An explicit m must satisfy 1 <= m < n; an alpha-derived floor(alpha*n)
        is clamped into that range (alpha = 1 would otherwise give m = n).
        """
        if self.m is not None:
            if not 1 <= self.m < n:
                raise ConfigError(f"band requires 1 <= m < n, got m={self.m}, n={n}")
            return self.m
        m = math.floor(self.alpha * n)
        return max(1, min(n - 1, m))


def validate_mask(mask: MaskSpec, pattern: Pattern) -> None:
    if mask.kind is MaskKind.BAND_II and pattern not in _BAND_II_OK:
        raise ConfigError(f"type II band undefined for {pattern.short}")
    if mask.kind is MaskKind.TRIANGULAR and pattern not in _TRIANGULAR_OK:
        raise ConfigError(f"triangular mask undefined for {pattern.short}")


@dataclass(frozen=True)
class MatrixSpec:
    pattern: Pattern
    n: int
    mask: MaskSpec = field(default_factory=MaskSpec)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        validate_mask(self.mask, self.pattern)
        if self.mask.kind in (MaskKind.BAND_I, MaskKind.BAND_II):
            self.mask.bandwidth(self.n)  # rejects an out-of-range explicit m


def mask_keeps(mask: MaskSpec, pattern: Pattern, n: int, i: int, j: int) -> bool:
    """Whether the (i, j) entry survives the mask.

    Band masks act on the input index; the triangular mask is positional
    (keeps i + j <= n + 1).
    """
    validate_mask(mask, pattern)
    if mask.kind is MaskKind.NONE:
        return True
    if mask.kind is MaskKind.TRIANGULAR:
        return i + j <= n + 1
    m = mask.bandwidth(n)
    idx = link_value(pattern, n, i, j)
    if mask.kind is MaskKind.BAND_I:
        return idx <= m
    # band II
    if pattern is Pattern.HANKEL:
        return n - m <= idx <= n + m
    return idx <= m or idx >= n - m


def mask_matrix(mask: MaskSpec, pattern: Pattern, n: int) -> np.ndarray:
    """Dense boolean keep-matrix (vectorised mask_keeps)."""
    validate_mask(mask, pattern)
    if mask.kind is MaskKind.NONE:
        return np.ones((n, n), dtype=bool)
    if mask.kind is MaskKind.TRIANGULAR:
        i = np.arange(1, n + 1)[:, None]
        j = np.arange(1, n + 1)[None, :]
        return i + j <= n + 1
    m = mask.bandwidth(n)
    idx = link_matrix(pattern, n)
    if mask.kind is MaskKind.BAND_I:
        return idx <= m
    if pattern is Pattern.HANKEL:
        return (idx >= n - m) & (idx <= n + m)
    return (idx <= m) | (idx >= n - m)
