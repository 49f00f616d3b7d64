import numpy as np
import pytest
from hypothesis import given, strategies as st

from patspec.errors import ConfigError
from patspec.patterns import (
    MaskKind,
    MaskSpec,
    MatrixSpec,
    Pattern,
    input_length,
    link_matrix,
    link_value,
    mask_keeps,
    mask_matrix,
)

RC = Pattern.REVERSE_CIRCULANT
SC = Pattern.SYMMETRIC_CIRCULANT
T = Pattern.TOEPLITZ
H = Pattern.HANKEL


def test_link_values_on_5x5_layouts():
    # spot values of each pattern at n = 5
    assert link_value(RC, 5, 2, 5) == 0
    assert link_value(SC, 5, 1, 5) == 1
    assert link_value(H, 5, 1, 1) == 2
    assert link_value(T, 5, 1, 5) == 4


def test_link_out_of_range():
    with pytest.raises(ValueError):
        link_value(RC, 5, 0, 3)
    with pytest.raises(ValueError):
        link_value(T, 5, 1, 6)


@given(
    pattern=st.sampled_from(list(Pattern)),
    n=st.integers(2, 40),
    data=st.data(),
)
def test_link_symmetry(pattern, n, data):
    i = data.draw(st.integers(1, n))
    j = data.draw(st.integers(1, n))
    assert link_value(pattern, n, i, j) == link_value(pattern, n, j, i)


@given(n=st.integers(2, 200), data=st.data())
def test_sc_min_form_equals_halved_identity(n, data):
    # n/2 - |n/2 - d| == min(d, n - d), checked in integer halves (odd n too)
    i = data.draw(st.integers(1, n))
    j = data.draw(st.integers(1, n))
    d = abs(i - j)
    lhs_doubled = n - abs(n - 2 * d)
    assert lhs_doubled == 2 * link_value(SC, n, i, j)


def test_delta_bound_exhaustive():
    # per row and target, at most delta columns share a link value (n <= 64)
    for pattern in Pattern:
        for n in range(2, 65):
            lm = link_matrix(pattern, n)
            for row in lm:
                counts = np.bincount(row - row.min())
                assert counts.max() <= pattern.delta, (pattern, n)


def test_delta_values():
    assert RC.delta == 1 and H.delta == 1
    assert SC.delta == 2 and T.delta == 2


def test_input_length():
    assert input_length(RC, 5) == 5
    assert input_length(SC, 5) == 3
    assert input_length(H, 5) == 9
    assert input_length(T, 7) == 7
    with pytest.raises(ValueError):
        input_length(RC, 1)


def test_band1_rc_example():
    mask = MaskSpec(MaskKind.BAND_I, m=1)
    kept = {
        link_value(RC, 5, i, j)
        for i in range(1, 6)
        for j in range(1, 6)
        if mask_keeps(mask, RC, 5, i, j)
    }
    assert kept == {0, 1}
    assert not mask_keeps(mask, RC, 5, 1, 3)  # index 2


def test_band2_hankel_example():
    mask = MaskSpec(MaskKind.BAND_II, m=1)
    kept = {
        link_value(H, 5, i, j)
        for i in range(1, 6)
        for j in range(1, 6)
        if mask_keeps(mask, H, 5, i, j)
    }
    assert kept == {4, 5, 6}
    assert not mask_keeps(mask, H, 5, 1, 1)


def test_triangular_positional():
    mask = MaskSpec(MaskKind.TRIANGULAR)
    assert mask_keeps(mask, H, 5, 3, 3)
    assert not mask_keeps(mask, H, 5, 3, 4)


def test_mask_none_keeps_everything():
    for pattern in Pattern:
        assert mask_matrix(MaskSpec(), pattern, 9).all()


def test_band1_full_width_keeps_all_rc_toeplitz():
    for pattern in (RC, T):
        mask = MaskSpec(MaskKind.BAND_I, m=10)
        assert mask_matrix(mask, pattern, 11).all()


def test_mask_matrix_agrees_with_mask_keeps():
    cases = [
        (MaskSpec(MaskKind.BAND_I, m=2), T),
        (MaskSpec(MaskKind.BAND_II, alpha=0.3), RC),
        (MaskSpec(MaskKind.BAND_II, alpha=0.3), H),
        (MaskSpec(MaskKind.TRIANGULAR), SC),
    ]
    n = 9
    for mask, pattern in cases:
        mm = mask_matrix(mask, pattern, n)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                assert mm[i - 1, j - 1] == mask_keeps(mask, pattern, n, i, j)


def test_disallowed_mask_pattern_pairs():
    with pytest.raises(ConfigError):
        mask_keeps(MaskSpec(MaskKind.TRIANGULAR), RC, 5, 1, 1)
    with pytest.raises(ConfigError):
        mask_keeps(MaskSpec(MaskKind.BAND_II, m=1), SC, 5, 1, 1)
    with pytest.raises(ConfigError):
        MatrixSpec(RC, 5, MaskSpec(MaskKind.TRIANGULAR))


def test_mask_alpha_validation():
    with pytest.raises(ConfigError):
        MaskSpec(MaskKind.BAND_I, alpha=0.0)  # the alpha -> 0 regime is out
    with pytest.raises(ConfigError):
        MaskSpec(MaskKind.BAND_I, alpha=1.5)
    with pytest.raises(ConfigError):
        MaskSpec(MaskKind.BAND_I)  # neither m nor alpha


def test_bandwidth_from_alpha():
    mask = MaskSpec(MaskKind.BAND_I, alpha=0.5)
    assert mask.bandwidth(1000) == 500
    # floor(alpha n) clamped into [1, n-1]
    assert MaskSpec(MaskKind.BAND_I, alpha=1.0).bandwidth(10) == 9
    assert MaskSpec(MaskKind.BAND_I, alpha=0.01).bandwidth(10) == 1


def test_matrix_spec_validation():
    MatrixSpec(H, 5, MaskSpec(MaskKind.TRIANGULAR))  # allowed
    with pytest.raises(ValueError):
        MatrixSpec(RC, 1)


def test_explicit_band_m_out_of_range_rejected():
    with pytest.raises(ConfigError):
        MatrixSpec(T, 5, MaskSpec(MaskKind.BAND_I, m=5))
    with pytest.raises(ConfigError):
        MaskSpec(MaskKind.BAND_I, m=10).bandwidth(5)
    # alpha-derived bandwidths clamp instead
    assert MaskSpec(MaskKind.BAND_I, alpha=1.0).bandwidth(5) == 4
