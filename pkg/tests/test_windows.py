"""Tests for mode windows and window-aware operator application."""

import numpy as np
import pytest

from fredcorr.errors import DimensionMismatch, InvalidInput
from fredcorr.subspaces import Subspace
from fredcorr.windows import (
    ModeWindow,
    PaddedSubspace,
    WindowedOperator,
    lift_frame,
    lift_subspace,
    mode_interval,
    mode_span,
    restricted_image,
    window_rows_mask,
    windowed_graph,
)


def shift_matrix(src, dst, k):
    """Matrix of multiplication by z^k from window src into window dst."""
    m = np.zeros((dst.dim, src.dim), dtype=np.complex128)
    for c in range(src.channels):
        for n in range(-src.half_width, src.half_width + 1):
            if -dst.half_width <= n + k <= dst.half_width:
                m[dst.index_of(c, n + k), src.index_of(c, n)] = 1.0
    return m


def test_window_layout_roundtrip():
    w = ModeWindow(3, channels=2)
    assert w.dim == 14
    assert w.modes_per_channel == 7
    for i in range(w.dim):
        c, n = w.mode_of_index(i)
        assert w.index_of(c, n) == i
    labels = w.mode_labels()
    assert labels[0] == -3 and labels[6] == 3 and labels[7] == -3


def test_window_validation():
    with pytest.raises(InvalidInput):
        ModeWindow(-1)
    with pytest.raises(InvalidInput):
        ModeWindow(2, channels=0)
    w = ModeWindow(2)
    with pytest.raises(InvalidInput):
        w.index_of(0, 3)


def test_mode_span_and_interval():
    w = ModeWindow(4)
    nonneg = mode_span(w, lambda n: n >= 0)
    assert nonneg.dim == 5
    inner = mode_interval(w, -1, 1)
    assert inner.dim == 3
    assert inner.contains(np.eye(w.dim)[w.index_of(0, 0)])
    two = ModeWindow(4, channels=2)
    assert mode_span(two, lambda n: n >= 0).dim == 10


def test_lift_frame_places_modes():
    small = ModeWindow(1)
    big = ModeWindow(3)
    sub = mode_interval(small, 0, 1)
    lifted = lift_subspace(sub, small, big)
    assert lifted.ambient_dim == big.dim
    assert lifted.contains(np.eye(big.dim)[big.index_of(0, 0)])
    assert lifted.contains(np.eye(big.dim)[big.index_of(0, 1)])
    with pytest.raises(DimensionMismatch):
        lift_frame(sub.frame, big, small)


def test_restricted_image_shift():
    # multiplication by z on [-2,2], range [-3,3], base [-2,2]:
    # inputs with image inside the base are modes -2..1
    base = ModeWindow(2)
    rng_w = ModeWindow(3)
    m = shift_matrix(base, rng_w, 1)
    img = restricted_image(m, window_rows_mask(rng_w, base))
    assert img.dim == 4
    assert img.contains(np.eye(base.dim)[base.index_of(0, -1)])
    assert img.contains(np.eye(base.dim)[base.index_of(0, 2)])
    assert not img.contains(np.eye(base.dim)[base.index_of(0, -2)])


def test_restricted_image_mixing_is_window_intersection():
    # operator 1 + z: the image of the span of e_1, e_2 (modes) inside
    # a 2-mode window keeps only combinations with no outside leak
    base = ModeWindow(1)
    rng_w = ModeWindow(2)
    m = shift_matrix(base, rng_w, 0) + shift_matrix(base, rng_w, 1)
    img = restricted_image(m, window_rows_mask(rng_w, base))
    # x = a e_{-1} + b e_0 + c e_1 maps to a e_{-1} + (a+b) e_0 + (b+c) e_1 + c e_2;
    # staying inside forces c = 0, leaving a 2-dim image
    assert img.dim == 2


def test_windowed_graph_of_shift():
    # range must be wide enough that no image mode is truncated
    base = ModeWindow(3)
    rng_w = ModeWindow(5)
    for k in (-2, 0, 2):
        m = shift_matrix(base, rng_w, k)
        g = windowed_graph(m, window_rows_mask(rng_w, base))
        assert g.ambient_dim == 2 * base.dim
        assert g.dim == base.dim - abs(k)


def test_windowed_operator_apply():
    base = ModeWindow(2)
    padded = ModeWindow(3)
    rng_w = ModeWindow(4)
    m = shift_matrix(padded, rng_w, 1)
    op = WindowedOperator(domain_window=padded, range_window=rng_w,
                          base_window=base, matrix=m)
    # padded flat: modes -3..-1, shifted to -2..0, all inside base
    flat_pad = mode_span(padded, lambda n: n < 0)
    img = op.apply_within_window(flat_pad)
    assert img.dim == 3
    assert img.contains(np.eye(base.dim)[base.index_of(0, 0)])


def test_windowed_operator_validation():
    base = ModeWindow(2)
    with pytest.raises(DimensionMismatch):
        WindowedOperator(domain_window=base, range_window=base,
                         base_window=ModeWindow(3), matrix=np.eye(base.dim))
    with pytest.raises(DimensionMismatch):
        WindowedOperator(domain_window=base, range_window=base,
                         base_window=base, matrix=np.eye(3))


def test_padded_subspace_validation():
    base_w = ModeWindow(2)
    sub = mode_span(base_w, lambda n: n < 0)
    pad_w = base_w.pad(1)
    good = lift_subspace(sub, base_w, pad_w)
    ps = PaddedSubspace(base=sub, padded=good, base_window=base_w, margin=1)
    assert ps.padded_window.half_width == 3
    bad = mode_span(pad_w, lambda n: n > 0)
    with pytest.raises(InvalidInput):
        PaddedSubspace(base=sub, padded=bad, base_window=base_w, margin=1)
