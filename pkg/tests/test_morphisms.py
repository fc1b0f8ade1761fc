"""Correspondence layer: hand-computed oracles on small mode windows.

All expected indices below were derived by counting modes by hand; the
chain circles use sharp = negative modes, under which the incoming disk
has index 0 and the outgoing disk index 1.
"""

import numpy as np
import pytest

from fredcorr.errors import CompositionMismatch, DimensionMismatch, InvalidInput
from fredcorr.morphisms import (
    Chain,
    Correspondence,
    Twist,
    chain_total_index,
    commutator_rank,
    compose,
    compose_with_twist,
    delta,
    delta_direct,
    graph_correspondence,
    index,
    index_report,
    is_bordism,
    is_special,
    apply_to_subspace,
    reduce_chain_ledger,
    tilde_ind,
    twist_graph,
)
from fredcorr.spaces import (
    SHARP_NEGATIVE,
    SHARP_NONNEG,
    ModelSpace,
    perturb_splitting,
    splitting_for_window,
)
from fredcorr.subspaces import Subspace, random_subspace, subspaces_equal
from fredcorr.windows import ModeWindow, WindowedOperator, mode_span


def circle_space(m, convention=SHARP_NEGATIVE, channels=1):
    w = ModeWindow(m, channels)
    if channels == 1:
        labels = tuple(range(-m, m + 1))
    else:
        labels = tuple((int(w.mode_of_index(i)[1]), w.mode_of_index(i)[0])
                       for i in range(w.dim))
    return ModelSpace(dim=w.dim, basis_labels=labels,
                      splitting=splitting_for_window(w, convention),
                      window=w, convention=convention)


def shift_operator(base, k):
    """Exact multiplication by z^k with full padding."""
    d = abs(k)
    domain, rng_w = base.pad(d), base.pad(2 * d)
    m = np.zeros((rng_w.dim, domain.dim), dtype=np.complex128)
    for c in range(base.channels):
        for n in range(-domain.half_width, domain.half_width + 1):
            m[rng_w.index_of(c, n + k), domain.index_of(c, n)] = 1.0
    return WindowedOperator(domain_window=domain, range_window=rng_w,
                            base_window=base, matrix=m)


def disk_in(space, predicate=lambda n: n >= 0):
    return Correspondence(source=ModelSpace.zero_space(), target=space,
                          subspace=mode_span(space.window, predicate))


def disk_out(space, predicate=lambda n: n <= 0):
    return Correspondence(source=space, target=ModelSpace.zero_space(),
                          subspace=mode_span(space.window, predicate))


def diag_link(space, q):
    """Endo-correspondence {(x, Q x)}, Q = diag(q^mode), unit columns."""
    n = space.dim
    frame = np.zeros((2 * n, n), dtype=np.complex128)
    labels = space.window.mode_labels()
    for i in range(n):
        k = int(labels[i])
        a, b = (1.0, q ** k) if k >= 0 else (q ** (-k), 1.0)
        r = np.hypot(a, b)
        frame[i, i] = a / r
        frame[n + i, i] = b / r
    return Correspondence(source=space, target=space, subspace=Subspace(frame))


def test_correspondence_ambient_validation():
    h = circle_space(3)
    with pytest.raises(DimensionMismatch):
        Correspondence(source=h, target=h, subspace=Subspace.full(h.dim))


def test_disk_link_indices():
    h = circle_space(5)
    assert index(disk_in(h)) == 0
    assert index(disk_out(h)) == 1


def test_diagonal_link_index_zero():
    h = circle_space(4)
    assert index(diag_link(h, 0.5)) == 0


def test_index_report_is_dimension_determined():
    # index = dim L + dim(flat + sharp) - ambient, whatever L is
    rng = np.random.default_rng(7)
    for conv in (SHARP_NEGATIVE, SHARP_NONNEG):
        h = circle_space(4, conv)
        for _ in range(10):
            d = int(rng.integers(0, 2 * h.dim + 1))
            l = Correspondence(source=h, target=h,
                               subspace=random_subspace(2 * h.dim, d, rng))
            rep = index_report(l)
            assert rep.index == rep.dim_intersection - rep.codim_sum
            assert rep.index == d + h.dim - 2 * h.dim


def test_compose_graphs_matches_product():
    h = circle_space(3)
    rng = np.random.default_rng(11)
    a = np.eye(h.dim) + 0.4 * rng.standard_normal((h.dim, h.dim))
    b = np.eye(h.dim) + 0.4 * rng.standard_normal((h.dim, h.dim))
    lhs = compose(graph_correspondence(h, a), graph_correspondence(h, b))
    rhs = graph_correspondence(h, b @ a)
    assert subspaces_equal(lhs.subspace, rhs.subspace)


def test_compose_mismatch_raises():
    with pytest.raises(CompositionMismatch):
        compose(disk_in(circle_space(3)), disk_out(circle_space(4)))
    with pytest.raises(CompositionMismatch):
        compose(disk_in(circle_space(3, SHARP_NEGATIVE)),
                disk_out(circle_space(3, SHARP_NONNEG)))


def test_compose_collapses_shared_mode():
    h = circle_space(5)
    closed = compose(disk_in(h), disk_out(h))
    assert closed.source.is_zero and closed.target.is_zero
    assert closed.subspace.dim == 0
    assert index(closed) == 0
    assert delta(disk_in(h), disk_out(h)) == 1


def test_delta_direct_sphere_closing():
    h = circle_space(5)
    kp, cp = delta_direct(disk_in(h), disk_out(h))
    assert (kp, cp) == (1, 0)
    assert delta(disk_in(h), disk_out(h)) == kp - cp


def test_delta_direct_disambiguator():
    # strict halves intersect in nothing; the defect sits in the
    # cokernel slot and the combination sign must be minus
    h = circle_space(5)
    l1 = disk_in(h, predicate=lambda n: n > 0)
    l2 = disk_out(h, predicate=lambda n: n < 0)
    kp, cp = delta_direct(l1, l2)
    assert (kp, cp) == (0, 1)
    assert delta(l1, l2) == kp - cp == -1


def test_chain_total_and_ledger_orders():
    h = circle_space(6)
    c = Chain(links=(disk_in(h), diag_link(h, 0.5), disk_out(h)))
    assert chain_total_index(c) == 1
    left = reduce_chain_ledger(c, (0, 1))
    right = reduce_chain_ledger(c, (1, 0))
    assert left.total == right.total == 1
    assert left.delta_events == (0, 1)
    assert right.delta_events == (0, 1)
    assert left.final_index == right.final_index == 0


def test_chain_validation():
    h = circle_space(3)
    with pytest.raises(InvalidInput):
        Chain(links=())
    with pytest.raises(InvalidInput):
        Chain(links=(diag_link(h, 0.5), disk_out(h)))
    with pytest.raises(CompositionMismatch):
        Chain(links=(disk_in(h), disk_out(circle_space(4))))


def test_reduce_ledger_rejects_bad_order():
    h = circle_space(3)
    c = Chain(links=(disk_in(h), diag_link(h, 0.5), disk_out(h)))
    with pytest.raises(InvalidInput):
        reduce_chain_ledger(c, (0, 0))
    with pytest.raises(InvalidInput):
        reduce_chain_ledger(c, (1, 2))


@pytest.mark.parametrize("k,expected", [(1, 1), (-1, -1), (0, 0), (2, 2)])
def test_tilde_ind_matches_shift_degree(k, expected):
    # sharp = nonnegative modes: the twist index is the shift degree
    h = circle_space(6, SHARP_NONNEG)
    t = Twist(base=h, operator=shift_operator(h.window, k), budget=2 * abs(k))
    assert tilde_ind(t) == expected


@pytest.mark.parametrize("k", [-2, -1, 1, 2])
def test_tilde_ind_chain_convention_flips_sign(k):
    h = circle_space(6)
    t = Twist(base=h, operator=shift_operator(h.window, k), budget=2 * abs(k))
    assert tilde_ind(t) == -k


def test_tilde_ind_two_channel_mixed_shift():
    h = circle_space(6, SHARP_NONNEG, channels=2)
    w = h.window
    domain, rng_w = w.pad(1), w.pad(2)
    m = np.zeros((rng_w.dim, domain.dim), dtype=np.complex128)
    for n in range(-domain.half_width, domain.half_width + 1):
        m[rng_w.index_of(0, n + 1), domain.index_of(0, n)] = 1.0
        m[rng_w.index_of(1, n - 1), domain.index_of(1, n)] = 1.0
    t = Twist(base=h, operator=WindowedOperator(domain_window=domain,
                                                range_window=rng_w,
                                                base_window=w, matrix=m),
              budget=4)
    assert tilde_ind(t) == 0


def test_twist_validation():
    h = circle_space(5, SHARP_NONNEG)
    w = h.window
    truncated = np.zeros((w.dim, w.dim), dtype=np.complex128)
    for n in range(-w.half_width, w.half_width):
        truncated[w.index_of(0, n + 1), w.index_of(0, n)] = 1.0
    with pytest.raises(InvalidInput):
        Twist(base=h, operator=WindowedOperator(domain_window=w, range_window=w,
                                                base_window=w, matrix=truncated))
    with pytest.raises(InvalidInput):
        Twist(base=h, operator=shift_operator(w, 1), budget=0)
    t = Twist(base=h, operator=shift_operator(w, 1), budget=2)
    assert commutator_rank(t) == 1


def test_twist_graph_clips_leaking_mode():
    h = circle_space(4, SHARP_NONNEG)
    g = twist_graph(Twist(base=h, operator=shift_operator(h.window, 1), budget=2))
    assert g.subspace.dim == h.dim - 1
    v = np.zeros(2 * h.dim, dtype=np.complex128)
    v[h.window.index_of(0, 0)] = 1.0
    v[h.dim + h.window.index_of(0, 1)] = 1.0
    assert g.subspace.contains(v / np.sqrt(2))


@pytest.mark.parametrize("k", [-2, -1, 1, 2])
def test_compose_with_twist_contract(k):
    # the composite index must shift by the twist index on both sides,
    # including shifts that push cap modes across the window edge
    h = circle_space(6)
    t = Twist(base=h, operator=shift_operator(h.window, k), budget=2 * abs(k))
    ti = tilde_ind(t)
    assert compose_with_twist(t, disk_out(h), "pre") == 1 + ti
    assert compose_with_twist(t, disk_in(h), "post") == 0 + ti


def test_compose_with_twist_validation():
    h = circle_space(5)
    t = Twist(base=h, operator=shift_operator(h.window, 1), budget=2)
    with pytest.raises(CompositionMismatch):
        compose_with_twist(t, disk_in(h), "pre")
    with pytest.raises(InvalidInput):
        compose_with_twist(t, disk_out(h), "sideways")


def test_tilde_ind_survives_interior_rebase():
    h = circle_space(7, SHARP_NONNEG)
    t = Twist(base=h, operator=shift_operator(h.window, 1), budget=2)
    interior = [h.window.index_of(0, n) for n in range(-4, 5)]
    for seed in range(6):
        s = perturb_splitting(h.splitting, 2, seed=seed, support=interior)
        assert tilde_ind(t.with_base_splitting(s)) == 1


def test_is_bordism_annulus_and_disks():
    hb = circle_space(4, SHARP_NONNEG)
    assert is_bordism(diag_link(hb, 0.5), 2)
    assert not is_bordism(diag_link(hb, 0.5), 0)
    ha = circle_space(3)
    assert is_bordism(disk_in(ha), 0)
    assert not is_bordism(disk_in(circle_space(3, SHARP_NONNEG)), 6)


def test_is_special():
    h = circle_space(4)
    assert is_special(diag_link(h, 0.5))
    assert is_special(graph_correspondence(h, np.eye(h.dim)))
    assert not is_special(disk_in(h))
    assert not is_special(disk_out(h))


def test_apply_to_subspace():
    h = circle_space(4, SHARP_NONNEG)
    l = diag_link(h, 0.5)
    half = mode_span(h.window, lambda n: n >= 0)
    # diagonal weights never change a coordinate span
    assert subspaces_equal(apply_to_subspace(l, half), half)
    rng = np.random.default_rng(3)
    a = np.eye(h.dim) + 0.3 * rng.standard_normal((h.dim, h.dim))
    g = graph_correspondence(h, a)
    img = apply_to_subspace(g, half)
    assert subspaces_equal(img, Subspace.from_span(a @ half.frame))


def test_graph_correspondence_validation():
    h = circle_space(3)
    with pytest.raises(DimensionMismatch):
        graph_correspondence(h, np.eye(h.dim + 1))
