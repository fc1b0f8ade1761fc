"""Tests for the fan layer: construction, the four index formulas, and
retwisting."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fredcorr.circles import LaurentSymbol, twist_circle
from fredcorr.errors import DimensionMismatch, InvalidInput, NotAFan
from fredcorr.fans import (
    Fan,
    TwistChain,
    fan_from_twists,
    fan_index,
    finite_rank_twist,
    half_part,
    interval_part,
    partition_parts,
    random_fan,
    twist_fan,
)
from fredcorr.subspaces import principal_cosines, subspaces_equal
from fredcorr.windows import mode_interval, mode_span


def circle_setup(m=6):
    space = twist_circle(m).space()
    return space, space.window


def all_formulas(report):
    vals = [report.formula1, report.formula3, report.formula4]
    if report.formula2 is not None:
        vals.append(report.formula2)
    return vals


def test_untwisted_fan_is_zero():
    space, w = circle_setup()
    f = fan_from_twists(space, partition_parts(w, [-2, 3]), [None] * 3)
    rep = fan_index(f)
    assert rep == type(rep)(formula1=0, formula2=0, formula3=0, formula4=0)
    for part, member in zip(f.parts, f.members):
        assert subspaces_equal(part, member)


def test_sphere_fan_index_one():
    space, w = circle_setup()
    z = LaurentSymbol.monomial(1)
    f = fan_from_twists(space, [half_part(w, "nonneg"), half_part(w, "negative")],
                        [None, z])
    rep = fan_index(f)
    assert (rep.formula1, rep.formula3, rep.formula4) == (1, 1, 1)
    assert rep.formula2 is None
    assert subspaces_equal(f.members[1], mode_span(w, lambda n: n <= 0))


def test_identity_twists_keep_parts():
    space, w = circle_setup(5)
    parts = partition_parts(w, [0])
    eye = np.eye(w.dim, dtype=np.complex128)
    ident_sym = LaurentSymbol.identity()
    f = fan_from_twists(space, parts, [eye, ident_sym])
    for part, member in zip(f.parts, f.members):
        assert subspaces_equal(part, member)
    assert fan_index(f).formula2 == 0


def test_shift_twist_moves_interval():
    space, w = circle_setup()
    z = LaurentSymbol.monomial(1)
    parts = [interval_part(w, None, -3), interval_part(w, -2, 2),
             interval_part(w, 3, None)]
    f = fan_from_twists(space, parts, [None, z, None])
    assert subspaces_equal(f.members[1], mode_interval(w, -1, 3))
    # boundary part drags its padded companion through the edge
    g = fan_from_twists(space, parts, [z, None, None])
    assert subspaces_equal(g.members[0], mode_span(w, lambda n: n <= -2))


def test_finite_rank_twist_stays_close():
    rng = np.random.default_rng(5)
    space, w = circle_setup()
    parts = partition_parts(w, [0])
    u = np.zeros(w.dim, dtype=np.complex128)
    v = np.zeros(w.dim, dtype=np.complex128)
    u[w.index_of(0, 1)] = 1.0
    v[w.index_of(0, -1)] = 1.0
    f = fan_from_twists(space, parts, [finite_rank_twist(w, [u], [v], 0.3), None])
    rep = fan_index(f)
    assert all_formulas(rep) == [0, 0, 0, 0]
    cos = principal_cosines(f.members[0], f.parts[0])
    assert f.members[0].dim == f.parts[0].dim
    assert cos.min() > 0.8


def test_three_part_shift_pattern():
    space, w = circle_setup()
    z = LaurentSymbol.monomial(1)
    zi = LaurentSymbol.monomial(-1)
    parts = partition_parts(w, [-2, 3])
    f = fan_from_twists(space, parts, [z, zi, None])
    rep = fan_index(f)
    # bottom part extends one mode through the window edge (+1), the
    # interior shift and the untwisted part contribute nothing
    assert all_formulas(rep) == [1, 1, 1]
    dims = [m.dim for m in f.members]
    assert sum(dims) - w.dim == 1


def test_retwist_sphere_fan():
    space, w = circle_setup()
    z = LaurentSymbol.monomial(1)
    zi = LaurentSymbol.monomial(-1)
    f = fan_from_twists(space, [half_part(w, "nonneg"), half_part(w, "negative")],
                        [None, z])
    assert fan_index(twist_fan(f, [None, z])).formula1 == 2
    assert fan_index(twist_fan(f, [None, zi])).formula1 == 0
    assert fan_index(twist_fan(f, [z, None])).formula1 == 0
    untouched = twist_fan(f, [None, None])
    for a, b in zip(untouched.members, f.members):
        assert subspaces_equal(a, b)


def test_opposite_interior_twists_cancel():
    space, w = circle_setup()
    z = LaurentSymbol.monomial(1)
    zi = LaurentSymbol.monomial(-1)
    f = fan_from_twists(space, partition_parts(w, [-3, 0, 3]), [None] * 4)
    rep = fan_index(twist_fan(f, [None, z, zi, None]))
    assert all_formulas(rep) == [0, 0, 0]


def test_refining_an_untwisted_part_keeps_value():
    space, w = circle_setup()
    z = LaurentSymbol.monomial(1)
    coarse = fan_from_twists(space, partition_parts(w, [0]), [z, None])
    fine = fan_from_twists(space, partition_parts(w, [0, 4]), [z, None, None])
    a, b = fan_index(coarse), fan_index(fine)
    assert a.formula1 == b.formula1
    assert a.formula3 == b.formula3
    assert a.formula4 == b.formula4


def test_permutation_invariance():
    rng = np.random.default_rng(23)
    for _ in range(6):
        f = random_fan(rng)
        rep = fan_index(f)
        for _ in range(10):
            perm = rng.permutation(f.n_parts)
            g = Fan(ambient=f.ambient,
                    parts=tuple(f.parts[i] for i in perm),
                    members=tuple(f.members[i] for i in perm))
            rep_p = fan_index(g)
            assert rep_p.formula1 == rep.formula1
            assert rep_p.formula3 == rep.formula3
            assert rep_p.formula4 == rep.formula4


def test_random_fans_four_formulas_agree():
    rng = np.random.default_rng(71)
    for _ in range(40):
        rep = fan_index(random_fan(rng))
        assert len(set(all_formulas(rep))) == 1


def test_random_retwists_stay_consistent():
    rng = np.random.default_rng(72)
    for _ in range(20):
        f = random_fan(rng)
        syms = [None if rng.random() < 0.5
                else LaurentSymbol.monomial(int(rng.choice([-1, 1])))
                for _ in range(f.n_parts)]
        rep = fan_index(twist_fan(f, syms))
        assert len(set(all_formulas(rep))) == 1


def test_budget_violation_raises():
    space, w = circle_setup()
    z = LaurentSymbol.monomial(1)
    with pytest.raises(NotAFan):
        fan_from_twists(space, partition_parts(w, [0]), [z, None], budget=0)


def test_overlapping_parts_rejected():
    space, w = circle_setup()
    nonneg = mode_span(w, lambda n: n >= 0)
    neg = mode_span(w, lambda n: n < 0)
    with pytest.raises(NotAFan):
        Fan(ambient=space, parts=(nonneg, nonneg), members=(nonneg, nonneg))
    f = Fan(ambient=space, parts=(nonneg, neg), members=(nonneg, neg))
    assert fan_index(f).formula1 == 0
    assert fan_index(f).formula2 is None


def test_twist_fan_needs_construction():
    space, w = circle_setup()
    nonneg = mode_span(w, lambda n: n >= 0)
    neg = mode_span(w, lambda n: n < 0)
    f = Fan(ambient=space, parts=(nonneg, neg), members=(nonneg, neg))
    with pytest.raises(InvalidInput):
        twist_fan(f, [None, None])
    g = fan_from_twists(space, partition_parts(w, [0]), [None, None])
    with pytest.raises(InvalidInput):
        twist_fan(g, [None])


def test_chain_validation():
    space, w = circle_setup()
    with pytest.raises(InvalidInput):
        TwistChain(factors=(("weird", None),))
    bad = np.eye(3, dtype=np.complex128)
    chain = TwistChain(factors=(("interior", bad),))
    with pytest.raises(DimensionMismatch):
        chain.realize(w)


@settings(deadline=None, max_examples=25)
@given(st.integers(min_value=0, max_value=2), st.integers(min_value=-1, max_value=1),
       st.integers(min_value=-1, max_value=1))
def test_two_part_shift_fans_agree(cut, k1, k2):
    space, w = circle_setup(5)
    syms = [None if k == 0 else LaurentSymbol.monomial(k) for k in (k1, k2)]
    f = fan_from_twists(space, partition_parts(w, [cut]), syms)
    rep = fan_index(f)
    assert len(set(all_formulas(rep))) == 1
    # window-edge contributions: the lower part carries k1, the interior
    # boundary between the parts cancels, the top edge carries -k2
    assert rep.formula1 == k1 - k2
