import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

import oracles
from multilin.region import (IndexTuple, LPFailure, RegionMismatch, _simplex_feasible, check_r2_equivalence,
                             check_sufficiency, gamma_membership, hull_equivalence_scan, hull_membership,
                             lambda_floors, lambda_membership, r2_fuzz, random_index_tuple, subsets)

INF = math.inf

grain = st.integers(0, 48).map(lambda k: F(k, 8))
recip_p = st.one_of(st.just(INF), st.integers(1, 32).map(lambda k: F(k, 8)))
r_vals = st.sampled_from([F(3, 2), F(5, 4), F(2), F(7, 4), F(6, 5)])


@st.composite
def tuples(draw, m=None):
    m = m or draw(st.integers(2, 3))
    n = draw(st.integers(1, 2))
    p = draw(st.lists(recip_p, min_size=m, max_size=m))
    assume(any(v != INF for v in p))
    s = draw(st.lists(grain, min_size=m, max_size=m))
    return IndexTuple(m, n, draw(r_vals), tuple(p), tuple(s))


# verdicts ------------------------------------------------------------------------------

def test_worked_verdicts():
    v = check_sufficiency(IndexTuple(2, 1, 2, (2, 2), (F("0.51"), F("0.51"))))
    assert v.bounded and v.status == "bounded" and v.failing_condition is None and v.witness is None
    v = check_sufficiency(IndexTuple(2, 1, 2, (1, 1), (F("0.6"), F("0.6"))))
    assert v.bounded is False and v.failing_J == [1, 2] and v.witness == "prop_1_3"
    assert v.failing_condition["value"] == F("-0.8")
    for p in ((1, 1), (2, INF), (F(1, 3), 7)):
        v = check_sufficiency(IndexTuple(2, 1, 2, p, (F(1, 2), 5)))
        assert v.bounded is False and v.failing_condition["min_s"] == 1 and v.witness == "prop_1_2"
        assert v.boundary


def test_float_verdicts_match_rationals():
    assert check_sufficiency(IndexTuple(2, 1, 2.0, (2.0, 2.0), (0.51, 0.51))).bounded
    v = check_sufficiency(IndexTuple(2, 1, 2.0, (1.0, 1.0), (0.6, 0.6)))
    assert v.failing_J == [1, 2]
    # within the 1e-12 band a float lands on the boundary
    v = check_sufficiency(IndexTuple(2, 1, 2.0, (1.0, 1.0), (0.5 + 1e-13, 3.0)))
    assert v.bounded is False and v.boundary


def test_first_failing_certificate_is_lexicographic():
    v = check_sufficiency(IndexTuple(3, 1, F(3, 2), (F(1, 2), F(1, 2), F(1, 2)), (1, 1, 1)))
    assert v.failing_J == [1]
    assert subsets(3) == [(1,), (1, 2), (1, 2, 3), (1, 3), (2,), (2, 3), (3,)]


def test_record_fields():
    rec = check_sufficiency(IndexTuple(2, 1, 2, (1, 1), (F("0.6"), F("0.6")))).record()
    assert set(rec) == {"bounded", "status", "failing_J", "failing_min_s", "witness", "boundary"}
    assert rec["failing_J"] == [1, 2] and rec["failing_min_s"] is None


def test_open_sufficiency_above_two():
    v = check_sufficiency(IndexTuple(2, 1, 3, (2, 2), (1, 1)))
    assert v.bounded is None and v.status == "open_sufficiency"
    v = check_sufficiency(IndexTuple(2, 1, 3, (2, 2), (F(1, 3), 1)))
    assert v.bounded is False and v.witness == "prop_1_2"


@pytest.mark.parametrize("kw", [dict(m=1, p=(1,), s=(1,)), dict(n=0), dict(r=1), dict(r=INF), dict(p=(0, 1)),
                                dict(s=(-1, 1)), dict(p=(INF, INF)), dict(p=(1, 1, 1)), dict(s=(True, 1))])
def test_index_tuple_validation(kw):
    args = dict(m=2, n=1, r=2, p=(1, 1), s=(1, 1))
    args.update(kw)
    with pytest.raises((ValueError, TypeError)):
        IndexTuple(**args)


def test_infinite_exponent_contributes_zero():
    idx = IndexTuple(2, 1, 2, (INF, 1), (F(3, 5), F(3, 5)))
    assert idx.inv_p == (0, 1)
    assert idx.j_sum((1,)) == F(3, 5)
    assert check_sufficiency(idx).bounded


# r = 2 specialization ---------------------------------------------------------------------

def test_r2_fuzz_full_agreement():
    assert r2_fuzz(10_000, seed=0) == 10_000


@given(st.integers(0, 2**31 - 1))
def test_r2_against_direct_conditions(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        idx = random_index_tuple(rng, int(rng.integers(2, 4)), int(rng.integers(1, 3)))
        assert check_sufficiency(idx).bounded == oracles.theorem_bc(idx.s, idx.p, idx.n)


def test_r2_boundary_tuple():
    for n in (1, 2):
        idx = IndexTuple(2, n, 2, (2, 2), (F(n, 2), 3))
        assert check_sufficiency(idx).bounded is False
        assert oracles.theorem_bc(idx.s, idx.p, n) is False
        assert check_r2_equivalence(idx)


def test_r2_equivalence_requires_r2():
    with pytest.raises(ValueError):
        check_r2_equivalence(IndexTuple(2, 1, F(3, 2), (2, 2), (1, 1)))
    assert issubclass(RegionMismatch, AssertionError)


# invariants --------------------------------------------------------------------------------

@given(tuples(), st.randoms(use_true_random=False))
def test_permutation_equivariance(idx, rnd):
    perm = list(range(idx.m))
    rnd.shuffle(perm)
    other = IndexTuple(idx.m, idx.n, idx.r, tuple(idx.p[k] for k in perm), tuple(idx.s[k] for k in perm))
    a, b = check_sufficiency(idx), check_sufficiency(other)
    assert (a.bounded, a.status, a.witness is None, a.boundary) == (b.bounded, b.status, b.witness is None, b.boundary)


@given(tuples(), st.integers(0, 2), grain)
def test_monotone_in_smoothness(idx, k, step):
    k = k % idx.m
    s = list(idx.s)
    s[k] += step
    up = IndexTuple(idx.m, idx.n, idx.r, idx.p, tuple(s))
    assert not (check_sufficiency(idx).bounded is True and check_sufficiency(up).bounded is False)


@given(tuples())
def test_sufficiency_implies_gamma(idx):
    if check_sufficiency(idx).bounded:
        assert gamma_membership(idx.s, idx.p, idx.r, idx.n, idx.m)
    assert gamma_membership(idx.s, idx.p, idx.r, idx.n, idx.m) == oracles.gamma_direct(
        [float(v) for v in idx.s], idx.p, idx.r, idx.n)


# generators and hull -------------------------------------------------------------------------

def test_gamma_examples():
    assert gamma_membership((F(3, 4), F(3, 4)), (1, 1), 2, 1, 2)  # J={1,2} sum exactly -1/2
    assert not gamma_membership((F(3, 4), F(3, 4) - F(1, 100)), (1, 1), 2, 1, 2)
    assert gamma_membership((F("0.51"), F("0.51")), (2, 2), 2, 1, 2)
    assert not gamma_membership((F("0.6"), F("0.6")), (1, 1), F(3, 2), 1, 2)
    with pytest.raises(ValueError):
        gamma_membership((1, 1), (1, 1), 1, 1, 2)


def test_lambda_examples():
    p, r, n = (1, 2), 2, 1
    assert lambda_floors(1, p, r, n) == (F(1, 2), F(1, 2))
    assert lambda_floors(2, p, r, n) == (1, 0)
    assert lambda_membership(1, (F(1, 2), F(1, 2)), p, r, n)
    assert not lambda_membership(1, (F(1, 2) - F(1, 1000), 1), p, r, n)
    assert not lambda_membership(2, (2, -F(1, 1000)), p, r, n)
    with pytest.raises(ValueError):
        lambda_membership(3, (1, 1), p, r, n)


@given(st.integers(1, 3), tuples(m=3))
def test_lambda_points_are_in_gamma(u, idx):
    fl = lambda_floors(u, idx.p, idx.r, idx.n)
    pt = tuple(a + b for a, b in zip(fl, idx.s))
    assert lambda_membership(u, pt, idx.p, idx.r, idx.n)
    assert gamma_membership(pt, idx.p, idx.r, idx.n, 3)


def test_polygon_from_generators():
    p, r, n, M = (1, 1), 2, 1, 10
    verts = [(10, 10), (F(1, 2), 10), (F(1, 2), 1), (1, F(1, 2)), (10, F(1, 2))]
    for v in verts:
        assert hull_membership(v, p, r, n, 2, M)
    cx = sum(v[0] for v in verts) / 5
    cy = sum(v[1] for v in verts) / 5
    assert hull_membership((cx, cy), p, r, n, 2, M)
    assert not hull_membership((F(2, 5), 9), p, r, n, 2, M)
    assert not hull_membership((0.4, 9.0), p, r, n, 2, M)
    # the slanted edge is the face J={1,2}
    assert hull_membership((F(3, 4), F(3, 4)), p, r, n, 2, M)
    assert not hull_membership((F(3, 4), F(3, 4) - F(1, 10**9)), p, r, n, 2, M)


def test_hull_preconditions():
    with pytest.raises(ValueError, match="cap"):
        hull_membership((1, 1), (1, 1), 2, 1, 2, 4)
    with pytest.raises(ValueError, match="exceeds"):
        hull_membership((11, 1), (1, 1), 2, 1, 2, 10)


def test_generator_points_are_hull_members():
    p, r, n, M = (1, 2, INF), F(3, 2), 1, 12
    for u in (1, 2, 3):
        fl = lambda_floors(u, p, r, n)
        for off in ((0, 0, 0), (1, 2, 3), (5, 0, 7)):
            pt = tuple(a + b for a, b in zip(fl, off))
            assert hull_membership(pt, p, r, n, 3, M)


@pytest.mark.parametrize("exact", [True, False])
def test_hull_against_scipy_over_corners(exact):
    rng = np.random.default_rng(2)
    p, r, n, M = (1, 2, INF), F(3, 2), 1, 12
    for _ in range(150):
        pt = tuple(F(int(k), 4) for k in rng.integers(-8, 48, size=3))
        if any(v < 0 for v in pt):
            continue
        if not exact:
            pt = tuple(float(v) + 1e-7 for v in pt)
        ours = hull_membership(pt, p, r, n, 3, M)
        ref = oracles.hull_by_corners([float(v) for v in pt], p, r, n, float(M))
        if ours != ref:
            # scipy decides with a tolerance; only points on a face may differ
            assert not exact
            pytest.fail(f"hull disagreement at {pt}")


@given(st.lists(st.floats(0, 12), min_size=3, max_size=3))
def test_hull_is_inside_gamma(pt):
    p, r, n, M = (1, 2, INF), F(3, 2), 1, 12
    if hull_membership(tuple(pt), p, r, n, 3, M):
        assert gamma_membership(tuple(pt), p, r, n, 3)


def test_face_points_are_members_on_both_sides():
    p, r, n, M = (1, 2, INF), F(3, 2), 1, 12
    # J = {1, 2}: s1 + s2 - 3/2 = -1/3, so s1 + s2 = 7/6
    for s1 in (F(2, 3), F(3, 4)):
        pt = (s1, F(7, 6) - s1, 5)
        assert gamma_membership(pt, p, r, n, 3)
        assert hull_membership(pt, p, r, n, 3, M)


def test_scans_report_no_mismatch():
    a = hull_equivalence_scan((1, 1), 2, 1, 2, 10, sample_count=10_000, seed=0)
    assert a.ok and a.hull_outside_gamma == 0 and a.samples == 10_000
    b = hull_equivalence_scan((1, 2, INF), 1.5, 1, 3, 12, sample_count=10_000, seed=0)
    assert b.ok and b.hull_outside_gamma == 0
    with pytest.raises(ValueError):
        hull_equivalence_scan((1, 1, 1, 1), 2, 1, 4, 10)


def test_scan_independent_of_thread_count(monkeypatch):
    reps = []
    for th in ("1", "4"):
        monkeypatch.setenv("MULTILIN_THREADS", th)
        reps.append(hull_equivalence_scan((1, 2, INF), 1.5, 1, 3, 12, sample_count=2000, seed=5))
    assert reps[0] == reps[1]


def test_simplex_small_systems():
    A = np.array([[1.0, 1.0], [1.0, -1.0]])
    assert _simplex_feasible(A, np.array([2.0, 0.0]), 1e-12)
    assert not _simplex_feasible(A, np.array([-1.0, 0.0]), 1e-12)
    Aq = np.array([[F(1), F(2)]], dtype=object)
    assert _simplex_feasible(Aq, np.array([F(1, 3)], dtype=object), 0)
    assert not _simplex_feasible(Aq, np.array([F(-1, 3)], dtype=object), 0)
    assert issubclass(LPFailure, RuntimeError)
