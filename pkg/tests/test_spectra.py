import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowrank_aqc.evolution import TwoLevelModel
from lowrank_aqc.instances import AffinePath, figure1_instance, gus_instance, random_instance
from lowrank_aqc.reduction import build
from lowrank_aqc.spectra import eigencurves, gap_scaling_slope, level_gap, min_gap


def _gus_gap(N, s):
    # two-level closed form for -(1-s)|psi><psi| - s|w><w|
    return math.sqrt(1 - 4 * s * (1 - s) * (1 - 1 / N))


@pytest.fixture(scope="module")
def fig1():
    inst = figure1_instance(10**4)
    rs = build(*inst[:3])
    return rs, eigencurves(rs, inst.path, 4001)


def test_figure1_two_crossings(fig1):
    rs, curves = fig1
    cs = curves.crossings()
    assert len(cs) == 2
    assert [c.pair for c in cs] == [0, 1]
    for c in cs:
        assert 0.0 < c.t < 1.0
        assert 0.1 * rs.delta3 <= c.gap <= 10 * rs.delta3
        assert not c.true_crossing
        # width edges sit where the pair separates to twice the minimum
        assert 0 < c.width < 0.2


def test_figure1_crossing_refinement_is_local_minimum(fig1):
    rs, curves = fig1
    for c in curves.crossings():
        h = 1e-4
        for x in (c.t - h, c.t + h):
            if 0 <= x <= 1:
                assert level_gap(rs, curves.path, x, c.pair) >= c.gap - 1e-12


def test_figure1_counts_equal_n(fig1):
    rs, curves = fig1
    assert np.all(curves.counts() == rs.N)


def test_figure1_against_dense_small():
    inst = figure1_instance(16)
    rs = build(*inst[:3])
    curves = eigencurves(rs, inst.path, 41)
    HI, HF = inst.H_I.to_dense(), inst.H_F.to_dense()
    for i, t in enumerate(curves.t):
        ref = np.linalg.eigvalsh(HI + 2 * t * HF)
        merged = np.sort(np.concatenate([curves.block[i], np.zeros(curves.zero_mult)]))
        assert np.abs(merged - ref).max() <= 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_rank2_merged_spectrum_against_dense(seed):
    inst = random_instance(np.random.default_rng(seed), 32, 2, 2)
    rs = build(*inst[:3])
    curves = eigencurves(rs, inst.path, 11)
    HI, HF = inst.H_I.to_dense(), inst.H_F.to_dense()
    for i, t in enumerate(curves.t):
        merged = np.sort(np.concatenate([curves.block[i], np.zeros(curves.zero_mult)]))
        assert merged.size == 32
        ref = np.linalg.eigvalsh(inst.path.a(t) * HI + inst.path.b(t) * HF)
        assert np.abs(merged - ref).max() <= 1e-10


def test_zero_final_hamiltonian_gives_constant_levels():
    inst = figure1_instance(100)
    # H_F = 0 is the path with b identically zero
    rs = build(*inst[:3])
    curves = eigencurves(rs, AffinePath(1.0, 0.0, 0.0, 0.0), 11)
    assert np.allclose(curves.levels(3), [[-1.0, 0.0, 0.0]] * 11, atol=1e-14)
    assert np.allclose(curves.block.max(axis=1), 1.0, atol=1e-14)


def test_eigencurve_continuity(fig1):
    rs, curves = fig1
    # |d lambda / dt| <= ||dH/dt|| = 2 ||H_F||
    dt = curves.t[1] - curves.t[0]
    assert np.abs(np.diff(curves.block, axis=0)).max() <= 2.0 * dt + 1e-12


def test_grid_must_be_at_least_two():
    inst = gus_instance(10, 1)
    with pytest.raises(ValueError):
        eigencurves(build(*inst[:3]), inst.path, 1)


@pytest.mark.parametrize("N", [100, 10**4, 10**6])
def test_gus_min_gap_closed_form(N):
    inst = gus_instance(N, 1)
    rs = build(*inst[:3])
    mg = min_gap(eigencurves(rs, inst.path, 2001))
    assert mg.g == pytest.approx(1 / math.sqrt(N), rel=1e-9)
    assert mg.s0 == pytest.approx(0.5, abs=1e-6)
    assert 0.1 * rs.delta3 <= mg.g <= 10 * rs.delta3
    assert mg.tau1 == pytest.approx(1 / mg.Delta)


def test_gus_gap_curve_matches_closed_form():
    N = 400
    inst = gus_instance(N, 1)
    curves = eigencurves(build(*inst[:3]), inst.path, 101)
    ref = np.array([_gus_gap(N, s) for s in curves.t])
    assert np.abs(curves.gap - ref).max() <= 1e-12


def test_gus_gap_scaling_slope():
    Ns = [10**2, 10**3, 10**4, 10**5]
    gaps = []
    for N in Ns:
        inst = gus_instance(N, 1)
        gaps.append(min_gap(eigencurves(build(*inst[:3]), inst.path, 2001)).g)
    assert gap_scaling_slope(Ns, gaps) == pytest.approx(-0.5, abs=0.1)


@pytest.mark.parametrize("m", [4, 16])
def test_degenerate_final_ground_space_closes_at_endpoint(m):
    # the m - 1 marked states orthogonal to the symmetric one sit at -s and meet the ground level at s = 1
    N = 10**5
    inst = gus_instance(N, m)
    rs = build(*inst[:3])
    curves = eigencurves(rs, inst.path, 2001)
    mg = min_gap(curves)
    assert mg.true_crossing and mg.s0 == 1.0
    assert np.all(curves.gap[:-1] > 0)
    dense_like = np.array([min(_gus_gap_m(N, m, s), 0.5 * (1 + _gus_gap_m(N, m, s)) - s) for s in curves.t[:-1]])
    assert np.abs(curves.gap[:-1] - dense_like).max() <= 1e-12


def _gus_gap_m(N, m, s):
    return math.sqrt(1 - 4 * s * (1 - s) * (1 - m / N))


def test_two_level_instance_gap():
    d = 0.1
    g, _ = TwoLevelModel(d).min_gap()
    assert g == pytest.approx(d / math.sqrt(1 + d * d), abs=1e-10)


def test_csv(tmp_path):
    inst = figure1_instance(100)
    curves = eigencurves(build(*inst[:3]), inst.path, 5)
    p = tmp_path / "curves.csv"
    curves.write_csv(p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["t", "lambda1", "lambda2", "lambda3", "lambda4", "zero_multiplicity", "g", "Delta"]
    assert len(rows) == 6
    assert int(rows[1][5]) == 96
    assert float(rows[-1][6]) == curves.gap[-1]
