import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowrank_aqc.instances import figure1_instance, gus_instance
from lowrank_aqc.linalg import (Combination, Dense, DimensionError, Indicator, Interval, LowRankHermitian,
                                Uniform, apply, gram_matrix, inner_product, orthonormalize, zero_vector)

cplx = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


@st.composite
def vectors(draw, N):
    kind = draw(st.sampled_from(["uniform", "indicator", "interval", "dense", "combination"]))
    if kind == "uniform":
        return Uniform(N, draw(cplx))
    if kind == "indicator":
        idx = sorted(draw(st.sets(st.integers(0, N - 1), min_size=1, max_size=N)))
        amps = draw(st.lists(cplx, min_size=len(idx), max_size=len(idx)))
        return Indicator(N, idx, amps)
    if kind == "interval":
        a = draw(st.integers(0, N - 1))
        b = draw(st.integers(a + 1, N))
        return Interval(N, a, b, draw(cplx))
    if kind == "dense":
        re = draw(st.lists(st.floats(-2, 2), min_size=N, max_size=N))
        im = draw(st.lists(st.floats(-2, 2), min_size=N, max_size=N))
        return Dense(np.array(re) + 1j * np.array(im))
    n = draw(st.integers(1, 3))
    return Combination([(draw(cplx), draw(vectors(N))) for _ in range(n)], N)


@st.composite
def pairs(draw):
    N = draw(st.integers(1, 64))
    return draw(vectors(N)), draw(vectors(N))


def test_uniform_against_indicator():
    assert inner_product(Uniform(4), Indicator(4, [0])) == pytest.approx(0.5, abs=1e-15)


def test_uniform_self():
    for N in (1, 7, 10**12):
        assert inner_product(Uniform(N), Uniform(N)) == pytest.approx(1.0, abs=1e-14)


def test_random_combination_pair_n8():
    rng = np.random.default_rng(3)

    def rand():
        return Combination([(complex(*rng.normal(size=2)), Indicator(8, [1, 5], rng.normal(size=2))),
                            (complex(*rng.normal(size=2)), Uniform(8)),
                            (1.0, Dense(rng.normal(size=8) + 1j * rng.normal(size=8)))])

    u, v = rand(), rand()
    assert abs(inner_product(u, v) - np.vdot(u.to_dense(), v.to_dense())) <= 1e-14


@settings(max_examples=200, deadline=None)
@given(pairs())
def test_inner_product_matches_dense(p):
    u, v = p
    ref = np.vdot(u.to_dense(), v.to_dense())
    scale = max(1.0, np.linalg.norm(u.to_dense()) * np.linalg.norm(v.to_dense()))
    assert abs(inner_product(u, v) - ref) <= 1e-13 * scale


def test_inner_product_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner_product(Uniform(4), Uniform(5))


def test_indicator_validation():
    with pytest.raises(ValueError):
        Indicator(4, [2, 1])
    with pytest.raises(ValueError):
        Indicator(4, [1, 1])
    with pytest.raises(ValueError):
        Indicator(4, [4])


def test_combination_is_flat():
    inner = Combination([(2.0, Uniform(8)), (1.0, Indicator(8, [3]))])
    outer = Combination([(1.0, inner), (-1.0, Indicator(8, [0]))])
    assert all(not isinstance(a, Combination) for _, a in outer.atoms())


def test_vectors_are_immutable():
    v = Uniform(4)
    with pytest.raises(AttributeError):
        v.N = 5


def test_large_n_without_allocation():
    N = 10**12
    psi = Uniform(N)
    e = Indicator(N, [0, N - 1])
    assert inner_product(psi, e) == pytest.approx(2 / math.sqrt(N), rel=1e-14)
    with pytest.raises(Exception):
        psi.to_dense()


def test_apply_projector_on_uniform():
    H_F = gus_instance(100, 1).H_F
    out = apply(H_F, Uniform(100))
    assert np.allclose(out.to_dense(), -0.1 * np.eye(100)[0], atol=1e-15)


def test_apply_kernel_gives_zero():
    H = LowRankHermitian([-1.0, 0.5], [Indicator(6, [0]), Indicator(6, [1])])
    v = Indicator(6, [3, 4], [1.0, 2j])
    assert np.abs(apply(H, v).to_dense()).max() == 0.0


def test_apply_figure1_matches_dense():
    H_I = figure1_instance(16).H_I
    e1 = Indicator(16, [0])
    assert np.abs(apply(H_I, e1).to_dense() - H_I.to_dense() @ e1.to_dense()).max() <= 1e-14


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_apply_hermitian_form(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(2, 33))
    r = int(rng.integers(1, min(N, 4) + 1))
    Q = np.linalg.qr(rng.normal(size=(N, r)) + 1j * rng.normal(size=(N, r)))[0]
    H = LowRankHermitian(rng.uniform(-1, 1, r), [Dense(Q[:, j]) for j in range(r)])
    u = Dense(rng.normal(size=N) + 1j * rng.normal(size=N))
    v = Combination([(1.0, Uniform(N)), (0.5j, Indicator(N, [0]))])
    assert abs(inner_product(u, apply(H, v)) - np.conj(inner_product(v, apply(H, u)))) <= 1e-13


def test_gus_calibration():
    H_I, H_F, psi, _ = gus_instance(10**6, 16)
    assert H_I.norm() == 1.0 and H_F.norm() == 1.0
    assert H_I.is_calibrated() and H_F.is_calibrated()
    assert np.abs(gram_matrix(H_F.vectors) - np.eye(16)).max() <= 1e-12


def test_gus_fully_marked():
    H_I, H_F, psi, _ = gus_instance(4, 4)
    assert np.allclose(apply(H_F, psi).to_dense(), -psi.to_dense(), atol=1e-15)


def test_gus_errors():
    with pytest.raises(ValueError):
        gus_instance(10, [])
    with pytest.raises(ValueError):
        gus_instance(10, [10])


def test_figure1_orthogonality_and_spectrum():
    for N in (4, 16, 10**4, 10**9):
        H_I = figure1_instance(N).H_I
        assert abs(inner_product(*H_I.vectors)) <= 1e-15
    ev = np.linalg.eigvalsh(figure1_instance(8).H_I.to_dense())
    assert np.allclose(ev, [-1, 0, 0, 0, 0, 0, 0, 1], atol=1e-14)
    with pytest.raises(ValueError):
        figure1_instance(7)


def test_nonorthonormal_factors_rejected():
    with pytest.raises(ValueError):
        LowRankHermitian([1.0, 1.0], [Uniform(4), Indicator(4, [0])])


def test_orthonormalize_drops_dependent():
    N = 10
    vs = [Uniform(N), Indicator(N, [0]), Combination([(2.0, Uniform(N)), (1.0, Indicator(N, [0]))])]
    basis = orthonormalize(vs)
    assert len(basis) == 2
    assert np.abs(gram_matrix(basis) - np.eye(2)).max() <= 1e-12


def test_zero_vector():
    assert inner_product(zero_vector(5), Uniform(5)) == 0
