import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chirp2d import (
    DomainError,
    NoiseSpec,
    SingularGramError,
    design_matrix_apply,
    error_sum,
    generate_noise,
    linear_solve,
    mirror,
    periodogram,
    profiled_error_sum,
    synthesize,
)
from chirp2d.model import DEMO_KERNEL
from chirp2d.objective import projections

from _oracles import (
    DEMO,
    SINGLE,
    cross_chirp_sums,
    direct_gram,
    direct_periodogram,
    direct_projections,
    single_chirp_sums,
)

freq = st.floats(0.05, math.pi - 0.05)
points = st.tuples(freq, freq, freq, freq)
grids = st.integers(1, 9).flatmap(
    lambda M: st.integers(1, 9).flatmap(
        lambda N: arrays(np.float64, (M, N), elements=st.floats(-5, 5, allow_subnormal=False))
    )
)

T1 = (1.5, 0.5, 2.5, 0.75)


def _sum_phase(p, M, N):
    m = np.arange(1, M + 1, dtype=float)[:, None]
    n = np.arange(1, N + 1, dtype=float)[None, :]
    return p[0] * m + p[1] * m * m + p[2] * n + p[3] * n * n


# --- periodogram ---------------------------------------------------------------


def test_zero_data_gives_zero():
    assert periodogram(np.zeros((6, 5)), (1.0, 1.0, 1.0, 1.0)) == 0.0
    _, proj = design_matrix_apply(np.zeros((6, 5)), (1.0, 1.0, 1.0, 1.0))
    np.testing.assert_array_equal(proj, [0.0, 0.0])


def test_two_by_two_identity_matches_direct_sum():
    y = [[1.0, 0.0], [0.0, 1.0]]
    want = direct_periodogram(y, (1.0, 1.0, 1.0, 1.0))
    # |e^{-4i} + e^{-12i}|^2 / 2
    assert want == pytest.approx(abs(np.exp(-4j) + np.exp(-12j)) ** 2 / 2, rel=1e-14)
    assert periodogram(np.array(y), (1.0, 1.0, 1.0, 1.0)) == pytest.approx(want, rel=1e-12)


def test_peak_value_near_limit():
    y = synthesize(SINGLE, 100, 100)
    value = periodogram(y, T1)
    assert abs(value - 65000.0) < 0.05 * 65000.0
    assert value == pytest.approx(direct_periodogram(y.tolist(), T1), rel=1e-9)


@pytest.mark.parametrize("size", [(3, 4), (8, 8), (16, 16), (16, 5)])
def test_streaming_matches_direct_sum(size):
    rng = np.random.default_rng(sum(size))
    y = rng.normal(size=size)
    for _ in range(100):
        pt = rng.uniform(0.01, math.pi - 0.01, 4)
        assert periodogram(y, pt) == pytest.approx(direct_periodogram(y.tolist(), pt), rel=1e-10, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(grids, points, st.floats(0.01, 100))
def test_periodogram_nonnegative_and_scale_equivariant(y, pt, kappa):
    base = periodogram(y, pt)
    assert base >= 0.0
    assert periodogram(kappa * y, pt) == pytest.approx(kappa**2 * base, rel=1e-9, abs=1e-9)


def test_scaled_data_has_same_argmax_on_coarse_grid():
    y = synthesize(SINGLE, 12, 12) + generate_noise(NoiseSpec(0.5, seed=3), 12, 12)
    axis = np.linspace(0.2, math.pi - 0.2, 7)
    nodes = [(a, b, g, d) for a in axis for b in axis for g in axis for d in axis]
    best = int(np.argmax([periodogram(y, p) for p in nodes]))
    assert int(np.argmax([periodogram(3.7 * y, p) for p in nodes])) == best


@settings(max_examples=40, deadline=None)
@given(grids, points)
def test_mirror_point_has_same_periodogram(y, pt):
    assert periodogram(y, mirror(pt)) == pytest.approx(periodogram(y, pt), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("bad", [(0.0, 1, 1, 1), (1, math.pi, 1, 1), (1, 1, -0.5, 1), (1, 1, 1)])
def test_points_outside_open_box_are_rejected(bad):
    with pytest.raises(DomainError):
        periodogram(np.ones((3, 3)), bad)


# --- design matrix products ----------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(grids, points)
def test_gram_and_projections_match_direct_sums(y, pt):
    gram, proj = design_matrix_apply(y, pt)
    M, N = y.shape
    np.testing.assert_allclose(gram, direct_gram(pt, M, N), rtol=1e-9, atol=1e-9 * M * N)
    np.testing.assert_allclose(proj, direct_projections(y.tolist(), pt), rtol=1e-9, atol=1e-9 * (1 + np.abs(y).sum()))
    assert np.allclose(gram, gram.T)
    assert np.linalg.eigvalsh(gram).min() >= -1e-9 * M * N


def test_gram_tends_to_half_identity():
    rng = np.random.default_rng(7)
    for _ in range(5):
        pt = rng.uniform(0.1, math.pi - 0.1, 4)
        gram, _ = design_matrix_apply(np.zeros((200, 200)), pt)
        g = gram / 200**2
        assert abs(g[0, 1]) < 0.01
        assert abs(g[0, 0] - 0.5) < 0.01 and abs(g[1, 1] - 0.5) < 0.01


# --- linear solve and error sums -----------------------------------------------


def test_exact_solve_recovers_unit_amplitude():
    from chirp2d import ChirpComponent

    c = ChirpComponent(1.0, 0.0, *T1)
    A, B = linear_solve(synthesize(c, 50, 50), T1, "exact")
    assert A == pytest.approx(1.0, rel=1e-10)
    assert abs(B) < 1e-10


def test_exact_and_approximate_agree_at_large_size():
    y = synthesize(SINGLE, 100, 100) + generate_noise(NoiseSpec(0.5, seed=1), 100, 100)
    ex = np.array(linear_solve(y, T1, "exact"))
    ap = np.array(linear_solve(y, T1, "approximate"))
    assert np.all(np.abs(ex - ap) < 0.01 * np.abs(ex))


def test_approximate_mode_is_scaled_projection():
    y = np.random.default_rng(0).normal(size=(7, 9))
    c, s = direct_projections(y.tolist(), T1)
    A, B = linear_solve(y, T1, "approximate")
    assert A == pytest.approx(2 * c / 63, rel=1e-10)
    assert B == pytest.approx(2 * s / 63, rel=1e-10)


def test_demo_amplitudes_near_truth():
    y = synthesize(DEMO, 100, 100) + generate_noise(NoiseSpec(math.sqrt(2), DEMO_KERNEL, 0), 100, 100)
    A, B = linear_solve(y, (DEMO.alpha, DEMO.beta, DEMO.gamma, DEMO.delta), "exact")
    assert abs(A - 6) < 0.3 and abs(B - 6) < 0.3


def test_singular_gram_is_reported():
    # every phase is a multiple of 2*pi*k at (pi/2,)*4 on a 1x1 grid: sin column vanishes
    y = np.ones((1, 1))
    with pytest.raises(SingularGramError) as info:
        linear_solve(y, (math.pi / 2,) * 4, "exact")
    assert info.value.point == tuple([math.pi / 2] * 4)
    with pytest.raises(ValueError):
        linear_solve(y, (1.0, 1.0, 1.0, 1.0), "fast")


def test_exact_residual_is_orthogonal_to_design():
    y = synthesize(SINGLE, 30, 40) + generate_noise(NoiseSpec(1.0, seed=2), 30, 40)
    pt = (1.4, 0.51, 2.45, 0.7501)
    A, B = linear_solve(y, pt, "exact")
    ph = _sum_phase(pt, 30, 40)
    r = y - A * np.cos(ph) - B * np.sin(ph)
    bound = 1e-8 * np.linalg.norm(y)
    assert abs(np.sum(r * np.cos(ph))) < bound
    assert abs(np.sum(r * np.sin(ph))) < bound


def test_error_sum_at_noiseless_truth_and_zero_pair():
    y = synthesize(SINGLE, 40, 40)
    assert error_sum(y, T1, (2.0, 3.0)) <= 1e-18 * y.size * 13
    assert error_sum(y, T1, (0.0, 0.0)) == pytest.approx(float(np.sum(y * y)), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(grids.filter(lambda a: a.size >= 4), points)
def test_profiled_error_sum_equals_error_sum_at_exact_pair(y, pt):
    try:
        pair = linear_solve(y, pt, "exact")
    except SingularGramError:
        return
    direct = error_sum(y, pt, pair)
    scale = float(np.sum(y * y)) + 1.0
    assert profiled_error_sum(y, pt) == pytest.approx(direct, abs=1e-9 * scale)
    assert direct <= error_sum(y, pt, (pair.A + 0.1, pair.B)) + 1e-9 * scale


def test_q_plus_periodogram_approximates_total_energy():
    y = synthesize(SINGLE, 100, 100) + generate_noise(NoiseSpec(0.5, seed=4), 100, 100)
    yty = float(np.sum(y * y))
    q = error_sum(y, T1, linear_solve(y, T1, "exact"))
    # with G ~ (MN/2) I the projected energy proj^T G^-1 proj is (2/MN)(C^2 + S^2)
    assert abs(yty - q - periodogram(y, T1)) / yty < 0.02


def test_projection_signs():
    y = synthesize(SINGLE, 20, 20)
    c, s = projections(y, T1)
    assert c > 0 and s > 0


# --- limits of normalised trigonometric sums -----------------------------------


SUM_SIZES = (25, 50, 100, 200)


def test_single_chirp_sums_vanish_at_large_size():
    rng = np.random.default_rng(0)
    for _ in range(5):
        w = rng.uniform(0.1, math.pi - 0.1, 4)
        small = single_chirp_sums(w, 25)
        large = single_chirp_sums(w, 200)
        for key, v in large.items():
            assert abs(v) < 0.05, key
        mean_small = np.mean([abs(v) for v in small.values()])
        mean_large = np.mean([abs(v) for v in large.values()])
        assert mean_large < mean_small


def test_single_chirp_sums_decrease():
    rng = np.random.default_rng(1)
    w = rng.uniform(0.1, math.pi - 0.1, 4)
    trend = [np.mean([abs(v) for v in single_chirp_sums(w, M).values()]) for M in SUM_SIZES]
    assert trend[-1] < trend[0]
    assert np.polyfit(np.log(SUM_SIZES), np.log(trend), 1)[0] < 0


@pytest.mark.xfail(
    strict=True,
    reason="cross-products of two chirps normalised by sqrt(MN) stay O(1) at M=N=200; "
    "the generic quadratic Weyl sum is not o(sqrt(M)) at practical sizes",
)
def test_cross_chirp_sums_vanish_at_large_size():
    rng = np.random.default_rng(0)
    for _ in range(5):
        w = rng.uniform(0.1, math.pi - 0.1, 4)
        q = rng.uniform(0.1, math.pi - 0.1, 4)
        for key, v in cross_chirp_sums(w, q, 200).items():
            assert abs(v) < 0.05, key


def test_cross_chirp_sums_are_bounded():
    # what does hold: normalised by MN instead of sqrt(MN) they vanish
    rng = np.random.default_rng(0)
    for _ in range(5):
        w = rng.uniform(0.1, math.pi - 0.1, 4)
        q = rng.uniform(0.1, math.pi - 0.1, 4)
        for v in cross_chirp_sums(w, q, 200).values():
            assert abs(v) / 200 < 0.05
