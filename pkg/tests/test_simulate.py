import numpy as np
import pytest

from chirp2d import ChirpModel, McConfig, NoiseSpec, OptConfig, run_mc, summarize
from chirp2d.simulate import AllReplicatesFailed, run_replicate

from _oracles import DOUBLE, SINGLE, cached_mc, rate_scale

T = SINGLE.as_array()
LSE = ("lse",)


# --- summarize ---------------------------------------------------------------------


def test_single_exact_estimate():
    avg, bias, mse = summarize([T], T)
    np.testing.assert_array_equal(avg, T)
    assert not np.any(bias) and not np.any(mse)


def test_symmetric_pair():
    _, bias, mse = summarize([T + 1, T - 1], T)
    np.testing.assert_allclose(bias, 0, atol=1e-15)
    np.testing.assert_allclose(mse, 1, rtol=1e-14)


def test_sampling_distribution_of_mse():
    v = 0.04
    draws = T + np.random.default_rng(0).normal(scale=np.sqrt(v), size=(1000, 6))
    _, _, mse = summarize(draws, T)
    assert np.all(np.abs(mse / v - 1) < 0.15)


def test_summarize_errors():
    with pytest.raises(ValueError):
        summarize([], T)
    with pytest.raises(ValueError):
        summarize([[1.0, 2.0]], T)


# --- configuration and failures ------------------------------------------------------


def test_config_validation():
    model = ChirpModel([SINGLE])
    with pytest.raises(ValueError):
        McConfig(model, NoiseSpec(0.1), 10, 10, replicates=0)
    with pytest.raises(ValueError):
        McConfig(model, NoiseSpec(0.1), 10, 10, methods=("ml",))
    with pytest.raises(ValueError):
        McConfig(model, NoiseSpec(0.1), 10, 10, methods=())
    with pytest.raises(ValueError):
        McConfig(DOUBLE, NoiseSpec(0.1), 10, 10, sequential=False)
    with pytest.raises(ValueError):
        McConfig(model, NoiseSpec(0.1), 10, 10, init="random")


def test_noiseless_single_replicate():
    cfg = McConfig(ChirpModel([SINGLE]), NoiseSpec(0.0), 50, 50, replicates=1, methods=LSE)
    cell = run_mc(cfg).cell("lse")
    assert np.all(np.abs(cell.bias) * rate_scale(50, 50) < 1e-6)
    np.testing.assert_allclose(cell.mse, cell.bias**2, rtol=1e-12, atol=1e-300)
    assert cell.n_used == 1 and cell.failures == 0


def test_replicate_uses_offset_seed():
    cfg = McConfig(ChirpModel([SINGLE]), NoiseSpec(0.5), 16, 16, replicates=3, base_seed=7, methods=LSE)
    shifted = McConfig(ChirpModel([SINGLE]), NoiseSpec(0.5), 16, 16, replicates=1, base_seed=9, methods=LSE)
    a = run_replicate(cfg, 2)["lse"][0][0]
    b = run_replicate(shifted, 0)["lse"][0][0]
    np.testing.assert_array_equal(a, b)


def test_non_converged_fits_are_counted_and_excluded():
    opt = OptConfig(max_iters=3, restarts=0)
    cfg = McConfig(ChirpModel([SINGLE]), NoiseSpec(0.5), 16, 16, replicates=4, methods=LSE, optcfg=opt)
    with pytest.raises(AllReplicatesFailed):
        run_mc(cfg)


def test_report_invariants_and_serialisation():
    rep = cached_mc("table1", 25, 0.5, 20)
    for (method, k), cell in rep.cells.items():
        assert np.all(cell.mse >= cell.bias**2 - 1e-15)
        assert cell.failures <= 20 and cell.n_used + cell.failures == 20
    d = rep.to_dict()
    assert d["schema_version"] == 1 and "wall_time_s" in d
    assert "wall_time_s" not in rep.to_dict(include_timing=False)
    lines = rep.to_csv().splitlines()
    assert lines[0].startswith("sigma,stat,alse:A1,alse:B1,alse:alpha1")
    assert [ln.split(",")[1] for ln in lines[1:]] == ["True", "Avg", "Bias", "MSE", "AVar"]


def test_reproducible_bytes():
    def make(workers):
        return McConfig(ChirpModel([SINGLE]), NoiseSpec(0.5), 16, 16, replicates=4, workers=workers)

    a = run_mc(make(1)).to_json(include_timing=False)
    assert a == run_mc(make(1)).to_json(include_timing=False)
    assert a == run_mc(make(2)).to_json(include_timing=False)


def test_truth_initialisation():
    cfg = McConfig(DOUBLE, NoiseSpec(0.1), 30, 30, replicates=2, init="truth", methods=LSE)
    rep = run_mc(cfg)
    assert np.all(np.abs(rep.cell("lse", 2).bias[2:]) < 0.05)


# --- statistical behaviour -----------------------------------------------------------


@pytest.mark.slow
def test_lse_mse_alpha_against_avar_on_large_grid():
    cell = cached_mc("table1", 100, 0.5, 200, methods=LSE).cell("lse")
    assert 7.38e-8 / 3 <= cell.mse[2] <= 3 * 7.38e-8
    assert f"{cell.avar[2]:.2E}" == "7.38E-08"


@pytest.mark.slow
def test_lse_mse_to_avar_ratio_on_large_grid():
    cell = cached_mc("table1", 100, 0.5, 200, methods=LSE).cell("lse")
    ratio = cell.mse[2:] / cell.avar[2:]
    assert np.all((ratio >= 1 / 3) & (ratio <= 3))


@pytest.mark.slow
def test_coloured_noise_inflates_mse():
    iid = cached_mc("table1", 25, 0.1, 200, methods=LSE).cell("lse")
    ma = cached_mc("table1", 25, 0.1, 200, kernel="ma", methods=LSE).cell("lse")
    assert 1.0 <= ma.mse[2] / iid.mse[2] <= 2.25
    assert ma.avar[2] / iid.avar[2] == pytest.approx(1.5)


@pytest.mark.slow
@pytest.mark.parametrize("method", ["alse", "lse"])
def test_mse_grows_with_sigma(method):
    lo = cached_mc("table1", 25, 0.1, 50).cell(method)
    hi = cached_mc("table1", 25, 1.0, 50).cell(method)
    assert np.all(hi.mse[2:] > lo.mse[2:])


@pytest.mark.slow
@pytest.mark.parametrize("method", ["alse", "lse"])
def test_mse_shrinks_with_grid_size(method):
    mse = [cached_mc("table1", M, 0.5, 100).cell(method).mse[2] for M in (25, 50, 100)]
    assert mse[0] > mse[1] > mse[2]
