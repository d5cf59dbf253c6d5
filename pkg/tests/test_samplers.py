import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import ks_2samp

from mirrorkit import (
    ExpFamilySpec,
    GridError,
    GridSpec,
    LogCosh,
    NegEntropy,
    Quadratic,
    Quartic,
    RngStream,
    SeparableQ,
    SquaredL2,
    mirror_mean_check,
    sample_noise,
    sample_weight,
    sample_white_noise,
)
from mirrorkit.descent import NoiseSpec
from mirrorkit.samplers import derive_seed

N = 100_000


def test_streams_are_deterministic():
    a = RngStream(123, 4)
    b = RngStream(123, 4)
    assert np.array_equal(a.uniform(100), b.uniform(100))
    assert np.array_equal(RngStream(123, 4).normal(99), RngStream(123, 4).normal(99))


def test_distinct_stream_indices_differ():
    a = RngStream(123, 0).uniform(50)
    b = RngStream(123, 1).uniform(50)
    assert not np.array_equal(a, b)
    assert derive_seed(123, 0) != derive_seed(123, 1)


def test_box_muller_moments():
    z = RngStream(7, 0).normal(N)
    assert abs(z.mean()) < 4 * 3.0 / np.sqrt(N)
    assert abs(z.var() - 1.0) < 0.05


def test_gaussian_weight_short_circuit_moments():
    spec = ExpFamilySpec(SquaredL2(1), [0.0], 1.0)
    draws = sample_weight(spec, RngStream(1, 0), size=N)[:, 0]
    assert abs(draws.mean()) <= 3 * 4e-3
    assert abs(draws.var() - 1.0) <= 0.05
    spec2 = ExpFamilySpec(SquaredL2(2), [1.5, -2.0], 0.25)
    d2 = sample_weight(spec2, RngStream(1, 1), size=N)
    np.testing.assert_allclose(d2.mean(axis=0), [1.5, -2.0], atol=0.02)
    np.testing.assert_allclose(d2.var(axis=0), [0.25, 0.25], rtol=0.05)


def test_tabulated_matches_exact_gaussian_ks():
    spec = ExpFamilySpec(SquaredL2(1), [0.0], 1.0)
    tab = sample_weight(spec, RngStream(2, 0), size=N, force_tabulated=True)[:, 0]
    exact = sample_weight(spec, RngStream(2, 1), size=N)[:, 0]
    critical = 1.628 * np.sqrt(2.0 / N)  # two-sample KS at the 1% level
    assert ks_2samp(tab, exact).statistic < critical


def test_noise_quadratic_short_circuit_and_tabulated_agree():
    tab = sample_noise(Quadratic(), RngStream(3, 0), size=N, force_tabulated=True)
    exact = sample_noise(Quadratic(), RngStream(3, 1), size=N)
    assert abs(np.var(exact) - 1.0) < 0.05
    critical = 1.628 * np.sqrt(2.0 / N)
    assert ks_2samp(tab, exact).statistic < critical


def test_logcosh_noise_symmetric():
    draws = sample_noise(LogCosh(), RngStream(4, 0), size=N)
    band = 3 * draws.std(ddof=1) / np.sqrt(N)
    assert abs(draws.mean()) <= band


def test_quartic_noise_fourth_moment_vs_quadrature():
    # independent oracle: quadrature of the density exp(-v^4/4)
    Z = quad(lambda v: np.exp(-(v**4) / 4.0), -np.inf, np.inf)[0]
    target = quad(lambda v: v**4 * np.exp(-(v**4) / 4.0), -np.inf, np.inf)[0] / Z
    draws = sample_noise(Quartic(), RngStream(5, 0), size=N)
    m4 = np.mean(draws**4)
    band = 3 * np.std(draws**4, ddof=1) / np.sqrt(N)
    assert abs(m4 - target) <= band


def test_cdf_normalization():
    for spec in (
        ExpFamilySpec(NegEntropy(1), [1.0], 0.2),
        ExpFamilySpec(SeparableQ(3.0, 1), [0.5], 0.4),
        ExpFamilySpec(SeparableQ(1.5, 1), [0.0], 1.0),
    ):
        for table in spec.tables():
            assert table.cdf[-1] == pytest.approx(1.0, abs=1e-9)
            assert table.tail_bound < 1e-8


def test_grid_too_narrow_raises():
    grid = GridSpec(half_width=2.0, points=256, auto_expand=False)
    with pytest.raises(GridError):
        ExpFamilySpec(SeparableQ(1.5, 1), [0.0], 1.0, grid=grid).tables()


def test_logcosh_grid_requires_expansion():
    # exp(-|v|) tails need |v| ~ 37 for a 1e-16 boundary; default grid of 12
    # scale units only reaches it by doubling
    draws = sample_noise(LogCosh(), RngStream(6, 0), size=1000)
    assert np.max(np.abs(draws)) > 5.0


def test_separable_q4_mirror_mean_at_zero():
    spec = ExpFamilySpec(SeparableQ(4.0, 1), [0.0], 1.0)
    draws = sample_weight(spec, RngStream(7, 0), size=N)[:, 0]
    mirrored = np.sign(draws) * np.abs(draws) ** 3
    band = 3 * mirrored.std(ddof=1) / np.sqrt(N)
    assert abs(mirrored.mean()) <= band


def test_mirror_mean_check_matrix():
    cases = [
        (SquaredL2(2), [0.3, -0.7], 0.5),
        (NegEntropy(2), [1.0, 1.0], 0.1),
        (SeparableQ(3.0, 1), [2.0], 0.5),
        (SeparableQ(1.5, 2), [0.5, 1.5], 0.3),
    ]
    for i, (p, c, s) in enumerate(cases):
        rep = mirror_mean_check(ExpFamilySpec(p, c, s), N, RngStream(11, i))
        assert rep.passed, (p.kind, rep.mc_estimate, rep.target, rep.sigma_bound)
        np.testing.assert_allclose(rep.target, p.grad(np.asarray(c, dtype=float)))


def test_mirror_mean_check_requires_enough_samples():
    spec = ExpFamilySpec(SquaredL2(1), [0.0], 1.0)
    with pytest.raises(ValueError):
        mirror_mean_check(spec, 100, RngStream(0, 0))


def test_white_noise_families():
    for kind in ("gaussian", "uniform", "rademacher"):
        spec = NoiseSpec(variance=2.0, kind=kind)
        draws = sample_white_noise(spec, RngStream(8, 0), size=N)
        assert abs(draws.mean()) < 0.05
        assert draws.var() == pytest.approx(2.0, rel=0.05)
    with pytest.raises(ValueError):
        NoiseSpec(variance=1.0, kind="cauchy")


def test_weight_draw_shapes():
    spec = ExpFamilySpec(NegEntropy(3), [1.0, 1.0, 1.0], 0.2)
    single = sample_weight(spec, RngStream(9, 0))
    assert single.shape == (3,)
    assert np.all(single > 0)
    batch = sample_weight(spec, RngStream(9, 0), size=10)
    assert batch.shape == (10, 3)
    np.testing.assert_array_equal(batch[0], single)
