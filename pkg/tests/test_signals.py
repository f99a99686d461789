import numpy as np
import pytest

from subband_adapt.errors import InvalidVariance, ValidationError
from subband_adapt.signals import (
    Ar1Config,
    NoiseConfig,
    TargetKind,
    derive_seed,
    gen_ar1,
    gen_noise,
    gen_target,
    load_target_csv,
)


def test_white_ar1_is_the_innovation():
    cfg = Ar1Config(rho=0.0, length=1000, burn_in=50, seed=3)
    u = gen_ar1(cfg)
    x = np.random.Generator(np.random.PCG64(np.random.SeedSequence(3))).standard_normal(1050)
    np.testing.assert_array_equal(u, x[50:])


def test_ar1_recursion_holds():
    u = gen_ar1(Ar1Config(rho=0.9, length=500, burn_in=0, seed=1))
    x = np.random.Generator(np.random.PCG64(np.random.SeedSequence(1))).standard_normal(500)
    np.testing.assert_allclose(u[1:], 0.9 * u[:-1] + x[1:], atol=1e-12)


def test_ar1_statistics():
    u = gen_ar1(Ar1Config(rho=0.9, length=100_000, seed=11))
    lag1 = np.corrcoef(u[:-1], u[1:])[0, 1]
    assert abs(lag1 - 0.9) <= 0.02
    assert abs(np.var(u) - 1 / (1 - 0.81)) <= 0.05 / (1 - 0.81)


def test_ar1_deterministic():
    cfg = Ar1Config(rho=0.9, length=100, seed=5)
    np.testing.assert_array_equal(gen_ar1(cfg), gen_ar1(cfg))


def test_ar1_rejects_unstable():
    with pytest.raises(ValidationError):
        Ar1Config(rho=1.0, length=10)


def test_noise_variance():
    v = gen_noise(NoiseConfig(1.0, seed=2), 100_000)
    assert abs(np.var(v) - 1.0) <= 0.03
    assert abs(np.mean(v)) < 0.02


def test_noise_deterministic():
    cfg = NoiseConfig(1e-3, seed=9)
    np.testing.assert_array_equal(gen_noise(cfg, 64), gen_noise(cfg, 64))


@pytest.mark.parametrize("variance", [0.0, -1e-3])
def test_noise_rejects_nonpositive(variance):
    with pytest.raises(InvalidVariance):
        NoiseConfig(variance)


def test_noise_floor_constant():
    assert 10 * np.log10(NoiseConfig(1e-3).variance) == pytest.approx(-30.0, abs=1e-12)


def test_independent_streams():
    a = gen_noise(NoiseConfig(1.0, seed=derive_seed(42, 0, 0)), 100_000)
    b = gen_noise(NoiseConfig(1.0, seed=derive_seed(42, 1, 0)), 100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_derived_seeds():
    assert derive_seed(42, 3, 1) == derive_seed(42, 3, 1)
    seeds = {derive_seed(42, r, s) for r in range(50) for s in range(3)}
    assert len(seeds) == 150
    assert 0 <= derive_seed(2**64 - 1, 0) < 2**64


def test_sparse_target():
    t = gen_target("sparse", 256, seed=7)
    assert np.count_nonzero(t.taps) == 8
    assert t.energy == pytest.approx(1.0, abs=1e-12)


def test_sparse_nonzero_count_configurable():
    assert np.count_nonzero(gen_target("sparse", 64, 1, nonzeros=3).taps) == 3


def test_equal_energy_across_kinds():
    energies = [gen_target(k, 256, 4).energy for k in ("dispersive", "quasi-sparse", "sparse")]
    np.testing.assert_allclose(energies, 1.0, atol=1e-12)


def envelope_fraction(length, head, decay, first):
    env2 = np.exp(-2 * np.maximum(np.arange(length) - head, 0) / decay)
    return env2[:first].sum() / env2.sum()


def test_quasi_sparse_energy_concentration():
    # the envelope alone puts ~99.9% of the expected energy in the first half
    assert envelope_fraction(256, 8, 32.0, 128) > 0.99
    for seed in range(20):
        t = gen_target("quasi-sparse", 256, seed).taps
        assert t[:128] @ t[:128] >= 0.9


def test_dispersive_is_dense():
    assert np.count_nonzero(gen_target(TargetKind.DISPERSIVE, 256, 0).taps) == 256


def test_target_deterministic():
    np.testing.assert_array_equal(gen_target("sparse", 256, 3).taps, gen_target("sparse", 256, 3).taps)


def test_target_csv_round_trip(tmp_path):
    t = gen_target("quasi-sparse", 32, 1)
    path = tmp_path / "ir.csv"
    t.to_csv(path)
    assert len(path.read_text().splitlines()) == 32
    loaded = load_target_csv(path)
    assert loaded.kind is TargetKind.CUSTOM
    np.testing.assert_array_equal(loaded.taps, t.taps)


def test_target_kind_parse():
    assert TargetKind.parse("Quasi_Sparse") is TargetKind.QUASI_SPARSE
    with pytest.raises(ValidationError):
        TargetKind.parse("spiky")
