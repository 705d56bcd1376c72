import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.noise import DiffNoiseModel, NonLatticeNoiseError, noise_log_mgf, noise_mgf, sample_diff_noise
from src.random_source import RandomSource

MODELS = [
    DiffNoiseModel.uniform(20.0),
    DiffNoiseModel.gaussian(3.0),
    DiffNoiseModel.discrete({-2.0: 0.25, 0.0: 0.5, 2.0: 0.25}),
    DiffNoiseModel.discrete({-3.0: 0.1, -1.0: 0.4, 1.0: 0.4, 3.0: 0.1}),
]


class TestMgf:
    def test_uniform_closed_form(self):
        m = DiffNoiseModel.uniform(2.0)
        assert noise_mgf(m, 0.5) == pytest.approx(math.sinh(1.0) / 1.0, rel=1e-14)

    def test_gaussian_closed_form(self):
        assert noise_mgf(DiffNoiseModel.gaussian(2.0), 0.3) == pytest.approx(math.exp(0.5 * 0.09 * 4.0))

    def test_discrete_closed_form(self):
        m = MODELS[2]
        assert noise_mgf(m, 0.7) == pytest.approx(0.5 + 0.5 * math.cosh(1.4), rel=1e-14)

    @pytest.mark.parametrize("m", MODELS)
    def test_mgf_at_zero_is_one(self, m):
        assert noise_mgf(m, 0.0) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("m", MODELS)
    def test_sub_gaussian_domination(self, m):
        s = m.sub_gaussian_sigma
        for lam in np.linspace(-3.0, 3.0, 121):
            assert noise_log_mgf(m, lam) <= 0.5 * lam * lam * s * s + 1e-12

    def test_uniform_small_argument_series(self):
        m = DiffNoiseModel.uniform(1.0)
        z = 1e-6
        assert noise_log_mgf(m, z) == pytest.approx(z * z / 6.0, rel=1e-9)

    def test_large_argument_stays_finite_in_log(self):
        m = DiffNoiseModel.uniform(20.0)
        assert math.isfinite(noise_log_mgf(m, 100.0))
        assert noise_log_mgf(m, 100.0) == pytest.approx(2000.0 - math.log(4000.0), rel=1e-12)

    def test_symmetry(self):
        for m in MODELS:
            assert noise_log_mgf(m, 1.3) == pytest.approx(noise_log_mgf(m, -1.3), rel=1e-14)


class TestSampling:
    def test_one_variate_per_draw(self):
        rng = RandomSource(4, 0)
        m = DiffNoiseModel.uniform(20.0)
        sample_diff_noise(m, rng)
        sample_diff_noise(m, rng)
        third = sample_diff_noise(m, rng)
        u = RandomSource(4, 0).uniforms(3)
        assert third == m.from_uniform(u[2])

    def test_uniform_support(self):
        u = RandomSource(1, 0).uniforms(50000)
        x = DiffNoiseModel.uniform(20.0).from_uniform(u)
        assert x.min() >= -20.0 and x.max() <= 20.0
        assert abs(x.mean()) < 0.3

    def test_gaussian_moments(self):
        u = RandomSource(2, 0).uniforms(100000)
        x = DiffNoiseModel.gaussian(3.0).from_uniform(u)
        assert abs(x.mean()) < 0.05
        assert x.std() == pytest.approx(3.0, rel=0.02)

    def test_gaussian_extreme_uniforms_finite(self):
        x = DiffNoiseModel.gaussian(1.0).from_uniform(np.array([0.0, 1.0 - 2.0 ** -53]))
        assert np.all(np.isfinite(x))

    def test_discrete_frequencies(self):
        u = RandomSource(3, 0).uniforms(100000)
        x = MODELS[2].from_uniform(u)
        assert set(np.unique(x)) <= {-2.0, 0.0, 2.0}
        assert np.mean(x == 0.0) == pytest.approx(0.5, abs=0.01)
        assert np.mean(x == 2.0) == pytest.approx(0.25, abs=0.01)


class TestValidation:
    def test_masses_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            DiffNoiseModel(family="discrete", support=(-1.0, 1.0), masses=(0.5, 0.6))

    def test_asymmetric_rejected(self):
        with pytest.raises(ValidationError):
            DiffNoiseModel(family="discrete", support=(-1.0, 2.0), masses=(0.5, 0.5))

    def test_comma_separated_lists(self):
        m = DiffNoiseModel(family="discrete", support="2, -2, 0", masses="0.25, 0.25, 0.5")
        assert m.support == (-2.0, 0.0, 2.0)
        assert m.masses == (0.25, 0.5, 0.25)

    def test_uniform_needs_half_width(self):
        with pytest.raises(ValidationError):
            DiffNoiseModel(family="uniform")


class TestMetadata:
    def test_scales(self):
        assert DiffNoiseModel.uniform(20.0).sub_gaussian_sigma == 20.0
        assert DiffNoiseModel.gaussian(3.0).support_half_width == math.inf
        assert MODELS[3].support_half_width == 3.0
        assert DiffNoiseModel.uniform(20.0).variance == pytest.approx(400.0 / 3.0)

    def test_agent_models(self):
        assert DiffNoiseModel.uniform(20.0).agent_model().half_width == 10.0
        assert DiffNoiseModel.gaussian(2.0).agent_model().variance == pytest.approx(2.0)
        with pytest.raises(ValueError):
            MODELS[2].agent_model()

    def test_lattice(self):
        step, offsets, masses = MODELS[2].lattice()
        assert step == 2.0
        assert offsets == [-1, 0, 1]
        assert masses == [0.25, 0.5, 0.25]

    def test_odd_lattice_has_unit_step(self):
        step, offsets, _ = MODELS[3].lattice()
        assert step == 1.0
        assert offsets == [-3, -1, 1, 3]

    def test_non_lattice(self):
        with pytest.raises(NonLatticeNoiseError):
            DiffNoiseModel.uniform(1.0).lattice()
        with pytest.raises(NonLatticeNoiseError):
            DiffNoiseModel.discrete({-0.5: 0.5, 0.5: 0.5}).lattice()
