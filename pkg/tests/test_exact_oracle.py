import numpy as np
import pytest

from src import exact_oracle
from src.dynamics import ProcessKind, SystemKind, SystemSpec, simulate_batch
from src.exact_oracle import (
    MassDriftError,
    NonLatticeNoiseError,
    ResourceLimitError,
    bistar_lattice_size,
    enumerate_diff_distribution,
    exact_bistar_distribution,
    exact_diff_distribution,
    exact_tail,
)
from src.influence import InfluenceFunction
from src.noise import DiffNoiseModel

ZERO = InfluenceFunction.constant(0.0)
ONE = InfluenceFunction.constant(1.0)
STABLE = InfluenceFunction.rational(alpha=1.0)


class TestTwoAgent:
    def test_random_walk_is_trinomial(self, lattice_noise):
        dist = exact_diff_distribution(ZERO, lattice_noise, 2)
        expected = {-2: 1 / 16, -1: 4 / 16, 0: 6 / 16, 1: 4 / 16, 2: 1 / 16}
        assert dist.masses == pytest.approx(expected, abs=1e-15)
        assert dist.points() == [-4.0, -2.0, 0.0, 2.0, 4.0]

    def test_always_influence_is_noise_law(self, lattice_noise):
        dist = exact_diff_distribution(ONE, lattice_noise, 7)
        assert dist.rows() == pytest.approx([(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)])

    def test_zero_horizon(self, lattice_noise):
        dist = exact_diff_distribution(STABLE, lattice_noise, 0)
        assert dist.masses == {0: 1.0}

    @pytest.mark.parametrize("T", [1, 2, 5])
    def test_matches_path_enumeration(self, lattice_noise, T):
        dp = exact_diff_distribution(STABLE, lattice_noise, T)
        brute = enumerate_diff_distribution(STABLE, lattice_noise, T)
        assert set(dp.masses) == {o for o, m in brute.masses.items() if m > 0}
        for offset, mass in brute.masses.items():
            assert dp.mass_at(offset * brute.step) == pytest.approx(mass, abs=1e-14)

    def test_mass_conserved_and_symmetric(self, lattice_noise):
        dist = exact_diff_distribution(STABLE, lattice_noise, 20)
        assert dist.total_mass + dist.pruned_mass == pytest.approx(1.0, abs=1e-12)
        assert dist.pruned_mass <= 1e-9
        assert len(dist.masses) > 5
        for offset, mass in dist.masses.items():
            assert dist.masses.get(-offset, 0.0) == pytest.approx(mass, rel=1e-12, abs=1e-15)

    def test_long_horizon_without_drift(self, lattice_noise):
        dist = exact_diff_distribution(STABLE, lattice_noise, 400)
        assert dist.total_mass + dist.pruned_mass == pytest.approx(1.0, abs=1e-10)

    def test_mass_drift_raises(self, lattice_noise, monkeypatch):
        convolve = exact_oracle.np.convolve
        monkeypatch.setattr(exact_oracle.np, "convolve", lambda *a, **kw: 1.01 * convolve(*a, **kw))
        with pytest.raises(MassDriftError) as info:
            exact_diff_distribution(ZERO, lattice_noise, 3)
        assert info.value.step == 1
        assert info.value.drift == pytest.approx(0.01)

    def test_tail(self, lattice_noise):
        dist = exact_diff_distribution(ZERO, lattice_noise, 2)
        assert exact_tail(dist, 0.0) == pytest.approx(1.0)
        assert exact_tail(dist, 3.0) == pytest.approx(10 / 16)
        assert dist.tail(4.0) == pytest.approx(2 / 16)
        with pytest.raises(ValueError):
            exact_tail(dist, -1.0)

    def test_exact_dominance_against_random_walk(self, lattice_noise):
        for T in (5, 10, 20):
            stable = exact_diff_distribution(STABLE, lattice_noise, T)
            walk = exact_diff_distribution(ZERO, lattice_noise, T)
            for k in range(0, 2 * T + 3, 2):
                assert exact_tail(stable, k) <= exact_tail(walk, k) + 1e-12

    def test_non_lattice_rejected(self):
        with pytest.raises(NonLatticeNoiseError):
            exact_diff_distribution(STABLE, DiffNoiseModel.uniform(1.0), 3)

    def test_state_budget(self, lattice_noise):
        with pytest.raises(ResourceLimitError) as info:
            exact_diff_distribution(STABLE, lattice_noise, 100, max_states=50)
        assert info.value.requested == 201
        assert info.value.allowed == 50

    def test_pruned_mass_budget(self, lattice_noise):
        with pytest.raises(ResourceLimitError):
            exact_diff_distribution(ZERO, lattice_noise, 10, prune_threshold=0.01, pruned_mass_budget=1e-9)


class TestBistar:
    def test_first_step_is_product_law(self, lattice_noise):
        joint = exact_bistar_distribution(STABLE, STABLE, lattice_noise, 1)
        law = {-1: 0.25, 0: 0.5, 1: 0.25}
        for (a, b), mass in joint.masses.items():
            assert b % 2 == 0
            assert mass == pytest.approx(law[a] * law[b // 2])
        assert joint.marginal("y_f1").rows() == pytest.approx([(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)])

    def test_leader_marginal_matches_two_agent(self, lattice_noise):
        joint = exact_bistar_distribution(STABLE, InfluenceFunction.rational(alpha=0.5), lattice_noise, 5)
        leader = exact_diff_distribution(STABLE, lattice_noise, 5)
        marginal = joint.marginal("y")
        for offset, mass in leader.masses.items():
            assert marginal.masses[offset] == pytest.approx(mass, abs=1e-14)

    def test_mass_conserved(self, lattice_noise):
        joint = exact_bistar_distribution(STABLE, STABLE, lattice_noise, 6)
        assert joint.total_mass + joint.pruned_mass == pytest.approx(1.0, abs=1e-12)

    def test_agrees_with_simulation(self, lattice_noise):
        G_tilde = InfluenceFunction.rational(alpha=0.5)
        T, n = 4, 20000
        follower = exact_bistar_distribution(STABLE, G_tilde, lattice_noise, T).marginal("y_f1")
        spec = SystemSpec(kind=SystemKind.BISTAR, G=STABLE, G_tilde=G_tilde, noise=lattice_noise)
        sample = simulate_batch(spec, T, 77, range(n))[ProcessKind.Y_F1][:, T]
        for k in (1.0, 2.0, 4.0, 6.0):
            assert np.mean(np.abs(sample) >= k) == pytest.approx(follower.tail(k), abs=0.015)

    def test_half_grid_suffices(self, lattice_noise):
        T = 4
        joint = exact_bistar_distribution(STABLE, STABLE, lattice_noise, T)
        keys = list(joint.masses)
        assert all(isinstance(a, int) and isinstance(b, int) for a, b in keys)
        assert max(abs(a) for a, _ in keys) <= T
        assert max(abs(b) for _, b in keys) <= T * (T + 3) // 2
        assert any(b % 2 for _, b in keys)
        half = joint.step / 2.0
        for point, _ in joint.marginal("y_f1").rows():
            assert point / half == pytest.approx(round(point / half))

    def test_joint_rows_sorted(self, lattice_noise):
        rows = exact_bistar_distribution(STABLE, STABLE, lattice_noise, 2).rows()
        assert rows == sorted(rows)

    def test_state_budget(self, lattice_noise):
        assert bistar_lattice_size(lattice_noise, 10) == 21 * 241
        with pytest.raises(ResourceLimitError):
            exact_bistar_distribution(STABLE, STABLE, lattice_noise, 10, max_states=1000)

    def test_unknown_marginal(self, lattice_noise):
        with pytest.raises(ValueError):
            exact_bistar_distribution(STABLE, STABLE, lattice_noise, 1).marginal("y_g2")
