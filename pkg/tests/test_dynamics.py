import numpy as np
import pytest
from pydantic import ValidationError

from src.bounds import bistar_drift_cap, warmup_index
from src.dynamics import (
    BistarState,
    DiffState,
    ProcessKind,
    SystemKind,
    SystemSpec,
    bistar_step,
    cross_difference,
    diff_step,
    evolve_bistar,
    evolve_diff,
    simulate_batch,
    simulate_bistar,
    simulate_diff,
)
from src.influence import InfluenceFunction
from src.noise import DiffNoiseModel
from src.random_source import RandomSource

ZERO = InfluenceFunction.constant(0.0)
ONE = InfluenceFunction.constant(1.0)


class QueuedSource:
    """Replays fixed variates in order"""

    def __init__(self, values):
        self.values = list(values)

    def uniform(self):
        return self.values.pop(0)


class TestDiffStep:
    def test_zero_state_branches_coincide(self, ref_G, uniform_noise):
        for u in (0.0, 0.3, 0.999):
            nxt = diff_step(DiffState(0.0, 0), ref_G, uniform_noise, QueuedSource([u, 0.75]))
            assert nxt.y == 10.0
            assert nxt.t == 1

    def test_certain_influence_resets(self, uniform_noise):
        nxt = diff_step(DiffState(7.0, 3), ONE, uniform_noise, QueuedSource([0.999, 0.25]))
        assert nxt.y == -10.0
        assert nxt.t == 4

    def test_influenced_branch(self, ref_G, uniform_noise):
        # G(4) = 1/3 > 0.2, noise 20 * (2 * 0.5375 - 1) = 1.5
        nxt = diff_step(DiffState(4.0, 0), ref_G, uniform_noise, QueuedSource([0.2, 0.5375]))
        assert nxt.y == pytest.approx(1.5)

    def test_uninfluenced_branch(self, ref_G, uniform_noise):
        nxt = diff_step(DiffState(4.0, 0), ref_G, uniform_noise, QueuedSource([0.5, 0.5375]))
        assert nxt.y == pytest.approx(5.5)


class TestSimulateDiff:
    def test_empty_horizon(self, ref_G, uniform_noise):
        path = simulate_diff(ref_G, uniform_noise, 0, RandomSource(1, 0))
        assert path.values.tolist() == [0.0]
        assert path.horizon == 0

    def test_no_influence_is_random_walk(self, uniform_noise):
        T = 50
        path = simulate_diff(ZERO, uniform_noise, T, RandomSource(5, 2))
        u = RandomSource(5, 2).uniforms(2 * T)
        steps = uniform_noise.from_uniform(u[1::2])
        assert np.allclose(path.values[1:], np.cumsum(steps), rtol=0.0, atol=1e-12)

    def test_matches_iterated_steps(self, ref_G, uniform_noise):
        T = 40
        path = simulate_diff(ref_G, uniform_noise, T, RandomSource(11, 4))
        rng = RandomSource(11, 4)
        state = DiffState()
        values = [state.y]
        for _ in range(T):
            state = diff_step(state, ref_G, uniform_noise, rng)
            values.append(state.y)
        assert np.array_equal(path.values, np.array(values))
        assert path.master_seed == 11 and path.stream_id == 4

    def test_bounded_noise_envelope(self, ref_G, uniform_noise):
        paths = simulate_batch(SystemSpec(G=ref_G, noise=uniform_noise), 60, 3, range(200))[ProcessKind.Y]
        t = np.arange(61)
        assert np.all(np.abs(paths) <= 20.0 * t + 1e-9)

    def test_kernel_reset_and_walk(self):
        coins = np.array([[0.9, 0.1, 0.9]])
        noise = np.array([[1.0, 2.0, 3.0]])
        G = InfluenceFunction.constant(0.5)
        assert evolve_diff(coins, noise, G).tolist() == [[0.0, 1.0, 2.0, 5.0]]

    def test_negative_horizon(self, ref_G, uniform_noise):
        with pytest.raises(ValueError):
            simulate_diff(ref_G, uniform_noise, -1, RandomSource(0, 0))


class TestBistar:
    def _arrays(self, T, fill):
        return [np.full((1, T), v) for v in fill]

    def test_follower_resets_to_leader(self):
        coins, noise, cf, nf, cg, ng = self._arrays(3, (0.5, 1.0, 0.5, 2.0, 0.5, -1.0))
        y, yf, yg = evolve_bistar(coins, noise, cf, nf, cg, ng, ZERO, ONE)
        assert yf[0, 1:].tolist() == [2.0, 2.0, 2.0]
        assert yg[0, 1:].tolist() == [-1.0, -1.0, -1.0]
        assert y[0].tolist() == [0.0, 1.0, 2.0, 3.0]

    def test_always_pulled_never_reset(self):
        coins, noise, cf, nf, cg, ng = self._arrays(3, (0.5, 4.0, 0.5, 1.0, 0.5, 1.0))
        y, yf, yg = evolve_bistar(coins, noise, cf, nf, cg, ng, ONE, ZERO)
        # pre-step leader differences are 0, 4, 4
        assert y[0].tolist() == [0.0, 4.0, 4.0, 4.0]
        assert yf[0].tolist() == [0.0, 1.0, 4.0, 7.0]
        assert yg[0].tolist() == [0.0, 1.0, 0.0, -1.0]

    def test_step_cases(self, uniform_noise):
        G = InfluenceFunction.constant(0.5)
        state = BistarState(y=6.0, y_f1=2.0, y_g2=-2.0, t=0)
        # leader influenced, follower f reset, follower g not reset; all noise 0
        nxt = bistar_step(state, G, G, uniform_noise, QueuedSource([0.1, 0.5, 0.1, 0.5, 0.9, 0.5]))
        assert (nxt.y, nxt.y_f1, nxt.y_g2, nxt.t) == (0.0, 3.0, -5.0, 1)

    def test_cross_difference(self):
        state = BistarState(y=1.0, y_f1=2.0, y_g2=4.0)
        assert state.y_fg == -1.0
        assert cross_difference(np.array([1.0]), np.array([2.0]), np.array([4.0])).tolist() == [-1.0]

    def test_empty_horizon(self, ref_G, ref_G_tilde, uniform_noise):
        paths = simulate_bistar(ref_G, ref_G_tilde, uniform_noise, 0, RandomSource(1, 0))
        assert [p.values.tolist() for p in paths] == [[0.0]] * 4
        assert [p.process for p in paths] == [ProcessKind.Y, ProcessKind.Y_F1, ProcessKind.Y_G2, ProcessKind.Y_FG]

    def test_reset_follower_path_is_noise(self, uniform_noise):
        T = 20
        _, yf, _, _ = simulate_bistar(ZERO, ONE, uniform_noise, T, RandomSource(8, 1))
        u = RandomSource(8, 1).uniforms(6 * T)
        assert np.array_equal(yf.values[1:], uniform_noise.from_uniform(u[3::6]))

    def test_matches_iterated_steps(self, ref_G, ref_G_tilde, uniform_noise):
        T = 30
        paths = simulate_bistar(ref_G, ref_G_tilde, uniform_noise, T, RandomSource(2, 9))
        rng = RandomSource(2, 9)
        state = BistarState()
        rows = [(0.0, 0.0, 0.0, 0.0)]
        for _ in range(T):
            state = bistar_step(state, ref_G, ref_G_tilde, uniform_noise, rng)
            rows.append((state.y, state.y_f1, state.y_g2, state.y_fg))
        expected = np.array(rows).T
        for path, row in zip(paths, expected):
            assert np.array_equal(path.values, row)

    def test_drift_cap_under_leader_envelope(self, bistar_spec):
        T = 64
        D = 20.0
        paths = simulate_batch(bistar_spec, T, 21, range(300))
        y, yf = paths[ProcessKind.Y], paths[ProcessKind.Y_F1]
        l_t = warmup_index(T, 0.5)
        tau = np.arange(l_t, T + 1)
        held = np.all(np.abs(y[:, l_t:]) <= D * np.sqrt(tau), axis=1)
        assert held.any()
        assert np.all(np.abs(yf[held, T]) <= bistar_drift_cap(T, D))


class TestSymmetryAndDeterminism:
    @pytest.mark.parametrize("kind", [SystemKind.TWO_AGENT, SystemKind.BISTAR])
    @pytest.mark.parametrize("noise", [
        DiffNoiseModel.uniform(20.0),
        DiffNoiseModel.gaussian(2.0),
        DiffNoiseModel.discrete({-2.0: 0.25, 0.0: 0.5, 2.0: 0.25}),
    ])
    def test_noise_negation_negates_paths(self, kind, noise, ref_G, ref_G_tilde):
        spec = SystemSpec(kind=kind, G=ref_G, G_tilde=ref_G_tilde, noise=noise)
        plain = simulate_batch(spec, 40, 13, range(25))
        flipped = simulate_batch(spec.negated(), 40, 13, range(25))
        for process in spec.processes:
            assert np.array_equal(flipped[process], -plain[process])

    def test_random_configs_negation(self):
        rng = np.random.default_rng(0)
        for i in range(30):
            G = InfluenceFunction.rational(alpha=float(rng.uniform(0.1, 3.0)), g0=float(rng.uniform(0.1, 1.0)))
            Gt = InfluenceFunction.rational(alpha=float(rng.uniform(0.05, 1.0)))
            spec = SystemSpec(kind=SystemKind.BISTAR, G=G, G_tilde=Gt, noise=DiffNoiseModel.uniform(float(rng.uniform(1, 30))))
            plain = simulate_batch(spec, 15, i, range(5))
            flipped = simulate_batch(spec.negated(), 15, i, range(5))
            assert all(np.array_equal(flipped[p], -plain[p]) for p in spec.processes)

    def test_per_agent_negation(self, ref_G, ref_G_tilde):
        spec = SystemSpec(kind=SystemKind.BISTAR, G=ref_G, G_tilde=ref_G_tilde,
                          noise=DiffNoiseModel.uniform(20.0), per_agent_noise=True)
        plain = simulate_batch(spec, 20, 4, range(10))
        flipped = simulate_batch(spec.negated(), 20, 4, range(10))
        assert np.array_equal(flipped[ProcessKind.Y_F1], -plain[ProcessKind.Y_F1])

    def test_batch_rows_independent_of_grouping(self, bistar_spec):
        whole = simulate_batch(bistar_spec, 25, 17, range(10))
        part = simulate_batch(bistar_spec, 25, 17, range(6, 10))
        for process in bistar_spec.processes:
            assert np.array_equal(whole[process][6:], part[process])


class TestSystemSpec:
    def test_bistar_needs_follower_influence(self, ref_G, uniform_noise):
        with pytest.raises(ValidationError):
            SystemSpec(kind=SystemKind.BISTAR, G=ref_G, noise=uniform_noise)

    def test_per_agent_discrete_rejected(self, ref_G, lattice_noise):
        with pytest.raises(ValidationError):
            SystemSpec(G=ref_G, noise=lattice_noise, per_agent_noise=True)

    def test_variates_per_step(self, ref_G, ref_G_tilde, uniform_noise):
        assert SystemSpec(G=ref_G, noise=uniform_noise).variates_per_step == 2
        assert SystemSpec(G=ref_G, noise=uniform_noise, per_agent_noise=True).variates_per_step == 3
        bistar = SystemSpec(kind=SystemKind.BISTAR, G=ref_G, G_tilde=ref_G_tilde, noise=uniform_noise)
        assert bistar.variates_per_step == 6
        assert bistar.model_copy(update={"per_agent_noise": True}).variates_per_step == 7

    def test_per_agent_difference_noise_in_support(self, uniform_noise):
        spec = SystemSpec(G=ONE, noise=uniform_noise, per_agent_noise=True)
        y = simulate_batch(spec, 30, 6, range(200))[ProcessKind.Y]
        # G = 1 resets every step, so each value is one difference draw
        assert np.all(np.abs(y) <= 20.0)
        assert np.var(y[:, 1:]) == pytest.approx(400.0 / 6.0, rel=0.1)
