import numpy as np
import pytest

from src.random_source import RandomSource


def test_same_identifiers_same_stream():
    a = RandomSource(42, 3).uniforms(100)
    b = RandomSource(42, 3).uniforms(100)
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    a = RandomSource(42, 0).uniforms(100)
    b = RandomSource(42, 1).uniforms(100)
    assert not np.array_equal(a, b)


def test_distinct_seeds_differ():
    assert not np.array_equal(RandomSource(1, 0).uniforms(10), RandomSource(2, 0).uniforms(10))


def test_block_draw_equals_single_draws():
    rng = RandomSource(7, 5)
    singles = [rng.uniform() for _ in range(20)]
    assert np.array_equal(RandomSource(7, 5).uniforms(20), np.array(singles))


def test_variates_in_unit_interval():
    u = RandomSource(0, 0).uniforms(10000)
    assert u.min() >= 0.0 and u.max() < 1.0


def test_streams_look_independent():
    a = RandomSource(9, 0).uniforms(20000)
    b = RandomSource(9, 1).uniforms(20000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


@pytest.mark.parametrize("seed, stream", [(-1, 0), (2 ** 64, 0), (0, -1)])
def test_invalid_identifiers(seed, stream):
    with pytest.raises(ValueError):
        RandomSource(seed, stream)


def test_max_seed_accepted():
    assert 0.0 <= RandomSource(2 ** 64 - 1, 0).uniform() < 1.0
