import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.influence import InfluenceFunction, StabilityClass, eval_influence, stability_class


class TestEvalInfluence:
    @pytest.mark.parametrize("x, expected", [(0.0, 1.0), (1.0, 0.5), (4.0, 1.0 / 3.0)])
    def test_rational_values(self, x, expected):
        G = InfluenceFunction.rational(alpha=0.5)
        assert eval_influence(G, x) == pytest.approx(expected, rel=1e-15)

    def test_g0_scales(self):
        G = InfluenceFunction.rational(alpha=1.0, g0=0.4)
        assert eval_influence(G, 0.0) == pytest.approx(0.4)
        assert eval_influence(G, 3.0) == pytest.approx(0.1)

    def test_threshold_and_constant(self):
        H = InfluenceFunction.hard_threshold(threshold=5.0, g0=0.7)
        assert eval_influence(H, 5.0) == 0.7
        assert eval_influence(H, 5.0001) == 0.0
        assert eval_influence(InfluenceFunction.constant(0.3), 1e9) == 0.3

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            eval_influence(InfluenceFunction.rational(alpha=0.5), -1.0)

    def test_call_matches_evaluate(self):
        G = InfluenceFunction.rational(alpha=0.75)
        assert G(2.0) == G.evaluate(2.0)

    @pytest.mark.parametrize("G", [
        InfluenceFunction.rational(alpha=0.5),
        InfluenceFunction.rational(alpha=3.0, g0=0.6),
        InfluenceFunction.hard_threshold(threshold=2.0),
        InfluenceFunction.constant(0.2),
    ])
    def test_non_increasing_in_unit_range(self, G):
        x = np.linspace(0.0, 1e4, 10001)
        values = eval_influence(G, x)
        assert np.all(np.diff(values) <= 0.0)
        assert np.all((values >= 0.0) & (values <= 1.0))
        assert values[0] == G.g0

    def test_huge_distance_does_not_overflow(self):
        G = InfluenceFunction.rational(alpha=3.0)
        assert G.evaluate(1e300) == 0.0

    def test_array_in_array_out(self):
        out = InfluenceFunction.rational(alpha=0.5).evaluate(np.array([0.0, 1.0]))
        assert isinstance(out, np.ndarray)
        assert out.tolist() == [1.0, 0.5]


class TestValidation:
    def test_rational_needs_alpha(self):
        with pytest.raises(ValidationError):
            InfluenceFunction(family="rational")

    def test_g0_outside_unit_interval(self):
        with pytest.raises(ValidationError):
            InfluenceFunction.rational(alpha=0.5, g0=1.5)

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            InfluenceFunction(family="constant", g0=0.5, beta=1.0)


class TestStability:
    @pytest.mark.parametrize("alpha, expected", [
        (0.5, StabilityClass.STABLE),
        (1.99, StabilityClass.STABLE),
        (2.0, StabilityClass.BOUNDARY),
        (3.0, StabilityClass.UNSTABLE),
    ])
    def test_rational(self, alpha, expected):
        assert stability_class(InfluenceFunction.rational(alpha=alpha)) == expected

    def test_threshold_is_unstable(self):
        assert stability_class(InfluenceFunction.hard_threshold(threshold=10.0)) == StabilityClass.UNSTABLE

    def test_positive_constant_is_stable(self):
        assert stability_class(InfluenceFunction.constant(0.1)) == StabilityClass.STABLE

    def test_margins(self):
        G = InfluenceFunction.rational(alpha=0.5)
        assert G.margin(1.0) == pytest.approx(0.5)
        assert G.margin(2.0) == pytest.approx(1.5)
        assert G.decays_slower_than(1.0)
        assert not InfluenceFunction.rational(alpha=3.0).decays_slower_than(2.0)
        assert InfluenceFunction.hard_threshold(threshold=1.0).decay_exponent == math.inf
