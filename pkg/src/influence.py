"""
Influence Functions - Parametric probability-of-influence curves G(x)
"""
import math
from enum import Enum
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

ArrayLike = Union[float, np.ndarray]


class StabilityClass(str, Enum):
    """Stability of the two-agent opinion-difference chain under G"""

    STABLE = "stable"
    UNSTABLE = "unstable"
    BOUNDARY = "boundary"


class InfluenceFunction(BaseModel):
    """
    Non-increasing influence probability G(x) of one agent on another.

    Families:
        rational:  G0 / (1 + x**alpha)
        threshold: G0 * 1[x <= threshold]
        constant:  G0
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["rational", "threshold", "constant"] = "rational"
    g0: float = Field(1.0, ge=0.0, le=1.0)
    alpha: Optional[float] = Field(None, gt=0.0)
    threshold: Optional[float] = Field(None, ge=0.0)

    @model_validator(mode="after")
    def _check_family_parameters(self) -> "InfluenceFunction":
        if self.family == "rational" and self.alpha is None:
            raise ValueError("rational influence requires 'alpha'")
        if self.family == "threshold" and self.threshold is None:
            raise ValueError("threshold influence requires 'threshold'")
        return self

    @classmethod
    def rational(cls, alpha: float, g0: float = 1.0) -> "InfluenceFunction":
        return cls(family="rational", g0=g0, alpha=alpha)

    @classmethod
    def hard_threshold(cls, threshold: float, g0: float = 1.0) -> "InfluenceFunction":
        return cls(family="threshold", g0=g0, threshold=threshold)

    @classmethod
    def constant(cls, g0: float) -> "InfluenceFunction":
        return cls(family="constant", g0=g0)

    def evaluate(self, x: ArrayLike) -> ArrayLike:
        """
        Evaluate G at non-negative distances without argument checks.

        Args:
            x: Distance(s), assumed >= 0

        Returns:
            Influence probability, float for scalar input, array otherwise
        """
        arr = np.asarray(x, dtype=np.float64)
        if self.family == "rational":
            with np.errstate(over="ignore"):
                out = self.g0 / (1.0 + np.power(arr, self.alpha))
        elif self.family == "threshold":
            out = np.where(arr <= self.threshold, self.g0, 0.0)
        else:
            out = np.full_like(arr, self.g0)
        if np.ndim(x) == 0:
            return float(out)
        return out

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return eval_influence(self, x)

    @property
    def decay_exponent(self) -> float:
        """Tail exponent a such that G(x) behaves like 1/x^a for large x"""
        if self.family == "rational":
            return float(self.alpha)
        if self.family == "constant" and self.g0 > 0.0:
            return 0.0
        return math.inf

    def decays_slower_than(self, power: float) -> bool:
        """
        Whether G(x) >~ 1/x^(power - delta) for some delta > 0.

        Args:
            power: Reference exponent (1 for bounded noise, 2 for stability)

        Returns:
            bool: True when the decay exponent is strictly below power
        """
        return self.decay_exponent < power

    def margin(self, power: float) -> float:
        """The delta in G(x) >~ 1/x^(power - delta); non-positive when none exists"""
        return power - self.decay_exponent

    def describe(self) -> str:
        if self.family == "rational":
            return f"{self.g0:g}/(1+x^{self.alpha:g})"
        if self.family == "threshold":
            return f"{self.g0:g}*1[x<={self.threshold:g}]"
        return f"{self.g0:g}"


def eval_influence(f: InfluenceFunction, x: ArrayLike) -> ArrayLike:
    """
    Evaluate an influence function at a distance

    Args:
        f: Influence function
        x: Non-negative distance(s)

    Returns:
        Influence probability in [0, 1]

    Raises:
        ValueError: If any distance is negative
    """
    if np.any(np.asarray(x) < 0):
        raise ValueError(f"influence distance must be non-negative, got {x}")
    return f.evaluate(x)


def stability_class(f: InfluenceFunction) -> StabilityClass:
    """
    Classify two-agent stability from the family's tail exponent.

    Stable when G(x) >~ 1/x^(2-delta), unstable when 1/x^(2+delta) >~ G(x),
    boundary when neither strict inequality holds (exponent exactly 2).
    """
    if f.family == "threshold":
        return StabilityClass.UNSTABLE
    if f.family == "constant":
        return StabilityClass.STABLE if f.g0 > 0.0 else StabilityClass.UNSTABLE
    if f.alpha < 2.0:
        return StabilityClass.STABLE
    if f.alpha > 2.0:
        return StabilityClass.UNSTABLE
    return StabilityClass.BOUNDARY
