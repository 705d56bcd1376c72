"""
Noise Models - Symmetric zero-mean noise for opinion-difference increments
"""
import math
from functools import reduce
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.special import logsumexp, ndtri

from src.random_source import RandomSource

ArrayLike = Union[float, np.ndarray]

# Smallest uniform fed to the Gaussian inverse CDF (Generator.random may return 0.0)
_MIN_UNIFORM = 2.0 ** -54


class NonLatticeNoiseError(ValueError):
    """Raised when a noise model does not live on an integer grid"""


class DiffNoiseModel(BaseModel):
    """
    Distribution of the difference noise n~(t).

    Families:
        uniform:  Uniform[-half_width, half_width]
        gaussian: Normal(0, sigma^2)
        discrete: finite symmetric support with point masses
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["uniform", "gaussian", "discrete"] = "uniform"
    half_width: Optional[float] = Field(None, gt=0.0)
    sigma: Optional[float] = Field(None, gt=0.0)
    support: Tuple[float, ...] = ()
    masses: Tuple[float, ...] = ()

    @field_validator("support", "masses", mode="before")
    @classmethod
    def _split_list(cls, value):
        if isinstance(value, str):
            return tuple(float(v) for v in value.split(",") if v.strip())
        return value

    @model_validator(mode="after")
    def _check_family_parameters(self) -> "DiffNoiseModel":
        if self.family == "uniform" and self.half_width is None:
            raise ValueError("uniform noise requires 'half_width'")
        if self.family == "gaussian" and self.sigma is None:
            raise ValueError("gaussian noise requires 'sigma'")
        if self.family == "discrete":
            if not self.support or len(self.support) != len(self.masses):
                raise ValueError("discrete noise requires 'support' and 'masses' of equal length")
            if any(p < 0.0 for p in self.masses):
                raise ValueError("discrete noise masses must be non-negative")
            if abs(math.fsum(self.masses) - 1.0) > 1e-12:
                raise ValueError(f"discrete noise masses sum to {math.fsum(self.masses)}, not 1")
            law = dict(zip(self.support, self.masses))
            if len(law) != len(self.support):
                raise ValueError("discrete noise support points must be distinct")
            for x, p in law.items():
                if abs(law.get(-x, -1.0) - p) > 1e-12:
                    raise ValueError(f"discrete noise is not symmetric at {x}")
            if list(self.support) != sorted(self.support):
                pairs = sorted(zip(self.support, self.masses))
                object.__setattr__(self, "support", tuple(x for x, _ in pairs))
                object.__setattr__(self, "masses", tuple(p for _, p in pairs))
        return self

    @classmethod
    def uniform(cls, half_width: float) -> "DiffNoiseModel":
        return cls(family="uniform", half_width=half_width)

    @classmethod
    def gaussian(cls, sigma: float) -> "DiffNoiseModel":
        return cls(family="gaussian", sigma=sigma)

    @classmethod
    def discrete(cls, law: dict) -> "DiffNoiseModel":
        points = sorted(law)
        return cls(family="discrete", support=tuple(points), masses=tuple(law[x] for x in points))

    @property
    def bounded(self) -> bool:
        return self.family != "gaussian"

    @property
    def support_half_width(self) -> float:
        """Smallest D with support inside [-D, D] (inf when unbounded)"""
        if self.family == "uniform":
            return float(self.half_width)
        if self.family == "discrete":
            return max(abs(x) for x in self.support)
        return math.inf

    @property
    def sub_gaussian_sigma(self) -> float:
        """Variance proxy s with M(lambda) <= exp(lambda^2 s^2 / 2); Hoeffding value for bounded laws"""
        if self.family == "gaussian":
            return float(self.sigma)
        return self.support_half_width

    @property
    def variance(self) -> float:
        if self.family == "uniform":
            return self.half_width ** 2 / 3.0
        if self.family == "gaussian":
            return self.sigma ** 2
        return math.fsum(p * x * x for x, p in zip(self.support, self.masses))

    def log_mgf(self, lam: ArrayLike) -> ArrayLike:
        """Natural log of E[exp(lam * n~)]"""
        lam_arr = np.asarray(lam, dtype=np.float64)
        if self.family == "gaussian":
            out = 0.5 * lam_arr ** 2 * self.sigma ** 2
        elif self.family == "uniform":
            z = np.abs(lam_arr) * self.half_width
            small = z < 1e-4
            z_safe = np.where(small, 1.0, z)
            large_branch = z_safe + np.log1p(-np.exp(-2.0 * z_safe)) - np.log(2.0 * z_safe)
            series = np.log1p(z ** 2 / 6.0 + z ** 4 / 120.0)
            out = np.where(small, series, large_branch)
        else:
            x = np.asarray(self.support)
            log_p = np.log(np.asarray(self.masses))
            out = logsumexp(lam_arr[..., None] * x + log_p, axis=-1)
        if np.ndim(lam) == 0:
            return float(out)
        return out

    def mgf(self, lam: ArrayLike) -> ArrayLike:
        return np.exp(self.log_mgf(lam)) if np.ndim(lam) else math.exp(self.log_mgf(lam))

    def from_uniform(self, v: ArrayLike) -> ArrayLike:
        """
        Map uniform [0, 1) variates to noise draws (inverse CDF, one variate per draw).

        Args:
            v: Uniform variate(s)

        Returns:
            Noise value(s) of the same shape
        """
        v_arr = np.asarray(v, dtype=np.float64)
        if self.family == "uniform":
            out = self.half_width * (2.0 * v_arr - 1.0)
        elif self.family == "gaussian":
            out = self.sigma * ndtri(np.clip(v_arr, _MIN_UNIFORM, 1.0 - _MIN_UNIFORM))
        else:
            cdf = np.cumsum(self.masses)
            idx = np.minimum(np.searchsorted(cdf, v_arr, side="right"), len(self.support) - 1)
            out = np.asarray(self.support)[idx]
        if np.ndim(v) == 0:
            return float(out)
        return out

    def agent_model(self) -> "DiffNoiseModel":
        """Per-agent noise whose pairwise differences keep this model's scale"""
        if self.family == "uniform":
            return DiffNoiseModel.uniform(self.half_width / 2.0)
        if self.family == "gaussian":
            return DiffNoiseModel.gaussian(self.sigma / math.sqrt(2.0))
        raise ValueError("per-agent noise mode supports uniform and gaussian families only")

    def lattice(self) -> Tuple[float, List[int], List[float]]:
        """
        Integer-grid representation of a discrete model.

        Returns:
            (step, offsets, masses) with support point = offset * step

        Raises:
            NonLatticeNoiseError: If the model is not discrete on an integer grid
        """
        if self.family != "discrete":
            raise NonLatticeNoiseError(f"{self.family} noise has no lattice representation")
        ints = []
        for x in self.support:
            if abs(x - round(x)) > 1e-12:
                raise NonLatticeNoiseError(f"support point {x} is not on the integer grid")
            ints.append(int(round(x)))
        step = reduce(math.gcd, (abs(i) for i in ints if i != 0), 0) or 1
        offsets = [i // step for i in ints]
        return float(step), offsets, list(self.masses)

    def describe(self) -> str:
        if self.family == "uniform":
            return f"U[-{self.half_width:g},{self.half_width:g}]"
        if self.family == "gaussian":
            return f"N(0,{self.sigma:g}^2)"
        return "{" + ", ".join(f"{x:g}:{p:g}" for x, p in zip(self.support, self.masses)) + "}"


def noise_mgf(m: DiffNoiseModel, lam: float) -> float:
    """
    Moment generating function of the noise

    Args:
        m: Noise model
        lam: Finite real argument

    Returns:
        float: E[exp(lam * n~)]
    """
    return m.mgf(lam)


def noise_log_mgf(m: DiffNoiseModel, lam: float) -> float:
    """Log-domain companion of noise_mgf"""
    return m.log_mgf(lam)


def sample_diff_noise(m: DiffNoiseModel, rng: RandomSource) -> float:
    """Draw one noise value, consuming exactly one variate"""
    return m.from_uniform(rng.uniform())
