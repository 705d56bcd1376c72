"""
Dynamics - Two-agent and bistar opinion-difference processes

Variate consumption per step and trajectory (frozen):
    two-agent:            (u, n)
    two-agent, per-agent: (u, n1, n2)
    bistar:               (u_G, n, u_f, n_f1, u_g, n_g2)
    bistar, per-agent:    (u_G, n1, n2, u_f, n_f, u_g, n_g)
Noise variates are mapped through the inverse CDF of the noise model.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.influence import InfluenceFunction
from src.noise import DiffNoiseModel
from src.random_source import RandomSource

logger = logging.getLogger(__name__)


class SystemKind(str, Enum):
    TWO_AGENT = "two-agent"
    BISTAR = "bistar"


class ProcessKind(str, Enum):
    """Difference process recorded by a path"""

    Y = "y"
    Y_F1 = "y_f1"
    Y_G2 = "y_g2"
    Y_FG = "y_fg"


@dataclass(frozen=True)
class DiffState:
    y: float = 0.0
    t: int = 0


@dataclass(frozen=True)
class BistarState:
    """Leader difference y = X1 - X2 and follower differences y_f1 = Xf - X1, y_g2 = Xg - X2"""

    y: float = 0.0
    y_f1: float = 0.0
    y_g2: float = 0.0
    t: int = 0

    @property
    def y_fg(self) -> float:
        return self.y_f1 + self.y - self.y_g2


@dataclass(frozen=True)
class SamplePath:
    values: np.ndarray
    process: ProcessKind
    master_seed: int
    stream_id: int

    @property
    def horizon(self) -> int:
        return len(self.values) - 1


class SystemSpec(BaseModel):
    """
    Everything needed to generate trajectories of one system.

    negate_noise flips the sign of every noise draw while keeping the coin
    stream, which negates every path value exactly.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SystemKind = SystemKind.TWO_AGENT
    G: InfluenceFunction
    G_tilde: Optional[InfluenceFunction] = None
    noise: DiffNoiseModel
    per_agent_noise: bool = False
    negate_noise: bool = False

    @model_validator(mode="after")
    def _check_system(self) -> "SystemSpec":
        if self.kind == SystemKind.BISTAR and self.G_tilde is None:
            raise ValueError("bistar system requires a follower influence function G_tilde")
        if self.per_agent_noise:
            self.noise.agent_model()
        return self

    @property
    def variates_per_step(self) -> int:
        if self.kind == SystemKind.TWO_AGENT:
            return 3 if self.per_agent_noise else 2
        return 7 if self.per_agent_noise else 6

    @property
    def processes(self) -> Tuple[ProcessKind, ...]:
        if self.kind == SystemKind.TWO_AGENT:
            return (ProcessKind.Y,)
        return (ProcessKind.Y, ProcessKind.Y_F1, ProcessKind.Y_G2, ProcessKind.Y_FG)

    def negated(self) -> "SystemSpec":
        return self.model_copy(update={"negate_noise": not self.negate_noise})


def evolve_diff(coins: np.ndarray, noise: np.ndarray, G: InfluenceFunction) -> np.ndarray:
    """
    Advance a batch of two-agent difference chains from Y(0) = 0.

    Args:
        coins: Uniform influence coins, shape (n, T)
        noise: Difference noise draws, shape (n, T)
        G: Influence function

    Returns:
        np.ndarray: Paths of shape (n, T+1)
    """
    n_paths, horizon = coins.shape
    out = np.zeros((n_paths, horizon + 1))
    y = out[:, 0].copy()
    for s in range(horizon):
        influenced = coins[:, s] < G.evaluate(np.abs(y))
        y = np.where(influenced, noise[:, s], y + noise[:, s])
        out[:, s + 1] = y
    return out


def evolve_bistar(
    coins: np.ndarray,
    noise: np.ndarray,
    coins_f: np.ndarray,
    noise_f: np.ndarray,
    coins_g: np.ndarray,
    noise_g: np.ndarray,
    G: InfluenceFunction,
    G_tilde: InfluenceFunction,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Advance a batch of bistar systems from the zero state.

    All arrays have shape (n, T). The leader coin decides both the leader
    reset and the follower pull; the pull uses the pre-step leader difference
    (+y/2 for followers of agent 1, -y/2 for followers of agent 2).

    Returns:
        (Y, Y_f1, Y_g2), each of shape (n, T+1)
    """
    n_paths, horizon = coins.shape
    out_y = np.zeros((n_paths, horizon + 1))
    out_f = np.zeros((n_paths, horizon + 1))
    out_g = np.zeros((n_paths, horizon + 1))
    y = np.zeros(n_paths)
    yf = np.zeros(n_paths)
    yg = np.zeros(n_paths)
    for s in range(horizon):
        lead = coins[:, s] < G.evaluate(np.abs(y))
        f_reset = coins_f[:, s] < G_tilde.evaluate(np.abs(yf))
        g_reset = coins_g[:, s] < G_tilde.evaluate(np.abs(yg))
        half = 0.5 * y
        yf = (np.where(lead, half, 0.0) + np.where(f_reset, 0.0, yf)) + noise_f[:, s]
        yg = (np.where(lead, -half, 0.0) + np.where(g_reset, 0.0, yg)) + noise_g[:, s]
        y = np.where(lead, noise[:, s], y + noise[:, s])
        out_y[:, s + 1] = y
        out_f[:, s + 1] = yf
        out_g[:, s + 1] = yg
    return out_y, out_f, out_g


def cross_difference(y: np.ndarray, y_f1: np.ndarray, y_g2: np.ndarray) -> np.ndarray:
    """Y_fg = Y_f1 + Y - Y_g2"""
    return y_f1 + y - y_g2


def draw_variates(spec: SystemSpec, horizon: int, master_seed: int, stream_ids: Iterable[int]) -> np.ndarray:
    """
    Draw per-trajectory uniforms in the frozen consumption order.

    Returns:
        np.ndarray: Shape (n, T, variates_per_step)
    """
    width = spec.variates_per_step
    rows = [
        RandomSource(master_seed, sid).uniforms(horizon * width).reshape(horizon, width)
        for sid in stream_ids
    ]
    if not rows:
        return np.zeros((0, horizon, width))
    return np.stack(rows)


def _noise_columns(spec: SystemSpec, variates: np.ndarray) -> Dict[str, np.ndarray]:
    """Split uniforms into coin and (difference) noise arrays"""
    sign = -1.0 if spec.negate_noise else 1.0
    cols: Dict[str, np.ndarray] = {"coins": variates[:, :, 0]}
    if spec.per_agent_noise:
        agent = spec.noise.agent_model()
        n1 = sign * agent.from_uniform(variates[:, :, 1])
        n2 = sign * agent.from_uniform(variates[:, :, 2])
        cols["noise"] = n1 - n2
        if spec.kind == SystemKind.BISTAR:
            cols["coins_f"] = variates[:, :, 3]
            cols["noise_f"] = sign * agent.from_uniform(variates[:, :, 4]) - n1
            cols["coins_g"] = variates[:, :, 5]
            cols["noise_g"] = sign * agent.from_uniform(variates[:, :, 6]) - n2
        return cols
    m = spec.noise
    cols["noise"] = sign * m.from_uniform(variates[:, :, 1])
    if spec.kind == SystemKind.BISTAR:
        cols["coins_f"] = variates[:, :, 2]
        cols["noise_f"] = sign * m.from_uniform(variates[:, :, 3])
        cols["coins_g"] = variates[:, :, 4]
        cols["noise_g"] = sign * m.from_uniform(variates[:, :, 5])
    return cols


def evolve_from_variates(spec: SystemSpec, variates: np.ndarray) -> Dict[ProcessKind, np.ndarray]:
    """Run the kernels on pre-drawn uniforms; one (n, T+1) array per process"""
    cols = _noise_columns(spec, variates)
    if spec.kind == SystemKind.TWO_AGENT:
        return {ProcessKind.Y: evolve_diff(cols["coins"], cols["noise"], spec.G)}
    y, yf, yg = evolve_bistar(
        cols["coins"], cols["noise"],
        cols["coins_f"], cols["noise_f"],
        cols["coins_g"], cols["noise_g"],
        spec.G, spec.G_tilde,
    )
    return {
        ProcessKind.Y: y,
        ProcessKind.Y_F1: yf,
        ProcessKind.Y_G2: yg,
        ProcessKind.Y_FG: cross_difference(y, yf, yg),
    }


def simulate_batch(
    spec: SystemSpec, horizon: int, master_seed: int, stream_ids: Iterable[int]
) -> Dict[ProcessKind, np.ndarray]:
    """
    Simulate one trajectory per stream id.

    Args:
        spec: System to simulate
        horizon: Number of steps T
        master_seed: Master seed shared by all trajectories
        stream_ids: Trajectory indices (one stream each)

    Returns:
        Dict[ProcessKind, np.ndarray]: Paths of shape (n, T+1) per process
    """
    if horizon < 0:
        raise ValueError(f"horizon must be non-negative, got {horizon}")
    variates = draw_variates(spec, horizon, master_seed, stream_ids)
    return evolve_from_variates(spec, variates)


def simulate_diff_batch(
    G: InfluenceFunction, noise: DiffNoiseModel, horizon: int, master_seed: int, stream_ids: Iterable[int]
) -> np.ndarray:
    spec = SystemSpec(G=G, noise=noise)
    return simulate_batch(spec, horizon, master_seed, stream_ids)[ProcessKind.Y]


def simulate_bistar_batch(
    G: InfluenceFunction,
    G_tilde: InfluenceFunction,
    noise: DiffNoiseModel,
    horizon: int,
    master_seed: int,
    stream_ids: Iterable[int],
) -> Dict[ProcessKind, np.ndarray]:
    spec = SystemSpec(kind=SystemKind.BISTAR, G=G, G_tilde=G_tilde, noise=noise)
    return simulate_batch(spec, horizon, master_seed, stream_ids)


def diff_step(state: DiffState, G: InfluenceFunction, noise: DiffNoiseModel, rng: RandomSource) -> DiffState:
    """
    One step of the two-agent difference chain.

    Consumes (u, n) from rng: y' = n if u < G(|y|), else y + n.
    """
    u = rng.uniform()
    n = noise.from_uniform(rng.uniform())
    y = np.array([state.y])
    influenced = u < G.evaluate(np.abs(y))
    new_y = np.where(influenced, n, y + n)
    return DiffState(y=float(new_y[0]), t=state.t + 1)


def bistar_step(
    state: BistarState,
    G: InfluenceFunction,
    G_tilde: InfluenceFunction,
    noise: DiffNoiseModel,
    rng: RandomSource,
) -> BistarState:
    """
    One synchronous step of the bistar system.

    Consumes (u_G, n, u_f, n_f1, u_g, n_g2) from rng. Follower cases for y_f1,
    with y the pre-step leader difference:
        leader not influenced, follower reset:  n_f1
        leader not influenced, no reset:        y_f1 + n_f1
        leader influenced, follower reset:      y/2 + n_f1
        leader influenced, no reset:            y/2 + y_f1 + n_f1
    y_g2 follows the same cases with -y/2.
    """
    u = [rng.uniform() for _ in range(6)]
    y = np.array([state.y])
    yf = np.array([state.y_f1])
    yg = np.array([state.y_g2])
    lead = u[0] < G.evaluate(np.abs(y))
    f_reset = u[2] < G_tilde.evaluate(np.abs(yf))
    g_reset = u[4] < G_tilde.evaluate(np.abs(yg))
    half = 0.5 * y
    new_f = (np.where(lead, half, 0.0) + np.where(f_reset, 0.0, yf)) + noise.from_uniform(u[3])
    new_g = (np.where(lead, -half, 0.0) + np.where(g_reset, 0.0, yg)) + noise.from_uniform(u[5])
    n = noise.from_uniform(u[1])
    new_y = np.where(lead, n, y + n)
    return BistarState(y=float(new_y[0]), y_f1=float(new_f[0]), y_g2=float(new_g[0]), t=state.t + 1)


def simulate_diff(G: InfluenceFunction, noise: DiffNoiseModel, horizon: int, rng: RandomSource) -> SamplePath:
    """
    Two-agent path of length T+1 starting at Y(0) = 0

    Args:
        G: Influence function
        noise: Difference noise model
        horizon: Number of steps T >= 0
        rng: Stream of the trajectory

    Returns:
        SamplePath: Recorded Y path
    """
    if horizon < 0:
        raise ValueError(f"horizon must be non-negative, got {horizon}")
    variates = rng.uniforms(2 * horizon).reshape(1, horizon, 2)
    spec = SystemSpec(G=G, noise=noise)
    values = evolve_from_variates(spec, variates)[ProcessKind.Y][0]
    return SamplePath(values=values, process=ProcessKind.Y, master_seed=rng.master_seed, stream_id=rng.stream_id)


def simulate_bistar(
    G: InfluenceFunction,
    G_tilde: InfluenceFunction,
    noise: DiffNoiseModel,
    horizon: int,
    rng: RandomSource,
) -> Tuple[SamplePath, SamplePath, SamplePath, SamplePath]:
    """Time-aligned (Y, Y_f1, Y_g2, Y_fg) paths from the zero state"""
    if horizon < 0:
        raise ValueError(f"horizon must be non-negative, got {horizon}")
    variates = rng.uniforms(6 * horizon).reshape(1, horizon, 6)
    spec = SystemSpec(kind=SystemKind.BISTAR, G=G, G_tilde=G_tilde, noise=noise)
    paths = evolve_from_variates(spec, variates)
    return tuple(
        SamplePath(values=paths[p][0], process=p, master_seed=rng.master_seed, stream_id=rng.stream_id)
        for p in spec.processes
    )
