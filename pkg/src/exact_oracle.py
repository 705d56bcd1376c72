"""
Exact Oracle - Exact laws of the difference processes for lattice noise

Points are stored as integer offsets on the noise grid. The bistar follower
difference lives on the half grid (the y/2 pull of an integer-grid leader
difference), so the joint state is (a, b) with Y = a*step, Y_f1 = b*step/2.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.config import Config
from src.influence import InfluenceFunction
from src.noise import DiffNoiseModel, NonLatticeNoiseError

logger = logging.getLogger(__name__)

# Largest tolerated change in total mass over one transport step
MASS_DRIFT_TOL = 1e-12

__all__ = [
    "JointLatticeDistribution",
    "LatticeDistribution",
    "MassDriftError",
    "NonLatticeNoiseError",
    "ResourceLimitError",
    "enumerate_diff_distribution",
    "exact_bistar_distribution",
    "exact_diff_distribution",
    "exact_tail",
]


class ResourceLimitError(RuntimeError):
    """Computation would exceed a configured budget"""

    def __init__(self, message: str, requested: float, allowed: float):
        super().__init__(f"{message} (requested {requested:g}, allowed {allowed:g})")
        self.requested = requested
        self.allowed = allowed


class MassDriftError(RuntimeError):
    """A transport step created or destroyed probability mass"""

    def __init__(self, step: int, drift: float):
        super().__init__(f"mass drift {drift:.3g} at step {step} exceeds {MASS_DRIFT_TOL:g}")
        self.step = step
        self.drift = drift


@dataclass
class LatticeDistribution:
    """Law on the grid {offset * step}"""

    step: float
    masses: Dict[int, float]
    t: int
    pruned_mass: float = 0.0

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses.values()))

    def points(self) -> List[float]:
        return [o * self.step for o in sorted(self.masses)]

    def mass_at(self, point: float) -> float:
        offset = int(round(point / self.step))
        if abs(offset * self.step - point) > 1e-9 * max(1.0, abs(point)):
            return 0.0
        return self.masses.get(offset, 0.0)

    def rows(self) -> List[Tuple[float, float]]:
        """(point, mass) sorted by point"""
        return [(o * self.step, self.masses[o]) for o in sorted(self.masses)]

    def tail(self, k: float) -> float:
        return exact_tail(self, k)


@dataclass
class JointLatticeDistribution:
    """Joint law of (Y, Y_f1) with Y = a*step and Y_f1 = b*step/2"""

    step: float
    masses: Dict[Tuple[int, int], float]
    t: int
    pruned_mass: float = 0.0

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses.values()))

    def marginal(self, process: str = "y") -> LatticeDistribution:
        """Marginal law of "y" (grid step) or "y_f1" (half grid step)"""
        acc: Dict[int, float] = defaultdict(float)
        if process == "y":
            for (a, _), mass in self.masses.items():
                acc[a] += mass
            return LatticeDistribution(self.step, dict(acc), self.t, self.pruned_mass)
        if process == "y_f1":
            for (_, b), mass in self.masses.items():
                acc[b] += mass
            return LatticeDistribution(self.step / 2.0, dict(acc), self.t, self.pruned_mass)
        raise ValueError(f"unknown marginal {process!r}")

    def rows(self) -> List[Tuple[float, float, float]]:
        """(y, y_f1, mass) sorted by y then y_f1"""
        half = self.step / 2.0
        return [(a * self.step, b * half, self.masses[(a, b)]) for a, b in sorted(self.masses)]


def _noise_kernel(noise: DiffNoiseModel) -> Tuple[float, int, np.ndarray]:
    step, offsets, masses = noise.lattice()
    reach = max(abs(o) for o in offsets)
    kernel = np.zeros(2 * reach + 1)
    for o, p in zip(offsets, masses):
        kernel[o + reach] += p
    return step, reach, kernel


def exact_diff_distribution(
    G: InfluenceFunction,
    noise: DiffNoiseModel,
    horizon: int,
    prune_threshold: Optional[float] = None,
    pruned_mass_budget: Optional[float] = None,
    max_states: Optional[int] = None,
) -> LatticeDistribution:
    """
    Exact law of Y(T) from Y(0) = 0 by mass transport on the lattice

    Each point y sends G(|y|) of its mass onto the noise law and the rest onto
    the noise law shifted by y. Masses below the prune threshold are dropped
    and accounted in pruned_mass.

    Args:
        G: Influence function
        noise: Discrete symmetric noise on an integer grid
        horizon: T >= 0
        prune_threshold: Drop masses below this (defaults to ORACLE_PRUNE_THRESHOLD)
        pruned_mass_budget: Largest tolerated total pruned mass
        max_states: Largest dense lattice size

    Raises:
        NonLatticeNoiseError: If the noise is not on an integer grid
        ResourceLimitError: If the lattice or the pruned mass exceeds its budget
        MassDriftError: If one step changes the total mass by more than MASS_DRIFT_TOL
    """
    if horizon < 0:
        raise ValueError(f"horizon must be non-negative, got {horizon}")
    prune_threshold = Config.ORACLE_PRUNE_THRESHOLD if prune_threshold is None else prune_threshold
    pruned_mass_budget = Config.ORACLE_PRUNED_MASS_BUDGET if pruned_mass_budget is None else pruned_mass_budget
    max_states = Config.ORACLE_MAX_STATES if max_states is None else max_states

    step, reach, kernel = _noise_kernel(noise)
    center = reach * horizon
    size = 2 * center + 1
    if size > max_states:
        raise ResourceLimitError("two-agent lattice too large", size, max_states)

    offsets = np.arange(size) - center
    influence = G.evaluate(np.abs(offsets) * step)
    dist = np.zeros(size)
    dist[center] = 1.0
    pruned = 0.0
    for s in range(horizon):
        reset_mass = float(np.dot(influence, dist))
        new = np.convolve((1.0 - influence) * dist, kernel, mode="same")
        new[center - reach:center + reach + 1] += reset_mass * kernel
        drift = abs(float(new.sum()) - float(dist.sum()))
        if drift > MASS_DRIFT_TOL:
            raise MassDriftError(s + 1, drift)
        small = (new > 0.0) & (new < prune_threshold)
        pruned += float(new[small].sum())
        new[small] = 0.0
        if pruned > pruned_mass_budget:
            raise ResourceLimitError("pruned mass above budget", pruned, pruned_mass_budget)
        dist = new

    masses = {int(o): float(m) for o, m in zip(offsets, dist) if m > 0.0}
    logger.debug(f"two-agent oracle T={horizon}: {len(masses)} atoms, pruned {pruned:.3g}")
    return LatticeDistribution(step=step, masses=masses, t=horizon, pruned_mass=pruned)


def exact_tail(dist: LatticeDistribution, k: float) -> float:
    """P(|Y| >= k) under a lattice law"""
    if k < 0:
        raise ValueError(f"threshold must be non-negative, got {k}")
    return float(sum(m for o, m in dist.masses.items() if abs(o) * dist.step >= k))


def enumerate_diff_distribution(G: InfluenceFunction, noise: DiffNoiseModel, horizon: int) -> LatticeDistribution:
    """Law of Y(T) by summing over every coin and noise outcome path (small T only)"""
    step, offsets, masses = noise.lattice()
    law: Dict[int, float] = defaultdict(float)

    def walk(y: int, prob: float, remaining: int) -> None:
        if remaining == 0:
            law[y] += prob
            return
        g = G.evaluate(abs(y) * step)
        for o, p in zip(offsets, masses):
            if p == 0.0:
                continue
            if g > 0.0:
                walk(o, prob * p * g, remaining - 1)
            if g < 1.0:
                walk(y + o, prob * p * (1.0 - g), remaining - 1)

    walk(0, 1.0, horizon)
    return LatticeDistribution(step=step, masses=dict(law), t=horizon)


def bistar_lattice_size(noise: DiffNoiseModel, horizon: int) -> int:
    """
    Dense size of the reachable (Y, Y_f1) lattice after T steps

    |a| <= reach*s after s steps. One step adds at most |a| + 2*reach to |b|,
    so |b| <= reach*T*(T+3)/2 after T steps, inside the half-range
    reach*T*(T+2) used for the follower axis.
    """
    _, offsets, _ = noise.lattice()
    reach = max(abs(o) for o in offsets)
    leader = 2 * reach * horizon + 1
    follower = 2 * reach * horizon * (horizon + 2) + 1
    return leader * follower


def exact_bistar_distribution(
    G: InfluenceFunction,
    G_tilde: InfluenceFunction,
    noise: DiffNoiseModel,
    horizon: int,
    prune_threshold: Optional[float] = None,
    pruned_mass_budget: Optional[float] = None,
    max_states: Optional[int] = None,
) -> JointLatticeDistribution:
    """
    Exact joint law of (Y(T), Y_f1(T)) from the zero state

    The state is (a, b) with Y = a*step and Y_f1 = b*step/2, so one halving
    of the grid is enough at every T. Y stays on the integer grid: its update
    is either a fresh noise offset or a + offset. The follower difference
    takes Y/2 (a half steps) plus either 0 or its own value b, plus a noise
    difference (2*offset half steps). Y_f1 is never itself halved, so b
    stays an integer and no deeper dyadic level is reached.

    Args:
        G: Leader influence function
        G_tilde: Leader-to-follower influence function
        noise: Discrete symmetric noise on an integer grid
        horizon: T >= 0
        prune_threshold: Drop masses below this
        pruned_mass_budget: Largest tolerated total pruned mass
        max_states: Largest dense joint lattice

    Raises:
        ResourceLimitError: If the joint lattice exceeds the state budget
    """
    if horizon < 0:
        raise ValueError(f"horizon must be non-negative, got {horizon}")
    prune_threshold = Config.ORACLE_PRUNE_THRESHOLD if prune_threshold is None else prune_threshold
    pruned_mass_budget = Config.ORACLE_PRUNED_MASS_BUDGET if pruned_mass_budget is None else pruned_mass_budget
    max_states = Config.ORACLE_MAX_STATES if max_states is None else max_states

    requested = bistar_lattice_size(noise, horizon)
    if requested > max_states:
        raise ResourceLimitError("bistar joint lattice too large", requested, max_states)

    step, offsets, noise_masses = noise.lattice()
    law = [(o, p) for o, p in zip(offsets, noise_masses) if p > 0.0]
    state: Dict[Tuple[int, int], float] = {(0, 0): 1.0}
    pruned = 0.0
    for _ in range(horizon):
        nxt: Dict[Tuple[int, int], float] = defaultdict(float)
        for (a, b), mass in state.items():
            g = G.evaluate(abs(a) * step)
            gt = G_tilde.evaluate(abs(b) * step / 2.0)
            cases = (
                (g * gt, True, True),
                (g * (1.0 - gt), True, False),
                ((1.0 - g) * gt, False, True),
                ((1.0 - g) * (1.0 - gt), False, False),
            )
            for weight, lead, reset in cases:
                if weight == 0.0:
                    continue
                pull = a if lead else 0
                base = 0 if reset else b
                for o, p in law:
                    a_next = o if lead else a + o
                    for of, pf in law:
                        nxt[(a_next, pull + base + 2 * of)] += mass * weight * p * pf
        state = {}
        for key, mass in nxt.items():
            if mass < prune_threshold:
                pruned += mass
            else:
                state[key] = mass
        if pruned > pruned_mass_budget:
            raise ResourceLimitError("pruned mass above budget", pruned, pruned_mass_budget)

    logger.debug(f"bistar oracle T={horizon}: {len(state)} atoms, pruned {pruned:.3g}")
    return JointLatticeDistribution(step=step, masses=state, t=horizon, pruned_mass=pruned)
