"""
Monte Carlo Engine - Tail, envelope, MGF and dominance estimation over simulated trajectories

Trajectory i always uses stream id i of the master seed. Work is split into
fixed-size chunks of consecutive trajectory indices and results are merged in
chunk order, so every estimate is identical for any worker count.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from src.bounds import (
    EnvelopeEvent,
    ScheduleParams,
    d_bar_tau,
    d_tau,
    warmup_index,
)
from src.config import Config
from src.dynamics import ProcessKind, SystemSpec, simulate_batch

Task = Tuple[SystemSpec, int, int, int, int, Any]

FOLLOWER_PROCESSES = (ProcessKind.Y_F1, ProcessKind.Y_G2, ProcessKind.Y_FG)


def clopper_pearson(hits: int, n: int, confidence: float = 0.99) -> Tuple[float, float]:
    """
    Exact binomial confidence interval

    Args:
        hits: Number of successes
        n: Number of trials
        confidence: Two-sided coverage

    Returns:
        Tuple[float, float]: (low, high)
    """
    if n <= 0:
        return 0.0, 1.0
    alpha = 1.0 - confidence
    low = 0.0 if hits == 0 else float(stats.beta.ppf(alpha / 2.0, hits, n - hits + 1))
    high = 1.0 if hits == n else float(stats.beta.ppf(1.0 - alpha / 2.0, hits + 1, n - hits))
    return (0.0 if math.isnan(low) else low), (1.0 if math.isnan(high) else high)


@dataclass(frozen=True)
class TailEstimate:
    """Empirical P(|process(t)| >= k) with its exact interval"""

    process: ProcessKind
    t: int
    k: float
    hits: int
    n: int
    ci_low: float
    ci_high: float
    confidence: float
    hits_upper: int = 0
    hits_lower: int = 0

    @property
    def p_hat(self) -> float:
        return self.hits / self.n if self.n else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "process": self.process.value,
            "t": self.t,
            "k": self.k,
            "hits": self.hits,
            "n": self.n,
            "p_hat": self.p_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence": self.confidence,
        }


@dataclass(frozen=True)
class EnvelopeReport:
    """Frequency of paths leaving the envelope for some tau in [first_tau, t-1]"""

    event: EnvelopeEvent
    t: int
    first_tau: int
    hits: int
    n: int
    ci_low: float
    ci_high: float
    confidence: float

    @property
    def p_hat(self) -> float:
        return self.hits / self.n if self.n else 0.0

    @property
    def empty_range(self) -> bool:
        return self.first_tau > self.t - 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "event": self.event.value,
            "t": self.t,
            "first_tau": self.first_tau,
            "hits": self.hits,
            "n": self.n,
            "p_hat": self.p_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
        }


@dataclass(frozen=True)
class MgfEstimate:
    t: int
    lam: float
    estimate: float
    ci_low: float
    ci_high: float
    n: int
    batches: int


@dataclass(frozen=True)
class MomentSummary:
    t: int
    mean: float
    mean_ci_low: float
    mean_ci_high: float
    variance: float
    rms: float
    rms_ci_low: float
    rms_ci_high: float


@dataclass
class DominanceReport:
    """Whether the ECDF of |a| lies above the ECDF of |b| (a smaller), up to a DKW tolerance"""

    holds: bool
    worst_margin: float
    worst_at: float
    tolerance: float
    n_a: int
    n_b: int
    details: Dict[str, Any] = field(default_factory=dict)


def _batch_interval(values: np.ndarray, batches: int, confidence: float) -> Tuple[float, float, float]:
    """Mean with a Student-t interval over contiguous batch means"""
    mean = float(np.mean(values)) if values.size else math.nan
    batches = max(2, min(batches, values.size))
    means = np.array([np.mean(chunk) for chunk in np.array_split(values, batches)])
    spread = float(np.std(means, ddof=1)) if means.size > 1 else 0.0
    if not np.isfinite(spread) or spread == 0.0:
        return mean, mean, mean
    half = float(stats.t.ppf(0.5 + confidence / 2.0, batches - 1)) * spread / math.sqrt(batches)
    return mean, mean - half, mean + half


def tail_from_sample(
    process: ProcessKind, t: int, k: float, values: np.ndarray, confidence: float
) -> TailEstimate:
    """TailEstimate from the values of a process at time t"""
    n = int(values.size)
    hits = int(np.sum(np.abs(values) >= k))
    low, high = clopper_pearson(hits, n, confidence)
    return TailEstimate(
        process=process, t=t, k=float(k), hits=hits, n=n, ci_low=low, ci_high=high, confidence=confidence,
        hits_upper=int(np.sum(values >= k)), hits_lower=int(np.sum(values <= -k)),
    )


def mgf_from_sample(values: np.ndarray, lam: float, t: int, batches: int, confidence: float) -> MgfEstimate:
    """Batch-means estimate of E[exp(lam X)] over contiguous trajectory batches"""
    mean, low, high = _batch_interval(np.exp(lam * values), batches, confidence)
    return MgfEstimate(t=t, lam=lam, estimate=mean, ci_low=low, ci_high=high, n=int(values.size), batches=batches)


def _simulate_chunk(task: Task) -> Dict[ProcessKind, np.ndarray]:
    spec, horizon, master_seed, start, stop, _ = task
    return simulate_batch(spec, horizon, master_seed, range(start, stop))


def _tail_chunk(task: Task) -> Dict[str, Dict[ProcessKind, np.ndarray]]:
    """Integer tallies of |X(t)| >= k, X(t) >= k and X(t) <= -k per requested time"""
    paths = _simulate_chunk(task)
    times, thresholds = task[5]
    cols = np.asarray(times, dtype=int)
    out: Dict[str, Dict[ProcessKind, np.ndarray]] = {"abs": {}, "upper": {}, "lower": {}}
    for process, k in thresholds.items():
        values = paths[process][:, cols]
        out["abs"][process] = np.sum(np.abs(values) >= k, axis=0)
        out["upper"][process] = np.sum(values >= k, axis=0)
        out["lower"][process] = np.sum(values <= -k, axis=0)
    return out


def _envelope_chunk(task: Task) -> int:
    paths = _simulate_chunk(task)
    first_tau, envelope = task[5]
    window = np.abs(paths[ProcessKind.Y][:, first_tau:first_tau + len(envelope)])
    return int(np.sum(np.any(window > envelope, axis=1)))


def _values_chunk(task: Task) -> Dict[ProcessKind, np.ndarray]:
    """Process values at the requested times, shape (chunk, len(times)) each"""
    paths = _simulate_chunk(task)
    processes, times = task[5]
    cols = np.asarray(times, dtype=int)
    return {p: paths[p][:, cols] for p in processes}


class MonteCarloEngine:
    """
    Estimates over n trajectories of one system.

    Args:
        spec: System to simulate
        workers: Process count (1 runs in-process)
        chunk_size: Trajectories per task
        confidence: Coverage of reported intervals
    """

    def __init__(
        self,
        spec: SystemSpec,
        workers: Optional[int] = None,
        chunk_size: Optional[int] = None,
        confidence: Optional[float] = None,
    ):
        self.spec = spec
        self.workers = max(1, workers if workers is not None else Config.MC_WORKERS)
        self.chunk_size = max(1, chunk_size if chunk_size is not None else Config.MC_CHUNK_SIZE)
        self.confidence = confidence if confidence is not None else Config.MC_CONFIDENCE
        self.logger = logging.getLogger(__name__)

    @property
    def envelope_scale(self) -> float:
        """D of the noise support, or sigma for Gaussian noise"""
        return self.spec.noise.sub_gaussian_sigma

    def _run_chunks(self, fn: Callable[[Task], Any], n: int, horizon: int, master_seed: int, payload: Any) -> List[Any]:
        if n < 1:
            raise ValueError(f"trajectory count must be positive, got {n}")
        tasks: List[Task] = [
            (self.spec, horizon, master_seed, start, min(start + self.chunk_size, n), payload)
            for start in range(0, n, self.chunk_size)
        ]
        self.logger.debug(f"{fn.__name__}: {n} trajectories, T={horizon}, {len(tasks)} chunks, {self.workers} workers")
        if self.workers == 1 or len(tasks) == 1:
            return [fn(task) for task in tasks]
        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(fn, tasks))

    def thresholds(self, process: ProcessKind, times: Sequence[int], schedule: ScheduleParams) -> np.ndarray:
        """k = c t^(1/2 - beta) per time (beta_tilde for follower processes)"""
        follower = process in FOLLOWER_PROCESSES
        return np.array([schedule.threshold(t, self.envelope_scale, follower) for t in times])

    def estimate_tail(
        self,
        times: Sequence[int],
        n: int,
        master_seed: int,
        schedule: Optional[ScheduleParams] = None,
        thresholds: Optional[Union[float, Sequence[float]]] = None,
        processes: Optional[Sequence[ProcessKind]] = None,
    ) -> Dict[ProcessKind, List[TailEstimate]]:
        """
        Tally exceedances |X(t)| >= k at each requested time in one pass

        Args:
            times: Sorted non-negative times
            n: Trajectory count
            master_seed: Master seed
            schedule: Threshold schedule k = c t^(1/2 - beta) (used when thresholds is None)
            thresholds: Explicit k, scalar or one per time
            processes: Processes to tally (defaults to all of the system)

        Returns:
            Dict[ProcessKind, List[TailEstimate]]: One estimate per time and process
        """
        times = [int(t) for t in times]
        if times != sorted(times) or (times and times[0] < 0):
            raise ValueError(f"times must be sorted and non-negative, got {times}")
        processes = list(processes or self.spec.processes)
        schedule = schedule or ScheduleParams()
        ks: Dict[ProcessKind, np.ndarray] = {}
        for process in processes:
            if thresholds is None:
                ks[process] = self.thresholds(process, times, schedule)
            else:
                ks[process] = np.broadcast_to(np.asarray(thresholds, dtype=float), (len(times),)).copy()

        horizon = times[-1] if times else 0
        self.logger.info(f"Estimating tails of {[p.value for p in processes]} at {len(times)} times, n={n}")
        chunks = self._run_chunks(_tail_chunk, n, horizon, master_seed, (times, ks))

        results: Dict[ProcessKind, List[TailEstimate]] = {}
        for process in processes:
            hits = sum(c["abs"][process] for c in chunks)
            upper = sum(c["upper"][process] for c in chunks)
            lower = sum(c["lower"][process] for c in chunks)
            rows = []
            for j, t in enumerate(times):
                low, high = clopper_pearson(int(hits[j]), n, self.confidence)
                rows.append(TailEstimate(
                    process=process, t=t, k=float(ks[process][j]), hits=int(hits[j]), n=n,
                    ci_low=low, ci_high=high, confidence=self.confidence,
                    hits_upper=int(upper[j]), hits_lower=int(lower[j]),
                ))
            results[process] = rows
        return results

    def estimate_envelope_violation(
        self,
        event: EnvelopeEvent,
        params: ScheduleParams,
        t: int,
        n: int,
        master_seed: int,
        D: Optional[float] = None,
    ) -> EnvelopeReport:
        """
        Frequency of leader paths leaving the envelope before t

        A: |Y(tau)| > D tau^(1/2+beta') for some tau in [h(t), t-1]
        B: |Y(tau)| > D tau^(1/2-beta) for some tau in [l(t), t-1]
        """
        event = EnvelopeEvent(event)
        D = D if D is not None else self.envelope_scale
        if event == EnvelopeEvent.A:
            first = warmup_index(t, params.zeta)
            envelope = np.array([d_tau(tau, D, params.beta_prime) for tau in range(first, t)])
        else:
            first = warmup_index(t, params.xi)
            envelope = np.array([d_bar_tau(tau, D, params.beta) for tau in range(first, t)])
        if envelope.size == 0:
            hits = 0
        else:
            hits = sum(self._run_chunks(_envelope_chunk, n, t - 1, master_seed, (first, envelope)))
        low, high = clopper_pearson(hits, n, self.confidence)
        self.logger.info(f"Envelope {event.value} at t={t}: {hits}/{n} violations")
        return EnvelopeReport(event, t, first, hits, n, low, high, self.confidence)

    def endpoint_sample(
        self, t: int, n: int, master_seed: int, process: ProcessKind = ProcessKind.Y
    ) -> np.ndarray:
        """Values of the process at time t, in trajectory order"""
        return self.sample_at(np.array([t]), n, master_seed, process)[:, 0]

    def sample_at(
        self, times: Sequence[int], n: int, master_seed: int, process: ProcessKind = ProcessKind.Y
    ) -> np.ndarray:
        """Values at several times, shape (n, len(times))"""
        process = ProcessKind(process)
        return self.samples_at(times, n, master_seed, [process])[process]

    def samples_at(
        self, times: Sequence[int], n: int, master_seed: int, processes: Sequence[ProcessKind]
    ) -> Dict[ProcessKind, np.ndarray]:
        """Values of several processes from one simulation pass, shape (n, len(times)) each"""
        times = [int(t) for t in times]
        horizon = max(times) if times else 0
        processes = [ProcessKind(p) for p in processes]
        chunks = self._run_chunks(_values_chunk, n, horizon, master_seed, (processes, times))
        return {p: np.concatenate([c[p] for c in chunks], axis=0) for p in processes}

    def empirical_mgf(
        self,
        lam: float,
        t: int,
        n: int,
        master_seed: int,
        process: ProcessKind = ProcessKind.Y,
        batches: Optional[int] = None,
    ) -> MgfEstimate:
        """
        Batch-means estimate of E_0[exp(lam X(t))]

        Args:
            lam: MGF argument
            t: Time
            n: Trajectory count
            master_seed: Master seed
            process: Process (defaults to the leader difference)
            batches: Number of contiguous batches (defaults to MC_BATCHES)

        Returns:
            MgfEstimate: Estimate with a Student-t interval over batch means
        """
        sample = self.endpoint_sample(t, n, master_seed, process)
        return mgf_from_sample(sample, lam, t, batches or Config.MC_BATCHES, self.confidence)

    def moment_summary(
        self,
        times: Sequence[int],
        n: int,
        master_seed: int,
        process: ProcessKind = ProcessKind.Y,
        batches: Optional[int] = None,
    ) -> List[MomentSummary]:
        """Per-time mean, variance and RMS with batch-means intervals"""
        process = ProcessKind(process)
        return self.moment_summaries(times, n, master_seed, [process], batches)[process]

    def moment_summaries(
        self,
        times: Sequence[int],
        n: int,
        master_seed: int,
        processes: Sequence[ProcessKind],
        batches: Optional[int] = None,
    ) -> Dict[ProcessKind, List[MomentSummary]]:
        """moment_summary for several processes from one simulation pass"""
        samples = self.samples_at(times, n, master_seed, processes)
        return {p: self._moments(times, sample, batches) for p, sample in samples.items()}

    def _moments(self, times: Sequence[int], sample: np.ndarray, batches: Optional[int]) -> List[MomentSummary]:
        batches = batches or Config.MC_BATCHES
        rows = []
        for j, t in enumerate(times):
            x = sample[:, j]
            mean, mean_low, mean_high = _batch_interval(x, batches, self.confidence)
            sq, sq_low, sq_high = _batch_interval(x * x, batches, self.confidence)
            rows.append(MomentSummary(
                t=int(t),
                mean=mean,
                mean_ci_low=mean_low,
                mean_ci_high=mean_high,
                variance=float(np.var(x, ddof=1)) if x.size > 1 else 0.0,
                rms=math.sqrt(sq),
                rms_ci_low=math.sqrt(max(sq_low, 0.0)),
                rms_ci_high=math.sqrt(max(sq_high, 0.0)),
            ))
        return rows

    def quantile_bands(
        self,
        times: Sequence[int],
        n: int,
        master_seed: int,
        process: ProcessKind = ProcessKind.Y,
        quantiles: Sequence[float] = (0.05, 0.25, 0.5, 0.75, 0.95),
    ) -> Dict[float, np.ndarray]:
        """Per-time quantiles of |X(t)| across trajectories"""
        sample = np.abs(self.sample_at(times, n, master_seed, process))
        return {q: np.quantile(sample, q, axis=0) for q in quantiles}


def _ecdf(sorted_sample: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return np.searchsorted(sorted_sample, grid, side="right") / sorted_sample.size


def dominance_check(sample_a: np.ndarray, sample_b: np.ndarray, confidence: float = 0.99) -> DominanceReport:
    """
    Check |A| <=_st |B| from two endpoint samples

    The empirical CDF of |A| must lie above that of |B| everywhere, up to the
    two-sample DKW tolerance sqrt(ln(4/alpha)/(2 n_a)) + sqrt(ln(4/alpha)/(2 n_b)).

    Args:
        sample_a: Sample of the smaller process
        sample_b: Sample of the larger process
        confidence: 1 - alpha

    Returns:
        DominanceReport: Verdict, worst margin max(F_b - F_a) and its location
    """
    a = np.sort(np.abs(np.asarray(sample_a, dtype=float)))
    b = np.sort(np.abs(np.asarray(sample_b, dtype=float)))
    if a.size != b.size:
        raise ValueError(f"dominance check needs equal-size samples, got {a.size} and {b.size}")
    if a.size == 0:
        raise ValueError("dominance check needs non-empty samples")
    grid = np.union1d(a, b)
    gap = _ecdf(b, grid) - _ecdf(a, grid)
    worst = int(np.argmax(gap))
    margin = max(float(gap[worst]), 0.0)
    alpha = 1.0 - confidence
    tolerance = math.sqrt(math.log(4.0 / alpha) / (2.0 * a.size)) + math.sqrt(math.log(4.0 / alpha) / (2.0 * b.size))
    return DominanceReport(
        holds=margin <= tolerance,
        worst_margin=margin,
        worst_at=float(grid[worst]),
        tolerance=tolerance,
        n_a=int(a.size),
        n_b=int(b.size),
    )
