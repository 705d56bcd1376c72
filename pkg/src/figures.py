"""
Figures - Plot-ready data and SVG line plots for the reference parameter sets

Recipes:
    fig2a  two-agent paths with quantile bands and the c t^(1/2-beta) envelope, one file per delta
    fig2b  two-agent tail frequencies against the simplified and the bounded-noise bound
    fig3a  bistar follower-leader tail against the bistar bounds
    fig3b  bistar cross-group tail against the opposing-followers bound
"""
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from src.bounds import ScheduleParams  # noqa: E402
from src.config import Config  # noqa: E402
from src.dynamics import ProcessKind, SystemKind, simulate_batch  # noqa: E402
from src.experiment_config import (  # noqa: E402
    ExperimentConfig,
    InfluenceSection,
    OutputSection,
    RunSection,
    SystemSection,
)
from src.influence import InfluenceFunction  # noqa: E402
from src.noise import DiffNoiseModel  # noqa: E402
from src.runner import ExperimentRunner, write_csv  # noqa: E402

logger = logging.getLogger(__name__)

FIGURE_NAMES = ("fig2a", "fig2b", "fig3a", "fig3b")
REFERENCE_D = 20.0
PATH_DELTAS = (0.2, 0.5, 0.8)
BISTAR_DELTA = 0.5
BISTAR_DELTA_TILDE = 0.55

TAIL_FIGURE_HEADER = [
    "t", "k", "hits", "n", "p_hat", "ci_low", "ci_high",
    "simplified", "theorem_bound", "theorem_applicable", "dominated",
]


class UnknownFigureError(ValueError):
    """Requested figure has no recipe"""


def two_agent_config(
    delta: float, horizon: int, n: int, seed: int, out_dir: Union[str, Path],
    times: Optional[Sequence[int]] = None,
) -> ExperimentConfig:
    """Uniform noise on [-20, 20], G(x) = 1/(1+x^(1-delta)), beta = delta/4, c1 = 1, c2 = 0.5"""
    return ExperimentConfig(
        system=SystemSection(kind=SystemKind.TWO_AGENT),
        influence=InfluenceSection(G=InfluenceFunction.rational(alpha=1.0 - delta)),
        noise=DiffNoiseModel.uniform(REFERENCE_D),
        schedule=ScheduleParams(beta=delta / 4.0, c1=1.0, c2=0.5),
        run=RunSection(horizon=horizon, n=n, seed=seed, times=tuple(times) if times is not None else None),
        output=OutputSection(dir=str(out_dir)),
    )


def bistar_config(
    horizon: int, n: int, seed: int, out_dir: Union[str, Path], times: Optional[Sequence[int]] = None
) -> ExperimentConfig:
    """delta = 0.5, delta_tilde = 0.55, beta = delta/4, beta_tilde = delta_tilde/10, xi = 1/2, c1 = 1, c2 = 0.8"""
    return ExperimentConfig(
        system=SystemSection(kind=SystemKind.BISTAR),
        influence=InfluenceSection(
            G=InfluenceFunction.rational(alpha=1.0 - BISTAR_DELTA),
            G_tilde=InfluenceFunction.rational(alpha=2.0 / 3.0 - BISTAR_DELTA_TILDE),
        ),
        noise=DiffNoiseModel.uniform(REFERENCE_D),
        schedule=ScheduleParams(
            beta=BISTAR_DELTA / 4.0, beta_tilde=BISTAR_DELTA_TILDE / 10.0, xi=0.5, c1=1.0, c2=0.8,
        ),
        run=RunSection(horizon=horizon, n=n, seed=seed, times=tuple(times) if times is not None else None),
        output=OutputSection(dir=str(out_dir)),
    )


def tail_times(horizon: int, points: int = 20) -> List[int]:
    """About `points` evenly spaced times in [1, horizon]"""
    if horizon < 1:
        raise ValueError(f"tail figures need horizon >= 1, got {horizon}")
    stride = max(1, horizon // points)
    times = list(range(stride, horizon + 1, stride))
    if times[-1] != horizon:
        times.append(horizon)
    return times


def _plot_svg(path: Path, t: Sequence[float], series: Dict[str, Sequence[float]], ylabel: str, log_y: bool = False) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, values in series.items():
        ax.plot(t, values, label=label, linewidth=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    if log_y:
        ax.set_yscale("log")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return path


def path_figure(out_dir: Path, horizon: int, n: int, seed: int, svg: bool) -> List[Path]:
    files: List[Path] = []
    times = list(range(horizon + 1))
    for delta in PATH_DELTAS:
        config = two_agent_config(delta, horizon, n, seed, out_dir)
        runner = ExperimentRunner(config)
        path = simulate_batch(runner.spec, horizon, seed, [0])[ProcessKind.Y][0]
        bands = runner.engine.quantile_bands(times, n, seed, ProcessKind.Y, quantiles=(0.05, 0.5, 0.95))
        envelope = [runner.threshold(ProcessKind.Y, t) for t in times]
        rows = [
            [t, float(path[t]), float(bands[0.05][t]), float(bands[0.5][t]), float(bands[0.95][t]), envelope[t]]
            for t in times
        ]
        stem = f"fig2a_delta_{delta:g}"
        files.append(write_csv(out_dir / f"{stem}.csv", ["t", "path", "abs_q05", "abs_q50", "abs_q95", "envelope"], rows))
        if svg:
            files.append(_plot_svg(out_dir / f"{stem}.svg", times, {
                "path": path,
                "|Y| q95": bands[0.95],
                "envelope": envelope,
                "-envelope": [-e for e in envelope],
            }, "opinion difference"))
    return files


def tail_figure(config: ExperimentConfig, process: ProcessKind, stem: str, svg: bool) -> List[Path]:
    runner = ExperimentRunner(config)
    times = config.times()
    estimates = runner.engine.estimate_tail(
        times, config.run.n, config.run.seed, schedule=config.schedule, processes=[process]
    )[process]
    rows = []
    for est in estimates:
        main, simplified = runner.evaluate_bounds(process, est.t, est.k)
        rows.append([
            est.t, est.k, est.hits, est.n, est.p_hat, est.ci_low, est.ci_high,
            simplified.clamped_value, main.clamped_value, main.applicable,
            est.ci_high <= simplified.clamped_value,
        ])
    out_dir = Path(config.output.dir)
    files = [write_csv(out_dir / f"{stem}.csv", TAIL_FIGURE_HEADER, rows)]
    below = sum(1 for row in rows if row[-1])
    logger.info(f"{stem}: empirical ci_high below the simplified bound at {below}/{len(rows)} times")
    if svg:
        t = [row[0] for row in rows]
        files.append(_plot_svg(out_dir / f"{stem}.svg", t, {
            "empirical": [max(row[4], 1e-300) for row in rows],
            "ci_high": [row[6] for row in rows],
            "simplified bound": [row[7] for row in rows],
            "theorem bound": [row[8] for row in rows],
        }, "P(|X(t)| >= k)", log_y=True))
    return files


def reproduce_figure(
    name: str,
    out_dir: Union[str, Path, None] = None,
    n: Optional[int] = None,
    seed: int = 0,
    horizon: Optional[int] = None,
    svg: Optional[bool] = None,
) -> List[Path]:
    """
    Write the data (and optionally the SVG plot) of one reference figure

    Args:
        name: One of fig2a, fig2b, fig3a, fig3b
        out_dir: Output directory (defaults to OUTPUT_DIR)
        n: Trajectories (defaults to FIGURE_SAMPLES)
        seed: Master seed
        horizon: Largest t (defaults to FIGURE_HORIZON)
        svg: Also render SVG (defaults to FIGURE_SVG)

    Returns:
        List[Path]: Written files

    Raises:
        UnknownFigureError: If name has no recipe
    """
    if name not in FIGURE_NAMES:
        raise UnknownFigureError(f"unknown figure {name!r}, expected one of {', '.join(FIGURE_NAMES)}")
    out_dir = Path(out_dir if out_dir is not None else Config.OUTPUT_DIR)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = n if n is not None else Config.FIGURE_SAMPLES
    horizon = horizon if horizon is not None else Config.FIGURE_HORIZON
    svg = Config.FIGURE_SVG if svg is None else svg
    logger.info(f"Reproducing {name}: T={horizon}, n={n}, seed={seed}")

    if name == "fig2a":
        return path_figure(out_dir, horizon, n, seed, svg)

    times = tail_times(horizon)
    recipes: Dict[str, Callable[[], List[Path]]] = {
        "fig2b": lambda: tail_figure(
            two_agent_config(0.5, horizon, n, seed, out_dir, times), ProcessKind.Y, "fig2b", svg
        ),
        "fig3a": lambda: tail_figure(bistar_config(horizon, n, seed, out_dir, times), ProcessKind.Y_F1, "fig3a", svg),
        "fig3b": lambda: tail_figure(bistar_config(horizon, n, seed, out_dir, times), ProcessKind.Y_FG, "fig3b", svg),
    }
    return recipes[name]()
