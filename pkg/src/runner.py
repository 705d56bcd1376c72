"""
Experiment Runner - Executes configured simulations, bound evaluations and audits
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from src.bounds import (
    BoundDomainError,
    BoundKind,
    BoundPreconditionError,
    BoundResult,
    EnvelopeEvent,
    ValidityCheck,
    admissible_exponents,
    bound_envelope_violation,
    bound_theorem_bistar,
    bound_theorem_bounded,
    bound_theorem_sg,
    lambda_star,
    mgf_chain_bound,
    simplified_bound,
    validity_report,
)
from src.config import Config
from src.dynamics import ProcessKind, SystemKind, simulate_batch
from src.exact_oracle import exact_bistar_distribution, exact_diff_distribution
from src.experiment_config import ExperimentConfig
from src.mc_engine import (
    MonteCarloEngine,
    TailEstimate,
    mgf_from_sample,
    tail_from_sample,
)

TAIL_HEADER = [
    "process", "t", "k", "hits", "n", "p_hat", "ci_low", "ci_high",
    "bound", "bound_value", "bound_clamped", "bound_applicable",
    "simplified_value", "simplified_clamped", "dominated",
]
MOMENT_HEADER = ["t", "mean", "mean_ci_low", "mean_ci_high", "variance", "rms", "rms_ci_low", "rms_ci_high"]
AUDIT_HEADER = ["t", "link", "empirical_high", "bound_value", "applicable", "status", "log_slack"]
BOUND_HEADER = [
    "t", "process", "k", "bound", "log_value", "bound_value", "bound_clamped", "bound_applicable",
    "simplified", "simplified_value", "simplified_clamped", "simplified_applicable",
]

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"


def format_cell(value: Any) -> str:
    """Canonical CSV cell: repr for floats, lowercase booleans, empty for None"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows as a DataFrame of format_cell strings"""
    path.parent.mkdir(parents=True, exist_ok=True)
    cells = [[format_cell(v) for v in row] for row in rows]
    df = pd.DataFrame(cells, columns=list(header), dtype=object)
    df.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    return path


def write_json(path: Path, data: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    return path


def domination_status(empirical_high: float, bound: BoundResult) -> str:
    """pass/fail of empirical_high <= clamped bound, or not-applicable"""
    if bound.pole:
        return PASS
    if not bound.applicable:
        return NOT_APPLICABLE
    return PASS if empirical_high <= bound.clamped_value else FAIL


def log_slack(bound_value: float, empirical_high: float) -> float:
    if empirical_high <= 0.0 or math.isinf(bound_value):
        return math.inf
    if bound_value <= 0.0:
        return -math.inf
    return math.log(bound_value) - math.log(empirical_high)


def _guarded(kind: BoundKind, evaluate: Callable[[], BoundResult]) -> BoundResult:
    """Turn hard precondition failures into a non-applicable result"""
    try:
        return evaluate()
    except (BoundPreconditionError, BoundDomainError) as e:
        return BoundResult(kind.value, math.inf, [ValidityCheck("precondition", False, detail=str(e))])


@dataclass
class RunResult:
    files: List[Path] = field(default_factory=list)
    summary: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(row["status"] != FAIL for row in self.summary)


class ExperimentRunner:
    """
    Runs one experiment configuration and writes its result files.

    Args:
        config: Validated experiment configuration
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.spec = config.system_spec()
        self.engine = MonteCarloEngine(
            self.spec,
            workers=config.run.workers,
            chunk_size=config.run.chunk_size,
            confidence=config.run.confidence,
        )
        self.out_dir = Path(config.output.dir)
        self.logger = logging.getLogger(__name__)

    @property
    def scale(self) -> float:
        """Noise half-width D, or sigma for Gaussian noise"""
        return self.spec.noise.sub_gaussian_sigma

    @property
    def table_format(self) -> str:
        return self.config.output.format

    def threshold(self, process: ProcessKind, t: int) -> float:
        return float(self.engine.thresholds(process, [t], self.config.schedule)[0])

    def _write_table(self, stem: str, header: Sequence[str], rows: List[Sequence[Any]]) -> Path:
        if self.table_format == "json":
            return write_json(self.out_dir / f"{stem}.json", [dict(zip(header, row)) for row in rows])
        return write_csv(self.out_dir / f"{stem}.csv", header, rows)

    def evaluate_bounds(self, process: ProcessKind, t: int, k: float) -> Tuple[BoundResult, BoundResult]:
        """
        Main bound and simplified bound for a process at (t, k)

        Leader difference: bounded-noise theorem and its simplified form, or
        the sub-Gaussian pair for Gaussian noise. Follower differences: the
        bistar theorem and its simplified form. Cross-group difference: the
        opposing-followers simplified bound for both.
        """
        params = self.config.schedule
        G = self.spec.G
        G_tilde = self.spec.G_tilde
        noise = self.spec.noise
        D = self.scale

        if process == ProcessKind.Y:
            if noise.bounded:
                main = _guarded(BoundKind.THEOREM_BOUNDED, lambda: bound_theorem_bounded(t, k, D, G))
                kind = BoundKind.PROP_BOUNDED
                report = admissible_exponents(kind, G.margin(1.0), params.beta)
            else:
                main = _guarded(BoundKind.THEOREM_SG, lambda: bound_theorem_sg(t, k, D, params, G, D=D))
                kind = BoundKind.PROP_SG
                report = admissible_exponents(kind, G.margin(2.0), params.beta)
            exponent = params.epsilon if params.epsilon is not None else report.exponent
            simplified = simplified_bound(t, params.c1, params.c2, exponent)
            simplified.validity.extend(validity_report(kind, t, G, D, params, sigma=D))
            simplified.theorem = kind.value
            return main, simplified

        kind = BoundKind.PROP_OPPOSING if process == ProcessKind.Y_FG else BoundKind.PROP_BISTAR
        beta_tilde = params.beta_tilde if params.beta_tilde is not None else params.beta
        report = admissible_exponents(kind, G.margin(1.0), params.beta, beta_tilde=beta_tilde, xi=params.xi)
        simplified = simplified_bound(t, params.c1, params.c2, report.exponent)
        simplified.validity.extend(validity_report(kind, t, G, D, params, G_tilde=G_tilde))
        simplified.theorem = kind.value
        if process == ProcessKind.Y_FG:
            main = simplified
        else:
            main = _guarded(
                BoundKind.THEOREM_BISTAR, lambda: bound_theorem_bistar(t, k, D, G, G_tilde, params)
            )
        if not noise.bounded:
            for result in ([main] if main is simplified else [main, simplified]):
                result.validity.append(ValidityCheck("bounded noise", False, detail=noise.describe()))
        return main, simplified

    def _tail_row(self, est: TailEstimate) -> Tuple[List[Any], Dict[str, Any]]:
        main, simplified = self.evaluate_bounds(est.process, est.t, est.k)
        status = domination_status(est.ci_high, main)
        dominated = None if status == NOT_APPLICABLE else status == PASS
        row = [
            est.process.value, est.t, est.k, est.hits, est.n, est.p_hat, est.ci_low, est.ci_high,
            main.theorem, main.value, main.clamped_value, main.applicable,
            simplified.value, simplified.clamped_value, dominated,
        ]
        record = dict(zip(TAIL_HEADER, row))
        record["bound_validity"] = [c.to_dict() for c in main.validity]
        record["simplified"] = simplified.theorem
        record["simplified_applicable"] = simplified.applicable
        record["simplified_validity"] = [c.to_dict() for c in simplified.validity]
        record["status"] = status
        return row, record

    def run(self) -> RunResult:
        """
        Estimate tails and moments at the configured times and compare with the bounds

        Writes tail_<process> and moments_<process> tables plus run.json.

        Returns:
            RunResult: Written files and per-(process, t) domination summary
        """
        cfg = self.config
        times = cfg.times()
        self.logger.info(f"Run: {cfg.system.kind.value}, T={cfg.run.horizon}, n={cfg.run.n}, seed={cfg.run.seed}")
        tails = self.engine.estimate_tail(times, cfg.run.n, cfg.run.seed, schedule=cfg.schedule)
        moments = self.engine.moment_summaries(times, cfg.run.n, cfg.run.seed, self.spec.processes)

        result = RunResult()
        report: Dict[str, Any] = {"config": cfg.model_dump(mode="json", exclude_none=True), "tails": {}, "moments": {}}
        for process, estimates in tails.items():
            rows, records = [], []
            for est in estimates:
                row, record = self._tail_row(est)
                rows.append(row)
                records.append(record)
                result.summary.append({
                    "process": process.value,
                    "t": est.t,
                    "ci_high": est.ci_high,
                    "bound_clamped": record["bound_clamped"],
                    "status": record["status"],
                })
            result.files.append(self._write_table(f"tail_{process.value}", TAIL_HEADER, rows))
            report["tails"][process.value] = records

            moment_rows = [
                [m.t, m.mean, m.mean_ci_low, m.mean_ci_high, m.variance, m.rms, m.rms_ci_low, m.rms_ci_high]
                for m in moments[process]
            ]
            result.files.append(self._write_table(f"moments_{process.value}", MOMENT_HEADER, moment_rows))
            report["moments"][process.value] = [dict(zip(MOMENT_HEADER, r)) for r in moment_rows]

        report["summary"] = result.summary
        result.files.append(write_json(self.out_dir / "run.json", report))
        for row in result.summary:
            if row["status"] == FAIL:
                self.logger.warning(f"{row['process']} t={row['t']}: ci_high={row['ci_high']:.4g} exceeds bound {row['bound_clamped']:.4g}")
        self.logger.info(f"Run complete, {len(result.files)} files written to {self.out_dir}")
        return result

    def tail(self) -> RunResult:
        """Tail tables only"""
        cfg = self.config
        tails = self.engine.estimate_tail(cfg.times(), cfg.run.n, cfg.run.seed, schedule=cfg.schedule)
        result = RunResult()
        for process, estimates in tails.items():
            rows = []
            for est in estimates:
                row, record = self._tail_row(est)
                rows.append(row)
                result.summary.append({"process": process.value, "t": est.t, "ci_high": est.ci_high,
                                       "bound_clamped": record["bound_clamped"], "status": record["status"]})
            result.files.append(self._write_table(f"tail_{process.value}", TAIL_HEADER, rows))
        return result

    def bounds(self) -> RunResult:
        """Evaluate every bound at the configured times without simulating"""
        result = RunResult()
        rows, records = [], []
        for t in self.config.times():
            for process in self.spec.processes:
                k = self.threshold(process, t)
                main, simplified = self.evaluate_bounds(process, t, k)
                row = [
                    t, process.value, k, main.theorem, main.log_value, main.value, main.clamped_value,
                    main.applicable, simplified.theorem, simplified.value, simplified.clamped_value,
                    simplified.applicable,
                ]
                rows.append(row)
                record = dict(zip(BOUND_HEADER, row))
                record["bound_record"] = main.to_dict()
                record["simplified_record"] = simplified.to_dict()
                records.append(record)
        if self.table_format == "csv":
            result.files.append(write_csv(self.out_dir / "bounds.csv", BOUND_HEADER, rows))
        result.files.append(write_json(self.out_dir / "bounds.json", records))
        return result

    def simulate(self) -> RunResult:
        """One seeded path (trajectory 0) per process"""
        cfg = self.config
        paths = simulate_batch(self.spec, cfg.run.horizon, cfg.run.seed, [0])
        result = RunResult()
        for process, values in paths.items():
            rows = [[t, float(v)] for t, v in enumerate(values[0])]
            result.files.append(self._write_table(f"path_{process.value}", ["t", "value"], rows))
        return result

    def oracle(self) -> RunResult:
        """Exact law at the horizon (joint law for bistar)"""
        cfg = self.config
        result = RunResult()
        if self.spec.kind == SystemKind.TWO_AGENT:
            dist = exact_diff_distribution(self.spec.G, self.spec.noise, cfg.run.horizon)
            result.files.append(self._write_table("oracle", ["point", "mass"], [list(r) for r in dist.rows()]))
            self.logger.info(f"Oracle T={dist.t}: {len(dist.masses)} atoms, pruned mass {dist.pruned_mass:.3g}")
            return result
        joint = exact_bistar_distribution(self.spec.G, self.spec.G_tilde, self.spec.noise, cfg.run.horizon)
        result.files.append(self._write_table("oracle_joint", ["y", "y_f1", "mass"], [list(r) for r in joint.rows()]))
        marginal = joint.marginal("y_f1")
        result.files.append(self._write_table("oracle", ["point", "mass"], [list(r) for r in marginal.rows()]))
        self.logger.info(f"Bistar oracle T={joint.t}: {len(joint.masses)} atoms, pruned mass {joint.pruned_mass:.3g}")
        return result

    def _link(self, t: int, name: str, empirical_high: float, bound: BoundResult) -> Dict[str, Any]:
        status = domination_status(empirical_high, bound)
        value = math.inf if bound.pole else bound.clamped_value
        return {
            "t": t,
            "link": name,
            "empirical_high": empirical_high,
            "bound_value": value,
            "applicable": bound.applicable,
            "pole": bound.pole,
            "status": status,
            "log_slack": log_slack(value, empirical_high) if status == PASS else None,
            "validity": [c.to_dict() for c in bound.validity],
        }

    def _mgf_link(self, t: int, values) -> Dict[str, Any]:
        G = self.spec.G
        D = self.scale
        lam = lambda_star(BoundKind.THEOREM_BOUNDED, t, G, D)
        estimate = mgf_from_sample(values, lam, t, Config.MC_BATCHES, self.engine.confidence)
        pole = False
        try:
            chain = mgf_chain_bound("bounded", lam, t, D, G)
        except BoundDomainError:
            chain = math.inf
            pole = True
        status = PASS if estimate.ci_high <= chain else FAIL
        return {
            "t": t,
            "link": "mgf_chain",
            "empirical_high": estimate.ci_high,
            "bound_value": chain,
            "applicable": not pole,
            "pole": pole,
            "status": status,
            "log_slack": log_slack(chain, estimate.ci_high) if status == PASS else None,
            "validity": [],
        }

    def audit(self) -> RunResult:
        """
        Tabulate each link of the Chernoff argument against simulation

        Links per t >= 1: empirical MGF against the geometric-sum bound
        (bounded noise), envelope-violation frequency against its envelope bound
        (A for Gaussian noise, B for bistar) and empirical tail against the
        theorem bound. The link with the largest log slack is flagged as loosest.

        Returns:
            RunResult: Written files and one summary row per link
        """
        cfg = self.config
        params = cfg.schedule
        G = self.spec.G
        D = self.scale
        times = [t for t in cfg.times() if t >= 1]
        if not times:
            raise ValueError("audit needs at least one time t >= 1")
        n, seed = cfg.run.n, cfg.run.seed
        tail_processes = [ProcessKind.Y] if self.spec.kind == SystemKind.TWO_AGENT else [ProcessKind.Y, ProcessKind.Y_F1]
        self.logger.info(f"Audit: {len(times)} times, n={n}")
        samples = self.engine.samples_at(times, n, seed, tail_processes)

        links: List[Dict[str, Any]] = []
        for j, t in enumerate(times):
            if self.spec.noise.bounded:
                links.append(self._mgf_link(t, samples[ProcessKind.Y][:, j]))
            else:
                report = self.engine.estimate_envelope_violation(EnvelopeEvent.A, params, t, n, seed)
                bound = bound_envelope_violation(EnvelopeEvent.A, t, params, G, D, sigma=D)
                links.append(self._link(t, "envelope_A", report.ci_high, bound))
            if self.spec.kind == SystemKind.BISTAR:
                report = self.engine.estimate_envelope_violation(EnvelopeEvent.B, params, t, n, seed)
                bound = bound_envelope_violation(EnvelopeEvent.B, t, params, G, D)
                links.append(self._link(t, "envelope_B", report.ci_high, bound))
            for process in tail_processes:
                k = self.threshold(process, t)
                est = tail_from_sample(process, t, k, samples[process][:, j], self.engine.confidence)
                main, _ = self.evaluate_bounds(process, t, k)
                links.append(self._link(t, f"tail_{process.value}", est.ci_high, main))

        slack = [row for row in links if row["status"] == PASS and row["log_slack"] is not None
                 and math.isfinite(row["log_slack"])]
        loosest = max(slack, key=lambda row: row["log_slack"]) if slack else None
        for row in links:
            row["loosest"] = row is loosest
            if row["status"] == FAIL:
                self.logger.warning(f"Audit link {row['link']} fails at t={row['t']}")

        result = RunResult(summary=[{k: row[k] for k in ("t", "link", "status")} for row in links])
        rows = [[row[h] for h in AUDIT_HEADER] for row in links]
        result.files.append(self._write_table("audit", AUDIT_HEADER, rows))
        result.files.append(write_json(self.out_dir / "audit.json", {
            "links": links,
            "loosest": None if loosest is None else {"t": loosest["t"], "link": loosest["link"]},
        }))
        if loosest is not None:
            self.logger.info(f"Loosest link: {loosest['link']} at t={loosest['t']} (log slack {loosest['log_slack']:.3g})")
        return result


def summary_lines(result: RunResult) -> List[str]:
    """Human-readable domination summary"""
    lines = []
    for row in result.summary:
        if "ci_high" in row:
            lines.append(
                f"{row['process']:>5} t={row['t']:<6} ci_high={row['ci_high']:.4g} "
                f"bound={row['bound_clamped']:.4g} {row['status']}"
            )
        else:
            lines.append(f"t={row['t']:<6} {row['link']:<12} {row['status']}")
    return lines


def run(config: ExperimentConfig) -> RunResult:
    """Tails, moments and bound comparison for one configuration"""
    return ExperimentRunner(config).run()


def audit(config: ExperimentConfig) -> RunResult:
    """Link-by-link audit of the Chernoff argument for one configuration"""
    return ExperimentRunner(config).audit()
