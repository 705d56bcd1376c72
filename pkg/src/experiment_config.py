"""
Experiment Config - Flat dotted key-value experiment files

Example:
    system.kind = two-agent
    influence.G.family = rational
    influence.G.alpha = 0.5
    noise.family = uniform
    noise.half_width = 20
    run.horizon = 400
    run.n = 10000
    run.seed = 7
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.bounds import ScheduleParams
from src.config import Config
from src.dynamics import SystemKind, SystemSpec
from src.influence import InfluenceFunction
from src.noise import DiffNoiseModel

logger = logging.getLogger(__name__)

Diagnostic = Tuple[Optional[int], Optional[str], str]


class ConfigError(ValueError):
    """Invalid experiment configuration, with (line, key, message) diagnostics"""

    def __init__(self, diagnostics: List[Diagnostic], source: str = "<config>"):
        self.diagnostics = diagnostics
        self.source = source
        super().__init__("\n".join(self.format_lines()))

    def format_lines(self) -> List[str]:
        lines = []
        for line, key, message in self.diagnostics:
            where = f"{self.source}:{line}" if line is not None else self.source
            lines.append(f"{where}: {key}: {message}" if key else f"{where}: {message}")
        return lines


class SystemSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SystemKind = SystemKind.TWO_AGENT
    per_agent_noise: bool = False


class InfluenceSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    G: InfluenceFunction
    G_tilde: Optional[InfluenceFunction] = None


class RunSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    horizon: int = Field(10, ge=0)
    n: int = Field(100, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    times: Optional[Tuple[int, ...]] = None
    workers: Optional[int] = Field(None, ge=1)
    chunk_size: Optional[int] = Field(None, ge=1)
    confidence: Optional[float] = Field(None, gt=0.0, lt=1.0)

    @field_validator("times", mode="before")
    @classmethod
    def _split_times(cls, value):
        if isinstance(value, str):
            return tuple(int(v) for v in value.split(",") if v.strip())
        return value

    @model_validator(mode="after")
    def _check_times(self) -> "RunSection":
        if self.times is not None:
            if list(self.times) != sorted(set(self.times)):
                raise ValueError("run.times must be strictly increasing")
            if self.times and (self.times[0] < 0 or self.times[-1] > self.horizon):
                raise ValueError(f"run.times must lie in [0, {self.horizon}]")
        return self


class OutputSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dir: str = str(Config.OUTPUT_DIR)
    format: Literal["csv", "json"] = "csv"
    svg: bool = False


class ExperimentConfig(BaseModel):
    """Complete description of one experiment"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    system: SystemSection = SystemSection()
    influence: InfluenceSection
    noise: DiffNoiseModel
    schedule: ScheduleParams = ScheduleParams()
    run: RunSection = RunSection()
    output: OutputSection = OutputSection()

    @model_validator(mode="after")
    def _check_system(self) -> "ExperimentConfig":
        if self.system.kind == SystemKind.BISTAR and self.influence.G_tilde is None:
            raise ValueError("bistar system requires influence.G_tilde")
        if self.system.per_agent_noise and self.noise.family == "discrete":
            raise ValueError("per-agent noise supports uniform and gaussian families only")
        return self

    def system_spec(self) -> SystemSpec:
        return SystemSpec(
            kind=self.system.kind,
            G=self.influence.G,
            G_tilde=self.influence.G_tilde,
            noise=self.noise,
            per_agent_noise=self.system.per_agent_noise,
        )

    def times(self) -> List[int]:
        """Requested times, all of 0..T by default"""
        if self.run.times is not None:
            return list(self.run.times)
        return list(range(self.run.horizon + 1))

    def with_overrides(
        self,
        seed: Optional[int] = None,
        n: Optional[int] = None,
        out: Optional[Union[str, Path]] = None,
        fmt: Optional[str] = None,
    ) -> "ExperimentConfig":
        """Copy with command-line overrides applied and re-validated"""
        data = self.model_dump(mode="json", exclude_none=True)
        if seed is not None:
            data["run"]["seed"] = seed
        if n is not None:
            data["run"]["n"] = n
        if out is not None:
            data["output"]["dir"] = str(out)
        if fmt is not None:
            data["output"]["format"] = fmt
        return ExperimentConfig.model_validate(data)


def _nest(entries: Dict[str, Tuple[int, str]]) -> Tuple[Dict[str, Any], List[Diagnostic]]:
    root: Dict[str, Any] = {}
    problems: List[Diagnostic] = []
    for key, (line, value) in entries.items():
        parts = key.split(".")
        node = root
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                problems.append((line, key, f"'{part}' is a value, not a section"))
                break
            node = child
        else:
            if isinstance(node.get(parts[-1]), dict):
                problems.append((line, key, "is a section, not a value"))
            else:
                node[parts[-1]] = value
    return root, problems


def _line_of(loc: Tuple[Any, ...], lines: Dict[str, int]) -> Tuple[Optional[int], str]:
    key = ".".join(str(p) for p in loc)
    if key in lines:
        return lines[key], key
    # Section-level errors point at the first line of the section
    candidates = [ln for k, ln in lines.items() if k.startswith(key + ".")] if key else []
    return (min(candidates) if candidates else None), key


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """
    Parse a flat key-value experiment file

    Args:
        text: File contents
        source: Name used in diagnostics

    Returns:
        ExperimentConfig: Validated configuration

    Raises:
        ConfigError: With one diagnostic per offending line or key
    """
    entries: Dict[str, Tuple[int, str]] = {}
    problems: List[Diagnostic] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append((number, None, f"expected 'key = value', got {raw.strip()!r}"))
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or any(not p for p in key.split(".")):
            problems.append((number, key or None, "malformed key"))
            continue
        if key in entries:
            problems.append((number, key, f"duplicate key (first set on line {entries[key][0]})"))
            continue
        entries[key] = (number, value)

    nested, nest_problems = _nest(entries)
    problems.extend(nest_problems)
    if problems:
        raise ConfigError(problems, source)

    lines = {key: line for key, (line, _) in entries.items()}
    try:
        return ExperimentConfig.model_validate(nested)
    except ValidationError as e:
        diagnostics = []
        for err in e.errors():
            loc = tuple(p for p in err["loc"] if not isinstance(p, int))
            line, key = _line_of(loc, lines)
            diagnostics.append((line, key or None, err["msg"]))
        raise ConfigError(diagnostics, source) from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and parse an experiment file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([(None, None, f"cannot read config: {e}")], str(path)) from e
    config = parse_config(text, source=str(path))
    logger.info(f"Loaded experiment config from {path}")
    return config


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def _flatten(prefix: str, data: Dict[str, Any], out: List[str]) -> None:
    for key, value in data.items():
        dotted = f"{prefix}.{key}" if prefix else key
        if isinstance(value, dict):
            _flatten(dotted, value, out)
        else:
            out.append(f"{dotted} = {_format_value(value)}")


def dump_config(config: ExperimentConfig) -> str:
    """Canonical text form; parse_config(dump_config(c)) == c"""
    lines: List[str] = []
    _flatten("", config.model_dump(mode="json", exclude_none=True), lines)
    return "\n".join(lines) + "\n"
