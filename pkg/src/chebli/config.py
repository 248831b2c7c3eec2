"""Run configuration: a YAML document validated into nested dataclasses.

Every validation error names the offending field path (``model.steps[1].at``)
and, when the value came from a file, its line number.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .coefficients import CoefficientModel
from .decision import INJECTIONS, WeightSpec

STAGES = ("calibrate", "eigen", "product", "asym", "limit", "decide", "weights", "centres")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted field path."""

    def __init__(self, path, message, line=None):
        self.path, self.line = path, line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{path or '<root>'}{where}: {message}")


@dataclass
class ModelConfig:
    family: str = "bessel"
    alpha: float = 0.5
    beta: float = 0.0
    steps: list = field(default_factory=list)
    domain_floor: float = 1e-3

    def build(self):
        return CoefficientModel(self.family, self.alpha, self.beta, tuple(tuple(s) for s in self.steps),
                                self.domain_floor)


@dataclass
class GridConfig:
    cutoff: float = 240.0
    t_max: float = 10.0
    x_min: float = 0.0
    x_max: float = 10.0
    x_points: int = 201


@dataclass
class ScheduleConfig:
    x: float = 1.0
    y: float = 2.0
    y_schedule: list = field(default_factory=lambda: [10.0, 20.0, 40.0, 80.0])
    x_schedule: list = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    y_scale_with_x: bool = True
    centres_x: list = field(default_factory=lambda: [1.0, 3.0])
    weight_x: list = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])


@dataclass
class ToleranceConfig:
    cauchy: float = 1e-2
    jost: float = 1e-8
    unitarity: float = 1e-3
    centres: float = 1e-3
    eps: float | None = None
    delta: float | None = None


@dataclass
class DecideConfig:
    inject: str | None = None
    alpha: float = 0.5
    beta: float = 0.5
    x_star: float = 1.0
    value: float = 1.0
    window: list = field(default_factory=lambda: [0.0, 10.0])


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    schedules: ScheduleConfig = field(default_factory=ScheduleConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    weight: dict = field(default_factory=lambda: {"kind": "constant", "s": 0.0, "a": 0.0})
    decide: DecideConfig = field(default_factory=DecideConfig)
    eigen_lambda: float = 1.0
    beurling_pairs: list = field(default_factory=lambda: [[1e-4, 1.0], [0.5, 0.7], [1.0, 2.0], [2.0, 3.5], [4.0, 4.5]])
    pipeline: list = field(default_factory=lambda: ["calibrate", "product", "asym", "limit", "decide"])
    output_dir: str = "chebli-out"
    seed: int = 0

    def to_dict(self):
        return asdict(self)

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def weight_spec(self):
        return WeightSpec.from_dict(self.weight)


_SECTIONS = {"model": ModelConfig, "grid": GridConfig, "schedules": ScheduleConfig,
             "tolerances": ToleranceConfig, "decide": DecideConfig}


def _line_index(text):
    """Map field paths to 1-based source lines by walking the YAML node tree."""
    out = {}

    def walk(node, path):
        out[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                walk(v, f"{path}.{k.value}" if path else str(k.value))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, f"{path}[{i}]")

    root = yaml.compose(text)
    if root is not None:
        walk(root, "")
    return out


def _num(val, path, lines, kind=float, positive=False, allow_none=False):
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(path, f"expected a number, got {val!r}", lines.get(path))
    if kind is int and int(val) != val:
        raise ConfigError(path, f"expected an integer, got {val!r}", lines.get(path))
    val = kind(val)
    if positive and not val > 0:
        raise ConfigError(path, f"must be > 0, got {val!r}", lines.get(path))
    return val


def _schedule(val, path, lines, strict=True):
    if not isinstance(val, list) or not val:
        raise ConfigError(path, "expected a nonempty list of numbers", lines.get(path))
    out = [_num(v, f"{path}[{i}]", lines) for i, v in enumerate(val)]
    bad = [i for i in range(1, len(out)) if (out[i] <= out[i - 1] if strict else out[i] < out[i - 1])]
    if bad:
        raise ConfigError(f"{path}[{bad[0]}]", "schedule must be strictly increasing", lines.get(f"{path}[{bad[0]}]"))
    return out


def _section(cls, raw, path, lines):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected a mapping", lines.get(path))
    names = {f.name for f in fields(cls)}
    for k in raw:
        if k not in names:
            raise ConfigError(f"{path}.{k}", f"unknown field; expected one of {sorted(names)}", lines.get(f"{path}.{k}"))
    return cls(**{**asdict(cls()), **raw})


def from_dict(raw, lines=None):
    """Validate a plain mapping into a :class:`RunConfig`."""
    lines = lines or {}
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be a mapping", lines.get(""))
    top = {f.name for f in fields(RunConfig)}
    for k in raw:
        if k not in top:
            raise ConfigError(k, f"unknown field; expected one of {sorted(top)}", lines.get(k))
    kw = {name: _section(cls, raw.get(name), name, lines) for name, cls in _SECTIONS.items()}
    cfg = RunConfig(**kw, **{k: v for k, v in raw.items() if k not in _SECTIONS})

    m = cfg.model
    if not isinstance(m.family, str):
        raise ConfigError("model.family", "expected a string", lines.get("model.family"))
    m.alpha = _num(m.alpha, "model.alpha", lines)
    m.beta = _num(m.beta, "model.beta", lines)
    m.domain_floor = _num(m.domain_floor, "model.domain_floor", lines, positive=True)
    steps = []
    if not isinstance(m.steps, list):
        raise ConfigError("model.steps", "expected a list of [at, height] pairs", lines.get("model.steps"))
    for i, s in enumerate(m.steps):
        p = f"model.steps[{i}]"
        if isinstance(s, dict):
            s = [s.get("at"), s.get("height")]
        if not isinstance(s, (list, tuple)) or len(s) != 2:
            raise ConfigError(p, "expected [at, height]", lines.get(p))
        steps.append([_num(s[0], f"{p}[0]", lines, positive=True), _num(s[1], f"{p}[1]", lines)])
    m.steps = steps
    try:
        m.build()
    except (ValueError, TypeError) as exc:
        head, _, rest = str(exc).partition(": ")
        path = f"model.{head}" if rest and head in {f.name for f in fields(ModelConfig)} else "model"
        raise ConfigError(path, rest or str(exc), lines.get(path, lines.get("model"))) from exc

    g = cfg.grid
    g.cutoff = _num(g.cutoff, "grid.cutoff", lines, positive=True)
    g.t_max = _num(g.t_max, "grid.t_max", lines, positive=True)
    g.x_min = _num(g.x_min, "grid.x_min", lines)
    g.x_max = _num(g.x_max, "grid.x_max", lines, positive=True)
    g.x_points = _num(g.x_points, "grid.x_points", lines, kind=int, positive=True)
    if g.x_min < 0 or g.x_min >= g.x_max:
        raise ConfigError("grid.x_min", "need 0 <= x_min < x_max", lines.get("grid.x_min"))

    s = cfg.schedules
    s.x = _num(s.x, "schedules.x", lines)
    s.y = _num(s.y, "schedules.y", lines)
    s.y_schedule = _schedule(s.y_schedule, "schedules.y_schedule", lines)
    s.x_schedule = _schedule(s.x_schedule, "schedules.x_schedule", lines)
    s.centres_x = _schedule(s.centres_x, "schedules.centres_x", lines)
    s.weight_x = _schedule(s.weight_x, "schedules.weight_x", lines)
    if not isinstance(s.y_scale_with_x, bool):
        raise ConfigError("schedules.y_scale_with_x", "expected true or false", lines.get("schedules.y_scale_with_x"))
    if len(s.y_schedule) < 4:
        raise ConfigError("schedules.y_schedule", "needs at least 4 points", lines.get("schedules.y_schedule"))

    t = cfg.tolerances
    for name in ("cauchy", "jost", "unitarity", "centres"):
        setattr(t, name, _num(getattr(t, name), f"tolerances.{name}", lines, positive=True))
    for name in ("eps", "delta"):
        setattr(t, name, _num(getattr(t, name), f"tolerances.{name}", lines, positive=True, allow_none=True))

    d = cfg.decide
    if d.inject is not None and d.inject not in INJECTIONS:
        raise ConfigError("decide.inject", f"expected one of {list(INJECTIONS)} or null", lines.get("decide.inject"))
    for name in ("alpha", "beta", "x_star", "value"):
        setattr(d, name, _num(getattr(d, name), f"decide.{name}", lines))
    d.window = _schedule(d.window, "decide.window", lines)
    if len(d.window) != 2:
        raise ConfigError("decide.window", "expected [lo, hi]", lines.get("decide.window"))

    if not isinstance(cfg.weight, dict):
        raise ConfigError("weight", "expected a mapping", lines.get("weight"))
    try:
        cfg.weight = WeightSpec.from_dict(cfg.weight).to_dict()
    except (ValueError, TypeError) as exc:
        raise ConfigError("weight", str(exc), lines.get("weight")) from exc

    cfg.eigen_lambda = _num(cfg.eigen_lambda, "eigen_lambda", lines)
    if not isinstance(cfg.beurling_pairs, list):
        raise ConfigError("beurling_pairs", "expected a list of [x, y] pairs", lines.get("beurling_pairs"))
    pairs = []
    for i, pr in enumerate(cfg.beurling_pairs):
        p = f"beurling_pairs[{i}]"
        if not isinstance(pr, (list, tuple)) or len(pr) != 2:
            raise ConfigError(p, "expected [x, y]", lines.get(p))
        pairs.append([_num(pr[0], f"{p}[0]", lines), _num(pr[1], f"{p}[1]", lines)])
    cfg.beurling_pairs = pairs
    if not isinstance(cfg.pipeline, list):
        raise ConfigError("pipeline", "expected a list of stage names", lines.get("pipeline"))
    for i, st in enumerate(cfg.pipeline):
        if st not in STAGES:
            raise ConfigError(f"pipeline[{i}]", f"unknown stage {st!r}; expected one of {list(STAGES)}",
                              lines.get(f"pipeline[{i}]"))
    if not isinstance(cfg.output_dir, str) or not cfg.output_dir:
        raise ConfigError("output_dir", "expected a nonempty path string", lines.get("output_dir"))
    cfg.seed = _num(cfg.seed, "seed", lines, kind=int)
    return cfg


def loads(text):
    """Parse and validate YAML text."""
    try:
        raw = yaml.safe_load(text)
        lines = _line_index(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError("", f"YAML parse error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark is not None else None) from exc
    return from_dict(raw, lines)


def load(path):
    return loads(Path(path).read_text())


__all__ = ["RunConfig", "ConfigError", "load", "loads", "from_dict", "STAGES"]
