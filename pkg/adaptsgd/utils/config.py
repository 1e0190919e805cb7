"""
Config files for the `run` and `study` commands.

The format is flat dotted keys (`section.key = value`, `#` comments), which is a subset of
TOML and is parsed with tomllib. Every key is optional; unknown sections and keys are
rejected.
"""

import os
import re
import tomllib
import types
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Literal, Union, get_args, get_origin, get_type_hints

import numpy as np

from adaptsgd.core.errors import ConfigError, ParameterError
from adaptsgd.core.experiments import (
    DEFAULT_LEVELS,
    DEFAULT_MIN_R2,
    DEFAULT_STUDY_SCHEDULES,
    STAGEWISE_FACTOR,
    StudySettings,
)
from adaptsgd.core.schedules import SCHEDULE_KINDS, ScheduleSpec, theory_eta0
from adaptsgd.core.types import RestartParams, RunConfig
from adaptsgd.problems import BaseObjective, NoiseOracle, get_objective, get_oracle

_TOML_POSITION = re.compile(r"\(at line (\d+), column (\d+)\)")


@dataclass
class ProblemSection:
    kind: str = "quadratic"
    lambdas: list[float] = field(default_factory=lambda: [0.5, 1.0])
    L: float | None = None
    x1: list[float] | None = None
    random_start: bool = False


@dataclass
class NoiseSection:
    kind: str = "exact"
    sigma: float = 0.0
    a: float = 0.0


@dataclass
class ScheduleSection:
    kind: str = "cosine"
    eta0: float | None = None
    T: int | None = None
    alpha: float | None = None
    beta: float | None = None
    T0: int | None = None
    r: float = 1.0
    l: int = 0  # noqa: E741
    milestones: list[int] | None = None
    factor: float = STAGEWISE_FACTOR
    mu: float | None = None


@dataclass
class RunSection:
    T: int = 1000
    n_seeds: int = 1
    base_seed: int = 0
    momentum: float = 0.0
    record_iterates: Literal["none", "thinned", "all"] = "none"
    thin_every: int = 10


@dataclass
class OutputSection:
    path: str = "results"
    curve_every: int = 0


@dataclass
class StudySection:
    levels: list[float] = field(default_factory=lambda: list(DEFAULT_LEVELS))
    schedules: list[str] = field(default_factory=lambda: list(DEFAULT_STUDY_SCHEDULES))
    Ts: list[int] = field(default_factory=lambda: [100, 1000, 10000])
    T: int = 10000
    n_seeds: int = 100
    beta: float | str = 1.0
    c: float | None = None
    nonconvex: bool = False


@dataclass
class RatesSection:
    Ts: list[int] | None = None
    gaps: list[float] | None = None
    max_slope: float | None = None
    min_r2: float = DEFAULT_MIN_R2


@dataclass
class Config:
    problem: ProblemSection = field(default_factory=ProblemSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    schedule: ScheduleSection = field(default_factory=ScheduleSection)
    run: RunSection = field(default_factory=RunSection)
    output: OutputSection = field(default_factory=OutputSection)
    study: StudySection = field(default_factory=StudySection)
    rates: RatesSection = field(default_factory=RatesSection)

    def to_dict(self):
        return {
            f"{section}.{key}": value
            for section, values in asdict(self).items()
            for key, value in values.items()
            if value is not None
        }


def _locate(text: str, section: str, key: str | None = None) -> tuple[int | None, int | None]:
    """Line and column of `section.key` (or of the section) in the raw config text."""
    target = f"{section}.{key}" if key else section
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0]
        column = stripped.find(target)
        if column >= 0:
            return number, column + 1
    return None, None


def _describe(annotation: Any) -> str:
    origin, args = get_origin(annotation), get_args(annotation)
    if origin in (Union, types.UnionType):
        return " or ".join(_describe(arm) for arm in args if arm is not type(None))
    if origin is Literal:
        return "one of " + ", ".join(repr(arg) for arg in args)
    if origin is list:
        return f"a list of {_describe(args[0])}"
    return annotation.__name__


def _coerce(value: Any, annotation: Any, name: str) -> Any:
    """Check a parsed value against the field annotation it is assigned to."""
    origin, args = get_origin(annotation), get_args(annotation)
    if origin in (Union, types.UnionType):
        for arm in args:
            if arm is type(None):
                continue
            try:
                return _coerce(value, arm, name)
            except ValueError:
                pass
    elif origin is Literal:
        if value in args:
            return value
    elif origin is list:
        if isinstance(value, list):
            return [_coerce(item, args[0], name) for item in value]
    elif annotation is bool:
        if isinstance(value, bool):
            return value
    elif annotation is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif annotation is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(value, annotation):
        return value
    raise ValueError(f"{name} must be {_describe(annotation)}, got {value!r}")


def parse_config(text: str) -> Config:
    """Parse config text; errors carry the line and column of the offending entry."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = _TOML_POSITION.search(str(e))
        line, column = (int(match.group(1)), int(match.group(2))) if match else (None, None)
        message = _TOML_POSITION.sub("", str(e)).strip()
        raise ConfigError(f"Invalid config: {message}", line, column) from None

    config = Config()
    sections = {f.name: f for f in fields(Config)}
    for section, values in data.items():
        if section not in sections:
            raise ConfigError(f"Unknown config section: {section}", *_locate(text, section))
        if not isinstance(values, dict):
            raise ConfigError(
                f"{section} must be a section of dotted keys", *_locate(text, section)
            )
        target = getattr(config, section)
        hints = get_type_hints(type(target))
        for key, value in values.items():
            if key not in hints:
                raise ConfigError(
                    f"Unknown config key: {section}.{key}", *_locate(text, section, key)
                )
            try:
                value = _coerce(value, hints[key], f"{section}.{key}")
            except ValueError as e:
                raise ConfigError(str(e), *_locate(text, section, key)) from None
            setattr(target, key, value)
    return config


def load_config(path: str) -> Config:
    if not os.path.isfile(path):
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from None
    return parse_config(text)


########################################################
########    Builders                           #########
########################################################


def build_objective(config: Config) -> BaseObjective:
    problem = config.problem
    if problem.kind == "quadratic":
        return get_objective("quadratic", {"lambdas": problem.lambdas})
    kwargs = {} if problem.L is None else {"L": problem.L}
    return get_objective(problem.kind, kwargs)


# noise parameters each oracle kind reads
_NOISE_PARAMETERS = {
    "exact": (),
    "additive_gaussian": ("sigma",),
    "relative": ("a",),
    "mixed": ("sigma", "a"),
}


def build_oracle(config: Config, dim: int) -> NoiseOracle:
    """Oracle from the [noise] section; a nonzero parameter the kind ignores is an error."""
    noise = config.noise
    used = _NOISE_PARAMETERS.get(noise.kind, ("sigma", "a"))
    for name in ("sigma", "a"):
        if getattr(noise, name) != 0.0 and name not in used:
            raise ConfigError(
                f"noise.{name} has no effect with noise.kind = {noise.kind!r}; "
                f"use a kind that reads it or remove the key"
            )
    return get_oracle(noise.kind, dim, {"sigma": noise.sigma, "a": noise.a})


def build_schedule(config: Config, obj: BaseObjective, oracle: NoiseOracle) -> ScheduleSpec:
    """Schedule from the [schedule] section; η0 defaults to 1/(L(1+a)) and T to run.T."""
    s = config.schedule
    T = s.T if s.T is not None else config.run.T
    eta0 = s.eta0 if s.eta0 is not None else theory_eta0(obj.L, oracle.a)
    if s.kind == "exponential":
        beta = s.beta if s.beta is not None or s.alpha is not None else 1.0
        return ScheduleSpec.exponential(eta0, T, beta=beta, alpha=s.alpha)
    elif s.kind == "cosine":
        return ScheduleSpec.cosine(eta0, T)
    elif s.kind == "cosine_restart":
        return ScheduleSpec.cosine_restart(eta0, s.T0 if s.T0 is not None else T, s.r, s.l)
    elif s.kind in ("inverse_sqrt", "inverse_linear"):
        alpha = s.alpha if s.alpha is not None else 1.0
        constructor = getattr(ScheduleSpec, s.kind)
        return constructor(eta0, alpha, T)
    elif s.kind == "stagewise":
        milestones = s.milestones
        if milestones is None:
            milestones = sorted({m for m in (T // 2, 3 * T // 4) if 0 < m < T})
        return ScheduleSpec.stagewise_decay(eta0, T, milestones, s.factor)
    elif s.kind == "constant":
        return ScheduleSpec.constant(eta0, T)
    elif s.kind == "poly_pl":
        mu = s.mu if s.mu is not None else obj.mu
        if mu is None:
            raise ParameterError("poly_pl needs schedule.mu or an objective with a PL constant")
        return ScheduleSpec.poly_pl(obj.L, oracle.a, mu, T)
    else:
        raise ParameterError(f"Unknown schedule kind: {s.kind}. Supported: {list(SCHEDULE_KINDS)}")


def start_point(config: Config, obj: BaseObjective) -> np.ndarray | None:
    """Configured x1, the objective's default start, or None for per-seed random starts."""
    if config.problem.random_start:
        return None
    if config.problem.x1 is not None:
        return np.asarray(config.problem.x1, dtype=np.float64)
    return obj.default_start()


def build_run_config(config: Config, obj: BaseObjective, spec: ScheduleSpec) -> RunConfig:
    """Single-run settings of the base seed."""
    return RunConfig(
        x1=start_point(config, obj),
        T=spec.T,
        schedule=spec,
        momentum=config.run.momentum,
        seed=config.run.base_seed,
        record_iterates=config.run.record_iterates,
        thin_every=config.run.thin_every,
        first_index=spec.default_first_index,
    )


def build_settings(config: Config, jobs: int = 1) -> StudySettings:
    s, study = config.schedule, config.study
    beta = study.beta
    if isinstance(beta, str) and beta != "condition":
        raise ParameterError(f"study.beta must be a number or 'condition', got {beta!r}")
    restart = None
    if s.kind == "cosine_restart" or "cosine_restart" in study.schedules:
        restart = RestartParams(T0=s.T0 or 1, r=s.r, l=s.l)
    return StudySettings(
        beta=beta if isinstance(beta, str) else float(beta),
        alpha=s.alpha if s.alpha is not None else 1.0,
        c=study.c,
        restart=restart,
        momentum=config.run.momentum,
        x1=None if config.problem.x1 is None else np.asarray(config.problem.x1, dtype=float),
        random_start=config.problem.random_start,
        curve_every=config.output.curve_every,
        jobs=jobs,
    )
