import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Literal

import numpy as np

if TYPE_CHECKING:
    from adaptsgd.core.schedules import ScheduleSpec

ScheduleKind = Literal[
    "exponential",
    "cosine",
    "cosine_restart",
    "inverse_sqrt",
    "inverse_linear",
    "stagewise",
    "constant",
    "poly_pl",
]
ProblemKind = Literal["quadratic", "polar_pl"]
NoiseKind = Literal["exact", "additive_gaussian", "relative", "mixed"]
RecordMode = Literal["none", "thinned", "all"]
TheoremName = Literal["exp-pl", "cos-pl", "exp-nc", "cos-nc", "poly-pl", "restart"]
SuiteName = Literal["lemmas", "pl", "noise", "descent"]
StudyName = Literal["noise-adaptation", "bound-validation", "rates"]


def _serialize_value(value: Any) -> Any:
    """Convert a value to a JSON-serializable representation."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, np.generic):
        return _serialize_value(value.item())
    if isinstance(value, np.ndarray):
        return [_serialize_value(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_serialize_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _serialize_value(v) for k, v in value.items()}
    if hasattr(value, "to_dict"):
        return _serialize_value(value.to_dict())
    try:
        return repr(value)
    except Exception:
        return f"<{type(value).__name__}>"


########################################################
########    Types for SGD Runs                 #########
########################################################


@dataclass
class RunConfig:
    """Settings of a single SGD run.

    `first_index` is the step index used for the first update: 1 matches the sums
    Σ_{t=1}^T η_t of the convergence proofs, 0 matches the stage loop of the restart
    algorithm. x1=None draws the start from the seed's own stream (objectives with a
    random-start rule only).
    """

    x1: np.ndarray | None
    T: int
    schedule: "ScheduleSpec"
    momentum: float = 0.0
    seed: int = 0
    record_iterates: RecordMode = "none"
    thin_every: int = 1
    first_index: int = 1

    def to_dict(self):
        return {
            "x1": _serialize_value(self.x1),
            "T": self.T,
            "schedule": self.schedule.to_dict(),
            "momentum": self.momentum,
            "seed": self.seed,
            "record_iterates": self.record_iterates,
            "thin_every": self.thin_every,
            "first_index": self.first_index,
        }


@dataclass
class RunTrace:
    """Per-iteration record of one SGD run.

    Arrays are indexed by iteration (row k holds step t = first_index + k); `value_gap`
    and `grad_sq` are measured at x_t before the update that uses `eta[k]`.
    """

    eta: np.ndarray
    value_gap: np.ndarray
    grad_sq: np.ndarray
    final_point: np.ndarray
    final_gap: float
    seed: int = 0
    first_index: int = 1
    iterates: np.ndarray | None = None
    iterate_steps: np.ndarray | None = None

    @property
    def T(self) -> int:
        return int(self.eta.shape[0])

    @property
    def steps(self) -> np.ndarray:
        return np.arange(self.first_index, self.first_index + self.T)

    @property
    def has_all_iterates(self) -> bool:
        return self.iterates is not None and self.iterates.shape[0] == self.T

    def to_dict(self):
        return {
            "eta": _serialize_value(self.eta),
            "value_gap": _serialize_value(self.value_gap),
            "grad_sq": _serialize_value(self.grad_sq),
            "final_point": _serialize_value(self.final_point),
            "final_gap": _serialize_value(self.final_gap),
            "seed": self.seed,
            "first_index": self.first_index,
            "iterates": _serialize_value(self.iterates),
            "iterate_steps": _serialize_value(self.iterate_steps),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunTrace":
        iterates = data.get("iterates")
        steps = data.get("iterate_steps")
        return cls(
            eta=np.asarray(data.get("eta"), dtype=float),
            value_gap=np.asarray(data.get("value_gap"), dtype=float),
            grad_sq=np.asarray(data.get("grad_sq"), dtype=float),
            final_point=np.asarray(data.get("final_point"), dtype=float),
            final_gap=float(data.get("final_gap")),
            seed=data.get("seed", 0),
            first_index=data.get("first_index", 1),
            iterates=None if iterates is None else np.asarray(iterates, dtype=float),
            iterate_steps=None if steps is None else np.asarray(steps, dtype=int),
        )


########################################################
########    Types for Theorem Bounds           #########
########################################################


@dataclass(frozen=True)
class RestartParams:
    T0: int
    r: float = 1.0
    l: int = 0  # noqa: E741

    def to_dict(self):
        return {"T0": self.T0, "r": self.r, "l": self.l}

    @classmethod
    def from_dict(cls, data: dict) -> "RestartParams":
        return cls(T0=int(data.get("T0")), r=float(data.get("r", 1.0)), l=int(data.get("l", 0)))


@dataclass
class BoundInputs:
    """Parameters shared by the theorem evaluators; each theorem reads what it needs."""

    L: float = 1.0
    mu: float = 1.0
    a: float = 0.0
    b: float = 0.0
    T: int = 1
    beta: float = 1.0
    c: float = 2.0
    delta1: float = 1.0
    restart: RestartParams | None = None

    def to_dict(self):
        return {
            "L": self.L,
            "mu": self.mu,
            "a": self.a,
            "b": self.b,
            "T": self.T,
            "beta": self.beta,
            "c": self.c,
            "delta1": self.delta1,
            "restart": self.restart.to_dict() if self.restart else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundInputs":
        restart = data.get("restart")
        return cls(
            L=float(data.get("L", 1.0)),
            mu=float(data.get("mu", 1.0)),
            a=float(data.get("a", 0.0)),
            b=float(data.get("b", 0.0)),
            T=int(data.get("T", 1)),
            beta=float(data.get("beta", 1.0)),
            c=float(data.get("c", 2.0)),
            delta1=float(data.get("delta1", 1.0)),
            restart=RestartParams.from_dict(restart) if restart else None,
        )


@dataclass
class BoundTerm:
    name: str
    value: float

    def to_dict(self):
        return {"name": self.name, "value": _serialize_value(self.value)}


@dataclass
class BoundValue:
    """Result of a theorem evaluation: additive terms and their total."""

    theorem: str
    terms: list[BoundTerm]
    total: float

    @classmethod
    def from_terms(cls, theorem: str, terms: list[BoundTerm]) -> "BoundValue":
        values = [t.value for t in terms]
        total = math.inf if any(math.isinf(v) for v in values) else math.fsum(values)
        return cls(theorem=theorem, terms=terms, total=total)

    def term(self, name: str) -> float:
        for t in self.terms:
            if t.name == name:
                return t.value
        raise KeyError(name)

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "terms": [t.to_dict() for t in self.terms],
            "total": _serialize_value(self.total),
        }


########################################################
########    Types for Experiments              #########
########################################################


@dataclass
class EnsembleRecord:
    """Aggregate of the final gaps of one seed ensemble."""

    schedule: str
    T: int
    mean_gap: float
    std_gap: float
    ci95_halfwidth: float
    n_seeds: int
    level: float | None = None
    final_gaps: np.ndarray | None = None
    curve: list[tuple[int, float]] | None = None

    def to_dict(self):
        return {
            "schedule": self.schedule,
            "T": self.T,
            "mean_gap": _serialize_value(self.mean_gap),
            "std_gap": _serialize_value(self.std_gap),
            "ci95_halfwidth": _serialize_value(self.ci95_halfwidth),
            "n_seeds": self.n_seeds,
            "level": self.level,
        }


@dataclass
class EnsembleResult:
    records: list[EnsembleRecord] = field(default_factory=list)

    def to_dict(self):
        return {"records": [r.to_dict() for r in self.records]}


@dataclass
class RateFit:
    """Least-squares fit of ln(mean_gap) against ln(T)."""

    slope: float
    intercept: float
    r_squared: float

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared}


@dataclass
class StudyRow:
    level: float | None
    schedule: str
    T: int
    mean_gap: float
    ci95: float
    bound: float | None = None
    within_bound: bool | None = None
    curve: list[tuple[int, float]] | None = None

    def to_dict(self):
        return {
            "level": self.level,
            "schedule": self.schedule,
            "T": self.T,
            "mean_gap": _serialize_value(self.mean_gap),
            "ci95": _serialize_value(self.ci95),
            "bound": _serialize_value(self.bound),
            "within_bound": self.within_bound,
        }


@dataclass
class StudyReport:
    """Rows of a study plus the outcome of the assertions embedded in it."""

    name: str
    rows: list[StudyRow] = field(default_factory=list)
    checks: list["CheckResult"] = field(default_factory=list)
    fits: dict[str, RateFit] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "name": self.name,
            "rows": [r.to_dict() for r in self.rows],
            "checks": [c.to_dict() for c in self.checks],
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
        }


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


########################################################
########    Types for Run Metadata             #########
########################################################


@dataclass
class RunMetadata:
    """What a CLI invocation was asked to do; first entry of every run log."""

    command: str
    target: str | None
    config: dict[str, Any]
    jobs: int = 1

    def to_dict(self):
        return {
            "command": self.command,
            "target": self.target,
            "config": {k: _serialize_value(v) for k, v in self.config.items()},
            "jobs": self.jobs,
        }
