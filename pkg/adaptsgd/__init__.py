from adaptsgd.core.bounds import get_bound
from adaptsgd.core.experiments import run_ensemble
from adaptsgd.core.optimizer import sgd_restart_run, sgd_run
from adaptsgd.core.schedules import ScheduleSpec, step_size
from adaptsgd.problems import NoiseOracle, get_objective, get_oracle

__all__ = [
    "NoiseOracle",
    "ScheduleSpec",
    "get_bound",
    "get_objective",
    "get_oracle",
    "run_ensemble",
    "sgd_restart_run",
    "sgd_run",
    "step_size",
]
