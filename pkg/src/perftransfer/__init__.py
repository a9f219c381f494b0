"""Performance models of configurable systems and their transfer across environments."""

__version__ = "0.1.0"

from .dataset import EnvironmentId, MeasurementDataset, MeasurementRecord, Oracle, load_csv, random_sample, split
from .evaluation import ExperimentSpec, compare, emit_report, evaluate_model, mape, run_experiment
from .kernels import BACKEND
from .models import load_model, predict, predict_many, save_model
from .space import ConfigurationSpace, OptionSpec, budget, encode, enumerate_space, load_space
from .transfer import TransferContext, TransferOutcome, run_strategy

__all__ = [
    "BACKEND",
    "ConfigurationSpace",
    "EnvironmentId",
    "ExperimentSpec",
    "MeasurementDataset",
    "MeasurementRecord",
    "OptionSpec",
    "Oracle",
    "TransferContext",
    "TransferOutcome",
    "budget",
    "compare",
    "emit_report",
    "encode",
    "enumerate_space",
    "evaluate_model",
    "load_csv",
    "load_model",
    "load_space",
    "mape",
    "predict",
    "predict_many",
    "random_sample",
    "run_experiment",
    "run_strategy",
    "save_model",
    "split",
]
