"""Sigmoid MLPs trained by backpropagation with momentum or RPROP, for
classifying sample origin from metabolite concentration profiles."""

__version__ = "0.1.0"

from .ingest import RawMatrix, encode_origins, generate_synthetic, load_csv, write_csv
from .preprocess import PreprocessedDataset, preprocess_pipeline
from .network import Architecture, Mlp, forward, init_weights, sigmoid, threshold_outputs
from .backprop import BackpropConfig, gradient, momentum_step, train_backprop
from .rprop import RpropConfig, RpropState, rprop_step, train_rprop
from .metrics import EvalResult, accuracy, evaluate, mse, r_squared
from .experiment import ExperimentConfig, make_split, run_protocol, shibata_hidden, sweep

__all__ = [
    "RawMatrix", "encode_origins", "generate_synthetic", "load_csv", "write_csv",
    "PreprocessedDataset", "preprocess_pipeline",
    "Architecture", "Mlp", "forward", "init_weights", "sigmoid", "threshold_outputs",
    "BackpropConfig", "gradient", "momentum_step", "train_backprop",
    "RpropConfig", "RpropState", "rprop_step", "train_rprop",
    "EvalResult", "accuracy", "evaluate", "mse", "r_squared",
    "ExperimentConfig", "make_split", "run_protocol", "shibata_hidden", "sweep",
]
