"""Binary link scheduling in interference networks with graph neural networks."""

from .channel import (
    ChannelRealization,
    Deployment,
    DeploymentInfeasible,
    GeometryParams,
    PathLossParams,
    SystemParams,
    generate_channel,
    make_rng,
)
from .config import ConfigError, ExperimentConfig, load_config
from .data import DataError, DatasetFile, SampleSet, generate_dataset, label_dataset
from .evaluation import EvalReport, convergence_epoch, evaluate
from .gnn import Adam, GnnModel, gnn_backward, gnn_forward, init_model, load_checkpoint, save_checkpoint
from .graph import GraphBatch, InterferenceGraph, build_batch, build_graph, permute_graph
from .losses import contrastive_loss, supervised_loss, unsupervised_loss
from .rates import exhaustive_search, link_rates, sum_rate
from .training import REGIMES, TrainingRegime, TrainResult, train

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "ChannelRealization",
    "ConfigError",
    "DataError",
    "DatasetFile",
    "Deployment",
    "DeploymentInfeasible",
    "EvalReport",
    "ExperimentConfig",
    "GeometryParams",
    "GnnModel",
    "GraphBatch",
    "InterferenceGraph",
    "PathLossParams",
    "REGIMES",
    "SampleSet",
    "SystemParams",
    "TrainResult",
    "TrainingRegime",
    "build_batch",
    "build_graph",
    "contrastive_loss",
    "convergence_epoch",
    "evaluate",
    "exhaustive_search",
    "generate_channel",
    "generate_dataset",
    "gnn_backward",
    "gnn_forward",
    "init_model",
    "label_dataset",
    "link_rates",
    "load_checkpoint",
    "load_config",
    "make_rng",
    "permute_graph",
    "save_checkpoint",
    "sum_rate",
    "supervised_loss",
    "train",
    "unsupervised_loss",
]
