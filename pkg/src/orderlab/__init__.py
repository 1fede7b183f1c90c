"""Complete perceptron layers, pruning schedules and the orderedness metric."""

from .layer import LayerParams, LayerShape, StateTrace, backward, forward, forward_rnn_form
from .orderedness import OrderednessProblem, OrderednessResult, orderedness
from .pruning import PruneSpec, apply_pruning
from .training import RunRecord, TrainConfig, train_clp, train_mlp_baseline

__all__ = [
    "LayerParams",
    "LayerShape",
    "StateTrace",
    "forward",
    "forward_rnn_form",
    "backward",
    "OrderednessProblem",
    "OrderednessResult",
    "orderedness",
    "PruneSpec",
    "apply_pruning",
    "RunRecord",
    "TrainConfig",
    "train_clp",
    "train_mlp_baseline",
]
__version__ = "0.1.0"
