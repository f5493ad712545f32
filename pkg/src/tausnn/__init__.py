"""Time-constant-aware spiking neural network toolkit."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .neuron import LifParams, LifLayerState, lif_step, decay_closed_form
from .network import Architecture, TauSnn, forward, backward, predict, set_inference_tau
from .training import TrainConfig, train, evaluate, save_checkpoint, load_checkpoint

__all__ = [
    "__version__",
    "BACKEND",
    "LifParams",
    "LifLayerState",
    "lif_step",
    "decay_closed_form",
    "Architecture",
    "TauSnn",
    "forward",
    "backward",
    "predict",
    "set_inference_tau",
    "TrainConfig",
    "train",
    "evaluate",
    "save_checkpoint",
    "load_checkpoint",
]
