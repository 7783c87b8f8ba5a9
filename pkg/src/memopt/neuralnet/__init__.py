from .backend import active_backend, compiled_available, set_backend
from .model import (
    AdamState,
    Architecture,
    Network,
    TrainConfig,
    TrainingLog,
    adam_step,
    backward,
    forward,
    init,
    input_jacobian,
    loss_mae,
    train,
)

__all__ = [
    "AdamState",
    "Architecture",
    "Network",
    "TrainConfig",
    "TrainingLog",
    "active_backend",
    "adam_step",
    "backward",
    "compiled_available",
    "forward",
    "init",
    "input_jacobian",
    "loss_mae",
    "set_backend",
    "train",
]
