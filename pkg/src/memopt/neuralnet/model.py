"""Fully connected feed-forward networks: initialization, training with
Adam + MAE + early stopping, and analytic input Jacobians."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import SpecError, TrainingDiverged
from . import _pykernels, backend
from ._pykernels import HIDDEN_ACTS, OUTPUT_ACTS


@dataclass(frozen=True)
class Architecture:
    """Hidden width is multiplier x input dimension on every hidden layer."""

    hidden_layers: int = 2
    hidden_unit_multiplier: int = 8
    hidden_activation: str = "sigmoid"
    output_activation: str = "none"

    def __post_init__(self):
        if self.hidden_layers < 1 or self.hidden_unit_multiplier < 1:
            raise SpecError("hidden_layers and hidden_unit_multiplier must be >= 1")
        if self.hidden_activation not in HIDDEN_ACTS:
            raise SpecError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTS:
            raise SpecError(f"unknown output activation {self.output_activation!r}")

    def label(self) -> str:
        return (
            f"L{self.hidden_layers}xM{self.hidden_unit_multiplier}"
            f"-{self.hidden_activation}-{self.output_activation}"
        )


@dataclass
class Network:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    architecture: Architecture
    input_dim: int
    output_dim: int

    def copy(self) -> "Network":
        return Network(
            [W.copy() for W in self.weights],
            [b.copy() for b in self.biases],
            self.architecture,
            self.input_dim,
            self.output_dim,
        )

    @property
    def n_parameters(self) -> int:
        return sum(W.size for W in self.weights) + sum(b.size for b in self.biases)

    def _acts(self):
        return HIDDEN_ACTS[self.architecture.hidden_activation], OUTPUT_ACTS[
            self.architecture.output_activation
        ]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    minibatch_size: int = 100
    eval_every: int = 200          # epochs between validation checks
    patience_checks: int = 10
    early_stop_tolerance: float = 1e-3
    max_epochs: int = 50_000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("learning_rate", "minibatch_size", "eval_every", "patience_checks", "max_epochs"):
            if getattr(self, name) <= 0:
                raise SpecError(f"{name} must be positive")


@dataclass
class TrainingLog:
    checks: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = float("inf")
    stopped_epoch: int = 0
    stop_reason: str = ""


def init(arch: Architecture, input_dim: int, output_dim: int, seed: int) -> Network:
    """Glorot-uniform weights, zero biases, deterministic per seed."""
    hidden = arch.hidden_unit_multiplier * input_dim
    dims = [input_dim] + [hidden] * arch.hidden_layers + [output_dim]
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims, dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Network(weights, biases, arch, input_dim, output_dim)


def forward(net: Network, X: np.ndarray) -> np.ndarray:
    """Batch forward pass in scaled space; rows map independently."""
    ha, oa = net._acts()
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return backend.forward(net.weights, net.biases, ha, oa, X)


def loss_mae(Yhat: np.ndarray, Y: np.ndarray) -> float:
    return _pykernels.mae(np.asarray(Yhat), np.asarray(Y))


def backward(net: Network, X: np.ndarray, Y: np.ndarray):
    """Gradients of the MAE loss for a batch: (loss, dWs, dbs)."""
    ha, oa = net._acts()
    acts = _pykernels.forward_all(net.weights, net.biases, ha, oa, np.atleast_2d(X))
    return _pykernels.backward_from_acts(net.weights, acts, ha, oa, np.atleast_2d(Y))


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_network(cls, net: Network) -> "AdamState":
        params = net.weights + net.biases
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(state: AdamState, net: Network, grads, config: TrainConfig) -> None:
    """One Adam update (bias-corrected, in place). ``grads`` is (dWs, dbs)."""
    dWs, dbs = grads
    state.t += 1
    c1 = 1.0 - config.adam_beta1**state.t
    c2 = 1.0 - config.adam_beta2**state.t
    for p, g, m, v in zip(net.weights + net.biases, dWs + dbs, state.m, state.v):
        m *= config.adam_beta1
        m += (1.0 - config.adam_beta1) * g
        v *= config.adam_beta2
        v += (1.0 - config.adam_beta2) * g * g
        p -= config.learning_rate * (m / c1) / (np.sqrt(v / c2) + config.adam_epsilon)


def input_jacobian(net: Network, X: np.ndarray) -> np.ndarray:
    """Analytic d(output)/d(input), shape (n, out_dim, in_dim); (out, in)
    for a single sample."""
    ha, oa = net._acts()
    single = np.asarray(X).ndim == 1
    J = _pykernels.input_jacobian(net.weights, net.biases, ha, oa, np.atleast_2d(X))
    return J[0] if single else J


def train(
    net: Network,
    X_train: np.ndarray,
    Y_train: np.ndarray,
    X_val: np.ndarray | None,
    Y_val: np.ndarray | None,
    config: TrainConfig,
) -> tuple[Network, TrainingLog]:
    """Mini-batch training with early stopping on validation MAE.

    Batches of ``minibatch_size`` are drawn per epoch by shuffling the
    training set (without replacement, final short batch kept). Every
    ``eval_every`` epochs the validation loss is checked; after
    ``patience_checks`` consecutive checks without an improvement larger
    than the tolerance, training stops and the weights of the best check
    are restored. Deterministic per (seed, data, config).
    """
    net = net.copy()
    X_train = np.ascontiguousarray(X_train, dtype=np.float64)
    Y_train = np.ascontiguousarray(Y_train, dtype=np.float64)
    has_val = X_val is not None and len(X_val) > 0
    if not has_val:
        warnings.warn("empty validation set: early stopping disabled, running to max_epochs")
    else:
        X_val = np.ascontiguousarray(X_val, dtype=np.float64)
        Y_val = np.ascontiguousarray(Y_val, dtype=np.float64)

    ha, oa = net._acts()
    trainer = backend.make_trainer(
        net.weights,
        net.biases,
        ha,
        oa,
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_epsilon,
    )
    rng = np.random.default_rng(config.rng_seed)
    n = X_train.shape[0]
    log = TrainingLog()
    best_snapshot = None
    stale_checks = 0
    window_losses: list[float] = []

    epoch = 0
    while epoch < config.max_epochs:
        epoch += 1
        perm = rng.permutation(n)
        for start in range(0, n, config.minibatch_size):
            idx = perm[start : start + config.minibatch_size]
            loss = trainer.step(X_train[idx], Y_train[idx])
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite training loss at epoch {epoch}")
            window_losses.append(loss)
        if has_val and epoch % config.eval_every == 0:
            val_loss = loss_mae(trainer.forward(X_val), Y_val)
            if not np.isfinite(val_loss):
                raise TrainingDiverged(f"non-finite validation loss at epoch {epoch}")
            log.checks.append(
                {
                    "epoch": epoch,
                    "validation_loss": val_loss,
                    "train_loss": float(np.mean(window_losses)),
                }
            )
            window_losses = []
            if val_loss < log.best_val_loss - config.early_stop_tolerance:
                stale_checks = 0
            else:
                stale_checks += 1
            if val_loss < log.best_val_loss:
                log.best_val_loss = val_loss
                log.best_epoch = epoch
                best_snapshot = ([W.copy() for W in net.weights], [b.copy() for b in net.biases])
            if stale_checks >= config.patience_checks:
                log.stop_reason = "early_stop"
                break
    if not log.stop_reason:
        log.stop_reason = "max_epochs" if has_val else "no_validation"
    log.stopped_epoch = epoch
    if best_snapshot is not None:
        net.weights, net.biases = best_snapshot
    return net, log
