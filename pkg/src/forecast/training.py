"""
Mini-batch subgradient descent with cosine step decay and early stopping
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.utils.errors import ConfigError, DivergedLoss

logger = logging.getLogger(__name__)

Params = Dict[str, np.ndarray]
BatchObjective = Callable[[Params, np.ndarray], Tuple[float, Params]]


@dataclass(frozen=True)
class TrainingOptions:
    """
    Attributes:
        learning_rate: base step, multiplied by the per-parameter scale
        epochs: maximum passes over the training issue times
        batch_size: issue times per mini-batch (all leads of an issue go together)
        patience: epochs without improvement before stopping
        divergence_factor: full training loss above this multiple of the initial loss aborts
    """
    learning_rate: float = 0.05
    epochs: int = 150
    batch_size: int = 64
    patience: int = 60
    divergence_factor: float = 10.0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise ConfigError("Training options must be positive",
                              {"learning_rate": self.learning_rate, "epochs": self.epochs,
                               "batch_size": self.batch_size, "patience": self.patience})


@dataclass
class TrainingTrace:
    train_loss: List[float] = field(default_factory=list)
    validation_loss: List[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_epoch: int = 0

    def to_dict(self) -> Dict:
        return {
            "train_loss": [float(v) for v in self.train_loss],
            "validation_loss": [float(v) for v in self.validation_loss],
            "best_epoch": self.best_epoch,
            "stopped_epoch": self.stopped_epoch,
        }


def cosine_step(base: float, epoch: int, epochs: int) -> float:
    return base * 0.5 * (1.0 + np.cos(np.pi * epoch / epochs))


def _copy(params: Params) -> Params:
    return {k: v.copy() for k, v in params.items()}


def subgradient_descent(params: Params, objective: BatchObjective, n_items: int, options: TrainingOptions,
                        step_scale: Dict[str, float], seed: int,
                        validation: Optional[Callable[[Params], float]] = None) -> Tuple[Params, TrainingTrace]:
    """
    Minimize a batch objective over issue-time mini-batches

    The initial parameters are the first candidate; the returned parameters
    have the lowest validation loss seen (training loss when no validation
    set is given).

    Args:
        params (dict): Initial parameters (copied)
        objective (callable): (params, item indices) -> (loss, gradients)
        n_items (int): Number of training issue times
        options (TrainingOptions): Step size, epochs, batch size, patience
        step_scale (dict): Multiplier of the step per parameter name
        seed (int): Seed of the batch permutation
        validation (callable, optional): params -> validation loss

    Returns:
        tuple: (best parameters, trace)

    Raises:
        DivergedLoss: If the training loss exceeds divergence_factor x initial or is not finite
    """
    rng = np.random.default_rng(seed)
    params = _copy(params)
    everything = np.arange(n_items)
    initial, _ = objective(params, everything)
    trace = TrainingTrace(train_loss=[initial])

    def score(current_loss: float) -> float:
        if validation is None:
            return current_loss
        value = validation(params)
        trace.validation_loss.append(value)
        return value

    best_score = score(initial)
    best = _copy(params)
    stale = 0
    for epoch in range(options.epochs):
        step = cosine_step(options.learning_rate, epoch, options.epochs)
        order = rng.permutation(n_items)
        for start in range(0, n_items, options.batch_size):
            _, grads = objective(params, order[start:start + options.batch_size])
            for name, grad in grads.items():
                params[name] -= step * step_scale.get(name, 1.0) * grad

        loss, _ = objective(params, everything)
        trace.train_loss.append(loss)
        if not np.isfinite(loss) or (initial > 0 and loss > options.divergence_factor * initial):
            raise DivergedLoss("Training loss diverged",
                               {"epoch": epoch + 1, "loss": float(loss), "initial": float(initial)})
        current = score(loss)
        logger.debug(f"epoch {epoch + 1}: train {loss:.6g}, score {current:.6g}")
        if current < best_score:
            best_score = current
            best = _copy(params)
            trace.best_epoch = epoch + 1
            stale = 0
        else:
            stale += 1
            if stale >= options.patience:
                logger.debug(f"Early stop at epoch {epoch + 1} (best {trace.best_epoch})")
                break
    trace.stopped_epoch = len(trace.train_loss) - 1
    return best, trace
