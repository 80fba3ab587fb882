"""
Forward-only selective state-space reference (diagonal A, scalar input)

Continuous system h' = A h + B x, y = C h + D x, discretized per step with
zero-order hold. In selective mode B, C and the step Delta are affine
functions of the current input.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.features.btm import AffineMap
from src.objectives.losses import softplus
from src.utils.errors import DimensionMismatch, NonFiniteState, NonPositiveStep, UnstableStateMatrix

logger = logging.getLogger(__name__)

LIMIT_THRESHOLD = 1e-8


def zoh_discretize(a_diag, b, delta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Zero-order hold: A_bar = exp(delta A), B_bar = (delta A)^-1 (exp(delta A) - I) delta B

    Entries with |delta A| < 1e-8 use the limit B_bar = delta B.

    Args:
        a_diag: Diagonal of A, shape (N,)
        b: Input vector B, shape (N,)
        delta (float): Step > 0

    Returns:
        tuple: (A_bar diagonal, B_bar)

    Raises:
        NonPositiveStep: If delta <= 0
    """
    if not delta > 0:
        raise NonPositiveStep("Discretization step must be positive", {"delta": float(delta)})
    a_diag = np.atleast_1d(np.asarray(a_diag, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a_diag.shape != b.shape:
        raise DimensionMismatch("A diagonal and B must have the same size", {"a": a_diag.shape, "b": b.shape})
    scaled = delta * a_diag
    small = np.abs(scaled) < LIMIT_THRESHOLD
    safe = np.where(small, 1.0, scaled)
    factor = np.where(small, 1.0, np.expm1(safe) / safe)
    return np.exp(scaled), factor * delta * b


@dataclass(frozen=True)
class SsmCell:
    """
    Attributes:
        a_diag: strictly negative diagonal of A, shape (N,)
        d: skip coefficient D
        s_b: input -> B, (1 -> N)
        s_c: input -> C, (1 -> N)
        s_delta: input -> pre-softplus step, (1 -> 1)
    """
    a_diag: np.ndarray
    d: float
    s_b: AffineMap
    s_c: AffineMap
    s_delta: AffineMap

    def __post_init__(self):
        a_diag = np.atleast_1d(np.asarray(self.a_diag, dtype=float))
        if not (a_diag < 0).all():
            raise UnstableStateMatrix("Every diagonal entry of A must be negative", {"a": a_diag.tolist()})
        n = a_diag.size
        for name, mapping, out in (("s_b", self.s_b, n), ("s_c", self.s_c, n), ("s_delta", self.s_delta, 1)):
            if mapping.in_dim != 1 or mapping.out_dim != out:
                raise DimensionMismatch(f"{name} must map a scalar input to {out} values",
                                        {"in": mapping.in_dim, "out": mapping.out_dim})
        object.__setattr__(self, "a_diag", a_diag)

    @property
    def state_size(self) -> int:
        return self.a_diag.size

    @classmethod
    def lti(cls, a_diag, b, c, delta: float, d: float = 0.0) -> "SsmCell":
        """
        Time-invariant cell: constant B, C and step delta
        """
        if not delta > 0:
            raise NonPositiveStep("Discretization step must be positive", {"delta": float(delta)})
        b = np.atleast_1d(np.asarray(b, dtype=float))
        c = np.atleast_1d(np.asarray(c, dtype=float))
        # softplus(log(expm1(delta))) == delta
        delta_bias = float(np.log(np.expm1(delta)))
        return cls(np.asarray(a_diag, dtype=float), d, AffineMap.constant(b), AffineMap.constant(c),
                   AffineMap.constant([delta_bias]))


def selective_scan(cell: SsmCell, inputs) -> np.ndarray:
    """
    Run the recurrence h_k = A_bar_k h_{k-1} + B_bar_k x_k, y_k = C_k h_k + D x_k from h_0 = 0

    Args:
        cell (SsmCell): Parameters and selective maps
        inputs: Scalar inputs x_1..x_T

    Returns:
        np.ndarray: Outputs y_1..y_T

    Raises:
        NonFiniteState: If the state stops being finite
    """
    inputs = np.asarray(inputs, dtype=float).ravel()
    state = np.zeros(cell.state_size)
    outputs = np.empty_like(inputs)
    for k, x in enumerate(inputs):
        b_k = cell.s_b([x])
        c_k = cell.s_c([x])
        delta_k = float(softplus(cell.s_delta([x])[0]))
        a_bar, b_bar = zoh_discretize(cell.a_diag, b_k, delta_k)
        state = a_bar * state + b_bar * x
        if not np.isfinite(state).all():
            raise NonFiniteState("SSM state is no longer finite", {"step": k})
        outputs[k] = c_k @ state + cell.d * x
    return outputs
