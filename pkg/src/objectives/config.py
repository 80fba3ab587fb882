"""
Objective configuration
"""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple

import numpy as np

from src.data.forecast_set import point_level_for, validate_levels
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)

OBJECTIVE_KEYS = ("quantiles", "weights", "h_star", "b_max_mw", "lambda_bias", "lambda_opr", "pi_max", "tau_mw")


@dataclass(frozen=True)
class ObjectiveConfig:
    """
    Weighted multi-quantile objective with bias and smoothed-OPR hinges

    Attributes:
        quantiles: training levels, strictly increasing in (0, 1)
        weights: positive weight per level
        h_star: lead hour where bias/OPR constraints apply
        b_max_mw: bias budget (MW)
        lambda_bias: bias hinge strength
        lambda_opr: OPR hinge strength
        pi_max: OPR budget as a fraction
        tau_mw: sigmoid temperature (MW)
    """
    quantiles: Tuple[float, ...] = (0.025, 0.5, 0.975)
    weights: Tuple[float, ...] = (4.0, 1.0, 4.0)
    h_star: int = 24
    b_max_mw: float = 0.0
    lambda_bias: float = 10.0
    lambda_opr: float = 10.0
    pi_max: float = 0.6
    tau_mw: float = 50.0

    def __post_init__(self):
        levels = tuple(float(q) for q in validate_levels(self.quantiles))
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "quantiles", levels)
        object.__setattr__(self, "weights", weights)
        if len(weights) != len(levels):
            raise ConfigError("One weight per quantile level is required",
                              {"quantiles": len(levels), "weights": len(weights)})
        if any(w <= 0 for w in weights):
            raise ConfigError("Quantile weights must be positive", {"weights": list(weights)})
        if self.h_star < 1:
            raise ConfigError("h_star must be a positive lead hour", {"h_star": self.h_star})
        if self.lambda_bias < 0 or self.lambda_opr < 0:
            raise ConfigError("Penalty strengths must be non-negative")
        if not 0.0 <= self.pi_max <= 1.0:
            raise ConfigError("pi_max must lie in [0, 1]", {"pi_max": self.pi_max})
        if not self.tau_mw > 0:
            raise ConfigError("tau_mw must be positive", {"tau_mw": self.tau_mw})

    @property
    def levels(self) -> np.ndarray:
        return np.asarray(self.quantiles)

    @property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights)

    @property
    def point_level(self) -> float:
        return point_level_for(self.quantiles)

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "ObjectiveConfig":
        """
        Strict parse from a config mapping

        Raises:
            ConfigError: On unknown keys
        """
        unknown = sorted(set(raw) - set(OBJECTIVE_KEYS))
        if unknown:
            raise ConfigError(f"Unknown objective keys: {unknown}", {"allowed": list(OBJECTIVE_KEYS)})
        values = dict(raw)
        for key in ("quantiles", "weights"):
            if key in values:
                values[key] = tuple(values[key])
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["quantiles"] = list(self.quantiles)
        data["weights"] = list(self.weights)
        return data
