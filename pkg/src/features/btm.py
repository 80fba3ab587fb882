"""
Behind-the-meter (BTM) solar fusion: daylight gate and FiLM-style modulation
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Sequence

import numpy as np
import pandas as pd

from src.utils.errors import ConfigError, DimensionMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AffineMap:
    """
    Fixed affine map v -> W v + c
    """
    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        weight = np.atleast_2d(np.asarray(self.weight, dtype=float))
        bias = np.atleast_1d(np.asarray(self.bias, dtype=float))
        if bias.shape != (weight.shape[0],):
            raise DimensionMismatch("Affine bias must match the output dimension",
                                    {"weight": weight.shape, "bias": bias.shape})
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "bias", bias)

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]

    def __call__(self, value) -> np.ndarray:
        value = np.atleast_1d(np.asarray(value, dtype=float))
        if value.shape[-1] != self.in_dim:
            raise DimensionMismatch("Input does not match the affine map",
                                    {"expected": self.in_dim, "got": value.shape[-1]})
        return value @ self.weight.T + self.bias

    @classmethod
    def constant(cls, value: Sequence[float], in_dim: int = 1) -> "AffineMap":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(np.zeros((value.size, in_dim)), value)

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "AffineMap":
        return cls(np.asarray(raw["weight"], dtype=float), np.asarray(raw["bias"], dtype=float))


def btm_fuse(x_t, b, c_t, d_t: float, phi: AffineMap, g: AffineMap) -> np.ndarray:
    """
    z_t = x_t + d_t * (gamma_t * phi(b) + beta_t), with (gamma_t, beta_t) = g(c_t)

    Args:
        x_t: Embedded input vector
        b: Registry feature vector (e.g. installed PV capacity)
        c_t: Context vector (e.g. irradiance)
        d_t (float): Daylight gate in [0, 1]
        phi (AffineMap): Registry embedding
        g (AffineMap): Context to (gamma, beta), output size 2 * dim(x_t)

    Returns:
        np.ndarray: Fused vector

    Raises:
        DimensionMismatch: If the vector sizes disagree
    """
    x_t = np.atleast_1d(np.asarray(x_t, dtype=float))
    if not 0.0 <= d_t <= 1.0:
        raise ConfigError("Daylight gate must lie in [0, 1]", {"gate": d_t})
    b_emb = phi(b)
    film = g(c_t)
    if b_emb.shape != x_t.shape or film.shape != (2 * x_t.size,):
        raise DimensionMismatch("BTM fusion dimensions do not agree",
                                {"x": x_t.size, "phi": b_emb.size, "g": film.size})
    gamma, beta = film[:x_t.size], film[x_t.size:]
    return x_t + d_t * (gamma * b_emb + beta)


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def daylight_gate(timestamps, tz: str, sunrise: float = 6.0, sunset: float = 19.0,
                  ramp_hours: float = 1.0) -> np.ndarray:
    """
    Time-of-day gate: 0 at night, 1 in daylight, smooth ramps of ramp_hours
    after sunrise and before sunset (local clock hours)
    """
    if not 0.0 <= sunrise < sunset <= 24.0 or ramp_hours <= 0:
        raise ConfigError("Invalid daylight window",
                          {"sunrise": sunrise, "sunset": sunset, "ramp_hours": ramp_hours})
    local = pd.DatetimeIndex(timestamps).tz_convert(tz)
    hour = np.asarray(local.hour + local.minute / 60.0, dtype=float)
    rising = _smoothstep((hour - sunrise) / ramp_hours)
    falling = _smoothstep((sunset - hour) / ramp_hours)
    return np.minimum(rising, falling)
