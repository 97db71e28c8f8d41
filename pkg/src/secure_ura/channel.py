"""Rayleigh block-fading channels and additive noise.

Channels stay constant over the whole frame and the preceding feedback
round.  All functions are pure in an explicit RNG stream.
"""

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .rng import complex_normal


@dataclass(frozen=True)
class UserChannels:
    h: np.ndarray  # (M,) user -> BS
    g: np.ndarray  # (E,) user -> eavesdropper


@dataclass(frozen=True)
class ReceivedFrame:
    """One frame's observations, partitioned into the three uplink segments."""
    y_p: np.ndarray    # (M, np)
    y_d: np.ndarray    # (M, nc)
    y_k: np.ndarray    # (M, ns - S)
    eve_p: np.ndarray  # (E, np)
    eve_d: np.ndarray  # (E, nc)
    eve_k: np.ndarray  # (E, ns - S)

    @classmethod
    def from_uplink(cls, y_bs: np.ndarray, y_eve: np.ndarray,
                    cfg: SystemConfig) -> "ReceivedFrame":
        if y_bs.shape[1] != cfg.frame_len or y_eve.shape[1] != cfg.frame_len:
            raise ValueError(f"frame has {y_bs.shape[1]} columns, expected {cfg.frame_len}")
        a, b = cfg.np, cfg.np + cfg.nc
        return cls(y_p=y_bs[:, :a], y_d=y_bs[:, a:b], y_k=y_bs[:, b:],
                   eve_p=y_eve[:, :a], eve_d=y_eve[:, a:b], eve_k=y_eve[:, b:])


def feedback_observation(h: np.ndarray, V: np.ndarray, sigma_u2: float,
                         rng: np.random.Generator) -> np.ndarray:
    """Downlink observation h^T V plus receiver noise (one user)."""
    if h.shape[0] != V.shape[0]:
        raise ValueError(f"channel length {h.shape[0]} != downlink rows {V.shape[0]}")
    return h @ V + complex_normal(rng, (V.shape[1],), sigma_u2)


def uplink(X: np.ndarray, H: np.ndarray, sigma2: float,
           rng: np.random.Generator) -> np.ndarray:
    """Superimpose user signals through channel columns and add noise.

    X holds one transmit signal per row, H one channel vector per column;
    the same call with the eavesdropper's channel matrix produces its frame.
    """
    if H.shape[1] != X.shape[0]:
        raise ValueError(f"channel columns {H.shape[1]} != user rows {X.shape[0]}")
    return H @ X + complex_normal(rng, (H.shape[0], X.shape[1]), sigma2)
