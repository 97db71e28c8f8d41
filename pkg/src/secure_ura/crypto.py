"""Keystream expansion and XOR encryption of user messages."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Ciphertext:
    c: np.ndarray    # full ciphertext, length B
    c_p: np.ndarray  # pilot sub-message, length Bp
    c_d: np.ndarray  # polar sub-message, length B - Bp


def split_ciphertext(c: np.ndarray, pilot_bits: int) -> Ciphertext:
    c = np.asarray(c, dtype=np.uint8)
    if not 0 < pilot_bits < c.size:
        raise ValueError(f"pilot split {pilot_bits} outside (0, {c.size})")
    return Ciphertext(c=c, c_p=c[:pilot_bits].copy(), c_d=c[pilot_bits:].copy())


def expand_key(s: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Expand the secret key to a full-length keystream: k = s T mod 2."""
    s = np.asarray(s, dtype=np.uint8)
    if s.shape[-1] != T.shape[0]:
        raise ValueError(f"key length {s.shape[-1]} != keystream matrix rows {T.shape[0]}")
    return (s.astype(np.int64) @ T.astype(np.int64) % 2).astype(np.uint8)


def encrypt(w: np.ndarray, k: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.uint8)
    k = np.asarray(k, dtype=np.uint8)
    if w.shape != k.shape:
        raise ValueError(f"message shape {w.shape} != keystream shape {k.shape}")
    return w ^ k


# XOR is an involution, so decryption is the same map.
decrypt = encrypt
