"""Shared test utilities."""

import numpy as np

from secure_ura import SystemConfig


def make_mini_cfg(**overrides):
    """Small dimensions that keep end-to-end runs in the millisecond range."""
    base = dict(M=8, E=8, Ka=2, L=8, np=32, nc=64, ns=16, B=30, Bp=5, Br=11,
                S=8, sigma_c2=1e-9, sigma_u2=1e-9, trials=3, seed=7)
    base.update(overrides)
    return SystemConfig(**base)


def sc_decode_reference(llr, frozen):
    """Plain successive cancellation, recursive float64 reference."""
    N = len(llr)
    if N == 1:
        if frozen[0]:
            return np.array([0], dtype=np.uint8), np.array([0], dtype=np.uint8)
        bit = np.uint8(llr[0] < 0)
        return np.array([bit]), np.array([bit])
    half = N // 2
    t = np.tanh(0.5 * llr[:half]) * np.tanh(0.5 * llr[half:])
    f = 2.0 * np.arctanh(np.clip(t, -0.999999, 0.999999))
    u_left, c_left = sc_decode_reference(f, frozen[:half])
    g = llr[half:] + (1.0 - 2.0 * c_left.astype(np.float64)) * llr[:half]
    u_right, c_right = sc_decode_reference(g, frozen[half:])
    return (np.concatenate([u_left, u_right]),
            np.concatenate([c_left ^ c_right, c_right]))
