"""Deterministic generation of all publicly shared artifacts.

Everything here is a pure function of the configuration: the downlink
signal, pilot codebook, both projection matrices, the keystream matrix and
both channel codes.  Regenerating with the same config yields bit-identical
arrays, which the digest() helper makes easy to assert.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .ldpc import LdpcCode
from .polar import Crc, PolarCode, default_crc_poly
from .rng import complex_normal, random_bits, stream

PARAMS_STREAM = "public-params"


@dataclass(frozen=True)
class PublicParams:
    V: np.ndarray    # (M, L) downlink signal, ||V||_F^2 = Pf * M * L
    P: np.ndarray    # (2^Bp, np) pilot codebook, row norms^2 = np * Pp
    C1: np.ndarray   # (L, S/2) orthonormal columns
    C2: np.ndarray   # (L, ns - S) unit-norm columns
    T: np.ndarray    # (S, B) keystream expansion matrix
    ldpc: LdpcCode
    polar: PolarCode

    @property
    def ldpc_H(self) -> np.ndarray:
        return self.ldpc.H

    @property
    def ldpc_G(self) -> np.ndarray:
        return self.ldpc.G

    @property
    def polar_frozen(self) -> np.ndarray:
        return self.polar.frozen_mask

    @property
    def crc_poly(self) -> int:
        return self.polar.crc.poly

    def digest(self) -> str:
        """SHA-256 over every shared artifact, for determinism checks."""
        h = hashlib.sha256()
        for arr in (self.V, self.P, self.C1, self.C2, self.T,
                    self.ldpc_H, self.ldpc.parity_map, self.polar.info_pos):
            h.update(str(arr.shape).encode())
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(self.crc_poly.to_bytes(8, "little"))
        return h.hexdigest()


def _scale_to_total(x: np.ndarray, target: float) -> np.ndarray:
    """Scale x so its squared Frobenius norm equals target exactly."""
    if target == 0.0:
        return np.zeros_like(x)
    nrm = np.linalg.norm(x)
    return x * (np.sqrt(target) / nrm)


def generate_public_params(cfg: SystemConfig) -> PublicParams:
    """Generate all shared artifacts from cfg; pure function of cfg."""
    cfg.validate()
    rng = stream(cfg.seed, PARAMS_STREAM)

    V = _scale_to_total(complex_normal(rng, (cfg.M, cfg.L)),
                        cfg.Pf * cfg.M * cfg.L)

    P = complex_normal(rng, (cfg.pilot_count, cfg.np))
    if cfg.Pp == 0.0:
        P = np.zeros_like(P)
    else:
        P *= np.sqrt(cfg.np * cfg.Pp) / np.linalg.norm(P, axis=1, keepdims=True)

    half = cfg.S // 2
    C1 = np.linalg.qr(complex_normal(rng, (cfg.L, half)))[0]

    C2 = complex_normal(rng, (cfg.L, cfg.key_parity_len))
    C2 /= np.linalg.norm(C2, axis=0, keepdims=True)

    T = random_bits(rng, (cfg.S, cfg.B))

    ldpc = LdpcCode.build(cfg.ns, cfg.S)
    crc = Crc(default_crc_poly(cfg.Br), cfg.Br)
    polar = PolarCode.design(cfg.nc, cfg.polar_info_bits, crc,
                             design_snr=cfg.Pc / cfg.sigma_c2)
    return PublicParams(V=V, P=P, C1=C1, C2=C2, T=T, ldpc=ldpc, polar=polar)
