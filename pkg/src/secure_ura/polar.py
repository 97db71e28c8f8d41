"""CRC-aided polar code with successive cancellation list decoding.

Frozen-set design uses Gaussian-approximation density evolution seeded with
the BPSK channel LLR mean 4 * snr.  The phi-function inverse is evaluated by
log-domain bisection, which stays finite for arbitrarily high design SNR.

The list decoder works on per-depth buffers (O(N) memory per path) and is
vectorized over both the list dimension and a batch of independent decodes.
Check-side LLR combining uses the exact tanh rule and path metrics are the
exact log-domain penalties, so list size 1 reproduces plain successive
cancellation.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .modulation import clamp_llr

# ---------------------------------------------------------------------------
# CRC
# ---------------------------------------------------------------------------

#: full generator polynomials (leading coefficient included), keyed by width
_CRC_POLYS = {
    8: 0x1D5,
    11: 0xB8B,
    12: 0x180F,
    16: 0x11021,
    24: 0x1864CFB,
}


def default_crc_poly(width: int) -> int:
    """Generator polynomial for a given CRC width (x^w + x + 1 fallback)."""
    return _CRC_POLYS.get(width, (1 << width) | 0b11)


class Crc:
    """Bitwise CRC over GF(2), realized as matrix products for batched use."""

    def __init__(self, poly: int, width: int):
        if poly >> width != 1:
            raise ValueError(f"polynomial 0x{poly:X} does not have degree {width}")
        self.poly = poly
        self.width = width
        self._poly_bits = np.array([(poly >> (width - 1 - i)) & 1
                                    for i in range(width)], dtype=np.uint8)

    def _remainder(self, bits: np.ndarray) -> np.ndarray:
        # shift-register division; the result carries an implicit x^width
        # factor, i.e. this returns poly(bits) * x^width mod g
        reg = np.zeros(self.width, dtype=np.uint8)
        for b in bits:
            fb = b ^ reg[0]
            reg[:-1] = reg[1:]
            reg[-1] = 0
            if fb:
                reg ^= self._poly_bits
        return reg

    @lru_cache(maxsize=8)
    def _encode_matrix(self, k: int) -> np.ndarray:
        rows = np.empty((k, self.width), dtype=np.uint8)
        word = np.zeros(k, dtype=np.uint8)
        for i in range(k):
            word[:] = 0
            word[i] = 1
            rows[i] = self._remainder(word)
        return rows

    @lru_cache(maxsize=8)
    def _check_matrix(self, total: int) -> np.ndarray:
        # the common x^width factor is invertible mod g, so zero-syndrome
        # detection is unaffected by it
        rows = np.empty((total, self.width), dtype=np.uint8)
        word = np.zeros(total, dtype=np.uint8)
        for i in range(total):
            word[:] = 0
            word[i] = 1
            rows[i] = self._remainder(word)
        return rows

    def parity(self, payload: np.ndarray) -> np.ndarray:
        """CRC bits of (batched) payloads."""
        payload = np.asarray(payload, dtype=np.uint8)
        G = self._encode_matrix(payload.shape[-1])
        return (payload.astype(np.int64) @ G.astype(np.int64) % 2).astype(np.uint8)

    def check(self, word: np.ndarray) -> np.ndarray:
        """True where a (batched) payload+CRC word has zero syndrome."""
        word = np.asarray(word, dtype=np.uint8)
        M = self._check_matrix(word.shape[-1])
        syn = word.astype(np.int64) @ M.astype(np.int64) % 2
        return ~np.any(syn, axis=-1)


# ---------------------------------------------------------------------------
# Gaussian-approximation density evolution
# ---------------------------------------------------------------------------


def _log_phi(m: np.ndarray) -> np.ndarray:
    """log of the GA phi function, stable for any positive mean."""
    m = np.asarray(m, dtype=np.float64)
    out = np.empty_like(m)
    small = m <= 10.0
    ms = np.where(small, m, 1.0)
    out_small = np.minimum(-0.4527 * ms ** 0.86 + 0.0218, 0.0)
    mb = np.where(small, 11.0, m)
    out_big = 0.5 * (np.log(np.pi) - np.log(mb)) - mb / 4.0 + np.log1p(-10.0 / (7.0 * mb))
    out = np.where(small, out_small, out_big)
    return out


def _phi_inv(target_log: np.ndarray, hi: float) -> np.ndarray:
    """Inverse of phi via bisection on the log scale (vectorized)."""
    target_log = np.asarray(target_log, dtype=np.float64)
    lo = np.zeros_like(target_log)
    hi_arr = np.full_like(target_log, hi)
    out = np.where(target_log >= 0.0, 0.0, np.nan)
    todo = target_log < 0.0
    lo = lo[todo]
    hi_v = hi_arr[todo]
    t = target_log[todo]
    for _ in range(120):
        mid = 0.5 * (lo + hi_v)
        too_reliable = _log_phi(mid) < t
        hi_v = np.where(too_reliable, mid, hi_v)
        lo = np.where(too_reliable, lo, mid)
    out[todo] = 0.5 * (lo + hi_v)
    return out


def ga_reliabilities(block_len: int, design_snr: float) -> np.ndarray:
    """Mean bit-channel LLR of every synthetic channel, natural index order."""
    n = block_len.bit_length() - 1
    if 1 << n != block_len:
        raise ValueError(f"block length {block_len} is not a power of two")
    m = np.array([4.0 * design_snr])
    for _ in range(n):
        logphi = _log_phi(m)
        phi = np.exp(logphi)
        # phi_f = phi * (2 - phi), evaluated in the log domain
        log_target = logphi + np.log(2.0 - phi)
        hi = float(max(100.0, 8.0 * m.max() + 100.0))
        mf = _phi_inv(log_target, hi)
        mg = 2.0 * m
        nxt = np.empty(2 * m.size)
        nxt[0::2] = mf
        nxt[1::2] = mg
        m = nxt
    return m


def design_info_set(block_len: int, n_info: int, design_snr: float) -> np.ndarray:
    """Indices of the n_info most reliable synthetic channels, sorted."""
    rel = ga_reliabilities(block_len, design_snr)
    order = np.argsort(rel, kind="stable")
    return np.sort(order[-n_info:])


# ---------------------------------------------------------------------------
# Polar transform and list decoder
# ---------------------------------------------------------------------------


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Self-inverse GF(2) polar transform over the last axis (batched)."""
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    if N & (N - 1):
        raise ValueError(f"transform length {N} is not a power of two")
    w = 1
    while w < N:
        v = x.reshape(x.shape[:-1] + (N // (2 * w), 2, w))
        v[..., 0, :] ^= v[..., 1, :]
        w *= 2
    return x


@lru_cache(maxsize=16)
def _schedule(n: int, frozen_bytes: bytes) -> tuple:
    """Flat traversal schedule of the depth-n decoding tree.

    Fully frozen subtrees collapse into one 'zero' op: their codeword is the
    all-zero vector and the exact path-metric penalty over the subtree equals
    the sum of per-symbol softplus terms of the subtree input LLRs.
    """
    frozen = np.frombuffer(frozen_bytes, dtype=np.uint8).astype(bool)
    ops = []

    def visit(depth, leaf_base):
        width = 1 << (n - depth)
        if frozen[leaf_base:leaf_base + width].all():
            ops.append(("zero", depth))
            return
        if depth == n:
            ops.append(("leaf", leaf_base))
            return
        ops.append(("f", depth))
        visit(depth + 1, leaf_base)
        ops.append(("g", depth))
        visit(depth + 1, leaf_base + (width >> 1))
        ops.append(("c", depth))

    visit(0, 0)
    return tuple(ops)


def _f_llr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    t = np.tanh(0.5 * a) * np.tanh(0.5 * b)
    np.clip(t, -0.999999, 0.999999, out=t)
    return 2.0 * np.arctanh(t)


@dataclass(frozen=True)
class PolarCode:
    N: int
    K: int                 # payload + CRC bits carried by the polar code
    crc: Crc
    info_pos: np.ndarray   # sorted indices of information positions

    @classmethod
    def design(cls, block_len: int, n_info: int, crc: Crc, design_snr: float) -> "PolarCode":
        if n_info > block_len:
            raise ValueError(f"cannot place {n_info} information bits in {block_len}")
        if n_info <= crc.width:
            raise ValueError(f"payload must exceed the {crc.width}-bit CRC")
        info = design_info_set(block_len, n_info, design_snr)
        return cls(N=block_len, K=n_info, crc=crc, info_pos=info)

    @property
    def payload_bits(self) -> int:
        return self.K - self.crc.width

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.ones(self.N, dtype=bool)
        mask[self.info_pos] = False
        return mask

    # ---- encoding -------------------------------------------------------

    def encode(self, payload: np.ndarray) -> np.ndarray:
        payload = np.asarray(payload, dtype=np.uint8)
        if payload.shape[-1] != self.payload_bits:
            raise ValueError(f"payload length {payload.shape[-1]} != {self.payload_bits}")
        word = np.concatenate([payload, self.crc.parity(payload)], axis=-1)
        u = np.zeros(payload.shape[:-1] + (self.N,), dtype=np.uint8)
        u[..., self.info_pos] = word
        return polar_transform(u)

    # ---- decoding -------------------------------------------------------

    def decode(self, llr: np.ndarray, list_size: int = 8) -> tuple[np.ndarray, np.ndarray]:
        """CRC-aided list decode of (batched) channel LLR vectors.

        Returns (payload, crc_ok).  crc_ok is True where some list path
        passed the CRC; the payload is then the most likely passing path,
        otherwise the most likely path overall.
        """
        llr = np.asarray(llr, dtype=np.float64)
        single = llr.ndim == 1
        chan = clamp_llr(np.atleast_2d(llr)).astype(np.float32)
        batch = chan.shape[0]
        if chan.shape[1] != self.N:
            raise ValueError(f"LLR length {chan.shape[1]} != {self.N}")
        n = self.N.bit_length() - 1
        Lsz = int(list_size)
        if Lsz < 1:
            raise ValueError("list size must be >= 1")

        frozen = self.frozen_mask
        # per-depth state: llrs[d] and the stashed left-child outputs uleft[d]
        llrs = [np.zeros((batch, Lsz, 1 << (n - d)), dtype=np.float32) for d in range(n + 1)]
        ucap = [np.zeros((batch, Lsz, 1 << (n - d)), dtype=np.uint8) for d in range(n + 1)]
        uleft = [np.zeros((batch, Lsz, 1 << (n - d - 1)), dtype=np.uint8) for d in range(n)]
        llrs[0][:] = chan[:, None, :]

        pm = np.full((batch, Lsz), np.inf)
        pm[:, 0] = 0.0
        rows = np.arange(batch)[:, None]

        for op, arg in _schedule(n, frozen.astype(np.uint8).tobytes()):
            if op == "f":
                d = arg
                w = 1 << (n - d - 1)
                llrs[d + 1] = _f_llr(llrs[d][:, :, :w], llrs[d][:, :, w:])
            elif op == "g":
                d = arg
                w = 1 << (n - d - 1)
                uleft[d] = ucap[d + 1].copy()
                sign = 1.0 - 2.0 * uleft[d].astype(np.float32)
                llrs[d + 1] = llrs[d][:, :, w:] + sign * llrs[d][:, :, :w]
            elif op == "c":
                d = arg
                ucap[d] = np.concatenate([uleft[d] ^ ucap[d + 1], ucap[d + 1]], axis=2)
            elif op == "zero":
                d = arg
                pm = pm + np.logaddexp(0.0, -llrs[d].astype(np.float64)).sum(axis=2)
                ucap[d] = np.zeros_like(ucap[d])
            else:  # leaf; the schedule only emits leaves for information bits
                i = arg
                leaf_llr = llrs[n][:, :, 0].astype(np.float64)
                pen0 = np.logaddexp(0.0, -leaf_llr)
                pen1 = np.logaddexp(0.0, leaf_llr)
                pm2 = np.concatenate([pm + pen0, pm + pen1], axis=1)
                order = np.argsort(pm2, axis=1, kind="stable")[:, :Lsz]
                src = order % Lsz
                dec = (order // Lsz).astype(np.uint8)
                pm = pm2[rows, order]
                # permute only the state a future step still reads
                for d in range(n):
                    if (i >> (n - d - 1)) & 1:
                        uleft[d] = uleft[d][rows, src]
                    elif d >= 1:
                        llrs[d] = llrs[d][rows, src]
                ucap[n][:, :, 0] = dec

        # recover message bits per path (the transform is self-inverse)
        u_all = polar_transform(ucap[0])
        words = u_all[:, :, self.info_pos]                # (batch, Lsz, K)
        ok = self.crc.check(words)                        # (batch, Lsz)
        pm_pass = np.where(ok, pm, np.inf)
        any_ok = ok.any(axis=1)
        best = np.where(any_ok, np.argmin(pm_pass, axis=1), np.argmin(pm, axis=1))
        chosen = words[np.arange(batch), best, :self.payload_bits]
        if single:
            return chosen[0], bool(any_ok[0])
        return chosen, any_ok
