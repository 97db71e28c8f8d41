"""Systematic binary LDPC code for key reconciliation.

Construction: column-weight-3 progressive edge growth (each new edge is
attached to a check node at maximal graph distance from the variable, ties
broken toward the lowest-degree then lowest-index check), followed by a
GF(2) column permutation that makes the last (n - k) columns invertible.
Codewords are [systematic | parity]; only the parity part is transmitted.

Decoding: standard sum-product belief propagation on the dense (small)
parity-check matrix, batched over users.
"""

from dataclasses import dataclass, field

import numpy as np

from .modulation import clamp_llr

_TANH_LIMIT = 1.0 - 1e-15


def _peg_parity_check(n_checks: int, n_vars: int, col_weight: int = 3) -> np.ndarray:
    """Greedy girth-maximizing bipartite graph, deterministic tie-breaking."""
    if col_weight > n_checks:
        raise ValueError(f"column weight {col_weight} exceeds {n_checks} checks")
    var_adj = [[] for _ in range(n_vars)]
    chk_adj = [[] for _ in range(n_checks)]
    chk_deg = np.zeros(n_checks, dtype=np.int64)

    for v in range(n_vars):
        for _ in range(col_weight):
            # BFS from v over the current graph; depth of first visit per check.
            depth = np.full(n_checks, -1, dtype=np.int64)
            frontier_vars = [v]
            seen_vars = {v}
            level = 0
            while frontier_vars:
                next_checks = []
                for fv in frontier_vars:
                    for c in var_adj[fv]:
                        if depth[c] < 0:
                            depth[c] = level
                            next_checks.append(c)
                next_vars = []
                for c in next_checks:
                    for nv in chk_adj[c]:
                        if nv not in seen_vars:
                            seen_vars.add(nv)
                            next_vars.append(nv)
                frontier_vars = next_vars
                level += 1
            unreached = depth < 0
            if unreached.any():
                candidates = np.flatnonzero(unreached)
            else:
                dmax = depth.max()
                candidates = np.flatnonzero(depth == dmax)
            degs = chk_deg[candidates]
            best = candidates[degs == degs.min()][0]
            var_adj[v].append(int(best))
            chk_adj[best].append(v)
            chk_deg[best] += 1

    H = np.zeros((n_checks, n_vars), dtype=np.uint8)
    for v, checks in enumerate(var_adj):
        H[checks, v] = 1
    return H


def _gf2_rref_pivots(H: np.ndarray) -> list[int]:
    """Pivot columns of the GF(2) row-reduced form of H."""
    R = H.copy()
    m, n = R.shape
    pivots = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        sub = np.flatnonzero(R[row:, col])
        if sub.size == 0:
            continue
        p = row + sub[0]
        if p != row:
            R[[row, p]] = R[[p, row]]
        others = np.flatnonzero(R[:, col])
        others = others[others != row]
        R[others] ^= R[row]
        pivots.append(col)
        row += 1
    return pivots


def _gf2_inv(B: np.ndarray) -> np.ndarray:
    m = B.shape[0]
    A = np.concatenate([B.copy(), np.eye(m, dtype=np.uint8)], axis=1)
    for col in range(m):
        sub = np.flatnonzero(A[col:, col])
        if sub.size == 0:
            raise np.linalg.LinAlgError("singular GF(2) matrix")
        p = col + sub[0]
        if p != col:
            A[[col, p]] = A[[p, col]]
        others = np.flatnonzero(A[:, col])
        others = others[others != col]
        A[others] ^= A[col]
    return A[:, m:]


@dataclass(frozen=True)
class LdpcCode:
    H: np.ndarray            # (n - k, n) parity-check matrix, systematic layout
    parity_map: np.ndarray   # (n - k, k): parity = parity_map @ s mod 2
    n: int
    k: int
    G: np.ndarray = field(init=False)  # (k, n) systematic generator

    def __post_init__(self):
        G = np.concatenate([np.eye(self.k, dtype=np.uint8), self.parity_map.T], axis=1)
        object.__setattr__(self, "G", G)

    @classmethod
    def build(cls, n: int, k: int) -> "LdpcCode":
        m = n - k
        if m < 1:
            raise ValueError(f"need n > k, got n={n}, k={k}")
        H_raw = _peg_parity_check(m, n)
        pivots = _gf2_rref_pivots(H_raw)
        if len(pivots) < m:
            raise ValueError(f"construction produced a rank-{len(pivots)} "
                             f"parity-check matrix, need rank {m}")
        pivots = pivots[:m]
        non_pivots = [c for c in range(n) if c not in set(pivots)]
        perm = non_pivots + pivots
        H = np.ascontiguousarray(H_raw[:, perm])
        B = H[:, k:]
        parity_map = (_gf2_inv(B).astype(np.int64) @ H[:, :k].astype(np.int64) % 2).astype(np.uint8)
        return cls(H=H, parity_map=parity_map, n=n, k=k)

    # ---- encoding -------------------------------------------------------

    def encode(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Systematic encode; returns (systematic, parity). Batched over leading axes."""
        s = np.asarray(s, dtype=np.uint8)
        if s.shape[-1] != self.k:
            raise ValueError(f"key length {s.shape[-1]} != {self.k}")
        parity = (s.astype(np.int64) @ self.parity_map.T.astype(np.int64) % 2).astype(np.uint8)
        return s.copy(), parity

    def syndrome(self, codeword: np.ndarray) -> np.ndarray:
        c = np.asarray(codeword, dtype=np.int64)
        return (c @ self.H.T.astype(np.int64) % 2).astype(np.uint8)

    # ---- decoding -------------------------------------------------------

    def decode(self, llr: np.ndarray, iters: int = 50) -> tuple[np.ndarray, np.ndarray]:
        """Sum-product decode of (possibly batched) LLR vectors.

        Returns (s_hat, converged): the first k hard decisions of the best
        codeword estimate and a flag telling whether all parity checks were
        satisfied within `iters` iterations.  Non-convergence still yields
        the current hard decisions.
        """
        llr = np.asarray(llr, dtype=np.float64)
        single = llr.ndim == 1
        L = clamp_llr(np.atleast_2d(llr))
        batch = L.shape[0]
        if L.shape[1] != self.n:
            raise ValueError(f"LLR length {L.shape[1]} != {self.n}")

        mask = self.H.astype(bool)[None, :, :]          # (1, m, n)
        bits = (L < 0).astype(np.uint8)
        best = bits.copy()
        # a zero LLR is an erasure: its hard decision is arbitrary, so it
        # cannot count toward convergence
        determinate = np.all(L != 0.0, axis=-1)
        converged = determinate & ~np.any(self.syndrome(bits), axis=-1)

        E = np.zeros((batch,) + self.H.shape)           # check -> var messages
        V = np.where(mask, L[:, None, :], 0.0)          # var -> check messages

        for _ in range(iters):
            if converged.all():
                break
            t = np.where(mask, np.tanh(0.5 * V), 1.0)
            zero = mask & (t == 0.0)
            nzero = zero.sum(axis=2, keepdims=True)
            t_safe = np.where(zero, 1.0, t)
            prod = np.prod(t_safe, axis=2, keepdims=True)
            # leave-one-out product, exact even when some tanh terms are 0
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                loo = np.where(
                    nzero == 0, prod / t_safe,
                    np.where((nzero == 1) & zero, prod, 0.0))
            loo = np.clip(loo, -_TANH_LIMIT, _TANH_LIMIT)
            E = np.where(mask, 2.0 * np.arctanh(loo), 0.0)

            total = L + E.sum(axis=1)
            V = np.where(mask, total[:, None, :] - E, 0.0)

            bits = (total < 0).astype(np.uint8)
            ok = np.all(total != 0.0, axis=-1) & ~np.any(self.syndrome(bits), axis=-1)
            newly = ok & ~converged
            if newly.any():
                best[newly] = bits[newly]
                converged |= newly

        best[~converged] = bits[~converged]
        s_hat = best[:, :self.k]
        if single:
            return s_hat[0], bool(converged[0])
        return s_hat, converged
