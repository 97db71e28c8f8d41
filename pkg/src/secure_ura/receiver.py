"""Base-station receiver: iterative pilot/polar decoding, then key recovery.

The iterative stage alternates greedy pilot detection (multiple-measurement
OMP over the codebook), MMSE soft demodulation plus CRC-aided polar list
decoding, and least-squares channel re-estimation with successive
interference cancellation over the pilot+polar segments.  The key stage
estimates each decoded user's private feedback vector, cancels its
artificial-noise contribution from the key segment, assembles systematic
and parity LLRs, and reconciles the key through the LDPC decoder.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .channel import ReceivedFrame
from .config import SystemConfig
from .crypto import expand_key
from .keys import VAR_FLOOR, sample_variance, standardize
from .modulation import bpsk_map, clamp_llr
from .params import PublicParams
from .transmitter import index_to_bits

OMP_RESIDUAL_THRESHOLD = 0.05


@dataclass
class DetectedUser:
    pilot_index: int
    h_hat: np.ndarray | None = None       # (M,) channel estimate
    c_hat: np.ndarray | None = None       # recovered ciphertext, length B
    s_hat: np.ndarray | None = None       # recovered key, length S
    w_hat: np.ndarray | None = None       # decrypted message, length B
    key_converged: bool = False


@dataclass(frozen=True)
class LlrAux:
    """Precomputed pieces of the systematic-symbol LLR."""
    sigma_y: np.ndarray    # (L, L) covariance of the feedback-estimate noise
    centering: np.ndarray  # (L, L) idempotent mean-removal projector
    sigma_uj2: np.ndarray  # (S/2,) per-feature noise variances


def build_llr_aux(cfg: SystemConfig, params: PublicParams) -> LlrAux:
    denom = cfg.np * cfg.Pp + cfg.nc * cfg.Pc
    if denom <= 0:
        raise ValueError("pilot and polar powers are both zero; "
                         "channel-estimate noise variance is undefined")
    L = cfg.L
    V = params.V
    sigma_y = V.conj().T @ V * (cfg.sigma_c2 / denom) + cfg.sigma_u2 * np.eye(L)
    O = np.eye(L) - np.full((L, L), 1.0 / L)
    mid = O @ sigma_y @ O
    quad = np.einsum("ji,jk,ki->i", params.C1.conj(), mid, params.C1)
    sigma_uj2 = 0.5 * quad.real
    if not np.all(sigma_uj2 > 0):
        raise ValueError("non-positive feature noise variance")
    return LlrAux(sigma_y=sigma_y, centering=O, sigma_uj2=sigma_uj2)


# ---------------------------------------------------------------------------
# Step 1: pilot detection and channel estimation
# ---------------------------------------------------------------------------


def omp_detect(Y: np.ndarray, P: np.ndarray, max_atoms: int,
               res_threshold: float = OMP_RESIDUAL_THRESHOLD,
               atom_norms: np.ndarray | None = None) -> list[tuple[int, np.ndarray]]:
    """Greedy multiple-measurement OMP over the pilot codebook rows.

    Selects the atom with the largest residual correlation across antennas
    (normalized by atom energy), keeps the residual orthogonal to the span
    of the selected atoms (equivalent to a least-squares re-fit per step),
    and stops after max_atoms picks or when the residual energy fraction
    drops below res_threshold.  Returns (pilot_index, channel_estimate)
    pairs from a final least-squares fit over the selected set.
    """
    M, n_obs = Y.shape
    energy0 = float(np.sum(np.abs(Y) ** 2))
    if energy0 == 0.0:
        return []
    if atom_norms is None:
        atom_norms = np.linalg.norm(P, axis=1)
    # correlation with every atom; (P @ Y^H)^H avoids materializing P^H
    gamma = (P @ Y.conj().T).conj().T            # (M, 2^Bp)
    safe_norms = np.where(atom_norms > 0, atom_norms, 1.0)

    selected: list[int] = []
    Q = np.zeros((0, P.shape[1]), dtype=np.complex128)
    res_energy = energy0
    for _ in range(max_atoms):
        if res_energy / energy0 < res_threshold:
            break
        metric = np.linalg.norm(gamma, axis=0)
        metric = np.where(atom_norms > 0, metric / safe_norms, 0.0)
        if selected:
            metric[selected] = -1.0
        j = int(np.argmax(metric))
        if metric[j] <= 0.0:
            break
        p = P[j]
        q = p - (Q.conj() @ p) @ Q
        q = q - (Q.conj() @ q) @ Q               # re-orthogonalize
        nq = np.linalg.norm(q)
        if nq <= 1e-12 * max(1.0, np.linalg.norm(p)):
            break
        q /= nq
        u = Y @ q.conj()                         # (M,)
        r = (P @ q.conj()).conj()                # q @ P^H, (2^Bp,)
        gamma -= np.outer(u, r)
        res_energy = max(res_energy - float(np.sum(np.abs(u) ** 2)), 0.0)
        Q = np.vstack([Q, q])
        selected.append(j)

    if not selected:
        return []
    A = P[selected]
    B = Y @ A.conj().T                           # (M, k)
    G = A @ A.conj().T                           # (k, k)
    try:
        H = np.linalg.solve(G.T, B.T).T
    except np.linalg.LinAlgError:
        H = B @ np.linalg.pinv(G)
    return [(idx, H[:, i].copy()) for i, idx in enumerate(selected)]


# ---------------------------------------------------------------------------
# Step 2: MMSE soft estimates and LLRs
# ---------------------------------------------------------------------------


def _mmse_bpsk_llr(Y: np.ndarray, H: np.ndarray, power: float,
                   sigma2: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-user LLRs of BPSK symbols observed through a user superposition.

    Soft symbols are sqrt(power) h^H R^{-1} Y with R the signal-plus-noise
    covariance; the LLR scales the soft symbol by the user's diagonal MMSE
    error term delta.
    """
    M = Y.shape[0]
    R = power * (H @ H.conj().T) + sigma2 * np.eye(M)
    RinvH = np.linalg.solve(R, H)                 # (M, k)
    x_soft = np.sqrt(power) * RinvH.conj().T @ Y  # (k, n)
    delta = 1.0 - power * np.einsum("ij,ij->j", H.conj(), RinvH).real
    if not np.all(delta > 0):
        raise FloatingPointError("non-positive MMSE error term")
    llr = 2.0 * np.sqrt(power) * x_soft.real / delta[:, None]
    return clamp_llr(llr), delta


def mmse_polar_llr(Y_d: np.ndarray, H_hat: np.ndarray, Pc: float,
                   sigma_c2: float) -> np.ndarray:
    """LLRs of the polar-segment symbols for every detected user."""
    if H_hat.shape[1] == 0:
        raise ValueError("no detected users")
    llr, _ = _mmse_bpsk_llr(Y_d, H_hat, Pc, sigma_c2)
    return llr


def llr_parity(Y_k_clean: np.ndarray, H_hat: np.ndarray, Pk: float,
               sigma_c2: float) -> np.ndarray:
    """LLRs of the key-segment parity symbols after noise cancellation."""
    llr, _ = _mmse_bpsk_llr(Y_k_clean, H_hat, Pk, sigma_c2)
    return llr


# ---------------------------------------------------------------------------
# Key-stage helpers
# ---------------------------------------------------------------------------


def estimate_private_signal(h_hat: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reconstruct a user's feedback observation and its standardized form."""
    y_hat = h_hat @ V
    return y_hat, standardize(y_hat)


def remove_artificial_noise(Y_k: np.ndarray, h_hats: np.ndarray,
                            y_bar_hats: np.ndarray, C2: np.ndarray,
                            Pa: float) -> np.ndarray:
    """Subtract every detected user's estimated masking signal."""
    if h_hats.shape[1] == 0:
        return Y_k.copy()
    v_prime = np.sqrt(Pa) * (y_bar_hats @ C2)    # (k, ns - S)
    return Y_k - h_hats @ v_prime


def llr_systematic(u_hat: np.ndarray, var_y_hat, aux: LlrAux) -> np.ndarray:
    """LLRs of the systematic key bits from the projected feedback estimate.

    The statistic sqrt(var/sigma_uj^2) * u_hat is a Gaussian-noise view of
    the user's original feature; the bit LLR is log Q(a) - log(1 - Q(a)),
    evaluated through the log-domain normal CDF so it never over/underflows.
    The j-th and (S/2+j)-th features share one noise variance.
    """
    u_hat = np.asarray(u_hat, dtype=np.float64)
    sig2 = np.concatenate([aux.sigma_uj2, aux.sigma_uj2])
    a = u_hat * np.sqrt(np.asarray(var_y_hat)[..., None] / sig2)
    return clamp_llr(log_ndtr(-a) - log_ndtr(a))


# ---------------------------------------------------------------------------
# Algorithm stages
# ---------------------------------------------------------------------------


def iterative_decode(frame: ReceivedFrame, cfg: SystemConfig,
                     params: PublicParams) -> tuple[list[DetectedUser], np.ndarray, np.ndarray]:
    """Iterate pilot detection, polar decoding and SIC until nothing new decodes.

    Returns (users, H_hat, residual_pp): the CRC-passing users with their
    ciphertexts, the final least-squares channel estimates (one column per
    user), and the residual pilot+polar observation.
    """
    Y_pp = np.concatenate([frame.y_p, frame.y_d], axis=1)
    residual = Y_pp.copy()
    atom_norms = np.linalg.norm(params.P, axis=1)

    users: list[DetectedUser] = []
    sig_rows: list[np.ndarray] = []
    seen: set[tuple[int, bytes]] = set()
    H_hat = np.zeros((cfg.M, 0), dtype=np.complex128)

    for _ in range(cfg.max_outer_iters):
        detections = omp_detect(residual[:, :cfg.np], params.P,
                                cfg.omp_batch_effective,
                                OMP_RESIDUAL_THRESHOLD, atom_norms)
        new_users = []
        if detections:
            Hd = np.stack([h for _, h in detections], axis=1)
            llrs = mmse_polar_llr(residual[:, cfg.np:], Hd, cfg.Pc, cfg.sigma_c2)
            payloads, ok = params.polar.decode(llrs, cfg.list_size)
            for i, (pilot_idx, _) in enumerate(detections):
                if not ok[i]:
                    continue
                tag = (pilot_idx, payloads[i].tobytes())
                if tag in seen:
                    continue
                seen.add(tag)
                c_hat = np.concatenate([index_to_bits(pilot_idx, cfg.Bp), payloads[i]])
                new_users.append(DetectedUser(pilot_index=pilot_idx, c_hat=c_hat))
                sig_rows.append(np.concatenate([
                    params.P[pilot_idx],
                    bpsk_map(params.polar.encode(payloads[i]), cfg.Pc)]))
        if not new_users:
            break
        users.extend(new_users)

        # least-squares re-estimation over the whole decoded set, then SIC
        while users:
            X = np.stack(sig_rows, axis=0)
            G = X @ X.conj().T
            try:
                H_hat = np.linalg.solve(G.T, (Y_pp @ X.conj().T).T).T
                break
            except np.linalg.LinAlgError:
                users.pop()
                sig_rows.pop()
        if not users:
            break
        X = np.stack(sig_rows, axis=0)
        residual = Y_pp - H_hat @ X
        for i, user in enumerate(users):
            user.h_hat = H_hat[:, i].copy()

    if not users:
        H_hat = np.zeros((cfg.M, 0), dtype=np.complex128)
    return users, H_hat, residual


def decode_keys_and_decrypt(users: list[DetectedUser], H_hat: np.ndarray,
                            frame: ReceivedFrame, cfg: SystemConfig,
                            params: PublicParams,
                            aux: LlrAux | None = None) -> list[DetectedUser]:
    """Recover each decoded user's key and decrypt its ciphertext in place."""
    if not users:
        return users
    if aux is None:
        aux = build_llr_aux(cfg, params)

    Y_fb = H_hat.T @ params.V                    # (k, L) feedback estimates
    var = sample_variance(Y_fb, axis=1)
    valid = var > VAR_FLOOR
    mu = Y_fb.mean(axis=1, keepdims=True)
    safe_var = np.where(valid, var, 1.0)
    Y_bar = (Y_fb - mu) / np.sqrt(safe_var)[:, None]

    z = Y_bar @ params.C1
    U_hat = np.concatenate([z.real, z.imag], axis=1)

    Y_k_clean = remove_artificial_noise(frame.y_k, H_hat[:, valid],
                                        Y_bar[valid], params.C2, cfg.Pa)
    f_parity = llr_parity(Y_k_clean, H_hat, cfg.Pk, cfg.sigma_c2)
    f_sys = llr_systematic(U_hat, var, aux)
    f_key = np.concatenate([f_sys, f_parity], axis=1)

    s_hats, converged = params.ldpc.decode(f_key, cfg.bp_iters)
    keystreams = expand_key(s_hats, params.T)
    for i, user in enumerate(users):
        if not valid[i]:
            continue
        user.s_hat = s_hats[i]
        user.key_converged = bool(converged[i])
        user.w_hat = user.c_hat ^ keystreams[i]
    return users


def decode_frame(frame: ReceivedFrame, cfg: SystemConfig,
                 params: PublicParams,
                 aux: LlrAux | None = None) -> list[DetectedUser]:
    """Run the complete receiver on one frame."""
    users, H_hat, _ = iterative_decode(frame, cfg, params)
    return decode_keys_and_decrypt(users, H_hat, frame, cfg, params, aux)
