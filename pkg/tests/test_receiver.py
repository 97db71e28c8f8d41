import numpy as np
import pytest

from secure_ura import (DegenerateFeedbackError, DetectedUser, ReceivedFrame,
                        build_llr_aux, decode_frame, decode_keys_and_decrypt,
                        estimate_private_signal,
                        iterative_decode, llr_parity, llr_systematic,
                        mmse_polar_llr, omp_detect, remove_artificial_noise,
                        run_trial, standardize, transmit, uplink)
from secure_ura.rng import stream

from helpers import make_mini_cfg


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


# ---- OMP -------------------------------------------------------------------


def test_omp_single_user_noiseless(mini_cfg, mini_params, rng):
    h = _cn(rng, mini_cfg.M)
    idx = 11
    Y = np.outer(h, mini_params.P[idx])
    det = omp_detect(Y, mini_params.P, max_atoms=4)
    assert det[0][0] == idx
    assert np.max(np.abs(det[0][1] - h)) < 1e-8


def test_omp_empty_frame(mini_params):
    Y = np.zeros((8, mini_params.P.shape[1]), dtype=complex)
    assert omp_detect(Y, mini_params.P, max_atoms=4) == []


def test_omp_two_users_high_snr(mini_cfg, mini_params, rng):
    h1, h2 = _cn(rng, mini_cfg.M), _cn(rng, mini_cfg.M)
    i1, i2 = 3, 29
    Y = np.outer(h1, mini_params.P[i1]) + np.outer(h2, mini_params.P[i2])
    Y += 1e-6 * _cn(rng, Y.shape)
    det = dict(omp_detect(Y, mini_params.P, max_atoms=4))
    assert {i1, i2} <= set(det)
    assert np.max(np.abs(det[i1] - h1)) < 1e-4
    assert np.max(np.abs(det[i2] - h2)) < 1e-4


def test_omp_five_users_noiseless(mini_cfg, mini_params, rng):
    # several sequential residual updates must stay consistent
    indices = [2, 7, 13, 21, 30]
    H = _cn(rng, (mini_cfg.M, 5))
    Y = H @ mini_params.P[indices]
    det = dict(omp_detect(Y, mini_params.P, max_atoms=10))
    assert set(det) == set(indices)
    for col, idx in enumerate(indices):
        assert np.max(np.abs(det[idx] - H[:, col])) < 1e-8


def test_omp_respects_atom_cap(mini_params, rng):
    Y = _cn(rng, (8, 32))
    det = omp_detect(Y, mini_params.P, max_atoms=3)
    assert len(det) <= 3


def test_omp_residual_threshold_stops_early(mini_cfg, mini_params, rng):
    h = _cn(rng, mini_cfg.M)
    Y = np.outer(h, mini_params.P[5])
    # the single atom explains everything; the loop must stop right after
    det = omp_detect(Y, mini_params.P, max_atoms=10, res_threshold=0.05)
    assert len(det) == 1


# ---- MMSE LLRs ---------------------------------------------------------------


def test_mmse_single_user_high_snr_signs(mini_cfg, mini_params, rng):
    h = _cn(rng, mini_cfg.M)
    bits = rng.integers(0, 2, mini_cfg.nc)
    x = (1 - 2 * bits) * np.sqrt(mini_cfg.Pc)
    Y = np.outer(h, x)
    llr = mmse_polar_llr(Y, h[:, None], mini_cfg.Pc, 1e-9)
    assert np.array_equal(llr[0] < 0, bits.astype(bool))


def test_mmse_zero_channel_user_gets_zero_llr(mini_cfg, mini_params, rng):
    h1 = _cn(rng, mini_cfg.M)
    H = np.stack([h1, np.zeros(mini_cfg.M, dtype=complex)], axis=1)
    Y = np.outer(h1, (1 - 2 * rng.integers(0, 2, 16)) * np.sqrt(0.3))
    llr = mmse_polar_llr(Y, H, 0.3, 0.1)
    assert np.abs(llr[1]).max() == 0.0


def test_mmse_requires_users(mini_cfg):
    with pytest.raises(ValueError):
        mmse_polar_llr(np.zeros((4, 8), dtype=complex),
                       np.zeros((4, 0), dtype=complex), 0.3, 1.0)


def test_mmse_against_exhaustive_posterior(rng):
    # two-user instance checked against the brute-force symbol posterior
    M, nc, Pc, s2 = 2, 8, 0.3, 0.05
    gen = np.random.default_rng(42)
    mmse_vals, exact_vals = [], []
    for _ in range(60):
        H = _cn(gen, (M, 2))
        bits = gen.integers(0, 2, (2, nc))
        X = (1 - 2 * bits) * np.sqrt(Pc)
        Y = H @ X + _cn(gen, (M, nc)) * np.sqrt(s2)
        llr = mmse_polar_llr(Y, H, Pc, s2)
        hyp = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
        S_hyp = np.sqrt(Pc) * (H @ hyp.T)
        ll = -np.sum(np.abs(Y[:, None, :] - S_hyp[:, :, None]) ** 2, axis=0) / s2
        mx = ll.max(axis=0)
        lse = lambda rows: np.log(np.exp(ll[rows] - mx).sum(axis=0)) + mx
        exact = np.stack([lse([0, 1]) - lse([2, 3]), lse([0, 2]) - lse([1, 3])])
        mmse_vals.append(llr.ravel())
        exact_vals.append(exact.ravel())
    mm = np.concatenate(mmse_vals)
    ex = np.concatenate(exact_vals)
    confident = np.abs(ex) > 3.0
    assert np.mean(np.sign(mm[confident]) == np.sign(ex[confident])) > 0.95
    assert np.corrcoef(mm, ex)[0, 1] > 0.85


def test_parity_llr_mirrors_polar_llr(mini_cfg, mini_params, rng):
    h = _cn(rng, mini_cfg.M)
    bits = rng.integers(0, 2, mini_cfg.key_parity_len)
    Y = np.outer(h, (1 - 2 * bits) * np.sqrt(mini_cfg.Pk))
    llr = llr_parity(Y, h[:, None], mini_cfg.Pk, 1e-9)
    assert np.array_equal(llr[0] < 0, bits.astype(bool))


# ---- private-signal estimation and artificial-noise removal -----------------


def test_estimate_private_signal_matches_noiseless_user(mini_cfg, mini_params, rng):
    h = _cn(rng, mini_cfg.M)
    y_user = h @ mini_params.V
    y_hat, y_bar_hat = estimate_private_signal(h, mini_params.V)
    assert np.allclose(y_hat, y_user, atol=1e-14)
    assert np.allclose(y_bar_hat, standardize(y_user), atol=1e-12)


def test_estimate_private_signal_zero_channel(mini_params):
    with pytest.raises(DegenerateFeedbackError):
        estimate_private_signal(np.zeros(8, dtype=complex), mini_params.V)


def test_remove_artificial_noise_exact_cancellation(mini_cfg, mini_params, rng):
    # Pk = 0, no noise, perfect estimates: the key segment cancels entirely
    h = _cn(rng, (mini_cfg.M, 2))
    Yb = np.stack([standardize(h[:, i] @ mini_params.V) for i in range(2)])
    v_prime = np.sqrt(mini_cfg.Pa) * (Yb @ mini_params.C2)
    Y_k = h @ v_prime
    cleaned = remove_artificial_noise(Y_k, h, Yb, mini_params.C2, mini_cfg.Pa)
    assert np.max(np.abs(cleaned)) < 1e-8 * np.max(np.abs(Y_k))


def test_remove_artificial_noise_empty_set(mini_cfg, mini_params, rng):
    Y_k = _cn(rng, (mini_cfg.M, mini_cfg.key_parity_len))
    out = remove_artificial_noise(Y_k, np.zeros((mini_cfg.M, 0), dtype=complex),
                                  np.zeros((0, mini_cfg.L), dtype=complex),
                                  mini_params.C2, mini_cfg.Pa)
    assert np.array_equal(out, Y_k)


# ---- systematic LLR ----------------------------------------------------------


def test_llr_systematic_zero_feature(mini_cfg, mini_params):
    aux = build_llr_aux(mini_cfg, mini_params)
    nu = llr_systematic(np.zeros(mini_cfg.S), np.array(2.0), aux)
    assert np.array_equal(nu, np.zeros(mini_cfg.S))


def test_llr_systematic_limits_and_convention(mini_cfg, mini_params):
    aux = build_llr_aux(mini_cfg, mini_params)
    u = np.zeros(mini_cfg.S)
    u[0] = 50.0    # strongly positive feature -> bit 1 -> very negative LLR
    u[1] = -50.0
    nu = llr_systematic(u, np.array(4.0), aux)
    assert nu[0] == -40.0 and nu[1] == 40.0
    assert np.isfinite(nu).all()


def test_llr_aux_invariants(mini_cfg, mini_params):
    aux = build_llr_aux(mini_cfg, mini_params)
    assert np.max(np.abs(aux.centering @ aux.centering - aux.centering)) < 1e-10
    assert np.allclose(aux.sigma_y, aux.sigma_y.conj().T)
    assert np.linalg.eigvalsh(aux.sigma_y).min() > 0
    assert (aux.sigma_uj2 > 0).all()
    assert aux.sigma_uj2.shape == (mini_cfg.S // 2,)


def test_llr_systematic_paired_variances(mini_cfg, mini_params):
    # feature j and feature S/2 + j share a noise variance
    aux = build_llr_aux(mini_cfg, mini_params)
    half = mini_cfg.S // 2
    u = np.ones(mini_cfg.S)
    nu = llr_systematic(u, np.array(1.0), aux)
    assert np.allclose(nu[:half], nu[half:])


# ---- iterative decoding ------------------------------------------------------


def test_iterative_decode_single_user(mini_params, rng):
    cfg = make_mini_cfg(Ka=1)
    params = mini_params
    trial = run_trial(cfg, 0, params)
    assert trial.n_detected == 1 and trial.pupe == 0.0


def test_iterative_decode_recovers_ciphertexts(mini_cfg, mini_params, rng):
    h = _cn(rng, (mini_cfg.M, mini_cfg.Ka))
    users = []
    rows = []
    for i in range(mini_cfg.Ka):
        w = rng.integers(0, 2, mini_cfg.B, dtype=np.uint8)
        y = h[:, i] @ mini_params.V
        ur = transmit(w, y, mini_cfg, mini_params)
        users.append(ur)
        rows.append(ur.x)
    X = np.stack(rows)
    Y = uplink(X, h, 1e-12, stream(0, "t"))
    frame = ReceivedFrame.from_uplink(Y, np.zeros((mini_cfg.E, mini_cfg.frame_len)), mini_cfg)
    decoded, H_hat, residual = iterative_decode(frame, mini_cfg, mini_params)
    got = {u.c_hat.tobytes() for u in decoded}
    assert got == {u.cipher.c.tobytes() for u in users}
    assert H_hat.shape == (mini_cfg.M, len(decoded))
    # SIC removed the decoded signals: residual is at the noise floor
    original = np.concatenate([frame.y_p, frame.y_d], axis=1)
    reduction = np.sum(np.abs(residual) ** 2) / np.sum(np.abs(original) ** 2)
    assert reduction < 1e-2  # >= 20 dB


def test_iterative_decode_empty_frame(mini_cfg, mini_params):
    frame = ReceivedFrame.from_uplink(
        np.zeros((mini_cfg.M, mini_cfg.frame_len), dtype=complex),
        np.zeros((mini_cfg.E, mini_cfg.frame_len), dtype=complex), mini_cfg)
    decoded, H_hat, residual = iterative_decode(frame, mini_cfg, mini_params)
    assert decoded == []
    assert H_hat.shape == (mini_cfg.M, 0)


def test_decode_keys_noiseless_end_to_end(mini_cfg, mini_params, rng):
    h = _cn(rng, (mini_cfg.M, 1))
    w = rng.integers(0, 2, mini_cfg.B, dtype=np.uint8)
    ur = transmit(w, h[:, 0] @ mini_params.V, mini_cfg, mini_params)
    Y = uplink(ur.x[None, :], h, 1e-12, stream(1, "t"))
    frame = ReceivedFrame.from_uplink(Y, np.zeros((mini_cfg.E, mini_cfg.frame_len)), mini_cfg)
    decoded = decode_frame(frame, mini_cfg, mini_params)
    assert len(decoded) == 1
    assert decoded[0].key_converged
    assert np.array_equal(decoded[0].s_hat, ur.priv.s)
    assert np.array_equal(decoded[0].w_hat, w)


def test_decode_keys_nonconvergence_is_flagged(mini_cfg, mini_params):
    # confident parity observations of a non-codeword contradict the
    # systematic LLRs, so belief propagation cannot satisfy the checks
    gen = np.random.default_rng(0)
    h = _cn(gen, mini_cfg.M)
    user = DetectedUser(pilot_index=3, h_hat=h,
                        c_hat=gen.integers(0, 2, mini_cfg.B, dtype=np.uint8))
    wrong = gen.integers(0, 2, mini_cfg.key_parity_len)
    Y = np.zeros((mini_cfg.M, mini_cfg.frame_len), dtype=complex)
    Y[:, mini_cfg.np + mini_cfg.nc:] = np.outer(h, (1 - 2 * wrong) * np.sqrt(mini_cfg.Pk))
    frame = ReceivedFrame.from_uplink(
        Y, np.zeros((mini_cfg.E, mini_cfg.frame_len), dtype=complex), mini_cfg)
    out = decode_keys_and_decrypt([user], h[:, None], frame,
                                  mini_cfg, mini_params)
    assert out[0].w_hat is not None          # best-effort decryption
    assert out[0].key_converged is False


def test_wrong_key_bit_corrupts_matching_positions(mini_cfg, mini_params, rng):
    s = rng.integers(0, 2, mini_cfg.S, dtype=np.uint8)
    w = rng.integers(0, 2, mini_cfg.B, dtype=np.uint8)
    from secure_ura import decrypt, encrypt, expand_key
    c = encrypt(w, expand_key(s, mini_params.T))
    s_bad = s.copy()
    s_bad[2] ^= 1
    w_bad = decrypt(c, expand_key(s_bad, mini_params.T))
    assert np.array_equal(w_bad != w, mini_params.T[2].astype(bool))
