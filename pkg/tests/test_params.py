import dataclasses

import numpy as np
import pytest

from secure_ura import ConfigError, SystemConfig, generate_public_params

TOL = 1e-10


def test_downlink_power_normalization(full_cfg, full_params):
    target = full_cfg.Pf * full_cfg.M * full_cfg.L
    assert np.linalg.norm(full_params.V) ** 2 == pytest.approx(target, rel=TOL)


def test_zero_downlink_power():
    cfg = SystemConfig(Pf=0.0)
    assert not generate_public_params(cfg).V.any()


def test_c1_orthonormal_columns(full_cfg, full_params):
    eye = full_params.C1.conj().T @ full_params.C1
    assert full_params.C1.shape == (full_cfg.L, full_cfg.S // 2)
    assert np.max(np.abs(eye - np.eye(full_cfg.S // 2))) < TOL


def test_c2_unit_norm_columns(full_cfg, full_params):
    norms = np.linalg.norm(full_params.C2, axis=0)
    assert full_params.C2.shape == (full_cfg.L, full_cfg.key_parity_len)
    assert np.max(np.abs(norms - 1.0)) < TOL


def test_pilot_row_norms(full_cfg, full_params):
    norms2 = np.linalg.norm(full_params.P, axis=1) ** 2
    target = full_cfg.np * full_cfg.Pp
    assert full_params.P.shape == (4096, full_cfg.np)
    assert np.max(np.abs(norms2 - target)) < TOL * target


def test_keystream_matrix_shape(full_cfg, full_params):
    T = full_params.T
    assert T.shape == (full_cfg.S, full_cfg.B)
    assert set(np.unique(T)) <= {0, 1}
    assert 0.35 < T.mean() < 0.65  # fair-coin entries


def test_regeneration_is_deterministic(full_cfg, full_params):
    again = generate_public_params(full_cfg)
    assert again.digest() == full_params.digest()
    assert np.array_equal(again.V, full_params.V)
    assert np.array_equal(again.T, full_params.T)


def test_different_seed_changes_digest(full_cfg, full_params):
    other = generate_public_params(dataclasses.replace(full_cfg, seed=999))
    assert other.digest() != full_params.digest()


def test_ldpc_is_systematic(full_cfg, full_params, rng):
    code = full_params.ldpc
    s = rng.integers(0, 2, (100, full_cfg.S), dtype=np.uint8)
    sys_part, parity = code.encode(s)
    assert np.array_equal(sys_part, s)
    cw = np.concatenate([sys_part, parity], axis=1)
    assert not code.syndrome(cw).any()
    # generator-matrix view agrees with the encoder
    via_g = s.astype(np.int64) @ full_params.ldpc_G.astype(np.int64) % 2
    assert np.array_equal(via_g.astype(np.uint8), cw)


def test_ldpc_round_trip_1000_keys(full_cfg, full_params, rng):
    code = full_params.ldpc
    s = rng.integers(0, 2, (1000, full_cfg.S), dtype=np.uint8)
    sys_part, parity = code.encode(s)
    llr = np.where(np.concatenate([sys_part, parity], axis=1) == 0, 40.0, -40.0)
    s_hat, converged = code.decode(llr, full_cfg.bp_iters)
    assert converged.all()
    assert np.array_equal(s_hat, s)


def test_polar_frozen_set_shape(full_cfg, full_params):
    frozen = full_params.polar_frozen
    assert frozen.sum() == full_cfg.nc - full_cfg.polar_info_bits
    assert frozen[0] and not frozen[full_cfg.nc - 1]


def test_crc_polynomial_for_11_bits(full_params):
    assert full_params.crc_poly == 0xB8B


def test_generate_rejects_bypassed_invariants(full_cfg):
    bad = dataclasses.replace(full_cfg)
    object.__setattr__(bad, "L", 5)  # violate L >= S/2 behind the validator
    with pytest.raises(ConfigError, match="L"):
        generate_public_params(bad)
    bad2 = dataclasses.replace(full_cfg)
    object.__setattr__(bad2, "S", 60)
    with pytest.raises(ConfigError, match="S"):
        generate_public_params(bad2)
