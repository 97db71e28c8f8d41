"""Monte Carlo driver: trials, sweeps, CSV output and self-checks.

Per-trial randomness comes from streams keyed by (seed, label, trial), so
any trial can be reproduced in isolation and execution order is irrelevant.
User-indexed draws are interleaved so user 0's channels do not depend on
how many further users a config asks for; the sweep aggregates the
equivocation bound from each trial's first user, which makes the reported
bound bit-identical across user counts at a fixed power split.
"""

import csv
import time
from dataclasses import dataclass, replace

import numpy as np

from .channel import ReceivedFrame, UserChannels, uplink
from .config import ConfigError, SystemConfig
from .crypto import encrypt, expand_key
from .keys import standardize
from .leakage import LeakageReport, equivocation_lower, leakage_eigen, leakage_logdet, leakage_report
from .params import PublicParams, generate_public_params
from .receiver import decode_frame
from .rng import complex_normal, random_bits, stream
from .transmitter import transmit

CSV_HEADER = ["ka", "ratio", "pa", "pk", "trials",
              "pupe_mean", "pupe_stderr", "zeta_lower_mean", "seed"]


class TrialError(RuntimeError):
    """A module error that occurred inside a specific trial."""


@dataclass
class TrialReport:
    trial_id: int
    n_detected: int
    n_err: int
    pupe: float
    mean_zeta_e_lower: float
    wallclock_ms: float            # informational; not part of determinism
    leakage: LeakageReport


@dataclass(frozen=True)
class SweepResult:
    ka: int
    ratio: float
    pa: float
    pk: float
    trials: int
    pupe_mean: float
    pupe_stderr: float
    zeta_lower_mean: float
    seed: int


def run_trial(cfg: SystemConfig, trial_id: int,
              params: PublicParams | None = None) -> TrialReport:
    """Simulate one complete frame: feedback, uplink, receiver, leakage."""
    t0 = time.perf_counter()
    if params is None:
        params = generate_public_params(cfg)
    try:
        h = complex_normal(stream(cfg.seed, "bs-channel", trial_id), (cfg.Ka, cfg.M))
        g = complex_normal(stream(cfg.seed, "eve-channel", trial_id), (cfg.Ka, cfg.E))
        messages = random_bits(stream(cfg.seed, "messages", trial_id), (cfg.Ka, cfg.B))
        fb_noise = complex_normal(stream(cfg.seed, "feedback-noise", trial_id),
                                  (cfg.Ka, cfg.L), cfg.sigma_u2)

        rows = []
        for u in range(cfg.Ka):
            y = h[u] @ params.V + fb_noise[u]
            ur = transmit(messages[u], y, cfg, params)
            ur.channels = UserChannels(h=h[u], g=g[u])
            rows.append(ur.x)
        X = np.stack(rows, axis=0)

        y_bs = uplink(X, h.T, cfg.sigma_c2, stream(cfg.seed, "bs-noise", trial_id))
        y_eve = uplink(X, g.T, cfg.sigma_e2, stream(cfg.seed, "eve-noise", trial_id))
        frame = ReceivedFrame.from_uplink(y_bs, y_eve, cfg)

        decoded = decode_frame(frame, cfg, params)
        recovered = {u.w_hat.tobytes() for u in decoded if u.w_hat is not None}
        n_err = sum(1 for u in range(cfg.Ka)
                    if messages[u].tobytes() not in recovered)

        leak = leakage_report(g, params.C2, cfg.Pk, cfg.Pa, cfg.sigma_e2, cfg.S)
    except Exception as exc:
        raise TrialError(f"trial {trial_id}: {exc}") from exc

    return TrialReport(trial_id=trial_id,
                       n_detected=len(decoded),
                       n_err=n_err,
                       pupe=n_err / cfg.Ka,
                       mean_zeta_e_lower=leak.zeta_e_lower,
                       wallclock_ms=(time.perf_counter() - t0) * 1e3,
                       leakage=leak)


def split_power_budget(budget: float, ratio: float) -> tuple[float, float]:
    """Split the key-segment budget into (Pa, Pk) with Pa/Pk = ratio."""
    if ratio < 0:
        raise ConfigError(f"ratio: must be >= 0, got {ratio}")
    pa = budget * ratio / (1.0 + ratio)
    return pa, budget - pa


def run_point(cfg: SystemConfig, params: PublicParams | None = None,
              ratio: float | None = None) -> SweepResult:
    """Run cfg.trials trials at one grid point and aggregate."""
    if params is None:
        params = generate_public_params(cfg)
    reports = [run_trial(cfg, t, params) for t in range(cfg.trials)]
    pupes = np.array([r.pupe for r in reports])
    stderr = float(pupes.std(ddof=1) / np.sqrt(len(pupes))) if len(pupes) > 1 else 0.0
    # first-user aggregation keeps the bound independent of Ka by construction
    zetas = [equivocation_lower(r.leakage.per_user_leak_bits[0], cfg.S)
             for r in reports]
    if ratio is None:
        ratio = cfg.Pa / cfg.Pk if cfg.Pk > 0 else float("inf")
    return SweepResult(ka=cfg.Ka, ratio=ratio, pa=cfg.Pa, pk=cfg.Pk,
                       trials=cfg.trials, pupe_mean=float(pupes.mean()),
                       pupe_stderr=stderr,
                       zeta_lower_mean=float(np.mean(zetas)), seed=cfg.seed)


def run_sweep(base_cfg: SystemConfig, ka_list, ratio_list,
              trials: int, progress=None) -> list[SweepResult]:
    """Grid over user counts and Pa/Pk splits of the fixed power budget."""
    if trials < 1:
        raise ConfigError(f"trials: must be a positive integer, got {trials}")
    budget = base_cfg.key_budget
    # the shared artifacts do not depend on Ka, Pa or Pk, so one set serves
    # the whole grid
    params = generate_public_params(base_cfg)
    results = []
    for ka in ka_list:
        for ratio in ratio_list:
            pa, pk = split_power_budget(budget, ratio)
            cfg = replace(base_cfg, Ka=ka, Pa=pa, Pk=pk, trials=trials)
            res = run_point(cfg, params, ratio)
            results.append(res)
            if progress is not None:
                progress(res)
    return results


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def emit_csv(results: list[SweepResult], path) -> None:
    """Write sweep results; row order follows the result list (Ka-major)."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in results:
                writer.writerow([_fmt(v) for v in (
                    r.ka, r.ratio, r.pa, r.pk, r.trials,
                    r.pupe_mean, r.pupe_stderr, r.zeta_lower_mean, r.seed)])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path) -> list[SweepResult]:
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            return [SweepResult(ka=int(row["ka"]), ratio=float(row["ratio"]),
                                pa=float(row["pa"]), pk=float(row["pk"]),
                                trials=int(row["trials"]),
                                pupe_mean=float(row["pupe_mean"]),
                                pupe_stderr=float(row["pupe_stderr"]),
                                zeta_lower_mean=float(row["zeta_lower_mean"]),
                                seed=int(row["seed"]))
                    for row in reader]
    except OSError as exc:
        raise OSError(f"cannot read CSV from {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Self-test suites (the `selftest` CLI subcommand)
# ---------------------------------------------------------------------------


def _check_params_invariants(cfg: SystemConfig) -> None:
    params = generate_public_params(cfg)
    tol = 1e-10
    target = cfg.Pf * cfg.M * cfg.L
    assert abs(np.linalg.norm(params.V) ** 2 - target) <= tol * max(target, 1.0)
    eye = params.C1.conj().T @ params.C1
    assert np.max(np.abs(eye - np.eye(cfg.S // 2))) <= tol
    assert np.max(np.abs(np.linalg.norm(params.C2, axis=0) - 1.0)) <= tol
    row_norms = np.linalg.norm(params.P, axis=1) ** 2
    assert np.max(np.abs(row_norms - cfg.np * cfg.Pp)) <= tol * max(cfg.np * cfg.Pp, 1.0)
    assert params.digest() == generate_public_params(cfg).digest()


def _check_ldpc(cfg: SystemConfig) -> None:
    params = generate_public_params(cfg)
    rng = np.random.default_rng(0)
    s = rng.integers(0, 2, (200, cfg.S), dtype=np.uint8)
    sysb, par = params.ldpc.encode(s)
    cw = np.concatenate([sysb, par], axis=1)
    assert not params.ldpc.syndrome(cw).any()
    s_hat, conv = params.ldpc.decode(np.where(cw == 0, 40.0, -40.0), cfg.bp_iters)
    assert np.array_equal(s_hat, s) and conv.all()


def _check_polar(cfg: SystemConfig) -> None:
    params = generate_public_params(cfg)
    rng = np.random.default_rng(1)
    pay = rng.integers(0, 2, (50, cfg.polar_payload_bits), dtype=np.uint8)
    cw = params.polar.encode(pay)
    dec, ok = params.polar.decode(np.where(cw == 0, 40.0, -40.0), cfg.list_size)
    assert np.array_equal(dec, pay) and ok.all()


def _check_crypto(cfg: SystemConfig) -> None:
    rng = np.random.default_rng(2)
    w = rng.integers(0, 2, (500, cfg.B), dtype=np.uint8)
    k = rng.integers(0, 2, (500, cfg.B), dtype=np.uint8)
    assert np.array_equal(encrypt(encrypt(w, k), k), w)
    params = generate_public_params(cfg)
    s1 = rng.integers(0, 2, cfg.S, dtype=np.uint8)
    s2 = rng.integers(0, 2, cfg.S, dtype=np.uint8)
    assert np.array_equal(expand_key(s1 ^ s2, params.T),
                          expand_key(s1, params.T) ^ expand_key(s2, params.T))


def _check_standardize(cfg: SystemConfig) -> None:
    rng = np.random.default_rng(3)
    y = rng.standard_normal(cfg.L) + 1j * rng.standard_normal(cfg.L)
    z = standardize(y)
    assert np.max(np.abs(standardize(5.0 * y) - z)) <= 1e-10
    assert np.max(np.abs(standardize(z) - z)) <= 1e-10


def _check_leakage(cfg: SystemConfig) -> None:
    rng = np.random.default_rng(4)
    for _ in range(20):
        E, d = rng.integers(1, 5), rng.integers(1, 9)
        g = rng.standard_normal(E) + 1j * rng.standard_normal(E)
        C2 = rng.standard_normal((8, d)) + 1j * rng.standard_normal((8, d))
        C2 /= np.linalg.norm(C2, axis=0, keepdims=True)
        a = leakage_eigen(g, C2, cfg.Pk, cfg.Pa, cfg.sigma_e2)
        b = leakage_logdet(g, C2, cfg.Pk, cfg.Pa, cfg.sigma_e2)
        assert abs(a - b) <= 1e-9 * (1.0 + abs(b))


def _check_end_to_end(cfg: SystemConfig) -> None:
    mini = replace(cfg, M=8, E=8, Ka=1, sigma_c2=1e-10, sigma_u2=1e-10, trials=1)
    report = run_trial(mini, 0)
    assert report.pupe == 0.0


SELFTEST_SUITES = [
    ("public-params invariants", _check_params_invariants),
    ("ldpc round trip", _check_ldpc),
    ("polar round trip", _check_polar),
    ("crypto involution/linearity", _check_crypto),
    ("standardize properties", _check_standardize),
    ("leakage oracle equivalence", _check_leakage),
    ("noiseless end-to-end", _check_end_to_end),
]


def selftest(cfg: SystemConfig, out=print) -> bool:
    ok = True
    for name, fn in SELFTEST_SUITES:
        try:
            fn(cfg)
            out(f"PASS {name}")
        except Exception as exc:
            out(f"FAIL {name}: {exc}")
            ok = False
    return ok
