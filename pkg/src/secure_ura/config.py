"""Simulation configuration and the flat key=value config-file format.

An empty file (or no file) yields the default full-scale setup: 50 BS and
eavesdropper antennas, 20-use feedback, 40-bit keys reconciled through a
(60, 40) code, 100-bit messages split 12/88 between a 4096-entry pilot
codebook and a (512, 99) polar code, all powers 0.3 except the 0.6 downlink.
"""

import math
import os
from dataclasses import dataclass, fields, replace

ENV_SEED = "SECURE_URA_SEED"


class ConfigError(ValueError):
    """A configuration value violates its constraint."""


@dataclass(frozen=True)
class SystemConfig:
    # antennas / users
    M: int = 50            # BS receive antennas
    E: int = 50            # eavesdropper receive antennas
    Ka: int = 25           # active users per frame
    # segment lengths (channel uses)
    L: int = 20            # feedback (downlink) length
    np: int = 200          # pilot segment
    nc: int = 512          # polar segment
    ns: int = 60           # key codeword length; ns - S parity uses are sent
    # bit budgets
    B: int = 100           # message bits
    Bp: int = 12           # pilot sub-message bits
    Br: int = 11           # CRC bits
    S: int = 40            # secret-key bits
    # per-channel-use powers (linear)
    Pp: float = 0.3
    Pc: float = 0.3
    Pk: float = 0.15
    Pa: float = 0.15
    Pf: float = 0.6
    # noise variances
    sigma_c2: float = 1.0  # at the BS
    sigma_e2: float = 1.0  # at the eavesdropper
    sigma_u2: float = 1.0  # at the user (feedback reception)
    # algorithmic knobs
    list_size: int = 8
    bp_iters: int = 50
    max_outer_iters: int = 8
    omp_batch: int | None = None   # None = auto (2 * Ka)
    # Monte Carlo
    seed: int = 1
    trials: int = 50

    def __post_init__(self):
        self.validate()

    # ---- derived quantities -------------------------------------------

    @property
    def key_parity_len(self) -> int:
        return self.ns - self.S

    @property
    def frame_len(self) -> int:
        return self.np + self.nc + self.key_parity_len

    @property
    def polar_payload_bits(self) -> int:
        return self.B - self.Bp

    @property
    def polar_info_bits(self) -> int:
        return self.B - self.Bp + self.Br

    @property
    def pilot_count(self) -> int:
        return 1 << self.Bp

    @property
    def key_budget(self) -> float:
        return self.Pk + self.Pa

    @property
    def omp_batch_effective(self) -> int:
        return self.omp_batch if self.omp_batch is not None else 2 * self.Ka

    # ---- validation ----------------------------------------------------

    def validate(self):
        def fail(field, constraint):
            raise ConfigError(f"{field}: {constraint}")

        for name in ("M", "E", "Ka", "L", "np", "nc", "ns", "B", "Bp", "Br",
                     "S", "list_size", "bp_iters", "max_outer_iters", "trials"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                fail(name, f"must be a positive integer, got {v!r}")
        if self.omp_batch is not None and (not isinstance(self.omp_batch, int)
                                           or self.omp_batch < 1):
            fail("omp_batch", f"must be a positive integer, got {self.omp_batch!r}")
        for name in ("Pp", "Pc", "Pk", "Pa", "Pf"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                fail(name, f"must be finite and >= 0, got {v!r}")
        for name in ("sigma_c2", "sigma_e2", "sigma_u2"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                fail(name, f"must be finite and > 0, got {v!r}")
        if self.S % 2 != 0:
            fail("S", f"must be even, got {self.S}")
        if self.L < self.S // 2:
            fail("L", f"must satisfy L >= S/2, got L={self.L}, S={self.S}")
        if self.S >= self.ns:
            fail("S", f"must satisfy S < ns, got S={self.S}, ns={self.ns}")
        if self.Bp >= self.B:
            fail("Bp", f"must satisfy Bp < B, got Bp={self.Bp}, B={self.B}")
        if self.Bp > 30:
            fail("Bp", f"must be <= 30 so the pilot codebook fits in memory, got {self.Bp}")
        if self.Br > 30:
            fail("Br", f"must be <= 30, got {self.Br}")
        if self.nc & (self.nc - 1):
            fail("nc", f"must be a power of two, got {self.nc}")
        if self.polar_info_bits > self.nc:
            fail("nc", "must satisfy B - Bp + Br <= nc, got "
                 f"{self.polar_info_bits} > {self.nc}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < (1 << 64):
            fail("seed", f"must be an unsigned 64-bit integer, got {self.seed!r}")


def desk_scale(cfg: SystemConfig, trials: int | None = None) -> SystemConfig:
    """Reduced-dimension preset: 8 antennas on both sides, 200 trials."""
    return replace(cfg, M=8, E=8, trials=200 if trials is None else trials)


_FLOAT_FIELDS = {"Pp", "Pc", "Pk", "Pa", "Pf", "sigma_c2", "sigma_e2", "sigma_u2"}
_INT_FIELDS = {f.name for f in fields(SystemConfig)} - _FLOAT_FIELDS


def load_config(path: str | os.PathLike | None = None, *,
                env: dict | None = None) -> SystemConfig:
    """Load a SystemConfig from a flat key=value file.

    Schema: one `key = value` pair per line, `#` starts a comment, blank
    lines are ignored.  Keys are the SystemConfig field names; unspecified
    keys keep their defaults.  The environment variable SECURE_URA_SEED,
    when set, overrides the seed from the file.
    """
    env = os.environ if env is None else env
    overrides = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        for lineno, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key in _INT_FIELDS:
                try:
                    overrides[key] = int(value)
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: {key} expects an integer, got {value!r}") from None
            elif key in _FLOAT_FIELDS:
                try:
                    overrides[key] = float(value)
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: {key} expects a number, got {value!r}") from None
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    if ENV_SEED in env:
        try:
            overrides["seed"] = int(env[ENV_SEED])
        except ValueError:
            raise ConfigError(f"{ENV_SEED} expects an integer, got {env[ENV_SEED]!r}") from None
    return SystemConfig(**overrides)
