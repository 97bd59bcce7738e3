"""Monte Carlo sweeps over physical error rates."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
import time
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import erasure, matching, toom, welded
from .codes import FAMILIES, PERIODIC3D, SOLID, WELDED, CodeSpec, PauliFrame, build_code, \
    is_logical_failure, syndrome
from .noise import BITFLIP, CHANNELS, ERASURE, PHASEFLIP, sample_bitflip, sample_erasure, \
    sample_phaseflip, trial_rng

CSV_HEADER = ("family", "ell", "R", "channel", "p", "trials", "failures",
              "failure_rate", "stderr", "seed", "elapsed_ms")
OUTCOMES = ("success", "z_fail", "x_fail", "both", "decoder_failure")


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    family: str = SOLID
    ell: int = 4
    R: int = 1
    channel: str = PHASEFLIP
    p_min: float = 0.01
    p_max: float = 0.05
    p_steps: int = 5
    trials: int = 10_000
    seed: int = 0
    workers: int = 1
    out: str | None = None
    imax: int | None = None
    jmax: int | None = None
    stuck_policy: str | None = None
    variant: str = erasure.FREEZE_FIRST
    paired_baseline: bool = False
    timing: bool = False

    def validate(self) -> "SimConfig":
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.channel not in CHANNELS:
            raise ConfigError(f"unknown channel {self.channel!r}")
        if self.channel in (BITFLIP, PHASEFLIP) and self.family != SOLID:
            raise ConfigError(f"{self.channel} decoding is available for the solid code only")
        min_ell = 2 if self.family == PERIODIC3D else 1
        if self.ell < min_ell:
            raise ConfigError(f"{self.family} needs ell >= {min_ell}")
        if self.R < 1 or (self.family != WELDED and self.R != 1):
            raise ConfigError("R must be 1 unless the family is welded (then R >= 1)")
        if not (0.0 <= self.p_min <= self.p_max <= 1.0):
            raise ConfigError("need 0 <= p_min <= p_max <= 1")
        if self.p_steps < 1 or (self.p_steps == 1 and self.p_min != self.p_max):
            raise ConfigError("p_steps must be >= 1 (exactly 1 only when p_min == p_max)")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.stuck_policy is not None and self.stuck_policy not in erasure.STUCK_POLICIES:
            raise ConfigError(f"unknown stuck policy {self.stuck_policy!r}")
        if self.variant not in erasure.VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        for name in ("imax", "jmax"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.paired_baseline and self.channel != ERASURE:
            raise ConfigError("the Gaussian baseline exists for the erasure channel only")
        return self

    @property
    def p_grid(self) -> list[float]:
        return [round(float(p), 12) for p in np.linspace(self.p_min, self.p_max, self.p_steps)]

    @property
    def policy(self) -> str:
        if self.stuck_policy is not None:
            return self.stuck_policy
        return erasure.GAUSS if self.family == WELDED else erasure.DECLARE_FAILURE


@dataclass
class SimResult:
    family: str
    ell: int
    R: int
    channel: str
    p: float
    seed: int
    counts: dict = field(default_factory=lambda: dict.fromkeys(OUTCOMES, 0))
    elapsed_ms: float = 0.0

    @property
    def trials(self) -> int:
        return sum(self.counts.values())

    @property
    def failures(self) -> int:
        return self.trials - self.counts["success"]

    @property
    def z_failures(self) -> int:
        return self.counts["z_fail"] + self.counts["both"]

    @property
    def x_failures(self) -> int:
        return self.counts["x_fail"] + self.counts["both"]

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def stderr(self) -> float:
        f, n = self.failure_rate, self.trials
        return math.sqrt(f * (1 - f) / n) if n else 0.0

    def wilson(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials, z)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    f = k / n
    denom = 1 + z * z / n
    mid = (f + z * z / (2 * n)) / denom
    half = z * math.sqrt(f * (1 - f) / n + z * z / (4 * n * n)) / denom
    return max(0.0, mid - half), min(1.0, mid + half)


# ------------------------------------------------------------------ trials
def _classify(code: CodeSpec, error: PauliFrame, x_est, z_est) -> str:
    if x_est is None or z_est is None:
        return "decoder_failure"
    zf, xf = is_logical_failure(code, PauliFrame(error.x ^ x_est, error.z ^ z_est))
    return "both" if zf and xf else "z_fail" if zf else "x_fail" if xf else "success"


def _decode(code: CodeSpec, cfg: SimConfig, error: PauliFrame, erased, baseline=False):
    zeros = np.zeros(code.n, dtype=np.uint8)
    s = syndrome(code, error)
    if cfg.channel == BITFLIP:
        return toom.decode_bitflip(code, s.tau, cfg.imax, cfg.jmax), zeros
    if cfg.channel == PHASEFLIP:
        return zeros, matching.decode_phase(code, s.sigma)
    if baseline:
        return erasure.decode_erasure_gauss(code, erased, s.sigma, s.tau)
    if code.family == WELDED:
        return (welded.decode_welded_x(code, erased, s.tau, cfg.policy),
                welded.decode_welded_z(code, erased, s.sigma))
    return (erasure.decode_erasure_x(code, erased, s.tau, cfg.policy),
            erasure.decode_erasure_z(code, erased, s.sigma, cfg.variant))


def _sample(code: CodeSpec, channel: str, p: float, rng):
    if channel == BITFLIP:
        return sample_bitflip(code.n, p, rng), None
    if channel == PHASEFLIP:
        return sample_phaseflip(code.n, p, rng), None
    s = sample_erasure(code.n, p, rng)
    return s.induced, s.erased


def run_trial(code: CodeSpec, channel: str, p: float, rng, config: SimConfig | None = None) -> str:
    """Sample one error, decode it and classify the residual."""
    cfg = config or SimConfig(family=code.family, channel=channel)
    if channel in (BITFLIP, PHASEFLIP) and code.family != SOLID:
        raise ConfigError(f"{channel} decoding is available for the solid code only")
    cfg = replace(cfg, channel=channel)
    error, erased = _sample(code, channel, p, rng)
    return _classify(code, error, *_decode(code, cfg, error, erased))


def run_paired_trial(code: CodeSpec, p: float, rng, config: SimConfig) -> tuple[str, str]:
    """Erasure trial decoded by the configured decoder and by elimination."""
    error, erased = _sample(code, ERASURE, p, rng)
    cfg = replace(config, channel=ERASURE)
    return (_classify(code, error, *_decode(code, cfg, error, erased)),
            _classify(code, error, *_decode(code, cfg, error, erased, baseline=True)))


# ------------------------------------------------------------------ sweeps
_WORKER_CODE: dict = {}


def _code_for(cfg: SimConfig) -> CodeSpec:
    key = (cfg.family, cfg.ell, cfg.R)
    if key not in _WORKER_CODE:
        _WORKER_CODE.clear()
        _WORKER_CODE[key] = build_code(cfg.family, cfg.ell, cfg.R)
    return _WORKER_CODE[key]


def _run_chunk(args):
    cfg, point, p, start, stop = args
    code = _code_for(cfg)
    main = dict.fromkeys(OUTCOMES, 0)
    base = dict.fromkeys(OUTCOMES, 0)
    t0 = time.perf_counter()
    for t in range(start, stop):
        rng = trial_rng(cfg.seed, point, t)
        if cfg.paired_baseline:
            a, b = run_paired_trial(code, p, rng, cfg)
            main[a] += 1
            base[b] += 1
        else:
            main[run_trial(code, cfg.channel, p, rng, cfg)] += 1
    return point, main, base, (time.perf_counter() - t0) * 1e3


def _chunks(cfg: SimConfig):
    size = max(1, min(500, math.ceil(cfg.trials / (4 * cfg.workers))))
    for point, p in enumerate(cfg.p_grid):
        for start in range(0, cfg.trials, size):
            yield cfg, point, p, start, min(cfg.trials, start + size)


def run_sweep(config: SimConfig, progress=None) -> tuple[list[SimResult], list[SimResult]]:
    """Run every (p, trial) pair; returns (results, baseline results).

    The baseline list is empty unless ``paired_baseline`` is set.  Trials are
    seeded by ``(seed, point, trial)`` so counts do not depend on scheduling.
    CSV files are written when ``config.out`` is set.
    """
    cfg = config.validate()
    if cfg.out and not Path(cfg.out).resolve().parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {Path(cfg.out).parent}")
    _code_for(cfg)
    grid = cfg.p_grid

    def fresh():
        return [SimResult(cfg.family, cfg.ell, cfg.R, cfg.channel, p, cfg.seed) for p in grid]

    results, baseline = fresh(), fresh()
    tasks = list(_chunks(cfg))
    if cfg.workers == 1:
        outputs = map(_run_chunk, tasks)
        pool = None
    else:
        pool = get_context("fork").Pool(cfg.workers)
        outputs = pool.imap_unordered(_run_chunk, tasks)
    try:
        for point, main, base, ms in outputs:
            for k in OUTCOMES:
                results[point].counts[k] += main[k]
                baseline[point].counts[k] += base[k]
            results[point].elapsed_ms += ms
            if progress:
                progress(point, results[point])
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    if not cfg.paired_baseline:
        baseline = []
    if cfg.out:
        write_csv(cfg.out, results, cfg.timing)
        if baseline:
            write_csv(baseline_path(cfg.out), baseline, cfg.timing)
    return results, baseline


def baseline_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".gauss" + (out.suffix or ".csv"))


def format_csv(results, timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow([r.family, r.ell, r.R, r.channel, f"{r.p:.10g}", r.trials, r.failures,
                    f"{r.failure_rate:.10g}", f"{r.stderr:.10g}", r.seed,
                    f"{r.elapsed_ms:.1f}" if timing else "0"])
    return buf.getvalue()


def write_csv(path, results, timing: bool = False) -> None:
    """Atomic write: the file appears complete or not at all."""
    path = Path(path)
    text = format_csv(results, timing)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
