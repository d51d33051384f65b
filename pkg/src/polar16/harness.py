"""AWGN/BPSK channel, Monte Carlo code construction and FER simulation."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arikan import clip_llr
from .codec import CodeSpec, encode, genie_sc_errors, scl_decode
from .kernelspec import Kernel

CSV_HEADER = ["snr_db", "list", "frames", "errors", "fer", "ci_lo", "ci_hi", "ops_mean"]
TARGET_LANES = 20000  # frames x paths x l^(m-1) per decoder call


def noise_variance(snr_db: float, rate: float) -> float:
    """sigma^2 for Eb/N0 = snr_db with unit-energy BPSK at the given rate."""
    if not 0 < rate <= 1:
        raise ValueError("rate must lie in (0, 1]")
    return 1.0 / (2.0 * rate * 10 ** (snr_db / 10))


def awgn_llr(codeword, snr_db: float, rate: float, rng: np.random.Generator) -> np.ndarray:
    """BPSK (0 -> +1, 1 -> -1) over AWGN; returns clipped LLRs 2y/sigma^2."""
    c = np.asarray(codeword, dtype=np.uint8)
    var = noise_variance(snr_db, rate)
    y = 1.0 - 2.0 * c + rng.normal(0.0, math.sqrt(var), size=c.shape)
    return clip_llr(2.0 * y / var)


def wilson_interval(errors: int, frames: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if frames <= 0:
        return 0.0, 1.0
    p = errors / frames
    denom = 1 + z * z / frames
    centre = (p + z * z / (2 * frames)) / denom
    half = z * math.sqrt(p * (1 - p) / frames + z * z / (4 * frames * frames)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == frames else min(1.0, centre + half)
    return lo, hi


def worker_count() -> int:
    env = os.environ.get("POLAR16_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def _chunk_frames(spec_l: int, m: int, paths: int) -> int:
    return max(16, TARGET_LANES // (paths * spec_l ** (m - 1)))


@dataclass
class ConstructionResult:
    error_counts: np.ndarray
    frozen: tuple[int, ...]
    trials: int


def choose_frozen(error_counts, size: int) -> tuple[int, ...]:
    """The ``size`` indices with most errors; ties go to the larger index."""
    counts = np.asarray(error_counts)
    idx = np.arange(counts.size)
    order = np.lexsort((-idx, -counts))
    return tuple(sorted(int(i) for i in order[:size]))


def monte_carlo_construct(
    kernel: Kernel,
    m: int,
    k: int,
    snr_db: float,
    trials: int,
    rng: np.random.Generator,
    crc_len: int = 0,
    processor: str = "auto",
    rate: float | None = None,
) -> ConstructionResult:
    """Genie-aided SC over the all-zero codeword; freeze the n-k-r worst inputs."""
    if trials < 1:
        raise ValueError("need at least one trial")
    n = kernel.l**m
    rate = k / n if rate is None else rate
    counts = np.zeros(n, dtype=np.int64)
    chunk = _chunk_frames(kernel.l, m, 1)
    done = 0
    while done < trials:
        f = min(chunk, trials - done)
        zeros = np.zeros((f, n), dtype=np.uint8)
        llr = awgn_llr(zeros, snr_db, rate, rng)
        counts += genie_sc_errors(kernel, m, llr, zeros, processor).sum(axis=0)
        done += f
    return ConstructionResult(counts, choose_frozen(counts, n - k - crc_len), trials)


@dataclass
class SimConfig:
    spec: CodeSpec
    snr_db: list[float]
    lists: list[int] = field(default_factory=lambda: [1])
    max_frames: int = 10000
    max_errors: int | None = 100
    seed: int = 0
    processor: str = "auto"
    workers: int | None = None

    def __post_init__(self):
        if self.max_frames < 1:
            raise ValueError("max_frames must be at least 1")
        if not self.snr_db:
            raise ValueError("empty SNR list")
        if not self.lists or min(self.lists) < 1:
            raise ValueError("list sizes must be positive")


@dataclass
class SimPoint:
    snr_db: float
    list_size: int
    frames: int
    errors: int
    kernel_ops: float
    list_ops: float

    @property
    def fer(self) -> float:
        return self.errors / self.frames if self.frames else 0.0

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.frames)

    @property
    def ops_mean(self) -> float:
        return self.kernel_ops + self.list_ops


def _run_chunk(spec: CodeSpec, snr: float, list_size: int, frames: int, seed_seq, processor: str):
    rng = np.random.default_rng(seed_seq)
    payload = rng.integers(0, 2, size=(frames, spec.k), dtype=np.uint8)
    llr = awgn_llr(encode(spec, payload), snr, spec.rate, rng)
    res = scl_decode(spec, llr, list_size, processor)
    failed = np.any(res.payload != payload, axis=1)
    return failed, res.kernel_ops, res.list_ops


def simulate_point(config: SimConfig, snr_idx: int, list_idx: int) -> SimPoint:
    spec = config.spec
    snr = config.snr_db[snr_idx]
    list_size = config.lists[list_idx]
    chunk = min(config.max_frames, _chunk_frames(spec.l, spec.m, list_size))
    workers = config.workers or worker_count()
    frames = errors = 0
    kops = lops = 0.0
    next_chunk = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while frames < config.max_frames and (config.max_errors is None or errors < config.max_errors):
            # one wave of chunks; results are consumed in chunk order so the
            # outcome does not depend on the worker count
            jobs = []
            planned = frames
            for _ in range(workers):
                if planned >= config.max_frames:
                    break
                f = min(chunk, config.max_frames - planned)
                seq = np.random.SeedSequence([config.seed, snr_idx, list_idx, next_chunk])
                jobs.append((f, pool.submit(_run_chunk, spec, snr, list_size, f, seq, config.processor)))
                planned += f
                next_chunk += 1
            for _, job in jobs:
                failed, ko, lo = job.result()
                if config.max_errors is not None:
                    # stop at the frame that reaches the error budget
                    cum = np.cumsum(failed)
                    hit = np.flatnonzero(cum >= config.max_errors - errors)
                    if hit.size:
                        failed = failed[: hit[0] + 1]
                f = failed.size
                frames += f
                errors += int(failed.sum())
                kops += ko * f
                lops += lo * f
                if config.max_errors is not None and errors >= config.max_errors:
                    break
    per = max(frames, 1)
    return SimPoint(snr, list_size, frames, errors, kops / per, lops / per)


def simulate_fer(config: SimConfig) -> list[SimPoint]:
    return [
        simulate_point(config, si, li)
        for si in range(len(config.snr_db))
        for li in range(len(config.lists))
    ]


def format_csv(points: list[SimPoint], config: SimConfig | None = None) -> str:
    buf = io.StringIO()
    if config is not None:
        spec = config.spec
        buf.write(f"# kernel={spec.kernel.name} n={spec.n} k={spec.k} m={spec.m} crc_len={spec.crc_len}\n")
        buf.write(f"# seed={config.seed} max_frames={config.max_frames} max_errors={config.max_errors}\n")
        buf.write("# Eb/N0 uses rate k/n (CRC bits are overhead); ops_mean = kernel + list operations per frame\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in points:
        lo, hi = p.ci
        w.writerow([f"{p.snr_db:g}", p.list_size, p.frames, p.errors, f"{p.fer:.6g}", f"{lo:.6g}", f"{hi:.6g}", f"{p.ops_mean:.1f}"])
    return buf.getvalue()


def write_csv(path, points: list[SimPoint], config: SimConfig | None = None) -> str:
    text = format_csv(points, config)
    Path(path).write_text(text)
    return text


def gnuplot_script(csv_path: str, lists: list[int]) -> str:
    lines = [
        "set datafile separator ','",
        "set logscale y",
        "set xlabel 'Eb/N0, dB'",
        "set ylabel 'FER'",
        "set grid",
    ]
    plots = [
        f"'{csv_path}' using 1:($2=={L} ? $5 : 1/0) with linespoints title 'L={L}'" for L in lists
    ]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"
