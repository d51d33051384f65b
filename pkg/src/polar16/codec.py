"""Encoder and SC / SCL decoders for codes generated by M^(m) K^{(x)m}.

Wiring of the levels: the root kernel sees, for input block s, the phase-s
LLRs of its l child decoders (child j owns the j-th segment of y). Once a
block of l inputs is decided, x = u_block K is fed back, x_j becoming input s
of child j. All l^d nodes at depth d are at the same phase at the same time,
so the list decoder processes them as extra lanes of one batched kernel
processor per depth.

Processor LLRs are snapped to a 2^-32 grid before use. The snapped values of
the generic and fast processors then coincide, so decisions, scores and path
selection are bit-identical whichever processor is plugged in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import binmat
from .arikan import OpCounter, clip_llr, hard, tau
from .fast16 import fast16_processor
from .kernelspec import Kernel, partial_distances
from .winproc import GenericProcessor

SNAP = 2.0**-32
CRC8_POLY = 0x07


def snap_llr(x):
    return np.round(np.asarray(x, dtype=float) / SNAP) * SNAP


def make_processor(kernel: Kernel, kind: str = "auto", counter: OpCounter | None = None):
    """Kernel processor: ``fast`` (K1/K2 only), ``generic`` or ``auto``."""
    if kind not in ("auto", "fast", "generic"):
        raise ValueError(f"unknown processor kind {kind!r}")
    if kind != "generic":
        try:
            return fast16_processor(kernel, counter)
        except ValueError:
            if kind == "fast":
                raise
    return GenericProcessor(kernel, counter)


# CRC


def crc_remainder(bits, poly: int = CRC8_POLY, r: int = 8) -> np.ndarray:
    """Remainder of bits(x) x^r mod g(x), MSB first, over the last axis."""
    if r < 1:
        raise ValueError("CRC degree must be at least 1")
    bits = np.asarray(bits, dtype=np.int64)
    rows = bits.reshape(int(np.prod(bits.shape[:-1])), bits.shape[-1])
    reg = np.zeros(rows.shape[0], dtype=np.int64)
    top = 1 << (r - 1)
    mask = (1 << r) - 1
    for i in range(rows.shape[1]):
        fb = ((reg & top) != 0).astype(np.int64) ^ rows[:, i]
        reg = ((reg << 1) & mask) ^ (fb * poly)
    out = ((reg[:, None] >> np.arange(r - 1, -1, -1)) & 1).astype(np.uint8)
    return out.reshape(bits.shape[:-1] + (r,))


def crc_append(bits, poly: int = CRC8_POLY, r: int = 8) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    return np.concatenate([bits, crc_remainder(bits, poly, r)], axis=-1)


def crc_check(bits, poly: int = CRC8_POLY, r: int = 8):
    """True where the trailing r bits are the CRC of the rest."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[-1] < r:
        raise ValueError("word shorter than the CRC")
    rem = crc_remainder(bits[..., :-r], poly, r)
    ok = np.all(rem == bits[..., -r:], axis=-1)
    return bool(ok) if np.ndim(ok) == 0 else ok


# code description and encoding


@dataclass(frozen=True)
class CodeSpec:
    kernel: Kernel
    m: int
    k: int
    frozen: tuple[int, ...]
    crc_poly: int | None = None
    crc_len: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        f = tuple(sorted(int(i) for i in self.frozen))
        if len(set(f)) != len(f) or (f and (f[0] < 0 or f[-1] >= self.n)):
            raise ValueError("frozen indices must be distinct and within [n]")
        if self.crc_poly is None and self.crc_len:
            raise ValueError("crc_len given without a polynomial")
        if len(f) != self.n - self.k - self.crc_len:
            raise ValueError(f"|F| = {len(f)} but n - k - r = {self.n - self.k - self.crc_len}")
        object.__setattr__(self, "frozen", f)

    @property
    def l(self) -> int:
        return self.kernel.l

    @property
    def n(self) -> int:
        return self.kernel.l**self.m

    @property
    def info(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[list(self.frozen)] = False
        return np.flatnonzero(mask)

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.frozen)] = True
        return mask

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def build(cls, kernel: Kernel, m: int, k: int, frozen=None, crc: int | None = None, crc_len: int = 8):
        """Code with the given frozen set, or a distance-ordered default.

        The default freezes the inputs whose rows have the smallest products
        of partial distances (ties: smaller index frozen first).
        """
        r = crc_len if crc is not None else 0
        n = kernel.l**m
        if not 0 <= k + r <= n:
            raise ValueError("k (plus CRC bits) must lie in [0, n]")
        if frozen is None:
            frozen = distance_frozen_set(kernel, m, n - k - r)
        return cls(kernel, m, k, tuple(frozen), crc, r)


def distance_frozen_set(kernel: Kernel, m: int, size: int) -> tuple[int, ...]:
    d = np.array(partial_distances(kernel), dtype=float)
    l = kernel.l
    idx = np.arange(l**m)
    w = np.ones(l**m)
    rest = idx.copy()
    for _ in range(m):
        w *= d[rest % l]
        rest //= l
    order = np.lexsort((idx, w))
    return tuple(sorted(int(i) for i in order[:size]))


def generator_matrix(kernel: Kernel, m: int) -> np.ndarray:
    """Explicit G_m = M^(m) K^{(x)m}; only sensible for small n."""
    perm = binmat.permutation_matrix(binmat.digit_reversal_perm(kernel.l, m))
    return binmat.multiply(perm, binmat.kron_power(kernel.matrix, m))


def transform(kernel: Kernel, m: int, u) -> np.ndarray:
    """Rows of u times G_m, via per-block kernel re-encoding."""
    u = np.asarray(u, dtype=np.uint8)
    rows = np.atleast_2d(u)
    k = kernel.matrix.astype(np.int64)
    out = _transform(rows.astype(np.int64), k, kernel.l).astype(np.uint8)
    return out[0] if u.ndim == 1 else out


def _transform(u, k, l):
    rows, n = u.shape
    x = (u.reshape(rows, n // l, l) @ k) & 1
    if n == l:
        return x.reshape(rows, l)
    x = x.transpose(0, 2, 1).reshape(rows * l, n // l)
    return _transform(x, k, l).reshape(rows, n)


def assemble_u(spec: CodeSpec, payload) -> np.ndarray:
    payload = np.asarray(payload, dtype=np.uint8)
    rows = np.atleast_2d(payload)
    if rows.shape[1] != spec.k:
        raise ValueError(f"payload length {rows.shape[1]} != k = {spec.k}")
    if spec.crc_poly is not None:
        rows = crc_append(rows, spec.crc_poly, spec.crc_len)
    u = np.zeros((rows.shape[0], spec.n), dtype=np.uint8)
    u[:, spec.info] = rows
    return u[0] if payload.ndim == 1 else u


def encode(spec: CodeSpec, payload) -> np.ndarray:
    return transform(spec.kernel, spec.m, assemble_u(spec, payload))


def extract_payload(spec: CodeSpec, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.uint8)
    bits = u[..., spec.info]
    return bits[..., : spec.k]


def channel_score(llrs, codeword) -> np.ndarray:
    """sum_b tau(llr_b, c_b); the score of a complete decoded path."""
    return np.sum(tau(llrs, codeword), axis=-1)


# plain SC: one object per node


class _Node:
    def __init__(self, kernel: Kernel, y: np.ndarray, kind: str, counter: OpCounter):
        self.kernel = kernel
        self.l = kernel.l
        self.y = y
        self.proc = make_processor(kernel, kind, counter)
        seg = y.size // self.l
        self.children = None if seg == 1 else [
            _Node(kernel, y[j * seg : (j + 1) * seg], kind, counter) for j in range(self.l)
        ]

    def llr(self, p: int) -> float:
        if p % self.l == 0:
            if self.children is None:
                inputs = self.y
            else:
                inputs = np.array([child.llr(p // self.l) for child in self.children])
            self.proc.reset(inputs[None, :])
        return float(snap_llr(self.proc.process_phase(p % self.l))[0])

    def decide(self, p: int, bit: int):
        self.proc.decide(np.array([bit], dtype=np.uint8))
        if p % self.l == self.l - 1 and self.children is not None:
            x = (self.proc.u[0].astype(np.int64) @ self.kernel.matrix.astype(np.int64)) & 1
            for j, child in enumerate(self.children):
                child.decide(p // self.l, int(x[j]))


@dataclass
class DecoderPath:
    """A decoding path: decided inputs, the node tree of kernel states and its score."""

    root: _Node
    u: list[int] = field(default_factory=list)
    score: float = 0.0

    def step(self, frozen: bool, value: int = 0) -> int:
        phase = len(self.u)
        s = self.root.llr(phase)
        bit = value if frozen else int(hard(s))
        self.score += float(tau(s, bit))
        self.u.append(bit)
        self.root.decide(phase, bit)
        return bit


def sc_decode(spec: CodeSpec, channel_llrs, processor: str = "auto"):
    """Successive cancellation for one frame; returns (u estimate, codeword)."""
    y = clip_llr(np.asarray(channel_llrs, dtype=float))
    if y.shape != (spec.n,):
        raise ValueError(f"expected {spec.n} channel LLRs")
    path = DecoderPath(_Node(spec.kernel, y, processor, OpCounter()))
    mask = spec.frozen_mask
    for phase in range(spec.n):
        path.step(bool(mask[phase]))
    u = np.array(path.u, dtype=np.uint8)
    return u, transform(spec.kernel, spec.m, u)


# batched list decoding


@dataclass
class DecodeResult:
    u: np.ndarray  # (frames, n)
    codeword: np.ndarray
    payload: np.ndarray
    score: np.ndarray
    crc_ok: np.ndarray | None
    kernel_ops: float  # kernel-processing operations per frame
    list_ops: float  # score updates and path selection per frame
    active: np.ndarray  # surviving paths per frame after each phase

    @property
    def ops(self) -> float:
        return self.kernel_ops + self.list_ops


def select_best(scores: np.ndarray, keep: int) -> np.ndarray:
    """Indices of the ``keep`` largest scores per row, ascending.

    Linear-time partition for the threshold; among equal scores at the
    threshold, smaller indices win.
    """
    width = scores.shape[1]
    if keep >= width:
        return np.broadcast_to(np.arange(width), scores.shape).copy()
    thr = np.partition(scores, width - keep, axis=1)[:, width - keep][:, None]
    above = scores > thr
    need = keep - above.sum(axis=1, keepdims=True)
    tie = scores == thr
    chosen = above | (tie & (np.cumsum(tie, axis=1) <= need))
    return np.nonzero(chosen)[1].reshape(scores.shape[0], keep)


class _ListDecoder:
    def __init__(self, kernel: Kernel, m: int, y: np.ndarray, kind: str):
        self.kernel = kernel
        self.kmat = kernel.matrix.astype(np.int64)
        self.l = kernel.l
        self.m = m
        self.frames = y.shape[0]
        self.y = y
        self.counters = [OpCounter() for _ in range(m)]
        self.procs = [make_processor(kernel, kind, c) for c in self.counters]
        self.ptr: list[np.ndarray | None] = [None] * m
        self.paths = 1
        self.kernel_ops = 0.0

    def _proc(self, d):
        ptr = self.ptr[d]
        if ptr is not None:
            width = self.l**d
            rows = (ptr[:, None] * width + np.arange(width)[None, :]).ravel()
            self.procs[d].take(rows)
            self.ptr[d] = None
        return self.procs[d]

    def llr(self, d: int, p: int) -> np.ndarray:
        proc = self._proc(d)
        if p % self.l == 0:
            if d == self.m - 1:
                if p:
                    raise AssertionError("leaf kernels have a single block")
                inputs = self.y.reshape(-1, self.l)
            else:
                inputs = self.llr(d + 1, p // self.l).reshape(-1, self.l)
            proc.reset(inputs)
        before = self.counters[d].total()
        out = proc.process_phase(p % self.l)
        self.kernel_ops += (self.counters[d].total() - before) * self.paths * self.l**d
        return snap_llr(out)

    def decide(self, d: int, p: int, bits: np.ndarray):
        proc = self._proc(d)
        proc.decide(bits)
        if p % self.l == self.l - 1 and d < self.m - 1:
            x = (proc.u.astype(np.int64) @ self.kmat) & 1
            self.decide(d + 1, p // self.l, x.astype(np.uint8).ravel())

    def select(self, src: np.ndarray, paths: int):
        """Keep path lanes ``src`` (flat indices into the current lanes)."""
        for d in range(self.m):
            self.ptr[d] = src if self.ptr[d] is None else self.ptr[d][src]
        self.paths = paths


def scl_decode(spec: CodeSpec, channel_llrs, list_size: int = 1, processor: str = "auto") -> DecodeResult:
    """List decoding of one frame (1-D input) or a batch of frames (2-D input)."""
    if list_size < 1:
        raise ValueError("list size must be at least 1")
    y = clip_llr(np.atleast_2d(np.asarray(channel_llrs, dtype=float)))
    if y.shape[1] != spec.n:
        raise ValueError(f"expected {spec.n} channel LLRs per frame")
    frames, n = y.shape
    dec = _ListDecoder(spec.kernel, spec.m, y, processor)
    mask = spec.frozen_mask
    u = np.zeros((frames, 1, n), dtype=np.uint8)
    score = np.zeros((frames, 1))
    active = np.zeros(n, dtype=np.int64)
    list_ops = 0.0
    for phase in range(n):
        a = score.shape[1]
        s = dec.llr(0, phase).reshape(frames, a)
        if mask[phase]:
            score = score + tau(s, 0)
            list_ops += a
            bits = np.zeros((frames, a), dtype=np.uint8)
        else:
            cand = np.stack([score + tau(s, 0), score + tau(s, 1)], axis=2).reshape(frames, 2 * a)
            list_ops += 2 * a
            keep = min(2 * a, list_size)
            if keep < 2 * a:
                list_ops += 2 * a  # linear-time selection
            chosen = select_best(cand, keep)
            parent = chosen // 2
            bits = (chosen % 2).astype(np.uint8)
            score = np.take_along_axis(cand, chosen, axis=1)
            src = (np.arange(frames)[:, None] * a + parent).ravel()
            u = u.reshape(frames * a, n)[src].reshape(frames, keep, n)
            dec.select(src, keep)
        u[:, :, phase] = bits
        dec.decide(0, phase, bits.ravel())
        active[phase] = score.shape[1]

    a = score.shape[1]
    codewords = transform(spec.kernel, spec.m, u.reshape(frames * a, n)).reshape(frames, a, n)
    crc_ok = None
    rank_key = score.copy()
    if spec.crc_poly is not None:
        ok = crc_check(u[..., spec.info], spec.crc_poly, spec.crc_len).reshape(frames, a)
        any_ok = ok.any(axis=1, keepdims=True)
        rank_key = np.where(ok | ~any_ok, score, -np.inf)
    best = np.argmax(rank_key, axis=1)
    lanes = np.arange(frames)
    u_best = u[lanes, best]
    if spec.crc_poly is not None:
        crc_ok = ok[lanes, best]
    return DecodeResult(
        u=u_best,
        codeword=codewords[lanes, best],
        payload=extract_payload(spec, u_best),
        score=score[lanes, best],
        crc_ok=crc_ok,
        kernel_ops=dec.kernel_ops,
        list_ops=list_ops,
        active=active,
    )


def genie_sc_errors(kernel: Kernel, m: int, channel_llrs, u_true, processor: str = "auto") -> np.ndarray:
    """Genie-aided SC: mistakes[f, i] is True if the decision on u_i was wrong.

    Every decision is replaced by the true bit before decoding continues.
    """
    y = clip_llr(np.atleast_2d(np.asarray(channel_llrs, dtype=float)))
    u_true = np.atleast_2d(np.asarray(u_true, dtype=np.uint8))
    frames, n = y.shape
    if n != kernel.l**m or u_true.shape != y.shape:
        raise ValueError("shape mismatch between LLRs, inputs and code length")
    dec = _ListDecoder(kernel, m, y, processor)
    mistakes = np.zeros((frames, n), dtype=bool)
    for phase in range(n):
        s = dec.llr(0, phase)
        mistakes[:, phase] = hard(s) != u_true[:, phase]
        dec.decide(0, phase, u_true[:, phase])
    return mistakes
