"""Window-based kernel processing for arbitrary kernels, plus brute-force oracles."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .arikan import OpCounter, PhaseOrderError, hard, path_score
from .kernelspec import Kernel


def _bits(count: int, width: int) -> np.ndarray:
    """All ``width``-bit vectors in lexicographic order (first bit most significant)."""
    idx = np.arange(count, dtype=np.int64)
    return ((idx[:, None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)


class GenericProcessor:
    """Kernel LLRs by enumerating decoding-window assignments.

    Every candidate's path score is recomputed from the channel LLRs with a
    plain SC pass; nothing is shared between candidates. The op counter
    therefore measures the naive per-candidate cost.
    """

    def __init__(self, kernel: Kernel, counter: OpCounter | None = None):
        if kernel.t < 0:
            raise ValueError("window processing needs a power-of-two kernel size")
        self.kernel = kernel
        self.plan = kernel.plan
        self.l = kernel.l
        self.counter = counter if counter is not None else OpCounter()
        self._solver = [self._phase_solver(phi) for phi in range(self.l)]
        self.y = None
        self.phase = 0
        self._pending = False

    def _phase_solver(self, phi):
        """For each v index <= h: ('free', column) or ('fixed', s, u_terms, v_terms)."""
        plan = self.plan
        window = plan.windows[phi]
        owner = {plan.constraints[s].j: s for s in range(phi + 1)}
        steps = []
        for t in range(plan.h[phi] + 1):
            if t in window:
                steps.append(("free", window.index(t)))
            else:
                c = plan.constraints[owner[t]]
                steps.append(("fixed", owner[t], c.u_terms, tuple(x for x in c.v_terms if x < t)))
        return window, steps

    def reset(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != self.l:
            raise ValueError(f"expected {self.l} channel LLRs per lane")
        self.y = y
        self.u = np.zeros(y.shape, dtype=np.uint8)
        self.phase = 0
        self._pending = False

    @property
    def batch(self) -> int:
        return self.y.shape[0]

    def candidates(self, phase: int) -> np.ndarray:
        """Arikan inputs v_0^{h} of all candidates: shape (batch, 2, 2^|D|, h+1)."""
        window, steps = self._solver[phase]
        free = _bits(2 ** len(window), len(window))
        ncand = free.shape[0]
        h = len(steps) - 1
        v = np.zeros((self.batch, 2, ncand, h + 1), dtype=np.uint8)
        b = np.arange(2, dtype=np.uint8)[None, :, None]
        for t, step in enumerate(steps):
            if step[0] == "free":
                v[..., t] = free[None, None, :, step[1]]
                continue
            _, s, u_terms, v_terms = step
            val = np.broadcast_to(b, (self.batch, 2, ncand)).copy() if s == phase else np.broadcast_to(
                self.u[:, s, None, None], (self.batch, 2, ncand)
            ).copy()
            for s2 in u_terms:
                val ^= self.u[:, s2, None, None]
            for t2 in v_terms:
                val ^= v[..., t2]
            v[..., t] = val
        return v

    def process_phase(self, phase: int) -> np.ndarray:
        if self.y is None or phase != self.phase or self._pending:
            raise PhaseOrderError(f"phase {phase} out of order (at {self.phase})")
        ctr = self.counter
        ctr.start_phase(phase)
        v = self.candidates(phase)
        count = v.shape[-1]
        full = np.zeros(v.shape[:-1] + (self.l,), dtype=np.uint8)
        full[..., :count] = v
        one = OpCounter()
        r = path_score(self.y[:, None, None, :], full, count, one)
        ncand = v.shape[2]
        ctr.count("add", one.additions * 2 * ncand)
        ctr.count("cmp", one.comparisons * 2 * ncand)
        best = r.max(axis=2)
        ctr.count("cmp", 2 * (ncand - 1))
        ctr.count("add", 1)
        self._pending = True
        return best[:, 0] - best[:, 1]

    def decide(self, bits):
        if not self._pending:
            raise PhaseOrderError("decide() before process_phase()")
        self.u[:, self.phase] = np.asarray(bits, dtype=np.uint8)
        self.phase += 1
        self._pending = False

    def take(self, idx):
        self.y = self.y[idx]
        self.u = self.u[idx]


def kernel_llr_generic(state: GenericProcessor, phase: int) -> np.ndarray:
    return state.process_phase(phase)


@lru_cache(maxsize=8)
def _codebook(matrix_bytes: bytes, l: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.frombuffer(matrix_bytes, dtype=np.uint8).reshape(l, l)
    u = _bits(2**l, l)
    x = ((u.astype(np.int64) @ k.astype(np.int64)) & 1).astype(np.uint8)
    return u, x


def codebook(k: Kernel) -> tuple[np.ndarray, np.ndarray]:
    """All inputs u (lexicographic, u_0 most significant) and codewords uK."""
    return _codebook(k.matrix.tobytes(), k.l)


def channel_score(y, x) -> np.ndarray:
    """sum_i tau(y_i, x_i): log-likelihood of x relative to the hard decision."""
    y = np.asarray(y, dtype=float)
    return -np.sum(np.where(hard(y) == x, 0.0, np.abs(y)), axis=-1)


def kernel_llr_bruteforce(k: Kernel, u_prefix, y, phase: int) -> float:
    """Max-log LLR of u_phase by enumerating every completion of the prefix."""
    l = k.l
    u_prefix = np.asarray(u_prefix, dtype=np.uint8).reshape(-1)
    if u_prefix.size != phase:
        raise ValueError("prefix length must equal the phase")
    y = np.asarray(y, dtype=float)
    suffix = _bits(2 ** (l - 1 - phase), l - 1 - phase)
    best = []
    for b in (0, 1):
        u = np.zeros((suffix.shape[0], l), dtype=np.uint8)
        u[:, :phase] = u_prefix
        u[:, phase] = b
        u[:, phase + 1 :] = suffix
        x = ((u.astype(np.int64) @ k.matrix.astype(np.int64)) & 1).astype(np.uint8)
        best.append(channel_score(y, x).max())
    return float(best[0] - best[1])


def bruteforce_all_phases(k: Kernel, y, u, chunk: int = 64) -> np.ndarray:
    """Brute-force LLRs for every phase of every lane, prefix taken from ``u``.

    All 2^l codeword scores are computed once per lane and reduced with a
    tree of maxima over the lexicographic input order.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    u = np.atleast_2d(np.asarray(u, dtype=np.uint8))
    l = k.l
    _, x = codebook(k)
    xf = x.astype(float)
    out = np.zeros(y.shape)
    for start in range(0, y.shape[0], chunk):
        yc = y[start : start + chunk]
        hd = hard(yc)
        mag = np.abs(yc)
        # mismatch(x, hd) = x (1 - 2 hd) + hd
        scores = -(xf @ (mag * (1 - 2.0 * hd)).T + (mag * hd).sum(axis=1))
        level = scores  # (2^l, lanes); rows indexed by u read as a binary number
        for phase in range(l - 1, -1, -1):
            # rows of ``groups`` are indexed by u_0^{phase}
            groups = level.reshape(2 ** (phase + 1), -1, level.shape[1]).max(axis=1)
            pre = np.zeros(yc.shape[0], dtype=np.int64)
            for i in range(phase):
                pre = pre * 2 + u[start : start + chunk, i]
            lanes = np.arange(yc.shape[0])
            out[start : start + chunk, phase] = groups[2 * pre, lanes] - groups[2 * pre + 1, lanes]
            level = groups
    return out


def exact_probability(k: Kernel, u_prefix_plus_bit, y_probs) -> float:
    """Sum over all completions of prod_i W(x_i | y_i), single kernel level.

    ``y_probs[i, c]`` is W(c | y_i).
    """
    l = k.l
    head = np.asarray(u_prefix_plus_bit, dtype=np.uint8).reshape(-1)
    y_probs = np.asarray(y_probs, dtype=float)
    rest = l - head.size
    suffix = _bits(2**rest, rest)
    u = np.zeros((suffix.shape[0], l), dtype=np.uint8)
    u[:, : head.size] = head
    u[:, head.size :] = suffix
    x = ((u.astype(np.int64) @ k.matrix.astype(np.int64)) & 1)
    probs = y_probs[np.arange(l), x]
    return float(np.prod(probs, axis=1).sum())


def approx_probability(k: Kernel, u_prefix_plus_bit, y_probs) -> float:
    """Max over completions of prod_i W(x_i | y_i)."""
    l = k.l
    head = np.asarray(u_prefix_plus_bit, dtype=np.uint8).reshape(-1)
    y_probs = np.asarray(y_probs, dtype=float)
    rest = l - head.size
    suffix = _bits(2**rest, rest)
    u = np.zeros((suffix.shape[0], l), dtype=np.uint8)
    u[:, : head.size] = head
    u[:, head.size :] = suffix
    x = ((u.astype(np.int64) @ k.matrix.astype(np.int64)) & 1)
    return float(np.prod(y_probs[np.arange(l), x], axis=1).max())
