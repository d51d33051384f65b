"""Min-sum LLR recursions for the Arikan transform F2^{(x)t}.

Conventions: ``c = v @ F2^{(x)t}``; a node of size N splits its LLRs into
halves ``y[:N/2]`` and ``y[N/2:]``. The left child sees ``Q(y_i, y_{i+N/2})``,
the right child ``P(y_i, y_{i+N/2}, x_i)`` where ``x`` re-encodes the
left child's inputs. sgn(0) is taken as +1 everywhere.

Batched arrays keep the batch (lane) axis first; operation counts are
reported per lane.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

LLR_CLIP = 1e6


def q_fn(a, b):
    """Q(a, b) = sgn(a) sgn(b) min(|a|, |b|)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sign = np.where((a < 0) ^ (b < 0), -1.0, 1.0)
    out = sign * np.minimum(np.abs(a), np.abs(b))
    return out if out.ndim else float(out)


def p_fn(a, b, c):
    """P(a, b, c) = (-1)^c a + b."""
    a = np.asarray(a, dtype=float)
    out = np.where(np.asarray(c) & 1, -a, a) + b
    return out if np.ndim(out) else float(out)


def hard(s):
    """Hard decision with sgn(0) = +1, i.e. 0 for s >= 0."""
    return (np.asarray(s) < 0).astype(np.uint8)


def tau(s, v):
    """Path-score penalty: 0 if the hard decision on s equals v, else -|s|."""
    s = np.asarray(s, dtype=float)
    out = np.where(hard(s) == (np.asarray(v) & 1), 0.0, -np.abs(s))
    return out if out.ndim else float(out)


def score_update(r, s, v):
    return r + tau(s, v)


def clip_llr(y):
    return np.clip(y, -LLR_CLIP, LLR_CLIP)


class OpCounter:
    """Per-lane tally of real additions and comparisons.

    Sign flips, XORs, indexing and scaling by powers of two are free.
    """

    def __init__(self):
        self.additions = 0
        self.comparisons = 0
        self.phase = None
        self.by_phase: dict[int, int] = defaultdict(int)

    def total(self) -> int:
        return self.additions + self.comparisons

    def reset(self):
        self.__init__()

    def start_phase(self, phase: int):
        self.phase = phase
        self.by_phase.setdefault(phase, 0)

    def _tally(self, kind: str, n: int):
        if kind == "add":
            self.additions += n
        else:
            self.comparisons += n
        if self.phase is not None:
            self.by_phase[self.phase] += n

    @staticmethod
    def _lanes(a) -> int:
        a = np.asarray(a)
        return int(np.prod(a.shape[1:])) if a.ndim > 1 else 1

    # counted primitives; arrays carry the lane axis first
    def q(self, a, b):
        out = _q(a, b)
        self._tally("cmp", self._lanes(out))
        return out

    def p(self, a, b, c):
        out = _p(a, b, c)
        self._tally("add", self._lanes(out))
        return out

    def add(self, a, b):
        out = a + b
        self._tally("add", self._lanes(out))
        return out

    def sub(self, a, b):
        out = a - b
        self._tally("add", self._lanes(out))
        return out

    def maximum(self, a, b):
        out = np.maximum(a, b)
        self._tally("cmp", self._lanes(out))
        return out

    def count(self, kind: str, n: int):
        self._tally(kind, n)


def _q(a, b):
    sign = np.where((a < 0) ^ (b < 0), -1.0, 1.0)
    return sign * np.minimum(np.abs(a), np.abs(b))


def _p(a, b, c):
    return np.where(c, -a, a) + b


def polar_encode(v: np.ndarray) -> np.ndarray:
    """Rows of ``v`` (last axis, length 2^t) times F2^{(x)t} over GF(2)."""
    x = np.array(v, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    half = n // 2
    while half >= 1:
        # F2 (x) F2^{(x)(t-1)}: first half ^= second half, at every scale
        shaped = x.reshape(x.shape[:-1] + (n // (2 * half), 2, half))
        shaped[..., 0, :] ^= shaped[..., 1, :]
        half //= 2
    return x


def phase_cost(i: int, n: int) -> int:
    """Operations to obtain S^{(i)} given the cached path to S^{(i-1)}."""
    if i == 0:
        return n - 1
    tz = (i & -i).bit_length() - 1
    return 2 ** (tz + 1) - 1


def path_llrs(y: np.ndarray, v: np.ndarray, count: int | None = None, counter=None) -> np.ndarray:
    """All S^{(b)}(v_0^{b-1}, y) for b < count, for lanes of full vectors v.

    ``y`` has shape (..., N), ``v`` broadcasts against it. Only the nodes
    needed for the first ``count`` phases are evaluated, so the counted
    cost equals ``sum(phase_cost(b) for b < count)``.
    """
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=np.uint8)
    n = y.shape[-1]
    if count is None:
        count = n
    shape = np.broadcast_shapes(y.shape[:-1], v.shape[:-1])
    y = np.broadcast_to(y, shape + (n,))
    v = np.broadcast_to(v, shape + (n,))
    out = np.zeros(shape + (count,))
    _path_rec(y, v, count, out, 0, counter)
    return out


def _path_rec(y, v, count, out, offset, counter):
    n = y.shape[-1]
    if n == 1:
        out[..., offset] = y[..., 0]
        return
    half = n // 2
    a, b = y[..., :half], y[..., half:]
    left = _q(a, b)
    if counter is not None:
        counter.count("cmp", half)
    _path_rec(left, v[..., :half], min(count, half), out, offset, counter)
    if count > half:
        x = polar_encode(v[..., :half])
        right = _p(a, b, x)
        if counter is not None:
            counter.count("add", half)
        _path_rec(right, v[..., half:], count - half, out, offset + half, counter)


def path_score(y, v, count=None, counter=None):
    """R(v_0^{count-1} | y) from R(empty) = 0 via chained tau penalties."""
    v = np.asarray(v, dtype=np.uint8)
    n = np.shape(y)[-1]
    if count is None:
        count = n
    s = path_llrs(y, v, count, counter)
    pen = np.where(hard(s) == v[..., :count], 0.0, -np.abs(s))
    r = np.zeros(pen.shape[:-1])
    for i in range(count):
        r = r + pen[..., i]
    if counter is not None:
        counter.count("add", count)
    return r


class PhaseOrderError(RuntimeError):
    """A phase was requested out of successive-cancellation order."""


class LayeredLlrState:
    """Incremental SC state of one F2^{(x)t} transform per lane.

    ``llr[d]`` holds the node at depth d on the current path (size 2^{t-d});
    ``v`` holds decided inputs. Phase i may be evaluated once v_0^{i-1}
    has been decided.
    """

    def __init__(self, y, counter: OpCounter | None = None):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        self.n = y.shape[1]
        self.t = self.n.bit_length() - 1
        if 2**self.t != self.n:
            raise ValueError("transform size must be a power of two")
        self.batch = y.shape[0]
        self.counter = counter
        self.llr = [y.copy()] + [None] * self.t
        self.v = np.zeros((self.batch, self.n), dtype=np.uint8)
        self.decided = 0
        self.computed = -1  # last phase whose path is cached

    def _q(self, a, b):
        return self.counter.q(a, b) if self.counter else _q(a, b)

    def _p(self, a, b, c):
        return self.counter.p(a, b, c) if self.counter else _p(a, b, c)

    def llr_at(self, i: int) -> np.ndarray:
        if i != self.decided:
            raise PhaseOrderError(f"phase {i} requested with {self.decided} inputs decided")
        if self.computed == i:
            return self.llr[self.t][:, 0]
        if i == 0:
            start = 0
        else:
            tz = (i & -i).bit_length() - 1
            d = self.t - 1 - tz  # parent of the first node that changes
            parent = self.llr[d]
            half = parent.shape[1] // 2
            x = polar_encode(self.v[:, i - half : i])
            self.llr[d + 1] = self._p(parent[:, :half], parent[:, half:], x)
            start = d + 1
        for d in range(start, self.t):
            node = self.llr[d]
            half = node.shape[1] // 2
            self.llr[d + 1] = self._q(node[:, :half], node[:, half:])
        self.computed = i
        return self.llr[self.t][:, 0]

    def decide(self, bits):
        if self.decided >= self.n:
            raise PhaseOrderError("all inputs already decided")
        self.v[:, self.decided] = np.asarray(bits, dtype=np.uint8)
        self.decided += 1

    def inject(self, nodes: dict, v_prefix: np.ndarray, computed: int):
        """Install externally computed path nodes ``{depth: array}``."""
        for d, arr in nodes.items():
            self.llr[d] = np.asarray(arr, dtype=float)
        k = v_prefix.shape[1]
        self.v[:, :k] = v_prefix
        self.decided = k
        self.computed = computed

    def take(self, idx):
        self.llr = [a[idx] if a is not None else None for a in self.llr]
        self.v = self.v[idx]
        self.batch = self.v.shape[0]


def layer_llr(state: LayeredLlrState, i: int, v_prefix) -> np.ndarray:
    """S_t^{(i)}(v_prefix, y), advancing ``state`` and reusing its cached path."""
    v_prefix = np.atleast_2d(np.asarray(v_prefix, dtype=np.uint8))
    if v_prefix.shape[1] != i:
        raise ValueError("prefix length must equal the phase")
    if i < state.decided or np.any(state.v[:, : state.decided] != v_prefix[:, : state.decided]):
        raise PhaseOrderError("prefix conflicts with cached partial sums")
    while state.decided < i:
        state.llr_at(state.decided)
        state.decide(v_prefix[:, state.decided])
    return state.llr_at(i)
