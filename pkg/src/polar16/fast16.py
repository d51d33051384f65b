"""Reduced-complexity processors for the 16x16 kernels K1 and K2.

Both processors evaluate exactly the same LLRs as the generic window
processor, but share work between window candidates:

* path scores of a whole Reed-Muller coset of candidates come from one fast
  Hadamard transform of layer-1 (K1) or layer-2 (K2) LLRs;
* the intermediate Arikan LLRs are evaluated once per distinct partial-sum
  pattern (arrays L, X, Y, Z and Ybar) instead of once per candidate;
* maxima of path scores are kept in trees, so that later phases of the same
  window read their LLR with a single subtraction.

Costing: one count per real addition/subtraction and per comparison. Sign
flips, XORs, indexing, copies and halving are free. With this convention
the per-phase counts are input independent and total 447 (K1), 181 (K2).

Candidates of a window are indexed lexicographically by their free Arikan
inputs; e.g. for K1 ``cand = 8 v3 + 4 v5 + 2 v6 + v7``.
"""

from __future__ import annotations

import numpy as np

from .arikan import LayeredLlrState, OpCounter, PhaseOrderError, hard, polar_encode
from .binmat import F2, kron_power
from .kernelspec import Kernel, k1, k2

K1_COSTS = (15, 1, 3, 21, 127, 48, 95, 1, 127, 1, 1, 1, 1, 1, 3, 1)
K2_COSTS = (15, 1, 3, 1, 7, 67, 24, 47, 1, 1, 1, 1, 7, 1, 3, 1)

_F3 = kron_power(F2, 3)
_F2x2 = kron_power(F2, 2)


def fht(s, counter: OpCounter | None = None) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis.

    ``out[k] = sum_i (-1)^{popcount(i & k)} s[i]``; n log2 n additions.
    """
    x = np.array(s, dtype=float, copy=True)
    n = x.shape[-1]
    h = 1
    while h < n:
        shaped = x.reshape(x.shape[:-1] + (n // (2 * h), 2, h))
        a = shaped[..., 0, :].copy()
        b = shaped[..., 1, :]
        shaped[..., 0, :] = a + b
        shaped[..., 1, :] = a - b
        h *= 2
    if counter is not None:
        counter.count("add", n * (n.bit_length() - 1))
    return x


def fht8(s, counter: OpCounter | None = None) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape[-1] != 8:
        raise ValueError("fht8 takes 8 values")
    return fht(s, counter)


def _coset_map(rows: np.ndarray, free: np.ndarray):
    """For candidate free bits, the FHT index and sign of their coset word.

    ``rows`` are the generator rows of the free inputs; word = free @ rows.
    Returns (word bits, fht index, sign parity) with
    (-1)^{word_i} = (-1)^{parity} (-1)^{popcount(i & index)}.
    """
    words = (free.astype(int) @ rows.astype(int)) & 1
    n = rows.shape[1]
    i = np.arange(n)
    index = np.zeros(len(free), dtype=np.int64)
    parity = np.zeros(len(free), dtype=np.uint8)
    for c, w in enumerate(words):
        for k in range(n):
            chars = np.array([bin(x & k).count("1") & 1 for x in i])
            diff = w ^ chars
            if np.all(diff == diff[0]):
                index[c], parity[c] = k, diff[0]
                break
        else:
            raise AssertionError("candidate words do not form a first-order RM coset")
    return words.astype(np.uint8), index, parity


def _free_bits(width: int) -> np.ndarray:
    idx = np.arange(2**width)
    return ((idx[:, None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)


def _cand_table(index, parity, n):
    """Candidate whose coset word has the given FHT index and sign parity."""
    table = np.full((n, 2), -1, dtype=np.int64)
    for c, (k, p) in enumerate(zip(index, parity)):
        table[k, p] = c
    return table


_K1_FREE = _free_bits(4)  # columns: v3, v5, v6, v7
_K1_COSET = _coset_map(_F3[[3, 5, 6, 7]], _K1_FREE)
_K2_FREE = _free_bits(3)  # columns: v5, v6, v7
_K2_COSET = _coset_map(_F2x2[[1, 2, 3]], _K2_FREE)


def _k1_groups():
    v5, v6 = _K1_FREE[:, 1], _K1_FREE[:, 2]
    cand = np.array([[[8 * u7 + r for r in range(8)] for u7 in (0, 1)] for _ in (0, 1)])
    v10 = np.array(
        [[[u6 ^ v5[8 * u7 + r] ^ v6[8 * u7 + r] for r in range(8)] for u7 in (0, 1)] for u6 in (0, 1)]
    )
    return cand, v10


def _k2_tree_cands():
    leaf = _free_bits(3)
    return np.array([[4 * (b ^ lf[0] ^ lf[1]) + 2 * lf[0] + lf[2] for lf in leaf] for b in (0, 1)])


def _pick(arr, idx):
    """arr[lane, idx[lane], ...] with idx of shape (batch,) or (batch, m)."""
    idx = np.asarray(idx, dtype=np.int64)
    squeeze = idx.ndim == 1
    if squeeze:
        idx = idx[:, None]
    extra = arr.ndim - 2
    out = np.take_along_axis(arr, idx.reshape(idx.shape + (1,) * extra), axis=1)
    return out[:, 0] if squeeze else out


def _max_tree(leaves: np.ndarray, counter: OpCounter) -> list[np.ndarray]:
    """Levels of pairwise maxima, root first; ``leaves`` has shape (..., 2^d)."""
    levels = [leaves]
    cur = leaves
    while cur.shape[-1] > 1:
        cur = counter.maximum(cur[..., 0::2], cur[..., 1::2])
        levels.append(cur)
    return levels[::-1]


def _argmax_count(values: np.ndarray, counter: OpCounter):
    """Max and first argmax along the last axis; n-1 comparisons."""
    counter.count("cmp", values.shape[-1] - 1)
    arg = np.argmax(values, axis=-1)
    return np.take_along_axis(values, arg[..., None], axis=-1)[..., 0], arg


class Fast16Processor:
    """Shared machinery: plain Arikan phases, phase order, lane selection."""

    kernel_tag = ""
    costs: tuple[int, ...] = ()
    sc_phases: frozenset[int] = frozenset()  # phases decided through the plain Arikan state

    def __init__(self, counter: OpCounter | None = None):
        self.counter = counter if counter is not None else OpCounter()
        self.kernel: Kernel = k1() if self.kernel_tag == "K1" else k2()
        self.l = 16
        self.y = None
        self.phase = 0
        self._pending = False

    def reset(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != 16:
            raise ValueError("expected 16 channel LLRs per lane")
        self.y = y
        self.u = np.zeros(y.shape, dtype=np.uint8)
        self.sc = LayeredLlrState(y, self.counter)
        self.phase = 0
        self._pending = False
        self.arrays: dict[str, np.ndarray] = {}

    @property
    def batch(self) -> int:
        return self.y.shape[0]

    def process_phase(self, phase: int) -> np.ndarray:
        if self.y is None or phase != self.phase or self._pending:
            raise PhaseOrderError(f"phase {phase} out of order (at {self.phase})")
        self.counter.start_phase(phase)
        out = getattr(self, f"_phase{phase}", None)
        llr = out() if out is not None else self._plain(phase)
        self._pending = True
        return llr

    def _plain(self, phase):
        return self.sc.llr_at(phase).copy()

    def decide(self, bits):
        if not self._pending:
            raise PhaseOrderError("decide() before process_phase()")
        self.u[:, self.phase] = np.asarray(bits, dtype=np.uint8)
        if self.phase in self.sc_phases:
            self.sc.decide(bits)
        self.phase += 1
        self._pending = False

    def take(self, idx):
        self.y = self.y[idx]
        self.u = self.u[idx]
        self.sc.take(idx)
        self.arrays = {
            k: [lvl[idx] for lvl in v] if isinstance(v, list) else v[idx] for k, v in self.arrays.items()
        }

    # helpers shared by both schedules
    def _scores_both(self, base, s):
        """R for v = 0 and v = 1 after an LLR s: one addition per lane entry."""
        bad = self.counter.sub(base, np.abs(s))
        h = hard(s)
        r = np.empty(base.shape + (2,))
        r[..., 0] = np.where(h == 0, base, bad)
        r[..., 1] = np.where(h == 1, base, bad)
        return r


class K1Processor(Fast16Processor):
    """Schedule for K1 (max window 4, 447 operations per kernel pass)."""

    kernel_tag = "K1"
    costs = K1_COSTS
    sc_phases = frozenset({0, 1, 2, 13, 14, 15})

    _FREE = _K1_FREE
    _V3, _V5, _V6, _V7 = _K1_FREE.T
    _W8, _FHT_IDX, _FHT_PAR = _K1_COSET
    _CAND_TABLE = _cand_table(*_K1_COSET[1:], 8)

    def _phase3(self):
        ctr = self.counter
        s3 = self.sc.llr_at(3)
        r3 = self._scores_both(np.zeros(self.batch), s3)  # (batch, v3)
        parent = self.sc.llr[1]
        v = np.zeros((self.batch, 2, 4), dtype=np.uint8)
        v[:, :, :3] = self.u[:, None, :3]
        v[:, 1, 3] = 1
        x = polar_encode(v)
        node = ctr.p(parent[:, None, :4], parent[:, None, 4:], x)
        node = ctr.q(node[..., :2], node[..., 2:])
        s4 = ctr.q(node[..., 0:1], node[..., 1:2])[..., 0]
        r4 = self._scores_both(r3, s4)  # (batch, v3, v4)
        m = ctr.maximum(r4[:, 0, :], r4[:, 1, :])
        return ctr.sub(m[:, 0], m[:, 1])

    def _phase4(self):
        ctr = self.counter
        u = self.u
        lanes = np.arange(self.batch)
        v_fixed = np.zeros((self.batch, 8), dtype=np.uint8)
        v_fixed[:, [0, 1, 2, 4]] = u[:, [0, 1, 2, 3]]
        c_fixed = polar_encode(v_fixed)
        c = c_fixed[:, None, :] ^ self._W8[None]  # (batch, 16, 8)

        # path scores of the RM(1,3) coset from one FHT of layer-1 LLRs
        s = self.sc.llr[1]
        sh = fht8(np.where(c_fixed == 1, -s, s), ctr)
        sign = np.where(self._FHT_PAR == 1, -1.0, 1.0)
        r7 = 0.5 * sign[None] * sh[:, self._FHT_IDX]
        _, kstar = _argmax_count(np.abs(sh), ctr)
        par = (sh[lanes, kstar] < 0).astype(np.int64)
        cstar = self._CAND_TABLE[kstar, par]
        rmax = 0.5 * np.abs(sh[lanes, kstar])

        # L[4i + 2h + bit] = P(y_{i+4h}, y_{i+4h+8}, bit)
        m_idx = np.array([i + 4 * h for i in range(4) for h in range(2) for _ in range(2)])
        bit = np.tile([0, 1], 8).astype(np.uint8)
        lvals = ctr.p(self.y[:, m_idx], self.y[:, m_idx + 8], bit[None])
        # X[i][2a + b] = Q(L[4i + a], L[4i + 2 + b]) -> pattern (c_i, c_{i+4}) = (a, b)
        ia = np.array([[4 * i + (j >> 1) for j in range(4)] for i in range(4)])
        ib = np.array([[4 * i + 2 + (j & 1) for j in range(4)] for i in range(4)])
        X = ctr.q(lvals[:, ia], lvals[:, ib])  # (batch, 4, 4)
        # Y[i][j + 4k] = Q(X[i][j ^ 3k ^ d_i], X[i+2][j]) over the coset's parity class
        delta = np.stack(
            [c_fixed[:, i] ^ c_fixed[:, i + 2] ^ c_fixed[:, i + 4] ^ c_fixed[:, i + 6] for i in (0, 1)], axis=1
        )
        jj = np.arange(8) % 4
        kk = np.arange(8) // 4
        Y = np.empty((self.batch, 2, 8))
        for i in (0, 1):
            p_idx = jj[None, :] ^ (3 * kk[None, :]) ^ delta[:, i : i + 1]
            left = np.take_along_axis(X[:, i], p_idx, axis=1)
            Y[:, i] = ctr.q(left, X[:, i + 2][:, jj])
        # each candidate's pair of Y entries
        yidx = []
        for i in (0, 1):
            p = 2 * c[..., i] + c[..., i + 4]
            q = 2 * c[..., i + 2] + c[..., i + 6]
            k = ((p ^ q ^ delta[:, i : i + 1]) == 3).astype(np.int64)
            yidx.append(q + 4 * k)
        d3b4 = np.stack([_pick(Y[:, 0], yidx[0]), _pick(Y[:, 1], yidx[1])], axis=-1)  # (batch, 16, 2)
        Z = ctr.q(d3b4[..., 0], d3b4[..., 1])
        r8 = self._scores_both(r7, Z)  # (batch, cand, v8)

        bhat = hard(Z[lanes, cstar]).astype(np.int64)
        other, oarg = _argmax_count(r8[lanes, :, 1 - bhat], ctr)
        best = np.empty((self.batch, 2))
        arg = np.empty((self.batch, 2), dtype=np.int64)
        best[lanes, bhat], arg[lanes, bhat] = rmax, cstar
        best[lanes, 1 - bhat], arg[lanes, 1 - bhat] = other, oarg
        d2b2 = np.stack([_pick(X[:, i], 2 * c[..., i] + c[..., i + 4]) for i in range(4)], axis=-1)
        self.arrays.update(
            c=c, L=lvals, X=X, Y=Y, Z=Z, d3b4=d3b4, d2b2=d2b2, r8=r8, best8=best, arg8=arg
        )
        return ctr.sub(best[:, 0], best[:, 1])

    def _phase5(self):
        ctr = self.counter
        a = self.arrays
        lanes = np.arange(self.batch)
        v8 = self.u[:, 4].astype(np.int64)
        s9 = ctr.p(a["d3b4"][..., 0], a["d3b4"][..., 1], v8[:, None])
        base = a["r8"][lanes, :, v8]
        r9 = self._scores_both(base, s9)  # (batch, cand, v9)
        cdag = a["arg8"][lanes, v8]
        v9dag = hard(s9[lanes, cdag])
        bhat = (self._V6[cdag] ^ v9dag).astype(np.int64)
        known = a["best8"][lanes, v8]
        v9_other = (1 - bhat)[:, None] ^ self._V6[None, :]
        other, _ = _argmax_count(np.take_along_axis(r9, v9_other[..., None], axis=2)[..., 0], ctr)
        best = np.empty((self.batch, 2))
        best[lanes, bhat] = known
        best[lanes, 1 - bhat] = other
        a.update(r9=r9)
        return ctr.sub(best[:, 0], best[:, 1])

    # leaves of the phase-6 groups: (u6, u7, 8 entries) -> (cand, v10)
    _G_CAND, _G_V10 = _k1_groups()

    def _phase6(self):
        ctr = self.counter
        a = self.arrays
        v8 = self.u[:, 4]
        v9 = self.u[:, 5][:, None] ^ self._V6[None, :]  # (batch, 16)
        x0 = v8[:, None] ^ v9
        x1 = v9
        d2b2 = a["d2b2"]
        d3b5 = ctr.p(d2b2[..., [0, 1]], d2b2[..., [2, 3]], np.stack([x0, x1], axis=-1))
        s10 = ctr.q(d3b5[..., 0], d3b5[..., 1])
        base = np.take_along_axis(a["r9"], v9[..., None].astype(np.int64), axis=2)[..., 0]
        r10 = self._scores_both(base, s10)  # (batch, cand, v10)
        leaves = r10[:, self._G_CAND, self._G_V10]  # (batch, u6, u7, 8)
        g = _max_tree(leaves, ctr)[0][..., 0]  # (batch, u6, u7)
        m = ctr.maximum(g[..., 0], g[..., 1])
        a.update(d3b5=d3b5, r10=r10, g7=g)
        return ctr.sub(m[:, 0], m[:, 1])

    def _phase7(self):
        g = self.arrays["g7"]
        lanes = np.arange(self.batch)
        u6 = self.u[:, 6]
        return self.counter.sub(g[lanes, u6, 0], g[lanes, u6, 1])

    # the 16 vectors of phase 8: vec = 2 * c8 + v11 with c8 = 4 v5 + 2 v6 + v7
    _VEC = _free_bits(4)  # columns: v5, v6, v7, v11

    def _phase8(self):
        ctr = self.counter
        a = self.arrays
        lanes = np.arange(self.batch)
        u = self.u
        v3 = u[:, 7].astype(np.int64)
        cand = 8 * v3[:, None] + np.arange(8)[None, :]  # (batch, 8)
        v5, v6 = self._V5[cand], self._V6[cand]
        v8 = u[:, 4][:, None]
        v9 = u[:, 5][:, None] ^ v6
        v10 = u[:, 6][:, None] ^ v5 ^ v6
        d3b5 = _pick(a["d3b5"], cand)  # (batch, 8, 2)
        s11 = ctr.p(d3b5[..., 0], d3b5[..., 1], v10)
        base = np.take_along_axis(_pick(a["r10"], cand), v10[..., None].astype(np.int64), axis=2)[..., 0]
        r11 = self._scores_both(base, s11).reshape(self.batch, 16)  # vec = 2 c8 + v11

        # d2b3[i] = P(d1b1[i], d1b1[i+4], x_i); (c_i, c_{i+4}) has a fixed XOR within the window
        c = _pick(a["c"], cand)  # (batch, 8, 8)
        lv = a["L"]
        delta = c[:, 0, :4] ^ c[:, 0, 4:]  # (batch, 4)
        ci = np.arange(2)[None, :, None]
        xi = np.arange(2)[None, None, :]
        T2 = np.empty((self.batch, 4, 2, 2))
        for i in range(4):
            # L layout: index 4 (m mod 4) + 2 (m div 4) + bit
            top = lv[:, 4 * i][:, None, None] * (ci == 0) + lv[:, 4 * i + 1][:, None, None] * (ci == 1)
            other_bit = ci ^ delta[:, i][:, None, None]
            bot = np.where(other_bit == 0, lv[:, 4 * i + 2][:, None, None], lv[:, 4 * i + 3][:, None, None])
            T2[:, i] = ctr.p(np.broadcast_to(top, (self.batch, 2, 2)), np.broadcast_to(bot, (self.batch, 2, 2)), xi)
        vec = self._VEC
        c8 = (4 * vec[:, 0] + 2 * vec[:, 1] + vec[:, 2]).astype(np.int64)
        v11 = vec[:, 3][None, :]
        v5v, v6v = self._V5[cand][:, c8], self._V6[cand][:, c8]
        v9v = u[:, 5][:, None] ^ v6v
        v10v = u[:, 6][:, None] ^ v5v ^ v6v
        x = np.stack([v8 ^ v9v ^ v10v ^ v11, v9v ^ v11, v10v ^ v11, np.broadcast_to(v11, v9v.shape)], axis=-1)
        cv = c[:, c8, :4]  # (batch, 16, 4)
        d2b3 = np.stack(
            [T2[lanes[:, None], i, cv[..., i], x[..., i]] for i in range(4)], axis=-1
        )  # (batch, 16, 4)
        d3b6 = ctr.q(d2b3[..., [0, 1]], d2b3[..., [2, 3]])
        s12 = ctr.q(d3b6[..., 0], d3b6[..., 1])
        r12 = self._scores_both(r11, s12)  # (batch, vec, v12)

        # leaves ordered by (u9, u10, u11, u12) = (v6, u6 ^ u9 ^ v5, v7, v11)
        leaf = np.arange(16)
        u9, u10, u11, u12 = leaf >> 3 & 1, leaf >> 2 & 1, leaf >> 1 & 1, leaf & 1
        lv6 = u9[None, :]
        lv5 = u10[None, :] ^ u[:, 6][:, None] ^ u9[None, :]
        lvec = (2 * (4 * lv5 + 2 * lv6 + u11[None, :]) + u12[None, :]).astype(np.int64)
        leaves = np.stack([np.take_along_axis(r12[..., b], lvec, axis=1) for b in (0, 1)], axis=1)
        tree = _max_tree(leaves, ctr)  # tree[d]: (batch, 2, 2^d)
        a.update(d2b3=d2b3, d3b6=d3b6, tree12=tree)
        return ctr.sub(tree[0][:, 0, 0], tree[0][:, 1, 0])

    def _tree_llr(self, depth, node):
        tree = self.arrays["tree12"]
        lanes = np.arange(self.batch)
        u8 = self.u[:, 8]
        lvl = tree[depth]
        return self.counter.sub(lvl[lanes, u8, 2 * node], lvl[lanes, u8, 2 * node + 1])

    def _phase9(self):
        return self._tree_llr(1, np.zeros(self.batch, dtype=np.int64))

    def _phase10(self):
        return self._tree_llr(2, self.u[:, 9].astype(np.int64))

    def _phase11(self):
        return self._tree_llr(3, (2 * self.u[:, 9] + self.u[:, 10]).astype(np.int64))

    def _phase12(self):
        u = self.u.astype(np.int64)
        return self._tree_llr(4, 4 * u[:, 9] + 2 * u[:, 10] + u[:, 11])

    def _phase13(self):
        u = self.u
        v6 = u[:, 9]
        v5 = u[:, 10] ^ u[:, 6] ^ u[:, 9]
        v7 = u[:, 11]
        v11 = u[:, 12]
        vec = (2 * (4 * v5.astype(np.int64) + 2 * v6 + v7) + v11).astype(np.int64)
        v = np.stack(
            [u[:, 0], u[:, 1], u[:, 2], u[:, 7], u[:, 3], v5, v6, v7, u[:, 4],
             u[:, 5] ^ v6, u[:, 6] ^ v5 ^ v6, v11, u[:, 8]], axis=1,
        ).astype(np.uint8)
        a = self.arrays
        self.sc.inject({3: _pick(a["d3b6"], vec), 2: _pick(a["d2b3"], vec)}, v, computed=12)
        return self.sc.llr_at(13).copy()


class K2Processor(Fast16Processor):
    """Schedule for K2 (max window 3, 181 operations per kernel pass)."""

    kernel_tag = "K2"
    costs = K2_COSTS
    sc_phases = frozenset({0, 1, 2, 3, 4, 11, 12, 13, 14, 15})

    _FREE = _K2_FREE
    _V5, _V6, _V7 = _K2_FREE.T
    _W4, _FHT_IDX, _FHT_PAR = _K2_COSET
    _W8 = ((_K2_FREE.astype(int) @ _F3[[5, 6, 7]].astype(int)) & 1).astype(np.uint8)
    _CAND_TABLE = _cand_table(*_K2_COSET[1:], 4)

    def _phase5(self):
        ctr = self.counter
        u = self.u
        lanes = np.arange(self.batch)
        v_fixed = np.zeros((self.batch, 8), dtype=np.uint8)
        v_fixed[:, :5] = u[:, :5]
        c = polar_encode(v_fixed)[:, None, :] ^ self._W8[None]  # (batch, 8, 8)
        cbar = polar_encode(u[:, :4])

        # scores of v_4^7 over the RM(1,2) coset from the layer-2 node of phase 4
        s = self.sc.llr[2]
        s = np.where(np.arange(4)[None, :] == 0, np.where(u[:, 4:5] == 1, -s, s), s)
        sh = fht(s, ctr)
        sign = np.where(self._FHT_PAR == 1, -1.0, 1.0)
        r7 = 0.5 * sign[None] * sh[:, self._FHT_IDX]
        _, kstar = _argmax_count(np.abs(sh), ctr)
        par = (sh[lanes, kstar] < 0).astype(np.int64)
        cstar = self._CAND_TABLE[kstar, par]
        rmax = 0.5 * np.abs(sh[lanes, kstar])

        # L[i + 8j] = P(y_i, y_{i+8}, j)
        m_idx = np.tile(np.arange(8), 2)
        bit = np.repeat([0, 1], 8).astype(np.uint8)
        lvals = ctr.p(self.y[:, m_idx], self.y[:, m_idx + 8], bit[None])
        # X[i][j] = Q(L[i + 8(j ^ cbar_i)], L[i + 4 + 8j]): c_{i+4} = j, c_i = j ^ cbar_i
        jgrid = np.arange(2)[None, None, :]
        ia = np.arange(4)[None, :, None] + 8 * (jgrid ^ cbar[:, :, None])
        ib = np.broadcast_to(np.arange(4)[None, :, None] + 4 + 8 * jgrid, ia.shape)
        X = ctr.q(
            np.take_along_axis(lvals, ia.reshape(self.batch, -1), axis=1).reshape(self.batch, 4, 2),
            np.take_along_axis(lvals, ib.reshape(self.batch, -1), axis=1).reshape(self.batch, 4, 2),
        )
        # Y[i][2a + b] = Q(X[i][a], X[i+2][b]): (c_{i+4}, c_{i+6}) = (a, b)
        ja = np.arange(4) >> 1
        jb = np.arange(4) & 1
        Y = ctr.q(X[:, [0, 1]][..., ja], X[:, [2, 3]][..., jb])  # (batch, 2, 4)
        y0 = 2 * c[..., 4] + c[..., 6]
        y1 = 2 * c[..., 5] + c[..., 7]
        d3b4 = np.stack([_pick(Y[:, 0], y0), _pick(Y[:, 1], y1)], axis=-1)  # (batch, 8, 2)
        Z = ctr.q(d3b4[..., 0], d3b4[..., 1])
        r8 = self._scores_both(r7, Z)

        bhat = hard(Z[lanes, cstar]).astype(np.int64)
        other, oarg = _argmax_count(r8[lanes, :, 1 - bhat], ctr)
        best = np.empty((self.batch, 2))
        arg = np.empty((self.batch, 2), dtype=np.int64)
        best[lanes, bhat], arg[lanes, bhat] = rmax, cstar
        best[lanes, 1 - bhat], arg[lanes, 1 - bhat] = other, oarg
        d2b2 = np.stack([_pick(X[:, i], c[..., i + 4]) for i in range(4)], axis=-1)  # (batch, 8, 4)
        self.arrays.update(c=c, L=lvals, X=X, Y=Y, Z=Z, d3b4=d3b4, d2b2=d2b2, r8=r8, best8=best, arg8=arg)
        return ctr.sub(best[:, 0], best[:, 1])

    def _phase6(self):
        ctr = self.counter
        a = self.arrays
        lanes = np.arange(self.batch)
        v8 = self.u[:, 5].astype(np.int64)
        s9 = ctr.p(a["d3b4"][..., 0], a["d3b4"][..., 1], v8[:, None])
        r9 = self._scores_both(a["r8"][lanes, :, v8], s9)
        cdag = a["arg8"][lanes, v8]
        bhat = (self._V6[cdag] ^ hard(s9[lanes, cdag])).astype(np.int64)
        v9_other = (1 - bhat)[:, None] ^ self._V6[None, :]
        other, _ = _argmax_count(np.take_along_axis(r9, v9_other[..., None], axis=2)[..., 0], ctr)
        best = np.empty((self.batch, 2))
        best[lanes, bhat] = a["best8"][lanes, v8]
        best[lanes, 1 - bhat] = other
        a.update(r9=r9)
        return ctr.sub(best[:, 0], best[:, 1])

    # leaves for u7 = b ordered by (u8, u9, u10) = (v6, u7 ^ u8 ^ v5, v7)
    _T_CAND = _k2_tree_cands()

    def _phase7(self):
        ctr = self.counter
        a = self.arrays
        v8 = self.u[:, 5][:, None]
        v9 = self.u[:, 6][:, None] ^ self._V6[None, :]
        d2b2 = a["d2b2"]
        # Ybar: S_3^{(5)} per candidate, honouring v9 = u6 ^ v6
        ybar = ctr.p(d2b2[..., [0, 1]], d2b2[..., [2, 3]], np.stack([v8 ^ v9, v9], axis=-1))
        s10 = ctr.q(ybar[..., 0], ybar[..., 1])
        base = np.take_along_axis(a["r9"], v9[..., None].astype(np.int64), axis=2)[..., 0]
        r10 = self._scores_both(base, s10)  # (batch, cand, v10)
        b = np.arange(2)[:, None]
        v10 = b ^ self._V5[self._T_CAND] ^ self._V6[self._T_CAND]
        leaves = r10[:, self._T_CAND, v10]  # (batch, u7, 8)
        tree = _max_tree(leaves, ctr)
        a.update(ybar=ybar, tree10=tree)
        return ctr.sub(tree[0][:, 0, 0], tree[0][:, 1, 0])

    def _tree_llr(self, depth, node):
        tree = self.arrays["tree10"]
        lanes = np.arange(self.batch)
        u7 = self.u[:, 7]
        lvl = tree[depth]
        return self.counter.sub(lvl[lanes, u7, 2 * node], lvl[lanes, u7, 2 * node + 1])

    def _phase8(self):
        return self._tree_llr(1, np.zeros(self.batch, dtype=np.int64))

    def _phase9(self):
        return self._tree_llr(2, self.u[:, 8].astype(np.int64))

    def _phase10(self):
        return self._tree_llr(3, (2 * self.u[:, 8] + self.u[:, 9]).astype(np.int64))

    def _phase11(self):
        u = self.u
        a = self.arrays
        v6 = u[:, 8]
        v5 = u[:, 9] ^ u[:, 7] ^ u[:, 8]
        v7 = u[:, 10]
        cand = (4 * v5.astype(np.int64) + 2 * v6 + v7).astype(np.int64)
        c = _pick(a["c"], cand)
        d1b1 = np.take_along_axis(a["L"], np.arange(8)[None, :] + 8 * c.astype(np.int64), axis=1)
        v = np.stack(
            [u[:, 0], u[:, 1], u[:, 2], u[:, 3], u[:, 4], v5, v6, v7, u[:, 5],
             u[:, 6] ^ v6, u[:, 7] ^ v5 ^ v6], axis=1,
        ).astype(np.uint8)
        self.sc.inject({3: _pick(a["ybar"], cand), 2: _pick(a["d2b2"], cand), 1: d1b1}, v, computed=10)
        return self.sc.llr_at(11).copy()


def fast16_processor(kernel: Kernel, counter: OpCounter | None = None) -> Fast16Processor:
    if kernel.same_matrix(k1()):
        return K1Processor(counter)
    if kernel.same_matrix(k2()):
        return K2Processor(counter)
    raise ValueError("fast processing exists only for K1 and K2")


def process_phase(state: Fast16Processor, phase: int, u_prefix=None) -> np.ndarray:
    """LLR of kernel input ``phase``; ``u_prefix`` (if given) must match decided inputs."""
    if u_prefix is not None:
        u_prefix = np.atleast_2d(np.asarray(u_prefix, dtype=np.uint8))
        if u_prefix.shape[1] != phase or np.any(state.u[:, :phase] != u_prefix):
            raise PhaseOrderError("prefix does not match the decided kernel inputs")
    return state.process_phase(phase)


def op_report(state: Fast16Processor) -> dict[int, int]:
    """Per-phase operation counts of the last full kernel pass."""
    if state.y is None or state.phase < 16:
        raise PhaseOrderError("all 16 phases must be processed first")
    return {p: state.counter.by_phase[p] for p in range(16)}
