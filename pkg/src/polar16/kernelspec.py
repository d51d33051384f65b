"""Polarization kernels: named constants, Arikan decomposition, decoding windows."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import binmat
from .binmat import F2

_K1_ROWS = """
1000000000000000
1100000000000000
1010000000000000
1000100000000000
1000000010000000
1100000011000000
1100110000000000
1111000000000000
1000100010001000
1010011011000000
0110110010100000
1111111100000000
1111000011110000
1100110011001100
1010101010101010
1111111111111111
"""

SIGMA = (0, 1, 2, 7, 3, 4, 5, 6, 9, 10, 11, 12, 8, 13, 14, 15)

# BEC scaling exponents, stored as metadata only
SCALING_EXPONENT = {"K1": 3.346, "K2": 3.45}


@dataclass(frozen=True, eq=False)
class Kernel:
    matrix: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        m = binmat.as_binmatrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError("kernel must be square")
        if binmat.rank(m) != m.shape[0]:
            raise binmat.SingularMatrixError("kernel must be invertible over GF(2)")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def l(self) -> int:
        return self.matrix.shape[0]

    @property
    def t(self) -> int:
        """log2 l, or -1 when l is not a power of two."""
        t = self.l.bit_length() - 1
        return t if 2**t == self.l else -1

    def same_matrix(self, other: "Kernel") -> bool:
        return np.array_equal(self.matrix, other.matrix)

    @cached_property
    def plan(self) -> "WindowPlan":
        return window_plan(self)


def k1() -> Kernel:
    return Kernel(binmat.parse_matrix(_K1_ROWS), "K1")


def k2() -> Kernel:
    # row i of K2 is row sigma(i) of K1; the inverse reading does not reproduce the windows
    return Kernel(k1().matrix[list(SIGMA)], "K2")


def arikan(t: int = 4) -> Kernel:
    return Kernel(binmat.kron_power(F2, t), "arikan" if t == 4 else f"F2^{t}")


def is_polarizing(k: Kernel) -> bool:
    """True unless some column permutation makes the matrix upper-triangular.

    Rows keep their order, so reading them bottom-up each row of an
    upper-triangular arrangement must add exactly one new column.
    """
    used: set[int] = set()
    for row in k.matrix[::-1]:
        new = set(np.flatnonzero(row).tolist()) - used
        if len(new) != 1:
            return True
        used |= new
    return False


def decompose(k: Kernel) -> np.ndarray:
    """T with T @ F2^{(x)t} = K over GF(2)."""
    if k.t < 0:
        raise ValueError(f"kernel size {k.l} is not a power of two")
    return binmat.multiply(k.matrix, binmat.kron_power(F2, k.t))


@dataclass(frozen=True)
class PhaseConstraint:
    """u_phase = sum(u_s for s in u_terms) + sum(v_t for t in v_terms)."""

    phase: int
    u_terms: tuple[int, ...]
    v_terms: tuple[int, ...]

    @property
    def j(self) -> int:
        return max(self.v_terms)

    def text(self) -> str:
        terms = [f"u{s}" for s in self.u_terms] + [f"v{t}" for t in self.v_terms]
        return f"u{self.phase} = " + "+".join(terms)


@dataclass(frozen=True)
class WindowPlan:
    kernel: Kernel
    theta: np.ndarray
    constraints: tuple[PhaseConstraint, ...]
    h: tuple[int, ...]
    windows: tuple[tuple[int, ...], ...]
    t_inverse: np.ndarray = field(repr=False)

    @property
    def j(self) -> tuple[int, ...]:
        return tuple(c.j for c in self.constraints)

    def v_expression(self, phase: int) -> tuple[int, ...]:
        """Indices t with u_phase = sum of v_t, read off T^{-1}."""
        return tuple(int(t) for t in np.flatnonzero(self.t_inverse[:, phase]))

    def v_expression_text(self, phase: int) -> str:
        return f"u{phase} = " + "+".join(f"v{t}" for t in self.v_expression(phase))

    def max_window(self) -> int:
        return max(len(w) for w in self.windows)


def window_plan(k: Kernel) -> WindowPlan:
    l = k.l
    T = decompose(k)
    S = T.T[:, ::-1]
    theta = binmat.min_span_form(np.concatenate([S, binmat.identity(l)], axis=1))
    z = [last for _, last in binmat.spans(theta)]
    constraints = []
    for i in range(l):
        row = theta[l - 1 - i]
        if z[l - 1 - i] < l:
            raise binmat.SingularMatrixError("constraint row has no Arikan-input term")
        u_terms = tuple(s for s in range(i) if row[l - 1 - s])
        v_terms = tuple(t for t in range(l) if row[l + t])
        constraints.append(PhaseConstraint(i, u_terms, v_terms))
    js = [c.j for c in constraints]
    h = tuple(int(x) for x in np.maximum.accumulate(js))
    windows = tuple(
        tuple(sorted(set(range(h[i] + 1)) - set(js[: i + 1]))) for i in range(l)
    )
    return WindowPlan(k, theta, tuple(constraints), h, windows, binmat.invert(T))


@dataclass(frozen=True)
class KernelProfile:
    partial_distances: tuple[int, ...]
    polarization_rate: float


def partial_distances(k: Kernel) -> tuple[int, ...]:
    """d_i = min weight of row_i + (any combination of rows i+1..l-1)."""
    m = k.matrix.astype(np.uint8)
    l = k.l
    out = []
    for i in range(l):
        below = m[i + 1 :]
        if below.shape[0] == 0:
            out.append(int(m[i].sum()))
            continue
        coeffs = _all_bit_vectors(below.shape[0])
        span = (coeffs.astype(np.int64) @ below.astype(np.int64)) & 1
        out.append(int(((span ^ m[i]).sum(axis=1)).min()))
    return tuple(out)


def _all_bit_vectors(width: int) -> np.ndarray:
    idx = np.arange(2**width, dtype=np.int64)
    return ((idx[:, None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)


def profile(k: Kernel) -> KernelProfile:
    d = partial_distances(k)
    rate = sum(math.log(x, k.l) for x in d) / k.l
    return KernelProfile(d, rate)


def resolve_kernel(spec: str) -> Kernel:
    """Kernel from a CLI name: k1, k2, arikan, or ``file:<path>`` / a path."""
    key = spec.lower()
    if key == "k1":
        return k1()
    if key == "k2":
        return k2()
    if key == "arikan":
        return arikan(4)
    if key == "f2":
        return arikan(1)
    path = spec[5:] if spec.startswith("file:") else spec
    return Kernel(binmat.load_matrix(path), path)
