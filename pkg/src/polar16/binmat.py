"""Dense GF(2) matrices.

Matrices are plain 2-D ``numpy.uint8`` arrays holding 0/1 entries. All
functions return fresh arrays and never mutate their inputs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

F2 = np.array([[1, 0], [1, 1]], dtype=np.uint8)


class SingularMatrixError(ValueError):
    """Raised when a GF(2) matrix has deficient rank."""


def as_binmatrix(a) -> np.ndarray:
    """Validate ``a`` and return it as a 2-D uint8 0/1 array."""
    m = np.array(a, dtype=np.int64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if np.any((m != 0) & (m != 1)):
        raise ValueError("binary matrix entries must be 0 or 1")
    return m.astype(np.uint8)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def multiply(a, b) -> np.ndarray:
    a = as_binmatrix(a)
    b = as_binmatrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def vec_mul(v, a) -> np.ndarray:
    """Row vector times matrix over GF(2)."""
    a = as_binmatrix(a)
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (a.shape[0],):
        raise ValueError(f"vector of length {v.shape} does not fit {a.shape}")
    return ((v @ a.astype(np.int64)) & 1).astype(np.uint8)


def kron_power(a, t: int) -> np.ndarray:
    """t-fold Kronecker power; ``kron_power(a, 0)`` is the 1x1 identity."""
    if t < 0:
        raise ValueError("t must be non-negative")
    a = as_binmatrix(a)
    out = np.ones((1, 1), dtype=np.uint8)
    for _ in range(t):
        out = np.kron(out, a)
    return out


def invert(a) -> np.ndarray:
    """Gauss-Jordan inverse over GF(2)."""
    a = as_binmatrix(a)
    n, cols = a.shape
    if n != cols:
        raise ValueError("only square matrices can be inverted")
    aug = np.concatenate([a, identity(n)], axis=1)
    for col in range(n):
        nz = np.nonzero(aug[col:, col])[0]
        if nz.size == 0:
            raise SingularMatrixError("matrix is singular over GF(2)")
        p = col + nz[0]
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        hits = np.nonzero(aug[:, col])[0]
        for r in hits:
            if r != col:
                aug[r] ^= aug[col]
    return aug[:, n:].copy()


def rank(a) -> int:
    m = as_binmatrix(a).copy()
    r = 0
    for col in range(m.shape[1]):
        nz = np.nonzero(m[r:, col])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        m[[r, p]] = m[[p, r]]
        for q in np.nonzero(m[:, col])[0]:
            if q != r:
                m[q] ^= m[r]
        r += 1
        if r == m.shape[0]:
            break
    return r


def _leading(row: np.ndarray) -> int:
    return int(np.flatnonzero(row)[0])


def _trailing(row: np.ndarray) -> int:
    return int(np.flatnonzero(row)[-1])


def min_span_form(theta_prime) -> np.ndarray:
    """Row-reduce an l x 2l matrix to minimum-span form.

    Row ``i`` of the result starts in column ``i`` and ends in column
    ``z_i``, with all ``z_i`` distinct. The row space is unchanged.
    """
    m = as_binmatrix(theta_prime).copy()
    l = m.shape[0]
    if m.shape[1] < l:
        raise ValueError("expected at least as many columns as rows")
    # leading column of row i must be i: forward elimination on the left block
    for col in range(l):
        nz = np.nonzero(m[col:, col])[0]
        if nz.size == 0:
            raise SingularMatrixError("rank deficiency in the left block")
        p = col + nz[0]
        if p != col:
            m[[col, p]] = m[[p, col]]
        for r in range(col + 1, l):
            if m[r, col]:
                m[r] ^= m[col]
    # distinct trailing columns: fold the later-starting row into the earlier one
    while True:
        seen: dict[int, int] = {}
        clash = None
        for r in range(l):
            z = _trailing(m[r])
            if z in seen:
                clash = (seen[z], r)
                break
            seen[z] = r
        if clash is None:
            return m
        early, late = clash
        m[early] ^= m[late]


def spans(m) -> list[tuple[int, int]]:
    """(first, last) nonzero column of each row."""
    m = as_binmatrix(m)
    return [(_leading(row), _trailing(row)) for row in m]


def digit_reversal_perm(l: int, m: int) -> np.ndarray:
    """Permutation of ``range(l**m)`` reversing base-``l`` digits."""
    if l < 2 or m < 1:
        raise ValueError("need l >= 2 and m >= 1")
    idx = np.arange(l**m)
    out = np.zeros_like(idx)
    rest = idx.copy()
    for _ in range(m):
        out = out * l + rest % l
        rest //= l
    return out


def permutation_matrix(perm) -> np.ndarray:
    """Matrix P with ``(x @ P)[perm[i]] = x[i]``."""
    perm = np.asarray(perm)
    p = np.zeros((perm.size, perm.size), dtype=np.uint8)
    p[np.arange(perm.size), perm] = 1
    return p


def parse_matrix(text: str) -> np.ndarray:
    """Parse ``l`` lines of ``l`` characters '0'/'1' (blank lines and '#' comments ignored)."""
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        line = line.replace(" ", "")
        if set(line) - {"0", "1"}:
            raise ValueError(f"invalid matrix row {line!r}")
        rows.append([int(ch) for ch in line])
    if not rows:
        raise ValueError("empty matrix")
    if any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged matrix rows")
    return as_binmatrix(rows)


def load_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def format_matrix(m) -> str:
    m = as_binmatrix(m)
    return "\n".join("".join(str(int(b)) for b in row) for row in m) + "\n"
