import numpy as np
import pytest

from polar16 import binmat
from polar16.kernelspec import (
    SCALING_EXPONENT,
    Kernel,
    arikan,
    decompose,
    is_polarizing,
    k1,
    k2,
    partial_distances,
    profile,
    resolve_kernel,
)


def window_text(w):
    return "{" + ",".join(str(t) for t in w) + "}"


def test_k1_shape_and_last_rows():
    m = k1().matrix
    assert m.shape == (16, 16)
    assert m[15].tolist() == [1] * 16
    assert m[0].tolist() == [1] + [0] * 15


def test_k2_row_permutation():
    assert np.array_equal(k2().matrix[3], k1().matrix[7])
    assert k2().matrix[3].tolist() == [1, 1, 1, 1] + [0] * 12


def test_kernel_is_read_only():
    with pytest.raises(ValueError):
        k1().matrix[0, 0] = 0


def test_singular_kernel_rejected():
    with pytest.raises(binmat.SingularMatrixError):
        Kernel(np.ones((2, 2)))


def test_decompose_roundtrip():
    for k in (k1(), k2(), arikan()):
        t = decompose(k)
        assert np.array_equal(binmat.multiply(t, binmat.kron_power(binmat.F2, 4)), k.matrix)
    assert np.array_equal(decompose(arikan()), binmat.identity(16))


def test_decompose_needs_power_of_two():
    k = Kernel(np.array([[1, 0, 0], [1, 1, 0], [1, 0, 1]]))
    with pytest.raises(ValueError):
        decompose(k)


def test_is_polarizing():
    assert is_polarizing(k1())
    assert is_polarizing(k2())
    assert is_polarizing(Kernel(binmat.F2))
    assert not is_polarizing(Kernel(binmat.identity(4)))
    # upper-triangular after a column swap
    assert not is_polarizing(Kernel(np.array([[1, 1], [1, 0]])))


def test_table_rows_both_kernels(table1):
    for name, k in (("K1", k1()), ("K2", k2())):
        plan = k.plan
        for phase, row in table1.items():
            u_text, w_text, _ = row[name]
            assert plan.v_expression_text(phase) == u_text
            assert window_text(plan.windows[phase]) == w_text


def test_window_examples():
    p1, p2 = k1().plan, k2().plan
    assert p1.windows[3] == (3,)
    assert p1.windows[4] == (3, 5, 6, 7)
    assert p1.windows[8] == (5, 6, 7, 11)
    assert p1.max_window() == 4
    assert p2.windows[5] == (5, 6, 7)
    assert p2.windows[8] == (5, 7)
    assert p2.windows[9] == (7,)
    assert p2.max_window() == 3


def test_min_span_constraints_consistent_with_t_inverse():
    # each constraint, with earlier u's substituted, equals the T^-1 column
    for k in (k1(), k2()):
        plan = k.plan
        expr = {}
        for c in plan.constraints:
            v = np.zeros(16, dtype=np.uint8)
            v[list(c.v_terms)] = 1
            for s in c.u_terms:
                v ^= expr[s]
            expr[c.phase] = v
            assert np.array_equal(v, plan.t_inverse[:, c.phase])


def test_arikan_windows_empty():
    plan = arikan().plan
    assert all(w == () for w in plan.windows)
    assert plan.j == tuple(range(16))


def test_partial_distances_k1():
    assert partial_distances(k1()) == (1, 2, 2, 2, 2, 4, 4, 4, 4, 6, 6, 8, 8, 8, 8, 16)


def test_polarization_rates():
    assert abs(profile(k1()).polarization_rate - 0.51828) < 5e-6
    assert abs(profile(k2()).polarization_rate - 0.51828) < 5e-6
    assert profile(arikan()).polarization_rate == pytest.approx(0.5)
    assert profile(Kernel(binmat.F2)).polarization_rate == pytest.approx(0.5)


def test_scaling_exponent_metadata():
    assert SCALING_EXPONENT == {"K1": 3.346, "K2": 3.45}


def test_resolve_kernel(tmp_path):
    assert resolve_kernel("K1").same_matrix(k1())
    assert resolve_kernel("arikan").same_matrix(arikan())
    path = tmp_path / "k.txt"
    path.write_text(binmat.format_matrix(k2().matrix))
    assert resolve_kernel(f"file:{path}").same_matrix(k2())
    assert resolve_kernel(str(path)).same_matrix(k2())
