import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polar16 import binmat
from polar16.arikan import (
    LayeredLlrState,
    OpCounter,
    PhaseOrderError,
    hard,
    layer_llr,
    p_fn,
    path_llrs,
    path_score,
    phase_cost,
    polar_encode,
    q_fn,
    tau,
)

finite = st.floats(-50, 50, allow_nan=False)


def maxlog_llr(y, prefix, t):
    """Enumerate all completions: max score with v_i = 0 minus with v_i = 1."""
    n = 2**t
    f = binmat.kron_power(binmat.F2, t).astype(int)
    i = len(prefix)
    best = [-np.inf, -np.inf]
    for rest in itertools.product((0, 1), repeat=n - i):
        v = np.array(list(prefix) + list(rest))
        c = (v @ f) % 2
        s = float(np.sum(tau(y, c)))
        best[rest[0]] = max(best[rest[0]], s)
    return best[0] - best[1]


def test_primitive_examples():
    assert q_fn(3.0, -2.0) == -2.0
    assert q_fn(-1.5, -4.0) == 1.5
    assert q_fn(0.0, -2.0) == -0.0
    assert p_fn(2.0, 1.0, 0) == 3.0
    assert p_fn(2.0, 1.0, 1) == -1.0
    assert tau(-2.0, 1) == 0.0
    assert tau(-2.0, 0) == -2.0
    assert hard(0.0) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 4), st.data())
def test_polar_encode_matches_matrix(t, data):
    v = np.array(data.draw(st.lists(st.integers(0, 1), min_size=2**t, max_size=2**t)), dtype=np.uint8)
    f = binmat.kron_power(binmat.F2, t).astype(int)
    assert np.array_equal(polar_encode(v), (v.astype(int) @ f) % 2)


@pytest.mark.parametrize("t", [1, 2, 3])
def test_path_llrs_match_enumeration(t):
    rng = np.random.default_rng(t)
    n = 2**t
    for _ in range(20):
        y = rng.normal(0, 2, n)
        v = rng.integers(0, 2, n).astype(np.uint8)
        s = path_llrs(y, v)
        for i in range(n):
            assert s[i] == pytest.approx(maxlog_llr(y, v[:i], t), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.data())
def test_score_identity(j, data):
    """Chained tau over the SC path equals tau summed over the codeword."""
    n = 2**j
    y = np.array(data.draw(st.lists(finite, min_size=n, max_size=n)))
    v = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    lhs = path_score(y, v)
    rhs = float(np.sum(tau(y, polar_encode(v))))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_phase_costs_and_counter():
    assert [phase_cost(i, 16) for i in range(9)] == [15, 1, 3, 1, 7, 1, 3, 1, 15]
    for count in (1, 5, 9, 16):
        ctr = OpCounter()
        path_llrs(np.zeros(16), np.zeros(16, dtype=np.uint8), count, ctr)
        assert ctr.total() == sum(phase_cost(i, 16) for i in range(count))


def test_counter_is_per_lane():
    ctr = OpCounter()
    ctr.q(np.ones((7, 4)), np.ones((7, 4)))
    assert ctr.comparisons == 4
    ctr.start_phase(2)
    ctr.p(np.ones((3, 2)), np.ones((3, 2)), np.zeros((3, 2), dtype=np.uint8))
    assert ctr.by_phase[2] == 2 and ctr.total() == 6


def test_layered_state_matches_path_llrs():
    rng = np.random.default_rng(5)
    y = rng.normal(0, 2, (30, 16))
    v = rng.integers(0, 2, (30, 16)).astype(np.uint8)
    ref = path_llrs(y, v)
    ctr = OpCounter()
    st_ = LayeredLlrState(y, ctr)
    for i in range(16):
        ctr.start_phase(i)
        assert np.allclose(st_.llr_at(i), ref[:, i], atol=1e-12)
        st_.decide(v[:, i])
    assert [ctr.by_phase[i] for i in range(16)] == [phase_cost(i, 16) for i in range(16)]


def test_layered_state_order_errors():
    st_ = LayeredLlrState(np.zeros((1, 8)))
    with pytest.raises(PhaseOrderError):
        st_.llr_at(1)
    st_.llr_at(0)
    st_.decide([0])
    with pytest.raises(PhaseOrderError):
        layer_llr(st_, 2, np.array([[1, 0]]))
    assert layer_llr(st_, 2, np.array([[0, 1]])).shape == (1,)


def test_sign_zero_convention_in_q():
    assert q_fn(0.0, 0.0) == 0.0
    assert hard(q_fn(-0.0, 3.0)) == 0
