import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polar16.arikan import LLR_CLIP, OpCounter, PhaseOrderError
from polar16.fast16 import (
    K1_COSTS,
    K2_COSTS,
    K1Processor,
    K2Processor,
    fast16_processor,
    fht,
    fht8,
    op_report,
    process_phase,
)
from polar16.kernelspec import arikan, k1, k2
from polar16.winproc import GenericProcessor, bruteforce_all_phases

KERNELS = [(K1Processor, k1(), K1_COSTS), (K2Processor, k2(), K2_COSTS)]


def run(proc, y, u):
    proc.reset(y)
    out = np.zeros(y.shape)
    for phase in range(16):
        out[:, phase] = proc.process_phase(phase)
        proc.decide(u[:, phase])
    return out


def test_fht8_against_matrix():
    rng = np.random.default_rng(0)
    s = rng.normal(size=(5, 8))
    h = np.array([[(-1) ** bin(i & k).count("1") for i in range(8)] for k in range(8)])
    ctr = OpCounter()
    assert np.allclose(fht8(s, ctr), s @ h.T)
    assert ctr.total() == 24
    with pytest.raises(ValueError):
        fht8(np.zeros(4))
    assert np.allclose(fht(np.array([1.0, 2.0, 3.0, 4.0])), [10, -2, -4, 0])


@pytest.mark.parametrize("cls,kernel,costs", KERNELS, ids=["K1", "K2"])
def test_matches_generic_and_bruteforce(cls, kernel, costs):
    rng = np.random.default_rng(7)
    y = rng.normal(0, 3, (500, 16))
    u = rng.integers(0, 2, (500, 16)).astype(np.uint8)
    fast = run(cls(), y, u)
    gen = run(GenericProcessor(kernel), y, u)
    ref = bruteforce_all_phases(kernel, y, u)
    scale = np.maximum(1, np.abs(ref))
    assert np.max(np.abs(fast - gen) / scale) < 1e-9
    assert np.max(np.abs(fast - ref) / scale) < 1e-9


@pytest.mark.parametrize("cls,kernel,costs", KERNELS, ids=["K1", "K2"])
def test_adversarial_inputs(cls, kernel, costs):
    rng = np.random.default_rng(8)
    # small integers produce exact ties, zeros and equal magnitudes
    y = rng.integers(-2, 3, (400, 16)).astype(float)
    y[:50] = 0.0
    y[50:100] = rng.choice([-LLR_CLIP, LLR_CLIP], (50, 16))
    u = rng.integers(0, 2, (400, 16)).astype(np.uint8)
    fast = run(cls(), y, u)
    ref = bruteforce_all_phases(kernel, y, u)
    assert np.max(np.abs(fast - ref) / np.maximum(1, np.abs(ref))) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([0, 1]), st.data())
def test_property_equivalence(which, data):
    cls, kernel, _ = KERNELS[which]
    y = np.array([data.draw(st.lists(st.floats(-20, 20, allow_nan=False), min_size=16, max_size=16))])
    u = np.array([data.draw(st.lists(st.integers(0, 1), min_size=16, max_size=16))], dtype=np.uint8)
    ref = bruteforce_all_phases(kernel, y, u)
    assert np.allclose(run(cls(), y, u), ref, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("cls,kernel,costs", KERNELS, ids=["K1", "K2"])
def test_costs_input_independent(cls, kernel, costs):
    rng = np.random.default_rng(9)
    for _ in range(20):
        proc = cls()
        run(proc, rng.normal(0, 2, (1, 16)), rng.integers(0, 2, (1, 16)))
        assert tuple(op_report(proc).values()) == costs
    assert sum(K1_COSTS) == 447 and sum(K2_COSTS) == 181


def test_window_tail_phases_cost_one():
    for cls, phases in ((K1Processor, [7, 9, 10, 11, 12]), (K2Processor, [8, 9, 10])):
        proc = cls()
        run(proc, np.ones((1, 16)), np.zeros((1, 16), dtype=np.uint8))
        assert all(proc.counter.by_phase[p] == 1 for p in phases)


def test_take_mid_window():
    rng = np.random.default_rng(4)
    for cls, kernel, _ in KERNELS:
        y = rng.normal(0, 2, (40, 16))
        u = rng.integers(0, 2, (40, 16)).astype(np.uint8)
        idx = rng.integers(0, 40, 40)
        proc = cls()
        proc.reset(y)
        out = np.zeros((40, 16))
        for phase in range(16):
            if phase in (6, 9):
                proc.take(idx)
                y, u, out = y[idx], u[idx], out[idx]
            out[:, phase] = proc.process_phase(phase)
            proc.decide(u[:, phase])
        assert np.allclose(out, bruteforce_all_phases(kernel, y, u), atol=1e-9)


def test_phase_order_and_report_errors():
    proc = K1Processor()
    with pytest.raises(PhaseOrderError):
        proc.process_phase(0)
    proc.reset(np.zeros((1, 16)))
    with pytest.raises(PhaseOrderError):
        proc.decide([0])
    with pytest.raises(PhaseOrderError):
        op_report(proc)
    process_phase(proc, 0)
    proc.decide([1])
    with pytest.raises(PhaseOrderError):
        process_phase(proc, 1, np.array([[0]]))
    assert process_phase(proc, 1, np.array([[1]])).shape == (1,)


def test_factory():
    assert isinstance(fast16_processor(k1()), K1Processor)
    assert isinstance(fast16_processor(k2()), K2Processor)
    with pytest.raises(ValueError):
        fast16_processor(arikan())


def test_phase0_is_q_reduction():
    y = np.random.default_rng(1).normal(size=(1, 16))
    proc = K1Processor()
    proc.reset(y)
    s = y[0]
    while s.size > 1:
        h = s.size // 2
        s = np.sign(s[:h]) * np.sign(s[h:]) * np.minimum(abs(s[:h]), abs(s[h:]))
    assert proc.process_phase(0)[0] == pytest.approx(s[0])
