"""Polar codes with 16x16 polarization kernels and reduced-complexity kernel processing."""

from .arikan import OpCounter, PhaseOrderError
from .codec import CodeSpec, crc_append, crc_check, encode, sc_decode, scl_decode
from .fast16 import K1_COSTS, K2_COSTS, fast16_processor
from .harness import SimConfig, awgn_llr, monte_carlo_construct, simulate_fer
from .kernelspec import Kernel, arikan, k1, k2, profile, resolve_kernel, window_plan
from .winproc import GenericProcessor, bruteforce_all_phases, kernel_llr_bruteforce

__all__ = [
    "CodeSpec",
    "GenericProcessor",
    "K1_COSTS",
    "K2_COSTS",
    "Kernel",
    "OpCounter",
    "PhaseOrderError",
    "SimConfig",
    "arikan",
    "awgn_llr",
    "bruteforce_all_phases",
    "crc_append",
    "crc_check",
    "encode",
    "fast16_processor",
    "k1",
    "k2",
    "kernel_llr_bruteforce",
    "monte_carlo_construct",
    "profile",
    "resolve_kernel",
    "sc_decode",
    "scl_decode",
    "simulate_fer",
    "window_plan",
]
