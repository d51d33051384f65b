"""Command line entry point: ``polar16 analyze|construct|simulate|selftest``."""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from .arikan import OpCounter
from .codec import CodeSpec, make_processor
from .fast16 import K1_COSTS, K2_COSTS
from .harness import (
    SimConfig,
    format_csv,
    gnuplot_script,
    monte_carlo_construct,
    simulate_fer,
)
from .kernelspec import Kernel, k1, k2, profile, resolve_kernel
from .winproc import GenericProcessor, bruteforce_all_phases

TABLE_COSTS = {"K1": K1_COSTS, "K2": K2_COSTS}


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _table_name(kernel: Kernel) -> str | None:
    if kernel.same_matrix(k1()):
        return "K1"
    if kernel.same_matrix(k2()):
        return "K2"
    return None


def measure_costs(kernel: Kernel, kind: str = "auto", seed: int = 0) -> list[int]:
    """Per-phase operation counts of one kernel pass on a random input."""
    rng = np.random.default_rng(seed)
    counter = OpCounter()
    proc = make_processor(kernel, kind, counter)
    proc.reset(rng.normal(0, 2, (1, kernel.l)))
    for phase in range(kernel.l):
        proc.process_phase(phase)
        proc.decide(rng.integers(0, 2, 1))
    return [counter.by_phase[p] for p in range(kernel.l)]


def _window_text(window) -> str:
    return "{" + ",".join(str(t) for t in window) + "}"


def analysis_rows(kernel: Kernel, kind: str = "auto") -> list[tuple]:
    plan = kernel.plan
    costs = measure_costs(kernel, kind)
    return [
        (phi, plan.v_expression_text(phi), _window_text(plan.windows[phi]), plan.h[phi], costs[phi])
        for phi in range(kernel.l)
    ]


def analysis_text(kernel: Kernel, kind: str = "auto", as_csv: bool = False) -> str:
    rows = analysis_rows(kernel, kind)
    prof = profile(kernel)
    if as_csv:
        out = ["phase,u,window,h,cost"] + [f'{r[0]},"{r[1]}","{r[2]}",{r[3]},{r[4]}' for r in rows]
        return "\n".join(out) + "\n"
    wu = max(len(r[1]) for r in rows)
    ww = max(len(r[2]) for r in rows)
    lines = [f"kernel {kernel.name} ({kernel.l}x{kernel.l})"]
    lines.append(f"{'phase':>5}  {'u':<{wu}}  {'window':<{ww}}  {'h':>2}  {'cost':>5}")
    for phi, u, w, h, c in rows:
        lines.append(f"{phi:>5}  {u:<{wu}}  {w:<{ww}}  {h:>2}  {c:>5}")
    lines.append(f"max window {kernel.plan.max_window()}, total cost {sum(r[4] for r in rows)}")
    lines.append("partial distances " + " ".join(str(d) for d in prof.partial_distances))
    lines.append(f"polarization rate {prof.polarization_rate:.5f}")
    return "\n".join(lines) + "\n"


def _resolve_m(kernel: Kernel, n: int | None, m: int | None) -> int:
    if m is not None:
        return m
    if n is None:
        raise SystemExit("give --n or --m")
    mm = round(math.log(n, kernel.l))
    if kernel.l**mm != n:
        raise SystemExit(f"n = {n} is not a power of the kernel size {kernel.l}")
    return mm


def _read_frozen(path: str) -> list[int]:
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.extend(int(x) for x in line.replace(",", " ").split())
    return out


def cmd_analyze(args) -> int:
    kernel = resolve_kernel(args.kernel)
    if args.costs:
        costs = measure_costs(kernel, args.processor)
        print("costs " + " ".join(str(c) for c in costs) + f" total {sum(costs)}")
        name = _table_name(kernel)
        if name is not None and args.processor != "generic":
            if tuple(costs) != TABLE_COSTS[name]:
                print(f"mismatch with the {name} reference costs", file=sys.stderr)
                return 1
            print(f"matches the {name} reference costs")
        return 0
    print(analysis_text(kernel, args.processor, args.csv), end="")
    return 0


def cmd_construct(args) -> int:
    kernel = resolve_kernel(args.kernel)
    m = _resolve_m(kernel, args.n, args.m)
    snr = _floats(args.snr)[0]
    rng = np.random.default_rng(args.seed)
    res = monte_carlo_construct(kernel, m, args.k, snr, args.frames, rng, args.crc, args.processor)
    text = f"# kernel={kernel.name} m={m} k={args.k} crc_len={args.crc} snr_db={snr:g} trials={args.frames} seed={args.seed}\n"
    text += "\n".join(str(i) for i in res.frozen) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


def cmd_simulate(args) -> int:
    kernel = resolve_kernel(args.kernel)
    m = _resolve_m(kernel, args.n, args.m)
    snrs = _floats(args.snr)
    crc = 0x07 if args.crc else None
    if args.frozen:
        frozen = _read_frozen(args.frozen)
    else:
        rng = np.random.default_rng([args.seed, 1])
        frozen = monte_carlo_construct(
            kernel, m, args.k, snrs[0], args.construct_trials, rng, args.crc, args.processor
        ).frozen
    spec = CodeSpec(kernel, m, args.k, tuple(frozen), crc, args.crc if crc else 0)
    config = SimConfig(
        spec, snrs, _ints(args.list), args.frames, args.errors or None, args.seed, args.processor
    )
    t0 = time.time()
    points = simulate_fer(config)
    text = format_csv(points, config)
    if args.out:
        Path(args.out).write_text(text)
        if args.gnuplot:
            Path(args.out).with_suffix(".gp").write_text(gnuplot_script(args.out, config.lists))
    else:
        print(text, end="")
    print(f"# {time.time() - t0:.1f} s", file=sys.stderr)
    return 0


def selftest(kernel: Kernel, trials: int, seed: int) -> dict[str, float]:
    """Max relative deviations fast-vs-generic and generic-vs-brute-force."""
    rng = np.random.default_rng(seed)
    y = rng.normal(0, 3, (trials, kernel.l))
    u = rng.integers(0, 2, (trials, kernel.l)).astype(np.uint8)
    ref = bruteforce_all_phases(kernel, y, u)
    out = {}
    procs = {"generic": GenericProcessor(kernel)}
    if _table_name(kernel) is not None:
        procs["fast"] = make_processor(kernel, "fast")
    got = {}
    for name, proc in procs.items():
        proc.reset(y)
        vals = np.zeros_like(y)
        for phase in range(kernel.l):
            vals[:, phase] = proc.process_phase(phase)
            proc.decide(u[:, phase])
        got[name] = vals
    scale = np.maximum(1.0, np.abs(ref))
    out["generic_vs_bruteforce"] = float(np.max(np.abs(got["generic"] - ref) / scale))
    if "fast" in got:
        out["fast_vs_generic"] = float(np.max(np.abs(got["fast"] - got["generic"]) / scale))
    return out


def cmd_selftest(args) -> int:
    kernel = resolve_kernel(args.kernel)
    dev = selftest(kernel, args.trials, args.seed)
    ok = True
    for key, val in dev.items():
        flag = val <= 1e-9
        ok &= flag
        print(f"{key}: max deviation {val:.3e} {'ok' if flag else 'FAIL'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polar16", description="Polar codes with 16x16 kernels")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, code=True):
        p.add_argument("--kernel", default="k2", help="k1, k2, arikan or file:<path>")
        p.add_argument("--processor", default="auto", choices=["auto", "fast", "generic"])
        if code:
            p.add_argument("--n", type=int)
            p.add_argument("--m", type=int)
            p.add_argument("--k", type=int, required=True)
            p.add_argument("--snr", default="2.0", help="comma separated Eb/N0 values in dB")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--out")
            p.add_argument("--crc", type=int, default=0, help="CRC length (0 = none; 8 uses 0x07)")

    p = sub.add_parser("analyze", help="window/cost report for a kernel")
    common(p, code=False)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--costs", action="store_true", help="only per-phase costs, checked against the reference")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("construct", help="Monte Carlo frozen set")
    common(p)
    p.add_argument("--frames", type=int, default=10000, help="genie-aided trials")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("simulate", help="FER over AWGN")
    common(p)
    p.add_argument("--list", default="1", help="comma separated list sizes")
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--errors", type=int, default=100, help="stop after this many frame errors (0 = never)")
    p.add_argument("--frozen", help="file with frozen indices (default: construct at the first SNR)")
    p.add_argument("--construct-trials", type=int, default=10000)
    p.add_argument("--gnuplot", action="store_true", help="also write <out>.gp")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("selftest", help="oracle equivalence of kernel processors")
    p.add_argument("--kernel", default="k2")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "construct" and args.crc and args.crc != 8:
        raise SystemExit("only the 8-bit CRC (0x07) is built in")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
