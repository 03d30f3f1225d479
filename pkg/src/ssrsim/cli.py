"""Command-line front end: assemble, run, compare, sweep, pass.

Exit codes: 0 success, 1 result verification failed, 2 simulation fault,
3 configuration or input error. SSRSIM_SEED overrides the data seed.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import analytic
from .cluster import Cluster, ClusterConfig
from .core import SimFault
from .isa import AsmError, parse_assembly, program_to_text
from .kernels import (
    KERNEL_NAMES, KernelSpec, build, build_hypercube, verify,
)
from .report import make_report
from .ssr_pass import PassError, compile_nest, parse_ir


def _seed(args) -> int:
    env = os.environ.get("SSRSIM_SEED")
    if env is not None:
        return int(env, 0)
    return args.seed


def _cluster_config(cores: int, variant: str, args) -> ClusterConfig:
    kw = dict(n_cores=cores, ssr_enabled=variant == "ssr",
              fpu_sharing=getattr(args, "fpu_sharing", 1))
    if getattr(args, "banks", None):
        kw["banks"] = args.banks
    if getattr(args, "fifo_depth", None):
        kw["fifo_depth"] = args.fifo_depth
    return ClusterConfig(**kw)


def _run_spec(spec: KernelSpec, cfg: ClusterConfig, trace_path=None):
    kb = build(spec)
    cl = Cluster(cfg, kb.programs, kb.init_regs)
    rr = cl.run(trace=trace_path is not None)
    if trace_path:
        with open(trace_path, "w") as f:
            f.write("\n".join(rr.trace) + "\n")
    vr = verify(cl.tcdm, kb)
    return kb, rr, vr


def cmd_run(args) -> int:
    seed = _seed(args)
    if args.kernel not in KERNEL_NAMES:
        print(f"unknown kernel '{args.kernel}'", file=sys.stderr)
        return 3
    spec = KernelSpec(args.kernel, args.variant, args.cores, args.size, seed)
    cfg = _cluster_config(args.cores, args.variant, args)
    try:
        kb, rr, vr = _run_spec(spec, cfg, args.trace)
        if args.dump_asm:
            os.makedirs(args.dump_asm, exist_ok=True)
            seen = set()
            for c, prog in enumerate(kb.programs):
                if id(prog) in seen:
                    continue
                seen.add(id(prog))
                path = os.path.join(
                    args.dump_asm,
                    f"{args.kernel}.{args.variant}.c{c}.s")
                with open(path, "w") as f:
                    f.write(program_to_text(prog))
        baseline_cycles = None
        if args.variant == "ssr" and not args.no_baseline:
            bspec = KernelSpec(args.kernel, "baseline", args.cores, args.size, seed)
            bcfg = _cluster_config(args.cores, "baseline", args)
            _, brr, bvr = _run_spec(bspec, bcfg)
            if bvr.ok:
                baseline_cycles = brr.cycles
    except SimFault as e:
        print(f"simulation fault: {e}", file=sys.stderr)
        return 2
    rep = make_report(args.kernel, args.variant, rr, cfg, seed,
                      verified=vr.ok, max_rel_err=vr.max_rel_err,
                      baseline_cycles=baseline_cycles)
    out = rep.to_json() if args.json else rep.to_text()
    if args.output:
        with open(args.output, "w") as f:
            f.write(out)
    else:
        print(out, end="" if not args.json else "\n")
    return 0 if vr.ok else 1


def _parse_side_config(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if not part:
            continue
        k, _, v = part.partition("=")
        out[k.strip()] = v.strip()
    return out


def cmd_compare(args) -> int:
    seed = _seed(args)
    kernels = [k.strip() for k in args.kernels.split(",") if k.strip()]
    for k in kernels:
        if k not in KERNEL_NAMES:
            print(f"unknown kernel '{k}'", file=sys.stderr)
            return 3
    sides = []
    for text in (args.config_a, args.config_b):
        d = _parse_side_config(text)
        try:
            cores = int(d.get("cores", 1))
            variant = d.get("variant", "ssr")
            if variant not in ("ssr", "baseline"):
                raise ValueError(f"variant '{variant}'")
            fpu = int(d.get("fpu", 1))
        except ValueError as e:
            print(f"bad config '{text}': {e}", file=sys.stderr)
            return 3
        sides.append((cores, variant, fpu))
    rows = ["kernel,cycles_a,cycles_b,cycle_ratio,fetched_a,fetched_b,fetch_ratio"]
    try:
        for k in kernels:
            res = []
            for cores, variant, fpu in sides:
                spec = KernelSpec(k, variant, cores, None, seed)
                cfg = ClusterConfig(n_cores=cores, ssr_enabled=variant == "ssr",
                                    fpu_sharing=fpu)
                kb, rr, vr = _run_spec(spec, cfg)
                if not vr.ok:
                    print(f"{k}: verification failed", file=sys.stderr)
                    return 1
                res.append(rr)
            a, b = res
            rows.append(f"{k},{a.cycles},{b.cycles},{a.cycles / b.cycles:.4f},"
                        f"{a.total_fetched},{b.total_fetched},"
                        f"{b.total_fetched / a.total_fetched:.4f}")
    except SimFault as e:
        print(f"simulation fault: {e}", file=sys.stderr)
        return 2
    text = "\n".join(rows) + "\n"
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        print(text, end="")
    return 0


def _span(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return (int(lo), int(hi)) if hi else (int(lo), int(lo))


def cmd_sweep(args) -> int:
    d0, d1 = _span(args.dims)
    l0, l1 = _span(args.side)
    sim_points = set()
    if args.simulate:
        for part in args.simulate.split(","):
            dd, _, ll = part.partition(":")
            sim_points.add((int(dd), int(ll)))
    rows = ["d,l,iterations,utilization,break_even,utilization_simulated"]
    for d in range(d0, d1 + 1):
        for l in range(l0, l1 + 1):
            eta = analytic.utilization(d, l, args.streams)
            be = analytic.break_even(d, [l] * d)
            sim = ""
            if (d, l) in sim_points:
                kb = build_hypercube(d, l, "ssr")
                cl = Cluster(ClusterConfig(n_cores=1), kb.programs, kb.init_regs)
                rr = cl.run()
                sim = f"{rr.cores[0]['utilization']:.4f}"
            rows.append(f"{d},{l},{l ** d},{eta:.4f},{int(be)},{sim}")
    text = "\n".join(rows) + "\n"
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        print(text, end="")
    return 0


def cmd_assemble(args) -> int:
    try:
        with open(args.file) as f:
            text = f.read()
    except OSError as e:
        print(e, file=sys.stderr)
        return 3
    try:
        prog = parse_assembly(text, args.file)
    except AsmError as e:
        for d in e.diagnostics:
            print(d, file=sys.stderr)
        return 3
    print(f"{len(prog.instructions)} instructions, "
          f"{len(prog.data)} data bytes, {len(prog.labels)} labels")
    if args.print:
        print(program_to_text(prog), end="")
    return 0


def cmd_pass(args) -> int:
    try:
        with open(args.file) as f:
            text = f.read()
    except OSError as e:
        print(e, file=sys.stderr)
        return 3
    try:
        ir = parse_ir(text)
        asm, report = compile_nest(ir, transform=not args.no_transform)
    except PassError as e:
        print(f"pass error: {e}", file=sys.stderr)
        return 3
    if args.output:
        with open(args.output, "w") as f:
            f.write(asm)
    else:
        print(asm, end="")
    note = (f"; candidates={len(report.candidates)} "
            f"assigned={len(report.assignment)} "
            f"transformed={report.transformed}")
    if report.assumed_profitable:
        note += " assumed-profitable"
    print(note, file=sys.stderr)
    if args.run:
        prog = parse_assembly(asm, "pass-out")
        cl = Cluster(ClusterConfig(n_cores=1), prog)
        rr = cl.run()
        print(f"; cycles={rr.cycles} fetched={rr.total_fetched}",
              file=sys.stderr)
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="ssrsim",
        description="stream-register core-cluster simulator and models")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="build, run and verify one kernel")
    p.add_argument("--kernel", required=True,
                   metavar="{" + ",".join(sorted(KERNEL_NAMES)) + "}")
    p.add_argument("--variant", default="ssr", choices=["ssr", "baseline"])
    p.add_argument("--cores", type=int, default=1)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=0xC0FFEE)
    p.add_argument("--banks", type=int, default=None)
    p.add_argument("--fifo-depth", type=int, default=None)
    p.add_argument("--fpu-sharing", type=int, default=1, choices=[1, 2])
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.add_argument("--output", default=None)
    p.add_argument("--trace", default=None, help="write per-cycle CSV trace")
    p.add_argument("--dump-asm", default=None, metavar="DIR",
                   help="write the generated per-core assembly files")
    p.add_argument("--no-baseline", action="store_true",
                   help="skip the baseline run used for the speedup figure")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("compare", help="run two configurations over kernels")
    p.add_argument("--kernels", required=True,
                   help="comma-separated kernel names")
    p.add_argument("--config-a", required=True,
                   help="e.g. cores=2,variant=ssr")
    p.add_argument("--config-b", required=True,
                   help="e.g. cores=6,variant=baseline,fpu=2")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=0xC0FFEE)
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sweep", help="utilization surface as CSV")
    p.add_argument("--dims", default="1:4", help="d range, e.g. 1:4")
    p.add_argument("--side", default="1:32", help="side-length range")
    p.add_argument("--streams", type=int, default=1)
    p.add_argument("--simulate", default=None,
                   help="comma-separated d:l points to cross-check in the "
                        "simulator")
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("assemble", help="assemble a file and report")
    p.add_argument("file")
    p.add_argument("--print", action="store_true",
                   help="pretty-print the parsed program")
    p.set_defaults(fn=cmd_assemble)

    p = sub.add_parser("pass", help="run the loop-to-stream pass on an IR file")
    p.add_argument("file")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--no-transform", action="store_true",
                   help="emit the plain lowering instead")
    p.add_argument("--run", action="store_true",
                   help="simulate the emitted program")
    p.set_defaults(fn=cmd_pass)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
