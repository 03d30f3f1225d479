"""Cluster driver: N cores, 2N stream lanes, banked scratchpad, barrier.

One deterministic loop advances everything cycle by cycle: candidate
decisions per core (in index order), shared-FPU arbitration, memory-bank
arbitration across LSU and lane requests, then commits. The simulation
ends when every core has halted and all write lanes have drained.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Core, Plan, SimFault, TimingParams
from .data_mover import Lane, StreamFault
from .isa import Program, instruction_to_text
from .memory import DEFAULT_SIZE, MemoryFault, Tcdm, default_banks
from . import data_mover

DEADLOCK_LIMIT = 10_000


@dataclass
class ClusterConfig:
    n_cores: int = 1
    ssr_enabled: bool = True          # stream hardware present
    fpu_sharing: int = 1              # cores per FPU (1 = private, 2 = shared)
    tcdm_size: int = DEFAULT_SIZE
    banks: int | None = None          # default: twice the cluster's ports
    fifo_depth: int = 4
    timing: TimingParams = field(default_factory=TimingParams)
    log_events: bool = False
    hazard_checks: bool = False       # read-stream store hazard diagnostics
    max_cycles: int = 50_000_000

    def __post_init__(self):
        if self.fpu_sharing not in (1, 2):
            raise ValueError("fpu_sharing must be 1 or 2")
        if self.n_cores % self.fpu_sharing:
            raise ValueError("n_cores must be divisible by fpu_sharing")

    def bank_count(self) -> int:
        return self.banks if self.banks else default_banks(self.n_cores)

    def as_dict(self) -> dict:
        return {
            "n_cores": self.n_cores,
            "ssr_enabled": self.ssr_enabled,
            "fpu_sharing": self.fpu_sharing,
            "tcdm_size": self.tcdm_size,
            "banks": self.bank_count(),
            "fifo_depth": self.fifo_depth,
            "timing": self.timing.as_dict(),
        }


@dataclass
class BarrierState:
    arrived: set[int] = field(default_factory=set)
    generation: int = 0


@dataclass
class RunResult:
    cycles: int
    cores: list[dict]
    tcdm: dict
    warnings: list[str]
    lane_stats: list[dict]
    trace: list[str] | None = None

    @property
    def total_fetched(self) -> int:
        return sum(c["instr_fetched"] for c in self.cores)

    @property
    def total_useful(self) -> int:
        return sum(c["useful_ops"] for c in self.cores)


class Cluster:
    def __init__(self, cfg: ClusterConfig, programs: list[Program] | Program,
                 init_regs: list[dict[int, int]] | None = None):
        self.cfg = cfg
        n = cfg.n_cores
        if isinstance(programs, Program):
            programs = [programs] * n
        if len(programs) != n:
            raise ValueError("need one program per core")
        if init_regs is None:
            init_regs = [{} for _ in range(n)]
        self.cores = [Core(i, programs[i], cfg.timing, init_regs[i])
                      for i in range(n)]
        self.lanes = [[Lane(cfg.fifo_depth, cfg.log_events),
                       Lane(cfg.fifo_depth, cfg.log_events)] for _ in range(n)]
        self.tcdm = Tcdm(cfg.tcdm_size, cfg.bank_count())
        seen = set()
        for prog in programs:
            if id(prog) in seen:
                continue
            seen.add(id(prog))
            self.tcdm.load_image(prog.data)
        self.barrier = BarrierState()
        self.warnings: list[str] = []
        self._lane_retry = [[False, False] for _ in range(n)]
        self._fpu_flip = [0] * (n // 2 + 1)
        self.cycle = 0

    # -- services used by Core.commit -----------------------------------

    def warn(self, msg: str) -> None:
        if len(self.warnings) < 32:
            self.warnings.append(msg)

    def barrier_arrive(self, cid: int) -> None:
        self.barrier.arrived.add(cid)

    def config_write(self, core: int, lane: int, off: int, value: int) -> None:
        if not self.cfg.ssr_enabled:
            raise SimFault("stream hardware not present in this cluster")
        if core >= self.cfg.n_cores:
            raise SimFault(f"config write to absent core {core}")
        self.lanes[core][lane].write_config(off, value)

    def config_read(self, core: int, lane: int, off: int) -> int:
        if core >= self.cfg.n_cores:
            raise SimFault(f"config read of absent core {core}")
        ln = self.lanes[core][lane]
        if off == data_mover.OFF_STATUS:
            return ln.read_status()
        if off == data_mover.OFF_REPEAT:
            return ln.cfg.repeat
        if data_mover.OFF_BOUND <= off < data_mover.OFF_BOUND + 16:
            return ln.cfg.bound[(off - data_mover.OFF_BOUND) // 4]
        if data_mover.OFF_STRIDE <= off < data_mover.OFF_STRIDE + 16:
            return ln.cfg.stride[(off - data_mover.OFF_STRIDE) // 4] & 0xFFFFFFFF
        raise SimFault(f"bad lane config offset 0x{off:x}")

    def note_store(self, addr: int, cycle: int) -> None:
        if not self.cfg.hazard_checks:
            return
        for ci, row in enumerate(self.lanes):
            for li, lane in enumerate(row):
                if lane.check_read_hazard(addr):
                    self.warn(f"cycle {cycle}: store to 0x{addr:x} hits the "
                              f"unread remainder of core {ci} lane {li}'s "
                              "read stream")

    # -- main loop --------------------------------------------------------

    def run(self, trace: bool = False) -> RunResult:
        cfg = self.cfg
        cores, lanes, tcdm = self.cores, self.lanes, self.tcdm
        trace_rows: list[str] | None = (
            ["cycle,core,pc,instruction,event"] if trace else None)
        last_progress = 0
        cycle = -1
        try:
            while True:
                cycle += 1
                if cycle > cfg.max_cycles:
                    raise SimFault("cycle limit exceeded")
                if (all(c.halted for c in cores)
                        and not any(l.cfg.write and l.fifo
                                    for row in lanes for l in row)):
                    break

                # issue decisions
                plans: list[Plan | None] = []
                for core in cores:
                    core.last_stall = ""
                    plans.append(core.candidate(cycle, lanes[core.id]))

                # shared-FPU arbitration: alternating priority inside a pair
                if cfg.fpu_sharing == 2:
                    for p in range(0, cfg.n_cores - 1, 2):
                        a, b = plans[p], plans[p + 1]
                        if a is not None and b is not None and a.is_fp and b.is_fp:
                            flip = self._fpu_flip[p // 2]
                            self._fpu_flip[p // 2] = flip + 1
                            loser = p + 1 if flip % 2 == 0 else p
                            plans[loser] = None
                            cores[loser]._stall("fpu")

                # memory requests: LSU first (it owns port 0 over lane 0)
                requests: list[tuple[int, int]] = []
                first_try: list[bool] = []
                req_info: list[tuple[str, int, int, tuple]] = []
                lsu_ports = set()
                for i, plan in enumerate(plans):
                    if plan is not None and plan.mem is not None:
                        addr, is_write = plan.mem
                        tcdm.check(addr)
                        port = 2 * i
                        lsu_ports.add(port)
                        requests.append((port, tcdm.bank(addr)))
                        first_try.append(not cores[i].lsu_retry)
                        req_info.append(("lsu", i, port, (addr, is_write)))
                for i in range(cfg.n_cores):
                    for li in (0, 1):
                        port = 2 * i + li
                        if li == 0 and port in lsu_ports:
                            continue
                        lane = lanes[i][li]
                        r = lane.memory_request()
                        if r is None:
                            continue
                        addr, is_write, word = r
                        tcdm.check(addr)
                        requests.append((port, tcdm.bank(addr)))
                        first_try.append(not self._lane_retry[i][li])
                        req_info.append(("lane", i, port, (li, addr, is_write)))
                granted = tcdm.arbitrate(requests, first_try) if requests else set()

                progressed = False
                # core commits, in index order
                for i, plan in enumerate(plans):
                    if plan is None:
                        continue
                    core = cores[i]
                    if plan.mem is not None and 2 * i not in granted:
                        core.lsu_retry = True
                        core._stall("mem")
                        continue
                    core.lsu_retry = False
                    core.commit(plan, cycle, lanes[i], self)
                    progressed = True
                    if trace_rows is not None:
                        trace_rows.append(
                            f"{cycle},{i},{plan.ins.line},"
                            f"\"{instruction_to_text(plan.ins)}\",issue")
                if trace_rows is not None:
                    for core in cores:
                        if core.last_stall and not core.halted:
                            ins = (core.instrs[core.pc]
                                   if 0 <= core.pc < len(core.instrs) else None)
                            mn = instruction_to_text(ins) if ins else "-"
                            trace_rows.append(
                                f"{cycle},{core.id},{ins.line if ins else -1},"
                                f"\"{mn}\",stall:{core.last_stall}")

                # lane commits
                for kind, i, port, extra in req_info:
                    if kind != "lane":
                        continue
                    li, addr, is_write = extra
                    lane = lanes[i][li]
                    if port in granted:
                        self._lane_retry[i][li] = False
                        if is_write:
                            a, w = lane.commit_store(cycle)
                            tcdm.store_word(a, w)
                            self.note_store(a, cycle)
                        else:
                            lane.commit_fetch(tcdm.load_word(addr), cycle)
                        progressed = True
                    else:
                        self._lane_retry[i][li] = True

                # barrier: released once every core has arrived
                if self.barrier.arrived and len(self.barrier.arrived) == cfg.n_cores:
                    for core in cores:
                        core.at_barrier = False
                    self.barrier.arrived.clear()
                    self.barrier.generation += 1
                    progressed = True

                if progressed:
                    last_progress = cycle
                elif cycle - last_progress > DEADLOCK_LIMIT:
                    dump = "; ".join(
                        f"core {c.id}: pc={c.pc} "
                        f"[{instruction_to_text(c.instrs[c.pc]) if 0 <= c.pc < len(c.instrs) else '-'}] "
                        f"stalls={c.stalls}" for c in cores if not c.halted)
                    raise SimFault(f"deadlock: no progress for {DEADLOCK_LIMIT} "
                                   f"cycles at cycle {cycle}; {dump}")
        except (MemoryFault, StreamFault) as e:
            raise SimFault(f"cycle {cycle}: {e}") from e

        for ci, row in enumerate(self.lanes):
            for li, lane in enumerate(row):
                if lane.armed and not lane.cfg.write and lane.active:
                    self.warn(f"core {ci} lane {li}: read stream not exhausted "
                              "at program end")

        core_stats = []
        for c in self.cores:
            cyc = (c.finish_cycle + 1) if c.fetched else 0
            core_stats.append({
                "core": c.id,
                "cycles": cyc,
                "instr_fetched": c.fetched,
                "useful_ops": c.useful,
                "utilization": c.useful / cyc if cyc else 0.0,
                "stalls": dict(c.stalls),
            })
        lane_stats = [{
            "core": ci, "lane": li,
            "fetched": lane.fetched, "stored": lane.stored,
            "emitted": lane.emitted,
        } for ci, row in enumerate(self.lanes) for li, lane in enumerate(row)]
        return RunResult(
            cycles=cycle,
            cores=core_stats,
            tcdm=self.tcdm.stats(),
            warnings=list(self.warnings),
            lane_stats=lane_stats,
            trace=trace_rows,
        )


def run(cfg: ClusterConfig, programs, init_regs=None, trace: bool = False) -> RunResult:
    """Assemble-and-go convenience wrapper: advance the whole cluster until
    every core halts; returns per-core and aggregate counters."""
    return Cluster(cfg, programs, init_regs).run(trace=trace)
