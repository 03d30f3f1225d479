"""Cycle-approximate single-issue in-order core.

One instruction leaves the issue stage per cycle at most. Results carry a
ready-cycle in a scoreboard; an instruction stalls while any source (or
destination, against write-after-write) is pending. Accesses to stream
registers stall further until the lane can serve them, are blocked for one
bubble after an ``ssrcfg`` write, and are held in the shadow of the cycle
after any branch; on a stalled cycle no lane is popped or pushed, and on
issue every pop/push of the instruction happens exactly once.

The cluster driver owns the per-cycle loop; the core exposes
``candidate()`` (pure check, no effects) and ``commit()``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .data_mover import Lane
from .fpmath import bits_to_f32, f32, f32_to_bits, fma32, fmax32, fmin32
from .isa import CSR_SSRCFG, FP_BASE, OpClass, Program, SSR_LANE
from .memory import config_decode


class SimFault(Exception):
    """Simulation-level program fault (memory fault, deadlock, misuse)."""


@dataclass
class TimingParams:
    """Latencies in cycles; a latency of n means a dependent instruction can
    issue n cycles after the producer."""
    load_use_latency: int = 2
    fma_latency: int = 3
    fp_add_mul_latency: int = 2
    taken_branch_penalty: int = 1
    csr_bubble: int = 1

    def as_dict(self) -> dict:
        return {
            "load_use_latency": self.load_use_latency,
            "fma_latency": self.fma_latency,
            "fp_add_mul_latency": self.fp_add_mul_latency,
            "taken_branch_penalty": self.taken_branch_penalty,
            "csr_bubble": self.csr_bubble,
        }


_M32 = 0xFFFFFFFF


def _s32(v: int) -> int:
    return v - (1 << 32) if v & 0x80000000 else v


@dataclass
class Plan:
    """Issue decision for one core-cycle, produced by candidate()."""
    ins: object
    mem: tuple[int, bool] | None = None         # (address, is_write)
    cfg: tuple[int, int, int] | None = None     # (core, lane, reg offset)
    is_fp: bool = False


STALL_CAUSES = ("dep", "mem", "ssr", "csr", "fpu", "barrier", "branch")


class Core:
    def __init__(self, cid: int, program: Program, timing: TimingParams,
                 init_regs: dict[int, int] | None = None):
        self.id = cid
        self.prog = program
        self.instrs = program.instructions
        self.timing = timing
        self.pc = 0
        self.x = [0] * 32
        self.f = [0.0] * 32
        self.ssr_on = False
        self.hwl = [[0, -1, 0], [0, -1, 0]]   # start, end, count
        self.ready = [0] * 64
        self.csr_quiet_until = -1
        self.last_branch = -2
        self.next_issue = 0
        self.halted = not self.instrs
        self.at_barrier = False
        self.lsu_retry = False
        self.fetched = 0
        self.useful = 0
        self.stalls = dict.fromkeys(STALL_CAUSES, 0)
        self.last_stall = ""
        self.finish_cycle = 0
        if init_regs:
            for code, val in init_regs.items():
                if code >= FP_BASE:
                    self.f[code - FP_BASE] = f32(bits_to_f32(val))
                elif code:
                    self.x[code] = val & _M32

    # ------------------------------------------------------------------

    def _stall(self, cause: str) -> None:
        self.stalls[cause] += 1
        self.last_stall = cause

    def _src_value(self, r: int, lanes: list[Lane], popped: dict[int, int],
                   do_pop: bool, cycle: int):
        if r == 0:
            return 0
        if self.ssr_on and r in SSR_LANE:
            lane = lanes[SSR_LANE[r]]
            if do_pop:
                word = lane.pop(cycle)
            else:
                word = lane.peek(popped[SSR_LANE[r]])
            popped[SSR_LANE[r]] += 1
            return bits_to_f32(word) if r >= FP_BASE else word
        if r >= FP_BASE:
            return self.f[r - FP_BASE]
        return self.x[r]

    def candidate(self, cycle: int, lanes: list[Lane]) -> Plan | None:
        """Decide whether the instruction at pc can issue this cycle.

        Returns a Plan, or None when the core does not issue (halted,
        waiting, or stalled; stall causes are counted here).
        """
        if self.halted:
            return None
        if self.at_barrier:
            self._stall("barrier")
            return None
        if cycle < self.next_issue:
            self._stall("branch")
            return None
        if self.pc >= len(self.instrs) or self.pc < 0:
            raise SimFault(f"core {self.id}: pc {self.pc} outside program")
        ins = self.instrs[self.pc]

        ssr_regs = ins.ssr_regs() if self.ssr_on else ()
        if ssr_regs:
            if cycle <= self.csr_quiet_until:
                self._stall("csr")
                return None
            if cycle == self.last_branch + 1:
                self._stall("ssr")
                return None

        # scoreboard: sources, then write-after-write on destinations
        for r in ins.reads:
            if r and not (self.ssr_on and r in SSR_LANE) and self.ready[r] > cycle:
                self._stall("dep")
                return None
        for r in ins.writes:
            if r and not (self.ssr_on and r in SSR_LANE) and self.ready[r] > cycle:
                self._stall("dep")
                return None

        pops: dict[int, int] = {}
        if self.ssr_on:
            for r in ins.reads:
                if r in SSR_LANE:
                    pops[SSR_LANE[r]] = pops.get(SSR_LANE[r], 0) + 1
            for li, n in pops.items():
                lane = lanes[li]
                if lane.cfg.write:
                    raise SimFault(
                        f"core {self.id}: read of write-mode stream lane {li}")
                if lane.available(cycle) < n:
                    self._stall("ssr")
                    return None
            for r in ins.writes:
                if r in SSR_LANE:
                    lane = lanes[SSR_LANE[r]]
                    if not lane.cfg.write:
                        raise SimFault(
                            f"core {self.id}: write to read-mode stream lane "
                            f"{SSR_LANE[r]}")
                    if not lane.can_push():
                        self._stall("ssr")
                        return None

        plan = Plan(ins=ins, is_fp=ins.cls in (OpClass.FP2, OpClass.FP3))

        if ins.cls in (OpClass.LOAD, OpClass.STORE, OpClass.FLOAD, OpClass.FSTORE):
            popped = dict.fromkeys((0, 1), 0)
            base = self._src_value(ins.rs1, lanes, popped, False, cycle)
            addr = (base + (0 if ins.post_increment else ins.imm)) & _M32
            is_write = ins.cls in (OpClass.STORE, OpClass.FSTORE)
            dec = config_decode(addr)
            if dec is not None:
                plan.cfg = dec
            else:
                plan.mem = (addr, is_write)
        return plan

    # ------------------------------------------------------------------

    def commit(self, plan: Plan, cycle: int, lanes: list[Lane],
               cluster) -> None:
        """Apply one issued instruction's architectural effects."""
        ins = plan.ins
        t = self.timing
        popped = {0: 0, 1: 0}

        def src(r: int):
            return self._src_value(r, lanes, popped, True, cycle)

        def write_reg(r: int, value, ready: int) -> None:
            if r == 0:
                return
            if self.ssr_on and r in SSR_LANE:
                lane = lanes[SSR_LANE[r]]
                bits = f32_to_bits(value) if r >= FP_BASE else value & _M32
                lane.push(bits, cycle)
                return
            if r >= FP_BASE:
                self.f[r - FP_BASE] = value
            else:
                self.x[r] = value & _M32
            self.ready[r] = ready

        next_pc = self.pc + 1
        c = ins.cls

        if c == OpClass.ALU_RR or c == OpClass.ALU_RI:
            a = src(ins.rs1)
            b = ins.imm if c == OpClass.ALU_RI else src(ins.rs2)
            op = ins.op
            if op in ("add", "addi"):
                v = a + b
            elif op == "sub":
                v = a - b
            elif op in ("and", "andi"):
                v = a & b
            elif op in ("or", "ori"):
                v = a | b
            elif op in ("xor", "xori"):
                v = a ^ b
            elif op in ("sll", "slli"):
                v = a << (b & 31)
            elif op in ("srl", "srli"):
                v = (a & _M32) >> (b & 31)
            elif op in ("sra", "srai"):
                v = _s32(a) >> (b & 31)
            elif op in ("slt", "slti"):
                v = int(_s32(a) < _s32(b if c == OpClass.ALU_RI else b))
            elif op == "sltu":
                v = int((a & _M32) < (b & _M32))
            else:
                raise SimFault(f"unhandled ALU op {op}")
            write_reg(ins.rd, v & _M32, cycle + 1)
        elif c == OpClass.LUI:
            write_reg(ins.rd, (ins.imm << 12) & _M32, cycle + 1)
        elif c == OpClass.MUL:
            write_reg(ins.rd, (src(ins.rs1) * src(ins.rs2)) & _M32, cycle + 1)
        elif c == OpClass.MAC:
            acc = src(ins.rd)
            write_reg(ins.rd, (acc + src(ins.rs1) * src(ins.rs2)) & _M32,
                      cycle + 1)
        elif c in (OpClass.LOAD, OpClass.FLOAD):
            base = src(ins.rs1)
            if plan.cfg is not None:
                ccore, clane, off = plan.cfg
                word = cluster.config_read(ccore, clane, off)
                ready = cycle + 1
            else:
                addr = plan.mem[0]
                word = cluster.tcdm.load_word(addr)
                ready = cycle + t.load_use_latency
            if c == OpClass.LOAD:
                write_reg(ins.rd, word, ready)
            else:
                write_reg(ins.rd, bits_to_f32(word), ready)
            if ins.post_increment:
                write_reg(ins.rs1, (base + ins.imm) & _M32, cycle + 1)
        elif c in (OpClass.STORE, OpClass.FSTORE):
            base = src(ins.rs1)
            data = src(ins.rs2)
            bits = f32_to_bits(data) if c == OpClass.FSTORE else data & _M32
            if plan.cfg is not None:
                ccore, clane, off = plan.cfg
                cluster.config_write(ccore, clane, off, bits)
            else:
                addr = plan.mem[0]
                cluster.tcdm.store_word(addr, bits)
                cluster.note_store(addr, cycle)
            if ins.post_increment:
                write_reg(ins.rs1, (base + ins.imm) & _M32, cycle + 1)
        elif c == OpClass.FP2:
            a, b = src(ins.rs1), src(ins.rs2)
            op = ins.op
            if op == "fadd.s":
                v = f32(a + b)
            elif op == "fsub.s":
                v = f32(a - b)
            elif op == "fmul.s":
                v = f32(a * b)
            elif op == "fmin.s":
                v = fmin32(a, b)
            else:
                v = fmax32(a, b)
            write_reg(ins.rd, v, cycle + t.fp_add_mul_latency)
        elif c == OpClass.FP3:
            v = fma32(src(ins.rs1), src(ins.rs2), src(ins.rs3))
            write_reg(ins.rd, v, cycle + t.fma_latency)
        elif c == OpClass.FMV:
            write_reg(ins.rd, src(ins.rs1), cycle + 1)
        elif c == OpClass.FMVWX:
            write_reg(ins.rd, bits_to_f32(src(ins.rs1)), cycle + 1)
        elif c == OpClass.BRANCH:
            a, b = _s32(src(ins.rs1)), _s32(src(ins.rs2))
            op = ins.op
            taken = ((op == "beq" and a == b) or (op == "bne" and a != b)
                     or (op == "blt" and a < b) or (op == "bge" and a >= b))
            self.last_branch = cycle
            if taken:
                next_pc = ins.target
                self.next_issue = cycle + 1 + t.taken_branch_penalty
        elif c == OpClass.JUMP:
            self.last_branch = cycle
            next_pc = ins.target
            self.next_issue = cycle + 1 + t.taken_branch_penalty
        elif c == OpClass.LPSETUP:
            count = src(ins.rs1) & _M32
            self.hwl[ins.loop_index] = [self.pc + 1, ins.target, count]
            if count == 0:
                next_pc = ins.target + 1
        elif c == OpClass.CSR:
            if ins.csr != CSR_SSRCFG:
                raise SimFault(f"unknown CSR 0x{ins.csr:x}")
            old = int(self.ssr_on)
            new = (ins.imm if ins.op == "csrwi" else src(ins.rs1)) & 1
            if old and not new:
                for li, lane in enumerate(lanes):
                    if lane.cfg.write and lane.fifo:
                        cluster.warn(f"core {self.id}: stream lane {li} "
                                     "disabled with queued writes; flushing")
            self.ssr_on = bool(new)
            self.csr_quiet_until = cycle + t.csr_bubble
            if ins.op == "csrrw":
                write_reg(ins.rd, old, cycle + 1)
        elif c == OpClass.BARRIER:
            self.at_barrier = True
            cluster.barrier_arrive(self.id)
        elif c == OpClass.ECALL:
            self.halted = True
            self.finish_cycle = cycle
        elif c == OpClass.NOP:
            pass
        else:
            raise SimFault(f"unhandled opcode {ins.op}")

        # zero-overhead hardware loops re-steer the pc at the body's end;
        # when the inner loop exhausts on a shared end instruction, the
        # outer loop takes over in the same cycle
        if c not in (OpClass.BRANCH, OpClass.JUMP, OpClass.ECALL):
            for li in (0, 1):
                start, end, count = self.hwl[li]
                if self.pc == end and count > 0:
                    if count > 1:
                        self.hwl[li][2] = count - 1
                        next_pc = start
                        break
                    self.hwl[li][2] = 0

        self.pc = next_pc
        self.fetched += 1
        if ins.useful:
            self.useful += 1
