"""Instruction set and textual assembler for the simulated core.

The ISA is a compact RV32-flavored subset extended with the DSP features the
simulator models: two-level zero-overhead hardware loops (``lp.setup``),
post-increment loads/stores (``lw rd, 4(a0!)``), an integer multiply-accumulate
(``p.mac``), a cluster barrier (``p.barrier``) and the ``ssrcfg`` CSR that
gates stream semantics on t0/t1/ft0/ft1.

Registers are encoded as small integers: 0..31 for the integer file,
32..63 for the float file. There is no binary instruction encoding; programs
are simulated from the parsed symbolic form and instruction *fetches* are
counted per issued instruction.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field
from enum import IntEnum

# ---------------------------------------------------------------------------
# Registers

NUM_INT_REGS = 32
FP_BASE = 32  # float register codes are 32..63

_INT_ABI = {
    "zero": 0, "ra": 1, "sp": 2, "gp": 3, "tp": 4,
    "t0": 5, "t1": 6, "t2": 7,
    "s0": 8, "fp": 8, "s1": 9,
    "a0": 10, "a1": 11, "a2": 12, "a3": 13, "a4": 14, "a5": 15,
    "a6": 16, "a7": 17,
    "s2": 18, "s3": 19, "s4": 20, "s5": 21, "s6": 22, "s7": 23,
    "s8": 24, "s9": 25, "s10": 26, "s11": 27,
    "t3": 28, "t4": 29, "t5": 30, "t6": 31,
}
_FP_ABI = {
    "ft0": 0, "ft1": 1, "ft2": 2, "ft3": 3, "ft4": 4, "ft5": 5,
    "ft6": 6, "ft7": 7,
    "fs0": 8, "fs1": 9,
    "fa0": 10, "fa1": 11, "fa2": 12, "fa3": 13, "fa4": 14, "fa5": 15,
    "fa6": 16, "fa7": 17,
    "fs2": 18, "fs3": 19, "fs4": 20, "fs5": 21, "fs6": 22, "fs7": 23,
    "fs8": 24, "fs9": 25, "fs10": 26, "fs11": 27,
    "ft8": 28, "ft9": 29, "ft10": 30, "ft11": 31,
}

INT_REG_NAMES: dict[int, str] = {}
FP_REG_NAMES: dict[int, str] = {}
for _n, _i in _INT_ABI.items():
    INT_REG_NAMES.setdefault(_i, _n)
for _n, _i in _FP_ABI.items():
    FP_REG_NAMES.setdefault(_i, _n)

# Registers with potential stream semantics: t0/t1 map to lane 0/1 and
# ft0/ft1 map to the same two lanes.
T0, T1 = _INT_ABI["t0"], _INT_ABI["t1"]
FT0, FT1 = FP_BASE + _FP_ABI["ft0"], FP_BASE + _FP_ABI["ft1"]
SSR_REGS = (T0, T1, FT0, FT1)
SSR_LANE = {T0: 0, T1: 1, FT0: 0, FT1: 1}


def int_reg(name: str) -> int:
    return _INT_ABI[name]


def fp_reg(name: str) -> int:
    return FP_BASE + _FP_ABI[name]


def is_fp(code: int) -> bool:
    return code >= FP_BASE


def reg_name(code: int) -> str:
    if code >= FP_BASE:
        return FP_REG_NAMES[code - FP_BASE]
    return INT_REG_NAMES[code]


def parse_reg(tok: str) -> int | None:
    """Register name or xN/fN form to its code, or None."""
    t = tok.strip().lower()
    if t in _INT_ABI:
        return _INT_ABI[t]
    if t in _FP_ABI:
        return FP_BASE + _FP_ABI[t]
    if len(t) >= 2 and t[0] in "xf" and t[1:].isdigit():
        i = int(t[1:])
        if 0 <= i < 32:
            return i if t[0] == "x" else FP_BASE + i
    return None


def is_ssr_access(reg: int, ssr_enabled: bool) -> bool:
    """True iff the access is diverted to a stream: reg in {t0,t1,ft0,ft1}
    and stream semantics enabled."""
    return ssr_enabled and reg in SSR_LANE


# ---------------------------------------------------------------------------
# Opcodes

class OpClass(IntEnum):
    ALU_RR = 0      # add rd, rs1, rs2
    ALU_RI = 1      # addi rd, rs1, imm
    LUI = 2         # lui rd, imm
    MUL = 3         # mul rd, rs1, rs2
    MAC = 4         # p.mac rd, rs1, rs2  (rd += rs1*rs2)
    LOAD = 5        # lw rd, imm(rs1[!])
    STORE = 6       # sw rs2, imm(rs1[!])
    FLOAD = 7       # flw fd, imm(rs1[!])
    FSTORE = 8      # fsw fs, imm(rs1[!])
    FP2 = 9         # fadd.s fd, fs1, fs2 (also fsub/fmul/fmin/fmax)
    FP3 = 10        # fmadd.s fd, fs1, fs2, fs3
    FMV = 11        # fmv.s fd, fs
    FMVWX = 12      # fmv.w.x fd, rs
    BRANCH = 13     # beq rs1, rs2, label
    JUMP = 14       # j label
    LPSETUP = 15    # lp.setup l0, rs, label
    CSR = 16        # csrwi ssrcfg, imm / csrrw rd, ssrcfg, rs
    BARRIER = 17    # p.barrier
    ECALL = 18
    NOP = 19


@dataclass(frozen=True)
class OpInfo:
    cls: OpClass
    useful: bool          # counts toward useful ALU/FPU operations
    operands: str         # signature key used by the parser


# Useful-op classification: FP compute and integer multiply/accumulate plus
# register-register integer ALU ops contribute directly to kernel results;
# immediate forms (pointer/counter bookkeeping), moves, memory ops, branches
# and loop/CSR management do not.
OPCODES: dict[str, OpInfo] = {
    "add":     OpInfo(OpClass.ALU_RR, True, "rrr"),
    "sub":     OpInfo(OpClass.ALU_RR, True, "rrr"),
    "and":     OpInfo(OpClass.ALU_RR, True, "rrr"),
    "or":      OpInfo(OpClass.ALU_RR, True, "rrr"),
    "xor":     OpInfo(OpClass.ALU_RR, True, "rrr"),
    "sll":     OpInfo(OpClass.ALU_RR, True, "rrr"),
    "srl":     OpInfo(OpClass.ALU_RR, True, "rrr"),
    "sra":     OpInfo(OpClass.ALU_RR, True, "rrr"),
    "slt":     OpInfo(OpClass.ALU_RR, True, "rrr"),
    "sltu":    OpInfo(OpClass.ALU_RR, True, "rrr"),
    "addi":    OpInfo(OpClass.ALU_RI, False, "rri"),
    "andi":    OpInfo(OpClass.ALU_RI, False, "rri"),
    "ori":     OpInfo(OpClass.ALU_RI, False, "rri"),
    "xori":    OpInfo(OpClass.ALU_RI, False, "rri"),
    "slli":    OpInfo(OpClass.ALU_RI, False, "rri"),
    "srli":    OpInfo(OpClass.ALU_RI, False, "rri"),
    "srai":    OpInfo(OpClass.ALU_RI, False, "rri"),
    "slti":    OpInfo(OpClass.ALU_RI, False, "rri"),
    "lui":     OpInfo(OpClass.LUI, False, "ri"),
    "mul":     OpInfo(OpClass.MUL, True, "rrr"),
    "p.mac":   OpInfo(OpClass.MAC, True, "rrr"),
    "lw":      OpInfo(OpClass.LOAD, False, "rm"),
    "sw":      OpInfo(OpClass.STORE, False, "rm"),
    "flw":     OpInfo(OpClass.FLOAD, False, "rm"),
    "fsw":     OpInfo(OpClass.FSTORE, False, "rm"),
    "fadd.s":  OpInfo(OpClass.FP2, True, "rrr"),
    "fsub.s":  OpInfo(OpClass.FP2, True, "rrr"),
    "fmul.s":  OpInfo(OpClass.FP2, True, "rrr"),
    "fmin.s":  OpInfo(OpClass.FP2, True, "rrr"),
    "fmax.s":  OpInfo(OpClass.FP2, True, "rrr"),
    "fmadd.s": OpInfo(OpClass.FP3, True, "rrrr"),
    "fmv.s":   OpInfo(OpClass.FMV, False, "rr"),
    "fmv.w.x": OpInfo(OpClass.FMVWX, False, "rr"),
    "beq":     OpInfo(OpClass.BRANCH, False, "rrl"),
    "bne":     OpInfo(OpClass.BRANCH, False, "rrl"),
    "blt":     OpInfo(OpClass.BRANCH, False, "rrl"),
    "bge":     OpInfo(OpClass.BRANCH, False, "rrl"),
    "j":       OpInfo(OpClass.JUMP, False, "l"),
    "lp.setup": OpInfo(OpClass.LPSETUP, False, "nrl"),
    "csrwi":   OpInfo(OpClass.CSR, False, "ci"),
    "csrrw":   OpInfo(OpClass.CSR, False, "rcr"),
    "p.barrier": OpInfo(OpClass.BARRIER, False, ""),
    "ecall":   OpInfo(OpClass.ECALL, False, ""),
    "nop":     OpInfo(OpClass.NOP, False, ""),
}

CSR_NAMES = {"ssrcfg": 0x7C0}
CSR_SSRCFG = 0x7C0


# ---------------------------------------------------------------------------
# Instructions and programs

@dataclass
class Instruction:
    """One decoded instruction.

    `reads`/`writes` hold the per-execution register-file port accesses,
    precomputed at parse time. The register file has 3 read and 2 write
    ports, so len(reads) <= 3 and len(writes) <= 2 always holds.
    """
    op: str
    cls: OpClass
    rd: int = -1              # destination register code (-1: none)
    rs1: int = -1
    rs2: int = -1
    rs3: int = -1
    imm: int = 0
    post_increment: bool = False
    target: int = -1          # branch/loop target instruction index
    target_label: str = field(default="", compare=False)
    loop_index: int = 0       # lp.setup: hardware loop 0 or 1
    csr: int = 0
    reads: tuple[int, ...] = ()
    writes: tuple[int, ...] = ()
    useful: bool = False
    line: int = field(default=0, compare=False)

    def ssr_regs(self) -> tuple[int, ...]:
        """Registers of this instruction that belong to the stream set."""
        return tuple(r for r in (*self.reads, *self.writes) if r in SSR_LANE)


@dataclass
class Program:
    """Parsed assembly: instruction list, resolved labels, data image."""
    instructions: list[Instruction] = field(default_factory=list)
    labels: dict[str, int] = field(default_factory=dict)
    data: dict[int, int] = field(default_factory=dict)   # byte address -> byte
    data_labels: dict[str, int] = field(default_factory=dict)
    source: str = "<asm>"

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return (self.instructions == other.instructions
                and self.data == other.data)


class AsmError(Exception):
    """Assembly failure; message carries file:line:col diagnostics."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(diagnostics))


def _compute_ports(ins: Instruction) -> None:
    c = ins.cls
    if c in (OpClass.ALU_RR, OpClass.MUL, OpClass.FP2):
        ins.reads = (ins.rs1, ins.rs2)
        ins.writes = (ins.rd,)
    elif c == OpClass.MAC:
        ins.reads = (ins.rd, ins.rs1, ins.rs2)
        ins.writes = (ins.rd,)
    elif c == OpClass.ALU_RI:
        ins.reads = (ins.rs1,)
        ins.writes = (ins.rd,)
    elif c == OpClass.LUI:
        ins.writes = (ins.rd,)
    elif c in (OpClass.LOAD, OpClass.FLOAD):
        ins.reads = (ins.rs1,)
        ins.writes = (ins.rd, ins.rs1) if ins.post_increment else (ins.rd,)
    elif c in (OpClass.STORE, OpClass.FSTORE):
        ins.reads = (ins.rs1, ins.rs2)
        ins.writes = (ins.rs1,) if ins.post_increment else ()
    elif c == OpClass.FP3:
        ins.reads = (ins.rs1, ins.rs2, ins.rs3)
        ins.writes = (ins.rd,)
    elif c in (OpClass.FMV, OpClass.FMVWX):
        ins.reads = (ins.rs1,)
        ins.writes = (ins.rd,)
    elif c == OpClass.BRANCH:
        ins.reads = (ins.rs1, ins.rs2)
    elif c == OpClass.LPSETUP:
        ins.reads = (ins.rs1,)
    elif c == OpClass.CSR and ins.op == "csrrw":
        ins.reads = (ins.rs1,)
        ins.writes = (ins.rd,) if ins.rd > 0 else ()


def port_accesses(ins: Instruction) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Exact per-execution register-file accesses, one entry per port use."""
    return ins.reads, ins.writes


# ---------------------------------------------------------------------------
# Parser

_LABEL_RE = re.compile(r"^\s*([A-Za-z_.][A-Za-z0-9_.$]*)\s*:")


def _parse_int(tok: str) -> int:
    t = tok.strip().lower().replace("_", "")
    neg = t.startswith("-")
    if neg:
        t = t[1:]
    if t.startswith("0x"):
        v = int(t, 16)
    elif t.startswith("0b"):
        v = int(t, 2)
    else:
        v = int(t, 10)
    return -v if neg else v


def _split_operands(rest: str) -> list[str]:
    out: list[str] = []
    depth, cur = 0, []
    for ch in rest:
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail:
        out.append(tail)
    return [o for o in out if o]


def _parse_mem_operand(tok: str):
    if not tok.endswith(")") or "(" not in tok:
        return None
    off, _, basepart = tok.partition("(")
    base = basepart[:-1].strip()
    post = base.endswith("!")
    if post:
        base = base[:-1].strip()
    reg = parse_reg(base)
    if reg is None or reg >= FP_BASE:
        return None
    try:
        imm = _parse_int(off) if off.strip() else 0
    except ValueError:
        return None
    return imm, reg, post


def _li_length(val: int) -> int:
    v = val & 0xFFFFFFFF
    sv = v - (1 << 32) if v >= (1 << 31) else v
    if -2048 <= sv < 2048:
        return 1
    lo = sv & 0xFFF
    if lo >= 0x800:
        lo -= 0x1000
    return 2 if lo else 1


@dataclass
class _Stmt:
    lineno: int
    col: int
    mnem: str
    rest: str


def parse_assembly(text: str, source: str = "<asm>") -> Program:
    """Assemble `text` into a Program.

    One instruction or directive per line; `;` and `#` start comments;
    `label:` prefixes resolve to instruction indices, or to data addresses
    when they label a data directive. Pseudo-ops li, la and mv expand at
    parse time (`la` always to lui+addi). Raises AsmError listing every
    malformed line as `source:line:col: message`.
    """
    errors: list[str] = []

    def err(lineno: int, col: int, msg: str) -> None:
        errors.append(f"{source}:{lineno}:{col}: {msg}")

    # --- tokenize lines into labeled statements -------------------------
    stmts: list[tuple[list[tuple[str, int]], _Stmt | None]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw
        for cc in (";", "#"):
            if cc in line:
                line = line.split(cc, 1)[0]
        labels: list[tuple[str, int]] = []
        m = _LABEL_RE.match(line)
        while m:
            labels.append((m.group(1), lineno))
            line = line[m.end():]
            m = _LABEL_RE.match(line)
        line = line.strip()
        if not line and not labels:
            continue
        stmt = None
        if line:
            parts = line.split(None, 1)
            col = raw.find(parts[0]) + 1
            stmt = _Stmt(lineno, col, parts[0].lower(), parts[1] if len(parts) > 1 else "")
        stmts.append((labels, stmt))

    prog = Program(source=source)

    # --- pass 1: data image, data labels, instruction indices ------------
    data_cursor = 0
    instr_index = 0
    pending: list[tuple[str, int]] = []

    def bind(to_data: bool) -> None:
        nonlocal pending
        for name, ln in pending:
            if name in prog.labels or name in prog.data_labels:
                err(ln, 1, f"duplicate label '{name}'")
            elif to_data:
                prog.data_labels[name] = data_cursor
            else:
                prog.labels[name] = instr_index
        pending = []

    def emit_bytes(bs: bytes) -> None:
        nonlocal data_cursor
        for b in bs:
            prog.data[data_cursor] = b
            data_cursor += 1

    for labels, stmt in stmts:
        pending.extend(labels)
        if stmt is None:
            continue
        mnem, rest, lineno, col = stmt.mnem, stmt.rest, stmt.lineno, stmt.col
        if mnem.startswith("."):
            ops = _split_operands(rest)
            try:
                if mnem == ".org":
                    data_cursor = _parse_int(ops[0])
                    bind(True)
                elif mnem == ".align":
                    a = _parse_int(ops[0])
                    while data_cursor % a:
                        data_cursor += 1
                    bind(True)
                elif mnem == ".word":
                    if data_cursor % 4:
                        err(lineno, col, "misaligned .word directive")
                    bind(True)
                    for o in ops:
                        emit_bytes((_parse_int(o) & 0xFFFFFFFF).to_bytes(4, "little"))
                elif mnem == ".float":
                    if data_cursor % 4:
                        err(lineno, col, "misaligned .float directive")
                    bind(True)
                    for o in ops:
                        emit_bytes(struct.pack("<f", float(o)))
                elif mnem == ".byte":
                    bind(True)
                    for o in ops:
                        emit_bytes(bytes([_parse_int(o) & 0xFF]))
                elif mnem == ".space":
                    bind(True)
                    emit_bytes(bytes(_parse_int(ops[0])))
                else:
                    err(lineno, col, f"unknown directive '{mnem}'")
            except (ValueError, IndexError):
                err(lineno, col, f"malformed operands for '{mnem}'")
            continue
        # instruction: account for pseudo expansion length
        bind(False)
        if mnem == "li":
            ops = _split_operands(rest)
            if len(ops) == 2:
                try:
                    instr_index += _li_length(_parse_int(ops[1]))
                    continue
                except ValueError:
                    err(lineno, col, "'li' needs a numeric value (use la for labels)")
                    continue
            instr_index += 1
        elif mnem == "la":
            instr_index += 2
        else:
            instr_index += 1
    bind(False)

    # --- pass 2: decode instructions -------------------------------------
    out = prog.instructions

    def finish(ins: Instruction, lineno: int) -> None:
        ins.useful = OPCODES[ins.op].useful
        _compute_ports(ins)
        ins.line = lineno
        out.append(ins)

    def expand_li(rd: int, val: int, lineno: int) -> None:
        v = val & 0xFFFFFFFF
        sv = v - (1 << 32) if v >= (1 << 31) else v
        if -2048 <= sv < 2048:
            finish(Instruction(op="addi", cls=OpClass.ALU_RI, rd=rd, rs1=0, imm=sv), lineno)
            return
        lo = sv & 0xFFF
        if lo >= 0x800:
            lo -= 0x1000
        hi = ((sv - lo) >> 12) & 0xFFFFF
        finish(Instruction(op="lui", cls=OpClass.LUI, rd=rd, imm=hi), lineno)
        if lo:
            finish(Instruction(op="addi", cls=OpClass.ALU_RI, rd=rd, rs1=rd, imm=lo), lineno)

    for labels, stmt in stmts:
        if stmt is None or stmt.mnem.startswith("."):
            continue
        mnem, rest, lineno, col = stmt.mnem, stmt.rest, stmt.lineno, stmt.col
        ops = _split_operands(rest)

        def reg_op(i: int, want_fp: bool | None = None) -> int:
            if i >= len(ops):
                err(lineno, col, f"'{mnem}' missing operand {i + 1}")
                return 0
            r = parse_reg(ops[i])
            if r is None:
                err(lineno, col, f"'{ops[i]}' is not a register")
                return 0
            if want_fp is True and r < FP_BASE:
                err(lineno, col, f"'{ops[i]}': float register expected")
            elif want_fp is False and r >= FP_BASE:
                err(lineno, col, f"'{ops[i]}': integer register expected")
            return r

        def label_op(i: int) -> tuple[int, str]:
            name = ops[i] if i < len(ops) else ""
            if name in prog.labels:
                return prog.labels[name], name
            err(lineno, col, f"unresolved label '{name}'")
            return -1, name

        if mnem == "li":
            if len(ops) != 2:
                err(lineno, col, "'li' expects rd, value")
                continue
            rd = reg_op(0, want_fp=False)
            try:
                expand_li(rd, _parse_int(ops[1]), lineno)
            except ValueError:
                pass  # reported in pass 1
            continue
        if mnem == "la":
            if len(ops) != 2:
                err(lineno, col, "'la' expects rd, label")
                continue
            rd = reg_op(0, want_fp=False)
            addr = prog.data_labels.get(ops[1])
            if addr is None:
                try:
                    addr = _parse_int(ops[1])
                except ValueError:
                    err(lineno, col, f"unresolved label '{ops[1]}'")
                    continue
            lo = addr & 0xFFF
            if lo >= 0x800:
                lo -= 0x1000
            hi = ((addr - lo) >> 12) & 0xFFFFF
            finish(Instruction(op="lui", cls=OpClass.LUI, rd=rd, imm=hi), lineno)
            finish(Instruction(op="addi", cls=OpClass.ALU_RI, rd=rd, rs1=rd, imm=lo), lineno)
            continue
        if mnem == "mv":
            if len(ops) != 2:
                err(lineno, col, "'mv' expects rd, rs")
                continue
            finish(Instruction(op="addi", cls=OpClass.ALU_RI,
                               rd=reg_op(0, False), rs1=reg_op(1, False), imm=0), lineno)
            continue

        info = OPCODES.get(mnem)
        if info is None:
            err(lineno, col, f"unknown mnemonic '{mnem}'")
            continue

        ins = Instruction(op=mnem, cls=info.cls)
        sig = info.operands
        want = 2 if sig == "rm" else len(sig)
        if len(ops) != want:
            err(lineno, col, f"'{mnem}' expects {want} operands, got {len(ops)}")
            continue

        ok = True
        if sig == "rr":
            if info.cls == OpClass.FMV:
                ins.rd = reg_op(0, True)
                ins.rs1 = reg_op(1, True)
            else:  # fmv.w.x: float destination, integer source
                ins.rd = reg_op(0, True)
                ins.rs1 = reg_op(1, False)
        elif sig == "rrr":
            fp = True if info.cls == OpClass.FP2 else False
            ins.rd = reg_op(0, fp)
            ins.rs1 = reg_op(1, fp)
            ins.rs2 = reg_op(2, fp)
        elif sig == "rrrr":
            ins.rd = reg_op(0, True)
            ins.rs1 = reg_op(1, True)
            ins.rs2 = reg_op(2, True)
            ins.rs3 = reg_op(3, True)
        elif sig == "rri":
            ins.rd = reg_op(0, False)
            ins.rs1 = reg_op(1, False)
            try:
                ins.imm = _parse_int(ops[2])
            except ValueError:
                err(lineno, col, f"'{ops[2]}' is not an immediate")
                ok = False
        elif sig == "ri":
            ins.rd = reg_op(0, False)
            try:
                ins.imm = _parse_int(ops[1])
            except ValueError:
                err(lineno, col, f"'{ops[1]}' is not an immediate")
                ok = False
        elif sig == "rm":
            is_store = info.cls in (OpClass.STORE, OpClass.FSTORE)
            is_float = info.cls in (OpClass.FLOAD, OpClass.FSTORE)
            r = reg_op(0, is_float)
            mem = _parse_mem_operand(ops[1])
            if mem is None:
                err(lineno, col, f"'{ops[1]}' is not a memory operand")
                ok = False
            else:
                ins.imm, ins.rs1, ins.post_increment = mem
                if is_store:
                    ins.rs2 = r
                else:
                    ins.rd = r
        elif sig == "rrl":
            ins.rs1 = reg_op(0, False)
            ins.rs2 = reg_op(1, False)
            ins.target, ins.target_label = label_op(2)
            ok = ins.target >= 0
        elif sig == "l":
            ins.target, ins.target_label = label_op(0)
            ok = ins.target >= 0
        elif sig == "nrl":
            ln = ops[0].lower()
            if ln in ("l0", "0"):
                ins.loop_index = 0
            elif ln in ("l1", "1"):
                ins.loop_index = 1
            else:
                err(lineno, col, f"'{ops[0]}' is not a hardware loop (l0/l1)")
                ok = False
            ins.rs1 = reg_op(1, False)
            ins.target, ins.target_label = label_op(2)
            ok = ok and ins.target >= 0
        elif sig == "ci":
            csr = CSR_NAMES.get(ops[0].lower())
            if csr is None:
                err(lineno, col, f"unknown CSR '{ops[0]}'")
                ok = False
            else:
                ins.csr = csr
            try:
                ins.imm = _parse_int(ops[1])
            except (ValueError, IndexError):
                err(lineno, col, "csrwi needs an immediate")
                ok = False
        elif sig == "rcr":
            ins.rd = reg_op(0, False)
            csr = CSR_NAMES.get(ops[1].lower())
            if csr is None:
                err(lineno, col, f"unknown CSR '{ops[1]}'")
                ok = False
            else:
                ins.csr = csr
            ins.rs1 = reg_op(2, False)
        if not ok:
            continue
        finish(ins, lineno)

    for ins in out:
        if len(ins.reads) > 3 or len(ins.writes) > 2:
            errors.append(f"{source}:{ins.line}:1: '{ins.op}' exceeds register ports")
    for name, idx in prog.labels.items():
        if idx > len(out):
            errors.append(f"{source}:1:1: label '{name}' beyond program end")

    if errors:
        raise AsmError(errors)
    return prog


# ---------------------------------------------------------------------------
# Printer

def instruction_to_text(ins: Instruction, labels_at: dict[int, str] | None = None) -> str:
    def tgt() -> str:
        if labels_at and ins.target in labels_at:
            return labels_at[ins.target]
        return ins.target_label or f".L{ins.target}"

    c = ins.cls
    r = reg_name
    if c in (OpClass.ALU_RR, OpClass.MUL, OpClass.MAC, OpClass.FP2):
        return f"{ins.op} {r(ins.rd)}, {r(ins.rs1)}, {r(ins.rs2)}"
    if c == OpClass.ALU_RI:
        return f"{ins.op} {r(ins.rd)}, {r(ins.rs1)}, {ins.imm}"
    if c == OpClass.LUI:
        return f"lui {r(ins.rd)}, 0x{ins.imm:x}"
    if c in (OpClass.LOAD, OpClass.FLOAD):
        bang = "!" if ins.post_increment else ""
        return f"{ins.op} {r(ins.rd)}, {ins.imm}({r(ins.rs1)}{bang})"
    if c in (OpClass.STORE, OpClass.FSTORE):
        bang = "!" if ins.post_increment else ""
        return f"{ins.op} {r(ins.rs2)}, {ins.imm}({r(ins.rs1)}{bang})"
    if c == OpClass.FP3:
        return f"{ins.op} {r(ins.rd)}, {r(ins.rs1)}, {r(ins.rs2)}, {r(ins.rs3)}"
    if c in (OpClass.FMV, OpClass.FMVWX):
        return f"{ins.op} {r(ins.rd)}, {r(ins.rs1)}"
    if c == OpClass.BRANCH:
        return f"{ins.op} {r(ins.rs1)}, {r(ins.rs2)}, {tgt()}"
    if c == OpClass.JUMP:
        return f"j {tgt()}"
    if c == OpClass.LPSETUP:
        return f"lp.setup l{ins.loop_index}, {r(ins.rs1)}, {tgt()}"
    if c == OpClass.CSR:
        if ins.op == "csrwi":
            return f"csrwi ssrcfg, {ins.imm}"
        return f"csrrw {r(ins.rd)}, ssrcfg, {r(ins.rs1)}"
    return ins.op


def program_to_text(prog: Program) -> str:
    """Pretty-print a program; parsing the output yields an equal Program."""
    labels_at: dict[int, str] = {}
    for name, idx in prog.labels.items():
        labels_at.setdefault(idx, name)
    lines: list[str] = []

    addrs = sorted(prog.data)
    i = 0
    while i < len(addrs):
        start = addrs[i]
        j = i
        while j + 1 < len(addrs) and addrs[j + 1] == addrs[j] + 1:
            j += 1
        chunk = bytes(prog.data[a] for a in addrs[i:j + 1])
        lines.append(f".org 0x{start:x}")
        k = 0
        while k + 4 <= len(chunk):
            w = int.from_bytes(chunk[k:k + 4], "little")
            lines.append(f".word 0x{w:x}")
            k += 4
        if k < len(chunk):
            lines.append(".byte " + ", ".join(str(b) for b in chunk[k:]))
        i = j + 1

    for idx, ins in enumerate(prog.instructions):
        if idx in labels_at:
            lines.append(f"{labels_at[idx]}:")
        lines.append("    " + instruction_to_text(ins, labels_at))
    n = len(prog.instructions)
    if n in labels_at:
        lines.append(f"{labels_at[n]}:")
    return "\n".join(lines) + "\n"
