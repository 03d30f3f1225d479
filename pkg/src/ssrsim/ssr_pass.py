"""Loop-nest-to-stream compiler pass on a small machine-level IR.

The IR is an S-expression form of a counted loop nest in SSA shape: every
value is defined once, loop-carried values are phi nodes at loop headers,
and memory accesses take their address from a value. A minimal program:

    (loop 2048
      (pa (phi 0x1000 (add pa 4)))
      (va (load pa))
      (acc (phi 0 (add acc va))))
    (store 0x3000 acc)

The pass (1) takes loops from the tree, (2) marks every load/store whose
address is a phi-plus-constant-add counter, recursively across levels, as
a stream candidate, (3) allocates candidates to the two lanes deepest
first, (4) emits lane configuration ahead of the loop header, (5) replaces
the memory access with a stream-register use and deletes its pointer
arithmetic, and (6) keeps t0/t1/ft0/ft1 away from ordinary values inside
the stream region. Nests whose iteration total is below the break-even
bound are left untouched; unknown (symbolic) bounds are assumed profitable
and flagged.

Integer arithmetic wraps mod 2^32; float values are binary32. A multiply
feeding an accumulator add fuses into the multiply-accumulate instruction
during lowering. A streamed load's value must be used exactly once (the
pass does not exploit the repeat register); multi-use loads are excluded
from candidacy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .analytic import break_even
from .fpmath import f32, f32_to_bits

INT_OPS = {"add", "sub", "mul", "and", "or", "xor"}
FP_OPS = {"fadd", "fmul"}
OFF_STATUS, OFF_BOUND, OFF_STRIDE = 0x00, 0x08, 0x18


class PassError(Exception):
    pass


@dataclass
class Node:
    """One SSA value or store statement."""
    name: str
    op: str                      # const | sym | phi | load | loadf | store | arith op
    args: list = field(default_factory=list)   # value names or int literals
    level: int = 0               # 0 = outside all loops
    is_float: bool = False


@dataclass
class Loop:
    bound: int | str             # constant or symbol name
    level: int
    body: list = field(default_factory=list)    # Node names and Loop objects


@dataclass
class LoopNestIR:
    nodes: dict[str, Node]
    top: list                    # Node names and Loops, program order
    loops: list[Loop]            # all loops, outermost first per nest

    def node(self, name: str) -> Node:
        return self.nodes[name]


@dataclass
class StreamCandidate:
    access: str                  # node name of the load/store
    depth: int                   # enclosing loop count
    bounds: list                 # per level, outermost first
    strides: list[int]           # per level, outermost first (0 = constant)
    base: int | str
    write: bool
    pointer_chain: list[str]     # phi nodes consumed by this access


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.split(";", 1)[0]
        out.extend(_TOKEN.findall(line))
    return out


def _read(tokens: list[str], pos: int):
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while tokens[pos] != ")":
            item, pos = _read(tokens, pos)
            items.append(item)
        return items, pos + 1
    if tok == ")":
        raise PassError("unbalanced ')'")
    try:
        return int(tok, 0), pos + 1
    except ValueError:
        return tok, pos + 1


def parse_ir(text: str) -> LoopNestIR:
    tokens = _tokenize(text)
    forms = []
    pos = 0
    while pos < len(tokens):
        form, pos = _read(tokens, pos)
        forms.append(form)
    ir = LoopNestIR(nodes={}, top=[], loops=[])
    fresh = [0]

    def fresh_name() -> str:
        fresh[0] += 1
        return f".t{fresh[0]}"

    def define(name: str, expr, level: int, sink: list) -> str:
        """Flatten one expression into a Node named `name`."""
        if name in ir.nodes:
            raise PassError(f"value '{name}' defined twice")
        if isinstance(expr, int):
            node = Node(name, "const", [expr], level)
        elif isinstance(expr, str):
            node = Node(name, "sym", [expr], level)
        elif isinstance(expr, list) and expr:
            op = expr[0]
            args = []
            for arg in expr[1:]:
                if isinstance(arg, list):
                    sub = fresh_name()
                    define(sub, arg, level, sink)
                    args.append(sub)
                else:
                    args.append(arg)
            node = Node(name, op, args, level)
        else:
            raise PassError(f"malformed expression for '{name}'")
        ir.nodes[name] = node
        sink.append(name)
        return name

    def walk(form, level: int, sink: list) -> None:
        if not isinstance(form, list) or not form:
            raise PassError(f"malformed top-level form: {form!r}")
        head = form[0]
        if head == "loop":
            loop = Loop(bound=form[1], level=level + 1)
            ir.loops.append(loop)
            for item in form[2:]:
                walk(item, level + 1, loop.body)
            sink.append(loop)
        elif head == "store":
            define(fresh_name(), form, level, sink)
        elif isinstance(head, str) and len(form) == 2:
            define(head, form[1], level, sink)
        else:
            raise PassError(f"unrecognized form: {form!r}")

    for form in forms:
        if isinstance(form, list) and form and form[0] == "nest":
            for item in form[1:]:
                walk(item, 0, ir.top)
        else:
            walk(form, 0, ir.top)

    _infer_types(ir)
    return ir


def _infer_types(ir: LoopNestIR) -> None:
    changed = True
    while changed:
        changed = False
        for node in ir.nodes.values():
            if node.is_float:
                continue
            fl = node.op in FP_OPS or node.op == "loadf"
            if node.op == "phi":
                fl = any(isinstance(a, str) and ir.nodes[a].is_float
                         for a in node.args)
            if node.op in INT_OPS or node.op in FP_OPS:
                fl = fl or any(isinstance(a, str) and ir.nodes[a].is_float
                               for a in node.args)
            if fl:
                node.is_float = True
                changed = True


# ---------------------------------------------------------------------------
# evaluation oracle

def evaluate(ir: LoopNestIR, memory: dict[int, int] | None = None,
             symbols: dict[str, int] | None = None) -> dict[int, int]:
    """Interpret the nest; returns the final word memory. Integer values
    wrap mod 2^32, float values round to binary32."""
    mem = dict(memory or {})
    syms = symbols or {}
    env: dict[str, object] = {}

    def val(a):
        if isinstance(a, int):
            return a
        return env[a]

    def exec_op(node: Node):
        op = node.op
        if op == "const":
            env[node.name] = node.args[0]
        elif op == "sym":
            env[node.name] = syms[node.args[0]]
        elif op == "load":
            env[node.name] = mem.get(val(node.args[0]) & 0xFFFFFFFF, 0)
        elif op == "loadf":
            from .fpmath import bits_to_f32
            env[node.name] = bits_to_f32(mem.get(val(node.args[0]) & 0xFFFFFFFF, 0))
        elif op == "store":
            v = val(node.args[1])
            bits = f32_to_bits(v) if isinstance(v, float) else v & 0xFFFFFFFF
            mem[val(node.args[0]) & 0xFFFFFFFF] = bits
        elif op == "phi":
            pass  # handled by the loop driver
        elif op in INT_OPS:
            a, b = val(node.args[0]), val(node.args[1])
            r = {"add": a + b, "sub": a - b, "mul": a * b,
                 "and": a & b, "or": a | b, "xor": a ^ b}[op]
            env[node.name] = r & 0xFFFFFFFF
        elif op in FP_OPS:
            a, b = val(node.args[0]), val(node.args[1])
            env[node.name] = f32(a + b) if op == "fadd" else f32(a * b)
        else:
            raise PassError(f"cannot evaluate op '{node.op}'")

    def run_body(items) -> None:
        for item in items:
            if isinstance(item, Loop):
                run_loop(item)
            else:
                exec_op(ir.node(item))

    def phis_of(items):
        return [ir.node(i) for i in items
                if not isinstance(i, Loop) and ir.node(i).op == "phi"]

    def step_values(items, phis):
        out = {}
        for p in phis:
            out[p.name] = val(p.args[1])
        return out

    def run_loop(loop: Loop) -> None:
        bound = loop.bound if isinstance(loop.bound, int) else syms[loop.bound]
        phis = phis_of(loop.body)
        for p in phis:
            env[p.name] = val(p.args[0])
        for _ in range(bound):
            for item in loop.body:
                if isinstance(item, Loop):
                    run_loop(item)
                elif ir.node(item).op != "phi":
                    exec_op(ir.node(item))
            nxt = step_values(loop.body, phis)
            for p in phis:
                v = nxt[p.name]
                env[p.name] = v if isinstance(v, float) else v & 0xFFFFFFFF

    run_body(ir.top)
    return mem


# ---------------------------------------------------------------------------
# phases 1-3: candidates and allocation

def _uses(ir: LoopNestIR) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {n: [] for n in ir.nodes}
    for node in ir.nodes.values():
        args = node.args
        if node.op == "phi":
            args = node.args  # init and step both count
        for a in args:
            if isinstance(a, str) and a in out:
                out[a].append(node.name)
    return out


def find_candidates(ir: LoopNestIR) -> list[StreamCandidate]:
    """Every load/store whose address is a phi and constant-add counter
    loop, checked recursively across the nesting levels."""
    uses = _uses(ir)
    # map each node to its enclosing loop chain
    chain_of: dict[str, list[Loop]] = {}

    def walk(items, chain):
        for item in items:
            if isinstance(item, Loop):
                walk(item.body, chain + [item])
            else:
                chain_of[item] = chain

    walk(ir.top, [])

    def match_pointer(name, chain) -> tuple[list[int], int | str, list[str]] | None:
        """Strides per level (outermost first), base, and the phi chain."""
        strides = [0] * len(chain)
        phis = []
        cur = name
        level = len(chain)
        while True:
            if isinstance(cur, int):
                return strides, cur, phis
            node = ir.nodes.get(cur)
            if node is None:
                return None
            if node.op == "const":
                return strides, node.args[0], phis
            if node.op == "sym":
                return strides, node.args[0], phis
            if node.op != "phi" or node.level == 0 or node.level > level:
                return None
            step = node.args[1]
            stepn = ir.nodes.get(step) if isinstance(step, str) else None
            if stepn is None or stepn.op != "add":
                return None
            sa, sb = stepn.args
            if sa == node.name and isinstance(sb, int):
                inc = sb
            elif sb == node.name and isinstance(sa, int):
                inc = sa
            else:
                return None
            strides[node.level - 1] = inc
            phis.append(node.name)
            level = node.level - 1
            cur = node.args[0]

    cands = []
    for name, node in ir.nodes.items():
        if node.op not in ("load", "loadf", "store"):
            continue
        chain = chain_of.get(name, [])
        if not chain:
            continue
        m = match_pointer(node.args[0], chain)
        if m is None:
            continue
        strides, base, phis = m
        if node.op != "store" and len(uses[name]) != 1:
            continue  # repeat-register territory; leave as an explicit load
        # pointer phis must serve only this access's address chain: their
        # own step add, the access (innermost) or the next-inner phi
        clean = True
        for i, p in enumerate(phis):
            inner = name if i == 0 else phis[i - 1]
            outside = [u for u in uses[p]
                       if u != inner and ir.nodes[u].op != "add"]
            step_users = [u for u in uses[p] if ir.nodes[u].op == "add"]
            if outside or len(step_users) != 1:
                clean = False
        if not clean:
            continue
        cands.append(StreamCandidate(
            access=name,
            depth=len(chain),
            bounds=[lp.bound for lp in chain],
            strides=strides,
            base=base,
            write=node.op == "store",
            pointer_chain=phis,
        ))
    return cands


def allocate(cands: list[StreamCandidate], lanes: int = 2) -> dict[str, int]:
    """Deepest candidates first, ties by source order; one candidate per
    lane per loop-nest execution. Unassigned candidates stay as explicit
    memory accesses."""
    order = sorted(range(len(cands)), key=lambda i: -cands[i].depth)
    assignment: dict[str, int] = {}
    free = list(range(lanes))
    for i in order:
        if not free:
            break
        assignment[cands[i].access] = free.pop(0)
    return assignment


def profitability(d: int, bounds: list) -> tuple[bool, bool]:
    """(profitable, assumed): symbolic bounds are assumed profitable."""
    if any(not isinstance(b, int) for b in bounds):
        return True, True
    return break_even(d, [int(b) for b in bounds]), False


# ---------------------------------------------------------------------------
# phases 4-6: emission

_INT_POOL = ["t2", "t3", "t4", "t5", "t6", "s0", "s1", "s2", "s3", "s4",
             "s5", "s6", "s7", "s8", "s9", "s10", "s11"]
_FP_POOL = ["ft2", "ft3", "ft4", "ft5", "ft6", "ft7", "ft8", "ft9", "ft10",
            "ft11", "fs0", "fs1", "fs2", "fs3", "fa0", "fa1", "fa2", "fa3"]
_SYM_REGS = ["a0", "a1", "a2", "a3", "a4", "a5"]


@dataclass
class PassReport:
    candidates: list[StreamCandidate]
    assignment: dict[str, int]
    transformed: bool
    assumed_profitable: bool = False
    symbols: dict[str, str] = field(default_factory=dict)   # symbol -> argument register
    notes: list[str] = field(default_factory=list)


def compile_nest(ir: LoopNestIR | str, transform: bool = True,
                 lanes: int = 2) -> tuple[str, PassReport]:
    """Run the pass and emit assembly; transform=False gives the plain
    lowering of the same nest for comparison."""
    if isinstance(ir, str):
        ir = parse_ir(ir)
    cands = find_candidates(ir) if transform else []
    assumed = False
    keep = []
    for c in cands:
        ok, asm_flag = profitability(c.depth, c.bounds)
        if ok:
            keep.append(c)
            assumed = assumed or asm_flag
    assignment = allocate(keep, lanes)
    chosen = [c for c in keep if c.access in assignment]
    # the closed-form bound treats pointers and immediates as free; the
    # emitted configuration also materializes them, so require the elided
    # accesses to pay for the code actually generated
    if chosen and not assumed:
        saved = sum(_prod(c.bounds) for c in chosen)
        cost = sum(4 * c.depth + 2 for c in chosen) + 3
        if saved <= cost:
            assignment = {}
            chosen = []
    by_access = {c.access: c for c in chosen}
    symbols: dict[str, str] = {}
    text = _emit(ir, by_access, assignment, symbols)
    return text, PassReport(cands, assignment, bool(assignment), assumed,
                            symbols)


def _prod(bounds) -> int:
    out = 1
    for b in bounds:
        out *= int(b)
    return out


def emit(ir: LoopNestIR, assignment: dict[str, int],
         cands: list[StreamCandidate]) -> str:
    by_access = {c.access: c for c in cands if c.access in assignment}
    return _emit(ir, by_access, assignment, {})


def _emit(ir: LoopNestIR, by_access: dict[str, StreamCandidate],
          assignment: dict[str, int],
          sym_out: dict[str, str] | None = None) -> str:
    uses = _uses(ir)
    lines: list[str] = []
    label_n = [0]

    def label(stem="l"):
        label_n[0] += 1
        return f"{stem}_{label_n[0]}"

    def emitl(t: str):
        lines.append("    " + t)

    # registers: dead values (stream pointer chains, fused multiplies,
    # streamed single-use loads, folded pointer steps) get none
    dead: set[str] = set()
    for acc, cand in by_access.items():
        dead.update(cand.pointer_chain)
        for p in cand.pointer_chain:
            step = ir.nodes[p].args[1]
            if isinstance(step, str):
                dead.add(step)

    fused: dict[str, tuple] = {}
    for node in ir.nodes.values():
        if node.op != "phi":
            continue
        step = node.args[1]
        if not isinstance(step, str) or node.name in dead:
            continue
        stepn = ir.nodes[step]
        if stepn.op not in ("add", "fadd"):
            continue
        other = None
        if stepn.args[0] == node.name:
            other = stepn.args[1]
        elif stepn.args[1] == node.name:
            other = stepn.args[0]
        if not isinstance(other, str):
            continue
        mult = ir.nodes[other]
        want = "fmul" if node.is_float else "mul"
        if mult.op == want and len(uses[other]) == 1:
            fused[node.name] = (step, other, mult.args[0], mult.args[1])
            dead.add(step)
            dead.add(other)

    # decide pointer folds up front so step nodes are never emitted:
    # accesses absorb their pointer's constant step as a post-increment,
    # and remaining constant-step recurrences become a single addi
    postinc: set[str] = set()
    for name, node in ir.nodes.items():
        if node.op not in ("load", "loadf", "store") or name in by_access:
            continue
        ptr = node.args[0]
        if not isinstance(ptr, str):
            continue
        pn = ir.nodes[ptr]
        if pn.op != "phi" or ptr in dead:
            continue
        if _phi_const_step(ir, pn) is not None \
                and _only_access_uses(ir, uses, ptr, name) \
                and ptr not in postinc:
            postinc.add(ptr)
            dead.add(pn.args[1])
    for node in ir.nodes.values():
        if node.op == "phi" and node.name not in dead \
                and node.name not in fused:
            step = node.args[1]
            if isinstance(step, str) and _phi_const_step(ir, node) is not None:
                dead.add(step)

        sym_map: dict[str, str] = sym_out if sym_out is not None else {}
    regs: dict[str, str] = {}
    ipool = list(_INT_POOL)
    if not any(n.op == "sym" for n in ir.nodes.values()):
        ipool += ["a0", "a1", "a2", "a3", "a5"]   # a4 stays config scratch
    fpool = list(_FP_POOL)

    def stream_reg(name: str) -> str | None:
        if name in assignment:
            lane = assignment[name]
            node = ir.nodes[name]
            fl = node.is_float or (node.op == "store" and isinstance(
                node.args[1], str) and ir.nodes[node.args[1]].is_float)
            return ("ft0", "ft1")[lane] if fl else ("t0", "t1")[lane]
        return None

    def reg_of(name: str) -> str:
        if name in regs:
            return regs[name]
        node = ir.nodes[name]
        if node.op == "load" and name in by_access:
            r = stream_reg(name)
            regs[name] = r
            return r
        if node.op == "sym":
            s = node.args[0]
            if s not in sym_map:
                if not _SYM_REGS:
                    raise PassError("out of argument registers")
                sym_map[s] = _SYM_REGS[len(sym_map)]
            regs[name] = sym_map[s]
            return regs[name]
        pool = fpool if node.is_float else ipool
        if not pool:
            raise PassError(
                "register pressure: no free register for value "
                f"'{name}' (stream registers are not spill targets)")
        regs[name] = pool.pop(0)
        return regs[name]

    def operand(a) -> str:
        """Register holding operand a; literals materialize into a temp."""
        if isinstance(a, int):
            emitl(f"li t2, {a}")  # t2 reserved as literal scratch
            return "t2"
        return reg_of(a)

    # t2 doubles as literal scratch: remove from the pool
    ipool.remove("t2")

    # ---- stream configuration --------------------------------------
    any_stream = bool(assignment)
    if any_stream:
        emitl("lui a7, 0xff000")
        for acc, cand in by_access.items():
            w = 0x40 * assignment[acc]
            d = cand.depth
            for i in range(d):
                bound = cand.bounds[d - 1 - i]
                stride = cand.strides[d - 1 - i]
                if isinstance(bound, int):
                    emitl(f"li a4, {bound}")
                else:
                    emitl(f"mv a4, {_sym_reg(sym_map, bound)}")
                emitl(f"sw a4, {OFF_BOUND + w + 4 * i}(a7)")
                emitl(f"li a4, {stride}")
                emitl(f"sw a4, {OFF_STRIDE + w + 4 * i}(a7)")
            tag = ((d - 1) << 29) | (int(cand.write) << 31)
            if isinstance(cand.base, int):
                emitl(f"li a4, {cand.base}")
            else:
                emitl(f"mv a4, {_sym_reg(sym_map, cand.base)}")
            if tag:
                emitl(f"lui a5, 0x{(tag >> 12) & 0xFFFFF:x}")
                emitl("add a4, a4, a5")
            emitl(f"sw a4, {OFF_STATUS + w}(a7)")
        emitl("csrwi ssrcfg, 1")

    # ---- loop nest --------------------------------------------------
    max_depth = max((lp.level for lp in ir.loops), default=0)

    def bound_operand(loop: Loop) -> str:
        if isinstance(loop.bound, int):
            emitl(f"li a4, {loop.bound}")
            return "a4"
        return _sym_reg(sym_map, loop.bound)

    def emit_node(name: str) -> None:
        node = ir.nodes[name]
        if name in dead or node.op in ("phi", "const", "sym"):
            return
        if node.op in ("load", "loadf"):
            if name in by_access:
                return  # value arrives through the stream register
            ptr = node.args[0]
            dst = reg_of(name)
            mnem = "flw" if node.op == "loadf" else "lw"
            if isinstance(ptr, str) and ptr in postinc:
                step = _phi_const_step(ir, ir.nodes[ptr])
                emitl(f"{mnem} {dst}, {step}({reg_of(ptr)}!)")
                return
            emitl(f"{mnem} {dst}, 0({operand(ptr)})")
            return
        if node.op == "store":
            addr, valarg = node.args
            if name in by_access:
                r = stream_reg(name)
                src = operand(valarg)
                if r.startswith("ft"):
                    emitl(f"fmv.s {r}, {src}")
                else:
                    emitl(f"mv {r}, {src}")
                return
            fl = isinstance(valarg, str) and ir.nodes[valarg].is_float
            mnem = "fsw" if fl else "sw"
            src = operand(valarg)
            if isinstance(addr, str) and addr in postinc:
                step = _phi_const_step(ir, ir.nodes[addr])
                emitl(f"{mnem} {src}, {step}({reg_of(addr)}!)")
                return
            emitl(f"{mnem} {src}, 0({operand(addr)})")
            return
        if node.op in INT_OPS:
            a, b = node.args
            dst = reg_of(name)
            if isinstance(b, int):
                imm_ops = {"add": "addi", "and": "andi", "or": "ori", "xor": "xori"}
                if node.op in imm_ops:
                    emitl(f"{imm_ops[node.op]} {dst}, {operand(a)}, {b}")
                    return
            emitl(f"{node.op} {dst}, {operand(a)}, {operand(b)}")
            return
        if node.op in FP_OPS:
            a, b = node.args
            dst = reg_of(name)
            mnem = "fadd.s" if node.op == "fadd" else "fmul.s"
            emitl(f"{mnem} {dst}, {operand(a)}, {operand(b)}")
            return
        raise PassError(f"cannot lower op '{node.op}'")

    def init_phi(name: str) -> None:
        node = ir.nodes[name]
        if name in dead:
            return
        dst = reg_of(name)
        init = node.args[0]
        if node.is_float:
            if init == 0 or init == 0.0:
                emitl(f"fmv.w.x {dst}, zero")
            elif isinstance(init, str):
                emitl(f"fmv.s {dst}, {reg_of(init)}")
            else:
                raise PassError("unsupported float phi initializer")
        else:
            if isinstance(init, int):
                emitl(f"li {dst}, {init}")
            else:
                emitl(f"mv {dst}, {operand(init)}")

    def update_phi(name: str) -> None:
        node = ir.nodes[name]
        if name in dead:
            return
        dst = reg_of(name)
        if name in fused:
            _, _, ma, mb = fused[name]
            if node.is_float:
                emitl(f"fmadd.s {dst}, {operand(ma)}, {operand(mb)}, {dst}")
            else:
                emitl(f"p.mac {dst}, {operand(ma)}, {operand(mb)}")
            return
        if name in postinc:
            return  # advanced by the access's post-increment
        step = node.args[1]
        if isinstance(step, str):
            const = _phi_const_step(ir, node)
            if const is not None:
                emitl(f"addi {dst}, {dst}, {const}")
                return
            sr = reg_of(step)
            if node.is_float:
                emitl(f"fmv.s {dst}, {sr}")
            else:
                emitl(f"mv {dst}, {sr}")
        else:
            emitl(f"li {dst}, {step}")

    def emit_body(items, level: int) -> None:
        phis = [i for i in items if not isinstance(i, Loop)
                and ir.nodes[i].op == "phi"]
        for p in phis:
            init_phi(p)
        hw = max_depth - level          # 0 => innermost hardware loop
        if hw <= 1:
            cnt = bound_operand(_loop_cache[id(items)])
            lbl = label("lp")
            emitl(f"lp.setup l{hw}, {cnt}, {lbl}")
            mark = len(lines)
            for item in items:
                if isinstance(item, Loop):
                    emit_body(item.body, item.level)
                else:
                    emit_node(item)
            for p in phis:
                update_phi(p)
            if len(lines) == mark:
                emitl("nop")
            lines[-1] = lines[-1].lstrip()
            lines[-1] = f"{lbl}: {lines[-1]}"
        else:
            cnt = bound_operand(_loop_cache[id(items)])
            creg = reg_of_scratch()
            emitl(f"mv {creg}, {cnt}")
            top = label("sw")
            lines.append(f"{top}:")
            for item in items:
                if isinstance(item, Loop):
                    emit_body(item.body, item.level)
                else:
                    emit_node(item)
            for p in phis:
                update_phi(p)
            emitl(f"addi {creg}, {creg}, -1")
            emitl(f"bne {creg}, zero, {top}")

    def reg_of_scratch() -> str:
        if not ipool:
            raise PassError("register pressure: no free loop counter")
        return ipool.pop(0)

    # map body lists back to their loops for bound lookup
    _loop_cache: dict[int, Loop] = {}

    def cache_loops(items):
        for item in items:
            if isinstance(item, Loop):
                _loop_cache[id(item.body)] = item
                cache_loops(item.body)

    cache_loops(ir.top)

    for item in ir.top:
        if isinstance(item, Loop):
            emit_body(item.body, item.level)
        else:
            emit_node(item)

    if any_stream:
        emitl("csrwi ssrcfg, 0")
    emitl("ecall")
    return "\n".join(lines) + "\n"


def _sym_reg(sym_map: dict[str, str], s: str) -> str:
    if s not in sym_map:
        sym_map[s] = _SYM_REGS[len(sym_map)]
    return sym_map[s]


def _phi_const_step(ir: LoopNestIR, phi: Node) -> int | None:
    step = phi.args[1]
    if not isinstance(step, str):
        return None
    stepn = ir.nodes[step]
    if stepn.op != "add":
        return None
    if stepn.args[0] == phi.name and isinstance(stepn.args[1], int):
        return stepn.args[1]
    if stepn.args[1] == phi.name and isinstance(stepn.args[0], int):
        return stepn.args[0]
    return None


def _only_access_uses(ir: LoopNestIR, uses: dict[str, list[str]],
                      ptr: str, access: str) -> bool:
    others = [u for u in uses[ptr]
              if u != access and ir.nodes[u].op != "add"]
    return not others
