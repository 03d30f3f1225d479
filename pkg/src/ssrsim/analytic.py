"""Closed-form instruction-count and utilization model.

For a loop nest of depth d (level 1 outermost), s data movers, L[i]
iterations and I[i] instructions per level, the executed instruction counts
are

    n_ssr  = (4*d*s + s + 2) + sum_i (I_i + 1) * prod_{n<=i} L_n - prod_i L_i
    n_base = 1 + sum_i (I_i + 1 + s) * prod_{n<=i} L_n - prod_i L_i

The setup term 4ds+s+2 is the one-time stream configuration (bound and
stride, each a load-immediate plus store, per dimension per mover), the
per-mover arming store, the enable CSR write and the outermost loop setup;
the per-level "+1" is the next-inner loop setup re-executed each iteration
(cancelled at the innermost level), and the baseline's "+s" is the explicit
data-movement instruction per mover per iteration. Streams pay off exactly
when 4d + 2 <= sum_i prod_{n<=i} L_n, independent of s and I.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod


@dataclass(frozen=True)
class LoopNestModel:
    """d-level loop nest; L[0] and I[0] describe the outermost level."""
    s: int                 # data movers >= 1 (0 allowed in the baseline)
    L: tuple[int, ...]     # iterations per level, outermost first
    I: tuple[int, ...]     # instructions per level

    def __post_init__(self):
        if len(self.L) != len(self.I) or not self.L:
            raise ValueError("L and I must be equal-length, depth >= 1")
        if any(l < 1 for l in self.L) or any(i < 0 for i in self.I):
            raise ValueError("L entries >= 1, I entries >= 0")

    @property
    def d(self) -> int:
        return len(self.L)


def _loop_terms(m: LoopNestModel) -> int:
    total = 0
    for i in range(1, m.d + 1):
        total += (m.I[i - 1] + 1) * prod(m.L[:i])
    return total - prod(m.L)


def n_ssr(m: LoopNestModel) -> int:
    """Executed instructions with stream-fed operands."""
    return 4 * m.d * m.s + m.s + 2 + _loop_terms(m)


def n_base(m: LoopNestModel) -> int:
    """Executed instructions with explicit per-iteration data movement."""
    total = 0
    for i in range(1, m.d + 1):
        total += (m.I[i - 1] + 1 + m.s) * prod(m.L[:i])
    return 1 + total - prod(m.L)


def break_even(d: int, L: list[int] | tuple[int, ...]) -> bool:
    """True iff streams are no worse than the baseline for this nest:
    4d + 2 <= sum over levels of the cumulative iteration products.
    Independent of the mover count and per-level instruction counts."""
    if len(L) != d:
        raise ValueError("need one bound per level")
    return 4 * d + 2 <= sum(prod(L[:i]) for i in range(1, d + 1))


def hypercube(d: int, l: int, s: int = 1) -> LoopNestModel:
    """Reduction over a d-dimensional hypercube of side l: one compute
    instruction in the innermost level, none outside."""
    return LoopNestModel(s=s, L=(l,) * d, I=(0,) * (d - 1) + (1,))


def utilization(d: int, l: int, s: int = 1) -> float:
    """Useful-op fraction for the hypercube reduction: l^d useful compute
    instructions over the stream-side instruction total."""
    if d < 1 or l < 1:
        raise ValueError("d and l must be >= 1")
    return l ** d / n_ssr(hypercube(d, l, s))


PEAK_UTILIZATION = {
    # limit of eta(N) as the problem size grows without bound
    "single_issue_no_ssr": 1 / 3,   # N / (2 + 3N)
    "single_issue_ssr": 1.0,        # N / (7 + N)
    "dual_issue": 0.5,
    "vector": 1.0,
}


def peak_utilization(core_class: str) -> float:
    return PEAK_UTILIZATION[core_class]


# ---------------------------------------------------------------------------
# Hot-loop enumeration for the reduction micro-kernels
#
# Rows are cumulative ISA variants: plain RV32, + hardware loops,
# + post-increment loads; integer and fp32 arithmetic. U is the unrolling
# needed to hide the 2-cycle load-use and 3-cycle FMA latencies. Each tuple
# in a loop body is (mnemonic, useful).

@dataclass(frozen=True)
class HotLoopRow:
    kernel: str
    arith: str
    unroll: int
    base_ops: tuple[tuple[str, bool], ...]
    ssr_ops: tuple[tuple[str, bool], ...]

    @property
    def n_base(self) -> int:
        return len(self.base_ops)

    @property
    def n_ssr(self) -> int:
        return len(self.ssr_ops)

    @property
    def eta_base(self) -> int:
        return round(100 * sum(u for _, u in self.base_ops) / self.n_base)

    @property
    def eta_ssr(self) -> int:
        return round(100 * sum(u for _, u in self.ssr_ops) / self.n_ssr)

    @property
    def speedup(self) -> float:
        return round(self.n_base / self.n_ssr, 1)


def _ld(n, op="lw"):
    return tuple((op, False) for _ in range(n))


def _compute(n, op):
    return tuple((op, True) for _ in range(n))


def table1() -> list[HotLoopRow]:
    """Hot-loop instruction counts, utilization and speedup for the
    reduction under the six ISA-variant rows, enumerated from the loop
    bodies themselves."""
    branch = (("bne", False),)
    ptr2 = (("addi", False),) * 2
    rows = [
        HotLoopRow(
            "standard", "int32", 1,
            _ld(2) + ptr2 + _compute(1, "p.mac") + branch,
            (("addi", False),) + _compute(1, "p.mac") + branch),
        HotLoopRow(
            "hwl", "int32", 1,
            _ld(2) + ptr2 + _compute(1, "p.mac"),
            _compute(1, "p.mac")),
        HotLoopRow(
            "postincr", "int32", 2,
            _ld(4) + _compute(2, "p.mac"),
            _compute(2, "p.mac")),
        HotLoopRow(
            "standard", "fp32", 1,
            _ld(2, "flw") + ptr2 + _compute(1, "fmadd.s") + branch,
            (("addi", False),) + _compute(1, "fmadd.s") + branch),
        HotLoopRow(
            "hwl", "fp32", 3,
            _ld(6, "flw") + ptr2 + _compute(3, "fmadd.s"),
            _compute(3, "fmadd.s")),
        HotLoopRow(
            "postincr", "fp32", 3,
            _ld(6, "flw") + _compute(3, "fmadd.s"),
            _compute(3, "fmadd.s")),
    ]
    return rows
