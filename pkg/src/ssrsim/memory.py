"""Word-interleaved banked scratchpad with per-cycle arbitration.

Every core owns two ports into the memory: port 0 is shared by the LSU and
data-mover lane 0 (LSU wins, fixed priority), port 1 belongs to lane 1.
bank(addr) = (addr/4) mod B. Each bank grants one request per cycle;
losers retry unchanged the next cycle, selected round-robin starting from
the last winner + 1.

The per-lane configuration registers live in a separate memory-mapped
window starting at CFG_BASE; accesses there complete in one cycle and do
not consume scratchpad bandwidth.
"""

from __future__ import annotations

import struct

CFG_BASE = 0xFF000000
CFG_CORE_SPAN = 0x100   # per-core window
CFG_LANE_SPAN = 0x40    # per-lane window inside a core's window
CFG_TOP = CFG_BASE + 64 * CFG_CORE_SPAN

DEFAULT_SIZE = 128 * 1024


class MemoryFault(Exception):
    """Unmapped or misaligned access; aborts streams and ends the program."""


def config_decode(addr: int) -> tuple[int, int, int] | None:
    """(core, lane, register offset) for a config-window address, else None."""
    if not CFG_BASE <= addr < CFG_TOP:
        return None
    off = addr - CFG_BASE
    core, rest = divmod(off, CFG_CORE_SPAN)
    lane, reg = divmod(rest, CFG_LANE_SPAN)
    if lane > 1:
        raise MemoryFault(f"no lane at config address 0x{addr:08x}")
    return core, lane, reg


def default_banks(n_cores: int) -> int:
    """Twice the cluster's port count, rounded up to a power of two, with
    a floor of eight so even one core's two lanes plus LSU have slack."""
    want = 2 * (n_cores * 2)
    b = 8
    while b < want:
        b *= 2
    return b


class Tcdm:
    """Banked scratchpad storage plus contention statistics."""

    def __init__(self, size_bytes: int = DEFAULT_SIZE, banks: int = 8):
        if banks & (banks - 1):
            raise ValueError("bank count must be a power of two")
        self.size = size_bytes
        self.banks = banks
        self.mem = bytearray(size_bytes)
        self.last_winner = [0] * banks
        self.requests = 0
        self.granted_immediately = 0
        self.conflicts = 0

    # -- raw storage ----------------------------------------------------

    def check(self, addr: int) -> None:
        if addr % 4:
            raise MemoryFault(f"misaligned word access at 0x{addr:08x}")
        if not 0 <= addr < self.size:
            raise MemoryFault(f"unmapped address 0x{addr:08x}")

    def bank(self, addr: int) -> int:
        return (addr >> 2) & (self.banks - 1)

    def load_word(self, addr: int) -> int:
        self.check(addr)
        return int.from_bytes(self.mem[addr:addr + 4], "little")

    def store_word(self, addr: int, value: int) -> None:
        self.check(addr)
        self.mem[addr:addr + 4] = (value & 0xFFFFFFFF).to_bytes(4, "little")

    def load_float(self, addr: int) -> float:
        self.check(addr)
        return struct.unpack("<f", self.mem[addr:addr + 4])[0]

    def load_image(self, data: dict[int, int]) -> None:
        for a, b in data.items():
            if not 0 <= a < self.size:
                raise MemoryFault(f"data image byte outside scratchpad: 0x{a:08x}")
            self.mem[a] = b

    def region(self, addr: int, nbytes: int) -> bytes:
        return bytes(self.mem[addr:addr + nbytes])

    def dump_hex(self, addr: int, nwords: int) -> str:
        """Word-per-line hex dump: `address: value`."""
        out = []
        for i in range(nwords):
            a = addr + 4 * i
            out.append(f"{a:08x}: {self.load_word(a):08x}")
        return "\n".join(out) + "\n"

    def load_hex(self, text: str) -> None:
        """Load a dump_hex-format image back into the scratchpad."""
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            a, _, v = line.partition(":")
            self.store_word(int(a, 16), int(v.strip(), 16))

    # -- arbitration ------------------------------------------------------

    def arbitrate(self, requests: list[tuple[int, int]],
                  first_try: list[bool]) -> set[int]:
        """Grant at most one port per bank this cycle.

        `requests` pairs (port_id, bank); `first_try[i]` marks requests on
        their first attempt (for the immediate-grant statistic). Returns the
        set of granted port ids. Ungranted requesters simply retry.
        """
        by_bank: dict[int, list[int]] = {}
        for i, (port, bank) in enumerate(requests):
            by_bank.setdefault(bank, []).append(i)
        granted: set[int] = set()
        for bank, idxs in by_bank.items():
            if len(idxs) == 1:
                win = idxs[0]
            else:
                start = self.last_winner[bank] + 1
                win = min(idxs, key=lambda i: (requests[i][0] - start) % 64)
            port = requests[win][0]
            self.last_winner[bank] = port
            granted.add(port)
            for i in idxs:
                if first_try[i]:
                    self.requests += 1
                    if i == win:
                        self.granted_immediately += 1
                    else:
                        self.conflicts += 1
        return granted

    def stats(self) -> dict:
        total = self.requests
        frac = self.granted_immediately / total if total else 1.0
        return {
            "requests": total,
            "granted_immediately": self.granted_immediately,
            "conflicts": self.conflicts,
            "immediate_fraction": frac,
        }
