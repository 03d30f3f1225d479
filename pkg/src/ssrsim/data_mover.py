"""One data-mover lane: config registers, address generator, FIFO.

A lane owns ten architected configuration registers (status, repeat,
bound0-3, stride0-3) that are memory mapped per core. Writing the status
register arms the lane: the write value carries the base pointer in its low
29 bits, the enabled dimension count in bits [30:29] (dims-1) and the
direction in bit 31 (0 = read, 1 = write). Valid scratchpad pointers never
reach bit 29, so any word-aligned pointer arms a 1-D read stream when
written unmodified. Reading the status offset returns the done flag in
bit 0.

At reset bounds are 1, strides are one word (4 bytes) and repeat is 0, so a
plain pointer write streams a single contiguous word run once the bound is
set.

Addresses follow a four-deep nested-loop odometer:

    address = base + sum(L[i] * stride[i] for active dims)

where L0 is the innermost counter. The repeat register makes a read lane
emit each fetched datum (repeat+1) times; a nonzero repeat on a write
stream is a configuration fault.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# status-value packing
DIR_BIT = 31        # 0 read, 1 write
DIMS_SHIFT = 29     # bits [30:29] = dims - 1
PTR_MASK = (1 << DIMS_SHIFT) - 1

# register offsets within one lane's config window
OFF_STATUS = 0x00
OFF_REPEAT = 0x04
OFF_BOUND = 0x08    # bound0..bound3 at 0x08,0x0C,0x10,0x14
OFF_STRIDE = 0x18   # stride0..stride3 at 0x18,0x1C,0x20,0x24
LANE_WINDOW = 0x40  # bytes of address space per lane

DEFAULT_FIFO_DEPTH = 4


class StreamFault(Exception):
    """Illegal lane operation (reconfiguration, exhaustion, direction)."""


def status_word(pointer: int, dims: int = 1, write: bool = False) -> int:
    """Pack a status-register write value arming `dims` loop levels."""
    if not 1 <= dims <= 4:
        raise ValueError("dims must be 1..4")
    return (pointer & PTR_MASK) | ((dims - 1) << DIMS_SHIFT) | (int(write) << DIR_BIT)


@dataclass
class StreamEvent:
    kind: str          # core_read | core_write | mem_fetch | mem_store
    cycle: int
    address: int


@dataclass
class LaneConfig:
    """Architected pattern state; the live done flag is read through the
    status offset (see Lane.read_status)."""
    pointer: int = 0
    dims: int = 1
    write: bool = False
    repeat: int = 0
    bound: list[int] = field(default_factory=lambda: [1, 1, 1, 1])
    stride: list[int] = field(default_factory=lambda: [4, 4, 4, 4])


class Lane:
    """Live state of one data-mover lane.

    The FIFO holds (word, address, ready_cycle) entries; prefetched data is
    poppable from the cycle after its memory grant. `emitted` counts core
    transactions (pops for reads, pushes for writes); `fetched`/`stored`
    count memory-side words.
    """

    def __init__(self, depth: int = DEFAULT_FIFO_DEPTH, log_events: bool = False):
        self.depth = depth
        self.cfg = LaneConfig()
        self.armed = False
        # odometer state
        self.counters = [0, 0, 0, 0]
        self.addr_exhausted = True
        self.head_emits_left = 0     # remaining emissions of the FIFO head
        self.emitted = 0
        self.fetched = 0
        self.stored = 0
        self.fifo: list[list] = []   # [word, address, ready_cycle]
        self.events: list[StreamEvent] | None = [] if log_events else None
        # write-mode: count of pattern slots already claimed by pushes
        self._push_count = 0
        self._total = 0

    # ------------------------------------------------------------------
    # configuration

    def total_elements(self) -> int:
        """Pattern length captured when the stream was armed."""
        return self._total

    @property
    def active(self) -> bool:
        """Armed and not yet fully drained to/from the core."""
        if not self.armed:
            return False
        if self.cfg.write:
            return self._push_count < self._total or bool(self.fifo)
        return self.emitted < (self.cfg.repeat + 1) * self._total

    def write_config(self, offset: int, value: int) -> None:
        """Store to one of the ten memory-mapped registers.

        Writing status (re)arms the stream; any configuration write while a
        stream is mid-flight is a fault.
        """
        if self.active:
            raise StreamFault("reconfiguration of active stream")
        value &= 0xFFFFFFFF
        if offset == OFF_STATUS:
            self._arm(value)
        elif offset == OFF_REPEAT:
            self.cfg.repeat = value
        elif OFF_BOUND <= offset < OFF_BOUND + 16 and offset % 4 == 0:
            self.cfg.bound[(offset - OFF_BOUND) // 4] = value
        elif OFF_STRIDE <= offset < OFF_STRIDE + 16 and offset % 4 == 0:
            v = value - (1 << 32) if value >= (1 << 31) else value
            self.cfg.stride[(offset - OFF_STRIDE) // 4] = v
        else:
            raise StreamFault(f"bad lane config offset 0x{offset:x}")

    def read_status(self) -> int:
        return 0 if self.active else 1

    def _arm(self, value: int) -> None:
        cfg = self.cfg
        cfg.pointer = value & PTR_MASK
        cfg.dims = ((value >> DIMS_SHIFT) & 0x3) + 1
        cfg.write = bool((value >> DIR_BIT) & 1)
        if cfg.pointer % 4:
            raise StreamFault("stream pointer not word aligned")
        for i in range(cfg.dims):
            if cfg.bound[i] < 1:
                raise StreamFault(f"bound{i} must be >= 1")
            if cfg.stride[i] % 4:
                raise StreamFault(f"stride{i} not a word multiple")
        if cfg.write and cfg.repeat:
            raise StreamFault("repeat is read-only semantics; write stream with repeat")
        self.armed = True
        self._total = 1
        for i in range(cfg.dims):
            self._total *= cfg.bound[i]
        self.counters = [0, 0, 0, 0]
        self.addr_exhausted = False
        self.head_emits_left = 0
        self.emitted = 0
        self.fetched = 0
        self.stored = 0
        self._push_count = 0
        self.fifo.clear()

    # ------------------------------------------------------------------
    # address generation

    def current_address(self) -> int:
        a = self.cfg.pointer
        for i in range(self.cfg.dims):
            a += self.counters[i] * self.cfg.stride[i]
        return a & 0xFFFFFFFF

    def next_address(self) -> tuple[int, bool]:
        """Return the current pattern address and advance the odometer.

        done_after is True once the final element's address has been handed
        out. Calling on an exhausted stream is a fault.
        """
        if not self.armed or self.addr_exhausted:
            raise StreamFault("stream exhausted")
        addr = self.current_address()
        d = self.cfg.dims
        for i in range(d):
            self.counters[i] += 1
            if self.counters[i] < self.cfg.bound[i]:
                break
            self.counters[i] = 0
        else:
            self.addr_exhausted = True
        return addr, self.addr_exhausted

    def remaining_addresses(self) -> list[int]:
        """Addresses not yet fetched (read) or claimed (write); diagnostic."""
        if not self.armed or self.addr_exhausted:
            return []
        saved = (list(self.counters), self.addr_exhausted)
        out = []
        while not self.addr_exhausted:
            a, _ = self.next_address()
            out.append(a)
        self.counters, self.addr_exhausted = list(saved[0]), saved[1]
        return out

    # ------------------------------------------------------------------
    # core side

    def available(self, cycle: int) -> int:
        """Emissions poppable this cycle (repeat copies included)."""
        if self.cfg.write or not self.armed:
            return 0
        n = 0
        per = self.cfg.repeat + 1
        for idx, (_w, _a, ready) in enumerate(self.fifo):
            if ready > cycle:
                break
            n += self.head_emits_left if idx == 0 and self.head_emits_left else per
        return n

    def peek(self, k: int = 0) -> int:
        """Value the (k+1)-th pop this cycle would return."""
        per = self.cfg.repeat + 1
        idx = 0
        left = self.head_emits_left or (per if self.fifo else 0)
        while k >= left:
            k -= left
            idx += 1
            left = per
        return self.fifo[idx][0]

    def pop(self, cycle: int) -> int:
        """Consume one emission from the head of the read FIFO."""
        if self.cfg.write:
            raise StreamFault("direction mismatch: pop on write stream")
        if not self.fifo or self.fifo[0][2] > cycle:
            raise StreamFault("pop on empty stream FIFO")
        if self.head_emits_left == 0:
            self.head_emits_left = self.cfg.repeat + 1
        word, addr, _ = self.fifo[0]
        self.head_emits_left -= 1
        self.emitted += 1
        if self.head_emits_left == 0:
            self.fifo.pop(0)
        if self.events is not None:
            self.events.append(StreamEvent("core_read", cycle, addr))
        return word

    def can_push(self) -> bool:
        return len(self.fifo) < self.depth

    def push(self, word: int, cycle: int) -> None:
        """Queue one datum with its pattern address for store-out."""
        if not self.cfg.write:
            raise StreamFault("direction mismatch: push on read stream")
        if not self.can_push():
            raise StreamFault("push on full stream FIFO")
        if self._push_count >= self._total:
            raise StreamFault("stream exhausted")
        addr, _ = self.next_address()
        self._push_count += 1
        self.emitted += 1
        self.fifo.append([word, addr, cycle])
        if self.events is not None:
            self.events.append(StreamEvent("core_write", cycle, addr))

    # ------------------------------------------------------------------
    # memory side

    def memory_request(self):
        """(address, is_write, word) the lane wants this cycle, or None.

        Read mode prefetches whenever FIFO space and pattern remain; write
        mode drains the oldest queued datum.
        """
        if not self.armed:
            return None
        if self.cfg.write:
            if self.fifo:
                w, a, _ = self.fifo[0]
                return (a, True, w)
            return None
        if self.addr_exhausted or len(self.fifo) >= self.depth:
            return None
        return (self.current_address(), False, 0)

    def commit_fetch(self, word: int, cycle: int) -> None:
        """A granted read returned `word`; usable by the core next cycle."""
        addr, _ = self.next_address()
        self.fetched += 1
        self.fifo.append([word, addr, cycle + 1])
        if self.events is not None:
            self.events.append(StreamEvent("mem_fetch", cycle, addr))

    def commit_store(self, cycle: int) -> tuple[int, int]:
        """A granted write retired the oldest datum; returns (addr, word)."""
        w, a, _ = self.fifo.pop(0)
        self.stored += 1
        if self.events is not None:
            self.events.append(StreamEvent("mem_store", cycle, a))
        return a, w

    def check_read_hazard(self, store_address: int) -> bool:
        """True iff `store_address` is still ahead of an active read stream
        (prefetched-but-unread or unfetched). Diagnostic only."""
        if not self.armed or self.cfg.write:
            return False
        if self.active:
            for _w, a, _r in self.fifo:
                if a == store_address:
                    return True
            return store_address in self.remaining_addresses()
        return False


def events_to_csv(lanes: dict[tuple[int, int], Lane]) -> str:
    """Export per-lane event logs as CSV: cycle, core, lane, kind, address."""
    rows = ["cycle,core,lane,kind,address"]
    merged = []
    for (core, lane_idx), lane in lanes.items():
        if lane.events:
            for ev in lane.events:
                merged.append((ev.cycle, core, lane_idx, ev.kind, ev.address))
    merged.sort()
    for cyc, core, li, kind, addr in merged:
        rows.append(f"{cyc},{core},{li},{kind},0x{addr:x}")
    return "\n".join(rows) + "\n"
