import random

import pytest

from ssrsim.data_mover import (
    Lane, OFF_BOUND, OFF_REPEAT, OFF_STATUS, OFF_STRIDE, StreamFault,
    status_word,
)


def oracle_addresses(base, dims, bounds, strides):
    """4-deep nested-loop enumeration: base + sum(l_i * stride_i)."""
    b = list(bounds) + [1] * (4 - len(bounds))
    s = list(strides) + [0] * (4 - len(strides))
    out = []
    for l3 in range(b[3] if dims > 3 else 1):
        for l2 in range(b[2] if dims > 2 else 1):
            for l1 in range(b[1] if dims > 1 else 1):
                for l0 in range(b[0]):
                    a = base
                    for li, st in zip((l0, l1, l2, l3), s):
                        a += li * st
                    out.append(a & 0xFFFFFFFF)
    return out


def configure(lane, base, bounds, strides, write=False, repeat=0):
    for i, b in enumerate(bounds):
        lane.write_config(OFF_BOUND + 4 * i, b)
    for i, s in enumerate(strides):
        lane.write_config(OFF_STRIDE + 4 * i, s & 0xFFFFFFFF)
    if repeat:
        lane.write_config(OFF_REPEAT, repeat)
    lane.write_config(OFF_STATUS, status_word(base, dims=len(bounds), write=write))


def drain_addresses(lane):
    out = []
    done = False
    while not done:
        a, done = lane.next_address()
        out.append(a)
    return out


def test_1d_walk():
    lane = Lane()
    configure(lane, 0x100, [4], [4])
    assert drain_addresses(lane) == [0x100, 0x104, 0x108, 0x10C]
    with pytest.raises(StreamFault):
        lane.next_address()


def test_2d_walk_matches_spec_example():
    lane = Lane()
    configure(lane, 0, [3, 2], [4, 100])
    assert drain_addresses(lane) == [0, 4, 8, 100, 104, 108]


def test_single_element_stream():
    lane = Lane()
    configure(lane, 0x80, [1], [4])
    addrs = drain_addresses(lane)
    assert addrs == [0x80]


def test_agu_matches_bruteforce_oracle_randomized():
    rng = random.Random(1234)
    for _ in range(1000):
        dims = rng.randint(1, 4)
        bounds = [rng.randint(1, 8) for _ in range(dims)]
        strides = [rng.choice([1, -1]) * 4 * rng.randint(1, 16)
                   for _ in range(dims)]
        base = 4 * rng.randint(0, 1 << 20)
        lane = Lane()
        configure(lane, base, bounds, strides)
        assert drain_addresses(lane) == oracle_addresses(base, dims, bounds, strides)


def test_plain_pointer_write_arms_1d_read_with_default_stride():
    lane = Lane()
    lane.write_config(OFF_BOUND, 3)
    lane.write_config(OFF_STATUS, 0x200)   # plain pointer
    assert lane.cfg.dims == 1 and not lane.cfg.write
    assert drain_addresses(lane) == [0x200, 0x204, 0x208]


def test_reconfigure_active_stream_faults():
    lane = Lane()
    configure(lane, 0, [4], [4])
    lane.commit_fetch(7, cycle=0)
    lane.pop(cycle=1)
    # 3 elements still outstanding
    with pytest.raises(StreamFault, match="reconfiguration"):
        lane.write_config(OFF_STATUS, status_word(0x40))


def test_rearm_after_done_is_allowed():
    lane = Lane()
    configure(lane, 0, [1], [4])
    lane.commit_fetch(5, cycle=0)
    assert lane.pop(cycle=1) == 5
    lane.write_config(OFF_STATUS, status_word(0x40))  # no fault
    assert lane.current_address() == 0x40


def test_read_prefetch_backpressure():
    lane = Lane(depth=4)
    configure(lane, 0, [16], [4])
    for cyc in range(4):
        req = lane.memory_request()
        assert req is not None and not req[1]
        lane.commit_fetch(cyc, cyc)
    assert lane.memory_request() is None  # fifo full
    assert len(lane.fifo) == 4


def test_fetched_data_usable_next_cycle():
    lane = Lane()
    configure(lane, 0, [2], [4])
    lane.commit_fetch(11, cycle=5)
    assert lane.available(5) == 0
    assert lane.available(6) == 1
    assert lane.pop(6) == 11


def test_repeat_pops_each_datum_repeat_plus_one_times():
    lane = Lane()
    configure(lane, 0, [2], [4], repeat=1)
    lane.commit_fetch(0xA, 0)
    lane.commit_fetch(0xB, 1)
    got = [lane.pop(10) for _ in range(4)]
    assert got == [0xA, 0xA, 0xB, 0xB]
    assert lane.emitted == 4
    assert lane.fetched == 2


def test_conservation_counts():
    rng = random.Random(7)
    for _ in range(50):
        dims = rng.randint(1, 3)
        bounds = [rng.randint(1, 5) for _ in range(dims)]
        repeat = rng.randint(0, 2)
        lane = Lane(depth=2)
        configure(lane, 0, bounds, [4] * dims, repeat=repeat)
        total = 1
        for b in bounds:
            total *= b
        cyc = 0
        while lane.active:
            req = lane.memory_request()
            if req is not None:
                lane.commit_fetch(rng.randint(0, 99), cyc)
            while lane.available(cyc + 1):
                lane.pop(cyc + 1)
            cyc += 1
        assert lane.fetched == total
        assert lane.emitted == (repeat + 1) * total


def test_fifo_order_preserved():
    lane = Lane(depth=8)
    configure(lane, 0x40, [6], [8])
    words = [100 + i for i in range(6)]
    for cyc, w in enumerate(words):
        lane.commit_fetch(w, cyc)
    assert [lane.pop(99) for _ in range(6)] == words


def test_write_stream_pushes_then_drains_in_pattern_order():
    lane = Lane()
    configure(lane, 0x100, [2], [4], write=True)
    lane.push(0xAA, 0)
    lane.push(0xBB, 1)
    a0, w0 = lane.commit_store(2)
    a1, w1 = lane.commit_store(3)
    assert (a0, w0) == (0x100, 0xAA)
    assert (a1, w1) == (0x104, 0xBB)
    with pytest.raises(StreamFault, match="exhausted"):
        lane.push(0xCC, 4)


def test_write_lane_memory_request_only_when_queued():
    lane = Lane()
    configure(lane, 0, [4], [4], write=True)
    assert lane.memory_request() is None
    lane.push(1, 0)
    addr, is_write, word = lane.memory_request()
    assert is_write and addr == 0 and word == 1


def test_push_to_full_fifo_faults():
    lane = Lane(depth=2)
    configure(lane, 0, [8], [4], write=True)
    lane.push(1, 0)
    lane.push(2, 0)
    assert not lane.can_push()
    with pytest.raises(StreamFault, match="full"):
        lane.push(3, 0)


def test_pop_on_write_lane_faults():
    lane = Lane()
    configure(lane, 0, [2], [4], write=True)
    lane.push(1, 0)
    with pytest.raises(StreamFault, match="direction"):
        lane.pop(1)


def test_repeat_on_write_stream_is_config_fault():
    lane = Lane()
    lane.write_config(OFF_REPEAT, 1)
    lane.write_config(OFF_BOUND, 4)
    with pytest.raises(StreamFault, match="repeat"):
        lane.write_config(OFF_STATUS, status_word(0, write=True))


def test_read_hazard_detection():
    lane = Lane()
    configure(lane, 0x100, [4], [4])
    lane.commit_fetch(1, 0)          # 0x100 fetched
    assert lane.pop(1) == 1          # 0x100 consumed
    lane.commit_fetch(2, 1)          # 0x104 in fifo, unread
    assert not lane.check_read_hazard(0x100)   # fully consumed
    assert lane.check_read_hazard(0x104)       # prefetched but unread
    assert lane.check_read_hazard(0x108)       # unfetched remainder
    assert not lane.check_read_hazard(0x200)


def test_hazard_false_when_idle():
    lane = Lane()
    assert not lane.check_read_hazard(0x100)


def test_status_read_reports_done():
    lane = Lane()
    assert lane.read_status() == 1
    configure(lane, 0, [1], [4])
    assert lane.read_status() == 0
    lane.commit_fetch(9, 0)
    lane.pop(1)
    assert lane.read_status() == 1
