"""DDR model: round-trips, sparsity, watch regions, image files."""

import random

import pytest

from fbsim.memory import (MemoryModelError, MemoryImage, WatchRegion,
                          ORIGIN_FIRMWARE)


def test_write_read_roundtrip():
    mem = MemoryImage()
    mem.write_bytes(0x1000, bytes([0xDE, 0xAD]))
    assert mem.read_bytes(0x1000, 2) == bytes([0xDE, 0xAD])


def test_fresh_memory_reads_fill():
    mem = MemoryImage()
    assert mem.read_bytes(0x1234_5678, 4) == b"\x00\x00\x00\x00"


def test_page_boundary_spanning_write():
    mem = MemoryImage()
    data = bytes([0x11, 0x22, 0x33])
    mem.write_bytes(0x0FFF, data)
    assert mem.read_bytes(0x0FFF, 3) == data
    assert mem.page_count == 2


def test_read_straddles_written_and_fill():
    mem = MemoryImage()
    mem.write_bytes(0x100, b"\xAA\xBB")
    assert mem.read_bytes(0x0FF, 4) == b"\x00\xAA\xBB\x00"


def test_read_after_write_per_byte_oracle():
    rng = random.Random(99)
    mem = MemoryImage()
    model = {}
    for _ in range(300):
        addr = rng.randrange(0, 0x8000)
        data = bytes(rng.randrange(256) for _ in range(rng.randrange(1, 40)))
        mem.write_bytes(addr, data)
        for i, byte in enumerate(data):
            model[addr + i] = byte
    for _ in range(100):
        addr = rng.randrange(0, 0x8100)
        length = rng.randrange(1, 64)
        expect = bytes(model.get(addr + i, 0) for i in range(length))
        assert mem.read_bytes(addr, length) == expect


def test_sparsity_tracks_touched_pages():
    mem = MemoryImage()
    touched = set()
    rng = random.Random(5)
    for _ in range(50):
        addr = rng.randrange(0, 1 << 24)
        mem.write_bytes(addr, b"x")
        touched.add(addr // 4096)
    assert mem.page_count == len(touched)


def test_watch_write_logs_one_event():
    mem = MemoryImage()
    mem.add_watch(WatchRegion(0x2000, 4, "write"))
    mem.write_bytes(0x2000, b"\x01", origin=ORIGIN_FIRMWARE, cycle=3)
    log = mem.take_access_log()
    assert len(log) == 1
    assert log[0].origin == ORIGIN_FIRMWARE
    assert log[0].kind == "write"
    assert log[0].cycle == 3
    assert mem.take_access_log() == []  # drained


def test_watch_burst_overlap_single_event():
    # watch [0x100, 0x10F] write-only; burst covers 0x0F8..0x117
    mem = MemoryImage()
    mem.add_watch(WatchRegion(0x100, 16, "write"))
    mem.note_access("dma", "write", 0x0F8, 0x118 - 0x0F8, cycle=7)
    log = mem.take_access_log()
    assert len(log) == 1
    assert log[0].origin == "dma"


def test_watch_nonoverlapping_logs_nothing():
    mem = MemoryImage()
    mem.add_watch(WatchRegion(0x100, 16, "write"))
    mem.note_access("dma", "write", 0x200, 8, cycle=0)
    mem.write_bytes(0x100, b"z")  # no origin: host-side poke, not logged
    assert mem.take_access_log() == []


def test_watch_mode_filtering_and_read_kind():
    mem = MemoryImage()
    mem.add_watch(WatchRegion(0x100, 16, "read"))
    mem.write_bytes(0x100, b"q", origin=ORIGIN_FIRMWARE, cycle=0)
    mem.read_bytes(0x100, 1, origin=ORIGIN_FIRMWARE, cycle=1)
    log = mem.take_access_log()
    assert [e.kind for e in log] == ["read"]


def test_watch_completeness_brute_force():
    rng = random.Random(1234)
    regions = [WatchRegion(rng.randrange(0, 512), rng.randrange(1, 64),
                           rng.choice(["read", "write", "both"]))
               for _ in range(6)]
    mem = MemoryImage()
    for region in regions:
        mem.add_watch(region)
    accesses = [(rng.choice(["read", "write"]), rng.randrange(0, 600),
                 rng.randrange(1, 48)) for _ in range(200)]
    for i, (kind, addr, length) in enumerate(accesses):
        mem.note_access("port", kind, addr, length, cycle=i)
    logged = [(e.kind, e.addr, e.length) for e in mem.take_access_log()]
    expected = [(kind, addr, length) for kind, addr, length in accesses
                if any(r.matches(kind, addr, length) for r in regions)]
    assert logged == expected


def test_remove_watch_unknown_id():
    mem = MemoryImage()
    wid = mem.add_watch(WatchRegion(0, 4, "both"))
    mem.remove_watch(wid)
    with pytest.raises(MemoryModelError, match="unknown watch id"):
        mem.remove_watch(wid)


def test_watch_region_validation():
    with pytest.raises(MemoryModelError):
        WatchRegion(0, 0, "read")
    with pytest.raises(MemoryModelError):
        WatchRegion(0, 4, "sideways")


def test_load_image_roundtrip(tmp_path):
    blob = bytes(range(16))
    path = tmp_path / "image.bin"
    path.write_bytes(blob)
    mem = MemoryImage()
    assert mem.load_image(str(path), 0x8000) == 16
    assert mem.read_bytes(0x8000, 16) == blob


def test_load_empty_image(tmp_path):
    path = tmp_path / "empty.bin"
    path.write_bytes(b"")
    mem = MemoryImage()
    assert mem.load_image(str(path), 0x8000) == 0
    assert mem.page_count == 0


def test_load_missing_image_names_path():
    mem = MemoryImage()
    with pytest.raises(MemoryModelError, match="no/such/file"):
        mem.load_image("no/such/file.bin", 0)


def test_save_image_roundtrip(tmp_path):
    mem = MemoryImage()
    mem.write_bytes(0x40, bytes([9, 8, 7]))
    path = tmp_path / "out.bin"
    mem.save_image(str(path), 0x40, 3)
    assert path.read_bytes() == bytes([9, 8, 7])
