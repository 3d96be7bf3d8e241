"""Firmware-facing API.

A firmware program is a plain function taking a FirmwareContext. Register
accesses cost simulated cycles (the register port's latency) and suspend
the task; direct DDR access and host computation cost zero simulated
time, exactly like host-mapped memory on the real platform.

The C shim exposes the same surface one-to-one:

    fb_read_32     <->  ctx.read_32
    fb_write_32    <->  ctx.write_32
    fb_mem_read    <->  ctx.mem_read
    fb_mem_write   <->  ctx.mem_write
    fb_wait_cycles <->  ctx.wait_cycles
    fb_cycle_count <->  ctx.cycle_count
"""

from __future__ import annotations

from .bridge import FB_OK, MemoryBridge
from .kernel import FirmwareTask, Kernel, WaitBlock
from .memory import ORIGIN_FIRMWARE, MemoryImage


class FirmwareContext:
    def __init__(self, kernel: Kernel, bridge: MemoryBridge, memory: MemoryImage,
                 task: FirmwareTask):
        self._kernel = kernel
        self._bridge = bridge
        self._memory = memory
        self._task = task
        self.last_status = FB_OK

    # -- register path (costs simulated time) ------------------------------

    def read_32(self, addr: int) -> int:
        txn = self._bridge.register_access_txn("read", addr, 0, self._kernel.now)
        self._task.block(txn)
        self.last_status = txn.status
        return txn.result

    def write_32(self, addr: int, value: int) -> int:
        txn = self._bridge.register_access_txn("write", addr, value, self._kernel.now)
        self._task.block(txn)
        self.last_status = txn.status
        return txn.status

    # -- direct DDR access (zero simulated time) ----------------------------

    def mem_read(self, addr: int, length: int) -> bytes:
        return self._memory.read_bytes(addr, length, origin=ORIGIN_FIRMWARE,
                                       cycle=self._kernel.now)

    def mem_write(self, addr: int, data: bytes) -> None:
        self._memory.write_bytes(addr, data, origin=ORIGIN_FIRMWARE,
                                 cycle=self._kernel.now)

    def mem_read_32(self, addr: int) -> int:
        return int.from_bytes(self.mem_read(addr, 4), "little")

    def mem_write_32(self, addr: int, value: int) -> None:
        self.mem_write(addr, (value & 0xFFFFFFFF).to_bytes(4, "little"))

    # -- synchronization -----------------------------------------------------

    def wait_cycles(self, n: int) -> None:
        if n < 0:
            raise ValueError("wait_cycles needs n >= 0")
        if n == 0:
            return
        self._task.block(WaitBlock(self._kernel.now + n))

    def cycle_count(self) -> int:
        return self._kernel.now


def attach_firmware(kernel: Kernel, bridge: MemoryBridge, memory: MemoryImage,
                    entry) -> FirmwareTask:
    """Spawn entry(ctx) as the kernel's firmware task."""
    task = kernel.spawn_firmware(entry)
    task.ctx = FirmwareContext(kernel, bridge, memory, task)
    return task
