"""MM2S and S2MM DMA engines with memory-mapped configuration registers.

Register map (32-bit words, byte offsets from the port base):

    +0x00  CTRL      bit0 START (write-1 pulse; ignored while BUSY)
    +0x04  STATUS    bit0 BUSY, bit1 DONE (write-1-to-clear), bit2 ERR
    +0x08  ADDR_LO
    +0x0C  ADDR_HI
    +0x10  LEN_BYTES (must be a bus-width multiple, as must the address)

MM2S reads LEN_BYTES from DDR as maximal INCR bursts and emits one stream
beat per bus beat, LAST on the final beat of the whole transfer. S2MM
consumes exactly LEN_BYTES of stream data and writes it out in bursts;
DONE is set at the response of the final burst. If the stream
under-delivers, S2MM waits forever: the classic integration hang.
"""

from __future__ import annotations

from collections import deque

from ..axi import DEFAULT_BUS_BYTES, MAX_BURST_BEATS, AddrBeat, DataBeat
from ..bridge import ManagerPort, RegisterDecodeError, RegisterPort
from ..signals import Channel
from .base import DutProcess, StreamBeat, plan_bursts

DMA_REG_WINDOW = 0x20

_W_CTRL = 0
_W_STATUS = 1
_W_ADDR_LO = 2
_W_ADDR_HI = 3
_W_LEN = 4

STATUS_BUSY = 1 << 0
STATUS_DONE = 1 << 1
STATUS_ERR = 1 << 2


class _DmaBase(DutProcess):
    def __init__(self, name: str, reg_base: int, bus_bytes: int,
                 max_burst_beats: int, reg_latency: int):
        super().__init__(name)
        self.bus_bytes = bus_bytes
        self.max_burst_beats = max_burst_beats
        self.port = ManagerPort(name, bus_bytes)
        self.reg_port = RegisterPort(
            name=f"{name}.regs", base=reg_base, length=DMA_REG_WINDOW,
            read=self._reg_read, write=self._reg_write, latency=reg_latency)
        self._adopt(self.port.ar, self.port.r, self.port.aw, self.port.w, self.port.b)

        self.busy = False
        self.done = False
        self.err = False
        self.start_pending = False
        self.addr_lo = 0
        self.addr_hi = 0
        self.len_bytes = 0

    # register handlers run at cycle boundaries, never inside step()

    def _reg_read(self, word: int) -> int:
        if word == _W_CTRL:
            return 0
        if word == _W_STATUS:
            return ((STATUS_BUSY if self.busy else 0)
                    | (STATUS_DONE if self.done else 0)
                    | (STATUS_ERR if self.err else 0))
        if word == _W_ADDR_LO:
            return self.addr_lo
        if word == _W_ADDR_HI:
            return self.addr_hi
        if word == _W_LEN:
            return self.len_bytes
        raise RegisterDecodeError(f"word offset {word} out of range")

    def _reg_write(self, word: int, value: int) -> None:
        if word == _W_CTRL:
            if value & 1 and not self.busy:
                self.start_pending = True
        elif word == _W_STATUS:
            if value & STATUS_DONE:
                self.done = False
            if value & STATUS_ERR:
                self.err = False
        elif word == _W_ADDR_LO:
            self.addr_lo = value
        elif word == _W_ADDR_HI:
            self.addr_hi = value
        elif word == _W_LEN:
            self.len_bytes = value
        else:
            raise RegisterDecodeError(f"word offset {word} out of range")

    @property
    def addr(self) -> int:
        return (self.addr_hi << 32) | self.addr_lo

    def debug_probes(self) -> list[tuple]:
        return [
            ("busy", 1, lambda: int(self.busy)),
            ("done", 1, lambda: int(self.done)),
            ("err", 1, lambda: int(self.err)),
        ]

    def _try_start(self) -> list[AddrBeat] | None:
        """Validate programming and plan bursts, or set ERR."""
        self.start_pending = False
        if self.len_bytes % self.bus_bytes or self.addr % self.bus_bytes:
            self.err = True
            return None
        if self.len_bytes == 0:
            self.done = True
            return None
        self.busy = True
        return plan_bursts(self.addr, self.len_bytes, self.bus_bytes,
                           self.max_burst_beats)


class Mm2sDma(_DmaBase):
    """Memory-mapped to stream: DDR reads become stream beats."""

    def __init__(self, name: str, reg_base: int,
                 bus_bytes: int = DEFAULT_BUS_BYTES,
                 max_burst_beats: int = MAX_BURST_BEATS, reg_latency: int = 1,
                 stream_out: Channel | None = None):
        super().__init__(name, reg_base, bus_bytes, max_burst_beats, reg_latency)
        self.stream_out = stream_out if stream_out is not None else Channel(f"{name}.stream")
        self._adopt(self.stream_out)
        self._bursts: list[AddrBeat] = []
        self._next_ar = 0
        self._fifo: deque[bytes] = deque()
        self._total_beats = 0
        self._sent = 0

    def step(self, cycle: int) -> None:
        port = self.port
        if not self.busy:
            if self.start_pending:
                bursts = self._try_start()
                if bursts:
                    self._bursts = bursts
                    self._next_ar = 0
                    self._fifo.clear()
                    self._total_beats = self.len_bytes // self.bus_bytes
                    self._sent = 0
            return

        if port.ar.fired():
            self._next_ar += 1
        if port.r.fired():
            self._fifo.append(port.r.payload.value.data)
        if self.stream_out.fired():
            self._fifo.popleft()
            self._sent += 1

        if self._next_ar < len(self._bursts):
            port.ar.valid.set(1)
            port.ar.payload.set(self._bursts[self._next_ar])
        else:
            port.ar.valid.set(0)

        port.r.ready.set(1 if len(self._fifo) < 2 else 0)

        if self._fifo:
            self.stream_out.valid.set(1)
            self.stream_out.payload.set(
                StreamBeat(self._fifo[0], last=self._sent == self._total_beats - 1))
        else:
            self.stream_out.valid.set(0)

        if self._sent == self._total_beats:
            self.busy = False
            self.done = True
            self.stream_out.valid.set(0)
            port.r.ready.set(0)


class S2mmDma(_DmaBase):
    """Stream to memory-mapped: stream beats become DDR write bursts."""

    def __init__(self, name: str, reg_base: int,
                 bus_bytes: int = DEFAULT_BUS_BYTES,
                 max_burst_beats: int = MAX_BURST_BEATS, reg_latency: int = 1,
                 stream_in: Channel | None = None):
        super().__init__(name, reg_base, bus_bytes, max_burst_beats, reg_latency)
        self.stream_in = stream_in if stream_in is not None else Channel(f"{name}.stream")
        self._adopt(self.stream_in)
        self._bursts: list[AddrBeat] = []
        self._prefix: list[int] = []  # cumulative beat counts per burst
        self._buf: deque[bytes] = deque()
        self._received = 0
        self._next_aw = 0
        self._aw_fired = 0
        self._w_sent = 0
        self._b_seen = 0
        self._total_beats = 0

    def step(self, cycle: int) -> None:
        port = self.port
        if not self.busy:
            if self.start_pending:
                bursts = self._try_start()
                if bursts:
                    self._bursts = bursts
                    prefix = [0]
                    for b in bursts:
                        prefix.append(prefix[-1] + b.beats)
                    self._prefix = prefix
                    self._buf.clear()
                    self._received = 0
                    self._next_aw = 0
                    self._aw_fired = 0
                    self._w_sent = 0
                    self._b_seen = 0
                    self._total_beats = self.len_bytes // self.bus_bytes
            return

        if self.stream_in.fired():
            self._buf.append(self.stream_in.payload.value.data)
            self._received += 1
        if port.aw.fired():
            self._aw_fired += 1
            self._next_aw += 1
        if port.w.fired():
            self._buf.popleft()
            self._w_sent += 1
        if port.b.fired():
            self._b_seen += 1

        # AW for the next burst goes out once its first data beat arrived
        if (self._next_aw < len(self._bursts)
                and self._received >= self._prefix[self._next_aw] + 1):
            port.aw.valid.set(1)
            port.aw.payload.set(self._bursts[self._next_aw])
        else:
            port.aw.valid.set(0)

        # W beats stream out in order for bursts whose AW already fired
        allowed = self._prefix[self._aw_fired]
        if self._buf and self._w_sent < allowed:
            burst_idx = self._burst_of_beat(self._w_sent)
            last = self._w_sent == self._prefix[burst_idx + 1] - 1
            port.w.valid.set(1)
            port.w.payload.set(DataBeat(
                data=self._buf[0], last=last,
                strb=(1 << self.bus_bytes) - 1))
        else:
            port.w.valid.set(0)

        self.stream_in.ready.set(1 if self._received < self._total_beats else 0)
        port.b.ready.set(1)

        if self._b_seen == len(self._bursts):
            self.busy = False
            self.done = True
            port.b.ready.set(0)
            self.stream_in.ready.set(0)

    def _burst_of_beat(self, beat_idx: int) -> int:
        for k in range(len(self._bursts)):
            if self._prefix[k] <= beat_idx < self._prefix[k + 1]:
                return k
        raise AssertionError("beat index outside planned bursts")
