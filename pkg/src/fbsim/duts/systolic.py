"""Weight-stationary systolic matrix engine with partial-sum injection.

Streams (all bus-width beats, little-endian lanes):

    weights: R beats, beat r carrying row r as C signed-8 lanes
    inputs:  M beats, beat m carrying row m as R signed-8 lanes
    psums:   ceil(C/4) beats per row of signed-32 lanes, M rows
    output:  ceil(C/4) beats per row: wrap32(psum[m][c] + sum_r a[m][r]*w[r][c])

Output row m becomes valid a fixed R+C cycles after row m's input
handshake (the fill+drain depth of an RxC grid); backpressure anywhere
stalls the pipeline without data loss. Lanes beyond C are forced to zero.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..axi import DEFAULT_BUS_BYTES
from ..bridge import RegisterDecodeError, RegisterPort
from ..signals import Channel
from .base import DutProcess, StreamBeat

MAX_DIM = 16

_W_GO = 0
_W_DIMS_R_C = 1
_W_DIMS_M = 2
_W_STATUS = 3

CTRL_STATUS_BUSY = 1 << 0
CTRL_STATUS_DONE = 1 << 1
CTRL_STATUS_ERR = 1 << 2


def _int8(b: int) -> int:
    return b - 256 if b >= 128 else b


@dataclass
class SystolicController:
    """GO/DIMS register block shared with the array process."""

    base: int
    latency: int = 1
    dims_r_c: int = 0
    dims_m: int = 0
    go_pending: bool = False
    busy: bool = False
    done: bool = False
    err: bool = False
    port: RegisterPort = field(init=False)

    def __post_init__(self):
        self.port = RegisterPort(name="systolic.regs", base=self.base, length=0x10,
                                 read=self._read, write=self._write,
                                 latency=self.latency)

    def _read(self, word: int) -> int:
        if word == _W_GO:
            return 0
        if word == _W_DIMS_R_C:
            return self.dims_r_c
        if word == _W_DIMS_M:
            return self.dims_m
        if word == _W_STATUS:
            return ((CTRL_STATUS_BUSY if self.busy else 0)
                    | (CTRL_STATUS_DONE if self.done else 0)
                    | (CTRL_STATUS_ERR if self.err else 0))
        raise RegisterDecodeError(f"word offset {word} out of range")

    def _write(self, word: int, value: int) -> None:
        if word == _W_GO:
            if value & 1 and not self.busy:
                self.go_pending = True
        elif word == _W_DIMS_R_C:
            self.dims_r_c = value
        elif word == _W_DIMS_M:
            self.dims_m = value
        elif word == _W_STATUS:
            if value & CTRL_STATUS_DONE:
                self.done = False
            if value & CTRL_STATUS_ERR:
                self.err = False
        else:
            raise RegisterDecodeError(f"word offset {word} out of range")


@dataclass
class _PendingRow:
    visible_at: int
    acts: list[int]  # signed-8 activations; products folded in at emission


class SystolicArray(DutProcess):
    def __init__(self, controller: SystolicController, name: str = "systolic",
                 bus_bytes: int = DEFAULT_BUS_BYTES):
        super().__init__(name)
        self.ctrl = controller
        self.bus_bytes = bus_bytes
        self.w_in = Channel(f"{name}.weights")
        self.a_in = Channel(f"{name}.inputs")
        self.p_in = Channel(f"{name}.psums")
        self.out = Channel(f"{name}.out")
        self._adopt(self.w_in, self.a_in, self.p_in, self.out)

        self._phase = "idle"
        self._r = self._c = self._m = 0
        self._weights: list[list[int]] = []
        self._rows: deque[_PendingRow] = deque()
        self._rows_in = 0
        self._psum_beats: deque[bytes] = deque()
        self._psum_in = 0
        self._out_beats: deque[StreamBeat] = deque()
        self._rows_emitted = 0

    @property
    def beats_per_row(self) -> int:
        return (self._c + 3) // 4

    @property
    def latency(self) -> int:
        return self._r + self._c

    def debug_probes(self) -> list[tuple]:
        phases = {"idle": 0, "wload": 1, "stream": 2}
        return [
            ("phase", 2, lambda: phases[self._phase]),
            ("rows_emitted", 8, lambda: self._rows_emitted),
        ]

    def step(self, cycle: int) -> None:
        ctrl = self.ctrl
        if ctrl.go_pending:
            ctrl.go_pending = False
            r = (ctrl.dims_r_c >> 8) & 0xFF
            c = ctrl.dims_r_c & 0xFF
            m = ctrl.dims_m
            if not (1 <= r <= MAX_DIM and 1 <= c <= MAX_DIM and m >= 1):
                ctrl.err = True
            else:
                self._r, self._c, self._m = r, c, m
                self._weights = []
                self._rows.clear()
                self._rows_in = 0
                self._psum_beats.clear()
                self._psum_in = 0
                self._out_beats.clear()
                self._rows_emitted = 0
                self._phase = "wload"
                ctrl.busy = True

        if self._phase == "idle":
            self.w_in.ready.set(0)
            self.a_in.ready.set(0)
            self.p_in.ready.set(0)
            return

        if self.w_in.fired():
            data = self.w_in.payload.value.data
            self._weights.append([_int8(data[i]) for i in range(self._c)])
            if len(self._weights) == self._r:
                self._phase = "stream"

        if self.a_in.fired():
            data = self.a_in.payload.value.data
            acts = [_int8(data[i]) for i in range(self._r)]
            self._rows.append(_PendingRow(cycle + self.latency, acts))
            self._rows_in += 1

        if self.p_in.fired():
            self._psum_beats.append(self.p_in.payload.value.data)
            self._psum_in += 1

        if self.out.fired():
            self._out_beats.popleft()

        # a finished row is released to the output stage only at its
        # pipeline-latency boundary, once the weights are stationary and
        # once its psum beats are all here
        if (not self._out_beats and self._rows
                and self._phase == "stream"
                and cycle + 1 >= self._rows[0].visible_at
                and len(self._psum_beats) >= self.beats_per_row):
            self._emit_row()

        # activation/psum rows prefetch into buffers sized for a full
        # 16-row workload even while weights are still loading, so the
        # feeding DMAs are throttled by the interconnect, not by the array
        self.w_in.ready.set(1 if self._phase == "wload" else 0)
        self.a_in.ready.set(1 if (self._rows_in < self._m
                                  and len(self._rows) < MAX_DIM) else 0)
        self.p_in.ready.set(1 if (self._psum_in < self._m * self.beats_per_row
                                  and len(self._psum_beats) < 4 * MAX_DIM) else 0)

        if self._out_beats:
            self.out.valid.set(1)
            self.out.payload.set(self._out_beats[0])
        else:
            self.out.valid.set(0)

        if self._phase == "stream" and self._rows_emitted == self._m and not self._out_beats:
            self._phase = "idle"
            ctrl.busy = False
            ctrl.done = True

    def _emit_row(self) -> None:
        row = self._rows.popleft()
        lanes = 4 * self.beats_per_row
        psum = []
        for _ in range(self.beats_per_row):
            beat = self._psum_beats.popleft()
            for j in range(4):
                psum.append(int.from_bytes(beat[4 * j:4 * j + 4], "little"))
        raw = [sum(row.acts[r] * self._weights[r][c] for r in range(self._r))
               for c in range(self._c)]
        values = [(raw[c] + psum[c]) & 0xFFFFFFFF for c in range(self._c)]
        values += [0] * (lanes - self._c)
        self._rows_emitted += 1
        final_row = self._rows_emitted == self._m
        for i in range(self.beats_per_row):
            data = b"".join(v.to_bytes(4, "little")
                            for v in values[4 * i:4 * i + 4])
            data += bytes(self.bus_bytes - len(data))
            self._out_beats.append(StreamBeat(
                data, last=final_row and i == self.beats_per_row - 1))
