"""AXI4 vocabulary: channel beats, burst arithmetic, conformance checking.

Only INCR bursts are supported (the DMAs in this repo issue incrementing
DDR bursts); FIXED/WRAP are rejected when an address beat is constructed.
Responses are in order per port and the default data bus is 16 bytes
(128 bits) wide, parameterizable per port.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

DEFAULT_BUS_BYTES = 16
MAX_BURST_BEATS = 256
BOUNDARY_4K = 4096

# Channel classes, in fixed order (also the congestion stream ordinals).
CH_AR = "AR"
CH_R = "R"
CH_AW = "AW"
CH_W = "W"
CH_B = "B"
CHANNEL_CLASSES = (CH_AR, CH_R, CH_AW, CH_W, CH_B)


class Resp(IntEnum):
    OKAY = 0
    SLVERR = 2


class BurstError(Exception):
    """Illegal burst parameters at construction time."""


@dataclass(frozen=True)
class AddrBeat:
    """AR/AW payload: one INCR burst request."""

    id: int
    addr: int
    len_m1: int  # beats minus one, 0..255
    size_log2: int  # log2 of bytes per beat
    burst: str = "INCR"

    def __post_init__(self):
        if self.burst != "INCR":
            raise BurstError(f"unsupported burst type {self.burst!r}")
        if not 0 <= self.len_m1 < MAX_BURST_BEATS:
            raise BurstError(f"len_m1 {self.len_m1} out of range")
        if self.size_log2 < 0:
            raise BurstError("size_log2 must be >= 0")

    @property
    def beats(self) -> int:
        return self.len_m1 + 1

    @property
    def bytes_per_beat(self) -> int:
        return 1 << self.size_log2

    @property
    def total_bytes(self) -> int:
        return self.beats << self.size_log2

    def crosses_4k(self) -> bool:
        return (self.addr // BOUNDARY_4K) != ((self.addr + self.total_bytes - 1) // BOUNDARY_4K)


@dataclass(frozen=True)
class DataBeat:
    """R/W payload. strb is a per-byte enable bitmask, writes only."""

    data: bytes
    last: bool
    id: int = 0
    strb: int | None = None

    def strobe_count(self) -> int:
        if self.strb is None:
            return len(self.data)
        return self.strb.bit_count()


@dataclass(frozen=True)
class RespBeat:
    id: int
    resp: Resp = Resp.OKAY


def beat_address(start_addr: int, size_log2: int, n: int) -> int:
    """Address of beat n of an INCR burst (legality is checked at issue)."""
    return start_addr + (n << size_log2)


def handshake_fired(valid: bool, ready: bool) -> bool:
    """True iff a payload transfers this cycle."""
    return bool(valid) and bool(ready)


@dataclass(frozen=True)
class ProtocolViolation:
    cycle: int
    port: str
    channel: str
    rule: str  # VS | LAST | CNT | B1 | 4KB
    description: str

    def __str__(self) -> str:
        return (f"[{self.rule}] cycle {self.cycle} port {self.port} "
                f"channel {self.channel}: {self.description}")


@dataclass(frozen=True)
class ChannelSample:
    """One observed cycle of a channel where valid was asserted."""

    cycle: int
    valid: bool
    ready: bool
    payload: AddrBeat | DataBeat | RespBeat


@dataclass
class _BurstProgress:
    declared: AddrBeat
    seen: int = 0
    closed: bool = False


class ChannelChecker:
    """Streaming conformance checker for one port.

    Feed every sample (cycles where valid is high) of all five channels in
    cycle order, AR/AW before data channels within a cycle. Rules:

      VS   valid retracted, or payload changed, before the handshake
      LAST last flag inconsistent with the declared beat count
      CNT  data beats delivered != len_m1 + 1 for a closed burst
      B1   response without exactly one preceding completed write burst
      4KB  burst crosses a 4 KiB boundary
    """

    def __init__(self, port: str):
        self.port = port
        self.violations: list[ProtocolViolation] = []
        self._pending: dict[str, ChannelSample] = {}
        self._read_bursts: list[_BurstProgress] = []
        self._write_bursts: list[_BurstProgress] = []
        self._unanswered_writes = 0

    def feed(self, channel: str, sample: ChannelSample) -> None:
        if not sample.valid:
            return
        self._check_stability(channel, sample)
        if sample.ready:
            self._fired(channel, sample)

    def _emit(self, cycle: int, channel: str, rule: str, desc: str) -> None:
        self.violations.append(
            ProtocolViolation(cycle, self.port, channel, rule, desc))

    def _check_stability(self, channel: str, sample: ChannelSample) -> None:
        prev = self._pending.get(channel)
        if prev is not None:
            if sample.cycle != prev.cycle + 1:
                self._emit(prev.cycle + 1, channel, "VS",
                           "VALID retracted before handshake")
            elif sample.payload != prev.payload:
                self._emit(sample.cycle, channel, "VS",
                           "payload changed while stalled")
        self._pending[channel] = None if sample.ready else sample

    def _fired(self, channel: str, sample: ChannelSample) -> None:
        payload = sample.payload
        if channel in (CH_AR, CH_AW):
            assert isinstance(payload, AddrBeat)
            if payload.crosses_4k():
                self._emit(sample.cycle, channel, "4KB",
                           f"burst at 0x{payload.addr:x} ({payload.total_bytes} B) "
                           f"crosses a 4 KiB boundary")
            bursts = self._read_bursts if channel == CH_AR else self._write_bursts
            bursts.append(_BurstProgress(payload))
        elif channel in (CH_R, CH_W):
            assert isinstance(payload, DataBeat)
            bursts = self._read_bursts if channel == CH_R else self._write_bursts
            self._data_beat(channel, sample.cycle, payload, bursts)
        elif channel == CH_B:
            if self._unanswered_writes == 0:
                self._emit(sample.cycle, channel, "B1",
                           "response without a completed write burst")
            else:
                self._unanswered_writes -= 1

    def _data_beat(self, channel: str, cycle: int, beat: DataBeat,
                   bursts: list[_BurstProgress]) -> None:
        current = next((b for b in bursts if not b.closed), None)
        if current is None:
            self._emit(cycle, channel, "CNT", "data beat without an address beat")
            return
        current.seen += 1
        is_final = current.seen == current.declared.beats
        if beat.last != is_final:
            if beat.last:
                self._emit(cycle, channel, "LAST",
                           f"LAST on beat {current.seen} of {current.declared.beats}")
            else:
                self._emit(cycle, channel, "LAST",
                           f"LAST missing on final beat ({current.declared.beats})")
        if beat.last or is_final:
            current.closed = True
            if beat.last and current.seen != current.declared.beats:
                self._emit(cycle, channel, "CNT",
                           f"burst delivered {current.seen} beats, "
                           f"declared {current.declared.beats}")
            if channel == CH_W:
                self._unanswered_writes += 1
            bursts.remove(current)


@dataclass
class PortTrace:
    """Per-cycle channel samples for one port (valid cycles only)."""

    port: str
    samples: dict[str, list[ChannelSample]] = field(
        default_factory=lambda: {ch: [] for ch in CHANNEL_CLASSES})

    def record(self, channel: str, sample: ChannelSample) -> None:
        self.samples[channel].append(sample)

    def as_tuples(self) -> list[tuple]:
        out = []
        for ch in CHANNEL_CLASSES:
            for s in self.samples[ch]:
                out.append((self.port, ch, s.cycle, s.valid, s.ready, s.payload))
        return out


def check_trace(traces: dict[str, PortTrace] | list[PortTrace]) -> list[ProtocolViolation]:
    """Pure conformance check over recorded traces: same trace, same list."""
    if isinstance(traces, dict):
        traces = [traces[k] for k in sorted(traces)]
    violations: list[ProtocolViolation] = []
    for trace in traces:
        checker = ChannelChecker(trace.port)
        events: list[tuple[int, int, str, ChannelSample]] = []
        for order, ch in enumerate(CHANNEL_CLASSES):
            for s in trace.samples[ch]:
                events.append((s.cycle, order, ch, s))
        events.sort(key=lambda e: (e[0], e[1]))
        for _, _, ch, sample in events:
            checker.feed(ch, sample)
        violations.extend(checker.violations)
    violations.sort(key=lambda v: (v.cycle, v.port, v.channel, v.rule))
    return violations
