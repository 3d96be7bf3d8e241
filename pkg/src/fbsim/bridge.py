"""Memory bridge: AXI4 manager ports to the DDR image, register ports to
firmware.

Model shape (all latencies are visible to tests):

  * One address beat (AR or AW, any port) is accepted per cycle; the
    acceptance winner is picked by the arbitration policy, so denial of
    service shows up as AR/AW stall cycles on the losing ports.
  * Reads share a single memory-side data slot: each cycle the policy
    grants one port, whose front burst fetches one beat (in order within
    a port). First read data is visible two cycles after the AR
    handshake when congestion is off.
  * Write data beats buffer per port; the whole burst commits to memory
    atomically when its response handshake fires, and the response is
    visible one cycle after the final W beat when congestion is off.
  * The congestion emulator may stall the bridge-driven READYs (AR/AW/W)
    and delay or stall the bridge-driven VALIDs (R/B); it can only delay,
    never corrupt, so any trace it produces is protocol-clean.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .axi import (CH_AR, CH_AW, CH_B, CH_R, CH_W, CHANNEL_CLASSES,
                  DEFAULT_BUS_BYTES, AddrBeat, ChannelChecker, ChannelSample,
                  DataBeat, PortTrace, ProtocolViolation, Resp, RespBeat,
                  beat_address)
from .congestion import CongestionProfile, CongestionStreams
from .memory import MemoryImage
from .profiler import (DIR_READ, DIR_WRITE, PORT_KIND_REGISTER, BeatRecord,
                       Profiler)
from .signals import Channel, Signal

DECODE_SENTINEL = 0xDEADDEAD

FB_OK = 0
FB_ERR_ALIGN = 1
FB_ERR_DECODE = 2

_STALL_DIRECTION = {CH_AR: DIR_READ, CH_R: DIR_READ,
                    CH_AW: DIR_WRITE, CH_W: DIR_WRITE, CH_B: DIR_WRITE}


class BridgeError(Exception):
    pass


class RegisterDecodeError(Exception):
    """Raised by register handlers for offsets they do not implement."""


class ManagerPort:
    """Five-channel AXI4 bundle for one DUT manager port.

    The DUT drives AR/AW/W valid+payload and R/B ready; the bridge drives
    the rest.
    """

    def __init__(self, name: str, bus_bytes: int = DEFAULT_BUS_BYTES):
        self.name = name
        self.bus_bytes = bus_bytes
        self.ar = Channel(f"{name}.AR")
        self.r = Channel(f"{name}.R")
        self.aw = Channel(f"{name}.AW")
        self.w = Channel(f"{name}.W")
        self.b = Channel(f"{name}.B")

    @property
    def channels(self) -> dict[str, Channel]:
        return {CH_AR: self.ar, CH_R: self.r, CH_AW: self.aw,
                CH_W: self.w, CH_B: self.b}

    @property
    def signals(self) -> list[Signal]:
        out: list[Signal] = []
        for ch in (self.ar, self.r, self.aw, self.w, self.b):
            out.extend(ch.signals)
        return out


@dataclass
class RegisterPort:
    """Memory-mapped register window reached through fb_read_32/fb_write_32."""

    name: str
    base: int
    length: int
    read: Callable[[int], int]
    write: Callable[[int, int], None]
    latency: int = 1

    def __post_init__(self):
        if self.latency < 1:
            raise BridgeError("register latency must be >= 1")
        if self.length < 4:
            raise BridgeError("register window must hold at least one word")

    def contains(self, addr: int) -> bool:
        return self.base <= addr < self.base + self.length


@dataclass
class ArbitrationPolicy:
    kind: str = "round-robin"  # or "fixed-priority"
    order: list[str] | None = None

    def __post_init__(self):
        if self.kind not in ("round-robin", "fixed-priority"):
            raise BridgeError(f"unknown arbitration policy {self.kind!r}")
        if self.kind == "fixed-priority" and not self.order:
            raise BridgeError("fixed-priority policy needs a port order")


class Arbiter:
    """Stateful grant engine; attach order defines round-robin rotation."""

    def __init__(self, policy: ArbitrationPolicy, ports: list[str]):
        if policy.kind == "fixed-priority":
            if sorted(policy.order) != sorted(ports) or len(set(policy.order)) != len(policy.order):
                raise BridgeError(
                    "fixed-priority order must list every attached port exactly once "
                    f"(got {policy.order!r} for ports {sorted(ports)!r})")
        self.policy = policy
        self._ports = list(ports)
        self.last_grant: str | None = None

    def grant(self, requests: Iterable[str]) -> str:
        req = set(requests)
        if not req:
            raise BridgeError("arbitrate called with no requests")
        if self.policy.kind == "fixed-priority":
            for name in self.policy.order:
                if name in req:
                    choice = name
                    break
        else:
            ports = self._ports
            start = 0
            if self.last_grant is not None:
                start = (ports.index(self.last_grant) + 1) % len(ports)
            for i in range(len(ports)):
                name = ports[(start + i) % len(ports)]
                if name in req:
                    choice = name
                    break
        self.last_grant = choice
        return choice


def arbitrate(requests: Iterable[str], policy: ArbitrationPolicy,
              state: Arbiter | None = None, *, ports: list[str] | None = None) -> str:
    """One grant decision; pass the same state across cycles for round-robin."""
    if state is None:
        if ports is None:
            ports = list(policy.order) if policy.order else sorted(set(requests))
        state = Arbiter(policy, ports)
    return state.grant(requests)


@dataclass
class _ReadBurst:
    burst: AddrBeat
    accepted_at: int
    fetched: int = 0


@dataclass
class _WriteBurst:
    burst: AddrBeat
    beats: list[DataBeat] = field(default_factory=list)
    fire_cycles: list[int] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return len(self.beats) == self.burst.beats


@dataclass
class _Pending:
    """A bridge-driven payload waiting for its presentation window."""

    payload: DataBeat | RespBeat
    eligible_at: int
    presented_at: int = -1


class _PortContext:
    def __init__(self, port: ManagerPort, streams: CongestionStreams):
        self.port = port
        self.streams = streams
        self.read_bursts: deque[_ReadBurst] = deque()
        self.outstanding_reads = 0
        self.write_open: deque[_WriteBurst] = deque()
        self.write_waiting_b: deque[_WriteBurst] = deque()
        self.r_fifo: deque[_Pending] = deque()
        self.r_presented: _Pending | None = None
        self.b_fifo: deque[tuple[_Pending, _WriteBurst]] = deque()
        self.b_presented: tuple[_Pending, _WriteBurst] | None = None
        self.records: list[BeatRecord] = []
        self.trace = PortTrace(port.name)
        self.checker = ChannelChecker(port.name)
        self.mem_bytes_read = 0
        self.mem_bytes_written = 0


class MemoryBridge:
    """Arbitrated adapter between manager ports, register ports and DDR."""

    name = "bridge"

    def __init__(self, memory: MemoryImage, profiler: Profiler,
                 policy: ArbitrationPolicy | None = None, seed: int = 0,
                 strict: bool = False, max_outstanding: int = 4):
        self.memory = memory
        self.profiler = profiler
        self.policy = policy or ArbitrationPolicy()
        self.seed = seed
        self.strict = strict
        self.max_outstanding = max_outstanding
        self.fault_mode: str | None = None  # checker-sensitivity injection
        self.decode_errors: list[str] = []
        self.violation_sink: Callable[[list[ProtocolViolation]], None] | None = None
        self._ports: dict[str, _PortContext] = {}
        self._register_ports: list[RegisterPort] = []
        self._addr_arbiter: Arbiter | None = None
        self._mem_arbiter: Arbiter | None = None
        self._started = False
        self._reported_violations = 0

    # -- assembly ---------------------------------------------------------

    def attach_manager_port(self, port: ManagerPort,
                            congestion: CongestionProfile | None = None) -> None:
        if self._started:
            raise BridgeError("cannot attach ports after simulation start")
        if port.name in self._ports:
            raise BridgeError(f"duplicate port name {port.name!r}")
        profile = congestion or CongestionProfile.quiet()
        streams = CongestionStreams(port.name, profile, self.seed)
        self._ports[port.name] = _PortContext(port, streams)
        self.profiler.register_port(port.name, port.bus_bytes)

    def attach_register_port(self, reg: RegisterPort) -> None:
        if self._started:
            raise BridgeError("cannot attach ports after simulation start")
        for other in self._register_ports:
            if reg.base < other.base + other.length and other.base < reg.base + reg.length:
                raise BridgeError(
                    f"register ranges overlap: {reg.name!r} and {other.name!r}")
            if other.name == reg.name:
                raise BridgeError(f"duplicate register port name {reg.name!r}")
        self._register_ports.append(reg)
        self.profiler.register_port(reg.name, 4, kind=PORT_KIND_REGISTER)

    # -- kernel process surface --------------------------------------------

    @property
    def signals(self) -> list[Signal]:
        out: list[Signal] = []
        for ctx in self._ports.values():
            out.extend(ctx.port.signals)
        return out

    @property
    def channels(self) -> list[Channel]:
        out: list[Channel] = []
        for ctx in self._ports.values():
            out.extend(ctx.port.channels.values())
        return out

    def step(self, cycle: int) -> None:
        self.service_cycle(cycle)

    def service_cycle(self, cycle: int) -> None:
        if not self._started:
            self._addr_arbiter = Arbiter(self.policy, list(self._ports))
            self._mem_arbiter = Arbiter(self.policy, list(self._ports))
            self._started = True

        gates: dict[str, dict[str, bool]] = {}
        for name, ctx in self._ports.items():
            # one Bernoulli draw per channel class per cycle, unconditionally,
            # so sequences depend only on (seed, port, channel, cycle)
            gates[name] = {ch: ctx.streams.stall_gate(ch) for ch in CHANNEL_CLASSES}

        for ctx in self._ports.values():
            self._record_and_check(ctx, cycle)
            self._process_fires(ctx, cycle)

        self._engine_cycle(cycle)

        for ctx in self._ports.values():
            self._drive_responses(ctx, cycle, gates[ctx.port.name])
            self._drive_write_ready(ctx, gates[ctx.port.name])
            self._note_stall(ctx, cycle)

        self._grant_address_slot(cycle, gates)

        if self.strict and self.violation_sink is not None:
            found = self.violations()
            if len(found) > self._reported_violations:
                self.violation_sink(found[self._reported_violations:])
                self._reported_violations = len(found)

    # -- per-cycle pieces ---------------------------------------------------

    def _record_and_check(self, ctx: _PortContext, cycle: int) -> None:
        for chname, ch in ctx.port.channels.items():
            if ch.valid.value:
                sample = ChannelSample(cycle, True, bool(ch.ready.value), ch.payload.value)
                ctx.trace.record(chname, sample)
                ctx.checker.feed(chname, sample)

    def _process_fires(self, ctx: _PortContext, cycle: int) -> None:
        port = ctx.port

        if port.ar.fired():
            burst: AddrBeat = port.ar.payload.value
            self._check_beat_width(port, burst)
            ctx.read_bursts.append(_ReadBurst(burst, accepted_at=cycle))
            ctx.outstanding_reads += 1
            self.memory.note_access(port.name, "read", burst.addr,
                                    burst.total_bytes, cycle)

        if port.aw.fired():
            burst = port.aw.payload.value
            self._check_beat_width(port, burst)
            ctx.write_open.append(_WriteBurst(burst))

        if port.w.fired():
            beat: DataBeat = port.w.payload.value
            open_burst = next((b for b in ctx.write_open if not b.complete), None)
            if open_burst is not None:
                open_burst.beats.append(beat)
                open_burst.fire_cycles.append(cycle)
                if open_burst.complete:
                    ctx.write_open.remove(open_burst)
                    ctx.write_waiting_b.append(open_burst)
                    delay = ctx.streams.draw_valid_delay(CH_B)
                    ctx.b_fifo.append((_Pending(RespBeat(open_burst.burst.id, Resp.OKAY),
                                                cycle + delay), open_burst))

        if port.r.fired():
            ctx.r_presented = None

        if port.b.fired():
            presented = ctx.b_presented
            ctx.b_presented = None
            if presented is not None:
                self._commit_write(ctx, presented[1], cycle)

    @staticmethod
    def _check_beat_width(port: ManagerPort, burst: AddrBeat) -> None:
        if burst.bytes_per_beat > port.bus_bytes:
            raise BridgeError(
                f"port {port.name!r}: beat size {burst.bytes_per_beat} exceeds "
                f"bus width {port.bus_bytes}")

    def _commit_write(self, ctx: _PortContext, wb: _WriteBurst, cycle: int) -> None:
        """Atomic commit of a whole write burst at its response handshake."""
        burst = wb.burst
        for i, beat in enumerate(wb.beats):
            addr = beat_address(burst.addr, burst.size_log2, i)
            width = burst.bytes_per_beat
            full = (1 << width) - 1
            if beat.strb is None or beat.strb == full:
                self.memory.write_bytes(addr, beat.data[:width])
                moved = width
            else:
                moved = 0
                for j in range(width):
                    if beat.strb >> j & 1:
                        self.memory.write_bytes(addr + j, beat.data[j:j + 1])
                        moved += 1
            ctx.mem_bytes_written += moved
            ctx.records.append(BeatRecord(
                cycle=wb.fire_cycles[i], port=ctx.port.name, direction=DIR_WRITE,
                bytes_moved=moved, addr=addr))
        self.memory.note_access(ctx.port.name, "write", burst.addr,
                                burst.total_bytes, cycle)
        ctx.write_waiting_b.remove(wb)

    def _engine_cycle(self, cycle: int) -> None:
        """One memory-side data beat per cycle, granted by the policy among
        ports whose front read burst can make progress."""
        requests = [name for name, ctx in self._ports.items()
                    if ctx.read_bursts
                    and ctx.read_bursts[0].accepted_at < cycle
                    and len(ctx.r_fifo) < 2]
        if not requests:
            return
        ctx = self._ports[self._mem_arbiter.grant(requests)]
        rb = ctx.read_bursts[0]
        burst = rb.burst
        addr = beat_address(burst.addr, burst.size_log2, rb.fetched)
        data = self.memory.read_bytes(addr, burst.bytes_per_beat)
        beat = DataBeat(data=data, last=rb.fetched == burst.len_m1, id=burst.id)
        if self.fault_mode == "wrong-last" and burst.beats > 1:
            beat = DataBeat(data=data, last=rb.fetched == 0, id=burst.id)
        delay = ctx.streams.draw_valid_delay(CH_R)
        ctx.r_fifo.append(_Pending(beat, cycle + delay))
        ctx.records.append(BeatRecord(
            cycle=cycle, port=ctx.port.name, direction=DIR_READ,
            bytes_moved=burst.bytes_per_beat, addr=addr))
        ctx.mem_bytes_read += burst.bytes_per_beat
        rb.fetched += 1
        if rb.fetched == burst.beats:
            ctx.read_bursts.popleft()
            ctx.outstanding_reads -= 1

    def _drive_responses(self, ctx: _PortContext, cycle: int,
                         gates: dict[str, bool]) -> None:
        port = ctx.port

        if ctx.r_presented is None:
            if ctx.r_fifo and ctx.r_fifo[0].eligible_at <= cycle and gates[CH_R]:
                ctx.r_presented = ctx.r_fifo.popleft()
                ctx.r_presented.presented_at = cycle
                port.r.valid.set(1)
                port.r.payload.set(ctx.r_presented.payload)
            else:
                port.r.valid.set(0)
        else:
            self._apply_stall_faults(ctx, cycle)

        if ctx.b_presented is None:
            if ctx.b_fifo and ctx.b_fifo[0][0].eligible_at <= cycle and gates[CH_B]:
                ctx.b_presented = ctx.b_fifo.popleft()
                port.b.valid.set(1)
                port.b.payload.set(ctx.b_presented[0].payload)
            else:
                port.b.valid.set(0)

    def _apply_stall_faults(self, ctx: _PortContext, cycle: int) -> None:
        # fault injection while a presented R beat is stalled; used only to
        # prove the conformance checker catches real bridge bugs
        if self.fault_mode is None or ctx.r_presented is None:
            return
        stalled_for = cycle - ctx.r_presented.presented_at
        if self.fault_mode == "retract-valid" and stalled_for == 1:
            ctx.port.r.valid.set(0)
            ctx.r_fifo.appendleft(ctx.r_presented)
            ctx.r_presented = None
        elif self.fault_mode == "corrupt-stalled" and stalled_for == 1:
            beat: DataBeat = ctx.r_presented.payload
            corrupted = DataBeat(
                data=bytes([beat.data[0] ^ 0xFF]) + beat.data[1:],
                last=beat.last, id=beat.id)
            ctx.r_presented = _Pending(corrupted, ctx.r_presented.eligible_at,
                                       ctx.r_presented.presented_at)
            ctx.port.r.payload.set(corrupted)

    def _drive_write_ready(self, ctx: _PortContext, gates: dict[str, bool]) -> None:
        wants_beats = any(not b.complete for b in ctx.write_open)
        ctx.port.w.ready.set(1 if (wants_beats and gates[CH_W]) else 0)

    def _grant_address_slot(self, cycle: int, gates: dict[str, dict[str, bool]]) -> None:
        requests: dict[str, str] = {}
        for name, ctx in self._ports.items():
            port = ctx.port
            can_read = (ctx.outstanding_reads < self.max_outstanding
                        and gates[name][CH_AR])
            can_write = (len(ctx.write_open) + len(ctx.write_waiting_b) < self.max_outstanding
                         and gates[name][CH_AW])
            if port.ar.valid.value and not port.ar.ready.value and can_read:
                requests[name] = CH_AR
            elif port.aw.valid.value and not port.aw.ready.value and can_write:
                requests[name] = CH_AW
        winner = self._addr_arbiter.grant(requests) if requests else None
        for name, ctx in self._ports.items():
            port = ctx.port
            granted = requests.get(name) if name == winner else None
            port.ar.ready.set(1 if granted == CH_AR else 0)
            port.aw.ready.set(1 if granted == CH_AW else 0)

    def _note_stall(self, ctx: _PortContext, cycle: int) -> None:
        for chname, ch in ctx.port.channels.items():
            if ch.valid.value and not ch.ready.value:
                ctx.records.append(BeatRecord(
                    cycle=cycle, port=ctx.port.name,
                    direction=_STALL_DIRECTION[chname], bytes_moved=0, stalled=True))
                return

    # -- register path ------------------------------------------------------

    def register_access_txn(self, kind: str, addr: int, value: int, now: int):
        """Open a register transaction; the kernel finishes it after the
        port's access latency and resumes the firmware."""
        bridge = self

        class _Txn:
            def __init__(self, resume_at: int, reg: RegisterPort | None):
                self.resume_at = resume_at
                self.reg = reg
                self.result = 0
                self.status = FB_OK

            def describe(self) -> str:
                return f"register {kind} @0x{addr:x}"

            def finish(self, cycle: int) -> None:
                if addr & 3:
                    self.status = FB_ERR_ALIGN
                    self.result = DECODE_SENTINEL
                    bridge.decode_errors.append(
                        f"cycle {cycle}: misaligned register {kind} @0x{addr:x}")
                    return
                if self.reg is None:
                    self.status = FB_ERR_DECODE
                    self.result = DECODE_SENTINEL
                    bridge.decode_errors.append(
                        f"cycle {cycle}: unmapped register {kind} @0x{addr:x}")
                    return
                word = (addr - self.reg.base) >> 2
                try:
                    if kind == "read":
                        self.result = self.reg.read(word) & 0xFFFFFFFF
                    else:
                        self.reg.write(word, value & 0xFFFFFFFF)
                except RegisterDecodeError as exc:
                    self.status = FB_ERR_DECODE
                    self.result = DECODE_SENTINEL
                    bridge.decode_errors.append(
                        f"cycle {cycle}: register decode error @0x{addr:x}: {exc}")
                    return
                bridge.profiler.observe(BeatRecord(
                    cycle=cycle, port=self.reg.name,
                    direction=DIR_READ if kind == "read" else DIR_WRITE,
                    bytes_moved=4, addr=addr))

        reg = next((r for r in self._register_ports if r.contains(addr)), None)
        latency = reg.latency if (reg is not None and not addr & 3) else 1
        return _Txn(now + latency, reg)

    # -- reporting ----------------------------------------------------------

    def flush_records(self) -> None:
        """Hand buffered beat records to the profiler in per-port cycle order."""
        for ctx in self._ports.values():
            ctx.records.sort(key=lambda r: r.cycle)
            for rec in ctx.records:
                self.profiler.observe(rec)
            ctx.records = []

    def traces(self) -> dict[str, PortTrace]:
        return {name: ctx.trace for name, ctx in self._ports.items()}

    def violations(self) -> list[ProtocolViolation]:
        out: list[ProtocolViolation] = []
        for ctx in self._ports.values():
            out.extend(ctx.checker.violations)
        out.sort(key=lambda v: (v.cycle, v.port, v.channel, v.rule))
        return out

    def mem_byte_counts(self) -> dict[str, tuple[int, int]]:
        return {name: (ctx.mem_bytes_read, ctx.mem_bytes_written)
                for name, ctx in self._ports.items()}

    def hang_diagnostics(self) -> list[str]:
        diags: list[str] = []
        for name, ctx in self._ports.items():
            for wb in ctx.write_open:
                if not wb.complete and not ctx.port.w.valid.value:
                    diags.append(
                        f"port '{name}': W channel stuck: write burst at "
                        f"0x{wb.burst.addr:x} received {len(wb.beats)}/{wb.burst.beats} "
                        f"data beats; VALID deasserted upstream")
        return diags
