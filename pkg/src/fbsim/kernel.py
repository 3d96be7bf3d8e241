"""Deterministic cycle-stepped scheduler.

One kernel owns a set of hardware processes and at most one firmware
task. Each cycle runs in two phases: every process samples committed
signal values and computes next values (phase 1), then the kernel commits
all signals at once (phase 2). The firmware runs cooperatively on its own
thread but in strict handoff with the kernel, so the whole simulation is
a single logical execution stream and fully reproducible.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Protocol, runtime_checkable

from .signals import Channel, Signal

SimTime = int

DEFAULT_WATCHDOG_WINDOW = 10_000


class SimulationError(Exception):
    """Misuse of the kernel API (not a simulated outcome)."""


class SimOutcome(Enum):
    FIRMWARE_DONE = "firmware-done"
    MAX_CYCLES = "max-cycles"
    HANG = "hang"
    PROTOCOL_VIOLATION = "protocol-violation"


@dataclass
class SimResult:
    outcome: SimOutcome
    final_cycle: SimTime
    diagnostics: list[str] = field(default_factory=list)
    firmware_exit: int | None = None

    @property
    def ok(self) -> bool:
        return self.outcome is SimOutcome.FIRMWARE_DONE and (self.firmware_exit in (0, None))


@dataclass
class KernelConfig:
    max_cycles: int
    watchdog_window: int = DEFAULT_WATCHDOG_WINDOW
    seed: int = 0

    def __post_init__(self):
        if self.max_cycles < 1:
            raise SimulationError("max_cycles must be >= 1")
        if self.watchdog_window < 1:
            raise SimulationError("watchdog_window must be >= 1")


@runtime_checkable
class HardwareProcess(Protocol):
    """Anything steppable once per cycle.

    `signals` lists every Signal the process drives or shares so the
    kernel can commit them; `channels` (optional) lists handshake lanes
    for activity tracking and hang diagnostics.
    """

    name: str

    def step(self, cycle: SimTime) -> None: ...

    @property
    def signals(self) -> Iterable[Signal]: ...


@dataclass
class WaitBlock:
    """Firmware suspended until SimTime reaches resume_at."""

    resume_at: SimTime

    def describe(self) -> str:
        return f"waiting until cycle {self.resume_at}"


class FirmwareTask:
    """Cooperative firmware thread with strict kernel handoff.

    Exactly one of kernel/firmware runs at any instant: the kernel
    releases the task, then waits until the task either blocks on a
    simulated-time operation or finishes.
    """

    def __init__(self, entry: Callable[[Any], int | None]):
        self._entry = entry
        self._go = threading.Semaphore(0)
        self._back = threading.Semaphore(0)
        self._thread: threading.Thread | None = None
        self.ctx: Any = None
        self.state = "new"  # new | running | blocked | done | error
        self.block_reason: Any = None
        self.exit_code: int | None = None
        self.error: BaseException | None = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self._main, name="firmware", daemon=True)
        self._thread.start()

    def _main(self) -> None:
        self._go.acquire()
        try:
            rv = self._entry(self.ctx)
            self.exit_code = 0 if rv is None else int(rv)
            self.state = "done"
        except BaseException as exc:  # surfaced by the kernel, not swallowed
            self.error = exc
            self.state = "error"
        self._back.release()

    def kick(self) -> str:
        """Let the firmware run until its next block point (kernel side)."""
        self.state = "running"
        self._go.release()
        self._back.acquire()
        if self.state == "error":
            raise SimulationError("firmware task raised") from self.error
        return self.state

    def block(self, reason: Any) -> None:
        """Park the firmware thread until the kernel resumes it (firmware side)."""
        self.block_reason = reason
        self.state = "blocked"
        self._back.release()
        self._go.acquire()

    @property
    def done(self) -> bool:
        return self.state == "done"

    @property
    def blocked(self) -> bool:
        return self.state == "blocked"


class Kernel:
    """Owns processes, signals, the clock and the run loop."""

    def __init__(self):
        self._processes: list[HardwareProcess] = []
        self._task: FirmwareTask | None = None
        self._started = False
        self.now: SimTime = 0
        self._halt_violations: list[Any] | None = None
        self._samplers: list[Callable[[SimTime], None]] = []

    # -- assembly ---------------------------------------------------------

    def register_process(self, process: HardwareProcess) -> HardwareProcess:
        if self._started:
            raise SimulationError("simulation already started")
        self._processes.append(process)
        return process

    def spawn_firmware(self, entry: Callable[[Any], int | None]) -> FirmwareTask:
        if self._started:
            raise SimulationError("simulation already started")
        if self._task is not None:
            raise SimulationError("a firmware task is already spawned")
        self._task = FirmwareTask(entry)
        return self._task

    def add_sampler(self, fn: Callable[[SimTime], None]) -> None:
        """fn(t) is called with committed state entering cycle t, and once
        more after the final cycle."""
        self._samplers.append(fn)

    def halt_protocol(self, violations: list[Any]) -> None:
        """Escalation hook for strict-mode protocol checking."""
        if self._halt_violations is None:
            self._halt_violations = list(violations)
        else:
            self._halt_violations.extend(violations)

    # -- run loop ---------------------------------------------------------

    def run(self, config: KernelConfig) -> SimResult:
        if self._started:
            raise SimulationError("kernel cannot be run twice")
        self._started = True

        signals = self._collect_signals()
        channels = self._collect_channels()
        task = self._task

        if task is not None:
            task.start()
            task.kick()  # runs in zero time until its first block point
        t = 0
        self.now = 0
        quiet = 0

        while True:
            if task is not None and task.done:
                return self._finish(SimOutcome.FIRMWARE_DONE, t, [], task)
            if self._halt_violations is not None:
                return self._finish(
                    SimOutcome.PROTOCOL_VIOLATION, t,
                    [str(v) for v in self._halt_violations], task)
            if t >= config.max_cycles:
                return self._finish(SimOutcome.MAX_CYCLES, t, [], task)

            for fn in self._samplers:
                fn(t)

            handshakes = 0
            for ch in channels:
                if ch.valid.value and ch.ready.value:
                    handshakes += 1

            for proc in self._processes:
                proc.step(t)
            for sig in signals:
                sig.commit()

            t += 1
            self.now = t

            fw_progress = False
            if task is not None and task.blocked:
                while task.blocked and task.block_reason.resume_at <= t:
                    reason = task.block_reason
                    finish = getattr(reason, "finish", None)
                    if finish is not None:
                        finish(t)
                    task.kick()
                    fw_progress = True
                    if task.done:
                        break

            if handshakes or fw_progress:
                quiet = 0
            else:
                quiet += 1

            if (task is not None and not task.done and task.blocked
                    and quiet >= config.watchdog_window):
                diags = self._hang_diagnostics(task, config.watchdog_window)
                return self._finish(SimOutcome.HANG, t, diags, task)

    def _finish(self, outcome: SimOutcome, t: SimTime, diagnostics: list[str],
                task: FirmwareTask | None) -> SimResult:
        for fn in self._samplers:
            fn(t)
        return SimResult(
            outcome=outcome,
            final_cycle=t,
            diagnostics=diagnostics,
            firmware_exit=task.exit_code if task is not None else None,
        )

    # -- introspection ----------------------------------------------------

    def _collect_signals(self) -> list[Signal]:
        seen: dict[int, Signal] = {}
        for proc in self._processes:
            for sig in proc.signals:
                seen.setdefault(id(sig), sig)
        return list(seen.values())

    def _collect_channels(self) -> list[Channel]:
        seen: dict[int, Channel] = {}
        for proc in self._processes:
            for ch in getattr(proc, "channels", ()):
                seen.setdefault(id(ch), ch)
        return list(seen.values())

    def _hang_diagnostics(self, task: FirmwareTask, window: int) -> list[str]:
        diags: list[str] = []
        for proc in self._processes:
            hook = getattr(proc, "hang_diagnostics", None)
            if hook is not None:
                diags.extend(hook())
        for ch in self._collect_channels():
            if ch.valid.value and not ch.ready.value:
                diags.append(f"channel {ch.name}: VALID asserted without READY")
        if task.blocked:
            reason = task.block_reason
            describe = getattr(reason, "describe", None)
            diags.append(f"firmware blocked: {describe() if describe else reason!r}")
        if not diags:
            diags.append(f"no bus activity and no firmware progress for {window} cycles")
        return diags
