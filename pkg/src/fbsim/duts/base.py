"""Shared pieces for the reference DUT library."""

from __future__ import annotations

from dataclasses import dataclass

from ..axi import BOUNDARY_4K, MAX_BURST_BEATS, AddrBeat
from ..signals import Channel, Signal


@dataclass(frozen=True)
class StreamBeat:
    """One AXI-Stream transfer: bus-width data plus an end-of-packet flag."""

    data: bytes
    last: bool = False


class DutProcess:
    """Convenience base: tracks the signals/channels a process touches."""

    def __init__(self, name: str):
        self.name = name
        self._signals: list[Signal] = []
        self._channels: list[Channel] = []

    def _adopt(self, *items) -> None:
        for item in items:
            if isinstance(item, Channel):
                self._channels.append(item)
                self._signals.extend(item.signals)
            else:
                self._signals.append(item)

    @property
    def signals(self) -> list[Signal]:
        return self._signals

    @property
    def channels(self) -> list[Channel]:
        return self._channels

    def debug_probes(self) -> list[tuple]:
        """(name, width, getter) triples dumped into the waveform."""
        return []

    def step(self, cycle: int) -> None:
        raise NotImplementedError


def plan_bursts(addr: int, nbytes: int, bus_bytes: int,
                max_beats: int = MAX_BURST_BEATS, txn_id: int = 0) -> list[AddrBeat]:
    """Split a transfer into maximal legal INCR bursts.

    Bursts never exceed max_beats and never cross a 4 KiB boundary; the
    caller guarantees bus-width alignment of addr and nbytes.
    """
    bursts: list[AddrBeat] = []
    size_log2 = bus_bytes.bit_length() - 1
    remaining = nbytes // bus_bytes
    while remaining:
        until_4k = (BOUNDARY_4K - (addr % BOUNDARY_4K)) // bus_bytes
        beats = min(remaining, max_beats, until_4k)
        bursts.append(AddrBeat(id=txn_id, addr=addr, len_m1=beats - 1,
                               size_log2=size_log2))
        addr += beats * bus_bytes
        remaining -= beats
    return bursts
