"""Data-movement measurement: bandwidth, stalls, access heatmaps.

The bridge feeds one BeatRecord per memory-side data beat (stamped with
the cycle the bytes moved) and one per stalled port-cycle. Aggregations
are exact: utilization windows reconstruct total bytes to the byte, and
heatmap bins sum to the number of data-beat records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

DIR_READ = "read"
DIR_WRITE = "write"

PORT_KIND_MANAGER = "manager"
PORT_KIND_REGISTER = "register"


class ProfilerError(Exception):
    pass


@dataclass(frozen=True)
class BeatRecord:
    cycle: int
    port: str
    direction: str  # read | write
    bytes_moved: int  # 0 for stalled cycles
    stalled: bool = False
    addr: int | None = None  # first byte touched, data beats only

    def __post_init__(self):
        if self.stalled and self.bytes_moved:
            raise ProfilerError("stalled records carry no bytes")


@dataclass
class BandwidthSeries:
    window_cycles: int
    window_starts: list[int]
    bytes_per_window: dict[str, list[int]]
    utilization: dict[str, list[float]]


@dataclass
class Heatmap:
    addr_bucket_bytes: int
    time_bucket_cycles: int
    bins: dict[tuple[int, int], list[int]]  # (addr bucket, time bucket) -> [reads, writes]


@dataclass
class _PortState:
    bus_bytes: int
    kind: str
    last_cycle: int = -1
    total_bytes: int = 0
    stall_cycles: int = 0


class Profiler:
    def __init__(self):
        self._ports: dict[str, _PortState] = {}
        self._records: list[BeatRecord] = []

    # -- feeding ----------------------------------------------------------

    def register_port(self, name: str, bus_bytes: int,
                      kind: str = PORT_KIND_MANAGER) -> None:
        if name in self._ports:
            raise ProfilerError(f"port {name!r} already registered")
        self._ports[name] = _PortState(bus_bytes=bus_bytes, kind=kind)

    def observe(self, record: BeatRecord) -> None:
        state = self._ports.get(record.port)
        if state is None:
            raise ProfilerError(f"unknown port {record.port!r}")
        if record.cycle < state.last_cycle:
            raise ProfilerError(
                f"out-of-order record for port {record.port!r}: "
                f"cycle {record.cycle} after {state.last_cycle}")
        state.last_cycle = record.cycle
        if record.stalled:
            state.stall_cycles += 1
        else:
            state.total_bytes += record.bytes_moved
        self._records.append(record)

    # -- aggregation ------------------------------------------------------

    @property
    def records(self) -> list[BeatRecord]:
        return list(self._records)

    def ports(self, kind: str | None = None) -> list[str]:
        names = [n for n, s in self._ports.items() if kind is None or s.kind == kind]
        return sorted(names)

    def total_bytes(self, port: str | None = None, kind: str | None = None) -> int:
        if port is not None:
            return self._ports[port].total_bytes
        return sum(s.total_bytes for n, s in self._ports.items()
                   if kind is None or s.kind == kind)

    def stalls(self) -> dict[str, int]:
        return {name: self._ports[name].stall_cycles for name in sorted(self._ports)}

    def _span_cycles(self) -> int:
        if not self._records:
            return 0
        return max(r.cycle for r in self._records) + 1

    def bandwidth(self, window_cycles: int) -> BandwidthSeries:
        if window_cycles < 1:
            raise ProfilerError("window_cycles must be >= 1")
        span = self._span_cycles()
        n_windows = (span + window_cycles - 1) // window_cycles
        starts = [i * window_cycles for i in range(n_windows)]
        names = sorted(self._ports)
        per_port = {name: [0] * n_windows for name in names}
        for rec in self._records:
            if not rec.stalled:
                per_port[rec.port][rec.cycle // window_cycles] += rec.bytes_moved
        util: dict[str, list[float]] = {}
        for name in names:
            bus = self._ports[name].bus_bytes
            fractions = []
            for i, moved in enumerate(per_port[name]):
                # the last window is judged on its true (shorter) length so
                # the series reconstructs total bytes exactly
                length = min(window_cycles, span - starts[i])
                fractions.append(moved / (bus * length))
            util[name] = fractions
        return BandwidthSeries(window_cycles, starts, per_port, util)

    def heatmap(self, addr_bucket_bytes: int, time_bucket_cycles: int) -> Heatmap:
        if addr_bucket_bytes < 1 or time_bucket_cycles < 1:
            raise ProfilerError("bucket sizes must be >= 1")
        bins: dict[tuple[int, int], list[int]] = {}
        for rec in self._records:
            if rec.stalled or rec.addr is None:
                continue
            key = (rec.addr // addr_bucket_bytes, rec.cycle // time_bucket_cycles)
            cell = bins.setdefault(key, [0, 0])
            cell[0 if rec.direction == DIR_READ else 1] += 1
        return Heatmap(addr_bucket_bytes, time_bucket_cycles, bins)

    # -- export -----------------------------------------------------------

    def export(self, fmt: str, path: str, *, window_cycles: int = 64,
               addr_bucket_bytes: int = 4096, time_bucket_cycles: int = 64) -> None:
        if fmt == "csv":
            self._export_csv(path, window_cycles, addr_bucket_bytes, time_bucket_cycles)
        elif fmt == "json":
            self._export_json(path, window_cycles, addr_bucket_bytes, time_bucket_cycles)
        else:
            raise ProfilerError(f"unknown export format {fmt!r}")

    def bandwidth_csv(self, window_cycles: int) -> str:
        series = self.bandwidth(window_cycles)
        lines = ["window_start_cycle,port,bytes,utilization"]
        for i, start in enumerate(series.window_starts):
            for port in sorted(series.bytes_per_window):
                lines.append(f"{start},{port},{series.bytes_per_window[port][i]},"
                             f"{series.utilization[port][i]:.10g}")
        return "\n".join(lines) + "\n"

    def stalls_csv(self) -> str:
        lines = ["port,stall_cycles"]
        for port, count in self.stalls().items():
            lines.append(f"{port},{count}")
        return "\n".join(lines) + "\n"

    def heatmap_csv(self, addr_bucket_bytes: int, time_bucket_cycles: int) -> str:
        hm = self.heatmap(addr_bucket_bytes, time_bucket_cycles)
        lines = ["addr_bucket,time_bucket,reads,writes"]
        for (a, t) in sorted(hm.bins):
            reads, writes = hm.bins[(a, t)]
            lines.append(f"{a},{t},{reads},{writes}")
        return "\n".join(lines) + "\n"

    def _export_csv(self, path: str, window: int, abkt: int, tbkt: int) -> None:
        import os
        os.makedirs(path, exist_ok=True)
        try:
            with open(os.path.join(path, "bandwidth.csv"), "w") as fh:
                fh.write(self.bandwidth_csv(window))
            with open(os.path.join(path, "stalls.csv"), "w") as fh:
                fh.write(self.stalls_csv())
            with open(os.path.join(path, "heatmap.csv"), "w") as fh:
                fh.write(self.heatmap_csv(abkt, tbkt))
        except OSError as exc:
            raise ProfilerError(f"cannot write reports under {path!r}: {exc}") from exc

    def _export_json(self, path: str, window: int, abkt: int, tbkt: int) -> None:
        series = self.bandwidth(window)
        hm = self.heatmap(abkt, tbkt)
        doc = {
            "ports": {
                name: {
                    "kind": state.kind,
                    "bus_bytes": state.bus_bytes,
                    "total_bytes": state.total_bytes,
                    "stall_cycles": state.stall_cycles,
                }
                for name, state in sorted(self._ports.items())
            },
            "bandwidth": {
                "window_cycles": series.window_cycles,
                "window_starts": series.window_starts,
                "bytes": series.bytes_per_window,
                "utilization": series.utilization,
            },
            "heatmap": {
                "addr_bucket_bytes": hm.addr_bucket_bytes,
                "time_bucket_cycles": hm.time_bucket_cycles,
                "bins": [
                    {"addr_bucket": a, "time_bucket": t,
                     "reads": hm.bins[(a, t)][0], "writes": hm.bins[(a, t)][1]}
                    for (a, t) in sorted(hm.bins)
                ],
            },
        }
        try:
            with open(path, "w") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise ProfilerError(f"cannot write report {path!r}: {exc}") from exc
