"""Shared harnesses and independent oracles."""

from __future__ import annotations

from collections import deque

import pytest

from fbsim.axi import AddrBeat, DataBeat
from fbsim.bridge import ManagerPort, MemoryBridge
from fbsim.duts.base import DutProcess
from fbsim.kernel import Kernel, KernelConfig
from fbsim.memory import MemoryImage
from fbsim.profiler import Profiler
from fbsim.scenario import ScenarioConfig, run_scenario


# -- independent matmul oracle (plain loops, wrapping 32-bit) ----------------

def matmul_oracle_words(m, r, c, a, w, p):
    bpr = (c + 3) // 4
    rows = []
    for i in range(m):
        lanes = [0] * (4 * bpr)
        for j in range(c):
            acc = p[i][j]
            for k in range(r):
                acc += a[i][k] * w[k][j]
            lanes[j] = acc & 0xFFFFFFFF
        rows.append(lanes)
    return rows


def matmul_oracle_bytes(m, r, c, a, w, p):
    out = bytearray()
    for lanes in matmul_oracle_words(m, r, c, a, w, p):
        for v in lanes:
            out += v.to_bytes(4, "little")
    return bytes(out)


# -- scripted AXI manager for bridge-level tests -----------------------------

class ScriptedMaster(DutProcess):
    """Drives one manager port from explicit burst scripts.

    reads: AddrBeat list issued in order. writes: (AddrBeat, [DataBeat])
    list. rready_low_cycles stalls the R channel for the first beats to
    provoke backpressure paths.
    """

    def __init__(self, port: ManagerPort, reads=(), writes=(),
                 rready_low_until: int = 0):
        super().__init__(f"master-{port.name}")
        self.port = port
        self._adopt(port.ar, port.r, port.aw, port.w, port.b)
        self.reads = deque(reads)
        self.writes = deque([aw, list(beats)] for aw, beats in writes)
        self.rready_low_until = rready_low_until
        self.r_beats: list[tuple[int, DataBeat]] = []
        self.b_resps: list[tuple[int, object]] = []
        self._aw_open = 0

    def step(self, cycle: int) -> None:
        port = self.port
        if port.ar.fired():
            self.reads.popleft()
        if self.reads:
            port.ar.valid.set(1)
            port.ar.payload.set(self.reads[0])
        else:
            port.ar.valid.set(0)

        if port.r.fired():
            self.r_beats.append((cycle, port.r.payload.value))
        port.r.ready.set(0 if cycle < self.rready_low_until else 1)

        if port.aw.fired():
            self._aw_open += 1
        if port.w.fired():
            self.writes[0][1].pop(0)
            if not self.writes[0][1]:
                self.writes.popleft()
                self._aw_open -= 1
        if self.writes and self._aw_open == 0:
            port.aw.valid.set(1)
            port.aw.payload.set(self.writes[0][0])
        else:
            port.aw.valid.set(0)
        if self.writes and self._aw_open > 0 and self.writes[0][1]:
            port.w.valid.set(1)
            port.w.payload.set(self.writes[0][1][0])
        else:
            port.w.valid.set(0)

        if port.b.fired():
            self.b_resps.append((cycle, port.b.payload.value))
        port.b.ready.set(1)


def make_bridge_rig(n_ports=1, policy=None, seed=0, congestion=None,
                    bus_bytes=16, strict=False):
    """Memory + bridge + kernel with scripted masters attached."""
    memory = MemoryImage()
    profiler = Profiler()
    bridge = MemoryBridge(memory, profiler, policy, seed=seed, strict=strict)
    masters = []
    for i in range(n_ports):
        port = ManagerPort(f"p{i}", bus_bytes)
        bridge.attach_manager_port(port, congestion)
        masters.append(ScriptedMaster(port))
    kernel = Kernel()
    for m in masters:
        kernel.register_process(m)
    kernel.register_process(bridge)
    bridge.violation_sink = kernel.halt_protocol
    return kernel, bridge, memory, profiler, masters


def run_cycles(kernel, n):
    return kernel.run(KernelConfig(max_cycles=n))


def beat(data: bytes, last: bool, strb: int | None = None) -> DataBeat:
    return DataBeat(data=data, last=last, strb=strb)


def rd_burst(addr, beats, bus_bytes=16, txn_id=0) -> AddrBeat:
    return AddrBeat(id=txn_id, addr=addr, len_m1=beats - 1,
                    size_log2=bus_bytes.bit_length() - 1)


def run_custom_fw(soc, entry, *, max_cycles=10_000, watchdog_window=10_000,
                  policy=None, congestion=None, seed=0, strict=True):
    """Wire a SocHandle to memory/bridge/kernel and run entry(ctx)."""
    from fbsim.firmware import attach_firmware

    memory = MemoryImage()
    profiler = Profiler()
    bridge = MemoryBridge(memory, profiler, policy, seed=seed, strict=strict)
    for port in soc.manager_ports:
        bridge.attach_manager_port(port, congestion)
    for reg in soc.register_ports:
        bridge.attach_register_port(reg)
    kernel = Kernel()
    for proc in soc.processes:
        kernel.register_process(proc)
    kernel.register_process(bridge)
    bridge.violation_sink = kernel.halt_protocol
    attach_firmware(kernel, bridge, memory, entry)
    result = kernel.run(KernelConfig(max_cycles=max_cycles,
                                     watchdog_window=watchdog_window))
    bridge.flush_records()
    return result, memory, bridge, profiler


# -- scenario shorthands ------------------------------------------------------

def matmul_config(m=8, r=8, c=8, data_seed=1, **overrides):
    doc = {
        "dut": {"kind": "systolic-soc", "rows": r, "cols": c},
        "firmware": {"kind": "builtin", "name": "matmul",
                     "params": {"m": m, "r": r, "c": c, "data_seed": data_seed}},
        "max_cycles": 200_000,
    }
    doc.update(overrides)
    return ScenarioConfig.from_dict(doc)


def run_matmul(m=8, r=8, c=8, data_seed=1, **overrides):
    return run_scenario(matmul_config(m, r, c, data_seed, **overrides))


@pytest.fixture
def tmp_report_dir(tmp_path):
    return str(tmp_path / "reports")


# -- minimal independent VCD reader ------------------------------------------

class VcdReader:
    """Tiny parser used to round-trip our own writer's output."""

    def __init__(self, text: str):
        self.vars: dict[str, str] = {}  # code -> name
        self.transitions: dict[str, list[tuple[int, int]]] = {}
        self._parse(text)

    def _parse(self, text: str) -> None:
        tokens = text.split()
        i = 0
        now = 0
        scope: list[str] = []
        in_defs = True
        while i < len(tokens):
            tok = tokens[i]
            if in_defs:
                if tok == "$scope":
                    scope.append(tokens[i + 2])
                    i += 4
                elif tok == "$upscope":
                    scope.pop()
                    i += 2
                elif tok == "$var":
                    code, name = tokens[i + 3], tokens[i + 4]
                    self.vars[code] = ".".join(scope + [name])
                    self.transitions[code] = []
                    i += 6
                elif tok == "$enddefinitions":
                    in_defs = False
                    i += 2
                else:
                    i += 1
                continue
            if tok.startswith("#"):
                now = int(tok[1:])
                i += 1
            elif tok in ("$dumpvars", "$end"):
                i += 1
            elif tok.startswith("b"):
                value = int(tok[1:], 2)
                code = tokens[i + 1]
                self.transitions[code].append((now, value))
                i += 2
            else:
                value = int(tok[0])
                code = tok[1:]
                self.transitions[code].append((now, value))
                i += 1

    def changes(self, dotted_name: str) -> list[tuple[int, int]]:
        for code, name in self.vars.items():
            if name == dotted_name:
                return self.transitions[code]
        raise KeyError(dotted_name)
