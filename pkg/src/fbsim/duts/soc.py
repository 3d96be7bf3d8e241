"""Reference SoC assemblies.

systolic-soc register map (shared contract with firmware):

    0x0000  weights MM2S DMA
    0x1000  input   MM2S DMA
    0x2000  psum    MM2S DMA
    0x3000  output  S2MM DMA
    0x4000  controller (GO, DIMS_R_C, DIMS_M, STATUS)

pipe register map: 0x0000 MM2S, 0x1000 S2MM, streams looped back; it is
the minimal vehicle for bridge, profiler and hang experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..axi import DEFAULT_BUS_BYTES, MAX_BURST_BEATS
from ..bridge import ManagerPort, RegisterPort
from .dma import Mm2sDma, S2mmDma
from .systolic import MAX_DIM, SystolicArray, SystolicController

WEIGHTS_DMA_BASE = 0x0000
INPUT_DMA_BASE = 0x1000
PSUM_DMA_BASE = 0x2000
OUTPUT_DMA_BASE = 0x3000
CONTROLLER_BASE = 0x4000

PIPE_MM2S_BASE = 0x0000
PIPE_S2MM_BASE = 0x1000


@dataclass
class SocHandle:
    name: str
    processes: list = field(default_factory=list)
    manager_ports: list[ManagerPort] = field(default_factory=list)
    register_ports: list[RegisterPort] = field(default_factory=list)
    parts: dict = field(default_factory=dict)

    @property
    def port_names(self) -> list[str]:
        return [p.name for p in self.manager_ports]


def build_systolic_soc(rows: int, cols: int,
                       bus_bytes: int = DEFAULT_BUS_BYTES,
                       max_burst_beats: int = MAX_BURST_BEATS) -> SocHandle:
    if not (1 <= rows <= MAX_DIM and 1 <= cols <= MAX_DIM):
        raise ValueError(f"array dimensions must be 1..{MAX_DIM}")
    ctrl = SystolicController(base=CONTROLLER_BASE)
    array = SystolicArray(ctrl, bus_bytes=bus_bytes)
    weights = Mm2sDma("weights", WEIGHTS_DMA_BASE, bus_bytes, max_burst_beats,
                      stream_out=array.w_in)
    inp = Mm2sDma("input", INPUT_DMA_BASE, bus_bytes, max_burst_beats,
                  stream_out=array.a_in)
    psum = Mm2sDma("psum", PSUM_DMA_BASE, bus_bytes, max_burst_beats,
                   stream_out=array.p_in)
    out = S2mmDma("output", OUTPUT_DMA_BASE, bus_bytes, max_burst_beats,
                  stream_in=array.out)
    dmas = [weights, inp, psum, out]
    return SocHandle(
        name=f"systolic-soc {rows}x{cols}",
        processes=dmas + [array],
        manager_ports=[d.port for d in dmas],
        register_ports=[d.reg_port for d in dmas] + [ctrl.port],
        parts={"array": array, "controller": ctrl,
               "weights": weights, "input": inp, "psum": psum, "output": out},
    )


def build_pipe_soc(bus_bytes: int = DEFAULT_BUS_BYTES,
                   max_burst_beats: int = MAX_BURST_BEATS) -> SocHandle:
    mm2s = Mm2sDma("mm2s", PIPE_MM2S_BASE, bus_bytes, max_burst_beats)
    s2mm = S2mmDma("s2mm", PIPE_S2MM_BASE, bus_bytes, max_burst_beats,
                   stream_in=mm2s.stream_out)
    return SocHandle(
        name="pipe",
        processes=[mm2s, s2mm],
        manager_ports=[mm2s.port, s2mm.port],
        register_ports=[mm2s.reg_port, s2mm.reg_port],
        parts={"mm2s": mm2s, "s2mm": s2mm},
    )
