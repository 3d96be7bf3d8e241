"""fbsim: cycle-accurate hardware/firmware co-simulation.

Firmware written against the fb_* register/memory API drives simulated
accelerator hardware through protocol-faithful AXI4 memory bridges, with
seeded congestion stress-testing and off-chip data-movement profiling.
"""

from .axi import (AddrBeat, ChannelSample, DataBeat, PortTrace,
                  ProtocolViolation, RespBeat, beat_address, check_trace,
                  handshake_fired)
from .bridge import (ArbitrationPolicy, Arbiter, ManagerPort, MemoryBridge,
                     RegisterPort, arbitrate)
from .congestion import ChannelCongestion, CongestionProfile, SplitMix64
from .firmware import FirmwareContext, attach_firmware
from .kernel import (Kernel, KernelConfig, SimOutcome, SimResult,
                     SimulationError)
from .memory import AccessEvent, MemoryImage, WatchRegion
from .profiler import BeatRecord, Profiler
from .scenario import ScenarioConfig, ScenarioRun, run_scenario
from .signals import Channel, Signal
from .vcd import VcdWriter

__version__ = "0.1.0"

__all__ = [
    "AddrBeat", "DataBeat", "RespBeat", "ChannelSample", "PortTrace",
    "ProtocolViolation", "beat_address", "check_trace", "handshake_fired",
    "ArbitrationPolicy", "Arbiter", "arbitrate", "ManagerPort", "MemoryBridge",
    "RegisterPort", "ChannelCongestion", "CongestionProfile", "SplitMix64",
    "FirmwareContext", "attach_firmware", "Kernel", "KernelConfig",
    "SimOutcome", "SimResult", "SimulationError", "AccessEvent", "MemoryImage",
    "WatchRegion", "BeatRecord", "Profiler", "ScenarioConfig", "ScenarioRun",
    "run_scenario", "Channel", "Signal", "VcdWriter",
]
