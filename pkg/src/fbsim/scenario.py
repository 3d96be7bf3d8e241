"""Scenario assembly: one config in, one simulated run out.

The config is a JSON document (see README for the schema); everything
random in a run flows from its single top-level seed.
"""

from __future__ import annotations

import importlib
import os
from dataclasses import asdict, dataclass, field
from typing import Any

from .axi import CHANNEL_CLASSES, AddrBeat, DataBeat, ProtocolViolation, RespBeat
from .bridge import ArbitrationPolicy, ManagerPort, MemoryBridge
from .congestion import ChannelCongestion, CongestionProfile
from .duts.soc import SocHandle, build_pipe_soc, build_systolic_soc
from .duts.regfile import register_file_dut
from .firmware import attach_firmware
from .kernel import Kernel, KernelConfig, SimResult
from .memory import MemoryImage, WatchRegion
from .profiler import Profiler
from .programs import PARAM_BLOCK_ADDR, builtin_entry, pack_params
from .vcd import VcdWriter


class ConfigError(Exception):
    pass


@dataclass
class ScenarioConfig:
    dut: dict
    firmware: dict | None = None
    seed: int = 0
    max_cycles: int = 100_000
    watchdog_window: int = 10_000
    strict: bool = True
    congestion: dict | None = None
    arbitration: dict | None = None
    vcd_path: str | None = None
    report_dir: str | None = None
    window_cycles: int = 64
    heatmap_addr_bucket: int = 4096
    heatmap_time_bucket: int = 64
    watch_regions: list = field(default_factory=list)
    mem_images: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config root must be an object")
        unknown = set(doc) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "dut" not in doc:
            raise ConfigError("config needs a 'dut' section")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        if not isinstance(self.dut, dict) or "kind" not in self.dut:
            raise ConfigError("dut section needs a 'kind'")
        if self.max_cycles < 1 or self.watchdog_window < 1:
            raise ConfigError("max_cycles and watchdog_window must be >= 1")
        if self.firmware is not None and "kind" not in self.firmware:
            raise ConfigError("firmware section needs a 'kind'")
        for img in self.mem_images:
            if "path" not in img or "base" not in img:
                raise ConfigError("mem_images entries need 'path' and 'base'")
            if not os.path.exists(img["path"]):
                raise ConfigError(f"memory image not found: {img['path']!r}")
        for region in self.watch_regions:
            for key in ("base", "length", "mode"):
                if key not in region:
                    raise ConfigError(f"watch region needs '{key}'")
        if self.congestion is not None:
            _build_profile(self.congestion)  # raises on bad values
        if self.arbitration is not None:
            kind = self.arbitration.get("kind")
            if kind not in ("round-robin", "fixed-priority"):
                raise ConfigError(f"unknown arbitration kind {kind!r}")


def _build_profile(doc: dict | None) -> CongestionProfile:
    if not doc:
        return CongestionProfile.quiet()
    try:
        stall = doc.get("ready_stall_prob", 0.0)
        delay = doc.get("valid_delay", [0, 0])
        channels = {}
        for i, ch in enumerate(CHANNEL_CLASSES):
            prob = stall[ch] if isinstance(stall, dict) else stall
            dly = delay[ch] if isinstance(delay, dict) else delay
            channels[ch] = ChannelCongestion(float(prob), int(dly[0]), int(dly[1]))
        return CongestionProfile(channels=channels, seed=doc.get("seed"))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad congestion section: {exc}") from exc


def _build_dut(doc: dict) -> SocHandle:
    kind = doc["kind"]
    if kind == "systolic-soc":
        return build_systolic_soc(doc.get("rows", 8), doc.get("cols", 8),
                                  max_burst_beats=doc.get("max_burst_beats", 256))
    if kind == "pipe":
        return build_pipe_soc(max_burst_beats=doc.get("max_burst_beats", 256))
    if kind == "register-file":
        proc, port = register_file_dut(doc.get("n_regs", 8))
        return SocHandle(name="register-file", processes=[proc],
                         register_ports=[port], parts={"regfile": proc})
    if kind == "custom":
        ref = doc.get("factory", "")
        if ":" not in ref:
            raise ConfigError("custom dut needs factory 'module:callable'")
        mod_name, attr = ref.split(":", 1)
        try:
            factory = getattr(importlib.import_module(mod_name), attr)
        except (ImportError, AttributeError) as exc:
            raise ConfigError(f"cannot load dut factory {ref!r}: {exc}") from exc
        handle = factory(**doc.get("args", {}))
        if not isinstance(handle, SocHandle):
            raise ConfigError("custom dut factory must return a SocHandle")
        return handle
    raise ConfigError(f"unknown dut kind {kind!r}")


@dataclass
class ScenarioRun:
    config: ScenarioConfig
    result: SimResult
    memory: MemoryImage
    profiler: Profiler
    bridge: MemoryBridge
    soc: SocHandle
    violations: list[ProtocolViolation]

    def trace_tuples(self) -> list[tuple]:
        out = []
        for name in sorted(self.bridge.traces()):
            out.extend(self.bridge.traces()[name].as_tuples())
        return out


def run_scenario(config: ScenarioConfig) -> ScenarioRun:
    memory = MemoryImage()
    for img in config.mem_images:
        memory.load_image(img["path"], img["base"])
    for region in config.watch_regions:
        memory.add_watch(WatchRegion(region["base"], region["length"],
                                     region["mode"], region.get("label", "")))

    soc = _build_dut(config.dut)
    profiler = Profiler()
    if config.arbitration:
        policy = ArbitrationPolicy(config.arbitration["kind"],
                                   config.arbitration.get("order"))
    else:
        policy = ArbitrationPolicy()
    bridge = MemoryBridge(memory, profiler, policy, seed=config.seed,
                          strict=config.strict)
    profile = _build_profile(config.congestion)
    for port in soc.manager_ports:
        bridge.attach_manager_port(port, profile)
    for reg in soc.register_ports:
        bridge.attach_register_port(reg)

    kernel = Kernel()
    for proc in soc.processes:
        kernel.register_process(proc)
    kernel.register_process(bridge)
    bridge.violation_sink = kernel.halt_protocol

    if config.firmware is not None:
        attach_firmware(kernel, bridge, memory, _build_entry(config, memory))

    writer = None
    if config.vcd_path:
        writer = VcdWriter()
        probes = _build_probes(soc)
        for scope, name, width, _ in probes:
            writer.declare(scope, name, width)
        kernel.add_sampler(lambda t: writer.sample_cycle(
            t, [getter() for _, _, _, getter in probes]))

    result = kernel.run(KernelConfig(max_cycles=config.max_cycles,
                                     watchdog_window=config.watchdog_window,
                                     seed=config.seed))
    bridge.flush_records()

    if writer is not None:
        writer.finalize(config.vcd_path)
    if config.report_dir:
        profiler.export("csv", config.report_dir,
                        window_cycles=config.window_cycles,
                        addr_bucket_bytes=config.heatmap_addr_bucket,
                        time_bucket_cycles=config.heatmap_time_bucket)
        profiler.export("json", os.path.join(config.report_dir, "profile.json"),
                        window_cycles=config.window_cycles,
                        addr_bucket_bytes=config.heatmap_addr_bucket,
                        time_bucket_cycles=config.heatmap_time_bucket)
        _write_run_summary(config, result, memory, bridge)

    return ScenarioRun(config=config, result=result, memory=memory,
                       profiler=profiler, bridge=bridge, soc=soc,
                       violations=bridge.violations())


def _write_run_summary(config, result, memory, bridge) -> None:
    import json as _json
    doc = {
        "outcome": result.outcome.value,
        "final_cycle": result.final_cycle,
        "firmware_exit": result.firmware_exit,
        "diagnostics": result.diagnostics,
        "decode_errors": bridge.decode_errors,
        "violations": [str(v) for v in bridge.violations()],
        "watch_events": [
            {"cycle": e.cycle, "origin": e.origin, "kind": e.kind,
             "addr": e.addr, "length": e.length}
            for e in memory.take_access_log()
        ],
    }
    with open(os.path.join(config.report_dir, "run.json"), "w") as fh:
        _json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _build_entry(config: ScenarioConfig, memory: MemoryImage):
    fw = config.firmware
    kind = fw["kind"]
    params = dict(fw.get("params", {}))
    if kind == "builtin":
        try:
            return builtin_entry(fw["name"], params)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "cshim":
        from .cshim import CShimFirmware
        program = fw.get("program", "matmul")
        if "path" not in fw or not os.path.exists(fw["path"]):
            raise ConfigError(f"cshim library not found: {fw.get('path')!r}")
        memory.write_bytes(PARAM_BLOCK_ADDR, pack_params(program, params))
        return CShimFirmware(fw["path"]).make_entry()
    raise ConfigError(f"unknown firmware kind {kind!r}")


def _payload_field(ch, extract, width):
    mask = (1 << width) - 1

    def getter():
        p = ch.payload.value
        return extract(p) & mask if p is not None else 0
    return getter


def _build_probes(soc: SocHandle) -> list[tuple[str, str, int, Any]]:
    probes: list[tuple[str, str, int, Any]] = []
    for port in soc.manager_ports:
        for chname, ch in port.channels.items():
            scope = f"{port.name}.{chname}"
            probes.append((scope, "valid", 1, lambda c=ch: c.valid.value))
            probes.append((scope, "ready", 1, lambda c=ch: c.ready.value))
            if chname in ("AR", "AW"):
                probes.append((scope, "addr", 64, _payload_field(
                    ch, lambda p: p.addr if isinstance(p, AddrBeat) else 0, 64)))
                probes.append((scope, "len", 8, _payload_field(
                    ch, lambda p: p.len_m1 if isinstance(p, AddrBeat) else 0, 8)))
            elif chname in ("R", "W"):
                probes.append((scope, "data_lo", 64, _payload_field(
                    ch, lambda p: int.from_bytes(p.data[:8], "little")
                    if isinstance(p, DataBeat) else 0, 64)))
                probes.append((scope, "last", 1, _payload_field(
                    ch, lambda p: int(p.last) if isinstance(p, DataBeat) else 0, 1)))
            else:
                probes.append((scope, "resp", 2, _payload_field(
                    ch, lambda p: int(p.resp) if isinstance(p, RespBeat) else 0, 2)))
    for proc in soc.processes:
        hook = getattr(proc, "debug_probes", None)
        if hook is not None:
            for name, width, getter in hook():
                probes.append((proc.name, name, width, getter))
    return probes
