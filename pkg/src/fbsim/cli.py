"""Batch entry point.

    fbsim run --config scenario.json [--seed N] [--max-cycles N]
              [--vcd out.vcd] [--report-dir reports/]
    fbsim list-duts [--json]

Exit codes: 0 firmware done and self-check passed, 1 verification
mismatch, 2 hang, 3 protocol violation, 4 config/usage error,
5 max-cycles reached without completion.
"""

from __future__ import annotations

import argparse
import json
import sys

from .duts.dma import DMA_REG_WINDOW
from .duts.soc import (CONTROLLER_BASE, INPUT_DMA_BASE, OUTPUT_DMA_BASE,
                       PIPE_MM2S_BASE, PIPE_S2MM_BASE, PSUM_DMA_BASE,
                       WEIGHTS_DMA_BASE)
from .kernel import SimOutcome
from .scenario import ConfigError, ScenarioConfig, run_scenario

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_HANG = 2
EXIT_PROTOCOL = 3
EXIT_CONFIG = 4
EXIT_MAX_CYCLES = 5

_DUT_CATALOG = {
    "register-file": {
        "description": "scratch 32-bit register file (smoke tests)",
        "registers": {"0x0000": "scratch words, n_regs x 4 bytes"},
    },
    "pipe": {
        "description": "MM2S and S2MM DMAs with their streams looped back",
        "registers": {
            f"0x{PIPE_MM2S_BASE:04X}": f"mm2s DMA ({DMA_REG_WINDOW} bytes)",
            f"0x{PIPE_S2MM_BASE:04X}": f"s2mm DMA ({DMA_REG_WINDOW} bytes)",
        },
    },
    "systolic-soc": {
        "description": "RxC int8 systolic array, four AXI4 DMAs, controller",
        "registers": {
            f"0x{WEIGHTS_DMA_BASE:04X}": "weights MM2S DMA",
            f"0x{INPUT_DMA_BASE:04X}": "input MM2S DMA",
            f"0x{PSUM_DMA_BASE:04X}": "psum MM2S DMA",
            f"0x{OUTPUT_DMA_BASE:04X}": "output S2MM DMA",
            f"0x{CONTROLLER_BASE:04X}": "controller (GO, DIMS_R_C, DIMS_M, STATUS)",
        },
    },
}

_DMA_WORDS = ("CTRL +0x00 (bit0 START)", "STATUS +0x04 (BUSY/DONE/ERR)",
              "ADDR_LO +0x08", "ADDR_HI +0x0C", "LEN_BYTES +0x10")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fbsim", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="execute one scenario")
    run_p.add_argument("--config", required=True, help="scenario JSON file")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--max-cycles", type=int, default=None)
    run_p.add_argument("--vcd", default=None, help="waveform output path")
    run_p.add_argument("--report-dir", default=None, help="CSV/JSON report directory")

    list_p = sub.add_parser("list-duts", help="show reference DUTs and register maps")
    list_p.add_argument("--json", action="store_true", dest="as_json")
    return parser


def _cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config {args.config!r}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.max_cycles is not None:
            doc["max_cycles"] = args.max_cycles
        if args.vcd is not None:
            doc["vcd_path"] = args.vcd
        if args.report_dir is not None:
            doc["report_dir"] = args.report_dir
        config = ScenarioConfig.from_dict(doc)
        run = run_scenario(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    result = run.result
    print(f"outcome: {result.outcome.value} at cycle {result.final_cycle}")
    if result.firmware_exit is not None:
        print(f"firmware exit: {result.firmware_exit}")
    for line in result.diagnostics:
        print(f"  {line}", file=sys.stderr)
    for err in run.bridge.decode_errors:
        print(f"  {err}", file=sys.stderr)

    if result.outcome is SimOutcome.HANG:
        return EXIT_HANG
    if result.outcome is SimOutcome.PROTOCOL_VIOLATION:
        return EXIT_PROTOCOL
    if result.outcome is SimOutcome.MAX_CYCLES:
        return EXIT_MAX_CYCLES
    if run.violations:
        for v in run.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_PROTOCOL
    if result.firmware_exit not in (0, None):
        return EXIT_VERIFY
    return EXIT_OK


def _cmd_list_duts(args) -> int:
    if args.as_json:
        doc = dict(_DUT_CATALOG)
        doc["dma-register-words"] = list(_DMA_WORDS)
        print(json.dumps(doc, indent=2, sort_keys=True))
        return EXIT_OK
    for name, info in _DUT_CATALOG.items():
        print(f"{name}: {info['description']}")
        for base, what in info["registers"].items():
            print(f"  {base}  {what}")
    print("DMA register words: " + "; ".join(_DMA_WORDS))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list-duts":
        return _cmd_list_duts(args)
    parser.print_usage(sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
