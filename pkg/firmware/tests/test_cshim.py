"""C-shim acceptance: build both modes, prove trace equivalence.

Run from the repository root with `pytest firmware/tests` after the
primary package is installed.
"""

import shutil
import subprocess
from pathlib import Path

import pytest

from fbsim.kernel import SimOutcome
from fbsim.programs import DEFAULT_OUTPUT_BASE, beats_per_row
from fbsim.scenario import ScenarioConfig, run_scenario

FIRMWARE_DIR = Path(__file__).resolve().parents[1]
LIB = FIRMWARE_DIR / "build" / "libfbfw.so"


@pytest.fixture(scope="module")
def built_lib():
    if shutil.which("cc") is None or shutil.which("make") is None:
        pytest.skip("no C toolchain available")
    subprocess.run(["make", "-C", str(FIRMWARE_DIR)], check=True,
                   capture_output=True)
    assert LIB.exists()
    return str(LIB)


def matmul_doc(firmware, seed):
    return {
        "dut": {"kind": "systolic-soc", "rows": 8, "cols": 8},
        "firmware": firmware,
        "seed": seed,
        "max_cycles": 200_000,
    }


def run_pair(built_lib, seed, congestion=None):
    params = {"m": 8, "r": 8, "c": 8, "data_seed": 5}
    native_doc = matmul_doc(
        {"kind": "builtin", "name": "matmul", "params": params}, seed)
    cshim_doc = matmul_doc(
        {"kind": "cshim", "path": built_lib, "program": "matmul",
         "params": params}, seed)
    if congestion:
        native_doc["congestion"] = congestion
        cshim_doc["congestion"] = congestion
    native = run_scenario(ScenarioConfig.from_dict(native_doc))
    cshim = run_scenario(ScenarioConfig.from_dict(cshim_doc))
    return native, cshim


def test_criterion_9_trace_and_ddr_equivalence(built_lib):
    native, cshim = run_pair(built_lib, seed=3)
    assert native.result.outcome is SimOutcome.FIRMWARE_DONE
    assert cshim.result.outcome is SimOutcome.FIRMWARE_DONE
    assert native.result.firmware_exit == 0
    assert cshim.result.firmware_exit == 0
    assert native.trace_tuples() == cshim.trace_tuples()
    span = 8 * beats_per_row(8) * 16
    assert (native.memory.read_bytes(DEFAULT_OUTPUT_BASE, span)
            == cshim.memory.read_bytes(DEFAULT_OUTPUT_BASE, span))
    print("ACCEPTANCE 9 PASS: C and native matmul drivers produce identical "
          "channel traces and DDR contents")


def test_equivalence_holds_under_congestion(built_lib):
    congestion = {"ready_stall_prob": 0.5, "valid_delay": [0, 7], "seed": 11}
    native, cshim = run_pair(built_lib, seed=4, congestion=congestion)
    assert native.result.firmware_exit == 0
    assert cshim.result.firmware_exit == 0
    assert native.trace_tuples() == cshim.trace_tuples()


def test_target_mode_compiles_without_framework_symbols(built_lib):
    result = subprocess.run(["make", "-C", str(FIRMWARE_DIR), "target-check"],
                            capture_output=True, text=True)
    assert result.returncode == 0, result.stdout + result.stderr
    assert "no framework symbols referenced" in result.stdout
    combined = FIRMWARE_DIR / "build" / "firmware_target.o"
    nm = subprocess.run(["nm", "-u", str(combined)], capture_output=True,
                        text=True, check=True)
    for sym in ("fb_read_32", "fb_write_32", "fb_mem_read", "fb_mem_write",
                "fb_wait_cycles", "fb_cycle_count", "fb_host_bind"):
        assert sym not in nm.stdout.split()


def test_c_hang_reproducer_flags_stuck_channel(built_lib):
    doc = {
        "dut": {"kind": "pipe"},
        "firmware": {"kind": "cshim", "path": built_lib, "program": "hang",
                     "params": {"deliver_bytes": 48, "expect_bytes": 64,
                                "settle_cycles": 40_000}},
        "max_cycles": 50_000,
        "watchdog_window": 2_000,
    }
    run = run_scenario(ScenarioConfig.from_dict(doc))
    assert run.result.outcome is SimOutcome.HANG
    assert any("s2mm" in d and "W channel" in d for d in run.result.diagnostics)


def test_c_scratch_register_roundtrip(built_lib):
    # fb_read_32 of a register written from C equals the written value:
    # exercised inside the matmul driver (it reads back DMA registers and
    # self-checks), so a complete run with exit 0 covers the round trip.
    native, cshim = run_pair(built_lib, seed=9)
    assert cshim.result.firmware_exit == 0
