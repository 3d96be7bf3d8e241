"""Built-in firmware drivers.

These are written the way the target firmware would be: program the DMA
register files, kick the engines, poll for completion, then post-process
DDR. The C versions under firmware/ follow the same operation sequences
word for word so their bus traces are interchangeable with these.
"""

from __future__ import annotations

from .congestion import SplitMix64
from .duts.dma import STATUS_DONE, STATUS_ERR
from .duts.soc import (CONTROLLER_BASE, INPUT_DMA_BASE, OUTPUT_DMA_BASE,
                       PIPE_MM2S_BASE, PIPE_S2MM_BASE, PSUM_DMA_BASE,
                       WEIGHTS_DMA_BASE)
from .firmware import FirmwareContext

# DMA register byte offsets (the documented map, mirrored in firmware/fb_soc.h)
REG_CTRL = 0x00
REG_STATUS = 0x04
REG_ADDR_LO = 0x08
REG_ADDR_HI = 0x0C
REG_LEN = 0x10

CTRL_GO = 0x00
CTRL_DIMS_R_C = 0x04
CTRL_DIMS_M = 0x08

BUS_BYTES = 16

DEFAULT_WEIGHTS_BASE = 0x0001_0000
DEFAULT_INPUT_BASE = 0x0002_0000
DEFAULT_PSUM_BASE = 0x0003_0000
DEFAULT_OUTPUT_BASE = 0x0004_0000
DEFAULT_SRC_BASE = 0x0005_0000
DEFAULT_BUF_A = 0x0006_0000
DEFAULT_BUF_B = 0x0006_8000

PARAM_BLOCK_ADDR = 0x0007_0000
PARAM_MAGIC = 0x46425731
PARAM_WORDS = 32
PROGRAM_IDS = {"matmul": 1, "hang": 2, "pingpong": 3}


def _int8(b: int) -> int:
    return b - 256 if b >= 128 else b


def gen_matrices(m: int, r: int, c: int, seed: int):
    """Deterministic int8/int32 operands; the C driver replays the same
    SplitMix64 stream in the same order."""
    rng = SplitMix64(seed)
    a = [[_int8(rng.next_u64() & 0xFF) for _ in range(r)] for _ in range(m)]
    w = [[_int8(rng.next_u64() & 0xFF) for _ in range(c)] for _ in range(r)]
    p = [[rng.next_u64() & 0xFFFFFFFF for _ in range(c)] for _ in range(m)]
    return a, w, p


def beats_per_row(c: int) -> int:
    return (c + 3) // 4


def pack_row_i8(values: list[int]) -> bytes:
    data = bytes(v & 0xFF for v in values)
    return data + bytes(BUS_BYTES - len(data))


def pack_row_u32(values: list[int], lanes: int) -> bytes:
    padded = values + [0] * (lanes - len(values))
    return b"".join((v & 0xFFFFFFFF).to_bytes(4, "little") for v in padded)


def _program_dma(ctx: FirmwareContext, base: int, addr: int, nbytes: int) -> None:
    ctx.write_32(base + REG_ADDR_LO, addr & 0xFFFFFFFF)
    ctx.write_32(base + REG_ADDR_HI, addr >> 32)
    ctx.write_32(base + REG_LEN, nbytes)
    ctx.write_32(base + REG_CTRL, 1)


def _poll_done(ctx: FirmwareContext, base: int) -> int:
    while True:
        status = ctx.read_32(base + REG_STATUS)
        if status & STATUS_ERR:
            return -1
        if status & STATUS_DONE:
            ctx.write_32(base + REG_STATUS, STATUS_DONE)
            return 0


def matmul_driver(ctx: FirmwareContext, m: int = 8, r: int = 8, c: int = 8,
                  data_seed: int = 1,
                  weights_base: int = DEFAULT_WEIGHTS_BASE,
                  input_base: int = DEFAULT_INPUT_BASE,
                  psum_base: int = DEFAULT_PSUM_BASE,
                  output_base: int = DEFAULT_OUTPUT_BASE) -> int:
    """Full matrix-multiply run with an in-firmware reference check.

    Returns 0 on success, 1 on output mismatch, -1 on DMA error.
    """
    a, w, p = gen_matrices(m, r, c, data_seed)
    bpr = beats_per_row(c)

    for i in range(r):
        ctx.mem_write(weights_base + BUS_BYTES * i, pack_row_i8(w[i]))
    for i in range(m):
        ctx.mem_write(input_base + BUS_BYTES * i, pack_row_i8(a[i]))
    for i in range(m):
        ctx.mem_write(psum_base + BUS_BYTES * bpr * i, pack_row_u32(p[i], 4 * bpr))

    ctx.write_32(CONTROLLER_BASE + CTRL_DIMS_R_C, (r << 8) | c)
    ctx.write_32(CONTROLLER_BASE + CTRL_DIMS_M, m)
    ctx.write_32(CONTROLLER_BASE + CTRL_GO, 1)

    _program_dma(ctx, OUTPUT_DMA_BASE, output_base, m * bpr * BUS_BYTES)
    _program_dma(ctx, WEIGHTS_DMA_BASE, weights_base, r * BUS_BYTES)
    _program_dma(ctx, INPUT_DMA_BASE, input_base, m * BUS_BYTES)
    _program_dma(ctx, PSUM_DMA_BASE, psum_base, m * bpr * BUS_BYTES)

    for base in (WEIGHTS_DMA_BASE, INPUT_DMA_BASE, PSUM_DMA_BASE, OUTPUT_DMA_BASE):
        if _poll_done(ctx, base):
            return -1

    got = ctx.mem_read(output_base, m * bpr * BUS_BYTES)
    for i in range(m):
        expect = [0] * (4 * bpr)
        for j in range(c):
            acc = p[i][j]
            for k in range(r):
                acc += a[i][k] * w[k][j]
            expect[j] = acc & 0xFFFFFFFF
        row = got[BUS_BYTES * bpr * i:BUS_BYTES * bpr * (i + 1)]
        for j in range(4 * bpr):
            if int.from_bytes(row[4 * j:4 * j + 4], "little") != expect[j]:
                return 1
    return 0


def hang_reproducer(ctx: FirmwareContext, deliver_bytes: int = 48,
                    expect_bytes: int = 64,
                    src_base: int = DEFAULT_SRC_BASE,
                    dst_base: int = DEFAULT_BUF_A,
                    settle_cycles: int = 40_000) -> int:
    """Misprograms the S2MM transfer length on the pipe SoC.

    The stream under-delivers, the write burst can never finish, and the
    kernel's watchdog flags the run while the firmware sits in one long
    wait (a driver timeout, in effect).
    """
    ctx.mem_write(src_base, bytes((i * 7 + 1) & 0xFF for i in range(deliver_bytes)))
    _program_dma(ctx, PIPE_S2MM_BASE, dst_base, expect_bytes)
    _program_dma(ctx, PIPE_MM2S_BASE, src_base, deliver_bytes)
    ctx.wait_cycles(settle_cycles)
    status = ctx.read_32(PIPE_S2MM_BASE + REG_STATUS)
    return 0 if status & STATUS_DONE else 2


def ping_pong_driver(ctx: FirmwareContext, iters: int = 8,
                     xfer_bytes: int = 64, period: int = 256,
                     src_base: int = DEFAULT_SRC_BASE,
                     buf_a: int = DEFAULT_BUF_A,
                     buf_b: int = DEFAULT_BUF_B) -> int:
    """Alternates S2MM destination buffers on a fixed cadence, the classic
    double-buffer pattern."""
    ctx.mem_write(src_base, bytes((i * 13 + 5) & 0xFF for i in range(xfer_bytes)))
    now = ctx.cycle_count()
    ctx.wait_cycles(period - now % period)  # align to a period boundary
    start = ctx.cycle_count()
    for k in range(iters):
        dst = buf_a if k % 2 == 0 else buf_b
        _program_dma(ctx, PIPE_S2MM_BASE, dst, xfer_bytes)
        _program_dma(ctx, PIPE_MM2S_BASE, src_base, xfer_bytes)
        if _poll_done(ctx, PIPE_MM2S_BASE) or _poll_done(ctx, PIPE_S2MM_BASE):
            return -1
        pad = start + (k + 1) * period - ctx.cycle_count()
        if pad < 0:
            return 3  # period too small for one transfer
        ctx.wait_cycles(pad)
    return 0


def regfile_smoke(ctx: FirmwareContext, n_regs: int = 8, base: int = 0x0) -> int:
    for i in range(n_regs):
        ctx.write_32(base + 4 * i, (0xA5A5_0000 + i) & 0xFFFFFFFF)
    for i in range(n_regs):
        if ctx.read_32(base + 4 * i) != (0xA5A5_0000 + i) & 0xFFFFFFFF:
            return 1
    if ctx.read_32(0xFFFF_0000) != 0xDEADDEAD:
        return 2
    return 0


# -- C-shim parameter block ------------------------------------------------
# Word layout shared with firmware/include/fb_params.h; everything the C
# drivers need is passed through DDR so only scalars cross the boundary.

def pack_params(program: str, params: dict) -> bytes:
    words = [0] * PARAM_WORDS
    words[0] = PARAM_MAGIC
    words[1] = PROGRAM_IDS[program]
    seed = params.get("data_seed", 1)
    words[2] = seed & 0xFFFFFFFF
    words[3] = (seed >> 32) & 0xFFFFFFFF
    words[4] = params.get("m", 8)
    words[5] = params.get("r", 8)
    words[6] = params.get("c", 8)

    def put64(idx: int, value: int) -> None:
        words[idx] = value & 0xFFFFFFFF
        words[idx + 1] = (value >> 32) & 0xFFFFFFFF

    put64(8, params.get("weights_base", DEFAULT_WEIGHTS_BASE))
    put64(10, params.get("input_base", DEFAULT_INPUT_BASE))
    put64(12, params.get("psum_base", DEFAULT_PSUM_BASE))
    put64(14, params.get("output_base", DEFAULT_OUTPUT_BASE))
    put64(16, params.get("src_base", DEFAULT_SRC_BASE))
    put64(18, params.get("buf_a", params.get("dst_base", DEFAULT_BUF_A)))
    put64(20, params.get("buf_b", DEFAULT_BUF_B))
    words[22] = params.get("xfer_bytes", params.get("deliver_bytes", 64))
    words[23] = params.get("iters", 8)
    words[24] = params.get("period", 256)
    words[25] = params.get("expect_bytes", 64)
    words[26] = params.get("settle_cycles", 40_000)
    return b"".join(w.to_bytes(4, "little") for w in words)


BUILTIN_PROGRAMS = {
    "matmul": matmul_driver,
    "hang": hang_reproducer,
    "pingpong": ping_pong_driver,
    "regfile-smoke": regfile_smoke,
}


def builtin_entry(name: str, params: dict):
    if name not in BUILTIN_PROGRAMS:
        raise KeyError(f"unknown builtin firmware {name!r}")
    fn = BUILTIN_PROGRAMS[name]
    return lambda ctx: fn(ctx, **params)
