/*
 * Recreates the classic DMA integration bug on the pipe SoC: the S2MM
 * engine is programmed for more data than the stream will deliver, so
 * its final write burst can never complete. The driver parks in one long
 * timeout wait; the simulation watchdog flags the hang.
 */

#include "drivers.h"
#include "fb_params.h"

int fb_run_hang(const uint32_t *params)
{
    uint32_t deliver = params[FB_PW_XFER_BYTES];
    uint32_t expect = params[FB_PW_EXPECT_BYTES];
    uint32_t settle = params[FB_PW_SETTLE];
    uint64_t src = fb_param_u64(params, FB_PW_SRC_BASE);
    uint64_t dst = fb_param_u64(params, FB_PW_BUF_A);

    uint8_t chunk[64];
    uint32_t left = deliver;
    uint64_t addr = src;
    uint32_t i = 0;
    while (left) {
        uint32_t n = left < sizeof chunk ? left : (uint32_t)sizeof chunk;
        for (uint32_t j = 0; j < n; j++, i++)
            chunk[j] = (uint8_t)((i * 7 + 1) & 0xFF);
        fb_mem_write(addr, chunk, n);
        addr += n;
        left -= n;
    }

    fb_dma_program(FB_PIPE_S2MM, dst, expect);
    fb_dma_program(FB_PIPE_MM2S, src, deliver);
    fb_wait_cycles(settle);
    uint32_t status = fb_read_32(FB_PIPE_S2MM + FB_REG_STATUS);
    return (status & FB_STATUS_DONE) ? 0 : 2;
}
