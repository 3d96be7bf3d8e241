/*
 * Matrix-multiply driver for the systolic SoC.
 *
 * Generates int8 operands and int32 partial sums from the seeded stream,
 * stages them in DDR, configures all four DMAs and the controller, polls
 * for completion and verifies the result against its own reference loop.
 * The operation sequence matches the native Python driver exactly so the
 * two produce interchangeable bus traces.
 */

#include "drivers.h"
#include "fb_params.h"

#define MAX_DIM 16
#define MAX_BPR 4 /* ceil(16/4) int32 lanes per bus beat */

static int8_t g_a[MAX_DIM][MAX_DIM];
static int8_t g_w[MAX_DIM][MAX_DIM];
static uint32_t g_p[MAX_DIM][MAX_DIM];

int fb_run_matmul(const uint32_t *params)
{
    uint32_t m = params[FB_PW_M];
    uint32_t r = params[FB_PW_R];
    uint32_t c = params[FB_PW_C];
    uint64_t seed = fb_param_u64(params, FB_PW_SEED_LO);
    uint64_t weights_base = fb_param_u64(params, FB_PW_WEIGHTS_BASE);
    uint64_t input_base = fb_param_u64(params, FB_PW_INPUT_BASE);
    uint64_t psum_base = fb_param_u64(params, FB_PW_PSUM_BASE);
    uint64_t output_base = fb_param_u64(params, FB_PW_OUTPUT_BASE);
    uint32_t bpr = (c + 3) / 4;

    if (m > MAX_DIM || r > MAX_DIM || c > MAX_DIM || !m || !r || !c)
        return 100;

    fb_rng rng;
    fb_rng_seed(&rng, seed);
    for (uint32_t i = 0; i < m; i++)
        for (uint32_t k = 0; k < r; k++)
            g_a[i][k] = (int8_t)(fb_rng_next(&rng) & 0xFF);
    for (uint32_t k = 0; k < r; k++)
        for (uint32_t j = 0; j < c; j++)
            g_w[k][j] = (int8_t)(fb_rng_next(&rng) & 0xFF);
    for (uint32_t i = 0; i < m; i++)
        for (uint32_t j = 0; j < c; j++)
            g_p[i][j] = (uint32_t)(fb_rng_next(&rng) & 0xFFFFFFFFull);

    uint8_t beat[FB_BUS_BYTES];
    for (uint32_t k = 0; k < r; k++) {
        for (uint32_t j = 0; j < FB_BUS_BYTES; j++)
            beat[j] = j < c ? (uint8_t)g_w[k][j] : 0;
        fb_mem_write(weights_base + FB_BUS_BYTES * k, beat, FB_BUS_BYTES);
    }
    for (uint32_t i = 0; i < m; i++) {
        for (uint32_t j = 0; j < FB_BUS_BYTES; j++)
            beat[j] = j < r ? (uint8_t)g_a[i][j] : 0;
        fb_mem_write(input_base + FB_BUS_BYTES * i, beat, FB_BUS_BYTES);
    }
    uint8_t row[MAX_BPR * FB_BUS_BYTES];
    for (uint32_t i = 0; i < m; i++) {
        for (uint32_t lane = 0; lane < 4 * bpr; lane++)
            fb_put_u32le(row + 4 * lane, lane < c ? g_p[i][lane] : 0);
        fb_mem_write(psum_base + (uint64_t)FB_BUS_BYTES * bpr * i,
                     row, FB_BUS_BYTES * bpr);
    }

    fb_write_32(FB_CONTROLLER + FB_CTRL_DIMS_R_C, (r << 8) | c);
    fb_write_32(FB_CONTROLLER + FB_CTRL_DIMS_M, m);
    fb_write_32(FB_CONTROLLER + FB_CTRL_GO, 1);

    fb_dma_program(FB_OUTPUT_DMA, output_base, m * bpr * FB_BUS_BYTES);
    fb_dma_program(FB_WEIGHTS_DMA, weights_base, r * FB_BUS_BYTES);
    fb_dma_program(FB_INPUT_DMA, input_base, m * FB_BUS_BYTES);
    fb_dma_program(FB_PSUM_DMA, psum_base, m * bpr * FB_BUS_BYTES);

    if (fb_dma_poll_done(FB_WEIGHTS_DMA))
        return -1;
    if (fb_dma_poll_done(FB_INPUT_DMA))
        return -1;
    if (fb_dma_poll_done(FB_PSUM_DMA))
        return -1;
    if (fb_dma_poll_done(FB_OUTPUT_DMA))
        return -1;

    for (uint32_t i = 0; i < m; i++) {
        fb_mem_read(output_base + (uint64_t)FB_BUS_BYTES * bpr * i,
                    row, FB_BUS_BYTES * bpr);
        for (uint32_t lane = 0; lane < 4 * bpr; lane++) {
            uint32_t expect = 0;
            if (lane < c) {
                int64_t acc = (int64_t)g_p[i][lane];
                for (uint32_t k = 0; k < r; k++)
                    acc += (int64_t)g_a[i][k] * (int64_t)g_w[k][lane];
                expect = (uint32_t)((uint64_t)acc & 0xFFFFFFFFull);
            }
            if (fb_get_u32le(row + 4 * lane) != expect)
                return 1;
        }
    }
    return 0;
}
