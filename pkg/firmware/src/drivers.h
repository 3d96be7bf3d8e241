/* Internal helpers shared by the example drivers. Bare-metal style: no
 * libc so the TARGET build stays self-contained. */

#ifndef DRIVERS_H
#define DRIVERS_H

#include <stdint.h>

#include "fb.h"
#include "fb_soc.h"

int fb_run_matmul(const uint32_t *params);
int fb_run_hang(const uint32_t *params);
int fb_run_pingpong(const uint32_t *params);

/* SplitMix64, bit-compatible with the host-side operand generator. */
typedef struct { uint64_t state; } fb_rng;

static inline void fb_rng_seed(fb_rng *rng, uint64_t seed)
{
    rng->state = seed;
}

static inline uint64_t fb_rng_next(fb_rng *rng)
{
    rng->state += 0x9E3779B97F4A7C15ull;
    uint64_t z = rng->state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

static inline void fb_put_u32le(uint8_t *dst, uint32_t v)
{
    dst[0] = (uint8_t)(v & 0xFF);
    dst[1] = (uint8_t)((v >> 8) & 0xFF);
    dst[2] = (uint8_t)((v >> 16) & 0xFF);
    dst[3] = (uint8_t)((v >> 24) & 0xFF);
}

static inline uint32_t fb_get_u32le(const uint8_t *src)
{
    return (uint32_t)src[0] | ((uint32_t)src[1] << 8)
        | ((uint32_t)src[2] << 16) | ((uint32_t)src[3] << 24);
}

static inline void fb_dma_program(uint64_t base, uint64_t addr, uint32_t nbytes)
{
    fb_write_32(base + FB_REG_ADDR_LO, (uint32_t)(addr & 0xFFFFFFFFull));
    fb_write_32(base + FB_REG_ADDR_HI, (uint32_t)(addr >> 32));
    fb_write_32(base + FB_REG_LEN, nbytes);
    fb_write_32(base + FB_REG_CTRL, FB_CTRL_START);
}

/* Returns 0 on DONE (and clears it), -1 on ERR. */
static inline int fb_dma_poll_done(uint64_t base)
{
    for (;;) {
        uint32_t status = fb_read_32(base + FB_REG_STATUS);
        if (status & FB_STATUS_ERR)
            return -1;
        if (status & FB_STATUS_DONE) {
            fb_write_32(base + FB_REG_STATUS, FB_STATUS_DONE);
            return 0;
        }
    }
}

#endif /* DRIVERS_H */
