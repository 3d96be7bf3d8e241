/*
 * Parameter block handed to the firmware through DDR, packed by the host
 * as 32 little-endian u32 words at FB_PARAM_ADDR. Layout mirrors
 * fbsim.programs.pack_params.
 */

#ifndef FB_PARAMS_H
#define FB_PARAMS_H

#include <stdint.h>

#define FB_PARAM_ADDR  0x70000ull
#define FB_PARAM_MAGIC 0x46425731u
#define FB_PARAM_WORDS 32u

#define FB_PW_MAGIC        0
#define FB_PW_PROGRAM      1
#define FB_PW_SEED_LO      2
#define FB_PW_SEED_HI      3
#define FB_PW_M            4
#define FB_PW_R            5
#define FB_PW_C            6
#define FB_PW_WEIGHTS_BASE 8  /* u64, two words */
#define FB_PW_INPUT_BASE   10
#define FB_PW_PSUM_BASE    12
#define FB_PW_OUTPUT_BASE  14
#define FB_PW_SRC_BASE     16
#define FB_PW_BUF_A        18
#define FB_PW_BUF_B        20
#define FB_PW_XFER_BYTES   22
#define FB_PW_ITERS        23
#define FB_PW_PERIOD       24
#define FB_PW_EXPECT_BYTES 25
#define FB_PW_SETTLE       26

#define FB_PROGRAM_MATMUL   1u
#define FB_PROGRAM_HANG     2u
#define FB_PROGRAM_PINGPONG 3u

static inline uint64_t fb_param_u64(const uint32_t *params, unsigned word)
{
    return (uint64_t)params[word] | ((uint64_t)params[word + 1] << 32);
}

#endif /* FB_PARAMS_H */
