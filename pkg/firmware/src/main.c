/* Entry point: dispatch on the program id in the DDR parameter block. */

#include "drivers.h"
#include "fb_params.h"

int fb_firmware_main(void)
{
    uint8_t raw[FB_PARAM_WORDS * 4];
    uint32_t params[FB_PARAM_WORDS];

    fb_mem_read(FB_PARAM_ADDR, raw, sizeof raw);
    for (unsigned i = 0; i < FB_PARAM_WORDS; i++)
        params[i] = fb_get_u32le(raw + 4 * i);

    if (params[FB_PW_MAGIC] != FB_PARAM_MAGIC)
        return 100;

    switch (params[FB_PW_PROGRAM]) {
    case FB_PROGRAM_MATMUL:
        return fb_run_matmul(params);
    case FB_PROGRAM_HANG:
        return fb_run_hang(params);
    default:
        return 101;
    }
}
