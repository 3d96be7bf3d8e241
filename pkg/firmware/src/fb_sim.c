/* SIM-mode implementation: delegate every fb_* call to the bound host. */

#include <stdio.h>
#include <stdlib.h>

#include "fb.h"

static fb_host_ops g_ops;
static int g_bound;

void fb_host_bind(const fb_host_ops *ops)
{
    g_ops = *ops;
    g_bound = 1;
}

static void require_bound(const char *what)
{
    if (!g_bound) {
        fprintf(stderr, "fb: %s called outside a bound firmware task\n", what);
        abort();
    }
}

int fb_init(void)
{
    require_bound("fb_init");
    return 0;
}

void fb_exit(int code)
{
    (void)code; /* the entry point's return value carries the status */
}

uint32_t fb_read_32(uint64_t addr)
{
    require_bound("fb_read_32");
    return g_ops.read_32(addr);
}

void fb_write_32(uint64_t addr, uint32_t data)
{
    require_bound("fb_write_32");
    g_ops.write_32(addr, data);
}

void fb_mem_read(uint64_t addr, uint8_t *dst, uint64_t len)
{
    require_bound("fb_mem_read");
    g_ops.mem_read(addr, dst, len);
}

void fb_mem_write(uint64_t addr, const uint8_t *src, uint64_t len)
{
    require_bound("fb_mem_write");
    g_ops.mem_write(addr, src, len);
}

void fb_wait_cycles(uint64_t n)
{
    require_bound("fb_wait_cycles");
    g_ops.wait_cycles(n);
}

uint64_t fb_cycle_count(void)
{
    require_bound("fb_cycle_count");
    return g_ops.cycle_count();
}
