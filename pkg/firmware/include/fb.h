/*
 * Firmware bridge API: one firmware source, two builds.
 *
 * Build with -DFB_SIM to link the firmware into the simulation framework
 * across the foreign-function boundary (fb_sim.c provides the symbols and
 * the host binds its callbacks via fb_host_bind).
 *
 * Build with -DFB_TARGET for deployment: every wrapper reduces to a
 * direct volatile memory-mapped access and compiles away -- the object
 * file references no framework symbols. fb_wait_cycles/fb_cycle_count
 * are platform-timer hooks left as no-ops here; boards wire them to a
 * cycle counter in their port layer.
 *
 * Call signatures are identical in both modes. Only scalars and
 * (address, length) pairs cross the boundary.
 */

#ifndef FB_H
#define FB_H

#include <stdint.h>

#if !defined(FB_SIM) && !defined(FB_TARGET)
#error "define FB_SIM or FB_TARGET"
#endif

#ifdef __cplusplus
extern "C" {
#endif

#ifdef FB_SIM

typedef struct {
    uint32_t (*read_32)(uint64_t addr);
    void (*write_32)(uint64_t addr, uint32_t data);
    void (*mem_read)(uint64_t addr, uint8_t *dst, uint64_t len);
    void (*mem_write)(uint64_t addr, const uint8_t *src, uint64_t len);
    void (*wait_cycles)(uint64_t n);
    uint64_t (*cycle_count)(void);
} fb_host_ops;

void fb_host_bind(const fb_host_ops *ops);

int fb_init(void);
void fb_exit(int code);
uint32_t fb_read_32(uint64_t addr);
void fb_write_32(uint64_t addr, uint32_t data);
void fb_mem_read(uint64_t addr, uint8_t *dst, uint64_t len);
void fb_mem_write(uint64_t addr, const uint8_t *src, uint64_t len);
void fb_wait_cycles(uint64_t n);
uint64_t fb_cycle_count(void);

#else /* FB_TARGET */

static inline int fb_init(void) { return 0; }
static inline void fb_exit(int code) { (void)code; }

static inline uint32_t fb_read_32(uint64_t addr)
{
    return *(volatile uint32_t *)(uintptr_t)addr;
}

static inline void fb_write_32(uint64_t addr, uint32_t data)
{
    *(volatile uint32_t *)(uintptr_t)addr = data;
}

static inline void fb_mem_read(uint64_t addr, uint8_t *dst, uint64_t len)
{
    const volatile uint8_t *src = (const volatile uint8_t *)(uintptr_t)addr;
    for (uint64_t i = 0; i < len; i++)
        dst[i] = src[i];
}

static inline void fb_mem_write(uint64_t addr, const uint8_t *src, uint64_t len)
{
    volatile uint8_t *dst = (volatile uint8_t *)(uintptr_t)addr;
    for (uint64_t i = 0; i < len; i++)
        dst[i] = src[i];
}

static inline void fb_wait_cycles(uint64_t n) { (void)n; }
static inline uint64_t fb_cycle_count(void) { return 0; }

#endif /* FB_SIM / FB_TARGET */

/* Provided by the firmware application; entry point in both modes. */
int fb_firmware_main(void);

#ifdef __cplusplus
}
#endif

#endif /* FB_H */
