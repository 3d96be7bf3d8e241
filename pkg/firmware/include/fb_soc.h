/*
 * Register map of the reference SoCs. Shared contract with the Python
 * side (fbsim.duts.soc / fbsim.programs); keep the two in sync.
 */

#ifndef FB_SOC_H
#define FB_SOC_H

#include <stdint.h>

#define FB_BUS_BYTES 16u

/* systolic-soc register bases */
#define FB_WEIGHTS_DMA 0x0000u
#define FB_INPUT_DMA   0x1000u
#define FB_PSUM_DMA    0x2000u
#define FB_OUTPUT_DMA  0x3000u
#define FB_CONTROLLER  0x4000u

/* pipe register bases */
#define FB_PIPE_MM2S 0x0000u
#define FB_PIPE_S2MM 0x1000u

/* DMA register byte offsets */
#define FB_REG_CTRL    0x00u
#define FB_REG_STATUS  0x04u
#define FB_REG_ADDR_LO 0x08u
#define FB_REG_ADDR_HI 0x0Cu
#define FB_REG_LEN     0x10u

#define FB_CTRL_START 0x1u
#define FB_STATUS_BUSY 0x1u
#define FB_STATUS_DONE 0x2u
#define FB_STATUS_ERR  0x4u

/* controller register byte offsets */
#define FB_CTRL_GO       0x00u
#define FB_CTRL_DIMS_R_C 0x04u
#define FB_CTRL_DIMS_M   0x08u
#define FB_CTRL_STATUS   0x0Cu

#endif /* FB_SOC_H */
