from .base import StreamBeat, plan_bursts
from .dma import DMA_REG_WINDOW, Mm2sDma, S2mmDma
from .regfile import register_file_dut
from .soc import SocHandle, build_pipe_soc, build_systolic_soc
from .systolic import SystolicArray, SystolicController

__all__ = [
    "StreamBeat", "plan_bursts",
    "Mm2sDma", "S2mmDma", "DMA_REG_WINDOW",
    "register_file_dut",
    "SystolicArray", "SystolicController",
    "SocHandle", "build_systolic_soc", "build_pipe_soc",
]
