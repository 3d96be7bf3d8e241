"""Scratch register file: the smoke-test peripheral."""

from __future__ import annotations

from ..bridge import RegisterDecodeError, RegisterPort
from .base import DutProcess


class _RegFileProcess(DutProcess):
    def __init__(self, name: str, n_regs: int):
        super().__init__(name)
        self.regs = [0] * n_regs

    def step(self, cycle: int) -> None:  # purely reactive, nothing clocked
        pass


def register_file_dut(n_regs: int, name: str = "regfile", base: int = 0x0,
                      latency: int = 1) -> tuple[_RegFileProcess, RegisterPort]:
    if n_regs < 1:
        raise ValueError("need at least one register")
    proc = _RegFileProcess(name, n_regs)

    def read(word: int) -> int:
        if not 0 <= word < n_regs:
            raise RegisterDecodeError(f"register index {word} out of range")
        return proc.regs[word]

    def write(word: int, value: int) -> None:
        if not 0 <= word < n_regs:
            raise RegisterDecodeError(f"register index {word} out of range")
        proc.regs[word] = value

    port = RegisterPort(name=f"{name}.regs", base=base, length=4 * n_regs,
                        read=read, write=write, latency=latency)
    return proc, port
