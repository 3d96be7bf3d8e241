"""ctypes loader for C firmware built against firmware/include/fb.h.

The shared library exports fb_host_bind() and fb_firmware_main(); only
scalars and (address, length) pairs cross the boundary. The C code runs
on the firmware thread, so its fb_* calls block and resume exactly like
the native API.
"""

from __future__ import annotations

import ctypes

from .firmware import FirmwareContext

_READ32 = ctypes.CFUNCTYPE(ctypes.c_uint32, ctypes.c_uint64)
_WRITE32 = ctypes.CFUNCTYPE(None, ctypes.c_uint64, ctypes.c_uint32)
_MEMREAD = ctypes.CFUNCTYPE(None, ctypes.c_uint64,
                            ctypes.POINTER(ctypes.c_uint8), ctypes.c_uint64)
_MEMWRITE = ctypes.CFUNCTYPE(None, ctypes.c_uint64,
                             ctypes.POINTER(ctypes.c_uint8), ctypes.c_uint64)
_WAIT = ctypes.CFUNCTYPE(None, ctypes.c_uint64)
_COUNT = ctypes.CFUNCTYPE(ctypes.c_uint64)


class _HostOps(ctypes.Structure):
    _fields_ = [
        ("read_32", _READ32),
        ("write_32", _WRITE32),
        ("mem_read", _MEMREAD),
        ("mem_write", _MEMWRITE),
        ("wait_cycles", _WAIT),
        ("cycle_count", _COUNT),
    ]


class CShimError(Exception):
    pass


class CShimFirmware:
    def __init__(self, path: str, entry_symbol: str = "fb_firmware_main"):
        try:
            self._lib = ctypes.CDLL(path)
        except OSError as exc:
            raise CShimError(f"cannot load firmware library {path!r}: {exc}") from exc
        for symbol in ("fb_host_bind", entry_symbol):
            if not hasattr(self._lib, symbol):
                raise CShimError(f"{path!r} does not export {symbol}")
        self._entry = getattr(self._lib, entry_symbol)
        self._entry.restype = ctypes.c_int
        self._lib.fb_host_bind.argtypes = [ctypes.POINTER(_HostOps)]
        self._keepalive: _HostOps | None = None

    def make_entry(self):
        def entry(ctx: FirmwareContext) -> int:
            def read_32(addr):
                return ctx.read_32(addr)

            def write_32(addr, value):
                ctx.write_32(addr, value)

            def mem_read(addr, dst, length):
                data = ctx.mem_read(addr, length)
                ctypes.memmove(dst, data, length)

            def mem_write(addr, src, length):
                ctx.mem_write(addr, ctypes.string_at(src, length))

            def wait_cycles(n):
                ctx.wait_cycles(n)

            def cycle_count():
                return ctx.cycle_count()

            ops = _HostOps(_READ32(read_32), _WRITE32(write_32),
                           _MEMREAD(mem_read), _MEMWRITE(mem_write),
                           _WAIT(wait_cycles), _COUNT(cycle_count))
            self._keepalive = ops
            self._lib.fb_host_bind(ctypes.byref(ops))
            return int(self._entry())

        return entry
