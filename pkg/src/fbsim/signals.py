"""Two-phase signals and valid/ready channels.

Every cross-process value travels through a Signal: processes read the
committed value during phase 1 and write the next value, which the kernel
commits in phase 2. Swapping process execution order therefore never
changes what anyone observes.
"""

from __future__ import annotations

from typing import Any


class Signal:
    """A named value with sample/commit semantics."""

    __slots__ = ("name", "width", "_value", "_next")

    def __init__(self, name: str, width: int = 1, init: Any = 0):
        self.name = name
        self.width = width
        self._value = init
        self._next = init

    @property
    def value(self) -> Any:
        return self._value

    def set(self, value: Any) -> None:
        self._next = value

    def commit(self) -> bool:
        changed = self._next != self._value
        self._value = self._next
        return changed

    def __repr__(self) -> str:
        return f"Signal({self.name}={self._value!r})"


class Channel:
    """One valid/ready handshake lane with an opaque payload.

    Used for AXI channels and for AXI-Stream links alike. A transfer
    happens on every cycle where both sampled flags are high; the driver
    must hold valid and payload stable until then.
    """

    __slots__ = ("name", "valid", "ready", "payload")

    def __init__(self, name: str):
        self.name = name
        self.valid = Signal(f"{name}.valid", 1, 0)
        self.ready = Signal(f"{name}.ready", 1, 0)
        self.payload = Signal(f"{name}.payload", 0, None)

    def fired(self) -> bool:
        return bool(self.valid.value and self.ready.value)

    @property
    def signals(self) -> tuple[Signal, Signal, Signal]:
        return (self.valid, self.ready, self.payload)

    def __repr__(self) -> str:
        return f"Channel({self.name} v={self.valid.value} r={self.ready.value})"
