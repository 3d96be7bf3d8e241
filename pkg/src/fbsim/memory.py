"""Sparse byte-addressable DDR model with watch regions.

The image lives host-side: firmware reads and writes it in zero simulated
time, hardware reaches it through bus transactions via the bridge. Pages
are allocated lazily at 4 KiB granularity; untouched bytes read back as
the fill byte (0x00 -- there is no X state on the host side, uninitialized
reads are caught with watch regions instead).
"""

from __future__ import annotations

from dataclasses import dataclass

PAGE_SIZE = 4096
PAGE_MASK = PAGE_SIZE - 1

ORIGIN_FIRMWARE = "firmware"


class MemoryModelError(Exception):
    """I/O or watch bookkeeping failure (not a simulated outcome)."""


@dataclass(frozen=True)
class WatchRegion:
    base: int
    length: int
    mode: str  # "read" | "write" | "both"
    label: str = ""

    def __post_init__(self):
        if self.length < 1:
            raise MemoryModelError("watch region length must be >= 1")
        if self.mode not in ("read", "write", "both"):
            raise MemoryModelError(f"bad watch mode {self.mode!r}")

    def matches(self, kind: str, addr: int, length: int) -> bool:
        if self.mode != "both" and self.mode != kind:
            return False
        return addr < self.base + self.length and self.base < addr + length


@dataclass(frozen=True)
class AccessEvent:
    cycle: int
    origin: str  # ORIGIN_FIRMWARE or a port name
    kind: str  # "read" | "write"
    addr: int
    length: int


class MemoryImage:
    """64-bit flat address space backed by sparse 4 KiB pages."""

    def __init__(self, fill: int = 0x00):
        self._pages: dict[int, bytearray] = {}
        self._fill = fill
        self._watches: dict[int, WatchRegion] = {}
        self._next_watch_id = 1
        self._access_log: list[AccessEvent] = []

    # -- data path --------------------------------------------------------

    def write_bytes(self, addr: int, data: bytes | bytearray,
                    *, origin: str | None = None, cycle: int = 0) -> None:
        if origin is not None:
            self.note_access(origin, "write", addr, len(data), cycle)
        off = 0
        n = len(data)
        while off < n:
            page_no, page_off = divmod(addr + off, PAGE_SIZE)
            chunk = min(n - off, PAGE_SIZE - page_off)
            page = self._pages.get(page_no)
            if page is None:
                page = self._pages[page_no] = bytearray([self._fill]) * PAGE_SIZE
            page[page_off:page_off + chunk] = data[off:off + chunk]
            off += chunk

    def read_bytes(self, addr: int, length: int,
                   *, origin: str | None = None, cycle: int = 0) -> bytes:
        if origin is not None:
            self.note_access(origin, "read", addr, length, cycle)
        out = bytearray()
        off = 0
        while off < length:
            page_no, page_off = divmod(addr + off, PAGE_SIZE)
            chunk = min(length - off, PAGE_SIZE - page_off)
            page = self._pages.get(page_no)
            if page is None:
                out += bytes([self._fill]) * chunk
            else:
                out += page[page_off:page_off + chunk]
            off += chunk
        return bytes(out)

    @property
    def page_count(self) -> int:
        return len(self._pages)

    # -- watch regions ----------------------------------------------------

    def add_watch(self, region: WatchRegion) -> int:
        wid = self._next_watch_id
        self._next_watch_id += 1
        self._watches[wid] = region
        return wid

    def remove_watch(self, watch_id: int) -> None:
        if watch_id not in self._watches:
            raise MemoryModelError(f"unknown watch id {watch_id}")
        del self._watches[watch_id]

    def note_access(self, origin: str, kind: str, addr: int, length: int,
                    cycle: int) -> None:
        """Log one event if the access overlaps any matching watch region.

        Bus bridges call this once per burst; firmware-direct accesses
        route through read_bytes/write_bytes with an origin.
        """
        if length <= 0 or not self._watches:
            return
        for region in self._watches.values():
            if region.matches(kind, addr, length):
                self._access_log.append(
                    AccessEvent(cycle=cycle, origin=origin, kind=kind,
                                addr=addr, length=length))
                return

    def take_access_log(self) -> list[AccessEvent]:
        log = self._access_log
        self._access_log = []
        return log

    # -- raw image files --------------------------------------------------

    def load_image(self, path: str, base_addr: int) -> int:
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise MemoryModelError(f"cannot load image {path!r}: {exc}") from exc
        if data:
            self.write_bytes(base_addr, data)
        return len(data)

    def save_image(self, path: str, base_addr: int, length: int) -> None:
        try:
            with open(path, "wb") as fh:
                fh.write(self.read_bytes(base_addr, length))
        except OSError as exc:
            raise MemoryModelError(f"cannot save image {path!r}: {exc}") from exc
