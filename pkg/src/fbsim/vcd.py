"""Value Change Dump writer.

One VCD time unit is one clock cycle (timescale 1ns). Identifier codes are
assigned in declaration order from the printable-ASCII alphabet and only
changed values are emitted per timestamp, so identical runs produce
byte-identical files. The header carries a fixed date string for the same
reason.
"""

from __future__ import annotations

from dataclasses import dataclass

_ID_FIRST = 33  # '!'
_ID_LAST = 126  # '~'
_ID_SPAN = _ID_LAST - _ID_FIRST + 1


def _id_code(index: int) -> str:
    # bijective base-94 over printable ASCII, shortest codes first
    chars = []
    index += 1
    while index > 0:
        index -= 1
        chars.append(chr(_ID_FIRST + index % _ID_SPAN))
        index //= _ID_SPAN
    return "".join(chars)


class VcdError(Exception):
    pass


@dataclass
class _Var:
    scope: tuple[str, ...]
    name: str
    width: int
    code: str
    last: int | None = None


class VcdWriter:
    def __init__(self, version: str = "fbsim 0.1.0"):
        self._vars: list[_Var] = []
        self._body: list[str] = []
        self._sampling = False
        self._dumped_initial = False
        self._version = version

    def declare(self, scope: str, name: str, width: int) -> int:
        """Register a signal under a dotted scope path; returns its id."""
        if self._sampling:
            raise VcdError("declarations must precede sampling")
        if width < 1:
            raise VcdError("width must be >= 1")
        scope_path = tuple(s for s in scope.split(".") if s)
        for var in self._vars:
            if var.scope == scope_path and var.name == name:
                raise VcdError(f"duplicate signal {scope}.{name}")
        code = _id_code(len(self._vars))
        self._vars.append(_Var(scope_path, name, width, code))
        return len(self._vars) - 1

    def sample_cycle(self, cycle: int, values: list[int]) -> None:
        """Record the value of every declared signal, in declaration order."""
        if len(values) != len(self._vars):
            raise VcdError(f"expected {len(self._vars)} values, got {len(values)}")
        self._sampling = True
        changes = []
        for var, value in zip(self._vars, values):
            value &= (1 << var.width) - 1
            if value != var.last:
                var.last = value
                if var.width == 1:
                    changes.append(f"{value}{var.code}")
                else:
                    changes.append(f"b{value:b} {var.code}")
        if changes:
            self._body.append(f"#{cycle}")
            if not self._dumped_initial:
                self._body.append("$dumpvars")
                self._body.extend(changes)
                self._body.append("$end")
            else:
                self._body.extend(changes)
        self._dumped_initial = True

    def finalize(self, path: str) -> None:
        try:
            with open(path, "w") as fh:
                fh.write(self._render())
        except OSError as exc:
            raise VcdError(f"cannot write VCD {path!r}: {exc}") from exc

    def _render(self) -> str:
        lines = [
            "$date", "    (deterministic build)", "$end",
            "$version", f"    {self._version}", "$end",
            "$timescale 1ns $end",
        ]
        open_scope: tuple[str, ...] = ()
        for var in self._vars:
            while open_scope and open_scope != var.scope[:len(open_scope)]:
                lines.append("$upscope $end")
                open_scope = open_scope[:-1]
            while open_scope != var.scope:
                nxt = var.scope[len(open_scope)]
                lines.append(f"$scope module {nxt} $end")
                open_scope = open_scope + (nxt,)
            kind = "wire" if var.width == 1 else "reg"
            lines.append(f"$var {kind} {var.width} {var.code} {var.name} $end")
        while open_scope:
            lines.append("$upscope $end")
            open_scope = open_scope[:-1]
        lines.append("$enddefinitions $end")
        lines.extend(self._body)
        return "\n".join(lines) + "\n"
