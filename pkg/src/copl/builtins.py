"""Host-level types assumed by COP-lite programs: Storage, Map and print.

Storage simulates a persistent store in memory.  ``store`` snapshots the
fields of a live object; ``load`` materializes a snapshot as a fresh live
object, so changes only survive if they are stored back.  While a storage is
open, or while a resolution is in progress, repeated loads of one key return
the same live object.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

from copl.errors import CoplRuntimeError, UnresolvedSegment

if TYPE_CHECKING:
    from copl.runtime import ObjectTable, RootHandle


def format_number(value: int | float) -> str:
    """Canonical decimal rendering: integral doubles drop their fraction."""
    if isinstance(value, float):
        if value.is_integer():
            return str(int(value))
        return repr(value)
    return str(value)


def render(value) -> str:
    if isinstance(value, bool) or value is None:
        raise CoplRuntimeError(f"cannot print {'void' if value is None else 'a condition'}")
    if isinstance(value, (int, float)):
        return format_number(value)
    if isinstance(value, str):
        return value
    raise CoplRuntimeError(f"cannot print {type(value).__name__}")


@dataclass(frozen=True)
class Snapshot:
    type_name: str
    fields: tuple[tuple[str, object], ...]


@dataclass(eq=False)
class StorageInstance:
    label: str
    table: "ObjectTable"
    trace: Callable[[str], None] = lambda event: None
    records: dict[int, Snapshot] = field(default_factory=dict)
    open_count: int = 0
    # key -> live handle, valid for the current open span / resolution
    live: dict[int, "RootHandle"] = field(default_factory=dict)

    def store(self, key: int, handle: "RootHandle | None") -> None:
        if not hasattr(handle, "index"):
            raise CoplRuntimeError("Storage.store: nil reference")
        obj = self.table.get(handle)
        self.records[key] = Snapshot(obj.type_name, tuple(obj.fields.items()))

    def load(self, key: int, cache: bool) -> "RootHandle":
        if cache and key in self.live:
            return self.live[key]
        snap = self.records.get(key)
        if snap is None:
            raise UnresolvedSegment("Storage", key)
        handle = self.table.materialize(snap.type_name, dict(snap.fields))
        if cache:
            self.live[key] = handle
        return handle

    def open(self) -> None:
        self.open_count += 1
        self.trace(f"open {self.label}")

    def close(self) -> None:
        if self.open_count == 0:
            raise CoplRuntimeError(f"Storage.close: {self.label} is not open")
        self.open_count -= 1
        if self.open_count == 0:
            self.live.clear()
        self.trace(f"close {self.label}")


@dataclass(eq=False)
class MapInstance:
    label: str
    entries: dict[str, "RootHandle"] = field(default_factory=dict)

    def put(self, key: str, handle: "RootHandle | None") -> None:
        if not hasattr(handle, "index"):
            raise CoplRuntimeError("Map.put: nil reference")
        self.entries[key] = handle

    def get(self, key: str) -> "RootHandle":
        try:
            return self.entries[key]
        except KeyError:
            raise UnresolvedSegment("Map", key) from None
