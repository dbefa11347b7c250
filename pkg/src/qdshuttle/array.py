"""Dot-array topology: dots, channels, row-shared gate columns and seat geometry.

Indexing is 1-based everywhere. In the standard layout the even columns are
aisle columns (wired to row-shared gates, vertical channels present), the odd
columns hold seat dots, and the rightmost column is the measurement column.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

from .errors import InvalidConfig, InvalidDimensions, NotAdjacent, UnknownElectron


class Dot(NamedTuple):
    row: int
    col: int


def manhattan(a: Dot, b: Dot) -> int:
    return abs(a.row - b.row) + abs(a.col - b.col)


def _edge(a: Dot, b: Dot) -> frozenset:
    return frozenset((Dot(*a), Dot(*b)))


@dataclass(frozen=True)
class ArrayConfig:
    rows: int
    cols: int
    bus_row: int
    r_columns: frozenset[int]
    channels: frozenset[frozenset[Dot]]
    standard_channels: bool = False

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidDimensions(f"array must have at least one row and column, got {self.rows}x{self.cols}")
        if not 1 <= self.bus_row <= self.rows:
            raise InvalidDimensions(f"bus_row {self.bus_row} outside 1..{self.rows}")
        for c in self.r_columns:
            if not 1 <= c <= self.cols:
                raise InvalidConfig(f"r column {c} outside 1..{self.cols}")
        for ch in self.channels:
            if len(ch) != 2:
                raise InvalidConfig(f"channel {sorted(ch)} must join two distinct dots")
            a, b = sorted(ch)
            if not (self.contains(a) and self.contains(b)):
                raise InvalidConfig(f"channel {a}-{b} leaves the array")
            if manhattan(a, b) != 1:
                raise InvalidConfig(f"channel {a}-{b} joins non-adjacent dots")

    # -- geometry -----------------------------------------------------------

    @property
    def measure_col(self) -> int:
        return self.cols

    def contains(self, dot: Dot) -> bool:
        return 1 <= dot[0] <= self.rows and 1 <= dot[1] <= self.cols

    def dots(self) -> list[Dot]:
        return [Dot(r, c) for r in range(1, self.rows + 1) for c in range(1, self.cols + 1)]

    def is_r(self, dot: Dot) -> bool:
        """Row-shared gate predicate; column-uniform by construction."""
        return dot[1] in self.r_columns

    def has_channel(self, a: Dot, b: Dot) -> bool:
        return frozenset((a, b)) in self.channels

    @cached_property
    def seats(self) -> frozenset[Dot]:
        return frozenset(
            d for d in self.dots() if d.col not in self.r_columns and d.row != self.bus_row
        )

    @cached_property
    def seat_list(self) -> tuple[Dot, ...]:
        """Seat dots ordered row-then-column."""
        return tuple(sorted(self.seats))

    def is_seat(self, dot: Dot) -> bool:
        return dot in self.seats

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        out = {
            "rows": self.rows,
            "cols": self.cols,
            "bus_row": self.bus_row,
            "r_columns": sorted(self.r_columns),
        }
        if self.standard_channels:
            out["channels"] = "standard"
        else:
            out["channels"] = [[list(a), list(b)] for a, b in sorted(sorted(ch) for ch in self.channels)]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "ArrayConfig":
        try:
            rows, cols, bus_row = int(data["rows"]), int(data["cols"]), int(data["bus_row"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"array config missing or bad field: {exc}") from exc
        if "r_columns" in data:
            r_columns = frozenset(int(c) for c in data["r_columns"])
        else:
            r_columns = frozenset(range(2, cols + 1, 2))
        channels = data.get("channels", "standard")
        if channels == "standard":
            return cls(rows, cols, bus_row, r_columns, standard_channel_set(rows, cols, r_columns), True)
        try:
            edges = frozenset(_edge(Dot(*a), Dot(*b)) for a, b in channels)
        except (TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad channel list: {exc}") from exc
        return cls(rows, cols, bus_row, r_columns, edges)


def standard_channel_set(rows: int, cols: int, r_columns: Iterable[int]) -> frozenset:
    r_columns = set(r_columns)
    edges = set()
    for r in range(1, rows + 1):
        for c in range(1, cols):
            edges.add(_edge(Dot(r, c), Dot(r, c + 1)))
    for c in r_columns:
        for r in range(1, rows):
            edges.add(_edge(Dot(r, c), Dot(r + 1, c)))
    return frozenset(edges)


def build_standard_array(rows: int = 8, cols: int = 16, bus_row: int = 4) -> ArrayConfig:
    """Aisles on even columns, horizontal channels everywhere, vertical ones only in aisles."""
    if cols % 2 or cols < 2 or rows < 3 or not 1 < bus_row < rows:
        raise InvalidDimensions(
            f"standard array needs even cols, rows >= 3 and 1 < bus_row < rows (got {rows}x{cols}, bus {bus_row})"
        )
    r_columns = frozenset(range(2, cols + 1, 2))
    return ArrayConfig(rows, cols, bus_row, r_columns, standard_channel_set(rows, cols, r_columns), True)


def seat_dots(config: ArrayConfig) -> frozenset[Dot]:
    return config.seats


class Adjacency(NamedTuple):
    same_col: bool
    same_row: bool
    adj_hor: bool
    adj_ver: bool


def adjacency(config: ArrayConfig, a: Dot, b: Dot) -> Adjacency:
    same_col = a.col == b.col
    same_row = a.row == b.row
    adj_hor = same_row and abs(a.col - b.col) == 1 and config.has_channel(a, b)
    adj_ver = (
        same_col
        and abs(a.row - b.row) == 1
        and config.has_channel(a, b)
        and config.is_r(a)
        and config.is_r(b)
    )
    return Adjacency(same_col, same_row, adj_hor, adj_ver)


def adjacency_predicates(config: ArrayConfig, placement: Mapping[int, Dot], e1: int, e2: int) -> Adjacency:
    placement = getattr(placement, "placement", placement)
    for e in (e1, e2):
        if e not in placement:
            raise UnknownElectron(f"electron {e} is not placed", electron=e)
    return adjacency(config, placement[e1], placement[e2])


def block_control(config: ArrayConfig, occupied, src: Dot, dst: Dot) -> bool:
    """True when a same-column electron at ``src`` can be held back from moving to ``dst``.

    ``occupied`` is any container of occupied dots (or a state/placement).
    """
    if src.row != dst.row or abs(src.col - dst.col) != 1:
        raise NotAdjacent(f"{src} and {dst} are not horizontally adjacent")
    occupied = _occupied_view(occupied)
    if dst in occupied:
        return False
    return config.is_r(src) != config.is_r(dst)


def _occupied_view(obj):
    if hasattr(obj, "occupied"):
        return obj.occupied
    if isinstance(obj, Mapping):
        return set(obj.values())
    return obj
