"""Declared device profiles: memory hierarchy and core count.

Profiles are JSON files::

    {"name": "rpi4", "core_count": 4,
     "levels": [{"name": "L1", "capacity": "32KiB", "shared": false},
                {"name": "L2", "capacity": "1MiB", "shared": true},
                {"name": "DRAM", "capacity": "4GiB", "shared": true}]}

``capacity`` is either an integer byte count or a string with a binary
suffix (KiB/MiB/GiB, also accepted as K/KB/M/MB/G/GB). ``core_count`` may be
omitted or null, in which case the host's core count is used.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import List, Optional, Union

from .parallel import available_cores

_UNITS = {"": 1, "B": 1, "K": 1 << 10, "M": 1 << 20, "G": 1 << 30, "T": 1 << 40}
_SIZE_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([KMGT]?)(?:I?B)?\s*$", re.IGNORECASE)


class ProfileError(ValueError):
    pass


def parse_size(value: Union[int, str]) -> int:
    if isinstance(value, bool):
        raise ProfileError(f"invalid size {value!r}")
    if isinstance(value, int):
        return value
    m = _SIZE_RE.match(str(value))
    if not m:
        raise ProfileError(f"invalid size {value!r}")
    return int(float(m.group(1)) * _UNITS[m.group(2).upper()])


@dataclass(frozen=True)
class MemoryLevel:
    name: str
    capacity: int  # bytes
    shared: bool = False

    def __post_init__(self):
        if self.capacity <= 0:
            raise ProfileError(f"level {self.name}: capacity must be positive")

    @property
    def is_dram(self) -> bool:
        return self.name.upper() in ("DRAM", "RAM", "MEM", "MEMORY")


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    core_count: int
    levels: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.core_count < 1:
            raise ProfileError(f"{self.name}: core_count must be >= 1")
        if not self.levels:
            raise ProfileError(f"{self.name}: at least one memory level is required")
        for slower, faster in zip(self.levels[1:], self.levels):
            if slower.capacity <= faster.capacity:
                raise ProfileError(
                    f"{self.name}: capacities must strictly increase "
                    f"({faster.name}={faster.capacity} >= {slower.name}={slower.capacity})"
                )

    def level(self, name: str) -> MemoryLevel:
        for lvl in self.levels:
            if lvl.name == name:
                return lvl
        raise KeyError(f"{self.name} has no level {name!r}")

    def faster_than(self, level: MemoryLevel) -> Optional[MemoryLevel]:
        """The next-faster level, or None for the fastest."""
        idx = self.levels.index(level)
        return self.levels[idx - 1] if idx > 0 else None

    @property
    def caches(self) -> List[MemoryLevel]:
        return [lvl for lvl in self.levels if not lvl.is_dram]

    @property
    def dram(self) -> MemoryLevel:
        return self.levels[-1]

    def with_cores(self, core_count: int) -> "DeviceProfile":
        return replace(self, core_count=core_count)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "core_count": self.core_count,
            "levels": [{"name": l.name, "capacity": l.capacity, "shared": l.shared} for l in self.levels],
        }


def profile_from_dict(data: dict) -> DeviceProfile:
    try:
        levels = tuple(
            MemoryLevel(str(d["name"]), parse_size(d["capacity"]), bool(d.get("shared", False)))
            for d in data["levels"]
        )
        cores = data.get("core_count")
        return DeviceProfile(str(data["name"]), int(cores) if cores is not None else available_cores(), levels)
    except KeyError as exc:
        raise ProfileError(f"profile is missing field {exc}") from None


def load_profile(path_or_name: Union[str, Path]) -> DeviceProfile:
    """Load a profile from a JSON file path, or by name from the shipped profiles."""
    path = Path(path_or_name)
    if path.is_file():
        text = path.read_text()
    elif str(path_or_name) in shipped_profiles():
        text = resources.files("membench.profiles").joinpath(f"{path_or_name}.json").read_text()
    else:
        raise FileNotFoundError(f"no profile file or shipped profile named {str(path_or_name)!r}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"{path_or_name}: {exc}") from None
    return profile_from_dict(data)


def shipped_profiles() -> List[str]:
    root = resources.files("membench.profiles")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
