"""Protocol answers and their JSON form."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Count:
    value: int

    def to_json(self):
        return {"count": self.value}


@dataclass(frozen=True)
class ArgMax:
    element: int
    frequency: int

    def to_json(self):
        return {"argmax": [self.element, self.frequency]}


@dataclass(frozen=True)
class Degree:
    value: int

    def to_json(self):
        return {"degree": self.value}


@dataclass(frozen=True)
class Bool:
    """Yes/no answer; what ``value`` means depends on the problem
    (cycle-free, connected, bipartite, triangle-free)."""
    value: bool

    def to_json(self):
        return {"bool": self.value}


@dataclass(frozen=True)
class CCCount:
    value: int

    def to_json(self):
        return {"cc": self.value}


@dataclass(frozen=True)
class Diameter:
    value: float | int

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    def to_json(self):
        return {"diameter": "inf" if self.infinite else int(self.value)}


@dataclass(frozen=True)
class ElementSet:
    elements: tuple

    def to_json(self):
        return {"elements": list(self.elements)}


@dataclass(frozen=True)
class BfsResult:
    roots: tuple
    parent: dict = field(hash=False)
    layer: dict = field(hash=False)
    odd_cycle_found: bool = False

    @property
    def root(self) -> int:
        return self.roots[0]

    def to_json(self):
        return {"bfs": {"roots": list(self.roots),
                        "layer": {str(v): d for v, d in sorted(self.layer.items())},
                        "parent": {str(v): p for v, p in sorted(self.parent.items())},
                        "odd_cycle_found": self.odd_cycle_found}}


def answer_to_json(ans):
    return ans.to_json() if hasattr(ans, "to_json") else ans
