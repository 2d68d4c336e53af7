"""Problem instances, their invariants and the JSON file format.

Elements and vertices are 1-based throughout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

FORMAT = 1


class InstanceParseError(ValueError):
    def __init__(self, msg: str, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{msg} ({', '.join(where)})" if where else msg)
        self.field = field
        self.line = line


@dataclass(frozen=True)
class Violation:
    where: str
    what: str

    def __str__(self):
        return f"{self.where}: {self.what}"


@dataclass(frozen=True, eq=False)
class SetFamilyInstance:
    n: int
    sets: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(tuple(int(e) for e in s) for s in self.sets))

    @property
    def k(self) -> int:
        return len(self.sets)

    def __eq__(self, other):
        return (isinstance(other, SetFamilyInstance) and self.n == other.n
                and self.sets == other.sets and self.meta == other.meta)


def canon_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class GraphPartitionInstance:
    n: int
    local_edges: tuple
    allow_duplication: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "local_edges",
                           tuple(tuple((int(u), int(v)) for u, v in es) for es in self.local_edges))

    @property
    def k(self) -> int:
        return len(self.local_edges)

    def edge_set(self) -> set:
        return {canon_edge(u, v) for es in self.local_edges for u, v in es}

    @property
    def m(self) -> int:
        return len(self.edge_set())

    def __eq__(self, other):
        return (isinstance(other, GraphPartitionInstance) and self.n == other.n
                and self.local_edges == other.local_edges
                and self.allow_duplication == other.allow_duplication
                and self.meta == other.meta)


@dataclass(frozen=True, eq=False)
class ThreshInstance:
    """k x r boolean matrix, one row per site; THRESH asks whether more than
    ``theta`` columns contain a 1."""
    matrix: np.ndarray
    theta: int
    witness_Y: tuple | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=bool)
        if m.ndim != 2:
            m = m.reshape(len(m), -1)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if self.witness_Y is not None:
            object.__setattr__(self, "witness_Y", tuple(sorted(int(j) for j in self.witness_Y)))

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def r(self) -> int:
        return self.matrix.shape[1]

    def row_support(self, i: int) -> tuple:
        return tuple(int(j) + 1 for j in np.flatnonzero(self.matrix[i]))

    def __eq__(self, other):
        return (isinstance(other, ThreshInstance) and self.theta == other.theta
                and self.matrix.shape == other.matrix.shape
                and bool(np.array_equal(self.matrix, other.matrix))
                and self.witness_Y == other.witness_Y and self.meta == other.meta)


@dataclass(frozen=True, eq=False)
class DisjInstance:
    r: int
    x: tuple
    y: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(sorted(int(e) for e in self.x)))
        object.__setattr__(self, "y", tuple(sorted(int(e) for e in self.y)))

    @property
    def ell(self) -> int:
        return (self.r + 1) // 4

    def __eq__(self, other):
        return (isinstance(other, DisjInstance) and self.r == other.r and self.x == other.x
                and self.y == other.y and self.meta == other.meta)


@dataclass(frozen=True, eq=False)
class OrDisjInstance:
    r: int
    X: tuple
    Y: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "X", tuple(tuple(sorted(int(e) for e in s)) for s in self.X))
        object.__setattr__(self, "Y", tuple(sorted(int(e) for e in self.Y)))

    @property
    def k(self) -> int:
        return len(self.X)

    @property
    def ell(self) -> int:
        return (self.r + 1) // 4

    def __eq__(self, other):
        return (isinstance(other, OrDisjInstance) and self.r == other.r and self.X == other.X
                and self.Y == other.Y and self.meta == other.meta)


# ---------------------------------------------------------------------------
# validation


def _check_sorted_range(xs, lo, hi, where):
    prev = None
    for e in xs:
        if e < lo:
            return Violation(where, f"element {e} below {lo}")
        if e > hi:
            return Violation(where, f"element {e} above {hi}")
        if prev is not None and e <= prev:
            return Violation(where, f"not strictly increasing at {e}")
        prev = e
    return None


def validate(inst) -> Violation | None:
    """First violated invariant of ``inst``, or None when it is valid."""
    if isinstance(inst, SetFamilyInstance):
        if inst.k < 1:
            return Violation("k", "need at least one site")
        if inst.n < 1:
            return Violation("n", "universe must be nonempty")
        for i, s in enumerate(inst.sets):
            v = _check_sorted_range(s, 1, inst.n, f"sets[{i}]")
            if v:
                return v
        return None

    if isinstance(inst, GraphPartitionInstance):
        if inst.k < 1:
            return Violation("k", "need at least one site")
        if inst.n < 1:
            return Violation("n", "need at least one vertex")
        owner: dict = {}
        for i, es in enumerate(inst.local_edges):
            seen = set()
            for u, v in es:
                where = f"local_edges[{i}]"
                if u == v:
                    return Violation(where, f"self-loop at {u}")
                if not (1 <= u <= inst.n and 1 <= v <= inst.n):
                    return Violation(where, f"edge ({u}, {v}) outside [1, {inst.n}]")
                if u > v:
                    return Violation(where, f"edge ({u}, {v}) not stored as u < v")
                if (u, v) in seen:
                    return Violation(where, f"edge ({u}, {v}) repeated within a site")
                seen.add((u, v))
                if not inst.allow_duplication and (u, v) in owner:
                    return Violation(where, f"edge ({u}, {v}) also held by site {owner[(u, v)]}")
                owner.setdefault((u, v), i)
        return None

    if isinstance(inst, ThreshInstance):
        k, r = inst.matrix.shape
        if k < 1 or r < 1:
            return Violation("matrix", "empty matrix")
        if not 0 <= inst.theta <= r:
            return Violation("theta", f"theta {inst.theta} outside [0, {r}]")
        if inst.witness_Y is not None:
            v = _check_sorted_range(inst.witness_Y, 1, r, "witness_Y")
            if v:
                return v
        if inst.meta.get("distribution") == "zeta":
            if r % 4 != 3:
                return Violation("r", "sampled instances need r = 3 (mod 4)")
            if inst.theta != (3 * r - 1) // 4:
                return Violation("theta", "sampled instances need theta = (3r-1)/4")
            if inst.witness_Y is None or len(inst.witness_Y) != (r + 1) // 4:
                return Violation("witness_Y", "sampled instances need |Y| = (r+1)/4")
        return None

    if isinstance(inst, DisjInstance):
        if inst.r % 4 != 3:
            return Violation("r", "r must be 3 (mod 4)")
        for name in ("x", "y"):
            s = getattr(inst, name)
            v = _check_sorted_range(s, 1, inst.r, name)
            if v:
                return v
            if len(s) != inst.ell:
                return Violation(name, f"size {len(s)} != ell = {inst.ell}")
        if len(set(inst.x) & set(inst.y)) > 1:
            return Violation("x,y", "intersection larger than one")
        return None

    if isinstance(inst, OrDisjInstance):
        if inst.r % 4 != 3:
            return Violation("r", "r must be 3 (mod 4)")
        v = _check_sorted_range(inst.Y, 1, inst.r, "Y")
        if v:
            return v
        if len(inst.Y) != inst.ell:
            return Violation("Y", f"size {len(inst.Y)} != ell = {inst.ell}")
        ys = set(inst.Y)
        for i, s in enumerate(inst.X):
            v = _check_sorted_range(s, 1, inst.r, f"X[{i}]")
            if v:
                return v
            if len(s) != inst.ell:
                return Violation(f"X[{i}]", f"size {len(s)} != ell = {inst.ell}")
            if len(ys.intersection(s)) > 1:
                return Violation(f"X[{i}]", "meets Y in more than one element")
        return None

    return Violation("type", f"unknown instance type {type(inst).__name__}")


# ---------------------------------------------------------------------------
# JSON


def to_json(inst) -> dict:
    if isinstance(inst, SetFamilyInstance):
        d = {"type": "sets", "format": FORMAT, "k": inst.k, "n": inst.n,
             "sets": [list(s) for s in inst.sets]}
    elif isinstance(inst, GraphPartitionInstance):
        d = {"type": "graph", "format": FORMAT, "k": inst.k, "n": inst.n, "m": inst.m,
             "dup": inst.allow_duplication,
             "edges": [[[u, v] for u, v in es] for es in inst.local_edges]}
    elif isinstance(inst, ThreshInstance):
        d = {"type": "thresh", "format": FORMAT, "k": inst.k, "r": inst.r, "theta": inst.theta,
             "matrix": ["".join("1" if b else "0" for b in row) for row in inst.matrix]}
        if inst.witness_Y is not None:
            d["witness_Y"] = list(inst.witness_Y)
    elif isinstance(inst, DisjInstance):
        d = {"type": "disj", "format": FORMAT, "r": inst.r, "ell": inst.ell,
             "x": list(inst.x), "y": list(inst.y)}
    elif isinstance(inst, OrDisjInstance):
        d = {"type": "ordisj", "format": FORMAT, "k": inst.k, "r": inst.r,
             "X": [list(s) for s in inst.X], "Y": list(inst.Y)}
    else:
        raise TypeError(f"cannot serialize {type(inst).__name__}")
    if inst.meta:
        d["meta"] = inst.meta
    return d


def serialize(inst) -> bytes:
    return (json.dumps(to_json(inst)) + "\n").encode()


def _get(d: dict, key: str, kind=None):
    if key not in d:
        raise InstanceParseError("missing field", field=key)
    val = d[key]
    if (kind is not None and not isinstance(val, kind)) or (kind is int and isinstance(val, bool)):
        raise InstanceParseError(f"expected {getattr(kind, '__name__', kind)}", field=key)
    return val


def from_json(d: dict):
    if not isinstance(d, dict):
        raise InstanceParseError("instance must be a JSON object")
    typ = _get(d, "type", str)
    fmt = d.get("format", FORMAT)
    if fmt != FORMAT:
        raise InstanceParseError(f"unsupported format {fmt}", field="format")
    meta = d.get("meta", {}) or {}
    try:
        if typ == "sets":
            sets = _get(d, "sets", list)
            inst = SetFamilyInstance(_get(d, "n", int), sets, meta)
            if inst.k != _get(d, "k", int):
                raise InstanceParseError("k does not match number of sets", field="k")
        elif typ == "graph":
            edges = _get(d, "edges", list)
            for es in edges:
                for e in es:
                    if not (isinstance(e, list) and len(e) == 2):
                        raise InstanceParseError("edge must be [u, v]", field="edges")
            inst = GraphPartitionInstance(_get(d, "n", int), edges, bool(d.get("dup", False)), meta)
            if inst.k != _get(d, "k", int):
                raise InstanceParseError("k does not match number of edge lists", field="k")
            if "m" in d and d["m"] != inst.m:
                raise InstanceParseError("m does not match the union of edge lists", field="m")
        elif typ == "thresh":
            rows = _get(d, "matrix", list)
            r = _get(d, "r", int)
            for i, row in enumerate(rows):
                if not isinstance(row, str) or len(row) != r or set(row) - {"0", "1"}:
                    raise InstanceParseError(f"row {i} is not a {r}-character bit string", field="matrix")
            mat = np.array([[c == "1" for c in row] for row in rows], dtype=bool).reshape(len(rows), r)
            inst = ThreshInstance(mat, _get(d, "theta", int), d.get("witness_Y"), meta)
            if inst.k != _get(d, "k", int):
                raise InstanceParseError("k does not match number of rows", field="k")
        elif typ == "disj":
            inst = DisjInstance(_get(d, "r", int), _get(d, "x", list), _get(d, "y", list), meta)
        elif typ == "ordisj":
            inst = OrDisjInstance(_get(d, "r", int), _get(d, "X", list), _get(d, "Y", list), meta)
        else:
            raise InstanceParseError(f"unknown instance type {typ!r}", field="type")
    except (TypeError, ValueError) as e:
        if isinstance(e, InstanceParseError):
            raise
        raise InstanceParseError(str(e)) from e
    return inst


def deserialize(data: bytes | str):
    text = data.decode() if isinstance(data, bytes) else data
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceParseError(e.msg, line=e.lineno) from e
    return from_json(d)


def load(path) -> Any:
    with open(path, "rb") as f:
        return deserialize(f.read())


def dump(inst, path) -> None:
    with open(path, "wb") as f:
        f.write(serialize(inst))
