"""Synchronous-round simulator for the k-site message-passing model.

Sites are numbered 0..k-1 (site 0 plays P_1); index k is the coordinator,
which only exists when a run is executed in coordinator mode.  Every payload
has a canonical bit length, and every send is charged to a CostLedger.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np

__all__ = [
    "UInt", "Element", "Edge", "ElementList", "EdgeList", "BitVector", "Composite",
    "bit_length", "CostLedger", "Message", "Transcript", "SiteContext", "Protocol",
    "RunResult", "run_protocol", "replay_ledger",
    "RangeError", "UsageError", "DivergenceError", "ProtocolError",
]


class RangeError(ValueError):
    """A payload value lies outside its declared range."""


class UsageError(ValueError):
    """Caller misused the kernel or a protocol (bad ids, wrong instance shape...)."""


class DivergenceError(RuntimeError):
    """A run exceeded its round limit."""


class ProtocolError(RuntimeError):
    """A site program read a message it required but that never arrived."""


def _clog2(x: int) -> int:
    # ceil(log2 x) for x >= 1, exact on integers
    return (x - 1).bit_length() if x > 1 else 0


# ---------------------------------------------------------------------------
# payloads


@dataclass(frozen=True)
class UInt:
    value: int
    max: int

    def __post_init__(self):
        if not 0 <= self.value <= self.max:
            raise RangeError(f"UInt value {self.value} outside [0, {self.max}]")

    @property
    def bits(self) -> int:
        return max(1, _clog2(self.max + 1))


@dataclass(frozen=True)
class Element:
    """Element id in [0, universe)."""
    id: int
    universe: int

    def __post_init__(self):
        if not 0 <= self.id < self.universe:
            raise RangeError(f"Element {self.id} outside [0, {self.universe})")

    @property
    def bits(self) -> int:
        return _clog2(self.universe)


@dataclass(frozen=True)
class Edge:
    """Undirected edge on vertices 1..n."""
    u: int
    v: int
    n: int

    def __post_init__(self):
        if not (1 <= self.u <= self.n and 1 <= self.v <= self.n):
            raise RangeError(f"edge ({self.u}, {self.v}) outside [1, {self.n}]")

    @property
    def bits(self) -> int:
        return 2 * _clog2(self.n)


@dataclass(frozen=True)
class ElementList:
    """Element ids in [0, universe) behind a length prefix sized by ``cap``."""
    ids: tuple
    universe: int
    cap: int

    def __post_init__(self):
        if not isinstance(self.ids, tuple):
            object.__setattr__(self, "ids", tuple(self.ids))
        if len(self.ids) > self.cap:
            raise RangeError(f"list of {len(self.ids)} items exceeds cap {self.cap}")
        if self.ids and (min(self.ids) < 0 or max(self.ids) >= self.universe):
            raise RangeError(f"element outside [0, {self.universe})")

    @property
    def bits(self) -> int:
        return _clog2(self.cap + 1) + len(self.ids) * _clog2(self.universe)


@dataclass(frozen=True)
class EdgeList:
    edges: tuple
    n: int
    cap: int

    def __post_init__(self):
        if not isinstance(self.edges, tuple):
            object.__setattr__(self, "edges", tuple(self.edges))
        if len(self.edges) > self.cap:
            raise RangeError(f"list of {len(self.edges)} edges exceeds cap {self.cap}")
        for u, v in self.edges:
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise RangeError(f"edge ({u}, {v}) outside [1, {self.n}]")

    @property
    def bits(self) -> int:
        return _clog2(self.cap + 1) + len(self.edges) * 2 * _clog2(self.n)


@dataclass(frozen=True)
class BitVector:
    """Fixed-length bit string; the receiver knows the length, so no prefix."""
    data: tuple

    def __post_init__(self):
        if not isinstance(self.data, tuple):
            object.__setattr__(self, "data", tuple(bool(b) for b in self.data))

    @property
    def bits(self) -> int:
        return len(self.data)


@dataclass(frozen=True)
class Composite:
    parts: tuple

    def __post_init__(self):
        if not isinstance(self.parts, tuple):
            object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def bits(self) -> int:
        return sum(p.bits for p in self.parts)


Payload = UInt | Element | Edge | ElementList | EdgeList | BitVector | Composite


def bit_length(p: Payload) -> int:
    """Canonical cost of a payload in bits (range checks happen at construction)."""
    return p.bits


# ---------------------------------------------------------------------------
# accounting


class CostLedger:
    """Bits and message counts per ordered (sender, receiver) pair.

    The matrices are (k+1) x (k+1); the last row/column belongs to the
    coordinator and stays zero for direct message-passing runs.
    """

    def __init__(self, k: int):
        self.k = k
        self._bits = [[0] * (k + 1) for _ in range(k + 1)]
        self._msgs = [[0] * (k + 1) for _ in range(k + 1)]

    def charge(self, src: int, dst: int, nbits: int) -> None:
        self._bits[src][dst] += nbits
        self._msgs[src][dst] += 1

    @property
    def bits(self) -> np.ndarray:
        return np.array(self._bits, dtype=np.int64)

    @property
    def messages(self) -> np.ndarray:
        return np.array(self._msgs, dtype=np.int64)

    @property
    def total_bits(self) -> int:
        return sum(map(sum, self._bits))

    @property
    def total_messages(self) -> int:
        return sum(map(sum, self._msgs))

    def __eq__(self, other):
        if not isinstance(other, CostLedger):
            return NotImplemented
        return self.k == other.k and self._bits == other._bits and self._msgs == other._msgs

    def __repr__(self):
        return f"CostLedger(k={self.k}, total_bits={self.total_bits}, total_messages={self.total_messages})"

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "total_bits": self.total_bits,
            "total_messages": self.total_messages,
            "pair_bits": [row[:] for row in self._bits],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True)
class Message:
    round: int
    src: int
    dst: int
    payload: Any

    @property
    def kind(self) -> str:
        return type(self.payload).__name__

    @property
    def bits(self) -> int:
        return self.payload.bits


class Transcript(list):
    """Ordered list of Message records."""

    def to_lines(self) -> list[str]:
        return [f"{m.round},{m.src},{m.dst},{m.kind},{m.bits}" for m in self]

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.to_lines())


def replay_ledger(transcript: Sequence[Message], k: int) -> CostLedger:
    ledger = CostLedger(k)
    for m in transcript:
        ledger.charge(m.src, m.dst, bit_length(m.payload))
    return ledger


# ---------------------------------------------------------------------------
# site programs


class SiteContext:
    """Everything a site program may see: its id, the public parameters,
    its own input, its own random stream and messages addressed to it."""

    __slots__ = ("site", "k", "public", "input", "round", "inbox", "_net", "_rng", "_seed")

    def __init__(self, site: int, k: int, public: Any, local_input: Any, seed: int, net: "_Network"):
        self.site = site
        self.k = k
        self.public = public
        self.input = local_input
        self.round = 0
        self.inbox: list[tuple[int, Any]] = []
        self._net = net
        self._seed = seed
        self._rng = None

    @property
    def rng(self) -> np.random.Generator:
        # one stream per (site, round); adding sites leaves other streams untouched
        if self._rng is None:
            self._rng = np.random.default_rng([self._seed, self.site, self.round])
        return self._rng

    def send(self, dst: int, payload: Payload) -> None:
        self._net.send(self.site, dst, payload)

    def broadcast(self, payload: Payload) -> None:
        for dst in range(self.k):
            if dst != self.site:
                self._net.send(self.site, dst, payload)

    def recv(self) -> list[tuple[int, Any]]:
        return self.inbox

    def recv_from(self, src: int) -> Any:
        """The first payload from ``src`` in this round's inbox; it is required."""
        for s, p in self.inbox:
            if s == src:
                return p
        raise ProtocolError(f"site {self.site} expected a message from {src} in round {self.round}")

    def wait_for(self, srcs) -> Iterator[None]:
        """Generator: end the current round, then keep yielding until at least
        one message from each of ``srcs`` has arrived.

        Use as ``got = yield from ctx.wait_for([0])``; returns {src: [payloads]}
        holding every payload from ``srcs`` seen while waiting.
        """
        wanted = set(srcs)
        need = set(wanted)
        got: dict[int, list] = {}
        while need:
            yield
            for s, p in self.inbox:
                if s in wanted:
                    got.setdefault(s, []).append(p)
                    need.discard(s)
        return got


class Protocol:
    """Base class for protocols run by :func:`run_protocol`.

    Subclasses set ``name`` and ``instance_type`` and implement ``split``
    (public parameters plus one private input per site) and ``program``
    (a generator; each ``yield`` ends the site's current round).  The
    answer of a run is the return value of site 0's program.
    """

    name = "protocol"
    instance_type: type | tuple = object

    def check(self, inst) -> None:
        if not isinstance(inst, self.instance_type):
            raise UsageError(f"{self.name} needs {self.instance_type}, got {type(inst).__name__}")

    def split(self, inst) -> tuple[Any, list]:
        raise NotImplementedError

    def program(self, ctx: SiteContext):
        raise NotImplementedError

    def round_scale(self, inst) -> int:
        return getattr(inst, "n", None) or getattr(inst, "r", 1)


@dataclass
class RunResult:
    answer: Any
    ledger: CostLedger
    transcript: Transcript
    rounds: int = 0
    extras: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.answer
        yield self.ledger


class _Network:
    def __init__(self, k: int, coordinator: bool, record: bool):
        self.k = k
        self.coordinator = coordinator
        self.ledger = CostLedger(k)
        self.transcript = Transcript()
        self.record = record
        self.round = 0
        self.pending: list[list] = [[] for _ in range(k)]

    def send(self, src: int, dst: int, payload) -> None:
        if src == dst:
            raise UsageError(f"site {src} cannot send to itself")
        if not (0 <= dst < self.k):
            raise UsageError(f"invalid destination site {dst}")
        nbits = payload.bits
        if self.coordinator:
            # site -> coordinator -> site; the coordinator forwards in the same round
            hub = self.k
            self.ledger.charge(src, hub, nbits)
            self.ledger.charge(hub, dst, nbits)
            if self.record:
                self.transcript.append(Message(self.round, src, hub, payload))
                self.transcript.append(Message(self.round, hub, dst, payload))
        else:
            self.ledger.charge(src, dst, nbits)
            if self.record:
                self.transcript.append(Message(self.round, src, dst, payload))
        self.pending[dst].append((src, payload))


def default_round_limit(scale: int) -> int:
    env = os.environ.get("MSGPASS_ROUND_LIMIT")
    if env:
        return int(env)
    return 10 * max(1, scale)


def run_protocol(proto: Protocol, inst, seed: int = 0, *, coordinator: bool = False,
                 round_limit: int | None = None, record: bool = True) -> RunResult:
    """Execute ``proto`` on ``inst``; a pure function of (proto, inst, seed)."""
    proto.check(inst)
    public, inputs = proto.split(inst)
    k = len(inputs)
    if k < 1:
        raise UsageError("a run needs at least one site")
    limit = round_limit if round_limit is not None else default_round_limit(proto.round_scale(inst))
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF

    net = _Network(k, coordinator, record)
    ctxs = [SiteContext(i, k, public, inputs[i], seed, net) for i in range(k)]
    gens = [proto.program(c) for c in ctxs]
    alive = [True] * k
    answer = None
    done = False
    rnd = 0
    while not done:
        rnd += 1
        if rnd > limit:
            raise DivergenceError(f"{proto.name} exceeded {limit} rounds")
        net.round = rnd
        inboxes, net.pending = net.pending, [[] for _ in range(k)]
        for i in range(k):
            if not alive[i]:
                continue
            c = ctxs[i]
            c.round = rnd
            c.inbox = inboxes[i]
            c._rng = None
            try:
                next(gens[i])
            except StopIteration as stop:
                alive[i] = False
                if i == 0:
                    answer = stop.value
                    done = True
        if not any(alive):
            done = True
    for i in range(k):
        if alive[i]:
            gens[i].close()
    return RunResult(answer, net.ledger, net.transcript, rnd)
