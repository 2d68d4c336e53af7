"""F0 and l-infinity protocols over set families."""
from __future__ import annotations

from collections import Counter

from ..answers import ArgMax, Count
from ..instances import SetFamilyInstance
from ..kernel import Composite, ElementList, Protocol, UInt, run_protocol

# Mersenne prime modulus for the hash family; far above any (F0')^3 we meet
HASH_PRIME = (1 << 89) - 1


class EmptyInputError(ValueError):
    """Every set is empty, so there is no maximum-frequency element."""


def hash_element(x: int, a: int, b: int, universe: int) -> int:
    return ((a * x + b) % HASH_PRIME) % universe


class _SetProtocol(Protocol):
    instance_type = SetFamilyInstance

    def split(self, inst):
        return {"n": inst.n}, list(inst.sets)


class F0Baseline(_SetProtocol):
    """Sites 2..k ship their raw sets to P_1, which counts the union."""
    name = "f0_baseline"

    def program(self, ctx):
        n = ctx.public["n"]
        if ctx.site != 0:
            ctx.send(0, ElementList([e - 1 for e in ctx.input], n, n))
            return
        got = yield from ctx.wait_for(range(1, ctx.k))
        union = set(ctx.input)
        for payloads in got.values():
            for p in payloads:
                union.update(e + 1 for e in p.ids)
        return Count(len(union))


class F0Hashed(_SetProtocol):
    """Two phases.  First every site reports |S_i| and P_1 takes
    F0' = sum |S_i| >= F0.  P_1 then broadcasts a hash seed and F0', and
    each site ships its distinct hashed elements in a universe of size
    (F0')^3.  The count is exact unless two union elements collide."""
    name = "f0_hashed"

    def program(self, ctx):
        n, k = ctx.public["n"], ctx.k
        if ctx.site != 0:
            ctx.send(0, UInt(len(ctx.input), n))
            got = yield from ctx.wait_for([0])
            a, b, f0p = (p.value for p in got[0][0].parts)
            universe = f0p ** 3
            hashed = sorted({hash_element(x, a, b, universe) for x in ctx.input})
            ctx.send(0, ElementList(hashed, universe, n))
            return

        if k == 1:
            return Count(len(ctx.input))
        got = yield from ctx.wait_for(range(1, k))
        f0p = len(ctx.input) + sum(p.value for ps in got.values() for p in ps)
        if f0p == 0:
            return Count(0)
        universe = f0p ** 3
        a = 1 + int.from_bytes(ctx.rng.bytes(16), "big") % (HASH_PRIME - 1)
        b = int.from_bytes(ctx.rng.bytes(16), "big") % HASH_PRIME
        ctx.broadcast(Composite([UInt(a, HASH_PRIME - 1), UInt(b, HASH_PRIME - 1), UInt(f0p, k * n)]))
        seen = {hash_element(x, a, b, universe) for x in ctx.input}
        got = yield from ctx.wait_for(range(1, k))
        for ps in got.values():
            for p in ps:
                seen.update(p.ids)
        return Count(len(seen))


class LinftyCounts(_SetProtocol):
    """Sites ship their element lists; P_1 returns the most frequent element,
    smallest id first among ties."""
    name = "linfty_counts"

    def program(self, ctx):
        n = ctx.public["n"]
        if ctx.site != 0:
            ctx.send(0, ElementList([e - 1 for e in ctx.input], n, n))
            return
        got = yield from ctx.wait_for(range(1, ctx.k))
        freq = Counter(ctx.input)
        for ps in got.values():
            for p in ps:
                freq.update(e + 1 for e in p.ids)
        if not freq:
            raise EmptyInputError("all sets are empty")
        best = max(freq.values())
        return ArgMax(min(e for e, c in freq.items() if c == best), best)


def f0_baseline(inst, seed=0, **kw):
    return run_protocol(F0Baseline(), inst, seed, **kw)


def f0_hashed(inst, seed=0, **kw):
    return run_protocol(F0Hashed(), inst, seed, **kw)


def linfty_counts(inst, seed=0, **kw):
    return run_protocol(LinftyCounts(), inst, seed, **kw)


def hash_params(run) -> tuple[int, int, int] | None:
    """(a, b, universe) broadcast during an f0_hashed run, if any."""
    for m in run.transcript:
        if isinstance(m.payload, Composite):
            a, b, f0p = (p.value for p in m.payload.parts)
            return a, b, f0p ** 3
    return None


def hash_collision(inst: SetFamilyInstance, run) -> bool:
    """Whether the hash drawn in ``run`` maps two distinct union elements together."""
    params = hash_params(run)
    if params is None:
        return False
    union = set().union(*inst.sets)
    return len({hash_element(x, *params) for x in union}) < len(union)
