"""Experiment harness: instance generation, oracle-checked runs, verification
campaigns, cost sweeps and the l-infinity reduction experiment.

Every function here is importable; :func:`main` wraps them as a CLI.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import distributions as D
from . import oracle as O
from .answers import ArgMax, Bool, CCCount, Count, Degree, Diameter, ElementSet, answer_to_json
from .instances import (DisjInstance, GraphPartitionInstance, SetFamilyInstance, ThreshInstance,
                        dump, load, to_json, validate)
from .kernel import DivergenceError, UsageError, run_protocol
from .protocols import CATALOG, hash_collision, linfty_counts, make

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_DIVERGE = 0, 2, 3, 4

EXACT = {"f0_baseline", "linfty_counts", "degree_nodup", "degree_dup", "cycle_free_nodup",
         "cycle_free_dup", "connectivity", "num_cc", "bfs_tree", "bipartiteness", "triangle_free"}

SIGMA_DISTS = ("sigma-f", "sigma-l", "sigma-c1", "sigma-c2", "sigma-n1", "sigma-n2",
               "sigma-b1", "sigma-b2", "sigma-t1", "sigma-t2", "sigma-deg")
DISTS = ("disj", "zeta", "ordisj", "sets", "graph") + SIGMA_DISTS


def derive_seed(root: int, *path: int) -> int:
    """Per-trial seed from the root seed and an index path."""
    ss = np.random.SeedSequence([int(root) & 0xFFFFFFFFFFFFFFFF, *[int(p) for p in path]])
    return int(ss.generate_state(1, np.uint64)[0])


_BUILD_ID = None


def build_id() -> str:
    global _BUILD_ID
    if _BUILD_ID is None:
        try:
            out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                                 text=True, timeout=5, cwd=Path(__file__).resolve().parent)
            desc = out.stdout.strip() if out.returncode == 0 else ""
        except (OSError, subprocess.SubprocessError):
            desc = ""
        _BUILD_ID = f"msgpass-{__version__}" + (f"+{desc}" if desc else "")
    return _BUILD_ID


# ---------------------------------------------------------------------------
# instances


def make_instance(dist: str, *, k: int = 8, n: int | None = None, r: int | None = None,
                  m: int | None = None, p: float | None = None, beta: float = 0.25,
                  dup: bool = False, density: float = 0.3, seed: int = 0):
    """One instance of distribution ``dist``; see DISTS."""
    if dist == "disj":
        return D.sample_disj(r or 127, beta, seed)
    if dist == "ordisj":
        return D.sample_or_disj(k, r or 127, seed)
    if dist == "zeta":
        return D.sample_zeta(k, r or 127, seed)
    if dist == "sets":
        return D.random_set_family(k, n or 64, density, seed)
    if dist == "graph":
        n = n or 50
        if m is None and p is None:
            p = 0.1
        return D.random_graph_partition(n, k, p=p, m=m, dup=dup, seed=seed)
    if dist in ("sigma-c1", "sigma-t1"):
        d = D.sample_disj(r or 127, beta, seed)
        return D.build_cycle_2party(d) if dist == "sigma-c1" else D.build_triangle_2party(d, n)
    if dist in SIGMA_DISTS:
        t = D.sample_zeta(k, r or 127, seed)
        if dist == "sigma-f":
            return D.build_f0_instance(t)
        if dist == "sigma-l":
            return D.build_linfty_instance(t, derive_seed(seed, 1))[0]
        if dist == "sigma-deg":
            return D.build_degree_instance(D.build_f0_instance(t))
        build = {"sigma-c2": D.build_cycle_k, "sigma-n1": D.build_connectivity_nodup,
                 "sigma-n2": D.build_connectivity_dup, "sigma-b1": D.build_bipartite_nodup,
                 "sigma-b2": D.build_bipartite_dup, "sigma-t2": D.build_triangle_k}[dist]
        return build(t, n) if dist == "sigma-t2" else build(t)
    raise UsageError(f"unknown distribution {dist!r}; known: {', '.join(DISTS)}")


def instance_size(inst) -> tuple:
    """(k, n, m) for reports; m is -1 where it has no meaning."""
    if isinstance(inst, GraphPartitionInstance):
        return inst.k, inst.n, inst.m
    if isinstance(inst, SetFamilyInstance):
        return inst.k, inst.n, sum(len(s) for s in inst.sets)
    if isinstance(inst, ThreshInstance):
        return inst.k, inst.r, int(inst.matrix.sum())
    if isinstance(inst, DisjInstance):
        return 2, inst.r, -1
    return getattr(inst, "k", -1), getattr(inst, "r", -1), -1


# ---------------------------------------------------------------------------
# oracle comparison


def oracle_answer(name: str, inst, **params):
    if name in ("f0_baseline", "f0_hashed"):
        return Count(O.oracle_f0(inst))
    if name == "linfty_counts":
        return ArgMax(*O.oracle_linfty(inst))
    if name in ("degree_nodup", "degree_dup"):
        return Degree(O.oracle_degree(inst, params.get("v", 1)))
    if name in ("cycle_free_nodup", "cycle_free_dup"):
        return Bool(not O.oracle_has_cycle(inst))
    if name == "connectivity":
        return Bool(O.oracle_connected(inst))
    if name == "num_cc":
        return CCCount(O.oracle_num_cc(inst))
    if name == "bfs_tree":
        dist = O.bfs_distances(inst, params.get("root", 1))
        return {v: int(d) for v, d in enumerate(dist) if v > 0 and d != O.INF}
    if name == "bipartiteness":
        return Bool(O.oracle_bipartite(inst))
    if name == "triangle_free":
        return Bool(O.oracle_triangle_free(inst))
    if name == "reconstruct_y":
        return ElementSet(tuple(inst.witness_Y or ()))
    if name == "diameter_additive2":
        return Diameter(O.oracle_diameter(inst))
    raise UsageError(f"no oracle for {name!r}")


def answers_match(name: str, answer, expected, inst=None) -> bool:
    """Equality under the protocol's exactness contract."""
    if name == "bfs_tree":
        if answer.layer != expected:
            return False
        edges = inst.edge_set() if inst is not None else None
        for c, par in answer.parent.items():
            if answer.layer[par] != answer.layer[c] - 1:
                return False
            if edges is not None and (min(c, par), max(c, par)) not in edges:
                return False
        return True
    if name == "diameter_additive2":
        a, b = answer.value, expected.value
        if math.isinf(b) or math.isinf(a):
            return math.isinf(a) and math.isinf(b)
        return 0 <= a - b <= 2
    return answer == expected


def _expected_json(expected):
    if isinstance(expected, dict):
        return {"layer": {str(v): d for v, d in sorted(expected.items())}}
    return answer_to_json(expected)


@dataclass
class RunReport:
    protocol: str
    instance: dict
    answer: object
    oracle: object
    match: bool
    ledger: dict
    rounds: int
    seed: int
    params: dict = field(default_factory=dict)
    wall_time: float = 0.0
    build: str = ""

    def to_json(self) -> dict:
        return {"format": 1, "protocol": self.protocol, "params": self.params, "seed": self.seed,
                "instance": self.instance, "answer": answer_to_json(self.answer),
                "oracle": _expected_json(self.oracle), "match": self.match,
                "ledger": self.ledger, "rounds": self.rounds, "build": self.build,
                "wall_time": self.wall_time}


def run_report(name: str, inst, seed: int = 0, coordinator: bool = False, **params) -> RunReport:
    proto = make(name, **params)
    t0 = time.perf_counter()
    res = run_protocol(proto, inst, seed, coordinator=coordinator)
    wall = time.perf_counter() - t0
    expected = oracle_answer(name, inst, **params)
    k, n, m = instance_size(inst)
    meta = {"type": to_json(inst)["type"], "k": k, "n": n, "m": m,
            "distribution": inst.meta.get("distribution") or inst.meta.get("reduction"),
            "seed": inst.meta.get("seed", inst.meta.get("source", {}).get("seed"))}
    return RunReport(name, meta, res.answer, expected, answers_match(name, res.answer, expected, inst),
                     res.ledger.to_json(), res.rounds, seed, dict(params), wall, build_id())


# ---------------------------------------------------------------------------
# verification


def small_partitions(n: int, k: int, dup: bool = False):
    """Every assignment of every graph on n vertices to k sites.

    Without duplication an edge is absent or owned by one site; with
    duplication it is absent or held by a nonempty subset of sites."""
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    if dup:
        choices = [()] + [c for size in range(1, k + 1) for c in itertools.combinations(range(k), size)]
    else:
        choices = [()] + [(i,) for i in range(k)]
    for assign in itertools.product(choices, repeat=len(pairs)):
        local = [[] for _ in range(k)]
        for e, owners in zip(pairs, assign):
            for i in owners:
                local[i].append(e)
        yield GraphPartitionInstance(n, local, dup)


GRAPH_PROTOCOLS = ("degree_nodup", "degree_dup", "cycle_free_nodup", "cycle_free_dup",
                   "connectivity", "num_cc", "bfs_tree", "bipartiteness", "triangle_free",
                   "diameter_additive2")
NODUP_ONLY = ("degree_nodup", "cycle_free_nodup")


def random_instance_for(name: str, seed: int, max_n: int = 200, max_k: int = 16):
    """A random instance suited to protocol ``name``; small sizes are favoured."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, max_k + 1))
    n = int(round(math.exp(rng.uniform(math.log(2), math.log(max_n)))))
    if name in ("f0_baseline", "f0_hashed", "linfty_counts"):
        inst = D.random_set_family(k, n, float(rng.uniform(0.02, 0.6)), derive_seed(seed, 1))
        if name == "linfty_counts" and not any(inst.sets):
            inst = SetFamilyInstance(n, [[1]] + list(inst.sets[1:]), inst.meta)
        return inst, {}
    if name == "reconstruct_y":
        r = 4 * int(rng.integers(2, 16)) - 1
        return D.sample_zeta(64, r, derive_seed(seed, 1)), {"c_y": 16}
    dup = False if name in NODUP_ONLY else bool(rng.integers(2))
    avg_deg = float(rng.uniform(0.2, 6.0))
    p = min(1.0, avg_deg / max(1, n - 1))
    inst = D.random_graph_partition(n, k, p=p, dup=dup, seed=derive_seed(seed, 1))
    params = {}
    if name in ("degree_nodup", "degree_dup"):
        params["v"] = int(rng.integers(1, n + 1))
    if name == "bfs_tree":
        params["root"] = int(rng.integers(1, n + 1))
    return inst, params


def check_one(name: str, inst, seed: int = 0, protocol=None, **params) -> dict:
    """Run one instance; returns {'match', 'answer', 'expected', 'bits', 'collision'}."""
    proto = protocol if protocol is not None else make(name, **params)
    res = run_protocol(proto, inst, seed)
    expected = oracle_answer(name, inst, **params)
    ok = answers_match(name, res.answer, expected, inst)
    out = {"match": ok, "answer": res.answer, "expected": expected,
           "bits": res.ledger.total_bits, "messages": res.ledger.total_messages, "collision": False}
    if name == "f0_hashed" and not ok:
        # a mismatch must be explained by a collision and vanish with a fresh seed
        collided = hash_collision(inst, res)
        rerun = run_protocol(proto, inst, derive_seed(seed, 99))
        out["collision"] = collided and rerun.answer == expected
    return out


def verify(name: str, trials: int = 100, seed: int = 0, max_n: int = 200, max_k: int = 16,
           exhaustive_n: int = 4, exhaustive_k: int = 2, protocol_factory=None) -> dict:
    """Randomized plus exhaustive-small campaign for one protocol.

    ``protocol_factory(**params)`` substitutes the protocol under test
    (used to check that a faulty build is caught)."""
    if name not in CATALOG:
        raise UsageError(f"unknown protocol {name!r}; known: {', '.join(sorted(CATALOG))}")
    factory = protocol_factory or (lambda **kw: make(name, **kw))
    summary = {"protocol": name, "trials": 0, "exhaustive": 0, "mismatches": 0,
               "collisions": 0, "unexplained": 0, "examples": []}

    def record(inst, res, params):
        if res["match"]:
            return
        summary["mismatches"] += 1
        if res["collision"]:
            summary["collisions"] += 1
            return
        summary["unexplained"] += 1
        if len(summary["examples"]) < 5:
            summary["examples"].append({"instance": to_json(inst), "params": params,
                                        "answer": answer_to_json(res["answer"]),
                                        "expected": _expected_json(res["expected"])})

    if name in GRAPH_PROTOCOLS and name != "diameter_additive2":
        for n in range(1, exhaustive_n + 1):
            for k in range(1, exhaustive_k + 1):
                for inst in small_partitions(n, k):
                    targets = range(1, n + 1) if name in ("degree_nodup", "degree_dup", "bfs_tree") else [None]
                    for v in targets:
                        params = {} if v is None else ({"root": v} if name == "bfs_tree" else {"v": v})
                        res = check_one(name, inst, 0, factory(**params), **params)
                        summary["exhaustive"] += 1
                        record(inst, res, params)

    for t in range(trials):
        inst, params = random_instance_for(name, derive_seed(seed, t), max_n, max_k)
        res = check_one(name, inst, derive_seed(seed, t, 7), factory(**params), **params)
        summary["trials"] += 1
        record(inst, res, params)

    exact = name in EXACT
    summary["pass"] = summary["unexplained"] == 0 and (exact or name == "f0_hashed" or summary["mismatches"] == 0)
    if name == "reconstruct_y":
        summary["pass"] = summary["mismatches"] <= 0.01 * max(1, summary["trials"])
    return summary


# ---------------------------------------------------------------------------
# sweeps


SWEEP_COLUMNS = ["protocol", "k", "n", "m", "dist", "trials", "mean_bits", "max_bits",
                 "mean_msgs", "match_rate"]


@dataclass
class SweepSpec:
    protocol: str
    dist: str
    ks: list
    ns: list = field(default_factory=lambda: [None])
    rs: list = field(default_factory=lambda: [None])
    ms: list = field(default_factory=lambda: [None])
    trials: int = 10
    dup: bool = False
    seed: int = 0
    params: dict = field(default_factory=dict)

    def grid(self):
        return list(itertools.product(self.ks, self.ns, self.rs, self.ms))


def sweep(spec: SweepSpec) -> list[dict]:
    if spec.protocol not in CATALOG:
        raise UsageError(f"unknown protocol {spec.protocol!r}")
    grid = spec.grid()
    if not grid or spec.trials < 1:
        raise UsageError("sweep grid is empty or trials < 1")
    rows = []
    for gi, (k, n, r, m) in enumerate(grid):
        bits, msgs, matches, sizes = [], [], 0, []
        for t in range(spec.trials):
            s = derive_seed(spec.seed, gi, t)
            inst = make_instance(spec.dist, k=k, n=n, r=r, m=m, dup=spec.dup, seed=s)
            res = check_one(spec.protocol, inst, derive_seed(s, 5), **spec.params)
            bits.append(res["bits"])
            msgs.append(res["messages"])
            matches += res["match"]
            sizes.append(instance_size(inst))
        rows.append({"protocol": spec.protocol, "k": sizes[0][0], "n": sizes[0][1],
                     "m": round(float(np.mean([s[2] for s in sizes])), 2), "dist": spec.dist,
                     "trials": spec.trials, "mean_bits": float(np.mean(bits)),
                     "max_bits": int(max(bits)), "mean_msgs": float(np.mean(msgs)),
                     "match_rate": matches / spec.trials})
    return rows


def write_csv(rows, path) -> None:
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow(row)
    finally:
        if out is not sys.stdout:
            out.close()


# ---------------------------------------------------------------------------
# l-infinity reduction experiment


def linfty_decide(t: ThreshInstance, reps: int, seed: int) -> dict:
    """Apply the bit-flip reduction ``reps`` times and the rule
    "some repetition has max frequency >= |R| + 1"."""
    Y = set(t.witness_Y or ())
    for rep in range(reps):
        sf, R = D.build_linfty_instance(t, derive_seed(seed, rep))
        ans = linfty_counts(sf).answer
        if ans.frequency >= len(R) + 1:
            return {"decision": 1, "repetition": rep, "argmax_in_Y": ans.element in Y}
    return {"decision": 0, "repetition": None, "argmax_in_Y": None}


def linfty_experiment(k: int = 64, n: int = 127, c_T: float = 8, trials: int = 500,
                      seed: int = 0) -> dict:
    """``trials`` zeta instances of each THRESH value (rejection sampled),
    decided through ``ceil(c_T log2 k)`` flipped l-infinity runs each."""
    if c_T <= 0:
        raise UsageError("c_T must be positive")
    if trials < 1:
        raise UsageError("trials must be >= 1")
    reps = max(1, math.ceil(c_T * math.log2(k)))
    out = {"k": k, "n": n, "c_T": c_T, "T": reps, "trials": trials, "seed": seed}
    for value, label in ((1, "positives"), (0, "negatives")):
        hits, outside, uncovered = 0, 0, 0
        for i in range(trials):
            t, _ = D.sample_zeta_conditioned(k, n, value, derive_seed(seed, value, i))
            uncovered += not t.meta["coverage"]
            d = linfty_decide(t, reps, derive_seed(seed, value, i, 1))
            hits += d["decision"]
            if d["decision"] and not d["argmax_in_Y"]:
                outside += 1
        out[label] = {"decided_one": hits, "rate": hits / trials,
                      "max_column_outside_Y": outside, "coverage_failures": uncovered}
    out["detection_rate"] = out["positives"]["rate"]
    out["false_positive_rate"] = out["negatives"]["rate"]
    return out


# ---------------------------------------------------------------------------
# CLI


def _ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="msgpass", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write sampled instances as JSON files")
    g.add_argument("--dist", required=True, choices=DISTS)
    g.add_argument("--k", type=int, default=8)
    g.add_argument("--n", type=int)
    g.add_argument("--r", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--beta", type=float, default=0.25)
    g.add_argument("--dup", choices=("on", "off"), default="off")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--trials", type=int, default=1)
    g.add_argument("--theta-check", action="store_true",
                   help="record eval_thresh of zeta-based sources in meta")
    g.add_argument("--out", default=".")

    r = sub.add_parser("run", help="run one protocol on an instance file and compare to the oracle")
    r.add_argument("protocol")
    r.add_argument("instance")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--v", type=int, help="query vertex (degree)")
    r.add_argument("--root", type=int, help="BFS root")
    r.add_argument("--c-y", type=int, dest="c_y")
    r.add_argument("--coordinator", action="store_true")
    r.add_argument("--transcript", help="write the transcript lines to this file")

    v = sub.add_parser("verify", help="randomized + exhaustive-small oracle campaign")
    v.add_argument("protocol")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--n", type=int, default=200, help="largest n of random instances")
    v.add_argument("--k", type=int, default=16, help="largest k of random instances")

    s = sub.add_parser("sweep", help="cost table over a parameter grid, as CSV")
    s.add_argument("protocol")
    s.add_argument("--dist", required=True, choices=DISTS)
    s.add_argument("--k", type=_ints, required=True)
    s.add_argument("--n", type=_ints)
    s.add_argument("--r", type=_ints)
    s.add_argument("--m", type=_ints)
    s.add_argument("--dup", choices=("on", "off"), default="off")
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="-")

    e = sub.add_parser("linfty-experiment", help="l-infinity reduction decision-rule experiment")
    e.add_argument("--k", type=int, default=64)
    e.add_argument("--n", type=int, default=127)
    e.add_argument("--c-T", type=float, default=8, dest="c_T")
    e.add_argument("--trials", type=int, default=500)
    e.add_argument("--seed", type=int, default=0)
    return ap


def _cmd_gen(a) -> int:
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(a.trials):
        s = derive_seed(a.seed, i)
        inst = make_instance(a.dist, k=a.k, n=a.n, r=a.r, m=a.m, beta=a.beta,
                             dup=a.dup == "on", seed=s)
        if a.theta_check and a.dist in ("zeta",) + SIGMA_DISTS and a.dist not in ("sigma-c1", "sigma-t1"):
            src = D.sample_zeta(a.k, a.r or 127, s)
            inst.meta["eval_thresh"] = D.eval_thresh(src)
        bad = validate(inst)
        if bad:
            print(f"generated invalid instance: {bad}", file=sys.stderr)
            return EXIT_VERIFY
        dump(inst, out / f"{a.dist}_{i:04d}.json")
    print(f"wrote {a.trials} instance(s) to {out}")
    return EXIT_OK


def _cmd_run(a) -> int:
    inst = load(a.instance)
    params = {key: getattr(a, key) for key in ("v", "root", "c_y") if getattr(a, key) is not None}
    if a.protocol not in CATALOG:
        raise UsageError(f"unknown protocol {a.protocol!r}; known: {', '.join(sorted(CATALOG))}")
    params = {key: val for key, val in params.items() if key in CATALOG[a.protocol][1]}
    rep = run_report(a.protocol, inst, a.seed, a.coordinator, **params)
    if a.transcript:
        res = run_protocol(make(a.protocol, **params), inst, a.seed, coordinator=a.coordinator)
        Path(a.transcript).write_text(res.transcript.dumps())
    print(json.dumps(rep.to_json(), sort_keys=True))
    return EXIT_OK


def _cmd_verify(a) -> int:
    summary = verify(a.protocol, a.trials, a.seed, a.n, a.k)
    print(json.dumps(summary, sort_keys=True, default=str))
    return EXIT_OK if summary["pass"] else EXIT_VERIFY


def _cmd_sweep(a) -> int:
    spec = SweepSpec(a.protocol, a.dist, a.k, a.n or [None], a.r or [None], a.m or [None],
                     a.trials, a.dup == "on", a.seed)
    write_csv(sweep(spec), a.out)
    return EXIT_OK


def _cmd_linfty(a) -> int:
    print(json.dumps(linfty_experiment(a.k, a.n, a.c_T, a.trials, a.seed), sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    ap = _parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    handler = {"gen": _cmd_gen, "run": _cmd_run, "verify": _cmd_verify, "sweep": _cmd_sweep,
               "linfty-experiment": _cmd_linfty}[a.cmd]
    try:
        return handler(a)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as e:
        print(f"divergence: {e}", file=sys.stderr)
        return EXIT_DIVERGE


if __name__ == "__main__":
    sys.exit(main())
