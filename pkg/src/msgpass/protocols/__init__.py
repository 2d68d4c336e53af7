"""Protocol catalog."""
from .graph import (BfsTree, Bipartiteness, Connectivity, CycleFreeDup, CycleFreeNoDup,
                    DegreeDup, DegreeNoDup, DiameterAdditive2, NumCC, ReconstructY,
                    TriangleFree, bfs_tree, bipartiteness, connectivity, cycle_free_dup,
                    cycle_free_nodup, degree_dup, degree_nodup, diameter_additive2, num_cc,
                    reconstruct_y, spanning_forest, triangle_free)
from .stat import (EmptyInputError, F0Baseline, F0Hashed, LinftyCounts, f0_baseline,
                   f0_hashed, hash_collision, linfty_counts)

# name -> (protocol factory taking keyword parameters, parameter names)
CATALOG = {
    "f0_baseline": (lambda **kw: F0Baseline(), ()),
    "f0_hashed": (lambda **kw: F0Hashed(), ()),
    "linfty_counts": (lambda **kw: LinftyCounts(), ()),
    "degree_nodup": (lambda v=1, **kw: DegreeNoDup(v), ("v",)),
    "degree_dup": (lambda v=1, **kw: DegreeDup(v), ("v",)),
    "cycle_free_nodup": (lambda **kw: CycleFreeNoDup(), ()),
    "cycle_free_dup": (lambda **kw: CycleFreeDup(), ()),
    "connectivity": (lambda **kw: Connectivity(), ()),
    "num_cc": (lambda **kw: NumCC(), ()),
    "bfs_tree": (lambda root=1, **kw: BfsTree(root), ("root",)),
    "bipartiteness": (lambda **kw: Bipartiteness(), ()),
    "triangle_free": (lambda **kw: TriangleFree(), ()),
    "reconstruct_y": (lambda c_y=16, **kw: ReconstructY(c_y), ("c_y",)),
    "diameter_additive2": (lambda c_s=3.0, **kw: DiameterAdditive2(c_s), ("c_s",)),
}


def make(name: str, **params):
    from ..kernel import UsageError
    if name not in CATALOG:
        raise UsageError(f"unknown protocol {name!r}; known: {', '.join(sorted(CATALOG))}")
    return CATALOG[name][0](**params)
