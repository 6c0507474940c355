"""Iterated L-level decomposition of point-cloud attributes.

Each level builds a fresh KNN graph on the current points, forms the
variation operator and its block-diagonal Q from a random bipartition,
runs one analysis step, and recurses on the low-pass (A-side) points.
The bipartite baseline additionally drops within-side edges and switches
to the normalized Laplacian with Q = I.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import filterbank as fb
from . import graphs as gb
from .sparse_core import NotPositiveDefinite, load_matrix_market, save_matrix_market

MIN_LEVEL_POINTS = 4


@dataclass
class LevelRecord:
    partition: gb.Partition
    adjacency: sp.csr_array  # graph actually filtered (post-bipartize for BFB)
    details: np.ndarray  # (|B|, c)


@dataclass
class DecompositionTree:
    levels: list  # of LevelRecord, level 0 is the finest
    root: np.ndarray  # (m, c) approximation coefficients
    meta: dict = field(default_factory=dict)

    @property
    def coefficient_count(self):
        return self.root.shape[0] + sum(lv.details.shape[0] for lv in self.levels)


def _spec_from_meta(meta):
    spec = fb.FilterBankSpec.from_json(meta["spec"])
    if meta.get("zero_dc"):
        spec = fb.zero_dc_wrap(spec)
    return spec


def _level_context(adjacency, partition, meta):
    g = gb.Graph(adjacency)
    if meta["operator"] == "norm":
        m = gb.normalized_laplacian(g, allow_isolated=meta["baseline"])
    else:
        m = gb.combinatorial_laplacian(g)
    return fb.make_context(
        m,
        partition,
        mode=meta["mode"],
        solver_mode=meta.get("solver", "direct"),
        solver_tol=meta.get("solver_tol", 1e-10),
        degrees=gb.degrees(g),
    )


def decompose(pc, spec, k, levels, seed, operator="comb", baseline=False,
              mode=None, solver_mode="direct", solver_tol=1e-10):
    """Run the iterated analysis filter-bank on the attribute channels."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if pc.channels < 1:
        raise ValueError("point cloud has no attribute channels")
    zero_dc = isinstance(spec, fb.ZeroDcSpec)
    base_spec = spec.base if zero_dc else spec
    if mode is None:
        mode = base_spec.mode
    if baseline and operator != "norm":
        operator = "norm"  # BFB semantics: normalized Laplacian, Q = I
    meta = {
        "n": pc.n,
        "channels": pc.channels,
        "L": levels,
        "k": k,
        "seed": seed,
        "operator": operator,
        "baseline": bool(baseline),
        "mode": mode,
        "solver": solver_mode,
        "solver_tol": solver_tol,
        "spec": base_spec.to_json(),
        "zero_dc": zero_dc,
        "family": base_spec.family,
        "min_level_points": MIN_LEVEL_POINTS,
        "stopped_early_at": None,
    }
    seeds = np.random.SeedSequence(seed).spawn(levels)
    pos = pc.positions
    x = pc.attributes
    records = []
    for ell in range(levels):
        n = pos.shape[0]
        if n < MIN_LEVEL_POINTS or n <= k:
            meta["stopped_early_at"] = ell
            break
        g_full = gb.knn_graph(gb.PointCloud(pos, np.empty((n, 0))), k)
        # a partition that strands a whole connected component on one side
        # makes Q singular; resample a bounded number of times
        candidates = [seeds[ell]] + seeds[ell].spawn(19)
        for cand in candidates:
            p = gb.random_partition(n, cand)
            g = gb.bipartize(g_full, p) if baseline else g_full
            try:
                ctx = _level_context(g.adjacency, p, meta)
            except NotPositiveDefinite:
                continue
            break
        else:
            raise NotPositiveDefinite(
                f"no usable partition at level {ell} after 20 attempts"
            )
        coeffs = fb.analyze(spec, ctx, x)
        records.append(LevelRecord(partition=p, adjacency=g.adjacency,
                                   details=np.atleast_2d(coeffs.d)))
        pos = pos[p.a_idx]
        x = coeffs.a
        if zero_dc:
            # hand the low-pass back in the signal domain so the degree
            # scaling telescopes across levels
            x = (x.T / np.sqrt(ctx.degree_scale[p.a_idx])).T
    return DecompositionTree(levels=records, root=np.atleast_2d(x), meta=meta)


def reconstruct(tree):
    """Invert decompose level-by-level from the root upward."""
    meta = tree.meta
    spec = _spec_from_meta(meta)
    x = tree.root
    for lv in reversed(tree.levels):
        ctx = _level_context(lv.adjacency, lv.partition, meta)
        if meta.get("zero_dc"):
            x = (x.T * np.sqrt(ctx.degree_scale[lv.partition.a_idx])).T
        x = fb.synthesize(spec, ctx, fb.ChannelCoefficients(a=x, d=lv.details))
    return x


@dataclass
class ApproximationResult:
    keep: float  # requested fraction
    m_over_n: float  # realized fraction from partition sizes
    attributes: np.ndarray
    psnr: np.ndarray  # per channel, dB


def psnr(x, y, peak=255.0, cap=999.0):
    """Per-channel 10 log10(peak^2 / MSE); exact match reports the cap."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape:
        raise ValueError("shape mismatch")
    mse = np.mean((x - y) ** 2, axis=0)
    out = np.full(mse.shape, cap)
    nz = mse > 0
    out[nz] = np.minimum(10.0 * np.log10(peak**2 / mse[nz]), cap)
    return out


def linear_approximation(tree, keep, original, peak=255.0):
    """Reconstruct keeping only coefficients at and below a cutoff scale.

    keep is a nominal fraction from {2^-L, ..., 1/2, 1}: the j finest
    detail levels are zeroed where keep = 2^-j.  The realized m/n comes
    from actual partition sizes.
    """
    if not (0 < keep <= 1):
        raise ValueError("keep must be in (0, 1]")
    j = int(round(-np.log2(keep)))
    j = min(j, len(tree.levels))
    zeroed = 0
    levels = []
    for i, lv in enumerate(tree.levels):
        d = lv.details
        if i < j:
            d = np.zeros_like(d)
            zeroed += lv.details.shape[0]
        levels.append(LevelRecord(lv.partition, lv.adjacency, d))
    clipped = DecompositionTree(levels=levels, root=tree.root, meta=tree.meta)
    rec = reconstruct(clipped)
    n = tree.meta["n"]
    return ApproximationResult(
        keep=keep,
        m_over_n=(n - zeroed) / n,
        attributes=rec,
        psnr=psnr(original, rec, peak=peak),
    )


# ---------------------------------------------------------------------------
# Tree serialization (directory layout)

def save_tree(tree, path):
    os.makedirs(path, exist_ok=True)
    for i, lv in enumerate(tree.levels):
        d = os.path.join(path, f"level_{i:02d}")
        os.makedirs(d, exist_ok=True)
        lv.partition.save(os.path.join(d, "partition.txt"))
        save_matrix_market(os.path.join(d, "graph.mtx"), lv.adjacency)
        np.asarray(lv.details, dtype="<f8").tofile(os.path.join(d, "details.bin"))
    np.asarray(tree.root, dtype="<f8").tofile(os.path.join(path, "root.bin"))
    meta = dict(tree.meta)
    meta["root_rows"] = int(tree.root.shape[0])
    meta["level_detail_rows"] = [int(lv.details.shape[0]) for lv in tree.levels]
    with open(os.path.join(path, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)


def load_tree(path):
    with open(os.path.join(path, "meta.json")) as fh:
        meta = json.load(fh)
    c = meta["channels"]
    levels = []
    for i, rows in enumerate(meta["level_detail_rows"]):
        d = os.path.join(path, f"level_{i:02d}")
        partition = gb.Partition.load(os.path.join(d, "partition.txt"))
        adjacency = load_matrix_market(os.path.join(d, "graph.mtx"))
        details = np.fromfile(os.path.join(d, "details.bin"),
                              dtype="<f8").reshape(rows, c)
        levels.append(LevelRecord(partition, adjacency, details))
    root = np.fromfile(os.path.join(path, "root.bin"),
                       dtype="<f8").reshape(meta["root_rows"], c)
    meta.pop("root_rows")
    meta.pop("level_detail_rows")
    return DecompositionTree(levels=levels, root=root, meta=meta)
