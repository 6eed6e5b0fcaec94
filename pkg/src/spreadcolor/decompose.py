"""Sparse-dense decomposition of a D-regular graph.

Partitions V into a sparse set (vertices with many non-edges inside
their neighborhood) and clusters (near-cliques with few outside
neighbors and few missing cluster-mates).  The construction is verified
against its own postconditions before being returned.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import VerificationFailed
from .graphs import Graph, neighborhood_complement_edges

__all__ = ["Decomposition", "DecompositionReport", "sparse_dense_decompose", "verify_decomposition"]


@dataclass(frozen=True)
class Decomposition:
    """Partition V = sparse ∪ clusters[0] ∪ ... ∪ clusters[m-1].

    theta: sparsity threshold, every sparse v has >= theta*D^2 non-edges
    inside N_v.  eps: cluster tolerance, every cluster member misses
    fewer than eps*D cluster-mates and has fewer than eps*D outside
    neighbors.
    """

    sparse: frozenset[int]
    clusters: tuple[tuple[int, ...], ...]
    eps: float
    theta: float

    def cluster_of(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.clusters) for v in c}

    def to_json(self) -> str:
        return json.dumps(
            {
                "sparse": sorted(self.sparse),
                "clusters": [list(c) for c in self.clusters],
                "eps": self.eps,
                "theta": self.theta,
            }
        )

    @staticmethod
    def from_json(text: str) -> "Decomposition":
        d = json.loads(text)
        return Decomposition(
            sparse=frozenset(d["sparse"]),
            clusters=tuple(tuple(c) for c in d["clusters"]),
            eps=float(d["eps"]),
            theta=float(d["theta"]),
        )


@dataclass
class DecompositionReport:
    """Per-vertex pass/fail for the three invariants, with margins."""

    is_partition: bool
    sparse_failures: list[int]
    outside_failures: list[tuple[int, int]]  # (vertex, |N_v \ C|)
    missing_failures: list[tuple[int, int]]  # (vertex, |C \ N_v|)
    worst_sparse_margin: float = field(default=float("inf"))
    worst_outside_margin: float = field(default=float("inf"))
    worst_missing_margin: float = field(default=float("inf"))

    @property
    def ok(self) -> bool:
        return (
            self.is_partition
            and not self.sparse_failures
            and not self.outside_failures
            and not self.missing_failures
        )


def verify_decomposition(g: Graph, dec: Decomposition) -> DecompositionReport:
    """Pure check of the Decomposition invariants against g."""
    d = g.max_degree
    all_parts = [dec.sparse, *map(frozenset, dec.clusters)]
    covered: set[int] = set()
    total = 0
    for part in all_parts:
        covered |= part
        total += len(part)
    is_partition = covered == set(range(g.n)) and total == g.n

    report = DecompositionReport(is_partition, [], [], [])
    for v in dec.sparse:
        stat = neighborhood_complement_edges(g, v)
        report.worst_sparse_margin = min(report.worst_sparse_margin, stat - dec.theta * d * d)
        if stat < dec.theta * d * d:
            report.sparse_failures.append(v)
    for cluster in dec.clusters:
        cset = frozenset(cluster)
        for v in cluster:
            nbrs = g.neighbor_set(v)
            outside = len(nbrs - cset)
            missing = len(cset - nbrs)  # counts v itself
            report.worst_outside_margin = min(report.worst_outside_margin, dec.eps * d - outside)
            report.worst_missing_margin = min(report.worst_missing_margin, dec.eps * d - missing)
            if outside >= dec.eps * d:
                report.outside_failures.append((v, outside))
            if missing >= dec.eps * d:
                report.missing_failures.append((v, missing))
    return report


def sparse_dense_decompose(
    g: Graph, eps_in: float, theta: float | None = None
) -> Decomposition:
    """Decompose a D-regular graph with tolerance eps = 8*eps_in.

    A vertex is dense when its neighborhood has fewer than theta*D^2
    non-edges (theta defaults to eps_in^2/16).  Dense u, v are friends
    when |N_u ∩ N_v| >= (1 - 2*eps_in)*D; clusters are the connected
    components of the friend graph.  A repair loop demotes to the sparse
    side any cluster vertex violating a cluster condition, provided it
    passes the sparsity test; since dense vertices never do, a violation
    surfaces as VerificationFailed rather than a silently weakened
    output.
    """
    d = g.max_degree
    if not g.is_regular(d):
        raise ValueError("sparse_dense_decompose expects a D-regular graph")
    if not (0 < eps_in <= 0.05):
        raise ValueError(f"need 0 < eps_in <= 1/20, got {eps_in}")
    if theta is None:
        theta = eps_in * eps_in / 16.0
    eps = 8.0 * eps_in

    thr = theta * d * d
    sparse = {v for v in range(g.n) if neighborhood_complement_edges(g, v) >= thr}
    dense = [v for v in range(g.n) if v not in sparse]

    # friend graph on the dense vertices
    friend_thr = (1.0 - 2.0 * eps_in) * d
    dense_set = set(dense)
    friend_adj: dict[int, list[int]] = {v: [] for v in dense}
    for i, u in enumerate(dense):
        nu = g.neighbor_set(u)
        for v in dense[i + 1 :]:
            if len(nu & g.neighbor_set(v)) >= friend_thr:
                friend_adj[u].append(v)
                friend_adj[v].append(u)

    clusters: list[set[int]] = []
    seen: set[int] = set()
    for s in dense:
        if s in seen:
            continue
        comp, stack = set(), [s]
        seen.add(s)
        while stack:
            u = stack.pop()
            comp.add(u)
            for w in friend_adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        clusters.append(comp)

    # repair loop: demote violating vertices when they pass the sparsity test
    changed = True
    while changed:
        changed = False
        for cluster in clusters:
            for v in list(cluster):
                nbrs = g.neighbor_set(v)
                if len(nbrs - cluster) >= eps * d or len(cluster - nbrs) >= eps * d:
                    if neighborhood_complement_edges(g, v) >= thr:
                        cluster.discard(v)
                        sparse.add(v)
                        changed = True
                    else:
                        raise VerificationFailed(
                            f"vertex {v} violates a cluster condition but fails the "
                            f"sparsity test; no valid decomposition at eps_in={eps_in}"
                        )
    clusters = [c for c in clusters if c]

    dec = Decomposition(
        sparse=frozenset(sparse),
        clusters=tuple(tuple(sorted(c)) for c in clusters),
        eps=eps,
        theta=theta,
    )
    report = verify_decomposition(g, dec)
    if not report.ok:
        raise VerificationFailed(f"decomposition failed verification: {report}")
    return dec
