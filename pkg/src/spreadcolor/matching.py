"""Bipartite matching machinery.

Deterministic Hopcroft-Karp maximum matching, random k-out subgraphs,
rejection-sampled perfect matchings in dense bigraphs, and the
two-phase X-perfect matcher (greedy on unpopular right-vertices, then
dense matching among high-degree ones) with its in-flight inequality
checks.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyChoiceSet,
    HypothesisViolated,
    MaxTriesExceeded,
    VerificationFailed,
)

__all__ = [
    "Bigraph",
    "Matching",
    "perfect_matching",
    "kout_subgraph",
    "spread_matching_dense",
    "spread_X_perfect_matching",
]

INF = -1


@dataclass(frozen=True)
class Bigraph:
    """Bipartite graph on parts X (size nx) and Y (size ny), both 0-indexed."""

    nx: int
    ny: int
    adj_x: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_edges(nx: int, ny: int, edges: Iterable[tuple[int, int]]) -> "Bigraph":
        adj: list[set[int]] = [set() for _ in range(nx)]
        for x, y in edges:
            if not (0 <= x < nx and 0 <= y < ny):
                raise ValueError(f"edge ({x},{y}) out of range")
            adj[x].add(y)
        return Bigraph(nx, ny, tuple(tuple(sorted(s)) for s in adj))

    @staticmethod
    def complete(nx: int, ny: int) -> "Bigraph":
        row = tuple(range(ny))
        return Bigraph(nx, ny, tuple(row for _ in range(nx)))

    def deg_x(self, x: int) -> int:
        return len(self.adj_x[x])

    def degrees_y(self) -> np.ndarray:
        deg = np.zeros(self.ny, dtype=np.int64)
        for row in self.adj_x:
            for y in row:
                deg[y] += 1
        return deg

    def adj_y(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.ny)]
        for x, row in enumerate(self.adj_x):
            for y in row:
                out[y].append(x)
        return out

    def edge_count(self) -> int:
        return sum(len(r) for r in self.adj_x)

    def subgraph(self, xs: Sequence[int], ys: Sequence[int]) -> "Bigraph":
        """Induced bigraph on (xs, ys), reindexed in the given order."""
        ymap = {y: j for j, y in enumerate(ys)}
        adj = tuple(
            tuple(sorted(ymap[y] for y in self.adj_x[x] if y in ymap)) for x in xs
        )
        return Bigraph(len(xs), len(ys), adj)


@dataclass
class Matching:
    """Set of disjoint edges, stored as x -> y."""

    pairs: dict[int, int]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ys = list(self.pairs.values())
        if len(set(ys)) != len(ys):
            raise VerificationFailed("matching reuses a right vertex")

    def is_x_perfect(self, b: Bigraph) -> bool:
        return set(self.pairs) == set(range(b.nx))

    def validate(self, b: Bigraph) -> None:
        for x, y in self.pairs.items():
            if y not in b.adj_x[x]:
                raise VerificationFailed(f"matched pair ({x},{y}) is not an edge")


def perfect_matching(b: Bigraph) -> Matching:
    """Deterministic maximum matching via Hopcroft-Karp; check
    .is_x_perfect(b) on the result for X-perfection."""
    pair_x = [INF] * b.nx
    pair_y = [INF] * b.ny
    dist = [0] * b.nx

    def bfs() -> bool:
        q: deque[int] = deque()
        for x in range(b.nx):
            if pair_x[x] == INF:
                dist[x] = 0
                q.append(x)
            else:
                dist[x] = INF
        found = INF
        while q:
            x = q.popleft()
            if found != INF and dist[x] >= found:
                continue
            for y in b.adj_x[x]:
                x2 = pair_y[y]
                if x2 == INF:
                    if found == INF:
                        found = dist[x] + 1
                elif dist[x2] == INF:
                    dist[x2] = dist[x] + 1
                    q.append(x2)
        return found != INF

    def dfs(x: int) -> bool:
        for y in b.adj_x[x]:
            x2 = pair_y[y]
            if x2 == INF or (dist[x2] == dist[x] + 1 and dfs(x2)):
                pair_x[x] = y
                pair_y[y] = x
                return True
        dist[x] = INF
        return False

    while bfs():
        for x in range(b.nx):
            if pair_x[x] == INF:
                dfs(x)
    return Matching({x: y for x, y in enumerate(pair_x) if y != INF})


def kout_subgraph(b: Bigraph, k: int, rng: np.random.Generator) -> Bigraph:
    """Each vertex on BOTH sides keeps min(k, deg) uniformly chosen
    incident edges; the subgraph is their union.  Two-sided selection is
    what kills isolated vertices, the main obstruction to a perfect
    matching."""
    if k < 1:
        raise ValueError("need k >= 1")
    chosen: set[tuple[int, int]] = set()
    for x in range(b.nx):
        row = b.adj_x[x]
        if len(row) <= k:
            chosen.update((x, y) for y in row)
        else:
            idx = rng.choice(len(row), size=k, replace=False)
            chosen.update((x, row[i]) for i in idx)
    for y, col in enumerate(b.adj_y()):
        if not col:
            continue
        if len(col) <= k:
            chosen.update((x, y) for x in col)
        else:
            idx = rng.choice(len(col), size=k, replace=False)
            chosen.update((col[i], y) for i in idx)
    return Bigraph.from_edges(b.nx, b.ny, chosen)


def spread_matching_dense(
    f: Bigraph,
    lam: float,
    k: int,
    rng: np.random.Generator,
    max_tries: int = 200,
    lambda_max: float = 0.25,
    k_max: int = 16,
) -> Matching:
    """Perfect matching in a bigraph with both sides of size I and all
    degrees >= (1-lam)I, sampled by repeating {k-out subgraph, maximum
    matching} until the matching is perfect.

    Conditioning a spread edge set on an event of constant probability
    keeps it spread, so the retries do not spoil the distribution.  k
    doubles (up to k_max) when acceptance looks hopeless.
    """
    if f.nx != f.ny:
        raise HypothesisViolated(f"parts must have equal size, got {f.nx} vs {f.ny}")
    i_size = f.nx
    if not 0 <= lam <= lambda_max:
        raise HypothesisViolated(f"lambda = {lam:.4f} exceeds lambda_max = {lambda_max}")
    need = (1.0 - lam) * i_size
    min_x = min((f.deg_x(x) for x in range(f.nx)), default=0)
    degs_y = f.degrees_y()
    min_y = int(degs_y.min()) if f.ny else 0
    if min(min_x, min_y) < need:
        raise HypothesisViolated(
            f"min degree {min(min_x, min_y)} < (1-lambda)I = {need:.2f}"
        )

    failures_at_k = 0
    for t in range(max_tries):
        sub = kout_subgraph(f, k, rng)
        m = perfect_matching(sub)
        if len(m.pairs) == i_size:
            m.meta.update(tries=t + 1, k=k)
            m.validate(f)
            return m
        failures_at_k += 1
        if failures_at_k >= 100 and k < k_max:
            k = min(2 * k, k_max)
            failures_at_k = 0
    raise MaxTriesExceeded(
        f"no perfect matching in {max_tries} k-out draws (final k={k})"
    )


def spread_X_perfect_matching(
    b: Bigraph,
    z: float,
    rng: np.random.Generator,
    r_x: Sequence[float] | None = None,
    k: int = 3,
    max_tries: int = 200,
    lambda_max: float = 0.25,
) -> Matching:
    """X-perfect matching in a bigraph on (X, Y) with |X| = J,
    |Y| = J + R, under the checked hypotheses

        0 <= R <= zJ,  d(x) >= J - r_x,  max r_x <= zJ,  sum r_x <= zJ.

    Phase 1 (only when r = |unpopular| - R > 0): repeatedly pick a
    uniform edge into the unpopular colors (right vertices of degree
    < (1-delta)J, delta = 5*sqrt(z)) and remove both endpoints.  Phase 2
    matches the rest against the surviving high-degree colors.  The
    edge-count lower bounds that make phase 1 work are asserted at every
    step.
    """
    j = b.nx
    big_r = b.ny - b.nx
    if j == 0:
        return Matching({}, meta={"branch": "empty"})
    if r_x is None:
        r_x = [j - b.deg_x(x) for x in range(j)]
    if len(r_x) != j:
        raise ValueError("r_x must have one entry per X vertex")

    if big_r < 0:
        raise HypothesisViolated(f"R = {big_r} < 0")
    if big_r > z * j:
        raise HypothesisViolated(f"R = {big_r} > zJ = {z * j:.2f}")
    max_r = max(r_x)
    if max_r > z * j:
        raise HypothesisViolated(f"max r_x = {max_r} > zJ = {z * j:.2f}")
    sum_r = sum(r_x)
    if sum_r > z * j:
        raise HypothesisViolated(f"sum r_x = {sum_r} > zJ = {z * j:.2f}")
    for x in range(j):
        if b.deg_x(x) < j - r_x[x]:
            raise HypothesisViolated(
                f"d(x={x}) = {b.deg_x(x)} < J - r_x = {j - r_x[x]:.2f}"
            )

    delta = 5.0 * z**0.5
    degs_y = b.degrees_y()
    unpopular = [y for y in range(b.ny) if degs_y[y] < (1.0 - delta) * j]
    # consequence of the hypotheses; catches instance-construction bugs
    if len(unpopular) * delta * j > big_r * j + z * j + 1e-9:
        raise VerificationFailed(
            f"|U| = {len(unpopular)} exceeds (R+z)/delta = {(big_r + z) / delta:.2f}"
        )
    r = len(unpopular) - big_r

    greedy_pairs: dict[int, int] = {}
    live_x = set(range(j))
    meta: dict = {"branch": "dense", "unpopular": len(unpopular), "r": r}
    if r > 0:
        meta["branch"] = "greedy+dense"
        u_set = set(unpopular)
        adj_y = b.adj_y()
        floor_target = r * delta * j / 2.0
        for step in range(r):
            edges = [
                (x, y) for y in sorted(u_set) for x in adj_y[y] if x in live_x
            ]
            count_before = len(edges)
            if count_before < floor_target - 1e-9:
                raise VerificationFailed(
                    f"greedy-phase edge count {count_before} fell below "
                    f"r*delta*J/2 = {floor_target:.2f} at step {step}"
                )
            if not edges:
                raise EmptyChoiceSet(
                    f"no edges left into unpopular colors at step {step}"
                )
            x, y = edges[int(rng.integers(len(edges)))]
            live_x.discard(x)
            u_set.discard(y)
            greedy_pairs[x] = y
            count_after = sum(
                1 for yy in u_set for xx in adj_y[yy] if xx in live_x
            )
            if count_after < count_before - len(unpopular) - (1.0 - delta) * j - 1e-9:
                raise VerificationFailed(
                    "greedy step removed more edges than |U| + (1-delta)J"
                )
            if step == r - 1 and count_after < floor_target - 1e-9:
                raise VerificationFailed(
                    f"greedy-phase edge count {count_after} fell below "
                    f"r*delta*J/2 = {floor_target:.2f} after the last step"
                )

    if r > 0:
        u_all = set(unpopular)
        v0 = sorted(live_x)
        v1 = [y for y in range(b.ny) if y not in u_all]
    else:
        # drop the R least-popular colors, ties broken by id
        order = sorted(range(b.ny), key=lambda y: (-degs_y[y], y))
        v0 = list(range(j))
        v1 = sorted(order[:j])

    i_size = len(v0)
    if len(v1) != i_size:
        raise VerificationFailed(f"dense phase sizes differ: {i_size} vs {len(v1)}")
    dense_meta = {}
    if i_size:
        f = b.subgraph(v0, v1)
        lam = min(2.0 * delta, lambda_max)
        m_dense = spread_matching_dense(
            f, lam, k, rng, max_tries=max_tries, lambda_max=lambda_max
        )
        dense_meta = m_dense.meta
        dense_pairs = {v0[x]: v1[y] for x, y in m_dense.pairs.items()}
    else:
        dense_pairs = {}

    pairs = {**greedy_pairs, **dense_pairs}
    out = Matching(pairs, meta={**meta, "dense": dense_meta})
    out.validate(b)
    if not out.is_x_perfect(b):
        raise VerificationFailed("result is not X-perfect")
    return out
