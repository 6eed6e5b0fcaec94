"""Hypergraph expense/cost, exact list-colorability, and the palette
sparsification harness.

The cost of a hypergraph F under weights q is the cheapest expense of
any hypergraph G covering F (every edge of F contains an edge of G).
Minimal covers are antichains of subsets of F's edges, which the
branch-and-bound search below exploits.  The sparsification harness
draws uniform k-sublists of the palette per vertex and measures the
exact colorability rate.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

import numpy as np

from .audit import wilson_interval
from .errors import CapExceeded
from .graphs import Graph

__all__ = [
    "Hypergraph",
    "expense",
    "cost_bruteforce",
    "decide_list_colorable",
    "SparsificationCurve",
    "sparsification_scan",
]


@dataclass(frozen=True)
class Hypergraph:
    ground: tuple[Hashable, ...]
    edges: tuple[frozenset[Hashable], ...]

    def __post_init__(self):
        gset = set(self.ground)
        if len(gset) != len(self.ground):
            raise ValueError("ground set has duplicates")
        for e in self.edges:
            if not e <= gset:
                raise ValueError(f"edge {set(e)} not inside the ground set")

    @property
    def ell_bound(self) -> int:
        return max((len(e) for e in self.edges), default=0)

    @staticmethod
    def from_json(text: str) -> tuple["Hypergraph", dict[Hashable, Fraction]]:
        """Parse {ground: [...], edges: [[...]], q: {x: w}}; q values may be
        floats or strings like "3/10" (kept exact)."""
        data = json.loads(text)
        ground = tuple(data["ground"])
        edges = tuple(frozenset(e) for e in data["edges"])
        q: dict[Hashable, Fraction] = {}
        for x, w in data.get("q", {}).items():
            q[x] = Fraction(w) if isinstance(w, str) else Fraction(str(w))
        return Hypergraph(ground, edges), q


def _weight_of(q: Mapping[Hashable, Fraction | float]):
    def get(x: Hashable) -> Fraction:
        w = Fraction(q[x]) if not isinstance(q[x], Fraction) else q[x]
        if not 0 <= w <= 1:
            raise ValueError(f"weight q[{x!r}] = {w} outside [0, 1]")
        return w

    return get


def expense(f: Hypergraph, q: Mapping[Hashable, Fraction | float]) -> Fraction:
    """Sum over edges of the product of their element weights.  The empty
    edge contributes 1 (empty product)."""
    get = _weight_of(q)
    total = Fraction(0)
    for e in f.edges:
        prod = Fraction(1)
        for x in e:
            prod *= get(x)
        total += prod
    return total


def cost_bruteforce(
    f: Hypergraph, q: Mapping[Hashable, Fraction | float]
) -> tuple[Fraction, list[frozenset[Hashable]]]:
    """Exact minimum expense over covers of f, with a witness cover.

    Branches on the first uncovered edge: some subset B of it must be in
    the cover, and B then retires every edge containing B.  Memoized on
    the set of surviving edges; branches whose accumulated weight already
    meets the incumbent are pruned.
    """
    if len(f.ground) > 16:
        raise CapExceeded(f"|X| = {len(f.ground)} exceeds the brute-force cap of 16")
    get = _weight_of(q)
    weights = {x: get(x) for x in f.ground}

    def subset_weight(b: frozenset) -> Fraction:
        prod = Fraction(1)
        for x in b:
            prod *= weights[x]
        return prod

    def subsets(edge: frozenset):
        items = sorted(edge, key=repr)
        for mask in range(1 << len(items)):
            yield frozenset(items[i] for i in range(len(items)) if mask >> i & 1)

    best: dict = {"value": None, "witness": None}
    memo: dict[frozenset, tuple[Fraction, tuple[frozenset, ...]]] = {}

    def solve(remaining: frozenset[frozenset]) -> tuple[Fraction, tuple[frozenset, ...]]:
        if not remaining:
            return Fraction(0), ()
        if remaining in memo:
            return memo[remaining]
        first = min(remaining, key=lambda e: (len(e), sorted(map(repr, e))))
        value: Fraction | None = None
        witness: tuple[frozenset, ...] = ()
        for b in subsets(first):
            w = subset_weight(b)
            if value is not None and w >= value:
                continue
            rest = frozenset(e for e in remaining if not b <= e)
            sub_value, sub_witness = solve(rest)
            cand = w + sub_value
            if value is None or cand < value:
                value, witness = cand, (b, *sub_witness)
        assert value is not None
        memo[remaining] = (value, witness)
        return memo[remaining]

    value, witness = solve(frozenset(f.edges))
    return value, list(witness)


# ---------------------------------------------------------------------------
# Exact list colorability
# ---------------------------------------------------------------------------


def decide_list_colorable(
    g: Graph, lists: Sequence[Sequence[int]], cap: int = 2_000_000
) -> bool:
    """Exact decision by backtracking with unit propagation, branching on
    the vertex with the fewest remaining colors.  Colors are kept as
    bitmasks.  Raises CapExceeded past `cap` search nodes."""
    n = g.n
    avail = []
    for v in range(n):
        mask = 0
        for c in lists[v]:
            mask |= 1 << c
        avail.append(mask)
    assigned = [0] * n  # color bit once fixed
    nodes = 0

    def propagate(trail: list[tuple[int, int]]) -> bool:
        """Fix all singleton lists; returns False on a wipe-out."""
        queue = [v for v in range(n) if assigned[v] == 0 and avail[v].bit_count() == 1]
        while queue:
            v = queue.pop()
            if assigned[v]:
                continue
            bit = avail[v]
            if bit == 0:
                return False
            assigned[v] = bit
            trail.append((v, -1))
            for w in g.neighbors(v):
                if assigned[w]:
                    if assigned[w] == bit:
                        return False
                    continue
                if avail[w] & bit:
                    avail[w] &= ~bit
                    trail.append((w, bit))
                    cnt = avail[w].bit_count()
                    if cnt == 0:
                        return False
                    if cnt == 1:
                        queue.append(w)
        return True

    def undo(trail: list[tuple[int, int]]) -> None:
        while trail:
            v, bit = trail.pop()
            if bit == -1:
                assigned[v] = 0
            else:
                avail[v] |= bit

    def search() -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > cap:
            raise CapExceeded(f"colorability search exceeded {cap} nodes")
        v_best, best_cnt = -1, 1 << 30
        for v in range(n):
            if assigned[v] == 0:
                cnt = avail[v].bit_count()
                if cnt == 0:
                    return False
                if cnt < best_cnt:
                    v_best, best_cnt = v, cnt
        if v_best == -1:
            return True
        mask = avail[v_best]
        while mask:
            bit = mask & -mask
            mask ^= bit
            trail: list[tuple[int, int]] = []
            saved = avail[v_best]
            avail[v_best] = bit
            trail.append((v_best, saved & ~bit))
            if propagate(trail) and search():
                return True
            undo(trail)
            avail[v_best] = saved
        return False

    trail0: list[tuple[int, int]] = []
    if not propagate(trail0):
        return False
    return search()


# ---------------------------------------------------------------------------
# Palette sparsification harness
# ---------------------------------------------------------------------------


@dataclass
class CurveRow:
    k: int
    trials: int
    successes: int
    indeterminate: int
    rate: float
    ci_low: float
    ci_high: float


@dataclass
class SparsificationCurve:
    rows: list[CurveRow]

    def __post_init__(self):
        ks = [r.k for r in self.rows]
        if ks != sorted(set(ks)):
            raise ValueError("k values must be strictly increasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["k", "trials", "successes", "rate", "ci_lo", "ci_hi"])
        for r in self.rows:
            w.writerow(
                [r.k, r.trials, r.successes, f"{r.rate:.6f}", f"{r.ci_low:.6f}", f"{r.ci_high:.6f}"]
            )
        return buf.getvalue()

    def nondecreasing_within_ci(self) -> bool:
        """Monotonicity up to CI noise: each row's upper bound must reach
        the previous row's lower bound."""
        for prev, cur in zip(self.rows, self.rows[1:]):
            if cur.ci_high < prev.ci_low:
                return False
        return True


def sparsification_scan(
    g: Graph,
    k_values: Sequence[int],
    trials: int,
    seed: int,
    cap: int = 2_000_000,
) -> SparsificationCurve:
    """For each k: draw uniform k-sublists of [D+1] per vertex, decide
    exact colorability, and record the success rate with a Wilson CI.
    Cap-exceeded decisions count as failures (conservative) and are
    tallied separately."""
    d = g.max_degree
    palette = np.arange(1, d + 2)
    if any(k < 1 or k > d + 1 for k in k_values):
        raise ValueError("k values must lie in [1, D+1]")
    rows = []
    for k in k_values:
        successes = 0
        indeterminate = 0
        for t in range(trials):
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence((seed, int(k), t)))
            )
            lists = [rng.choice(palette, size=k, replace=False) for _ in range(g.n)]
            try:
                if decide_list_colorable(g, lists, cap=cap):
                    successes += 1
            except CapExceeded:
                indeterminate += 1
        lo, hi = wilson_interval(successes, trials)
        rows.append(
            CurveRow(
                k=int(k),
                trials=trials,
                successes=successes,
                indeterminate=indeterminate,
                rate=successes / trials,
                ci_low=lo,
                ci_high=hi,
            )
        )
    return SparsificationCurve(rows)
