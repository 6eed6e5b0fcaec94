"""Coloring the sparse vertices.

Draw a uniform label for every vertex, condition (by rejection) on every
sparse vertex seeing a typical number of locally-unique labels, keep the
labels on the conflict-free set T as colors, then finish the remaining
sparse vertices by slack greedy on the leftover lists.

Randomness is keyed: attempt t of the rejection loop uses the stream
(seed, LABEL_TAG, t) and the greedy stage uses (seed, GREEDY_TAG), one
uniform per vertex.  Because acceptance is decided per connected
component and vector draws are stream prefixes, the result restricted to
a component equals a run on that component alone (same seed, ids
preserved as a prefix).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .decompose import Decomposition
from .errors import MaxTriesExceeded, StuckVertex, VerificationFailed
from .graphs import Graph
from .params import Params

__all__ = [
    "LabelingStats",
    "label_statistics",
    "tranquil_mask",
    "default_window_halfwidth",
    "sample_conditioned_labeling",
    "SparsePhaseResult",
    "sparse_phase_color",
]

_LABEL_TAG = 0xA1
_GREEDY_TAG = 0xA2


def _rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, *tags))))


def tranquil_mask(g: Graph, tau: np.ndarray) -> np.ndarray:
    """Boolean mask of T = vertices none of whose neighbors share their label."""
    eu, ev = g.edge_arrays()
    mask = np.ones(g.n, dtype=bool)
    if len(eu):
        clash = tau[eu] == tau[ev]
        mask[eu[clash]] = False
        mask[ev[clash]] = False
    return mask


def _in_t_counts(g: Graph, t_mask: np.ndarray) -> np.ndarray:
    flat, ptr = g.flat_adjacency()
    if len(flat) == 0:
        return np.zeros(g.n, dtype=np.int64)
    vals = t_mask[flat].astype(np.int64)
    counts = np.zeros(g.n, dtype=np.int64)
    nonempty = ptr[:-1] < ptr[1:]
    counts[nonempty] = np.add.reduceat(vals, ptr[:-1][nonempty])
    return counts


def _pair_count(g: Graph, tau: np.ndarray, v: int) -> int:
    """|P_v|: non-adjacent pairs u,w in N_v with equal labels that appear
    nowhere else in N_v ∪ N_u ∪ N_w."""
    nbrs = g.neighbors(v)
    by_label: dict[int, list[int]] = {}
    for u in nbrs:
        by_label.setdefault(int(tau[u]), []).append(u)
    count = 0
    for label, group in by_label.items():
        if len(group) < 2:
            continue
        for i, u in enumerate(group):
            for w in group[i + 1 :]:
                if g.has_edge(u, w):
                    continue
                zone = (
                    (g.neighbor_set(v) | g.neighbor_set(u) | g.neighbor_set(w))
                    - {u, w}
                )
                if all(int(tau[z]) != label for z in zone):
                    count += 1
    return count


@dataclass
class LabelingStats:
    """Exact statistics of one labeling, restricted to the sparse set."""

    t_set: frozenset[int]
    in_t: dict[int, int]
    pair_count: dict[int, int]
    bad: dict[int, bool]
    window_halfwidth: float  # absolute units of |N_v ∩ T|
    pair_min: float

    @property
    def any_bad(self) -> bool:
        return any(self.bad.values())


def label_statistics(
    g: Graph,
    tau: np.ndarray,
    vstar,
    theta_prime: float,
    window_halfwidth: float | None = None,
    pair_min: float | None = None,
) -> LabelingStats:
    """T, |N_v ∩ T|, |P_v| and the bad-event flag for each sparse vertex.

    By default the bad event is the literal one: |N_v ∩ T| outside
    (e^-1 ± theta'/3)D or |P_v| < theta'*D.  Callers running at desk
    scale pass wider/looser thresholds explicitly.
    """
    d = g.max_degree
    if window_halfwidth is None:
        window_halfwidth = theta_prime / 3.0 * d
    if pair_min is None:
        pair_min = theta_prime * d
    tau = np.asarray(tau)
    t_mask = tranquil_mask(g, tau)
    counts = _in_t_counts(g, t_mask)
    center = d / math.e
    in_t: dict[int, int] = {}
    pairs: dict[int, int] = {}
    bad: dict[int, bool] = {}
    for v in sorted(vstar):
        c = int(counts[v])
        in_t[v] = c
        p = _pair_count(g, tau, v)
        pairs[v] = p
        bad[v] = abs(c - center) > window_halfwidth or p < pair_min
    return LabelingStats(
        t_set=frozenset(np.flatnonzero(t_mask).tolist()),
        in_t=in_t,
        pair_count=pairs,
        bad=bad,
        window_halfwidth=window_halfwidth,
        pair_min=pair_min,
    )


def default_window_halfwidth(
    d: int, n_star: int, accept_target: float = 0.5
) -> float:
    """Halfwidth (absolute units) of the accepted |N_v ∩ T| window around
    e^-1 * D, sized so that all n_star sparse vertices land inside with
    probability about accept_target.

    |N_v ∩ T| behaves like Binomial(D, p) with p = (1 - 1/(D+1))^D, whose
    fluctuation scale sqrt(D p (1-p)) dwarfs the theta'/3 window of the
    asymptotic statement at any desk-scale D.
    """
    p = (1.0 - 1.0 / (d + 1)) ** d
    mu = d * p
    sigma = math.sqrt(d * p * (1.0 - p))
    beta = (1.0 - accept_target) / max(n_star, 1)
    z = NormalDist().inv_cdf(1.0 - min(beta, 0.5) / 2.0)
    return abs(mu - d / math.e) + z * sigma


def sample_conditioned_labeling(
    g: Graph,
    vstar,
    theta_prime: float,
    seed: int,
    max_tries: int = 10_000,
    window_halfwidth: float | None = None,
    pair_min: float | None = None,
    accept_target: float = 0.5,
) -> np.ndarray:
    """Uniform labeling of V conditioned on no sparse vertex being bad,
    realized by per-component rejection.

    The pair threshold defaults to floor(theta' * D): at desk scale that
    is 0 and the |P_v| clause is vacuous, which is the only regime in
    which the conditioned measure is reachable at all (E|P_v| is O(1)
    for any feasible D here, while the asymptotic statement wants
    Theta(theta * D) of them).  The window defaults to the calibrated
    one; see default_window_halfwidth.
    """
    d = g.max_degree
    n = g.n
    vstar = frozenset(vstar)
    if window_halfwidth is None:
        window_halfwidth = max(
            default_window_halfwidth(d, len(vstar), accept_target),
            theta_prime / 3.0 * d,
        )
    if pair_min is None:
        pair_min = float(math.floor(theta_prime * d))
    center = d / math.e
    lo, hi = center - window_halfwidth, center + window_halfwidth

    comps = g.components()
    pending = [
        (np.asarray(c), np.asarray(sorted(vstar & set(c))))
        for c in comps
        if vstar & set(c)
    ]
    final = np.zeros(n, dtype=np.int64)
    settled = np.zeros(n, dtype=bool)
    for c in comps:
        if not (vstar & set(c)):
            settled[np.asarray(c)] = True  # takes attempt-0 labels below

    first = _rng(seed, _LABEL_TAG, 0).integers(1, d + 2, size=n)
    final[settled] = first[settled]

    for t in range(max_tries):
        tau = first if t == 0 else _rng(seed, _LABEL_TAG, t).integers(1, d + 2, size=n)
        if not pending:
            break
        t_mask = tranquil_mask(g, tau)
        counts = _in_t_counts(g, t_mask)
        still = []
        for comp, comp_star in pending:
            cs = counts[comp_star]
            ok = bool(np.all((cs >= lo) & (cs <= hi)))
            if ok and pair_min > 0:
                ok = all(_pair_count(g, tau, int(v)) >= pair_min for v in comp_star)
            if ok:
                final[comp] = tau[comp]
                settled[comp] = True
            else:
                still.append((comp, comp_star))
        pending = still
    if pending:
        raise MaxTriesExceeded(
            f"conditioned labeling not found in {max_tries} attempts "
            f"(window halfwidth {window_halfwidth:.2f}, pair_min {pair_min})"
        )
    return final


@dataclass
class SparsePhaseResult:
    coloring: dict[int, int]          # on V* only
    labeling: np.ndarray              # the accepted conditioned labeling
    t_set: frozenset[int]             # conflict-free set of the labeling
    window_halfwidth: float
    pair_min: float


def sparse_phase_color(
    g: Graph, dec: Decomposition, seed: int, params: Params | None = None
) -> SparsePhaseResult:
    """Proper coloring of the sparse set V*.

    sigma on T is the conditioned labeling itself (proper there by
    construction of T); V* \\ T is finished by slack greedy on the lists
    Gamma minus the colors seen on T-neighbors.  Labels on T \\ V* are
    used for those lists and then dropped.  On a D-regular graph the
    greedy always has |S_v| >= d'(v) + 1, so it cannot get stuck.
    """
    if params is None:
        params = Params()
    d = g.max_degree
    if not g.is_regular(d):
        raise ValueError("sparse phase expects the regularized (D-regular) graph")
    theta_prime = params.theta_prime_value()
    window = (
        params.t_window * d
        if params.t_window is not None
        else max(
            default_window_halfwidth(d, len(dec.sparse), params.accept_target),
            theta_prime / 3.0 * d,
        )
    )
    pair_min = float(math.floor(theta_prime * d))
    tau = sample_conditioned_labeling(
        g,
        dec.sparse,
        theta_prime,
        seed,
        max_tries=params.max_tries,
        window_halfwidth=window,
        pair_min=pair_min,
        accept_target=params.accept_target,
    )
    t_mask = tranquil_mask(g, tau)
    counts = _in_t_counts(g, t_mask)
    center = d / math.e

    # sigma restricted to T is proper by the definition of T
    eu, ev = g.edge_arrays()
    both = t_mask[eu] & t_mask[ev]
    if np.any(tau[eu[both]] == tau[ev[both]]):
        raise VerificationFailed("labeling restricted to T is not proper")

    palette = range(1, d + 2)
    sigma: dict[int, int] = {}
    for v in sorted(dec.sparse):
        if t_mask[v]:
            sigma[v] = int(tau[v])

    # leftover sparse vertices, ascending order, one keyed uniform each
    leftovers = [v for v in range(g.n) if v in dec.sparse and not t_mask[v]]
    uniforms = _rng(seed, _GREEDY_TAG).random(g.n)
    vstar = dec.sparse
    for v in leftovers:
        in_t = int(counts[v])
        if abs(in_t - center) > window + 1e-9:
            raise VerificationFailed(f"vertex {v} escaped the accepted window")
        used = set()
        d_rest = 0
        for w in g.neighbors(v):
            if t_mask[w]:
                used.add(int(tau[w]))
            elif w in vstar and w in sigma:
                used.add(sigma[w])
            if not t_mask[w] and w in vstar:
                d_rest += 1
        avail = [c for c in palette if c not in used]
        # the two hand-off inequalities implied by the accepted window
        if d_rest > d - in_t:
            raise VerificationFailed("leftover degree exceeds D - |N_v ∩ T|")
        n_list = d + 1 - len({int(tau[w]) for w in g.neighbors(v) if t_mask[w]})
        if n_list < d + 1 - in_t - 1e-9 or (pair_min > 0 and n_list < d + 1 - in_t + pair_min):
            raise VerificationFailed("hand-off list shorter than the window implies")
        if not avail:
            raise StuckVertex(f"sparse-phase greedy stuck at vertex {v}")
        sigma[v] = avail[int(uniforms[v] * len(avail))]

    for v, c in sigma.items():
        for w in g.neighbors(v):
            if w in sigma and sigma[w] == c:
                raise VerificationFailed("sparse-phase coloring is not proper on V*")
    return SparsePhaseResult(
        coloring=sigma,
        labeling=tau,
        t_set=frozenset(np.flatnonzero(t_mask).tolist()),
        window_halfwidth=window,
        pair_min=pair_min,
    )
