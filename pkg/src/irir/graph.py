"""Graph models, Erdős–Rényi generation and jumbledness certification.

Two graph models are supported.  :class:`PerfectlyMixed` is the weighted
clique of density ``p``: every pair of disjoint vertex sets ``U``, ``W`` is
joined by total weight exactly ``p * |U| * |W|``, so only counts matter.
:class:`ExplicitGraph` is an undirected weighted edge list with a CSR
adjacency built once at construction; it is immutable afterwards and may be
shared between concurrently running replicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, InvalidInputError
from .rng import make_rng

EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class PerfectlyMixed:
    n: int
    p: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInputError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 < self.p <= 1.0):
            raise InvalidInputError(f"density p must lie in (0, 1], got {self.p!r}")

    def describe(self) -> dict:
        return {"type": "mixed", "n": int(self.n), "p": float(self.p)}


class ExplicitGraph:
    """Undirected weighted graph on vertices ``0..n-1``.

    Edges are stored once each (``u < v``) in ``self.u``, ``self.v`` and
    ``self.w``.  ``indptr``/``indices``/``weights`` hold the symmetric CSR
    adjacency used by the vertex-level engine.
    """

    def __init__(self, n: int, edges: Iterable[Sequence[float]] = ()):
        if int(n) != n or n < 1:
            raise InvalidInputError(f"n must be a positive integer, got {n!r}")
        n = int(n)
        rows = [tuple(e) for e in edges]
        us = np.empty(len(rows), dtype=np.int64)
        vs = np.empty(len(rows), dtype=np.int64)
        ws = np.ones(len(rows), dtype=np.float64)
        for i, e in enumerate(rows):
            if len(e) not in (2, 3):
                raise InvalidInputError(f"edge {e!r} must be (u, v) or (u, v, weight)")
            a, b = int(e[0]), int(e[1])
            if a == b:
                raise InvalidInputError(f"self-loop at vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise InvalidInputError(f"edge ({a}, {b}) out of range for n={n}")
            us[i], vs[i] = min(a, b), max(a, b)
            if len(e) == 3:
                ws[i] = float(e[2])
        self._init_arrays(n, us, vs, ws)

    @classmethod
    def from_arrays(cls, n: int, u, v, w=None) -> "ExplicitGraph":
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.ones(len(u)) if w is None else np.asarray(w, dtype=np.float64)
        if len(u) and (np.any(u == v) or min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise InvalidInputError("edge arrays contain self-loops or out-of-range vertices")
        obj = cls.__new__(cls)
        obj._init_arrays(int(n), np.minimum(u, v), np.maximum(u, v), w)
        return obj

    def _init_arrays(self, n, us, vs, ws):
        if np.any(ws < 0) or not np.all(np.isfinite(ws)):
            raise InvalidInputError("edge weights must be finite and non-negative")
        keys = us * n + vs
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        if len(keys) > 1 and np.any(keys[1:] == keys[:-1]):
            dup = int(keys[1:][keys[1:] == keys[:-1]][0])
            raise InvalidInputError(f"duplicate edge ({dup // n}, {dup % n})")
        self.n = n
        self.u, self.v, self.w = us[order], vs[order], ws[order]
        for arr in (self.u, self.v, self.w):
            arr.setflags(write=False)

        src = np.concatenate([self.u, self.v])
        dst = np.concatenate([self.v, self.u])
        wts = np.concatenate([self.w, self.w])
        order = np.lexsort((dst, src))
        self.indices = dst[order]
        self.weights = wts[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self.indptr[1:])
        for arr in (self.indices, self.weights, self.indptr):
            arr.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return len(self.u)

    @property
    def density(self) -> float:
        """Realized density ``2 e(G) / (n (n - 1))``; 0 for a single vertex."""
        if self.n < 2:
            return 0.0
        return 2.0 * self.num_edges / (self.n * (self.n - 1))

    @property
    def uniform_weight(self) -> float | None:
        if self.num_edges == 0:
            return 1.0
        w0 = self.w[0]
        return float(w0) if np.all(self.w == w0) else None

    @property
    def is_unit_weight(self) -> bool:
        return self.uniform_weight == 1.0

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int):
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def edges(self):
        return list(zip(self.u.tolist(), self.v.tolist(), self.w.tolist()))

    def describe(self) -> dict:
        return {"type": "explicit", "n": self.n, "edges": self.num_edges}

    def __eq__(self, other):
        if not isinstance(other, ExplicitGraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and np.array_equal(self.w, other.w)
        )

    def __repr__(self):
        return f"ExplicitGraph(n={self.n}, edges={self.num_edges})"


def complete_graph(n: int, weight: float = 1.0) -> ExplicitGraph:
    u, v = np.triu_indices(n, k=1)
    return ExplicitGraph.from_arrays(n, u, v, np.full(len(u), float(weight)))


def generate_erdos_renyi(n: int, p: float, seed: int) -> ExplicitGraph:
    """G(n, p) with unit weights; each pair kept independently with probability p."""
    if not (0.0 <= p <= 1.0):
        raise InvalidInputError(f"p must lie in [0, 1], got {p!r}")
    if int(n) != n or n < 1:
        raise InvalidInputError(f"n must be a positive integer, got {n!r}")
    rng = make_rng(seed)
    us, vs = [], []
    for i in range(n - 1):
        keep = np.flatnonzero(rng.random(n - 1 - i) < p)
        us.append(np.full(len(keep), i, dtype=np.int64))
        vs.append(keep + i + 1)
    if not us:
        return ExplicitGraph(n)
    return ExplicitGraph.from_arrays(n, np.concatenate(us), np.concatenate(vs))


# --------------------------------------------------------------------------
# class-edge weights


def _as_vertex_mask(n: int, vertices) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    idx = np.fromiter((int(x) for x in vertices), dtype=np.int64)
    mask[idx] = True
    return mask


def _size(x) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    return len(x)


def class_edge_weight(g, A, B) -> float:
    """Total edge weight between disjoint vertex classes ``A`` and ``B``.

    For :class:`PerfectlyMixed` the classes may be given as counts.
    """
    if isinstance(g, PerfectlyMixed):
        return g.p * _size(A) * _size(B)
    if isinstance(A, (int, np.integer)) or isinstance(B, (int, np.integer)):
        raise InvalidInputError("explicit graphs need vertex sets, not counts")
    in_a = _as_vertex_mask(g.n, A)
    in_b = _as_vertex_mask(g.n, B)
    if np.any(in_a & in_b):
        raise InvalidInputError("vertex classes must be disjoint")
    cross = (in_a[g.u] & in_b[g.v]) | (in_b[g.u] & in_a[g.v])
    return float(g.w[cross].sum())


class ClassEdgeTracker:
    """Edge weight between every pair of vertex classes, kept up to date in
    O(deg(v)) per single-vertex relabel.

    ``between(a, b)`` with ``a == b`` is the weight inside class ``a``.
    Sums are exact whenever the weights are integers (e.g. unit weights).
    """

    def __init__(self, g: ExplicitGraph, labels, num_classes: int):
        self.g = g
        self.labels = np.array(labels, dtype=np.int64)
        if self.labels.shape != (g.n,):
            raise InvalidInputError("need one label per vertex")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= num_classes):
            raise InvalidInputError("labels out of range")
        self.num_classes = num_classes
        self.W = self.from_scratch(g, self.labels, num_classes)

    @staticmethod
    def from_scratch(g: ExplicitGraph, labels, num_classes: int) -> np.ndarray:
        labels = np.asarray(labels)
        W = np.zeros((num_classes, num_classes))
        a, b = labels[g.u], labels[g.v]
        np.add.at(W, (a, b), g.w)
        off = a != b
        np.add.at(W, (b[off], a[off]), g.w[off])
        return W

    def between(self, a: int, b: int) -> float:
        return float(self.W[a, b])

    def move(self, v: int, new_class: int) -> None:
        old = int(self.labels[v])
        if old == new_class:
            return
        W = self.W
        nbrs, wts = self.g.neighbors(v)
        for u, w in zip(nbrs.tolist(), wts.tolist()):
            c = int(self.labels[u])
            W[old, c] -= w
            if c != old:
                W[c, old] -= w
            W[new_class, c] += w
            if c != new_class:
                W[c, new_class] += w
        self.labels[v] = new_class


# --------------------------------------------------------------------------
# jumbledness


@dataclass
class JumbledReport:
    p: float
    alpha_min: float
    mode: str
    samples_examined: int
    worst_subset: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "alpha_min": self.alpha_min,
            "mode": self.mode,
            "samples_examined": self.samples_examined,
            "worst_subset": [int(x) for x in self.worst_subset],
        }


def _require_unit(g):
    if not isinstance(g, ExplicitGraph):
        raise InvalidInputError("jumbledness is certified for explicit graphs only")
    if not g.is_unit_weight:
        raise InvalidInputError("jumbledness is defined for unit-weight graphs only")


def jumbledness_alpha(
    g: ExplicitGraph,
    p: float | None = None,
    mode: str = "exhaustive",
    sample_budget: int = 10_000,
    seed: int = 0,
) -> JumbledReport:
    """Smallest alpha with ``|e(H) - p*C(|H|,2)| <= alpha*|H|`` over induced subgraphs H.

    ``mode="exhaustive"`` enumerates all 2^n vertex subsets (n <= 20) and is
    exact.  ``mode="sampled"`` examines ``sample_budget`` random subsets (size
    uniform in 1..n, then a uniform subset of that size) and returns a lower
    bound on the exact value.  ``p`` defaults to the realized density.
    """
    _require_unit(g)
    if p is None:
        p = g.density
    n = g.n
    if mode == "exhaustive":
        if n > EXHAUSTIVE_LIMIT:
            raise CapacityError(f"exhaustive jumbledness needs n <= {EXHAUSTIVE_LIMIT}, got {n}")
        return _jumbled_exhaustive(g, float(p))
    if mode == "sampled":
        if sample_budget < 1:
            raise InvalidInputError("sample_budget must be at least 1")
        return _jumbled_sampled(g, float(p), int(sample_budget), seed)
    raise InvalidInputError(f"unknown mode {mode!r}")


def _jumbled_exhaustive(g: ExplicitGraph, p: float) -> JumbledReport:
    n = g.n
    adj = np.zeros(n, dtype=np.int64)
    for a, b in zip(g.u.tolist(), g.v.tolist()):
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    total = 1 << n
    # e[S] = e[S - {b}] + |N(b) & (S - {b})| with b the highest bit of S
    e = np.zeros(total, dtype=np.int64)
    for b in range(n):
        lo = 1 << b
        ms = np.arange(lo, dtype=np.int64)
        e[lo : 2 * lo] = e[:lo] + np.bitwise_count(ms & adj[b])
    masks = np.arange(1, total, dtype=np.int64)
    sizes = np.bitwise_count(masks).astype(np.float64)
    dev = np.abs(e[1:] - p * sizes * (sizes - 1) / 2.0) / sizes
    k = int(np.argmax(dev))
    worst = int(masks[k])
    return JumbledReport(
        p=p,
        alpha_min=float(dev[k]),
        mode="exhaustive",
        samples_examined=total - 1,
        worst_subset=[i for i in range(n) if worst >> i & 1],
    )


def _jumbled_sampled(g: ExplicitGraph, p: float, budget: int, seed: int) -> JumbledReport:
    n = g.n
    rng = make_rng(seed)
    best, best_set = 0.0, [0]
    done = 0
    batch = max(1, min(512, 2_000_000 // max(n, 1)))
    while done < budget:
        m = min(batch, budget - done)
        sizes = rng.integers(1, n + 1, size=m)
        ranks = np.argsort(rng.random((m, n)), axis=1)
        member = np.zeros((m, n), dtype=bool)
        rows = np.repeat(np.arange(m), sizes)
        cols = np.concatenate([ranks[i, : sizes[i]] for i in range(m)])
        member[rows, cols] = True
        e = (member[:, g.u] & member[:, g.v]).sum(axis=1)
        s = sizes.astype(np.float64)
        dev = np.abs(e - p * s * (s - 1) / 2.0) / s
        k = int(np.argmax(dev))
        if dev[k] > best:
            best = float(dev[k])
            best_set = np.flatnonzero(member[k]).tolist()
        done += m
    return JumbledReport(p=p, alpha_min=best, mode="sampled", samples_examined=budget, worst_subset=best_set)


def two_set_deviation(g: ExplicitGraph, U, W, p: float | None = None) -> float:
    """``|e(U, W) - p |U| |W||`` counting edges (not weights) between disjoint U, W."""
    if not isinstance(g, ExplicitGraph):
        raise InvalidInputError("two_set_deviation needs an explicit graph")
    U, W = list(U), list(W)
    if not U or not W:
        raise InvalidInputError("U and W must be non-empty")
    in_u = _as_vertex_mask(g.n, U)
    in_w = _as_vertex_mask(g.n, W)
    if np.any(in_u & in_w):
        raise InvalidInputError("U and W must be disjoint")
    if p is None:
        p = g.density
    cross = (in_u[g.u] & in_w[g.v]) | (in_w[g.u] & in_u[g.v])
    return abs(int(cross.sum()) - p * int(in_u.sum()) * int(in_w.sum()))


# --------------------------------------------------------------------------
# edge-list text format


def read_edge_list(path, n: int | None = None) -> ExplicitGraph:
    """Parse ``u v [weight]`` lines; ``#`` starts a comment.

    A comment of the form ``# n = 50`` (as written by :func:`write_edge_list`)
    fixes the vertex count; otherwise ``n`` defaults to the largest index + 1.
    """
    edges = []
    hinted = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line, _, comment = raw.partition("#")
            if comment and hinted is None:
                key, sep, val = comment.partition("=")
                if sep and key.strip() == "n":
                    try:
                        hinted = int(val.strip())
                    except ValueError:
                        pass
            parts = line.split()
            if not parts:
                continue
            if len(parts) not in (2, 3):
                raise InvalidInputError(f"{path}:{lineno}: expected 'u v [weight]'")
            try:
                edge = (int(parts[0]), int(parts[1])) + ((float(parts[2]),) if len(parts) == 3 else ())
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from None
            edges.append(edge)
    if n is None:
        n = hinted
    if n is None:
        n = 1 + max((max(e[0], e[1]) for e in edges), default=0)
    return ExplicitGraph(n, edges)


def write_edge_list(g: ExplicitGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n = {g.n}\n")
        for a, b, w in g.edges():
            fh.write(f"{a} {b} {w!r}\n")


def binomial_edge_band(n: int, p: float, k: float = 3.0) -> tuple[float, float]:
    """Mean and ``k`` standard deviations of the G(n, p) edge count."""
    pairs = n * (n - 1) / 2
    return p * pairs, k * math.sqrt(p * (1 - p) * pairs)
