"""Exact continuous-time simulation of two competing infections with
mutually exclusive immunity, and of its k-infection generalisation.

Every vertex is in exactly one of four classes.  Infection 1 moves a vertex
R2 -> I1 (it can only infect vertices immune to infection 2), recovery moves
I1 -> R1, and symmetrically for infection 2.  The simulation draws the
waiting time from the total rate and the event from the channel rates, which
is distributionally the same as racing one exponential clock per edge and
vertex.  Only transitions that change the state are ever generated.

Two engines are provided:

* the count engine tracks only the four class sizes and is exact on a
  perfectly mixed graph;
* the vertex engine tracks a label per vertex on an explicit weighted graph,
  with per-vertex infection pressure, Fenwick trees to sample the infected
  vertex and cached class-edge weights updated in O(deg) per event.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .errors import InvalidInputError
from .graph import ClassEdgeTracker, ExplicitGraph, PerfectlyMixed
from .rng import make_rng

DEFAULT_STRIDE = 100
_CHUNK = 1 << 20

CLASS_NAMES = ("I1", "R1", "I2", "R2")


@dataclass(frozen=True)
class RateParams:
    lambda1: float
    lambda2: float
    rho1: float
    rho2: float
    density: float = 1.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "rho1", "rho2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidInputError(f"{name} must be a positive finite number, got {v!r}")
        if not (0 < self.density <= 1):
            raise InvalidInputError(f"density must lie in (0, 1], got {self.density!r}")

    @property
    def lambda1_eff(self) -> float:
        return self.lambda1 * self.density

    @property
    def lambda2_eff(self) -> float:
        return self.lambda2 * self.density

    @classmethod
    def from_effective(cls, lambda1_eff, lambda2_eff, rho1, rho2) -> "RateParams":
        return cls(float(lambda1_eff), float(lambda2_eff), float(rho1), float(rho2), 1.0)

    def with_density(self, p: float) -> "RateParams":
        return RateParams(self.lambda1, self.lambda2, self.rho1, self.rho2, p)

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "rho1": self.rho1,
            "rho2": self.rho2,
            "density": self.density,
            "lambda1_eff": self.lambda1_eff,
            "lambda2_eff": self.lambda2_eff,
        }


@dataclass(frozen=True)
class CountState:
    I1: int
    R1: int
    I2: int
    R2: int

    def __post_init__(self):
        for name in CLASS_NAMES:
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise InvalidInputError(f"{name} must be a non-negative integer, got {v!r}")

    def __iter__(self):
        return iter((self.I1, self.R1, self.I2, self.R2))

    @property
    def n(self) -> int:
        return self.I1 + self.R1 + self.I2 + self.R2

    @property
    def absorbed(self) -> bool:
        return self.I1 == 0 and self.I2 == 0

    def as_array(self) -> np.ndarray:
        return np.array([self.I1, self.R1, self.I2, self.R2], dtype=np.int64)

    @classmethod
    def from_array(cls, a) -> "CountState":
        return cls(*(int(x) for x in a))


class EventKind(enum.IntEnum):
    INFECT1 = 0  # R2 -> I1
    RECOVER1 = 1  # I1 -> R1
    INFECT2 = 2  # R1 -> I2
    RECOVER2 = 3  # I2 -> R2


# (source class, target class) per event kind, as indices into CLASS_NAMES
TRANSITIONS = {
    EventKind.INFECT1: (3, 0),
    EventKind.RECOVER1: (0, 1),
    EventKind.INFECT2: (1, 2),
    EventKind.RECOVER2: (2, 3),
}


@dataclass(frozen=True)
class Event:
    kind: EventKind
    time: float
    vertex: int | None = None


def apply_event(state: CountState, kind: EventKind) -> CountState:
    src, dst = TRANSITIONS[EventKind(kind)]
    a = state.as_array()
    if a[src] == 0:
        raise InvalidInputError(f"{EventKind(kind).name} needs a non-empty source class")
    a[src] -= 1
    a[dst] += 1
    return CountState.from_array(a)


# --------------------------------------------------------------------------
# vertex assignment


@dataclass(frozen=True)
class _EdgeArrays:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray


class VertexAssignment:
    """Per-vertex labels on an explicit graph plus the engine's incremental
    bookkeeping (pressures, Fenwick trees, class member lists, cached
    e(I1, R2) and e(I2, R1))."""

    def __init__(self, graph: ExplicitGraph, labels):
        labels = np.array(labels, dtype=np.int64)
        if labels.shape != (graph.n,):
            raise InvalidInputError("need one label per vertex")
        if len(labels) and (labels.min() < 0 or labels.max() > 3):
            raise InvalidInputError("labels must be 0..3 (I1, R1, I2, R2)")
        self.graph = graph
        w0 = graph.uniform_weight
        # uniform weights are stored as 1 so class-edge sums are exact integers
        self.weight_scale = 1.0 if w0 is None else w0
        self.weights = graph.weights.copy() if w0 is None else np.ones_like(graph.weights)
        self.labels = labels
        self._rebuild()

    def _rebuild(self):
        g, labels = self.graph, self.labels
        n = g.n
        self.counts = np.bincount(labels, minlength=4).astype(np.int64)
        self.members = np.zeros((4, max(n, 1)), dtype=np.int64)
        self.pos = np.zeros(n, dtype=np.int64)
        for cls in range(4):
            idx = np.flatnonzero(labels == cls)
            self.members[cls, : len(idx)] = idx
            self.pos[idx] = np.arange(len(idx))
        src = np.repeat(np.arange(n), np.diff(g.indptr))
        nbr_label = labels[g.indices]
        self.p1 = np.bincount(src, weights=self.weights * (nbr_label == 0), minlength=n).astype(float)
        self.p2 = np.bincount(src, weights=self.weights * (nbr_label == 2), minlength=n).astype(float)
        self.tree1 = np.zeros(n + 1)
        self.tree2 = np.zeros(n + 1)
        for v in range(n):
            if labels[v] == 3 and self.p1[v]:
                kern.fenwick_add(self.tree1, v, self.p1[v])
            elif labels[v] == 1 and self.p2[v]:
                kern.fenwick_add(self.tree2, v, self.p2[v])
        self.cache = np.array(self.recompute_edge_weights())

    @classmethod
    def from_counts(cls, graph: ExplicitGraph, state: CountState, seed: int) -> "VertexAssignment":
        """Random labelling with the given class sizes."""
        if state.n != graph.n:
            raise InvalidInputError(f"counts sum to {state.n}, graph has {graph.n} vertices")
        labels = np.repeat(np.arange(4), state.as_array())
        make_rng(seed).shuffle(labels)
        return cls(graph, labels)

    def recompute_edge_weights(self) -> tuple[float, float]:
        """(e(I1, R2), e(I2, R1)) from the labels, in stored weight units."""
        g = self.graph
        w = g.w if g.uniform_weight is None else np.ones(len(g.w))
        W = ClassEdgeTracker.from_scratch(_EdgeArrays(g.u, g.v, w), self.labels, 4)
        return float(W[0, 3]), float(W[2, 1])

    @property
    def edge_weights(self) -> tuple[float, float]:
        """Cached (e(I1, R2), e(I2, R1)) in graph weight units."""
        return float(self.cache[0] * self.weight_scale), float(self.cache[1] * self.weight_scale)

    def count_state(self) -> CountState:
        return CountState(*(int(c) for c in self.counts))

    def move(self, v: int, new_class: int) -> None:
        g = self.graph
        kern.vertex_move(
            int(v), int(new_class), self.labels, self.pos, self.members, self.counts,
            self.p1, self.p2, self.tree1, self.tree2, self.cache,
            g.indptr, g.indices, self.weights,
        )

    def copy(self) -> "VertexAssignment":
        return VertexAssignment(self.graph, self.labels.copy())


# --------------------------------------------------------------------------
# rates and single steps


def event_rates(state, params: RateParams, model=None):
    """``(r_infect1, r_recover1, r_infect2, r_recover2, r_total)``.

    With a :class:`CountState` on a perfectly mixed model (or no model) the
    infection rates use effective rates times class-size products.  With a
    :class:`VertexAssignment` they use raw rates times class-edge weights.
    """
    if isinstance(state, VertexAssignment):
        e12, e21 = state.cache
        scale = state.weight_scale
        c = state.counts
        r = (
            (params.lambda1 * scale) * float(e12),
            params.rho1 * int(c[0]),
            (params.lambda2 * scale) * float(e21),
            params.rho2 * int(c[2]),
        )
    else:
        if isinstance(model, PerfectlyMixed) and model.p != params.density:
            params = params.with_density(model.p)
        I1, R1, I2, R2 = (int(x) for x in state)
        r = (
            params.lambda1_eff * (I1 * R2),
            params.rho1 * I1,
            params.lambda2_eff * (I2 * R1),
            params.rho2 * I2,
        )
    return r + (r[0] + r[1] + r[2] + r[3],)


def step(state, params: RateParams, model, rng):
    """One transition.  Returns ``(Event, new_state)`` or ``None`` when absorbed.

    Count states are immutable and a new one is returned; a
    :class:`VertexAssignment` is updated in place and returned.  The event
    time is the waiting time since the current state.
    """
    if isinstance(state, VertexAssignment):
        if state.counts[0] == 0 and state.counts[2] == 0:
            return None
        g = state.graph
        last = np.zeros(2, dtype=np.int64)
        t, _, _ = kern.vertex_chunk(
            state.labels, state.pos, state.members, state.counts, state.p1, state.p2,
            state.tree1, state.tree2, state.cache, g.indptr, g.indices, state.weights,
            params.lambda1 * state.weight_scale, params.rho1,
            params.lambda2 * state.weight_scale, params.rho2,
            0.0, math.inf, 1, rng, last,
        )
        return Event(EventKind(int(last[0])), t, int(last[1])), state
    if isinstance(model, PerfectlyMixed) and model.p != params.density:
        params = params.with_density(model.p)
    if state.absorbed:
        return None
    r0, r1, r2, r3, total = event_rates(state, params)
    dt = rng.standard_exponential() / total
    u = rng.random() * total
    kind = EventKind(kern._pick.py_func(u, r0, r1, r2, r3))
    return Event(kind, dt), apply_event(state, kind)


def make_initial(n: int, eps_h: float, r_split: float) -> CountState:
    """I1 = I2 = floor(eps_h n); the rest split R1 = round(r_split rest), R2 = rest - R1."""
    if int(n) != n or n < 1:
        raise InvalidInputError(f"n must be a positive integer, got {n!r}")
    if not (0 <= r_split <= 1):
        raise InvalidInputError(f"r_split must lie in [0, 1], got {r_split!r}")
    if eps_h < 0:
        raise InvalidInputError("eps_h must be non-negative")
    infected = math.floor(eps_h * n)
    if 2 * infected > n:
        raise InvalidInputError(f"eps_h={eps_h} leaves no room: 2*{infected} > {n}")
    rest = n - 2 * infected
    r1 = math.floor(r_split * rest + 0.5)
    return CountState(infected, r1, infected, rest - r1)


# --------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    times: np.ndarray
    counts: np.ndarray  # rows of (I1, R1, I2, R2) or (I_1, R_1, ..., I_k, R_k)
    event_counts: np.ndarray
    survival_time: float  # absorption time, or the censor time when censored
    censored: bool
    censor_reason: str | None
    event_count: int
    seed: int
    final_counts: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def columns(self) -> list[str]:
        width = self.counts.shape[1]
        if width == 4:
            return ["t", "I1", "R1", "I2", "R2", "event_count"]
        k = width // 2
        cols = ["t"]
        for i in range(1, k + 1):
            cols += [f"I{i}", f"R{i}"]
        return cols + ["event_count"]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns())
            for t, row, ev in zip(self.times.tolist(), self.counts.tolist(), self.event_counts.tolist()):
                w.writerow([repr(t)] + row + [ev])

    def metadata(self) -> dict:
        meta = {
            "seed": self.seed,
            "survival_time": self.survival_time,
            "censored": self.censored,
            "censor_reason": self.censor_reason,
            "event_count": self.event_count,
            "final_counts": list(self.final_counts),
        }
        meta.update(self.extra)
        return meta

    def write_metadata(self, path, **more) -> None:
        meta = self.metadata()
        meta.update(more)
        with open(path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass(frozen=True)
class StopRule:
    t_max: float | None = None
    max_events: int | None = None

    def resolved(self) -> tuple[float, int]:
        t_max = math.inf if self.t_max is None else float(self.t_max)
        if t_max < 0:
            raise InvalidInputError("t_max must be non-negative")
        cap = -1 if self.max_events is None else int(self.max_events)
        if self.max_events is not None and cap < 0:
            raise InvalidInputError("max_events must be non-negative")
        return t_max, cap


class _Recorder:
    def __init__(self, stride: int, first_row, record: bool):
        self.stride = stride
        self.record = record
        self.times = [0.0]
        self.rows = [list(first_row)]
        self.events = [0]

    def add(self, t, row, events):
        if self.events[-1] != events or self.times[-1] != t:
            self.times.append(t)
            self.rows.append(list(row))
            self.events.append(events)

    def build(self):
        return (
            np.array(self.times, dtype=float),
            np.array(self.rows, dtype=np.int64),
            np.array(self.events, dtype=np.int64),
        )


def _drive(advance, snapshot, stride: int, cap: int, record: bool):
    """Shared outer loop: call ``advance(budget)`` in slices so rows land on
    every multiple of ``stride`` events, until absorption or a stop bound."""
    rec = _Recorder(stride, snapshot(), record)
    events = 0
    t = 0.0
    while True:
        if record and stride > 0:
            budget = stride - events % stride
        else:
            budget = _CHUNK
        if cap >= 0:
            budget = min(budget, cap - events)
        t, done, status = advance(budget)
        events += done
        if status == kern.ABSORBED:
            rec.add(t, snapshot(), events)
            return rec, t, events, False, None
        if status == kern.TIME_LIMIT:
            rec.add(t, snapshot(), events)
            return rec, t, events, True, "t_max"
        if cap >= 0 and events >= cap:
            rec.add(t, snapshot(), events)
            return rec, t, events, True, "max_events"
        if record and stride > 0:
            rec.add(t, snapshot(), events)


def run(model, params: RateParams, initial, stop: StopRule, stride: int = DEFAULT_STRIDE, seed: int = 0,
        record: bool = True) -> Trajectory:
    """Simulate until absorption or a stop bound.

    ``model`` is a :class:`PerfectlyMixed` (count engine; ``initial`` is a
    :class:`CountState`) or an :class:`ExplicitGraph` (vertex engine;
    ``initial`` is a :class:`VertexAssignment`, which is copied, or a
    :class:`CountState`, labelled at random from ``seed``).  Rows are
    recorded at t = 0, after every ``stride`` events and at the end;
    ``record=False`` keeps only the first and last rows.
    """
    if stride < 0:
        raise InvalidInputError("stride must be non-negative")
    t_max, cap = stop.resolved()
    rng = make_rng(seed)

    if isinstance(model, PerfectlyMixed):
        if not isinstance(initial, CountState):
            raise InvalidInputError("the count engine needs a CountState")
        if initial.n != model.n:
            raise InvalidInputError(f"counts sum to {initial.n}, model has n={model.n}")
        p = params if params.density == model.p else params.with_density(model.p)
        state = initial.as_array()
        clock = [0.0]

        def advance(budget):
            t, done, status = kern.count_chunk(
                state, clock[0], p.lambda1_eff, p.rho1, p.lambda2_eff, p.rho2, t_max, budget, rng
            )
            clock[0] = t
            return t, done, status

        snapshot = state.tolist
    elif isinstance(model, ExplicitGraph):
        if isinstance(initial, CountState):
            va = VertexAssignment.from_counts(model, initial, seed ^ 0x5DEECE66D)
        elif isinstance(initial, VertexAssignment):
            if initial.graph is not model and initial.graph != model:
                raise InvalidInputError("assignment belongs to a different graph")
            va = initial.copy()
        else:
            raise InvalidInputError("the vertex engine needs a VertexAssignment or CountState")
        clock = [0.0]
        last = np.zeros(2, dtype=np.int64)
        lam1 = params.lambda1 * va.weight_scale
        lam2 = params.lambda2 * va.weight_scale

        def advance(budget):
            t, done, status = kern.vertex_chunk(
                va.labels, va.pos, va.members, va.counts, va.p1, va.p2, va.tree1, va.tree2, va.cache,
                model.indptr, model.indices, va.weights, lam1, params.rho1, lam2, params.rho2,
                clock[0], t_max, budget, rng, last,
            )
            clock[0] = t
            return t, done, status

        snapshot = va.counts.tolist
    else:
        raise InvalidInputError(f"unsupported model {model!r}")

    rec, t, events, censored, reason = _drive(advance, snapshot, stride, cap, record)
    times, counts, evs = rec.build()
    traj = Trajectory(
        times=times,
        counts=counts,
        event_counts=evs,
        survival_time=float(t),
        censored=censored,
        censor_reason=reason,
        event_count=int(events),
        seed=int(seed),
        final_counts=tuple(int(x) for x in counts[-1]),
    )
    if isinstance(model, ExplicitGraph):
        traj.extra["final_assignment"] = va
    return traj


# --------------------------------------------------------------------------
# k infections


@dataclass(frozen=True)
class KRateParams:
    lambda_eff: tuple
    rho: tuple

    def __post_init__(self):
        lam = np.asarray(self.lambda_eff, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if lam.ndim != 1 or lam.shape != rho.shape or len(lam) < 2:
            raise InvalidInputError("need matching rate vectors with k >= 2")
        if not (np.all(lam > 0) and np.all(rho > 0) and np.all(np.isfinite(lam)) and np.all(np.isfinite(rho))):
            raise InvalidInputError("all rates must be positive and finite")
        object.__setattr__(self, "lambda_eff", tuple(float(x) for x in lam))
        object.__setattr__(self, "rho", tuple(float(x) for x in rho))

    @property
    def k(self) -> int:
        return len(self.rho)

    @classmethod
    def from_rate_params(cls, params: RateParams) -> "KRateParams":
        return cls((params.lambda1_eff, params.lambda2_eff), (params.rho1, params.rho2))

    def to_dict(self) -> dict:
        return {"lambda_eff": list(self.lambda_eff), "rho": list(self.rho)}


@dataclass(frozen=True)
class KCountState:
    I: tuple
    R: tuple

    def __post_init__(self):
        I = tuple(int(x) for x in self.I)
        R = tuple(int(x) for x in self.R)
        if len(I) != len(R) or len(I) < 2:
            raise InvalidInputError("need k >= 2 infected and recovered counts")
        if min(I + R) < 0:
            raise InvalidInputError("counts must be non-negative")
        object.__setattr__(self, "I", I)
        object.__setattr__(self, "R", R)

    @property
    def k(self) -> int:
        return len(self.I)

    @property
    def n(self) -> int:
        return sum(self.I) + sum(self.R)

    @property
    def absorbed(self) -> bool:
        return not any(self.I)

    @classmethod
    def from_count_state(cls, s: CountState) -> "KCountState":
        return cls((s.I1, s.I2), (s.R1, s.R2))


def k_event_rates(state: KCountState, kparams: KRateParams) -> tuple[np.ndarray, float]:
    """All channel rates in engine order, and their total.

    Per infection i: infection of R_j for each j != i, then recovery of i.
    """
    k = state.k
    rates = []
    for i in range(k):
        for j in range(k):
            if j != i:
                rates.append(kparams.lambda_eff[i] * (state.I[i] * state.R[j]))
        rates.append(kparams.rho[i] * state.I[i])
    rates = np.array(rates)
    total = 0.0
    for r in rates:
        total += r
    return rates, total


def _row_k(I, R):
    return [int(x) for pair in zip(I, R) for x in pair]


def run_k(k: int, kparams: KRateParams, initial: KCountState, stop: StopRule, stride: int = DEFAULT_STRIDE,
          seed: int = 0, record: bool = True, avg_start: float = math.inf) -> Trajectory:
    """k-infection count engine on a perfectly mixed graph.

    Rows are ``(I_1, R_1, ..., I_k, R_k)``.  ``extra`` holds per-infection
    extinction times (``None`` if still alive) and, when ``avg_start`` is
    finite, the time averages of I_i and R_i from ``avg_start`` to the end.
    """
    if k < 2 or kparams.k != k or initial.k != k:
        raise InvalidInputError("k must be >= 2 and match the rate and state vectors")
    if stride < 0:
        raise InvalidInputError("stride must be non-negative")
    t_max, cap = stop.resolved()
    rng = make_rng(seed)
    I = np.array(initial.I, dtype=np.int64)
    R = np.array(initial.R, dtype=np.int64)
    lam = np.array(kparams.lambda_eff)
    rho = np.array(kparams.rho)
    rates = np.zeros(k * k)
    avg_I = np.zeros(k)
    avg_R = np.zeros(k)
    extinct = np.where(I == 0, 0.0, -1.0)
    clock = [0.0]

    def advance(budget):
        t, done, status = kern.k_chunk(
            I, R, clock[0], lam, rho, t_max, budget, rng, rates, float(avg_start), avg_I, avg_R, extinct
        )
        clock[0] = t
        return t, done, status

    def snapshot():
        return _row_k(I, R)

    rec, t, events, censored, reason = _drive(advance, snapshot, stride, cap, record)
    times, counts, evs = rec.build()
    window = t - avg_start if math.isfinite(avg_start) else 0.0
    extra = {
        "extinction_times": [None if x < 0 else float(x) for x in extinct],
        "avg_start": avg_start if math.isfinite(avg_start) else None,
        "avg_I": (avg_I / window).tolist() if window > 0 else None,
        "avg_R": (avg_R / window).tolist() if window > 0 else None,
    }
    return Trajectory(
        times=times,
        counts=counts,
        event_counts=evs,
        survival_time=float(t),
        censored=censored,
        censor_reason=reason,
        event_count=int(events),
        seed=int(seed),
        final_counts=tuple(int(x) for x in counts[-1]),
        extra=extra,
    )
