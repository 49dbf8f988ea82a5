"""Experiment orchestration: configs, replicate fan-out, survival statistics,
threshold sweeps, k-infection runs, drift audits and reported constants.

Every output file is a deterministic function of the config and base seed.
Wall-clock time is written separately (``timing.json``) so that
``stats.json`` stays byte-identical across repeated runs.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import potential as pot
from .dynamics import (
    DEFAULT_STRIDE,
    CountState,
    KCountState,
    KRateParams,
    RateParams,
    StopRule,
    Trajectory,
    make_initial,
    run,
    run_k,
)
from .equilibrium import equilibrium2, equilibrium_k, surviving_set, threshold_sum
from .errors import InvalidInputError
from .graph import ExplicitGraph, PerfectlyMixed, generate_erdos_renyi, read_edge_list
from .rng import make_rng, replicate_seed

DEFAULT_MAX_EVENTS = 10**8


def default_t_max(n: int) -> float:
    """Censor time for sweeps: 50 n ln n."""
    return 50.0 * n * math.log(max(n, 2))


# --------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    model: dict
    rates: dict
    initial: dict = field(default_factory=lambda: {"eps_h": 0.25, "r_split": 0.5})
    replicates: int = 1
    t_max: float | None = None
    max_events: int | None = DEFAULT_MAX_EVENTS
    stride: int = DEFAULT_STRIDE
    base_seed: int = 0
    out: str | None = None
    jobs: int = 1
    write_trajectories: bool = True
    sweep: dict | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        if "model" not in d or "rates" not in d:
            raise InvalidInputError("config needs 'model' and 'rates'")
        cfg = cls(**copy.deepcopy(d))
        if int(cfg.replicates) != cfg.replicates or cfg.replicates < 1:
            raise InvalidInputError("replicates must be a positive integer")
        if cfg.jobs < 1:
            raise InvalidInputError("jobs must be at least 1")
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(load_json(path))

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(getattr(self, k)) for k in self.__dataclass_fields__}


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path} must hold a JSON object")
    return data


def build_model(desc: dict):
    kind = desc.get("type")
    try:
        if kind == "mixed":
            return PerfectlyMixed(int(desc["n"]), float(desc.get("p", 1.0)))
        if kind == "explicit":
            return read_edge_list(desc["path"], desc.get("n"))
        if kind == "erdos_renyi":
            return generate_erdos_renyi(int(desc["n"]), float(desc["p"]), int(desc.get("seed", 0)))
    except KeyError as exc:
        raise InvalidInputError(f"model descriptor is missing {exc}") from None
    except OSError as exc:
        raise InvalidInputError(f"cannot read graph file: {exc}") from None
    raise InvalidInputError(f"unknown model type {kind!r}")


def model_density(model) -> float:
    return model.p if isinstance(model, PerfectlyMixed) else model.density


def build_rates(desc: dict, model) -> RateParams:
    """Raw rates, or effective rates (``lambda1_eff``...) divided by the
    model density, or ``c`` meaning lambda_eff = c/n for both infections."""
    n = model.n
    p = model_density(model)
    if p <= 0:
        raise InvalidInputError("the graph has no edges")
    desc = dict(desc)
    rho1 = float(desc.pop("rho1", 1.0))
    rho2 = float(desc.pop("rho2", 1.0))
    if "c" in desc:
        c = float(desc.pop("c"))
        desc.setdefault("lambda1_eff", c / n)
        desc.setdefault("lambda2_eff", c / n)
    lam = []
    for i in (1, 2):
        if f"lambda{i}" in desc:
            lam.append(float(desc.pop(f"lambda{i}")))
        elif f"lambda{i}_eff" in desc:
            lam.append(float(desc.pop(f"lambda{i}_eff")) / p)
        else:
            raise InvalidInputError(f"rates need lambda{i} or lambda{i}_eff")
    if desc:
        raise InvalidInputError(f"unknown rate keys: {sorted(desc)}")
    return RateParams(lam[0], lam[1], rho1, rho2, p)


def build_initial(desc: dict, n: int) -> CountState:
    if "counts" in desc:
        state = CountState(*desc["counts"])
        if state.n != n:
            raise InvalidInputError(f"initial counts sum to {state.n}, model has n={n}")
        return state
    try:
        return make_initial(n, float(desc["eps_h"]), float(desc.get("r_split", 0.5)))
    except KeyError:
        raise InvalidInputError("initial config needs 'counts' or 'eps_h'") from None


# --------------------------------------------------------------------------
# survival statistics


@dataclass
class SurvivalStats:
    n: int
    params: dict
    S: float
    S_over_n: float
    replicates: int
    uncensored: int
    median_T: float | None
    mean_T: float | None
    min_T: float | None
    max_T: float | None
    censored_fraction: float
    total_events: int
    wall_time: float = 0.0

    def to_dict(self, include_wall_time: bool = False) -> dict:
        d = dict(self.__dict__)
        if not include_wall_time:
            d.pop("wall_time")
        return d


def summarize(trajs: list[Trajectory], n: int, params: RateParams, wall_time: float = 0.0) -> SurvivalStats:
    done = np.array([t.survival_time for t in trajs if not t.censored])
    S = threshold_sum(params)

    def stat(fn):
        return float(fn(done)) if len(done) else None

    return SurvivalStats(
        n=n,
        params=params.to_dict(),
        S=S,
        S_over_n=S / n,
        replicates=len(trajs),
        uncensored=int(len(done)),
        median_T=stat(np.median),
        mean_T=stat(np.mean),
        min_T=stat(np.min),
        max_T=stat(np.max),
        censored_fraction=sum(t.censored for t in trajs) / len(trajs),
        total_events=int(sum(t.event_count for t in trajs)),
        wall_time=wall_time,
    )


# --------------------------------------------------------------------------
# replicate fan-out


def _one_replicate(task):
    model, params, initial, stop, stride, seed, record = task
    traj = run(model, params, initial, stop, stride=stride, seed=seed, record=record)
    traj.extra.pop("final_assignment", None)
    return traj


def run_replicates(model, params, initial, stop: StopRule, replicates: int, base_seed: int,
                   stride: int = DEFAULT_STRIDE, record: bool = True, jobs: int = 1) -> list[Trajectory]:
    """Independent replicates; replicate r uses ``base_seed XOR splitmix64(r)``.

    Results are ordered by replicate index whatever the worker count.
    """
    tasks = [
        (model, params, initial, stop, stride, replicate_seed(base_seed, r), record) for r in range(replicates)
    ]
    if jobs <= 1 or replicates == 1:
        return [_one_replicate(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_one_replicate, tasks))


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _stop_for(cfg: ExperimentConfig, n: int) -> StopRule:
    t_max = default_t_max(n) if cfg.t_max is None else float(cfg.t_max)
    return StopRule(t_max=t_max, max_events=cfg.max_events)


def simulate(cfg: ExperimentConfig) -> tuple[SurvivalStats, list[Trajectory]]:
    """Run all replicates and, if ``cfg.out`` is set, write
    ``stats.json``, ``timing.json`` and ``trajectories/rep_XXXX.{csv,json}``."""
    model = build_model(cfg.model)
    params = build_rates(cfg.rates, model)
    initial = build_initial(cfg.initial, model.n)
    stop = _stop_for(cfg, model.n)
    start = time.perf_counter()
    trajs = run_replicates(
        model, params, initial, stop, cfg.replicates, cfg.base_seed,
        stride=cfg.stride, record=cfg.write_trajectories, jobs=cfg.jobs,
    )
    stats = summarize(trajs, model.n, params, time.perf_counter() - start)
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        summary = stats.to_dict()
        summary["t_max"] = stop.t_max
        summary["max_events"] = stop.max_events
        summary["base_seed"] = cfg.base_seed
        summary["model"] = model.describe()
        summary["survival_times"] = [t.survival_time for t in trajs]
        summary["censored"] = [t.censored for t in trajs]
        write_json(os.path.join(cfg.out, "stats.json"), summary)
        write_json(os.path.join(cfg.out, "timing.json"), {"wall_time_seconds": stats.wall_time})
        if cfg.write_trajectories:
            tdir = os.path.join(cfg.out, "trajectories")
            os.makedirs(tdir, exist_ok=True)
            for r, tr in enumerate(trajs):
                tr.write_csv(os.path.join(tdir, f"rep_{r:04d}.csv"))
                tr.write_metadata(
                    os.path.join(tdir, f"rep_{r:04d}.json"),
                    replicate=r,
                    params=params.to_dict(),
                    model=model.describe(),
                    t_max=stop.t_max,
                    max_events=stop.max_events,
                )
    return stats, trajs


# --------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = [
    "knob", "value", "S_over_n", "equilibrium_valid", "replicates", "uncensored",
    "censored_fraction", "median_T", "mean_T", "total_events",
]


def _apply_knob(cfg: ExperimentConfig, knob: str, value: float) -> ExperimentConfig:
    point = copy.deepcopy(cfg)
    rates = dict(point.rates)
    if knob == "c":
        for key in ("lambda1", "lambda2", "lambda1_eff", "lambda2_eff", "c"):
            rates.pop(key, None)
        rates["c"] = value
    elif knob in ("lambda1", "lambda2", "lambda1_eff", "lambda2_eff", "rho1", "rho2"):
        if knob.startswith("lambda"):
            rates.pop(knob.replace("_eff", ""), None)
            rates.pop(knob.split("_")[0] + "_eff", None)
        rates[knob] = value
    else:
        raise InvalidInputError(f"unknown sweep knob {knob!r}")
    point.rates = rates
    return point


def sweep(cfg: ExperimentConfig, knob: str | None = None, values=None, replicates: int | None = None) -> list[dict]:
    """Survival statistics per grid value, rows sorted by value.

    Every grid point reuses the same replicate seeds (common random numbers).
    Trajectories are not written; the table goes to ``sweep.csv``.
    """
    desc = cfg.sweep or {}
    knob = knob or desc.get("knob", "c")
    values = list(values if values is not None else desc.get("values", []))
    if not values:
        raise InvalidInputError("sweep grid is empty")
    diffs = np.diff(values)
    if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise InvalidInputError("sweep grid must be strictly monotone")
    reps = replicates or desc.get("replicates") or cfg.replicates
    rows = []
    start = time.perf_counter()
    for value in sorted(values):
        point = _apply_knob(cfg, knob, float(value))
        model = build_model(point.model)
        params = build_rates(point.rates, model)
        initial = build_initial(point.initial, model.n)
        trajs = run_replicates(
            model, params, initial, _stop_for(point, model.n), reps, cfg.base_seed, record=False, jobs=cfg.jobs
        )
        st = summarize(trajs, model.n, params)
        rows.append({
            "knob": knob,
            "value": float(value),
            "S_over_n": st.S_over_n,
            "equilibrium_valid": equilibrium2(params, model.n).valid,
            "replicates": st.replicates,
            "uncensored": st.uncensored,
            "censored_fraction": st.censored_fraction,
            "median_T": st.median_T,
            "mean_T": st.mean_T,
            "total_events": st.total_events,
        })
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        write_rows(os.path.join(cfg.out, "sweep.csv"), SWEEP_COLUMNS, rows)
        write_json(os.path.join(cfg.out, "timing.json"), {"wall_time_seconds": time.perf_counter() - start})
    return rows


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows_to(stream, columns, rows) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c]) for c in columns])


def write_rows(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        write_rows_to(fh, columns, rows)


# --------------------------------------------------------------------------
# k infections


@dataclass
class KConfig:
    n: int
    rho: list
    lambda_eff: list
    initial: dict
    replicates: int = 10
    t_max: float = 1000.0
    max_events: int | None = DEFAULT_MAX_EVENTS
    base_seed: int = 0
    average_from: float = 0.5
    out: str | None = None
    jobs: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "KConfig":
        d = copy.deepcopy(d)
        d.pop("type", None)
        if "weakness" in d:
            w = [float(x) for x in d.pop("weakness")]
            rho = [float(x) for x in d.get("rho", [1.0] * len(w))]
            d["rho"] = rho
            d["lambda_eff"] = [r / x for r, x in zip(rho, w)]
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown k-config keys: {sorted(unknown)}")
        try:
            cfg = cls(**d)
        except TypeError as exc:
            raise InvalidInputError(f"bad k-config: {exc}") from None
        if len(cfg.rho) != len(cfg.lambda_eff) or len(cfg.rho) < 2:
            raise InvalidInputError("k-config needs matching rate lists with k >= 2")
        if not (0 <= cfg.average_from < 1):
            raise InvalidInputError("average_from must lie in [0, 1)")
        return cfg

    @property
    def k(self) -> int:
        return len(self.rho)

    def kparams(self) -> KRateParams:
        return KRateParams(tuple(self.lambda_eff), tuple(self.rho))

    def initial_state(self) -> KCountState:
        """Explicit ``{"I": [...], "R": [...]}``, or ``{"eps": f}`` giving every
        infection floor(f n) infected and spreading the rest evenly over the R classes."""
        if "I" in self.initial:
            s = KCountState(tuple(self.initial["I"]), tuple(self.initial["R"]))
        elif "eps" in self.initial:
            k = self.k
            infected = math.floor(float(self.initial["eps"]) * self.n)
            rest = self.n - k * infected
            if rest < 0:
                raise InvalidInputError("eps too large for k infections")
            R = [rest // k + (1 if i < rest % k else 0) for i in range(k)]
            s = KCountState((infected,) * k, tuple(R))
        else:
            raise InvalidInputError("k initial config needs I/R lists or eps")
        if s.n != self.n or s.k != self.k:
            raise InvalidInputError("initial counts do not match n and k")
        return s


def _one_k(task):
    k, kp, init, stop, seed, avg_start = task
    return run_k(k, kp, init, stop, stride=0, seed=seed, record=False, avg_start=avg_start)


def ksim(kcfg: KConfig) -> dict:
    """Extinction order and coexistence statistics against the predicted
    surviving set and its equilibrium."""
    kp = kcfg.kparams()
    init = kcfg.initial_state()
    stop = StopRule(t_max=kcfg.t_max, max_events=kcfg.max_events)
    avg_start = kcfg.average_from * kcfg.t_max
    tasks = [(kcfg.k, kp, init, stop, replicate_seed(kcfg.base_seed, r), avg_start) for r in range(kcfg.replicates)]
    if kcfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=kcfg.jobs) as pool:
            trajs = list(pool.map(_one_k, tasks))
    else:
        trajs = [_one_k(t) for t in tasks]

    predicted = surviving_set(kp, kcfg.n)
    pred_members = predicted.members
    pred_eq = None
    if pred_members is not None:
        sub = KRateParams(tuple(kp.lambda_eff[i] for i in pred_members), tuple(kp.rho[i] for i in pred_members))
        eq = equilibrium_k(sub, kcfg.n)
        I_full = [0.0] * kcfg.k
        R_full = [0.0] * kcfg.k
        for pos, i in enumerate(pred_members):
            I_full[i] = float(eq.I_star[pos])
            R_full[i] = float(eq.R_star[pos])
        pred_eq = {"I_star": I_full, "R_star": R_full, "feasible": eq.feasible}

    replicas = []
    first_counts = [0] * kcfg.k
    set_counts: dict = {}
    for r, tr in enumerate(trajs):
        ext = tr.extra["extinction_times"]
        order = sorted((t, i) for i, t in enumerate(ext) if t is not None)
        order = [i for _, i in order]
        if order:
            first_counts[order[0]] += 1
        survivors = tuple(i for i, t in enumerate(ext) if t is None)
        set_counts[survivors] = set_counts.get(survivors, 0) + 1
        replicas.append({
            "replicate": r,
            "seed": tr.seed,
            "extinction_order": order,
            "extinction_times": ext,
            "survivors": list(survivors),
            "censored": tr.censored,
            "end_time": tr.survival_time,
            "event_count": tr.event_count,
            "avg_I": tr.extra["avg_I"],
            "avg_R": tr.extra["avg_R"],
        })

    comparison = None
    if pred_eq is not None:
        matching = [
            rep for rep in replicas
            if tuple(rep["survivors"]) == tuple(pred_members) and rep["avg_I"] is not None
            and rep["censored"]
        ]
        if matching:
            mean_I = np.mean([rep["avg_I"] for rep in matching], axis=0)
            mean_R = np.mean([rep["avg_R"] for rep in matching], axis=0)
            rel = [
                abs(mean_I[i] - pred_eq["I_star"][i]) / pred_eq["I_star"][i] for i in pred_members
            ]
            comparison = {
                "replicates_used": len(matching),
                "mean_avg_I": mean_I.tolist(),
                "mean_avg_R": mean_R.tolist(),
                "relative_error_I": dict(zip((str(i) for i in pred_members), rel)),
            }

    result = {
        "k": kcfg.k,
        "n": kcfg.n,
        "weakness": [r / lam for r, lam in zip(kp.rho, kp.lambda_eff)],
        "predicted_surviving_set": None if pred_members is None else list(pred_members),
        "predicted_objective": predicted.objective,
        "predicted_equilibrium": pred_eq,
        "first_extinct_counts": first_counts,
        "first_extinct_fraction": [c / kcfg.replicates for c in first_counts],
        "surviving_set_counts": {",".join(map(str, s)): c for s, c in sorted(set_counts.items())},
        "equilibrium_comparison": comparison,
        "replicates": replicas,
    }
    if kcfg.out:
        os.makedirs(kcfg.out, exist_ok=True)
        write_json(os.path.join(kcfg.out, "ksim.json"), result)
    return result


# --------------------------------------------------------------------------
# drift audit and reported constants

DRIFT_COLUMNS = ["n", "state_id", "I1", "R1", "I2", "R2", "dL_dt", "r_total", "D_exact", "abs_err"]


@dataclass
class AuditConfig:
    """Rates given as n-free constants: lambda_i_eff = c_i / n."""

    c1: float = 4.0
    c2: float = 4.0
    rho1: float = 1.0
    rho2: float = 1.0
    eps_l: float = 0.05
    eps_h: float = 0.1
    n_list: list = field(default_factory=lambda: [1000, 10000, 100000])
    samples: int = 100
    seed: int = 0
    margin: float | None = None
    n: int | None = None
    band_samples: int = 10_000
    out: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "AuditConfig":
        d = dict(d)
        d.pop("type", None)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown audit keys: {sorted(unknown)}")
        cfg = cls(**d)
        if not (0 < cfg.eps_l < cfg.eps_h <= 0.5):
            raise InvalidInputError("need 0 < eps_l < eps_h <= 0.5")
        return cfg

    def params(self, n: int) -> RateParams:
        return RateParams.from_effective(self.c1 / n, self.c2 / n, self.rho1, self.rho2)

    def threshold_margin(self) -> float:
        return 1.0 - (self.rho1 / self.c1 + self.rho2 / self.c2)


def sample_band_fractions(rng, size: int, eps_l: float, eps_h: float) -> np.ndarray:
    """Uniform points of the simplex {x >= 0, sum 1} with x_I1, x_I2 >= eps_l
    and min(x_I1, x_I2) <= eps_h, as rows (I1, R1, I2, R2)."""
    out = []
    have = 0
    while have < size:
        x = rng.dirichlet(np.ones(4), size=max(4 * (size - have), 256))
        lo = np.minimum(x[:, 0], x[:, 2])
        x = x[(lo >= eps_l) & (lo <= eps_h)]
        out.append(x)
        have += len(x)
    return np.concatenate(out)[:size]


def states_from_fractions(fracs: np.ndarray, n: int) -> np.ndarray:
    """Floor each fraction times n; R2 takes the remainder so rows sum to n."""
    st = np.floor(fracs * n).astype(np.int64)
    st[:, 3] = n - st[:, :3].sum(axis=1)
    return st


def _channel_partial(parts, move):
    """Directional derivative of L along a channel's unit move."""
    return sum(m * p for m, p in zip(move, parts))


def drift_audit(cfg: AuditConfig) -> dict:
    """Exact drift vs derivative/rate on the same band states at every n.

    One set of band fractions is drawn and scaled to each n so the error
    sequence isolates the dependence on n.
    """
    fracs = sample_band_fractions(make_rng(cfg.seed), cfg.samples, cfg.eps_l, cfg.eps_h)
    rows = []
    summary = []
    for n in cfg.n_list:
        n = int(n)
        params = cfg.params(n)
        eq = equilibrium2(params, n)
        if not eq.valid:
            raise InvalidInputError(f"no valid equilibrium at n={n}")
        pp = pot.PotentialParams.default(params, n)
        st = states_from_fractions(fracs, n)
        ok = (st[:, 0] >= 2) & (st[:, 2] >= 2)
        if not np.any(ok):
            raise InvalidInputError(f"empty band at n={n}")
        st = st[ok]
        s = tuple(st.T.astype(float))
        D = np.asarray(pot.discrete_drift(s, params, eq=eq, pp=pp))
        dl = np.asarray(pot.dL_dt(s, params, eq=eq, pp=pp))
        rates = pot.channel_rates(s, params)
        r = rates[0] + rates[1] + rates[2] + rates[3]
        err = np.abs(D - dl / r)
        parts = pot.L_partials(s, eq, pp)
        changes = pot.L_channel_changes(s, eq, pp)
        step_err = np.zeros(len(st))
        max_step = np.zeros(len(st))
        for move, ch in zip(pot.CHANNEL_MOVES, changes):
            step_err = np.maximum(step_err, np.abs(np.asarray(ch) - _channel_partial(parts, move)))
            max_step = np.maximum(max_step, np.abs(ch))
        unit_err = np.zeros(len(st))
        for k in range(4):
            new = list(s)
            new[k] = new[k] + 1
            unit_err = np.maximum(unit_err, np.abs(np.asarray(pot.L_change(s, tuple(new), eq, pp)) - parts[k]))
        for i in range(len(st)):
            rows.append({
                "n": n, "state_id": i, "I1": int(st[i, 0]), "R1": int(st[i, 1]), "I2": int(st[i, 2]),
                "R2": int(st[i, 3]), "dL_dt": float(dl[i]), "r_total": float(r[i]), "D_exact": float(D[i]),
                "abs_err": float(err[i]),
            })
        summary.append({
            "n": n,
            "states": int(len(st)),
            "max_abs_err": float(err.max()),
            "mean_abs_err": float(err.mean()),
            "max_channel_err": float(step_err.max()),
            "max_unit_step_err": float(unit_err.max()),
            "max_step": float(max_step.max()),
            "max_drift": float(D.max()),
        })
    result = {"config": cfg.__dict__.copy(), "rows": rows, "summary": summary}
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        write_rows(os.path.join(cfg.out, "drift_check.csv"), DRIFT_COLUMNS, rows)
        write_json(os.path.join(cfg.out, "drift_summary.json"), summary)
    return result


def report_theorem_constants(cfg: AuditConfig, n: int | None = None, c: float | None = None) -> dict:
    """Band constants, the scaled-potential interval (a, b) and the measured
    drift on the band at this n.  Informational only.

    ``n`` defaults to ``cfg.n`` then the first entry of ``cfg.n_list``; the
    margin ``c`` defaults to ``cfg.margin`` then the actual margin 1 - S/n.
    """
    n = int(n or cfg.n or cfg.n_list[0])
    params = cfg.params(n)
    if c is None:
        c = cfg.margin if cfg.margin is not None else cfg.threshold_margin()
    bc = pot.band_constants(cfg.eps_l, cfg.eps_h, params, n, c, samples=cfg.band_samples, seed=cfg.seed)
    states = pot.sample_states(
        n, cfg.band_samples, make_rng(cfg.seed + 1),
        min_I=max(2, math.ceil(cfg.eps_l * n)), max_min_I=math.floor(cfg.eps_h * n),
    )
    D = np.asarray(pot.discrete_drift(tuple(states.T.astype(float)), params))
    worst = float(D.max())
    out = {
        "n": n,
        "c": c,
        "params": params.to_dict(),
        **bc.to_dict(),
        "a": -1.0,
        "b": (bc.c_h * n - bc.c_l * n) / bc.c_s - 1.0,
        "band_states": int(len(states)),
        "max_drift_on_band": worst,
        "kappa": -worst * math.log(n),
    }
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        write_json(os.path.join(cfg.out, "constants.json"), out)
    return out
