"""Transition equilibria, threshold classification and surviving-set prediction.

Everything here works on effective infection rates (raw rate times density)
and real-valued vertex counts.  Nothing is rounded.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InvalidInputError

BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True)
class Equilibrium2:
    R1_star: float
    R2_star: float
    I1_star: float
    I2_star: float
    valid: bool

    def to_dict(self) -> dict:
        return {
            "R1_star": self.R1_star,
            "R2_star": self.R2_star,
            "I1_star": self.I1_star,
            "I2_star": self.I2_star,
            "valid": self.valid,
        }


def _effective(params):
    """(lambda1_eff, lambda2_eff, rho1, rho2) from a RateParams-like object."""
    return params.lambda1_eff, params.lambda2_eff, params.rho1, params.rho2


def equilibrium2(params, n: float) -> Equilibrium2:
    lam1, lam2, rho1, rho2 = _effective(params)
    R1 = rho2 / lam2
    R2 = rho1 / lam1
    rest = n - R1 - R2
    return Equilibrium2(
        R1_star=R1,
        R2_star=R2,
        I1_star=rest * rho2 / (rho1 + rho2),
        I2_star=rest * rho1 / (rho1 + rho2),
        valid=bool(R1 + R2 < n),
    )


def mean_field_derivatives(state, params):
    """Mean-field rates of change ``(dI1, dR1, dI2, dR2)``.

    ``state`` is ``(I1, R1, I2, R2)``; entries may be numpy arrays.
    """
    I1, R1, I2, R2 = state
    lam1, lam2, rho1, rho2 = _effective(params)
    inf1 = lam1 * I1 * R2
    rec1 = rho1 * I1
    inf2 = lam2 * I2 * R1
    rec2 = rho2 * I2
    return (inf1 - rec1, rec1 - inf2, inf2 - rec2, rec2 - inf1)


class Regime(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class ThresholdResult:
    regime: Regime
    S: float
    S_over_n: float


def threshold_sum(params) -> float:
    lam1, lam2, rho1, rho2 = _effective(params)
    return rho1 / lam1 + rho2 / lam2


def threshold_classify(params, n: float, c: float) -> ThresholdResult:
    """Subcritical (infections persist) when S < (1-c)n, supercritical
    (quick die-out) when S > (1+c)n, marginal in between."""
    if c <= 0:
        raise InvalidInputError(f"margin c must be positive, got {c!r}")
    S = threshold_sum(params)
    if S < (1 - c) * n:
        regime = Regime.SUBCRITICAL
    elif S > (1 + c) * n:
        regime = Regime.SUPERCRITICAL
    else:
        regime = Regime.MARGINAL
    return ThresholdResult(regime, S, S / n)


# --------------------------------------------------------------------------
# k infections


@dataclass(frozen=True)
class EquilibriumK:
    R_star: np.ndarray
    R_star_total: float
    I_star: np.ndarray
    survives: np.ndarray
    feasible: bool

    def to_dict(self) -> dict:
        return {
            "R_star": self.R_star.tolist(),
            "R_star_total": self.R_star_total,
            "I_star": self.I_star.tolist(),
            "survives": self.survives.tolist(),
            "feasible": self.feasible,
        }


def weakness(lambda_eff, rho) -> np.ndarray:
    """Susceptible pool size each infection needs to break even: rho / lambda_eff."""
    return np.asarray(rho, dtype=float) / np.asarray(lambda_eff, dtype=float)


def _check_k(lambda_eff, rho):
    lam = np.asarray(lambda_eff, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if lam.ndim != 1 or lam.shape != rho.shape or len(lam) < 2:
        raise InvalidInputError("need matching rate vectors with k >= 2")
    if np.any(lam <= 0) or np.any(rho <= 0):
        raise InvalidInputError("all rates must be positive")
    return lam, rho


def equilibrium_k(kparams, n: float) -> EquilibriumK:
    lam, rho = _check_k(kparams.lambda_eff, kparams.rho)
    k = len(lam)
    w = rho / lam
    total = w.sum()
    others = total - w
    R = (others - (k - 2) * w) / (k - 1)
    R_total = total / (k - 1)
    share = R / lam
    I = share / share.sum() * (n - R_total)
    if k == 2:
        survives = np.ones(2, dtype=bool)
    else:
        survives = w < others / (k - 2)
    feasible = bool(R_total < n and np.all(R > 0))
    return EquilibriumK(R, float(R_total), I, survives, feasible)


def mean_field_derivatives_k(I, R, kparams):
    """``(dI, dR)`` arrays for the k-infection mean field.

    Infection i draws susceptibles from every R_j with j != i.
    """
    lam, rho = _check_k(kparams.lambda_eff, kparams.rho)
    I = np.asarray(I, dtype=float)
    R = np.asarray(R, dtype=float)
    susceptible = R.sum() - R
    gain = lam * I * susceptible
    pressure = lam * I
    loss = R * (pressure.sum() - pressure)
    rec = rho * I
    return gain - rec, rec - loss


def subset_objective(w, subset) -> float:
    idx = list(subset)
    return float(np.sum(np.asarray(w)[idx]) / (len(idx) - 1))


@dataclass(frozen=True)
class SurvivingSet:
    members: tuple | None
    objective: float
    heuristic: bool = False


def _brute_force(w: np.ndarray):
    k = len(w)
    masks = np.arange(1, 1 << k, dtype=np.int64)
    sizes = np.bitwise_count(masks).astype(np.int64)
    masks, sizes = masks[sizes >= 2], sizes[sizes >= 2]
    bits = (masks[:, None] >> np.arange(k)) & 1
    obj = (bits * w).sum(axis=1) / (sizes - 1)
    best = obj.min()
    tied = np.flatnonzero(obj == best)
    # ties: larger set first, then lexicographically smallest index tuple
    cands = [tuple(np.flatnonzero(bits[t]).tolist()) for t in tied]
    choice = min(cands, key=lambda s: (-len(s), s))
    return choice, float(best)


def _greedy(w: np.ndarray):
    members = list(range(len(w)))
    while len(members) > 2:
        ws = w[members]
        top = ws.max()
        worst = max(i for i in members if w[i] == top)
        others = ws.sum() - top
        k = len(members)
        if others - (k - 2) * top > 0:
            break
        members.remove(worst)
    return tuple(members), subset_objective(w, members)


def surviving_set(kparams, n: float, method: str = "brute") -> SurvivingSet:
    """Predicted set of coexisting infections (0-based indices), or members=None
    when even the best set has objective >= n.

    ``method="brute"`` enumerates all subsets of size >= 2 and is authoritative.
    ``method="greedy"`` repeatedly drops the weakest infection while its
    equilibrium recovered count is non-positive; its result is flagged heuristic.
    """
    lam, rho = _check_k(kparams.lambda_eff, kparams.rho)
    w = rho / lam
    if method == "brute":
        if len(w) > BRUTE_FORCE_LIMIT:
            raise CapacityError(f"brute-force surviving set needs k <= {BRUTE_FORCE_LIMIT}")
        members, obj = _brute_force(w)
        heuristic = False
    elif method == "greedy":
        members, obj = _greedy(w)
        heuristic = True
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    if obj >= n:
        return SurvivingSet(None, obj, heuristic)
    return SurvivingSet(members, obj, heuristic)


def all_subsets(k: int):
    """Every index subset of size >= 2, for small reference computations."""
    for size in range(2, k + 1):
        yield from itertools.combinations(range(k), size)
