"""Lyapunov potentials for the two-infection process and their drift.

The tower is built from the convex gap function ``f(x*, x)``::

    F = x1 f(I1*, I1) + y1 f(R1*, R1) + x2 f(I2*, I2) + y2 f(R2*, R2)
    K = x1 f(I1*, I1) + 2 y1 f(2 R1*, R1 + R1*) + ...        (shifted R terms)
    L = K with the R-term targets moved to (1 + ln I_other* / ln I_other) R*

``F`` and ``K`` are non-increasing along the mean-field flow.  ``L`` is the
potential whose one-step expected change (the drift) is negative on a band
of states where one infection is rare.  ``P`` is the simpler potential used
for the quick die-out regime.

States are ``(I1, R1, I2, R2)`` tuples; entries may be numpy arrays so every
function evaluates a whole batch at once.  Closed-form time derivatives
assume the four counts sum to ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import Equilibrium2, equilibrium2, mean_field_derivatives
from .errors import AbsorbedError, DomainError, InvalidInputError
from .rng import make_rng

_SERIES_CUTOFF = 1e-4


def _arr(x):
    return np.asarray(x, dtype=float)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def f(x_star, x):
    """``x* (x/x* - ln(x/x*) - 1)``: non-negative, zero only at ``x == x*``."""
    xs, x = _arr(x_star), _arr(x)
    if np.any(xs <= 0) or np.any(x <= 0):
        raise DomainError("f needs positive arguments")
    u = x / xs - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = xs * (u - np.log1p(u))
    series = xs * u * u * (0.5 - u / 3.0 + u * u / 4.0 - u * u * u / 5.0)
    return _scalar_or_array(np.where(np.abs(u) < _SERIES_CUTOFF, series, direct))


def f_change(a, b, a_new, b_new):
    """``f(a_new, b_new) - f(a, b)`` without cancellation between large terms."""
    a, b, a_new, b_new = _arr(a), _arr(b), _arr(a_new), _arr(b_new)
    if np.any(a <= 0) or np.any(b <= 0) or np.any(a_new <= 0) or np.any(b_new <= 0):
        raise DomainError("f needs positive arguments")
    da = a_new - a
    db = b_new - b
    # f(a, b) = b - a - a ln(b/a)
    out = db - da - da * np.log(b_new / a_new) - a * (np.log1p(db / b) - np.log1p(da / a))
    return _scalar_or_array(out)


def f_step(x_star, x, step):
    """``f(x*, x + step) - f(x*, x)`` for a fixed target."""
    x_star, x = _arr(x_star), _arr(x)
    if np.any(x_star <= 0) or np.any(x <= 0) or np.any(x + step <= 0):
        raise DomainError("f needs positive arguments")
    return _scalar_or_array(step - x_star * np.log1p(step / x))


# --------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class PotentialParams:
    x1: float
    y1: float
    x2: float
    y2: float

    @classmethod
    def default(cls, params, n: float) -> "PotentialParams":
        """The normalisation under which dF/dt has its simple sum-of-squares form."""
        lam1, lam2 = params.lambda1_eff, params.lambda2_eff
        rho1, rho2 = params.rho1, params.rho2
        return cls(
            x1=(rho1 + rho2) / (rho2 * lam1 * n),
            y1=rho2 / (rho1 * lam2 * n),
            x2=(rho1 + rho2) / (rho1 * lam2 * n),
            y2=rho1 / (rho2 * lam1 * n),
        )

    @classmethod
    def from_y(cls, y1: float, y2: float, rho1: float, rho2: float) -> "PotentialParams":
        """Any positive (y1, y2) extended to a parameter set whose F derivative
        vanishes on the line R = R*."""
        if y1 <= 0 or y2 <= 0:
            raise InvalidInputError("y1, y2 must be positive")
        return cls(x1=(rho1 + rho2) / rho1 * y2, y1=y1, x2=(rho1 + rho2) / rho2 * y1, y2=y2)

    def is_consistent(self, rho1: float, rho2: float, rel: float = 1e-12) -> bool:
        ok2 = math.isclose(self.x2, (rho1 + rho2) / rho2 * self.y1, rel_tol=rel)
        ok1 = math.isclose(self.x1, (rho1 + rho2) / rho1 * self.y2, rel_tol=rel)
        return ok1 and ok2


@dataclass(frozen=True)
class Deltas:
    delta1: float
    delta2: float


def deltas(state, eq: Equilibrium2) -> Deltas:
    _, R1, _, R2 = state
    return Deltas(_scalar_or_array(_arr(R1) - eq.R1_star), _scalar_or_array(_arr(R2) - eq.R2_star))


def _unpack(state):
    I1, R1, I2, R2 = (_arr(v) for v in state)
    return I1, R1, I2, R2


def _resolve(state, params, eq, pp):
    I1, R1, I2, R2 = _unpack(state)
    n = I1 + R1 + I2 + R2
    if eq is None:
        n0 = float(np.max(n))
        if not np.allclose(n, n0, rtol=1e-12, atol=0):
            raise InvalidInputError("batched states must share n when eq is not given")
        eq = equilibrium2(params, n0)
    if not eq.valid:
        raise DomainError("the potentials need a valid two-infection equilibrium")
    if pp is None:
        pp = PotentialParams.default(params, eq.R1_star + eq.R2_star + eq.I1_star + eq.I2_star)
    return (I1, R1, I2, R2), n, eq, pp


def chain_rule_rate(partials, state, params):
    """Σ partial · mean-field rate: the time derivative of any potential."""
    dI1, dR1, dI2, dR2 = mean_field_derivatives(_unpack(state), params)
    pI1, pR1, pI2, pR2 = partials
    return _scalar_or_array(pI1 * dI1 + pR1 * dR1 + pI2 * dI2 + pR2 * dR2)


# --------------------------------------------------------------------------
# F


def _require_positive(*arrays, what="counts"):
    for a in arrays:
        if np.any(a <= 0):
            raise DomainError(f"{what} must be positive")


def F_value(state, eq: Equilibrium2, pp: PotentialParams):
    I1, R1, I2, R2 = _unpack(state)
    _require_positive(I1, R1, I2, R2)
    return _scalar_or_array(
        pp.x1 * _arr(f(eq.I1_star, I1))
        + pp.y1 * _arr(f(eq.R1_star, R1))
        + pp.x2 * _arr(f(eq.I2_star, I2))
        + pp.y2 * _arr(f(eq.R2_star, R2))
    )


def F_partials(state, eq: Equilibrium2, pp: PotentialParams):
    I1, R1, I2, R2 = _unpack(state)
    _require_positive(I1, R1, I2, R2)
    return (
        pp.x1 * (1 - eq.I1_star / I1),
        pp.y1 * (1 - eq.R1_star / R1),
        pp.x2 * (1 - eq.I2_star / I2),
        pp.y2 * (1 - eq.R2_star / R2),
    )


def dF_dt(state, params, eq: Equilibrium2 | None = None, pp: PotentialParams | None = None):
    """Time derivative of F along the mean field.

    With ``pp=None`` the default normalisation is used and the derivative is
    the negative sum of squares.  Any other consistent ``pp`` goes through the
    general two-term form, which scales with y1 and y2.
    """
    (I1, R1, I2, R2), n, eq, pp_used = _resolve(state, params, eq, pp)
    _require_positive(I1, R1, I2, R2)
    d1 = R1 - eq.R1_star
    d2 = R2 - eq.R2_star
    if pp is None:
        out = -(I1 / R1 * d1**2 + I2 / R2 * d2**2 + (d1 + d2) ** 2) / n
    else:
        lam1, lam2 = params.lambda1_eff, params.lambda2_eff
        rho1, rho2 = params.rho1, params.rho2
        out = -lam2 * rho1 / rho2 * pp.y1 * d1 * (I1 * d1 / R1 + d1 + d2) - lam1 * rho2 / rho1 * pp.y2 * d2 * (
            I2 * d2 / R2 + d1 + d2
        )
    return _scalar_or_array(out)


# --------------------------------------------------------------------------
# K


def _require_I(I1, I2):
    if np.any(I1 <= 0) or np.any(I2 <= 0):
        raise DomainError("infected counts must be positive")


def _require_R(R1, R2):
    if np.any(R1 < 0) or np.any(R2 < 0):
        raise DomainError("recovered counts must be non-negative")


def K_value(state, eq: Equilibrium2, pp: PotentialParams):
    I1, R1, I2, R2 = _unpack(state)
    _require_I(I1, I2)
    _require_R(R1, R2)
    return _scalar_or_array(
        pp.x1 * _arr(f(eq.I1_star, I1))
        + 2 * pp.y1 * _arr(f(2 * eq.R1_star, R1 + eq.R1_star))
        + pp.x2 * _arr(f(eq.I2_star, I2))
        + 2 * pp.y2 * _arr(f(2 * eq.R2_star, R2 + eq.R2_star))
    )


def K_partials(state, eq: Equilibrium2, pp: PotentialParams):
    I1, R1, I2, R2 = _unpack(state)
    _require_I(I1, I2)
    _require_R(R1, R2)
    return (
        pp.x1 * (1 - eq.I1_star / I1),
        2 * pp.y1 * (1 - 2 * eq.R1_star / (R1 + eq.R1_star)),
        pp.x2 * (1 - eq.I2_star / I2),
        2 * pp.y2 * (1 - 2 * eq.R2_star / (R2 + eq.R2_star)),
    )


def dK_dt(state, params, eq: Equilibrium2 | None = None, pp: PotentialParams | None = None):
    """Closed-form dK/dt under the default normalisation; never positive."""
    (I1, R1, I2, R2), n, eq, _ = _resolve(state, params, eq, pp)
    _require_I(I1, I2)
    _require_R(R1, R2)
    rho1, rho2 = params.rho1, params.rho2
    d1 = R1 - eq.R1_star
    d2 = R2 - eq.R2_star
    out = -(
        d1**2 / (R1 + eq.R1_star) * (I1 + rho2 / rho1 * I2)
        + d2**2 / (R2 + eq.R2_star) * (I2 + rho1 / rho2 * I1)
        + (d1 + d2) ** 2
    ) / n
    return _scalar_or_array(out)


# --------------------------------------------------------------------------
# L


def _require_L_domain(I1, R1, I2, R2, eq):
    if np.any(I1 < 2) or np.any(I2 < 2):
        raise DomainError("L needs I1 >= 2 and I2 >= 2")
    if eq.I1_star < 2 or eq.I2_star < 2:
        raise DomainError("L needs equilibrium infected counts of at least 2")
    _require_R(R1, R2)


def _targets(I1, I2, eq):
    """Shifted targets for the R1 term (driven by I2) and the R2 term (driven by I1)."""
    t1 = (1 + math.log(eq.I2_star) / np.log(I2)) * eq.R1_star
    t2 = (1 + math.log(eq.I1_star) / np.log(I1)) * eq.R2_star
    return t1, t2


def _target_change(R_star, ln_I_star, I, dI):
    """Change of ``(1 + ln I*/ln I) R*`` when I moves by dI, computed stably."""
    if np.all(dI == 0):
        return np.zeros_like(I)
    ln_I = np.log(I)
    ln_new = np.log(I + dI)
    return -R_star * ln_I_star * np.log1p(dI / I) / (ln_I * ln_new)


def L_terms(state, eq: Equilibrium2, pp: PotentialParams):
    """The four summands of L (I1, R1, I2, R2 terms)."""
    I1, R1, I2, R2 = _unpack(state)
    _require_L_domain(I1, R1, I2, R2, eq)
    t1, t2 = _targets(I1, I2, eq)
    return (
        pp.x1 * _arr(f(eq.I1_star, I1)),
        2 * pp.y1 * _arr(f(t1, R1 + eq.R1_star)),
        pp.x2 * _arr(f(eq.I2_star, I2)),
        2 * pp.y2 * _arr(f(t2, R2 + eq.R2_star)),
    )


def L_value(state, eq: Equilibrium2, pp: PotentialParams):
    a, b, c, d = L_terms(state, eq, pp)
    return _scalar_or_array(a + b + c + d)


def L_partials(state, eq: Equilibrium2, pp: PotentialParams):
    """``(dL/dI1, dL/dR1, dL/dI2, dL/dR2)``.

    Each I partial picks up a cross term from the R term whose target it shifts.
    """
    I1, R1, I2, R2 = _unpack(state)
    _require_L_domain(I1, R1, I2, R2, eq)
    t1, t2 = _targets(I1, I2, eq)
    ln_I1, ln_I2 = np.log(I1), np.log(I2)
    ln_I1s, ln_I2s = math.log(eq.I1_star), math.log(eq.I2_star)
    cross1 = 2 * pp.y2 * eq.R2_star * ln_I1s / (I1 * ln_I1**2) * np.log((R2 + eq.R2_star) / t2)
    cross2 = 2 * pp.y1 * eq.R1_star * ln_I2s / (I2 * ln_I2**2) * np.log((R1 + eq.R1_star) / t1)
    return (
        pp.x1 * (1 - eq.I1_star / I1) + cross1,
        2 * pp.y1 * (1 - t1 / (R1 + eq.R1_star)),
        pp.x2 * (1 - eq.I2_star / I2) + cross2,
        2 * pp.y2 * (1 - t2 / (R2 + eq.R2_star)),
    )


def dL_dt(state, params, eq: Equilibrium2 | None = None, pp: PotentialParams | None = None):
    """dK/dt plus the four corrections introduced by the moving R targets."""
    (I1, R1, I2, R2), n, eq, pp = _resolve(state, params, eq, pp)
    _require_L_domain(I1, R1, I2, R2, eq)
    lam1, lam2 = params.lambda1_eff, params.lambda2_eff
    rho1, rho2 = params.rho1, params.rho2
    R1s, R2s = eq.R1_star, eq.R2_star
    ln_I1, ln_I2 = np.log(I1), np.log(I2)
    g1 = math.log(eq.I1_star) / ln_I1
    g2 = math.log(eq.I2_star) / ln_I2
    t1 = (1 + g2) * R1s
    t2 = (1 + g1) * R2s
    base = _arr(dK_dt((I1, R1, I2, R2), params, eq))
    out = (
        base
        + 2 * pp.y2 * R2s * g1 / ln_I1 * np.log((R2 + R2s) / t2) * (lam1 * R2 - rho1)
        + 2 * pp.y1 * R1s * (1 - g2) / (R1 + R1s) * (rho1 * I1 - lam2 * I2 * R1)
        + 2 * pp.y1 * R1s * g2 / ln_I2 * np.log((R1 + R1s) / t1) * (lam2 * R1 - rho2)
        + 2 * pp.y2 * R2s * (1 - g1) / (R2 + R2s) * (rho2 * I2 - lam1 * I1 * R2)
    )
    return _scalar_or_array(out)


def L_change(state, new_state, eq: Equilibrium2, pp: PotentialParams):
    """``L(new_state) - L(state)`` summed term by term, stable for unit moves."""
    I1, R1, I2, R2 = _unpack(state)
    J1, S1, J2, S2 = _unpack(new_state)
    _require_L_domain(I1, R1, I2, R2, eq)
    _require_L_domain(J1, S1, J2, S2, eq)
    t1, t2 = _targets(I1, I2, eq)
    u1 = t1 + _target_change(eq.R1_star, math.log(eq.I2_star), I2, J2 - I2)
    u2 = t2 + _target_change(eq.R2_star, math.log(eq.I1_star), I1, J1 - I1)
    out = (
        pp.x1 * _arr(f_change(eq.I1_star, I1, eq.I1_star, J1))
        + 2 * pp.y1 * _arr(f_change(t1, R1 + eq.R1_star, u1, S1 + eq.R1_star))
        + pp.x2 * _arr(f_change(eq.I2_star, I2, eq.I2_star, J2))
        + 2 * pp.y2 * _arr(f_change(t2, R2 + eq.R2_star, u2, S2 + eq.R2_star))
    )
    return _scalar_or_array(out)


# --------------------------------------------------------------------------
# one-step drift

# unit moves of (I1, R1, I2, R2) for Infect1, Recover1, Infect2, Recover2
CHANNEL_MOVES = np.array(
    [[1, 0, 0, -1], [-1, 1, 0, 0], [0, -1, 1, 0], [0, 0, -1, 1]],
    dtype=np.int64,
)


def channel_rates(state, params):
    I1, R1, I2, R2 = _unpack(state)
    lam1, lam2 = params.lambda1_eff, params.lambda2_eff
    return (lam1 * I1 * R2, params.rho1 * I1, lam2 * I2 * R1, params.rho2 * I2)


def L_channel_changes(state, eq: Equilibrium2, pp: PotentialParams):
    """Change of L along each of the four channels; a channel whose target
    would leave the domain (or has zero rate) reports 0."""
    I1, R1, I2, R2 = _unpack(state)
    _require_L_domain(I1, R1, I2, R2, eq)
    base = np.stack(np.broadcast_arrays(I1, R1, I2, R2))
    out = []
    for move in CHANNEL_MOVES:
        new = base + move.reshape((4,) + (1,) * (base.ndim - 1))
        ok = (new[0] >= 2) & (new[2] >= 2) & (new[1] >= 0) & (new[3] >= 0)
        safe = np.where(ok, new, base)
        delta = _arr(L_change(tuple(base), tuple(safe), eq, pp))
        out.append(np.where(ok, delta, 0.0))
    return tuple(_scalar_or_array(x) for x in out)


def P_potential(state, params):
    """``(ln I1 + 1)/lambda1* + (ln I2 + 1)/lambda2*`` with ``ln 0 := -1``."""
    I1, _, I2, _ = _unpack(state)
    if np.any(I1 < 0) or np.any(I2 < 0):
        raise DomainError("counts must be non-negative")

    def part(I, lam):
        with np.errstate(divide="ignore"):
            return np.where(I > 0, np.log(np.where(I > 0, I, 1.0)) + 1.0, 0.0) / lam

    return _scalar_or_array(part(I1, params.lambda1_eff) + part(I2, params.lambda2_eff))


def _P_step(I, step, lam):
    """Change of ``(ln I + 1)/lam`` for a move of +-1, honouring ``ln 0 := -1``."""
    safe = np.where(I > 0, I, 1.0)
    if step > 0:
        d = np.where(I > 0, np.log1p(1.0 / safe), 1.0)
    else:
        d = np.where(I > 1, np.log1p(-1.0 / np.maximum(safe, 2.0)), -1.0)
    return d / lam


def P_channel_changes(state, params):
    I1, _, I2, _ = _unpack(state)
    lam1, lam2 = params.lambda1_eff, params.lambda2_eff
    return (_P_step(I1, +1, lam1), _P_step(I1, -1, lam1), _P_step(I2, +1, lam2), _P_step(I2, -1, lam2))


def P_drift_bound(state, params):
    """Upper bound ``(R1 + R2 - S)/r`` on the expected one-step change of P."""
    _, R1, _, R2 = _unpack(state)
    rates = channel_rates(state, params)
    r = rates[0] + rates[1] + rates[2] + rates[3]
    if np.any(r <= 0):
        raise AbsorbedError("no transition has positive rate")
    S = params.rho1 / params.lambda1_eff + params.rho2 / params.lambda2_eff
    return _scalar_or_array((R1 + R2 - S) / r)


def discrete_drift(state, params, potential: str = "L", eq=None, pp=None):
    """Exact expected change of the potential over the next transition.

    Each channel contributes ``rate / r_total`` times the change in the
    potential when that channel fires.  ``potential`` is ``"L"`` or ``"P"``.
    """
    rates = channel_rates(state, params)
    r = rates[0] + rates[1] + rates[2] + rates[3]
    if np.any(_arr(r) <= 0):
        raise AbsorbedError("no transition has positive rate")
    if potential == "L":
        _, _, eq, pp = _resolve(state, params, eq, pp)
        changes = L_channel_changes(state, eq, pp)
    elif potential == "P":
        changes = P_channel_changes(state, params)
    else:
        raise InvalidInputError(f"unknown potential {potential!r}")
    total = sum(rate * _arr(ch) for rate, ch in zip(rates, changes))
    return _scalar_or_array(total / r)


# --------------------------------------------------------------------------
# band constants


@dataclass
class BandConstants:
    eps_l: float
    eps_h: float
    c_h: float
    c_l: float
    c_s: float
    c_s_sampled: float
    c_s_proof: float
    samples: int
    feasible: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def c_h_value(eps_l: float, params, n: float, c: float) -> float:
    c1 = params.lambda1_eff * n
    c2 = params.lambda2_eff * n
    rho1, rho2 = params.rho1, params.rho2
    log_inv = math.log(1.0 / eps_l)
    first = c / c1 * (log_inv - math.log((rho1 + rho2) / (rho2 * c)) - 1)
    second = c / c2 * (log_inv - math.log((rho1 + rho2) / (rho1 * c)) - 1)
    return min(first, second)


def c_l_value(eps_h: float, params, n: float, c: float) -> float:
    """Four times the largest per-term ceiling on L over states with both I >= eps_h n."""
    c1 = params.lambda1_eff * n
    c2 = params.lambda2_eff * n
    rho1, rho2 = params.rho1, params.rho2
    log_inv = math.log(1.0 / eps_h)
    infected1 = ((rho1 + rho2) / (c * rho2) + log_inv - 1) / c1
    infected2 = ((rho1 + rho2) / (c * rho1) + log_inv - 1) / c2
    recovered1 = 6 * rho2 / (rho1 * c2) * (2 * c2 / rho2 + math.log(3) - 1)
    recovered2 = 6 * rho1 / (rho2 * c1) * (2 * c1 / rho1 + math.log(3) - 1)
    return 4 * max(infected1, infected2, recovered1, recovered2)


def c_s_proof_bound(eps_l: float, params, n: float) -> float:
    eq = equilibrium2(params, n)
    pp = PotentialParams.default(params, n)
    ln_n = math.log(n)
    if eps_l * n <= 1:
        return math.inf
    ln_low = math.log(eps_l * n)
    partial_I1 = pp.x1 * (1 + 1 / eps_l) + 2 * pp.y2 * ln_n / (eps_l * ln_low**2) * math.log(2 * n / eq.R2_star)
    partial_I2 = pp.x2 * (1 + 1 / eps_l) + 2 * pp.y1 * ln_n / (eps_l * ln_low**2) * math.log(2 * n / eq.R1_star)
    partial_R1 = 2 * pp.y1 * (1 + 3 * n / eq.R1_star)
    partial_R2 = 2 * pp.y2 * (1 + 3 * n / eq.R2_star)
    return max(partial_I1, partial_I2, partial_R1, partial_R2)


def sample_states(n: int, size: int, rng, min_I: int = 0, max_min_I: int | None = None):
    """Uniform integer states ``(I1, R1, I2, R2)`` summing to n with both
    I >= min_I and, if given, min(I1, I2) <= max_min_I.

    Returns a (size, 4) int64 array.  Raises InvalidInputError when the
    constrained region is empty.
    """
    m = n - 2 * min_I
    if m < 0 or (max_min_I is not None and max_min_I < min_I):
        raise InvalidInputError("no state satisfies the band constraints")
    rows = []
    have = 0
    while have < size:
        batch = max(2 * (size - have), 64)
        cuts = np.sort(rng.integers(0, m + 3, size=(batch, 3)), axis=1)
        distinct = (cuts[:, 0] < cuts[:, 1]) & (cuts[:, 1] < cuts[:, 2])
        cuts = cuts[distinct]
        parts = np.stack(
            [cuts[:, 0], cuts[:, 1] - cuts[:, 0] - 1, cuts[:, 2] - cuts[:, 1] - 1, m + 2 - cuts[:, 2]],
            axis=1,
        )
        parts[:, 0] += min_I
        parts[:, 2] += min_I
        if max_min_I is not None:
            parts = parts[np.minimum(parts[:, 0], parts[:, 2]) <= max_min_I]
        rows.append(parts)
        have += len(parts)
    return np.concatenate(rows)[:size].astype(np.int64)


def band_constants(
    eps_l: float,
    eps_h: float,
    params,
    n: int,
    c: float,
    samples: int = 10_000,
    seed: int = 0,
) -> BandConstants:
    """Band constants for the L potential.

    ``c_h`` and ``c_l`` come from closed-form bounds; ``c_s`` is the larger of
    the analytic ceiling on |partials| and the largest |partial| over
    ``samples`` uniform states with both I >= max(2, eps_l n).
    """
    if not (0 < eps_l < eps_h):
        raise InvalidInputError("need 0 < eps_l < eps_h")
    eq = equilibrium2(params, n)
    # the boundary S = (1 - c) n is admitted so that c can be taken as the exact margin
    if eq.R1_star + eq.R2_star > (1 - c) * n * (1 + 1e-12):
        raise InvalidInputError("band constants need subcritical parameters with margin c")
    c_h = c_h_value(eps_l, params, n, c)
    c_l = c_l_value(eps_h, params, n, c)
    pp = PotentialParams.default(params, n)
    states = sample_states(n, samples, make_rng(seed), min_I=max(2, math.ceil(eps_l * n)))
    parts = L_partials(tuple(states.T.astype(float)), eq, pp)
    sampled = float(max(np.max(np.abs(p)) for p in parts))
    proof = c_s_proof_bound(eps_l, params, n)
    return BandConstants(
        eps_l=eps_l,
        eps_h=eps_h,
        c_h=c_h,
        c_l=c_l,
        c_s=max(sampled, proof),
        c_s_sampled=sampled,
        c_s_proof=proof,
        samples=samples,
        feasible=c_h > 0,
    )
