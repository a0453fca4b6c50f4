"""Virtual-battery characterization of a comfort-constrained HVAC load.

Demand deviation from baseline mimics a battery terminal: consuming above
baseline pre-cools the zone, storing "coolth" (charging); consuming below
lets the stored margin drain back out (discharging).  Four numbers
summarize the analogy:

* charge / discharge rate, kW: the largest instantaneous deviation either
  way that some comfort-feasible trajectory attains;
* charge / discharge energy, kWh: the largest time-integrated deviation
  either way over the horizon.

All four are computed as linear programs over (demand, temperature)
trajectories with the exact one-step dynamics as equality rows, so the
numbers inherit the model exactly rather than a quasi-steady shortcut.
For constant weather and constant bounds the optimal charging strategy is
bang-bang (slam to the deviation ceiling, then ride the temperature bound),
which gives the closed-form oracle bangbang_energy_oracle used to
cross-check the LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InputError, ShapeError, SolverError
from .flexset import Scenario
from .solver import STATUS_INFEASIBLE, STATUS_OPTIMAL, LinearProgram, solve_lp
from .thermal import ThermalParams, Trajectory, decay_factor


def energy_state(p: Trajectory, baseline: Trajectory) -> Trajectory:
    """Cumulative deviation energy, kWh: the battery's state-of-charge twin.

    Left-Riemann integral of p - baseline, N+1 samples starting at zero so
    sample k is the energy banked before step k begins.
    """
    if len(p) != len(baseline) or abs(p.dt - baseline.dt) > 1e-9:
        raise ShapeError("demand and baseline must share one grid")
    dev = p.values - baseline.values
    vals = np.concatenate([[0.0], np.cumsum(dev) * p.dt])
    return Trajectory(p.dt, vals, unit="kWh")


@dataclass(frozen=True)
class VirtualBatteryCaps:
    """Rate (kW) and energy (kWh) capacities of the demand-deviation battery."""

    charge_rate_kw: float
    discharge_rate_kw: float
    charge_energy_kwh: float
    discharge_energy_kwh: float


def _dynamics_lp(scn: Scenario, c_p: np.ndarray) -> LinearProgram:
    """LP over stacked (p, theta) with the exact recursion as equality rows.

    theta_0 is not a variable (it is the scenario's initial condition);
    theta_1..theta_N are box-bounded by the comfort limits.
    """
    n = scn.n_steps
    par = scn.params
    a = decay_factor(par, scn.dt)
    gain = (1.0 - a) * par.r_thermal * par.eta_cop
    forcing = (1.0 - a) * (scn.dist.theta_a + par.r_thermal * scn.dist.q_d)
    lo_t, hi_t = scn.bounds.theta_limits(n + 1)

    c = np.concatenate([c_p, np.zeros(n)])
    lo = np.concatenate([np.zeros(n), lo_t[1:]])
    hi = np.concatenate([np.full(n, par.p_rated), hi_t[1:]])
    a_eq = np.zeros((n, 2 * n))
    b_eq = forcing.copy()
    for k in range(n):
        a_eq[k, k] = gain
        a_eq[k, n + k] = 1.0
        if k == 0:
            b_eq[0] += a * scn.theta0
        else:
            a_eq[k, n + k - 1] = -a
    return LinearProgram(c=c, lo=lo, hi=hi, a_eq=a_eq, b_eq=b_eq)


def _solve_demand(scn: Scenario, c_p: np.ndarray) -> np.ndarray:
    report = solve_lp(_dynamics_lp(scn, c_p))
    if report.status == STATUS_INFEASIBLE:
        raise InfeasibleError(
            "no demand trajectory keeps the comfort band at all; "
            "the scenario has no baseline to deviate from"
        )
    if report.status != STATUS_OPTIMAL:
        raise SolverError(f"capacity solve failed: status {report.status}")
    return report.x[: scn.n_steps]


def _is_time_invariant(scn: Scenario) -> bool:
    return (
        scn.dist.is_constant(tol=1e-12)
        and scn.bounds.theta_min_t is None
        and scn.bounds.theta_max_t is None
    )


def rate_capacities(scn: Scenario) -> tuple[float, float]:
    """(charge, discharge) rate caps, kW: peak attainable |deviation|.

    The trajectory before the peak sample is part of the optimization, so
    preconditioning is priced in.  For a time-invariant scenario a longer
    run-up never hurts, hence the peak sits at the final sample and one LP
    per direction suffices; otherwise every sample is swept, which costs N
    solves per direction and is intended for short horizons.
    """
    base = scn.baseline().power.values
    n = scn.n_steps

    def peak(sign: float, k: int) -> float:
        c_p = np.zeros(n)
        c_p[k] = -sign
        p_opt = _solve_demand(scn, c_p)
        return sign * (p_opt[k] - base[k])

    if _is_time_invariant(scn):
        return peak(+1.0, n - 1), peak(-1.0, n - 1)
    up = max(peak(+1.0, k) for k in range(n))
    dn = max(peak(-1.0, k) for k in range(n))
    return up, dn


def extremal_profiles(scn: Scenario) -> tuple[Trajectory, Trajectory]:
    """The LP-argmax demand trajectories for charging and discharging.

    Exposed so the optimizer's own output can be audited for membership in
    the flexibility set; energy_capacities integrates these.
    """
    n = scn.n_steps
    p_ch = _solve_demand(scn, np.full(n, -scn.dt))
    p_dis = _solve_demand(scn, np.full(n, scn.dt))
    return (
        Trajectory(scn.dt, p_ch, unit="kW"),
        Trajectory(scn.dt, p_dis, unit="kW"),
    )


def energy_capacities(scn: Scenario) -> tuple[float, float]:
    """(charge, discharge) energy caps, kWh, over the scenario horizon."""
    base = scn.baseline().power.values
    p_ch, p_dis = extremal_profiles(scn)
    e_ch = float((p_ch.values - base).sum()) * scn.dt
    e_dis = float((base - p_dis.values).sum()) * scn.dt
    return e_ch, e_dis


def characterize(scn: Scenario) -> VirtualBatteryCaps:
    """All four capacities in one report."""
    up, dn = rate_capacities(scn)
    e_ch, e_dis = energy_capacities(scn)
    return VirtualBatteryCaps(
        charge_rate_kw=up,
        discharge_rate_kw=dn,
        charge_energy_kwh=e_ch,
        discharge_energy_kwh=e_dis,
    )


def bangbang_energy_oracle(
    params: ThermalParams,
    delta_theta: float,
    p_tilde_max: float,
    horizon_h: float,
) -> float:
    """Closed-form charge energy cap for constant weather, kWh.

    Deviate at p_tilde_max until the temperature deviation reaches
    delta_theta (in continuous time that takes

        t1 = R*C * ln(K / (K - delta_theta)),  K = R*eta_cop*p_tilde_max

    ), then hold the bound, which sustains deviation delta_theta/(R*eta_cop).
    If the bound is unreachable (delta_theta >= K) or the horizon ends
    first, the whole horizon runs at the ceiling.  By symmetry the same
    formula gives the discharge cap with that direction's delta_theta and
    deviation ceiling.
    """
    if horizon_h < 0:
        raise InputError("horizon cannot be negative")
    if p_tilde_max <= 0:
        raise InputError("deviation ceiling must be positive")
    if delta_theta < 0:
        raise InputError("temperature margin cannot be negative")
    k_gain = params.dc_gain * p_tilde_max
    if delta_theta >= k_gain:
        return p_tilde_max * horizon_h
    t1 = params.time_constant_h * math.log(k_gain / (k_gain - delta_theta))
    if t1 >= horizon_h:
        return p_tilde_max * horizon_h
    return p_tilde_max * t1 + (delta_theta / params.dc_gain) * (horizon_h - t1)
