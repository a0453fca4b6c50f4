"""Deferrable-load contracts and why they mis-describe HVAC.

A deferrable load is pinned down by four numbers: arrival time tau (h),
required energy E (kWh), completion window T (h) and power ceiling P (kW).
Any demand profile that stays in [0, P], consumes nothing outside
[tau, tau + T], and delivers exactly E by the deadline fulfils the
contract.  That abstraction fits batteries and water buckets; it fails for
HVAC because the energy a zone "needs" is not a fixed requirement but a
function of weather, and because comfort constrains the path, not just the
integral.  counterexample_check() builds the canonical demonstration: a
contract sized from a hot day's cooling energy, served greedily on a cold
day, is contract-perfect and comfort-breaking at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .flexset import Scenario, is_member
from .qos import Verdict
from .thermal import DisturbanceSeries, ThermalParams, Trajectory, baseline_trajectory

KINDS = ("battery", "bucket", "bakery")

ENERGY_ATOL_KWH = 1e-6


@dataclass(frozen=True)
class DeferrableSpec:
    """(tau, E, T, P) contract.

    kind is a behavioral label: "battery" and "bucket" loads may idle and
    resume freely inside the window, a "bakery" run must be one contiguous
    block once started (an oven batch cannot pause).  A bucket has no fixed
    energy requirement, so energy_kwh may be None for that kind only; it is
    then bounded by power and window alone.
    """

    arrival_h: float
    energy_kwh: float | None
    window_h: float
    p_max: float
    kind: str = "battery"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InputError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.arrival_h < 0:
            raise InputError("arrival time cannot be negative")
        if self.energy_kwh is None:
            if self.kind != "bucket":
                raise InputError(f"kind {self.kind!r} requires a fixed energy_kwh")
        elif self.energy_kwh < 0:
            raise InputError("energy requirement cannot be negative")
        if self.window_h <= 0 or self.p_max <= 0:
            raise InputError("window and power ceiling must be positive")

    @property
    def deadline_h(self) -> float:
        return self.arrival_h + self.window_h


def spec_feasible(spec: DeferrableSpec) -> bool:
    """Whether any profile can fulfil the contract: E <= P * T.

    Buckets accept whatever energy arrives, so they are always satisfiable;
    the remaining kinds must fit E under the power ceiling.  A contiguous
    bakery run of length E/P fits exactly when E <= P * T, the same bound.
    """
    if spec.kind == "bucket" and spec.energy_kwh is None:
        return True
    return spec.energy_kwh <= spec.p_max * spec.window_h + ENERGY_ATOL_KWH


@dataclass(frozen=True)
class ContractVerdict:
    """Outcome of checking one profile against one contract."""

    ok: bool
    reason: str

    def __bool__(self) -> bool:
        return self.ok


def _overlap_hours(k: np.ndarray, dt: float, lo: float, hi: float) -> np.ndarray:
    """Length of [k*dt, (k+1)*dt) intersected with [lo, hi), per sample."""
    left = np.maximum(k * dt, lo)
    right = np.minimum((k + 1) * dt, hi)
    return np.maximum(right - left, 0.0)


def trajectory_satisfies(
    spec: DeferrableSpec, p: Trajectory, atol: float = ENERGY_ATOL_KWH
) -> ContractVerdict:
    """Check a piecewise-constant demand profile against the contract.

    Samples straddling the arrival or deadline are charged for exactly the
    energy they deliver inside/outside the window, so tau and tau + T need
    not sit on the sampling grid.
    """
    pv = p.values
    horizon = len(p) * p.dt
    if spec.deadline_h > horizon + 1e-9:
        raise InputError(
            f"profile covers {horizon:.6g} h but the window closes at "
            f"{spec.deadline_h:.6g} h"
        )
    if np.any(pv < -atol) or np.any(pv > spec.p_max + atol):
        bad = int(np.argmax((pv < -atol) | (pv > spec.p_max + atol)))
        return ContractVerdict(
            False, f"p[{bad}] = {pv[bad]:.6g} kW outside [0, {spec.p_max}] kW"
        )
    k = np.arange(len(p))
    e_before = float(pv @ _overlap_hours(k, p.dt, 0.0, spec.arrival_h))
    e_inside = float(pv @ _overlap_hours(k, p.dt, spec.arrival_h, spec.deadline_h))
    e_after = float(pv @ _overlap_hours(k, p.dt, spec.deadline_h, horizon))
    if e_before > atol:
        return ContractVerdict(
            False, f"{e_before:.6g} kWh consumed before arrival at {spec.arrival_h} h"
        )
    if e_after > atol:
        return ContractVerdict(
            False, f"{e_after:.6g} kWh consumed after deadline at {spec.deadline_h} h"
        )
    # a bucket takes whatever energy shows up; every other kind owes exactly E
    if spec.energy_kwh is not None and spec.kind != "bucket":
        if abs(e_inside - spec.energy_kwh) > atol:
            return ContractVerdict(
                False,
                f"delivered {e_inside:.6g} kWh inside the window, "
                f"contract requires {spec.energy_kwh:.6g}",
            )
    if spec.kind == "bakery":
        on = np.flatnonzero(pv * p.dt > atol)
        if on.size > 1 and np.any(np.diff(on) != 1):
            return ContractVerdict(False, "bakery run is not contiguous")
    return ContractVerdict(True, "contract fulfilled")


def front_loaded_profile(
    spec: DeferrableSpec, dt: float, n_steps: int
) -> Trajectory:
    """Greedy profile: run at the ceiling from arrival until E is delivered.

    The first sample fully inside the window starts the run; a partial-power
    final sample trims the total to exactly E.  Raises InputError when the
    grid is too short or the contract infeasible.
    """
    if spec.energy_kwh is None:
        raise InputError("cannot front-load a contract with no fixed energy")
    if not spec_feasible(spec):
        raise InputError("contract requires more energy than P*T allows")
    start = int(math.ceil(spec.arrival_h / dt - 1e-12))
    full = int(spec.energy_kwh / (spec.p_max * dt) + 1e-12)
    rem = spec.energy_kwh - full * spec.p_max * dt
    n_need = start + full + (1 if rem > ENERGY_ATOL_KWH else 0)
    if n_need > n_steps:
        raise InputError(
            f"need {n_need} samples to place the profile, grid has {n_steps}"
        )
    end_h = (start + full + (1 if rem > ENERGY_ATOL_KWH else 0)) * dt
    if end_h > spec.deadline_h + 1e-12:
        raise InputError(
            "grid-aligned greedy run would finish past the deadline; "
            "refine dt or widen the window"
        )
    vals = np.zeros(n_steps)
    vals[start : start + full] = spec.p_max
    if rem > ENERGY_ATOL_KWH:
        vals[start + full] = rem / dt
    return Trajectory(dt, vals, unit="kW")


def baseline_energy(
    params: ThermalParams,
    theta_a: float,
    theta_sp: float,
    q_d: float,
    horizon_h: float,
    dt: float,
) -> float:
    """kWh the baseline controller consumes holding theta_sp, clamped to range.

    This is the number a deferrable abstraction would write into E when
    sizing the contract from one observed (or design) day.
    """
    n = int(round(horizon_h / dt))
    if abs(n * dt - horizon_h) > 1e-9 or n < 1:
        raise InputError("horizon must be a positive multiple of dt")
    dist = DisturbanceSeries.constant(dt, n, theta_a=theta_a, q_d=q_d)
    base = baseline_trajectory(params, dist, theta_sp)
    return float(base.power.values.sum()) * dt


@dataclass(frozen=True)
class CounterexampleResult:
    """Contract-vs-comfort verdict pair for one profile on one scenario."""

    contract: ContractVerdict
    comfort: Verdict
    p: Trajectory

    @property
    def demonstrates_gap(self) -> bool:
        return bool(self.contract) and not bool(self.comfort)


def counterexample_check(spec: DeferrableSpec, scn: Scenario) -> CounterexampleResult:
    """Serve the contract greedily on the scenario and audit both contracts.

    The contract verdict never looks at temperature; the comfort verdict
    never looks at the deferrable terms.  When the spec was sized on a hot
    day and the scenario is a cold one, the result is contract ok, comfort
    violated: the deferrable abstraction has no way to say "this building
    no longer needs that energy".
    """
    p = front_loaded_profile(spec, scn.dt, scn.n_steps)
    contract = trajectory_satisfies(spec, p)
    comfort = is_member(p, scn)
    return CounterexampleResult(contract=contract, comfort=comfort, p=p)
