"""Demand flexibility sets and their conservative power envelope.

The true flexibility set of a load is every demand trajectory that keeps
QoS intact over the horizon; membership is decided by simulating the zone
and checking bounds.  A simpler object is the quasi-steady power envelope
[p_lo(t), p_hi(t)]: p_hi holds the zone at the lower temperature bound in
steady state, p_lo at the upper bound.  Any trajectory that stays inside
the envelope (starting inside the comfort band) is feasible, because at a
temperature bound the drift always points back into the band.  The converse
fails badly at short time scales: a sinusoidal demand deviation of frequency
omega may exceed the envelope half-width by the factor

    |G(0)| / |G(j omega)| = sqrt(1 + (omega R C)^2)

and still respect comfort.  conservativeness_curve() quantifies that gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError, PowerRangeError, ShapeError
from .qos import QoSBounds, QoSSignal, Verdict, satisfies
from .thermal import (
    DisturbanceSeries,
    ThermalParams,
    Trajectory,
    baseline_trajectory,
    equilibrium_power,
    max_sine_amplitude,
    simulate,
    tf_magnitude,
)


@dataclass(frozen=True)
class Scenario:
    """One load, one disturbance record, one comfort contract."""

    params: ThermalParams
    bounds: QoSBounds
    dist: DisturbanceSeries
    theta_sp: float
    theta0: float

    def __post_init__(self) -> None:
        lo, hi = self.bounds.theta_min, self.bounds.theta_max
        if not lo <= self.theta_sp <= hi:
            raise InputError(
                f"theta_sp {self.theta_sp} outside comfort band [{lo}, {hi}]"
            )
        if not lo <= self.theta0 <= hi:
            raise InputError(
                f"theta0 {self.theta0} outside comfort band [{lo}, {hi}]"
            )

    @property
    def n_steps(self) -> int:
        return len(self.dist)

    @property
    def dt(self) -> float:
        return self.dist.dt

    def baseline(self):
        return baseline_trajectory(self.params, self.dist, self.theta_sp)

    def with_state(self, theta0: float, dist: DisturbanceSeries) -> "Scenario":
        return replace(self, theta0=theta0, dist=dist)


@dataclass(frozen=True)
class FlexEnvelope:
    """Per-sample demand band [p_lo, p_hi], kW, on the disturbance grid.

    Samples with p_lo > p_hi mean no quasi-steady demand can hold the zone
    inside the band there; the out-of-range side is kept unclipped so the
    inversion (and its magnitude) stays visible through empty_mask.
    """

    dt: float
    p_lo: np.ndarray
    p_hi: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.p_lo, dtype=float)
        hi = np.asarray(self.p_hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ShapeError("p_lo and p_hi must be 1-D arrays of equal length")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "p_lo", lo)
        object.__setattr__(self, "p_hi", hi)

    def __len__(self) -> int:
        return int(self.p_lo.size)

    @property
    def empty_mask(self) -> np.ndarray:
        return self.p_lo > self.p_hi

    @property
    def half_width(self) -> np.ndarray:
        return 0.5 * (self.p_hi - self.p_lo)

    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.dt

    def contains(self, p: Trajectory, atol: float = 0.0) -> bool:
        if len(p) != len(self):
            raise ShapeError(f"{len(p)} power samples vs {len(self)} envelope samples")
        return bool(
            np.all(p.values >= self.p_lo - atol)
            and np.all(p.values <= self.p_hi + atol)
        )


def is_member(p: Trajectory, scn: Scenario, atol: float = 1e-9) -> Verdict:
    """Simulate p under the scenario and check the comfort contract.

    Demand outside the physical range [0, p_rated] is not a QoS question;
    it raises PowerRangeError instead of returning a verdict.  atol is the
    slack granted to optimizer output on both the power range and the
    comfort bounds.
    """
    if len(p) != scn.n_steps:
        raise ShapeError(
            f"demand has {len(p)} samples but scenario has {scn.n_steps}"
        )
    pv = p.values
    if np.any(pv < -atol) or np.any(pv > scn.params.p_rated + atol):
        bad = int(np.argmax((pv < -atol) | (pv > scn.params.p_rated + atol)))
        raise PowerRangeError(
            f"p[{bad}] = {pv[bad]:.6g} kW outside [0, {scn.params.p_rated}] kW"
        )
    theta = simulate(scn.params, scn.dist, p, scn.theta0)
    return satisfies(QoSSignal(theta=theta), scn.bounds, atol=atol)


def envelope(scn: Scenario) -> FlexEnvelope:
    """Quasi-steady power envelope clamped to the rated range.

    p_hi(t) is the demand holding theta at the per-sample lower temperature
    bound, p_lo(t) the demand holding the upper bound (more cooling power
    pushes the zone colder).  Both are clamped to [0, p_rated]; where the
    raw band lies entirely outside the rated range the offending side is
    left unclamped, so the stored band inverts and empty_mask flags it.
    """
    n = scn.n_steps
    lo_t, hi_t = scn.bounds.theta_limits(n)
    par = scn.params
    p_hi = (scn.dist.q_d + (scn.dist.theta_a - lo_t) / par.r_thermal) / par.eta_cop
    p_lo = (scn.dist.q_d + (scn.dist.theta_a - hi_t) / par.r_thermal) / par.eta_cop
    p_hi = np.minimum(np.maximum(p_hi, 0.0), par.p_rated)
    p_lo = np.minimum(np.maximum(p_lo, 0.0), par.p_rated)
    # an inverted unclamped band is impossible (theta_min < theta_max), so
    # emptiness can only come from the rated-range clamp; keep the violating
    # side raw so the stored band inverts exactly there
    raw_hi = (scn.dist.q_d + (scn.dist.theta_a - lo_t) / par.r_thermal) / par.eta_cop
    raw_lo = (scn.dist.q_d + (scn.dist.theta_a - hi_t) / par.r_thermal) / par.eta_cop
    p_lo = np.where(raw_lo > par.p_rated, raw_lo, p_lo)
    p_hi = np.where(raw_hi < 0.0, raw_hi, p_hi)
    return FlexEnvelope(scn.dt, p_lo, p_hi)


@dataclass(frozen=True)
class ConservativenessPoint:
    """Envelope-vs-sinusoid comparison at one frequency.

    a_max_unclamped  : largest steady sinusoid amplitude the comfort band
                       admits, ignoring the rated range, kW
    a_max            : the same, clamped to the headroom min(p_rated - p_eq,
                       p_eq) so the demand stays physical, kW
    ratio            : a_max relative to the envelope half-width a_max(0)
    """

    omega: float
    a_max_unclamped: float
    a_max: float
    ratio: float


def conservativeness_curve(
    scn: Scenario, omegas: "list[float] | np.ndarray"
) -> list[ConservativenessPoint]:
    """How much sinusoidal flexibility the quasi-steady envelope gives away.

    Only defined for a time-invariant scenario (constant disturbances) with
    the setpoint strictly inside the comfort band.  For each omega (rad/h)
    the largest comfort-feasible amplitude delta_theta/|G(j omega)| is
    reported next to the envelope half-width: ratio >= 1 everywhere and is
    non-decreasing in omega until the rated-range clamp binds.
    """
    if not scn.dist.is_constant(tol=1e-12):
        raise InputError("conservativeness curve requires constant disturbances")
    par = scn.params
    p_eq = equilibrium_power(
        par, float(scn.dist.theta_a[0]), scn.theta_sp, float(scn.dist.q_d[0])
    )
    if not 0.0 < p_eq < par.p_rated:
        raise InputError(
            f"baseline demand {p_eq:.4g} kW must lie strictly inside "
            f"(0, {par.p_rated}) kW"
        )
    delta_dn = scn.theta_sp - scn.bounds.theta_min
    delta_up = scn.bounds.theta_max - scn.theta_sp
    delta = min(delta_dn, delta_up)
    if delta <= 0:
        raise InputError("setpoint must be strictly inside the comfort band")
    headroom = min(par.p_rated - p_eq, p_eq)
    a0 = max_sine_amplitude(par, delta, 0.0)
    out = []
    for omega in omegas:
        a_raw = max_sine_amplitude(par, delta, float(omega))
        a_clamped = min(a_raw, headroom)
        out.append(
            ConservativenessPoint(
                omega=float(omega),
                a_max_unclamped=a_raw,
                a_max=a_clamped,
                ratio=a_clamped / a0,
            )
        )
    return out


def sample_interior_trajectories(
    scn: Scenario, n_draws: int, rng: np.random.Generator
) -> list[Trajectory]:
    """Random demand trajectories drawn uniformly inside the envelope.

    Every draw is a member of the true flexibility set whenever theta0 is
    inside the comfort band, which makes this the workhorse of the property
    tests.  An envelope that is empty somewhere has no interior to draw
    from; that is an InputError, not an infeasibility verdict.
    """
    env = envelope(scn)
    if env.empty_mask.any():
        raise InputError("envelope is empty at some samples; nothing to draw")
    out = []
    for _ in range(n_draws):
        u = rng.uniform(size=scn.n_steps)
        vals = env.p_lo + u * (env.p_hi - env.p_lo)
        out.append(Trajectory(scn.dt, vals, unit="kW"))
    return out


def sine_membership_example(
    scn: Scenario, amplitude_kw: float, omega: float
) -> tuple[Verdict, Trajectory]:
    """Baseline plus a demand sinusoid, returned with its membership verdict.

    Demonstrates envelope conservativeness on a concrete trajectory: pick an
    amplitude above the envelope half-width but below
    max_sine_amplitude(omega) and the verdict still comes back feasible.
    """
    if not scn.dist.is_constant(tol=1e-12):
        raise InputError("the sinusoid example requires constant disturbances")
    base = scn.baseline()
    if base.saturated:
        raise InputError("baseline saturates; pick a milder operating point")
    t = scn.dist.times()
    p = Trajectory(
        scn.dt, base.power.values + amplitude_kw * np.sin(omega * t), unit="kW"
    )
    return is_member(p, scn), p


def hold_step_example(
    scn: Scenario, step_kw: float
) -> tuple[Verdict, Trajectory]:
    """Baseline plus a constant demand step, with its membership verdict.

    The step drives theta to a new quasi-steady value R*eta_cop*step_kw away
    from the setpoint; any step above the envelope half-width eventually
    leaves the band, and the verdict's first_violation_index pins the time.
    """
    base = scn.baseline()
    p = Trajectory(scn.dt, base.power.values + step_kw, unit="kW")
    return is_member(p, scn), p
