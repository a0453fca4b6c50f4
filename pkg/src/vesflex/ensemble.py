"""Tracking a slotted reference with an ensemble of pulse-pair loads.

Each load in the ensemble can contribute one primitive action at a time: a
demand pulse of +u kW for one slot immediately paid back with -u kW in the
next slot (or the mirrored -u then +u).  Slots never wrap; a pulse started
in the final slot has nowhere to pay back, so it is not allowed.  A load
may perform many pulse pairs over the horizon as long as they do not
overlap in time.

For an integer reference r (in units of u) the decomposition into pulse
pairs is forced, not chosen.  Let S_t = r_0 + ... + r_t.  A pair spanning
slots (t, t+1) adds +1 to r_t and -1 to r_{t+1} (or the reverse), so the
signed number of pairs spanning each boundary telescopes to exactly S_t.
Consequences, each of which the code below exploits:

* r is trackable only if S_{N-1} = 0: every pair nets zero energy, so a
  reference that does not is infeasible outright.
* slot t is worked by the |S_{t-1}| pairs ending there plus the |S_t|
  pairs starting there, and no load can do both at once, so the fleet
  size needed is exactly max_t (|S_{t-1}| + |S_t|).
* assigning pairs to loads is interval coloring on intervals of length
  two slots, where greedy first-fit is optimal.

A square reference of amplitude A units held for tau slots each way costs
A * (2*tau - 1) loads, so a fleet of n supports amplitude floor(n/(2*tau-1))
at time scale tau: amplitude and time scale trade off inside one fleet.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InputError, ShapeError


def _as_units(ref_units) -> np.ndarray:
    r = np.asarray(ref_units)
    if r.ndim != 1 or r.size == 0:
        raise ShapeError("reference must be a non-empty 1-D sequence")
    ri = np.asarray(np.rint(r), dtype=np.int64)
    if not np.allclose(r, ri, rtol=0.0, atol=1e-9):
        raise InputError("reference must be integer multiples of the unit pulse")
    return ri


@dataclass(frozen=True)
class PulseLoadSpec:
    """Homogeneous fleet description: pulse height u (kW) and slot length (h)."""

    unit_kw: float
    slot_h: float

    def __post_init__(self) -> None:
        if self.unit_kw <= 0 or self.slot_h <= 0:
            raise InputError("unit pulse and slot length must be positive")


@dataclass(frozen=True)
class EnsembleSchedule:
    """Per-load slot actions, rows in {-1, 0, +1} units of the pulse height."""

    spec: PulseLoadSpec
    actions: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.actions, dtype=np.int8)
        if a.ndim != 2:
            raise ShapeError("actions must be a (loads, slots) array")
        a.setflags(write=False)
        object.__setattr__(self, "actions", a)

    @property
    def n_loads(self) -> int:
        return int(self.actions.shape[0])

    @property
    def n_slots(self) -> int:
        return int(self.actions.shape[1])

    @property
    def loads_used(self) -> int:
        return int(np.any(self.actions != 0, axis=1).sum())

    def aggregate_units(self) -> np.ndarray:
        return self.actions.sum(axis=0, dtype=np.int64)

    def aggregate_kw(self) -> np.ndarray:
        return self.spec.unit_kw * self.aggregate_units().astype(float)


def validate_schedule(schedule: EnsembleSchedule) -> None:
    """Raise InputError unless every row is a chain of legal pulse pairs.

    Legal row grammar: zero or more non-overlapping adjacent-slot pairs
    (+1, -1) or (-1, +1), everything else zero.  No pair may start in the
    final slot.
    """
    for i, row in enumerate(schedule.actions):
        t = 0
        n = row.size
        while t < n:
            v = int(row[t])
            if v == 0:
                t += 1
                continue
            if abs(v) != 1:
                raise InputError(f"load {i} slot {t}: action {v} exceeds one unit")
            if t + 1 >= n:
                raise InputError(f"load {i}: pulse at final slot {t} cannot pay back")
            if int(row[t + 1]) != -v:
                raise InputError(
                    f"load {i} slot {t}: pulse {v:+d} not paid back in slot {t + 1}"
                )
            t += 2


def pair_counts(ref_units) -> np.ndarray:
    """Signed pulse pairs spanning each slot boundary: the prefix sum of r.

    Entry t is positive for (+ then -) pairs on slots (t, t+1), negative
    for the mirrored orientation.  The decomposition is unique, so this is
    a statement about the reference, not about any particular schedule.
    """
    return np.cumsum(_as_units(ref_units))


def _require_zero_sum(s: np.ndarray) -> None:
    if s[-1] != 0:
        raise InfeasibleError(
            "reference sums to "
            f"{int(s[-1])} units: every pulse pair nets zero energy over its "
            "two slots, so only zero-sum references are trackable"
        )


def min_loads(ref_units) -> int:
    """Exact minimum fleet size that can track the reference.

    max_t(|S_{t-1}| + |S_t|): both the pairs ending at a slot and the pairs
    starting there occupy distinct loads.  The bound is achieved by greedy
    interval coloring, see schedule_tracking.
    """
    s = pair_counts(ref_units)
    _require_zero_sum(s)
    need = np.abs(s)
    if need.size == 1:
        return int(need[0])
    return int(np.max(need[:-1] + need[1:]))


def schedule_tracking(
    ref_units, spec: PulseLoadSpec, n_loads: int | None = None
) -> EnsembleSchedule:
    """Assign the forced pulse pairs to concrete loads, minimally.

    First-fit greedy over boundaries left to right: a pair spanning slots
    (t, t+1) goes to the lowest-numbered load idle since slot t-1 or
    earlier.  For intervals sorted by start this uses exactly the clique
    bound of loads, so loads_used == min_loads(ref).  Passing n_loads
    smaller than that is InfeasibleError; larger fleets simply leave the
    extra rows idle.
    """
    s = pair_counts(ref_units)
    _require_zero_sum(s)
    need = min_loads(ref_units)
    if n_loads is None:
        n_loads = need
    elif n_loads < need:
        raise InfeasibleError(
            f"reference needs {need} loads, fleet has only {n_loads}"
        )
    n_slots = s.size
    actions = np.zeros((n_loads, n_slots), dtype=np.int8)
    free: list[int] = list(range(n_loads))
    heapq.heapify(free)
    busy_until: list[tuple[int, int]] = []  # (first free slot, load)
    for t in range(n_slots - 1):
        while busy_until and busy_until[0][0] <= t:
            heapq.heappush(free, heapq.heappop(busy_until)[1])
        sign = 1 if s[t] > 0 else -1
        for _ in range(abs(int(s[t]))):
            load = heapq.heappop(free)
            actions[load, t] = sign
            actions[load, t + 1] = -sign
            heapq.heappush(busy_until, (t + 2, load))
    return EnsembleSchedule(spec=spec, actions=actions)


def amplitude_at_timescale(n_loads: int, tau_slots: int) -> int:
    """Largest square-wave amplitude (units) a fleet sustains at width tau.

    The reference +A for tau slots then -A for tau slots costs A*(2*tau - 1)
    loads at the boundary where ramp-up pairs stack on ramp-down pairs.
    """
    if n_loads < 0 or tau_slots < 1:
        raise InputError("need n_loads >= 0 and tau_slots >= 1")
    return n_loads // (2 * tau_slots - 1)


def amplitude_timescale_curve(
    n_loads: int, taus: "list[int] | np.ndarray"
) -> list[tuple[int, int]]:
    """(tau, max amplitude) pairs showing the fleet's flexibility trade-off."""
    return [(int(t), amplitude_at_timescale(n_loads, int(t))) for t in taus]


def square_reference(amplitude_units: int, tau_slots: int) -> np.ndarray:
    """One period of the +A/-A square wave used by the trade-off analysis."""
    if amplitude_units < 0 or tau_slots < 1:
        raise InputError("need amplitude >= 0 and tau_slots >= 1")
    return np.concatenate(
        [
            np.full(tau_slots, amplitude_units, dtype=np.int64),
            np.full(tau_slots, -amplitude_units, dtype=np.int64),
        ]
    )


def staircase_triangle(peak_units: int) -> np.ndarray:
    """Symmetric triangle reference: 0 up to +peak, down through -peak, back.

    Slope one unit per slot, 4*peak + 1 slots starting from zero, zero-sum
    by symmetry.  Its prefix sum peaks at peak^2, so the exact fleet cost
    is 2*peak^2: a useful stress case precisely because the reference
    looks mild and the cost is quadratic anyway.
    """
    if peak_units < 1:
        raise InputError("peak must be at least 1 unit")
    p = peak_units
    return np.concatenate(
        [
            np.arange(0, p + 1, dtype=np.int64),
            np.arange(p - 1, -p - 1, -1, dtype=np.int64),
            np.arange(-p + 1, 1, dtype=np.int64),
        ]
    )
