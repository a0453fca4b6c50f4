"""Moist-air enthalpy accounting for cooling-coil demand.

The zone thermal model tracks temperature only; this module quantifies what
that leaves out.  Chilled-water coils remove both sensible heat (dry-bulb
temperature drop) and latent heat (condensed moisture), and at typical
design states the two are comparable, so demand estimates built on dry-bulb
temperature alone undercount the coil load by roughly half.

Enthalpy of moist air per kg of dry air, kJ/kg:

    h(T, W) = cp_dry * T + W * (h_fg + cp_water * T)

with T in degC and W the humidity ratio in kg water per kg dry air.  The
constants are deliberately the round engineering values (1.0, 2256, 4.184)
rather than a high-order psychrometric fit; they can be overridden through
PsychroConstants when more precision is warranted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError

# design states, SI: 75 degF return/mixed air at W = 0.009 supplied as
# 55 degF conditioned air at W = 0.004
DESIGN_T_RETURN_C = 23.89
DESIGN_W_RETURN = 0.009
DESIGN_T_SUPPLY_C = 12.78
DESIGN_W_SUPPLY = 0.004


@dataclass(frozen=True)
class PsychroConstants:
    """Enthalpy-model constants, kJ-based.

    cp_dry   : dry-air specific heat, kJ/(kg K)
    cp_water : water specific heat, kJ/(kg K)
    h_fg     : latent heat of vaporization, kJ/kg
    """

    cp_dry: float = 1.0
    cp_water: float = 4.184
    h_fg: float = 2256.0

    def __post_init__(self) -> None:
        if min(self.cp_dry, self.cp_water, self.h_fg) <= 0:
            raise InputError("psychrometric constants must be positive")


DEFAULT_CONSTANTS = PsychroConstants()


@dataclass(frozen=True)
class MoistAirState:
    """Dry-bulb temperature (degC) and humidity ratio (kg/kg dry air)."""

    t_c: float
    w: float

    def __post_init__(self) -> None:
        if not -50.0 <= self.t_c <= 60.0:
            raise InputError(f"dry-bulb {self.t_c} degC outside [-50, 60]")
        if self.w < 0.0:
            raise InputError("humidity ratio cannot be negative")


DESIGN_RETURN_AIR = MoistAirState(DESIGN_T_RETURN_C, DESIGN_W_RETURN)
DESIGN_SUPPLY_AIR = MoistAirState(DESIGN_T_SUPPLY_C, DESIGN_W_SUPPLY)


def specific_enthalpy(
    state: MoistAirState, const: PsychroConstants = DEFAULT_CONSTANTS
) -> float:
    """kJ per kg dry air, zero reference at 0 degC dry air."""
    return state.t_c * const.cp_dry + state.w * (
        const.h_fg + const.cp_water * state.t_c
    )


def mix_air(
    recirculated: MoistAirState, outdoor: MoistAirState, outdoor_fraction: float
) -> MoistAirState:
    """Adiabatic mixing of return and outdoor streams by dry-air mass.

    Mass and water balances make T and W mix linearly in the outdoor
    fraction (enthalpy is then linear too, up to the tiny W*T cross term
    the balance itself carries).
    """
    if not 0.0 <= outdoor_fraction <= 1.0:
        raise InputError("outdoor_fraction must be within [0, 1]")
    f = outdoor_fraction
    return MoistAirState(
        t_c=(1.0 - f) * recirculated.t_c + f * outdoor.t_c,
        w=(1.0 - f) * recirculated.w + f * outdoor.w,
    )


def coil_thermal_power(
    m_dot_kg_s: float,
    state_in: MoistAirState,
    state_out: MoistAirState,
    const: PsychroConstants = DEFAULT_CONSTANTS,
) -> float:
    """Heat removed by the coil, kW, for a dry-air mass flow in kg/s."""
    if m_dot_kg_s < 0:
        raise InputError("mass flow cannot be negative")
    return m_dot_kg_s * (
        specific_enthalpy(state_in, const) - specific_enthalpy(state_out, const)
    )


def electric_demand(
    m_dot_kg_s: float,
    state_in: MoistAirState,
    state_out: MoistAirState,
    eta_chiller: float,
    const: PsychroConstants = DEFAULT_CONSTANTS,
) -> float:
    """Chiller electric input, kW: coil thermal power over the chiller COP."""
    if eta_chiller <= 0:
        raise InputError("chiller COP must be positive")
    return coil_thermal_power(m_dot_kg_s, state_in, state_out, const) / eta_chiller


def latent_fraction(latent: float, sensible: float) -> float | None:
    """Latent share of a latent+sensible pair; None when the total is zero."""
    total = latent + sensible
    if total == 0.0:
        return None
    return latent / total


def latent_sensible_split(
    state_in: MoistAirState,
    state_out: MoistAirState,
    const: PsychroConstants = DEFAULT_CONSTANTS,
) -> tuple[float, float, float | None]:
    """(latent, sensible, latent fraction) of the coil duty, kJ/kg dry air.

    latent = h_fg * dW and sensible = cp_dry * dT; the small vapor-heat
    cross term W*cp_water*T belongs to neither bucket and is excluded from
    the fraction, which is why latent + sensible is slightly below the full
    enthalpy difference.
    """
    latent = const.h_fg * (state_in.w - state_out.w)
    sensible = const.cp_dry * (state_in.t_c - state_out.t_c)
    return latent, sensible, latent_fraction(latent, sensible)


def dry_model_demand_error(
    m_dot_kg_s: float,
    state_in: MoistAirState,
    state_out: MoistAirState,
    eta_chiller: float,
    const: PsychroConstants = DEFAULT_CONSTANTS,
) -> float:
    """Signed relative error of a temperature-only demand estimate.

    A dry model prices the coil at cp_dry * dT per kg and misses both the
    latent duty and the vapor-heat term.  Returns (dry - full) / full, so a
    negative value is an underestimate; at the design states it is roughly
    -0.5, the headline reason humidity cannot be ignored when converting
    coil flexibility to kW.
    """
    full = coil_thermal_power(m_dot_kg_s, state_in, state_out, const)
    if full == 0.0:
        raise InputError("full coil power is zero; relative error undefined")
    dry = m_dot_kg_s * const.cp_dry * (state_in.t_c - state_out.t_c)
    return (dry - full) / full
