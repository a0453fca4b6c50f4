"""Command-line front end.

One subcommand per analysis; all of them read the same sectioned key=value
config (a flat TOML subset parsed here so the tool runs on any Python this
package supports), write plain CSV into --out-dir, and print a short
summary to stdout.  Numeric CSV fields use repr-faithful %.17g so outputs
are byte-identical across runs and round-trip through float exactly.

Exit codes:
    0  success
    1  the request is infeasible in the model (no plan, fleet too small, ...)
    2  bad input: unreadable config or CSV, malformed arguments
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources

import numpy as np

from . import battery, deferrable, ensemble, flexset, humidity, planner
from .errors import InfeasibleError, InputError, VesflexError
from .qos import QoSBounds
from .thermal import DisturbanceSeries, ThermalParams, Trajectory, simulate

FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------- config --


def _parse_value(val: str, origin: str, lineno: int):
    if val.startswith('"'):
        end = val.find('"', 1)
        if end < 0:
            raise InputError(f"{origin}:{lineno}: unterminated string")
        rest = val[end + 1 :].strip()
        if rest and not rest.startswith("#"):
            raise InputError(f"{origin}:{lineno}: trailing junk after string")
        return val[1:end]
    val = val.split("#", 1)[0].strip()
    if val in ("true", "false"):
        return val == "true"
    try:
        return int(val)
    except ValueError:
        pass
    try:
        return float(val)
    except ValueError:
        raise InputError(f"{origin}:{lineno}: cannot parse value {val!r}") from None


def parse_config_text(text: str, origin: str) -> dict:
    """Sections of key = value pairs; comments with #, quoted strings."""
    data: dict[str, dict] = {}
    section: str | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise InputError(f"{origin}:{lineno}: empty section name")
            data.setdefault(section, {})
            continue
        if "=" not in line:
            raise InputError(f"{origin}:{lineno}: expected key = value")
        if section is None:
            raise InputError(f"{origin}:{lineno}: key outside any [section]")
        key, _, val = line.partition("=")
        key = key.strip()
        if not key:
            raise InputError(f"{origin}:{lineno}: empty key")
        data[section][key] = _parse_value(val.strip(), origin, lineno)
    return data


def load_config(name_or_path: str) -> dict:
    """A config is either a file path or the name of a bundled preset."""
    if os.path.exists(name_or_path):
        with open(name_or_path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read(), name_or_path)
    preset = resources.files(__package__) / "presets" / f"{name_or_path}.toml"
    if preset.is_file():
        return parse_config_text(
            preset.read_text(encoding="utf-8"), f"preset:{name_or_path}"
        )
    raise InputError(
        f"config {name_or_path!r} is neither a file nor a bundled preset"
    )


def _req(cfg: dict, section: str, key: str):
    try:
        return cfg[section][key]
    except KeyError:
        raise InputError(f"config is missing [{section}] {key}") from None


def params_from_config(cfg: dict) -> ThermalParams:
    # config keys carry their units; unit bugs dominate this domain
    return ThermalParams(
        r_thermal=float(_req(cfg, "thermal", "r_C_per_kW")),
        c_thermal=float(_req(cfg, "thermal", "c_kWh_per_C")),
        eta_cop=float(_req(cfg, "thermal", "eta_cop")),
        p_rated=float(_req(cfg, "thermal", "p_rated_kW")),
    )


def bounds_from_config(cfg: dict) -> QoSBounds:
    com = cfg.get("comfort", {})
    kwargs = {}
    for cfg_key, field in (
        ("w_min", "w_min"),
        ("w_max", "w_max"),
        ("tau_lock_h", "tau_lock"),
    ):
        if cfg_key in com:
            kwargs[field] = float(com[cfg_key])
    return QoSBounds(
        theta_min=float(_req(cfg, "comfort", "theta_min_C")),
        theta_max=float(_req(cfg, "comfort", "theta_max_C")),
        **kwargs,
    )


def scenario_from_config(cfg: dict, dist_csv: str | None = None) -> flexset.Scenario:
    params = params_from_config(cfg)
    bounds = bounds_from_config(cfg)
    scn_cfg = cfg.get("scenario", {})
    theta_sp = float(_req(cfg, "scenario", "theta_sp_C"))
    theta0 = float(scn_cfg.get("theta0_C", theta_sp))
    if dist_csv is not None:
        dist = DisturbanceSeries.from_csv(dist_csv)
    else:
        dt = float(_req(cfg, "scenario", "dt_h"))
        horizon = float(_req(cfg, "scenario", "horizon_h"))
        if dt <= 0 or horizon <= 0:
            raise InputError("dt_h and horizon_h must be positive")
        n = int(round(horizon / dt))
        if n < 1 or abs(n * dt - horizon) > 1e-9:
            raise InputError("horizon_h must be a positive multiple of dt_h")
        dist = DisturbanceSeries.constant(
            dt,
            n,
            theta_a=float(_req(cfg, "scenario", "theta_a_C")),
            q_d=float(_req(cfg, "scenario", "q_d_kW")),
        )
    return flexset.Scenario(
        params=params, bounds=bounds, dist=dist, theta_sp=theta_sp, theta0=theta0
    )


# ------------------------------------------------------------------- io --


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FLOAT_FMT % float(v)


def write_csv(path: str, header: list[str], columns: list) -> None:
    rows = len(columns[0])
    for col in columns:
        if len(col) != rows:
            raise InputError("internal: ragged CSV columns")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(_fmt(col[i]) for col in columns) + "\n")


def _out(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def read_reference_csv(path: str, dt: float, n_steps: int) -> Trajectory:
    """Two columns t_hours,ref_kw on exactly the scenario grid."""
    try:
        raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError:
        raise InputError(f"cannot read reference CSV {path!r}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if raw.shape[1] != 2:
        raise InputError(f"{path}: expected columns t_hours,ref_kw")
    if raw.shape[0] != n_steps:
        raise InputError(
            f"{path}: {raw.shape[0]} rows but the scenario has {n_steps} steps"
        )
    t = raw[:, 0]
    if np.max(np.abs(t - np.arange(n_steps) * dt)) > 1e-9:
        raise InputError(f"{path}: time stamps do not match the scenario grid")
    return Trajectory(dt, raw[:, 1], unit="kW")


# ----------------------------------------------------------- subcommands --


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    scn = scenario_from_config(cfg, args.dist)
    base = scn.baseline()
    if args.power is not None:
        p = read_reference_csv(args.power, scn.dt, scn.n_steps)
    elif args.power_const is not None:
        p = Trajectory(scn.dt, np.full(scn.n_steps, args.power_const), unit="kW")
    else:
        p = base.power
    theta = simulate(scn.params, scn.dist, p, scn.theta0)
    verdict = flexset.is_member(p, scn, atol=args.atol)
    path = _out(args, "simulate.csv")
    write_csv(
        path,
        ["t_hours", "p_kw", "theta_C"],
        [p.times(), p.values, theta.values[1:]],
    )
    print(f"wrote {path}")
    print(f"baseline saturated: {'yes' if base.saturated else 'no'}")
    if verdict.ok:
        print("qos: ok")
    else:
        print(
            f"qos: violated channel={verdict.channel} index={verdict.first_violation_index} "
            f"value={verdict.value:.6g} limit={verdict.limit:.6g}"
        )
    return 0


def cmd_envelope(args) -> int:
    cfg = load_config(args.config)
    scn = scenario_from_config(cfg, args.dist)
    env = flexset.envelope(scn)
    path = _out(args, "envelope.csv")
    write_csv(
        path,
        ["t_hours", "p_lo_kw", "p_hi_kw", "empty"],
        [env.times(), env.p_lo, env.p_hi, env.empty_mask],
    )
    print(f"wrote {path}")
    print(f"half width at t=0: {env.half_width[0]:.6g} kW")
    print(f"empty samples: {int(env.empty_mask.sum())}")
    if args.verify_samples > 0:
        rng = np.random.default_rng(args.seed)
        draws = flexset.sample_interior_trajectories(scn, args.verify_samples, rng)
        bad = sum(1 for p in draws if not flexset.is_member(p, scn))
        print(f"interior draws violating comfort: {bad}/{args.verify_samples}")
        if bad:
            return 1
    return 0


def cmd_freq(args) -> int:
    cfg = load_config(args.config)
    scn = scenario_from_config(cfg, args.dist)
    omegas = [float(w) for w in args.omega or []]
    omegas += [2.0 * np.pi * float(f) for f in args.omega_cycles or []]
    if omegas:
        omegas = np.array(sorted(omegas))
    else:
        omegas = np.concatenate([[0.0], np.logspace(-2, 3, num=51)])
    pts = flexset.conservativeness_curve(scn, omegas)
    path = _out(args, "freq.csv")
    write_csv(
        path,
        ["omega_rad_per_h", "a_max_unclamped_kw", "a_max_kw", "ratio_vs_dc"],
        [
            [p.omega for p in pts],
            [p.a_max_unclamped for p in pts],
            [p.a_max for p in pts],
            [p.ratio for p in pts],
        ],
    )
    print(f"wrote {path}")
    print(f"dc gain: {scn.params.dc_gain:.6g} degC/kW")
    for p in pts:
        if p.omega == 0.0:
            print(f"a_max(omega=0) = {p.a_max:.6g} kW")
            break
    print(f"peak clamped ratio: {max(p.ratio for p in pts):.6g}")
    return 0


def cmd_plan(args) -> int:
    cfg = load_config(args.config)
    scn = scenario_from_config(cfg, args.dist)
    if args.ref is not None:
        ref = read_reference_csv(args.ref, scn.dt, scn.n_steps)
    else:
        base = scn.baseline().power.values
        step = np.zeros(scn.n_steps)
        k0 = min(int(round(args.step_at / scn.dt)), scn.n_steps)
        step[k0:] = args.step_kw
        ref = Trajectory(scn.dt, base + step, unit="kW")
    if args.window is not None:
        result = planner.receding_horizon(scn, ref, args.window, norm=args.norm)
        n_solves = result.n_solves
    else:
        result = planner.plan(scn, ref, norm=args.norm)
        n_solves = 1
    path = _out(args, "plan.csv")
    write_csv(
        path,
        ["t_hours", "ref_kw", "p_kw", "theta_C"],
        [ref.times(), ref.values, result.p.values, result.theta.values[1:]],
    )
    print(f"wrote {path}")
    print(f"norm: {args.norm}  solves: {n_solves}")
    print(f"tracking error: {result.tracking_error:.9g}")
    return 0


def cmd_humidity(args) -> int:
    state_in = humidity.MoistAirState(args.t_in, args.w_in)
    state_out = humidity.MoistAirState(args.t_out, args.w_out)
    if args.outdoor is not None:
        t_oa, w_oa, frac = args.outdoor
        state_in = humidity.mix_air(
            state_in, humidity.MoistAirState(t_oa, w_oa), frac
        )
    h_in = humidity.specific_enthalpy(state_in)
    h_out = humidity.specific_enthalpy(state_out)
    coil = humidity.coil_thermal_power(args.m_dot, state_in, state_out)
    electric = humidity.electric_demand(
        args.m_dot, state_in, state_out, args.eta_chiller
    )
    latent, sensible, frac_l = humidity.latent_sensible_split(state_in, state_out)
    err = humidity.dry_model_demand_error(
        args.m_dot, state_in, state_out, args.eta_chiller
    )
    names = [
        "t_in_C", "w_in", "t_out_C", "w_out",
        "h_in_kj_per_kg", "h_out_kj_per_kg",
        "coil_kw", "electric_kw",
        "latent_kj_per_kg", "sensible_kj_per_kg", "latent_fraction",
        "dry_model_rel_error",
    ]
    vals = [
        state_in.t_c, state_in.w, state_out.t_c, state_out.w,
        h_in, h_out, coil, electric,
        latent, sensible, (float("nan") if frac_l is None else frac_l),
        err,
    ]
    path = _out(args, "humidity.csv")
    write_csv(path, ["name", "value"], [names, vals])
    print(f"wrote {path}")
    print(f"coil: {coil:.6g} kW  electric: {electric:.6g} kW")
    print(f"latent fraction: {frac_l if frac_l is None else f'{frac_l:.6g}'}")
    print(f"dry-model relative error: {err:.6g}")
    return 0


def cmd_deferrable(args) -> int:
    cfg = load_config(args.config)
    scn = scenario_from_config(cfg, args.dist)
    if args.energy is not None:
        energy = args.energy
    else:
        energy = deferrable.baseline_energy(
            scn.params,
            theta_a=args.sizing_theta_a,
            theta_sp=scn.theta_sp,
            q_d=args.sizing_q_d,
            horizon_h=args.window,
            dt=scn.dt,
        )
        print(f"sized energy from sizing day: {energy:.9g} kWh")
    spec = deferrable.DeferrableSpec(
        arrival_h=args.arrival,
        energy_kwh=energy,
        window_h=args.window,
        p_max=args.p_max if args.p_max is not None else scn.params.p_rated,
        kind=args.kind,
    )
    if not deferrable.spec_feasible(spec):
        raise InfeasibleError(
            f"contract needs {spec.energy_kwh:.6g} kWh but P*T allows only "
            f"{spec.p_max * spec.window_h:.6g} kWh"
        )
    result = deferrable.counterexample_check(spec, scn)
    path = _out(args, "deferrable.csv")
    write_csv(
        path,
        ["t_hours", "p_kw"],
        [result.p.times(), result.p.values],
    )
    print(f"wrote {path}")
    print(f"contract: {'ok' if result.contract else 'violated'} ({result.contract.reason})")
    if result.comfort.ok:
        print("comfort: ok")
    else:
        print(
            f"comfort: violated channel={result.comfort.channel} "
            f"index={result.comfort.first_violation_index} "
            f"value={result.comfort.value:.6g} limit={result.comfort.limit:.6g}"
        )
    print(f"demonstrates contract/comfort gap: {'yes' if result.demonstrates_gap else 'no'}")
    return 0


def _ensemble_reference(args) -> np.ndarray:
    given = [
        args.ref is not None,
        args.triangle is not None,
        args.square is not None,
    ]
    if sum(given) != 1:
        raise InputError("give exactly one of --ref, --triangle, --square")
    if args.ref is not None:
        if os.path.exists(args.ref):
            try:
                raw = np.loadtxt(args.ref, delimiter=",", skiprows=1, ndmin=2)
            except ValueError as exc:
                raise InputError(f"{args.ref}: {exc}") from None
            return np.asarray(np.rint(raw[:, -1]), dtype=np.int64)
        try:
            return np.array([int(tok) for tok in args.ref.split(",")], dtype=np.int64)
        except ValueError:
            raise InputError(
                f"--ref must be comma-separated integers or a CSV path, got {args.ref!r}"
            ) from None
    if args.triangle is not None:
        return ensemble.staircase_triangle(args.triangle)
    amp, tau = args.square
    return ensemble.square_reference(amp, tau)


def cmd_ensemble(args) -> int:
    ref = _ensemble_reference(args)
    spec = ensemble.PulseLoadSpec(unit_kw=args.unit_kw, slot_h=args.slot_h)
    need = ensemble.min_loads(ref)
    print(f"slots: {ref.size}  min loads: {need}")
    sched = ensemble.schedule_tracking(ref, spec, n_loads=args.n_loads)
    ensemble.validate_schedule(sched)
    agg = sched.aggregate_units()
    if not np.array_equal(agg, ref):
        raise InfeasibleError("internal: schedule does not reproduce the reference")
    path = _out(args, "ensemble.csv")
    cols = [np.arange(sched.n_loads)] + [
        sched.actions[:, t] for t in range(sched.n_slots)
    ]
    write_csv(path, ["load"] + [f"slot_{t}" for t in range(sched.n_slots)], cols)
    print(f"wrote {path}")
    print(f"loads used: {sched.loads_used} of {sched.n_loads}")
    print("aggregate matches reference: yes")
    return 0


def cmd_capacity(args) -> int:
    cfg = load_config(args.config)
    scn = scenario_from_config(cfg, args.dist)
    caps = battery.characterize(scn)
    path = _out(args, "capacity.csv")
    header = ["p_c_kW", "p_dc_kW", "e_c_kWh", "e_dc_kWh", "horizon_h"]
    vals = [
        caps.charge_rate_kw,
        caps.discharge_rate_kw,
        caps.charge_energy_kwh,
        caps.discharge_energy_kwh,
        scn.dist.horizon_h,
    ]
    write_csv(path, header, [[v] for v in vals])
    print(f"wrote {path}")
    for name, val in zip(header, vals):
        print(f"{name}: {val:.9g}")
    return 0


# ----------------------------------------------------------------- main --


def _two_ints(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(",")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected AMPLITUDE,TAU integers, got {text!r}"
        ) from None


def _three_floats(text: str) -> tuple[float, float, float]:
    try:
        a, b, c = text.split(",")
        return float(a), float(b), float(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected T,W,FRACTION, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="vesflex",
        description="Virtual-energy-storage analysis of flexible loads.",
    )
    top.add_argument(
        "--out-dir", default=".", help="directory for CSV outputs (default: .)"
    )
    top.add_argument("--seed", type=int, default=0, help="RNG seed where sampling is used")
    sub = top.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument(
            "--config",
            default="paper",
            help="config file path or bundled preset name (default: paper)",
        )
        p.add_argument(
            "--dist",
            default=None,
            help="disturbance CSV t_hours,theta_a_C,q_d_kW overriding the config grid",
        )

    p = sub.add_parser("simulate", help="simulate demand and audit comfort")
    scenario_args(p)
    p.add_argument("--power", default=None, help="demand CSV t_hours,ref_kw")
    p.add_argument("--power-const", type=float, default=None, help="constant demand, kW")
    p.add_argument("--atol", type=float, default=1e-9, help="comfort audit tolerance")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("envelope", help="quasi-steady feasible power band")
    scenario_args(p)
    p.add_argument(
        "--verify-samples",
        type=int,
        default=0,
        help="draw N random interior trajectories and audit each",
    )
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("freq", help="envelope conservativeness across frequency")
    scenario_args(p)
    p.add_argument(
        "--omega",
        action="append",
        default=None,
        help="rad/h sample (repeatable; default log sweep)",
    )
    p.add_argument(
        "--omega-cycles",
        action="append",
        default=None,
        help="cycles/h sample (repeatable), converted to rad/h",
    )
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("plan", help="track a reference demand inside comfort")
    scenario_args(p)
    p.add_argument("--ref", default=None, help="reference CSV t_hours,ref_kw")
    p.add_argument("--step-kw", type=float, default=0.2, help="synthetic step height")
    p.add_argument("--step-at", type=float, default=0.0, help="synthetic step time, h")
    p.add_argument("--norm", choices=planner.NORMS, default="two")
    p.add_argument("--window", type=int, default=None, help="receding-horizon window, steps")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("humidity", help="moist-air coil demand accounting")
    p.add_argument("--t-in", type=float, default=humidity.DESIGN_T_RETURN_C)
    p.add_argument("--w-in", type=float, default=humidity.DESIGN_W_RETURN)
    p.add_argument("--t-out", type=float, default=humidity.DESIGN_T_SUPPLY_C)
    p.add_argument("--w-out", type=float, default=humidity.DESIGN_W_SUPPLY)
    p.add_argument("--m-dot", type=float, default=1.0, help="dry-air flow, kg/s")
    p.add_argument("--eta-chiller", type=float, default=3.5)
    p.add_argument(
        "--outdoor",
        type=_three_floats,
        default=None,
        metavar="T,W,FRACTION",
        help="mix outdoor air into the inlet before the coil",
    )
    p.set_defaults(func=cmd_humidity)

    p = sub.add_parser("deferrable", help="deferrable contract vs comfort audit")
    scenario_args(p)
    p.add_argument("--arrival", type=float, default=0.0, help="contract arrival, h")
    p.add_argument("--window", type=float, required=True, help="completion window, h")
    p.add_argument("--energy", type=float, default=None, help="required energy, kWh")
    p.add_argument(
        "--sizing-theta-a",
        type=float,
        default=32.0,
        help="outdoor temperature of the sizing day when --energy is absent",
    )
    p.add_argument(
        "--sizing-q-d",
        type=float,
        default=1.5,
        help="internal gains of the sizing day when --energy is absent",
    )
    p.add_argument("--p-max", type=float, default=None, help="contract power ceiling, kW")
    p.add_argument("--kind", choices=deferrable.KINDS, default="battery")
    p.set_defaults(func=cmd_deferrable)

    p = sub.add_parser("ensemble", help="pulse-pair fleet tracking a slotted reference")
    p.add_argument(
        "--ref",
        default=None,
        help="comma-separated integer reference, or a CSV whose last column is it",
    )
    p.add_argument("--triangle", type=int, default=None, help="staircase triangle peak")
    p.add_argument(
        "--square", type=_two_ints, default=None, metavar="AMPLITUDE,TAU",
        help="square wave amplitude and half-period in slots",
    )
    p.add_argument("--unit-kw", type=float, default=1.0, help="pulse height, kW")
    p.add_argument("--slot-h", type=float, default=1.0, help="slot length, h")
    p.add_argument("--n-loads", type=int, default=None, help="fleet size (default: minimum)")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("capacity", help="virtual-battery rate and energy capacities")
    scenario_args(p)
    p.set_defaults(func=cmd_capacity)

    return top


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VesflexError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
