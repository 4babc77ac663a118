"""Scenario-driven command line front end.

Subcommands:
  sweep      optimal power / EE / rate columns along an M, K or P axis
  validate   closed-form rates vs the Monte Carlo oracle, pass/fail table
  ee-curve   EE and rate over a transmit-power grid, plus LTE reference points
  presets    print the built-in hardware presets

Scenario files are flat JSON; gains and noise powers accept linear values or
strings with a dB / dBm / dBm/Hz suffix. Outputs are deterministic for a
fixed seed: identical scenario runs byte-reproduce their files.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

from .mc import empirical_rate, empirical_rates
from .optimize import (InfiniteGap, OptimizeError, _equivalent_for, approx_max_ee,
                       approx_optimal_power, ee_of_power, optimize_power_exact,
                       rate_gap)
from .power import (EquivalentPower, HardwarePreset, PowerModelError, PRESETS,
                    load_preset, preset)
from .rates import (NonPositiveTerm, Precoder, asymptotic_rate, rate_max,
                    terms_for)
from .system import ConfigError, SystemConfig, derive_params

SWEEP_COLUMNS = ["axis", "P_star_exact", "P_star_approx", "EE_star_exact",
                 "EE_star_approx", "R_star", "R_max", "rate_gap"]
MC_COLUMNS = ["mc_rate", "mc_ci"]
VALIDATE_COLUMNS = ["M", "precoder", "pc", "asymptotic", "empirical", "ci95",
                    "rel_err", "wide_ci", "pass"]


class ScenarioError(ValueError):
    pass


def parse_quantity(value, B: float | None = None) -> float:
    """Parse a linear number or a string like '-174 dBm/Hz', '10 dBm', '-3 dB'."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ScenarioError(f"cannot parse quantity {value!r}")
    text = value.strip()
    for suffix, convert in (
        ("dBm/Hz", lambda x: 10 ** (x / 10) * 1e-3 * _require_bandwidth(B)),
        ("dBm", lambda x: 10 ** (x / 10) * 1e-3),
        ("dBW", lambda x: 10 ** (x / 10)),
        ("dB", lambda x: 10 ** (x / 10)),
    ):
        if text.endswith(suffix):
            try:
                num = float(text[: -len(suffix)])
            except ValueError as exc:
                raise ScenarioError(f"bad quantity {value!r}") from exc
            return convert(num)
    try:
        return float(text)
    except ValueError as exc:
        raise ScenarioError(f"bad quantity {value!r}") from exc


def _require_bandwidth(B):
    if B is None:
        raise ScenarioError("a dBm/Hz quantity needs the bandwidth B defined first")
    return B


_QUANTITY_FIELDS = ("P_tr", "sigma2_tr", "sigma2", "alpha", "chi", "B")


def build_system(raw: dict) -> SystemConfig:
    """SystemConfig from a scenario 'system' block; accepts 'rho' for 'N'."""
    d = dict(raw)
    B = parse_quantity(d.get("B", SystemConfig.B), None) if "B" in d else SystemConfig.B
    for field in _QUANTITY_FIELDS:
        if field in d:
            d[field] = parse_quantity(d[field], B)
    if "rho" in d:
        if "N" in d:
            raise ScenarioError("give either 'rho' or 'N', not both")
        rho = float(d.pop("rho"))
        M = int(d.get("M", SystemConfig.M))
        N = M / rho
        if abs(N - round(N)) > 1e-9:
            raise ScenarioError(f"M={M} not divisible by rho={rho}")
        d["N"] = int(round(N))
    known = {f.name for f in dataclasses.fields(SystemConfig)}
    unknown = set(d) - known
    if unknown:
        raise ScenarioError(f"unknown system fields: {sorted(unknown)}")
    int_fields = {"M", "K", "L", "L_P", "T", "T_tr", "N"}
    for field in int_fields & set(d):
        d[field] = int(d[field])
    return SystemConfig(**d)


def resolve_power(spec):
    """Scenario 'power' entry -> HardwarePreset or EquivalentPower."""
    if isinstance(spec, str):
        return preset(spec)
    if isinstance(spec, dict):
        if "preset_file" in spec:
            return load_preset(spec["preset_file"])
        if {"eta", "P_c", "P_sp"} <= set(spec):
            return EquivalentPower.from_components(
                float(spec["eta"]), float(spec["P_c"]), float(spec["P_sp"]),
                K=1, delta_ZF=0)
    raise ScenarioError(f"cannot interpret power description {spec!r}")


def _parse_precoders(raw) -> list[Precoder]:
    names = raw if isinstance(raw, list) else [raw]
    out = []
    for name in names:
        key = str(name).lower()
        if key in ("mrt", "matched-filter"):
            out.append(Precoder.MRT)
        elif key in ("zf", "zfbf", "zero-forcing"):
            out.append(Precoder.ZFBF)
        else:
            raise ScenarioError(f"unknown precoder {name!r}")
    return out


def load_scenario(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc}")
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: scenario must be a JSON object")
    return raw


def _sweep_points(scenario) -> tuple[str, list[float]]:
    sweep = scenario.get("sweep")
    if not isinstance(sweep, dict) or "axis" not in sweep:
        raise ScenarioError("scenario needs a 'sweep' block with an 'axis'")
    axis = sweep["axis"]
    if axis not in ("M", "K", "P"):
        raise ScenarioError(f"sweep axis must be M, K or P, got {axis!r}")
    if "values" in sweep and "grid" in sweep:
        raise ScenarioError("give either sweep.values or sweep.grid, not both")
    if "values" in sweep:
        values = [float(x) for x in sweep["values"]]
    elif "grid" in sweep:
        g = sweep["grid"]
        points = int(g.get("points", 50))
        start, stop = float(g["start"]), float(g["stop"])
        if g.get("spacing", "log") == "log":
            step = (stop / start) ** (1.0 / (points - 1))
            values = [start * step**i for i in range(points)]
        else:
            step = (stop - start) / (points - 1)
            values = [start + step * i for i in range(points)]
    else:
        raise ScenarioError("sweep block needs 'values' or 'grid'")
    if not values:
        raise ScenarioError("empty sweep")
    return axis, values


def _config_at(cfg: SystemConfig, axis: str, value: float) -> SystemConfig:
    if axis == "M":
        return cfg.with_antennas(int(value))
    if axis == "K":
        return cfg.with_users(int(value))
    return cfg


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def _write_table(path, columns, rows, fmt: str):
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(x) for x in row])
    else:
        payload = [dict(zip(columns, row)) for row in rows]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _sweep_row(cfg, hardware, precoder, axis, value, mc_opts):
    point = _config_at(cfg, axis, value)
    dp = derive_params(point)
    t = terms_for(precoder, dp, point)
    eq = _equivalent_for(hardware, point, precoder)
    op = optimize_power_exact(t, eq, point, dp)
    p_approx = approx_optimal_power(t, eq, point, dp)
    ee_approx = approx_max_ee(t, eq, point, dp)
    try:
        gap = rate_gap(t, eq, point, dp)
    except InfiniteGap:
        gap = math.inf
    row = [value, op.P_star, p_approx, op.EE_star, ee_approx,
           op.R_star, rate_max(t, point), gap]
    if mc_opts is not None:
        P_mc = value if axis == "P" else op.P_star
        r = empirical_rate(point, dp, P_mc, precoder,
                           n=mc_opts["n"], seed=mc_opts["seed"])
        row += [r.rate, r.ci95]
    return row


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    cfg = build_system(scenario.get("system", {}))
    hardware = resolve_power(scenario.get("power", "greentouch2012"))
    precoders = _parse_precoders(scenario.get("precoders", ["mrt", "zfbf"]))
    axis, values = _sweep_points(scenario)
    mc_opts = _mc_options(scenario, args)
    fmt = args.format or scenario.get("output", {}).get("format", "csv")
    out = args.out or scenario.get("output", {}).get("path") \
        or scenario.get("name", "sweep")
    columns = SWEEP_COLUMNS + (MC_COLUMNS if mc_opts else [])

    for precoder in precoders:
        tasks = [(cfg, hardware, precoder, axis, v, mc_opts) for v in values]
        skipped = 0
        rows = []
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
            futures = [pool.submit(_sweep_row, *task) for task in tasks]
            for value, fut in zip(values, futures):
                try:
                    rows.append(fut.result())
                except NonPositiveTerm:
                    skipped += 1
        path = f"{out}_{precoder.value}.{fmt}"
        _write_table(path, columns, rows, fmt)
        note = f", {skipped} infeasible point(s) skipped" if skipped else ""
        print(f"{precoder.value}: {len(rows)} rows -> {path}{note}")
    return 0


def _mc_options(scenario, args):
    mc = scenario.get("monte_carlo")
    if mc is None:
        return None
    return {"n": int(mc.get("n", 500)),
            "seed": args.seed if args.seed is not None else int(mc.get("seed", 1))}


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    cfg = build_system(scenario.get("system", {}))
    precoders = _parse_precoders(scenario.get("precoders", ["mrt", "zfbf"]))
    mc_opts = _mc_options(scenario, args)
    if mc_opts is None:
        raise ScenarioError("validate needs a 'monte_carlo' block")
    pc_settings = scenario.get("pc_settings", [True, False])
    threshold = float(scenario.get("threshold", 0.05))
    P_eval = parse_quantity(scenario.get("P_eval", 1.0))
    axis, values = (("M", [float(cfg.M)]) if "sweep" not in scenario
                    else _sweep_points(scenario))
    if axis != "M":
        raise ScenarioError("validate sweeps over M only")

    rows = []
    failures = 0
    for value in values:
        for pc in pc_settings:
            point = _config_at(cfg, "M", value).with_pilot_reuse(bool(pc))
            dp = derive_params(point)
            results = empirical_rates(point, dp, P_eval, tuple(precoders),
                                      n=mc_opts["n"], seed=mc_opts["seed"])
            for precoder in precoders:
                t = terms_for(precoder, dp, point)
                asym = asymptotic_rate(t, point, P_eval)
                emp = results[precoder]
                rel = abs(emp.rate - asym) / asym
                wide = emp.ci95 > threshold * asym
                ok = rel <= threshold or abs(emp.rate - asym) <= emp.ci95
                failures += 0 if ok else 1
                rows.append([int(value), precoder.value, bool(pc), asym,
                             emp.rate, emp.ci95, rel, wide, ok])

    out = args.out or scenario.get("output", {}).get("path")
    fmt = args.format or scenario.get("output", {}).get("format", "csv")
    if out:
        _write_table(f"{out}.{fmt}", VALIDATE_COLUMNS, rows, fmt)
    header = " ".join(f"{c:>12}" for c in VALIDATE_COLUMNS)
    print(header)
    for row in rows:
        print(" ".join(f"{_fmt(x):>12}" for x in row))
    print(f"{len(rows) - failures}/{len(rows)} rows within {threshold:.1%}")
    return 3 if failures else 0


def cmd_ee_curve(args) -> int:
    scenario = load_scenario(args.scenario)
    cfg = build_system(scenario.get("system", {}))
    hardware = resolve_power(scenario.get("power", "greentouch2012"))
    precoders = _parse_precoders(scenario.get("precoders", ["mrt", "zfbf"]))
    axis, values = _sweep_points(scenario)
    if axis != "P":
        raise ScenarioError("ee-curve sweeps over P")
    out = args.out or scenario.get("output", {}).get("path") \
        or scenario.get("name", "ee_curve")
    fmt = args.format or scenario.get("output", {}).get("format", "csv")
    dp = derive_params(cfg)

    summary = {"name": scenario.get("name", ""), "optima": {}, "lte_points": []}
    for precoder in precoders:
        t = terms_for(precoder, dp, cfg)
        eq = _equivalent_for(hardware, cfg, precoder)
        rows = [[P, asymptotic_rate(t, cfg, P), ee_of_power(t, eq, cfg, dp, P)]
                for P in values]
        path = f"{out}_{precoder.value}.{fmt}"
        _write_table(path, ["P", "rate", "ee"], rows, fmt)
        op = optimize_power_exact(t, eq, cfg, dp)
        summary["optima"][precoder.value] = {
            "P_star": op.P_star, "EE_star": op.EE_star, "R_star": op.R_star}
        print(f"{precoder.value}: {len(rows)} rows -> {path}")

    for name in scenario.get("lte", []):
        summary["lte_points"].append(_lte_point(name, scenario, cfg, args))
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _lte_point(name: str, scenario, cfg: SystemConfig, args) -> dict:
    """EE-rate point of an LTE BS class transmitting at its power cap with
    zero forcing over i.i.d. channels, at a representative user distance."""
    hp = preset(name)
    if hp.M is None or hp.P_max is None:
        raise ScenarioError(f"preset {name!r} has no LTE system parameters")
    frac = float(scenario.get("lte_distance_frac", 0.667))
    distance = frac * hp.cell_radius
    lte_cfg = dataclasses.replace(
        cfg, M=hp.M, K=hp.K, N=hp.M, L_P=1, alpha=hp.pathloss(distance))
    dp = derive_params(lte_cfg)
    mc = scenario.get("monte_carlo", {})
    n = int(mc.get("n", 400))
    seed = args.seed if args.seed is not None else int(mc.get("seed", 1))
    rate = empirical_rate(lte_cfg, dp, hp.P_max, Precoder.ZFBF, n=n, seed=seed)
    eq = hp.equivalent(lte_cfg, delta_ZF=1)
    consumed = (1 - dp.tau) * eq.eta * hp.P_max + lte_cfg.M * eq.P_0
    return {"name": hp.name, "P_max": hp.P_max, "distance_m": distance,
            "rate": rate.rate, "rate_ci95": rate.ci95,
            "ee": (1 - dp.tau) * rate.rate / consumed}


def cmd_presets(args) -> int:
    if args.name:
        table = {args.name: dataclasses.asdict(preset(args.name))}
    else:
        table = {name: dataclasses.asdict(hp) for name, hp in PRESETS.items()}
    print(json.dumps(table, indent=2, sort_keys=True))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmimo-ee",
        description="Massive MIMO downlink energy-efficiency analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", help="output path prefix (overrides scenario)")
        p.add_argument("--format", choices=["csv", "json"],
                       help="output format (overrides scenario)")
        p.add_argument("--seed", type=int, help="Monte Carlo seed override")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for sweep points")

    p_sweep = sub.add_parser("sweep", help="optimal power/EE/rate along an axis")
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="closed forms vs Monte Carlo oracle")
    common(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_curve = sub.add_parser("ee-curve", help="EE and rate over a power grid")
    common(p_curve)
    p_curve.set_defaults(func=cmd_ee_curve)

    p_presets = sub.add_parser("presets", help="print hardware presets")
    p_presets.add_argument("name", nargs="?", help="single preset to print")
    p_presets.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ConfigError, PowerModelError, NonPositiveTerm,
            OptimizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
