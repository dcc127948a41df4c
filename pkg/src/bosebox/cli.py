"""Command line front end.

Subcommands mirror the library layers: ``spectrum``, ``gc``, ``canonical``,
``kac``, ``limits``, ``fluct`` and ``sweep``. Configuration comes from an
optional JSON file plus ``--override key=value`` entries; results go to
stdout or to ``--out`` as CSV (17 significant digits, LF line endings) or
JSON. Every row echoes the inputs it was computed from and carries an
``error_budget`` column. Output files are written atomically.

Exit codes: 0 success (possibly with warnings on stderr), 1 output
interrupted by a closed pipe, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
import tempfile

from .errors import ConfigError, NumericsError
from .spectrum import (
    BoxGeometry,
    classify,
    enumerate_below,
    ids,
    ids_bounds,
    ids_limit,
    suggest_energy_cutoff,
)
from .grandcanonical import (
    critical_density,
    gc_laplace_limit,
    gc_occupation_limit,
    limiting_mu_bar,
    mean_occupation,
    solve_ladder_coefficient,
    solve_mu,
)
from .canonical import (
    build_canonical,
    generalized_condensate,
    occupation_laplace,
    occupation_moment,
)
from .kac import decomposition_check, kac_weights, limiting_kac_transform
from .limits import (
    canonical_laplace_typeII,
    canonical_laplace_typeIII,
    canonical_limit_typeI,
    fluctuation_case,
    fluctuation_convergence_check,
    fluctuation_law,
    g_function,
    g_tail_bound,
    gap_coefficients,
    occupation_limit_typeII,
)

N_MAX_HARD_CAP = 50_000

DEFAULT_CONFIG = {
    "geometry": {
        "alphas": [0.4, 0.35, 0.25],
        "volume": 1000.0,
        "volume_sweep": None,
    },
    "beta": 1.0,
    "rho": 0.3,
    "mode": [1, 1, 1],
    "lambda_grid": [0.1, 1.0, 10.0],
    "eta_grid": [0.5, 1.0, 2.0, 5.0],
    "ladder_count": 5,
    "sweep_target": "gc",
    "cutoffs": {
        "energy_tail_tol": 1e-12,
        "series_M": 1000,
        "n_max": 50_000,
        "mode_budget": 20_000_000,
        "e_max": None,
        "allow_large_n": False,
    },
    "solver": {"tol": 1e-12, "max_iter": 200},
    "output": {"format": "csv", "path": None},
}


def _deep_merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if key in out and isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _apply_override(cfg: dict, entry: str) -> None:
    if "=" not in entry:
        raise ConfigError(f"override {entry!r} is not of the form key=value")
    path, raw = entry.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    keys = path.split(".")
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            raise ConfigError(f"override path {path!r} does not exist")
        node = node[key]
    if keys[-1] not in node:
        raise ConfigError(f"override path {path!r} does not exist")
    node[keys[-1]] = value


def load_config(path: str | None, overrides) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path!r} is not valid JSON: {exc}")
        if not isinstance(user, dict):
            raise ConfigError(f"config {path!r} must hold a JSON object")
        cfg = _deep_merge(cfg, user)
    for entry in overrides or []:
        _apply_override(cfg, entry)
    return cfg


def _geometry(cfg: dict, volume: float | None = None) -> BoxGeometry:
    alphas = cfg["geometry"]["alphas"]
    vol = float(volume if volume is not None else cfg["geometry"]["volume"])
    try:
        return BoxGeometry(alpha=tuple(float(a) for a in alphas), volume=vol)
    except NumericsError as exc:
        raise ConfigError(f"geometry invariant violated: {exc}")


def _coerce_number(cfg: dict, path: str, kind=float):
    """Convert the config entry at ``path`` in place, or raise ConfigError."""
    node = cfg
    keys = path.split(".")
    for key in keys[:-1]:
        node = node[key]
    value = node[keys[-1]]
    try:
        node[keys[-1]] = kind(value)
    except (TypeError, ValueError):
        noun = "an integer" if kind is int else "a number"
        raise ConfigError(f"{path} must be {noun}, got {value!r}")
    return node[keys[-1]]


def _coerce_number_list(cfg: dict, path: str):
    node = cfg
    keys = path.split(".")
    for key in keys[:-1]:
        node = node[key]
    value = node[keys[-1]]
    out = None
    if isinstance(value, (list, tuple)):
        try:
            out = [float(v) for v in value]
        except (TypeError, ValueError):
            out = None
    if not out:
        raise ConfigError(f"{path} must be a non-empty list of numbers, got {value!r}")
    node[keys[-1]] = out
    return out


def _validate(cfg: dict) -> None:
    if _coerce_number(cfg, "beta") <= 0.0:
        raise ConfigError(f"beta must be positive, got {cfg['beta']!r}")
    if _coerce_number(cfg, "rho") <= 0.0:
        raise ConfigError(f"rho must be positive, got {cfg['rho']!r}")
    _coerce_number(cfg, "geometry.volume")
    _coerce_number_list(cfg, "geometry.alphas")
    if cfg["geometry"]["volume_sweep"] is not None:
        _coerce_number_list(cfg, "geometry.volume_sweep")
    _coerce_number_list(cfg, "lambda_grid")
    _coerce_number_list(cfg, "eta_grid")
    _coerce_number(cfg, "ladder_count", int)
    _coerce_number(cfg, "cutoffs.energy_tail_tol")
    _coerce_number(cfg, "cutoffs.series_M", int)
    _coerce_number(cfg, "cutoffs.mode_budget")
    if cfg["cutoffs"]["e_max"] is not None:
        _coerce_number(cfg, "cutoffs.e_max")
    _coerce_number(cfg, "solver.tol")
    _coerce_number(cfg, "solver.max_iter", int)
    n_max = _coerce_number(cfg, "cutoffs.n_max", int)
    if n_max > N_MAX_HARD_CAP and not cfg["cutoffs"]["allow_large_n"]:
        raise ConfigError(
            f"cutoffs.n_max={n_max} exceeds the {N_MAX_HARD_CAP} budget; "
            "set cutoffs.allow_large_n to proceed"
        )
    mode = cfg["mode"]
    try:
        entries = [int(v) for v in mode]
    except (TypeError, ValueError):
        entries = []
    if len(entries) != 3 or any(v < 1 for v in entries):
        raise ConfigError(f"mode must be three integers >= 1, got {mode!r}")
    cfg["mode"] = entries
    fmt = cfg["output"]["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {fmt!r}")
    path = cfg["output"]["path"]
    if path is not None and not isinstance(path, str):
        raise ConfigError(f"output.path must be a string, got {path!r}")


def _particle_number(cfg: dict, volume: float) -> int:
    n = int(round(float(cfg["rho"]) * volume))
    n_max = int(cfg["cutoffs"]["n_max"])
    if n > n_max:
        raise ConfigError(
            f"n = round(rho*V) = {n} exceeds cutoffs.n_max = {n_max}; "
            "raise n_max (and allow_large_n beyond the budget) or lower rho/V"
        )
    if n < 1:
        raise ConfigError(f"n = round(rho*V) = {n} must be at least 1")
    return n


def _echo(cfg: dict, geom: BoxGeometry) -> dict:
    return {
        "alpha1": geom.alpha[0],
        "alpha2": geom.alpha[1],
        "alpha3": geom.alpha[2],
        "volume": geom.volume,
        "beta": float(cfg["beta"]),
        "rho": float(cfg["rho"]),
    }


def _spectrum_table(cfg: dict, geom: BoxGeometry, *, mu_bar: float = 0.0):
    beta = float(cfg["beta"])
    e_max = cfg["cutoffs"]["e_max"]
    if e_max is None:
        e_max = suggest_energy_cutoff(
            geom, beta, tail_tol=float(cfg["cutoffs"]["energy_tail_tol"]), mu_bar=mu_bar
        )
    return enumerate_below(
        geom, float(e_max), mode_budget=int(cfg["cutoffs"]["mode_budget"])
    )


def cmd_spectrum(cfg: dict) -> list[dict]:
    geom = _geometry(cfg)
    beta = float(cfg["beta"])
    echo = _echo(cfg, geom)
    e_max = cfg["cutoffs"]["e_max"]
    if e_max is None:
        e_max = suggest_energy_cutoff(
            geom, beta, tail_tol=float(cfg["cutoffs"]["energy_tail_tol"])
        )
    e_max = float(e_max)
    table = enumerate_below(geom, e_max, mode_budget=int(cfg["cutoffs"]["mode_budget"]))
    if len(table) == 0:
        print(
            f"warning: energy cutoff {e_max!r} lies below the ground level "
            f"{table.ground_energy!r}; spectrum table is empty",
            file=sys.stderr,
        )
    regime = classify(geom)
    rows = []
    rows.append(
        {
            **echo,
            "quantity": "regime",
            "label": f"{regime.condensation}/{regime.symmetry}",
            "n1": "",
            "n2": "",
            "n3": "",
            "eta": "",
            "value": regime.gamma,
            "error_budget": 0.0,
        }
    )
    cap = 1000
    for (m, e) in table.entries[:cap]:
        rows.append(
            {
                **echo,
                "quantity": "eigenvalue",
                "label": "",
                "n1": m.n[0],
                "n2": m.n[1],
                "n3": m.n[2],
                "eta": "",
                "value": e,
                "error_budget": 0.0,
            }
        )
    for eta in cfg["eta_grid"]:
        eta = float(eta)
        lower, upper = ids_bounds(geom, eta)
        for name, value in (
            ("ids", ids(geom, eta)),
            ("ids_limit", ids_limit(eta)),
            ("ids_lower", lower),
            ("ids_upper", upper),
        ):
            rows.append(
                {
                    **echo,
                    "quantity": name,
                    "label": "",
                    "n1": "",
                    "n2": "",
                    "n3": "",
                    "eta": eta,
                    "value": value,
                    "error_budget": 0.0,
                }
            )
    return rows


def cmd_gc(cfg: dict, volume: float | None = None) -> list[dict]:
    geom = _geometry(cfg, volume)
    beta = float(cfg["beta"])
    rho = float(cfg["rho"])
    echo = _echo(cfg, geom)
    echo["volume"] = geom.volume
    rc = critical_density(beta)
    table = _spectrum_table(cfg, geom)
    sol = solve_mu(
        table,
        rho,
        beta,
        tol=float(cfg["solver"]["tol"]),
        max_iter=int(cfg["solver"]["max_iter"]),
    )
    mode = tuple(int(v) for v in cfg["mode"])
    rows = [
        {**echo, "quantity": "rho_c", "lam": "", "value": rc.value,
         "error_budget": rc.quadrature_error},
        {**echo, "quantity": "mu", "lam": "", "value": sol.mu,
         "error_budget": sol.residual},
        {**echo, "quantity": "mu_bar", "lam": "", "value": sol.mu_bar,
         "error_budget": sol.residual},
        {**echo, "quantity": "density_residual", "lam": "", "value": sol.residual,
         "error_budget": sol.tail_bound},
        {**echo, "quantity": "mode_occupation", "lam": "",
         "value": mean_occupation(table, sol.mu, mode, beta),
         "error_budget": sol.tail_bound},
    ]
    if rho <= rc.value:
        rows.append(
            {**echo, "quantity": "mu_bar_limit", "lam": "",
             "value": limiting_mu_bar(rho, beta),
             "error_budget": rc.quadrature_error}
        )
    else:
        regime = classify(geom)
        if regime.condensation == "II":
            ladder = solve_ladder_coefficient(rho, rc.value, beta=beta)
            rows.append(
                {**echo, "quantity": "ladder_coefficient", "lam": "",
                 "value": ladder.value, "error_budget": ladder.residual}
            )
        rows.append(
            {**echo, "quantity": "condensate_limit", "lam": "",
             "value": gc_occupation_limit(regime, rho, mode, beta),
             "error_budget": rc.quadrature_error}
        )
        for lam in cfg["lambda_grid"]:
            rows.append(
                {**echo, "quantity": "laplace_limit", "lam": float(lam),
                 "value": gc_laplace_limit(regime, rho, mode, float(lam), beta),
                 "error_budget": rc.quadrature_error}
            )
    return rows


def cmd_canonical(cfg: dict, volume: float | None = None) -> list[dict]:
    geom = _geometry(cfg, volume)
    beta = float(cfg["beta"])
    echo = _echo(cfg, geom)
    n = _particle_number(cfg, geom.volume)
    table = _spectrum_table(cfg, geom)
    ct = build_canonical(table, beta, n)
    mode = tuple(int(v) for v in cfg["mode"])
    roundoff = 4e-16 * n
    rows = [
        {**echo, "quantity": "particle_number", "lam": "", "value": float(n),
         "error_budget": 0.0},
        {**echo, "quantity": "occupation_mean", "lam": "",
         "value": occupation_moment(ct, mode, n, 1), "error_budget": roundoff},
        {**echo, "quantity": "occupation_second_moment", "lam": "",
         "value": occupation_moment(ct, mode, n, 2), "error_budget": roundoff},
        {**echo, "quantity": "occupation_density", "lam": "",
         "value": occupation_moment(ct, mode, n, 1) / geom.volume,
         "error_budget": roundoff},
        {**echo, "quantity": "condensate_share", "lam": "",
         "value": generalized_condensate(ct, n, 0.05),
         "error_budget": roundoff},
    ]
    for lam in cfg["lambda_grid"]:
        rows.append(
            {**echo, "quantity": "occupation_laplace", "lam": float(lam),
             "value": occupation_laplace(ct, mode, n, float(lam)),
             "error_budget": roundoff}
        )
    return rows


def cmd_kac(cfg: dict, volume: float | None = None) -> list[dict]:
    geom = _geometry(cfg, volume)
    beta = float(cfg["beta"])
    rho = float(cfg["rho"])
    echo = _echo(cfg, geom)
    table = _spectrum_table(cfg, geom)
    sol = solve_mu(table, rho, beta, tol=float(cfg["solver"]["tol"]))
    rc = critical_density(beta).value
    n_max = _mixture_n_max(cfg, rho, rc, geom.volume)
    ct = build_canonical(table, beta, n_max)
    kw = kac_weights(ct, sol.mu)
    mass = float(kw.weights.sum())
    mode = tuple(int(v) for v in cfg["mode"])
    rows = [
        {**echo, "quantity": "weight_mass", "lam": "", "lhs": "", "rhs": "",
         "value": mass, "error_budget": kw.tail_bound},
        {**echo, "quantity": "weight_cutoff", "lam": "", "lhs": "", "rhs": "",
         "value": float(kw.n_cut), "error_budget": kw.tail_bound},
    ]
    regime = classify(geom)
    for lam in cfg["lambda_grid"]:
        lam = float(lam)
        lhs, rhs, budget = decomposition_check(ct, sol.mu, mode, lam)
        rows.append(
            {**echo, "quantity": "decomposition", "lam": lam, "lhs": lhs,
             "rhs": rhs, "value": abs(lhs - rhs), "error_budget": 1e-10 + budget}
        )
        rows.append(
            {**echo, "quantity": "limit_transform", "lam": lam, "lhs": "",
             "rhs": "", "value": limiting_kac_transform(regime, rho, lam, beta),
             "error_budget": kw.tail_bound}
        )
    return rows


def _mixture_n_max(cfg: dict, rho: float, rho_c: float, volume: float) -> int:
    excess = max(rho - rho_c, 0.0)
    base = volume * (min(rho, rho_c) + 35.0 * excess)
    n_max = int(math.ceil(base + 25.0 * math.sqrt(rho * volume) + 300.0))
    cap = int(cfg["cutoffs"]["n_max"])
    if n_max > cap:
        if not cfg["cutoffs"]["allow_large_n"]:
            raise ConfigError(
                f"mixture weights need n_max about {n_max}, above cutoffs.n_max="
                f"{cap}; raise it (and allow_large_n beyond the budget)"
            )
    return min(n_max, cap) if not cfg["cutoffs"]["allow_large_n"] else n_max


def cmd_limits(cfg: dict, volume: float | None = None) -> list[dict]:
    geom = _geometry(cfg, volume)
    beta = float(cfg["beta"])
    rho = float(cfg["rho"])
    echo = _echo(cfg, geom)
    regime = classify(geom)
    rc = critical_density(beta).value
    rows = []
    if rho <= rc:
        rows.append(
            {**echo, "quantity": "mu_bar_limit", "n": "", "lam": "",
             "canonical_value": "", "grand_value": limiting_mu_bar(rho, beta),
             "difference": "", "error_budget": 0.0}
        )
        return rows
    mode = tuple(int(v) for v in cfg["mode"])
    if regime.condensation == "I":
        rows.append(
            {**echo, "quantity": "condensate", "n": 1, "lam": "",
             "canonical_value": canonical_limit_typeI(mode, 0.0, rho, rc, quantity="mean"),
             "grand_value": gc_occupation_limit(regime, rho, mode, beta),
             "difference": 0.0, "error_budget": 0.0}
        )
        for lam in cfg["lambda_grid"]:
            lam = float(lam)
            ce = canonical_limit_typeI(mode, lam, rho, rc)
            gc = gc_laplace_limit(regime, rho, mode, lam, beta)
            rows.append(
                {**echo, "quantity": "laplace", "n": mode[0], "lam": lam,
                 "canonical_value": ce, "grand_value": gc,
                 "difference": abs(ce - gc), "error_budget": 0.0}
            )
        return rows
    if regime.condensation == "III":
        for lam in cfg["lambda_grid"]:
            lam = float(lam)
            ce = canonical_laplace_typeIII(mode, lam, rho, rc, beta)
            gc = gc_laplace_limit(regime, rho, mode, lam, beta)
            rows.append(
                {**echo, "quantity": "laplace_scaled", "n": mode[0], "lam": lam,
                 "canonical_value": ce, "grand_value": gc,
                 "difference": abs(ce - gc), "error_budget": 0.0}
            )
        rows.append(
            {**echo, "quantity": "scaled_mean", "n": mode[0], "lam": "",
             "canonical_value": 2.0 * (rho - rc) ** 2,
             "grand_value": gc_occupation_limit(regime, rho, mode, beta),
             "difference": 0.0, "error_budget": 0.0}
        )
        return rows
    # critical ladder: canonical and grand-canonical side by side
    ladder = solve_ladder_coefficient(rho, rc, beta=beta)
    count = int(cfg["ladder_count"])
    for n in range(1, count + 1):
        coeffs = gap_coefficients(n, int(cfg["cutoffs"]["series_M"]), beta)
        ce = occupation_limit_typeII(n, rho, rc, coeffs)
        gc = 1.0 / (0.5 * math.pi**2 * (n * n - 1.0) + 1.0 / ladder.value)
        rows.append(
            {**echo, "quantity": "ladder_occupation", "n": n, "lam": "",
             "canonical_value": ce, "grand_value": gc,
             "difference": abs(ce - gc), "error_budget": ladder.residual}
        )
    coeffs = gap_coefficients(mode[0], int(cfg["cutoffs"]["series_M"]), beta)
    for lam in cfg["lambda_grid"]:
        lam = float(lam)
        ce = canonical_laplace_typeII(mode[0], lam, rho, rc, coeffs)
        gc = gc_laplace_limit(regime, rho, mode, lam, beta)
        rows.append(
            {**echo, "quantity": "laplace", "n": mode[0], "lam": lam,
             "canonical_value": ce, "grand_value": gc,
             "difference": abs(ce - gc), "error_budget": ladder.residual}
        )
    return rows


def cmd_fluct(cfg: dict, volume: float | None = None) -> list[dict]:
    geom = _geometry(cfg, volume)
    beta = float(cfg["beta"])
    rho = float(cfg["rho"])
    echo = _echo(cfg, geom)
    case = fluctuation_case(geom)
    if case.gamma <= 0.0:
        raise ConfigError(
            "fluct rows need the fast-gap regime (largest alpha below 1/2), "
            f"got alphas {geom.alpha!r}"
        )
    weights = {"distinct": (1.0, 0.0, 0.0), "two_equal": (2.0, 1.0, 0.0),
               "isotropic": (3.0, 3.0, 1.0)}[case.label]
    rows = []
    for lam in cfg["lambda_grid"]:
        lam = float(lam)
        budget = sum(
            w * g_tail_bound(d, lam, beta) for d, w in zip((1, 2, 3), weights)
        )
        for d in (1, 2, 3):
            rows.append(
                {**echo, "quantity": f"g{d}", "lam": lam,
                 "value": g_function(d, lam, beta),
                 "limit": "", "gap": "", "error_budget": g_tail_bound(d, lam, beta)}
            )
        rows.append(
            {**echo, "quantity": "law", "lam": lam,
             "value": fluctuation_law(case, lam, beta),
             "limit": "", "gap": "", "error_budget": budget}
        )
    sweep = cfg["geometry"]["volume_sweep"]
    if sweep:
        tables = []
        for v in sweep:
            g_v = _geometry(cfg, float(v))
            n = _particle_number(cfg, g_v.volume)
            table = _spectrum_table(cfg, g_v)
            tables.append(build_canonical(table, beta, n))
        for lam in cfg["lambda_grid"]:
            for row in fluctuation_convergence_check(tables, rho, float(lam), case):
                rows.append(
                    {**echo, "volume": row.volume, "quantity": "convergence",
                     "lam": float(lam), "value": row.value, "limit": row.limit,
                     "gap": row.gap, "error_budget": abs(row.centered_mean)}
                )
    return rows


_SWEEPABLE = {
    "gc": cmd_gc,
    "canonical": cmd_canonical,
    "kac": cmd_kac,
    "limits": cmd_limits,
    "fluct": cmd_fluct,
}


def cmd_sweep(cfg: dict) -> list[dict]:
    sweep = cfg["geometry"]["volume_sweep"]
    if not sweep:
        raise ConfigError("sweep needs geometry.volume_sweep, a list of volumes")
    target = cfg["sweep_target"]
    if target not in _SWEEPABLE:
        raise ConfigError(
            f"sweep_target must be one of {sorted(_SWEEPABLE)}, got {target!r}"
        )
    rows = []
    for v in sweep:
        rows.extend(_SWEEPABLE[target](cfg, float(v)))
    return rows


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.16e}"
    if value is None:
        return ""
    return str(value)


def render_csv(rows: list[dict]) -> str:
    if not rows:
        return "\n"
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format_cell(row.get(col, "")) for col in header))
    return "\n".join(lines) + "\n"


def render_json(rows: list[dict]) -> str:
    return json.dumps(rows, indent=2) + "\n"


def write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bosebox-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


COMMANDS = {
    "spectrum": cmd_spectrum,
    "gc": cmd_gc,
    "canonical": cmd_canonical,
    "kac": cmd_kac,
    "limits": cmd_limits,
    "fluct": cmd_fluct,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosebox",
        description="Finite-volume Bose gas numerics in anisotropic boxes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} computation")
        p.add_argument("--config", default=None, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument(
            "--format", default=None, choices=("csv", "json"), help="output format"
        )
        p.add_argument(
            "--override",
            action="append",
            default=None,
            metavar="KEY=VALUE",
            help="override a config entry by dotted path (repeatable)",
        )
        if name == "spectrum":
            p.add_argument(
                "--emax", type=float, default=None, help="energy cutoff override"
            )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.override)
        if getattr(args, "emax", None) is not None:
            cfg["cutoffs"]["e_max"] = float(args.emax)
        if args.format is not None:
            cfg["output"]["format"] = args.format
        if args.out is not None:
            cfg["output"]["path"] = args.out
        _validate(cfg)
        rows = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    text = render_csv(rows) if cfg["output"]["format"] == "csv" else render_json(rows)
    try:
        write_output(text, cfg["output"]["path"])
    except BrokenPipeError:
        # The stdout reader went away (e.g. piped into head). Point the
        # descriptor at devnull so the interpreter's exit flush stays quiet.
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
