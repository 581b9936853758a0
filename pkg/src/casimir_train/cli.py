"""Command-line front end producing CSV or JSON datasets.

Every command emits a table (``columns`` plus ``rows``) and a ``meta``
mapping.  Parameter values are resolved as command-line flag, then the
``--config`` JSON file, then the built-in default.

Exit status is 0 on success, 2 for invalid configuration (the message names
the key) and 3 for numerical failures (the error text is printed verbatim).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .barrier_lab import (
    CavityGeometry,
    IntegratorPolicy,
    SquarePulse,
    direct_evolution,
    eigenfrequency,
    loads_profile,
    profile_barriers,
    segment_from_dict,
    synthesize_barrier,
)
from .ensemble import (
    ExperimentSpec,
    JitterSpec,
    alternating_cutoff,
    critical_chi,
    ensemble_average,
    landauer_regime_scan,
)
from .errors import CasimirError, ConfigurationError, NoCrossing, NumericalFailure
from .periodic import (
    AlternatingSpec,
    PulseSchedule,
    chebyshev_power,
    critical_detuning,
    photons_alternating,
    photons_detuned,
    photons_resonant,
)
from .scattering import CanonicalBarrier, canonicalize, compose_train, photon_number

OUTPUT_DIR_ENV = "CASIMIR_TRAIN_OUTPUT_DIR"
STDOUT = "-"
_HELP = {
    "eigenfreq": "eigenfrequency of a rectangular cavity mode",
    "synthesize": "barrier coefficients of one pulse from direct integration",
    "oracle": "direct integration of a pulse profile against transfer composition",
    "periodic": "closed-form photon number of a periodic train",
    "detune": "detuned trains and their growth threshold",
    "alternating": "alternating jitter phases against the closed form",
    "ensemble": "jitter ensemble mean and spread",
    "critical-chi": "jitter amplitude where the mean enters the target band",
    "landauer": "log mean photon number in the dephased regime",
    "figure": "preset sweeps for the figure datasets",
}

COMMANDS = ("eigenfreq", "synthesize", "oracle", "periodic", "detune", "alternating",
            "ensemble", "critical-chi", "landauer", "figure")
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")


# ----------------------------------------------------------------------------
# tables


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def _clean(v):
    """JSON-safe scalar: numpy scalars unwrapped, non-finite floats to None."""
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _clean_meta(obj):
    if isinstance(obj, dict):
        return {str(k): _clean_meta(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean_meta(v) for v in obj]
    return _clean(obj)


def _csv_cell(v) -> str:
    v = _clean(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def to_json(table: Table) -> str:
    doc = {
        "columns": list(table.columns),
        "rows": [[_clean(v) for v in row] for row in table.rows],
        "meta": _clean_meta(table.meta),
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


# ----------------------------------------------------------------------------
# parameters


def _floats(text) -> tuple:
    """Comma-separated floats; config files may also give a JSON list."""
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    return tuple(float(x) for x in str(text).split(",") if x.strip())


# command -> {key: (type, default, help)}
_P = {
    "eigenfreq": {
        "lx": (float, 1.0, "cavity length along x"),
        "ly": (float, 1.0, "cavity length along y"),
        "lz": (float, 1.0, "cavity length along z"),
        "nx": (int, 1, "mode index along x"),
        "ny": (int, 1, "mode index along y"),
        "nz": (int, 1, "mode index along z"),
        "c": (float, 1.0, "wave speed"),
    },
    "synthesize": {
        "pulse": (str, None, "JSON file holding one pulse segment; overrides the square-pulse flags"),
        "omega_inner": (float, 1.2, "square pulse: frequency inside the pulse"),
        "duration": (float, 1.0, "square pulse: duration"),
        "base_omega": (float, 1.0, "square pulse: surrounding frequency"),
        "rtol": (float, 1e-10, "integrator relative tolerance"),
        "atol": (float, 1e-12, "integrator absolute tolerance"),
    },
    "oracle": {
        "profile": (str, None, "JSON file holding a frequency profile (required)"),
        "rtol": (float, 1e-10, "integrator relative tolerance"),
        "atol": (float, 1e-12, "integrator absolute tolerance"),
    },
    "periodic": {
        "g": (float, 0.01, "barrier coupling |g|"),
        "n": (int, 500, "number of pulses"),
        "theta": (float, 0.0, "phase between consecutive pulses"),
        "phi": (float, 0.0, "barrier transmission phase arg f"),
    },
    "detune": {
        "g": (float, 0.01, "barrier coupling |g|"),
        "n": (int, 500, "number of pulses"),
        "delta_theta": (_floats, (0.0, 0.005, 0.01, 0.015), "comma-separated detunings"),
    },
    "alternating": {
        "g": (float, 0.01, "barrier coupling |g|"),
        "n": (int, 500, "number of pulses"),
        "delta_theta": (_floats, (0.0,), "comma-separated detunings"),
        "chi": (_floats, (0.1, 0.2, 0.4), "comma-separated jump amplitudes"),
    },
}

_STOCHASTIC = {
    "seed": (int, 0, "master seed of the random streams"),
    "realizations": (int, 700, "number of realizations"),
    "convention": (str, "theta", "phase convention: theta or psi"),
    "workers": (int, 1, "worker threads (results do not depend on it)"),
}

_P["ensemble"] = {
    "g": (float, 0.01, "barrier coupling |g|"),
    "n": (int, 500, "number of pulses"),
    "delta_theta": (float, 0.0, "systematic detuning per pulse"),
    "chi": (_floats, (0.0, 0.1, 0.2, 0.3, 0.4, 0.5), "comma-separated jitter amplitudes"),
    "n_thermal": (float, 0.0, "initial thermal occupation"),
    **_STOCHASTIC,
}
_P["critical-chi"] = {
    "g": (float, 0.01, "barrier coupling |g|"),
    "n": (int, 500, "number of pulses"),
    "delta_theta": (_floats, (0.0,), "comma-separated detunings"),
    "band_lo": (float, 9.0, "lower edge of the target photon band"),
    "band_hi": (float, 10.0, "upper edge of the target photon band"),
    **_STOCHASTIC,
}
_P["landauer"] = {
    "g": (float, 0.05, "barrier coupling |g|"),
    "n_max": (int, 3000, "largest number of pulses"),
    "chi_over_pi": (_floats, (20.0, 1.5), "comma-separated jitter amplitudes in units of pi"),
    "record_every": (int, None, "spacing of the n grid (default n_max // 100)"),
    **_STOCHASTIC,
}
_P["landauer"]["realizations"] = (int, 20, "number of realizations")
_P["landauer"]["convention"] = (str, "psi", "phase convention: theta or psi")
_P["figure"] = {
    "seed": (int, 0, "master seed of the random streams"),
    "realizations": (int, None, "override the preset's realization count"),
    "convention": (str, "psi", "phase convention: theta or psi"),
    "workers": (int, 1, "worker threads (results do not depend on it)"),
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved invocation."""

    command: str
    parameters: dict
    output: str = STDOUT
    format: str = "csv"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigurationError("command", f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigurationError("format", "must be csv or json")


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casimir-train",
        description="Photon creation by trains of frequency pulses: analytic and Monte-Carlo datasets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in COMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        if name == "figure":
            p.add_argument("name", choices=FIGURES, help="figure preset")
        for key, (_, default, text) in _P[name].items():
            shown = default if not isinstance(default, tuple) else ",".join(map(str, default))
            p.add_argument(_flag(key), dest=key, type=str, default=None,
                           help=f"{text} (default: {shown})")
        p.add_argument("--config", default=None, help="JSON file with flat key-value parameters")
        p.add_argument("--out", default=None,
                       help=f"output path or '-' for stdout (default: ${OUTPUT_DIR_ENV}/<command>.<format> if set, else stdout)")
        p.add_argument("--format", default=None, choices=("csv", "json"), help="output format (default: csv)")
    return parser


def _convert(key: str, conv: Callable, value) -> Any:
    if value is None:
        return None
    try:
        if conv is int and isinstance(value, str):
            return int(value, 10)
        if conv is int and isinstance(value, float) and not value.is_integer():
            raise ValueError(value)
        return conv(value)
    except (TypeError, ValueError):
        raise ConfigurationError(key, f"cannot interpret {value!r}") from None


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError("config", f"invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigurationError("config", "must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge flags, config file and defaults into a :class:`RunConfig`."""
    command = args.command
    schema = _P[command]
    cfg = _load_config(args.config)
    io_keys = {"out", "format"}
    if command == "figure":
        io_keys.add("name")
    unknown = set(cfg) - set(schema) - io_keys
    if unknown:
        raise ConfigurationError(sorted(unknown)[0], f"not a parameter of {command!r}")
    params = {}
    for key, (conv, default, _) in schema.items():
        raw = getattr(args, key)
        if raw is None:
            raw = cfg.get(key, default)
        params[key] = _convert(key, conv, raw)
    if command == "figure":
        params["name"] = args.name
    fmt = args.format or cfg.get("format") or "csv"
    out = args.out or cfg.get("out")
    if out is None:
        base = os.environ.get(OUTPUT_DIR_ENV)
        if base:
            stem = command if command != "figure" else args.name
            out = str(Path(base) / f"{stem}.{fmt}")
        else:
            out = STDOUT
    return RunConfig(command, params, out, fmt)


# ----------------------------------------------------------------------------
# commands


def _positive(params, *keys):
    for k in keys:
        v = params[k]
        if v is not None and not v > 0:
            raise ConfigurationError(k, "must be positive")


def _non_negative(params, *keys):
    for k in keys:
        v = params[k]
        if v is not None and not v >= 0:
            raise ConfigurationError(k, "must be non-negative")


def _integrator(p) -> IntegratorPolicy:
    return IntegratorPolicy(rtol=p["rtol"], atol=p["atol"])


def _read_json_file(key: str, path: str | None):
    if path is None:
        raise ConfigurationError(key, "required")
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(key, f"cannot read {path}: {exc.strerror}") from None


def _cmd_eigenfreq(p) -> Table:
    geom = CavityGeometry(p["lx"], p["ly"], p["lz"], p["nx"], p["ny"], p["nz"], p["c"])
    return Table(["lx", "ly", "lz", "nx", "ny", "nz", "omega"],
                 [[geom.lx, geom.ly, geom.lz, geom.nx, geom.ny, geom.nz, eigenfrequency(geom)]])


def _cmd_synthesize(p) -> Table:
    if p["pulse"] is not None:
        try:
            doc = json.loads(_read_json_file("pulse", p["pulse"]))
        except json.JSONDecodeError as exc:
            raise ConfigurationError("pulse", f"invalid JSON: {exc.msg}") from None
        if not isinstance(doc, dict):
            raise ConfigurationError("pulse", "must be a JSON object")
        pulse = segment_from_dict(doc)
    else:
        _positive(p, "omega_inner", "duration", "base_omega")
        pulse = SquarePulse(p["omega_inner"], p["duration"], p["base_omega"])
    if pulse.kind == "const":
        raise ConfigurationError("pulse", "a constant segment is not a pulse")
    b = synthesize_barrier(pulse, _integrator(p))
    c = canonicalize(b)
    cols = ["r_minus_re", "r_minus_im", "r_plus_re", "r_plus_im", "t_re", "t_im",
            "reflectance", "g_abs", "phi", "max_residual"]
    row = [b.r_minus.real, b.r_minus.imag, b.r_plus.real, b.r_plus.imag, b.t.real, b.t.imag,
           abs(b.r_minus) ** 2, abs(c.g), c.phi, b.max_residual()]
    return Table(cols, [row], {"pulse": pulse.kind, "duration": b.duration, "omega": b.omega})


def _cmd_oracle(p) -> Table:
    profile = loads_profile(_read_json_file("profile", p["profile"]))
    policy = _integrator(p)
    barriers, thetas = profile_barriers(profile, policy)
    composed = photon_number(compose_train(barriers, thetas)) if barriers else 0.0
    direct = direct_evolution(profile, policy)
    n_direct = abs(direct.eta) ** 2
    rel = abs(composed - n_direct) / max(n_direct, 1e-300)
    return Table(["pulses", "composed_photons", "direct_photons", "relative_difference", "direct_defect"],
                 [[len(barriers), composed, n_direct, rel, direct.defect()]])


def _cmd_periodic(p) -> Table:
    _non_negative(p, "g", "n")
    barrier = CanonicalBarrier.from_coupling(p["g"], p["phi"])
    state = chebyshev_power(barrier, p["theta"], p["n"])
    resonant = math.isclose(math.remainder(p["theta"] - p["phi"], math.pi), 0.0, abs_tol=1e-15)
    formula = photons_resonant(p["n"], barrier.r_abs) if resonant else None
    return Table(["g", "n", "theta", "photons", "photons_resonant_formula", "defect"],
                 [[p["g"], p["n"], p["theta"], photon_number(state), formula, state.defect()]])


def _cmd_detune(p) -> Table:
    _non_negative(p, "g", "n")
    barrier = CanonicalBarrier.from_coupling(p["g"])
    rows = []
    for dth in p["delta_theta"]:
        exact = photon_number(chebyshev_power(barrier, dth, p["n"]))
        rows.append([dth, exact, photons_detuned(p["n"], p["g"], dth), abs(dth) < critical_detuning(p["g"])])
    return Table(["delta_theta", "photons", "photons_formula", "grows"], rows,
                 {"g": p["g"], "n": p["n"], "critical_detuning": critical_detuning(p["g"])})


def _cmd_alternating(p) -> Table:
    _non_negative(p, "g", "n")
    barrier = CanonicalBarrier.from_coupling(p["g"])
    rows = []
    for dth in p["delta_theta"]:
        for chi in p["chi"]:
            spec = AlternatingSpec(chi, PulseSchedule(dth, p["n"]))
            exact = photon_number(compose_train(barrier, spec.phases()))
            approx = photons_alternating(p["n"], p["g"], dth, chi)
            rel = abs(approx - exact) / exact if exact > 0 else None
            rows.append([dth, chi, exact, approx, rel])
    return Table(["delta_theta", "chi", "photons", "photons_formula", "relative_error"], rows,
                 {"g": p["g"], "n": p["n"]})


def _spec(p, n, **kw) -> ExperimentSpec:
    _positive(p, "realizations", "workers")
    return ExperimentSpec(n_pulses=n, g=p["g"], realizations=p["realizations"],
                          convention=p["convention"], jitter=JitterSpec(0.0, p["seed"]), **kw)


_ENSEMBLE_COLUMNS = ["delta_theta", "chi", "mean_photons", "std_photons", "relative_std",
                     "log_mean_photons", "mean_chi_bar"]


def _ensemble_rows(spec: ExperimentSpec, pairs, workers: int):
    rows = []
    for dth, chi in pairs:
        r = ensemble_average(spec.with_(delta_theta=dth, chi=chi), workers, keep_per_realization=False)
        rows.append([dth, chi, r.mean_photons, r.std_photons, r.relative_std,
                     r.log_mean_photons, r.mean_chi_bar])
    return rows


def _stochastic_meta(spec: ExperimentSpec) -> dict:
    return {"seed": spec.jitter.master_seed, "realizations": spec.realizations,
            "n_pulses": spec.n_pulses, "g": spec.g, "convention": spec.convention}


def _cmd_ensemble(p) -> Table:
    spec = _spec(p, p["n"], n_thermal=p["n_thermal"])
    rows = _ensemble_rows(spec, [(p["delta_theta"], chi) for chi in p["chi"]], p["workers"])
    return Table(_ENSEMBLE_COLUMNS, rows, {**_stochastic_meta(spec), "n_thermal": spec.n_thermal})


def _critical_rows(spec: ExperimentSpec, deltas, band, workers: int):
    rows, notes = [], {}
    for dth in deltas:
        try:
            chi_c = critical_chi(dth, spec, band, workers=workers)
        except NoCrossing as exc:
            chi_c = None
            notes[repr(dth)] = str(exc)
        rows.append([dth, chi_c, alternating_cutoff(spec.g, dth, spec.convention)])
    return rows, notes


def _cmd_critical_chi(p) -> Table:
    spec = _spec(p, p["n"])
    rows, notes = _critical_rows(spec, p["delta_theta"], (p["band_lo"], p["band_hi"]), p["workers"])
    meta = {**_stochastic_meta(spec), "band": [p["band_lo"], p["band_hi"]], "no_crossing": notes}
    return Table(["delta_theta", "critical_chi", "alternating_cutoff"], rows, meta)


def _landauer_table(scan, chis_over_pi) -> Table:
    rows = []
    for m in chis_over_pi:
        chi = m * math.pi
        for n, v, ref in zip(scan.n_grid, scan.log_mean[chi], scan.reference):
            rows.append([m, chi, n, v, ref])
    meta = {**scan.metadata, "g": scan.g, "r_sq": scan.r_sq, "reference_slope": scan.reference_slope,
            "slopes": {repr(m): scan.slopes[m * math.pi] for m in chis_over_pi}}
    return Table(["chi_over_pi", "chi", "n", "ln_mean_photons", "ln_landauer"], rows, meta)


def _cmd_landauer(p) -> Table:
    _positive(p, "g", "n_max", "realizations", "workers", "record_every")
    ms = p["chi_over_pi"]
    scan = landauer_regime_scan([m * math.pi for m in ms], p["n_max"], p["g"], p["realizations"],
                                p["seed"], p["record_every"], p["convention"], p["workers"])
    return _landauer_table(scan, ms)


# figure presets: g = 0.01, n = 500 and 700 realizations for figs 2 to 5,
# 20 realizations for fig 6; the grids themselves are chosen here
FIG_G = 0.01
FIG_N = 500
FIG_CHI = tuple(round(0.05 * i, 2) for i in range(21))
FIG_THETA_FIXED = (0.0, 0.005, 0.01)
FIG_THETA_SWEEP = tuple(round(0.001 * i, 3) for i in range(21))
FIG_CHI_FIXED = (0.0, 0.2, 0.4, 0.6)
FIG5_THETA = tuple(round(0.001 * i, 3) for i in range(16))
FIG6_CHI_OVER_PI = (1.5, 2.5, 10.0, 20.0, 10.5)
FIG6_N_MAX = 50_000


def _cmd_figure(p) -> Table:
    name = p["name"]
    _positive(p, "workers", "realizations")
    default_r = 20 if name == "fig6" else 700
    R = p["realizations"] or default_r
    template = ExperimentSpec(n_pulses=FIG_N, g=FIG_G, realizations=R, convention=p["convention"],
                              jitter=JitterSpec(0.0, p["seed"]))
    meta = {"figure": name, **_stochastic_meta(template)}
    w = p["workers"]
    if name in ("fig2", "fig4"):
        pairs = [(dth, chi) for dth in FIG_THETA_FIXED for chi in FIG_CHI]
        rows = _ensemble_rows(template, pairs, w)
        if name == "fig4":
            rows = [[r[0], r[1], r[4], r[3]] for r in rows]
            return Table(["delta_theta", "chi", "relative_std", "std_photons"], rows, meta)
        return Table(["delta_theta", "chi", "mean_photons", "std_photons", "relative_std"],
                     [r[:5] for r in rows], meta)
    if name == "fig3":
        pairs = [(dth, chi) for chi in FIG_CHI_FIXED for dth in FIG_THETA_SWEEP]
        rows = _ensemble_rows(template, pairs, w)
        return Table(["chi", "delta_theta", "mean_photons", "std_photons"],
                     [[r[1], r[0], r[2], r[3]] for r in rows], meta)
    if name == "fig5":
        rows, notes = _critical_rows(template, FIG5_THETA, (9.0, 10.0), w)
        return Table(["delta_theta", "critical_chi", "alternating_cutoff"], rows,
                     {**meta, "band": [9.0, 10.0], "no_crossing": notes})
    scan = landauer_regime_scan([m * math.pi for m in FIG6_CHI_OVER_PI], FIG6_N_MAX, FIG_G, R,
                                p["seed"], None, p["convention"], w)
    table = _landauer_table(scan, FIG6_CHI_OVER_PI)
    table.meta.update(figure=name)
    return table


_DISPATCH = {
    "eigenfreq": _cmd_eigenfreq,
    "synthesize": _cmd_synthesize,
    "oracle": _cmd_oracle,
    "periodic": _cmd_periodic,
    "detune": _cmd_detune,
    "alternating": _cmd_alternating,
    "ensemble": _cmd_ensemble,
    "critical-chi": _cmd_critical_chi,
    "landauer": _cmd_landauer,
    "figure": _cmd_figure,
}


def execute(config: RunConfig) -> Table:
    """Compute the dataset of ``config`` without writing it."""
    table = _DISPATCH[config.command](config.parameters)
    table.meta = {"command": config.command, "version": __version__, **table.meta}
    return table


def render(table: Table, fmt: str) -> str:
    return to_csv(table) if fmt == "csv" else to_json(table)


def run(config: RunConfig) -> int:
    """Compute and emit the dataset; returns the exit status."""
    text = render(execute(config), config.format)
    if config.output == STDOUT:
        sys.stdout.write(text)
    else:
        path = Path(config.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(resolve(args))
    except ConfigurationError as exc:
        print(f"casimir-train: configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(str(exc), file=sys.stderr)
        return 3
    except (CasimirError, ValueError) as exc:
        print(f"casimir-train: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
