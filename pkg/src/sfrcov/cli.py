"""Command-line runner: config loading, sweeps, CSV/manifest output, comparison.

Subcommands::

    sfrcov analyze  --config PATH [--out PATH]
    sfrcov simulate --config PATH [--seed N] [--trials N] [--out PATH]
    sfrcov compare  --config PATH | --csv PATH
    sfrcov preset table1 [--out PATH]

Exit codes: 0 ok, 1 comparison failed, 2 config/validation error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import csv
import datetime as _dt
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import yaml

from . import __version__
from .analytic import CoverageQuery, Mode, NumericalError, Rules, average_coverage
from .channel import FadingParams, normalize
from .model import ConfigError, NetworkConfig, TierConfig, db_to_linear, validate
from .montecarlo import SimParams, estimate_sweep, estimates_from_trials, simulate_trials
from .quadrature import DEFAULT_HERMITE_ORDER, DEFAULT_LEGENDRE_ORDER, QuadratureError

__all__ = [
    "SweepSpec",
    "RunPlan",
    "load_config",
    "plan_from_document",
    "write_config",
    "run",
    "compare",
    "main",
    "CSV_HEADER",
    "TABLE1_DOCUMENT",
]

CSV_HEADER = ["mode", "engine", "sweep_var", "sweep_value", "tier", "p", "std_err", "trials", "seed"]
SWEEP_VARIABLES = ("t_cover_db", "phi", "epsilon_vector", "delta")
ENGINES = ("analytic", "simulate")

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

TABLE1_DOCUMENT = {
    "tiers": [
        {"lambda": 0.25, "power": 100.0, "alpha": 3.5, "delta": 3, "phi": 4.0,
         "epsilon": 0.1, "t_classify_db": 0.0, "t_cover_db": 0.0},
        {"lambda": 0.5, "power": 1.0, "alpha": 3.5, "delta": 3, "phi": 4.0,
         "epsilon": 0.2, "t_classify_db": 0.0, "t_cover_db": 0.0},
    ],
    "fading": {"sigma_z_db": 8.0, "mu_z_db": -7.3683},
    "sim": {"trials": 200000, "seed": 20160101, "workers": 1},
    "quadrature": {"hermite_order": DEFAULT_HERMITE_ORDER, "legendre_order": DEFAULT_LEGENDRE_ORDER},
    "sweep": {"variable": "t_cover_db", "values": [-10.0, -5.0, 0.0, 5.0, 10.0],
              "modes": ["CEU", "CCU", "RandomUser"], "engines": ["both"]},
}

_SCHEMA = {
    "tiers": None,
    "noise": {"snr_ref_db"},
    "fading": {"sigma_z_db", "mu_z_db"},
    "sim": {"trials", "region_radius", "seed", "workers"},
    "quadrature": {"hermite_order", "legendre_order"},
    "sweep": {"variable", "values", "modes", "engines"},
}
_TIER_KEYS = {"lambda", "power", "alpha", "delta", "phi", "epsilon", "t_classify_db", "t_cover_db"}


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    modes: tuple
    engines: tuple

    def apply(self, config: NetworkConfig, value) -> NetworkConfig:
        """Config with one sweep value applied to every tier."""
        if self.variable == "t_cover_db":
            return config.with_tiers(t_cover=db_to_linear(float(value)))
        if self.variable == "phi":
            return config.with_tiers(phi=_listify(value, float))
        if self.variable == "epsilon_vector":
            return config.with_tiers(epsilon=_listify(value, float))
        return config.with_tiers(delta=_listify(value, int))


def _listify(value, kind):
    if isinstance(value, (list, tuple)):
        return tuple(kind(v) for v in value)
    return kind(value)


@dataclass(frozen=True)
class RunPlan:
    """Fully resolved run: network, simulation, sweep and quadrature orders.

    ``document`` is the normalised config document the plan was built from;
    it round-trips through :func:`write_config`.
    """

    config: NetworkConfig
    sim: SimParams
    sweep: SweepSpec
    hermite_order: int
    legendre_order: int
    document: dict
    noise_defaulted: bool = False

    def __eq__(self, other):
        if not isinstance(other, RunPlan):
            return NotImplemented
        return self.document == other.document

    @property
    def rules(self) -> Rules:
        return Rules.of_order(self.hermite_order, self.legendre_order)


# ---------------------------------------------------------------------------
# config loading
# ---------------------------------------------------------------------------


def _check_keys(section: str, got: dict, allowed: set, errors: list):
    for key in got:
        if key not in allowed:
            errors.append(f"{section}.{key}: unknown key")


def _number(doc, key, where, errors, default=None, kind=float, required=False):
    if key not in doc or doc[key] is None:
        if required:
            errors.append(f"{where}.{key}: required")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        if kind is float and isinstance(v, str) and v.strip().lower() in ("inf", "+inf", ".inf"):
            return math.inf
        errors.append(f"{where}.{key}: expected a number, got {v!r}")
        return default
    if kind is int:
        if int(v) != v:
            errors.append(f"{where}.{key}: expected an integer, got {v!r}")
            return default
        return int(v)
    return float(v)


def plan_from_document(doc, overrides: Optional[dict] = None) -> RunPlan:
    """Validate a config document and resolve it into a :class:`RunPlan`.

    ``overrides`` may set ``seed``, ``trials``, ``hermite_order`` and
    ``legendre_order``; they are written into the stored document.
    Raises :class:`ConfigError` listing every problem found.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    doc = copy.deepcopy(doc)
    errors: list[str] = []
    _check_keys("<root>", doc, set(_SCHEMA), errors)
    for section, keys in _SCHEMA.items():
        if keys is None or section not in doc:
            continue
        if not isinstance(doc[section], dict):
            errors.append(f"{section}: expected a mapping")
            doc[section] = {}
        _check_keys(section, doc[section], keys, errors)

    overrides = overrides or {}
    sim_doc = doc.setdefault("sim", {})
    quad_doc = doc.setdefault("quadrature", {})
    for key in ("seed", "trials"):
        if overrides.get(key) is not None:
            sim_doc[key] = overrides[key]
    for key in ("hermite_order", "legendre_order"):
        if overrides.get(key) is not None:
            quad_doc[key] = overrides[key]

    tiers_doc = doc.get("tiers")
    tiers = []
    if not isinstance(tiers_doc, list) or not tiers_doc:
        errors.append("tiers: a non-empty list of tiers is required")
        tiers_doc = []
    for idx, t in enumerate(tiers_doc):
        where = f"tiers[{idx}]"
        if not isinstance(t, dict):
            errors.append(f"{where}: expected a mapping")
            continue
        _check_keys(where, t, _TIER_KEYS, errors)
        vals = {
            "density": _number(t, "lambda", where, errors, required=True),
            "power": _number(t, "power", where, errors, required=True),
            "alpha": _number(t, "alpha", where, errors, required=True),
            "delta": _number(t, "delta", where, errors, 1, int),
            "phi": _number(t, "phi", where, errors, 1.0),
            "epsilon": _number(t, "epsilon", where, errors, 1.0),
            "t_classify": _number(t, "t_classify_db", where, errors, 0.0),
            "t_cover": _number(t, "t_cover_db", where, errors, 0.0),
        }
        if any(v is None for v in vals.values()):
            continue
        vals["t_classify"] = db_to_linear(vals["t_classify"])
        vals["t_cover"] = db_to_linear(vals["t_cover"])
        tier = TierConfig(**vals)
        for v in tier.violations():
            name, _, msg = v.partition(":")
            key = {"density": "lambda", "t_classify": "t_classify_db", "t_cover": "t_cover_db"}.get(name, name)
            errors.append(f"{where}.{key}:{msg}")
        tiers.append(tier)

    noise_doc = doc.get("noise") or {}
    noise_defaulted = "snr_ref_db" not in noise_doc or noise_doc.get("snr_ref_db") is None
    snr = None if noise_defaulted else _number(noise_doc, "snr_ref_db", "noise", errors)
    if snr is not None and math.isinf(snr) and snr > 0:
        snr = None

    fading_doc = doc.get("fading") or {}
    sigma = _number(fading_doc, "sigma_z_db", "fading", errors, 0.0)
    mu = _number(fading_doc, "mu_z_db", "fading", errors)
    fading = None
    if sigma is not None and sigma < 0:
        errors.append("fading.sigma_z_db: must be non-negative")
    elif sigma is not None:
        fading = normalize(sigma) if mu is None else FadingParams(mu, sigma)

    trials = _number(sim_doc, "trials", "sim", errors, 10_000, int)
    radius = _number(sim_doc, "region_radius", "sim", errors)
    seed = _number(sim_doc, "seed", "sim", errors, 0, int)
    workers = _number(sim_doc, "workers", "sim", errors, 1, int)
    if trials is not None and trials < 100:
        errors.append("sim.trials: at least 100 trials are required")
    if radius is not None and not radius > 0:
        errors.append("sim.region_radius: must be positive")
    if workers is not None and workers < 1:
        errors.append("sim.workers: must be positive")

    n_h = _number(quad_doc, "hermite_order", "quadrature", errors, DEFAULT_HERMITE_ORDER, int)
    n_l = _number(quad_doc, "legendre_order", "quadrature", errors, DEFAULT_LEGENDRE_ORDER, int)
    if n_h is not None and not 2 <= n_h <= 64:
        errors.append("quadrature.hermite_order: must lie in [2, 64]")
    if n_l is not None and not 2 <= n_l <= 128:
        errors.append("quadrature.legendre_order: must lie in [2, 128]")

    sweep = _parse_sweep(doc.get("sweep"), errors)

    config = None
    if not errors:
        config = NetworkConfig(tuple(tiers), snr_ref_db=snr, fading=fading)
        errors.extend(validate(config, analytic=False))
        for value in sweep.values:
            try:
                swept = sweep.apply(config, value)
            except (ConfigError, TypeError, ValueError) as exc:
                errors.append(f"sweep.values: {value!r}: {exc}")
                continue
            errors.extend(f"sweep value {value!r}: {v}" for v in validate(swept, analytic=False)
                          if v not in validate(config, analytic=False))
    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))

    sim = SimParams(trials=trials, region_radius=radius, master_seed=seed, workers=workers)
    return RunPlan(config, sim, sweep, n_h, n_l, doc, noise_defaulted)


def _parse_sweep(sweep_doc, errors) -> SweepSpec:
    if not isinstance(sweep_doc, dict):
        sweep_doc = {}
    variable = sweep_doc.get("variable", "t_cover_db")
    if variable not in SWEEP_VARIABLES:
        errors.append(f"sweep.variable: must be one of {', '.join(SWEEP_VARIABLES)}, got {variable!r}")
    values = sweep_doc.get("values")
    if not isinstance(values, list) or not values:
        errors.append("sweep.values: a non-empty list is required")
        values = []
    modes = []
    for m in sweep_doc.get("modes", [m.value for m in Mode]):
        try:
            modes.append(Mode.parse(m))
        except ValueError:
            errors.append(f"sweep.modes: unknown mode {m!r}")
    if not modes:
        errors.append("sweep.modes: at least one mode is required")
    engines = set()
    for e in sweep_doc.get("engines", ["both"]):
        if e == "both":
            engines.update(ENGINES)
        elif e in ENGINES:
            engines.add(e)
        else:
            errors.append(f"sweep.engines: unknown engine {e!r}")
    modes = tuple(m for m in Mode if m in modes)
    return SweepSpec(variable, tuple(values), modes, tuple(e for e in ENGINES if e in engines))


def load_config(path, overrides: Optional[dict] = None) -> RunPlan:
    """Load a YAML/JSON config file, or the built-in preset ``table1``."""
    if str(path) == "table1":
        return plan_from_document(TABLE1_DOCUMENT, overrides)
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{path}: parse error at {where}: {exc.problem}") from exc
    return plan_from_document(doc, overrides)


def write_config(plan: RunPlan) -> str:
    """YAML text that loads back into an equal plan."""
    return yaml.safe_dump(plan.document, sort_keys=False)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (list, tuple)):
        return ";".join(_fmt(v) for v in x)
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.10g}"


def _rows(plan: RunPlan, engines) -> list[list[str]]:
    sweep = plan.sweep
    configs = [sweep.apply(plan.config, v) for v in sweep.values]
    rows = []
    rules = plan.rules if "analytic" in engines else None
    trials = None
    for mode in sweep.modes:
        for engine in ENGINES:
            if engine not in engines:
                continue
            if engine == "analytic":
                results = [(average_coverage(CoverageQuery(mode), cfg, rules), 0.0, 0, "") for cfg in configs]
            elif sweep.variable == "t_cover_db":
                # one pass serves every mode: each SINR has its own random stream
                if trials is None:
                    trials = simulate_trials(plan.config, plan.sim, sweep.modes)
                ths = [db_to_linear(float(v)) for v in sweep.values]
                ests = estimates_from_trials(plan.config, trials, mode, ths, plan.sim.master_seed)
                results = [(e.p_hat, e.std_error, e.trials, e.seed) for e in ests]
            else:
                results = []
                for cfg in configs:
                    e = estimate_sweep(cfg, plan.sim, mode, [None])[0]
                    results.append((e.p_hat, e.std_error, e.trials, e.seed))
            for value, (p, se, n, seed) in zip(sweep.values, results):
                if not math.isfinite(p):
                    raise NumericalError(f"{mode.value}/{engine} at {sweep.variable}={value!r} is {p}")
                rows.append([mode.value, engine, sweep.variable, _fmt(value), "all",
                             _fmt(p), _fmt(se), str(n), str(seed)])
    return rows


def manifest(plan: RunPlan, csv_path: Optional[str], engines) -> dict:
    return {
        "tool": "sfrcov",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": plan.document,
        "engines": list(engines),
        "quadrature": {"hermite_order": plan.hermite_order, "legendre_order": plan.legendre_order},
        "seed": plan.sim.master_seed,
        "trials": plan.sim.trials,
        "workers": plan.sim.workers,
        "region_radius": plan.sim.radius_for(plan.config),
        "far_field_correction": plan.sim.far_field,
        "noise": "interference-limited (default)" if plan.noise_defaulted else plan.config.snr_ref_db,
        "mu_z_db": plan.config.fading.mu_z,
        "csv": csv_path,
    }


def run(plan: RunPlan, out: Optional[str] = None, engines=None) -> str:
    """Evaluate the sweep and return the CSV text.

    When ``out`` is given the CSV and a ``<out>.manifest.json`` are written.
    """
    engines = tuple(e for e in ENGINES if e in (engines or plan.sweep.engines))
    if "analytic" in engines and not plan.config.equal_alpha:
        raise ConfigError("analytic evaluation requires equal alpha across tiers")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(_rows(plan, engines))
    text = buf.getvalue()
    if out:
        out_path = Path(out)
        out_path.write_text(text)
        Path(str(out_path) + ".manifest.json").write_text(
            json.dumps(manifest(plan, str(out_path), engines), indent=2) + "\n")
    return text


@dataclass(frozen=True)
class PairReport:
    mode: str
    sweep_var: str
    sweep_value: str
    tier: str
    analytic: float
    simulated: float
    std_err: float

    @property
    def diff(self) -> float:
        return abs(self.simulated - self.analytic)

    @property
    def z(self) -> float:
        return self.diff / self.std_err if self.std_err > 0 else math.inf if self.diff else 0.0

    @property
    def tolerance(self) -> float:
        return max(3.0 * self.std_err, 0.01)

    @property
    def ok(self) -> bool:
        return self.diff <= self.tolerance


def compare_rows(text: str) -> list[PairReport]:
    """Pair analytic and simulated rows; raises ConfigError on a missing pair."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header {reader.fieldnames}")
    groups: dict = {}
    for row in reader:
        key = (row["mode"], row["sweep_var"], row["sweep_value"], row["tier"])
        groups.setdefault(key, {})[row["engine"]] = row
    reports = []
    for key, pair in groups.items():
        if set(pair) != set(ENGINES):
            raise ConfigError(f"no analytic/simulate pair for {'/'.join(key)}")
        a, s = pair["analytic"], pair["simulate"]
        reports.append(PairReport(*key, float(a["p"]), float(s["p"]), float(s["std_err"])))
    if not reports:
        raise ConfigError("CSV holds no rows to compare")
    return reports


def compare(csv_path) -> tuple[int, str]:
    """Summarise analytic-vs-simulated agreement in a results CSV.

    Returns ``(exit_code, report_text)``; the code is 1 when any pair differs
    by more than ``max(3 SE, 0.01)`` and 2 when a pair is missing.
    """
    try:
        text = Path(csv_path).read_text()
    except OSError as exc:
        return EXIT_CONFIG, f"{csv_path}: {exc.strerror}\n"
    return compare_text(text)


def compare_text(text: str) -> tuple[int, str]:
    try:
        reports = compare_rows(text)
    except ConfigError as exc:
        return EXIT_CONFIG, f"{exc}\n"
    lines = [f"{'mode':<11}{'var':<15}{'value':>10}{'analytic':>11}{'simulated':>11}"
             f"{'|diff|':>9}{'diff/SE':>9}  status"]
    for r in reports:
        lines.append(f"{r.mode:<11}{r.sweep_var:<15}{r.sweep_value:>10}{r.analytic:>11.5f}"
                     f"{r.simulated:>11.5f}{r.diff:>9.5f}{r.z:>9.2f}  {'ok' if r.ok else 'FAIL'}")
    lines.append(f"max |diff| = {max(r.diff for r in reports):.5f}, "
                 f"max diff/SE = {max(r.z for r in reports):.2f}, "
                 f"{sum(not r.ok for r in reports)} of {len(reports)} pairs outside max(3 SE, 0.01)")
    return (EXIT_OK if all(r.ok for r in reports) else EXIT_MISMATCH), "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfrcov", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"sfrcov {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sim=True):
        p.add_argument("--config", help="config file (YAML/JSON) or the preset name 'table1'")
        p.add_argument("--out", help="CSV output path; a .manifest.json is written next to it")
        p.add_argument("--hermite-order", type=int)
        p.add_argument("--legendre-order", type=int)
        if sim:
            p.add_argument("--seed", type=int)
            p.add_argument("--trials", type=int)

    common(sub.add_parser("analyze", help="closed-form evaluation only"), sim=False)
    common(sub.add_parser("simulate", help="Monte Carlo only"))
    p = sub.add_parser("compare", help="run both engines and report agreement")
    common(p)
    p.add_argument("--csv", help="report on an existing results CSV instead of running")
    p = sub.add_parser("preset", help="print a built-in config document")
    p.add_argument("name", choices=["table1"])
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "preset":
        text = yaml.safe_dump(TABLE1_DOCUMENT, sort_keys=False)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if args.command == "compare" and args.csv:
        code, report = compare(args.csv)
        sys.stdout.write(report)
        return code
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    overrides = {
        "seed": getattr(args, "seed", None),
        "trials": getattr(args, "trials", None),
        "hermite_order": args.hermite_order,
        "legendre_order": args.legendre_order,
    }
    engines = {"analyze": ("analytic",), "simulate": ("simulate",), "compare": ENGINES}[args.command]
    try:
        plan = load_config(args.config, overrides)
        text = run(plan, args.out, engines)
    except (ConfigError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not args.out:
        sys.stdout.write(text)
    if args.command == "compare":
        code, report = compare_text(text)
        sys.stdout.write(report)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
