"""Command line interface: simulate, classify, validate, cdf.

Experiment configurations are strict JSON: unknown keys anywhere are
rejected with the offending path.  Exit codes: 0 success / all targets
pass, 1 statistical failure, 2 usage or configuration error, 3 resource
guard exhausted.  All outputs are deterministic functions of the config
and seeds; floats are written with 17 significant digits.
"""

import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__, asymptotics
from .process import Guards, ModelParams, ResourceLimitError
from .regimes import L_INFINITE, MissingLimitsError, ScalingFamily, classify
from .rng import GENERATOR_NAME
from .stats import (
    HypothesisViolationError,
    InvalidConfigError,
    NoLawError,
    ValidationConfig,
    run_replicates,
    run_validation,
    write_samples_csv,
)

EXIT_OK = 0
EXIT_STAT_FAIL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

OUTPUT_DIR_ENV = "TORUSMUT_OUTPUT_DIR"

_LAW_KINDS = ("exp1", "hypoexponential", "weibull_type")


def _fail(path, message):
    raise InvalidConfigError(f"config {path}: {message}")


def _check_keys(obj, path, required, optional=()):
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        _fail(path, f"unknown keys {unknown}")
    missing = sorted(set(required) - set(obj))
    if missing:
        _fail(path, f"missing required keys {missing}")


def _number(obj, path):
    if not isinstance(obj, (int, float)) or isinstance(obj, bool):
        _fail(path, f"expected a number, got {obj!r}")
    return float(obj)


def _integer(obj, path):
    if not isinstance(obj, int) or isinstance(obj, bool):
        _fail(path, f"expected an integer, got {obj!r}")
    return obj


def _rational(obj, path):
    if isinstance(obj, bool):
        _fail(path, f"expected a rational, got {obj!r}")
    try:
        if isinstance(obj, str):
            return Fraction(obj)
        if isinstance(obj, int):
            return Fraction(obj)
        if isinstance(obj, float):
            return Fraction(str(obj))
    except (ValueError, ZeroDivisionError):
        pass
    _fail(path, f"cannot parse {obj!r} as a rational (use \"p/q\")")


def _limit_value(obj, path):
    if obj == "inf":
        return math.inf
    return _number(obj, path)


def _parse_model(obj):
    _check_keys(obj, "model", required=("d", "L", "alpha", "mu"), optional=("K",))
    mu = obj["mu"]
    if not isinstance(mu, list) or not mu:
        _fail("model.mu", "expected a non-empty list of rates")
    try:
        return ModelParams(
            d=_integer(obj["d"], "model.d"),
            L=_number(obj["L"], "model.L"),
            alpha=_number(obj["alpha"], "model.alpha"),
            mu=[_number(m, f"model.mu[{i}]") for i, m in enumerate(mu)],
            K=_integer(obj["K"], "model.K") if "K" in obj else None,
        )
    except ValueError as exc:
        raise InvalidConfigError(f"config model: {exc}") from exc


def _parse_family(obj, params):
    _check_keys(obj, "family", required=("a", "b"), optional=("c",))
    if not isinstance(obj["a"], list):
        _fail("family.a", "expected a list of rationals")
    a = [_rational(x, f"family.a[{i}]") for i, x in enumerate(obj["a"])]
    b = _rational(obj["b"], "family.b")
    c = None
    if "c" in obj:
        if not isinstance(obj["c"], list):
            _fail("family.c", "expected a list of numbers or \"inf\"")
        c = [_limit_value(x, f"family.c[{i}]") for i, x in enumerate(obj["c"])]
    try:
        return ScalingFamily(d=params.d, k=params.K, a=a, b=b, c=c)
    except ValueError as exc:
        raise InvalidConfigError(f"config family: {exc}") from exc


def _parse_law(obj):
    _check_keys(obj, "law", required=("kind",),
                optional=("rates", "coefficient", "exponent"))
    kind = obj["kind"]
    if kind == "exp1":
        _check_keys(obj, "law", required=("kind",))
        return asymptotics.Exp1Law()
    if kind == "hypoexponential":
        _check_keys(obj, "law", required=("kind", "rates"))
        rates = [_limit_value(x, f"law.rates[{i}]") for i, x in enumerate(obj["rates"])]
        return asymptotics.HypoexponentialLaw(rates)
    if kind == "weibull_type":
        _check_keys(obj, "law", required=("kind", "coefficient", "exponent"))
        return asymptotics.WeibullTypeLaw(_number(obj["coefficient"], "law.coefficient"),
                                          _integer(obj["exponent"], "law.exponent"))
    _fail("law.kind", f"expected one of {_LAW_KINDS}, got {kind!r}")


def _parse_rescale(obj, params):
    _check_keys(obj, "rescale", required=("kind",), optional=("index", "value"))
    kind = obj["kind"]
    if kind == "n_mu1":
        return "beta_1", asymptotics.beta_k(params, 1)
    if kind == "beta":
        index = _integer(obj.get("index", params.K), "rescale.index")
        return f"beta_{index}", asymptotics.beta_k(params, index)
    if kind == "value":
        return "explicit", _number(obj["value"], "rescale.value")
    _fail("rescale.kind", f"expected n_mu1, beta or value, got {kind!r}")


def _parse_guards(obj):
    _check_keys(obj, "run.guards", required=(), optional=("max_events", "max_time"))
    kwargs = {}
    if "max_events" in obj:
        kwargs["max_events"] = _integer(obj["max_events"], "run.guards.max_events")
    if "max_time" in obj:
        kwargs["max_time"] = _number(obj["max_time"], "run.guards.max_time")
    return Guards(**kwargs)


def _parse_run(obj):
    _check_keys(obj, "run", required=("replicates", "master_seed"),
                optional=("guards", "workers", "ks_threshold"))
    return {
        "replicates": _integer(obj["replicates"], "run.replicates"),
        "master_seed": _integer(obj["master_seed"], "run.master_seed"),
        "guards": _parse_guards(obj.get("guards", {})),
        "workers": _integer(obj.get("workers", 1), "run.workers"),
        "ks_threshold": _number(obj.get("ks_threshold", 0.05), "run.ks_threshold"),
    }


_TARGET_SCHEMAS = {
    "sigma_k_law": {"required": (), "optional": ("ks_threshold",)},
    "sigma1_exact": {"required": (), "optional": ("ks_threshold",)},
    "distance_law": {"required": ("j", "k"), "optional": ("ks_threshold",)},
    "volume_diag": {"required": ("times",),
                    "optional": ("level", "replicates", "band", "mc_points")},
}


def _parse_targets(obj):
    if not isinstance(obj, list) or not obj:
        _fail("targets", "expected a non-empty list")
    targets = []
    for i, target in enumerate(obj):
        path = f"targets[{i}]"
        if not isinstance(target, dict) or "kind" not in target:
            _fail(path, "expected an object with a \"kind\" key")
        kind = target["kind"]
        schema = _TARGET_SCHEMAS.get(kind)
        if schema is None:
            _fail(f"{path}.kind", f"unknown target kind {kind!r}")
        _check_keys(target, path, required=("kind",) + schema["required"],
                    optional=schema["optional"])
        targets.append(target)
    return targets


def _parse_output(obj):
    _check_keys(obj, "output", required=(), optional=("dir", "formats"))
    formats = obj.get("formats", ["csv", "json"])
    if not isinstance(formats, list):
        _fail("output.formats", "expected a list")
    for fmt in formats:
        if fmt not in ("csv", "json", "events"):
            _fail("output.formats", f"unknown format {fmt!r}")
    return {"dir": obj.get("dir"), "formats": formats}


def load_config(path):
    """Parse and strictly validate an experiment configuration file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(
            f"config {path} is not valid JSON: line {exc.lineno}, "
            f"column {exc.colno}: {exc.msg}") from exc
    _check_keys(raw, "top level", required=("model", "run"),
                optional=("family", "law", "rescale", "targets", "output"))
    params = _parse_model(raw["model"])
    cfg = {
        "params": params,
        "run": _parse_run(raw["run"]),
        "family": _parse_family(raw["family"], params) if "family" in raw else None,
        "law": _parse_law(raw["law"]) if "law" in raw else None,
        "rescale": raw.get("rescale"),
        "targets": _parse_targets(raw["targets"]) if "targets" in raw else None,
        "output": _parse_output(raw.get("output", {})),
        "raw": raw,
    }
    if cfg["rescale"] is not None:
        cfg["rescale"] = _parse_rescale(raw["rescale"], params)
    if cfg["law"] is not None and cfg["rescale"] is None:
        _fail("rescale", "an explicit law requires an explicit rescale")
    return cfg


def _resolve_output_dir(args, cfg):
    out = getattr(args, "output_dir", None) or cfg["output"]["dir"] \
        or os.environ.get(OUTPUT_DIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_meta(path, command, cfg, args_overrides, files):
    meta = {
        "package": "torusmut",
        "version": __version__,
        "generator": GENERATOR_NAME,
        "command": command,
        "config": cfg["raw"],
        "overrides": args_overrides,
        "files": files,
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x):
    return format(float(x), ".17g")


def cmd_simulate(args):
    cfg = load_config(args.config)
    params = cfg["params"]
    run = cfg["run"]
    replicates = args.replicates if args.replicates is not None else run["replicates"]
    if replicates <= 0:
        raise InvalidConfigError(f"replicates must be positive, got {replicates}")
    master_seed = args.master_seed if args.master_seed is not None else run["master_seed"]
    workers = args.workers if args.workers is not None else run["workers"]
    out_dir = _resolve_output_dir(args, cfg)
    want_events = args.events or "events" in cfg["output"]["formats"]

    results = run_replicates(params, master_seed, run["guards"], replicates,
                             workers=workers, with_events=want_events)
    if want_events:
        records = [record for record, _ in results]
    else:
        records = results

    files = ["replicates.csv", "meta.json"]
    write_samples_csv(os.path.join(out_dir, "replicates.csv"), records, params)
    if want_events:
        with open(os.path.join(out_dir, "events.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["replicate_index", "mtype", "time"]
                            + [f"x_{i}" for i in range(1, params.d + 1)])
            for record, events in results:
                for ev in events:
                    writer.writerow([record.replicate_index, ev.mtype,
                                     _fmt(ev.time)]
                                    + [_fmt(c) for c in ev.origin.coords])
        files.insert(1, "events.csv")
    overrides = {"replicates": replicates, "master_seed": master_seed,
                 "workers": workers}
    _write_meta(os.path.join(out_dir, "meta.json"), "simulate", cfg, overrides,
                files)
    return EXIT_OK


def cmd_validate(args):
    cfg = load_config(args.config)
    if cfg["targets"] is None:
        raise InvalidConfigError("validate requires a targets section")
    run = cfg["run"]
    replicates = args.replicates if args.replicates is not None else run["replicates"]
    master_seed = args.master_seed if args.master_seed is not None else run["master_seed"]
    workers = args.workers if args.workers is not None else run["workers"]
    out_dir = _resolve_output_dir(args, cfg)

    scale_name = scale_value = None
    if cfg["rescale"] is not None:
        scale_name, scale_value = cfg["rescale"]
    config = ValidationConfig(
        params=cfg["params"],
        targets=tuple(cfg["targets"]),
        replicates=replicates,
        master_seed=master_seed,
        family=cfg["family"],
        law=cfg["law"],
        scale_name=scale_name,
        scale_value=scale_value,
        guards=run["guards"],
        workers=workers,
        ks_threshold=run["ks_threshold"],
    )
    report = run_validation(config,
                            samples_csv=os.path.join(out_dir, "samples.csv"))
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for target in report["targets"]:
        status = "pass" if target["pass"] else "FAIL"
        detail = f"ks={target['ks']:.5f}" if "ks" in target else \
            "ratios=" + ",".join(f"{row['ratio']:.4f}" for row in target.get("rows", []))
        print(f"{target['kind']}: {status} ({detail})")
    return EXIT_OK if report["pass"] else EXIT_STAT_FAIL


def _parse_rational_list(text, what):
    try:
        return [Fraction(part.strip()) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidConfigError(f"cannot parse {what} {text!r}: {exc}") from exc


def _parse_limit_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part == "inf":
            out.append(math.inf)
        else:
            try:
                out.append(float(part))
            except ValueError as exc:
                raise InvalidConfigError(f"cannot parse limit {part!r}") from exc
    return out


def cmd_classify(args):
    a = _parse_rational_list(args.a, "exponents")
    b = _rational(args.b, "b")
    c = _parse_limit_list(args.c) if args.c else None
    try:
        family = ScalingFamily(d=args.d, k=args.k, a=a, b=b, c=c)
    except ValueError as exc:
        raise InvalidConfigError(str(exc)) from exc
    regime = classify(family)
    if regime.l is L_INFINITE:
        l_out = "inf"
    else:
        l_out = regime.l
    out = {
        "kind": regime.kind,
        "l": l_out,
        "scale_exponent": (str(regime.scale_exponent)
                           if regime.scale_exponent is not None else None),
        "scale_name": regime.scale_name,
        "law": regime.law.to_dict() if regime.law is not None else None,
    }
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def _build_cdf_law(args):
    if args.law == "exp1":
        return asymptotics.Exp1Law()
    if args.law == "hypoexp":
        if not args.rates:
            raise InvalidConfigError("--law hypoexp requires --rates")
        return asymptotics.HypoexponentialLaw(_parse_limit_list(args.rates))
    if args.law == "thm3":
        if args.d is None or args.k is None:
            raise InvalidConfigError("--law thm3 requires --d and --k")
        return asymptotics.WeibullTypeLaw.from_order(args.d, args.k)
    if args.law == "distance":
        if args.d is None:
            raise InvalidConfigError("--law distance requires --d")
        return asymptotics.DistanceLaw(args.d)
    raise InvalidConfigError(f"unknown law {args.law!r}")


def cmd_cdf(args):
    law = _build_cdf_law(args)
    if (args.at is None) == (args.grid is None):
        raise InvalidConfigError("exactly one of --at or --grid is required")
    if args.at is not None:
        print(f"{law.cdf(args.at):.7f}")
        return EXIT_OK
    parts = args.grid.split(":")
    if len(parts) != 3:
        raise InvalidConfigError("--grid expects start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise InvalidConfigError(f"bad --grid {args.grid!r}: {exc}") from exc
    if count < 2 or stop <= start:
        raise InvalidConfigError("--grid needs stop > start and count >= 2")
    out_path = args.out
    if out_path is None:
        out_dir = getattr(args, "output_dir", None) \
            or os.environ.get(OUTPUT_DIR_ENV) or "."
        os.makedirs(out_dir, exist_ok=True)
        out_path = os.path.join(out_dir, "cdf.csv")
    step = (stop - start) / (count - 1)
    ts = [start + i * step for i in range(count)]
    values = law.cdf(np.array(ts))
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "F"])
        for t, value in zip(ts, values):
            writer.writerow([_fmt(t), _fmt(value)])
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="torusmut",
        description="Simulate and validate nested mutation spread on the torus")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run replicates, write replicates.csv")
    sim.add_argument("--config", required=True)
    sim.add_argument("--output-dir")
    sim.add_argument("--replicates", type=int)
    sim.add_argument("--master-seed", type=int)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--events", action="store_true",
                     help="also write events.csv with accepted events")
    sim.set_defaults(func=cmd_simulate)

    val = sub.add_parser("validate", help="run replicates and test limit laws")
    val.add_argument("--config", required=True)
    val.add_argument("--output-dir")
    val.add_argument("--replicates", type=int)
    val.add_argument("--master-seed", type=int)
    val.add_argument("--workers", type=int)
    val.set_defaults(func=cmd_validate)

    cls = sub.add_parser("classify", help="classify a scaling family")
    cls.add_argument("--d", type=int, required=True)
    cls.add_argument("--k", type=int, required=True)
    cls.add_argument("--a", required=True, help="comma list of rationals p/q")
    cls.add_argument("--b", required=True, help="rational p/q")
    cls.add_argument("--c", help="comma list of limits (numbers or inf)")
    cls.set_defaults(func=cmd_classify)

    cdf = sub.add_parser("cdf", help="evaluate a limit CDF")
    cdf.add_argument("--law", required=True,
                     choices=("exp1", "hypoexp", "thm3", "distance"))
    cdf.add_argument("--at", type=float)
    cdf.add_argument("--grid", help="start:stop:count")
    cdf.add_argument("--d", type=int)
    cdf.add_argument("--k", type=int)
    cdf.add_argument("--rates", help="comma list for hypoexp")
    cdf.add_argument("--out", help="CSV path for --grid output")
    cdf.add_argument("--output-dir")
    cdf.set_defaults(func=cmd_cdf)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfigError, NoLawError, HypothesisViolationError,
            MissingLimitsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
