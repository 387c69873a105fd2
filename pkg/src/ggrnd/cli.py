"""Command-line entry point: ``ggrnd <command> [flags]``.

Commands: calibrate, price, rnd, delta, smile, simulate, report. Market
inputs come from ``--spot --rate --div-yield --dte`` (days, converted with
/365) or from a ``--config`` RunConfig JSON. Outputs are CSV/JSON only.

Exit status is 0 on success, 1 on a numerical failure and 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import models
from .bs import implied_vol, lognormal_rnd
from .calibration import CalibrationResult, calibrate, calibrate_all, mse_table
from .chain_io import RunConfig, load_chain
from .errors import ChainError, ConvergenceError, DomainError, GGRNDError
from .heston import HestonParams, heston_moments
from .mc import SimConfig, histogram, sample_moments, simulate, write_histogram_csv, write_terminal_csv
from .rnd import MarketContext, strike_for_delta

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2
FMT = ".12g"


class InputError(Exception):
    """Bad flags or unreadable input files."""


# -- argument helpers ----------------------------------------------------------

def _load_json(text_or_path):
    text = str(text_or_path).strip()
    if not text.startswith(("{", "[")):
        try:
            text = Path(text).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {text_or_path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {text_or_path}: {exc}") from exc


def _params(arg, model):
    """Parameter mapping from inline JSON, a file, or a saved calibration result."""
    data = _load_json(arg)
    if isinstance(data, dict) and "fitted_params" in data:
        data = data["fitted_params"]
    if isinstance(data, dict) and model in data and isinstance(data[model], dict):
        data = data[model]
    if not isinstance(data, dict):
        raise InputError("parameters must be a JSON object")
    missing = [n for n in models.PARAM_NAMES[model] if n not in data]
    if missing:
        raise InputError(f"{model} parameters missing {missing}")
    return {n: float(data[n]) for n in models.PARAM_NAMES[model]}


def _grid(spec):
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise InputError(f"grid must look like lo:hi:n, got {spec!r}") from None
    if n < 2 or not hi > lo:
        raise InputError("grid needs n >= 2 and hi > lo")
    return np.linspace(lo, hi, n)


def _strikes(spec):
    """``lo:hi:n``, a comma-separated list, or a CSV file with a ``strike`` column."""
    if ":" in spec:
        k = _grid(spec)
    elif Path(spec).is_file():
        with open(spec, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or "strike" not in rows[0]:
            raise InputError(f"{spec} has no 'strike' column")
        k = np.array([float(r["strike"]) for r in rows])
    else:
        try:
            k = np.array([float(x) for x in spec.split(",") if x.strip()])
        except ValueError:
            raise InputError(f"cannot parse strikes {spec!r}") from None
    if k.size == 0 or np.any(~(k > 0)):
        raise InputError("strikes must be positive")
    return np.unique(k)


def _context(args):
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else None
    vals = {}
    for name in ("spot", "rate", "div_yield", "dte"):
        v = getattr(args, name)
        if v is None and cfg is not None:
            v = getattr(cfg, "dte_days" if name == "dte" else name)
        if v is None:
            raise InputError(f"--{name.replace('_', '-')} is required (or give --config)")
        vals[name] = v
    return MarketContext.from_dte(vals["spot"], vals["rate"], vals["div_yield"], vals["dte"]), cfg


def _write_csv(path, header, rows):
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (format(v, FMT) if isinstance(v, float) else v) for v in row])
    finally:
        if out is not sys.stdout:
            out.close()


def _write_json(path, obj):
    text = json.dumps(obj, indent=2, default=_jsonable)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def _clean(x):
    # JSON has no NaN/inf
    return None if isinstance(x, float) and not math.isfinite(x) else x


# -- commands ------------------------------------------------------------------

def _initials(args, cfg):
    init = dict(cfg.initial_params) if cfg is not None else {}
    if args.init:
        data = _load_json(args.init)
        if not isinstance(data, dict):
            raise InputError("--init must be a JSON object")
        if args.model != "all" and not any(isinstance(v, dict) for v in data.values()):
            data = {args.model: data}
        init.update(data)
    return init


def _calibration_doc(results):
    return {
        "results": {m: r.to_dict() if isinstance(r, CalibrationResult) else {"model_id": m, "error": str(r)}
                    for m, r in results.items()},
        "mse_table": mse_table(results),
    }


def cmd_calibrate(args):
    ctx, cfg = _context(args)
    chain = load_chain(args.chain)
    init = _initials(args, cfg)
    if args.model == "all":
        ids = cfg.models if cfg is not None else ("bs", "gg", "igg", "heston")
        results = calibrate_all(chain, ctx, ids, init)
        _write_json(args.out, _calibration_doc(results))
        for row in mse_table(results):
            mse = "failed" if row["mse"] is None else format(row["mse"], FMT)
            print(f"{row['model_id']:>7s}  mse={mse}", file=sys.stderr)
        return EXIT_OK if any(isinstance(r, CalibrationResult) for r in results.values()) else EXIT_NUMERIC
    res = calibrate(args.model, chain, ctx, init.get(args.model))
    _write_json(args.out, res.to_dict())
    return EXIT_OK


def cmd_price(args):
    ctx, _ = _context(args)
    k = _strikes(args.strikes)
    p = models.price(args.model, _params(args.params, args.model), ctx, k)
    _write_csv(args.out, ["strike", "call_price"], zip(k.tolist(), p.tolist()))
    return EXIT_OK


def cmd_rnd(args):
    ctx, _ = _context(args)
    u = _grid(args.grid)
    curve = models.standardized_density(args.model, _params(args.params, args.model), ctx, u)
    mass = curve.integral()
    if abs(mass - 1.0) > 1e-3:
        print(f"warning: density integrates to {mass:{FMT}} on the grid", file=sys.stderr)
    _write_csv(args.out, ["s_star", "density"], curve.rows())
    return EXIT_OK


def cmd_delta(args):
    ctx, _ = _context(args)
    k = _strikes(args.strikes)
    d = models.delta(args.model, _params(args.params, args.model), ctx, k)
    _write_csv(args.out, ["strike", "delta"], zip(k.tolist(), np.asarray(d, dtype=float).tolist()))
    return EXIT_OK


def _smile_rows(chain, ctx):
    rows, skipped = [], []
    for i, q in enumerate(chain.rows, start=2):
        try:
            rows.append((q.strike, q.call_mid, implied_vol(ctx, q.strike, q.call_mid)))
        except (DomainError, ConvergenceError) as exc:
            skipped.append((i, q.strike, str(exc)))
    return rows, skipped


def cmd_smile(args):
    ctx, _ = _context(args)
    rows, skipped = _smile_rows(load_chain(args.chain), ctx)
    for row, k, why in skipped:
        print(f"row {row}: strike {k:{FMT}} skipped: {why}", file=sys.stderr)
    _write_csv(args.out, ["strike", "call_mid", "implied_vol"], rows)
    return EXIT_OK if rows else EXIT_NUMERIC


def _summary(sample):
    m = sample_moments(sample)
    return {"paths": len(sample), "mean": m.mean, "variance": m.variance,
            "skew": _clean(m.skew), "excess_kurtosis": _clean(m.excess_kurtosis)}


def cmd_simulate(args):
    ctx, cfg = _context(args)
    params = HestonParams(**_params(args.heston_params, "heston"))
    paths = args.paths if args.paths is not None else (cfg.paths if cfg else 30000)
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    sim = SimConfig(paths=paths, steps_per_year=args.steps_per_year, seed=seed,
                    antithetic=args.antithetic, scheme=args.scheme)
    sample = simulate(ctx, params, sim)
    if args.out:
        write_terminal_csv(sample, args.out)
    if args.hist:
        write_histogram_csv(histogram(sample, bins=args.bins), args.hist)
    _write_json(None, _summary(sample))
    return EXIT_OK


def _prepare_dir(path, force):
    out = Path(path)
    if out.exists() and not out.is_dir():
        raise InputError(f"{out} exists and is not a directory")
    if out.is_dir() and any(out.iterdir()) and not force:
        raise InputError(f"{out} is not empty; use --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model_moments(model, params, ctx):
    obj = models.build(model, params, ctx)
    if model == "heston":
        _, _, skew, kurt = heston_moments(ctx, obj)
    elif model == "bs":
        skew, kurt = lognormal_rnd(obj.nu(ctx.ttm_years)).skew_kurt()
    else:
        skew, kurt = obj.skew_kurt()
    return {"skew": skew, "excess_kurtosis": kurt}


def cmd_report(args):
    ctx, cfg = _context(args)
    chain = load_chain(args.chain)
    out = _prepare_dir(args.out, args.force)
    ids = args.models.split(",") if args.models else (cfg.models if cfg else ["bs", "gg", "igg", "heston"])
    bad = [m for m in ids if m not in models.MODEL_IDS]
    if bad:
        raise InputError(f"unknown models {bad}")
    results = calibrate_all(chain, ctx, ids, cfg.initial_params if cfg else None)
    _write_json(out / "calibration.json", _calibration_doc(results))
    _write_csv(out / "mse_table.csv", ["model_id", "mse", "ratio_to_best"],
               [(r["model_id"], r["mse"], r["ratio_to_best"]) for r in mse_table(results)])
    fitted = {m: r.fitted_params for m, r in results.items() if isinstance(r, CalibrationResult)}
    failures = {m: str(r) for m, r in results.items() if not isinstance(r, CalibrationResult)}

    u = np.linspace(0.5, 1.5, 1001)
    k = chain.strikes
    atm = chain.atm_quote(ctx.spot).strike
    deltas, moments, atm_rows = {}, {}, {}
    for m, p in fitted.items():
        try:
            _write_csv(out / f"rnd_{m}.csv", ["s_star", "density"], models.standardized_density(m, p, ctx, u).rows())
            deltas[m] = np.asarray(models.delta(m, p, ctx, k), dtype=float)
            moments[m] = _model_moments(m, p, ctx)
            atm_rows[m] = float(models.delta(m, p, ctx, [atm])[0])
        except GGRNDError as exc:
            failures[f"{m}:outputs"] = str(exc)
    if deltas:
        names = list(deltas)
        _write_csv(out / "delta.csv", ["strike"] + [f"delta_{m}" for m in names],
                   ([float(ki)] + [float(deltas[m][i]) for m in names] for i, ki in enumerate(k)))
    _write_json(out / "moments.json", moments)
    _write_json(out / "atm_delta.json", {"strike": atm, "delta": atm_rows})

    for m in ("gg", "igg"):
        if m in fitted:
            try:
                rnd = models.build(m, fitted[m], ctx)
                _write_json(out / f"strangle_{m}.json", {
                    "call_25d_strike": strike_for_delta(rnd, ctx, 0.25, "call"),
                    "put_25d_strike": strike_for_delta(rnd, ctx, -0.25, "put")})
            except GGRNDError as exc:
                failures[f"{m}:strangle"] = str(exc)

    rows, skipped = _smile_rows(chain, ctx)
    _write_csv(out / "smile.csv", ["strike", "call_mid", "implied_vol"], rows)

    if "heston" in fitted:
        params = HestonParams(**fitted["heston"])
        sim = SimConfig(paths=args.paths if args.paths is not None else (cfg.paths if cfg else 30000),
                        seed=args.seed if args.seed is not None else (cfg.seed if cfg else 0))
        try:
            sample = simulate(ctx, params, sim)
            write_terminal_csv(sample, out / "simulated_s_star.csv")
            write_histogram_csv(histogram(sample, bins=args.bins), out / "simulated_hist.csv")
            _write_json(out / "simulation.json", _summary(sample))
        except GGRNDError as exc:
            failures["simulate"] = str(exc)

    _write_json(out / "failures.json", {"failures": failures,
                                        "smile_skipped": [{"row": r, "strike": s, "reason": w} for r, s, w in skipped]})
    print(f"report written to {out}", file=sys.stderr)
    return EXIT_OK if fitted else EXIT_NUMERIC


# -- parser --------------------------------------------------------------------

def _market(p):
    p.add_argument("--spot", type=float)
    p.add_argument("--rate", type=float)
    p.add_argument("--div-yield", dest="div_yield", type=float)
    p.add_argument("--dte", type=float, help="days to expiry")
    p.add_argument("--config", help="RunConfig JSON supplying defaults")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ggrnd", description="Option pricing and risk-neutral densities.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit models to a chain by MSE")
    p.add_argument("--model", choices=models.MODEL_IDS + ("all",), required=True)
    p.add_argument("--chain", required=True)
    p.add_argument("--init", help="initial parameters (JSON or file)")
    p.add_argument("--out", help="output JSON (stdout if omitted)")
    _market(p)
    p.set_defaults(func=cmd_calibrate)

    for name, func, extra in (("price", cmd_price, "strikes"), ("delta", cmd_delta, "strikes"),
                              ("rnd", cmd_rnd, "grid")):
        p = sub.add_parser(name)
        p.add_argument("--model", choices=models.MODEL_IDS, required=True)
        p.add_argument("--params", required=True, help="JSON object, file, or calibration output")
        if extra == "strikes":
            p.add_argument("--strikes", required=True, help="lo:hi:n, comma list, or CSV with a strike column")
        else:
            p.add_argument("--grid", required=True, help="lo:hi:n in standardized price")
        p.add_argument("--out", help="output CSV (stdout if omitted)")
        _market(p)
        p.set_defaults(func=func)

    p = sub.add_parser("smile", help="BS implied volatility per strike")
    p.add_argument("--chain", required=True)
    p.add_argument("--out")
    _market(p)
    p.set_defaults(func=cmd_smile)

    p = sub.add_parser("simulate", help="Monte-Carlo terminal prices under Heston")
    p.add_argument("--heston-params", dest="heston_params", required=True)
    p.add_argument("--paths", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--steps-per-year", dest="steps_per_year", type=int, default=SimConfig.steps_per_year)
    p.add_argument("--scheme", choices=("milstein", "euler"), default="milstein")
    p.add_argument("--antithetic", action="store_true")
    p.add_argument("--out", help="CSV of standardized terminal prices")
    p.add_argument("--hist", help="CSV histogram of the same")
    p.add_argument("--bins", type=int, default=50)
    _market(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="calibrate, then write densities, deltas, smile and simulation")
    p.add_argument("--chain", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true")
    p.add_argument("--models", help="comma-separated model ids")
    p.add_argument("--paths", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bins", type=int, default=50)
    _market(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, ChainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GGRNDError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
