"""Command-line front end: ``rboundlab {validate,rbound,counterexample,sector}``.

Configuration is a TOML document; every key has a default, so
``rboundlab counterexample`` runs the flagship experiment with no arguments.
Exit codes: 0 success, 1 check failure or runtime error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import spaces
from .counterexample import FactorialSchedule, counterexample_report, semigroup_symbol
from .multipliers import (SpectrumError, inverse_resolvent_check, k_theta, multiplier_matrix,
                          nested_grids, ritt_power_symbol, sectorial_sup)
from .rademacher import RademacherConfig, SearchConfig, rbound_curve
from .reporting import line_plot_svg, write_csv

log = logging.getLogger("rboundlab")

DEFAULTS = {
    "seed": 0,
    "out": "rboundlab-out",
    "model": {"name": "haar", "levels": 10},
    "schedule": {"n_max": 8},
    "rademacher": {"exact_threshold": 16, "mc_samples": 20000, "moment": "first"},
    "search": {"restarts": 4, "steps": 400, "step_size": 0.5},
    "rbound": {"family": "partial_sums", "n_max": 8},
    "sector": {"thetas": [0.05, 0.25, 0.785398, 1.570796, 2.356194], "a": "factorial",
               "n_radii": 60, "r_min": 1e-6, "r_max": 1e6, "residual_points": 12,
               "model": {"name": "haar", "levels": 3}},
}

MODELS = ("haar", "coordinate", "trig", "file")
FAMILIES = ("partial_sums", "tails", "semigroup", "ritt_powers")


class ConfigError(Exception):
    pass


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path=None, overrides=None):
    cfg = copy.deepcopy(DEFAULTS)
    if path:
        try:
            with open(path, "rb") as fh:
                cfg = _merge(cfg, tomllib.load(fh))
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key == "n_max":
            cfg["schedule"]["n_max"] = val
            cfg["rbound"]["n_max"] = val
        elif key == "model":
            for table in (cfg, cfg["sector"]):
                if val != table["model"].get("name"):
                    table["model"] = {"name": val}
        else:
            cfg[key] = val
    _check_config(cfg)
    return cfg


def _check_config(cfg):
    for table in (cfg["model"], cfg["sector"]["model"]):
        name = table.get("name")
        if name not in MODELS:
            raise ConfigError(f"unknown model {name!r}; choose from {', '.join(MODELS)}")
        if name == "file" and "path" not in table:
            raise ConfigError("model 'file' needs a path")
    for sec in ("schedule", "rbound"):
        n = cfg[sec].get("n_max")
        if not isinstance(n, int) or n < 1:
            raise ConfigError(f"{sec}.n_max must be a positive integer")
    if cfg["rbound"].get("family") not in FAMILIES:
        raise ConfigError(f"rbound.family must be one of {', '.join(FAMILIES)}")
    try:
        rademacher_config(cfg)
        search_config(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def rademacher_config(cfg):
    return RademacherConfig(seed=int(cfg["seed"]), **cfg["rademacher"])


def search_config(cfg):
    return SearchConfig(seed=int(cfg["seed"]), **cfg["search"])


def build_model(mcfg):
    """Construct a decomposition from the ``[model]`` table."""
    name = mcfg["name"]
    try:
        if name == "haar":
            return spaces.build_haar_l1(int(mcfg.get("levels", 10)))
        if name == "trig":
            return spaces.build_trig_lp(float(mcfg.get("p", 4.0)), int(mcfg.get("n_modes", 8)))
        if name == "coordinate":
            dim = int(mcfg.get("dim", 8))
            kind = mcfg.get("kind", "lp")
            if kind == "lp":
                space = spaces.SpaceModel.lp(dim, float(mcfg.get("p", 2.0)))
            elif kind == "sup":
                space = spaces.SpaceModel.sup(dim)
            else:
                space = spaces.SpaceModel.weighted_l1(mcfg.get("weights", [1.0] * dim))
            return spaces.build_coordinate_decomposition(space, mcfg.get("block_dims", [1] * dim))
        return spaces.load_decomposition(mcfg["path"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad model config: {exc}") from exc


# ---------------------------------------------------------------- commands

def cmd_validate(cfg, out):
    model = build_model(cfg["model"])
    report = spaces.validate_decomposition(model)
    doc = {"model": model.name, "dim": model.dim, "blocks": model.n_blocks,
           "K": model.K, "K_exact": model.K_exact, **report.to_dict()}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0 if report.passed else 1


def family_members(model, family, n_max):
    if n_max > model.n_blocks - (family != "partial_sums"):
        raise ValueError(f"n_max={n_max} too large for {model.n_blocks} blocks")
    if family == "partial_sums":
        return [spaces.partial_sum(model, N) for N in range(1, n_max + 1)]
    if family == "tails":
        return [spaces.tail_projection(model, N) for N in range(1, n_max + 1)]
    schedule = FactorialSchedule.build(n_max)
    if family == "semigroup":
        return [multiplier_matrix(model, semigroup_symbol(schedule, N, n_blocks=model.n_blocks))
                for N in range(1, n_max + 1)]
    T_sym = semigroup_symbol(schedule, log_t=0.0, n_blocks=model.n_blocks)
    return [multiplier_matrix(model, ritt_power_symbol(T_sym, log_n=schedule.log_t[N]))
            for N in range(1, n_max + 1)]


def cmd_rbound(cfg, out, family=None):
    family = family or cfg["rbound"]["family"]
    n_max = cfg["rbound"]["n_max"]
    model = build_model(cfg["model"])
    members = family_members(model, family, n_max)
    rcfg = rademacher_config(cfg)
    witnesses = rbound_curve([members[:N] for N in range(1, n_max + 1)], model.space,
                             search_config(cfg), rcfg)
    rows = [{"N": N, "lower_bound": w.ratio, "numerator": w.numerator, "denominator": w.denominator,
             "K": model.K, "moment": rcfg.moment, "certified": w.exact}
            for N, w in enumerate(witnesses, start=1)]
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / f"rbound_{family}.csv", rows)
    Ns = [r["N"] for r in rows]
    svg = line_plot_svg({f"{family} lower bound": (Ns, [r["lower_bound"] for r in rows]),
                         "K": (Ns, [model.K] * len(Ns))},
                        title=f"R-bound lower estimates, {model.name}", xlabel="N", ylabel="ratio")
    (out / f"rbound_{family}.svg").write_text(svg, encoding="utf-8")
    print(json.dumps({"family": family, "model": model.name, "rows": len(rows),
                      "max_lower_bound": max(r["lower_bound"] for r in rows)}, sort_keys=True))
    return 0


def cmd_counterexample(cfg, out):
    model = build_model(cfg["model"])
    schedule = FactorialSchedule.build(cfg["schedule"]["n_max"])
    report = counterexample_report(model, schedule, rademacher_config(cfg), search_config(cfg))
    out.mkdir(parents=True, exist_ok=True)
    (out / "counterexample.csv").write_text(report.to_csv(), encoding="utf-8")
    (out / "counterexample_summary.json").write_text(report.to_json() + "\n", encoding="utf-8")
    Ns = [r["N"] for r in report.rows]
    svg = line_plot_svg({"measured ||S_N - Q_N||": (Ns, [r["measured_norm_diff"] for r in report.rows]),
                         "eq8 bound": (Ns, [r["eq8_bound"] for r in report.rows])},
                        title=f"Semigroup vs tail projections, {model.name}", xlabel="N", ylabel="norm")
    (out / "counterexample.svg").write_text(svg, encoding="utf-8")
    print(report.to_json())
    return 0 if report.passed else 1


def sector_sequence(spec, n_blocks):
    if spec == "factorial":
        log_a = FactorialSchedule.build(1, n_blocks).log_a_upto(n_blocks)
        if log_a[-1] > 700:
            raise ConfigError(f"(n!)^3 overflows for {n_blocks} blocks; use a smaller sector model")
        return np.exp(log_a)
    a = np.asarray(spec, dtype=float)
    if a.shape != (n_blocks,) or np.any(a <= 0) or np.any(np.diff(a) < 0):
        raise ConfigError(f"sector.a must be 'factorial' or {n_blocks} positive nondecreasing numbers")
    return a


def cmd_sector(cfg, out, thetas=None):
    scfg = cfg["sector"]
    model = build_model(scfg["model"])
    a = sector_sequence(scfg["a"], model.n_blocks)
    thetas = sorted(thetas or scfg["thetas"])
    grids = nested_grids(thetas, int(scfg["n_radii"]), float(scfg["r_min"]), float(scfg["r_max"]))
    # dense inverses have forward error ~ eps * cond(A); the floor is 1e-9
    tol = max(1e-9, 16 * np.finfo(float).eps * a.max() / a.min())
    rows = []
    for th in thetas:
        g = grids[th]
        kt = k_theta(a, th, g)
        ss = sectorial_sup(model, a, th, g)
        pts = g.points[:: max(1, len(g.points) // int(scfg["residual_points"]))]
        res = 0.0
        for lam in pts:
            try:
                res = max(res, inverse_resolvent_check(a, lam, model))
            except SpectrumError:
                continue
        rows.append({"theta": th, "k_theta": kt, "sectorial_sup": ss, "bound": kt * model.K,
                     "inverse_residual": res, "residual_tolerance": tol,
                     "pass": ss <= kt * model.K + 1e-6 and res <= tol})
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sector.csv", rows)
    svg = line_plot_svg({"K_theta (grid)": (thetas, [r["k_theta"] for r in rows]),
                         "sup ||lam R(lam, A)||": (thetas, [r["sectorial_sup"] for r in rows])},
                        title=f"Sectorial bounds, {model.name}", xlabel="theta", ylabel="value")
    (out / "sector.svg").write_text(svg, encoding="utf-8")
    ok = all(r["pass"] for r in rows)
    print(json.dumps({"model": model.name, "thetas": len(rows), "passed": ok}, sort_keys=True))
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="rboundlab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML config file")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--n-max", type=int, dest="n_max")
    common.add_argument("--model", choices=MODELS)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the decomposition axioms")
    rb = sub.add_parser("rbound", parents=[common], help="R-bound lower-bound curve for a family")
    rb.add_argument("--family", choices=FAMILIES)
    sub.add_parser("counterexample", parents=[common], help="run the factorial construction report")
    sc = sub.add_parser("sector", parents=[common], help="sweep K_theta and the resolvent bounds")
    sc.add_argument("--theta", type=float, action="append", dest="thetas")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, {"seed": args.seed, "n_max": args.n_max, "model": args.model})
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"rboundlab: error: {exc}", file=sys.stderr)
        return 2
    out = args.out or Path(cfg["out"])
    try:
        if args.command == "validate":
            return cmd_validate(cfg, out)
        if args.command == "rbound":
            return cmd_rbound(cfg, out, args.family)
        if args.command == "counterexample":
            return cmd_counterexample(cfg, out)
        return cmd_sector(cfg, out, args.thetas)
    except ConfigError as exc:
        print(f"rboundlab: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError, OSError, json.JSONDecodeError) as exc:
        print(f"rboundlab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
