"""Command line: ``nonresp {params,table,simulate,estimate}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, replace
from typing import List, Optional

import numpy as np

from . import estimators as est
from . import theory
from .design import Design, DesignError, DrawnSample, SinglePhase, TwoPhase, realize
from .estimators import ClassParams, EstimationError
from .montecarlo import SimulationError, compare_theory, run_simulation
from .population import (FinitePopulation, PopulationError, PopulationParams,
                         compute_params, load_population, synthesize_population)
from .scenarios import ScenarioSpec, SpecError, build_table, load_spec, preset
from .theory import TheoryError

SEED_ENV = "NONRESP_SEED"
ESTIMATORS = ("hh_mean", "ratio", "regression", "class",
              "ratio_2p", "regression_2p", "class_2p")

USER_ERRORS = (PopulationError, DesignError, EstimationError, SimulationError,
               SpecError, TheoryError)


class UsageError(Exception):
    pass


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (int, np.integer)):
        return str(v)
    return f"{v:.5f}"


def _render_rows(header: List[str], rows: List[list], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else v for v in r])
        return buf.getvalue()
    cells = [header] + [[_fmt(v) if not isinstance(v, str) else v for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _resolve_seed(flag: Optional[int]) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer")
    return 0


def _scenario(args, required: bool = True) -> Optional[ScenarioSpec]:
    if getattr(args, "preset", None) and getattr(args, "spec", None):
        raise UsageError("give either --preset or --spec, not both")
    if getattr(args, "preset", None):
        spec = preset(args.preset)
    elif getattr(args, "spec", None):
        spec = load_spec(args.spec)
    elif required:
        raise UsageError("a scenario is required: use --preset or --spec")
    else:
        return None
    if getattr(args, "k", None) is not None:
        spec = replace(spec, design=replace(spec.design, k=args.k))
    return spec


def _load_population_file(path: str) -> FinitePopulation:
    with open(path, encoding="utf-8", newline="") as fh:
        return load_population(fh)


# -- params -----------------------------------------------------------------


def cmd_params(args) -> int:
    if args.population:
        rows = [compute_params(_load_population_file(args.population))]
    else:
        spec = _scenario(args)
        ws = args.W2 if args.W2 is not None else list(spec.W2_values)
        rows = [spec.params.with_W2(w) for w in ws]
    dicts = [p.as_dict() for p in rows]
    if args.format == "json":
        _emit(_dump_json(dicts if len(dicts) > 1 else dicts[0]), args.out)
    else:
        header = list(dicts[0])
        _emit(_render_rows(header, [list(d.values()) for d in dicts], args.format), args.out)
    return 0


# -- table ------------------------------------------------------------------


def cmd_table(args) -> int:
    spec = _scenario(args)
    rows = build_table(spec, args.W2, args.k)
    ref = spec.reference if args.k is None else {}
    if args.format == "json":
        payload = {
            "preset": args.preset,
            "design": spec.design.as_dict(),
            "class_shape": list(spec.class_shape),
            "baseline": "hh_mean",
            "rows": [asdict(r) for r in rows],
        }
        if ref:
            payload["reference"] = {str(w): list(v) for w, v in ref.items()}
        if spec.notes:
            payload["notes"] = list(spec.notes)
        _emit(_dump_json(payload), args.out)
        return 0
    header = ["W2", "ratio", "regression", "class_opt"]
    body = []
    for r in rows:
        line = [r.W2, r.ratio, r.regression, r.optimum]
        if args.compare and r.W2 in ref:
            line += list(ref[r.W2])
        elif args.compare:
            line += [None, None, None]
        body.append(line)
    if args.compare:
        header += ["ref_ratio", "ref_regression", "ref_class_opt"]
    text = _render_rows(header, body, args.format)
    if args.format == "text":
        title = f"PRE (%) with respect to the Hansen-Hurwitz mean, design {spec.design.as_dict()}"
        text = title + "\n" + text
        for note in spec.notes:
            text += f"* {note}\n"
    _emit(text, args.out)
    return 0


# -- simulate ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.R < 100:
        raise UsageError(f"--R must be at least 100 (got {args.R})")
    seed = _resolve_seed(args.seed)
    spec = _scenario(args)
    design = spec.design
    estimators = args.estimators.split(",") if args.estimators else None
    runs = []
    if args.population:
        pops = [_load_population_file(args.population)]
    else:
        ws = args.W2 if args.W2 is not None else list(spec.W2_values)
        pops = [synthesize_population(spec.params.with_W2(w), seed) for w in ws]
    for pop in pops:
        params = compute_params(pop)
        rep = run_simulation(pop, design, estimators=estimators, cp="optimum",
                             R=args.R, seed=seed, threads=args.threads,
                             class_shape=spec.class_shape)
        rep = compare_theory(rep, params, design)
        runs.append((params, rep))

    if args.format == "json":
        _emit(_dump_json({"reports": [{"population": p.as_dict(), **r.to_dict()}
                                      for p, r in runs]}), args.out)
    else:
        header = ["W2", "estimator", "emp_mean", "emp_bias", "emp_mse", "mse_se",
                  "theory_mse", "z", "flag", "degenerate"]
        body = []
        for p, rep in runs:
            for r in rep.results:
                body.append([p.W2, r.label, r.empirical_mean, r.empirical_bias,
                             r.empirical_mse, r.mse_standard_error, r.theoretical_value,
                             r.z_score, "FAILED" if r.failed else r.flagged, r.degenerate_count])
        text = _render_rows(header, body, args.format)
        if args.format == "text":
            text = f"R={args.R} seed={seed} design={design.as_dict()}\n" + text
        _emit(text, args.out)
    return 1 if any(r.any_flagged for _, r in runs) else 0


# -- estimate ---------------------------------------------------------------


def _read_sample(path: str) -> DrawnSample:
    """Pre-realized sample CSV with columns ``y,x,role``.

    Roles: ``R`` respondent, ``NRS`` interviewed non-respondent, ``NRX``
    non-respondent not followed up (y blank), ``P1`` first-phase-only unit
    (y blank). Phase-one x-values are all rows when any ``P1`` row exists.
    """
    parts = {"R": ([], []), "NRS": ([], []), "NRX": ([], []), "P1": ([], [])}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"y", "x", "role"} <= set(reader.fieldnames):
            raise UsageError(f"{path}: sample file needs columns y,x,role")
        for row in reader:
            role = row["role"].strip().upper()
            if role not in parts:
                raise UsageError(f"{path} line {reader.line_num}: unknown role {role!r}")
            try:
                x = float(row["x"])
                y = float(row["y"]) if role in ("R", "NRS") else np.nan
            except ValueError:
                raise UsageError(f"{path} line {reader.line_num}: non-numeric value") from None
            parts[role][0].append(y)
            parts[role][1].append(x)
    arr = {k: (np.array(v[0], dtype=float), np.array(v[1], dtype=float)) for k, v in parts.items()}
    phase1 = None
    if arr["P1"][1].size:
        phase1 = np.concatenate([arr[r][1] for r in ("R", "NRS", "NRX", "P1")])
    return DrawnSample(resp_y=arr["R"][0], resp_x=arr["R"][1], sub_y=arr["NRS"][0],
                       sub_x=arr["NRS"][1], nonsub_x=arr["NRX"][1], phase1_x=phase1)


def _cli_design(args) -> Design:
    spec = _scenario(args, required=False)
    if spec is not None:
        return spec.design
    if args.n is None:
        raise UsageError("design required: --preset/--spec or --n [--n-prime] [--k]")
    k = 1.0 if args.k is None else args.k
    if args.n_prime is not None:
        return Design(TwoPhase(args.n_prime, args.n), k=k)
    return Design(SinglePhase(args.n), k=k)


def cmd_estimate(args) -> int:
    names = args.estimator.split(",") if args.estimator else ["hh_mean"]
    bad = [e for e in names if e not in ESTIMATORS]
    if bad:
        raise UsageError(f"unknown estimator(s) {bad}; choose from {list(ESTIMATORS)}")
    pop = None
    if args.sample:
        sample = _read_sample(args.sample)
        two_phase = sample.phase1_x is not None
        design = None
    else:
        if not args.population:
            raise UsageError("give --population (to draw a sample) or --sample")
        pop = _load_population_file(args.population)
        design = _cli_design(args)
        two_phase = design.two_phase
        sample = realize(design, pop, np.random.default_rng(_resolve_seed(args.seed)))
    if any(e.endswith("_2p") for e in names) and not two_phase:
        raise UsageError("two-phase estimator requested on a single-phase design")
    needs_xbar = {"ratio", "regression", "class"}
    if needs_xbar & set(names) and args.Xbar is None:
        raise UsageError("population mean of auxiliary variable required (--Xbar)")

    cp = None
    if {"class", "class_2p"} & set(names):
        if args.alpha1 is not None:
            cp = ClassParams(args.alpha1, args.alpha2 or 0.0, args.eta, args.lam)
        elif pop is not None:
            p = compute_params(pop)
            if design.two_phase:
                cp = theory.optimum_class_params_2p(p, design.n_prime, design.n, design.k,
                                                    args.eta, args.lam)
            else:
                cp = theory.optimum_class_params(p, design.n, design.k, args.eta, args.lam)
        else:
            raise UsageError("class estimators on a sample file need --alpha1/--alpha2")

    fns = {
        "hh_mean": lambda: est.hh_mean(sample),
        "ratio": lambda: est.ratio_estimate(sample, args.Xbar),
        "regression": lambda: est.regression_estimate(sample, args.Xbar),
        "class": lambda: est.class_estimate(sample, args.Xbar, cp),
        "ratio_2p": lambda: est.ratio_estimate_2p(sample),
        "regression_2p": lambda: est.regression_estimate_2p(sample),
        "class_2p": lambda: est.class_estimate_2p(sample, cp),
    }
    results = {}
    for name in names:
        try:
            results[name] = fns[name]()
        except EstimationError as e:
            results[name] = None
            print(f"warning: {name}: {e}", file=sys.stderr)
    meta = {"n": sample.n, "n1": sample.n1, "n2": sample.n2, "h2": sample.h2}
    if args.format == "json":
        payload = {"sample": meta, "estimates": results}
        if cp is not None:
            payload["class_params"] = asdict(cp)
        _emit(_dump_json(payload), args.out)
    else:
        text = _render_rows(["estimator", "estimate"], [[k, v] for k, v in results.items()],
                            args.format)
        if args.format == "text":
            text = " ".join(f"{k}={v}" for k, v in meta.items()) + "\n" + text
        _emit(text, args.out)
    return 0 if all(v is not None for v in results.values()) else 1


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonresp",
        description="Mean estimation under non-response with sub-sampling of non-respondents.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--preset", choices=["table1", "table2", "table3"])
            p.add_argument("--spec", help="scenario JSON file")
        p.add_argument("--format", choices=["text", "csv", "json"], default="text")
        p.add_argument("--out", help="write output to this path instead of stdout")

    p = sub.add_parser("params", help="population parameters from a CSV or a scenario")
    common(p)
    p.add_argument("--population", help="population CSV (y,x[,group])")
    p.add_argument("--W2", type=_float_list, help="comma-separated non-response rates")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("table", help="PRE table from the closed-form MSEs")
    common(p)
    p.add_argument("--W2", type=_float_list)
    p.add_argument("--k", type=float, help="override the sub-sampling factor")
    p.add_argument("--compare", action="store_true", help="show reference values alongside")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="Monte Carlo check of the MSE formulas")
    common(p)
    p.add_argument("--population", help="population CSV; synthesized from the scenario if omitted")
    p.add_argument("--W2", type=_float_list)
    p.add_argument("--k", type=float)
    p.add_argument("--R", type=int, default=10_000)
    p.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or 0)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--estimators", help="comma-separated estimator labels")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="point estimates from one sample")
    common(p)
    p.add_argument("--population", help="population CSV to draw from")
    p.add_argument("--sample", help="pre-realized sample CSV (y,x,role)")
    p.add_argument("--n", type=int)
    p.add_argument("--n-prime", dest="n_prime", type=int)
    p.add_argument("--k", type=float)
    p.add_argument("--Xbar", type=float, help="known population mean of x")
    p.add_argument("--estimator", help=f"comma-separated, from {','.join(ESTIMATORS)}")
    p.add_argument("--alpha1", type=float)
    p.add_argument("--alpha2", type=float)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except USER_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
