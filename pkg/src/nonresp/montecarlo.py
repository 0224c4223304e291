"""Replicated-design simulation and theory-vs-empirical comparison.

Replication ``r`` draws from its own stream ``SeedSequence(seed, spawn_key=(r,))``
and writes into slot ``r`` of a preallocated array, so results do not depend on
how replications are spread over threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from . import estimators as est
from . import theory
from .design import Design, DrawnSample, realize
from .estimators import ClassParams, EstimationError
from .population import FinitePopulation, PopulationParams, compute_params

MIN_REPLICATIONS = 100
# first-order MSE formulas are approximations for everything except hh_mean
APPROX_SLACK = 0.02
Z_LIMIT = 3.0

SINGLE_PHASE_SET = ("hh_mean", "ratio", "regression", "class")
TWO_PHASE_SET = ("hh_mean", "ratio_2p", "regression_2p", "class_2p")


class SimulationError(ValueError):
    pass


@dataclass
class EstimatorResult:
    label: str
    n_valid: int
    degenerate_count: int
    failed: bool = False
    empirical_mean: Optional[float] = None
    empirical_bias: Optional[float] = None
    bias_standard_error: Optional[float] = None
    empirical_mse: Optional[float] = None
    mse_standard_error: Optional[float] = None
    theoretical_value: Optional[float] = None
    theoretical_bias: Optional[float] = None
    z_score: Optional[float] = None
    slack: float = 0.0
    flagged: Optional[bool] = None


@dataclass
class SimulationReport:
    R: int
    seed: int
    design: dict
    true_mean: float
    degenerate_count: int
    class_params: Optional[dict] = None
    results: List[EstimatorResult] = field(default_factory=list)

    def __getitem__(self, label: str) -> EstimatorResult:
        for r in self.results:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def any_flagged(self) -> bool:
        return any(r.flagged or r.failed for r in self.results)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationReport":
        d = dict(d)
        d["results"] = [EstimatorResult(**r) for r in d["results"]]
        return cls(**d)


def replication_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))


def _estimator_table(Xbar: float, cp: Optional[ClassParams]) -> Dict[str, Callable[[DrawnSample], float]]:
    table = {
        "hh_mean": est.hh_mean,
        "ratio": lambda s: est.ratio_estimate(s, Xbar),
        "regression": lambda s: est.regression_estimate(s, Xbar),
        "ratio_2p": est.ratio_estimate_2p,
        "regression_2p": est.regression_estimate_2p,
    }
    if cp is not None:
        table["class"] = lambda s: est.class_estimate(s, Xbar, cp)
        table["class_2p"] = lambda s: est.class_estimate_2p(s, cp)
    return table


def resolve_class_params(cp: Union[None, str, ClassParams], params: PopulationParams,
                         design: Design, shape=(1.0, 0.0)) -> Optional[ClassParams]:
    """``"optimum"`` means the optimum constants under the true population parameters."""
    if cp is None or isinstance(cp, ClassParams):
        return cp
    if cp != "optimum":
        raise SimulationError(f"unknown class parameter spec {cp!r}")
    eta, lam = shape
    if design.two_phase:
        return theory.optimum_class_params_2p(params, design.n_prime, design.n, design.k, eta, lam)
    return theory.optimum_class_params(params, design.n, design.k, eta, lam)


def run_simulation(pop: FinitePopulation, design: Design,
                   estimators: Optional[Sequence[str]] = None,
                   cp: Union[None, str, ClassParams] = "optimum",
                   R: int = 10_000, seed: int = 0, threads: int = 1,
                   class_shape=(1.0, 0.0)) -> SimulationReport:
    if R < MIN_REPLICATIONS:
        raise SimulationError(f"R={R} is below the minimum of {MIN_REPLICATIONS}")
    design.validate_for(pop.N)
    params = compute_params(pop)
    if estimators is None:
        estimators = TWO_PHASE_SET if design.two_phase else SINGLE_PHASE_SET
    if any(e.endswith("_2p") for e in estimators) and not design.two_phase:
        raise SimulationError("two-phase estimators need a two-phase design")
    cp_resolved = resolve_class_params(cp, params, design, class_shape)
    table = _estimator_table(params.Xbar, cp_resolved)
    unknown = [e for e in estimators if e not in table]
    if unknown:
        raise SimulationError(f"unknown or unconfigured estimators: {unknown}")
    funcs = [table[e] for e in estimators]

    values = np.full((R, len(funcs)), np.nan)

    def work(lo: int, hi: int) -> None:
        for r in range(lo, hi):
            s = realize(design, pop, replication_rng(seed, r))
            for j, fn in enumerate(funcs):
                try:
                    values[r, j] = fn(s)
                except EstimationError:
                    pass

    threads = max(1, int(threads))
    if threads == 1:
        work(0, R)
    else:
        bounds = np.linspace(0, R, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, bounds[:-1], bounds[1:]))

    truth = params.Ybar
    results = []
    for j, label in enumerate(estimators):
        v = values[:, j]
        ok = np.isfinite(v)
        n_valid = int(ok.sum())
        res = EstimatorResult(label=label, n_valid=n_valid, degenerate_count=R - n_valid)
        if n_valid < 2:
            res.failed = True
        else:
            err = v[ok] - truth
            sq = err ** 2
            res.empirical_mean = float(v[ok].mean())
            res.empirical_bias = float(err.mean())
            res.bias_standard_error = float(err.std(ddof=1) / math.sqrt(n_valid))
            res.empirical_mse = float(sq.mean())
            res.mse_standard_error = float(sq.std(ddof=1) / math.sqrt(n_valid))
        results.append(res)

    degenerate = int((~np.isfinite(values)).any(axis=1).sum())
    return SimulationReport(
        R=R, seed=seed, design=design.as_dict(), true_mean=truth,
        degenerate_count=degenerate,
        class_params=asdict(cp_resolved) if cp_resolved is not None else None,
        results=results,
    )


def theoretical_mse(label: str, p: PopulationParams, design: Design,
                    cp: Optional[ClassParams]) -> Optional[float]:
    n, k = design.n, design.k
    npr = design.n_prime
    if label == "hh_mean":
        return theory.var_hh(p, n, k).value
    if label == "ratio":
        return theory.mse_ratio(p, n, k).value
    if label == "regression":
        return theory.mse_regression(p, n, k).value
    if label == "class" and cp is not None:
        return theory.mse_class(p, n, k, cp)
    if npr is not None:
        if label == "ratio_2p":
            return theory.mse_ratio_2p(p, npr, n, k).value
        if label == "regression_2p":
            return theory.mse_regression_2p(p, npr, n, k).value
        if label == "class_2p" and cp is not None:
            return theory.mse_class_2p(p, npr, n, k, cp)
    return None


def theoretical_bias(label: str, p: PopulationParams, design: Design,
                     cp: Optional[ClassParams]) -> Optional[float]:
    if label == "hh_mean":
        return 0.0
    if label == "class" and cp is not None:
        return theory.bias_class(p, design.n, design.k, cp)
    if label == "class_2p" and cp is not None and design.two_phase:
        return theory.bias_class_2p(p, design.n_prime, design.n, design.k, cp)
    return None


def compare_theory(report: SimulationReport, p: PopulationParams, design: Design,
                   overrides: Optional[Dict[str, float]] = None) -> SimulationReport:
    """Attach theoretical MSEs, z-scores and flags to every estimator row.

    A row is flagged when ``|empirical - theory| > 3*se + slack*theory`` where
    the slack is 0 for hh_mean (exact variance) and 2% for the others.
    ``overrides`` replaces the theoretical value for the given labels.
    """
    cp = ClassParams(**report.class_params) if report.class_params else None
    overrides = overrides or {}
    rows = []
    for r in report.results:
        tv = overrides.get(r.label, theoretical_mse(r.label, p, design, cp))
        tb = theoretical_bias(r.label, p, design, cp)
        slack = 0.0 if r.label == "hh_mean" else APPROX_SLACK
        row = replace(r, theoretical_value=tv, theoretical_bias=tb, slack=slack,
                      z_score=None, flagged=None)
        if tv is not None and not r.failed:
            diff = r.empirical_mse - tv
            se = r.mse_standard_error
            row.z_score = diff / se if se > 0 else (0.0 if diff == 0 else math.copysign(math.inf, diff))
            row.flagged = bool(abs(diff) > Z_LIMIT * se + slack * abs(tv))
        rows.append(row)
    return replace(report, results=rows)
