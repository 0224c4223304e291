"""Point estimators of the population mean from a single drawn sample.

Single-phase estimators take the known auxiliary mean ``Xbar``; the ``*_2p``
variants replace it with the first-phase mean x̄'.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import DrawnSample


class EstimationError(ValueError):
    """The estimator is undefined on this sample."""


@dataclass(frozen=True)
class ClassParams:
    alpha1: float = 1.0
    alpha2: float = 0.0
    eta: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        if self.eta == 0:
            raise ValueError("eta must be nonzero")


def hh_mean(s: DrawnSample) -> float:
    """Hansen-Hurwitz mean: respondent and sub-sample means weighted by n1/n and n2/n."""
    if s.n1 == 0 and s.h2 == 0:
        raise EstimationError("no observed y values (n1 = 0 and h2 = 0)")
    if s.n2 > 0 and s.h2 == 0:
        raise EstimationError("non-respondents present but none sub-sampled")
    total = 0.0
    if s.n1:
        total += s.n1 * s.resp_y.mean()
    if s.n2:
        total += s.n2 * s.sub_y.mean()
    return float(total / s.n)


def _nonzero_xbar(s: DrawnSample) -> float:
    xbar = s.xbar
    if xbar == 0:
        raise EstimationError("sample mean of x is zero")
    return xbar


def regression_slope(s: DrawnSample) -> float:
    """Least-squares slope of y on x over the n1 + h2 units with observed y."""
    y = np.concatenate([s.resp_y, s.sub_y])
    x = np.concatenate([s.resp_x, s.sub_x])
    if y.size < 2:
        raise EstimationError("slope undefined: fewer than 2 units with observed y")
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise EstimationError("slope undefined: zero x variance in fitting set")
    return float(dx @ (y - y.mean()) / sxx)


def ratio_estimate(s: DrawnSample, Xbar: float) -> float:
    return hh_mean(s) * Xbar / _nonzero_xbar(s)


def regression_estimate(s: DrawnSample, Xbar: float) -> float:
    return hh_mean(s) + regression_slope(s) * (Xbar - s.xbar)


def _scaled(p: ClassParams, top: float, xbar: float, lead: float) -> float:
    # lead * (η·top + λ)/(η·xbar + λ); η cancels when λ = 0
    if p.lam == 0:
        num, d = top, xbar
    else:
        num, d = p.eta * top + p.lam, p.eta * xbar + p.lam
    if d == 0:
        raise EstimationError("class estimator pole: eta*xbar + lambda = 0")
    return lead * num / d


def class_estimate(s: DrawnSample, Xbar: float, p: ClassParams) -> float:
    """[a1*ȳ* + a2*(X̄ - x̄)] * (ηX̄ + λ)/(ηx̄ + λ)."""
    xbar = s.xbar
    return _scaled(p, Xbar, xbar, p.alpha1 * hh_mean(s) + p.alpha2 * (Xbar - xbar))


def ratio_estimate_2p(s: DrawnSample) -> float:
    return hh_mean(s) * s.xbar_phase1 / _nonzero_xbar(s)


def regression_estimate_2p(s: DrawnSample) -> float:
    return hh_mean(s) + regression_slope(s) * (s.xbar_phase1 - s.xbar)


def class_estimate_2p(s: DrawnSample, p: ClassParams) -> float:
    """[a1*ȳ* + a2*(x̄' - x̄)] * (ηx̄' + λ)/(ηx̄ + λ)."""
    xp, xbar = s.xbar_phase1, s.xbar
    return _scaled(p, xp, xbar, p.alpha1 * hh_mean(s) + p.alpha2 * (xp - xbar))
