"""First-order bias and MSE formulas, optimum class constants and PRE.

Notation: ``f = 1/n - 1/N`` (single-phase f.p.c.), ``fp = 1/n' - 1/N`` and
``g = 1/n - 1/n'`` (phase gap), so that ``f = fp + g``. The non-response
addend ``(k-1)/n * W2 * S2_Y2`` appears in every MSE.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

from .estimators import ClassParams
from .population import PopulationParams


class TheoryError(ValueError):
    pass


@dataclass(frozen=True)
class MsePiece:
    """An MSE (or variance) together with its labelled addends."""

    components: Dict[str, float] = field(default_factory=dict)

    @property
    def value(self) -> float:
        return float(sum(self.components.values()))

    def __float__(self) -> float:
        return self.value


def _fpc(n: float, N: float) -> float:
    return 1.0 / n - 1.0 / N


def _check_n(p: PopulationParams, n: int, k: float) -> None:
    if not 0 < n <= p.N:
        raise TheoryError(f"need 0 < n <= N, got n={n}, N={p.N}")
    if k < 1:
        raise TheoryError(f"k={k} must be >= 1")


def _check_2p(p: PopulationParams, n_prime: int, n: int, k: float) -> None:
    _check_n(p, n, k)
    if not n <= n_prime <= p.N:
        raise TheoryError(f"need n <= n' <= N, got n={n}, n'={n_prime}, N={p.N}")


def nonresponse_term(p: PopulationParams, n: int, k: float) -> float:
    return (k - 1.0) / n * p.W2 * p.S2_Y2


def tau(eta: float, lam: float, Xbar: float) -> float:
    """ηX̄/(ηX̄ + λ)."""
    if eta == 0:
        raise TheoryError("eta must be nonzero")
    d = eta * Xbar + lam
    if d == 0:
        raise TheoryError("tau undefined: eta*Xbar + lambda = 0")
    return eta * Xbar / d


# -- classical estimators -------------------------------------------------


def var_hh(p: PopulationParams, n: int, k: float) -> MsePiece:
    _check_n(p, n, k)
    return MsePiece({
        "sampling": _fpc(n, p.N) * p.S2_Y,
        "nonresponse": nonresponse_term(p, n, k),
    })


def mse_ratio(p: PopulationParams, n: int, k: float) -> MsePiece:
    _check_n(p, n, k)
    shape = p.C_Y ** 2 + p.C_X ** 2 - 2 * p.rho * p.C_X * p.C_Y
    return MsePiece({
        "sampling": _fpc(n, p.N) * p.Ybar ** 2 * shape,
        "nonresponse": nonresponse_term(p, n, k),
    })


def mse_regression(p: PopulationParams, n: int, k: float) -> MsePiece:
    _check_n(p, n, k)
    return MsePiece({
        "sampling": _fpc(n, p.N) * p.Ybar ** 2 * p.C_Y ** 2 * (1 - p.rho ** 2),
        "nonresponse": nonresponse_term(p, n, k),
    })


def mse_ratio_2p(p: PopulationParams, n_prime: int, n: int, k: float) -> MsePiece:
    _check_2p(p, n_prime, n, k)
    Y2 = p.Ybar ** 2
    shape = p.C_Y ** 2 + p.C_X ** 2 - 2 * p.rho * p.C_X * p.C_Y
    return MsePiece({
        "phase1": Y2 * _fpc(n_prime, p.N) * p.C_Y ** 2,
        "phase2": Y2 * _fpc(n, n_prime) * shape,
        "nonresponse": nonresponse_term(p, n, k),
    })


def mse_regression_2p(p: PopulationParams, n_prime: int, n: int, k: float) -> MsePiece:
    # first-phase term carries 1/n' - 1/N, the second 1/n - 1/n'
    _check_2p(p, n_prime, n, k)
    Y2 = p.Ybar ** 2
    return MsePiece({
        "phase1": Y2 * _fpc(n_prime, p.N) * p.C_Y ** 2,
        "phase2": Y2 * _fpc(n, n_prime) * p.C_Y ** 2 * (1 - p.rho ** 2),
        "nonresponse": nonresponse_term(p, n, k),
    })


# -- proposed class, known X̄ ---------------------------------------------


def bias_class(p: PopulationParams, n: int, k: float, cp: ClassParams) -> float:
    _check_n(p, n, k)
    t = tau(cp.eta, cp.lam, p.Xbar)
    f = _fpc(n, p.N)
    CX, CY = p.C_X, p.C_Y
    return (p.Ybar * (cp.alpha1 - 1)
            + f * (cp.alpha1 * p.Ybar * (t * t * CX * CX - t * p.rho * CX * CY)
                   + cp.alpha2 * p.Xbar * t * CX * CX))


def mse_class(p: PopulationParams, n: int, k: float, cp: ClassParams) -> float:
    _check_n(p, n, k)
    t = tau(cp.eta, cp.lam, p.Xbar)
    f = _fpc(n, p.N)
    a1, a2 = cp.alpha1, cp.alpha2
    Y, X, CX, CY, r = p.Ybar, p.Xbar, p.C_X, p.C_Y, p.rho
    return (Y * Y * (a1 - 1) ** 2
            + f * (a1 * a1 * Y * Y * (CY * CY + t * t * CX * CX - 2 * t * r * CX * CY)
                   + a2 * a2 * X * X * CX * CX
                   - 2 * a1 * a2 * Y * X * CX * (r * CY - t * CX))
            + a1 * a1 * nonresponse_term(p, n, k))


def _alpha1_denominator(p: PopulationParams, n: int, k: float, gap: float) -> float:
    """1 + f*C_Y² - gap*ρ²C_Y² + (k-1)/n*W2*S2_Y2/Ȳ².

    ``gap`` is f for known X̄ and 1/n - 1/n' for two-phase sampling.
    """
    if p.C_X <= 0:
        raise TheoryError("optimum constants need C_X > 0")
    f = _fpc(n, p.N)
    d = (1 + f * p.C_Y ** 2 - gap * p.rho ** 2 * p.C_Y ** 2
         + nonresponse_term(p, n, k) / p.Ybar ** 2)
    if d <= 0:
        raise TheoryError("optimum alpha1 denominator is not positive")
    return d


def _alpha2(p: PopulationParams, a1: float, t: float) -> float:
    return a1 * p.Ybar * (p.rho * p.C_Y - t * p.C_X) / (p.Xbar * p.C_X)


def optimum_alphas(p: PopulationParams, n: int, k: float,
                   eta: float = 1.0, lam: float = 0.0) -> Tuple[float, float]:
    _check_n(p, n, k)
    a1 = 1.0 / _alpha1_denominator(p, n, k, _fpc(n, p.N))
    return a1, _alpha2(p, a1, tau(eta, lam, p.Xbar))


def optimum_class_params(p: PopulationParams, n: int, k: float,
                         eta: float = 1.0, lam: float = 0.0) -> ClassParams:
    a1, a2 = optimum_alphas(p, n, k, eta, lam)
    return ClassParams(a1, a2, eta, lam)


def min_mse_class(p: PopulationParams, n: int, k: float) -> float:
    _check_n(p, n, k)
    return mse_regression(p, n, k).value / _alpha1_denominator(p, n, k, _fpc(n, p.N))


# -- proposed class, two-phase --------------------------------------------


def bias_class_2p(p: PopulationParams, n_prime: int, n: int, k: float,
                  cp: ClassParams) -> float:
    # τ² on the α1·Ȳ·C_X² term, as in the known-X̄ case; reduces to bias_class at n' = N
    _check_2p(p, n_prime, n, k)
    t = tau(cp.eta, cp.lam, p.Xbar)
    g = _fpc(n, n_prime)
    CX, CY = p.C_X, p.C_Y
    return (p.Ybar * (cp.alpha1 - 1)
            + g * (cp.alpha1 * p.Ybar * (t * t * CX * CX - t * p.rho * CX * CY)
                   + cp.alpha2 * p.Xbar * t * CX * CX))


def mse_class_2p(p: PopulationParams, n_prime: int, n: int, k: float,
                 cp: ClassParams) -> float:
    _check_2p(p, n_prime, n, k)
    t = tau(cp.eta, cp.lam, p.Xbar)
    f, g = _fpc(n, p.N), _fpc(n, n_prime)
    a1, a2 = cp.alpha1, cp.alpha2
    Y, X, CX, CY, r = p.Ybar, p.Xbar, p.C_X, p.C_Y, p.rho
    return (Y * Y * (a1 - 1) ** 2
            + a1 * a1 * (Y * Y * (f * CY * CY + g * (t * t * CX * CX - 2 * t * r * CX * CY))
                         + nonresponse_term(p, n, k))
            + g * (a2 * a2 * X * X * CX * CX
                   + 2 * a1 * a2 * X * Y * (t * CX * CX - r * CX * CY)))


def optimum_alphas_2p(p: PopulationParams, n_prime: int, n: int, k: float,
                      eta: float = 1.0, lam: float = 0.0) -> Tuple[float, float]:
    _check_2p(p, n_prime, n, k)
    a1 = 1.0 / _alpha1_denominator(p, n, k, _fpc(n, n_prime))
    return a1, _alpha2(p, a1, tau(eta, lam, p.Xbar))


def optimum_class_params_2p(p: PopulationParams, n_prime: int, n: int, k: float,
                            eta: float = 1.0, lam: float = 0.0) -> ClassParams:
    a1, a2 = optimum_alphas_2p(p, n_prime, n, k, eta, lam)
    return ClassParams(a1, a2, eta, lam)


def min_mse_class_2p(p: PopulationParams, n_prime: int, n: int, k: float) -> float:
    _check_2p(p, n_prime, n, k)
    return (mse_regression_2p(p, n_prime, n, k).value
            / _alpha1_denominator(p, n, k, _fpc(n, n_prime)))


def pre(mse_estimator: float, mse_baseline: float) -> float:
    """Percentage relative efficiency, 100 * MSE(baseline) / MSE(estimator)."""
    mse_estimator = float(mse_estimator)
    if mse_estimator <= 0:
        raise TheoryError("PRE undefined for a non-positive estimator MSE")
    return 100.0 * float(mse_baseline) / mse_estimator
