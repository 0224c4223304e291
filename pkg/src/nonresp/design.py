"""Sampling plans and their random realization.

Single-phase or two-phase SRSWOR, a two-group (or Bernoulli) non-response
mechanism, and Hansen-Hurwitz follow-up of a sub-sample of non-respondents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .population import FinitePopulation, round_half_up


class DesignError(ValueError):
    pass


@dataclass(frozen=True)
class SinglePhase:
    n: int


@dataclass(frozen=True)
class TwoPhase:
    n_prime: int
    n: int


@dataclass(frozen=True)
class GroupDeterministic:
    """A sampled unit responds iff it belongs to the population's response group."""


@dataclass(frozen=True)
class BernoulliPerUnit:
    """Each sampled unit fails to respond independently with probability ``p``."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DesignError(f"non-response probability p={self.p} outside [0, 1]")


Phase = Union[SinglePhase, TwoPhase]
NonResponseMode = Union[GroupDeterministic, BernoulliPerUnit]


@dataclass(frozen=True)
class Design:
    phase: Phase
    k: float = 1.0
    nr_mode: NonResponseMode = field(default_factory=GroupDeterministic)

    def __post_init__(self):
        if self.k < 1:
            raise DesignError(f"sub-sampling factor k={self.k} must be >= 1")
        if isinstance(self.phase, TwoPhase):
            if not 2 <= self.phase.n < self.phase.n_prime:
                raise DesignError("two-phase design needs 2 <= n < n_prime")
        elif self.phase.n < 2:
            raise DesignError("single-phase design needs n >= 2")

    @property
    def n(self) -> int:
        return self.phase.n

    @property
    def n_prime(self) -> Optional[int]:
        return self.phase.n_prime if self.two_phase else None

    @property
    def two_phase(self) -> bool:
        return isinstance(self.phase, TwoPhase)

    def validate_for(self, N: int) -> None:
        top = self.phase.n_prime if self.two_phase else self.phase.n
        if top > N:
            raise DesignError(f"sample size {top} exceeds population size N={N}")

    def as_dict(self) -> dict:
        d = {"n": self.n, "k": self.k}
        if self.two_phase:
            d["n_prime"] = self.phase.n_prime
        if isinstance(self.nr_mode, BernoulliPerUnit):
            d["nr_mode"] = {"bernoulli": self.nr_mode.p}
        else:
            d["nr_mode"] = "group"
        return d


@dataclass(frozen=True, eq=False)
class DrawnSample:
    """One realized sample.

    ``resp_*`` hold the n1 respondents, ``sub_*`` the h2 interviewed
    non-respondents and ``nonsub_x`` the x-values of the n2 - h2 non-respondents
    that were not followed up. ``phase1_x`` holds all n' first-phase x-values
    in two-phase designs.
    """

    resp_y: np.ndarray
    resp_x: np.ndarray
    sub_y: np.ndarray
    sub_x: np.ndarray
    nonsub_x: np.ndarray
    phase1_x: Optional[np.ndarray] = None

    @property
    def n1(self) -> int:
        return self.resp_y.size

    @property
    def h2(self) -> int:
        return self.sub_y.size

    @property
    def n2(self) -> int:
        return self.sub_y.size + self.nonsub_x.size

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def x_all(self) -> np.ndarray:
        return np.concatenate([self.resp_x, self.sub_x, self.nonsub_x])

    @property
    def xbar(self) -> float:
        return float(self.x_all.mean())

    @property
    def xbar_phase1(self) -> float:
        if self.phase1_x is None:
            raise DesignError("sample has no phase-one auxiliary values")
        return float(self.phase1_x.mean())

    @property
    def no_respondents(self) -> bool:
        return self.n1 == 0


def draw_srswor(N: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n distinct indices from range(N), every subset equally likely."""
    if not 1 <= n <= N:
        raise DesignError(f"cannot draw n={n} distinct units from N={N}")
    return rng.choice(N, size=n, replace=False)


def subsample_size(n2: int, k: float) -> int:
    if n2 == 0:
        return 0
    return min(n2, max(1, round_half_up(n2 / k)))


def realize(design: Design, pop: FinitePopulation, rng: np.random.Generator) -> DrawnSample:
    design.validate_for(pop.N)
    phase1_x = None
    if design.two_phase:
        first = draw_srswor(pop.N, design.phase.n_prime, rng)
        idx = first[draw_srswor(first.size, design.phase.n, rng)]
        phase1_x = pop.x[first]
    else:
        idx = draw_srswor(pop.N, design.phase.n, rng)

    if isinstance(design.nr_mode, BernoulliPerUnit):
        nr = rng.random(idx.size) < design.nr_mode.p
    else:
        nr = pop.nonresp[idx]
    resp, nonresp = idx[~nr], idx[nr]
    h2 = subsample_size(nonresp.size, design.k)
    if h2:
        pick = np.zeros(nonresp.size, dtype=bool)
        pick[draw_srswor(nonresp.size, h2, rng)] = True
        sub, rest = nonresp[pick], nonresp[~pick]
    else:
        sub, rest = nonresp[:0], nonresp
    return DrawnSample(
        resp_y=pop.y[resp], resp_x=pop.x[resp],
        sub_y=pop.y[sub], sub_x=pop.x[sub],
        nonsub_x=pop.x[rest], phase1_x=phase1_x,
    )
