"""Finite populations split into a response and a non-response group."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import IO, Iterable

import numpy as np


class PopulationError(ValueError):
    """Raised for invalid populations or infeasible synthesis targets."""


def round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


@dataclass(frozen=True, eq=False)
class FinitePopulation:
    """N units with study value ``y``, auxiliary value ``x`` and a group flag.

    ``nonresp[i]`` is True when unit ``i`` belongs to the non-response group.
    """

    y: np.ndarray
    x: np.ndarray
    nonresp: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        g = np.asarray(self.nonresp, dtype=bool)
        if y.ndim != 1 or y.shape != x.shape or y.shape != g.shape:
            raise PopulationError("y, x and group flags must be 1-d arrays of equal length")
        if y.size == 0:
            raise PopulationError("no units")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise PopulationError("y and x must be finite")
        if g.all():
            raise PopulationError("population has no respondent units")
        for name, arr in (("y", y), ("x", x), ("nonresp", g)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def N(self) -> int:
        return self.y.size

    @property
    def n_nonresp(self) -> int:
        return int(self.nonresp.sum())

    @property
    def W2(self) -> float:
        return self.n_nonresp / self.N

    def to_csv(self, stream: IO[str]) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["y", "x", "group"])
        for yi, xi, gi in zip(self.y, self.x, self.nonresp):
            w.writerow([repr(float(yi)), repr(float(xi)), "NR" if gi else "R"])


@dataclass(frozen=True)
class PopulationParams:
    """Population quantities every MSE formula is written in.

    Mean squares use the N-1 divisor. ``S2_Y2`` is the mean square of y in the
    non-response group and ``W2`` the share of that group.
    """

    N: int
    Ybar: float
    Xbar: float
    S2_Y: float
    S2_X: float
    rho: float
    W2: float = 0.0
    S2_Y2: float = 0.0
    C_Y: float = field(default=math.nan)
    C_X: float = field(default=math.nan)

    def __post_init__(self):
        if self.Xbar == 0:
            raise PopulationError("Xbar must be nonzero")
        if self.S2_Y < 0 or self.S2_X < 0 or self.S2_Y2 < 0:
            raise PopulationError("mean squares must be non-negative")
        if not -1.0 <= self.rho <= 1.0:
            raise PopulationError(f"rho={self.rho} outside [-1, 1]")
        if not 0.0 <= self.W2 <= 1.0:
            raise PopulationError(f"W2={self.W2} outside [0, 1]")
        if math.isnan(self.C_Y):
            object.__setattr__(self, "C_Y", math.sqrt(self.S2_Y) / abs(self.Ybar) if self.Ybar else math.inf)
        if math.isnan(self.C_X):
            object.__setattr__(self, "C_X", math.sqrt(self.S2_X) / abs(self.Xbar))

    @classmethod
    def from_cv(cls, N, Ybar, Xbar, C_Y, C_X, rho, W2=0.0, S2_Y2=0.0) -> "PopulationParams":
        """Build from coefficients of variation instead of mean squares."""
        return cls(
            N=N, Ybar=Ybar, Xbar=Xbar,
            S2_Y=(C_Y * Ybar) ** 2, S2_X=(C_X * Xbar) ** 2,
            rho=rho, W2=W2, S2_Y2=S2_Y2, C_Y=C_Y, C_X=C_X,
        )

    def with_W2(self, W2: float) -> "PopulationParams":
        return replace(self, W2=W2)

    def as_dict(self) -> dict:
        return {
            "N": self.N, "Ybar": self.Ybar, "Xbar": self.Xbar,
            "S2_Y": self.S2_Y, "S2_X": self.S2_X, "C_Y": self.C_Y, "C_X": self.C_X,
            "rho": self.rho, "W2": self.W2, "S2_Y2": self.S2_Y2,
        }


def compute_params(pop: FinitePopulation) -> PopulationParams:
    y, x, g = pop.y, pop.x, pop.nonresp
    N = pop.N
    if N < 2:
        raise PopulationError("need at least 2 units for mean squares")
    Xbar = float(x.mean())
    if Xbar == 0:
        raise PopulationError("Xbar = 0: ratio-type estimators are undefined")
    n2 = pop.n_nonresp
    if n2 == N:
        raise PopulationError("population has no respondent units")
    Ybar = float(y.mean())
    S2_Y = float(y.var(ddof=1))
    S2_X = float(x.var(ddof=1))
    if S2_Y > 0 and S2_X > 0:
        cov = float(((y - Ybar) * (x - Xbar)).sum() / (N - 1))
        rho = float(np.clip(cov / math.sqrt(S2_Y * S2_X), -1.0, 1.0))
    else:
        # correlation is undefined for a constant variable
        rho = 0.0
    S2_Y2 = float(y[g].var(ddof=1)) if n2 > 1 else 0.0
    return PopulationParams(N=N, Ybar=Ybar, Xbar=Xbar, S2_Y=S2_Y, S2_X=S2_X,
                            rho=rho, W2=n2 / N, S2_Y2=S2_Y2)


_GROUP_LABELS = {"R": False, "NR": True}


def load_population(stream: Iterable[str]) -> FinitePopulation:
    """Parse a ``y,x[,group]`` CSV stream; group labels are ``R`` or ``NR``."""
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise PopulationError("no units") from None
    for col in ("y", "x"):
        if col not in header:
            raise PopulationError(f"missing column {col!r} in header")
    iy, ix = header.index("y"), header.index("x")
    ig = header.index("group") if "group" in header else None
    ys, xs, gs = [], [], []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        try:
            ys.append(float(row[iy]))
            xs.append(float(row[ix]))
        except (ValueError, IndexError):
            raise PopulationError(f"line {lineno}: non-numeric y/x value") from None
        if ig is None:
            gs.append(False)
        else:
            label = row[ig].strip().upper() if ig < len(row) else ""
            if label not in _GROUP_LABELS:
                raise PopulationError(f"line {lineno}: unknown group label {label!r}")
            gs.append(_GROUP_LABELS[label])
    if not ys:
        raise PopulationError("no units")
    return FinitePopulation(np.array(ys), np.array(xs), np.array(gs))


def _standardize(v: np.ndarray) -> np.ndarray:
    return (v - v.mean()) / v.std(ddof=1)


def _greedy_group(y: np.ndarray, size: int, target: float, rng: np.random.Generator,
                  rtol: float = 0.01) -> np.ndarray:
    """Pick ``size`` units whose mean square of y is close to ``target``.

    Starts from a random subset and applies best-improvement swaps.
    """
    N = y.size
    perm = rng.permutation(N)
    inside, outside = perm[:size].copy(), perm[size:].copy()
    if size < 2 or size == N:
        return inside
    for _ in range(4 * size):
        yi, yo = y[inside], y[outside]
        s1, s2 = yi.sum(), (yi ** 2).sum()
        cur = abs((s2 - s1 ** 2 / size) / (size - 1) - target)
        if cur <= rtol * target:
            break
        ns1 = s1 - yi[:, None] + yo[None, :]
        ns2 = s2 - yi[:, None] ** 2 + yo[None, :] ** 2
        err = np.abs((ns2 - ns1 ** 2 / size) / (size - 1) - target)
        a, b = np.unravel_index(np.argmin(err), err.shape)
        if err[a, b] >= cur:
            break
        inside[a], outside[b] = outside[b], inside[a]
    return inside


def synthesize_population(target: PopulationParams, seed: int) -> FinitePopulation:
    """Generate a population whose moments match ``target``.

    Totals (means, mean squares, correlation) are hit to round-off through affine
    maps of Gaussian draws. The non-response group is chosen greedily and then
    rescaled about its own mean so its mean square equals ``target.S2_Y2``.
    """
    N = int(target.N)
    if N < 4:
        raise PopulationError("synthesis needs N >= 4")
    if not 0.0 <= target.W2 < 1.0:
        raise PopulationError(f"W2={target.W2} must lie in [0, 1)")
    if target.S2_Y <= 0 or target.S2_X <= 0:
        raise PopulationError("synthesis needs positive S2_Y and S2_X")
    n2 = round_half_up(target.W2 * N)
    if n2 >= N:
        raise PopulationError(f"W2*N rounds to {n2} non-respondents, leaving no respondents")
    if target.S2_Y2 > 0 and n2 < 2:
        raise PopulationError(
            f"infeasible target: W2*N rounds to {n2} non-respondent unit(s), "
            "but a positive S2_Y2 needs at least 2")
    if n2 >= 2 and (n2 - 1) * target.S2_Y2 >= (N - 1) * target.S2_Y:
        raise PopulationError(
            "infeasible target: non-response group sum of squares would exceed the "
            "population total ((W2*N - 1)*S2_Y2 >= (N - 1)*S2_Y)")

    rng = np.random.default_rng(seed)
    Ybar, SY = target.Ybar, math.sqrt(target.S2_Y)
    y = Ybar + SY * _standardize(rng.standard_normal(N))
    noise = rng.standard_normal(N)

    group = np.zeros(N, dtype=bool)
    if n2 > 0:
        idx = _greedy_group(y, n2, target.S2_Y2, rng)
        group[idx] = True
    if n2 >= 2:
        # Scale the group about its mean by c so that, after the global affine
        # map back to (Ybar, S2_Y), its mean square equals the target.
        yg = y[group]
        s2g = yg.var(ddof=1)
        q = target.S2_Y2 / target.S2_Y
        ss_total = ((y - y.mean()) ** 2).sum()
        A = (n2 - 1) * s2g
        B = ss_total - A
        if s2g > 0 and B > 0:
            c = math.sqrt(q * B / (s2g * ((N - 1) - q * (n2 - 1))))
            y[group] = yg.mean() + c * (yg - yg.mean())
        elif target.S2_Y2 > 0:
            raise PopulationError("could not construct non-response group with the target mean square")
        y = Ybar + SY * _standardize(y)

    zy = _standardize(y)
    basis = np.column_stack([np.ones(N), zy])
    coef, *_ = np.linalg.lstsq(basis, noise, rcond=None)
    resid = noise - basis @ coef
    r = float(target.rho)
    if abs(r) < 1.0:
        z = r * zy + math.sqrt(1.0 - r * r) * _standardize(resid)
    else:
        z = r * zy
    x = target.Xbar + math.sqrt(target.S2_X) * z
    return FinitePopulation(y, x, group)
