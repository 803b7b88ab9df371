"""Core grid-function and generalized-function representations.

Everything downstream works on two carriers: complex samples on a uniform
frequency grid (the regular part) and finite trains of weighted
derivative-of-delta atoms (the singular part).  All types are immutable
after construction and all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .exceptions import EivError, UnsupportedOrderError

__all__ = [
    "RealGrid",
    "StepFunction",
    "PiecewiseLinearFunction",
    "DiscreteDistribution",
    "GridSpectrum",
    "DeltaAtom",
    "DeltaTrain",
    "GeneralizedSpectrum",
    "pair",
    "derivative",
    "antiderivative_from_zero",
    "check_hermitian",
]


@dataclass(frozen=True)
class RealGrid:
    """Uniform grid with ``n_points`` samples on [lo, hi]."""

    lo: float
    hi: float
    n_points: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise EivError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.n_points < 3:
            raise EivError("grid needs at least 3 points")

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> "RealGrid":
        """Grid on [-half_width, half_width]; n_points must be odd so 0 is a sample."""
        if n_points % 2 == 0:
            raise EivError("symmetric grid needs an odd point count")
        return cls(-half_width, half_width, n_points)

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n_points - 1)

    @property
    def is_symmetric(self) -> bool:
        return self.lo == -self.hi and self.n_points % 2 == 1

    @cached_property
    def points(self) -> np.ndarray:
        if self.is_symmetric:
            # mirrored construction keeps 0 exact and x[-i] == -x[i] bit-for-bit
            m = (self.n_points - 1) // 2
            right = np.arange(1, m + 1) * (self.hi / m)
            pts = np.concatenate([-right[::-1], [0.0], right])
        else:
            pts = np.linspace(self.lo, self.hi, self.n_points)
        pts.setflags(write=False)
        return pts

    @property
    def zero_index(self) -> int:
        if not self.is_symmetric:
            raise EivError("zero index only defined for symmetric grids")
        return (self.n_points - 1) // 2


@dataclass(frozen=True)
class StepFunction:
    """Real step function: equals values[k] on [b_k, b_{k+1}), zero outside."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or v.ndim != 1 or len(b) != len(v) + 1:
            raise EivError("need N+1 breakpoints for N step values")
        if not np.all(np.diff(b) > 0):
            raise EivError("breakpoints must be strictly increasing")
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        idx = np.searchsorted(self.breakpoints, z, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.values))
        out = np.zeros(z.shape)
        out[inside] = self.values[idx[inside]]
        return out

    def integral(self) -> float:
        return float(np.sum(self.values * np.diff(self.breakpoints)))

    def midpoints_halfwidths(self) -> tuple[np.ndarray, np.ndarray]:
        b = self.breakpoints
        return (b[:-1] + b[1:]) / 2.0, np.diff(b) / 2.0

    def quadrature_samples(self, max_step: float) -> tuple[np.ndarray, np.ndarray]:
        """Sample on a jump-aligned grid, averaging left/right limits at
        interior jumps (support edges keep the one-sided inside value).

        With this sampling, composite trapezoid integration of the samples
        splits exactly into per-piece trapezoids of smooth integrands.
        """
        xs, vs = [], []
        b = self.breakpoints
        a = self.values
        for k in range(len(a)):
            n = max(2, math.ceil((b[k + 1] - b[k]) / max_step) + 1)
            seg = np.linspace(b[k], b[k + 1], n)
            val = np.full(n, a[k])
            if k > 0:
                val[0] = 0.5 * (a[k - 1] + a[k])
            if k < len(a) - 1:
                val[-1] = 0.5 * (a[k] + a[k + 1])
            if k:
                seg, val = seg[1:], val[1:]
            xs.append(seg)
            vs.append(val)
        return np.concatenate(xs), np.concatenate(vs)


@dataclass(frozen=True)
class PiecewiseLinearFunction:
    """Sum of truncated linear pieces: sum_m alpha_m (v - eps_m) 1{|v - t_m| < tau_m}.

    Pieces may overlap; the sum is the canonical object.
    """

    alphas: np.ndarray
    centers: np.ndarray
    offsets: np.ndarray
    halfwidths: np.ndarray

    def __post_init__(self):
        arrs = {}
        n = None
        for name in ("alphas", "centers", "offsets", "halfwidths"):
            a = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            a.setflags(write=False)
            arrs[name] = a
            if n is None:
                n = len(a)
            elif len(a) != n:
                raise EivError("piecewise-linear term arrays must share length")
        if np.any(arrs["halfwidths"] <= 0):
            raise EivError("halfwidths must be positive")
        for name, a in arrs.items():
            object.__setattr__(self, name, a)

    @property
    def n_terms(self) -> int:
        return len(self.alphas)

    @property
    def support(self) -> tuple[float, float]:
        return (
            float(np.min(self.centers - self.halfwidths)),
            float(np.max(self.centers + self.halfwidths)),
        )

    def __call__(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = np.zeros(v.shape)
        for a, t, e, tau in zip(self.alphas, self.centers, self.offsets, self.halfwidths):
            mask = np.abs(v - t) < tau
            out[mask] += a * (v[mask] - e)
        return out


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite discrete distribution (c_j, d_j) with sum c_j = 1 and mean zero.

    Mean zero reflects the centered-error convention; pass
    ``require_zero_mean=False`` only for shift experiments.
    """

    weights: np.ndarray
    locations: np.ndarray
    require_zero_mean: bool = True

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.weights, dtype=float))
        d = np.atleast_1d(np.asarray(self.locations, dtype=float))
        if len(c) != len(d):
            raise EivError("weights and locations must share length")
        if np.any(c <= 0):
            raise EivError("weights must be positive")
        if abs(c.sum() - 1.0) > 1e-9:
            raise EivError(f"weights must sum to 1, got {c.sum()!r}")
        if not np.all(np.diff(d) > 0):
            raise EivError("locations must be strictly increasing")
        if self.require_zero_mean and abs(float(c @ d)) > 1e-9:
            raise EivError(f"distribution mean must be 0, got {float(c @ d)!r}")
        c.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "weights", c)
        object.__setattr__(self, "locations", d)

    def mean(self) -> float:
        return float(self.weights @ self.locations)

    @classmethod
    def point_mass(cls, location: float = 0.0) -> "DiscreteDistribution":
        return cls(np.array([1.0]), np.array([location]), require_zero_mean=False)


@dataclass(frozen=True)
class GridSpectrum:
    """Complex samples on a frequency grid symmetric about 0."""

    grid: RealGrid
    values: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        if not self.grid.is_symmetric:
            raise EivError("spectra live on symmetric grids")
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise EivError("value count must match the grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values, hermitian: bool | None = None) -> "GridSpectrum":
        return GridSpectrum(
            self.grid, values, self.hermitian if hermitian is None else hermitian
        )


@dataclass(frozen=True)
class DeltaAtom:
    location: float
    order: int
    coeff: complex

    def __post_init__(self):
        if self.order < 0:
            raise EivError("atom order must be nonnegative")


@dataclass(frozen=True)
class DeltaTrain:
    """Finite train of weighted derivative-of-delta atoms."""

    atoms: tuple[DeltaAtom, ...] = ()

    def __post_init__(self):
        keys = [(a.location, a.order) for a in self.atoms]
        if len(set(keys)) != len(keys):
            raise EivError("(location, order) pairs must be unique")
        object.__setattr__(self, "atoms", tuple(self.atoms))

    @property
    def max_order(self) -> int:
        return max((a.order for a in self.atoms), default=0)

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        """Atom at -s, order k must carry the conjugate coefficient of (+s, k)."""
        table = {(a.location, a.order): a.coeff for a in self.atoms}
        for (s, k), c in table.items():
            mirror = table.get((-s, k))
            if mirror is None or abs(mirror - np.conj(c)) > tol:
                return False
        return True


def _empty_train() -> DeltaTrain:
    return DeltaTrain(())


@dataclass(frozen=True)
class GeneralizedSpectrum:
    """Regular grid part plus a finite singular train on the same axis."""

    regular: GridSpectrum
    singular: DeltaTrain = field(default_factory=_empty_train)

    def __post_init__(self):
        lo, hi = self.regular.grid.lo, self.regular.grid.hi
        for a in self.singular.atoms:
            if not lo <= a.location <= hi:
                raise EivError(
                    f"atom at {a.location} falls outside the grid [{lo}, {hi}]"
                )


def pair(spectrum: GeneralizedSpectrum | GridSpectrum, test) -> complex:
    """Evaluate the functional (spectrum, test).

    Trapezoid quadrature for the regular part; exact derivative evaluation
    for the atoms, with the (-1)^k convention for derivative-of-delta.
    ``test`` must be callable on arrays and expose ``deriv_at(x, order)``
    and ``max_deriv_order``.
    """
    if isinstance(spectrum, GridSpectrum):
        spectrum = GeneralizedSpectrum(spectrum)
    pts = spectrum.regular.grid.points
    total = complex(np.trapezoid(spectrum.regular.values * test(pts), pts))
    for atom in spectrum.singular.atoms:
        if atom.order > test.max_deriv_order:
            raise UnsupportedOrderError(
                f"atom of order {atom.order} exceeds supported derivative "
                f"order {test.max_deriv_order}"
            )
        total += (-1.0) ** atom.order * atom.coeff * test.deriv_at(atom.location, atom.order)
    return total


def derivative(s: GridSpectrum) -> GridSpectrum:
    """Grid derivative: central differences inside, one-sided O(h^2) at the ends."""
    v = s.values
    h = s.grid.h
    dv = np.empty_like(v)
    dv[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    dv[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    dv[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return s.with_values(dv, hermitian=False)


def antiderivative_from_zero(s: GridSpectrum) -> GridSpectrum:
    """Cumulative trapezoid of the samples, anchored at the grid's center 0."""
    i0 = s.grid.zero_index
    x = s.grid.points
    v = s.values
    right = cumulative_trapezoid(v[i0:], x[i0:], initial=0.0)
    left = cumulative_trapezoid(v[i0::-1], x[i0::-1], initial=0.0)[::-1]
    return s.with_values(np.concatenate([left[:-1], right]), hermitian=False)


def check_hermitian(s: GridSpectrum, tol: float) -> bool:
    """True iff values(-zeta) == conj(values(zeta)) within tol, sup norm."""
    if not s.grid.is_symmetric:
        raise EivError("hermitian check needs a symmetric grid")
    return bool(np.max(np.abs(s.values[::-1] - np.conj(s.values))) <= tol)
