"""Smooth compactly supported weighting functions.

The library provides the classical cutoff/bump pair, plateau windows built
by mollifying interval indicators, polynomial-times-plateau weights whose
derivatives at the center isolate a single order, and paired bumps used to
probe a spectrum near symmetric frequencies.  First derivatives are closed
form; higher orders use Richardson-extrapolated central differences, up to
order 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .exceptions import (
    ConstructionDegenerateError,
    EivError,
    InvalidIntervalError,
    OverlapError,
    UnsupportedOrderError,
)

__all__ = [
    "TestFunction",
    "Cut",
    "Bump",
    "IntervalMollified",
    "PolyBump",
    "PairBump",
    "Product",
    "Scaled",
    "Shifted",
    "DerivativeOf",
    "WeightedWindow",
    "eval_cut",
    "eval_bump",
    "bump_norm_constant",
    "make_interval_mollified",
    "make_poly_bump",
    "make_pair_bump",
    "symmetric_union",
]

MAX_DERIV_ORDER = 4


def eval_cut(zeta) -> np.ndarray:
    """Smooth cutoff exp(-1/(1-z^2)) on (-1, 1), exactly 0 outside."""
    z = np.asarray(zeta, dtype=float)
    z1 = np.atleast_1d(z)
    out = np.zeros(z1.shape)
    inside = np.abs(z1) < 1.0
    zi = z1[inside]
    out[inside] = np.exp(-1.0 / (1.0 - zi * zi))
    return out.reshape(z.shape)


def _eval_cut_d1(zeta) -> np.ndarray:
    z = np.asarray(zeta, dtype=float)
    z1 = np.atleast_1d(z)
    out = np.zeros(z1.shape)
    inside = np.abs(z1) < 1.0
    zi = z1[inside]
    u = 1.0 - zi * zi
    out[inside] = np.exp(-1.0 / u) * (-2.0 * zi / (u * u))
    return out.reshape(z.shape)


def _c(x) -> complex:
    """Collapse a scalar-like (possibly 0-d array) value to a Python complex."""
    return complex(np.asarray(x).reshape(()))


@lru_cache(maxsize=1)
def bump_norm_constant() -> float:
    """Integral of the cutoff over [-1, 1], computed once by dense trapezoid."""
    x = np.linspace(-1.0, 1.0, 400_001)
    return float(np.trapezoid(eval_cut(x), x))


def eval_bump(zeta) -> np.ndarray:
    """Cutoff normalized to unit integral over [-1, 1]."""
    return eval_cut(zeta) / bump_norm_constant()


def _richardson_d1(f, x: float, h: float) -> complex:
    d1 = (f(x + h) - f(x - h)) / (2.0 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


class TestFunction:
    """Base class: compactly supported, evaluable together with derivatives.

    Subclasses set ``support`` and implement ``_value`` (vectorized) and,
    where a closed form exists, ``_d1``.
    """

    support: tuple[float, float] = (-np.inf, np.inf)
    max_deriv_order: int = MAX_DERIV_ORDER

    def _value(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        scalar = z.ndim == 0
        out = self._value(np.atleast_1d(z))
        return out[0] if scalar else out

    def _d1(self, z):
        h = self._fd_step()
        return _richardson_d1(self, np.asarray(z, dtype=float), h)

    def _fd_step(self) -> float:
        lo, hi = self.support
        width = hi - lo if np.isfinite(hi - lo) else 2.0
        return 1e-3 * width

    def deriv1(self, z):
        """Vectorized first derivative (closed form where available)."""
        return self._d1(z)

    def deriv_at(self, z: float, order: int) -> complex:
        if order > self.max_deriv_order:
            raise UnsupportedOrderError(
                f"derivative order {order} exceeds supported {self.max_deriv_order}"
            )
        if order == 0:
            return _c(self(z))
        if order == 1:
            return _c(self._d1(float(z)))
        h = self._fd_step()
        f = lambda x: self.deriv_at(x, order - 1)
        return _c(_richardson_d1(f, float(z), h))

    def is_even(self, n_samples: int = 1001, tol: float = 1e-9) -> bool:
        lo, hi = self.support
        half = max(abs(lo), abs(hi))
        z = np.linspace(0.0, half, n_samples)
        return bool(np.max(np.abs(self(z) - self(-z))) <= tol)


class Cut(TestFunction):
    """The cutoff itself, supported on [-1, 1]."""

    support = (-1.0, 1.0)

    def _value(self, z):
        return eval_cut(z)

    def _d1(self, z):
        return _eval_cut_d1(z)


@dataclass
class Bump(TestFunction):
    """Normalized cutoff mapped onto [center - hw, center + hw].

    Composed as f_bump((z - center)/halfwidth): values stay in [0, 1) and
    the mass equals the halfwidth.
    """

    center: float = 0.0
    halfwidth: float = 1.0

    def __post_init__(self):
        if self.halfwidth <= 0:
            raise EivError("halfwidth must be positive")
        self.support = (self.center - self.halfwidth, self.center + self.halfwidth)

    def _value(self, z):
        return eval_bump((z - self.center) / self.halfwidth)

    def _d1(self, z):
        u = (np.asarray(z, dtype=float) - self.center) / self.halfwidth
        return _eval_cut_d1(u) / (bump_norm_constant() * self.halfwidth)


class IntervalMollified(TestFunction):
    """Plateau window: 1 on the interval union V, 0 outside its eps-enlargement.

    Built as the mollification of the eps/2-enlarged indicator by a bump of
    half-width eps/2, so the plateau equals 1 exactly on V and the function
    is exactly 0 outside U = V +- eps.  Evaluation goes through the
    mollifier's cumulative integral, precomputed densely and interpolated
    with a cubic spline (pairing integrals sample these heavily).
    """

    def __init__(self, intervals, eps: float, _validate_separation: bool = True):
        iv = sorted((float(a), float(b)) for a, b in intervals)
        if not iv:
            raise InvalidIntervalError("need at least one interval")
        if eps <= 0:
            raise InvalidIntervalError("eps must be positive")
        # drop exact duplicates (a symmetric-about-0 interval equals its mirror)
        dedup = [iv[0]]
        for a, b in iv[1:]:
            if (a, b) != dedup[-1]:
                dedup.append((a, b))
        for a, b in dedup:
            if not a < b:
                raise InvalidIntervalError(f"degenerate interval [{a}, {b}]")
        if _validate_separation:
            for (a1, b1), (a2, b2) in zip(dedup, dedup[1:]):
                if a2 - b1 <= 2 * eps:
                    raise InvalidIntervalError(
                        f"gap between [{a1},{b1}] and [{a2},{b2}] must exceed 2*eps"
                    )
        self.intervals = tuple(dedup)
        self.eps = float(eps)
        self.support = (dedup[0][0] - eps, dedup[-1][1] + eps)
        half = eps / 2.0
        u = np.linspace(-half, half, 4001)
        moll = eval_bump(u / half) / half
        cdf = np.concatenate([[0.0], np.cumsum((moll[1:] + moll[:-1]) / 2) * (u[1] - u[0])])
        cdf /= cdf[-1]
        self._half = half
        self._cdf_spline = CubicSpline(u, cdf)
        self._moll_scale = 1.0 / (half * bump_norm_constant())

    def _cdf(self, t: np.ndarray) -> np.ndarray:
        out = np.clip(self._cdf_spline(np.clip(t, -self._half, self._half)), 0.0, 1.0)
        out[t <= -self._half] = 0.0
        out[t >= self._half] = 1.0
        return out

    def _moll(self, t: np.ndarray) -> np.ndarray:
        return eval_cut(np.asarray(t) / self._half) * self._moll_scale

    def _value(self, z):
        out = np.zeros(z.shape)
        for a, b in self.intervals:
            out += self._cdf(z - (a - self._half)) - self._cdf(z - (b + self._half))
        return out

    def _d1(self, z):
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape)
        for a, b in self.intervals:
            out += self._moll(z - (a - self._half)) - self._moll(z - (b + self._half))
        return out


def symmetric_union(positive_intervals) -> list[tuple[float, float]]:
    """Mirror positive-axis intervals to build the symmetric union V."""
    out = []
    for a, b in positive_intervals:
        out.append((float(a), float(b)))
        out.append((-float(b), -float(a)))
    return out


def make_interval_mollified(intervals, eps: float) -> IntervalMollified:
    """Plateau window on the given interval union with eps-enlargement."""
    return IntervalMollified(intervals, eps)


class PolyBump(TestFunction):
    """(distance to xi)^p times a plateau window around xi.

    At the center the l-th derivative equals p! for l == p and 0 otherwise.
    The two-sided variant pairs the window at -xi and uses |z| in the
    polynomial factor, which keeps the function even; ``two_sided=False``
    anchors a single plateau at xi.
    """

    def __init__(self, xi: float, p: int, eps: float, two_sided: bool = True,
                 check: bool = True):
        if p < 0 or eps <= 0:
            raise EivError("need p >= 0 and eps > 0")
        xi = float(xi)
        if xi < 0:
            raise EivError("xi must be nonnegative; the mirror is implicit")
        if two_sided and 0 < xi <= 2 * eps:
            raise InvalidIntervalError("two-sided plateaus at +-xi need xi > 2*eps")
        self.xi, self.p, self.eps, self.two_sided = xi, int(p), float(eps), two_sided
        if xi == 0.0 or not two_sided:
            window = IntervalMollified([(xi - eps, xi + eps)], eps)
        else:
            window = IntervalMollified(symmetric_union([(xi - eps, xi + eps)]), eps)
        self.window = window
        self.support = window.support
        if check:
            self._verify_center_derivatives()

    def _poly(self, z: np.ndarray) -> np.ndarray:
        if self.xi == 0.0:
            base = z
        elif self.two_sided:
            base = np.abs(z) - self.xi
        else:
            base = z - self.xi
        return base**self.p

    def _poly_d1(self, z: np.ndarray) -> np.ndarray:
        if self.p == 0:
            return np.zeros(np.shape(z))
        if self.xi == 0.0:
            base, chain = z, 1.0
        elif self.two_sided:
            base, chain = np.abs(z) - self.xi, np.sign(z)
        else:
            base, chain = z - self.xi, 1.0
        return self.p * base ** (self.p - 1) * chain

    def _value(self, z):
        return self._poly(z) * self.window._value(z)

    def _d1(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return self._poly_d1(z) * self.window._value(z) + self._poly(z) * self.window._d1(z)

    def _verify_center_derivatives(self):
        for order in range(min(self.p + 2, MAX_DERIV_ORDER + 1)):
            got = self.deriv_at(self.xi, order)
            want = float(math.factorial(self.p)) if order == self.p else 0.0
            scale = max(1.0, abs(want))
            if abs(got - want) > 1e-4 * scale:
                raise ConstructionDegenerateError(
                    f"derivative order {order} at the center came out {got!r}, "
                    f"expected {want}; eps={self.eps} is too small for the "
                    f"finite-difference step"
                )


def make_poly_bump(xi: float, p: int, eps: float) -> PolyBump:
    """Two-sided polynomial plateau weight with centers at +-xi."""
    return PolyBump(xi, p, eps, two_sided=True)


class PairBump(TestFunction):
    """Half-sum of bumps centered at center +- xi, each written as
    f_bump((z - c)/eps) without a density normalization (mass eps/2 per bump).
    """

    def __init__(self, xi: float, eps: float, center: float = 0.0):
        if not 0 < eps < abs(xi):
            raise OverlapError("need 0 < eps < |xi| so the bumps do not overlap")
        self.xi, self.eps, self.center = float(xi), float(eps), float(center)
        lo = center - abs(xi) - eps
        hi = center + abs(xi) + eps
        self.support = (lo, hi)

    def _value(self, z):
        u = z - self.center
        return 0.5 * (eval_bump((u - self.xi) / self.eps) + eval_bump((u + self.xi) / self.eps))

    def _d1(self, z):
        u = np.asarray(z, dtype=float) - self.center
        c = 0.5 / (bump_norm_constant() * self.eps)
        return c * (_eval_cut_d1((u - self.xi) / self.eps) + _eval_cut_d1((u + self.xi) / self.eps))

    def unit_normalized(self) -> "Scaled":
        """Same shape scaled to total mass 1 (divide by the eps mass)."""
        return Scaled(1.0 / self.eps, self)


def make_pair_bump(xi_n: float, eps_n: float) -> PairBump:
    """Paired bumps at +-xi_n, composed exactly as written (mass eps_n total)."""
    return PairBump(xi_n, eps_n)


class Product(TestFunction):
    """Pointwise product of two test functions."""

    def __init__(self, left: TestFunction, right: TestFunction):
        self.left, self.right = left, right
        lo = max(left.support[0], right.support[0])
        hi = min(left.support[1], right.support[1])
        if not lo < hi:
            raise EivError("product support is empty")
        self.support = (lo, hi)
        self.max_deriv_order = min(left.max_deriv_order, right.max_deriv_order)

    def _value(self, z):
        return self.left._value(z) * self.right._value(z)

    def _d1(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return (
            self.left._d1(z) * self.right._value(z)
            + self.left._value(z) * self.right._d1(z)
        )


class Scaled(TestFunction):
    """Constant multiple of a test function (the factor may be complex)."""

    def __init__(self, factor: complex, inner: TestFunction):
        self.factor, self.inner = factor, inner
        self.support = inner.support
        self.max_deriv_order = inner.max_deriv_order

    def _value(self, z):
        return self.factor * self.inner._value(z)

    def _d1(self, z):
        return self.factor * self.inner._d1(z)

    def deriv_at(self, z, order):
        return self.factor * self.inner.deriv_at(z, order)


class Shifted(TestFunction):
    """Argument shift: (shifted f)(z) = f(z - offset)."""

    def __init__(self, offset: float, inner: TestFunction):
        self.offset, self.inner = float(offset), inner
        self.support = (inner.support[0] + offset, inner.support[1] + offset)
        self.max_deriv_order = inner.max_deriv_order

    def _value(self, z):
        return self.inner._value(z - self.offset)

    def _d1(self, z):
        return self.inner._d1(np.asarray(z, dtype=float) - self.offset)

    def deriv_at(self, z, order):
        return self.inner.deriv_at(z - self.offset, order)


class DerivativeOf(TestFunction):
    """View a test function's derivative as a test function."""

    def __init__(self, inner: TestFunction):
        self.inner = inner
        self.support = inner.support
        self.max_deriv_order = inner.max_deriv_order - 1

    def _value(self, z):
        return np.asarray(self.inner._d1(np.atleast_1d(np.asarray(z, dtype=float))))

    def deriv_at(self, z, order):
        return self.inner.deriv_at(z, order + 1)


class WeightedWindow(TestFunction):
    """Window times an arbitrary smooth factor, evaluated only on the window.

    The factor is never called where the window vanishes, so reciprocals of
    model curves are safe even when the curve has zeros elsewhere.
    """

    def __init__(self, window: TestFunction, factor):
        self.window, self.factor = window, factor
        self.support = window.support
        self.max_deriv_order = window.max_deriv_order

    def _value(self, z):
        w = np.asarray(self.window._value(z), dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        mask = w != 0
        if np.any(mask):
            out[mask] = w[mask] * np.asarray(self.factor(z[mask]), dtype=complex)
        return out

    def _d1(self, z):
        z = np.asarray(z, dtype=float)
        h = self._fd_step()
        return _richardson_d1(self, z, h)
