"""Moment-condition identification for parametric spectrum models.

A model describes the transform of the regression function as an ordinary
curve gamma_o(zeta, theta) plus a finite singular train at points s_l with
coefficient functions gamma_k(s_l, theta).  Four moment families pin the
parameters down:

* ordinary-shape: pairs the observable spectra against the model curve and
  its derivative over plateau windows that stay away from every singular
  and jump point; exactly zero at the truth for any error law.
* ordinary-scale: probes the outcome spectrum near zero frequency with a
  unit-mass bump pair divided by the model curve; the limit is the
  characteristic function at 0, i.e. 1.
* singular-shape: pairing vectors against one-sided plateau weights
  (zeta - s)^{i+1} around each singular point, premultiplied by the
  inverses of the two binomial coefficient matrices; the two channels
  cancel exactly at the truth.
* singular-scale: compares the delta-side estimate of phi(s_l) with 1 (at
  s_l = 0) or with a bump-pair estimate through the ordinary part.

Limits in the window width are realized as fixed refinement schedules with
polynomial extrapolation to width zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from math import comb, factorial
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .estimate import Sample, bin_conditional_means, default_bin_count
from .exceptions import (
    AssumptionViolation,
    EivError,
    InvalidIntervalError,
    NonInvertibleGammaError,
    WindowSelectionError,
)
from .numerics import (
    DeltaAtom,
    DeltaTrain,
    DiscreteDistribution,
    GeneralizedSpectrum,
    GridSpectrum,
    RealGrid,
    pair,
)
from .spectral import charfun_derivative, charfun_discrete
from .weights import (
    DerivativeOf,
    IntervalMollified,
    PairBump,
    PolyBump,
    Product,
    TestFunction,
    WeightedWindow,
    symmetric_union,
)

__all__ = [
    "SingularPoint",
    "JumpPoint",
    "OrdinaryPart",
    "ThetaModel",
    "GammaMatrices",
    "build_gamma_matrices",
    "SpectralData",
    "oracle_spectra",
    "empirical_spectra",
    "Schedule",
    "ordinary_windows",
    "moment_ordinary_shape",
    "moment_ordinary_scale",
    "moment_singular_shape",
    "moment_singular_scale",
    "EqResult",
    "eq_vector",
    "EqEvaluator",
    "GmmResult",
    "gmm_solve",
    "RankResult",
    "rank_check",
    "build_model",
    "registered_models",
    "extrapolate_to_zero",
]

log = logging.getLogger(__name__)

_COND_LIMIT = 1e12
_GAMMA_O_FLOOR = 1e-10


# ---------------------------------------------------------------------------
# model description


@dataclass(frozen=True)
class SingularPoint:
    """Train anchor at location s >= 0 with orders 0..k_bar.

    ``coeffs(theta)`` returns the k_bar+1 complex coefficients; the mirror
    train at -s carries their conjugates implicitly.
    """

    location: float
    k_bar: int
    coeffs: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.location < 0:
            raise EivError("singular locations are nonnegative; mirrors are implicit")
        if not 0 <= self.k_bar <= 3:
            raise EivError("supported train orders are 0..3")


@dataclass(frozen=True)
class JumpPoint:
    """Jump of the ordinary part: contributes coeff * delta at +-b to the
    derivative of the ordinary curve."""

    location: float
    coeff: Callable[[np.ndarray], complex]

    def __post_init__(self):
        if self.location <= 0:
            raise EivError("jump locations are positive; mirrors are implicit")


@dataclass(frozen=True)
class OrdinaryPart:
    """Closed-form ordinary curve and its frequency derivative."""

    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ThetaModel:
    """Parametric spectrum family with declared parameter split.

    ``m_ordinary`` parameters act through the ordinary curve and
    ``m_singular`` through the train coefficients; the split is metadata,
    verified only through the rank check.
    """

    name: str
    theta_dim: int
    m_ordinary: int
    m_singular: int
    ordinary: OrdinaryPart | None
    singular_points: tuple[SingularPoint, ...]
    jump_points: tuple[JumpPoint, ...] = ()
    zeta_bar: float = 4.0
    theta_ref: tuple = ()

    def __post_init__(self):
        if self.m_ordinary + self.m_singular != self.theta_dim:
            raise EivError("parameter split must add up to theta_dim")
        locs = [sp.location for sp in self.singular_points]
        if len(set(locs)) != len(locs):
            raise EivError("singular locations must be distinct")
        if 0.0 in locs and locs[0] != 0.0:
            raise EivError("the zero-frequency singular point must come first")
        if self.theta_ref and self.ordinary is not None:
            self._check_ordinary_nonzero(np.asarray(self.theta_ref, dtype=float))

    def _check_ordinary_nonzero(self, theta: np.ndarray) -> None:
        # the ordinary curve may vanish at finitely many points only
        zeta = np.linspace(-self.zeta_bar, self.zeta_bar, 2001)
        mag = np.abs(self.gamma_o(zeta, theta))
        scale = float(np.max(mag))
        if scale == 0.0 or np.mean(mag < 1e-12 * scale) > 0.05:
            raise AssumptionViolation(
                f"ordinary part of {self.name!r} is ~0 on a positive fraction "
                f"of the band at theta={theta.tolist()}"
            )

    def gamma_o(self, zeta, theta) -> np.ndarray:
        if self.ordinary is None:
            return np.zeros(np.shape(zeta), dtype=complex)
        return np.asarray(self.ordinary.value(np.asarray(zeta, float), theta), dtype=complex)

    def dgamma_oo(self, zeta, theta) -> np.ndarray:
        if self.ordinary is None:
            return np.zeros(np.shape(zeta), dtype=complex)
        return np.asarray(self.ordinary.deriv(np.asarray(zeta, float), theta), dtype=complex)

    @property
    def special_points(self) -> tuple[float, ...]:
        pts = {sp.location for sp in self.singular_points}
        pts.update(jp.location for jp in self.jump_points)
        return tuple(sorted(pts))


@dataclass(frozen=True)
class GammaMatrices:
    """Binomial coefficient matrices and the factorial normalizer at one
    singular point."""

    gamma_y: np.ndarray
    gamma_xy: np.ndarray
    m_diag: np.ndarray


def build_gamma_matrices(model: ThetaModel, l: int, theta) -> GammaMatrices:
    """(k_bar+1)-square matrices G[i,k] = C(k+i, i) gamma_{k+i} (outcome
    channel) and C(k+i+1, i+1) gamma_{k+i} (cross channel), entries beyond
    order k_bar zero; M carries i! on the diagonal."""
    sp = model.singular_points[l]
    g = np.asarray(sp.coeffs(np.asarray(theta, dtype=float)), dtype=complex)
    if g.shape != (sp.k_bar + 1,):
        raise EivError("coefficient function returned the wrong length")
    n = sp.k_bar + 1
    gy = np.zeros((n, n), dtype=complex)
    gxy = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for k in range(n):
            if i + k <= sp.k_bar:
                gy[i, k] = comb(k + i, i) * g[k + i]
                gxy[i, k] = comb(k + i + 1, i + 1) * g[k + i]
    for name, mat in (("outcome", gy), ("cross", gxy)):
        if not np.all(np.isfinite(mat)) or np.linalg.cond(mat) > _COND_LIMIT:
            raise NonInvertibleGammaError(
                f"{name} coefficient matrix at s={sp.location} is not "
                f"invertible at theta={np.asarray(theta).tolist()}"
            )
    m_diag = np.array([float(factorial(i)) for i in range(n)])
    return GammaMatrices(gy, gxy, m_diag)


# ---------------------------------------------------------------------------
# data backends


@dataclass(frozen=True)
class SpectralData:
    """Outcome and cross spectra, regular grid parts plus delta trains.

    ``poly_basis`` (empirical data only) holds the weighted transforms of
    the monomials z^k on the observed range; they let the moment machinery
    replace the range-truncated image of the model's polynomial content by
    its exact train representation, parameter by parameter.
    """

    eps_y: GeneralizedSpectrum
    eps_xy: GeneralizedSpectrum
    poly_basis: tuple[np.ndarray, ...] | None = None

    @property
    def grid(self) -> RealGrid:
        return self.eps_y.regular.grid


def _merge_atoms(raw: list[tuple[float, int, complex]]) -> DeltaTrain:
    table: dict[tuple[float, int], complex] = {}
    for loc, order, coeff in raw:
        key = (loc, order)
        table[key] = table.get(key, 0.0) + coeff
    atoms = tuple(
        DeltaAtom(loc, order, c) for (loc, order), c in sorted(table.items()) if c != 0
    )
    return DeltaTrain(atoms)


def oracle_spectra(
    model: ThetaModel, theta_star, F: DiscreteDistribution, grid: RealGrid
) -> SpectralData:
    """Exact spectra implied by the model at theta_star under error law F.

    The regular parts are gamma_o * phi and -i * dgamma_oo * phi; the train
    parts multiply each delta derivative by phi through the product rule,
    using closed-form characteristic-function derivatives.
    """
    theta = np.asarray(theta_star, dtype=float)
    zeta = grid.points
    phi = charfun_discrete(F, grid).values
    reg_y = model.gamma_o(zeta, theta) * phi
    reg_xy = -1j * model.dgamma_oo(zeta, theta) * phi

    atoms_y: list[tuple[float, int, complex]] = []
    atoms_xy: list[tuple[float, int, complex]] = []
    for sp in model.singular_points:
        coeffs = np.asarray(sp.coeffs(theta), dtype=complex)
        sides = [(sp.location, coeffs)]
        if sp.location != 0.0:
            sides.append((-sp.location, np.conj(coeffs)))
        for s, cs in sides:
            for k in range(sp.k_bar + 1):
                c = 2.0 * np.pi * cs[k]
                if c == 0:
                    continue
                for j in range(k + 1):
                    atoms_y.append(
                        (s, k - j, c * comb(k, j) * (-1) ** j * charfun_derivative(F, s, j))
                    )
                for j in range(k + 2):
                    atoms_xy.append(
                        (
                            s,
                            k + 1 - j,
                            -1j * c * comb(k + 1, j) * (-1) ** j * charfun_derivative(F, s, j),
                        )
                    )
    for jp in model.jump_points:
        c = complex(jp.coeff(theta))
        for s, cc in ((jp.location, c), (-jp.location, np.conj(c))):
            atoms_xy.append((s, 0, -1j * cc * charfun_derivative(F, s, 0)))

    return SpectralData(
        GeneralizedSpectrum(GridSpectrum(grid, reg_y), _merge_atoms(atoms_y)),
        GeneralizedSpectrum(GridSpectrum(grid, reg_xy), _merge_atoms(atoms_xy)),
    )


def empirical_spectra(
    sample: Sample,
    grid: RealGrid,
    n_bins: int | None = None,
    min_per_bin: int = 20,
) -> SpectralData:
    """Plug-in spectra from a sample.

    The weighted empirical transforms (1/n) sum y e^{i zeta z} / p_hat(z)
    and (1/n) sum x y e^{i zeta z} / p_hat(z) estimate the transforms of
    the conditional moment functions on the observed z-range.
    """
    bins = n_bins if n_bins is not None else default_bin_count(sample.n)
    binned = bin_conditional_means(sample, bins, min_per_bin)
    w = 1.0 / (binned.p_hat(sample.z) * sample.n)
    zeta = grid.points
    # one pass for the data transforms and the monomial basis z^0..z^3
    stats = np.column_stack(
        [
            sample.y * w,
            sample.x * sample.y * w,
            w,
            sample.z * w,
            sample.z**2 * w,
            sample.z**3 * w,
        ]
    )
    acc = np.zeros((len(zeta), stats.shape[1]), dtype=complex)
    chunk = 4096
    for start in range(0, sample.n, chunk):
        sl = slice(start, start + chunk)
        acc += np.exp(1j * np.outer(zeta, sample.z[sl])) @ stats[sl]
    return SpectralData(
        GeneralizedSpectrum(GridSpectrum(grid, acc[:, 0])),
        GeneralizedSpectrum(GridSpectrum(grid, acc[:, 1])),
        poly_basis=tuple(acc[:, k].copy() for k in range(2, 6)),
    )


def _as_spectral(model: ThetaModel, data, grid_step: float) -> SpectralData:
    if isinstance(data, SpectralData):
        return data
    if isinstance(data, Sample):
        half = model.zeta_bar + 1.0
        n = 2 * int(np.ceil(half / grid_step)) + 1
        return empirical_spectra(data, RealGrid.symmetric(half, n))
    raise EivError(f"data must be SpectralData or Sample, got {type(data)!r}")


# ---------------------------------------------------------------------------
# schedules and windows


@dataclass(frozen=True)
class Schedule:
    """Window geometry and refinement ladders for the moment families.

    The sampled-data defaults use wider probes: a bounded instrument range
    truncates the empirical transforms, and frequency features narrower
    than the reciprocal range are not resolvable.
    """

    n_windows: int = 2
    exclusion: float = 0.5
    window_eps: float = 0.125
    xi_schedule: tuple = (0.4, 0.25, 0.15, 0.09)
    xi_eps_ratio: float = 0.25
    sing_eps: float = 0.5
    sing_eps_n: tuple = (0.4, 0.25, 0.15, 0.09)
    grid_step: float = 0.00125

    @classmethod
    def default_oracle(cls) -> "Schedule":
        return cls()

    @classmethod
    def default_sampled(cls) -> "Schedule":
        # wider probes, single window stage: on noisy data the refinement
        # ladder amplifies sampling noise faster than it removes the
        # (already moment-killed) leak
        return cls(
            exclusion=0.6,
            window_eps=0.2,
            xi_schedule=(1.6, 1.2, 0.8),
            xi_eps_ratio=0.25,
            sing_eps=1.4,
            sing_eps_n=(0.8,),
            grid_step=0.01,
        )

    @classmethod
    def for_data(cls, data) -> "Schedule":
        return cls.default_sampled() if isinstance(data, Sample) else cls.default_oracle()


def extrapolate_to_zero(h: Sequence[float], v: Sequence[complex]) -> complex:
    """Polynomial extrapolation of stage values to window width zero."""
    h = np.asarray(h, dtype=float)
    v = np.asarray(v, dtype=complex)
    if len(h) == 1:
        return complex(v[0])
    out = 0.0 + 0.0j
    for i in range(len(h)):
        li = 1.0
        for j in range(len(h)):
            if j != i:
                li *= h[j] / (h[j] - h[i])
        out += v[i] * li
    return complex(out)


def ordinary_windows(model: ThetaModel, schedule: Schedule) -> list[IntervalMollified]:
    """Plateau windows on the band that exclude every singular and jump
    point (and their mirrors) with all derivatives vanishing there."""
    if model.ordinary is None:
        return []
    e, eps = schedule.exclusion, schedule.window_eps
    # excluded zones on the positive half-axis (0 always excluded: the
    # mirror seam, and the anchor when a train sits at zero)
    zones = sorted((max(0.0, p - e), p + e) for p in {0.0, *model.special_points})
    merged = [zones[0]]
    for a, b in zones[1:]:
        if a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    free: list[tuple[float, float]] = []
    cursor = 0.0
    for a, b in merged:
        if a > cursor:
            free.append((cursor, a))
        cursor = max(cursor, b)
    if model.zeta_bar > cursor:
        free.append((cursor, model.zeta_bar))
    plateaus = [(a + eps, b - eps) for a, b in free if (b - a) > 4 * eps]
    if not plateaus:
        raise InvalidIntervalError(
            "no room for ordinary windows between the excluded points"
        )
    while len(plateaus) < schedule.n_windows:
        widths = [b - a for a, b in plateaus]
        k = int(np.argmax(widths))
        a, b = plateaus[k]
        mid, gap = (a + b) / 2.0, 1.5 * eps
        if mid - gap - a < eps or b - (mid + gap) < eps:
            break
        plateaus[k : k + 1] = [(a, mid - gap), (mid + gap, b)]
    plateaus.sort()
    return [
        IntervalMollified(symmetric_union([pl]), eps)
        for pl in plateaus[: schedule.n_windows]
    ]


# ---------------------------------------------------------------------------
# moment families


def _trapw(x: np.ndarray) -> np.ndarray:
    w = np.empty_like(x)
    w[0] = (x[1] - x[0]) / 2
    w[-1] = (x[-1] - x[-2]) / 2
    w[1:-1] = (x[2:] - x[:-2]) / 2
    return w


def _adjust_point(model: ThetaModel, sd: SpectralData) -> SingularPoint | None:
    """The zero-frequency train point when range-truncation adjustment
    applies (empirical data carrying monomial basis transforms)."""
    if sd.poly_basis is None:
        return None
    for sp in model.singular_points:
        if sp.location == 0.0:
            if sp.k_bar + 1 >= len(sd.poly_basis):
                raise EivError(
                    "sampled-data adjustment supports train orders <= 2 at zero"
                )
            if sp.k_bar >= 2:
                log.warning(
                    "train order %d at zero: error-moment cross terms stay "
                    "in the empirical remainder",
                    sp.k_bar,
                )
            return sp
    return None


def _cross_const(
    model: ThetaModel, sd: SpectralData, theta: np.ndarray, ap: SingularPoint
) -> complex:
    """Constant content of the cross moment left over after the polynomial
    swap (the error-variance term, e.g. t2*E(U^2) for a linear train).

    Identified from the zero-frequency value of the adjusted cross
    transform: the decaying ordinary cross part integrates to
    -i * dgamma_oo(0, theta), everything polynomial was subtracted, and
    what remains is the constant times the weighted range measure.
    """
    i0 = sd.grid.zero_index
    coeffs = np.asarray(ap.coeffs(theta), dtype=complex)
    a = coeffs * (1j ** np.arange(ap.k_bar + 1))
    val = sd.eps_xy.regular.values[i0] - sum(
        a[k] * sd.poly_basis[k + 1][i0] for k in range(ap.k_bar + 1)
    )
    val += 1j * complex(np.asarray(model.dgamma_oo(0.0, theta)).reshape(()))
    return val / sd.poly_basis[0][i0]


def _pair_side(model: ThetaModel, sd: SpectralData, theta, side: str, test) -> complex:
    """Pairing of a test against one spectrum channel.

    Empirical data: the range-truncated image of the model's polynomial
    content (coefficients linear in the train coefficients at zero) is
    swapped for its exact train representation before pairing, and the
    cross channel drops its leftover error-variance constant.  The
    constant's own train image (a zero-order atom at 0) pairs to zero
    against every family's test, so only the grid subtraction appears.
    """
    gs = sd.eps_y if side == "y" else sd.eps_xy
    total = pair(gs, test)
    ap = _adjust_point(model, sd)
    if ap is None:
        return total
    theta = np.asarray(theta, dtype=float)
    coeffs = np.asarray(ap.coeffs(theta), dtype=complex)
    pts = sd.grid.points
    wts = _trapw(pts)
    tv = np.asarray(test(pts), dtype=complex)
    for k in range(ap.k_bar + 1):
        if side == "y":
            grid_part = -(1j**k) * np.sum(wts * sd.poly_basis[k] * tv)
            atom_part = (-1.0) ** k * 2.0 * np.pi * test.deriv_at(0.0, k)
        else:
            grid_part = -(1j**k) * np.sum(wts * sd.poly_basis[k + 1] * tv)
            atom_part = (-1.0) ** k * 2j * np.pi * test.deriv_at(0.0, k + 1)
        total += coeffs[k] * (grid_part + atom_part)
    if side == "xy":
        c0 = _cross_const(model, sd, theta, ap)
        total -= c0 * np.sum(wts * sd.poly_basis[0] * tv)
    return total


def _adjusted_regulars(
    model: ThetaModel, sd: SpectralData, theta: np.ndarray, ap: SingularPoint | None
) -> tuple[np.ndarray, np.ndarray]:
    ry = sd.eps_y.regular.values
    rxy = sd.eps_xy.regular.values
    if ap is None:
        return ry, rxy
    coeffs = np.asarray(ap.coeffs(theta), dtype=complex)
    a = coeffs * (1j ** np.arange(ap.k_bar + 1))
    ry = ry - sum(a[k] * sd.poly_basis[k] for k in range(ap.k_bar + 1))
    rxy = rxy - sum(a[k] * sd.poly_basis[k + 1] for k in range(ap.k_bar + 1))
    rxy = rxy - _cross_const(model, sd, theta, ap) * sd.poly_basis[0]
    return ry, rxy


def _reflected_recip_gamma_o(model: ThetaModel, theta: np.ndarray):
    """zeta -> 1 / conj(gamma_o(-zeta, theta)); for real regressions this
    equals 1/gamma_o(zeta, theta)."""

    def factor(zeta):
        vals = np.conj(model.gamma_o(-np.asarray(zeta, dtype=float), theta))
        return 1.0 / vals

    return factor


def _check_window_clear(model, theta, support: tuple[float, float], n: int = 64):
    z = np.linspace(support[0], support[1], n)
    mag = np.minimum(
        np.abs(model.gamma_o(z, theta)), np.abs(model.gamma_o(-z, theta))
    )
    if np.min(mag) < _GAMMA_O_FLOOR:
        raise WindowSelectionError(
            f"ordinary part is ~0 on the window [{support[0]:.3g}, {support[1]:.3g}]"
        )


def moment_ordinary_shape(
    model: ThetaModel,
    theta,
    data,
    window: IntervalMollified | None = None,
    schedule: Schedule | None = None,
) -> complex:
    """Shape condition for the ordinary part: pairs the outcome spectrum
    against i * dgamma_oo(., theta) * window plus the cross spectrum
    against gamma_o(., theta) * window.  The window and all its derivatives
    vanish at every singular point, so train components drop out exactly.
    """
    if model.ordinary is None:
        raise EivError("model has no ordinary part")
    schedule = schedule or Schedule.for_data(data)
    sd = _as_spectral(model, data, schedule.grid_step)
    if window is None:
        window = ordinary_windows(model, schedule)[0]
    theta = np.asarray(theta, dtype=float)
    test_y = WeightedWindow(window, lambda z: 1j * model.dgamma_oo(z, theta))
    test_xy = WeightedWindow(window, lambda z: model.gamma_o(z, theta))
    return _pair_side(model, sd, theta, "y", test_y) + _pair_side(
        model, sd, theta, "xy", test_xy
    )


def moment_ordinary_scale(
    model: ThetaModel,
    theta,
    data,
    xi_n: float,
    eps_n: float,
    schedule: Schedule | None = None,
) -> complex:
    """One refinement stage of the scale condition: unit-mass bump pair at
    +-xi_n divided by the reflected-conjugate ordinary curve, minus 1."""
    if model.ordinary is None:
        raise EivError("model has no ordinary part")
    schedule = schedule or Schedule.for_data(data)
    sd = _as_spectral(model, data, schedule.grid_step)
    theta = np.asarray(theta, dtype=float)
    bump = PairBump(xi_n, eps_n).unit_normalized()
    _check_window_clear(model, theta, bump.support)
    test = WeightedWindow(bump, _reflected_recip_gamma_o(model, theta))
    return _pair_side(model, sd, theta, "y", test) - 1.0


def _singular_probe(s: float, power: int, eps: float, eps_n: float) -> TestFunction:
    plateau = PolyBump(s, power, eps, two_sided=False, check=False)
    window = IntervalMollified([(s - eps_n / 2.0, s + eps_n / 2.0)], eps_n / 2.0)
    return Product(plateau, window)


class _MomentKilled(TestFunction):
    """A probe minus correction bumps that annihilate its low polynomial
    moments about s.

    The corrections live on s +- [r1, r2] and vanish identically near s,
    so derivative evaluations at the singular point (the train pairings)
    are exactly those of the raw probe, while pairings against any smooth
    background reduce to the background's polynomial-approximation residual
    over the probe's footprint.
    """

    N_MOMENTS = 8

    def __init__(self, test: TestFunction, s: float, eps: float, pts: np.ndarray):
        self.test = test
        self.max_deriv_order = test.max_deriv_order
        r1, r2 = 0.35 * eps, 0.9 * eps
        mol = 0.2 * (r2 - r1)
        band = IntervalMollified([(s + r1, s + r2), (s - r2, s - r1)], mol)
        self._rhos = [
            WeightedWindow(band, (lambda j: (lambda z: (z - s) ** j))(j))
            for j in range(self.N_MOMENTS)
        ]
        w = _trapw(pts)
        u = pts - s
        tv = np.asarray(test(pts), dtype=complex)
        a_mat = np.empty((self.N_MOMENTS, self.N_MOMENTS))
        b_vec = np.empty(self.N_MOMENTS, dtype=complex)
        for m in range(self.N_MOMENTS):
            b_vec[m] = np.sum(w * u**m * tv)
            for j, rho in enumerate(self._rhos):
                a_mat[m, j] = np.real(np.sum(w * u**m * np.asarray(rho(pts))))
        self._c = np.linalg.solve(a_mat, b_vec)
        lo = min(test.support[0], s - r2 - mol)
        hi = max(test.support[1], s + r2 + mol)
        self.support = (lo, hi)

    def _value(self, z):
        out = np.asarray(self.test._value(z), dtype=complex)
        for c, rho in zip(self._c, self._rhos):
            out = out - c * np.asarray(rho._value(z))
        return out

    def deriv_at(self, z, order):
        total = self.test.deriv_at(z, order)
        for c, rho in zip(self._c, self._rhos):
            total -= c * rho.deriv_at(z, order)
        return total


def _singular_pairing_vectors(
    model: ThetaModel,
    sd: SpectralData,
    theta,
    s: float,
    k_bar: int,
    eps: float,
    eps_n: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Pairing vectors against one-sided plateau probes at s.

    Component i pairs the outcome spectrum with the derivative of the
    (zeta-s)^{i+1} probe and the cross spectrum with the probe itself,
    both scaled by (-1)^i/(i+1); with the factorial normalizer this turns
    each channel into its coefficient matrix acting on the vector of
    signed characteristic-function derivatives at s.
    """
    y = np.zeros(k_bar + 1, dtype=complex)
    xy = np.zeros(k_bar + 1, dtype=complex)
    pts = sd.grid.points
    for i in range(k_bar + 1):
        mu = _singular_probe(s, i + 1, eps, eps_n)
        scale = (-1.0) ** i / (i + 1.0)
        q_y = _MomentKilled(DerivativeOf(mu), s, eps, pts)
        q_xy = _MomentKilled(mu, s, eps, pts)
        y[i] = scale * _pair_side(model, sd, theta, "y", q_y)
        xy[i] = scale * _pair_side(model, sd, theta, "xy", q_xy)
    return y, xy


def _sing_eps_for(model: ThetaModel, l: int, schedule: Schedule) -> float:
    # probe support [s - 2eps, s + 2eps] must stay clear of every other
    # special point, of all mirror points, and of the band edge
    s = model.singular_points[l].location
    eps = schedule.sing_eps
    for p in model.special_points:
        if p != s:
            eps = min(eps, abs(s - p) / 3.0, (s + p) / 3.0)
        elif p > 0:
            eps = min(eps, 2.0 * p / 3.0)
    if model.zeta_bar > s:
        eps = min(eps, (model.zeta_bar - s) / 2.5)
    if eps <= 0:
        raise InvalidIntervalError(f"no room for a probe plateau at s={s}")
    return eps


def _delta_side_phi(
    model: ThetaModel, theta, sd: SpectralData, l: int, eps: float, eps_n: float
) -> complex:
    gm = build_gamma_matrices(model, l, theta)
    sp = model.singular_points[l]
    y, _ = _singular_pairing_vectors(model, sd, theta, sp.location, sp.k_bar, eps, eps_n)
    vec = np.linalg.solve(gm.gamma_y, y / gm.m_diag)
    return complex(vec[0]) / (2.0 * np.pi)


def moment_singular_shape(
    model: ThetaModel,
    theta,
    data,
    l: int,
    eps: float | None = None,
    eps_n: float | None = None,
    schedule: Schedule | None = None,
) -> np.ndarray:
    """One refinement stage of the singular shape condition at point l.

    Returns the complex vector Gy(theta)^-1 M^-1 Y + i Gxy(theta)^-1 M^-1 X;
    the train contributions of the two channels cancel exactly at the true
    theta, leaving an ordinary-part leak that shrinks with the window.
    With a single order (k_bar = 0) the two channels coincide and carry no
    shape information; the scale comparison is returned instead.
    """
    schedule = schedule or Schedule.for_data(data)
    sd = _as_spectral(model, data, schedule.grid_step)
    sp = model.singular_points[l]
    eps = eps if eps is not None else _sing_eps_for(model, l, schedule)
    eps_n = eps_n if eps_n is not None else schedule.sing_eps_n[0]
    theta = np.asarray(theta, dtype=float)
    if sp.k_bar == 0:
        return np.array(
            [moment_singular_scale(model, theta, sd, l, eps=eps, eps_n=eps_n, schedule=schedule)]
        )
    gm = build_gamma_matrices(model, l, theta)
    y, xy = _singular_pairing_vectors(model, sd, theta, sp.location, sp.k_bar, eps, eps_n)
    term_y = np.linalg.solve(gm.gamma_y, y / gm.m_diag)
    term_xy = np.linalg.solve(gm.gamma_xy, xy / gm.m_diag)
    return term_y + 1j * term_xy


def moment_singular_scale(
    model: ThetaModel,
    theta,
    data,
    l: int,
    eps: float | None = None,
    eps_n: float | None = None,
    xi_n: float | None = None,
    schedule: Schedule | None = None,
) -> complex:
    """One refinement stage of the scale condition at singular point l.

    The delta-side estimate of phi(s_l) is the first component of the
    normalized outcome pairing vector; it is compared with 1 at s_l = 0
    (the characteristic function at zero) and otherwise with a bump-pair
    estimate taken through the ordinary part at s_l +- xi_n.
    """
    schedule = schedule or Schedule.for_data(data)
    sd = _as_spectral(model, data, schedule.grid_step)
    sp = model.singular_points[l]
    eps = eps if eps is not None else _sing_eps_for(model, l, schedule)
    eps_n = eps_n if eps_n is not None else schedule.sing_eps_n[0]
    theta = np.asarray(theta, dtype=float)
    phi_delta = _delta_side_phi(model, theta, sd, l, eps, eps_n)
    if sp.location == 0.0:
        return phi_delta - 1.0
    if model.ordinary is None:
        raise EivError(
            "scale comparison at a nonzero singular point needs an ordinary part"
        )
    xi = xi_n if xi_n is not None else schedule.xi_schedule[0]
    bump = PairBump(xi, schedule.xi_eps_ratio * xi, center=sp.location).unit_normalized()
    _check_window_clear(model, theta, bump.support)
    test = WeightedWindow(bump, _reflected_recip_gamma_o(model, theta))
    phi_ordinary = _pair_side(model, sd, theta, "y", test)
    return phi_delta - phi_ordinary


# ---------------------------------------------------------------------------
# stacked conditions, solver, rank check


@dataclass(frozen=True)
class EqResult:
    values: np.ndarray
    labels: tuple[str, ...]
    skipped: tuple[str, ...]
    complex_parts: dict


class _ProbePairing:
    """Pairing of one probe test, decomposed into a raw part, a part linear
    in the zero-point train coefficients, and (cross channel) the leftover
    constant's grid image."""

    def __init__(self, sd: SpectralData, side: str, test, ap: SingularPoint | None):
        gs = sd.eps_y if side == "y" else sd.eps_xy
        self.raw = pair(gs, test)
        self.coeff = None
        self.c0_pair = 0.0 + 0.0j
        if ap is None:
            return
        pts = sd.grid.points
        wts = _trapw(pts)
        tv = np.asarray(test(pts), dtype=complex)
        coeff = np.zeros(ap.k_bar + 1, dtype=complex)
        for k in range(ap.k_bar + 1):
            if side == "y":
                coeff[k] = -(1j**k) * np.sum(wts * sd.poly_basis[k] * tv) + (
                    -1.0
                ) ** k * 2.0 * np.pi * test.deriv_at(0.0, k)
            else:
                coeff[k] = -(1j**k) * np.sum(wts * sd.poly_basis[k + 1] * tv) + (
                    -1.0
                ) ** k * 2j * np.pi * test.deriv_at(0.0, k + 1)
        self.coeff = coeff
        if side == "xy":
            self.c0_pair = complex(np.sum(wts * sd.poly_basis[0] * tv))

    def at(self, gamma_coeffs: np.ndarray | None, c0: complex = 0.0) -> complex:
        if self.coeff is None:
            return self.raw
        return self.raw + complex(np.dot(self.coeff, gamma_coeffs)) - c0 * self.c0_pair


class EqEvaluator:
    """Caches the theta-independent pieces of the stacked conditions.

    Probe pairings depend on data and schedule only (plus a part linear in
    the zero-point train coefficients for empirical data), so a solver
    evaluating many candidate thetas pays for quadrature once.
    """

    def __init__(self, model: ThetaModel, data, schedule: Schedule | None = None):
        self.model = model
        self.schedule = schedule or Schedule.for_data(data)
        self.sd = _as_spectral(model, data, self.schedule.grid_step)
        self.skipped: list[str] = []
        pts = self.sd.grid.points
        self._pts = pts
        self._ap = _adjust_point(model, self.sd)

        for sp in model.singular_points:
            if sp.location != 0.0 and model.ordinary is None:
                raise EivError(
                    "scale comparison at a nonzero singular point needs an "
                    "ordinary part"
                )

        if model.ordinary is not None:
            self.windows = ordinary_windows(model, self.schedule)
            self._win_vals = [w(pts) for w in self.windows]
            self._scale_stages = []
            for xi in self.schedule.xi_schedule:
                bump = PairBump(xi, self.schedule.xi_eps_ratio * xi).unit_normalized()
                self._scale_stages.append((xi, bump.support, np.asarray(bump(pts))))
        else:
            self.windows = []
            self.skipped.extend(["ordinary-shape", "ordinary-scale"])

        self._sing: list[dict] = []
        for l, sp in enumerate(model.singular_points):
            eps = _sing_eps_for(model, l, self.schedule)
            stages = []
            for eps_n in self.schedule.sing_eps_n:
                probes_y, probes_xy = [], []
                for i in range(sp.k_bar + 1):
                    mu = _singular_probe(sp.location, i + 1, eps, eps_n)
                    q_y = _MomentKilled(DerivativeOf(mu), sp.location, eps, pts)
                    q_xy = _MomentKilled(mu, sp.location, eps, pts)
                    probes_y.append(_ProbePairing(self.sd, "y", q_y, self._ap))
                    probes_xy.append(_ProbePairing(self.sd, "xy", q_xy, self._ap))
                stages.append((eps_n, probes_y, probes_xy))
            entry = {"l": l, "sp": sp, "eps": eps, "stages": stages, "ord_stages": None}
            if sp.location != 0.0:
                ords = []
                for xi in self.schedule.xi_schedule:
                    bump = PairBump(
                        xi, self.schedule.xi_eps_ratio * xi, center=sp.location
                    ).unit_normalized()
                    ords.append((xi, bump.support, np.asarray(bump(pts))))
                entry["ord_stages"] = ords
            self._sing.append(entry)
        if not model.singular_points:
            self.skipped.extend(["singular-shape", "singular-scale"])

    # -- family evaluations -------------------------------------------------

    def _gamma_coeffs(self, theta: np.ndarray) -> np.ndarray | None:
        if self._ap is None:
            return None
        return np.asarray(self._ap.coeffs(theta), dtype=complex)

    def _ordinary_shape(self, theta: np.ndarray) -> list[complex]:
        reg_y, reg_xy = _adjusted_regulars(self.model, self.sd, theta, self._ap)
        gamma = self.model.gamma_o(self._pts, theta)
        dgamma = self.model.dgamma_oo(self._pts, theta)
        out = []
        for wv in self._win_vals:
            val = np.trapezoid(
                reg_y * 1j * dgamma * wv + reg_xy * gamma * wv, self._pts
            )
            out.append(complex(val))
        return out

    def _ordinary_scale(self, theta: np.ndarray) -> complex:
        reg_y, _ = _adjusted_regulars(self.model, self.sd, theta, self._ap)
        denom = np.conj(self.model.gamma_o(-self._pts, theta))
        hs, vals = [], []
        for xi, support, bump_vals in self._scale_stages:
            _check_window_clear(self.model, theta, support)
            integrand = _safe_div(reg_y * bump_vals, denom)
            vals.append(complex(np.trapezoid(integrand, self._pts)) - 1.0)
            hs.append(xi)
        return extrapolate_to_zero(hs, vals)

    def _singular_terms(self, theta: np.ndarray, entry) -> tuple[np.ndarray, complex]:
        sp = entry["sp"]
        gm = build_gamma_matrices(self.model, entry["l"], theta)
        gc = self._gamma_coeffs(theta)
        c0 = _cross_const(self.model, self.sd, theta, self._ap) if self._ap else 0.0
        shape_stages, delta_stages, hs = [], [], []
        for eps_n, probes_y, probes_xy in entry["stages"]:
            y = np.array(
                [
                    (-1.0) ** i / (i + 1.0) * p.at(gc)
                    for i, p in enumerate(probes_y)
                ]
            )
            xy = np.array(
                [
                    (-1.0) ** i / (i + 1.0) * p.at(gc, c0)
                    for i, p in enumerate(probes_xy)
                ]
            )
            ty = np.linalg.solve(gm.gamma_y, y / gm.m_diag)
            txy = np.linalg.solve(gm.gamma_xy, xy / gm.m_diag)
            shape_stages.append(ty + 1j * txy)
            delta_stages.append(complex(ty[0]) / (2.0 * np.pi))
            hs.append(eps_n)
        shape = (
            np.array(
                [
                    extrapolate_to_zero(hs, [st[i] for st in shape_stages])
                    for i in range(sp.k_bar + 1)
                ]
            )
            if sp.k_bar >= 1
            else None
        )
        phi_delta = extrapolate_to_zero(hs, delta_stages)
        if sp.location == 0.0:
            scale = phi_delta - 1.0
        else:
            reg_y, _ = _adjusted_regulars(self.model, self.sd, theta, self._ap)
            denom = np.conj(self.model.gamma_o(-self._pts, theta))
            os, ovals = [], []
            for xi, support, bump_vals in entry["ord_stages"]:
                _check_window_clear(self.model, theta, support)
                integrand = _safe_div(reg_y * bump_vals, denom)
                ovals.append(complex(np.trapezoid(integrand, self._pts)))
                os.append(xi)
            scale = phi_delta - extrapolate_to_zero(os, ovals)
        return shape, scale

    def eq(self, theta) -> EqResult:
        theta = np.asarray(theta, dtype=float)
        labels, values, parts = [], [], {}

        def push(label: str, val: complex):
            parts[label] = complex(val)
            labels.extend([f"{label}:re", f"{label}:im"])
            values.extend([val.real, val.imag])

        if self.model.ordinary is not None:
            for k, val in enumerate(self._ordinary_shape(theta)):
                push(f"ordinary-shape[{k}]", val)
            push("ordinary-scale", self._ordinary_scale(theta))
        for entry in self._sing:
            l = entry["l"]
            shape, scale = self._singular_terms(theta, entry)
            if shape is not None:
                for i, val in enumerate(shape):
                    push(f"singular-shape[{l}][{i}]", val)
            push(f"singular-scale[{l}]", scale)
        return EqResult(
            np.asarray(values, dtype=float), tuple(labels), tuple(self.skipped), parts
        )


def _safe_div(num: np.ndarray, denom: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    mask = num != 0
    out[mask] = num[mask] / denom[mask]
    return out


def eq_vector(model: ThetaModel, theta, data, schedule: Schedule | None = None) -> EqResult:
    """Stack real and imaginary parts of every defined moment family."""
    return EqEvaluator(model, data, schedule).eq(theta)


@dataclass(frozen=True)
class GmmResult:
    theta: np.ndarray
    eq_norm: float
    n_nm_iter: int
    n_gn_iter: int
    converged: bool
    message: str
    trace: tuple


def _numeric_jacobian(f, theta: np.ndarray, rel_step: float = 1e-5) -> np.ndarray:
    base = f(theta)
    jac = np.zeros((len(base), len(theta)))
    for j in range(len(theta)):
        h = rel_step * max(1.0, abs(theta[j]))
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (f(up) - f(dn)) / (2.0 * h)
    return jac


def gmm_solve(
    model: ThetaModel,
    data,
    theta_init,
    schedule: Schedule | None = None,
    nm_budget: int = 400,
    gn_budget: int = 25,
    tol: float = 1e-10,
) -> GmmResult:
    """Minimize the squared stacked conditions: simplex search with one
    restart, then a damped Gauss-Newton polish with a numeric Jacobian."""
    ev = EqEvaluator(model, data, schedule)
    theta_init = np.asarray(theta_init, dtype=float)
    trace: list[tuple] = []

    def eq_of(theta: np.ndarray) -> np.ndarray:
        try:
            return ev.eq(theta).values
        except AssumptionViolation:
            return None

    init_vals = eq_of(theta_init)
    init_norm = float(np.linalg.norm(init_vals)) if init_vals is not None else np.inf

    def objective(theta: np.ndarray) -> float:
        vals = eq_of(theta)
        if vals is None:
            return 1e10
        obj = float(vals @ vals)
        trace.append((len(trace), math.sqrt(obj), tuple(theta)))
        return obj

    res = minimize(
        objective,
        theta_init,
        method="Nelder-Mead",
        options={"maxiter": nm_budget, "xatol": 1e-10, "fatol": 1e-14},
    )
    res2 = minimize(
        objective,
        res.x,
        method="Nelder-Mead",
        options={"maxiter": nm_budget // 2, "xatol": 1e-12, "fatol": 1e-16},
    )
    theta = res2.x if res2.fun <= res.fun else res.x
    nm_iter = int(res.nit + res2.nit)

    gn_iter = 0
    best = eq_of(theta)
    if best is None:
        return GmmResult(theta, float("inf"), nm_iter, 0, False, "inadmissible point", tuple(trace))
    best_norm = float(np.linalg.norm(best))
    for _ in range(gn_budget):
        gn_iter += 1
        jac = _numeric_jacobian(lambda t: _guarded(eq_of, t, best), theta)
        step, *_ = np.linalg.lstsq(jac, -best, rcond=None)
        improved = False
        lam = 1.0
        for _ in range(8):
            cand = theta + lam * step
            vals = eq_of(cand)
            if vals is not None and np.linalg.norm(vals) < best_norm:
                theta, best, best_norm = cand, vals, float(np.linalg.norm(vals))
                trace.append((len(trace), best_norm, tuple(theta)))
                improved = True
                break
            lam *= 0.5
        if not improved or best_norm < tol:
            break

    converged = best_norm < max(1e-3, 0.05 * init_norm)
    msg = "converged" if converged else "stopped at budget; inspect eq_norm"
    return GmmResult(theta, best_norm, nm_iter, gn_iter, converged, msg, tuple(trace))


def _guarded(eq_of, theta, fallback):
    vals = eq_of(theta)
    return vals if vals is not None else fallback


@dataclass(frozen=True)
class RankResult:
    jacobian: np.ndarray
    rank: int
    singular_values: np.ndarray


def rank_check(
    model: ThetaModel,
    theta,
    data,
    schedule: Schedule | None = None,
    rel_step: float = 1e-5,
) -> RankResult:
    """Central-difference Jacobian of the stacked conditions; the rank
    counts singular values above 1e-8 of the largest."""
    ev = EqEvaluator(model, data, schedule)
    theta = np.asarray(theta, dtype=float)
    jac = _numeric_jacobian(lambda t: ev.eq(t).values, theta, rel_step)
    svals = np.linalg.svd(jac, compute_uv=False)
    rank = int(np.sum(svals > 1e-8 * svals[0])) if len(svals) and svals[0] > 0 else 0
    return RankResult(jac, rank, svals)


# ---------------------------------------------------------------------------
# model registry


_SQRT_PI = math.sqrt(math.pi)


def _gauss3() -> ThetaModel:
    # t1 + t2*x + t3*exp(-x^2): train (t1, -i t2) at 0, Gaussian ordinary part
    def value(zeta, theta):
        return theta[2] * _SQRT_PI * np.exp(-0.25 * zeta * zeta) + 0j

    def deriv(zeta, theta):
        return theta[2] * _SQRT_PI * (-0.5 * zeta) * np.exp(-0.25 * zeta * zeta) + 0j

    return ThetaModel(
        name="gauss3",
        theta_dim=3,
        m_ordinary=1,
        m_singular=2,
        ordinary=OrdinaryPart(value, deriv),
        singular_points=(
            SingularPoint(0.0, 1, lambda th: np.array([th[0], -1j * th[1]])),
        ),
        zeta_bar=4.0,
        theta_ref=(1.0, 0.5, 2.0),
    )


def _gauss_rational() -> ThetaModel:
    # t1*exp(-x^2) + t2*exp(-|x|): purely ordinary two-parameter curve
    def value(zeta, theta):
        return (
            theta[0] * _SQRT_PI * np.exp(-0.25 * zeta * zeta)
            + 2.0 * theta[1] / (1.0 + zeta * zeta)
            + 0j
        )

    def deriv(zeta, theta):
        return (
            theta[0] * _SQRT_PI * (-0.5 * zeta) * np.exp(-0.25 * zeta * zeta)
            - 4.0 * theta[1] * zeta / (1.0 + zeta * zeta) ** 2
            + 0j
        )

    return ThetaModel(
        name="gauss+rational",
        theta_dim=2,
        m_ordinary=2,
        m_singular=0,
        ordinary=OrdinaryPart(value, deriv),
        singular_points=(),
        zeta_bar=4.0,
        theta_ref=(1.0, 1.0),
    )


def _indicator() -> ThetaModel:
    # t1 on [-t2, t2): transform 2 t1 sin(t2 zeta)/zeta
    def value(zeta, theta):
        z = np.asarray(zeta, dtype=float)
        return 2.0 * theta[0] * theta[1] * np.sinc(theta[1] * z / np.pi) + 0j

    def deriv(zeta, theta):
        z = np.asarray(zeta, dtype=float)
        u = theta[1] * z
        out = np.empty(np.shape(u))
        small = np.abs(u) < 1e-2
        us = u[small]
        out[small] = us * (-1.0 / 3.0 + us * us / 30.0)
        ub = u[~small]
        out[~small] = (ub * np.cos(ub) - np.sin(ub)) / (ub * ub)
        return 2.0 * theta[0] * theta[1] ** 2 * out + 0j

    return ThetaModel(
        name="indicator",
        theta_dim=2,
        m_ordinary=2,
        m_singular=0,
        ordinary=OrdinaryPart(value, deriv),
        singular_points=(),
        zeta_bar=4.0,
        theta_ref=(1.0, 1.0),
    )


def _poly1() -> ThetaModel:
    # t1 + t2*x: pure train at 0, no ordinary part
    return ThetaModel(
        name="poly1",
        theta_dim=2,
        m_ordinary=0,
        m_singular=2,
        ordinary=None,
        singular_points=(
            SingularPoint(0.0, 1, lambda th: np.array([th[0], -1j * th[1]])),
        ),
        zeta_bar=4.0,
        theta_ref=(1.0, 0.5),
    )


def _const() -> ThetaModel:
    # t1: single zero-order train coefficient
    return ThetaModel(
        name="const",
        theta_dim=1,
        m_ordinary=0,
        m_singular=1,
        ordinary=None,
        singular_points=(SingularPoint(0.0, 0, lambda th: np.array([th[0] + 0j])),),
        zeta_bar=4.0,
        theta_ref=(1.0,),
    )


def _cosine_rational(omega: float = 1.0) -> ThetaModel:
    # t1*cos(omega x) + t2*exp(-|x|): train at omega, rational ordinary part
    def value(zeta, theta):
        return 2.0 * theta[1] / (1.0 + np.asarray(zeta, float) ** 2) + 0j

    def deriv(zeta, theta):
        z = np.asarray(zeta, dtype=float)
        return -4.0 * theta[1] * z / (1.0 + z * z) ** 2 + 0j

    return ThetaModel(
        name="cosine+rational",
        theta_dim=2,
        m_ordinary=1,
        m_singular=1,
        ordinary=OrdinaryPart(value, deriv),
        singular_points=(
            SingularPoint(omega, 0, lambda th: np.array([th[0] / 2.0 + 0j])),
        ),
        zeta_bar=4.0,
        theta_ref=(1.0, 1.0),
    )


_REGISTRY: dict[str, Callable[..., ThetaModel]] = {
    "gauss3": _gauss3,
    "gauss+rational": _gauss_rational,
    "indicator": _indicator,
    "poly1": _poly1,
    "const": _const,
    "cosine+rational": _cosine_rational,
}


def registered_models() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def build_model(name: str, zeta_bar: float | None = None, omega: float | None = None) -> ThetaModel:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise EivError(
            f"unknown model {name!r}; registered: {', '.join(registered_models())}"
        ) from None
    model = factory(omega) if (name == "cosine+rational" and omega is not None) else factory()
    if zeta_bar is not None:
        model = replace(model, zeta_bar=float(zeta_bar))
    return model
