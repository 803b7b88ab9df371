"""Constructive recovery of the error characteristic function and regression.

The chain: form the outcome and cross spectra, take the pointwise ratio
kappa = (eps_y' - i*eps_xy)/eps_y on the band where the outcome spectrum is
informative, integrate and exponentiate to the characteristic function phi
with phi(0) = 1, divide the outcome spectrum by phi inside the band, and
invert.  Trimming plus linear interpolation of kappa across the trimmed
gaps is the regularization: kappa is continuous, so interpolation is sound
where division is not.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .estimate import moments_to_spectra
from .exceptions import (
    CharFnZeroError,
    DivergentIntegrandError,
    EivError,
    NoSignalError,
    UnidentifiableBandError,
)
from .numerics import (
    GridSpectrum,
    PiecewiseLinearFunction,
    RealGrid,
    StepFunction,
    antiderivative_from_zero,
)
from .spectral import inverse_ft_grid

__all__ = [
    "RegularizationConfig",
    "DeconvDiagnostics",
    "DeconvResult",
    "kappa_from_spectra",
    "phi_from_kappa",
    "deconvolve",
    "run_pipeline",
    "pilot_zeta_bar",
]

log = logging.getLogger(__name__)

_EXP_LIMIT = 700.0  # exp overflow guard for the integrated log-derivative
_PHI_FLOOR = 1e-12


@dataclass(frozen=True)
class RegularizationConfig:
    """Knobs the identification theory leaves open.

    zeta_bar: band edge (the transform of the regression function is taken
    to vanish beyond it); trim_threshold: smallest |eps_y| treated as
    informative; interpolate_trimmed: bridge interior trimmed gaps by
    linear interpolation of the ratio.
    """

    zeta_bar: float
    trim_threshold: float
    grid: RealGrid
    interpolate_trimmed: bool = True

    def __post_init__(self):
        if self.zeta_bar <= 0 or self.zeta_bar > self.grid.hi:
            raise EivError("need 0 < zeta_bar <= grid.hi")
        if self.trim_threshold <= 0:
            raise EivError("trim_threshold must be positive")
        if not self.grid.is_symmetric:
            raise EivError("deconvolution grid must be symmetric with 0 on it")


@dataclass(frozen=True)
class DeconvDiagnostics:
    min_abs_eps_y: float
    trimmed_fraction: float
    imag_residual: float
    zeta_bar: float


@dataclass(frozen=True)
class DeconvResult:
    kappa: GridSpectrum
    phi: GridSpectrum
    gamma: GridSpectrum
    g_grid: RealGrid
    g_values: np.ndarray
    diagnostics: DeconvDiagnostics


def kappa_from_spectra(
    eps_y: GridSpectrum,
    eps_xy: GridSpectrum,
    deps_y: GridSpectrum,
    cfg: RegularizationConfig,
) -> GridSpectrum:
    """Pointwise ratio (eps_y' - i*eps_xy)/eps_y on the informative band.

    Trimmed interior gaps are bridged by linear interpolation (the ratio
    is continuous); gaps touching the band edge extend the nearest value.
    """
    grid = eps_y.grid
    if eps_xy.grid != grid or deps_y.grid != grid:
        raise EivError("spectra must share one grid")
    zeta = grid.points
    band = np.abs(zeta) <= cfg.zeta_bar
    informative = band & (np.abs(eps_y.values) >= cfg.trim_threshold)
    n_band = int(np.sum(band))
    n_info = int(np.sum(informative))
    if n_info == 0:
        raise NoSignalError("outcome spectrum below threshold on the whole band")
    trimmed_fraction = 1.0 - n_info / n_band
    if trimmed_fraction > 0.5:
        raise UnidentifiableBandError(
            f"{trimmed_fraction:.0%} of the band is below the trim threshold"
        )
    if not cfg.interpolate_trimmed and n_info < n_band:
        raise UnidentifiableBandError(
            "trimmed gaps present and interpolation is disabled"
        )

    numer = deps_y.values - 1j * eps_xy.values
    vals = np.zeros(grid.n_points, dtype=complex)
    good = zeta[informative]
    ratio = numer[informative] / eps_y.values[informative]
    fill = zeta[band]
    vals[band] = np.interp(fill, good, np.real(ratio)) + 1j * np.interp(
        fill, good, np.imag(ratio)
    )
    return GridSpectrum(grid, vals, hermitian=False)


def phi_from_kappa(kappa: GridSpectrum) -> GridSpectrum:
    """exp of the cumulative integral of kappa from 0; value 1 exactly at 0."""
    integral = antiderivative_from_zero(kappa)
    mag = np.abs(np.real(integral.values))
    if np.any(mag > _EXP_LIMIT):
        k = int(np.argmax(mag > _EXP_LIMIT))
        raise DivergentIntegrandError(float(kappa.grid.points[k]), float(mag[k]))
    return kappa.with_values(np.exp(integral.values), hermitian=False)


def deconvolve(
    eps_y: GridSpectrum, phi: GridSpectrum, cfg: RegularizationConfig
) -> GridSpectrum:
    """eps_y / phi inside the band, zero beyond it."""
    grid = eps_y.grid
    zeta = grid.points
    band = np.abs(zeta) <= cfg.zeta_bar
    small = band & (np.abs(phi.values) < _PHI_FLOOR)
    if np.any(small):
        raise CharFnZeroError(float(zeta[np.argmax(small)]))
    vals = np.zeros(grid.n_points, dtype=complex)
    vals[band] = eps_y.values[band] / phi.values[band]
    return GridSpectrum(grid, vals, hermitian=False)


def run_pipeline(
    w_y: StepFunction,
    w_xy: StepFunction | PiecewiseLinearFunction,
    cfg: RegularizationConfig,
    target: RealGrid,
) -> DeconvResult:
    """Full chain from moment carriers to the recovered regression function."""
    eps_y, eps_xy, deps_y = moments_to_spectra(w_y, w_xy, cfg.grid)
    kappa = kappa_from_spectra(eps_y, eps_xy, deps_y, cfg)
    phi = phi_from_kappa(kappa)
    gamma = deconvolve(eps_y, phi, cfg)
    g_values, residual = inverse_ft_grid(gamma, target)

    band = np.abs(cfg.grid.points) <= cfg.zeta_bar
    informative = band & (np.abs(eps_y.values) >= cfg.trim_threshold)
    diag = DeconvDiagnostics(
        min_abs_eps_y=float(np.min(np.abs(eps_y.values[band]))),
        trimmed_fraction=float(1.0 - informative.sum() / band.sum()),
        imag_residual=residual,
        zeta_bar=cfg.zeta_bar,
    )
    peak = float(np.max(np.abs(g_values))) if len(g_values) else 0.0
    if peak > 0 and residual > 1e-2 * peak:
        log.warning(
            "imaginary residual %.3g exceeds 1%% of the recovered peak %.3g",
            residual,
            peak,
        )
    return DeconvResult(kappa, phi, gamma, target, g_values, diag)


def pilot_zeta_bar(
    eps_y: GridSpectrum,
    eps_xy: GridSpectrum,
    deps_y: GridSpectrum,
    trim_threshold: float,
) -> float:
    """Default band edge: largest frequency where a pilot characteristic-
    function estimate stays above 10x the trim threshold."""
    grid = eps_y.grid
    cfg = RegularizationConfig(
        zeta_bar=grid.hi, trim_threshold=trim_threshold, grid=grid
    )
    kappa = kappa_from_spectra(eps_y, eps_xy, deps_y, cfg)
    phi = phi_from_kappa(kappa)
    alive = np.abs(phi.values) >= 10.0 * trim_threshold
    zeta = np.abs(grid.points)
    if not np.any(alive):
        return grid.hi
    return float(np.max(zeta[alive]))
