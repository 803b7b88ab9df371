"""Binned estimation of the conditional moments and the instrument density.

The sample is cut into equal-width z-bins; within each bin the outcome
mean and the mean of y*(z - x) become step-function values, and the
instrument density is the floored histogram.  Sparse bins are pooled into
their nearest populated neighbor so the estimated support stays one
interval.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import EivError, InsufficientDataError
from .numerics import GridSpectrum, PiecewiseLinearFunction, RealGrid, StepFunction
from .spectral import ft_piecewise_linear, ft_step, ft_step_derivative

__all__ = [
    "Sample",
    "DensityEstimate",
    "BinnedMoments",
    "default_bin_count",
    "bin_conditional_means",
    "moments_to_spectra",
    "read_sample_csv",
    "write_sample_csv",
]


@dataclass(frozen=True)
class Sample:
    """Observations (y, x, z), one row per unit."""

    y: np.ndarray
    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        arrs = {}
        n = None
        for name in ("y", "x", "z"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim != 1 or len(a) == 0:
                raise EivError("sample columns must be nonempty 1-d arrays")
            if not np.all(np.isfinite(a)):
                raise EivError(f"sample column {name} contains non-finite values")
            if n is None:
                n = len(a)
            elif len(a) != n:
                raise EivError("sample columns must share length")
            a.setflags(write=False)
            arrs[name] = a
        for name, a in arrs.items():
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class DensityEstimate:
    """Histogram density with a positive floor (moments divide by it)."""

    hist: StepFunction
    floor: float

    def __call__(self, z) -> np.ndarray:
        # closed at both edges: the max(z) observation is inside its bin
        b = self.hist.breakpoints
        z = np.asarray(z, dtype=float)
        idx = np.clip(
            np.searchsorted(b, z, side="right") - 1, 0, len(self.hist.values) - 1
        )
        inside = (z >= b[0]) & (z <= b[-1])
        return np.maximum(np.where(inside, self.hist.values[idx], 0.0), self.floor)

    def integral_before_floor(self) -> float:
        return self.hist.integral()


class BinnedMoments(NamedTuple):
    w_y: StepFunction
    w_xy_step: StepFunction
    p_hat: DensityEstimate
    kept_range: tuple[float, float]


def default_bin_count(n: int) -> int:
    """ceil(n^(1/3)), clamped to [10, 200]."""
    return int(np.clip(np.ceil(n ** (1.0 / 3.0)), 10, 200))


def bin_conditional_means(
    sample: Sample, n_bins: int, min_per_bin: int = 20
) -> BinnedMoments:
    """Equal-width binned means of y and y*(z - x), plus the floored density.

    Bins with fewer than ``min_per_bin`` observations are pooled into the
    nearest populated bin, widening its interval.
    """
    if n_bins < 2:
        raise EivError("need at least 2 bins")
    if sample.n < n_bins * min_per_bin:
        raise InsufficientDataError(
            f"sample of {sample.n} cannot fill {n_bins} bins at {min_per_bin} each"
        )
    z = sample.z
    lo, hi = float(np.min(z)), float(np.max(z))
    if lo == hi:
        raise InsufficientDataError("all z values identical")
    edges = np.linspace(lo, hi, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, z, side="right") - 1, 0, n_bins - 1)

    counts = np.bincount(idx, minlength=n_bins)
    populated = np.flatnonzero(counts >= min_per_bin)
    if len(populated) == 0:
        raise InsufficientDataError("every bin is sparse; lower n_bins or min_per_bin")

    # pool each sparse bin into the nearest populated bin (by center distance)
    centers = (edges[:-1] + edges[1:]) / 2.0
    owner = np.empty(n_bins, dtype=int)
    for k in range(n_bins):
        if counts[k] >= min_per_bin:
            owner[k] = k
        else:
            owner[k] = populated[np.argmin(np.abs(centers[populated] - centers[k]))]
    group = owner[idx]

    sum_y = np.bincount(group, weights=sample.y, minlength=n_bins)
    sum_yzx = np.bincount(
        group, weights=sample.y * (sample.z - sample.x), minlength=n_bins
    )
    group_counts = np.bincount(group, minlength=n_bins)

    # contiguous merged intervals: each populated bin absorbs the sparse bins it owns
    merged_edges = [lo]
    wy_vals, wxy_vals, p_vals = [], [], []
    for j, k in enumerate(populated):
        members = np.flatnonzero(owner == k)
        right = edges[members[-1] + 1]
        merged_edges.append(float(right))
        c = group_counts[k]
        wy_vals.append(sum_y[k] / c)
        wxy_vals.append(sum_yzx[k] / c)
        width = merged_edges[-1] - merged_edges[-2]
        p_vals.append(c / (sample.n * width))
    merged_edges = np.asarray(merged_edges)

    w_y = StepFunction(merged_edges, np.asarray(wy_vals))
    w_xy = StepFunction(merged_edges, np.asarray(wxy_vals))
    floor = 1e-6 / (hi - lo)
    p_hat = DensityEstimate(StepFunction(merged_edges, np.asarray(p_vals)), floor)
    return BinnedMoments(w_y, w_xy, p_hat, (lo, hi))


def _lift_wxy(
    w_y: StepFunction, w_xy_step: StepFunction, alpha_threshold: float
) -> tuple[PiecewiseLinearFunction | None, StepFunction | None]:
    """Re-express binned cross moments in truncated-linear canonical form.

    Per bin with outcome mean a and cross-moment mean b, the carrier
    a*(v - b/a) on the bin reproduces both observable bin moments (the
    y-weighted mean offset of x from z is b/a).  Bins where |a| falls
    under the threshold contribute a constant E[XY | bin] piece instead.
    """
    if not np.array_equal(w_y.breakpoints, w_xy_step.breakpoints):
        raise EivError("carriers must share breakpoints")
    t, tau = w_y.midpoints_halfwidths()
    lin, fallback_vals = [], np.zeros(len(w_y.values))
    use_fallback = False
    for k, (a, b) in enumerate(zip(w_y.values, w_xy_step.values)):
        if abs(a) > alpha_threshold:
            lin.append((a, t[k], b / a, tau[k]))
        elif b != 0.0:
            # carrier value ~ E[XY | bin] = z*E[Y] - E[Y(Z-X)] ~ t*a - b
            fallback_vals[k] = t[k] * a - b
            use_fallback = True
    pwl = None
    if lin:
        al, ce, of, hw = map(np.asarray, zip(*lin))
        pwl = PiecewiseLinearFunction(al, ce, of, hw)
    fb = StepFunction(w_y.breakpoints, fallback_vals) if use_fallback else None
    return pwl, fb


def moments_to_spectra(
    w_y: StepFunction,
    w_xy: StepFunction | PiecewiseLinearFunction,
    grid: RealGrid,
) -> tuple[GridSpectrum, GridSpectrum, GridSpectrum]:
    """Transform moment carriers to (eps_y, eps_xy, d/dzeta eps_y).

    A step-form cross moment is first lifted to the truncated-linear
    canonical form (see ``_lift_wxy``); the derivative of eps_y comes from
    the analytic sinc-expansion derivative, never from differencing.
    """
    eps_y = ft_step(w_y, grid)
    deps_y = ft_step_derivative(w_y, grid)
    if isinstance(w_xy, PiecewiseLinearFunction):
        eps_xy = ft_piecewise_linear(w_xy, grid)
    else:
        thresh = 1e-8 * max(1.0, float(np.max(np.abs(w_y.values))))
        pwl, fb = _lift_wxy(w_y, w_xy, thresh)
        vals = np.zeros(grid.n_points, dtype=complex)
        if pwl is not None:
            vals = vals + ft_piecewise_linear(pwl, grid).values
        if fb is not None:
            vals = vals + ft_step(fb, grid).values
        eps_xy = GridSpectrum(grid, vals, hermitian=True)
    return eps_y, eps_xy, deps_y


def read_sample_csv(path) -> Sample:
    """Read a y,x,z sample; '#'-prefixed lines are metadata comments."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or [c.strip() for c in rows[0]] != ["y", "x", "z"]:
        raise EivError(f"{path}: expected header 'y,x,z'")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    if data.size == 0:
        raise EivError(f"{path}: no observations")
    return Sample(y=data[:, 0], x=data[:, 1], z=data[:, 2])


def write_sample_csv(path, sample: Sample, metadata: dict | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key, val in (metadata or {}).items():
            fh.write(f"# {key}={val}\n")
        fh.write("y,x,z\n")
        for y, x, z in zip(sample.y, sample.x, sample.z):
            fh.write(f"{y!r},{x!r},{z!r}\n")
