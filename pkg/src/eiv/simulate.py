"""Data-generating processes and exact conditional-moment oracles.

The observation scheme: Z is drawn from the instrument law, the error
U from a finite discrete distribution, the latent regressor is Z - U,
and the recorded pair is (Y, X) = (g(Z - U) + noise_y, Z - U + noise_x).
Measurement error is kept discrete so the moment oracles are exact
finite sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .estimate import Sample
from .exceptions import EivError
from .numerics import DiscreteDistribution, PiecewiseLinearFunction, StepFunction

__all__ = [
    "ZSpec",
    "DGP",
    "draw",
    "oracle_moments",
    "oracle_moments_on_grid",
    "default_dgp",
    "default_error_distribution",
    "default_step_g",
    "gauss3_g",
    "gauss3_dgp",
]


@dataclass(frozen=True)
class ZSpec:
    """Instrument law: uniform on [a, b] or Gaussian(mu, sigma)."""

    kind: Literal["uniform", "gaussian"] = "uniform"
    a: float = -3.0
    b: float = 3.0

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b, size=n)
        if self.kind == "gaussian":
            return self.a + self.b * rng.standard_normal(n)
        raise EivError(f"unknown z law {self.kind!r}")


@dataclass(frozen=True)
class DGP:
    """Full data-generating process; ``draw`` is deterministic given the seed."""

    g: Callable[[np.ndarray], np.ndarray]
    F: DiscreteDistribution
    z: ZSpec = field(default_factory=ZSpec)
    sigma_dy: float = 0.0
    sigma_dx: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_dy < 0 or self.sigma_dx < 0:
            raise EivError("noise standard deviations must be nonnegative")


def draw(dgp: DGP, n: int) -> Sample:
    """Draw n observations (y, x, z), all noise sources independent."""
    if n < 1:
        raise EivError("need n >= 1")
    rng = np.random.default_rng(dgp.seed)
    z = dgp.z.draw(rng, n)
    u = rng.choice(dgp.F.locations, size=n, p=dgp.F.weights)
    x_star = z - u
    y = np.asarray(dgp.g(x_star), dtype=float) + dgp.sigma_dy * rng.standard_normal(n)
    x = x_star + dgp.sigma_dx * rng.standard_normal(n)
    return Sample(y=y, x=x, z=z)


def oracle_moments(
    g: StepFunction, F: DiscreteDistribution
) -> tuple[StepFunction, PiecewiseLinearFunction]:
    """Exact conditional-moment carriers for a step regression function.

    The outcome mean sum_j c_j g(z - d_j) is again a step function on the
    shifted breakpoint set; the cross moment sum_j c_j (z - d_j) g(z - d_j)
    is a sum of truncated linear pieces, one per (step, atom) pair, with
    slope a_k c_j, window center d_j + (b_k + b_{k+1})/2, offset d_j and
    half-width (b_{k+1} - b_k)/2.
    """
    cuts = np.unique(
        np.concatenate([g.breakpoints + d for d in F.locations])
    )
    mids = (cuts[:-1] + cuts[1:]) / 2.0
    wy_vals = np.zeros(len(mids))
    for c, d in zip(F.weights, F.locations):
        wy_vals += c * g(mids - d)
    w_y = StepFunction(cuts, wy_vals)

    t_mid, tau = g.midpoints_halfwidths()
    alphas, centers, offsets, halfwidths = [], [], [], []
    for ak, tk, tauk in zip(g.values, t_mid, tau):
        for c, d in zip(F.weights, F.locations):
            alphas.append(ak * c)
            centers.append(d + tk)
            offsets.append(d)
            halfwidths.append(tauk)
    w_xy = PiecewiseLinearFunction(alphas, centers, offsets, halfwidths)
    return w_y, w_xy


def oracle_moments_on_grid(
    g: Callable[[np.ndarray], np.ndarray], F: DiscreteDistribution, z_grid: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise moment oracle for an arbitrary regression function."""
    z = np.asarray(z_grid, dtype=float)
    w_y = np.zeros(len(z))
    w_xy = np.zeros(len(z))
    for c, d in zip(F.weights, F.locations):
        gz = np.asarray(g(z - d), dtype=float)
        w_y += c * gz
        w_xy += c * (z - d) * gz
    return w_y, w_xy


def default_step_g() -> StepFunction:
    """Indicator regression function: 1 on [-1, 1)."""
    return StepFunction(np.array([-1.0, 1.0]), np.array([1.0]))


def default_error_distribution() -> DiscreteDistribution:
    """Three-atom error: mass 1/2 at 0 and 1/4 at each of -0.3, 0.3."""
    return DiscreteDistribution(
        np.array([0.25, 0.5, 0.25]), np.array([-0.3, 0.0, 0.3])
    )


def default_dgp(seed: int = 0) -> DGP:
    """The frozen reference process used throughout the test suite."""
    return DGP(
        g=default_step_g(),
        F=default_error_distribution(),
        z=ZSpec("uniform", -3.0, 3.0),
        sigma_dy=0.2,
        sigma_dx=0.1,
        seed=seed,
    )


def gauss3_g(theta) -> Callable[[np.ndarray], np.ndarray]:
    """Three-parameter curve t1 + t2*x + t3*exp(-x^2)."""
    t1, t2, t3 = (float(v) for v in theta)

    def g(x):
        x = np.asarray(x, dtype=float)
        return t1 + t2 * x + t3 * np.exp(-x * x)

    return g


def gauss3_dgp(theta=(1.0, 0.5, 2.0), seed: int = 0, z_half: float = 4.0) -> DGP:
    """Sampling process for the three-parameter model under the frozen noise."""
    return DGP(
        g=gauss3_g(theta),
        F=default_error_distribution(),
        z=ZSpec("uniform", -z_half, z_half),
        sigma_dy=0.2,
        sigma_dx=0.1,
        seed=seed,
    )
