"""Unadjusted Langevin chains with pluggable Gaussian drives.

The update is theta_k = theta_{k-1} - h_k grad U(theta_{k-1})
+ sqrt(2 h_k) xi_k.  The chain core never branches on where xi comes
from: every drive kind is materialized into an (n, d) array first, so a
quasi-random chain fed the same xi values as a pseudo-random one produces
the identical path.  Stochastic gradients (minibatch subsampling) draw
their indices from the baseline generator, never from the driving
sequence, so the quasi-random structure is spent on the perturbation only.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .drive import DriveMatrix, GaussianDrive, clamped_normal, gaussian_rows
from .errors import ConfigurationError, DivergenceError, DomainError
from .prng import BaselinePrng

_NORM_CAP_SQ = 1e16  # ||theta|| > 1e8 aborts the chain

# ---------------------------------------------------------------------------
# Step-size schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantSchedule:
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ConfigurationError("step size must be positive")

    def step_sizes(self, count: int, start: int = 1) -> np.ndarray:
        return np.full(count, self.h)

    def label(self) -> str:
        return f"constant(h={self.h:g})"


@dataclass(frozen=True)
class PolynomialSchedule:
    """h_k = c0 * (c1 + k)**exponent, defaulting to the k**(-1/3) decay."""

    c0: float
    c1: float
    exponent: float = -1.0 / 3.0

    def __post_init__(self):
        if not self.c0 > 0:
            raise ConfigurationError("c0 must be positive")
        if not self.c1 + 1 > 0:
            raise ConfigurationError("c1 + 1 must be positive so every h_k is defined")

    def step_sizes(self, count: int, start: int = 1) -> np.ndarray:
        k = np.arange(start, start + count, dtype=np.float64)
        return self.c0 * (self.c1 + k) ** self.exponent

    def label(self) -> str:
        return f"poly(c0={self.c0:g},c1={self.c1:g},e={self.exponent:g})"


StepSchedule = Union[ConstantSchedule, PolynomialSchedule]


def solve_polynomial_schedule(
    h_start: float, h_end: float, n: int, exponent: float = -1.0 / 3.0
) -> PolynomialSchedule:
    """Polynomial schedule hitting h_1 = h_start and h_n = h_end exactly.

    Solves the two endpoint equations for (c0, c1); requires
    h_start > h_end > 0, a negative exponent, and n >= 2.
    """
    if not (h_start > h_end > 0):
        raise ConfigurationError("need h_start > h_end > 0")
    if exponent >= 0:
        raise ConfigurationError("exponent must be negative for a decreasing schedule")
    if n < 2:
        raise ConfigurationError("need n >= 2 to pin both endpoints")
    ratio = (h_start / h_end) ** (-1.0 / exponent)  # (c1+n)/(c1+1)
    c1 = (n - ratio) / (ratio - 1.0)
    c0 = h_start * (c1 + 1.0) ** (-exponent)
    return PolynomialSchedule(c0=c0, c1=c1, exponent=exponent)


# ---------------------------------------------------------------------------
# Drives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PseudoRandomDrive:
    """i.i.d. standard normal drive from the baseline generator."""

    seed: int
    stream: int = 0


Drive = Union[PseudoRandomDrive, DriveMatrix, GaussianDrive]


def drive_array(drive: Drive, n: int, d: int) -> np.ndarray:
    """Materialize n iterations of d-dimensional perturbations."""
    if isinstance(drive, PseudoRandomDrive):
        u = BaselinePrng(drive.seed, drive.stream).uniform(n * d)
        return clamped_normal(u).reshape(n, d)
    if isinstance(drive, DriveMatrix):
        if drive.n < n or drive.d != d:
            raise ConfigurationError(
                f"drive matrix is {drive.n}x{drive.d}, chain needs {n}x{d}"
            )
        return gaussian_rows(drive).xi[:n]
    if isinstance(drive, GaussianDrive):
        if drive.n < n or drive.d != d:
            raise ConfigurationError(
                f"gaussian drive is {drive.n}x{drive.d}, chain needs {n}x{d}"
            )
        return drive.xi[:n]
    raise ConfigurationError(f"unknown drive kind {type(drive).__name__}")


# ---------------------------------------------------------------------------
# Chain configuration and runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainConfig:
    theta0: np.ndarray
    n_steps: int
    schedule: StepSchedule
    drive: Drive
    minibatch: int | None = None
    minibatch_seed: int = 0
    minibatch_stream: int = 0
    schedule_start: int = 1  # iteration index of the first step (continuations)

    def __post_init__(self):
        theta0 = np.atleast_1d(np.asarray(self.theta0, dtype=np.float64))
        object.__setattr__(self, "theta0", theta0)
        if self.n_steps < 0:
            raise ConfigurationError("n_steps must be nonnegative")
        if self.minibatch is not None and self.minibatch < 1:
            raise ConfigurationError("minibatch size must be >= 1")

    @property
    def dim(self) -> int:
        return len(self.theta0)


@dataclass(frozen=True)
class ChainRun:
    """Ordered trajectory theta_1..theta_n plus everything that produced it."""

    trajectory: np.ndarray = field(repr=False)
    config: ChainConfig
    potential: object
    segments: tuple[int, ...]
    wall_time: float = 0.0

    @property
    def n(self) -> int:
        return self.trajectory.shape[0]

    def save_trajectory(self, path) -> None:
        """CSV dump (iteration, coordinates); large, off by default everywhere."""
        n, d = self.trajectory.shape
        data = np.column_stack([np.arange(1, n + 1), self.trajectory])
        np.savetxt(path, data, fmt=["%d"] + ["%.17g"] * d, delimiter=",")


def lmc_step(theta: np.ndarray, gradient: np.ndarray, h: float, xi: np.ndarray) -> np.ndarray:
    """One Euler-Maruyama update: theta - h*gradient + sqrt(2h)*xi."""
    theta = np.asarray(theta, dtype=np.float64)
    gradient = np.asarray(gradient, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    if theta.shape != gradient.shape or theta.shape != xi.shape:
        raise DomainError("theta, gradient and xi must share a shape")
    if not h > 0:
        raise DomainError("step size must be positive")
    out = theta - h * gradient + math.sqrt(2.0 * h) * xi
    if not np.all(np.isfinite(out)):
        raise DomainError("non-finite values in the update")
    return out


def _gradient_fn(potential, config: ChainConfig):
    if config.minibatch is None:
        return potential.grad
    if potential.sgrad is None:
        raise ConfigurationError(
            f"potential {potential.name!r} does not support stochastic gradients"
        )
    if potential.num_data is None or config.minibatch > potential.num_data:
        raise ConfigurationError("minibatch size exceeds the dataset")
    rng = BaselinePrng(config.minibatch_seed, config.minibatch_stream)
    n_data = potential.num_data
    batch = config.minibatch

    def grad(theta):
        return potential.sgrad(theta, rng.index_subset(n_data, batch))

    return grad


def run_chain(potential, config: ChainConfig) -> ChainRun:
    """Run one chain; aborts with DivergenceError if ||theta|| exceeds 1e8."""
    d = config.dim
    if potential.dim != d:
        raise ConfigurationError(
            f"potential dimension {potential.dim} != initial point dimension {d}"
        )
    n = config.n_steps
    xi = drive_array(config.drive, n, d)
    hs = config.schedule.step_sizes(n, start=config.schedule_start)
    sq2h = np.sqrt(2.0 * hs)
    grad = _gradient_fn(potential, config)

    t0 = time.perf_counter()
    theta = config.theta0.copy()
    traj = np.empty((n, d))
    for k in range(n):
        theta = theta - hs[k] * grad(theta) + sq2h[k] * xi[k]
        sq = theta @ theta
        if not sq <= _NORM_CAP_SQ:  # catches NaN as well
            raise DivergenceError(config.schedule_start + k)
        traj[k] = theta
    return ChainRun(
        trajectory=traj,
        config=config,
        potential=potential,
        segments=(n,),
        wall_time=time.perf_counter() - t0,
    )


def continue_chain(run: ChainRun, next_drive: Drive, extra_n: int) -> ChainRun:
    """Extend a finished run from its final state with a fresh drive.

    Supports the burn-in idiom: a small-period run first, then a longer
    drive appended.  The step-size index keeps counting, so decreasing
    schedules keep decreasing across segments.  ``extra_n = 0`` returns the
    run unchanged.
    """
    if extra_n == 0:
        return run
    cfg = run.config
    cont = replace(
        cfg,
        theta0=run.trajectory[-1],
        n_steps=extra_n,
        drive=next_drive,
        schedule_start=cfg.schedule_start + cfg.n_steps,
        minibatch_stream=cfg.minibatch_stream + 1,
    )
    tail = run_chain(run.potential, cont)
    return ChainRun(
        trajectory=np.concatenate([run.trajectory, tail.trajectory]),
        config=replace(cfg, n_steps=cfg.n_steps + extra_n),
        potential=run.potential,
        segments=run.segments + (extra_n,),
        wall_time=run.wall_time + tail.wall_time,
    )


# ---------------------------------------------------------------------------
# Contraction diagnostics
# ---------------------------------------------------------------------------


def coupling_diagnostic(
    potential,
    theta: np.ndarray,
    theta_prime: np.ndarray,
    h: float,
    steps: int,
    shared_drive: Drive,
) -> np.ndarray:
    """Distances ||theta_k - theta'_k|| for two chains sharing every xi_k.

    For an L-smooth, M-strongly-convex potential and h <= 2/(L+M) the
    per-step ratio is bounded by 1 - h*M; a warning is emitted if declared
    constants say the step size violates that condition.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    theta_prime = np.atleast_1d(np.asarray(theta_prime, dtype=np.float64))
    if theta.shape != theta_prime.shape:
        raise ConfigurationError("the two start points must share a dimension")
    L, M = potential.smoothness, potential.strong_convexity
    if L is not None and M is not None and h > 2.0 / (L + M):
        warnings.warn(
            f"h={h:g} exceeds 2/(L+M)={2.0 / (L + M):g}; contraction bound void",
            stacklevel=2,
        )
    d = len(theta)
    xi = drive_array(shared_drive, steps, d)
    dist = np.empty(steps + 1)
    dist[0] = np.linalg.norm(theta - theta_prime)
    a, b = theta.copy(), theta_prime.copy()
    sq2h = math.sqrt(2.0 * h)
    for k in range(steps):
        a = a - h * potential.grad(a) + sq2h * xi[k]
        b = b - h * potential.grad(b) + sq2h * xi[k]
        dist[k + 1] = np.linalg.norm(a - b)
    return dist


@dataclass(frozen=True)
class ContractionInfo:
    """Derived contraction quantities, reported for diagnostics only."""

    rho: float
    ell: int
    gcd_d_ell_n: int

    @property
    def coprime(self) -> bool:
        return self.gcd_d_ell_n == 1


def contraction_info(L: float, M: float, h: float, d: int, n: int) -> ContractionInfo:
    """rho = 1 - h*M, ell = ceil(log_rho(h) / 2), and gcd(d*ell, n).

    The coprimality of d*ell with the period is surfaced but not enforced;
    it only matters for the sharpest error-rate statements.
    """
    if not 0 < h * M < 1:
        raise DomainError("need 0 < h*M < 1 for a contraction factor in (0, 1)")
    rho = 1.0 - h * M
    ell = max(1, math.ceil(0.5 * math.log(h) / math.log(rho)))
    return ContractionInfo(rho=rho, ell=ell, gcd_d_ell_n=math.gcd(d * ell, n))
