"""Brute-force stochastic cross-check of the Lyapunov covariance.

Integrates du = A u dt + dN by Euler-Maruyama across a set of independent
trajectories and estimates the stationary covariance by time averaging.  The
input noises have symmetrized intensity D; with the conventional factor
C C^T = 2D the matching classical increments are C sqrt(dt/2) z, which makes
the stationary second moments solve A V + V A^T = -D exactly like the
Lyapunov path.  The steady state of the linear system is Gaussian, so
matching second moments against the Lyapunov solution is a complete test;
classical Gaussian noise suffices for that purpose.

Trajectories advance in lockstep as one (batch, 4) state matrix; each batch
draws from its own counter-based substream, so results are bit-reproducible
for a fixed seed and independent across batches (batch means give the
standard errors).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UnphysicalStateError, UnstableSystemError

DT_GUARD = 0.1               # dt must resolve the fastest rate by this margin
BURN_RELAX_FACTOR = 10.0     # advised burn-in, in units of the slowest decay
OVERFLOW_LIMIT = 1e8         # |u| beyond this reports instability
CHUNK_STEPS = 8192           # noise generated in blocks of this many steps
PIVOT_TOL = 1e-10            # negative-pivot rejection, relative to ||2D||
ZERO_PIVOT_TOL = 1e-12       # pivots below this (relative) count as zero rows


@dataclass
class SimulationConfig:
    """Integration plan: step, horizon, burn-in, seed, trajectory count."""

    dt: float
    total_time: float
    burn_in: float
    seed: int
    batch_count: int

    def __post_init__(self):
        if self.dt <= 0 or self.total_time <= 0 or self.burn_in < 0:
            raise ValueError("dt, total_time must be > 0 and burn_in >= 0")
        if self.burn_in >= self.total_time:
            raise ValueError("burn_in must leave time to accumulate")
        if self.batch_count < 1:
            raise ValueError("batch_count must be >= 1")


@dataclass
class EmpiricalCovariance:
    """Batch-mean estimate of the stationary covariance with standard errors."""

    v_hat: np.ndarray
    standard_errors: np.ndarray
    samples: int


def noise_factor(D):
    """Lower-triangular C with C C^T = 2D for positive semidefinite D.

    Semidefinite-safe Cholesky: a pivot within tolerance of zero zeroes its
    column (so zero rows of D give silent noise channels); a pivot below
    -1e-10 ||2D|| rejects D as not positive semidefinite.
    """
    m = 2.0 * np.asarray(getattr(D, "d", D), dtype=float)
    scale = np.linalg.norm(m)
    if scale == 0.0:
        return np.zeros((4, 4))
    c = np.zeros((4, 4))
    for j in range(4):
        pivot = m[j, j] - np.dot(c[j, :j], c[j, :j])
        if pivot < -PIVOT_TOL * scale:
            raise UnphysicalStateError(
                "diffusion matrix is not positive semidefinite "
                "(pivot %.3g at row %d)" % (pivot, j))
        if pivot <= ZERO_PIVOT_TOL * scale:
            continue                      # silent channel: column stays zero
        c[j, j] = math.sqrt(pivot)
        for i in range(j + 1, 4):
            c[i, j] = (m[i, j] - np.dot(c[i, :j], c[j, :j])) / c[j, j]
    return c


def simulate(A, D, cfg):
    """Euler-Maruyama estimate of the stationary covariance of (A, D).

    Starts every trajectory at u = 0, discards the burn-in, accumulates
    time-averaged second moments per batch, and reports the batch mean with
    batch-means standard errors.  Deterministic for a fixed cfg.
    """
    a = np.asarray(getattr(A, "a", A), dtype=float)
    d = np.asarray(getattr(D, "d", D), dtype=float)
    eigs = np.linalg.eigvals(a)
    slowest = np.max(eigs.real)
    if slowest >= 0.0:
        raise UnstableSystemError("drift not strictly stable: no stationary "
                                  "state to sample")
    # rates read off the drift structure: A[0,1]=Omega, -A[1,1]=gamma,
    # -A[2,2]=kapT, A[2,3]=Delta
    fastest = max(abs(a[0, 1]), abs(a[1, 1]), abs(a[2, 2]), abs(a[2, 3]))
    if fastest > 0 and cfg.dt >= DT_GUARD / fastest:
        raise ValueError("dt = %g does not resolve the fastest rate %.3g "
                         "(need dt < %.3g)" % (cfg.dt, fastest,
                                               DT_GUARD / fastest))
    relax = 1.0 / abs(slowest)
    if cfg.burn_in < BURN_RELAX_FACTOR * relax:
        warnings.warn("burn_in = %.3g s is below %g relaxation times "
                      "(%.3g s); estimates may carry transients"
                      % (cfg.burn_in, BURN_RELAX_FACTOR,
                         BURN_RELAX_FACTOR * relax), stacklevel=2)

    c = noise_factor(d)
    n_total = int(round(cfg.total_time / cfg.dt))
    n_burn = int(round(cfg.burn_in / cfg.dt))
    B = cfg.batch_count
    gens = [np.random.default_rng(s)
            for s in np.random.SeedSequence(cfg.seed).spawn(B)]

    u = np.zeros((B, 4))
    at = a.T * cfg.dt
    # C C^T = 2D while the symmetrized intensity of the inputs is D, so the
    # matching Ito increments are C sqrt(dt/2) z with z standard normal
    ct = c.T * math.sqrt(0.5 * cfg.dt)
    sums = np.zeros((B, 4, 4))
    kept = 0
    done = 0
    while done < n_total:
        steps = min(CHUNK_STEPS, n_total - done)
        noise = np.stack([g.standard_normal((steps, 4)) for g in gens], axis=1)
        for t in range(steps):
            u += u @ at + noise[t] @ ct
            step_index = done + t + 1
            if step_index > n_burn:
                sums += u[:, :, None] * u[:, None, :]
                kept += 1
        done += steps
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > OVERFLOW_LIMIT:
            raise UnstableSystemError(
                "trajectory overflow at step %d: integration unstable" % done)
    if kept == 0:
        raise ValueError("no samples kept after burn-in")

    per_batch = sums / kept
    v_hat = per_batch.mean(axis=0)
    v_hat = 0.5 * (v_hat + v_hat.T)
    if B > 1:
        se = per_batch.std(axis=0, ddof=1) / math.sqrt(B)
    else:
        se = np.full((4, 4), np.inf)
    return EmpiricalCovariance(v_hat, se, kept * B)
