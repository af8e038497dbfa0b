"""Gaussian steady state of the linearized membrane-cavity dynamics.

The fluctuation vector u = (dq, dp, dX, dY) obeys du = A u dt + noise with a
4x4 drift A fixed by the operating point and a diffusion matrix D collecting
thermal, radiation-pressure and absorption noise.  For a stable A the
covariance V solves the Lyapunov equation A V + V A^T = -D; the phonon
occupancy and the mechanics-field logarithmic negativity are read off V.

Ordering convention: mechanical quadratures first, field quadratures second.
Vacuum is V = I/2.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UnphysicalStateError, UnstableSystemError

LYAP_RESIDUAL_TOL = 1e-10
LYAP_COND_WARN = 1e12
NEGATIVITY_DISC_TOL = 1e-12


@dataclass
class DriftMatrix:
    """4x4 drift of the linearized quantum Langevin equations [rad/s]."""

    a: np.ndarray


@dataclass
class DiffusionMatrix:
    """4x4 symmetric noise matrix [rad/s]; positive semidefinite."""

    d: np.ndarray


@dataclass
class CovarianceState:
    """Steady covariance (vacuum = I/2) with its two scalar diagnostics."""

    v: np.ndarray
    occupancy_n: float
    log_negativity: float


def _mat(x):
    return np.asarray(getattr(x, "a", getattr(x, "d", x)), dtype=float)


def build_drift(op, vib):
    """Drift matrix of the fluctuations around the operating point.

    Row order (dq, dp, dX, dY):

        [    0      Omega    0      0   ]
        [ -Omega-h  -gamma   G      0   ]
        [  -Gamma     0    -kapT  Delta ]
        [    G        0    -Delta -kapT ]
    """
    Om = vib.frequency_Omega
    gm = vib.gamma_m
    a = np.array([
        [0.0, Om, 0.0, 0.0],
        [-Om - op.h, -gm, op.G, 0.0],
        [-op.Gamma, 0.0, -op.kappaT, op.Delta],
        [op.G, 0.0, -op.Delta, -op.kappaT],
    ])
    return DriftMatrix(a)


def build_diffusion(op, vib):
    """Noise matrix: thermal + absorption heating on dp, vacuum on the field.

    d[1][1] = gamma_m (2 n0 + 1) + Gamma^2/(4 kappa1),  d[1][3] = Gamma/2,
    d[2][2] = d[3][3] = kappaT.  The Gamma^2/(4 kappa1) heating term is an
    exact 0 for a non-absorbing membrane (Gamma and kappa1 vanish together),
    so the 0/0 is resolved to 0 rather than regularized.
    """
    gm = vib.gamma_m
    heat = op.Gamma ** 2 / (4.0 * op.kappa1) if op.kappa1 > 0.0 else 0.0
    d = np.zeros((4, 4))
    d[1, 1] = gm * (2.0 * op.n0 + 1.0) + heat
    d[1, 3] = d[3, 1] = op.Gamma / 2.0
    d[2, 2] = d[3, 3] = op.kappaT
    return DiffusionMatrix(d)


def stability_conditions(op, vib):
    """Routh-Hurwitz test of the drift matrix, as three sign conditions.

    Returns (s0, s1, s2, stable) with stable <=> all three positive.  The
    polynomials are equivalent to max Re eig(A) < 0 for the drift structure
    above (checked against a dense eigenvalue oracle in the tests); s2 is
    proportional to det A, whose sign change marks the static bistability
    threshold.
    """
    Om = vib.frequency_Omega
    gm = vib.gamma_m
    k = op.kappaT
    D = op.Delta
    G, Gam, h = op.G, op.Gamma, op.h

    s0 = Om ** 2 * gm + 2.0 * k * (D ** 2 + (gm + k) ** 2) \
        + h * gm * Om - Om * G * Gam
    s2 = (Om + h) * (k ** 2 + D ** 2) - G ** 2 * D + k * G * Gam
    s1 = (2.0 * gm * k * ((k ** 2 + (Om - D) ** 2) * (k ** 2 + (Om + D) ** 2)
                          + gm * ((gm + 2.0 * k) * (k ** 2 + D ** 2)
                                  + 2.0 * k * Om ** 2))
          + D * Om * G ** 2 * (gm + 2.0 * k) ** 2
          + (Om ** 2 * gm + 2.0 * k * (D ** 2 + (gm + k) ** 2))
          * (Om * G * Gam + 2.0 * h * Om * k)
          + Om * (h * gm - G * Gam)
          * (Om * G * Gam + 2.0 * k * Om * (h + Om) + gm * (k ** 2 + D ** 2))
          - Om * (2.0 * k + gm) ** 2 * (h * (k ** 2 + D ** 2) + k * G * Gam))
    stable = bool(s0 > 0.0 and s1 > 0.0 and s2 > 0.0)
    return s0, s1, s2, stable


def solve_lyapunov(A, D):
    """Steady covariance from A V + V A^T = -D by a dense Kronecker solve.

    The 4x4 problem vectorizes to 16 unknowns; the solution is symmetrized
    and its residual verified below 1e-10 relative.  Requires a strictly
    stable A.
    """
    a = _mat(A)
    d = _mat(D)
    if np.max(np.linalg.eigvals(a).real) >= 0.0:
        raise UnstableSystemError(
            "drift matrix is not strictly stable; no steady covariance")
    eye = np.eye(4)
    m = np.kron(eye, a) + np.kron(a, eye)
    cond = np.linalg.cond(m)
    if cond > LYAP_COND_WARN:
        warnings.warn("Lyapunov system condition number %.3g: covariance "
                      "accuracy degraded (near-marginal drift)" % cond,
                      stacklevel=2)
    v = np.linalg.solve(m, -d.reshape(16)).reshape(4, 4)
    v = 0.5 * (v + v.T)
    dnorm = np.linalg.norm(d)
    res = np.linalg.norm(a @ v + v @ a.T + d) / (dnorm if dnorm > 0 else 1.0)
    if res > LYAP_RESIDUAL_TOL:
        raise UnphysicalStateError(
            "Lyapunov residual %.3g exceeds %.1g" % (res, LYAP_RESIDUAL_TOL))
    return CovarianceState(v, occupancy(v), logarithmic_negativity(v))


def occupancy(V):
    """Phonon occupancy n = (V_qq + V_pp - 1)/2 of the mechanical mode."""
    v = np.asarray(getattr(V, "v", V), dtype=float)
    return (v[0, 0] + v[1, 1] - 1.0) / 2.0


def logarithmic_negativity(V):
    """Mechanics-field entanglement E_N = max(0, -ln 2 eta-) from the 2x2 blocks.

    eta- is the smaller partially-transposed symplectic eigenvalue,
    eta-^2 = (Sigma - sqrt(Sigma^2 - 4 det V))/2 with
    Sigma = det V1 + det V2 - 2 det Vc, evaluated in the cancellation-free
    form 2 det V / (Sigma + sqrt(disc)).
    """
    v = np.asarray(getattr(V, "v", V), dtype=float)
    v1 = v[:2, :2]
    v2 = v[2:, 2:]
    vc = v[:2, 2:]
    sigma = np.linalg.det(v1) + np.linalg.det(v2) - 2.0 * np.linalg.det(vc)
    detv = np.linalg.det(v)
    disc = sigma ** 2 - 4.0 * detv
    if disc < -NEGATIVITY_DISC_TOL * sigma ** 2:
        raise UnphysicalStateError(
            "negative discriminant %.3g in the symplectic spectrum: "
            "covariance is not a physical Gaussian state" % disc)
    disc = max(disc, 0.0)
    if detv <= 0.0:
        raise UnphysicalStateError("det V = %.3g <= 0: unphysical covariance"
                                   % detv)
    eta_minus = math.sqrt(2.0 * detv / (sigma + math.sqrt(disc)))
    return max(0.0, -math.log(2.0 * eta_minus))
