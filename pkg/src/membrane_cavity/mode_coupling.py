"""Membrane vibrational modes and their coupling to the cavity field.

The radiation-pressure coupling of vibrational mode (j,k) to a pair of cavity
modes factorizes into a transverse overlap Theta (mode shapes against the
Gaussian beam profile) and a longitudinal factor Lambda (standing-wave
geometry at the membrane position).  The vacuum optomechanical rate is

    g = (2 omega0 / L) * sqrt(hbar / (m Omega)) * Theta * Lambda,

i.e. the frequency pull per zero-point displacement x0 = sqrt(hbar/(m Omega)).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT, hbar
from scipy.integrate import quad

from .cavity_optics import membrane_reflectivity
from .errors import QuadratureError, SingularConfigurationError

QUAD_ABS_TOL = 1e-9          # adaptive quadrature target for Theta
QUAD_REPORT_TOL = 1e-6       # achieved-error threshold that triggers a failure
SINGULAR_TOL = 1e-12         # rejection tolerance for vanishing denominators
NODE_TOL = 1e-6              # |sin(2 k z0)| below this counts as node/antinode


@dataclass
class VibrationalMode:
    """Drum mode (j,k) of the square membrane.

    frequency_Omega may be pinned directly (the usual experimental reading)
    or derived from the sound speed via Omega_jk = (c_s pi / D) sqrt(j^2+k^2).
    effective_mass_m is always the derived sigma D^2 / 4 of the parent slab.
    """

    index_j: int
    index_k: int
    frequency_Omega: float
    effective_mass_m: float
    quality_Qm: float

    def __post_init__(self):
        if self.index_j < 1 or self.index_k < 1:
            raise ValueError("vibrational indices must be >= 1")
        if self.frequency_Omega <= 0:
            raise ValueError("frequency_Omega must be positive")
        if self.effective_mass_m <= 0:
            raise ValueError("effective_mass_m must be positive")
        if self.quality_Qm <= 0:
            raise ValueError("quality_Qm must be positive")
        if self.quality_Qm < 10:
            warnings.warn("quality_Qm = %g is not >> 1; Markovian damping model "
                          "is questionable" % self.quality_Qm, stacklevel=2)

    @property
    def gamma_m(self):
        return self.frequency_Omega / self.quality_Qm

    @property
    def x_zpf(self):
        return math.sqrt(hbar / (self.effective_mass_m * self.frequency_Omega))

    @classmethod
    def from_membrane(cls, j, k, mem, quality_Qm, frequency_Omega=None,
                      sound_speed=None):
        """Build a mode from the slab, pinning Omega or deriving it from c_s."""
        if frequency_Omega is None:
            if sound_speed is None:
                raise ValueError("need frequency_Omega or sound_speed")
            frequency_Omega = vibrational_frequency(j, k, mem, sound_speed)
        return cls(j, k, frequency_Omega, mem.mass, quality_Qm)


@dataclass
class CouplingEntry:
    """One (vibrational, optical pair) coupling: Theta, Lambda, vacuum rate g."""

    theta: float
    lam: float
    g_vacuum: float


def vibrational_frequency(j, k, mem, sound_speed):
    """Eigenfrequency Omega_jk = (c_s pi / D) sqrt(j^2 + k^2) of the taut membrane."""
    if j < 1 or k < 1:
        raise ValueError("vibrational indices must be >= 1")
    if sound_speed <= 0:
        raise ValueError("sound_speed must be positive")
    return (sound_speed * math.pi / mem.side_D) * math.hypot(j, k)


def mode_shape_phi(j, k, x, y, mem):
    """Normalized drum mode shape, phi_jk = (2/D) sin(j pi x/D + j pi/2) sin(k pi y/D + k pi/2).

    Vanishes on the membrane boundary; coordinates outside the membrane square
    are rejected.
    """
    D = mem.side_D
    xa, ya = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(np.abs(xa) > D / 2) or np.any(np.abs(ya) > D / 2):
        raise ValueError("coordinates outside the membrane (|x|,|y| <= D/2)")
    out = (2.0 / D) * np.sin(j * math.pi * xa / D + j * math.pi / 2.0) \
        * np.sin(k * math.pi * ya / D + k * math.pi / 2.0)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(out)
    return out


def _hermite(order, t):
    # three-term recurrence; stable for the small orders used here
    h_prev = np.ones_like(t)
    if order == 0:
        return h_prev
    h = 2.0 * t
    for k in range(1, order):
        h, h_prev = 2.0 * t * h - 2.0 * k * h_prev, h
    return h


def _hg_profile(order, x, w0):
    """1-D Hermite-Gauss amplitude, unit-normalized: integral of square = 1."""
    norm = (2.0 / math.pi) ** 0.25 / math.sqrt(
        w0 * (2.0 ** order) * math.factorial(order))
    return norm * _hermite(order, math.sqrt(2.0) * x / w0) * np.exp(-(x / w0) ** 2)


def transverse_overlap(vib, opt1, opt2, waist_w0, mem):
    """Overlap Theta of drum mode (j,k) with the product of two HG profiles.

    Theta = (D/2) * integral over the membrane square of phi_jk * T1 * T2.
    The integrand separates in x and y, so each factor is a 1-D adaptive
    quadrature.  |Theta| <= 1 by Cauchy-Schwarz.
    """
    if waist_w0 <= 0:
        raise ValueError("waist_w0 must be positive")
    j, k = vib
    m1, n1 = opt1
    m2, n2 = opt2
    D = mem.side_D

    def axis_integral(vib_idx, o1, o2):
        def f(x):
            return math.sin(vib_idx * math.pi * x / D + vib_idx * math.pi / 2.0) \
                * _hg_profile(o1, x, waist_w0) * _hg_profile(o2, x, waist_w0)
        pts = [p for p in (-waist_w0, 0.0, waist_w0) if abs(p) < D / 2]
        val, err = quad(f, -D / 2, D / 2, epsabs=QUAD_ABS_TOL,
                        epsrel=QUAD_ABS_TOL, limit=200, points=pts)
        return val, err

    ix, ex = axis_integral(j, m1, m2)
    iy, ey = axis_integral(k, n1, n2)
    # (D/2) prefactor cancels the 2/D of phi; the axis factors carry everything
    err = abs(ex * iy) + abs(ey * ix) + abs(ex * ey)
    if err > QUAD_REPORT_TOL:
        raise QuadratureError(
            "overlap quadrature achieved %.2e, wanted %.2e" % (err, QUAD_REPORT_TOL))
    return ix * iy


def longitudinal_factor_diagonal(k_l, z0, mem):
    """Standing-wave factor for a single mode:

    Lambda_ll = sin(2 k z0) sqrt( R / (1 - R cos^2(2 k z0)) ),  real R.

    Extremes: zero with the membrane on a node or antinode, |Lambda| = sqrt(R)
    quarter-way between (the global maximum over z0).
    """
    if np.any(np.asarray(k_l) <= 0):
        raise ValueError("wavenumber must be positive")
    R = np.real(membrane_reflectivity(k_l, mem))
    s = np.sin(2.0 * np.multiply(k_l, z0))
    co2 = np.cos(2.0 * np.multiply(k_l, z0)) ** 2
    out = s * np.sqrt(R / (1.0 - R * co2))
    if np.ndim(k_l) == 0 and np.ndim(z0) == 0:
        return float(out)
    return out


def _phi0(k, cav, idx):
    # round-trip phase at the mirror: k L - 2 (n+m+1) arctan(L / 2 zR)
    zr = cav.rayleigh_zR
    gouy = 0.0 if math.isinf(zr) else math.atan(cav.length_L / (2.0 * zr))
    return k * cav.length_L - 2.0 * (idx.transverse_m + idx.transverse_n + 1) * gouy


def longitudinal_factor_general(k_j, k_l, z0, mem, cav, idx):
    """Two-mode standing-wave factor Lambda_jl (reduces to the diagonal at k_j = k_l).

    Evaluated on the lossless skeleton (real part of the membrane index):
    absorption enters the dynamics through kappa_1 and Gamma, not here.
    Configurations where any denominator -- sin(n k_j Ld), sin(Phi0 - k Ld)
    or s(k_l) -- vanishes within tolerance are rejected rather than
    regularized.
    """
    if k_j <= 0 or k_l <= 0:
        raise ValueError("wavenumbers must be positive")
    n = mem.n_real
    Ld = mem.thickness_Ld

    def refl_real(k):
        x = n * k * Ld
        s, co = math.sin(x), math.cos(x)
        den = 4.0 * n ** 2 * co ** 2 + (n ** 2 + 1.0) ** 2 * s ** 2
        return (n ** 2 - 1.0) ** 2 * s ** 2 / den

    def s_of_k(k):
        den = math.sin(_phi0(k, cav, idx) - k * Ld)
        if abs(den) < SINGULAR_TOL:
            raise SingularConfigurationError(
                "sin(Phi0 - k Ld) vanished at k = %g" % k)
        return math.sin(2.0 * k * z0) * math.sin(n * k * Ld) / den

    den_j = math.sin(n * k_j * Ld)
    if abs(den_j) < SINGULAR_TOL:
        raise SingularConfigurationError("sin(n_M k_j Ld) vanished")
    s_j, s_l = s_of_k(k_j), s_of_k(k_l)
    if abs(s_l) < SINGULAR_TOL:
        raise SingularConfigurationError("s(k_l) vanished; bracket term singular")

    root_j = np.sqrt(complex(1.0 - s_j ** 2))
    root_l = np.sqrt(complex(1.0 - s_l ** 2))
    ratio_phase = math.sin(_phi0(k_j, cav, idx) - k_j * Ld) \
        / math.sin(_phi0(k_l, cav, idx) - k_l * Ld)
    sqrt_part = np.sqrt(complex(ratio_phase) * (1.0 + root_j) / (1.0 + root_l))

    R_j, R_l = refl_real(k_j), refl_real(k_l)
    quart = (R_j * R_l
             / ((1.0 - R_l * math.cos(2.0 * k_l * z0) ** 2)
                * (1.0 - R_j * math.cos(2.0 * k_j * z0) ** 2))) ** 0.25

    val = (k_j / (k_j + k_l)) * math.sin(n * (k_j + k_l) * Ld / 2.0) \
        * math.sin(2.0 * k_l * z0) / den_j \
        * sqrt_part * quart \
        * (1.0 + (s_j / s_l) * (1.0 + root_l) / (1.0 + root_j))
    if abs(val.imag) < 1e-9 * max(abs(val), 1e-30):
        return float(val.real)
    return complex(val)


def vacuum_coupling_g(vib, k0, z0, theta, mem, cav):
    """Vacuum optomechanical rate g = (2 omega0/L) x0 Theta Lambda_00 [rad/s].

    The prefactor is the cavity frequency pull per unit membrane displacement;
    multiplying by the zero-point amplitude x0 makes g the shift per phonon.
    g vanishes (and a warning fires) with the membrane on a node or antinode,
    where the linear coupling model breaks down.
    """
    omega0 = C_LIGHT * k0
    lam = longitudinal_factor_diagonal(k0, z0, mem)
    if abs(math.sin(2.0 * k0 * z0)) < NODE_TOL:
        warnings.warn("membrane at a node/antinode: linear coupling vanishes, "
                      "interaction is dispersive there", stacklevel=2)
    return (2.0 * omega0 / cav.length_L) * vib.x_zpf * theta * lam
