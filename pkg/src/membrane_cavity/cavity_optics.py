"""Optics of a Fabry-Perot cavity containing a thin dielectric membrane.

The membrane (refractive index n_M = n_R + i n_I, thickness L_d) sits at
position z0 on the cavity axis.  It shifts each cavity resonance by a complex
amount delta_omega(z0): the real part is the dispersive frequency pull used
for optomechanical coupling, the imaginary part gives the photon absorption
rate kappa_1 = |Im delta_omega| and hence the drop of the cavity finesse.

All lengths are SI meters, all rates rad/s.  Physical constants are CODATA
values from scipy.constants.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT

RAYLEIGH_MARGIN = 0.1        # warn when |z0| + Ld/2 exceeds this fraction of z_R
BRANCH_TOL = 1e-9            # slack on |arcsin argument| = 1 for lossless membranes


@dataclass
class CavityGeometry:
    """Two-mirror cavity: length, mirror curvature, empty finesse, drive wavelength.

    curvature_R = math.inf selects the planar limit (g = 1), which is allowed
    but marginal; any other geometry must satisfy -1 < g < 1.
    """

    length_L: float
    curvature_R: float
    empty_finesse_F: float
    laser_wavelength_lambda: float

    def __post_init__(self):
        from .errors import InvalidGeometryError
        if self.length_L <= 0:
            raise ValueError("length_L must be positive")
        if self.empty_finesse_F <= 0:
            raise ValueError("empty_finesse_F must be positive")
        if self.laser_wavelength_lambda <= 0:
            raise ValueError("laser_wavelength_lambda must be positive")
        g = self.g
        if not (-1.0 < g < 1.0) and not math.isinf(self.curvature_R):
            raise InvalidGeometryError(
                "cavity stability parameter g = 1 - L/R = %g outside (-1, 1)" % g)

    @property
    def g(self):
        if math.isinf(self.curvature_R):
            return 1.0
        return 1.0 - self.length_L / self.curvature_R

    @property
    def kappa0(self):
        # empty-cavity amplitude decay rate, kappa0 = pi c / (2 L F)
        return math.pi * C_LIGHT / (2.0 * self.length_L * self.empty_finesse_F)

    @property
    def rayleigh_zR(self):
        g = self.g
        if g >= 1.0:
            return math.inf
        return 0.5 * self.length_L * math.sqrt((1.0 + g) / (1.0 - g))

    @property
    def laser_k(self):
        return 2.0 * math.pi / self.laser_wavelength_lambda


@dataclass
class MembraneSlab:
    """Thin square dielectric membrane inside the cavity.

    The effective mass of each vibrational mode is m = sigma * D^2 / 4,
    always derived from the stored surface density, never stored itself.
    """

    n_real: float
    n_imag: float
    thickness_Ld: float
    side_D: float
    surface_density_sigma: float
    position_z0: float = 0.0

    def __post_init__(self):
        if not self.n_real > 1.0:
            raise ValueError("n_real must exceed 1")
        if self.n_imag < 0 or self.n_imag >= self.n_real:
            raise ValueError("need 0 <= n_imag << n_real")
        if self.thickness_Ld < 0:
            raise ValueError("thickness_Ld must be non-negative")
        if self.side_D <= 0:
            raise ValueError("side_D must be positive")
        if self.surface_density_sigma <= 0:
            raise ValueError("surface_density_sigma must be positive")

    @property
    def n_complex(self):
        return complex(self.n_real, self.n_imag)

    @property
    def mass(self):
        return self.surface_density_sigma * self.side_D ** 2 / 4.0


@dataclass
class ModeIndices:
    """Hermite-Gauss mode labels: transverse (m, n) and longitudinal p >= 1."""

    transverse_m: int = 0
    transverse_n: int = 0
    longitudinal_p: int = 1

    def __post_init__(self):
        if self.transverse_m < 0 or self.transverse_n < 0:
            raise ValueError("transverse indices must be non-negative")
        if self.longitudinal_p < 1:
            raise ValueError("longitudinal_p must be >= 1")


@dataclass
class ComplexShift:
    """Membrane-induced complex resonance shift; kappa_1 = |imag_part|."""

    real_part: float
    imag_part: float

    @property
    def kappa1(self):
        return abs(self.imag_part)


def empty_mode_frequency(idx, cav):
    """Resonance frequency of the empty-cavity Hermite-Gauss mode (m, n, p).

    omega0 = (c pi / L) [ p + (m + n + 1) arccos(g) / pi ]
    In the planar limit g = 1 the Gouy term vanishes and omega0 = c pi p / L.
    """
    g = cav.g
    gouy = math.acos(g) / math.pi
    return (C_LIGHT * math.pi / cav.length_L) * (
        idx.longitudinal_p + (idx.transverse_m + idx.transverse_n + 1) * gouy)


def membrane_reflectivity(k, mem):
    """Intensity reflection coefficient of the slab at wavenumber k (complex).

    Evaluated in the pole-free form
        R = (n^2-1)^2 sin^2(x) / [4 n^2 cos^2(x) + (n^2+1)^2 sin^2(x)],
    x = n k L_d, which equals the cotangent form away from its poles and
    returns the correct limit R = 0 at x = j pi.  For a lossless membrane
    0 <= R < 1.
    """
    n = mem.n_complex
    x = n * np.asarray(k, dtype=complex) * mem.thickness_Ld
    s, co = np.sin(x), np.cos(x)
    num = (n ** 2 - 1.0) ** 2 * s ** 2
    den = 4.0 * n ** 2 * co ** 2 + (n ** 2 + 1.0) ** 2 * s ** 2
    out = num / den
    if np.ndim(k) == 0:
        return complex(out)
    return out


def _amplitude_and_beta(k0, mem):
    """Amplitude reflection coefficient r (signed, analytic in x) and beta(k0).

    r = (n^2-1) sin x / sqrt(4 n^2 cos^2 x + (n^2+1)^2 sin^2 x),  x = n k0 Ld;
    beta = arccos[ 2 n cos x / sqrt(...) ] - k0 Ld.
    The arccos form tracks the physical root continuously through x = pi/2
    (thicknesses beyond the quarter-wave maximum), where the principal-branch
    arcsin form would jump to the wrong root.
    """
    n = mem.n_complex
    x = n * k0 * mem.thickness_Ld
    s, co = np.sin(x), np.cos(x)
    root = np.sqrt(4.0 * n ** 2 * co ** 2 + (n ** 2 + 1.0) ** 2 * s ** 2)
    r = (n ** 2 - 1.0) * s / root
    beta = np.arccos(2.0 * n * co / root) - k0 * mem.thickness_Ld
    return r, beta


def _check_branch(k0, mem):
    """Reject membranes thick enough that the shift branch bookkeeping breaks."""
    from .errors import BranchAmbiguityError
    x_re = mem.n_real * k0 * mem.thickness_Ld
    if x_re >= math.pi * (1.0 - 1e-12):
        raise BranchAmbiguityError(
            "n_M k Ld = %.6f crosses pi; shift branch undefined for such thick slabs"
            % x_re)


def _check_rayleigh(z0, mem, cav):
    zr = cav.rayleigh_zR
    if not math.isinf(zr):
        extent = np.max(np.abs(z0)) + mem.thickness_Ld / 2.0
        if extent > RAYLEIGH_MARGIN * zr:
            warnings.warn(
                "membrane extent |z0|+Ld/2 = %.3g m is not small against the "
                "Rayleigh range z_R = %.3g m; thin-slab mode functions degrade"
                % (extent, zr), stacklevel=3)


def frequency_shift(z0, k0, idx, mem, cav):
    """Complex resonance shift delta_omega of mode idx with the membrane at z0.

    delta_omega = (c/L) { (-1)^l arcsin[(-1)^p r cos(2 k0 z0)] - beta(k0) - l pi },
    l = floor(Re(n_M k0 Ld)/pi).  Periodic in z0 with period lambda/2.  The
    imaginary part feeds kappa_1; |Re delta_omega| stays below the free
    spectral range in the perturbative regime this formula assumes.

    Accepts scalar or array z0; returns ComplexShift for scalars and a complex
    ndarray for arrays.
    """
    from .errors import BranchAmbiguityError
    _check_branch(k0, mem)
    _check_rayleigh(z0, mem, cav)
    r, beta = _amplitude_and_beta(k0, mem)
    ell = int(math.floor((mem.n_real * k0 * mem.thickness_Ld) / math.pi))
    parity = -1.0 if idx.longitudinal_p % 2 else 1.0
    u = parity * r * np.cos(2.0 * k0 * np.asarray(z0, dtype=float))
    if mem.n_imag == 0.0:
        if np.max(np.abs(np.real(u))) > 1.0 + BRANCH_TOL:
            raise BranchAmbiguityError(
                "lossless arcsin argument exceeds 1; reflection amplitude unphysical")
        u = np.clip(np.real(u), -1.0, 1.0) + 0.0j
    dw = (C_LIGHT / cav.length_L) * (
        (-1.0) ** ell * np.arcsin(u) - beta - ell * math.pi)
    if np.ndim(z0) == 0:
        dw = complex(dw)
        return ComplexShift(dw.real, dw.imag)
    return dw


def frequency_shift_derivatives(z0, k0, idx, mem, cav):
    """First and second z0-derivatives of the complex shift (analytic).

    With u = (-1)^p r cos(2 k0 z0):  u' = -2 k0 (-1)^p r sin(2 k0 z0),
    u'' = -(2 k0)^2 u, and d(arcsin u)/dz0 = u'/sqrt(1-u^2).  beta does not
    depend on z0.  Returns (d1, d2) as complex scalars or arrays.
    """
    _check_branch(k0, mem)
    r, _ = _amplitude_and_beta(k0, mem)
    ell = int(math.floor((mem.n_real * k0 * mem.thickness_Ld) / math.pi))
    parity = -1.0 if idx.longitudinal_p % 2 else 1.0
    z = np.asarray(z0, dtype=float)
    u = parity * r * np.cos(2.0 * k0 * z)
    up = -2.0 * k0 * parity * r * np.sin(2.0 * k0 * z)
    upp = -(2.0 * k0) ** 2 * u
    root = np.sqrt(1.0 - u ** 2)
    pref = (C_LIGHT / cav.length_L) * (-1.0) ** ell
    d1 = pref * up / root
    d2 = pref * (upp / root + u * up ** 2 / root ** 3)
    if np.ndim(z0) == 0:
        return complex(d1), complex(d2)
    return d1, d2


def absorption_rate_kappa1(z0, k0, idx, mem, cav):
    """Photon absorption rate kappa_1 = |Im delta_omega|; zero for lossless slabs."""
    shift = frequency_shift(z0, k0, idx, mem, cav)
    if isinstance(shift, ComplexShift):
        return abs(shift.imag_part)
    return np.abs(np.imag(shift))


def total_finesse(z0, k0, idx, mem, cav):
    """Finesse including membrane absorption: 1/F_T = 1/F + (2/pi)|Im(L dw / c)|.

    Since delta_omega scales as c/L, F_T depends only on k0 and the membrane,
    not on the cavity length.  F_T <= F with equality where Im delta_omega = 0
    (membrane centered on a field node).
    """
    shift = frequency_shift(z0, k0, idx, mem, cav)
    im = shift.imag_part if isinstance(shift, ComplexShift) else np.imag(shift)
    inv = 1.0 / cav.empty_finesse_F + (2.0 / math.pi) * np.abs(
        cav.length_L * im / C_LIGHT)
    return 1.0 / inv
