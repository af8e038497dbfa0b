"""Frequency-domain diagnostics of the linearized membrane-cavity dynamics.

Position spectrum S_q(omega) = |chi_eff|^2 (S_th + S_rp + S_abs) built from
the effective mechanical susceptibility and the three noise channels
(thermal, radiation pressure, membrane absorption), plus the sideband
scattering rates A+- and the closed-form weak-coupling occupancy estimate.

All spectra are double-sided in angular frequency; variances are recovered
as integral d omega / 2 pi.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar, k as K_BOLTZMANN
from scipy.integrate import quad

from .errors import HeatingError, UnphysicalStateError

VARIANCE_CUT_FACTOR = 20.0   # integration window: +-20 max(Omega, kappaT, |Delta|)


@dataclass
class SpectrumSample:
    """Spectral densities at one frequency (or arrays over a grid)."""

    omega: float
    s_th: float
    s_rp: float
    s_abs: float
    s_q: float
    chi_eff: complex


@dataclass
class CoolingRates:
    """Sideband scattering rates and the effective mechanics at omega = Omega."""

    a_plus: float
    a_minus: float
    gamma_eff_at_Om: float
    omega_eff_at_Om: float


def _den(omega, op):
    # [kapT^2 + (omega - Delta)^2][kapT^2 + (omega + Delta)^2]
    k2 = op.kappaT ** 2
    return (k2 + (omega - op.Delta) ** 2) * (k2 + (omega + op.Delta) ** 2)


def effective_susceptibility(omega, op, vib):
    """chi_eff(omega): mechanical response dressed by the cavity back-action.

    chi_eff = Omega / { Omega_t^2 - omega^2 - i omega gamma
                        - G Omega [G Delta - Gamma (kapT - i omega)]
                          / [(kapT - i omega)^2 + Delta^2] },
    with Omega_t^2 = Omega^2 + h Omega the quadratically shifted frequency.
    """
    Om = vib.frequency_Omega
    gm = vib.gamma_m
    w = np.asarray(omega, dtype=float)
    kmi = op.kappaT - 1j * w
    back = op.G * Om * (op.G * op.Delta - op.Gamma * kmi) \
        / (kmi ** 2 + op.Delta ** 2)
    chi = Om / (Om ** 2 + op.h * Om - w ** 2 - 1j * w * gm - back)
    if np.ndim(omega) == 0:
        return complex(chi)
    return chi


def effective_frequency_damping(omega, op, vib):
    """Frequency-dependent effective resonance and damping of the mechanics.

    Omega_eff^2 wraps the real part of the back-action into the oscillator
    frequency; a negative radicand (antistatic regime) is an error, not a
    complex return.
    """
    Om = vib.frequency_Omega
    gm = vib.gamma_m
    w = np.asarray(omega, dtype=float)
    k = op.kappaT
    D = _den(w, op)
    rad = Om ** 2 + op.h * Om - op.G * Om * (
        op.G * op.Delta * (k ** 2 - w ** 2 + op.Delta ** 2)
        - op.Gamma * k * (k ** 2 + w ** 2 + op.Delta ** 2)) / D
    if np.any(rad < 0.0):
        raise UnphysicalStateError(
            "effective frequency squared is negative at |omega| ~ %.3g: "
            "static instability" % float(np.min(np.abs(w))))
    om_eff = np.sqrt(rad)
    gam_eff = gm + op.G * Om * (
        2.0 * op.G * op.Delta * k
        - op.Gamma * (k ** 2 + w ** 2 - op.Delta ** 2)) / D
    if np.ndim(omega) == 0:
        return float(om_eff), float(gam_eff)
    return om_eff, gam_eff


def _thermal_spectrum(omega, op, vib, thermal_model):
    gm = vib.gamma_m
    Om = vib.frequency_Omega
    shape = np.shape(omega)
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if thermal_model == "markovian":
        out = np.full_like(w, gm * (2.0 * op.n0 + 1.0))
    elif thermal_model != "coth_exact":
        raise ValueError("thermal_model must be 'markovian' or 'coth_exact'")
    elif op.n0 == 0.0:
        out = gm * np.abs(w) / Om         # T -> 0: coth -> sign(omega)
    else:
        # temperature giving the stored occupancy: hbar Om / kB ln(1 + 1/n0)
        T = hbar * Om / (K_BOLTZMANN * math.log1p(1.0 / op.n0))
        out = np.empty_like(w)
        small = np.abs(w) * hbar < 1e-12 * K_BOLTZMANN * T
        out[small] = (gm / Om) * 2.0 * K_BOLTZMANN * T / hbar
        wb = w[~small]
        out[~small] = (gm * wb / Om) / np.tanh(hbar * wb / (2.0 * K_BOLTZMANN * T))
    return out.reshape(shape)


def noise_spectra(omega, op, vib, thermal_model="markovian"):
    """All noise channels and the assembled position spectrum at omega.

    S_rp = G^2 kapT [Delta^2 + kapT^2 + omega^2] / D(omega),
    S_abs = Gamma^2/(4 kappa1) + Gamma G Delta [Delta^2 + kapT^2 - omega^2]/D,
    S_q = |chi_eff|^2 (S_th + S_rp + S_abs).
    """
    w = np.asarray(omega, dtype=float)
    k = op.kappaT
    D = _den(w, op)
    s_th = _thermal_spectrum(w, op, vib, thermal_model)
    s_rp = op.G ** 2 * k * (op.Delta ** 2 + k ** 2 + w ** 2) / D
    flat = op.Gamma ** 2 / (4.0 * op.kappa1) if op.kappa1 > 0.0 else 0.0
    s_abs = flat + op.Gamma * op.G * op.Delta * (op.Delta ** 2 + k ** 2 - w ** 2) / D
    chi = effective_susceptibility(w, op, vib)
    s_q = np.abs(chi) ** 2 * (s_th + s_rp + s_abs)
    if np.ndim(omega) == 0:
        return SpectrumSample(float(w), float(s_th), float(s_rp),
                              float(s_abs), float(s_q), complex(chi))
    return SpectrumSample(w, s_th, s_rp, s_abs, s_q, chi)


def scattering_rates(op, vib):
    """Anti-Stokes/Stokes rates A-+ and the effective mechanics at Omega.

    a_pm = [G^2 kapT + G Gamma (Delta +- Omega)] / {2 [kapT^2 + (Delta +- Omega)^2]};
    the rates are normalized so that gamma_eff(Omega) = gamma_m + a_minus -
    a_plus holds exactly (net cooling rate identity).
    """
    Om = vib.frequency_Omega
    gm = vib.gamma_m
    k = op.kappaT

    def rate(sign):
        d = op.Delta + sign * Om
        return 0.5 * (op.G ** 2 * k + op.G * op.Gamma * d) / (k ** 2 + d ** 2)

    om_eff, gam_eff = effective_frequency_damping(Om, op, vib)
    return CoolingRates(a_plus=rate(+1.0), a_minus=rate(-1.0),
                        gamma_eff_at_Om=gam_eff, omega_eff_at_Om=om_eff)


def approximate_occupancy(op, vib):
    """Closed-form weak-coupling occupancy estimate.

    n ~= [gamma_m n0 + Gamma^2/(8 kappa1) + A+] / [gamma_m + A- - A+];
    valid for G well below Omega (a warning flags stronger coupling).  A
    non-positive denominator means net heating: no stationary occupancy.
    """
    gm = vib.gamma_m
    if op.G != 0.0 and abs(op.G) >= vib.frequency_Omega:
        warnings.warn("|G| = %.3g >= Omega: weak-coupling estimate out of its "
                      "validity range" % abs(op.G), stacklevel=2)
    rates = scattering_rates(op, vib)
    flat = op.Gamma ** 2 / (8.0 * op.kappa1) if op.kappa1 > 0.0 else 0.0
    den = gm + rates.a_minus - rates.a_plus
    if den <= 0.0:
        raise HeatingError(
            "net rate gamma_m + A- - A+ = %.3g <= 0: runaway heating" % den)
    return (gm * op.n0 + flat + rates.a_plus) / den


def spectrum_variances(op, vib, thermal_model="markovian"):
    """Position and momentum variances from the spectral route.

    var_q = integral S_q d omega / 2 pi,  var_p = integral (omega/Omega)^2 S_q
    d omega / 2 pi on a +-20 max(Omega, kapT, |Delta|) window with refinement
    anchored at the effective resonance.
    """
    Om = vib.frequency_Omega
    cut = VARIANCE_CUT_FACTOR * max(Om, op.kappaT, abs(op.Delta))
    try:
        w_res = effective_frequency_damping(Om, op, vib)[0]
    except UnphysicalStateError:
        w_res = Om
    pts = [-w_res, w_res]

    def sq(w):
        return noise_spectra(float(w), op, vib, thermal_model).s_q

    var_q = quad(sq, -cut, cut, points=pts, limit=500, epsabs=1e-12,
                 epsrel=1e-9)[0] / (2.0 * math.pi)
    var_p = quad(lambda w: (w / Om) ** 2 * sq(w), -cut, cut, points=pts,
                 limit=500, epsabs=1e-12, epsrel=1e-9)[0] / (2.0 * math.pi)
    return var_q, var_p
