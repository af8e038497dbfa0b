"""Classical operating point of the driven membrane cavity.

Solves the coupled steady-state conditions for the membrane displacement q_s
(zero-point units) and the intracavity amplitude alpha_s,

    Omega q_s + (d omega/dq)(q_s) |alpha(q_s)|^2 = 0,
    |alpha(q)|^2 = E^2 / [ (kappa0 + kappa1(q))^2 + (omega_L - omega(q))^2 ],

enumerates all bistable branches, and linearizes around a branch to obtain
the coefficients (Delta, G, Gamma, h) that drive the Gaussian dynamics.

Numerical note: laser and cavity frequencies are handled internally as
offsets from the empty-cavity resonance of the driven mode.  Absolute optical
frequencies are ~1e15 rad/s, where double spacing is ~0.25 rad/s; detunings
formed by subtracting absolutes would be quantized at that level, far too
coarse for the target-detuning contract.  Offsets are ~1e9 rad/s at most, so
all detunings below stay good to ~1e-7 rad/s.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import hbar, k as K_BOLTZMANN
from scipy.optimize import brentq

from .cavity_optics import (empty_mode_frequency, frequency_shift,
                            frequency_shift_derivatives)
from .errors import SteadyStateError
from .gaussian_steady_state import stability_conditions

GRID_POINTS = 4001           # dense scan resolving every sign change of f(q)
ALPHA_LINEAR_MIN = 100.0     # warn below this |alpha_s|: linearization dubious
TARGET_SPAN_KAPPA = 60.0     # half-width of the laser-offset bracket, in kappa0
TARGET_GRID = 121            # coarse pre-bracketing of the outer solve
DETUNING_TOL_OMEGA = 1e-9    # |Delta - Delta_target| <= this * Omega_m


@dataclass
class DriveParams:
    """Laser drive: input power plus either a fixed frequency or a detuning target.

    Exactly one of laser_frequency_omegaL / target_detuning must be given.
    target_detuning uses the convention Delta = omega(q_s) - omega_L, so a
    positive target means the laser sits below the (pulled) cavity resonance.
    """

    input_power_P: float
    laser_frequency_omegaL: float = None
    target_detuning: float = None

    def __post_init__(self):
        if self.input_power_P < 0:
            raise ValueError("input_power_P must be >= 0")
        if (self.laser_frequency_omegaL is None) == (self.target_detuning is None):
            raise ValueError(
                "give exactly one of laser_frequency_omegaL, target_detuning")

    @property
    def detuning_mode(self):
        if self.target_detuning is not None:
            return "target_detuning"
        return "fixed_laser_frequency"


@dataclass
class OperatingPoint:
    """One steady-state branch with its linearization coefficients.

    q_s is the membrane displacement in zero-point units, alpha_s the real
    positive intracavity amplitude (sqrt photon number).  omega_L and E are
    carried along so a point is self-describing when branches from a
    target-detuning solve are compared.
    """

    q_s: float
    alpha_s: float = 0.0
    Delta: float = 0.0
    G: float = 0.0
    Gamma: float = 0.0
    h: float = 0.0
    kappa0: float = 0.0
    kappa1: float = 0.0
    kappaT: float = 0.0
    n0: float = 0.0
    stable: bool = False
    omega_L: float = 0.0
    E: float = 0.0


def thermal_occupancy(Omega, temperature_T0):
    """Bose occupation n0 = 1/(exp(hbar Omega / kB T0) - 1); 0 at T0 = 0."""
    if temperature_T0 is None or temperature_T0 == 0.0:
        return 0.0
    if temperature_T0 < 0:
        raise ValueError("temperature must be >= 0")
    return 1.0 / math.expm1(hbar * Omega / (K_BOLTZMANN * temperature_T0))


def position_dependent_frequency(q, z0, vib, mem, cav, idx):
    """Cavity frequency and loss at membrane displacement q (zero-point units).

    Returns (omega, d_omega/dq, d2_omega/dq2, kappa1, d_kappa1/dq) with omega
    absolute; the derivatives come from the analytic z0-derivatives of the
    complex shift through z0(q) = z0 + x0 q.
    """
    x0 = vib.x_zpf
    z = z0 + x0 * np.asarray(q, dtype=float)
    k0 = cav.laser_k
    dw = frequency_shift(z, k0, idx, mem, cav)
    if np.ndim(q) == 0:
        dw = complex(dw.real_part, dw.imag_part)
    d1, d2 = frequency_shift_derivatives(z, k0, idx, mem, cav)
    omega = empty_mode_frequency(idx, cav) + np.real(dw)
    kappa1 = np.abs(np.imag(dw))
    # kappa1 = |Im dw|: its derivative tracks the sign of Im dw
    dk1 = np.sign(np.imag(dw)) * np.imag(d1) * x0
    return omega, x0 * np.real(d1), x0 ** 2 * np.real(d2), kappa1, dk1


def _profile(q, z0, vib, mem, cav, idx):
    # offset version used internally: W = Re(delta omega), not absolute omega
    x0 = vib.x_zpf
    z = z0 + x0 * np.asarray(q, dtype=float)
    k0 = cav.laser_k
    dw = frequency_shift(z, k0, idx, mem, cav)
    if np.ndim(q) == 0:
        dw = complex(dw.real_part, dw.imag_part)
    d1, d2 = frequency_shift_derivatives(z, k0, idx, mem, cav)
    W = np.real(dw)
    kappa1 = np.abs(np.imag(dw))
    dk1 = np.sign(np.imag(dw)) * np.imag(d1) * x0
    return W, x0 * np.real(d1), x0 ** 2 * np.real(d2), kappa1, dk1


def _drive_amplitude(P, omega_L, kappa0):
    return math.sqrt(2.0 * P * kappa0 / (hbar * omega_L))


def _complete_point(q_s, delta_L, E, omega_L, z0, vib, mem, cav, idx,
                    temperature_T0):
    W, dW, d2W, kappa1, dk1 = _profile(q_s, z0, vib, mem, cav, idx)
    kappa0 = cav.kappa0
    kappaT = kappa0 + kappa1
    Delta = W - delta_L
    alpha_s = E / math.sqrt(kappaT ** 2 + Delta ** 2)
    op = OperatingPoint(
        q_s=q_s,
        alpha_s=alpha_s,
        Delta=Delta,
        G=-dW * alpha_s * math.sqrt(2.0),
        Gamma=math.sqrt(2.0) * dk1 * alpha_s,
        h=d2W * alpha_s ** 2,
        kappa0=kappa0,
        kappa1=kappa1,
        kappaT=kappaT,
        n0=thermal_occupancy(vib.frequency_Omega, temperature_T0),
        omega_L=omega_L,
        E=E,
    )
    op.stable = stability_conditions(op, vib)[3]
    return op


def linearization_coefficients(op, vib, mem, cav, idx, z0,
                               temperature_T0=None):
    """Recompute every derived coefficient of op from (q_s, omega_L, E).

    Returns a completed copy; the input is not modified.  The two printed
    forms of G -- via alpha_s and via E/sqrt(kappaT^2+Delta^2) -- coincide by
    construction here, which a test checks against the explicit second form.
    """
    delta_L = op.omega_L - empty_mode_frequency(idx, cav)
    done = _complete_point(op.q_s, delta_L, op.E, op.omega_L, z0, vib, mem,
                           cav, idx, temperature_T0)
    if done.E > 0 and done.alpha_s < ALPHA_LINEAR_MIN:
        warnings.warn("alpha_s = %.3g < %g: linearized treatment is marginal"
                      % (done.alpha_s, ALPHA_LINEAR_MIN), stacklevel=2)
    return replace(op, **{f: getattr(done, f) for f in (
        "alpha_s", "Delta", "G", "Gamma", "h", "kappa0", "kappa1", "kappaT",
        "n0", "stable")})


def _root_set(P, delta_L, E, z0, vib, mem, cav, idx):
    """All real roots of f(q) = Omega q + (d omega/dq) |alpha(q)|^2."""
    Omega = vib.frequency_Omega
    kappa0 = cav.kappa0
    if P == 0.0 or E == 0.0:
        return [0.0]

    def f_arr(q):
        W, dW, _, kappa1, _ = _profile(q, z0, vib, mem, cav, idx)
        alpha2 = E ** 2 / ((kappa0 + kappa1) ** 2 + (delta_L - W) ** 2)
        return Omega * q + dW * alpha2

    _, dW0, _, _, _ = _profile(0.0, z0, vib, mem, cav, idx)
    q_max = max(10.0, 4.0 * abs(dW0) * E ** 2 / (Omega * kappa0 ** 2))
    grid = np.linspace(-q_max, q_max, GRID_POINTS)
    fg = f_arr(grid)
    roots = [float(g) for g in grid[fg == 0.0]]
    sign = np.sign(fg)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in flips:
        r = brentq(lambda q: float(f_arr(np.float64(q))),
                   grid[i], grid[i + 1], xtol=1e-10, rtol=8.9e-16)
        roots.append(float(r))
    roots = sorted(set(np.round(roots, 9)))
    if not roots:
        raise SteadyStateError("no steady-state root on |q| <= %.3g" % q_max)
    return roots


def _solve_fixed(P, delta_L, z0, vib, mem, cav, idx, temperature_T0):
    omega_L = empty_mode_frequency(idx, cav) + delta_L
    E = _drive_amplitude(P, omega_L, cav.kappa0) if P > 0 else 0.0
    return [_complete_point(q, delta_L, E, omega_L, z0, vib, mem, cav, idx,
                            temperature_T0) for q in
            _root_set(P, delta_L, E, z0, vib, mem, cav, idx)]


def select_branch(points, policy="lowest_q_stable"):
    """Pick one branch from a solve: default the stable root of smallest |q_s|."""
    if not points:
        raise SteadyStateError("no branches to select from")
    if policy == "lowest_q_stable":
        stable = [p for p in points if p.stable]
        if not stable:
            raise SteadyStateError(
                "no stable branch among %d root(s)" % len(points))
        return min(stable, key=lambda p: abs(p.q_s))
    if policy == "lowest_q_any":
        return min(points, key=lambda p: abs(p.q_s))
    raise ValueError("unknown branch policy %r" % policy)


def _finite_brentq(mismatch, lo, flo, hi):
    # nan cells (no stable branch) may hide inside the bracket; map them to a
    # huge value of the sign opposite the finite anchor so bisection steps
    # away from the dead zone.  A solve that still lands on a dead-zone edge
    # is caught by the detuning residual check in solve_steady_state.
    sentinel = math.copysign(1e30, -flo) if flo else -1e30

    def g(x):
        v = mismatch(x)
        return v if math.isfinite(v) else sentinel

    try:
        return brentq(g, lo, hi, xtol=1e-6, rtol=8.9e-16)
    except ValueError as exc:
        raise SteadyStateError("outer detuning solve failed: %s" % exc)


def _secant_root(mismatch, x0, scale, max_iter=24):
    """Fast path for the outer detuning solve.

    mismatch(dL) has slope close to -1 (the laser offset enters the detuning
    directly; the static radiation-pressure pull only partially compensates),
    so a secant iteration started from the cold-cavity guess usually brackets
    the root within a few evaluations.  Returns None when it wanders into a
    no-stable-branch zone or fails to bracket, and the caller falls back to
    the exhaustive grid scan.
    """
    x = fx = None
    # the cold-cavity guess itself may fall in a no-stable-branch zone, so
    # probe a few offsets on either side before giving up on the fast path
    for dx in (0.0, -2.0, 2.0, -5.0, 5.0):
        x = x0 + dx * scale
        fx = mismatch(x)
        if math.isfinite(fx):
            break
    else:
        return None
    if fx == 0.0:
        return x
    step = fx  # Newton step for slope -1
    cap = 10.0 * scale
    for _ in range(max_iter):
        step = math.copysign(min(abs(step), cap), step)
        xn = x + step
        fn = mismatch(xn)
        if not math.isfinite(fn):
            step *= 0.5
            if abs(step) < 1e-9 * scale:
                return None
            continue
        if fn == 0.0:
            return xn
        if fn * fx < 0:
            if x < xn:
                return _finite_brentq(mismatch, x, fx, xn)
            return _finite_brentq(mismatch, xn, fn, x)
        denom = fn - fx
        step = -fn * (xn - x) / denom if denom != 0.0 else fn
        x, fx = xn, fn
    return None


def _edge_refine(mismatch, lo, flo, hi, xtol, max_iter=80):
    """Walk from a finite grid value into an adjacent no-stable-branch cell.

    The stable branch containing ``lo`` terminates somewhere inside
    (lo, hi); if its detuning crosses the target before the branch ends the
    crossing is recovered here, otherwise None (the branch folds first).
    """
    for _ in range(max_iter):
        if abs(hi - lo) <= xtol:
            return None
        mid = 0.5 * (lo + hi)
        v = mismatch(mid)
        if math.isfinite(v):
            if v == 0.0:
                return mid
            if v * flo < 0:
                return _finite_brentq(mismatch, lo, flo, mid)
            lo, flo = mid, v
        else:
            hi = mid
    return None


def _outer_root(mismatch, grid, vals):
    # pass 1: a sign change between two adjacent finite samples
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if math.isfinite(a) and math.isfinite(b) and a * b <= 0 and (a or b):
            return _finite_brentq(mismatch, grid[i], a, grid[i + 1])
    # pass 2: the crossing can sit between a finite sample and a cell with no
    # stable branch (near resonance the stable window is narrower than the
    # grid step), so bisect into every finite <-> dead-zone boundary
    edge_xtol = 1e-6 * max(1.0, grid[1] - grid[0])
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if math.isfinite(a) and not math.isfinite(b):
            r = _edge_refine(mismatch, grid[i], a, grid[i + 1], edge_xtol)
            if r is not None:
                return r
        elif not math.isfinite(a) and math.isfinite(b):
            r = _edge_refine(mismatch, grid[i + 1], b, grid[i], edge_xtol)
            if r is not None:
                return r
    return None


def solve_steady_state(drive, vib, mem, cav, idx, z0=None, temperature_T0=None,
                       branch_policy="lowest_q_stable"):
    """Solve the classical steady state; returns ALL branches, sorted by q_s.

    With a fixed laser frequency the roots of f(q) are enumerated by a dense
    scan plus bracketed bisection.  In target-detuning mode an outer scalar
    solve adjusts the laser offset until the selected branch has
    Delta = target; the achieved detuning is verified against the request, so
    a solve that lands on a fold of the bistability surface (where the
    target is unattainable on any continuous branch) fails loudly instead of
    returning a nearby detuning.
    """
    if z0 is None:
        z0 = mem.position_z0
    if drive.detuning_mode == "fixed_laser_frequency":
        delta_L = drive.laser_frequency_omegaL - empty_mode_frequency(idx, cav)
        pts = _solve_fixed(drive.input_power_P, delta_L, z0, vib, mem, cav,
                           idx, temperature_T0)
        _warn_small_alpha(pts)
        return pts

    target = drive.target_detuning
    Omega = vib.frequency_Omega
    kappa0 = cav.kappa0
    W0, _, _, _, _ = _profile(0.0, z0, vib, mem, cav, idx)
    center = W0 - target
    span = TARGET_SPAN_KAPPA * kappa0

    def mismatch(dL):
        try:
            sel = select_branch(
                _solve_fixed(drive.input_power_P, dL, z0, vib, mem, cav, idx,
                             temperature_T0), branch_policy)
        except SteadyStateError:
            return math.nan
        return sel.Delta - target

    dL_star = _secant_root(mismatch, center, kappa0)
    if dL_star is None:
        grid = np.linspace(center - span, center + span, TARGET_GRID)
        vals = np.array([mismatch(dL) for dL in grid])
        dL_star = _outer_root(mismatch, grid, vals)
    if dL_star is None:
        raise SteadyStateError(
            "target detuning %.6g rad/s not bracketed within %g kappa0 of the "
            "cold resonance offset" % (target, TARGET_SPAN_KAPPA))
    pts = _solve_fixed(drive.input_power_P, dL_star, z0, vib, mem, cav, idx,
                       temperature_T0)
    sel = select_branch(pts, branch_policy)
    # a bisection stopped on a jump of Delta(omega_L) converges without a root
    if abs(sel.Delta - target) > DETUNING_TOL_OMEGA * Omega:
        raise SteadyStateError(
            "target detuning unattainable: achieved Delta = %.9g, requested "
            "%.9g (branch folds before the target)" % (sel.Delta, target))
    _warn_small_alpha(pts)
    return sorted(pts, key=lambda p: p.q_s)


def _warn_small_alpha(points):
    for p in points:
        if p.E > 0 and p.alpha_s < ALPHA_LINEAR_MIN:
            warnings.warn(
                "alpha_s = %.3g < %g on branch q_s = %.3g: linearized "
                "treatment is marginal" % (p.alpha_s, ALPHA_LINEAR_MIN, p.q_s),
                stacklevel=3)
            break
