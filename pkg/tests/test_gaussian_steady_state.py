"""Drift/diffusion assembly, stability, Lyapunov solve, n and E_N."""

import math

import numpy as np
import pytest

from membrane_cavity import (DriveParams, OperatingPoint, UnstableSystemError,
                             VibrationalMode, build_diffusion, build_drift,
                             logarithmic_negativity, occupancy, select_branch,
                             solve_lyapunov, solve_steady_state,
                             stability_conditions)
from conftest import LAMBDA, OMEGA_M

Z0 = LAMBDA / 8.0


def synthetic_op(Delta=3e5, G=1.2e5, Gamma=7e3, h=-2e3, kappa0=2e5,
                 kappa1=5e4, n0=10.0):
    return OperatingPoint(q_s=0.0, alpha_s=1e3, Delta=Delta, G=G, Gamma=Gamma,
                          h=h, kappa0=kappa0, kappa1=kappa1,
                          kappaT=kappa0 + kappa1, n0=n0)


def synthetic_vib(Omega=1e6, Q=50.0):
    return VibrationalMode(1, 1, Omega, 8.5e-12, Q)


def random_op(rng):
    Om = 1e6
    kappa0 = 10.0 ** rng.uniform(4.0, 7.0)
    kappa1 = kappa0 * rng.uniform(0.0, 1.0)
    G = rng.uniform(0.0, 2.0) * Om
    op = OperatingPoint(
        q_s=0.0, alpha_s=1e3,
        Delta=rng.uniform(-3.0, 3.0) * Om,
        G=G,
        Gamma=rng.uniform(-0.3, 0.3) * G,
        h=rng.uniform(-0.5, 0.5) * Om,
        kappa0=kappa0, kappa1=kappa1, kappaT=kappa0 + kappa1,
        n0=10.0 ** rng.uniform(0.0, 4.0))
    vib = VibrationalMode(1, 1, Om, 8.5e-12, 10.0 ** rng.uniform(1.0, 6.0))
    return op, vib


# ----------------------------------------------------------------- structure

def test_drift_structure():
    op, vib = synthetic_op(), synthetic_vib()
    a = build_drift(op, vib).a
    gm = vib.gamma_m
    expect = np.array([
        [0.0, 1e6, 0.0, 0.0],
        [-1e6 - op.h, -gm, op.G, 0.0],
        [-op.Gamma, 0.0, -op.kappaT, op.Delta],
        [op.G, 0.0, -op.Delta, -op.kappaT]])
    np.testing.assert_array_equal(a, expect)
    assert math.isclose(np.trace(a), -gm - 2.0 * op.kappaT, rel_tol=1e-14)


def test_diffusion_structure():
    op, vib = synthetic_op(), synthetic_vib()
    d = build_diffusion(op, vib).d
    gm = vib.gamma_m
    assert d[1, 1] == gm * (2.0 * op.n0 + 1.0) + op.Gamma ** 2 / (4.0 * op.kappa1)
    assert d[1, 3] == d[3, 1] == op.Gamma / 2.0
    assert d[2, 2] == d[3, 3] == op.kappaT
    mask = np.zeros((4, 4), dtype=bool)
    mask[1, 1] = mask[1, 3] = mask[3, 1] = mask[2, 2] = mask[3, 3] = True
    assert np.all(d[~mask] == 0.0)


def test_diffusion_lossless_limit():
    op, vib = synthetic_op(Gamma=0.0, kappa1=0.0), synthetic_vib()
    d = build_diffusion(op, vib).d
    gm = vib.gamma_m
    np.testing.assert_array_equal(
        d, np.diag([0.0, gm * (2.0 * op.n0 + 1.0), op.kappa0, op.kappa0]))
    a = build_drift(op, vib).a
    assert a[2, 0] == 0.0            # absorption channel gone from the drift


def test_diffusion_positive_semidefinite():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        op, vib = random_op(rng)
        d = build_diffusion(op, vib).d
        eigs = np.linalg.eigvalsh(d)
        assert eigs.min() >= -1e-12 * max(np.linalg.norm(d), 1.0)
        # the absorption cross term can never outweigh its diagonals
        assert d[1, 1] * d[3, 3] >= op.Gamma ** 2 / 4.0 - 1e-12


# ------------------------------------------------------------------ stability

def test_decoupled_is_stable():
    op, vib = synthetic_op(G=0.0, Gamma=0.0, h=0.0), synthetic_vib()
    s0, s1, s2, stable = stability_conditions(op, vib)
    assert stable and s0 > 0 and s1 > 0 and s2 > 0


def test_stability_matches_eigenvalue_oracle():
    rng = np.random.default_rng(23)
    compared = 0
    for _ in range(2000):
        op, vib = random_op(rng)
        a = build_drift(op, vib).a
        margin = np.max(np.linalg.eigvals(a).real)
        if abs(margin) < 1e-8 * vib.frequency_Omega:
            continue                 # boundary: verdict legitimately fuzzy
        stable = stability_conditions(op, vib)[3]
        assert stable == (margin < 0.0)
        compared += 1
    assert compared > 1800


def test_s2_is_determinant_up_to_omega():
    rng = np.random.default_rng(29)
    for _ in range(200):
        op, vib = random_op(rng)
        a = build_drift(op, vib).a
        _, _, s2, _ = stability_conditions(op, vib)
        assert math.isclose(np.linalg.det(a), vib.frequency_Omega * s2,
                            rel_tol=1e-9)


# ------------------------------------------------------------------- Lyapunov

def test_lyapunov_decoupled_closed_form():
    op, vib = synthetic_op(G=0.0, Gamma=0.0, h=0.0), synthetic_vib()
    state = solve_lyapunov(build_drift(op, vib), build_diffusion(op, vib))
    want = np.diag([op.n0 + 0.5, op.n0 + 0.5, 0.5, 0.5])
    np.testing.assert_allclose(state.v, want, atol=1e-10 * (op.n0 + 1.0))
    assert math.isclose(state.occupancy_n, op.n0, rel_tol=1e-10)
    assert state.log_negativity == 0.0


def test_lyapunov_residual_at_working_point(cav, mem, vib, idx):
    pts = solve_steady_state(DriveParams(0.0285, target_detuning=OMEGA_M),
                             vib, mem, cav, idx, z0=Z0, temperature_T0=1.0)
    op = select_branch(pts)
    a = build_drift(op, vib).a
    d = build_diffusion(op, vib).d
    v = solve_lyapunov(a, d).v
    res = np.linalg.norm(a @ v + v @ a.T + d) / np.linalg.norm(d)
    assert res < 1e-10


def test_lyapunov_rejects_unstable():
    op, vib = synthetic_op(h=-2e6), synthetic_vib()      # inverted spring
    assert not stability_conditions(op, vib)[3]
    with pytest.raises(UnstableSystemError):
        solve_lyapunov(build_drift(op, vib), build_diffusion(op, vib))


# ---------------------------------------------------------------- n and E_N

def test_occupancy_reads_mechanical_block():
    v = np.diag([2.5, 3.5, 0.5, 0.5])
    assert occupancy(v) == 2.5


def test_log_negativity_product_state():
    assert logarithmic_negativity(np.diag([1.7, 1.7, 0.5, 0.5])) == 0.0


def test_log_negativity_two_mode_squeezed():
    for r in (0.1, 0.5, 1.0):
        c, s = 0.5 * math.cosh(2 * r), 0.5 * math.sinh(2 * r)
        v = np.array([[c, 0, s, 0],
                      [0, c, 0, -s],
                      [s, 0, c, 0],
                      [0, -s, 0, c]])
        assert math.isclose(logarithmic_negativity(v), 2.0 * r, rel_tol=1e-9)


def test_fig3_working_point_anchors(cav, mem, vib, idx):
    pts = solve_steady_state(DriveParams(0.0285, target_detuning=OMEGA_M),
                             vib, mem, cav, idx, z0=Z0, temperature_T0=1.0)
    op = select_branch(pts)
    state = solve_lyapunov(build_drift(op, vib), build_diffusion(op, vib))
    assert math.isclose(state.occupancy_n, 0.20198528890788858, rel_tol=1e-6)
    assert math.isclose(state.log_negativity, 0.2996839587573578, rel_tol=1e-6)


def test_solver_states_are_physical(cav, mem, vib, idx):
    # operating points produced by the actual model must give covariances
    # at or above vacuum on every diagonal
    from membrane_cavity import position_dependent_frequency
    rng = np.random.default_rng(31)
    w0 = position_dependent_frequency(0.0, Z0, vib, mem, cav, idx)[0]
    checked = 0
    while checked < 50:
        P = 10.0 ** rng.uniform(-4.0, -1.5)
        off = rng.uniform(-3.0, 1.0) * OMEGA_M
        pts = solve_steady_state(
            DriveParams(P, laser_frequency_omegaL=w0 - OMEGA_M + off),
            vib, mem, cav, idx, z0=Z0, temperature_T0=1.0,
            branch_policy="lowest_q_any")
        for op in pts:
            if not op.stable:
                continue
            state = solve_lyapunov(build_drift(op, vib),
                                   build_diffusion(op, vib))
            assert np.all(np.diag(state.v) >= 0.5 - 1e-9)
            assert state.occupancy_n >= -1e-9
            assert state.log_negativity >= 0.0
            checked += 1
