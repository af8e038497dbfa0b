"""Numbered end-to-end acceptance checks, one printed verdict line each.

Each criterion computes its observable, prints a single PASS/FAIL line with
the measured numbers and elapsed time, then asserts.  Budgets are part of
the criterion.  Run with -rA (the default here) to see the lines for
passing tests too.
"""

import math
import os
from time import perf_counter

import numpy as np

from membrane_cavity import (CavityGeometry, DriveParams, MembraneSlab,
                             ModeIndices, OperatingPoint, VibrationalMode,
                             approximate_occupancy, build_diffusion,
                             build_drift, empty_mode_frequency,
                             frequency_shift, logarithmic_negativity,
                             membrane_reflectivity, scattering_rates,
                             select_branch, simulate, solve_lyapunov,
                             solve_steady_state, spectrum_variances,
                             stability_conditions, total_finesse)
from membrane_cavity.cli_sweeps import (_default_sim, compute_row,
                                        load_scenario, run_sweep, verify)
from conftest import (LAMBDA, OMEGA_M, P_LONG, SIDE, SIGMA, make_cavity,
                      make_membrane, make_vib)
from scipy.constants import c as C_LIGHT

SCENARIOS = os.path.join(os.path.dirname(load_scenario.__code__.co_filename),
                         "scenarios")


def report(num, ok, detail, elapsed, budget):
    line = "criterion %2d: %s — %s (%.2f s / budget %g s)" \
        % (num, "PASS" if ok and elapsed < budget else "FAIL", detail,
           elapsed, budget)
    print(line)
    return line


def test_criterion_01_finesse_drop_and_periodicity():
    t0 = perf_counter()
    cav = CavityGeometry(7.4e-4, 5e-2, 20000.0, 1.064e-6)
    mem = MembraneSlab(2.0, 1e-4, 5e-8, SIDE, SIGMA)
    idx = ModeIndices(0, 0, P_LONG)
    k0 = cav.laser_k
    z = np.linspace(0.0, LAMBDA / 2.0, 2001)
    ratio = total_finesse(z, k0, idx, mem, cav) / 20000.0
    rmin = float(ratio.min())
    zs = np.linspace(0.0, LAMBDA / 2.0, 37)
    base = total_finesse(zs, k0, idx, mem, cav)
    wrap = total_finesse(zs + math.pi / k0, k0, idx, mem, cav)
    period_dev = float(np.max(np.abs(wrap - base) / base))
    elapsed = perf_counter() - t0
    ok = 0.40 <= rmin <= 0.60 and period_dev <= 1e-12
    line = report(1, ok, "min F_T/F = %.4f in [0.40, 0.60]; half-wave "
                  "periodicity dev %.1e <= 1e-12" % (rmin, period_dev),
                  elapsed, 1.0)
    assert ok and elapsed < 1.0, line


def test_criterion_02_reflectivity_anchor_and_quarter_wave():
    t0 = perf_counter()
    k = 2.0 * math.pi / LAMBDA
    sqR = math.sqrt(membrane_reflectivity(
        k, MembraneSlab(2.0, 0.0, 5e-8, SIDE, SIGMA)).real)
    lds = np.linspace(1e-9, 2.6e-7, 5001)
    refl = [membrane_reflectivity(k, MembraneSlab(2.0, 0.0, float(ld), SIDE,
                                                  SIGMA)).real for ld in lds]
    best = float(lds[int(np.argmax(refl))])
    target = LAMBDA / (4.0 * 2.0)
    elapsed = perf_counter() - t0
    ok = 0.365 <= sqR <= 0.405 and abs(best - target) <= 5e-9
    line = report(2, ok, "sqrt(R)|50nm = %.4f in [0.365, 0.405]; argmax R at "
                  "%.1f nm vs quarter-wave %.1f nm (tol 5 nm)"
                  % (sqR, best * 1e9, target * 1e9), elapsed, 1.0)
    assert ok and elapsed < 1.0, line


def test_criterion_03_explicit_shift_matches_implicit_root():
    t0 = perf_counter()
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        L = rng.uniform(5e-4, 2e-3)
        Rcurv = rng.uniform(2e-2, 8e-2)
        n_r = rng.uniform(1.5, 3.0)
        p = int(rng.integers(900, 3800))
        m, n = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        cav = CavityGeometry(L, Rcurv, 2e4, LAMBDA)
        idx = ModeIndices(m, n, p)
        k0 = empty_mode_frequency(idx, cav) / C_LIGHT
        mem = MembraneSlab(n_r, 0.0, rng.uniform(0.05, 0.9)
                           * math.pi / (n_r * k0), SIDE, SIGMA)
        z0 = rng.uniform(-LAMBDA, LAMBDA)

        R = membrane_reflectivity(k0, mem).real
        x = n_r * k0 * mem.thickness_Ld
        den = math.sqrt(4 * n_r ** 2 * math.cos(x) ** 2
                        + (n_r ** 2 + 1.0) ** 2 * math.sin(x) ** 2)
        beta = math.acos(2.0 * n_r * math.cos(x) / den) - k0 * mem.thickness_Ld
        gouy = (m + n + 1) * math.acos(cav.g)
        v = math.sqrt(R) * math.cos(2.0 * k0 * z0)
        lo = p * math.pi - math.pi / 2 + 1e-9
        hi = p * math.pi + math.pi / 2 - 1e-9
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if (math.sin(lo) - v) * (math.sin(mid) - v) <= 0:
                hi = mid
            else:
                lo = mid
        oracle = C_LIGHT * ((0.5 * (lo + hi) + gouy - beta) / L - k0)
        dw = frequency_shift(z0, k0, idx, mem, cav)
        worst = max(worst, abs(dw.real_part - oracle) / abs(oracle))
    elapsed = perf_counter() - t0
    ok = worst <= 1e-9
    line = report(3, ok, "explicit vs bisection root of the resonance "
                  "condition: worst rel dev %.2e <= 1e-9 over 100 draws"
                  % worst, elapsed, 5.0)
    assert ok and elapsed < 5.0, line


def test_criterion_04_ground_state_cooling_sweep():
    t0 = perf_counter()
    cfg = load_scenario(os.path.join(SCENARIOS, "fig3.scenario"))
    cfg.sweep.points = 100
    rows = run_sweep(cfg)
    finite = [r for r in rows if math.isfinite(r.n_lyapunov)]
    best = min(finite, key=lambda r: r.n_lyapunov)
    at_res = compute_row(cfg, "delta_over_omega", 1.0)
    elapsed = perf_counter() - t0
    ok = at_res.n_lyapunov < 1.0 and at_res.E_N > 0.0 \
        and 0.7 <= best.axis_value <= 1.5
    line = report(4, ok, "at Delta = Omega: n = %.4f < 1, E_N = %.4f > 0; "
                  "n minimum at Delta/Omega = %.2f in [0.7, 1.5] "
                  "(n_min = %.4f, 100-point sweep)"
                  % (at_res.n_lyapunov, at_res.E_N, best.axis_value,
                     best.n_lyapunov), elapsed, 10.0)
    assert ok and elapsed < 10.0, line


def test_criterion_05_room_temperature_persistence():
    t0 = perf_counter()
    cfg = load_scenario(os.path.join(SCENARIOS, "fig3_optimum.scenario"))
    row = compute_row(cfg, "temperature_K", 300.0)
    elapsed = perf_counter() - t0
    ok = row.n_lyapunov < 1.0 and row.E_N > 0.0
    line = report(5, ok, "T0 = 300 K at Delta = Omega: n = %.4f < 1, "
                  "E_N = %.4f > 0" % (row.n_lyapunov, row.E_N), elapsed, 1.0)
    assert ok and elapsed < 1.0, line


def test_criterion_06_thickness_structure():
    t0 = perf_counter()
    cfg = load_scenario(os.path.join(SCENARIOS, "fig3.scenario"))
    values = np.linspace(1e-8, 2e-7, 96)
    cold = []
    for v in values:
        row = compute_row(cfg, "thickness_m", float(v))
        cold.append(math.isfinite(row.n_lyapunov) and row.n_lyapunov < 1.0)
    regions = []
    start = None
    for ld, c in zip(values, cold):
        if c and start is None:
            start = ld
        elif not c and start is not None:
            regions.append((start, prev))
            start = None
        prev = ld
    if start is not None:
        regions.append((start, values[-1]))
    hits_a = [r for r in regions if r[0] <= 4.5e-8 and r[1] >= 1.5e-8]
    hits_b = [r for r in regions if r[0] <= 1.75e-7 and r[1] >= 1.25e-7]
    elapsed = perf_counter() - t0
    ok = any(ra is not rb for ra in hits_a for rb in hits_b)
    line = report(6, ok, "n < 1 regions (nm): %s; need one meeting "
                  "[15, 45] and a disjoint one meeting [125, 175]"
                  % "; ".join("[%.0f, %.0f]" % (a * 1e9, b * 1e9)
                              for a, b in regions), elapsed, 30.0)
    assert ok and elapsed < 30.0, line


def test_criterion_07_stochastic_oracle_agreement():
    t0 = perf_counter()
    # (a) decoupled mechanics + cavity with analytically known covariance
    a = np.array([[0.0, 1e6, 0.0, 0.0],
                  [-1e6, -1e6, 0.0, 0.0],
                  [0.0, 0.0, -5e5, 0.0],
                  [0.0, 0.0, 0.0, -5e5]])
    d = np.diag([0.0, 1e6 * (2.0 * 0.7 + 1.0), 5e5, 5e5])
    v_ref = solve_lyapunov(a, d).v
    emp = simulate(a, d, _default_sim(a, None))
    dev_a = float(np.max(np.abs(emp.v_hat - v_ref) / emp.standard_errors))
    ok_a = bool(np.all(np.abs(emp.v_hat - v_ref)
                       <= 3.0 * emp.standard_errors))
    # (b) the driven working point
    rep = verify(load_scenario(os.path.join(SCENARIOS,
                                            "fig3_optimum.scenario")))
    dev_b = float(np.max(rep.deviations_sigma))
    elapsed = perf_counter() - t0
    ok = ok_a and rep.passed
    line = report(7, ok, "all covariance elements within 3 se: decoupled "
                  "max dev %.2f se, working point max dev %.2f se"
                  % (dev_a, dev_b), elapsed, 300.0)
    assert ok and elapsed < 300.0, line


def test_criterion_08_stability_criterion_equivalence():
    t0 = perf_counter()
    rng = np.random.default_rng(23)
    vib_m = 8.5e-12
    compared = mismatches = 0
    for _ in range(2000):
        Om = 1e6
        kappa0 = 10.0 ** rng.uniform(4.0, 7.0)
        kappa1 = kappa0 * rng.uniform(0.0, 1.0)
        G = rng.uniform(0.0, 2.0) * Om
        op = OperatingPoint(
            q_s=0.0, alpha_s=1e3, Delta=rng.uniform(-3.0, 3.0) * Om, G=G,
            Gamma=rng.uniform(-0.3, 0.3) * G, h=rng.uniform(-0.5, 0.5) * Om,
            kappa0=kappa0, kappa1=kappa1, kappaT=kappa0 + kappa1,
            n0=10.0 ** rng.uniform(0.0, 4.0))
        vib = VibrationalMode(1, 1, Om, vib_m, 10.0 ** rng.uniform(1.0, 6.0))
        margin = np.max(np.linalg.eigvals(build_drift(op, vib).a).real)
        if abs(margin) < 1e-8 * Om:
            continue
        compared += 1
        if stability_conditions(op, vib)[3] != (margin < 0.0):
            mismatches += 1
    elapsed = perf_counter() - t0
    ok = mismatches == 0 and compared >= 1800
    line = report(8, ok, "polynomial vs eigenvalue stability verdicts: "
                  "%d/%d agree away from the boundary" %
                  (compared - mismatches, compared), elapsed, 10.0)
    assert ok and elapsed < 10.0, line


def test_criterion_09_spectrum_integral_and_rate_identity():
    t0 = perf_counter()
    cav, mem, vib = make_cavity(), make_membrane(), make_vib()
    idx = ModeIndices(0, 0, P_LONG)
    op = select_branch(solve_steady_state(
        DriveParams(2.85e-4, target_detuning=OMEGA_M), vib, mem, cav, idx,
        z0=LAMBDA / 8.0, temperature_T0=1.0))
    v = solve_lyapunov(build_drift(op, vib), build_diffusion(op, vib)).v
    var_q = spectrum_variances(op, vib, thermal_model="markovian")[0]
    int_dev = abs(var_q - v[0, 0]) / v[0, 0]

    rng = np.random.default_rng(37)
    worst = 0.0
    checked = 0
    while checked < 100:
        Om = 1e6
        kappa0 = 10.0 ** rng.uniform(4.0, 7.0)
        kappa1 = kappa0 * rng.uniform(0.0, 1.0)
        G = rng.uniform(0.0, 2.0) * Om
        op_r = OperatingPoint(
            q_s=0.0, alpha_s=1e3, Delta=rng.uniform(-3.0, 3.0) * Om, G=G,
            Gamma=rng.uniform(-0.3, 0.3) * G, h=rng.uniform(-0.5, 0.5) * Om,
            kappa0=kappa0, kappa1=kappa1, kappaT=kappa0 + kappa1, n0=100.0)
        vib_r = VibrationalMode(1, 1, Om, 8.5e-12,
                                10.0 ** rng.uniform(1.0, 6.0))
        try:
            rates = scattering_rates(op_r, vib_r)
        except Exception:
            continue
        lhs = rates.gamma_eff_at_Om
        rhs = vib_r.gamma_m + rates.a_minus - rates.a_plus
        worst = max(worst, abs(lhs - rhs)
                    / max(abs(lhs), abs(rhs), vib_r.gamma_m))
        checked += 1
    elapsed = perf_counter() - t0
    ok = int_dev <= 0.01 and worst <= 1e-9
    line = report(9, ok, "integral S_q d omega/2pi vs V11: rel dev %.2e <= "
                  "0.01; damping identity worst rel dev %.2e <= 1e-9 over "
                  "100 draws" % (int_dev, worst), elapsed, 30.0)
    assert ok and elapsed < 30.0, line


def test_criterion_10_weak_coupling_estimate():
    t0 = perf_counter()
    cav, mem, vib = make_cavity(), make_membrane(), make_vib()
    idx = ModeIndices(0, 0, P_LONG)
    devs = {}
    for power, tol in ((2.85e-3, 0.20), (2.85e-4, 0.05)):
        op = select_branch(solve_steady_state(
            DriveParams(power, target_detuning=OMEGA_M), vib, mem, cav, idx,
            z0=LAMBDA / 8.0, temperature_T0=1.0))
        n_ly = solve_lyapunov(build_drift(op, vib),
                              build_diffusion(op, vib)).occupancy_n
        devs[power] = (abs(approximate_occupancy(op, vib) - n_ly) / n_ly, tol)
    elapsed = perf_counter() - t0
    ok = all(dev <= tol for dev, tol in devs.values())
    line = report(10, ok, "closed-form n vs covariance n: %s"
                  % "; ".join("%.2f mW dev %.1f%% (tol %.0f%%)"
                              % (p * 1e3, d * 100, t * 100)
                              for p, (d, t) in sorted(devs.items())),
                  elapsed, 5.0)
    assert ok and elapsed < 5.0, line


def test_criterion_11_analytic_negativity_oracle():
    t0 = perf_counter()
    worst = 0.0
    for r in (0.1, 0.5, 1.0):
        c, s = 0.5 * math.cosh(2 * r), 0.5 * math.sinh(2 * r)
        v = np.array([[c, 0, s, 0],
                      [0, c, 0, -s],
                      [s, 0, c, 0],
                      [0, -s, 0, c]])
        worst = max(worst, abs(logarithmic_negativity(v) - 2.0 * r))
    elapsed = perf_counter() - t0
    ok = worst <= 1e-9
    line = report(11, ok, "two-mode squeezed covariance: worst |E_N - 2r| = "
                  "%.2e <= 1e-9 for r in {0.1, 0.5, 1.0}" % worst,
                  elapsed, 1.0)
    assert ok and elapsed < 1.0, line
