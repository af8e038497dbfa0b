"""Command-line entry point.

    membrane-cavity <command> --scenario FILE [--format csv|json]
                    [--out PATH] [--threads N] [--seed N] [--no-figure]

Commands: modes, finesse, steady-state, covariance, spectrum, sweep, verify.
Exit codes: 0 success, 1 physics failure (including a failed verify),
2 usage or scenario errors.  When --out is given for a command with a sweep
axis, a PNG rendering of the table is written next to it unless --no-figure.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .cli_sweeps import (ScenarioError, default_threads, emit, load_scenario,
                         mode_summary, run_sweep, solve_single_point,
                         table_columns, verify, verify_report_text)
from .cavity_optics import total_finesse
from .errors import PhysicsError
from .gaussian_steady_state import (build_diffusion, build_drift,
                                    solve_lyapunov, stability_conditions)
from .operating_point import select_branch
from .spectra import effective_frequency_damping, noise_spectra

BUNDLED_DIR = os.path.join(os.path.dirname(__file__), "scenarios")


def _resolve_scenario(name):
    if os.path.exists(name):
        return name
    bundled = os.path.join(BUNDLED_DIR, name + ".scenario")
    if os.path.exists(bundled):
        return bundled
    bundled = os.path.join(BUNDLED_DIR, name)
    if os.path.exists(bundled):
        return bundled
    raise ScenarioError(["no such scenario file or bundled name: %s" % name])


def _emit(args, table, axis=None, figure=None):
    text = emit(table, args.format, args.out, axis=axis)
    if text is not None:
        sys.stdout.write(text)
    elif figure is not None and not args.no_figure:
        figure(os.path.splitext(args.out)[0] + ".png")


def _figure(columns, rows, x_key, curves, xlabel, logy, path):
    # rendered only on the file-output path; Agg keeps this headless-safe
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = np.array([r[x_key] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for key, label in curves:
        ys = np.array([r[key] for r in rows], dtype=float)
        if np.all(~np.isfinite(ys)):
            continue
        (ax.semilogy if logy else ax.plot)(xs, ys, label=label)
    ax.set_xlabel(xlabel)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_modes(args, cfg):
    _emit(args, mode_summary(cfg))


def cmd_finesse(args, cfg):
    cav, mem = cfg.cavity, cfg.membrane
    idx = cfg.mode_indices
    if cfg.sweep is not None and cfg.sweep.axis == "position_z0_m":
        zs = cfg.sweep.values()
    else:
        zs = np.linspace(0.0, cav.laser_wavelength_lambda / 2.0, 201)
    cols = [("position_z0_m", "m"), ("F_T", "1"), ("F_T_over_F", "1")]
    rows = [{"position_z0_m": float(z),
             "F_T": (ft := total_finesse(float(z), cav.laser_k, idx, mem,
                                         cav)),
             "F_T_over_F": ft / cav.empty_finesse_F} for z in zs]
    _emit(args, (cols, rows), figure=lambda p: _figure(
        cols, rows, "position_z0_m",
        [("F_T_over_F", "F_T / F")], "membrane position z0 [m]", False, p))


def cmd_steady_state(args, cfg):
    branches = solve_single_point(cfg)
    cols = [("q_s", "x0"), ("alpha_s_sq", "photons"), ("Delta", "rad/s"),
            ("G", "rad/s"), ("Gamma", "rad/s"), ("h", "rad/s"),
            ("kappa1", "rad/s"), ("kappaT", "rad/s"), ("n0", "1"),
            ("stable", "bool"), ("s0", "(rad/s)^3"), ("s1", "(rad/s)^6"),
            ("s2", "(rad/s)^3"), ("omega_L", "rad/s")]
    rows = []
    for b in branches:
        s0, s1, s2, stable = stability_conditions(b, cfg.vib)
        rows.append({"q_s": b.q_s, "alpha_s_sq": b.alpha_s ** 2,
                     "Delta": b.Delta, "G": b.G, "Gamma": b.Gamma, "h": b.h,
                     "kappa1": b.kappa1, "kappaT": b.kappaT, "n0": b.n0,
                     "stable": stable, "s0": s0, "s1": s1, "s2": s2,
                     "omega_L": b.omega_L})
    _emit(args, (cols, rows))


def cmd_covariance(args, cfg):
    sel = select_branch(solve_single_point(cfg))
    state = solve_lyapunov(build_drift(sel, cfg.vib),
                           build_diffusion(sel, cfg.vib))
    cols = [("element", "text"), ("value", "1")]
    rows = [{"element": "v%d%d" % (i, j), "value": state.v[i, j]}
            for i in range(4) for j in range(4)]
    rows.append({"element": "n_lyapunov", "value": state.occupancy_n})
    rows.append({"element": "E_N", "value": state.log_negativity})
    rows.append({"element": "Delta", "value": sel.Delta})
    rows.append({"element": "q_s", "value": sel.q_s})
    _emit(args, (cols, rows))


def cmd_spectrum(args, cfg):
    sel = select_branch(solve_single_point(cfg))
    lo, hi, pts = cfg.spectrum_grid
    Om = cfg.vib.frequency_Omega
    omegas = np.linspace(lo * Om, hi * Om, pts)
    sample = noise_spectra(omegas, sel, cfg.vib)
    try:
        om_eff, gam_eff = effective_frequency_damping(omegas, sel, cfg.vib)
    except PhysicsError:
        om_eff = gam_eff = np.full_like(omegas, math.nan)
    cols = [("omega", "rad/s"), ("s_th", "rad/s"), ("s_rp", "rad/s"),
            ("s_abs", "rad/s"), ("s_q", "s"), ("chi_eff_real", "s"),
            ("chi_eff_imag", "s"), ("omega_eff", "rad/s"),
            ("gamma_eff", "rad/s")]
    rows = [{"omega": float(sample.omega[i]), "s_th": float(sample.s_th[i]),
             "s_rp": float(sample.s_rp[i]), "s_abs": float(sample.s_abs[i]),
             "s_q": float(sample.s_q[i]),
             "chi_eff_real": float(sample.chi_eff[i].real),
             "chi_eff_imag": float(sample.chi_eff[i].imag),
             "omega_eff": float(om_eff[i]), "gamma_eff": float(gam_eff[i])}
            for i in range(len(omegas))]
    _emit(args, (cols, rows), figure=lambda p: _figure(
        cols, rows, "omega", [("s_q", "S_q(omega)")],
        "omega [rad/s]", True, p))


def cmd_sweep(args, cfg):
    rows = run_sweep(cfg, threads=args.threads)
    axis = cfg.sweep.axis
    dicts = None
    if args.out and not args.no_figure:
        from dataclasses import asdict
        dicts = [asdict(r) for r in rows]
    _emit(args, rows, axis=axis, figure=None if dicts is None else
          lambda p: _figure(table_columns(axis), dicts, "axis_value",
                            [("n_lyapunov", "n (covariance)"),
                             ("n_approx", "n (weak coupling)"),
                             ("E_N", "E_N")], axis, True, p))


def cmd_verify(args, cfg):
    rep = verify(cfg, seed=args.seed)
    if args.format == "json":
        import json
        payload = {
            "v_lyapunov": rep.v_lyapunov.tolist(),
            "v_hat": rep.v_hat.tolist(),
            "standard_errors": rep.standard_errors.tolist(),
            "deviations_sigma": rep.deviations_sigma.tolist(),
            "samples": rep.samples,
            "passed": rep.passed,
        }
        text = json.dumps(payload, indent=1) + "\n"
    else:
        text = verify_report_text(rep)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not rep.passed:
        raise PhysicsError("covariance verification failed at 3 standard "
                           "errors; see report")


COMMANDS = {
    "modes": cmd_modes,
    "finesse": cmd_finesse,
    "steady-state": cmd_steady_state,
    "covariance": cmd_covariance,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="membrane-cavity",
        description="Membrane-in-cavity optomechanics: operating points, "
                    "covariances, spectra, sweeps.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True,
                       help="scenario file path or bundled name (fig2..fig6, "
                            "fig3_optimum)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None,
                       help="output file (default stdout)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for sweeps (default $%s or 1)"
                            % "MEMBRANE_CAVITY_THREADS")
        p.add_argument("--seed", type=int, default=None,
                       help="override the stochastic seed (verify)")
        p.add_argument("--no-figure", action="store_true",
                       help="skip the PNG rendered next to --out")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads is None:
        args.threads = default_threads()
    try:
        cfg = load_scenario(_resolve_scenario(args.scenario))
        COMMANDS[args.command](args, cfg)
    except ScenarioError as exc:
        for msg in exc.messages:
            print("scenario error: %s" % msg, file=sys.stderr)
        return 2
    except PhysicsError as exc:
        print("physics error: %s" % exc, file=sys.stderr)
        return 1
    except BrokenPipeError:
        # stdout consumer (e.g. `| head`) closed the pipe; die quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
