"""Scenario files, parameter sweeps, tabular output, and the verify report.

A scenario is an INI-style text file (configparser dialect) describing one
physical configuration plus, optionally, a sweep axis:

    [cavity]    length_L_m, curvature_R_m, finesse, wavelength_m
    [membrane]  n_real, n_imag, thickness_m, side_m,
                surface_density_kg_m2 | mass_kg, position_z0_m (number or
                the token "max-coupling")
    [mechanics] index_j, index_k, quality_Q, omega_rad_s | sound_speed_m_s
    [drive]     power_W, delta_over_omega
    [environment] temperature_K
    [sweep]     axis (delta_over_omega | temperature_K | power_W |
                thickness_m | position_z0_m), start, stop, points,
                spacing (linear | log)
    [spectrum]  omega_min_over_omega, omega_max_over_omega, points
    [verify]    dt_s, total_time_s, burn_in_s, batches, seed

Sweep rows are computed independently (thread pool), never abort on
per-point physics failures, and serialize to RFC-4180 CSV (17 significant
digits, LF, unit-annotated header) or a JSON array of row objects with
non-finite numbers rendered as the string "nan".
"""

import concurrent.futures
import configparser
import csv
import io
import json
import math
import os
from dataclasses import dataclass, replace, asdict

import numpy as np

from .cavity_optics import (CavityGeometry, MembraneSlab, ModeIndices,
                            empty_mode_frequency, frequency_shift,
                            total_finesse)
from .errors import PhysicsError, ScenarioError, SteadyStateError
from .gaussian_steady_state import (build_diffusion, build_drift,
                                    solve_lyapunov, stability_conditions)
from .mode_coupling import VibrationalMode
from .operating_point import DriveParams, select_branch, solve_steady_state
from .sde_oracle import SimulationConfig, simulate
from .spectra import approximate_occupancy

SWEEP_AXES = ("delta_over_omega", "temperature_K", "power_W", "thickness_m",
              "position_z0_m")
AXIS_UNITS = {"delta_over_omega": "1", "temperature_K": "K", "power_W": "W",
              "thickness_m": "m", "position_z0_m": "m"}
THREADS_ENV = "MEMBRANE_CAVITY_THREADS"
VERIFY_SIGMA = 3.0


@dataclass
class SweepSpec:
    axis: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def values(self):
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class ScenarioConfig:
    """One validated scenario: built physics objects plus run descriptions."""

    cavity: CavityGeometry
    membrane: MembraneSlab
    vib: VibrationalMode = None
    power_P: float = 0.0
    delta_over_omega: float = 0.0
    temperature_T0: float = 0.0
    sweep: SweepSpec = None
    spectrum_grid: tuple = (0.2, 2.0, 2001)
    verify_opts: dict = None

    @property
    def mode_indices(self):
        # longitudinal order of the driven mode closest to the laser
        p = max(1, int(round(2.0 * self.cavity.length_L
                             / self.cavity.laser_wavelength_lambda)))
        return ModeIndices(0, 0, p)


@dataclass
class SweepRow:
    """One sweep point.  Column order is fixed; see COLUMNS."""

    axis_value: float
    z0: float = math.nan
    omega_L: float = math.nan
    q_s: float = math.nan
    alpha_s_sq: float = math.nan
    Delta: float = math.nan
    G: float = math.nan
    Gamma: float = math.nan
    h: float = math.nan
    kappa1: float = math.nan
    kappaT: float = math.nan
    F_T: float = math.nan
    stable: bool = False
    s0: float = math.nan
    s1: float = math.nan
    s2: float = math.nan
    n_lyapunov: float = math.nan
    n_approx: float = math.nan
    E_N: float = math.nan
    note: str = ""


COLUMNS = [
    ("axis_value", None),            # unit filled per axis
    ("z0", "m"), ("omega_L", "rad/s"), ("q_s", "x0"),
    ("alpha_s_sq", "photons"), ("Delta", "rad/s"), ("G", "rad/s"),
    ("Gamma", "rad/s"), ("h", "rad/s"), ("kappa1", "rad/s"),
    ("kappaT", "rad/s"), ("F_T", "1"), ("stable", "bool"),
    ("s0", "(rad/s)^3"), ("s1", "(rad/s)^6"), ("s2", "(rad/s)^3"),
    ("n_lyapunov", "1"), ("n_approx", "1"), ("E_N", "1"), ("note", "text"),
]


# ---------------------------------------------------------------- loading

def _take(cp, section, key, conv, errors, default=None, required=False):
    if not cp.has_option(section, key):
        if required:
            errors.append("[%s] missing key '%s'" % (section, key))
        return default
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except ValueError:
        errors.append("[%s] %s: cannot parse %r" % (section, key, raw))
        return default


def load_scenario(path):
    """Parse and validate a scenario file; all problems reported together."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ScenarioError(["cannot read %s: %s" % (path, exc)])
    except configparser.Error as exc:
        raise ScenarioError([str(exc)])
    return _build_scenario(cp, str(path))


def loads_scenario(text, source="<string>"):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError([str(exc)])
    return _build_scenario(cp, source)


def _build_scenario(cp, source):
    errors = []
    for sec in ("cavity", "membrane"):
        if not cp.has_section(sec):
            errors.append("missing required section [%s]" % sec)
    if errors:
        raise ScenarioError(errors)

    L = _take(cp, "cavity", "length_L_m", float, errors, required=True)
    Rc = _take(cp, "cavity", "curvature_R_m", float, errors, default=math.inf)
    F = _take(cp, "cavity", "finesse", float, errors, required=True)
    lam = _take(cp, "cavity", "wavelength_m", float, errors, required=True)

    n_r = _take(cp, "membrane", "n_real", float, errors, required=True)
    n_i = _take(cp, "membrane", "n_imag", float, errors, default=0.0)
    Ld = _take(cp, "membrane", "thickness_m", float, errors, required=True)
    D = _take(cp, "membrane", "side_m", float, errors, required=True)
    sigma = _take(cp, "membrane", "surface_density_kg_m2", float, errors)
    mass = _take(cp, "membrane", "mass_kg", float, errors)
    if sigma is None and mass is None:
        errors.append("[membrane] give surface_density_kg_m2 or mass_kg")
    elif sigma is not None and mass is not None:
        errors.append("[membrane] surface_density_kg_m2 and mass_kg are "
                      "mutually exclusive")
    elif mass is not None:
        if D and D > 0:
            sigma = 4.0 * mass / D ** 2      # keeps the mode mass pinned
        else:
            errors.append("[membrane] mass_kg needs a valid side_m")

    z0_raw = cp.get("membrane", "position_z0_m", fallback="max-coupling")
    z0 = None
    if z0_raw.strip().lower() in ("max-coupling", "max_coupling"):
        if lam:
            z0 = lam / 8.0                    # first maximum of |sin(2 k z0)|
    else:
        try:
            z0 = float(z0_raw)
        except ValueError:
            errors.append("[membrane] position_z0_m: cannot parse %r" % z0_raw)

    vib = None
    if cp.has_section("mechanics"):
        j = _take(cp, "mechanics", "index_j", int, errors, default=1)
        k = _take(cp, "mechanics", "index_k", int, errors, default=1)
        Q = _take(cp, "mechanics", "quality_Q", float, errors, required=True)
        Om = _take(cp, "mechanics", "omega_rad_s", float, errors)
        cs = _take(cp, "mechanics", "sound_speed_m_s", float, errors)
        if Om is None and cs is None:
            errors.append("[mechanics] give omega_rad_s or sound_speed_m_s")

    power = _take(cp, "drive", "power_W", float, errors, default=0.0) \
        if cp.has_section("drive") else 0.0
    dov = _take(cp, "drive", "delta_over_omega", float, errors, default=0.0) \
        if cp.has_section("drive") else 0.0
    T0 = _take(cp, "environment", "temperature_K", float, errors,
               default=0.0) if cp.has_section("environment") else 0.0

    sweep = None
    if cp.has_section("sweep"):
        axis = _take(cp, "sweep", "axis", str, errors, required=True)
        start = _take(cp, "sweep", "start", float, errors, required=True)
        stop = _take(cp, "sweep", "stop", float, errors, required=True)
        pts = _take(cp, "sweep", "points", int, errors, required=True)
        spacing = _take(cp, "sweep", "spacing", str, errors,
                        default="linear")
        if axis is not None and axis not in SWEEP_AXES:
            errors.append("[sweep] axis must be one of %s" %
                          ", ".join(SWEEP_AXES))
        if spacing not in ("linear", "log"):
            errors.append("[sweep] spacing must be linear or log")
        if pts is not None and pts < 1:
            errors.append("[sweep] points must be >= 1")
        if spacing == "log" and start is not None and stop is not None \
                and (start <= 0 or stop <= 0):
            errors.append("[sweep] log spacing needs positive start/stop")
        if not errors:
            sweep = SweepSpec(axis, start, stop, pts, spacing)

    spectrum = (
        _take(cp, "spectrum", "omega_min_over_omega", float, errors,
              default=0.2),
        _take(cp, "spectrum", "omega_max_over_omega", float, errors,
              default=2.0),
        _take(cp, "spectrum", "points", int, errors, default=2001),
    ) if cp.has_section("spectrum") else (0.2, 2.0, 2001)

    verify_opts = None
    if cp.has_section("verify"):
        verify_opts = {}
        for key, conv in (("dt_s", float), ("total_time_s", float),
                          ("burn_in_s", float), ("batches", int),
                          ("seed", int)):
            val = _take(cp, "verify", key, conv, errors)
            if val is not None:
                verify_opts[key] = val

    # physics invariants: build the domain objects, collecting their vetoes
    cavity = membrane = vib_obj = None
    if not errors:
        try:
            cavity = CavityGeometry(L, Rc, F, lam)
        except (ValueError, PhysicsError) as exc:
            errors.append("[cavity] %s" % exc)
        try:
            membrane = MembraneSlab(n_r, n_i, Ld, D, sigma, z0)
        except (ValueError, PhysicsError) as exc:
            errors.append("[membrane] %s" % exc)
        if cp.has_section("mechanics") and membrane is not None:
            try:
                vib_obj = VibrationalMode.from_membrane(
                    j, k, membrane, Q, frequency_Omega=Om, sound_speed=cs)
            except (ValueError, PhysicsError) as exc:
                errors.append("[mechanics] %s" % exc)
        if power is not None and power < 0:
            errors.append("[drive] power_W must be >= 0")
        if T0 is not None and T0 < 0:
            errors.append("[environment] temperature_K must be >= 0")
    if errors:
        raise ScenarioError(errors)
    return ScenarioConfig(cavity, membrane, vib_obj, power, dov, T0, sweep,
                          spectrum, verify_opts)


def serialize_scenario(cfg):
    """Canonical text form; load(serialize(cfg)) == cfg."""
    cav, mem = cfg.cavity, cfg.membrane
    out = io.StringIO()
    out.write("[cavity]\n")
    out.write("length_L_m = %.17g\n" % cav.length_L)
    out.write("curvature_R_m = %s\n" % ("inf" if math.isinf(cav.curvature_R)
                                        else "%.17g" % cav.curvature_R))
    out.write("finesse = %.17g\n" % cav.empty_finesse_F)
    out.write("wavelength_m = %.17g\n\n" % cav.laser_wavelength_lambda)
    out.write("[membrane]\n")
    out.write("n_real = %.17g\nn_imag = %.17g\n" % (mem.n_real, mem.n_imag))
    out.write("thickness_m = %.17g\nside_m = %.17g\n"
              % (mem.thickness_Ld, mem.side_D))
    out.write("surface_density_kg_m2 = %.17g\n" % mem.surface_density_sigma)
    out.write("position_z0_m = %.17g\n\n" % mem.position_z0)
    if cfg.vib is not None:
        out.write("[mechanics]\n")
        out.write("index_j = %d\nindex_k = %d\n"
                  % (cfg.vib.index_j, cfg.vib.index_k))
        out.write("omega_rad_s = %.17g\n" % cfg.vib.frequency_Omega)
        out.write("quality_Q = %.17g\n\n" % cfg.vib.quality_Qm)
    out.write("[drive]\npower_W = %.17g\ndelta_over_omega = %.17g\n\n"
              % (cfg.power_P, cfg.delta_over_omega))
    out.write("[environment]\ntemperature_K = %.17g\n\n" % cfg.temperature_T0)
    if cfg.sweep is not None:
        s = cfg.sweep
        out.write("[sweep]\naxis = %s\nstart = %.17g\nstop = %.17g\n"
                  "points = %d\nspacing = %s\n\n"
                  % (s.axis, s.start, s.stop, s.points, s.spacing))
    if cfg.spectrum_grid != (0.2, 2.0, 2001):
        g = cfg.spectrum_grid
        out.write("[spectrum]\nomega_min_over_omega = %.17g\n"
                  "omega_max_over_omega = %.17g\npoints = %d\n\n"
                  % (g[0], g[1], g[2]))
    if cfg.verify_opts:
        out.write("[verify]\n")
        for key, val in cfg.verify_opts.items():
            fmt = "%d" if isinstance(val, int) else "%.17g"
            out.write("%s = %s\n" % (key, fmt % val))
    return out.getvalue()


# ---------------------------------------------------------------- sweeping

def _point_config(cfg, axis, value):
    mem, z0 = cfg.membrane, cfg.membrane.position_z0
    P, dov, T0 = cfg.power_P, cfg.delta_over_omega, cfg.temperature_T0
    if axis == "delta_over_omega":
        dov = value
    elif axis == "temperature_K":
        T0 = value
    elif axis == "power_W":
        P = value
    elif axis == "thickness_m":
        mem = replace(mem, thickness_Ld=value)   # sigma fixed: mass pinned
    elif axis == "position_z0_m":
        mem = replace(mem, position_z0=value)
        z0 = value
    elif axis is not None:
        raise ScenarioError(["unknown sweep axis %r" % axis])
    return mem, z0, P, dov, T0


def compute_row(cfg, axis, value):
    """Evaluate one sweep point; physics failures land in row.note."""
    mem, z0, P, dov, T0 = _point_config(cfg, axis, value)
    vib, cav = cfg.vib, cfg.cavity
    idx = cfg.mode_indices
    row = SweepRow(axis_value=value, z0=z0)
    try:
        row.F_T = total_finesse(z0, cav.laser_k, idx, mem, cav)
    except PhysicsError as exc:
        row.note = "optics: %s" % exc
        return row
    if vib is None:
        row.note = "no [mechanics] section: optics columns only"
        return row

    drive = DriveParams(P, target_detuning=dov * vib.frequency_Omega)
    try:
        branches = solve_steady_state(drive, vib, mem, cav, idx, z0=z0,
                                      temperature_T0=T0)
    except PhysicsError as exc:
        row.note = str(exc)
        return row
    try:
        sel = select_branch(branches)
    except SteadyStateError:
        sel = select_branch(branches, "lowest_q_any")

    row.omega_L = sel.omega_L
    row.q_s = sel.q_s
    row.alpha_s_sq = sel.alpha_s ** 2
    row.Delta, row.G, row.Gamma, row.h = sel.Delta, sel.G, sel.Gamma, sel.h
    row.kappa1, row.kappaT = sel.kappa1, sel.kappaT
    s0, s1, s2, stable = stability_conditions(sel, vib)
    row.s0, row.s1, row.s2, row.stable = s0, s1, s2, stable
    if not stable:
        bad = [name for name, val in (("s0", s0), ("s1", s1), ("s2", s2))
               if val <= 0]
        row.note = "unstable: %s <= 0" % ",".join(bad)
        return row

    a = build_drift(sel, vib)
    d = build_diffusion(sel, vib)
    try:
        state = solve_lyapunov(a, d)
        row.n_lyapunov = state.occupancy_n
        row.E_N = state.log_negativity
    except PhysicsError as exc:
        row.note = "covariance: %s" % exc
    try:
        row.n_approx = approximate_occupancy(sel, vib)
    except PhysicsError as exc:
        row.note = (row.note + "; " if row.note else "") + \
            "n_approx: %s" % exc
    return row


def default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_sweep(cfg, threads=None):
    """One SweepRow per axis point, order-independent and never aborting."""
    if cfg.sweep is None:
        raise ScenarioError(["scenario has no [sweep] section"])
    values = cfg.sweep.values()
    threads = threads or default_threads()
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(
                lambda v: compute_row(cfg, cfg.sweep.axis, float(v)), values))
    else:
        rows = [compute_row(cfg, cfg.sweep.axis, float(v)) for v in values]
    return rows


# ---------------------------------------------------------------- emission

def _format_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def _json_cell(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else "nan"
    return str(value)


def table_columns(axis=None):
    cols = []
    for name, unit in COLUMNS:
        if name == "axis_value" and axis is not None:
            cols.append((axis, AXIS_UNITS.get(axis, "1")))
        elif name == "axis_value":
            cols.append(("axis_value", "1"))
        else:
            cols.append((name, unit))
    return cols


def emit(table, fmt="csv", path=None, axis=None):
    """Serialize sweep rows (or any (columns, dict-rows) pair) to csv/json.

    `table` is either a list of SweepRow or a tuple (columns, rows) with
    columns a list of (name, unit) and rows a list of dicts keyed by name.
    Writes to `path` or returns the text when path is None.
    """
    if isinstance(table, tuple):
        cols, dicts = table
        keys = [c[0] for c in cols]
    else:
        cols = table_columns(axis)
        keys = [c[0] for c in COLUMNS]
        dicts = [asdict(r) for r in table]

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["%s [%s]" % (n, u) if u else n for n, u in cols])
        for row in dicts:
            writer.writerow([_format_cell(row[k]) for k in keys])
        text = buf.getvalue()
    elif fmt == "json":
        name_by_key = {k: c[0] for k, c in zip(keys, cols)}
        payload = [{name_by_key[k]: _json_cell(row[k]) for k in keys}
                   for row in dicts]
        text = json.dumps(payload, indent=1) + "\n"
    else:
        raise ValueError("format must be csv or json")

    if path is None:
        return text
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return None


# ---------------------------------------------------------------- verify

@dataclass
class VerifyReport:
    """Lyapunov covariance against the stochastic estimate, element by element."""

    v_lyapunov: np.ndarray
    v_hat: np.ndarray
    standard_errors: np.ndarray
    deviations_sigma: np.ndarray
    passed: bool
    samples: int


def _default_sim(a, opts, seed=None):
    eigs = np.linalg.eigvals(a)
    fastest = max(abs(a[0, 1]), abs(a[1, 1]), abs(a[2, 2]), abs(a[2, 3]))
    relax = 1.0 / abs(np.max(eigs.real))
    opts = dict(opts or {})
    # the default step keeps the Euler-Maruyama bias (first order in dt)
    # well below one batch-means standard error at the default horizon
    dt = opts.get("dt_s", 0.0005 / fastest)
    burn = opts.get("burn_in_s", 12.0 * relax)
    total = opts.get("total_time_s", burn + 480.0 * relax)
    return SimulationConfig(dt=dt, total_time=total, burn_in=burn,
                            seed=seed if seed is not None
                            else opts.get("seed", 20260819),
                            batch_count=opts.get("batches", 16))


def verify(cfg, seed=None, _corrupt=None):
    """Cross-check the Lyapunov covariance with the stochastic oracle.

    Solves the scenario's single operating point, integrates the same (A, D)
    stochastically, and compares all covariance elements at 3 standard
    errors.  `_corrupt` (i, j, factor) scales one drift entry after the
    Lyapunov solve -- the negative-control hook used by the tests.
    """
    if cfg.sweep is not None:
        raise ScenarioError(["verify needs a single-point scenario "
                             "(drop the [sweep] section)"])
    if cfg.vib is None:
        raise ScenarioError(["verify needs a [mechanics] section"])
    drive = DriveParams(cfg.power_P, target_detuning=cfg.delta_over_omega
                        * cfg.vib.frequency_Omega)
    sel = select_branch(solve_steady_state(
        drive, cfg.vib, cfg.membrane, cfg.cavity, cfg.mode_indices,
        z0=cfg.membrane.position_z0, temperature_T0=cfg.temperature_T0))
    a = build_drift(sel, cfg.vib).a
    d = build_diffusion(sel, cfg.vib)
    v = solve_lyapunov(a, d).v
    if _corrupt is not None:
        i, j, factor = _corrupt
        a = a.copy()
        a[i, j] *= factor
    emp = simulate(a, d, _default_sim(a, cfg.verify_opts, seed))
    diff = np.abs(emp.v_hat - v)
    with np.errstate(divide="ignore", invalid="ignore"):
        dev = np.where(diff == 0.0, 0.0, diff / emp.standard_errors)
    return VerifyReport(v, emp.v_hat, emp.standard_errors, dev,
                        bool(np.all(dev <= VERIFY_SIGMA)), emp.samples)


def verify_report_text(rep):
    lines = ["covariance verification: Lyapunov vs stochastic estimate",
             "samples: %d" % rep.samples, ""]
    lines.append("%-6s %23s %23s %12s %8s %s"
                 % ("elem", "lyapunov", "empirical", "std.err", "dev/se",
                    "verdict"))
    for i in range(4):
        for j in range(i, 4):
            dev = rep.deviations_sigma[i, j]
            lines.append("V[%d,%d] %23.15e %23.15e %12.3e %8.2f %s"
                         % (i, j, rep.v_lyapunov[i, j], rep.v_hat[i, j],
                            rep.standard_errors[i, j], dev,
                            "ok" if dev <= VERIFY_SIGMA else "FAIL"))
    lines.append("")
    lines.append("overall: %s (threshold %g standard errors)"
                 % ("PASS" if rep.passed else "FAIL", VERIFY_SIGMA))
    return "\n".join(lines) + "\n"


# ------------------------------------------------------- single-point helpers

def solve_single_point(cfg):
    """All steady-state branches of a no-sweep scenario."""
    if cfg.vib is None:
        raise ScenarioError(["this command needs a [mechanics] section"])
    drive = DriveParams(cfg.power_P, target_detuning=cfg.delta_over_omega
                        * cfg.vib.frequency_Omega)
    return solve_steady_state(drive, cfg.vib, cfg.membrane, cfg.cavity,
                              cfg.mode_indices, z0=cfg.membrane.position_z0,
                              temperature_T0=cfg.temperature_T0)


def mode_summary(cfg):
    """Single-row description of the driven mode at the configured z0."""
    cav, mem = cfg.cavity, cfg.membrane
    idx = cfg.mode_indices
    z0 = mem.position_z0
    shift = frequency_shift(z0, cav.laser_k, idx, mem, cav)
    cols = [("longitudinal_p", "1"), ("z0", "m"), ("omega_empty", "rad/s"),
            ("shift_real", "rad/s"), ("shift_imag", "rad/s"),
            ("kappa0", "rad/s"), ("kappa1", "rad/s"), ("kappaT", "rad/s"),
            ("F_T", "1")]
    row = {
        "longitudinal_p": idx.longitudinal_p,
        "z0": z0,
        "omega_empty": empty_mode_frequency(idx, cav),
        "shift_real": shift.real_part,
        "shift_imag": shift.imag_part,
        "kappa0": cav.kappa0,
        "kappa1": shift.kappa1,
        "kappaT": cav.kappa0 + shift.kappa1,
        "F_T": total_finesse(z0, cav.laser_k, idx, mem, cav),
    }
    return cols, [row]
