#!python3
""" Main g2flow
"""

import argparse
import csv
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np
import yaml
from dotmap import DotMap
from pubsub import pub
from tabulate import tabulate

import g2flow.selftest
import g2flow.util
from g2flow import DEFAULT_COEFFS, MAX_NORM, MIN_DET_E, SYMMETRY_TOL, adm, g2, liealg, reduced
from g2flow.flow import FlowError, IntegrationConfig, integrate, make_state, scale_map
from g2flow.globals import Globals
from g2flow.mat3 import is_symmetric
from g2flow.util import G2FlowError, format_number
from g2flow.version import get_active_version

MONITORS = ("state", "hamiltonian", "constraint", "torsion", "adm")
"""Accepted monitor names. Only torsion and adm compute anything extra; without torsion its cells are nan"""

ALWAYS_ON_MONITORS = ("state", "hamiltonian", "constraint")

DEFAULT_MONITORS = ("state", "hamiltonian", "constraint", "torsion")

RUN_COLUMNS = (
    ["t"]
    + [f"E{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    + [f"S{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    + ["detE", "detS", "h", "h1", "h2", "h3"]
    + ["constr1", "constr2", "constr3", "constr_norm", "dphi_norm", "dstarphi_norm", "definiteness"]
)
"""Fixed column order of the run CSV"""

ADM_COLUMNS = ["adm_scalar", "adm_momentum_norm"]

BS_COLUMNS = ["t", "a", "b", "x", "y", "regime"]

COMPARE_COLUMNS = ["dev_a", "dev_b", "offdiag_E", "offdiag_S"]


class ConfigError(G2FlowError):
    """Raised for run or sweep configurations that cannot be used"""


class RunConfig(NamedTuple):
    """A validated run configuration"""
    group: liealg.StructureConstants
    E0: np.ndarray
    S0: np.ndarray
    coeffs: tuple
    dt: float
    tEnd: float
    monitors: tuple
    minDetE: float = MIN_DET_E
    maxNorm: float = MAX_NORM
    seed: int = 0
    sampleEvery: int = 1

    def integration(self):
        """The IntegrationConfig of this run"""
        return IntegrationConfig(self.dt, self.tEnd, self.coeffs, self.minDetE, self.maxNorm, self.sampleEvery)


class SweepConfig(NamedTuple):
    """A grid of reduced trajectories"""
    sigmas: tuple
    a0s: tuple
    b0s: tuple
    dt: float
    tEnd: float
    workers: int = 1


def onStopped(reason, t):
    """Callback invoked when an integration stops before t_end"""
    Globals.getInstance().add_stopEvent((reason, t))
    logging.warning(f"integration stopped early at t={t:.6g}: {reason}")


def stop_warning(what, traj):
    """Exit message for an early stop, from the last stop event seen by onStopped"""
    events = Globals.getInstance().get_stopEvents()
    reason, t = events[-1] if events else (traj.stopReason, math.nan)
    return f"Warning: {what} stopped early ({reason}) at t={t:.6g}, last sample at t={traj.finalState().t:.6g}"


def onDefinitenessChanged(t, previous, current):
    """Callback invoked when the definiteness of S changes along an orbit"""
    logging.warning(f"definiteness of S changed from {previous} to {current} at t={t:.6g}")


def read_config_file(path):
    """Parse a YAML or JSON file into a DotMap with snake_case keys"""
    try:
        with open(path, encoding="utf-8") as f:
            if str(path).lower().endswith(".json"):
                raw = json.load(f)
            else:
                raw = yaml.safe_load(f)
    except OSError as ex:
        raise ConfigError(f"cannot read config file {path}: {ex.strerror}") from ex
    except json.JSONDecodeError as ex:
        raise ConfigError(f"{path}: malformed JSON at line {ex.lineno} column {ex.colno}: {ex.msg}") from ex
    except yaml.YAMLError as ex:
        mark = getattr(ex, "problem_mark", None)
        where = f" at line {mark.line + 1} column {mark.column + 1}" if mark is not None else ""
        raise ConfigError(f"{path}: malformed YAML{where}: {g2flow.util.stripnl(getattr(ex, 'problem', ex))}") from ex
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return DotMap(g2flow.util.normalize_keys(raw))


def _field(cfg, name, default=None):
    if name in cfg:
        value = cfg[name]
        return value.toDict() if isinstance(value, DotMap) else value
    if default is None:
        raise ConfigError(f"missing field '{name}'")
    return default


def _real(cfg, name, default=None, positive=False):
    value = _field(cfg, name, default)
    try:
        value = float(value)
    except (TypeError, ValueError) as ex:
        raise ConfigError(f"field '{name}' must be a real number, got {value!r}") from ex
    if not math.isfinite(value):
        raise ConfigError(f"field '{name}' must be finite, got {value}")
    if positive and not value > 0:
        raise ConfigError(f"field '{name}' must be positive, got {value}")
    return value


def _integer(cfg, name, default, minimum):
    value = _field(cfg, name, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"field '{name}' must be an integer >= {minimum}, got {value!r}")
    return value


def _matrix(cfg, name):
    value = _field(cfg, name)
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as ex:
        raise ConfigError(f"field '{name}' must be a 3x3 array of reals") from ex
    if arr.shape != (3, 3) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"field '{name}' must be a finite 3x3 array, got shape {arr.shape}")
    return arr


def _reals(cfg, name):
    value = _field(cfg, name)
    values = value if isinstance(value, (list, tuple)) else [value]
    try:
        return tuple(float(v) for v in values)
    except (TypeError, ValueError) as ex:
        raise ConfigError(f"field '{name}' must be a real or a list of reals") from ex


def parse_monitors(value):
    """Monitor names from a list or a comma separated string"""
    names = value.split(",") if isinstance(value, str) else list(value)
    names = tuple(str(n).strip() for n in names if str(n).strip())
    unknown = [n for n in names if n not in MONITORS]
    if unknown:
        raise ConfigError(f"field 'monitors' has unknown entries {unknown}; choose from {list(MONITORS)}")
    return names


def run_config_from_map(cfg):
    """Validate a parsed configuration and build a RunConfig"""
    try:
        group = liealg.from_config(_field(cfg, "group"))
    except liealg.StructureConstantsError as ex:
        raise ConfigError(f"field 'group': {ex.message}") from ex
    E0 = _matrix(cfg, "e0")
    if not np.linalg.det(E0) > 0:
        raise ConfigError(f"field 'E0' must have positive determinant, got {np.linalg.det(E0):.6g}")
    S0 = _matrix(cfg, "s0")
    if not is_symmetric(S0, SYMMETRY_TOL):
        raise ConfigError("field 'S0' must be symmetric")
    coeffs = _reals(cfg, "coeffs") if "coeffs" in cfg else tuple(DEFAULT_COEFFS)
    if len(coeffs) != 2:
        raise ConfigError(f"field 'coeffs' must hold two reals (a, b), got {list(coeffs)}")
    stop = cfg.stop if "stop" in cfg else DotMap()
    return RunConfig(
        group=group,
        E0=E0,
        S0=S0,
        coeffs=coeffs,
        dt=_real(cfg, "dt", positive=True),
        tEnd=_real(cfg, "t_end", positive=True),
        monitors=parse_monitors(_field(cfg, "monitors", list(DEFAULT_MONITORS))),
        minDetE=_real(stop, "min_det_e", MIN_DET_E, positive=True),
        maxNorm=_real(stop, "max_norm", MAX_NORM, positive=True),
        seed=_integer(cfg, "seed", 0, 0),
        sampleEvery=_integer(cfg, "sample_every", 1, 1),
    )


def load_run_config(path):
    """Read and validate a run configuration file"""
    return run_config_from_map(read_config_file(path))


def load_sweep_config(path):
    """Read and validate a sweep configuration file"""
    cfg = read_config_file(path)
    sweep = SweepConfig(
        sigmas=_reals(cfg, "sigma"),
        a0s=_reals(cfg, "a0"),
        b0s=_reals(cfg, "b0"),
        dt=_real(cfg, "dt", positive=True),
        tEnd=_real(cfg, "t_end", positive=True),
        workers=_integer(cfg, "workers", 1, 1),
    )
    if not all(a0 > 0 for a0 in sweep.a0s):
        raise ConfigError(f"field 'a0' must be positive, got {list(sweep.a0s)}")
    return sweep


def _cell(value):
    if isinstance(value, str):
        return value
    return format_number(value)


def _writer():
    out = Globals.getInstance().get_outfile() or sys.stdout
    return out, csv.writer(out, lineterminator="\n")


def run_rows(traj, monitors):
    """CSV rows of a full-flow trajectory"""
    rows = []
    for st, m in zip(traj.samples, traj.monitors):
        row = [st.t, *np.ravel(st.E), *np.ravel(st.S), m.detE, m.detS]
        row += [m.densities.h, m.densities.h1, m.densities.h2, m.densities.h3]
        row += [*m.constraint, float(np.linalg.norm(m.constraint))]
        row += [m.extra.get("dphi_norm", math.nan), m.extra.get("dstarphi_norm", math.nan), m.definiteness]
        if "adm" in monitors:
            row += [m.extra["adm_scalar"], m.extra["adm_momentum_norm"]]
        rows.append([_cell(v) for v in row])
    return rows


def hooks_for(monitors):
    """Monitor hooks for the requested extra columns"""
    hooks = []
    if "torsion" in monitors:
        hooks.append(g2.torsion_hook)
    if "adm" in monitors:
        hooks.append(adm.adm_hook)
    return hooks


def _run_config(path, args):
    try:
        cfg = load_run_config(path)
        if args.monitors is not None:
            cfg = cfg._replace(monitors=parse_monitors(args.monitors))
    except ConfigError as ex:
        g2flow.util.our_exit(f"Error: {ex.message}", 1)
    return cfg


def run(path):
    """Integrate a configured orbit and write its monitor table as CSV"""
    args = Globals.getInstance().get_args()
    cfg = _run_config(path, args)
    try:
        initial = make_state(cfg.E0, cfg.S0)
        traj = integrate(initial, cfg.group, cfg.integration(), hooks_for(cfg.monitors))
    except G2FlowError as ex:
        g2flow.util.our_exit(f"Error: {ex.message}", 1)
    header = RUN_COLUMNS + (ADM_COLUMNS if "adm" in cfg.monitors else [])
    out, writer = _writer()
    writer.writerow(header)
    writer.writerows(run_rows(traj, cfg.monitors))
    out.flush()
    if traj.stoppedEarly():
        g2flow.util.our_exit(stop_warning("integration", traj), 2)


def compare_full(samples, sigma, dt):
    """Deviation columns of the embedded full flow from a reduced trajectory"""
    E0, c = reduced.constant_curvature_frame(sigma)
    first = samples[0]
    initial = make_state(first.a * E0, first.b * np.eye(3))
    tEnd = samples[-1].t
    if not tEnd > 0:
        return [[math.nan] * len(COMPARE_COLUMNS) for _ in samples]
    traj = integrate(initial, c, IntegrationConfig(dt, tEnd))
    full = {round(st.t, 12): st for st in traj.samples}
    E0inv = np.linalg.inv(E0)
    columns = []
    for row in samples:
        st = full.get(round(row.t, 12))
        if st is None:
            columns.append([math.nan] * len(COMPARE_COLUMNS))
            continue
        scaled = st.E @ E0inv
        aFull = float(np.trace(scaled)) / 3.0
        bFull = float(np.trace(st.S)) / 3.0
        columns.append([
            abs(aFull - row.a),
            abs(bFull - row.b),
            g2flow.util.max_abs(scaled - aFull * np.eye(3)),
            g2flow.util.max_abs(st.S - bFull * np.eye(3)),
        ])
    return columns


def bs_rows(sigma, a0, b0, tEnd, dt, withComparison=False, prefix=()):
    """CSV rows of one reduced trajectory"""
    samples = reduced.integrate_reduced(reduced.ReducedState(a0, b0, sigma), dt, tEnd)
    extra = compare_full(samples, sigma, dt) if withComparison else [[] for _ in samples]
    rows = []
    for s, more in zip(samples, extra):
        values = [*prefix, s.t, s.a, s.b, s.x, s.y, s.regime, *more]
        rows.append([_cell(v) for v in values])
    return rows


def _required_number(args, name):
    value = getattr(args, name)
    if value is None:
        g2flow.util.our_exit(f"Error: --{name.replace('_', '-')} is required", 1)
    value = g2flow.util.fromStr(value) if isinstance(value, str) else value
    if isinstance(value, (bool, str)) or not math.isfinite(value):
        g2flow.util.our_exit(f"Error: --{name.replace('_', '-')} must be a real number, got {value!r}", 1)
    return float(value)


def bs():
    """Integrate the isotropic reduced system and write it as CSV"""
    args = Globals.getInstance().get_args()
    sigma = _required_number(args, "sigma")
    a0 = _required_number(args, "a0")
    b0 = _required_number(args, "b0")
    tEnd = _required_number(args, "t_end")
    dt = _required_number(args, "dt")
    try:
        rows = bs_rows(sigma, a0, b0, tEnd, dt, args.compare_full)
    except G2FlowError as ex:
        g2flow.util.our_exit(f"Error: {ex.message}", 1)
    header = BS_COLUMNS + (COMPARE_COLUMNS if args.compare_full else [])
    out, writer = _writer()
    writer.writerow(header)
    writer.writerows(rows)
    out.flush()
    last = float(rows[-1][0])
    if last < tEnd - 1e-9 * max(1.0, tEnd):
        g2flow.util.our_exit(f"Warning: reduced integration stopped early at t={last:.6g}", 2)


def sweep(path):
    """Run a grid of reduced trajectories concurrently, writing one block per grid point"""
    args = Globals.getInstance().get_args()
    try:
        cfg = load_sweep_config(path)
    except ConfigError as ex:
        g2flow.util.our_exit(f"Error: {ex.message}", 1)
    grid = list(itertools.product(cfg.sigmas, cfg.a0s, cfg.b0s))
    logging.debug(f"sweeping {len(grid)} trajectories on {cfg.workers} workers")

    def job(point):
        sigma, a0, b0 = point
        return bs_rows(sigma, a0, b0, cfg.tEnd, cfg.dt, args.compare_full, prefix=point)

    try:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            blocks = executor.map(job, grid)
            out, writer = _writer()
            writer.writerow(["sigma", "a0", "b0"] + BS_COLUMNS + (COMPARE_COLUMNS if args.compare_full else []))
            for block in blocks:
                writer.writerows(block)
                out.flush()
    except G2FlowError as ex:
        g2flow.util.our_exit(f"Error: {ex.message}", 1)


def _required_positive(args, name):
    value = _required_number(args, name)
    if not value > 0:
        g2flow.util.our_exit(f"Error: --{name} must be positive, got {value}", 1)
    return value


def scale_check(path):
    """Map a configured H-orbit to an orbit of -a·H1 + b·H2 and report the residual"""
    args = Globals.getInstance().get_args()
    kappa = _required_positive(args, "kappa")
    a = _required_positive(args, "a")
    b = _required_positive(args, "b")
    cfg = _run_config(path, args)
    try:
        initial = make_state(cfg.E0, cfg.S0)
        traj = integrate(initial, cfg.group, cfg.integration()._replace(coeffs=tuple(DEFAULT_COEFFS)))
        scaled = scale_map(traj, kappa, (a, b))
    except FlowError as ex:
        g2flow.util.our_exit(f"Error: {ex.message}", 1)
    info = scaled.scaling
    table = [
        ["kappa", format_number(info.kappa)],
        ["a", format_number(a)],
        ["b", format_number(b)],
        ["alpha", format_number(info.alpha)],
        ["beta", format_number(info.beta)],
        ["kappa*beta^-2 - b", format_number(info.kappa / info.beta ** 2 - b)],
        ["kappa*alpha^2*beta - 2a", format_number(info.kappa * info.alpha ** 2 * info.beta - 2.0 * a)],
        ["samples", str(len(scaled))],
        ["residual", format_number(info.residual)],
    ]
    out, _ = _writer()
    print(tabulate(table, headers=["quantity", "value"], disable_numparse=True), file=out)
    out.flush()
    if traj.stoppedEarly():
        g2flow.util.our_exit(stop_warning("base integration", traj), 2)


def presets():
    """Print the shipped structure constants with their identity residuals"""
    table = []
    for name, entry in liealg.PRESETS.items():
        c = liealg.preset(name)
        table.append([
            name,
            entry.description,
            str(list(entry.n)),
            f"{liealg.jacobi_residual(c):.1e}",
            f"{liealg.unimodularity_residual(c):.1e}",
        ])
    print(tabulate(table, headers=["name", "description", "n", "jacobi", "unimodular"]))


def common():
    """Shared code for all of our command line wrappers"""
    our_globals = Globals.getInstance()
    args = our_globals.get_args()
    parser = our_globals.get_parser()
    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format="%(levelname)s file:%(filename)s %(funcName)s line:%(lineno)s %(message)s",
    )

    if len(sys.argv) == 1:
        parser.print_help(sys.stderr)
        g2flow.util.our_exit("", 1)
    else:
        if args.support:
            g2flow.util.support_info()
            g2flow.util.our_exit("", 0)

        pub.subscribe(onStopped, "g2flow.integration.stopped")
        pub.subscribe(onDefinitenessChanged, "g2flow.definiteness.changed")

        if args.out:
            try:
                our_globals.set_outfile(open(args.out, "w", encoding="utf-8", newline=""))  # pylint: disable=R1732
            except OSError as ex:
                g2flow.util.our_exit(f"Error: cannot open {args.out}: {ex.strerror}", 1)

        if args.selftest:
            if args.corrupt_epsilon:
                logging.warning("running the self-test with a corrupted Levi-Civita symbol")
            result = g2flow.selftest.testAll(seed=args.seed, corruptEpsilon=args.corrupt_epsilon)
            if not result:
                g2flow.util.our_exit("Warning: Self-test was not successful.")
            else:
                g2flow.util.our_exit("Self-test was a success.", 0)
        elif args.presets:
            presets()
        elif args.run:
            run(args.run)
        elif args.scale_check:
            scale_check(args.scale_check)
        elif args.sweep:
            sweep(args.sweep)
        elif args.bs:
            bs()
        else:
            parser.print_help(sys.stderr)
            g2flow.util.our_exit("", 1)


def initParser():
    """Initialize the command line argument parsing."""
    our_globals = Globals.getInstance()
    parser = our_globals.get_parser()

    group = parser.add_argument_group("Actions", "Exactly one action is performed per invocation")

    group.add_argument(
        "--run",
        help="Integrate the flow described by a YAML or JSON config and write the monitor table as CSV",
        metavar="CONFIG",
        default=None,
    )

    group.add_argument(
        "--bs",
        help="Integrate the isotropic reduced system given by --sigma, --a0, --b0, --t-end and --dt",
        action="store_true",
    )

    group.add_argument(
        "--scale-check",
        help="Rescale the H-orbit of CONFIG to an orbit of -a*H1 + b*H2 (needs --kappa, --a, --b)",
        metavar="CONFIG",
        default=None,
    )

    group.add_argument(
        "--sweep",
        help="Run a grid of reduced trajectories described by a config with sigma, a0 and b0 lists",
        metavar="CONFIG",
        default=None,
    )

    group.add_argument(
        "--selftest",
        help="Run the invariant self-test suites and print a summary",
        action="store_true",
    )

    group.add_argument(
        "--presets",
        help="List the shipped structure constants",
        action="store_true",
    )

    group = parser.add_argument_group("Parameters", "Numbers accept fractions such as 1/8")

    group.add_argument("--sigma", help="Curvature parameter of the reduced system", default=None)
    group.add_argument("--a0", help="Initial frame scale (positive)", default=None)
    group.add_argument("--b0", help="Initial momentum scale", default=None)
    group.add_argument("--t-end", help="Final time", default=None)
    group.add_argument("--dt", help="Time step", default=None)
    group.add_argument("--kappa", help="Time rescaling of --scale-check", default=None)
    group.add_argument("--a", help="Coefficient of H1 in the target Hamiltonian", default=None)
    group.add_argument("--b", help="Coefficient of H2 in the target Hamiltonian", default=None)

    parser.add_argument(
        "--out",
        help="Write CSV (or the report) to this file instead of standard output",
        default=None,
    )

    parser.add_argument(
        "--compare-full",
        help="With --bs or --sweep, also integrate the embedded full flow and add deviation columns",
        action="store_true",
    )

    parser.add_argument(
        "--monitors",
        help=f"Comma separated monitors overriding the config, from {','.join(MONITORS)}; "
        f"the {', '.join(ALWAYS_ON_MONITORS)} columns are always written",
        default=None,
    )

    parser.add_argument(
        "--seed",
        help="Seed of the randomized self-test fixtures",
        type=int,
        default=0,
    )

    parser.add_argument(
        "--debug", help="Show debug log messages", action="store_true"
    )

    parser.add_argument(
        "--corrupt-epsilon",
        help="Flip the sign of the Levi-Civita symbol during --selftest (negative control)",
        action="store_true",
    )

    the_version = get_active_version()
    parser.add_argument("--version", action="version", version=f"{the_version}")

    parser.add_argument(
        "--support",
        action="store_true",
        help="Show support info (useful when troubleshooting an issue)",
    )

    args = parser.parse_args()
    our_globals.set_args(args)
    our_globals.set_parser(parser)


def main():
    """Perform command line g2flow operations"""
    our_globals = Globals.getInstance()
    parser = argparse.ArgumentParser(
        epilog="CSV goes to standard output unless --out is given; diagnostics go to standard error.")
    our_globals.set_parser(parser)
    initParser()
    try:
        common()
    finally:
        outfile = our_globals.get_outfile()
        if outfile:
            g2flow.util.catchAndIgnore("closing the output file", outfile.close)
            our_globals.set_outfile(None)


if __name__ == "__main__":
    main()
