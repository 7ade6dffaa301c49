"""Command-line front end: one command per figure family, CSV output.

Frequencies, couplings and damping rates are given in units of omega_0 by
default (fidelity-map and loss-sweep axes in units of |g_np|, as in the
figures); ``--si`` switches every frequency-like quantity to rad/s.

Exit status: 0 on success, 1 for invalid input or configuration (including
unwritable output), 2 when a numerical procedure fails.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings

import numpy as np
import scipy.constants

from . import __version__
from .dispersion import effective_wavenumber, group_velocity, linear_dispersion_bandwidth
from .errors import InvalidInputError, NumericalFailureError
from .fidelity import CLASSICAL_THRESHOLD, fidelity_contours, fidelity_map
from .interference import loss_sweep, minimize_one_plasmon_loss, probabilities_at
from .materials import (OMEGA_0_DEFAULT, Polarization, coupling_strength, frohlich_frequency,
                        interaction_frequency, load_preset)
from .nanowire import WireGeometry, flat_interface_spp, photon_line, wire_dispersion
from .scattering import ChainConfig, transmission_spectrum

PROB_COLUMNS = ["p20", "p02", "p11", "p10", "p01", "p00", "P0", "P1", "P2"]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as invalid input (exit 1)."""

    def error(self, message):
        raise InvalidInputError(f"{self.prog}: {message}")


def write_csv(path, header, rows):
    """Write ``rows`` under ``header`` with 12 significant digits per value.

    ``path`` of ``"-"`` writes to standard output. Returns the row count.
    """
    header = list(header)
    lines = [",".join(header)]
    for row in rows:
        row = list(row)
        if len(row) != len(header):
            raise InvalidInputError(f"row has {len(row)} values, header has {len(header)}")
        lines.append(",".join(format(float(x), "#.12g") for x in row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    return len(lines) - 1


def parse_grid(text, log=False):
    """``"min:max:points"`` to a linear (or log-spaced) array."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise InvalidInputError(f"grid {text!r} must look like min:max:points")
    try:
        lo, hi, pts = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InvalidInputError(f"grid {text!r} is not numeric") from None
    if pts < 2:
        raise InvalidInputError(f"grid {text!r} needs at least 2 points")
    if not hi > lo:
        raise InvalidInputError(f"grid {text!r} must have max > min")
    if log:
        if lo <= 0:
            raise InvalidInputError(f"log grid {text!r} must be positive")
        return np.geomspace(lo, hi, pts)
    return np.linspace(lo, hi, pts)


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment. Keys use flag spelling."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


# commands ----------------------------------------------------------------------

def _chain(args, g_in=None):
    """Chain template; frequencies are in omega_0 units or rad/s (``--si``)."""
    w0 = args.omega0 if args.si else 1.0
    g_in = args.gin if g_in is None else g_in
    g_out = g_in if args.gout is None else args.gout
    return ChainConfig.uniform(args.n, w0, args.gnp, g_in, g_out, gamma=args.gamma,
                               spacing=args.spacing), w0


def cmd_materials(args):
    preset = load_preset(args.preset)
    d = args.spacing
    ratios = parse_grid(args.ratio)
    w0 = args.omega0
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for r in ratios:
            geom = preset.geometry(r * d, d, eps_d=args.eps_d)
            wI = interaction_frequency(geom, preset.constants)
            rows.append((r, coupling_strength(wI, w0, Polarization.TRANSVERSE) / w0,
                         coupling_strength(wI, w0, Polarization.LONGITUDINAL) / w0))
    n = write_csv(args.out, ["R_over_d", "gT_over_omega0", "gL_over_omega0"], rows)
    wf = frohlich_frequency(preset.permittivity, args.eps_d)
    _info(args, f"preset {preset.name}: Froehlich root {wf:.6g} rad/s, omega_0 {w0:.6g} rad/s")
    return n


def cmd_spectrum(args):
    cfg, w0 = _chain(args)
    grid = parse_grid(args.omega)
    spec = transmission_spectrum(cfg, grid)
    first = "omega" if args.si else "omega_over_omega0"
    return write_csv(args.out, [first, "T2", "argT", "R2", "loss_total"], spec.rows())


def cmd_dispersion(args):
    cfg, w0 = _chain(args)
    grid = parse_grid(args.omega)
    spec = transmission_spectrum(cfg, grid)
    curve = group_velocity(effective_wavenumber(grid, spec.argT, cfg.n, cfg.spacing, w0))
    ratio = curve.scaled_group_velocity
    bw = linear_dispersion_bandwidth(curve, args.tolerance)
    first = "omega" if args.si else "omega_over_omega0"
    kd = curve.k_real * cfg.spacing
    n = write_csv(args.out, [first, "k_times_d", "vg_over_vg0"], zip(grid, kd, ratio))
    scale = 1.0 if args.si else abs(args.gnp)
    unit = "rad/s" if args.si else "|g_np|"
    _info(args, f"branch m = {curve.branch_index}; linear-dispersion half-width "
                f"{bw / scale:.6g} {unit}")
    return n


def cmd_fidelity_map(args):
    unit = 1.0 if args.si else abs(args.gnp)
    sig = parse_grid(args.sigma) * unit
    gins = parse_grid(args.gin_grid, log=True) * unit
    cfg, w0 = _chain(args, g_in=gins[0])
    fmap = fidelity_map(cfg, w0, sig, gins, points=args.points, with_linear_bound=True)
    rows = [(s / unit, g / unit, f, fmap.linear_bound[j] / unit)
            for (s, g, f), j in zip(fmap.rows(), np.tile(np.arange(gins.size), sig.size))]
    n = write_csv(args.out, ["sigma", "g_in", "F_avg", "sigma_linear_bound"], rows)
    lines = fidelity_contours(fmap, CLASSICAL_THRESHOLD)
    _info(args, f"max F_avg {fmap.values.max():.6f}; {len(lines)} contour segment(s) at 2/3")
    return n


def cmd_interference(args):
    gscale = abs(args.gnp)
    unit = 1.0 if args.si else gscale
    cfg, w0 = _chain(args, g_in=(args.gin if args.gin is not None else gscale))
    omega = w0 + args.delta
    if args.minimize:
        bounds = None
        if args.bounds:
            try:
                lo, hi = (float(x) * unit for x in args.bounds.split(":"))
            except ValueError:
                raise InvalidInputError("--bounds must look like lo:hi") from None
            bounds = (lo, hi)
        g, p = minimize_one_plasmon_loss(cfg, omega, bounds, args.overlap)
        rows = [(g,) + tuple(p) + p.p_survive]
        _info(args, f"g_opt/g_np = {g / gscale:.4f}, P1 = {p.P1:.4f}, "
                    f"P0 = {p.P0:.4f}, P2 = {p.P2:.4f}")
    else:
        if args.gin_grid:
            gins = parse_grid(args.gin_grid, log=args.log) * unit
        else:
            gins = [cfg.g_in]
        rows = []
        for g in gins:
            p = probabilities_at(cfg, g, omega, args.overlap)
            rows.append((g,) + tuple(p) + p.p_survive)
    rows = [(r[0] / unit,) + r[1:] for r in rows]
    return write_csv(args.out, ["g_in"] + PROB_COLUMNS, rows)


def cmd_loss_sweep(args):
    gscale = abs(args.gnp)
    cfg, w0 = _chain(args, g_in=gscale)
    gammas = parse_grid(args.gamma_grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows = loss_sweep(cfg, gammas, w0 + args.delta, None, args.overlap)
    unit = 1.0 if args.si else gscale
    out = [(r.gamma, r.g_opt / unit, r.P0, r.P1, r.P2, r.R2, r.T2) for r in rows]
    return write_csv(args.out, ["gamma", "g_opt", "P0", "P1min", "P2", "R2", "T2"], out)


def cmd_wire(args):
    preset = load_preset(args.preset)
    w0 = args.omega0
    grid = parse_grid(args.omega)
    omegas = grid if args.si else grid * w0
    geom = WireGeometry(args.radius, args.eps_d)
    n_eff = wire_dispersion(geom, preset.permittivity, omegas)
    c = scipy.constants.c
    k_wire = n_eff * omegas / c
    k_flat = flat_interface_spp(preset.permittivity, args.eps_d, omegas)
    k_ph = photon_line(omegas, args.eps_d)
    scale = 1.0 if args.si else args.spacing
    rows = zip(grid, k_ph * scale, k_flat.real * scale, k_flat.imag * scale,
               k_wire.real * scale, k_wire.imag * scale, n_eff.real, n_eff.imag)
    first = "omega" if args.si else "omega_over_omega0"
    header = [first, "k_photon", "k_flat_re", "k_flat_im", "k_wire_re", "k_wire_im",
              "n_eff_re", "n_eff_im"]
    return write_csv(args.out, header, rows)


COMMANDS = {
    "materials": cmd_materials,
    "spectrum": cmd_spectrum,
    "dispersion": cmd_dispersion,
    "fidelity-map": cmd_fidelity_map,
    "interference": cmd_interference,
    "loss-sweep": cmd_loss_sweep,
    "wire": cmd_wire,
}


def _info(args, text):
    stream = sys.stderr if args.out == "-" else sys.stdout
    print(text, file=stream)


# parser ------------------------------------------------------------------------

def _common(p, command):
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--out", default=f"{command}.csv",
                   help="CSV output path, '-' for standard output (default: %(default)s)")
    p.add_argument("--si", action="store_true",
                   help="frequencies and couplings in rad/s instead of omega_0 / |g_np| units")
    p.add_argument("--preset", default="silver-palik-fit", help="material preset")
    p.add_argument("--omega0", type=float, default=OMEGA_0_DEFAULT,
                   help="particle resonance in rad/s (default: %(default)g)")
    p.add_argument("--spacing", type=float, default=75e-9, help="particle spacing d in m")


def _chain_args(p, gin_default=0.01):
    p.add_argument("--n", type=int, default=3, help="number of particles")
    p.add_argument("--gnp", type=float, default=-0.1, help="nearest-neighbour coupling")
    p.add_argument("--gin", type=float, default=gin_default, help="source coupling")
    p.add_argument("--gout", type=float, default=None, help="drain coupling (default: gin)")
    p.add_argument("--gamma", type=float, default=0.0, help="damping rate per particle")


def _two_plasmon_args(p):
    p.add_argument("--overlap", type=float, default=1.0, help="overlap integral I")
    p.add_argument("--delta", type=float, default=0.0, help="detuning omega - omega_0")


def build_parser():
    parser = _Parser(prog="plasmon-chain",
                     description="Quantum plasmonic nanoparticle-chain simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("materials", help="coupling strength versus R/d (T and L)")
    _common(p, "materials")
    p.add_argument("--ratio", default="0.15:0.33:37", help="R/d grid min:max:points")
    p.add_argument("--eps-d", type=float, default=1.0)

    p = sub.add_parser("spectrum", help="transmission spectrum of a chain")
    _common(p, "spectrum")
    _chain_args(p)
    p.add_argument("--omega", default="0.7:1.3:2001", help="frequency grid min:max:points")

    p = sub.add_parser("dispersion", help="effective wavenumber and scaled group velocity")
    _common(p, "dispersion")
    _chain_args(p)
    p.add_argument("--omega", default="0.7:1.3:2001", help="frequency grid min:max:points")
    p.add_argument("--tolerance", type=float, default=0.05,
                   help="allowed |v_G/v_G(omega_0) - 1| for the linear band")

    p = sub.add_parser("fidelity-map", help="average fidelity over (sigma, g_in = g_out)")
    _common(p, "fidelity-map")
    _chain_args(p)
    p.set_defaults(gamma=0.0158)
    p.add_argument("--sigma", default="0.05:1:40", help="sigma grid in |g_np| units")
    p.add_argument("--gin-grid", default="0.01:10:61",
                   help="log-spaced g_in grid in |g_np| units")
    p.add_argument("--points", type=int, default=2001, help="quadrature points per packet")

    p = sub.add_parser("interference", help="two-plasmon detection probabilities")
    _common(p, "interference")
    _chain_args(p, gin_default=None)
    p.set_defaults(gamma=0.0158)
    _two_plasmon_args(p)
    p.add_argument("--minimize", action="store_true", help="minimise P1 over g_in = g_out")
    p.add_argument("--bounds", default=None, help="g_in bracket lo:hi in |g_np| units")
    p.add_argument("--gin-grid", default=None, help="sweep g_in over min:max:points")
    p.add_argument("--log", action="store_true", help="log-space the g_in sweep")

    p = sub.add_parser("loss-sweep", help="minimal P1 versus damping rate")
    _common(p, "loss-sweep")
    _chain_args(p)
    _two_plasmon_args(p)
    p.add_argument("--gamma-grid", default="0:0.05:26", help="damping grid min:max:points")

    p = sub.add_parser("wire", help="photon, flat-interface and nanowire SPP dispersion")
    _common(p, "wire")
    p.add_argument("--radius", type=float, default=25e-9, help="tip-region radius in m")
    p.add_argument("--eps-d", type=float, default=1.0)
    p.add_argument("--omega", default="0.3:0.95:66", help="frequency grid min:max:points")
    return parser


# boolean flags; every other config key takes a value
SWITCHES = {"si", "minimize", "log"}


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise InvalidInputError(f"not a boolean: {text!r}")


def _config_tokens(values):
    tokens = []
    for key, value in values.items():
        if key == "config":
            continue
        flag = "--" + key.replace("_", "-")
        if key in SWITCHES:
            if _bool(value):
                tokens.append(flag)
        else:
            tokens.append(f"{flag}={value}")
    return tokens


def _parse(argv):
    """Parse ``argv``; config-file entries go in front of the explicit flags.

    argparse keeps the last occurrence of an option, so flags given on the
    command line override the file.
    """
    argv = list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        at = argv.index(args.command) + 1
        argv = argv[:at] + _config_tokens(read_config(args.config)) + argv[at:]
        args = parser.parse_args(argv)
    return args


def run(argv=None) -> int:
    start = time.perf_counter()
    try:
        args = _parse(sys.argv[1:] if argv is None else argv)
        rows = COMMANDS[args.command](args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start
    _info(args, f"{args.command}: wrote {rows} rows to {args.out} in {elapsed:.3f} s")
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
