"""Command-line front end: ``tomokit <subcommand> ...``.

Units: hbar = 1, q = (a + a^dag)/sqrt 2, p = (a - a^dag)/(i sqrt 2); time in
inverse oscillator frequencies. Every subcommand ends by printing one line
of ``key=value`` pairs on stdout; progress goes to stderr.

Exit codes: 0 success, 1 usage or invalid parameter, 2 numerical failure,
3 file or format problem.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import forward, inverse, tomio
from ._parallel import resolve_threads
from .dynamics import evolve
from .errors import FormatError, NumericError
from .fock import DEFAULT_DIM, RECONSTRUCTED, fidelity
from .forward import PolarGrid, QuadratureSpec, uniform_grid
from .states import parse_state, realize

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

UNITS = "Units: hbar = 1, q = (a + a^dag)/sqrt 2, p = (a - a^dag)/(i sqrt 2); times in inverse oscillator frequencies."


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text, kind=float, sep="x"):
    parts = text.lower().split(sep)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two values separated by {sep!r}, got {text!r}")
    try:
        return tuple(kind(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad numbers in {text!r}") from None


def _grid_pair(text):
    return _pair(text, int, "x")


def _range(text):
    return _pair(text, float, ",")


def _complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad complex number {text!r}") from None


def _state_arg(text):
    try:
        return parse_state(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _say(**pairs):
    print(" ".join(f"{k}={_fmtv(v)}" for k, v in pairs.items()))


def _fmtv(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


def _common(p, dim=True):
    if dim:
        p.add_argument("--dim", type=int, default=DEFAULT_DIM, help="Fock cutoff (number of levels)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $TOMOKIT_THREADS or 1)")
    p.add_argument("--seed", type=int, default=0, help="seed for every random draw")


def _check_positive(name, value):
    if value is not None and not value > 0:
        raise UsageError(f"--{name} must be positive, got {value}")


# --------------------------------------------------------------- commands


def cmd_synth(args):
    _check_positive("dim", args.dim)
    rho = realize(args.state, args.dim)
    out = Path(args.out)
    label = str(args.state)
    if args.scheme == "symplectic":
        n_r, n_t = args.grid
        polar = PolarGrid(args.radius, n_r, n_t)
        xb = uniform_grid(args.x_range[0], args.x_range[1], args.x_points)
        tomo = forward.synthesize_symplectic(rho, polar, xb, label, args.threads)
        grid = tomo.grid
        records = sum(s.x.size for s in tomo.slices)
    elif args.scheme == "homodyne":
        x = uniform_grid(args.x_range[0], args.x_range[1], args.x_points)
        tomo = forward.synthesize_homodyne(rho, args.phi_count, x, label, args.threads)
        grid = tomo.grid
        records = sum(s.x.size for s in tomo.slices)
    else:
        n_r, n_t = args.alpha_grid
        polar = PolarGrid(args.alpha_r, n_r, n_t, args.radial_rule)
        tomo = forward.synthesize_photon(rho, polar, label, threads=args.threads)
        grid = tomo.grid | {"n_counts": tomo.n_cutoff}
        records = sum(e.probs.size for e in tomo.entries)
    name = f"{args.scheme}.csv"
    tomio.write_tomogram(out / name, tomo)
    manifest = tomio.DatasetManifest(args.scheme, label, grid, [name], [args.seed], args.dim)
    tomio.write_manifest(out, manifest)  # last: marks the dataset complete
    _say(scheme=args.scheme, state=label, records=records, out=out / tomio.MANIFEST_NAME)


def cmd_sample(args):
    _check_positive("shots", args.shots)
    rho = realize(args.state, args.dim)
    if args.alpha is not None:
        dist = forward.photon_marginal(rho, args.alpha)
    else:
        x = uniform_grid(args.x_range[0], args.x_range[1], args.x_points)
        if args.phi is not None:
            quad = QuadratureSpec(math.cos(args.phi), math.sin(args.phi))
        else:
            quad = QuadratureSpec(args.mu, args.nu)
        dist = forward.symplectic_marginal(rho, quad, x)
    hist = forward.sample_counts(dist, args.shots, args.seed)
    tomio.write_histogram(args.out, hist)
    _say(kind=hist.kind, shots=hist.shots, seed=hist.seed, mean=hist.mean(), out=args.out)


def cmd_reconstruct(args):
    if args.s is not None:
        try:
            inverse.check_ordering(args.s)
        except NumericError as exc:
            raise UsageError(str(exc)) from None
    _check_positive("epsilon", args.epsilon)
    threads = resolve_threads(args.threads)
    manifest, tomo = tomio.load_dataset(args.data)
    if args.scheme and args.scheme != manifest.scheme:
        raise UsageError(f"--scheme {args.scheme} does not match the dataset scheme {manifest.scheme}")
    if args.s is not None and manifest.scheme != "photon":
        raise UsageError("--s applies to photon-counting data only")
    dim = args.dim or manifest.dim or DEFAULT_DIM
    reference = None
    ref_spec = args.reference or manifest.state
    try:
        reference = realize(parse_state(ref_spec), dim)
    except ValueError:
        if args.reference:
            raise UsageError(f"cannot build reference state {ref_spec!r}") from None
    _log(f"reconstructing {manifest.scheme} data ({len(tomo)} records) at dim={dim}")
    if manifest.scheme == "symplectic":
        rho, report = inverse.reconstruct_symplectic(tomo, dim, reference=reference, threads=threads)
    elif manifest.scheme == "homodyne":
        rho, report = inverse.reconstruct_homodyne(
            tomo, dim, args.epsilon, reference=reference, r_max=args.r_max, extrapolate=args.extrapolate, threads=threads
        )
    else:
        s = 0.0 if args.s is None else args.s
        rho, report = inverse.reconstruct_photon(tomo, s, dim, reference=reference, threads=threads)
    tomio.write_density(args.out, rho)
    report_path = args.report or str(Path(args.out).with_suffix("")) + ".report.json"
    tomio.write_report(report_path, report)
    pairs = {}
    if report.fidelity is not None:
        pairs["fidelity"] = report.fidelity
    pairs |= {"trace_err": report.trace_err, "herm_resid": report.herm_resid, "min_eig": report.min_eig}
    _say(**pairs, out=args.out)


def cmd_fidelity(args):
    rhos = []
    for path in (args.first, args.second):
        rho, rep = tomio.load_density(path)
        for msg in rep.warnings:
            _log(f"warning: {path}: {msg}")
        rhos.append(rho)
    value = fidelity(rhos[0], rhos[1], tol=RECONSTRUCTED, check_psd=False)
    print(f"fidelity={value:.12f}")


def _input_state(args):
    if (args.state is None) == (args.density is None):
        raise UsageError("give exactly one of --state or --density")
    if args.state is not None:
        return realize(args.state, args.dim)
    return tomio.read_density(args.density)


def cmd_wigner(args):
    rho = _input_state(args)
    q = uniform_grid(args.q_range[0], args.q_range[1], args.points)
    w = forward.wigner(rho, q, q.copy())
    tomio.write_wigner(args.out, w)
    _say(origin=w.at(0.0, 0.0), total=w.total(), points=q.size, out=args.out)


def cmd_evolve(args):
    rho = _input_state(args)
    out = evolve(rho, args.t)
    tomio.write_density(args.out, out)
    _say(t=float(args.t), purity=float(np.real(np.trace(out @ out))), out=args.out)


# ----------------------------------------------------------------- parser


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="tomokit", description=__doc__.split("\n\n")[0] + " " + UNITS, formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser(
        "synth",
        help="synthesize a tomogram dataset",
        description="Write a tomogram CSV and manifest.json for a state. " + UNITS,
        formatter_class=fmt,
    )
    p.add_argument("--state", type=_state_arg, required=True, help="e.g. cat:a=1,b=1, fock:n=2, coherent:re=1,im=0")
    p.add_argument("--scheme", choices=tomio.SCHEMES, default="symplectic")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--radius", "--R", dest="radius", type=float, default=6.0, help="(mu, nu) disk radius (dimensionless)")
    p.add_argument("--grid", type=_grid_pair, default=(48, 48), help="symplectic polar grid N_r x N_theta")
    p.add_argument("--x-range", type=_range, default=forward.SYMPLECTIC_X_BASE[:2],
                   help="x window lo,hi in units of q; for symplectic data it is scaled by each radius")
    p.add_argument("--x-points", type=int, default=forward.SYMPLECTIC_X_BASE[2], help="points per slice")
    p.add_argument("--phi-count", type=int, default=64, help="homodyne angles on [0, 2 pi)")
    p.add_argument("--alpha-r", type=float, default=5.0, help="photon scheme: displacement disk radius |alpha|")
    p.add_argument("--alpha-grid", type=_grid_pair, default=(40, 40), help="photon scheme: polar grid N_r x N_theta")
    p.add_argument("--radial-rule", choices=("laguerre", "legendre"), default="laguerre",
                   help="photon scheme: radial quadrature")
    _common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser(
        "sample",
        help="draw finite-shot counts from one slice",
        description="Sample a quadrature marginal (--phi or --mu/--nu) or a displaced photon distribution (--alpha). " + UNITS,
        formatter_class=fmt,
    )
    p.add_argument("--state", type=_state_arg, required=True)
    which = p.add_mutually_exclusive_group()
    which.add_argument("--phi", type=float, default=None, help="homodyne angle in radians")
    which.add_argument("--alpha", type=_complex, default=None, help="photon scheme displacement, e.g. 0.5+0.5j")
    p.add_argument("--mu", type=float, default=1.0, help="quadrature coefficient of q (used without --phi)")
    p.add_argument("--nu", type=float, default=0.0, help="quadrature coefficient of p (used without --phi)")
    p.add_argument("--x-range", type=_range, default=forward.DEFAULT_X[:2], help="x window lo,hi")
    p.add_argument("--x-points", type=int, default=forward.DEFAULT_X[2], help="bins in the x window")
    p.add_argument("--shots", type=int, default=100000, help="number of draws")
    p.add_argument("--out", required=True, help="histogram CSV path")
    _common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser(
        "reconstruct",
        help="reconstruct a density matrix from a dataset",
        description="Linear kernel reconstruction; writes density JSON and a report JSON. " + UNITS,
        formatter_class=fmt,
    )
    p.add_argument("--data", required=True, help="dataset directory or manifest.json")
    p.add_argument("--scheme", choices=tomio.SCHEMES, default=None, help="must match the manifest when given")
    p.add_argument("--out", required=True, help="density JSON path")
    p.add_argument("--report", default=None, help="report JSON path (default: <out>.report.json)")
    p.add_argument("--dim", type=int, default=None, help="Fock cutoff (default: from the manifest)")
    p.add_argument("--s", type=float, default=None, help="photon scheme ordering parameter in (-1, 0]; default 0")
    p.add_argument("--epsilon", type=float, default=inverse.DEFAULT_EPSILON, help="homodyne radial regularizer")
    p.add_argument("--r-max", type=float, default=None, help="homodyne frequency cutoff (default: data bandwidth)")
    p.add_argument("--extrapolate", action="store_true", help="homodyne: cancel the O(epsilon) bias")
    p.add_argument("--reference", default=None, help="state spec to compare against (default: manifest state)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $TOMOKIT_THREADS or 1)")
    p.add_argument("--seed", type=int, default=0, help="unused; accepted for uniform invocations")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser(
        "fidelity",
        help="fidelity between two density JSON files",
        description="Uhlmann fidelity; non-positive inputs are replaced by their positive part. " + UNITS,
        formatter_class=fmt,
    )
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_fidelity)

    for name, func, text in (
        ("wigner", cmd_wigner, "Wigner function on a square q-p grid, written as CSV"),
        ("evolve", cmd_evolve, "free oscillator evolution rho(t) = exp(-i n t) rho exp(i n t)"),
    ):
        p = sub.add_parser(name, help=text, description=text + ". " + UNITS, formatter_class=fmt)
        p.add_argument("--state", type=_state_arg, default=None, help="state spec")
        p.add_argument("--density", default=None, help="density JSON instead of --state")
        p.add_argument("--out", required=True)
        if name == "wigner":
            p.add_argument("--q-range", type=_range, default=forward.DEFAULT_WIGNER[:2], help="lo,hi for q and p")
            p.add_argument("--points", type=int, default=forward.DEFAULT_WIGNER[2], help="points per axis")
        else:
            p.add_argument("--t", type=float, required=True, help="time in units of 1/omega")
        _common(p)
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "threads"):
            resolve_threads(args.threads)
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _log(f"tomokit: error: {exc}")
        return EXIT_USAGE
    except NumericError as exc:
        _log(f"tomokit: numerical error: {exc}")
        return EXIT_NUMERIC
    except (FormatError, OSError) as exc:
        _log(f"tomokit: file error: {exc}")
        return EXIT_IO
    except ValueError as exc:
        _log(f"tomokit: error: {exc}")
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
