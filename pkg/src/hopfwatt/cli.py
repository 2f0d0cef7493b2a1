"""Command-line front end: ``hopfwatt {coeffs, locus, orbits, stability}``.

Exit status is 0 on success, 1 for usage errors and 2 when the mathematics
fails (parameters off the Hopf hypersurface, Newton divergence, ...).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import locus, orbits
from .hopf import HopfError, make_frame, run_ladder
from .jet import VectorFieldJet
from .wgss import (
    WgssParams,
    analytic_jet,
    characteristic_coefficients,
    g1_polynomial,
    jacobian,
    load_params,
    params_from_mapping,
    routh_hurwitz_stable,
)

EXIT_OK, EXIT_USAGE, EXIT_MATH = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def g6(x) -> str:
    return f"{x:.6g}"


def _cfmt(z) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 else "+"
    return f"{g6(z.real)} {sign} {g6(abs(z.imag))}i"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(args, name, text):
    if args.out_dir is None:
        return None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _params_from_args(args) -> WgssParams:
    sources = [args.params is not None, args.beta is not None]
    if all(sources):
        raise UsageError("give either a parameter file or --beta/--alpha flags, not both")
    if args.params is not None:
        try:
            return load_params(args.params, args.eps_critical)[0]
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {args.params}: {exc}") from exc
    if args.beta is None or args.alpha is None:
        raise UsageError("parameters required: --beta and --alpha (or a parameter file)")
    data = {"beta": args.beta, "alpha": args.alpha, "kappa": args.kappa}
    if args.epsilon is not None:
        data["epsilon"] = args.epsilon
    return params_from_mapping(data, args.eps_critical)[0]


def _jet_from_file(path) -> VectorFieldJet:
    """``{"jacobian": [[...]], "entries": {"i,j,k": [...]}}``; entries optional."""
    data = json.loads(Path(path).read_text())
    A = np.asarray(data["jacobian"], dtype=float)
    n = A.shape[0]
    entries = {}
    for i in range(n):
        alpha = tuple(int(i == j) for j in range(n))
        entries[alpha] = A[:, i]
    for key, value in data.get("entries", {}).items():
        entries[tuple(int(c) for c in key.split(","))] = value
    return VectorFieldJet(n, entries, max_order=int(data.get("max_order", 9)))


# coeffs -----------------------------------------------------------------------------


def cmd_coeffs(args) -> int:
    order = args.order
    if args.jet is not None:
        jet = _jet_from_file(args.jet)
        g1 = None
    else:
        params = _params_from_args(args)
        jet = analytic_jet(params, order=2 * order + 1)
        g1 = g1_polynomial(params.beta, params.alpha, params.kappa)
    ladder = run_ladder(make_frame(jet, tol=args.tol), up_to=order)
    payload = ladder.to_json(include_h=args.with_h)
    if g1 is not None:
        payload["G1"] = g1
    lines = [f"omega0 = {g6(ladder.frame.omega0)}"]
    if g1 is not None:
        lines.append(f"G1 = {g6(g1)}")
    for m in range(1, order + 1):
        lines.append(f"G{m + 1}{m} = {_cfmt(ladder.G[(m + 1, m)])}")
    if args.with_h:
        for (j, k), v in sorted(ladder.h.items()):
            lines.append(f"h{j}{k} = [" + ", ".join(_cfmt(c) for c in v) + "]")
    for m in range(1, order + 1):
        lines.append(f"l{m} = {g6(ladder.lyapunov(m))}")
    table = "\n".join(lines) + "\n"
    csv_text = "name,real,imag\n" + "".join(
        f"G{m + 1}{m},{ladder.G[(m + 1, m)].real!r},{ladder.G[(m + 1, m)].imag!r}\n" for m in range(1, order + 1)
    ) + "".join(f"l{m},{ladder.lyapunov(m)!r},0.0\n" for m in range(1, order + 1))
    _write(args, "coeffs.json", _dump(payload))
    _write(args, "coeffs.csv", csv_text)
    if args.format == "json":
        sys.stdout.write(_dump(payload))
    elif args.format == "csv":
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(table)
    return EXIT_OK


# locus ------------------------------------------------------------------------------


def cmd_locus_scan(args) -> int:
    scan = locus.scan_l1_surface(
        args.beta_range, args.alpha_range, args.kappa_range, args.shape, order=args.order, workers=args.workers
    )
    text = scan.to_csv()
    _write(args, "l1_scan.csv", text)
    _write(args, "l1_mesh.json", _dump(scan.mesh_json()))
    sys.stdout.write(text)
    return EXIT_OK


def cmd_locus_curves(args) -> int:
    lo, hi = args.kappa_range
    if lo > hi:
        raise UsageError("--kappa-range must be increasing")
    curves = {}
    for name, seed in locus.SEEDS.items():
        kappas = args.kappas if args.kappas else locus.TABLE_KAPPAS[name]
        kappas = [k for k in kappas if lo - 1e-12 <= k <= hi + 1e-12]
        if kappas:
            curves[name] = locus.trace_l2_zero_curve(seed, kappas, tol=args.tol)
    _write(args, "curves.json", locus.curves_json(curves) + "\n")
    rows = [[name, *p.row()] for name, pts in curves.items() for p in pts]
    _write(args, "curves.csv", locus.rows_to_csv(rows, ("curve",) + locus.CSV_COLUMNS))
    out = ["curve  kappa     alpha     beta      l3"]
    for name, pts in curves.items():
        for p in pts:
            out.append(f"{name:<6} {g6(p.kappa):<9} {g6(p.alpha):<9} {g6(p.beta):<9} {g6(p.l[2])}")
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_locus_find_q(args) -> int:
    seed = dict(locus.Q_SEED)
    for key in ("beta", "alpha", "kappa"):
        if getattr(args, f"seed_{key}") is not None:
            seed[key] = getattr(args, f"seed_{key}")
    point, report = locus.find_codim4_point(seed, tol=args.tol)
    payload = {"schema": "hopfwatt.codim4/1", "point": point.as_dict(), "transversality": report.as_dict()}
    _write(args, "q.json", _dump(payload))
    lines = [
        f"beta = {g6(point.beta)}",
        f"alpha = {g6(point.alpha)}",
        f"kappa = {g6(point.kappa)}",
        f"epsilon_c = {g6(point.epsilon_c)}",
    ]
    lines += [f"l{i} = {g6(v)}" for i, v in enumerate(point.l, start=1)]
    for i, row in enumerate(report.gradients, start=1):
        lines.append(f"grad l{i} ({', '.join(report.variables)}) = " + ", ".join(g6(c) for c in row))
    lines.append(f"det = {g6(report.determinant)}")
    lines.append(f"crossing speed = {g6(report.crossing_speed)}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# orbits -----------------------------------------------------------------------------


def cmd_orbits(args) -> int:
    if args.representative is not None:
        if args.params is not None or args.beta is not None:
            raise UsageError("--representative excludes other parameter sources")
        try:
            params = orbits.representative_params(args.representative)
        except KeyError as exc:
            raise UsageError(f"unknown representative {args.representative!r}") from exc
    else:
        params = _params_from_args(args)
    if args.amplitudes:
        amps = np.asarray(args.amplitudes, dtype=float)
    else:
        amps = np.geomspace(args.amp_range[0], args.amp_range[1], args.seeds)
    census = orbits.poincare_census(params, amplitudes=amps, rtol=args.rtol)
    text = census.to_json() + "\n"
    _write(args, "census.json", text)
    if args.out_dir is not None:
        for i, c in enumerate(census.cycles):
            eq = orbits.equilibrium(params)
            tr = orbits.integrate(params, [eq.x0, *c.section_point], c.period, rtol=min(args.rtol, orbits.MAX_RTOL), n_out=args.samples)
            _write(args, f"cycle_{i}.csv", tr.to_csv())
        if args.t_end > 0:
            start = args.start
            if start is None:
                eq = orbits.equilibrium(params)
                start = [eq.x0, eq.y0 + float(amps[0]), eq.z0]
            tr = orbits.integrate(params, start, args.t_end, rtol=min(args.rtol, orbits.MAX_RTOL), n_out=args.samples)
            _write(args, "trajectory.csv", tr.to_csv())
    sys.stdout.write(text)
    return EXIT_OK


# stability --------------------------------------------------------------------------


def cmd_stability(args) -> int:
    params = _params_from_args(args)
    p1, p2, p3 = characteristic_coefficients(params)
    rh = routh_hurwitz_stable(p1, p2, p3)
    ev = np.linalg.eigvals(jacobian(params))
    payload = {
        "schema": "hopfwatt.stability/1",
        "params": {k: float(v) for k, v in params.as_dict().items()},
        "epsilon_c": params.epsilon_c,
        "characteristic": [p1, p2, p3],
        "routh_hurwitz_stable": rh,
        "eigenvalues": [[float(z.real), float(z.imag)] for z in sorted(ev, key=lambda z: (z.real, z.imag))],
    }
    _write(args, "stability.json", _dump(payload))
    if args.format == "json":
        sys.stdout.write(_dump(payload))
    else:
        sys.stdout.write(
            f"epsilon = {g6(params.epsilon)}\nepsilon_c = {g6(params.epsilon_c)}\n"
            f"p1, p2, p3 = {g6(p1)}, {g6(p2)}, {g6(p3)}\n"
            f"equilibrium {'stable' if rh else 'unstable'}\n"
        )
    return EXIT_OK


# parser -----------------------------------------------------------------------------


def _param_flags(p, file_arg=True):
    if file_arg:
        p.add_argument("params", nargs="?", help="JSON parameter file (nondimensional or physical)")
    else:
        p.set_defaults(params=None)
    p.add_argument("--beta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--eps-critical", action="store_true", help="use epsilon = epsilon_c(beta, alpha, kappa)")


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand; SUPPRESS keeps
    # a subparser from clobbering a value given at the top level
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file of flag defaults")
    common.add_argument("--out-dir", help="directory for machine-readable outputs")
    common.add_argument("--workers", type=int, help="worker processes (default: HOPFWATT_WORKERS or all cores)")
    common.add_argument("--tol", type=_positive, help="Newton / eigenvalue tolerance")

    parser = _Parser(prog="hopfwatt", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("coeffs", parents=[common], help="Lyapunov coefficient ladder")
    _param_flags(c, file_arg=False)
    c.add_argument("--order", type=int, choices=range(1, 5), default=4)
    c.add_argument("--jet", help="JSON jet file (jacobian plus optional higher entries) instead of governor parameters")
    c.add_argument("--with-h", action="store_true", help="include manifold coefficients h_jk")
    c.add_argument("--format", choices=("table", "json", "csv"), default="table")
    c.set_defaults(func=cmd_coeffs, default_tol=1e-8)

    loc = sub.add_parser("locus", parents=[common], help="degenerate Hopf loci")
    lsub = loc.add_subparsers(dest="locus_command", required=True, parser_class=_Parser)
    s = lsub.add_parser("scan", parents=[common], help="sample l1 on a (beta, alpha, kappa) grid")
    s.add_argument("--beta-range", type=float, nargs=2, default=(0.05, 0.95))
    s.add_argument("--alpha-range", type=float, nargs=2, default=(0.1, 2.0))
    s.add_argument("--kappa-range", type=float, nargs=2, default=(0.0, 0.9))
    s.add_argument("--shape", type=int, nargs=3, default=(10, 10, 5))
    s.add_argument("--order", type=int, choices=range(0, 5), default=1, help="ladder order per node (0: sign only)")
    s.set_defaults(func=cmd_locus_scan)
    cu = lsub.add_parser("curves", parents=[common], help="trace the l1 = l2 = 0 curves")
    cu.add_argument("--kappa-range", type=float, nargs=2, default=(0.0, 0.98))
    cu.add_argument("--kappas", type=float, nargs="+", help="explicit kappa values (default: table rows)")
    cu.set_defaults(func=cmd_locus_curves)
    q = lsub.add_parser("find-q", parents=[common], help="solve l1 = l2 = l3 = 0")
    q.add_argument("--seed-beta", type=float)
    q.add_argument("--seed-alpha", type=float)
    q.add_argument("--seed-kappa", type=float)
    q.set_defaults(func=cmd_locus_find_q, default_tol=1e-8)

    o = sub.add_parser("orbits", parents=[common], help="Poincare census by direct integration")
    _param_flags(o)
    o.add_argument("--representative", help="recorded parameter point (e.g. tongue, H1_supercritical)")
    o.add_argument("--amplitudes", type=float, nargs="+", help="seed amplitudes y on the section")
    o.add_argument("--amp-range", type=_positive, nargs=2, default=(1e-3, 0.6))
    o.add_argument("--seeds", type=int, default=24)
    o.add_argument("--rtol", type=_positive, default=1e-12)
    o.add_argument("--t-end", type=float, default=200.0, help="trajectory length written with --out-dir")
    o.add_argument("--start", type=float, nargs=3, help="trajectory initial state (x, y, z)")
    o.add_argument("--samples", type=int, default=400, help="rows per trajectory CSV")
    o.set_defaults(func=cmd_orbits)

    st = sub.add_parser("stability", parents=[common], help="equilibrium stability verdict")
    _param_flags(st)
    st.add_argument("--format", choices=("table", "json"), default="table")
    st.set_defaults(func=cmd_stability)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    try:
        defaults = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    if not isinstance(defaults, dict):
        parser.error("config must be a JSON object")
    defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
    args = parser.parse_args(argv)
    for key, value in defaults.items():
        flag = "--" + key.replace("_", "-")
        if key not in GLOBAL_DEFAULTS and not hasattr(args, key):
            parser.error(f"config key {key!r} does not apply to this command")
        if flag not in argv and not any(a.startswith(flag + "=") for a in argv):
            setattr(args, key, value)
    return args


GLOBAL_DEFAULTS = {"config": None, "out_dir": None, "workers": None, "tol": None}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = _apply_config(parser, argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    if args.tol is None:
        args.tol = getattr(args, "default_tol", 1e-10)
    elif not args.tol > 0:
        parser.error("--tol must be positive")
    if args.workers is not None and args.workers < 1:
        parser.error("--workers must be positive")
    if args.workers is None:
        args.workers = locus.default_workers()
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hopfwatt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HopfError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"hopfwatt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH
    except ValueError as exc:
        print(f"hopfwatt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
