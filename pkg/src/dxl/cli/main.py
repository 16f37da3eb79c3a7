"""``dxl`` command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical or accuracy
error, 4 resource error.
"""

import argparse
import sys

from ..errors import ConfigError, DXLError
from .config import CONVERTERS, SweepSpec, parse_config, parse_grid

ALIASES = {"j0_cluster": ["--j0"], "t_max": ["--tmax"]}


def _add_config_flags(p, fixed=()):
    p.add_argument("--config", help="key = value configuration file (flags win)")
    for key in CONVERTERS:
        if key in fixed:
            continue
        names = [f"--{key.replace('_', '-')}"]
        if "_" in key:
            names.append(f"--{key}")
        names += ALIASES.get(key, [])
        p.add_argument(*names, dest=key, default=None, metavar=key.upper())


def _flags(ns, fixed=None):
    flags = {k: getattr(ns, k) for k in CONVERTERS if getattr(ns, k, None) is not None}
    flags.update(fixed or {})
    return flags


def build_parser():
    parser = argparse.ArgumentParser(prog="dxl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration")
    _add_config_flags(p)

    p = sub.add_parser("sweep", help="run a lambda or theta grid")
    _add_config_flags(p)
    p.add_argument("--parameter", choices=("lambda", "theta"), required=True)
    p.add_argument("--values", required=True, help="comma-separated grid, e.g. -pi/4,0,pi/4,pi/2")

    p = sub.add_parser("fit", help="fit a stretched exponential to a trace CSV")
    p.add_argument("trace")
    p.add_argument("--c-min", type=float, default=0.2)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--axis", default=None)

    sub.add_parser("calibrate-kappa", help="determine the spin-convention factor")

    p = sub.add_parser("oracle", help="closed-form oracles")
    osub = p.add_subparsers(dest="oracle", required=True)
    po = osub.add_parser("ising", help="Ising X decay from products of cosines")
    _add_config_flags(po, fixed=("solver",))

    p = sub.add_parser("do-protocol", help="emulate the disorder-order measurement")
    _add_config_flags(p, fixed=("solver",))
    return parser


def _run(ns, solver=None):
    from .runner import run

    cfg = parse_config(ns.config, _flags(ns, {"solver": solver} if solver else None))
    res = run(cfg)
    print(f"wrote {res.directory} ({len(res.files)} files, {res.wall_time:.2f} s)")
    for axis, fit in res.fits.items():
        if isinstance(fit, Exception):
            print(f"  {axis}: no fit ({fit})")
        else:
            print(f"  {axis}: tau = {fit.tau:.6g} 1/J, nu = {fit.nu:.6g}")
    return 0


def _sweep(ns):
    from .runner import run_sweep

    grid = parse_grid(ns.values)
    try:
        base = parse_config(ns.config, _flags(ns))
    except ConfigError as exc:
        if exc.field != "anisotropy" or not grid:
            raise
        # the swept parameter supplies the anisotropy of every point
        base = parse_config(ns.config, _flags(ns, {ns.parameter: repr(grid[0])}))
    spec = SweepSpec(ns.parameter, grid, base.axes)
    outcomes = run_sweep(spec, base)
    for k, _, status, exc in outcomes:
        print(f"point {k}: {status}" + (f" ({exc})" if exc else ""))
    return 0


def _fit(ns):
    from ..analysis.fitting import fit_stretched_exponential
    from ..traces import CorrelatorTrace

    trace = CorrelatorTrace.from_csv(ns.trace, axis=ns.axis or "?")
    fit = fit_stretched_exponential(trace, c_min=ns.c_min, weighted=ns.weighted, axis=ns.axis)
    for k, v in fit.to_record().items():
        print(f"{k} = {v}")
    print(f"tau_err = {fit.tau_err}\nnu_err = {fit.nu_err}")
    return 0


def _calibrate(ns):
    from ..quantum.conventions import calibrate_kappa

    cal = calibrate_kappa()
    print(f"kappa = {cal.kappa!r}\nraw = {cal.raw!r}\nmax_error = {cal.max_error:.3e}\n"
          f"checks = {cal.n_checks}")
    return 0


def _join_values(argv):
    # "--values -pi/4,0" would otherwise read the grid as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--values":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--values={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(_join_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        if ns.command == "run":
            return _run(ns)
        if ns.command == "sweep":
            return _sweep(ns)
        if ns.command == "fit":
            return _fit(ns)
        if ns.command == "calibrate-kappa":
            return _calibrate(ns)
        if ns.command == "oracle":
            return _run(ns, "oracle-ising")
        if ns.command == "do-protocol":
            return _run(ns, "do-protocol")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return exc.exit_code
    except DXLError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    parser.error(f"unknown command {ns.command}")


if __name__ == "__main__":
    sys.exit(main())
