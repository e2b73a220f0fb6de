"""``checkerboard`` command-line interface.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
Every subcommand accepts ``--config FILE`` (flat ``key = value`` lines, ``#``
comments; keys are flag names) and flags given on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .checks import CHECKS, run_checks
from .continuum import (
    ResidualReport,
    chiral_field,
    difference_field,
    free_streaming_history,
    gaussian_packet,
    transport_residual,
    wavepacket_history,
    zzb_pde_residual,
)
from .lattice import (
    CausalFieldPair,
    DirectedAmplitudeField,
    LatticeSpec,
    PathQuery,
    TransitionRates,
    Weight,
    causality_residual,
    consistent_pair,
    path_sum_amplitude,
    reversal_histogram,
    step_causal,
    step_simple,
)
from .spectral import (
    assemble_intermediate,
    dirac_form,
    dispersion,
    eig4,
    MomentumPoint,
    rotate_momentum_block,
    sigma_conjugate,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
_NOT_CONFIG_KEYS = {"command", "config", "save_config", "func"}


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def write_config(path, args: argparse.Namespace) -> None:
    lines = [f"# checkerboard {args.command}"]
    for key, value in sorted(vars(args).items()):
        if key in _NOT_CONFIG_KEYS or value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _direction(text: str) -> int:
    if text in ("+", "+1", "1"):
        return 1
    if text in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError(f"direction must be '+' or '-', got {text!r}")


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


# --- simulate ----------------------------------------------------------------


def _initial_values(args, spec: LatticeSpec, complex_: bool) -> np.ndarray:
    dtype = np.complex128 if complex_ else np.float64
    vals = np.zeros((spec.num_sites, 2), dtype=dtype)
    site = spec.num_sites // 2 if args.site is None else args.site
    if not 0 <= site < spec.num_sites:
        raise ConfigError(f"--site must be in [0, {spec.num_sites}), got {site}")
    col = 0 if args.dir == 1 else 1
    if args.init == "point":
        vals[site, col] = 1.0
    else:
        packet = gaussian_packet(spec.positions(), site * spec.delta_z, args.width, args.p0)
        vals[:, col] = packet if complex_ else packet.real
    return vals


def cmd_simulate(args) -> int:
    spec = LatticeSpec(args.dt, args.sites, boundary=args.boundary)
    if args.steps < 0:
        raise ConfigError("--steps must be >= 0")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    field_rows, log_rows = [], []

    def snapshot(step, values, labels=("+", "-")):
        for site in range(values.shape[0]):
            for col, label in enumerate(labels):
                v = complex(values[site, col])
                field_rows.append([step, site, label, fmt(v.real), fmt(v.imag)])

    if args.mode == "simple":
        imaginary = args.eps is not None
        weight = Weight.imaginary(args.eps, args.feynman) if imaginary else Weight("real", feynman=args.feynman)
        rates = None if imaginary else TransitionRates.symmetric(args.a)
        weight.amplitudes(rates, spec)  # validate before writing anything
        f = DirectedAmplitudeField(_initial_values(args, spec, imaginary or args.init == "gaussian"))
        for step in range(args.steps + 1):
            if step:
                f = step_simple(f, rates, spec, weight)
            snapshot(step, f.values)
            s = complex(f.total())
            log_rows.append([step, fmt(s.real), fmt(s.imag), ""])
    else:
        rates = TransitionRates(args.zeta_plus, args.zeta_minus)
        rates.check(spec)
        pair = consistent_pair(DirectedAmplitudeField(_initial_values(args, spec, args.init == "gaussian")),
                               rates, spec)
        for step in range(args.steps + 1):
            residual = ""
            if step:
                nxt = step_causal(pair, rates, spec)
                residual = fmt(causality_residual(pair, nxt, spec))
                pair = nxt
            snapshot(step, pair.z_field.values)
            snapshot(step, pair.zbar_field.values, ("bar+", "bar-"))
            s = complex(pair.z_field.total())
            log_rows.append([step, fmt(s.real), fmt(s.imag), residual])

    with open(out / "field.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "site", "dir", "re", "im"])
        w.writerows(field_rows)
    with open(out / "log.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "sum_re", "sum_im", "causality_residual"])
        w.writerows(log_rows)
    print(f"wrote {out / 'field.csv'} and {out / 'log.csv'} ({args.steps + 1} snapshots)")
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def cmd_verify(args) -> int:
    names = [n.strip() for n in args.check.split(",")] if args.check else None
    if names:
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown check(s) {unknown}; choose from {sorted(CHECKS)}")
    p = _floats(args.p)
    if len(p) != 3:
        raise ConfigError("--p needs three components, e.g. 1,2,2")
    report = run_checks(names, seed=args.seed, n=args.n, p=tuple(p), m=args.m)
    text = dump_json(report)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}: max residual {c['max_residual']:.3e} (tol {c['tolerance']:.0e})",
              file=sys.stderr)
        if c["name"] == "chain":
            print(f"     eigenvalues at p={p}, m={args.m}: {c['details']['point']['eigenvalues']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# --- converge ----------------------------------------------------------------

CASES = ("transport", "free", "zzb-free", "lattice", "lattice-transport")


def _lattice_history(spec, rates, args, slices=3):
    z = spec.positions()
    bump = np.exp(-((z - 0.5 * args.length) ** 2) / (2 * args.width**2))
    init = DirectedAmplitudeField(np.stack([bump, 0.5 * bump], axis=1))
    pair = consistent_pair(init, rates, spec)
    steps = int(round(args.t_end / spec.delta_t))
    history = [pair]
    for _ in range(steps + slices - 1):
        history = (history + [step_causal(history[-1], rates, spec)])[-slices:]
    return history


def converge_entry(case: str, dt: float, args) -> tuple[float, float, float | None]:
    """``(dt, residual, field_scale)``; the scale is reported for lattice-generated data only."""
    sites = int(round(args.length / dt))
    if sites < 8 or not math.isclose(sites * dt, args.length, rel_tol=1e-9):
        raise ConfigError(f"--length {args.length} is not a whole number (>= 8) of steps dt={dt}")
    spec = LatticeSpec(dt, sites)
    rates = TransitionRates(args.zeta_plus, args.zeta_minus)
    if case == "transport":
        hist = wavepacket_history(spec, rates, args.t_end, width=args.width, p0=args.p0)
        return (*transport_residual(hist, spec, rates), None)
    if case == "free":
        rates = TransitionRates(0.0, 0.0)
        hist = free_streaming_history(spec, rates, args.t_end, width=args.width, p0=args.p0)
        return (*transport_residual(hist, spec, rates), None)
    if case == "zzb-free":
        rates = TransitionRates(0.0, 0.0)
        hist = []
        for k, chi in enumerate(free_streaming_history(spec, rates, args.t_end, width=args.width, p0=args.p0)):
            zeros = DirectedAmplitudeField.zeros(sites, complex_=True)
            hist.append(CausalFieldPair(DirectedAmplitudeField(chi.values), zeros, k))
        return (*zzb_pde_residual(hist, spec, rates), None)
    rates.check(spec)
    history = _lattice_history(spec, rates, args)
    if case == "lattice":
        scale = float(np.abs(difference_field(history[1])).max())
        return (*zzb_pde_residual(history, spec, rates), scale)
    chi = [chiral_field(p, rates, p.time_index * spec.delta_t) for p in history]
    return (*transport_residual(chi, spec, rates), float(np.abs(chi[1].values).max()))


def cmd_converge(args) -> int:
    ladder = _floats(args.ladder)
    if len(ladder) < 3:
        raise ConfigError(f"convergence ladder needs at least 3 levels, got {len(ladder)}")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("ladder dt values must be strictly decreasing")
    floor = args.floor
    if floor is None:
        floor = 1e-10 if args.case in ("free", "zzb-free") else 0.0
    rows = [converge_entry(args.case, dt, args) for dt in ladder]
    report = ResidualReport([(dt, r) for dt, r, _ in rows], floor=floor)
    payload = {"case": args.case, **report.to_dict(), "floor": floor}
    if rows[0][2] is not None:
        # lattice data: the fields themselves shrink with dt, so also report residual / max|field|
        payload["relative_residuals"] = [r / s if s else 0.0 for _, r, s in rows]
    text = dump_json(payload)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    if args.min_order is not None and report.estimated_order < args.min_order:
        return EXIT_FAIL
    return EXIT_OK


# --- path-sum / chain --------------------------------------------------------


def cmd_path_sum(args) -> int:
    spec = LatticeSpec(args.dt, 2)
    if args.eps is not None:
        weight, rates = Weight.imaginary(args.eps, args.feynman), None
    else:
        weight, rates = Weight("real", feynman=args.feynman), TransitionRates.symmetric(args.a)
    q = PathQuery(args.n, args.start, args.end, args.disp, args.reversals)
    amp = complex(path_sum_amplitude(q, rates, spec, weight))
    counts = {}
    if q.feasible:
        row = reversal_histogram(q.n, q.start_dir)[q.displacement + q.n, 0 if q.end_dir == 1 else 1]
        counts = {str(r): int(c) for r, c in enumerate(row) if c}
    sys.stdout.write(dump_json({"query": {"n": q.n, "start": q.start_dir, "end": q.end_dir,
                                          "displacement": q.displacement, "reversals": q.reversal_count},
                                "amplitude": [amp.real, amp.imag], "paths_by_reversals": counts}))
    return EXIT_OK


def _matrix(mat) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(mat)]


def cmd_chain(args) -> int:
    p = _floats(args.p)
    if len(p) != 3:
        raise ConfigError("--p needs three components, e.g. 1,2,2")
    if args.m < 0:
        raise ConfigError("--m must be >= 0")
    pmag = math.sqrt(sum(c * c for c in p))
    pt = MomentumPoint.on_shell(p, args.m)
    block, tilted = rotate_momentum_block(p, return_intermediate=True)
    h = dirac_form(p, args.m)
    out = {
        "p": p, "m": args.m, "dispersion": list(dispersion(pt)),
        "intermediate": _matrix(assemble_intermediate(MomentumPoint.along_z(pmag, pt.E, args.m))),
        "sigma_conjugated": _matrix(sigma_conjugate(assemble_intermediate(MomentumPoint.along_z(pmag, pt.E, args.m)))),
        "tilted_block": _matrix(tilted),
        "sigma_dot_p": _matrix(block),
        "dirac_hamiltonian": _matrix(h),
        "eigenvalues": [float(x) for x in eig4(h)],
    }
    sys.stdout.write(dump_json(out))
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' file; command-line flags take precedence")
    common.add_argument("--save-config", help="write the resolved options to this file")

    parser = argparse.ArgumentParser(prog="checkerboard", description=__doc__.splitlines()[0],
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    fmt_cls = argparse.ArgumentDefaultsHelpFormatter

    s = sub.add_parser("simulate", parents=[common], formatter_class=fmt_cls,
                       help="iterate the lattice master equations and write CSV snapshots")
    s.add_argument("--mode", choices=("simple", "causal"), default="simple")
    s.add_argument("--a", type=float, default=0.5, help="reversal rate for the simple equation")
    s.add_argument("--eps", type=float, default=None, help="use the imaginary reversal weight i*eps")
    s.add_argument("--feynman", action="store_true", help="approximate the keep weight by 1")
    s.add_argument("--zeta-plus", type=float, default=0.3)
    s.add_argument("--zeta-minus", type=float, default=0.1)
    s.add_argument("--dt", type=float, default=0.1)
    s.add_argument("--sites", type=int, default=64)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--boundary", choices=("periodic", "absorbing"), default="periodic")
    s.add_argument("--init", choices=("point", "gaussian"), default="point")
    s.add_argument("--site", type=int, default=None, help="source site (default: centre)")
    s.add_argument("--dir", type=_direction, default=1, help="source direction, + or -")
    s.add_argument("--width", type=float, default=1.0, help="gaussian width in length units")
    s.add_argument("--p0", type=float, default=0.0, help="gaussian carrier momentum")
    s.add_argument("--out", default="checkerboard_out", help="output directory")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", parents=[common], formatter_class=fmt_cls,
                       help="run the verification suite and write a JSON report")
    v.add_argument("--check", default=None, help=f"comma-separated subset of: {', '.join(CHECKS)}")
    v.add_argument("--seed", type=int, default=20240601)
    v.add_argument("--n", type=int, default=12, help="largest step count for the path-oracle check")
    v.add_argument("--p", default="1,2,2", help="momentum for the reported chain eigenvalues")
    v.add_argument("--m", type=float, default=4.0, help="mass for the reported chain eigenvalues")
    v.add_argument("--output", default=None, help="JSON report path (default: stdout)")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("converge", parents=[common], formatter_class=fmt_cls,
                       help="residual convergence study over a dt ladder")
    c.add_argument("--case", choices=CASES, default="transport")
    c.add_argument("--ladder", default="0.1,0.05,0.025,0.0125")
    c.add_argument("--zeta-plus", type=float, default=0.8)
    c.add_argument("--zeta-minus", type=float, default=0.3)
    c.add_argument("--length", type=float, default=51.2, help="periodic box length")
    c.add_argument("--width", type=float, default=2.0)
    c.add_argument("--p0", type=float, default=1.0)
    c.add_argument("--t-end", type=float, default=0.5, help="time of the first residual slice")
    c.add_argument("--floor", type=float, default=None,
                   help="residuals at or below this count as exact (default 1e-10 for free cases, else 0)")
    c.add_argument("--min-order", type=float, default=None, help="exit 1 if the fitted order is lower")
    c.add_argument("--output", default=None)
    c.set_defaults(func=cmd_converge)

    p = sub.add_parser("path-sum", parents=[common], formatter_class=fmt_cls,
                       help="exact path-sum amplitude for one endpoint")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--start", type=_direction, default=1)
    p.add_argument("--end", type=_direction, default=1)
    p.add_argument("--disp", type=int, required=True, help="displacement in sites")
    p.add_argument("--reversals", type=int, default=None)
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--feynman", action="store_true")
    p.set_defaults(func=cmd_path_sum)

    ch = sub.add_parser("chain", parents=[common], formatter_class=fmt_cls,
                        help="print the momentum-space transformation chain for one point")
    ch.add_argument("--p", default="1,2,2")
    ch.add_argument("--m", type=float, default=4.0)
    ch.set_defaults(func=cmd_chain)
    return parser


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _load_config_defaults(parser: argparse.ArgumentParser, argv) -> None:
    """Install config-file values as subcommand defaults so flags still override them."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or known.command not in COMMANDS:
        return
    sub = _subparser(parser, known.command)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in read_config(known.config).items():
        if key in _NOT_CONFIG_KEYS or key not in actions:
            raise ConfigError(f"unknown config key {key!r} for '{known.command}'")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = _bool(value)
        else:
            try:
                defaults[key] = action.type(value) if action.type else value
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from None
            if action.choices is not None and defaults[key] not in action.choices:
                raise ConfigError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
        action.required = False
    sub.set_defaults(**defaults)


COMMANDS = ("simulate", "verify", "converge", "path-sum", "chain")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _load_config_defaults(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    except (ConfigError, OSError) as exc:
        print(f"checkerboard: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.save_config:
            write_config(args.save_config, args)
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"checkerboard {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
