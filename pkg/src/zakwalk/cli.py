"""Command-line interface.

Subcommands::

    dispersion      E(k) and n(k) along a momentum sweep            (CSV)
    dirac-scan      gap closures on the coin-angle torus            (JSON)
    zak             Zak phase of one protocol                       (JSON)
    zak-landscape   Zak phase over a grid of coin angles            (CSV)
    simulate        position distribution after N steps             (CSV)
    replay          re-run a configuration written by --echo-config

Exit status: 0 on success (undefined Zak phases included), 2 on usage
errors, 1 on internal numerical inconsistencies.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .bloch import Family, WalkProtocol, bloch_point, dirac_scan
from .errors import (
    GapClosureError,
    InvalidArgumentError,
    NumericalInconsistencyError,
    PoleError,
)
from .walk import CIRCULAR_SPINOR, distribution, evolve, initial_state, overlap
from .zak import (
    ZakResult,
    default_interval,
    zak_landscape,
    zak_quadrature,
    zak_splitstep_analytic,
    zak_wilson,
)

__all__ = ["main", "build_parser"]

_INIT_TOL = 1e-6
_ANGLE_FLAGS = ("theta", "phi", "theta1", "theta2")
_FAMILY_ANGLES = {
    Family.SINGLE: ("theta", None),
    Family.SPLIT_STEP: ("theta1", "theta2"),
    Family.NON_COMMUTING: ("theta", "phi"),
}


class UsageError(Exception):
    pass


def fmt(x: float | None) -> str:
    """17 significant digits; ``None`` becomes an empty field."""
    if x is None:
        return ""
    return format(float(x), ".17g")


# --------------------------------------------------------------------------- #
# parser
# --------------------------------------------------------------------------- #


def _family(value: str) -> Family:
    try:
        return Family.parse(value)
    except InvalidArgumentError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_common(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument(
        "--echo-config",
        action="store_true",
        help="write the resolved configuration as JSON (to OUT.config.json, or stderr)",
    )


def _add_family(p: argparse.ArgumentParser, default: str | None = None) -> None:
    p.add_argument(
        "--family",
        type=_family,
        default=None if default is None else Family.parse(default),
        required=default is None,
        help="single | splitstep | noncommuting",
    )


def _add_angles(p: argparse.ArgumentParser) -> None:
    for name in _ANGLE_FLAGS:
        flag = f"--{name}"
        p.add_argument(flag, type=float, default=None, help="radians")
        p.add_argument(f"{flag}-pi", type=float, default=None, help=f"same as {flag}, in units of pi")


def _add_k(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k-lo", type=float, default=None)
    p.add_argument("--k-hi", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zakwalk",
        description="Band structure, Dirac points and Zak phases of 1D discrete-time quantum walks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dispersion", help="quasi-energy and Bloch vector along k")
    _add_family(p)
    _add_angles(p)
    _add_k(p)
    p.add_argument("--k-samples", type=int, default=201)
    _add_common(p, "csv")

    p = sub.add_parser("dirac-scan", help="gap closures over the coin-angle torus")
    _add_family(p, "noncommuting")
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--k-samples", type=int, default=129)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--pi-closures", action="store_true", help="report E = pi closures instead")
    _add_common(p, "json")

    p = sub.add_parser("zak", help="Zak phase of one protocol")
    _add_family(p)
    _add_angles(p)
    _add_k(p)
    p.add_argument("--method", choices=("quadrature", "wilson", "analytic"), default="quadrature")
    p.add_argument("--tol", type=float, default=1e-9, help="quadrature absolute tolerance")
    p.add_argument("--n-points", type=int, default=2048, help="Wilson-line samples")
    _add_common(p, "json")

    p = sub.add_parser("zak-landscape", help="Zak phase over a grid of coin angles")
    _add_family(p)
    _add_k(p)
    p.add_argument("--grid", default="101", help="N or N1xN2 (default 101)")
    p.add_argument("--lo", type=float, default=-math.pi, help="axis lower bound")
    p.add_argument("--hi", type=float, default=math.pi, help="axis upper bound")
    p.add_argument("--method", choices=("quadrature", "analytic"), default="quadrature")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--jobs", type=int, default=0, help="worker processes (0 = all cores)")
    _add_common(p, "csv")

    p = sub.add_parser("simulate", help="position-space evolution")
    _add_family(p, "noncommuting")
    _add_angles(p)
    for name in ("theta", "phi"):
        p.add_argument(f"--compare-{name}", type=float, default=None)
        p.add_argument(f"--compare-{name}-pi", type=float, default=None)
    p.add_argument("--steps", type=int, default=7)
    p.add_argument("--position", type=int, default=0)
    p.add_argument("--init", default=None, help='coin state "re_h,im_h,re_v,im_v" (default (1,i)/sqrt2)')
    p.add_argument("--phase-out", default=None, help="where to write the overlap JSON (default: stderr)")
    _add_common(p, "csv")

    p = sub.add_parser("replay", help="re-run an echoed configuration")
    p.add_argument("config", help="JSON file written by --echo-config")
    p.add_argument("--out", default=None, help="override the recorded output path")
    return parser


# --------------------------------------------------------------------------- #
# argument resolution
# --------------------------------------------------------------------------- #


def _angle(args, name: str) -> float | None:
    raw = getattr(args, name, None)
    in_pi = getattr(args, f"{name}_pi", None)
    if raw is not None and in_pi is not None:
        raise UsageError(f"give only one of --{name.replace('_', '-')} and --{name.replace('_', '-')}-pi")
    if in_pi is not None:
        return in_pi * math.pi
    return raw


def _protocol(args) -> WalkProtocol:
    family = args.family
    first, second = _FAMILY_ANGLES[family]
    for name in _ANGLE_FLAGS:
        if name not in (first, second) and _angle(args, name) is not None:
            raise UsageError(f"--{name} is not a parameter of the {family.value} walk")
    a1 = _angle(args, first)
    a2 = _angle(args, second) if second else 0.0
    if a1 is None or a2 is None:
        need = [f"--{n}" for n in (first, second) if n]
        raise UsageError(f"the {family.value} walk needs {' and '.join(need)}")
    for value in (a1, a2):
        if not math.isfinite(value):
            raise UsageError("angles must be finite")
    return WalkProtocol(family, a1, a2)


def _parse_init(text: str | None) -> np.ndarray:
    if text is None:
        return CIRCULAR_SPINOR.copy()
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--init expects four comma-separated numbers, got {text!r}") from None
    if len(parts) != 4 or not all(math.isfinite(x) for x in parts):
        raise UsageError(f"--init expects four finite numbers re_h,im_h,re_v,im_v, got {text!r}")
    s = np.array([complex(parts[0], parts[1]), complex(parts[2], parts[3])])
    n2 = float(np.vdot(s, s).real)
    if abs(n2 - 1.0) > _INIT_TOL:
        raise UsageError(f"--init spinor is not normalized (|s|^2 = {n2:.12g})")
    return s / math.sqrt(n2)


def _grid_shape(text: str) -> tuple[int, int]:
    try:
        if "x" in text.lower():
            n1, n2 = (int(x) for x in text.lower().split("x"))
        else:
            n1 = n2 = int(text)
    except ValueError:
        raise UsageError(f"--grid expects N or N1xN2, got {text!r}") from None
    if n1 < 2 or n2 < 2:
        raise UsageError("--grid sizes must be >= 2")
    return n1, n2


# --------------------------------------------------------------------------- #
# output
# --------------------------------------------------------------------------- #


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def _table(header, rows, fmt_kind: str) -> str:
    if fmt_kind == "csv":
        return _csv_text(header, ([_cell(v) for v in r] for r in rows))
    return _json_text([dict(zip(header, r)) for r in rows])


# --------------------------------------------------------------------------- #
# commands
# --------------------------------------------------------------------------- #


def cmd_dispersion(args) -> str:
    p = _protocol(args)
    if args.k_samples < 2:
        raise UsageError("--k-samples must be >= 2")
    k_lo = -math.pi if args.k_lo is None else args.k_lo
    k_hi = math.pi if args.k_hi is None else args.k_hi
    if not k_lo < k_hi:
        raise UsageError("--k-lo must be smaller than --k-hi")
    rows = []
    for k in np.linspace(k_lo, k_hi, args.k_samples):
        pt = bloch_point(p, float(k))
        n = pt.n if pt.n is not None else (None, None, None)
        rows.append((pt.k, pt.energy, pt.gap, *n))
    return _table(("k", "energy", "gap", "n_x", "n_y", "n_z"), rows, args.format)


def cmd_dirac_scan(args) -> str:
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    if args.grid < 41 or args.grid % 2 == 0:
        raise UsageError("--grid must be odd and >= 41")
    if args.k_samples < 2:
        raise UsageError("--k-samples must be >= 2")
    pts = dirac_scan(
        args.family,
        args.grid,
        args.k_samples,
        args.tol,
        closure="pi" if args.pi_closures else "zero",
        refine_tol=min(1e-9, args.tol),
    )
    rows = [(d.angle1, d.angle2, d.k_star, d.residual_gap, d.kind) for d in pts]
    return _table(("angle1", "angle2", "k_star", "residual_gap", "kind"), rows, args.format)


def cmd_zak(args) -> str:
    p = _protocol(args)
    lo, hi = default_interval(p.family)
    k_lo = lo if args.k_lo is None else args.k_lo
    k_hi = hi if args.k_hi is None else args.k_hi
    if args.method == "analytic":
        if p.family is not Family.SPLIT_STEP:
            raise UsageError("--method analytic is only available for --family splitstep")
        try:
            z = zak_splitstep_analytic(p.angle1, p.angle2)
            r = ZakResult(None, None, z, "analytic", k_lo, k_hi, True)
        except PoleError:
            r = ZakResult(None, None, None, "analytic", k_lo, k_hi, False)
    elif args.method == "wilson":
        if args.n_points < 64:
            raise UsageError("--n-points must be >= 64")
        try:
            zp = zak_wilson(p, k_lo, k_hi, args.n_points, "plus")
            zm = zak_wilson(p, k_lo, k_hi, args.n_points, "minus")
            r = ZakResult(zp, zm, zp + zm, "wilson", k_lo, k_hi, True)
        except GapClosureError:
            r = ZakResult(None, None, None, "wilson", k_lo, k_hi, False)
    else:
        if not args.tol > 0:
            raise UsageError("--tol must be positive")
        r = zak_quadrature(p, k_lo, k_hi, args.tol)
    d = r.as_dict()
    if args.format == "csv":
        return _csv_text(list(d), [[_cell(v) for v in d.values()]])
    return _json_text(d)


def cmd_zak_landscape(args) -> str:
    n1, n2 = _grid_shape(args.grid)
    if args.method == "analytic" and args.family is not Family.SPLIT_STEP:
        raise UsageError("--method analytic is only available for --family splitstep")
    if not args.lo < args.hi:
        raise UsageError("--lo must be smaller than --hi")
    ax1 = np.linspace(args.lo, args.hi, n1)
    ax2 = np.linspace(args.lo, args.hi, n2)
    grid = zak_landscape(
        args.family, ax1, ax2, args.k_lo, args.k_hi, method=args.method, jobs=args.jobs, tol=args.tol
    )
    header = ("angle1", "angle2", "z_plus", "z_minus", "z_total", "defined")
    rows = [(a1, a2, r.z_plus, r.z_minus, r.z_total, r.defined) for a1, a2, r in grid.rows()]
    return _table(header, rows, args.format)


def cmd_simulate(args) -> str:
    p = _protocol(args)
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    s0 = initial_state(args.position, _parse_init(args.init))
    s = evolve(s0, p, args.steps)
    dist = distribution(s)
    rows = list(zip(dist.positions.tolist(), dist.probabilities.tolist()))

    ct = _angle(args, "compare_theta")
    cp = _angle(args, "compare_phi")
    phase_payload = None
    if ct is not None or cp is not None:
        q = WalkProtocol(
            p.family,
            p.angle1 if ct is None else ct,
            p.angle2 if cp is None else cp,
        )
        other = evolve(s0, q, args.steps)
        z = overlap(other, s)
        pure = abs(z) >= 1.0 - 1e-9
        phase_payload = {
            "overlap_phase": abs(math.atan2(z.imag, z.real)) if pure else None,
            "overlap_modulus": abs(z),
            "pure_phase": pure,
            "protocol_a": [p.angle1, p.angle2],
            "protocol_b": [q.angle1, q.angle2],
            "steps": args.steps,
        }

    if args.format == "json":
        obj = {"x": [r[0] for r in rows], "probability": [r[1] for r in rows]}
        if phase_payload is not None:
            obj.update(phase_payload)
        return _json_text(obj)

    if phase_payload is not None:
        text = _json_text(phase_payload)
        if args.phase_out:
            _emit(text, args.phase_out)
        else:
            sys.stderr.write(text)
    return _csv_text(("x", "probability"), ((_cell(x), _cell(pr)) for x, pr in rows))


_COMMANDS = {
    "dispersion": cmd_dispersion,
    "dirac-scan": cmd_dirac_scan,
    "zak": cmd_zak,
    "zak-landscape": cmd_zak_landscape,
    "simulate": cmd_simulate,
}


def _config_echo(argv: list[str], args) -> dict:
    resolved = {}
    for key, value in sorted(vars(args).items()):
        if isinstance(value, Family):
            value = value.value
        resolved[key] = value
    replay_argv = [a for a in argv if a != "--echo-config"]
    return {"program": "zakwalk", "version": __version__, "argv": replay_argv, "resolved": resolved}


def _replay(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    argv = list(cfg["argv"])
    if args.out is not None:
        if "--out" in argv:
            argv[argv.index("--out") + 1] = args.out
        else:
            argv += ["--out", args.out]
    return main(argv)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        return _replay(args)
    try:
        text = _COMMANDS[args.command](args)
    except (UsageError, InvalidArgumentError) as exc:
        parser.error(str(exc))
    except NumericalInconsistencyError as exc:
        sys.stderr.write(f"zakwalk: numerical inconsistency: {exc}\n")
        return 1
    _emit(text, args.out)
    if args.echo_config:
        echo = _json_text(_config_echo(argv, args))
        if args.out:
            _emit(echo, args.out + ".config.json")
        else:
            sys.stderr.write(echo)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
