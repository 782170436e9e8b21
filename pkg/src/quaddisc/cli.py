"""Command-line interface: ``quaddisc <subcommand> [flags]``.

Exit codes: 0 on success, 2 for invalid input, 1 when a numerical method
fails to converge or a built-in consistency check does not hold.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import figures
from .discrepancy import discrete_wiener_discrepancy, l2star_discrepancy, lego_discrepancy
from .errors import ConvergenceError, DomainError
from .genfun import GFSpec, mc_gf_estimate, sample_discrepancies
from .inversion import InversionParams, bromwich_density_full
from .lego_instanton import branch_scan, find_vc, wall_threshold
from .points import LegoWeights, bin_counts, read_pointset, uniform_pointset
from .spectral import RankOneProblem, rank_one_det, rank_one_eigenvalues
from .wiener_instanton import asymptotics, energy_point, instanton_profile, series_eval


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _complexes(text: str) -> list[complex]:
    try:
        return [complex(v.strip().replace(" ", "")) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of complex numbers: {text!r}")


def _weights(args) -> LegoWeights:
    if args.w is not None:
        return LegoWeights.normalized(args.w) if abs(sum(args.w) - 1.0) > 1e-12 else LegoWeights(args.w)
    if args.m is None:
        raise ValueError("give --w or --m")
    return LegoWeights.uniform(args.m)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return f"{float(x) + 0.0:.12g}"  # no "-0"


def _csv(columns, rows) -> str:
    out = io.StringIO()
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return None if not math.isfinite(x) else float(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in x]
    return x


def _dump_json(obj) -> str:
    return json.dumps(_json_value(obj), indent=2, sort_keys=False) + "\n"


class _Output:
    def __init__(self, args):
        self.path = Path(args.out) if args.out else None
        self.format = args.format

    def write(self, text: str) -> None:
        if self.path is None:
            sys.stdout.write(text)
        else:
            with open(self.path, "w", newline="\n") as fh:
                fh.write(text)

    def table(self, columns, rows, summary=None) -> None:
        if self.format == "json":
            payload = {"columns": list(columns), "rows": [list(r) for r in rows]}
            if summary is not None:
                payload["summary"] = summary
            self.write(_dump_json(payload))
            return
        self.write(_csv(columns, rows))
        if summary is not None:
            text = _dump_json(summary)
            if self.path is None:
                sys.stderr.write(text)
            else:
                with open(self.path.with_name(self.path.name + ".summary.json"), "w",
                          newline="\n") as fh:
                    fh.write(text)


# --- subcommands ------------------------------------------------------------

def _cmd_discrepancy(args, out: _Output) -> None:
    if args.points:
        ps = read_pointset(args.points)
    else:
        if args.n is None:
            raise ValueError("give --points or --n")
        ps = uniform_pointset(args.n, args.s, args.seed)
    if args.kind == "lego":
        value = lego_discrepancy(bin_counts(ps, _weights(args)), _weights(args))
    elif args.kind == "l2star":
        value = l2star_discrepancy(ps)
    else:
        if args.m is None:
            raise ValueError("the discrete Wiener discrepancy needs --m")
        value = discrete_wiener_discrepancy(ps, args.m)
    out.table(["kind", "n", "s", "value"], [[args.kind, ps.n, ps.s, value]])


def _gf_spec(args) -> GFSpec:
    if args.gf == "lego":
        if args.m is None:
            raise ValueError("--gf lego needs --m")
        return GFSpec.lego_zeroth(args.m)
    if args.gf == "wiener":
        return GFSpec.wiener_zeroth()
    if args.gf == "lego-exact":
        if args.n is None:
            raise ValueError("--gf lego-exact needs --n")
        return GFSpec.lego_exact(args.n, _weights(args))
    if args.n is None:
        raise ValueError("--gf mc needs --n")
    problem = "wiener" if args.problem == "wiener" else _weights(args)
    return GFSpec.mc_estimate(args.n, problem, args.reps, args.seed)


def _cmd_gf(args, out: _Output) -> None:
    spec = _gf_spec(args)
    rows = []
    if spec.kind == "mc_estimate":
        for z in args.z:
            mean, err = mc_gf_estimate(z, spec.n, spec.cls, spec.reps, spec.seed)
            rows.append([z.real, z.imag, mean.real, mean.imag, err])
        out.table(["z_re", "z_im", "G_re", "G_im", "stderr"], rows)
        return
    vals = np.atleast_1d(spec.evaluate(np.array(args.z)))
    for z, g in zip(args.z, vals):
        rows.append([z.real, z.imag, g.real, g.imag])
    out.table(["z_re", "z_im", "G_re", "G_im"], rows)


def _cmd_invert(args, out: _Output) -> None:
    if args.gf == "lego" and args.m is None:
        raise ValueError("--gf lego needs --m")
    spec = GFSpec.lego_zeroth(args.m) if args.gf == "lego" else GFSpec.wiener_zeroth()
    base = InversionParams.defaults(spec)
    p = InversionParams(c=args.c if args.c is not None else base.c,
                        z_max=args.z_max if args.z_max is not None else base.z_max,
                        step=args.step if args.step is not None else base.step)
    if args.t is not None:
        ts = np.array(args.t)
    else:
        ts = np.linspace(args.t_min, args.t_max, args.t_steps)
    h, imag = bromwich_density_full(spec, ts, p)
    out.table(["t", "H", "imag_residual"], np.column_stack([ts, h, imag]).tolist())


def _cmd_lego_instanton(args, out: _Output) -> None:
    points = branch_scan(args.w_plus, args.v_max, args.steps)
    rows = [[bp.v, bp.y_minus, bp.y_plus, bp.z, bp.dz_dv, bp.sigma, bp.dsigma_dv]
            for bp in points]
    try:
        v_c = find_vc(args.w_plus) if args.w_plus < 0.5 else None
    except ConvergenceError:
        v_c = None
    summary = {
        "w_plus": args.w_plus,
        "v_c": v_c,
        "wall_threshold": wall_threshold(args.w_plus),
        "min_z": min(bp.z for bp in points),
        "wall_region_found": any(bp.dz_dv > 0 and bp.sigma < 0 for bp in points),
    }
    out.table(["v", "y_minus", "y_plus", "z", "dz_dv", "sigma", "dsigma_dv"], rows, summary)


def _cmd_wiener_instanton(args, out: _Output) -> None:
    if args.profile:
        try:
            e_str, k_str, g_str = args.profile.split(",")
            energy, k, grid = float(e_str), int(k_str), int(g_str)
        except ValueError:
            raise ValueError("--profile expects E,k,grid") from None
        prof = instanton_profile(energy, k, grid)
        summary = {"E": energy, "k": k, "z": prof.z, "shift": prof.shift,
                   "residual_max": prof.residual_max}
        out.table(["x", "phi"], np.column_stack([prof.xs, prof.phis]).tolist(),
                  summary if out.format == "json" else None)
        return
    es = np.linspace(args.e_min, args.e_max, args.steps)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for e in es:
            ep = energy_point(e)
            ser = series_eval(e, args.series_terms)
            asym = asymptotics(e).T_approx if e > 1.0 else math.nan
            rows.append([e, ep.T, ser.T, asym, ep.T1, ep.S, ser.S])
    out.table(["E", "T_quad", "T_series", "T_asymp", "T1", "S_quad", "S_series"], rows)


def _cmd_eigen(args, out: _Output) -> None:
    if len(args.a) != len(args.b):
        raise ValueError("--a and --b must have the same length")
    p = RankOneProblem(args.a, args.b, args.eps)
    eig = rank_one_eigenvalues(p)
    if out.format == "csv":
        out.table(["index", "eigenvalue"], [[i, v] for i, v in enumerate(eig)])
    else:
        out.write(_dump_json({"eigenvalues": list(eig), "det": rank_one_det(p)}))


def _cmd_fig(args, out: _Output) -> None:
    if args.id == 1:
        table = figures.fig_y_branches(args.v if args.v is not None else math.log(4.0))
    elif args.id == 2:
        table = figures.fig_lego_branch(args.w_plus, args.v_max, args.steps or 400)
    elif args.id == 3:
        table = figures.fig_profiles(args.energy, grid=args.grid)
    elif args.id == 4:
        table = figures.fig_period(args.e_min, args.e_max, args.steps or 240, args.series_terms)
    else:
        table = figures.fig_action(args.e_min, args.e_max, args.steps or 240, args.series_terms)
    out.table(table.columns, table.rows, table.meta if out.format == "json" else None)


def _cmd_mc(args, out: _Output) -> None:
    problem = "wiener" if args.problem == "wiener" else _weights(args)
    d = sample_discrepancies(args.n, problem, args.reps, args.seed)
    rows = [[i, args.seed + i, v] for i, v in enumerate(d)]
    summary = {"n": args.n, "reps": args.reps, "mean": float(np.mean(d)),
               "variance": float(np.var(d, ddof=1))}
    out.table(["replica", "seed", "D"], rows, summary if out.format == "json" else None)


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", help="JSON file of flag values; explicit flags win")

    parser = _Parser(prog="quaddisc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("discrepancy", parents=[common], help="discrepancy of a point set")
    p.add_argument("--kind", choices=["lego", "l2star", "wiener"], required=True)
    p.add_argument("--points", help="CSV file, one point per row")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--m", type=int)
    p.add_argument("--w", type=_floats)
    p.set_defaults(func=_cmd_discrepancy)

    p = sub.add_parser("gf", parents=[common], help="evaluate a generating function")
    p.add_argument("--gf", choices=["lego", "wiener", "lego-exact", "mc"], required=True)
    p.add_argument("--z", type=_complexes, required=True, help="comma-separated, e.g. 0.1,0.25j")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--w", type=_floats)
    p.add_argument("--problem", choices=["lego", "wiener"], default="lego")
    p.add_argument("--reps", type=int, default=10_000)
    p.set_defaults(func=_cmd_gf)

    p = sub.add_parser("invert", parents=[common], help="density from a zeroth-order G")
    p.add_argument("--gf", choices=["lego", "wiener"], required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--t", type=_floats)
    p.add_argument("--t-min", type=float, default=0.05)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--t-steps", type=int, default=200)
    p.add_argument("--c", type=float)
    p.add_argument("--z-max", type=float)
    p.add_argument("--step", type=float)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("lego-instanton", parents=[common], help="Lego instanton branch scan")
    p.add_argument("--w-plus", type=float, default=0.09)
    p.add_argument("--v-max", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=400)
    p.set_defaults(func=_cmd_lego_instanton)

    p = sub.add_parser("wiener-instanton", parents=[common], help="Wiener instanton tables")
    p.add_argument("--e-min", type=float, default=0.1)
    p.add_argument("--e-max", type=float, default=12.0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--series-terms", type=int, default=50)
    p.add_argument("--profile", help="E,k,grid: emit one profile instead")
    p.set_defaults(func=_cmd_wiener_instanton)

    p = sub.add_parser("eigen", parents=[common], help="rank-one eigenvalue problem")
    p.add_argument("--a", type=_floats, required=True)
    p.add_argument("--b", type=_floats, required=True)
    p.add_argument("--eps", type=int, choices=[1, -1], default=1)
    p.set_defaults(func=_cmd_eigen, format_default="json")

    p = sub.add_parser("fig", parents=[common], help="tabulated data behind the five instanton plots (ids 1-5)")
    p.add_argument("--id", type=int, choices=[1, 2, 3, 4, 5], required=True)
    p.add_argument("--v", type=float)
    p.add_argument("--w-plus", type=float, default=0.09)
    p.add_argument("--v-max", type=float)
    p.add_argument("--energy", type=float, default=5.7)
    p.add_argument("--grid", type=int, default=301)
    p.add_argument("--e-min", type=float, default=0.05)
    p.add_argument("--e-max", type=float, default=12.0)
    p.add_argument("--steps", type=int)
    p.add_argument("--series-terms", type=int, default=50)
    p.set_defaults(func=_cmd_fig)

    p = sub.add_parser("mc", parents=[common], help="sample discrepancies of random point sets")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--problem", choices=["lego", "wiener"], default="wiener")
    p.add_argument("--m", type=int)
    p.add_argument("--w", type=_floats)
    p.add_argument("--reps", type=int, default=1000)
    p.set_defaults(func=_cmd_mc)
    return parser


def _explicit_format(argv) -> bool:
    return any(a == "--format" or a.startswith("--format=") for a in argv)


def _apply_config(parser, argv, args):
    """Re-parse with the config file's values as defaults."""
    with open(args.config) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("the config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions} - {"help", "config"}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise UsageError(f"unknown config key {key!r}")
        action = next(a for a in sub._actions if a.dest == dest)
        if isinstance(value, list) and action.type in (_floats, _complexes):
            value = ",".join(str(v) for v in value)
        if isinstance(value, str) and action.type is not None:
            value = action.type(value)
        elif action.type is _complexes:
            value = [complex(value)]
        elif action.type is _floats:
            value = [float(value)]
        defaults[dest] = value
    sub.set_defaults(**defaults)
    for action in sub._actions:
        if action.dest in defaults:
            action.required = False
    return parser.parse_args(argv), defaults


_GLOBAL_FLAGS = ("--out", "--format", "--seed", "--config")


def _hoist_globals(argv: list[str]) -> list[str]:
    """Move global flags written before the subcommand to after it."""
    leading, i = [], 0
    while i < len(argv) and argv[i].startswith("--"):
        flag = argv[i].split("=", 1)[0]
        if flag not in _GLOBAL_FLAGS:
            break
        if "=" in argv[i] or i + 1 == len(argv):
            leading.append(argv[i])
            i += 1
        else:
            leading += argv[i:i + 2]
            i += 2
    return argv[i:] + leading


def run(argv=None) -> int:
    argv = _hoist_globals(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        # a config file may supply required flags; retry without them
        if "--config" not in " ".join(argv):
            sys.stderr.write(f"quaddisc: error: {exc}\n")
            return 2
        args = None
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if args is None or args.config:
            config_path = args.config if args is not None else _find_config(argv)
            probe = argparse.Namespace(config=config_path,
                                       command=args.command if args else _find_command(argv))
            args, cfg = _apply_config(parser, argv, probe)
        else:
            cfg = {}
        if not _explicit_format(argv) and "format" not in cfg:
            args.format = getattr(args, "format_default", args.format)
        args.func(args, _Output(args))
    except UsageError as exc:
        sys.stderr.write(f"quaddisc: error: {exc}\n")
        return 2
    except (ConvergenceError, ArithmeticError) as exc:
        sys.stderr.write(f"quaddisc: numerical failure: {exc}\n")
        return 1
    except (ValueError, DomainError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"quaddisc: error: {exc}\n")
        return 2
    return 0


def _find_config(argv) -> str:
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    raise UsageError("--config needs a file name")


def _find_command(argv) -> str:
    for a in argv:
        if not a.startswith("-"):
            return a
    raise UsageError("no subcommand given")


def main() -> None:
    sys.exit(run())
