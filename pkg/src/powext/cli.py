"""Command-line front end.

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage/config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from typing import Any, Sequence

from . import convergence as conv
from .errors import DomainError, NumericalError, QuantityMismatchError
from .exactdist import exact_moment
from .expansion import kernels
from .gumbel import moment_table
from .montecarlo import McConfig, mc_moments
from .norming import scale_from_b, scale_from_n
from .quadrature import QuadratureConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

THEOREM_HEADER = ("t", "r", "sign", "L_empirical", "L_tau_oracle", "L_closed_form",
                  "dev_oracle", "dev_closed", "rate_slope", "verdict")


class UsageError(Exception):
    pass


def fmt(value: Any) -> str:
    """17 significant digits for floats, locale independent."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


@dataclass
class Table:
    header: Sequence[str]
    rows: list[Sequence[Any]]
    passed: bool = True
    extra: dict | None = None

    def render(self, kind: str) -> str:
        if kind == "json":
            payload = {"columns": list(self.header),
                       "rows": [dict(zip(self.header, _jsonable(r))) for r in self.rows],
                       "passed": self.passed}
            if self.extra:
                payload["details"] = self.extra
            return json.dumps(payload, indent=2, allow_nan=True) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()


def _jsonable(row):
    return [v if not isinstance(v, float) or math.isfinite(v) else str(v) for v in row]


def _floats(text: str) -> list[float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    return v


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="write the table here instead of stdout")
    common.add_argument("--config", default=None, help="key = value file merged under the flags")
    common.add_argument("--abs-tol", type=float, default=None)
    common.add_argument("--rel-tol", type=float, default=None)

    p = argparse.ArgumentParser(prog="powext", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("norming", parents=[common], help="b, c, d and log n")
    s.add_argument("--t", type=float, required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--n", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--log-n", type=float)

    s = sub.add_parser("gumbel-moments", parents=[common], help="Gumbel raw moments")
    s.add_argument("--rmax", type=_positive_int, default=6)

    s = sub.add_parser("kernels", parents=[common], help="expansion kernels at (t, x)")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--x", type=_floats, required=True)

    s = sub.add_parser("moments", parents=[common], help="exact moments by quadrature")
    s.add_argument("--t", type=float, required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--b", type=float)
    g.add_argument("--n", type=float)
    s.add_argument("--rmax", type=_positive_int, default=4)

    s = sub.add_parser("mc-check", parents=[common], help="Monte Carlo vs quadrature")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--reps", type=_positive_int, default=1_000_000)
    s.add_argument("--seed", type=_positive_int, default=42)
    s.add_argument("--rmax", type=_positive_int, default=2)

    for name, helptext in (("verify-theorem", "empirical moment limits"),
                           ("rates", "log-log convergence slope")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--t", type=float, required=True)
        s.add_argument("--r", type=_positive_int, required=True)
        s.add_argument("--grid", type=_floats, default=list(conv.DEFAULT_GRID),
                       help="values of b^2")

    s = sub.add_parser("verify-density", parents=[common], help="density expansion residuals")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--x-list", type=_floats, required=True)
    s.add_argument("--grid", type=_floats, default=list(conv.DEFAULT_GRID))

    s = sub.add_parser("adjudicate", parents=[common], help="which closed form the data support")
    s.add_argument("--t-list", type=_floats, default=[0.5, 1.0, 3.0, 2.0])
    s.add_argument("--r", type=_positive_int, default=1)
    s.add_argument("--grid", type=_floats, default=list(conv.DEFAULT_GRID))
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    # find --config and the subcommand before the full parse, so the file can
    # supply flags the subcommand marks as required
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if not known.config or command is None:
        return parser.parse_args(argv)
    try:
        cfg = read_config(known.config)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    subparser = parser._subparsers._group_actions[0].choices[command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in cfg.items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {command}")
        conv_type = actions[key].type or str
        try:
            defaults[key] = conv_type(raw)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"bad value for config key {key!r}: {raw!r}") from exc
        actions[key].required = False
    subparser.set_defaults(**defaults)
    ns = parser.parse_args(argv)
    # a flag given on the command line displaces config values from its exclusive group
    for group in subparser._mutually_exclusive_groups:
        members = group._group_actions
        given = [a for a in members if any(o in argv or any(x.startswith(o + "=") for x in argv)
                                           for o in a.option_strings)]
        if given:
            for a in members:
                if a not in given and a.dest in defaults:
                    setattr(ns, a.dest, None)
    return ns


def _quad_cfg(ns) -> QuadratureConfig | None:
    if ns.abs_tol is None and ns.rel_tol is None:
        return None
    base = QuadratureConfig()
    return QuadratureConfig(abs_tol=ns.abs_tol or base.abs_tol, rel_tol=ns.rel_tol or base.rel_tol,
                            max_subdivisions=4000)


def _validate(ns) -> None:
    if getattr(ns, "t", None) is not None and not ns.t > 0:
        raise UsageError("--t must be positive")
    if getattr(ns, "r", None) is not None and ns.r < 1:
        raise UsageError("--r must be a positive integer")
    if getattr(ns, "rmax", None) is not None and ns.rmax < 0:
        raise UsageError("--rmax must be non-negative")
    grid = getattr(ns, "grid", None)
    if grid is not None:
        if len(grid) < 4 or any(v <= 1 for v in grid) or any(
                hi <= lo for lo, hi in zip(grid, grid[1:])) or grid[-1] < 100:
            raise UsageError("--grid needs >= 4 increasing b^2 values above 1 with max >= 100")
    if ns.command == "mc-check" and (ns.n < 2 or ns.reps < 10_000 or not 0 <= ns.seed < 2**64):
        raise UsageError("mc-check needs --n >= 2, --reps >= 10000 and a 64-bit seed")


def _scale(ns):
    if getattr(ns, "b", None) is not None:
        return scale_from_b(ns.t, ns.b)
    if getattr(ns, "log_n", None) is not None:
        return scale_from_n(ns.t, log_n=ns.log_n)
    if getattr(ns, "n", None) is not None:
        return scale_from_n(ns.t, ns.n)
    raise UsageError("give one of --n, --b (or --log-n)")


def cmd_norming(ns) -> Table:
    s = _scale(ns)
    return Table(("t", "b", "c", "d", "log_n", "support_left"),
                 [(s.t, s.b, s.c, s.d, s.log_n, s.support_left)])


def cmd_gumbel(ns) -> Table:
    if ns.rmax > 16:
        raise UsageError("--rmax must be at most 16")
    tbl = moment_table(ns.rmax)
    return Table(("r", "m_r"), [(r, tbl.m(r)) for r in range(ns.rmax + 1)])


def cmd_kernels(ns) -> Table:
    rows = []
    for x in ns.x:
        k = kernels(ns.t, x)
        rows.append((ns.t, x, k.kappa1, k.kappa2, k.varpi, k.tau))
    return Table(("t", "x", "kappa1", "kappa2", "varpi", "tau"), rows)


def cmd_moments(ns) -> Table:
    s = _scale(ns)
    cfg = _quad_cfg(ns)
    rows, ok = [], True
    for r in range(ns.rmax + 1):
        est = exact_moment(s, r, cfg)
        ok &= est.converged
        rows.append((s.t, s.b, r, est.value, est.error_bound, est.converged))
    if not ok:
        raise NumericalError("exact_moment: quadrature did not converge")
    return Table(("t", "b", "r", "moment", "error_bound", "converged"), rows)


def cmd_mc(ns) -> Table:
    s = scale_from_n(ns.t, float(ns.n))
    mc = mc_moments(McConfig(n=ns.n, replications=ns.reps, seed=ns.seed, t=ns.t), s, ns.rmax)
    rows, ok = [], True
    for e in mc:
        q = exact_moment(s, e.r, _quad_cfg(ns))
        z = (e.value - q.value) / e.std_error
        passed = abs(z) <= 4.0
        ok &= passed
        rows.append((ns.t, ns.n, e.r, e.value, e.std_error, q.value, z,
                     "pass" if passed else "fail"))
    return Table(("t", "n", "r", "mc_mean", "std_error", "quadrature", "z_score", "verdict"),
                 rows, passed=ok)


def _b_list(grid):
    return [math.sqrt(v) for v in grid]


def theorem_row(rep: conv.VerificationReport) -> tuple:
    return (rep.t, rep.r, rep.sign_detected, rep.L_empirical, rep.L_tau_oracle,
            rep.L_closed_form, rep.rel_dev_emp_vs_oracle, rep.rel_dev_emp_vs_closed,
            rep.rate_slope, f"{rep.verdict}:{rep.matched}")


def cmd_verify_theorem(ns) -> Table:
    rep = conv.verify_theorem(ns.t, ns.r, _b_list(ns.grid), _quad_cfg(ns))
    details = {k: v for k, v in asdict(rep).items() if k != "samples"}
    details["samples"] = [asdict(s) for s in rep.samples]
    return Table(THEOREM_HEADER, [theorem_row(rep)], passed=rep.passed, extra=details)


def cmd_rates(ns) -> Table:
    slope = conv.rate_estimate(ns.t, ns.r, _b_list(ns.grid), _quad_cfg(ns))
    lo, hi = conv._rate_band(ns.t)
    ok = lo <= slope <= hi
    return Table(("t", "r", "slope", "band_low", "band_high", "verdict"),
                 [(ns.t, ns.r, slope, lo, hi, "pass" if ok else "fail")], passed=ok)


def cmd_verify_density(ns) -> Table:
    rep = conv.verify_density(ns.t, ns.x_list, _b_list(ns.grid), _quad_cfg(ns))
    rows = []
    for p in rep.points:
        rows.append((p.t, p.x, p.sign, p.R1_limit, p.varpi, p.rel_dev_R1, p.R2_limit, p.tau,
                     p.rel_dev_R2, "pass" if p.passed() else "fail"))
    ok = rep.signs_consistent and all(p.passed() for p in rep.points)
    return Table(("t", "x", "sign", "R1_limit", "varpi", "dev_R1", "R2_limit", "tau", "dev_R2",
                  "verdict"), rows, passed=ok)


def cmd_adjudicate(ns) -> Table:
    rows = conv.adjudicate(ns.t_list, ns.r, _b_list(ns.grid))
    header = tuple(conv.AdjudicationRow.__dataclass_fields__)
    ok = all(r.sign_conclusive for r in rows)
    return Table(header, [tuple(asdict(r).values()) for r in rows], passed=ok)


COMMANDS = {
    "norming": cmd_norming,
    "gumbel-moments": cmd_gumbel,
    "kernels": cmd_kernels,
    "moments": cmd_moments,
    "mc-check": cmd_mc,
    "verify-theorem": cmd_verify_theorem,
    "rates": cmd_rates,
    "verify-density": cmd_verify_density,
    "adjudicate": cmd_adjudicate,
}


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = _apply_config(parser, argv)
        _validate(ns)
        table = COMMANDS[ns.command](ns)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code else EXIT_OK
    except (UsageError, DomainError, QuantityMismatchError) as exc:
        print(f"powext: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"powext: numerical failure in {argv[0] if argv else '?'}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = table.render(ns.format)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if table.passed else EXIT_FAIL


def main() -> None:
    sys.exit(dispatch())
