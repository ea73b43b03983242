"""Command-line front end: ``python -m rellich <subcommand> [flags]``.

Every subcommand writes CSV (default) or JSON to stdout or ``--output``.
Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import tomli

from . import constants as cc
from .constants import format_value
from .errors import InvalidInput, NumericalFailure
from .geometry import ConeGeometry
from .log_remainder import (
    LogGrid,
    corollary_constants,
    hardy_halfline,
    navier_constant,
    sharpness_scan,
    verify_manifest,
)
from .quotients import (
    MinimizingSequenceParams,
    ModeProblem1D,
    m_dirichlet_discrete,
    m_navier_discrete,
    minimizing_sequence_quotient,
    mode_quotient_infimum,
)
from .spectrum import SturmLiouvilleGrid, find_theta_star, first_eigenvalue, geometry_spectrum

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

FIGURES = {
    "mu2-alpha": ("alpha", "-6", "10", "0.05"),
    "arc-theta": ("theta", "0.05", repr(math.pi - 0.05), "0.005"),
}


@dataclass
class Output:
    """A CSV table plus the JSON payload for the same result."""

    header: Sequence[str]
    rows: list[Sequence[Any]]
    payload: dict
    failed: bool = False

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.payload, indent=2, allow_nan=False) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows([[_cell(x) for x in row] for row in self.rows])
        return buf.getvalue()


def _cell(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if not math.isfinite(x):
            raise NumericalFailure("non-finite value in output")
        return format_value(x)
    return str(x)


def _payload(inputs: dict, value_key: str, value: Any, method: str, grid: dict, trail: Sequence[float] = ()) -> dict:
    return {
        "inputs": inputs,
        value_key: value,
        "method": method,
        "grid": grid,
        "refinement_trail": list(trail),
    }


def _geometry(a: argparse.Namespace) -> ConeGeometry:
    if a.shape == "cap":
        if a.theta is None:
            raise InvalidInput("--shape cap needs --theta")
        return ConeGeometry.cap(a.n, a.theta)
    return ConeGeometry(a.n, a.shape)


def _geo_inputs(a: argparse.Namespace) -> dict:
    return {"n": a.n, "shape": a.shape, "theta": a.theta}


def _sl_grid(a) -> dict:
    return {"nodes": a.nodes, "ell_max": a.ell_max, "j_max": a.j_max}


# -- subcommands ---------------------------------------------------------------


def cmd_constant(a) -> Output:
    d = a.domain
    inputs = {"n": a.n, "alpha": a.alpha, "domain": d}
    grid: dict = {}
    trail: Sequence[float] = ()
    if d == "whole":
        v, method = cc.mu_whole_space(a.n, a.alpha), "closed form, min over k >= 0"
    elif d == "halfspace":
        v, method = cc.mu_halfspace_navier(a.n, a.alpha), "closed form, min over k >= 1"
    elif d == "radial":
        v, method = cc.mu_radial(a.n, a.alpha), "gamma squared"
    elif d == "nonradial":
        v, method = cc.mu_nonradial(a.n, a.alpha), "closed form, min over k >= 1"
    elif d == "arc":
        if a.theta is None:
            raise InvalidInput("--domain arc needs --theta")
        inputs["theta"] = a.theta
        v, method = cc.arc_mu_navier(a.theta, a.alpha), "distance to the arc spectrum"
    elif d == "cone":
        geo = _geometry(a)
        inputs.update(_geo_inputs(a), bc=a.bc)
        g = cc.gamma(a.n, a.alpha)
        grid = _sl_grid(a)
        if a.bc == "dirichlet" and geo.is_proper:
            r = m_dirichlet_discrete(geo, g, a.nodes, a.ell_max)
            v, trail, method = r.value, r.trail, "clamped angular quotient (lower estimate)"
        else:
            v = navier_constant(geo, a.alpha, SturmLiouvilleGrid(a.nodes))
            method = "distance to the angular spectrum"
    else:
        raise InvalidInput(f"unknown domain {d!r}")
    return Output(
        ["n", "alpha", "domain", "value"],
        [[a.n, a.alpha, d, float(v)]],
        _payload(inputs, "value", float(v), method, grid, trail),
    )


def cmd_spectrum(a) -> Output:
    geo = _geometry(a)
    spec = geometry_spectrum(geo, a.count, a.ell_max, a.j_max, SturmLiouvilleGrid(a.nodes))
    # numeric caps list every certified eigenvalue; keep the lowest ``count``
    entries = spec.entries[: a.count]
    rows = [[i, e.value, e.ell, e.j, e.multiplicity] for i, e in enumerate(entries)]
    values = [{"value": e.value, "ell": e.ell, "j": e.j, "multiplicity": e.multiplicity} for e in entries]
    numeric = geo.shape == "cap" and geo.n > 2
    payload = _payload(
        {**_geo_inputs(a), "count": a.count},
        "values",
        values,
        "three-point Sturm-Liouville scheme per azimuthal degree" if numeric else "closed form",
        {**_sl_grid(a), "bound": spec.bound} if numeric else {"bound": spec.bound},
    )
    return Output(["index", "value", "ell", "j", "multiplicity"], rows, payload)


def _table_output(table: cc.SweepTable, inputs: dict, method: str) -> Output:
    values = [{"param": p, "value": float(v) + 0.0} for p, v in zip(table.points, table.values)]
    return Output(["param", "value"], [list(r) for r in table.rows()], _payload(inputs, "values", values, method, {}))


def cmd_sweep(a) -> Output:
    start, stop, step = a.start, a.stop, a.step
    if None in (start, stop, step):
        raise InvalidInput("sweep needs --from, --to and --step")
    domain = "arc" if a.param == "theta" else a.domain
    t = cc.sweep(a.param, start, stop, step, a.n, a.alpha, domain, not a.no_breakpoints)
    inputs = {"param": a.param, "from": start, "to": stop, "step": step, "n": a.n, "alpha": a.alpha,
              "domain": domain, "breakpoints": not a.no_breakpoints}
    return _table_output(t, inputs, "closed form on a decimal grid")


def cmd_figure(a) -> Output:
    if a.name not in FIGURES:
        raise InvalidInput(f"unknown figure {a.name!r}; choose from {sorted(FIGURES)}")
    param, start, stop, step = FIGURES[a.name]
    start, stop, step = a.start or start, a.stop or stop, a.step or step
    if a.name == "mu2-alpha":
        t = cc.sweep("alpha", start, stop, step, 2, 0.0, "whole", True)
    else:
        t = cc.sweep("theta", start, stop, step, 2, 0.0, "arc", True)
    inputs = {"name": a.name, "from": start, "to": stop, "step": step}
    return _table_output(t, inputs, "closed form on a decimal grid with exact breakpoints merged")


VERIFY_HEADER = [
    "sample", "bc", "kind", "n", "alpha", "mode", "lhs_energy", "mu", "mu_term",
    "log2_coef", "log2_term", "log4_coef", "log4_term", "slack", "holds",
]


def cmd_verify(a) -> Output:
    grid = LogGrid(a.smin, a.smax, a.count)
    bcs = ["navier", "mixed", "dirichlet"] if a.bc == "all" else [a.bc]
    rows, values = [], []
    ok = True
    for bc in bcs:
        for i, (smp, ball, ext) in enumerate(verify_manifest(bc, a.samples, a.seed, grid)):
            for rep in (ball, ext):
                ok &= rep.holds
                rows.append([i, bc, rep.kind, smp.n, smp.alpha, smp.mode, rep.lhs_energy, rep.mu,
                             rep.mu_term, rep.log2_coef, rep.log2_term, rep.log4_coef, rep.log4_term,
                             rep.slack, rep.holds])
                values.append({"sample": i, "bc": bc, "kind": rep.kind, "n": smp.n, "alpha": smp.alpha,
                               "mode": smp.mode, "profile": smp.profile, "lhs_energy": rep.lhs_energy,
                               "mu": rep.mu, "mu_term": rep.mu_term, "log2_term": rep.log2_term,
                               "log4_term": rep.log4_term, "slack": rep.slack, "holds": rep.holds})
    return Output(
        VERIFY_HEADER,
        rows,
        _payload({"bc": a.bc, "samples": a.samples, "seed": a.seed}, "values", values,
                 "cylinder mode sums, midpoint rule on log cells",
                 {"smin": a.smin, "smax": a.smax, "count": a.count}),
        failed=not ok,
    )


def cmd_hardy1d(a) -> Output:
    r = hardy_halfline(a.order, LogGrid(a.smin, a.smax, a.count), a.steps)
    target = 0.25 if a.order == 1 else 9 / 16
    rows = [[k, v] for k, v in enumerate(r.trail)]
    payload = _payload({"order": a.order, "target": target}, "value", r.value,
                       "log-grid generalised eigenproblem, shift-invert Lanczos", r.grid, r.trail)
    return Output(["step", "value"], rows, payload)


def cmd_quotient(a) -> Output:
    g = cc.gamma(a.n, a.alpha) if a.gamma is None else a.gamma
    inputs = {**_geo_inputs(a), "alpha": a.alpha, "gamma": g, "kind": a.kind}
    if a.kind in ("navier", "dirichlet"):
        geo = _geometry(a)
        f = m_navier_discrete if a.kind == "navier" else m_dirichlet_discrete
        r = f(geo, g, a.nodes, a.ell_max)
        method = "tridiagonal eigenvalues" if a.kind == "navier" else "rank-one secular equation"
        payload = _payload(inputs, "value", r.value, method, {**r.grid, "mode": r.mode}, r.trail)
        return Output(["level", "value"], [[k, v] for k, v in enumerate(r.trail)], payload)
    if a.kind == "mode":
        gb = cc.gamma_bar(a.n, a.alpha)
        interval = "half" if a.endpoint != "none" else "full"
        r = mode_quotient_infimum(ModeProblem1D(a.lam, g, gb, interval, a.endpoint, a.S, a.nodes))
        inputs.update(lam=a.lam, endpoint=a.endpoint)
        payload = _payload(inputs, "value", r.value, "banded fourth-order pencil", r.grid, r.trail)
        return Output(["level", "value"], [[k, v] for k, v in enumerate(r.trail)], payload)
    if a.kind == "minseq":
        geo = _geometry(a)
        v = minimizing_sequence_quotient(MinimizingSequenceParams(a.t), geo, a.alpha)
        inputs["t"] = a.t
        payload = _payload(inputs, "value", v, "closed-form scaled quotient", {})
        return Output(["t", "value"], [[a.t, v]], payload)
    raise InvalidInput(f"unknown quotient kind {a.kind!r}")


def cmd_theta_star(a) -> Output:
    trail = []
    for nodes in (max(a.nodes // 2, 16), a.nodes):
        trail.append(find_theta_star(a.n, a.target, SturmLiouvilleGrid(nodes)))
    theta = trail[-1]
    resid = first_eigenvalue(ConeGeometry.cap(a.n, theta), SturmLiouvilleGrid(a.nodes)) - a.target
    payload = _payload({"n": a.n, "target": a.target}, "value", theta,
                       "Brent root of the first cap eigenvalue", {"nodes": a.nodes, "residual": resid}, trail)
    return Output(["n", "target", "theta", "residual"], [[a.n, a.target, theta, resid]], payload)


def cmd_sharpness(a) -> Output:
    geo = _geometry(a)
    grid = LogGrid(a.scan_smin, a.scan_smax, a.scan_count)
    sc = sharpness_scan(geo, a.alpha, a.t, grid, a.nodes)
    rows = [[p.t, p.a_bound, p.b_bound] for p in sc.points]
    values = {
        "a_target": sc.a_target,
        "b_target": sc.b_target,
        "a_limit": sc.a_limit,
        "b_limit": sc.b_limit,
        "points": [{"t": p.t, "a_bound": p.a_bound, "b_bound": p.b_bound} for p in sc.points],
    }
    payload = _payload({**_geo_inputs(a), "alpha": a.alpha, "t": list(a.t)}, "values", values,
                       "clamped half-line pencils on a log grid",
                       {"smin": grid.smin, "smax": grid.smax, "count": grid.count})
    return Output(["t", "a_bound", "b_bound"], rows, payload)


def cmd_corollary(a) -> Output:
    c = corollary_constants(a.n, a.alpha)
    payload = _payload({"n": a.n, "alpha": a.alpha}, "values",
                       {"mu": c.mu, "log2": c.log2, "log4": c.log4}, "closed form", {})
    return Output(["n", "mu", "log2", "log4"], [[a.n, c.mu, c.log2, c.log4]], payload)


# -- parser --------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--shape", choices=["full", "half", "cap"], default="half")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--bc", default="navier")
    p.add_argument("--nodes", type=int, default=4000)
    p.add_argument("--ell-max", type=int, default=8)
    p.add_argument("--j-max", type=int, default=5)
    p.add_argument("--S", type=float, default=40.0)
    p.add_argument("--smin", type=float, default=1e-4)
    p.add_argument("--smax", type=float, default=1e4)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--config", default=None, help="TOML file of key = value defaults")
    p.add_argument("--output", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rellich", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        _common(p)
        p.set_defaults(func=func)
        return p

    p = add("constant", cmd_constant, "best constant on a cone")
    p.add_argument("--domain", choices=["whole", "halfspace", "radial", "nonradial", "arc", "cone"], default="whole")

    p = add("spectrum", cmd_spectrum, "Dirichlet Laplace-Beltrami spectrum")

    for name, func, hlp in (("sweep", cmd_sweep, "tabulate a constant"), ("figure", cmd_figure, "figure data")):
        p = add(name, func, hlp)
        p.add_argument("--from", dest="start", default=None)
        p.add_argument("--to", dest="stop", default=None)
        p.add_argument("--step", default=None)
        if name == "sweep":
            p.add_argument("--param", choices=["alpha", "theta"], default="alpha")
            p.add_argument("--domain", choices=["whole", "halfspace", "radial", "nonradial"], default="whole")
            p.add_argument("--no-breakpoints", action="store_true")
        else:
            p.add_argument("--name", required=True)

    p = add("verify", cmd_verify, "logarithmic remainder manifest")
    p.add_argument("--samples", type=int, default=20)
    p.set_defaults(bc="all")

    p = add("hardy1d", cmd_hardy1d, "discrete half-line Hardy constants")
    p.add_argument("--order", type=int, choices=[1, 2], default=1)
    p.add_argument("--steps", type=int, default=3)

    p = add("quotient", cmd_quotient, "discrete Rayleigh quotients")
    p.add_argument("--kind", choices=["navier", "dirichlet", "mode", "minseq"], default="navier")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--endpoint", choices=["none", "dirichlet", "clamped"], default="none")
    p.add_argument("--t", type=float, default=1e-2)

    p = add("theta-star", cmd_theta_star, "cap radius with a prescribed first eigenvalue")
    p.add_argument("--target", type=float, default=0.75)

    p = add("sharpness", cmd_sharpness, "upper bounds on the remainder coefficients")
    p.add_argument("--t", type=float, nargs="+", default=[1e-4, 1e-3, 1e3, 1e4])
    p.add_argument("--scan-smin", type=float, default=1e-16)
    p.add_argument("--scan-smax", type=float, default=1e16)
    p.add_argument("--scan-count", type=int, default=16384)

    add("corollary", cmd_corollary, "explicit constants for alpha = 0")
    return parser


COUNT_DEFAULTS = {"spectrum": 12, "verify": 4096, "hardy1d": 4096}


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise InvalidInput(f"bad config {path}: {exc}") from exc
    return {k.replace("-", "_"): v for k, v in data.items()}


def _validate(a: argparse.Namespace) -> None:
    if a.nodes < 16:
        raise InvalidInput("--nodes must be at least 16")
    if a.ell_max < 0 or a.j_max < 1:
        raise InvalidInput("--ell-max must be >= 0 and --j-max >= 1")
    if not (a.S > 0 and a.smin > 0 and a.smax > a.smin):
        raise InvalidInput("need --S > 0 and 0 < --smin < --smax")
    if a.count is not None and a.count < 1:
        raise InvalidInput("--count must be positive")
    for x in (a.alpha, a.S, a.smin, a.smax) + ((a.theta,) if a.theta is not None else ()):
        if not math.isfinite(x):
            raise InvalidInput("numeric flags must be finite")
    allowed = ("navier", "mixed", "dirichlet") + (("all",) if a.command == "verify" else ())
    if a.bc not in allowed:
        raise InvalidInput(f"--bc must be one of {allowed}")


def parse(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = _load_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]  # type: ignore[union-attr]
        known = {act.dest for act in sub._actions}
        unknown = sorted(set(cfg) - known - {"config", "func"})
        if unknown:
            raise InvalidInput(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    if args.count is None:
        args.count = COUNT_DEFAULTS.get(args.command, 4096)
    return args


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
        _validate(args)
        out = args.func(args)
        text = out.render(args.format)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalFailure, ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_NUMERIC if out.failed else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
