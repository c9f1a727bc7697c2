"""Command-line front end: ``compute``, ``verify``, ``sweep`` and ``figures``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical integrity error.
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import closed_forms as cf
from . import figures as figs
from . import genfun as gf
from . import grover2d as g2
from . import verify as vf
from .errors import (BranchError, ConfigurationError, EnumerationBudgetError, IntegrityError,
                     PoleError, QWalkError)
from .hadamard import ContourSpec, hadamard_at_one
from .parallel import pmap
from .walk import CLOSED_FORM, HADAMARD, SIMULATION, CoinSpec, classical_absorption

WALK_CHOICES = ("classical", "two-state", "grover3", "grover2d")
METHODS = (CLOSED_FORM, HADAMARD, SIMULATION)
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_INTEGRITY = 0, 1, 2, 3


# --------------------------------------------------------------------------- #
#                               Compute                                       #
# --------------------------------------------------------------------------- #


@dataclass
class Query:
    walk: str
    m: int
    n: Optional[int] = None
    coin: Optional[CoinSpec] = None
    amplitudes: Tuple[complex, ...] = ()
    p: Optional[float] = None
    max_steps: Optional[int] = None
    residual_tol: float = 1e-12
    nodes: Optional[int] = None


@dataclass
class MethodResult:
    method: str
    value: float
    residual: float
    note: str = ""


@dataclass
class ComputeResult:
    query: Query
    results: List[MethodResult]
    skipped: Dict[str, str] = field(default_factory=dict)

    @property
    def max_deviation(self) -> float:
        vals = [r.value for r in self.results]
        return max(vals) - min(vals) if len(vals) > 1 else 0.0


class Unavailable(Exception):
    """A method that has no implementation for this query."""


def parse_n(text) -> Optional[int]:
    if text is None:
        return None
    if isinstance(text, (int, np.integer)):
        return int(text)
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "none", "semi"):
        return None
    try:
        return int(s)
    except ValueError as exc:
        raise ConfigurationError(f"n must be an integer or 'inf', got {text!r}") from exc


def parse_coin(spec, phase_a: float = 0.0, phase_b: float = 0.0) -> CoinSpec:
    """``hadamard`` or a weight ``|a|^2`` in (0, 1)."""
    if isinstance(spec, CoinSpec):
        return spec
    s = str(spec).strip().lower()
    if s == "hadamard":
        return CoinSpec.hadamard()
    try:
        w = float(s)
    except ValueError as exc:
        raise ConfigurationError(f"coin must be 'hadamard' or a weight |a|^2, got {spec!r}") from exc
    if not 0 < w < 1:
        raise ConfigurationError(f"coin weight must lie in (0, 1), got {w}")
    return CoinSpec.from_weight(w, phase_a, phase_b)


def parse_amplitudes(spec, size: int) -> Tuple[complex, ...]:
    if spec is None:
        return (1.0,) + (0.0,) * (size - 1)
    parts = spec if isinstance(spec, (list, tuple)) else str(spec).split(",")
    try:
        amps = tuple(complex(str(p).replace(" ", "")) for p in parts)
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse amplitudes {spec!r}") from exc
    if len(amps) != size:
        raise ConfigurationError(f"expected {size} amplitudes, got {len(amps)}")
    if abs(sum(abs(a) ** 2 for a in amps) - 1) > 1e-9:
        raise ConfigurationError("amplitudes must have unit norm")
    return amps


def _contour(q: Query, semi: bool, n: Optional[int] = None) -> ContourSpec:
    base = ContourSpec.semi_infinite() if semi else ContourSpec.finite_for(n)
    if q.nodes is None:
        return base
    if q.nodes < base.nodes:
        return ContourSpec(base.radius, q.nodes, 0)
    return ContourSpec(base.radius, base.nodes, int(math.log2(q.nodes // base.nodes)))


def _combined_hadamard(handles, amps, contour, tol) -> Tuple[float, float]:
    """``sum_t |sum_i a_i f_i,t|^2`` for handles ``f_i`` and weights ``a_i``."""
    fs = [(a, h.evaluator(), h.evaluator(True)) for a, h in zip(amps, handles) if a != 0]
    f = lambda w: sum(a * fn(w) for a, fn, _ in fs)
    g = lambda w: sum(np.conj(a) * cr(w) for a, _, cr in fs)
    res = hadamard_at_one(f, g, contour, tol)
    return res.value, res.error


def _classical(q: Query, method: str) -> MethodResult:
    if method == CLOSED_FORM:
        return MethodResult(method, cf.classical_closed(q.p, 1 - q.p, q.m, q.n), 0.0)
    if method == SIMULATION:
        return MethodResult(method, classical_absorption(q.p, 1 - q.p, q.m, q.n), 0.0,
                            "absorbing Markov chain")
    raise Unavailable("classical walk has no generating-function evaluation")


def _two_state(q: Query, method: str) -> MethodResult:
    alpha, beta = q.amplitudes
    if method == CLOSED_FORM:
        if q.n is None:
            return MethodResult(method, cf.two_state_semi_probability(q.coin, alpha, beta), 0.0)
        aq = cf.AbsorptionQuery("two-state", q.m, q.n, q.amplitudes, q.coin)
        return MethodResult(method, cf.two_state_finite_closed(aq)[0], 0.0)
    if method == HADAMARD:
        walk = "two-state-semi" if q.n is None else "two-state-finite"
        hs = [gf.GenFunHandle(walk, c, q.m, q.n, q.coin) for c in "rl"]
        tol = 1e-6 if q.n is None else 1e-10
        v, e = _combined_hadamard(hs, (alpha, beta), _contour(q, q.n is None, q.n), tol)
        return MethodResult(method, v, e)
    rep = vf.simulate_line(q.coin, q.amplitudes, q.m, q.n,
                           max_steps=q.max_steps or (2000 if q.n is None else 20000),
                           residual_tol=q.residual_tol)
    return MethodResult(method, rep.probability, rep.residual_mass, f"{rep.steps_run} steps")


def _grover3(q: Query, method: str) -> MethodResult:
    ar, as_, al = q.amplitudes
    pure_r = as_ == 0 and al == 0 and abs(abs(ar) - 1) < 1e-12
    if method == CLOSED_FORM:
        if not pure_r:
            raise Unavailable("closed form covers the (1,0,0) start only")
        if q.n is None:
            if q.m != 1:
                raise Unavailable("semi-infinite closed form covers m = 1 only")
            return MethodResult(method, cf.grover3_semi_closed(), 0.0)
        return MethodResult(method, cf.grover3_finite_closed(q.m, q.n), 0.0)
    if method == HADAMARD:
        if q.n is None:
            hs = [gf.GenFunHandle("grover3-semi", c, q.m) for c in "rsl"]
            amps, tol = (ar, as_, al), 1e-6
        else:
            if as_ != 0:
                raise Unavailable("finite generating functions cover R and L starts only")
            hs = [gf.GenFunHandle("grover3-finite", c, q.m, q.n) for c in "rl"]
            amps, tol = (ar, al), 1e-10
        v, e = _combined_hadamard(hs, amps, _contour(q, q.n is None, q.n), tol)
        return MethodResult(method, v, e)
    rep = vf.simulate_line(CoinSpec.grover3(), q.amplitudes, q.m, q.n,
                           max_steps=q.max_steps or (2000 if q.n is None else 20000),
                           residual_tol=q.residual_tol)
    note = f"{rep.steps_run} steps"
    if not rep.converged or rep.residual_mass > q.residual_tol:
        note += "; stopped on stall, remaining mass is localized or escaping"
    return MethodResult(method, rep.probability, rep.residual_mass, note)


def _grover2d(q: Query, method: str) -> MethodResult:
    if method == CLOSED_FORM:
        raise Unavailable("no closed value in two dimensions")
    if method == HADAMARD:
        if q.n is None:
            est = g2.wall_absorption_semi(q.m)
        else:
            if q.m != 1:
                raise Unavailable("finite-wall generating function covers m = 1 only")
            est = g2.wall_absorption_finite(q.n)
        return MethodResult(method, est.value, est.error, "momentum method")
    rep = g2.simulate_wall(q.m, q.n, steps=q.max_steps or 600)
    return MethodResult(method, rep.probability, rep.residual_mass,
                        f"{rep.steps_run} steps, periodic width 121")


_DISPATCH: Dict[str, Callable[[Query, str], MethodResult]] = {
    "classical": _classical, "two-state": _two_state, "grover3": _grover3, "grover2d": _grover2d,
}


def build_query(walk: str, m: int, n=None, coin=None, amplitudes=None, p=None,
                phase_a: float = 0.0, phase_b: float = 0.0, max_steps=None,
                residual_tol: float = 1e-12, nodes=None) -> Query:
    """Validate raw parameters into a :class:`Query`."""
    if walk not in WALK_CHOICES:
        raise ConfigurationError(f"walk must be one of {WALK_CHOICES}, got {walk!r}")
    n = parse_n(n)
    m = int(m)
    if m < 1 or (n is not None and m >= n):
        raise ConfigurationError(f"need 1 <= m < n, got m={m}, n={n}")
    if nodes is not None and (nodes < 64 or nodes & (nodes - 1)):
        raise ConfigurationError("nodes must be a power of two >= 64")
    q = Query(walk, m, n, max_steps=max_steps, residual_tol=residual_tol, nodes=nodes)
    if walk == "classical":
        if p is None or not 0 < float(p) < 1:
            raise ConfigurationError("classical walk needs 0 < p < 1")
        q.p = float(p)
    elif walk == "two-state":
        q.coin = parse_coin(coin if coin is not None else "hadamard", phase_a, phase_b)
        q.amplitudes = parse_amplitudes(amplitudes, 2)
    elif walk == "grover3":
        q.amplitudes = parse_amplitudes(amplitudes, 3)
    elif amplitudes is not None:
        raise ConfigurationError("grover2d starts along S+1; amplitudes are not configurable")
    return q


def compute(q: Query, method: str = "all") -> ComputeResult:
    """Run one method, or every available one with ``method='all'``."""
    if method not in METHODS + ("all",):
        raise ConfigurationError(f"method must be one of {METHODS + ('all',)}, got {method!r}")
    fn = _DISPATCH[q.walk]
    out = ComputeResult(q, [])
    for meth in (METHODS if method == "all" else (method,)):
        try:
            out.results.append(fn(q, meth))
        except Unavailable as exc:
            if method != "all":
                raise ConfigurationError(f"{meth} unavailable: {exc}") from exc
            out.skipped[meth] = str(exc)
    return out


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def render_compute(res: ComputeResult, fmt: str) -> str:
    if fmt == "json-lines":
        lines = [json.dumps({"method": r.method, "value": r.value, "residual": r.residual,
                             "note": r.note}) for r in res.results]
        lines += [json.dumps({"method": k, "skipped": v}) for k, v in res.skipped.items()]
        if len(res.results) > 1:
            lines.append(json.dumps({"max_deviation": res.max_deviation}))
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        lines = ["value,method,residual"]
        lines += [f"{_fmt(r.value)},{r.method},{_fmt(r.residual)}" for r in res.results]
        return "\n".join(lines) + "\n"
    lines = [f"{'method':<12} {'value':<22} {'residual':<10} note"]
    for r in res.results:
        lines.append(f"{r.method:<12} {r.value:<22.15g} {r.residual:<10.2e} {r.note}")
    for k, v in res.skipped.items():
        lines.append(f"{k:<12} {'-':<22} {'-':<10} skipped: {v}")
    if len(res.results) > 1:
        lines.append(f"max deviation {res.max_deviation:.3e}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- #
#                                 Sweep                                       #
# --------------------------------------------------------------------------- #

SWEEP_PARAMS = ("m", "n", "p", "coin")


def parse_vary(spec: str) -> Tuple[str, List]:
    """``name=a:b`` (inclusive integer range), ``name=a:b:step`` or ``name=v1,v2``."""
    if "=" not in spec:
        raise ConfigurationError(f"--vary expects name=values, got {spec!r}")
    name, vals = spec.split("=", 1)
    name = name.strip()
    if name not in SWEEP_PARAMS:
        raise ConfigurationError(f"cannot vary {name!r}; choose from {SWEEP_PARAMS}")
    try:
        if ":" in vals:
            parts = [int(x) for x in vals.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            step = parts[2] if len(parts) == 3 else 1
            values = list(range(parts[0], parts[1] + 1, step))
        elif name in ("m", "n"):
            values = [int(x) if x.strip().lower() != "inf" else "inf" for x in vals.split(",")]
        elif name == "coin":
            values = [x.strip() for x in vals.split(",")]
        else:
            values = [float(x) for x in vals.split(",")]
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse values in {spec!r}") from exc
    if not values:
        raise ConfigurationError(f"empty value list in {spec!r}")
    return name, values


def sweep(base: Dict, varies: Sequence[Tuple[str, List]], method: str) -> str:
    """CSV over the Cartesian product of the varied parameters."""
    names = [n for n, _ in varies]
    grid = list(itertools.product(*[v for _, v in varies]))
    queries = []
    for point in grid:
        kw = dict(base)
        kw.update(zip(names, point))
        queries.append(build_query(**kw))
    results = pmap(lambda q: compute(q, method), queries)
    lines = [",".join(names + ["value", "method", "residual"])]
    for point, res in zip(grid, results):
        key = [p if isinstance(p, str) else figs.fmt(float(p)) if isinstance(p, float) else str(p)
               for p in point]
        for r in res.results:
            lines.append(",".join(key + [_fmt(r.value), r.method, _fmt(r.residual)]))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- #
#                                 Parser                                      #
# --------------------------------------------------------------------------- #


def _add_query_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--walk", choices=WALK_CHOICES, default="two-state")
    p.add_argument("--coin", default=None, help="'hadamard' or |a|^2 (two-state walk)")
    p.add_argument("--phase-a", type=float, default=0.0)
    p.add_argument("--phase-b", type=float, default=0.0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", default="inf", help="right absorber, or 'inf'")
    p.add_argument("--amplitudes", default=None, help="comma-separated internal state, e.g. 1,0")
    p.add_argument("--p", type=float, default=None, help="classical step-right probability")
    p.add_argument("--method", choices=METHODS + ("all",), default="all")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--residual-tol", type=float, default=1e-12)
    p.add_argument("--nodes", type=int, default=None, help="maximum quadrature nodes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwalk", description="Absorption probabilities of "
                                     "quantum and classical walks with absorbing boundaries.")
    parser.add_argument("--config", default=None, help="JSON file of option values")
    sub = parser.add_subparsers(dest="command")

    c = sub.add_parser("compute", help="one absorption probability by one or all methods")
    _add_query_args(c)
    c.add_argument("--format", choices=("table", "json-lines", "csv"), default="table")
    c.add_argument("--output", default=None)

    v = sub.add_parser("verify", help="run verification suites, JSON-lines log")
    v.add_argument("--suite", choices=("all",) + vf.SUITES, default="all")
    v.add_argument("--output", default=None)

    s = sub.add_parser("sweep", help="CSV over a parameter grid")
    _add_query_args(s)
    s.add_argument("--vary", action="append", default=[],
                   help="name=a:b or name=v1,v2 for name in m, n, p, coin (repeatable)")
    s.add_argument("--output", default=None)

    f = sub.add_parser("figures", help="CSV and SVG data for the figures")
    f.add_argument("--which", nargs="+", choices=("all",) + figs.FIGURES, default=["all"])
    f.add_argument("--outdir", default="figures")
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def load_config(path: str) -> Dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object")
    return data


def apply_config(parser: argparse.ArgumentParser, argv: List[str], config: Dict) -> argparse.Namespace:
    """Config values become defaults of the chosen subcommand; flags override
    them; unknown keys are rejected."""
    config = dict(config)
    cmd = config.pop("command", None)
    first = parser.parse_known_args(argv)[0]
    command = first.command or cmd
    if command is None:
        raise ConfigurationError("no command given on the command line or in the config")
    if first.command is None:
        # global options stay ahead of the inserted subcommand
        argv = _split_globals(argv) + [command] + _split_rest(argv)
    sp = _subparser(parser, command)
    known = {a.dest for a in sp._actions if a.dest != "help"}
    norm = {k.replace("-", "_"): v for k, v in config.items()}
    unknown = sorted(set(norm) - known)
    if unknown:
        raise ConfigurationError(f"unknown config keys for {command}: {', '.join(unknown)}")
    sp.set_defaults(**norm)
    return parser.parse_args(argv)


def _split_globals(args: List[str]) -> List[str]:
    out, i = [], 0
    while i < len(args):
        if args[i] == "--config":
            out += args[i:i + 2]
            i += 2
        elif args[i].startswith("--config="):
            out.append(args[i])
            i += 1
        else:
            i += 1
    return out


def _split_rest(args: List[str]) -> List[str]:
    out, i = [], 0
    while i < len(args):
        if args[i] == "--config":
            i += 2
        elif args[i].startswith("--config="):
            i += 1
        else:
            out.append(args[i])
            i += 1
    return out


def _query_kwargs(ns: argparse.Namespace) -> Dict:
    return dict(walk=ns.walk, m=ns.m, n=ns.n, coin=ns.coin, amplitudes=ns.amplitudes, p=ns.p,
                phase_a=ns.phase_a, phase_b=ns.phase_b, max_steps=ns.max_steps,
                residual_tol=ns.residual_tol, nodes=ns.nodes)


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {path}: {exc}") from exc


def run(ns: argparse.Namespace) -> int:
    if ns.command == "compute":
        res = compute(build_query(**_query_kwargs(ns)), ns.method)
        _emit(render_compute(res, ns.format), ns.output)
        return EXIT_OK
    if ns.command == "verify":
        names = vf.SUITES if ns.suite == "all" else (ns.suite,)
        records = vf.run_suites(names)
        lines = [json.dumps(r.to_json()) for r in records]
        failed = [r for r in records if not r.passed]
        lines.append(json.dumps({"summary": True, "records": len(records), "failed": len(failed)}))
        _emit("\n".join(lines) + "\n", ns.output)
        return EXIT_VERIFY if failed else EXIT_OK
    if ns.command == "sweep":
        if not ns.vary:
            raise ConfigurationError("sweep needs at least one --vary")
        varies = [parse_vary(v) for v in ns.vary]
        base = _query_kwargs(ns)
        _emit(sweep(base, varies, ns.method), ns.output)
        return EXIT_OK
    if ns.command == "figures":
        which = figs.FIGURES if "all" in ns.which else tuple(dict.fromkeys(ns.which))
        for name in which:
            for path in figs.write_figure(name, ns.outdir):
                print(path)
        return EXIT_OK
    raise ConfigurationError("no command given")


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        first = parser.parse_known_args(argv)[0]
        if first.config is not None:
            ns = apply_config(parser, argv, load_config(first.config))
        else:
            ns = parser.parse_args(argv)
            if ns.command is None:
                parser.print_help(sys.stderr)
                return EXIT_CONFIG
        return run(ns)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG
    except (ConfigurationError, EnumerationBudgetError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrityError, PoleError, BranchError) as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except QWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
