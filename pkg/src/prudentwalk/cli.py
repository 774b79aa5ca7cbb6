"""Command-line front end.

Every command prints its JSON report to stdout; with ``--out DIR`` the report
(and, with ``--csv``, a plot-ready CSV) is written to DIR instead. Exit status:
0 success or PASS, 1 computational FAIL, 2 usage error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fourier, laces, montecarlo, series
from ._version import CODE_VERSION
from .cache import ResultCache, config_hash
from .errors import BudgetExceeded, ContractError
from .reports import Report, csv_text
from .walks import DEFAULT_BUDGET, CoeffTable, as_lambda, build_coeff_table, fraction_str

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict

    def canonical(self) -> dict:
        return {"command": self.command, **self.params}

    def digest(self) -> str:
        return config_hash(self.canonical())[:16]


@dataclass
class Outcome:
    report: Report
    csv: str | None = None


# --------------------------------------------------------------------------
# argument parsing


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _real(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _vector(text: str) -> list[float]:
    try:
        return [float(Fraction(t)) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a comma-separated vector: {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", type=Path, help="directory for report files (default: stdout only)")
    common.add_argument("--csv", action="store_true", help="also write a CSV next to the report")
    common.add_argument("--cache-dir", type=Path, help="table cache (default: $PRUDENTWALK_CACHE_DIR)")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="enumeration node budget")

    parser = _Parser(prog="prudentwalk", description="Exact and Monte Carlo tools for weakly prudent walks.")
    parser.add_argument("--version", action="version", version=CODE_VERSION)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_text, *, d=True, lam="exact", n_max=True, z=False):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if d:
            p.add_argument("--d", type=int, required=True)
        if lam == "exact":
            p.add_argument("--lambda", dest="lam", type=_rational, default=Fraction(1))
        elif lam == "real":
            p.add_argument("--lambda", dest="lam", type=_real, default=1.0)
        if n_max:
            p.add_argument("--n-max", type=int, required=True)
        if z:
            p.add_argument("--z", type=_rational, required=True)
        return p

    cmd("enumerate", "exact weighted walk counts")
    p = cmd("pi", "lace-expansion coefficients by direct lace sums")
    p.add_argument("--N-max", type=int)
    p = cmd("verify-identity", "check the two-point recursion exactly")
    p.add_argument("--N-max", type=int)
    cmd("bubble", "truncated bubble diagram", z=True)
    p = cmd("displacement", "truncated displacement diagram", z=True)
    p.add_argument("--k", type=_vector, required=True)
    cmd("mu", "ratio estimates of the connective constant")
    p = cmd("k-constant", "truncated diffusion constant", z=True)
    p = cmd("bound-audit", "audit the N=1,2 diagram bounds", z=True)
    p.add_argument("--N", type=int, choices=(1, 2), required=True)
    p = cmd("fourier", "truncated two-point transform on a grid", z=True)
    p.add_argument("--M", type=int)
    p = cmd("bootstrap", "bootstrap functions f1, f2, f3", z=True)
    p.add_argument("--M", type=int)
    p.add_argument("--pair-M", type=int)
    p = cmd("axis-mass", "axis mass scaling of simple random walk", lam=None, n_max=False)
    p.add_argument("--n", type=_int_list, default=[16, 32, 64, 128, 256])
    p.add_argument("--band", type=float, default=4.0)
    p = cmd("ucd-heuristic", "mutual seeing partial sums", d=False, lam=None, n_max=False)
    p.add_argument("--T", type=int, default=2048)
    p.add_argument("--dims", type=_int_list, default=[4, 5, 6])
    p = cmd("sample", "Monte Carlo estimate of c_n and endpoint moments", lam="real", n_max=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=_vector)
    p = cmd("moments", "diffusive exponent of E|w(n)|^2", lam="real", n_max=False)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="use exact enumeration instead of sampling")
    p.add_argument("--band", type=_vector, help="PASS band for the slope, e.g. 0.9,1.1")
    return parser


# --------------------------------------------------------------------------
# cached tables


class _Tables:
    def __init__(self, cache: ResultCache | None, workers: int, budget: int):
        self.cache, self.workers, self.budget = cache, workers, budget

    def coeff(self, n_max: int, d: int, lam) -> CoeffTable:
        key = {"kind": "CoeffTable", "d": d, "lambda": fraction_str(lam), "n_max": n_max}
        if self.cache:
            hit = self.cache.get(key)
            if hit:
                return CoeffTable.from_json(hit.payload)
        table = build_coeff_table(n_max, d, lam, workers=self.workers, budget=self.budget)
        if self.cache:
            self.cache.put(key, table.to_json())
        return table

    def pi(self, n_max: int, N_max: int, d: int, lam) -> laces.PiTable:
        key = {"kind": "PiTable", "d": d, "lambda": fraction_str(lam), "n_max": n_max, "N_max": N_max}
        if self.cache:
            hit = self.cache.get(key)
            if hit:
                return laces.PiTable.from_json(hit.payload)
        table = laces.pi_table_direct(n_max, N_max, d, lam, workers=self.workers, budget=self.budget)
        if self.cache:
            self.cache.put(key, table.to_json())
        return table


# --------------------------------------------------------------------------
# commands


def _query(tables: _Tables, a) -> series.SeriesQuery:
    return series.SeriesQuery(tables.coeff(a.n_max, a.d, as_lambda(a.lam)), float(a.z))


def _enumerate(a, tables):
    t = tables.coeff(a.n_max, a.d, as_lambda(a.lam))
    header, rows = t.csv_rows()
    rep = Report("enumerate", values={"totals": list(t.totals)}, passed=True)
    return Outcome(rep, csv_text(header, rows))


def _pi(a, tables):
    N_max = a.N_max if a.N_max is not None else a.n_max
    P = tables.pi(a.n_max, N_max, a.d, as_lambda(a.lam))
    by_order: dict = {}
    for (n, N, _x), v in P.entries.items():
        by_order[f"{n},{N}"] = by_order.get(f"{n},{N}", Fraction(0)) + v
    signed: dict = {}
    for (n, _x), v in P.signed().items():
        signed[n] = signed.get(n, Fraction(0)) + v
    rep = Report("pi", values={"sum_x_pi_n_N": dict(sorted(by_order.items())),
                               "sum_x_pi_n": {str(n): signed.get(n, Fraction(0)) for n in range(a.n_max + 1)},
                               "complete": P.complete}, passed=True)
    rows = [[n, N, *x, fraction_str(v)] for (n, N, x), v in sorted(P.entries.items())]
    header = ["n", "N"] + [f"x{i + 1}" for i in range(a.d)] + ["value"]
    return Outcome(rep, csv_text(header, rows))


def _verify(a, tables):
    N_max = a.N_max if a.N_max is not None else a.n_max
    lam = as_lambda(a.lam)
    return Outcome(laces.verify_expansion_identity(tables.coeff(a.n_max, a.d, lam), tables.pi(a.n_max, N_max, a.d, lam)))


def _bubble(a, tables):
    q = _query(tables, a)
    B = series.bubble_truncated(q)
    rep = Report("bubble", values={"value": B.value, "value_times_d": B.value * a.d},
                 witness=list(B.y_witness), tail_allowance=B.tail_allowance, passed=True)
    return Outcome(rep)


def _displacement(a, tables):
    q = _query(tables, a)
    Y = series.displacement_diagram(q, a.k)
    k2 = sum(v * v for v in a.k)
    rep = Report("displacement", values={"value": Y.value, "value_over_k2": Y.value / k2 if k2 else None},
                 witness=list(Y.y_witness), tail_allowance=Y.tail_allowance, passed=True)
    return Outcome(rep)


def _mu(a, tables):
    t = tables.coeff(a.n_max, a.d, as_lambda(a.lam))
    est = series.mu_estimate(t)
    lo, hi = a.d - 1, 2 * a.d - 1
    inside = all(lo <= r <= hi for r in est.ratios) and lo <= est.extrapolated <= hi
    rep = Report("mu", values={"ratios": list(est.ratios), "ratios_float": [float(r) for r in est.ratios],
                               "aitken": list(est.aitken), "extrapolated": est.extrapolated, "interval": [lo, hi]},
                 passed=inside if t.lam == 1 else None)
    return Outcome(rep, csv_text(["n", "ratio"], [[n + 2, float(r)] for n, r in enumerate(est.ratios)]))


def _k_constant(a, tables):
    t = tables.coeff(a.n_max, a.d, as_lambda(a.lam))
    series.SeriesQuery(t, float(a.z))  # safe-region check
    pi = laces.pi_table_via_inversion(t)
    est = series.k_constant_estimate(pi, a.z, a.d)
    vals = {name: getattr(est, name) for name in ("K", "A0", "Kz", "Kz_over_z")}
    vals.update({f"{name}_float": float(v) for name, v in list(vals.items())})
    return Outcome(Report("k-constant", values=vals, passed=True))


def _bound_audit(a, tables):
    lam = as_lambda(a.lam)
    q = series.SeriesQuery(tables.coeff(a.n_max, a.d, lam), float(a.z))
    if q.z > 1 / (4 * a.d):
        raise ContractError(f"z={q.z} exceeds 1/(4d); the audit only runs where tails are rigorously dominated")
    P = tables.pi(a.n_max, a.N, a.d, lam)
    return Outcome(series.bound_audit(q, P, a.N))


def _fourier(a, tables):
    t = tables.coeff(a.n_max, a.d, as_lambda(a.lam))
    grid = fourier.FourierGrid(a.d, a.M) if a.M else fourier.FourierGrid.default(a.d)
    K = grid.points()
    G = fourier.g_hat_truncated(t, float(a.z), K)
    chi = series.susceptibility_truncated(series.SeriesQuery(t, float(a.z))).value
    p = (1 - 1 / chi) / (2 * a.d)
    C = 1.0 / (1.0 - 2 * a.d * p * np.cos(K).mean(axis=1))
    rep = Report("fourier", inputs={"M": grid.M}, values={
        "chi": chi, "p_of_z": p, "g_hat_min": float(G.min()), "g_hat_max": float(G.max()),
        "grid_mean": float(G.mean()), "G_at_origin": series.green_truncated(series.SeriesQuery(t, float(a.z)), (0,) * a.d).value,
    }, passed=True)
    return Outcome(rep, grid.to_csv({"g_hat": G, "c_hat_p": C}))


def _bootstrap(a, tables):
    t = tables.coeff(a.n_max, a.d, as_lambda(a.lam))
    grid = fourier.FourierGrid(a.d, a.M) if a.M else None
    pair = fourier.FourierGrid(a.d, a.pair_M) if a.pair_M else None
    b = fourier.bootstrap_functions(t, float(a.z), grid, pair)
    rep = Report("bootstrap", values={"f1": b.f1, "f2": b.f2, "f3": b.f3, "f": b.f, "p_of_z": b.p_of_z, "chi": b.chi},
                 witness={"f2": list(b.f2_witness), "f3": [list(v) for v in b.f3_witness]}, passed=True)
    return Outcome(rep)


def _axis_mass(a, tables):
    rep = fourier.axis_mass_scaling(a.n, a.d, a.band)
    rows = [[n, rep.values["axis_mass_float"][str(n)], rep.values["scaled"][str(n)]] for n in sorted(set(a.n))]
    return Outcome(rep, csv_text(["n", "axis_mass", "scaled"], rows))


def _ucd(a, tables):
    rep = montecarlo.ucd_heuristic(a.T, a.dims)
    rows = []
    for d, v in rep.values["dimensions"].items():
        rows += [[d, int(t), s] for t, s in v["S_float"].items()]
    return Outcome(rep, csv_text(["d", "T", "S"], rows))


def _sample(a, tables):
    cfg = montecarlo.SamplerConfig(a.d, a.lam, a.n, a.samples, a.seed, a.workers,
                                   k=tuple(a.k) if a.k else None)
    res = montecarlo.rosenbluth_estimate(cfg)
    line = json.loads(res.to_json_line())
    rep = Report("sample", values={k: line[k] for k in ("c_n_hat", "mean_sq_displacement", "char_ratio", "zero_weight")},
                 warnings=list(res.warnings), seed=a.seed, passed=True)
    return Outcome(rep, montecarlo.estimates_csv([res]))


def _moments(a, tables):
    band = tuple(a.band) if a.band else ((0.9, 1.1) if a.lam == 0 else None)
    table = None
    if a.exact:
        table = tables.coeff(max(a.n), a.d, as_lambda(Fraction(a.lam).limit_denominator(10**6)))
    rep = montecarlo.diffusive_exponent(a.n, d=a.d, lam=a.lam if table is None else table.lam, samples=a.samples,
                                        seed=a.seed, workers=a.workers, table=table, band=band)
    v = rep.values
    rows = [[n, m, (v.get("moment_stderr") or [0.0] * len(v["n"]))[i]] for i, (n, m) in enumerate(zip(v["n"], v["moments"]))]
    return Outcome(rep, csv_text(["n", "moment", "stderr"], rows))


COMMANDS = {
    "enumerate": _enumerate,
    "pi": _pi,
    "verify-identity": _verify,
    "bubble": _bubble,
    "displacement": _displacement,
    "mu": _mu,
    "k-constant": _k_constant,
    "bound-audit": _bound_audit,
    "fourier": _fourier,
    "bootstrap": _bootstrap,
    "axis-mass": _axis_mass,
    "ucd-heuristic": _ucd,
    "sample": _sample,
    "moments": _moments,
}

_PLUMBING = {"out", "csv", "cache_dir", "no_cache", "command", "workers", "budget"}


def _config_of(args) -> RunConfig:
    params = {}
    for k, v in sorted(vars(args).items()):
        if k in _PLUMBING:
            continue
        if isinstance(v, Fraction):
            v = fraction_str(v)
        params[k] = v
    return RunConfig(args.command, params)


def emit_report(report: Report, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json())


def _error(kind: str, reason: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "reason": reason}, sort_keys=True) + "\n")
    return code


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _error("usage", str(exc), EXIT_USAGE)
    config = _config_of(args)
    cache = None if args.no_cache else ResultCache.from_env(args.cache_dir)
    tables = _Tables(cache, max(1, args.workers), args.budget)
    try:
        outcome = COMMANDS[args.command](args, tables)
    except BudgetExceeded as exc:
        return _error("budget", str(exc), EXIT_BUDGET)
    except ContractError as exc:
        return _error("usage", str(exc), EXIT_USAGE)
    report = outcome.report
    report.inputs = {**config.canonical(), **report.inputs, "config_hash": config.digest()}
    if args.out:
        emit_report(report, args.out / f"{args.command}.json")
        if args.csv and outcome.csv is not None:
            (args.out / f"{args.command}.csv").write_text(outcome.csv)
    else:
        sys.stdout.write(report.to_json())
    return EXIT_FAIL if report.passed is False else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
