"""Command-line interface: ``evlab <subcommand> ...``.

Exit codes: 0 success, 1 a verification failed, 2 usage or input error.
Tabular output is CSV with a header row and LF line endings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from ._accel import backend_name
from .config import ConfigurationError, all_configurations, from_blocks, parse
from .drift import DRIFT_CSV_HEADER, FORMULAS, drift_reports, rational_grid
from .kernel import Params, exact_number, parse_number
from .lyapunov import inequality_audit

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_EXHAUSTIVE_SIZE = 16


class UsageError(Exception):
    pass


def _write_text(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


def _config(text: str):
    try:
        return parse(text)
    except ConfigurationError as exc:
        raise UsageError(f"invalid --s0 {text!r}: {exc}") from exc


def _params(beta, p, exact: bool) -> Params:
    conv = exact_number if exact else parse_number
    try:
        return Params(conv(beta), conv(p))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid parameters beta={beta!r}, p={p!r}: {exc}") from exc


def _info(msg: str):
    print(msg, file=sys.stderr)


# --- subcommands -------------------------------------------------------


def drift_check_cmd(args) -> int:
    if args.max_size > MAX_EXHAUSTIVE_SIZE:
        raise UsageError(f"--max-size {args.max_size} exceeds the enumeration guard "
                         f"({MAX_EXHAUSTIVE_SIZE})")
    if (args.beta is None) != (args.p is None):
        raise UsageError("give both --beta and --p, or neither for the full 8x8 grid")
    if args.beta is None:
        grid = [Params(b, q) for b in rational_grid() for q in rational_grid()]
    else:
        grid = [_params(args.beta, args.p, exact=True)]
    names = sorted(FORMULAS) if args.functional == "all" else [args.functional]
    configs = list(all_configurations(args.max_size))
    rows = []
    first_bad = None
    worst = None
    for name in names:
        for rep in drift_reports(configs, grid, name):
            rows.append(rep.csv_row())
            if first_bad is None and not rep.ok(args.tol):
                first_bad = rep
            if worst is None or rep.oracle > worst:
                worst = rep.oracle
    _write_text(args.out, _csv_text(DRIFT_CSV_HEADER, rows))
    _info(f"drift-check: {len(rows)} reports, largest drift {worst}")
    if first_bad is not None:
        _info("first mismatch: " + ",".join(first_bad.csv_row()))
        return EXIT_FAIL
    return EXIT_OK


def audit_cmd(args) -> int:
    if args.s0 is not None:
        configs = [_config(args.s0)]
    else:
        if args.max_size > MAX_EXHAUSTIVE_SIZE:
            raise UsageError(f"--max-size exceeds the enumeration guard ({MAX_EXHAUSTIVE_SIZE})")
        configs = list(all_configurations(args.max_size))
    report = []
    failed = 0
    for S in configs:
        clauses = inequality_audit(S)
        bad = [c for c in clauses if not c.passed]
        failed += bool(bad)
        if args.s0 is not None or bad:
            report.append({"config_blocks": list(S.blocks),
                           "clauses": [c.to_dict() for c in clauses]})
    summary = {"configurations": len(configs), "failing": failed, "details": report}
    _write_text(args.out, json.dumps(summary, indent=2) + "\n")
    return EXIT_FAIL if failed else EXIT_OK


def simulate_cmd(args) -> int:
    from .experiments import SIMULATE_CSV_HEADER, replica_rng, simulate_path

    S0 = _config(args.s0)
    params = _params(args.beta, args.p, exact=False)
    rng = replica_rng(args.seed, 0)
    if args.coloured:
        from .coloured import coloured_trajectory, initial_colouring, trajectory_csv
        if S0.is_ground:
            raise UsageError("the coloured process needs a non-ground start")
        rows = coloured_trajectory(initial_colouring(S0), params, args.horizon, rng)
        _write_text(args.out, trajectory_csv(rows))
        return EXIT_OK
    rows = simulate_path(S0, params, args.horizon, rng)
    _write_text(args.out, _csv_text(SIMULATE_CSV_HEADER, rows))
    return EXIT_OK


def _spec(args, mode):
    from .experiments import ExperimentSpec

    S0 = _config(args.s0)
    params = _params(args.beta, args.p, exact=False)
    return ExperimentSpec(params.beta, params.p, S0, horizon=args.horizon, cap=args.cap,
                          replicas=args.replicas, seed=args.seed, mode=mode)


def tau_cmd(args) -> int:
    from .experiments import EstimationError, run_replicas, tail_index_estimate

    spec = _spec(args, "tau")
    res = run_replicas(spec, threads=args.threads)
    _write_text(args.out, res.to_csv())
    if args.spec_out:
        _write_text(args.spec_out, spec.to_json() + "\n")
    taus = res.tau_array()
    msg = f"tau: {spec.replicas} replicas, censored fraction {res.censored_fraction:.4f}"
    try:
        est = tail_index_estimate(taus)
        msg += f", tail index {est.exponent:.3f} +- {est.stderr:.3f}"
        if est.light_tail:
            msg += " (light tail)"
    except EstimationError as exc:
        msg += f", no tail estimate ({exc})"
    _info(msg)
    return EXIT_OK


def growth_cmd(args) -> int:
    from .experiments import EstimationError, growth_exponent, run_replicas

    spec = _spec(args, "growth")
    res = run_replicas(spec, threads=args.threads)
    _write_text(args.out, res.to_csv())
    if args.spec_out:
        _write_text(args.spec_out, spec.to_json() + "\n")
    try:
        slopes = [growth_exponent(r).slope for r in res.records]
        _info(f"growth: median log-log slope of max size {float(np.median(slopes)):.3f}")
    except EstimationError as exc:
        _info(f"growth: no slope ({exc})")
    return EXIT_OK


def render_cmd(args) -> int:
    from .render import staircase_svg

    if (args.s0 is None) == (args.csv is None):
        raise UsageError("give exactly one of --s0 or --csv")
    if args.s0 is not None:
        configs, titles = [_config(args.s0)], None
    else:
        with open(args.csv, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or "config_blocks" not in rows[0]:
            raise UsageError("trajectory CSV needs a config_blocks column")
        pick = range(len(rows)) if args.row == "all" else [int(args.row)]
        try:
            chosen = [rows[i] for i in pick]
        except IndexError:
            raise UsageError(f"row {args.row} out of range ({len(rows)} rows)")
        configs = [from_blocks([int(x) for x in r["config_blocks"].split(",") if x])
                   for r in chosen]
        titles = [f"t = {r.get('t', '?')}" for r in chosen]
    _write_text(args.out, staircase_svg(configs, args.highlight_rect, titles))
    return EXIT_OK


def probe_cmd(args) -> int:
    from . import experiments as ex

    if args.kind == "size-bound":
        S0 = _config(args.s0)
        params = _params(args.beta, args.p, exact=False)
        res = ex.size_bound_probe(params, S0, args.t, args.replicas, args.seed, args.threads)
        out = {"probability": res.probability, "stderr": res.stderr, "bound": res.bound,
               "threshold": res.threshold, "size_limit": res.size_limit,
               "replicas": res.replicas, "vacuous": res.vacuous, "passed": res.passed}
        _write_text(args.out, json.dumps(out, indent=2) + "\n")
        return EXIT_OK if res.passed else EXIT_FAIL
    fn = {
        "infinite-mean": ex.infinite_mean_probe,
        "mixed-tail": ex.mixed_tail_probe,
        "recurrence": ex.recurrence_probe,
        "growth-rate": ex.growth_rate_probe,
    }[args.kind]
    rep = fn(seed=args.seed, threads=args.threads)
    _write_text(args.out, "\n".join(rep.lines()) + "\n")
    return EXIT_OK


# --- parser ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="evlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version",
                    version=f"evlab {__version__} ({backend_name()} kernels)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common_out(p):
        p.add_argument("--out", "-o", default=None, help="output file (default stdout)")

    def model(p, beta_default=None, p_default=None):
        p.add_argument("--beta", default=beta_default, help="voter probability, e.g. 4/7 or 0.6")
        p.add_argument("--p", default=p_default, help="01-swap acceptance, e.g. 1/2")

    def run_opts(p):
        p.add_argument("--s0", default="01", help="start: 0/1 word or block list (default 01)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default EVLAB_THREADS or 1)")

    p = sub.add_parser("drift-check", help="closed-form drifts against exact enumeration")
    model(p)
    p.add_argument("--max-size", type=int, default=12)
    p.add_argument("--functional", default="all", choices=["all", *sorted(FORMULAS)])
    p.add_argument("--tol", type=float, default=1e-12, help="tolerance for float gaps")
    common_out(p)
    p.set_defaults(func=drift_check_cmd)

    p = sub.add_parser("audit", help="inequalities between the functionals")
    p.add_argument("--s0", default=None, help="single configuration (default: exhaustive)")
    p.add_argument("--max-size", type=int, default=12)
    common_out(p)
    p.set_defaults(func=audit_cmd)

    p = sub.add_parser("simulate", help="one trajectory with configurations on a time grid")
    model(p, "0", "1/2")
    run_opts(p)
    p.add_argument("--horizon", type=int, default=10**4)
    p.add_argument("--coloured", action="store_true",
                   help="run the coloured coupling from the initial colouring of --s0")
    common_out(p)
    p.set_defaults(func=simulate_cmd)

    p = sub.add_parser("tau", help="hitting times of the ground state over replicas")
    model(p, "1", "1/2")
    run_opts(p)
    p.add_argument("--replicas", type=int, default=10**4)
    p.add_argument("--cap", type=int, default=10**6)
    p.add_argument("--horizon", type=int, default=10**6, help=argparse.SUPPRESS)
    p.add_argument("--spec-out", default=None, help="write the run description as JSON")
    common_out(p)
    p.set_defaults(func=tau_cmd)

    p = sub.add_parser("growth", help="growth of the hybrid zone over replicas")
    model(p, "0", "1/2")
    run_opts(p)
    p.set_defaults(s0="")
    p.add_argument("--replicas", type=int, default=32)
    p.add_argument("--horizon", type=int, default=10**6)
    p.add_argument("--cap", type=int, default=10**6, help=argparse.SUPPRESS)
    p.add_argument("--spec-out", default=None)
    common_out(p)
    p.set_defaults(func=growth_cmd)

    p = sub.add_parser("render", help="SVG staircase of a configuration or trajectory CSV")
    p.add_argument("--s0", default=None)
    p.add_argument("--csv", default=None, help="CSV from `simulate` with a config_blocks column")
    p.add_argument("--row", default="-1", help="row index or 'all' (default: last)")
    p.add_argument("--highlight-rect", action="store_true",
                   help="shade the largest inscribed rectangle")
    common_out(p)
    p.set_defaults(func=render_cmd)

    p = sub.add_parser("probe", help="size-bound probe and exploratory probes")
    p.add_argument("kind", choices=["size-bound", "infinite-mean", "mixed-tail",
                                    "recurrence", "growth-rate"])
    model(p, "0", "1/2")
    run_opts(p)
    p.set_defaults(s0="")
    p.add_argument("--t", type=int, default=10**4)
    p.add_argument("--replicas", type=int, default=1000)
    common_out(p)
    p.set_defaults(func=probe_cmd)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"evlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ConfigurationError) as exc:
        print(f"evlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
