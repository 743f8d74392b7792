"""Command-line interface.

Subcommands:

- ``run``: execute one experiment config, writing a CSV trace and a JSON
  summary (optionally a log-log SVG per measure).
- ``params``: resolve a regime's parameters for an instance and print
  them with the step-size validation report as JSON.
- ``compare``: run several configs on a shared instance and write a
  comparison table.
- ``tightness``: the descent-ascent stall experiment; prints gap against
  the certified floor per iteration and fails if the floor is violated.

Exit codes: 0 success, 1 failed check, 2 invalid config, 3 diverged run,
4 measure unavailable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    DivergedError,
    InvalidConfigError,
    InvalidParamsError,
    MeasureUnavailableError,
    RegimeUnavailableError,
    RejectedSpecError,
    SaddlebenchError,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_MEASURE = 4


def _parse_instance_arg(text):
    from .problems import InstanceSpec

    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not tokens:
        raise InvalidConfigError("empty instance spec")
    family = tokens[0]
    kwargs = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise InvalidConfigError(f"bad instance token {tok!r}")
        key, _, val = tok.partition("=")
        key = key.strip()
        if key in ("n", "d", "seed"):
            kwargs[key] = int(val)
        elif key == "scale":
            kwargs[key] = float(val)
        elif key == "bounded":
            kwargs[key] = val.strip().lower() in ("1", "true", "yes")
        else:
            raise InvalidConfigError(f"unknown instance key {key!r}")
    return InstanceSpec(family=family, **kwargs)


def _cmd_run(args):
    from . import harness

    config = harness.load_config(args.config)
    if args.stride is not None:
        config = harness.ExperimentConfig(
            **{**config.__dict__, "stride": args.stride}
        )
    if args.lyapunov:
        config = harness.ExperimentConfig(
            **{**config.__dict__, "lyapunov": True}
        )
    trace_path, summary_path, summary = harness.run_experiment(
        config, out_dir=args.out
    )
    if args.plot:
        _write_plots(trace_path, config)
    print(f"trace:   {trace_path}")
    print(f"summary: {summary_path}")
    print(f"status:  {summary['status']}")
    return EXIT_DIVERGED if summary["status"] == "diverged" else EXIT_OK


def _write_plots(trace_path, config):
    from . import harness
    from ._svg import loglog_svg

    records = harness.read_trace(trace_path)
    for key in ("gap", "gs", "os"):
        attr = "os_res" if key == "os" else key
        env = harness.min_so_far(records, attr if key != "gs" else "gs")
        if len(env) < 2:
            continue
        svg = loglog_svg({f"min {key}": env}, title=config.name, ylabel=key)
        out = Path(str(trace_path).replace(".trace.csv", f".{key}.svg"))
        out.write_text(svg, encoding="utf-8")
        print(f"plot:    {out}")


def _cmd_params(args):
    from .problems import make_instance
    from .stepsizes import select_params, validate_condition1

    spec = _parse_instance_arg(args.instance)
    problem = make_instance(spec)
    overrides = {}
    if args.strict:
        overrides["strict"] = True
    params = select_params(args.regime, problem, args.T, overrides)
    try:
        validation = validate_condition1(
            problem.structure.lipschitz_L, params
        ).as_dict()
    except SaddlebenchError as exc:
        validation = {"error": str(exc)}
    print(json.dumps(
        {"instance": spec.as_dict(), "T": args.T,
         "params": params.as_dict(), "validation": validation},
        indent=2, sort_keys=True,
    ))
    return EXIT_OK


def _cmd_compare(args):
    from . import harness

    configs = [harness.load_config(p) for p in args.configs]
    table = harness.compare(configs, out_path=args.out)
    print(harness.render_comparison(table), end="")
    if args.plot and args.out:
        _compare_plot(configs, Path(args.out))
    return EXIT_OK


def _compare_plot(configs, out_path):
    from . import harness
    from ._svg import loglog_svg

    series = {}
    for cfg in configs:
        records, _ = harness._execute(cfg)
        env = harness.min_so_far(records, "gap")
        if len(env) >= 2:
            series[cfg.name] = env
    if series:
        svg_path = Path(str(out_path) + ".svg")
        svg_path.write_text(loglog_svg(series, title="min gap"), encoding="utf-8")
        print(f"plot:    {svg_path}")


def _cmd_tightness(args):
    from .harness import tightness_report

    rows = tightness_report(eta=args.eta, eps=args.eps, T=args.T)
    print(f"{'t':>6}  {'gap':>24}  {'floor':>24}  ok")
    violated = False
    for t, gap, bound, ok in rows:
        print(f"{t:>6}  {gap:>24.17g}  {bound:>24.17g}  {'yes' if ok else 'NO'}")
        violated = violated or not ok
    if violated:
        print("FAIL: gap fell below the certified floor")
        return EXIT_FAIL
    print(f"ok: gap >= (1-eta)^(2t) * eps held for all {len(rows)} iterations")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="saddlebench",
        description="benchmark harness for smooth constrained minimax solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True, help="path to a config file")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--stride", type=int, default=None,
                       help="override the measure schedule stride")
    p_run.add_argument("--lyapunov", action="store_true",
                       help="also record the potential value")
    p_run.add_argument("--plot", action="store_true",
                       help="emit a log-log SVG per measure")
    p_run.set_defaults(func=_cmd_run)

    p_par = sub.add_parser("params", help="resolve and validate regime parameters")
    p_par.add_argument("--regime", required=True)
    p_par.add_argument("--instance", required=True,
                       help="e.g. 'bilinear_cc,n=2,d=2,seed=7'")
    p_par.add_argument("--T", required=True, type=int)
    p_par.add_argument("--strict", action="store_true",
                       help="use the certified constants")
    p_par.set_defaults(func=_cmd_params)

    p_cmp = sub.add_parser("compare", help="compare several configs on one instance")
    p_cmp.add_argument("--configs", required=True, nargs="+")
    p_cmp.add_argument("--out", default=None, help="comparison JSON path")
    p_cmp.add_argument("--plot", action="store_true")
    p_cmp.set_defaults(func=_cmd_compare)

    p_tight = sub.add_parser("tightness", help="descent-ascent stall experiment")
    p_tight.add_argument("--eta", type=float, default=0.1)
    p_tight.add_argument("--eps", type=float, default=0.02)
    p_tight.add_argument("--T", type=int, default=1000)
    p_tight.set_defaults(func=_cmd_tightness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfigError, RejectedSpecError, InvalidParamsError,
            RegimeUnavailableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except MeasureUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MEASURE
    except SaddlebenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
