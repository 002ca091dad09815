"""Command-line entry point: ``metacare {simulate,bounds,plot,lemmas}``.

Exit codes: 0 ok, 2 configuration error, 3 I/O error, 4 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import fields

from . import bounds, harness, plotting
from .environments import FileStreamError, MechanismError, MechanismSpec
from .learners import BracketViolation, LearnerSpec
from .rootfind import MaxIterExceeded, NoSignChange

log = logging.getLogger("metacare")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INVARIANT = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


def _learner_from_json(d: dict) -> LearnerSpec:
    allowed = {f.name for f in fields(LearnerSpec)}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown learner keys: {sorted(unknown)}")
    if "algorithm" not in d:
        raise ConfigError("learner entry needs an 'algorithm'")
    try:
        return LearnerSpec(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _mechanisms_from_json(d: dict) -> list[MechanismSpec]:
    d = dict(d)
    ns = d.pop("n_experts", None)
    if ns is None:
        raise ConfigError("mechanism needs n_experts")
    ns = ns if isinstance(ns, list) else [ns]
    allowed = {f.name for f in fields(MechanismSpec)} - {"n_experts"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown mechanism keys: {sorted(unknown)}")
    try:
        return [MechanismSpec(n_experts=int(n), **d) for n in ns]
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, seed_override: int | None = None) -> dict:
    """Read and validate a simulation config. See README for the schema."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    learners = raw.get("learners")
    if not isinstance(learners, list) or not learners:
        raise ConfigError("config needs a non-empty 'learners' list")
    if "mechanism" not in raw:
        raise ConfigError("config needs a 'mechanism'")
    horizon = raw.get("horizon")
    if not isinstance(horizon, int) or horizon < 1:
        raise ConfigError("'horizon' must be a positive integer")
    cps = raw.get("checkpoints", "geometric")
    if cps == "geometric":
        cps = harness.geometric_checkpoints(horizon).tolist()
    elif isinstance(cps, dict):
        grid = harness.geometric_checkpoints(horizon, int(cps.get("per_decade", 8))).tolist()
        cps = sorted(set(grid) | {int(c) for c in cps.get("extra", [])})
    elif isinstance(cps, list) and cps:
        cps = sorted({int(c) for c in cps})
    else:
        raise ConfigError("'checkpoints' must be 'geometric', a list, or {per_decade, extra}")
    if cps[0] < 1 or cps[-1] > horizon:
        raise ConfigError("checkpoints must lie in [1, horizon]")
    reps = raw.get("replications", 1)
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError("'replications' must be a positive integer")
    base_seed = raw.get("base_seed", 0) if seed_override is None else seed_override
    if not isinstance(base_seed, int) or base_seed < 0:
        raise ConfigError("'base_seed' must be a non-negative integer")
    return {
        "learners": [_learner_from_json(d) for d in learners],
        "mechanisms": _mechanisms_from_json(raw["mechanism"]),
        "horizon": horizon,
        "checkpoints": cps,
        "replications": reps,
        "base_seed": base_seed,
        "output": raw.get("output"),
        "figure": raw.get("figure"),
        "figure_axis": _figure_axis(raw.get("figure_axis", "T")),
    }


def _figure_axis(axis) -> str:
    if axis not in ("T", "N"):
        raise ConfigError("'figure_axis' must be 'T' or 'N'")
    return axis


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.seed)
    out = args.out or cfg["output"]
    if not out:
        raise ConfigError("no output path (use --out or 'output')")
    figure = args.figure or cfg["figure"]
    curves = []
    for mech in cfg["mechanisms"]:
        log.info("simulating %s N=%d N0=%d", mech.kind, mech.n_experts, mech.n_effective)
        curves.extend(harness.expected_regret_many(
            cfg["learners"], mech, cfg["checkpoints"], cfg["replications"], cfg["base_seed"],
            n_jobs=args.threads,
        ))
    harness.write_curves(curves, out)
    if figure:
        # against N, draw one line per configured checkpoint
        harness.atomic_write(figure, _render(curves, cfg["figure_axis"], cfg["checkpoints"]))
    return EXIT_OK


BOUNDS_HEADER = ("T", "bound_adversarial", "bound_adaptive", "threshold", "theorem",
                 "N", "N0", "delta0", "g", "c1", "c2")


def cmd_bounds(args) -> int:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.constants:
        w.writerow(("c1", "c2", "C1", "C2", "C3", "C4"))
        w.writerow([repr(float(args.c1)), repr(float(args.c2))]
                   + [repr(v) for v in bounds.theorem5_constants(args.c1, args.c2)])
    else:
        g = args.g if args.g is not None else args.c_h * math.sqrt(math.log(args.N))
        w.writerow(BOUNDS_HEADER)
        for T in args.T:
            try:
                p = bounds.BoundParams(N=args.N, N0=args.N0, delta0=args.delta0, g=g,
                                       c1=args.c1, c2=args.c2, T=T)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            b = bounds.theorem4_bound(p) if args.theorem == 4 else bounds.theorem5_bound(p)
            w.writerow([T, repr(b.adversarial), repr(b.adaptive), b.t_threshold, args.theorem,
                        args.N, args.N0, repr(float(args.delta0)), repr(g), repr(args.c1), repr(args.c2)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    curves = []
    for path in args.inputs:
        curves.extend(harness.read_curves(path))
    if not curves:
        raise plotting.EmptyInput("no curve rows in input")
    harness.atomic_write(args.out, _render(curves, args.axis, args.times, args.title))
    return EXIT_OK


def _render(curves, axis: str, times=None, title=None) -> str:
    if axis == "T":
        return plotting.render_svg(plotting.series_vs_T(curves), xlabel="T", title=title)
    return plotting.render_svg(plotting.series_vs_N(curves, times), xlabel="log2 N", title=title)


def cmd_lemmas(args) -> int:
    report = bounds.lemma_checks(seed=args.seed, cases=args.cases)
    _emit(report.summary() + "\n", args.out)
    return EXIT_OK if report.ok else EXIT_INVARIANT


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        harness.atomic_write(out, text)


def _int_list(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="metacare", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="run a simulation config and write the regret curve CSV")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", help="curve CSV (overrides config 'output')")
    sp.add_argument("--figure", help="also write a log-log SVG of the curves")
    sp.add_argument("--seed", type=int, help="override config base_seed")
    sp.add_argument("--threads", type=int, default=1, help="parallel replications")
    sp.set_defaults(func=cmd_simulate)

    bp = sub.add_parser("bounds", help="evaluate the D.HEDGE / FTRL-CARE regret bounds")
    bp.add_argument("--theorem", type=int, choices=(4, 5), default=5)
    bp.add_argument("--N", type=int, default=2)
    bp.add_argument("--N0", type=int, default=1)
    bp.add_argument("--delta0", type=float, default=math.inf)
    bp.add_argument("--g", type=float, help="D.HEDGE g(N); default c_h*sqrt(log N)")
    bp.add_argument("--c-h", type=float, default=math.sqrt(8))
    bp.add_argument("--c1", type=float, default=math.sqrt(8))
    bp.add_argument("--c2", type=float, default=1.0)
    bp.add_argument("--T", type=_int_list, default=[1], help="comma-separated horizons")
    bp.add_argument("--constants", action="store_true", help="print C1..C4 for (c1, c2) instead")
    bp.add_argument("--out", default="-")
    bp.set_defaults(func=cmd_bounds)

    pp = sub.add_parser("plot", help="render curve CSVs as a log-log SVG")
    pp.add_argument("inputs", nargs="+")
    pp.add_argument("--axis", choices=("T", "N"), default="T")
    pp.add_argument("--times", type=_int_list, help="rounds to plot against N")
    pp.add_argument("--title")
    pp.add_argument("--out", required=True)
    pp.set_defaults(func=cmd_plot)

    lp = sub.add_parser("lemmas", help="run the randomized inequality suites")
    lp.add_argument("--seed", type=int, default=0)
    lp.add_argument("--cases", type=int, default=10_000)
    lp.add_argument("--out", default="-")
    lp.set_defaults(func=cmd_lemmas)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MechanismError, FileStreamError, harness.SchemaMismatch,
            plotting.EmptyInput) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (BracketViolation, NoSignChange, MaxIterExceeded, InvariantViolation) as exc:
        log.error("invariant violated: %s", exc)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
