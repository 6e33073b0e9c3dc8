"""Command-line entry point: ``ltasim <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from . import energy, identification, studies
from .errors import LtaSimError, NonFiniteState
from .scenario import batch, bundled_scenarios, load_scenario, run, summary_csv, summary_json

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BLOWUP = 3

SCENARIO_SUFFIXES = (".toml", ".json", ".scenario")


def resolve_scenario(ref):
    """A file path, or the stem of a bundled scenario."""
    p = Path(ref)
    if p.exists():
        return p
    for b in bundled_scenarios():
        if ref in (b.stem, b.name):
            return b
    raise FileNotFoundError(f"no scenario file or bundled scenario named {ref!r}")


def apply_flags(cfg, args):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.dt is not None:
        changes["dt"] = args.dt
        changes["platform.controller.loop_rate"] = 1.0 / args.dt
    return cfg.with_overrides(**changes) if changes else cfg


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def emit(rows, fmt, out=None, name="table"):
    """Print or write a list of flat dicts as CSV or JSON."""
    if fmt == "json":
        text = json.dumps([{k: _clean(v) for k, v in r.items()} for r in rows], indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in r.items()})
        text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{name}.{fmt}"
        path.write_text(text)
        print(f"wrote {path}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_run(args):
    cfg = apply_flags(load_scenario(resolve_scenario(args.scenario)), args)
    result = run(cfg)
    if args.out:
        result.write(args.out, args.format)
    print(result.metrics.to_json())
    return EXIT_OK


def cmd_batch(args):
    root = Path(args.dir)
    if not root.is_dir():
        raise FileNotFoundError(f"{root} is not a directory")
    files = sorted(p for p in root.iterdir() if p.suffix in SCENARIO_SUFFIXES)
    items = []
    for p in files:
        cfg = load_scenario(p)
        items.append(apply_flags(cfg, args))
    rows = batch(items, workers=args.workers)
    text = summary_json(rows) + "\n" if args.format == "json" else summary_csv(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"summary.{args.format}").write_text(text)
        print(f"wrote {out / f'summary.{args.format}'}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_identify(args):
    if args.kind == "drag":
        samples = identification.read_drag_csv(args.csv)
        fit = identification.fit_drag(samples, quadratic=not args.linear_only, axes=samples.axes_present())
        c = fit.coefficients
        rows = [{"axis": identification.AXES[i], "linear": float(c.linear[i]), "quadratic": float(c.quadratic[i]),
                 "residual_rms": float(fit.residual_rms[i])} for i in range(6)]
    else:
        B = identification.solve_allocation(identification.read_allocation_csv(args.csv)).B
        rows = [{"row": name, **{f"rotor{j}": float(B[i, j]) for j in range(B.shape[1])}}
                for i, name in enumerate(identification.WRENCH_COLUMNS)]
    emit(rows, args.format, args.out, f"identify_{args.kind}")
    return EXIT_OK


def cmd_tune(args):
    cfg = apply_flags(load_scenario(resolve_scenario(args.scenario)), args)
    summary = studies.tune(cfg, args.duration)
    rows = [{"loop": loop, **vals} for loop, vals in summary.items()]
    emit(rows, args.format, args.out, "tune")
    return EXIT_OK


def cmd_sweep(args):
    seed = 0 if args.seed is None else args.seed
    rows = []
    for env in args.environment:
        errs = studies.bearing_error_sweep(args.sizes, env, args.distance, args.frames, seed)
        for angle, n, err in studies.bearing_table(errs):
            rows.append({"environment": env, "n": n, "angle_deg": angle, "median_error_deg": err})
    emit(rows, args.format, args.out, "bearing_sweep")
    return EXIT_OK


def cmd_study(args):
    rows = []
    for name in args.variant:
        r = studies.mounting_stability_study(name, duration=args.duration)
        v = r.variant
        rows.append({
            "variant": v.name,
            "added_mass_g": v.added_mass,
            "cg_x": float(v.induced_cg_offset[0]),
            "cg_z": float(v.induced_cg_offset[2]),
            "pitch_amplitude_deg": r.amplitude,
            "diverges": r.diverges(),
        })
    emit(rows, args.format, args.out, "mounting")
    return EXIT_OK


def cmd_energy(args):
    rep = energy.energy_report(args.lux)
    if args.format == "json" and args.out is None:
        print(json.dumps({k: v for k, v in rep.items()}, indent=2, default=_clean))
        return EXIT_OK
    rows = [{"mode": m["mode"], "draw_mw": m["draw_mw"], "charging_ratio": m["charging_ratio"]} for m in rep["modes"]]
    emit(rows, args.format, args.out, "energy")
    if args.out is None and args.format == "csv":
        print(f"# harvest_mw={rep['harvest_mw']:.3f} duty_cycle_min_per_hour={rep['duty_cycle_min_per_hour']:.2f}")
        print(f"# pareto={'; '.join(rep['pareto'])}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--dt", type=float, default=None, help="integration step in seconds (sets the control loop rate)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="ltasim", description="LTA micro-drone simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", parents=[common], help="run one scenario")
    s.add_argument("scenario", help="scenario file or bundled name")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("batch", parents=[common], help="run every scenario file in a directory")
    s.add_argument("dir")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_batch)

    s = sub.add_parser("identify", parents=[common], help="fit drag or allocation from a CSV")
    s.add_argument("kind", choices=("drag", "allocation"))
    s.add_argument("csv")
    s.add_argument("--linear-only", action="store_true", help="drag: fit the linear term only")
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser("tune", parents=[common], help="altitude/yaw step responses for a scenario's gains")
    s.add_argument("scenario")
    s.add_argument("--duration", type=float, default=30.0)
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("sweep", parents=[common], help="bearing-error sweep")
    s.add_argument("what", choices=("bearing",))
    s.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16])
    s.add_argument("--environment", nargs="+", choices=("clean", "reflective"), default=["clean", "reflective"])
    s.add_argument("--distance", type=float, default=3.0)
    s.add_argument("--frames", type=int, default=50)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("study", parents=[common], help="solar-panel mounting study")
    s.add_argument("what", choices=("mounting",))
    s.add_argument("--variant", nargs="+", default=list(studies.MOUNTING_VARIANTS))
    s.add_argument("--duration", type=float, default=None)
    s.set_defaults(func=cmd_study)

    s = sub.add_parser("energy", parents=[common], help="power budget and charging ratios")
    s.add_argument("what", choices=("report",))
    s.add_argument("--lux", type=float, default=80000.0)
    s.set_defaults(func=cmd_energy)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NonFiniteState as exc:
        print(f"error: numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (LtaSimError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
