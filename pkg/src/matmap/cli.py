"""Command-line interface.

Exit codes: 0 success, 1 bad input (usage, scenario, log or rotation
errors), 2 file-system errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from . import __version__
from .aggregator import (
    Network,
    StockSeries,
    mass_time_integral,
    sample_series,
    spatial_map,
    stock_events,
    stock_series,
)
from .errors import DomainError, MatmapError
from .geometry import FrameTransform, TargetVector, pick_points_robot, rot_z, validate_rotation
from .scenario import (
    Scenario,
    attach_detections,
    build_network,
    bundled_scenario_path,
    ingest_detection_log,
    load_scenario,
)
from .signal import US_PER_S, Time, seconds_to_us

EXIT_INPUT = 1
EXIT_IO = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for I/O here
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def fmt_kg(x: float) -> str:
    """Up to 9 decimals, trailing zeros trimmed, so 0.5 prints as ``0.5``."""
    s = f"{x:.9f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _fmt_opt(x: float | None) -> str:
    return "" if x is None else fmt_kg(x)


def _time_arg(text: str) -> Time:
    try:
        return seconds_to_us(text, exact=False)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _resolve(path: str) -> Path:
    p = Path(path)
    if not p.exists() and p.parent == Path("."):
        bundled = bundled_scenario_path(p.name)
        if bundled.exists():
            return bundled
    return p


def _load(args) -> tuple[Scenario, Network]:
    scn = load_scenario(_resolve(args.scenario))
    if getattr(args, "log", None):
        with open(args.log, encoding="utf-8") as fh:
            records, problems = ingest_detection_log(fh, strict=args.strict)
        for prob in problems:
            print(f"{args.log}: {prob}", file=sys.stderr)
        scn = attach_detections(scn, records)
    return scn, build_network(scn)


def _material_headers(net: Network) -> list[str]:
    return [f"{m.name}_kg" for m in net.registry.materials]


def _horizon(scn: Scenario, series: StockSeries, args) -> tuple[Time, Time, Time]:
    bps = series.breakpoints
    t0 = args.t0 if args.t0 is not None else scn.export.t0
    t1 = args.t1 if args.t1 is not None else scn.export.t1
    step = args.step if args.step is not None else scn.export.step
    if t0 is None:
        t0 = min(0, bps[0]) if bps else 0
    if t1 is None:
        t1 = max(t0, bps[-1]) if bps else t0
    if step is None:
        step = US_PER_S
    return t0, t1, step


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _event_rows(events):
    return [[e.time, e.material, fmt_kg(e.delta), fmt_kg(e.after)] for e in events]


def _map_row(row) -> list[str]:
    loc = row.location
    return [
        str(row.unit_id),
        fmt_kg(loc.x),
        fmt_kg(loc.y),
        _fmt_opt(loc.lat),
        _fmt_opt(loc.lon),
        *(fmt_kg(v) for v in row.stock),
    ]


def _summary(scn: Scenario, net: Network, series, events, horizon) -> str:
    reg = net.registry
    integral = mass_time_integral(net)
    lines = [
        f"scenario: {scn.name}" if scn.name else "scenario:",
        f"units (s): {len(net.units)}",
        f"classes (q): {reg.q}",
        f"materials (psi): {reg.psi}",
        f"breakpoints: {len(series.breakpoints)}",
        f"events: {len(events)}",
        "horizon_us: {} {} step {}".format(*horizon),
        "mass_time_integral_kg_s:",
    ]
    for m, v in zip(reg.materials, integral):
        lines.append(f"  {m.name}: {fmt_kg(v)}")
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    scn, net = _load(args)
    series = stock_series(net, workers=args.jobs)
    events = stock_events(net, series)
    t0, t1, step = _horizon(scn, series, args)
    samples = sample_series(series, t0, t1, step)
    headers = _material_headers(net)

    # samples landing on a breakpoint carry half-weight edge values
    edges = set(series.breakpoints)
    series_csv = _csv_text(
        ["t_us", *headers, "at_breakpoint"],
        ([t, *(fmt_kg(v) for v in vec), int(t in edges)] for t, vec in samples),
    )
    events_csv = _csv_text(["t_us", "material", "delta_kg", "tau_after_kg"], _event_rows(events))
    map_rows = []
    for t, _ in samples:
        for row in spatial_map(net, t):
            map_rows.append([t, *_map_row(row)])
    map_csv = _csv_text(["t_us", "unit_id", "x_m", "y_m", "lat", "lon", *headers], map_rows)
    summary = _summary(scn, net, series, events, (t0, t1, step))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in (
        ("series.csv", series_csv),
        ("events.csv", events_csv),
        ("map.csv", map_csv),
        ("summary.txt", summary),
    ):
        (out / name).write_text(text, encoding="utf-8", newline="\n")
    print(f"wrote {len(samples)} samples and {len(events)} events to {out}", file=sys.stderr)
    return 0


def cmd_events(args) -> int:
    _, net = _load(args)
    events = stock_events(net, stock_series(net, workers=args.jobs))
    if not events:
        return 0
    if args.format == "json":
        payload = [
            {"t_us": e.time, "material": e.material, "delta_kg": e.delta, "tau_after_kg": e.after}
            for e in events
        ]
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        sys.stdout.write(
            _csv_text(["t_us", "material", "delta_kg", "tau_after_kg"], _event_rows(events))
        )
    return 0


def cmd_map(args) -> int:
    _, net = _load(args)
    rows = spatial_map(net, args.t)
    if args.format == "json":
        payload = [
            {
                "unit_id": r.unit_id,
                "x_m": r.location.x,
                "y_m": r.location.y,
                "lat": r.location.lat,
                "lon": r.location.lon,
                "stock_kg": {m.name: v for m, v in zip(net.registry.materials, r.stock)},
            }
            for r in rows
        ]
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        header = ["unit_id", "x_m", "y_m", "lat", "lon", *_material_headers(net)]
        sys.stdout.write(_csv_text(header, (_map_row(r) for r in rows)))
    return 0


def _fmt_point(p: np.ndarray) -> str:
    return " ".join("0.000000" if f"{v:.6f}" == "-0.000000" else f"{v:.6f}" for v in p)


def cmd_transform(args) -> int:
    if args.rotation is not None:
        rotation = validate_rotation(np.reshape(args.rotation, (3, 3)))
    elif args.z_angle is not None:
        rotation = rot_z(args.z_angle)
    else:
        rotation = validate_rotation(np.eye(3))
    f = FrameTransform(rotation, args.translation, args.height)
    pts = pick_points_robot(f, TargetVector.from_sequence(args.target))
    if pts.degenerate:
        print("warning: the two pick points coincide", file=sys.stderr)
    if args.format == "json":
        payload = {
            "first": [float(v) for v in pts.first],
            "second": [float(v) for v in pts.second],
            "degenerate": pts.degenerate,
        }
        sys.stdout.write(json.dumps(payload) + "\n")
    else:
        sys.stdout.write(f"{_fmt_point(pts.first)}\n{_fmt_point(pts.second)}\n")
    return 0


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", help="scenario JSON file (bundled names such as two_units.json also work)")
    p.add_argument("--log", help="detection log whose windows are added to the scenario's units")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed log line")
    p.add_argument("--jobs", type=int, default=None, help="evaluate units in N worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matmap", description="Networked material-stock simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write series, events, map and summary files")
    _add_scenario_args(p)
    p.add_argument("-o", "--out", default="out", help="output directory (default: out)")
    p.add_argument("--t0", type=_time_arg, help="first sample time, seconds")
    p.add_argument("--t1", type=_time_arg, help="last sample time, seconds")
    p.add_argument("--step", type=_time_arg, help="sample step, seconds")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("events", help="list stock changes")
    _add_scenario_args(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_events)

    p = sub.add_parser("map", help="per-unit stock at one time")
    _add_scenario_args(p)
    p.add_argument("--t", type=_time_arg, required=True, help="time, seconds")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("transform", help="pick points from bench frame to robot frame (cm)")
    rot = p.add_mutually_exclusive_group()
    rot.add_argument("--rotation", type=float, nargs=9, metavar="R", help="row-major 3x3 matrix")
    rot.add_argument("--z-angle", type=float, metavar="DEG", help="rotation about z, degrees")
    p.add_argument("--translation", type=float, nargs=3, default=[0.0, 0.0, 0.0], metavar="D")
    p.add_argument("--height", type=float, default=0.0, help="pick-point height above the bench")
    p.add_argument("--target", type=float, nargs=4, required=True, metavar=("X1", "Y1", "X2", "Y2"))
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_transform)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "jobs", None) is not None and args.jobs < 1:
            raise _UsageError("matmap: error: --jobs must be at least 1")
        if getattr(args, "step", None) is not None and args.step <= 0:
            raise _UsageError("matmap: error: --step must be positive")
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except (MatmapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
