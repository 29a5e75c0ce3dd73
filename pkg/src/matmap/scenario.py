"""Scenario documents and detection logs.

A scenario is a JSON document describing the monitored materials, the
object classes and their compositions, and the vision units with their
detection windows::

    {
      "materials": ["plastic", "glass", "gold"],
      "classes": ["glucose meter", "inhaler"],
      "compositions": [
        {"class": "glucose meter", "masses_kg": [1, 2, 3]},
        {"class": "inhaler", "masses_kg": {"plastic": 1, "gold": 3}}
      ],
      "units": [
        {"id": 1, "location": {"x_m": 0, "y_m": 0},
         "pulses": [{"class": 1, "start_s": 20, "end_s": 100}]}
      ],
      "confusion": {"matrix": [[0.9, 0.1], [0.0, 1.0]], "seed": 7},
      "export": {"t0_s": 0, "t1_s": 150, "step_s": 1}
    }

Materials and classes may also be given as ``{"id": n, "name": ...}``
objects. Times are decimal seconds with at most six fractional digits and
window lengths must be a whole, even number of microseconds.

Detection logs hold one window per line, either CSV
``unit_id,class_id,start_us,end_us`` or a JSON object with the same keys.
Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from decimal import Decimal
from importlib import resources
from pathlib import Path

from . import _jsonpos
from .aggregator import Network
from .composition import CompositionRegistry, Material, ObjectClass
from .errors import DomainError, MatmapError, ScenarioError
from .signal import RectPulse, Time, seconds_to_us, us_to_seconds
from .unit import ConfusionModel, Location, VisionUnit, apply_confusion

_TOP_KEYS = {"name", "materials", "classes", "compositions", "units", "confusion", "export"}


@dataclass(frozen=True)
class ExportOptions:
    t0: Time | None = None
    t1: Time | None = None
    step: Time | None = None


@dataclass(frozen=True)
class Scenario:
    registry: CompositionRegistry
    units: tuple[VisionUnit, ...] = ()
    confusion: ConfusionModel | None = None
    export: ExportOptions = field(default_factory=ExportOptions)
    name: str = ""

    @property
    def s(self) -> int:
        return len(self.units)


class _Reader:
    """Walks a parsed document and raises errors tagged with key path and line."""

    def __init__(self, doc: _jsonpos.Document):
        self.doc = doc

    def fail(self, msg: str, path: str, node=None, key: str | None = None):
        raise ScenarioError(msg, key=path, line=self.doc.line_of(node, key))

    def get(self, obj, key: str, path: str, kind, required: bool = True, default=None):
        where = f"{path}.{key}" if path else key
        if key not in obj:
            if required:
                self.fail(f"missing required key {key!r}", path or "<root>", obj)
            return default
        value = obj[key]
        if kind is not None and not _is_kind(value, kind):
            self.fail(f"expected {_kind_name(kind)}, got {type(value).__name__}", where, obj, key)
        return value

    def check_keys(self, obj, allowed: set[str], path: str) -> None:
        for k in obj:
            if k not in allowed:
                self.fail(f"unknown key {k!r}", f"{path}.{k}" if path else k, obj, k)

    def time(self, obj, key: str, path: str, required: bool = True) -> Time | None:
        value = self.get(obj, key, path, "number", required)
        if value is None:
            return None
        try:
            return seconds_to_us(value)
        except DomainError as exc:
            self.fail(str(exc), f"{path}.{key}", obj, key)


def _is_kind(value, kind) -> bool:
    if kind == "number":
        return isinstance(value, (int, Decimal)) and not isinstance(value, bool)
    if kind == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "ref":
        return isinstance(value, str) or (isinstance(value, int) and not isinstance(value, bool))
    return isinstance(value, kind)


def _kind_name(kind) -> str:
    if isinstance(kind, str):
        return {"ref": "id or name"}.get(kind, kind)
    if kind is list:
        return "array"
    if kind is dict:
        return "object"
    return getattr(kind, "__name__", str(kind))


def _named_items(r: _Reader, node, path: str, cls):
    items = []
    for i, entry in enumerate(node):
        where = f"{path}[{i}]"
        if isinstance(entry, str):
            items.append(cls(i + 1, entry))
            continue
        if not isinstance(entry, dict):
            r.fail("expected a name or an {id, name} object", where, node)
        r.check_keys(entry, {"id", "name"}, where)
        ident = r.get(entry, "id", where, "int")
        name = r.get(entry, "name", where, str)
        if ident != i + 1:
            r.fail(f"ids must be 1..{len(node)} in order, got {ident}", f"{where}.id", entry, "id")
        items.append(cls(ident, name))
    names = [it.name for it in items]
    for i, n in enumerate(names):
        if n in names[:i]:
            r.fail(f"duplicate name {n!r}", f"{path}[{i}]", node)
    return tuple(items)


def _ref(r: _Reader, items, value, where: str, node, key: str) -> int:
    for it in items:
        if value == it.name or (isinstance(value, int) and value == it.id):
            return it.id
    what = "material" if items and isinstance(items[0], Material) else "class"
    r.fail(f"unknown {what} {value!r}", where, node, key)


def _parse_registry(r: _Reader, root) -> CompositionRegistry:
    materials = _named_items(r, r.get(root, "materials", "", list), "materials", Material)
    classes = _named_items(r, r.get(root, "classes", "", list), "classes", ObjectClass)
    comps_node = r.get(root, "compositions", "", list)
    reg = CompositionRegistry(materials)
    masses_by_class: dict[int, tuple[object, object, str]] = {}
    for i, entry in enumerate(comps_node):
        where = f"compositions[{i}]"
        if not isinstance(entry, dict):
            r.fail("expected an object", where, comps_node)
        r.check_keys(entry, {"class", "masses_kg"}, where)
        c = _ref(r, classes, r.get(entry, "class", where, "ref"), f"{where}.class", entry, "class")
        if c in masses_by_class:
            r.fail(f"class {c} has more than one composition", f"{where}.class", entry, "class")
        masses = r.get(entry, "masses_kg", where, None)
        masses_by_class[c] = (entry, masses, where)
    for cls in classes:
        if cls.id not in masses_by_class:
            r.fail(f"class {cls.name!r} has no composition", "compositions", comps_node)
        entry, masses, where = masses_by_class[cls.id]
        mpath = f"{where}.masses_kg"
        if isinstance(masses, list):
            if len(masses) != reg.psi:
                r.fail(f"positional masses need exactly {reg.psi} entries, got {len(masses)}",
                       mpath, entry, "masses_kg")
            for j, m in enumerate(masses):
                _check_mass_value(r, m, f"{mpath}[{j}]", entry)
            values = [float(m) for m in masses]
        elif isinstance(masses, dict):
            values = {}
            for name, m in masses.items():
                j = _ref(r, materials, name, f"{mpath}.{name}", masses, name)
                _check_mass_value(r, m, f"{mpath}.{name}", masses, name)
                values[j] = float(m)
        else:
            r.fail("expected an array or an object of masses", mpath, entry, "masses_kg")
        try:
            reg = reg.register_class(cls, values)
        except MatmapError as exc:
            r.fail(str(exc), mpath, entry, "masses_kg")
    return reg


def _check_mass_value(r: _Reader, m, where: str, node, key: str | None = None) -> None:
    if not _is_kind(m, "number"):
        r.fail(f"mass must be a number, got {type(m).__name__}", where, node, key)
    if not Decimal(m).is_finite() or m < 0:
        r.fail(f"mass must be a non-negative number of kg, got {m}", where, node, key)


def _parse_location(r: _Reader, node, path: str) -> Location:
    if node is None:
        return Location()
    if not isinstance(node, dict):
        r.fail("expected an object", path, node)
    r.check_keys(node, {"x_m", "y_m", "lat", "lon"}, path)
    vals = {}
    for key in ("x_m", "y_m", "lat", "lon"):
        v = r.get(node, key, path, "number", required=False)
        vals[key] = None if v is None else float(v)
    try:
        return Location(vals["x_m"] or 0.0, vals["y_m"] or 0.0, vals["lat"], vals["lon"])
    except DomainError as exc:
        r.fail(str(exc), path, node)


def _parse_units(r: _Reader, root, reg: CompositionRegistry) -> tuple[VisionUnit, ...]:
    units_node = r.get(root, "units", "", list)
    units = []
    seen: dict[int, int] = {}
    for i, entry in enumerate(units_node):
        where = f"units[{i}]"
        if not isinstance(entry, dict):
            r.fail("expected an object", where, units_node)
        r.check_keys(entry, {"id", "location", "pulses"}, where)
        uid = r.get(entry, "id", where, "int")
        if uid < 1:
            r.fail(f"unit id must be positive, got {uid}", f"{where}.id", entry, "id")
        if uid in seen:
            r.fail(f"duplicate unit id {uid} (also units[{seen[uid]}])", f"{where}.id", entry, "id")
        seen[uid] = i
        loc = _parse_location(r, entry.get("location"), f"{where}.location")
        schedule: dict[int, list[RectPulse]] = {}
        pulses_node = r.get(entry, "pulses", where, list, required=False, default=[])
        for k, pn in enumerate(pulses_node):
            ppath = f"{where}.pulses[{k}]"
            if not isinstance(pn, dict):
                r.fail("expected an object", ppath, pulses_node)
            r.check_keys(pn, {"class", "start_s", "end_s"}, ppath)
            c = _ref(r, reg.classes, r.get(pn, "class", ppath, "ref"), f"{ppath}.class", pn, "class")
            start = r.time(pn, "start_s", ppath)
            end = r.time(pn, "end_s", ppath)
            try:
                pulse = RectPulse.from_window(start, end)
            except DomainError as exc:
                r.fail(str(exc), f"{ppath}.end_s", pn, "end_s")
            schedule.setdefault(c, []).append(pulse)
        units.append(VisionUnit(uid, loc, schedule))
    ids = sorted(seen)
    if ids != list(range(1, len(ids) + 1)):
        r.fail(f"unit ids must be 1..{len(ids)}, got {ids}", "units", units_node)
    return tuple(units)


def _parse_confusion(r: _Reader, root, q: int) -> ConfusionModel | None:
    node = r.get(root, "confusion", "", dict, required=False)
    if node is None:
        return None
    r.check_keys(node, {"matrix", "seed"}, "confusion")
    matrix = r.get(node, "matrix", "confusion", list)
    seed = r.get(node, "seed", "confusion", "int", required=False, default=0)
    if len(matrix) != q:
        r.fail(f"matrix must be {q}x{q} (one row per class), got {len(matrix)} rows",
               "confusion.matrix", node, "matrix")
    for i, row in enumerate(matrix):
        if not isinstance(row, list) or not all(_is_kind(x, "number") for x in row):
            r.fail("expected an array of numbers", f"confusion.matrix[{i}]", matrix)
    try:
        return ConfusionModel(tuple(tuple(float(x) for x in row) for row in matrix), seed)
    except DomainError as exc:
        r.fail(str(exc), "confusion.matrix", node, "matrix")


def _parse_export(r: _Reader, root) -> ExportOptions:
    node = r.get(root, "export", "", dict, required=False)
    if node is None:
        return ExportOptions()
    r.check_keys(node, {"t0_s", "t1_s", "step_s"}, "export")
    opts = ExportOptions(
        r.time(node, "t0_s", "export", required=False),
        r.time(node, "t1_s", "export", required=False),
        r.time(node, "step_s", "export", required=False),
    )
    if opts.step is not None and opts.step <= 0:
        r.fail("step must be positive", "export.step_s", node, "step_s")
    if opts.t0 is not None and opts.t1 is not None and opts.t1 < opts.t0:
        r.fail("t1_s must not be before t0_s", "export.t1_s", node, "t1_s")
    return opts


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises :class:`ScenarioError` naming the offending key and its line.
    """
    try:
        doc = _jsonpos.Document(text)
    except _jsonpos.JSONDocError as exc:
        raise ScenarioError(f"invalid JSON: {exc}", line=exc.line) from None
    r = _Reader(doc)
    root = doc.root
    if not isinstance(root, dict):
        raise ScenarioError("scenario must be a JSON object", line=1)
    r.check_keys(root, _TOP_KEYS, "")
    name = r.get(root, "name", "", str, required=False, default="")
    reg = _parse_registry(r, root)
    units = _parse_units(r, root, reg)
    confusion = _parse_confusion(r, root, reg.q)
    export = _parse_export(r, root)
    return Scenario(reg, units, confusion, export, name)


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``"two_units.json"``."""
    return Path(str(resources.files("matmap") / "data" / name))


def _num(t: Time):
    sec = us_to_seconds(t)
    return int(sec) if sec == sec.to_integral_value() else float(sec)


def scenario_to_dict(scn: Scenario) -> dict:
    reg = scn.registry
    out: dict = {}
    if scn.name:
        out["name"] = scn.name
    out["materials"] = [{"id": m.id, "name": m.name} for m in reg.materials]
    out["classes"] = [{"id": c.id, "name": c.name} for c in reg.classes]
    out["compositions"] = [
        {"class": c.id, "masses_kg": list(reg.compositions[c.id])} for c in reg.classes
    ]
    units = []
    for u in scn.units:
        loc = {"x_m": u.location.x, "y_m": u.location.y}
        if u.location.lat is not None:
            loc.update(lat=u.location.lat, lon=u.location.lon)
        pulses = [
            {"class": c, "start_s": _num(p.start), "end_s": _num(p.end)} for c, p in u.pulses()
        ]
        units.append({"id": u.id, "location": loc, "pulses": pulses})
    out["units"] = units
    if scn.confusion is not None:
        out["confusion"] = {
            "matrix": [list(row) for row in scn.confusion.matrix],
            "seed": scn.confusion.seed,
        }
    ex = {}
    for key, value in (("t0_s", scn.export.t0), ("t1_s", scn.export.t1), ("step_s", scn.export.step)):
        if value is not None:
            ex[key] = _num(value)
    if ex:
        out["export"] = ex
    return out


def dump_scenario(scn: Scenario) -> str:
    return json.dumps(scenario_to_dict(scn), indent=2, ensure_ascii=False) + "\n"


@dataclass(frozen=True)
class DetectionRecord:
    unit_id: int
    class_id: int
    start: Time
    end: Time

    def __post_init__(self) -> None:
        if self.end <= self.start:
            raise DomainError(f"detection end ({self.end} us) must be after start ({self.start} us)")

    @property
    def pulse(self) -> RectPulse:
        return RectPulse.from_window(self.start, self.end)


@dataclass(frozen=True)
class LogProblem:
    line: int
    text: str
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


_LOG_FIELDS = ("unit_id", "class_id", "start_us", "end_us")


def _parse_log_line(raw: str) -> DetectionRecord:
    if raw.startswith("{"):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict) or set(obj) != set(_LOG_FIELDS):
            raise DomainError(f"JSON record needs exactly the keys {', '.join(_LOG_FIELDS)}")
        values = [obj[k] for k in _LOG_FIELDS]
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
            raise DomainError("all fields must be integers")
    else:
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 4:
            raise DomainError(f"expected 4 comma-separated fields, got {len(parts)}")
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise DomainError("all fields must be integers") from None
    uid, cid, start, end = values
    if uid < 1 or cid < 1:
        raise DomainError("unit_id and class_id must be positive")
    rec = DetectionRecord(uid, cid, start, end)
    rec.pulse  # odd-length windows are rejected here
    return rec


def ingest_detection_log(
    lines: Iterable[str], *, strict: bool = False
) -> tuple[list[DetectionRecord], list[LogProblem]]:
    """Read detection windows from log lines.

    Returns the parsed records and the problems found. Bad lines are skipped
    and reported; with ``strict=True`` the first bad line raises
    :class:`ScenarioError` instead.
    """
    records: list[DetectionRecord] = []
    problems: list[LogProblem] = []
    for lineno, line in enumerate(lines, start=1):
        raw = line.strip()
        if not raw or raw.startswith("#"):
            continue
        try:
            records.append(_parse_log_line(raw))
        except DomainError as exc:
            if strict:
                raise ScenarioError(str(exc), key="detection log", line=lineno) from None
            problems.append(LogProblem(lineno, raw, str(exc)))
    return records, problems


def attach_detections(scn: Scenario, records: Iterable[DetectionRecord]) -> Scenario:
    """Append logged windows to the scenario's units."""
    schedules = {u.id: {c: list(ps) for c, ps in u.schedule.items()} for u in scn.units}
    for rec in records:
        if rec.unit_id not in schedules:
            raise ScenarioError(f"detection for unknown unit {rec.unit_id}", key="detection log")
        if rec.class_id not in scn.registry.compositions:
            raise ScenarioError(f"detection for unknown class {rec.class_id}", key="detection log")
        schedules[rec.unit_id].setdefault(rec.class_id, []).append(rec.pulse)
    units = tuple(VisionUnit(u.id, u.location, schedules[u.id]) for u in scn.units)
    return replace(scn, units=units)


def build_network(scn: Scenario) -> Network:
    units = scn.units
    if scn.confusion is not None:
        units = tuple(apply_confusion(u, scn.confusion) for u in units)
    try:
        return Network(units, scn.registry)
    except DomainError as exc:
        raise ScenarioError(str(exc), key="units") from None
