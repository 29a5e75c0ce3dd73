"""Networked vision units and their material-stock signals."""

from __future__ import annotations

import math
import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .composition import CompositionRegistry
from .errors import DomainError, RegistryError
from .signal import RectPulse, Time, pulse_breakpoints, pulse_value_doubled

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Location:
    """Planar site position in metres, optionally geotagged (decimal degrees)."""

    x: float = 0.0
    y: float = 0.0
    lat: float | None = None
    lon: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"location must be finite, got ({self.x}, {self.y})")
        if (self.lat is None) != (self.lon is None):
            raise DomainError("lat and lon must be given together")
        if self.lat is not None:
            if not -90 <= self.lat <= 90:
                raise DomainError(f"latitude {self.lat} outside [-90, 90]")
            if not -180 <= self.lon <= 180:
                raise DomainError(f"longitude {self.lon} outside [-180, 180]")


def _normalise_schedule(schedule) -> dict[int, tuple[RectPulse, ...]]:
    out: dict[int, tuple[RectPulse, ...]] = {}
    for c in sorted(schedule):
        pulses = tuple(schedule[c])
        if pulses:
            out[c] = pulses
    return out


@dataclass(frozen=True)
class VisionUnit:
    """One unit of the network.

    ``schedule`` maps class id to that class's detection windows. Classes
    with no windows are dropped so that equal schedules compare equal.
    """

    id: int
    location: Location = field(default_factory=Location)
    schedule: Mapping[int, tuple[RectPulse, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.id, int) or self.id < 1:
            raise DomainError(f"unit id must be a positive integer, got {self.id!r}")
        object.__setattr__(self, "schedule", _normalise_schedule(self.schedule))

    def pulses(self) -> Iterable[tuple[int, RectPulse]]:
        """(class, pulse) pairs in ascending class id, then schedule order."""
        for c, ps in self.schedule.items():
            for p in ps:
                yield c, p

    def shifted(self, delta: Time) -> VisionUnit:
        sched = {c: tuple(p.shifted(delta) for p in ps) for c, ps in self.schedule.items()}
        return VisionUnit(self.id, self.location, sched)

    def check_classes(self, reg: CompositionRegistry) -> None:
        for c in self.schedule:
            if c not in reg.compositions:
                raise RegistryError(f"unit {self.id} schedules unregistered class {c}")


def class_level_halves(u: VisionUnit, c: int, t2: int) -> int:
    """Detection level of class ``c`` at time ``t2/2`` us, in units of 1/2.

    Overlapping windows of the same class add up, so the level may exceed 1.
    """
    return sum(pulse_value_doubled(p, t2).halves for p in u.schedule.get(c, ()))


def unit_stock_doubled(u: VisionUnit, reg: CompositionRegistry, t2: int) -> tuple[float, ...]:
    acc = [0.0] * reg.psi
    for c in u.schedule:
        halves = class_level_halves(u, c, t2)
        if not halves:
            continue
        xi = halves / 2
        masses = reg.mass_vector(c)
        for j in range(reg.psi):
            acc[j] += xi * masses[j]
    return tuple(acc)


def unit_stock(u: VisionUnit, reg: CompositionRegistry, t: Time) -> tuple[float, ...]:
    """Masses (kg) of each monitored material seen by ``u`` at time ``t``."""
    return unit_stock_doubled(u, reg, 2 * t)


def unit_breakpoints(u: VisionUnit) -> list[Time]:
    points: set[Time] = set()
    for _, p in u.pulses():
        points.update(pulse_breakpoints(p))
    return sorted(points)


@dataclass(frozen=True)
class ConfusionModel:
    """Row-stochastic class-substitution matrix plus a sampling seed.

    Row ``c-1`` gives the probabilities that a true class-``c`` detection is
    reported as class 1..q.
    """

    matrix: tuple[tuple[float, ...], ...]
    seed: int = 0

    def __post_init__(self) -> None:
        rows = tuple(tuple(float(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        q = len(rows)
        if q == 0:
            raise DomainError("confusion matrix is empty")
        for i, row in enumerate(rows, start=1):
            if len(row) != q:
                raise DomainError(f"confusion matrix row {i} has {len(row)} entries, expected {q}")
            if any(not (0.0 <= x <= 1.0) for x in row):
                raise DomainError(f"confusion matrix row {i} has entries outside [0, 1]")
            if abs(math.fsum(row) - 1.0) > ROW_SUM_TOL:
                raise DomainError(f"confusion matrix row {i} sums to {math.fsum(row)!r}, not 1")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    @classmethod
    def identity(cls, q: int, seed: int = 0) -> ConfusionModel:
        return cls(tuple(tuple(1.0 if i == j else 0.0 for j in range(q)) for i in range(q)), seed)

    @property
    def q(self) -> int:
        return len(self.matrix)


def _draw(row: Sequence[float], r: float) -> int:
    acc = 0.0
    last = 0
    for k, p in enumerate(row):
        if p <= 0.0:
            continue
        acc += p
        last = k
        if r < acc:
            return k + 1
    # r landed in the rounding gap above the cumulative sum
    return last + 1


def apply_confusion(u: VisionUnit, cm: ConfusionModel) -> VisionUnit:
    """Relabel each detection window of ``u`` by sampling its confusion row.

    Windows are visited in ascending (class, schedule index) order and one
    uniform draw is taken per window from a generator seeded by
    ``(cm.seed, u.id)``, so the result depends only on the unit and the model.
    Window times are never changed.
    """
    for c in u.schedule:
        if not 1 <= c <= cm.q:
            raise DomainError(f"unit {u.id}: class {c} is outside the {cm.q}x{cm.q} confusion matrix")
    rng = random.Random(f"{cm.seed}/{u.id}")
    relabeled: dict[int, list[RectPulse]] = {}
    for c, p in u.pulses():
        new_c = _draw(cm.matrix[c - 1], rng.random())
        relabeled.setdefault(new_c, []).append(p)
    return VisionUnit(u.id, u.location, relabeled)
