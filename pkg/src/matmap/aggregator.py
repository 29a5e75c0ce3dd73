"""Network-wide stock aggregation.

The network stock is the sum of every unit's stock signal. It is a step
function, so it is held exactly as breakpoints, the constant value on each
open interval between them, and the value at each breakpoint itself (which
carries the half levels of window edges).

All floating-point reductions run in ascending unit id, then ascending class
id, so results are bit-reproducible however per-unit work is scheduled.
"""

from __future__ import annotations

import bisect
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .composition import CompositionRegistry
from .errors import DomainError
from .signal import Time, US_PER_S
from .unit import Location, VisionUnit, unit_breakpoints, unit_stock_doubled

Vector = tuple[float, ...]


@dataclass(frozen=True)
class Network:
    units: tuple[VisionUnit, ...]
    registry: CompositionRegistry

    def __post_init__(self) -> None:
        units = tuple(sorted(self.units, key=lambda u: u.id))
        ids = [u.id for u in units]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DomainError(f"duplicate unit ids: {dupes}")
        for u in units:
            u.check_classes(self.registry)
        object.__setattr__(self, "units", units)

    @property
    def psi(self) -> int:
        return self.registry.psi

    def subnetwork(self, unit_ids: Iterable[int]) -> Network:
        keep = set(unit_ids)
        return Network(tuple(u for u in self.units if u.id in keep), self.registry)

    def shifted(self, delta: Time) -> Network:
        return Network(tuple(u.shifted(delta) for u in self.units), self.registry)

    def with_registry(self, registry: CompositionRegistry) -> Network:
        return Network(self.units, registry)


@dataclass(frozen=True)
class StockEvent:
    time: Time
    material: int
    delta: float  # kg, value after minus value before
    after: float  # kg, plateau value after the step


@dataclass(frozen=True)
class StockSeries:
    """Exact piecewise-constant network stock.

    ``plateaus[k]`` is the value on the open interval ending at
    ``breakpoints[k]``; the last plateau runs to +infinity, so there is always
    one more plateau than breakpoints. The two unbounded plateaus are zero.
    """

    breakpoints: tuple[Time, ...]
    plateaus: tuple[Vector, ...]
    boundary_values: tuple[Vector, ...]

    def value_at(self, t: Time) -> Vector:
        k = bisect.bisect_left(self.breakpoints, t)
        if k < len(self.breakpoints) and self.breakpoints[k] == t:
            return self.boundary_values[k]
        return self.plateaus[k]

    def intervals(self) -> Iterable[tuple[Time, Time, Vector]]:
        """Bounded intervals as (start, end, plateau)."""
        bp = self.breakpoints
        for k in range(len(bp) - 1):
            yield bp[k], bp[k + 1], self.plateaus[k + 1]

    def integral(self) -> Vector:
        """Time integral of each material's stock, in kg*s."""
        psi = len(self.plateaus[0])
        acc = [0.0] * psi
        for start, end, plateau in self.intervals():
            length = end - start
            for j in range(psi):
                acc[j] += length * plateau[j]
        return tuple(a / US_PER_S for a in acc)


def _reduce(vectors: Iterable[Vector], psi: int) -> Vector:
    acc = [0.0] * psi
    for v in vectors:
        for j in range(psi):
            acc[j] += v[j]
    return tuple(acc)


def network_stock(net: Network, t: Time) -> Vector:
    """Total stock (kg) of each monitored material across the network at ``t``."""
    return _reduce((unit_stock_doubled(u, net.registry, 2 * t) for u in net.units), net.psi)


def network_breakpoints(net: Network) -> list[Time]:
    points: set[Time] = set()
    for u in net.units:
        points.update(unit_breakpoints(u))
    return sorted(points)


def _unit_trace(args: tuple[VisionUnit, CompositionRegistry, Sequence[int]]) -> list[Vector]:
    u, reg, points2 = args
    return [unit_stock_doubled(u, reg, t2) for t2 in points2]


def stock_series(net: Network, *, workers: int | None = None) -> StockSeries:
    """Build the exact step representation of the network stock.

    With ``workers > 1`` the per-unit traces are computed in a process pool;
    the reduction over units is always serial, so the output is identical.
    """
    bps = network_breakpoints(net)
    zero = (0.0,) * net.psi
    # doubled times: each breakpoint, then each interior midpoint
    points2 = [2 * b for b in bps] + [bps[k] + bps[k + 1] for k in range(len(bps) - 1)]
    jobs = [(u, net.registry, points2) for u in net.units]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_unit_trace, jobs))
    else:
        traces = [_unit_trace(job) for job in jobs]
    values = [_reduce((tr[i] for tr in traces), net.psi) for i in range(len(points2))]
    n = len(bps)
    boundary = tuple(values[:n])
    interior = values[n:]
    plateaus = (zero,) + tuple(interior) + ((zero,) if n else ())
    return StockSeries(tuple(bps), plateaus, boundary)


def stock_events(net: Network, series: StockSeries | None = None) -> list[StockEvent]:
    """One event per (breakpoint, material) where the plateau value changes."""
    if series is None:
        series = stock_series(net)
    events = []
    for k, t in enumerate(series.breakpoints):
        before, after = series.plateaus[k], series.plateaus[k + 1]
        for j in range(len(before)):
            delta = after[j] - before[j]
            if delta != 0:
                events.append(StockEvent(t, j + 1, delta, after[j]))
    return events


def sample_series(
    series: StockSeries, t0: Time, t1: Time, step: Time
) -> list[tuple[Time, Vector]]:
    """Evaluate ``series`` on the grid t0, t0+step, ... <= t1.

    Grid times landing on a breakpoint get the breakpoint value, not a plateau.
    """
    if step <= 0:
        raise DomainError(f"sample step must be positive, got {step} us")
    if t1 < t0:
        raise DomainError(f"sample window is reversed: t0={t0} > t1={t1}")
    return [(t, series.value_at(t)) for t in range(t0, t1 + 1, step)]


def mass_time_integral(net: Network) -> Vector:
    """Closed-form time integral (kg*s) of each material's network stock."""
    psi = net.psi
    acc = [0.0] * psi
    for u in net.units:
        for c, p in u.pulses():
            masses = net.registry.mass_vector(c)
            for j in range(psi):
                acc[j] += p.duration * masses[j]
    return tuple(a / US_PER_S for a in acc)


@dataclass(frozen=True)
class MapRow:
    unit_id: int
    location: Location
    stock: Vector


def spatial_map(net: Network, t: Time) -> list[MapRow]:
    """Per-unit stock at ``t`` tagged with each unit's location."""
    return [
        MapRow(u.id, u.location, unit_stock_doubled(u, net.registry, 2 * t)) for u in net.units
    ]
