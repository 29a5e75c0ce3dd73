"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

from __future__ import annotations

import csv
import filecmp
import math
import random
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from matmap.aggregator import (
    mass_time_integral,
    network_stock,
    sample_series,
    stock_events,
    stock_series,
)
from matmap.cli import main
from matmap.errors import RotationError
from matmap.geometry import (
    FrameTransform,
    TargetVector,
    pick_points_robot,
    split_target,
    to_robot_frame,
    validate_rotation,
)
from netgen import pulse_hull, random_network
from oracle import naive_network_stock

S = 1_000_000
GRID = S // 10
EXPECTED_TIMES = [t * S for t in (20, 30, 40, 50, 100, 110, 120, 130)]
N_NETWORKS = 200
SEED = 20231018


def record(n: int, ok: bool, text: str) -> None:
    ACCEPTANCE[n] = (ok, text)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {text}")
    assert ok, text


@pytest.fixture(scope="module")
def random_networks():
    rng = random.Random(SEED)
    return [random_network(rng) for _ in range(N_NETWORKS)]


def _read_events(path):
    with open(path, newline="") as fh:
        return [
            (int(r["t_us"]), int(r["material"]), float(r["delta_kg"])) for r in csv.DictReader(fh)
        ]


def test_1_event_times(tmp_path, two_units_path):
    start = time.perf_counter()
    code = main(["simulate", str(two_units_path), "-o", str(tmp_path)])
    elapsed = time.perf_counter() - start
    events = _read_events(tmp_path / "events.csv")
    per_material = {j: [t for t, m, _ in events if m == j] for j in (1, 2, 3)}
    ok = code == 0 and all(v == EXPECTED_TIMES for v in per_material.values()) and elapsed < 1.0
    record(1, ok, f"event times {sorted({t // S for t, _, _ in events})} s for all 3 materials, "
                  f"simulate took {elapsed:.3f} s (< 1 s)")


def test_2_step_magnitudes(tmp_path, two_units_path, two_units):
    assert main(["simulate", str(two_units_path), "-o", str(tmp_path)]) == 0
    from_csv = _read_events(tmp_path / "events.csv")
    from_api = [(e.time, e.material, e.delta) for e in stock_events(two_units)]
    ok = from_csv == from_api
    for j, kg in ((1, 1.0), (2, 2.0), (3, 3.0)):
        deltas = [d for _, m, d in from_api if m == j]
        ok = ok and deltas == [kg] * 4 + [-kg] * 4
    record(2, ok, "deltas are +-1, +-2, +-3 kg for materials 1, 2, 3")


def test_3_plateau(two_units):
    interior = range(50 * S + 1, 100 * S, GRID // 7)
    oracle_values = {naive_network_stock(two_units, t) for t in interior}
    oracle_values.add(naive_network_stock(two_units, 75 * S))
    series = stock_series(two_units)
    k = series.breakpoints.index(50 * S)
    ok = (
        oracle_values == {(4.0, 8.0, 12.0)}
        and series.plateaus[k + 1] == (4.0, 8.0, 12.0)
        and series.breakpoints[k + 1] == 100 * S
        and network_stock(two_units, 75 * S) == (4.0, 8.0, 12.0)
    )
    record(3, ok, f"stock on (50 s, 100 s) = {series.plateaus[k + 1]} kg, oracle agrees")


def test_4_oracle_equivalence(random_networks):
    start = time.perf_counter()
    checked = 0
    mismatches = 0
    for net in random_networks:
        hull = pulse_hull(net)
        series = stock_series(net)
        if hull is None:
            lo = hi = 0
        else:
            lo, hi = hull
        first = lo - lo % GRID
        for t, vec in sample_series(series, first, hi + GRID, GRID):
            checked += 1
            if vec != naive_network_stock(net, t):
                mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 30.0
    record(4, ok, f"{N_NETWORKS} networks, {checked} grid points, {mismatches} mismatches, "
                  f"{elapsed:.1f} s (< 30 s)")


def test_5_conservation(random_networks):
    bad = [i for i, net in enumerate(random_networks)
           if mass_time_integral(net) != stock_series(net).integral()]
    record(5, not bad, f"closed-form integral equals plateau sum on {N_NETWORKS - len(bad)}/{N_NETWORKS}")


def _times(net):
    series = stock_series(net)
    bps = list(series.breakpoints)
    mids = [(a + b) // 2 for a, b in zip(bps, bps[1:])]
    return bps + mids + ([bps[0] - 1, bps[-1] + 1] if bps else [0])


def test_6_linearity_and_equivariance(random_networks):
    rng = random.Random(SEED + 1)
    failures = {"partition": 0, "scaling": 0, "shift": 0}
    worst_rel = 0.0
    for net in random_networks:
        times = _times(net)
        # superposition over a random partition of the units
        groups: dict[int, list[int]] = {}
        for u in net.units:
            groups.setdefault(rng.randrange(3), []).append(u.id)
        subs = [net.subnetwork(g) for g in groups.values()]
        for t in times:
            total = [0.0] * net.psi
            for sub in subs:
                for j, v in enumerate(network_stock(sub, t)):
                    total[j] += v
            if tuple(total) != network_stock(net, t):
                failures["partition"] += 1
        # composition scaling
        alpha = rng.choice([0.0, 0.1, 0.5, 2.0, 3.7, math.pi])
        scaled = net.with_registry(net.registry.scaled(alpha))
        for t in times:
            for got, base in zip(network_stock(scaled, t), network_stock(net, t)):
                ref = alpha * base
                if ref == 0.0:
                    if got != 0.0:
                        failures["scaling"] += 1
                    continue
                rel = abs(got - ref) / abs(ref)
                worst_rel = max(worst_rel, rel)
                if rel > 1e-12:
                    failures["scaling"] += 1
        # global time shift
        delta = rng.randrange(-10**9, 10**9)
        moved = net.shifted(delta)
        a, b = stock_series(net), stock_series(moved)
        if (
            b.breakpoints != tuple(t + delta for t in a.breakpoints)
            or b.plateaus != a.plateaus
            or b.boundary_values != a.boundary_values
        ):
            failures["shift"] += 1
        for t in times:
            if network_stock(moved, t + delta) != network_stock(net, t):
                failures["shift"] += 1
    ok = not any(failures.values())
    record(6, ok, f"failures {failures}, worst scaling rel error {worst_rel:.2e} (<= 1e-12)")


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def test_7_geometry():
    rng = np.random.default_rng(SEED)
    worst_round_trip = 0.0
    worst_distance = 0.0
    for _ in range(1000):
        f = FrameTransform(validate_rotation(_random_rotation(rng)), rng.uniform(-100, 100, 3),
                           rng.uniform(-50, 50))
        t = TargetVector(*rng.uniform(-50, 50, 4))
        local = split_target(t, f.plane_height)
        robot = pick_points_robot(f, t)
        inv = f.inverse()
        for p_l, p_r in zip(local, robot):
            worst_round_trip = max(worst_round_trip, float(np.max(np.abs(to_robot_frame(inv, p_r) - p_l))))
        d_l = np.linalg.norm(local.first - local.second)
        d_r = np.linalg.norm(robot.first - robot.second)
        worst_distance = max(worst_distance, abs(d_r - d_l))

    def rejects(m) -> bool:
        try:
            validate_rotation(m)
        except RotationError:
            return True
        return False

    reflection = rejects(np.diag([1.0, 1.0, -1.0]))
    perturbed = []
    for _ in range(100):
        R = _random_rotation(rng)
        i, j = rng.choice([(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)])
        for eps in (1e-6, -1e-6, 1e-3):
            bad = R.copy()
            bad[i, j] += eps
            perturbed.append(rejects(bad))
    ok = worst_round_trip <= 1e-9 and worst_distance <= 1e-9 and reflection and all(perturbed)
    record(7, ok, f"round trip {worst_round_trip:.2e} cm, distance {worst_distance:.2e} cm (<= 1e-9); "
                  f"reflection rejected={reflection}; {sum(perturbed)}/{len(perturbed)} perturbed rejected")


def test_8_determinism(tmp_path, two_units_path):
    runs = {
        "a": ["simulate", str(two_units_path)],
        "b": ["simulate", str(two_units_path)],
        "parallel": ["simulate", str(two_units_path), "--jobs", "2"],
    }
    for name, argv in runs.items():
        assert main([*argv, "-o", str(tmp_path / name)]) == 0
    files = ["series.csv", "events.csv", "map.csv", "summary.txt"]
    same = all(
        filecmp.cmp(tmp_path / "a" / f, tmp_path / other / f, shallow=False)
        for f in files
        for other in ("b", "parallel")
    )
    record(8, same, "repeat and --jobs 2 runs are byte-identical for " + ", ".join(files))
