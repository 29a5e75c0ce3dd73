import ast
from pathlib import Path

import pytest

from matmap.aggregator import Network, network_stock, sample_series, stock_series
from matmap.signal import RectPulse
from matmap.unit import VisionUnit
from oracle import dense_trace, naive_network_stock

S = 1_000_000


def test_oracle_agrees_on_two_units_grid(two_units):
    times = range(0, 150 * S + 1, S // 10)
    assert len(times) == 1501
    for t in times:
        assert naive_network_stock(two_units, t) == network_stock(two_units, t)


def test_oracle_empty_network(two_units):
    assert naive_network_stock(Network((), two_units.registry), 5 * S) == (0.0, 0.0, 0.0)


def test_oracle_single_pulse_center(two_units):
    net = Network((VisionUnit(1, schedule={2: [RectPulse(60 * S, 80 * S)]}),), two_units.registry)
    assert naive_network_stock(net, 60 * S) == two_units.registry.mass_vector(2)


def test_dense_trace_matches_samples(two_units):
    trace = dense_trace(two_units, 0, 150 * S, S // 10)
    samples = sample_series(stock_series(two_units), 0, 150 * S, S // 10)
    assert list(trace.times) == [t for t, _ in samples]
    assert list(trace.values) == [v for _, v in samples]


def test_dense_trace_step_equal_to_span(two_units):
    trace = dense_trace(two_units, 0, 10 * S, 10 * S)
    assert trace.times == (0, 10 * S)


def test_dense_trace_shift(two_units):
    delta = 7 * S + 3
    base = dense_trace(two_units, 0, 150 * S, S)
    moved = dense_trace(two_units.shifted(delta), delta, 150 * S + delta, S)
    assert moved.values == base.values


def test_dense_trace_rejects_bad_step(two_units):
    with pytest.raises(ValueError):
        dense_trace(two_units, 0, 1, 0)


def test_oracle_only_uses_rect():
    tree = ast.parse((Path(__file__).parent / "oracle.py").read_text())
    imported = [
        (node.module, alias.name)
        for node in ast.walk(tree)
        if isinstance(node, ast.ImportFrom) and node.module and node.module.startswith("matmap")
        for alias in node.names
    ]
    assert imported == [("matmap.signal", "rect")]
