"""Simulate a network of vision units that track material stocks.

Each unit reports rectangular detection windows for object classes; class
compositions turn those into per-material masses, and the network total is
kept as an exact step function of time.
"""

from .aggregator import (
    MapRow,
    Network,
    StockEvent,
    StockSeries,
    mass_time_integral,
    network_stock,
    sample_series,
    spatial_map,
    stock_events,
    stock_series,
)
from .composition import CompositionRegistry, Material, ObjectClass
from .errors import DomainError, MatmapError, RegistryError, RotationError, ScenarioError
from .signal import PulseLevel, RectPulse, pulse_breakpoints, pulse_support, pulse_value, rect
from .unit import ConfusionModel, Location, VisionUnit, apply_confusion, unit_breakpoints, unit_stock

__version__ = "0.1.0"

__all__ = [
    "CompositionRegistry",
    "ConfusionModel",
    "DomainError",
    "Location",
    "MapRow",
    "Material",
    "MatmapError",
    "Network",
    "ObjectClass",
    "PulseLevel",
    "RectPulse",
    "RegistryError",
    "RotationError",
    "ScenarioError",
    "StockEvent",
    "StockSeries",
    "VisionUnit",
    "apply_confusion",
    "mass_time_integral",
    "network_stock",
    "pulse_breakpoints",
    "pulse_support",
    "pulse_value",
    "rect",
    "sample_series",
    "spatial_map",
    "stock_events",
    "stock_series",
    "unit_breakpoints",
    "unit_stock",
]
