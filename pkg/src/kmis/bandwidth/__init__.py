"""Bandwidth selection: closed-form LOMSE optimum and Lepski-style grid search."""

from kmis.bandwidth.grid import BandwidthGrid, synthetic_grid, warfarin_grid
from kmis.bandwidth.lomse import LomseConstants, lomse, optimal_bandwidth
from kmis.bandwidth.plugin import BandwidthChoice, estimate_cb, estimate_cv, kallus_bandwidth
from kmis.bandwidth.slope import SlopeDiagnostics, SlopePoint, slope_select

__all__ = [
    "BandwidthChoice",
    "BandwidthGrid",
    "LomseConstants",
    "SlopeDiagnostics",
    "SlopePoint",
    "estimate_cb",
    "estimate_cv",
    "kallus_bandwidth",
    "lomse",
    "optimal_bandwidth",
    "slope_select",
    "synthetic_grid",
    "warfarin_grid",
]
