"""Joint beamforming and IRS selection for multi-IRS downlink systems."""

from ._core import (
    Config,
    Drop,
    OptimOptions,
    make_drop,
    preset_config,
    reference_config,
    run_drops,
    run_method,
    select_assignment,
    sum_rate,
    sinrs,
    summarize,
)

__all__ = [
    "Config",
    "Drop",
    "OptimOptions",
    "make_drop",
    "preset_config",
    "reference_config",
    "run_drops",
    "run_method",
    "select_assignment",
    "sum_rate",
    "sinrs",
    "summarize",
]
