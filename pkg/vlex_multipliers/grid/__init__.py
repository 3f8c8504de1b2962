from vlex_multipliers.grid.GridFunction import Grid, GridFunction, read_csv, write_csv
from vlex_multipliers.grid.norms import (
    modular,
    luxemburg_norm,
    lp_integral_norm,
    l2_norm,
    indicator_norm,
    averaged_indicator_constant,
    dyadic_intervals
)

__all__ = [
    "Grid", "GridFunction", "read_csv", "write_csv", "modular",
    "luxemburg_norm", "lp_integral_norm", "l2_norm", "indicator_norm",
    "averaged_indicator_constant", "dyadic_intervals",
]
