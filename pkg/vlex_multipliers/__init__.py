from vlex_multipliers.exponent.VariableExponent import VariableExponent, ConstantExponent
from vlex_multipliers.grid.GridFunction import Grid, GridFunction
from vlex_multipliers.grid.norms import luxemburg_norm
from vlex_multipliers.symbols.Symbol import MultiplierSymbol, Symbol
from vlex_multipliers.transform.estimates import multiplier_norm_bounds
from vlex_multipliers.pipelines.ApproximationCertificate import ApproximationCertificate
from vlex_multipliers.oracle.opnorm import discrete_opnorm
from vlex_multipliers.oracle.DiscreteSpace import DiscreteSpace, discrete_luxemburg

__version__ = "0.1.0"
__author__ = "vlex-multipliers contributors"

__all__ = [
    "VariableExponent", "ConstantExponent", "Grid", "GridFunction",
    "luxemburg_norm", "MultiplierSymbol", "Symbol", "multiplier_norm_bounds",
    "ApproximationCertificate", "discrete_opnorm", "DiscreteSpace",
    "discrete_luxemburg",
]
