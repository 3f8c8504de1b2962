from vlex_multipliers.symbols.Symbol import (
    MultiplierSymbol,
    Symbol,
    Piece,
    Jump,
    WienerForm,
    SymbolClass,
    write_symbol_csv
)
from vlex_multipliers.symbols.MollifiedSymbol import (
    MollifiedSymbol,
    bump,
    mollifier_constant,
    mollifier_moment
)
from vlex_multipliers.symbols.norms import (
    sup_norm,
    total_variation,
    vnorm,
    refinement_variation,
    wiener_norm,
    symbol_wiener_norm,
    wiener_defect,
    so3_norm,
    osc,
    dyadic_oscillation
)
from vlex_multipliers.symbols.constructions import (
    psi_n,
    sgn,
    unit_step,
    mollifier,
    convolve_mollify,
    jump_killer_infinity,
    jump_killer_at,
    blaschke_rational,
    pc0_quantize
)

__all__ = [
    "MultiplierSymbol", "Symbol", "Piece", "Jump", "WienerForm", "SymbolClass",
    "write_symbol_csv", "MollifiedSymbol", "bump", "mollifier_constant",
    "mollifier_moment", "sup_norm", "total_variation", "vnorm",
    "refinement_variation", "wiener_norm", "symbol_wiener_norm",
    "wiener_defect", "so3_norm", "osc", "dyadic_oscillation", "psi_n", "sgn",
    "unit_step", "mollifier", "convolve_mollify", "jump_killer_infinity",
    "jump_killer_at", "blaschke_rational", "pc0_quantize",
]
