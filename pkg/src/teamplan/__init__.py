"""Task allocation and planning for robot teams under uncertainty."""

from .ltl import (
    Formula,
    TrueConst,
    FalseConst,
    Atom,
    NotAtom,
    And,
    Or,
    Next,
    Eventually,
    Always,
    Until,
    TRUE,
    FALSE,
    FormulaClass,
    Mission,
    MissionError,
    ParseError,
    atoms_of,
    classify,
    format_formula,
    is_bad_prefix,
    is_good_prefix,
    is_syntactically_cosafe,
    is_syntactically_safe,
    load_mission,
    mission_from_dict,
    mission_to_dict,
    parse_formula,
    to_pnf,
)
from .dfa import CompileError, Dfa, canonical, compile_cosafe, compile_formula, compile_safe, minimize, progress

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
