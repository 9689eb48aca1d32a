"""CSS quantum error correction from classical GF(2) codes, with a dense state-vector simulator."""

from .codes import CssTriple, LinearCode, build_css, dual, get_code, get_css, seven_qubit_triple, three_qubit_triple
from .exceptions import CapabilityError, ConstructionError, UsageError
from .gf2 import BinaryMatrix, BitWord

__all__ = [
    "BinaryMatrix",
    "BitWord",
    "CapabilityError",
    "ConstructionError",
    "CssTriple",
    "LinearCode",
    "UsageError",
    "build_css",
    "dual",
    "get_code",
    "get_css",
    "seven_qubit_triple",
    "three_qubit_triple",
]

__version__ = "0.1.0"
