"""Gate-level simulation of quantum circuits on classical state vectors."""
from .circuit import Circuit, Instruction, Opcode, parse_program
from .rng import Rng

__version__ = "0.1.0"
__all__ = ["Circuit", "Instruction", "Opcode", "Rng", "parse_program"]
