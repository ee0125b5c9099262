from .gates import controlled_part, diagonal_phase, gate_matrix, phase_angle
from .generators import (gen_adder, gen_ghz_chain, gen_hadamard_wall, gen_qft, gen_shor,
                         swap_network)
from .ir import (GATE_OPCODES, PERMUTATION_GATES, PHASE_GATES, BitPermutation, Circuit,
                 Instruction, NoiseConfig, Opcode, ShorParams)
from .parser import ParseError, format_instruction, parse_program, pretty_print
from .validate import Issue, ValidationReport, validate

__all__ = [
    "BitPermutation", "Circuit", "GATE_OPCODES", "Instruction", "Issue", "NoiseConfig",
    "Opcode", "PERMUTATION_GATES", "PHASE_GATES", "ParseError", "ShorParams",
    "ValidationReport", "controlled_part", "diagonal_phase", "format_instruction",
    "gate_matrix", "gen_adder", "gen_ghz_chain", "gen_hadamard_wall", "gen_qft", "gen_shor",
    "parse_program", "phase_angle", "pretty_print", "swap_network", "validate",
]
