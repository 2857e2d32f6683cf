"""Semicausal generators of quantum and classical semigroups and superchannels.

The four layers:

* :mod:`~semicausal.tensor_linalg` and :mod:`~semicausal.choi` provide leg
  bookkeeping, Choi matrices and the matrix exponential.
* :mod:`~semicausal.quantum_semicausal` checks, synthesizes and extracts
  generators whose semigroup never signals from B to A.
* :mod:`~semicausal.superchannel` does the same for generators acting on
  channels, plus the translation between the two descriptions.
* :mod:`~semicausal.classical_semicausal` is the stochastic-matrix analogue.
"""

from .choi import CheckReport, Superop, choi_to_superop, superop_to_choi
from .classical_semicausal import (ClassicalGenNF, check_classical_generator,
                                   check_classical_semicausal,
                                   check_classical_superchannel_generator,
                                   decompose_classical_generator, semilocalize,
                                   superchannel_generator_classical,
                                   synthesize_classical_generator)
from .errors import (CheckFailed, DimensionMismatch, InvariantViolation, LstsqResidualTooLarge,
                     NotNonnegative, NotPartialIsometry, NotPSD, NotSemicausal, SemicausalError)
from .matrixfile import MatrixFile, ParseError
from .quantum_semicausal import (GklsForm, SemicausalNormalForm, check_semicausal_generator,
                                 extract_normal_form, reduced_generator, synthesize_semicausal)
from .superchannel import (SuperchannelNormalForm, SupermapGen, check_superchannel_generator,
                           evolve_channel, extract_superchannel_nf,
                           synthesize_superchannel_generator)
from .tensor_linalg import BipartiteSystem, expm, partial_trace, partial_transpose

__version__ = "0.1.0"

__all__ = [
    "BipartiteSystem", "CheckFailed", "CheckReport", "ClassicalGenNF", "DimensionMismatch",
    "GklsForm", "InvariantViolation", "LstsqResidualTooLarge", "MatrixFile", "NotNonnegative",
    "NotPSD", "NotPartialIsometry", "NotSemicausal", "ParseError", "SemicausalError",
    "SemicausalNormalForm", "SuperchannelNormalForm", "Superop", "SupermapGen",
    "check_classical_generator", "check_classical_semicausal",
    "check_classical_superchannel_generator", "check_semicausal_generator",
    "check_superchannel_generator", "choi_to_superop", "decompose_classical_generator",
    "evolve_channel", "expm", "extract_normal_form", "extract_superchannel_nf",
    "partial_trace", "partial_transpose", "reduced_generator", "semilocalize",
    "superchannel_generator_classical", "superop_to_choi", "synthesize_classical_generator",
    "synthesize_semicausal", "synthesize_superchannel_generator",
]
