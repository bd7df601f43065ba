"""Graver bases, degree bounds and augmentation for N-fold four-block integer programs."""

from .graver import GraverBasis, conformal, conformal_decompose, graver_basis
from .matrix import (BlockSystem, IntMatrix, Shape, assemble_four_block,
                     assemble_transposed_form, hermite_normal_form, solve_diophantine)
from .oracle import BoxSpec, graver_oracle, ip_oracle
from .problem import INF, NEG_INF, ConvexPiecewise, IPInstance, SeparableObjective, SolveOutcome, Status
from .solver import augment_solve, certify_or_improve, four_block_augment, four_block_solve, nfold_solve

__all__ = [
    "BlockSystem", "BoxSpec", "ConvexPiecewise", "GraverBasis", "INF", "IPInstance", "IntMatrix",
    "NEG_INF", "SeparableObjective", "Shape", "SolveOutcome", "Status", "assemble_four_block",
    "assemble_transposed_form", "augment_solve", "certify_or_improve", "conformal",
    "conformal_decompose", "four_block_augment", "four_block_solve", "graver_basis",
    "graver_oracle", "hermite_normal_form", "ip_oracle", "nfold_solve", "solve_diophantine",
]
