"""Fourier analysis, noncommutative Lp norms and lacunary sets on SU_q(2)."""

from .rep import Irrep, QuantumGroupModel, fuse, q_matrix, quantum_dim, suq2
from .fourier import FourierElement, MultiplierSymbol, convolve, l1_dual_norm, l2_norm
from .norms import CentralPoly, GeneratorPoly, central_l2, central_l4, central_sup_norm, gns_norm_estimate
from .finvn import StateAlgebra, OrthoSystem, greedy_lambda_select, haagerup_lp_norm
from .lacunary import IrrepSet, LacunaReport, central_lambda4_ratio, gap_set, kq_constant

__all__ = [
    "Irrep", "QuantumGroupModel", "fuse", "q_matrix", "quantum_dim", "suq2",
    "FourierElement", "MultiplierSymbol", "convolve", "l1_dual_norm", "l2_norm",
    "CentralPoly", "GeneratorPoly", "central_l2", "central_l4", "central_sup_norm", "gns_norm_estimate",
    "StateAlgebra", "OrthoSystem", "greedy_lambda_select", "haagerup_lp_norm",
    "IrrepSet", "LacunaReport", "central_lambda4_ratio", "gap_set", "kq_constant",
]

__version__ = "0.1.0"
