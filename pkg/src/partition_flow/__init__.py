"""Spectral flow, Dirichlet-to-Neumann matrices and deficiency of partitions."""

from .circle_model import CircleConfig, circle_deficiency, edge_dn, mu_spectrum
from .eigen_core import DNMatrix, Spectrum, SymmetricOperator, eig_dense, eig_lowest, morse_index, schur_dn
from .flow_analysis import crossing_count, deficiency, lemma_eigeig_check, sigma_sweep
from .grid_model import assemble_laplacian, assemble_slit, build_grid, robin_family
from .partition_graph import PartitionGraph, odd_data, slit, slit_verify, validate
from .report import DeficiencyReport

__version__ = "0.1.0"
