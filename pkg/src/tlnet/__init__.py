"""tlnet: scattering networks with time loops.

Block operators and the noncommutative Moebius feedback reduction, the
two-beamsplitter loop, welcher-weg path sums, paradox scenarios (absorber,
guardian angel, projective and balanced loops), Deutsch and Lloyd CTC
comparators, and coherent-state Weyl-triple feedback.
"""
from .blockop import BlockOperator, block_diag, haar_unitary, is_contraction, is_unitary, partition
from .ctc import BipartiteUnitary, DensityMatrix, deutsch_fixed_point, lloyd_pctc
from .errors import (
    BlockDiagonalError,
    DimensionError,
    IllPosedError,
    NetworkSyntaxError,
    NetworkValueError,
    NoConvergenceError,
    NoRootError,
    ParadoxError,
    ProjectionError,
    SchemaError,
)
from .gaussian import LinearDevice, gaussian_feedback, model_matrix, weyl_compose
from .mobius import FeedbackSpec, check_siegel, moebius, moebius_series, well_posedness
from .netdesc import NetworkDescription, build, load, parse_network, serialize, validate
from .paradox import (
    absorber_reduce,
    balanced_loop,
    guardian_angel_solve,
    projective_loop_reduce,
)
from .paths import PathTable, closed_form_from_paths, path_sum, transfer_coefficients, truncation_curve
from .timeloop import (
    BeamsplitterParams,
    LoopNetwork,
    gs_beamsplitter,
    gs_closed_form,
    gs_network,
    open_loop,
    reduce_loop,
    reversed_beamsplitter,
    reversed_polarity_closed_form,
)

__version__ = "0.1.0"
