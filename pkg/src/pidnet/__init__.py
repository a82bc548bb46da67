"""Distributed PID consensus for networks of first-order linear agents.

Spectral graph machinery, closed-loop network assembly, transverse-dynamics
analysis, gain certification and fixed-step simulation, plus a CLI
(`pidnet analyze|simulate|tune|reproduce`).
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateDecomposition,
    DimensionMismatch,
    DisconnectedGraph,
    InvalidGraph,
    InvalidWeight,
    NonFinite,
    NotHomogeneous,
    PidnetError,
    SingularEnsemble,
    StepTooLarge,
    UnstableAverage,
)
from .netmodel import (
    ClosedLoopSystem,
    Equilibrium,
    Gains,
    Instance,
    NodeEnsemble,
    assemble,
    assemble_instance,
    consensus_protocol_input,
    equilibrium,
)
from .sim import (
    MicrogridScenario,
    SimConfig,
    Trace,
    build_microgrid,
    default_x0,
    integrate,
    metrics,
)
from .spectral import (
    Graph,
    Laplacian,
    ModifiedLaplacian,
    SpectralDecomposition,
    build_laplacian,
    h_norm_bound,
    modified_laplacian,
    spectral_decompose,
)
from .transverse import (
    DisturbanceMaps,
    PsiBlocks,
    TransverseSystem,
    disturbance_maps,
    psi_blocks,
    transverse_matrix,
    transverse_system,
)
from .tuning import (
    Certificate,
    Condition,
    H1Matrix,
    certify,
    certify_heterogeneous_pid,
    certify_homogeneous_pd,
    certify_homogeneous_pi,
    certify_homogeneous_pid,
    convergence_rate,
    h1_matrix,
    min_alpha,
    z_infinity_bound,
)
