"""Agent ensembles and the augmented closed-loop consensus network.

The closed loop couples N first-order agents
``xdot_i = rho_i x_i + delta_i + u_i`` through the distributed PID protocol
``u_i = -sum_j L_ij (alpha x_j + beta int x_j + gamma xdot_j)``. Resolving
the implicit derivative coupling with ``L_tilde = I + gamma*L`` gives the
explicit 2N-dimensional augmented system integrated by :mod:`pidnet.sim`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularEnsemble
from .spectral import (
    Graph,
    ModifiedLaplacian,
    SpectralDecomposition,
    build_laplacian,
    modified_laplacian,
    spectral_decompose,
)

# Two poles are "identical" when their spread is below this relative level.
HOMOGENEITY_RTOL = 1e-12


@dataclass(frozen=True)
class NodeEnsemble:
    """Per-node poles rho_i and constant disturbances delta_i."""

    rho: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float))
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float))
        if self.rho.ndim != 1 or self.delta.shape != self.rho.shape:
            raise DimensionMismatch(
                f"rho shape {self.rho.shape} vs delta shape {self.delta.shape}"
            )

    @property
    def node_count(self) -> int:
        return self.rho.size

    @property
    def P(self) -> np.ndarray:
        return np.diag(self.rho)

    def is_homogeneous(self, rtol: float = HOMOGENEITY_RTOL) -> bool:
        spread = float(np.max(self.rho) - np.min(self.rho))
        return spread <= rtol * max(1.0, float(np.max(np.abs(self.rho))))


@dataclass(frozen=True)
class Gains:
    """PID protocol gains: alpha > 0, beta >= 0, gamma >= 0."""

    alpha: float
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")


@dataclass(frozen=True)
class Instance:
    """A graph's spectral data paired with an agent ensemble."""

    dec: SpectralDecomposition
    ensemble: NodeEnsemble

    def __post_init__(self):
        if self.dec.node_count != self.ensemble.node_count:
            raise DimensionMismatch(
                f"graph has {self.dec.node_count} nodes, ensemble {self.ensemble.node_count}"
            )

    @staticmethod
    def from_graph(graph: Graph, rho, delta) -> "Instance":
        dec = spectral_decompose(build_laplacian(graph))
        return Instance(dec=dec, ensemble=NodeEnsemble(rho=rho, delta=delta))

    @property
    def node_count(self) -> int:
        return self.dec.node_count


@dataclass(frozen=True)
class ClosedLoopSystem:
    """Augmented dynamics d/dt [x; z] = A [x; z] + affine."""

    A: np.ndarray
    affine: np.ndarray
    dec: SpectralDecomposition
    mod_lap: ModifiedLaplacian
    ensemble: NodeEnsemble
    gains: Gains

    @property
    def node_count(self) -> int:
        return self.ensemble.node_count

    @property
    def A1(self) -> np.ndarray:
        n = self.node_count
        return self.A[:n, :n]

    @property
    def A2(self) -> np.ndarray:
        n = self.node_count
        return self.A[n:, :n]


def assemble(
    dec: SpectralDecomposition,
    mod_lap: ModifiedLaplacian,
    ensemble: NodeEnsemble,
    gains: Gains,
) -> ClosedLoopSystem:
    """Build the 2N-dimensional closed-loop system matrix and affine term."""
    n = dec.node_count
    if mod_lap.node_count != n or ensemble.node_count != n:
        raise DimensionMismatch("graph, modified Laplacian and ensemble sizes differ")
    if mod_lap.gamma != gains.gamma:
        raise DimensionMismatch(
            f"modified Laplacian built for gamma={mod_lap.gamma}, gains have gamma={gains.gamma}"
        )
    L = dec.laplacian
    Linv = mod_lap.L_tilde_inv
    A1 = Linv @ (ensemble.P - gains.alpha * L)
    A2 = -gains.beta * (Linv @ L)
    A = np.block([[A1, np.eye(n)], [A2, np.zeros((n, n))]])
    affine = np.concatenate([Linv @ ensemble.delta, np.zeros(n)])
    return ClosedLoopSystem(
        A=A, affine=affine, dec=dec, mod_lap=mod_lap, ensemble=ensemble, gains=gains
    )


def assemble_instance(instance: Instance, gains: Gains) -> ClosedLoopSystem:
    """Convenience wrapper deriving the modified Laplacian from the gains."""
    mod_lap = modified_laplacian(instance.dec, gains.gamma)
    return assemble(instance.dec, mod_lap, instance.ensemble, gains)


@dataclass(frozen=True)
class Equilibrium:
    """Unique fixed point of the closed-loop network."""

    x_inf: float
    x_star: np.ndarray
    z_star: np.ndarray


def equilibrium(sys: ClosedLoopSystem) -> Equilibrium:
    """Consensus equilibrium x* = x_inf * ones, z* = -L_tilde^-1 (P x* + delta)."""
    rho = sys.ensemble.rho
    delta = sys.ensemble.delta
    n = rho.size
    rho_sum = float(np.sum(rho))
    scale = float(np.max(np.abs(rho))) if n else 0.0
    threshold = 1e-10 * n * scale if scale > 0 else 1e-12
    if abs(rho_sum) <= threshold:
        raise SingularEnsemble(f"sum of poles {rho_sum:.3e} is numerically zero")
    x_inf = -float(np.sum(delta)) / rho_sum
    x_star = x_inf * np.ones(n)
    z_star = -sys.mod_lap.L_tilde_inv @ (rho * x_star + delta)
    return Equilibrium(x_inf=x_inf, x_star=x_star, z_star=z_star)


def consensus_protocol_input(
    sys: ClosedLoopSystem,
    x: np.ndarray,
    x_dot: np.ndarray,
    integral: np.ndarray,
) -> np.ndarray:
    """Evaluate u = -L (alpha*x + beta*int(x) + gamma*xdot) componentwise."""
    n = sys.node_count
    x = np.asarray(x, dtype=float)
    x_dot = np.asarray(x_dot, dtype=float)
    integral = np.asarray(integral, dtype=float)
    if x.shape != (n,) or x_dot.shape != (n,) or integral.shape != (n,):
        raise DimensionMismatch(f"state vectors must have shape ({n},)")
    g = sys.gains
    return -sys.dec.laplacian @ (g.alpha * x + g.beta * integral + g.gamma * x_dot)
