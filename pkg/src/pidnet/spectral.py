"""Weighted graph Laplacians and their block spectral machinery.

Everything downstream (network assembly, transverse analysis, gain
certification) is built on the objects defined here: the combinatorial
Laplacian of a connected weighted graph, its normalized eigendecomposition
with the averaging direction pinned to the all-ones vector, and the
derivative-modified Laplacian ``I + gamma*L`` together with the block
combinations of its inverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDecomposition,
    DisconnectedGraph,
    InvalidGraph,
    InvalidWeight,
)

# Absolute residual accepted on algebraic identities.
IDENTITY_TOL = 1e-9

# Connectivity is declared when lambda_2 > CONNECTIVITY_RTOL * lambda_N.
CONNECTIVITY_RTOL = 1e-8


@dataclass(frozen=True)
class Graph:
    """Connected undirected graph with strictly positive edge weights."""

    node_count: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.node_count < 1:
            raise InvalidGraph(f"node_count must be positive, got {self.node_count}")
        object.__setattr__(
            self,
            "edges",
            tuple((int(i), int(j), float(w)) for i, j, w in self.edges),
        )
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise InvalidGraph(f"edge ({i}, {j}) out of range for N={self.node_count}")
            if i == j:
                raise InvalidGraph(f"self-loop on node {i}")
            if w <= 0:
                raise InvalidWeight(f"edge ({i}, {j}) has nonpositive weight {w}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InvalidGraph(f"duplicate undirected edge ({i}, {j})")
            seen.add(key)
        if not self._connected():
            raise DisconnectedGraph(
                f"graph with {self.node_count} nodes and {len(self.edges)} edges is disconnected"
            )

    def _connected(self) -> bool:
        # Union-find; exact check independent of the eigenvalue-based one.
        parent = list(range(self.node_count))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, j, _ in self.edges:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
        root = find(0)
        return all(find(k) == root for k in range(self.node_count))

    @staticmethod
    def ring(node_count: int, weight: float = 1.0) -> "Graph":
        """Cycle graph with uniform edge weight."""
        edges = tuple((k, (k + 1) % node_count, weight) for k in range(node_count))
        return Graph(node_count, edges)

    @staticmethod
    def complete(node_count: int, weight: float = 1.0) -> "Graph":
        edges = tuple(
            (i, j, weight)
            for i in range(node_count)
            for j in range(i + 1, node_count)
        )
        return Graph(node_count, edges)


@dataclass(frozen=True)
class Laplacian:
    """Symmetric zero-row-sum matrix of a connected graph."""

    matrix: np.ndarray
    eigenvalues: np.ndarray  # ascending, eigenvalues[0] == 0

    @property
    def node_count(self) -> int:
        return self.matrix.shape[0]

    @property
    def lambda_2(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def build_laplacian(graph: Graph) -> Laplacian:
    """Assemble the weighted combinatorial Laplacian and its spectrum."""
    n = graph.node_count
    L = np.zeros((n, n))
    for i, j, w in graph.edges:
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    eigs = np.linalg.eigvalsh(L)
    lam_max = float(eigs[-1]) if n > 1 else 0.0
    if n > 1 and eigs[1] <= CONNECTIVITY_RTOL * max(lam_max, 1.0):
        raise DisconnectedGraph(f"lambda_2 = {eigs[1]:.3e} is numerically zero")
    eigs = eigs.copy()
    eigs[0] = 0.0  # exact by construction (L @ ones = 0)
    return Laplacian(matrix=L, eigenvalues=eigs)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition L = U diag(lambda) U^-1 with U[:, 0] = ones.

    ``U`` is sqrt(N) times an orthogonal matrix whose first column is the
    normalized averaging direction, so ``U_inv = U.T / N``. The blocks of
    ``U_inv`` (r11, R12, R21, R22) drive every transverse-coordinate
    computation downstream.
    """

    laplacian: np.ndarray
    lam: np.ndarray
    U: np.ndarray
    U_inv: np.ndarray

    @property
    def node_count(self) -> int:
        return self.U.shape[0]

    @property
    def lambda_2(self) -> float:
        return float(self.lam[1])

    @property
    def lambda_max(self) -> float:
        return float(self.lam[-1])

    @property
    def r11(self) -> float:
        return float(self.U_inv[0, 0])

    @property
    def R12(self) -> np.ndarray:
        return self.U_inv[0:1, 1:]

    @property
    def R21(self) -> np.ndarray:
        return self.U_inv[1:, 0:1]

    @property
    def R22(self) -> np.ndarray:
        return self.U_inv[1:, 1:]

    @property
    def Lambda_hat(self) -> np.ndarray:
        """diag(lambda_2, ..., lambda_N)."""
        return np.diag(self.lam[1:])


def spectral_decompose(lap: Laplacian, tol: float = IDENTITY_TOL) -> SpectralDecomposition:
    """Compute the block-normalized spectral decomposition of a Laplacian.

    The eigenvector of the zero eigenvalue is fixed to +ones/sqrt(N) exactly;
    the sign of every other eigenvector is fixed so its first entry above
    the noise floor is positive. Within a repeated eigenvalue any orthonormal
    basis is accepted.
    """
    L = lap.matrix
    n = L.shape[0]
    eigs, V = np.linalg.eigh(L)
    eigs = eigs.copy()
    eigs[0] = 0.0
    # lambda_1 is simple for connected graphs, so the remaining columns are
    # already orthogonal to ones; replace column 0 exactly.
    V[:, 0] = 1.0 / np.sqrt(n)
    for k in range(1, n):
        col = V[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            V[:, k] = -col
    U = np.sqrt(n) * V
    U_inv = V.T / np.sqrt(n)
    scale = max(1.0, float(eigs[-1]))
    residual = np.max(np.abs(U @ np.diag(eigs) @ U_inv - L))
    if residual > tol * scale:
        raise DegenerateDecomposition(f"reconstruction residual {residual:.3e}")
    return SpectralDecomposition(laplacian=L, lam=eigs, U=U, U_inv=U_inv)


@dataclass(frozen=True)
class ModifiedLaplacian:
    """The matrix I + gamma*L, its inverse, and derived block quantities."""

    gamma: float
    L_tilde: np.ndarray
    L_tilde_inv: np.ndarray
    Gamma_hat: np.ndarray      # diag(lambda_k / (gamma*lambda_k + 1)), k >= 2
    Sigma_hat_inv: np.ndarray  # diag(1 / (gamma*lambda_k + 1)), k >= 2
    H_hat: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "H_hat", self.L22_hat - np.outer(np.ones(self.node_count - 1), self.L12_hat)
        )

    @property
    def node_count(self) -> int:
        return self.L_tilde.shape[0]

    @property
    def l11_hat(self) -> float:
        return float(self.L_tilde_inv[0, 0])

    @property
    def L12_hat(self) -> np.ndarray:
        return self.L_tilde_inv[0, 1:]

    @property
    def L21_hat(self) -> np.ndarray:
        return self.L_tilde_inv[1:, 0]

    @property
    def L22_hat(self) -> np.ndarray:
        return self.L_tilde_inv[1:, 1:]

    @property
    def h_norm(self) -> float:
        """Exact spectral norm of H_hat."""
        return float(np.linalg.norm(self.H_hat, 2))


def modified_laplacian(dec: SpectralDecomposition, gamma: float) -> ModifiedLaplacian:
    """Build I + gamma*L and the block data of its inverse.

    The inverse is computed by a dense linear solve, not through the
    eigendecomposition, so the diagonalization identities cross-check two
    independent computation paths.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    n = dec.node_count
    L_tilde = np.eye(n) + gamma * dec.laplacian
    L_tilde_inv = np.linalg.solve(L_tilde, np.eye(n))
    denom = gamma * dec.lam[1:] + 1.0
    return ModifiedLaplacian(
        gamma=float(gamma),
        L_tilde=L_tilde,
        L_tilde_inv=L_tilde_inv,
        Gamma_hat=np.diag(dec.lam[1:] / denom),
        Sigma_hat_inv=np.diag(1.0 / denom),
    )


def h_norm_bound(dec: SpectralDecomposition, gamma: float) -> float:
    """Closed-form upper bound N / (gamma*lambda_2 + 1) on ||H_hat||."""
    if dec.lambda_2 <= 0:
        raise DisconnectedGraph("bound requires lambda_2 > 0")
    return dec.node_count / (gamma * dec.lambda_2 + 1.0)
