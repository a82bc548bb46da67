"""Transverse coordinates of the consensus manifold.

Applying U^-1 to the closed loop and dropping the uncontrollable first
integral coordinate yields a (2N-1)-dimensional system whose origin (after
an affine shift absorbing the disturbances) is stable exactly when the
network reaches consensus. The closed-form blocks of
Psi = U^-1 L_tilde^-1 P U computed here are what the gain-tuning layer
certifies against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .netmodel import Gains, NodeEnsemble
from .spectral import ModifiedLaplacian, SpectralDecomposition


@dataclass(frozen=True)
class PsiBlocks:
    """Block form of Psi = U^-1 L_tilde^-1 P U."""

    psi11: float
    Psi12: np.ndarray  # 1 x (N-1)
    Psi21: np.ndarray  # (N-1) x 1
    Psi22: np.ndarray  # (N-1) x (N-1)
    rho_bar: np.ndarray  # [rho_2 - rho_1, ..., rho_N - rho_1]
    P_hat: np.ndarray  # diag(rho_2, ..., rho_N)

    def assembled(self) -> np.ndarray:
        top = np.concatenate([[self.psi11], self.Psi12.ravel()])[None, :]
        bottom = np.hstack([self.Psi21, self.Psi22])
        return np.vstack([top, bottom])


def psi_blocks(
    dec: SpectralDecomposition,
    mod_lap: ModifiedLaplacian,
    ensemble: NodeEnsemble,
) -> PsiBlocks:
    """Closed-form Psi blocks (equal to the direct product U^-1 L_tilde^-1 P U)."""
    n = dec.node_count
    if mod_lap.node_count != n or ensemble.node_count != n:
        raise DimensionMismatch("inconsistent dimensions for Psi blocks")
    rho = ensemble.rho
    rho_bar = rho[1:] - rho[0]
    R22 = dec.R22
    H = mod_lap.H_hat
    ones = np.ones((n - 1, 1))
    P_hat = np.diag(rho[1:])
    psi11 = float(np.mean(rho))
    Psi12 = rho_bar[None, :] @ R22.T
    Psi21 = R22 @ H @ rho_bar[:, None]
    Psi22 = n * R22 @ H @ (P_hat + rho[0] * (ones @ ones.T)) @ R22.T
    return PsiBlocks(
        psi11=psi11, Psi12=Psi12, Psi21=Psi21, Psi22=Psi22, rho_bar=rho_bar, P_hat=P_hat
    )


@dataclass(frozen=True)
class DisturbanceMaps:
    """Row partition of U^-1 L_tilde^-1 acting on the disturbance vector."""

    q: np.ndarray      # 1 x N, equals ones^T / N exactly
    R_hat: np.ndarray  # (N-1) x N


def disturbance_maps(
    dec: SpectralDecomposition, mod_lap: ModifiedLaplacian
) -> DisturbanceMaps:
    n = dec.node_count
    if mod_lap.node_count != n:
        raise DimensionMismatch("inconsistent dimensions for disturbance maps")
    q = np.full((1, n), 1.0 / n)
    bracket = np.hstack([-np.ones((n - 1, 1)), np.eye(n - 1)])
    R_hat = dec.R22 @ mod_lap.H_hat @ bracket
    return DisturbanceMaps(q=q, R_hat=R_hat)


@dataclass(frozen=True)
class TransverseSystem:
    """Shifted (2N-1)-dimensional dynamics transverse to consensus.

    ``shift_map`` is the (2N-1) x N matrix mapping a disturbance vector to
    the origin-shift of the coordinates; it is None when psi11 = 0 (the
    shift is then undefined).
    """

    A_tv: np.ndarray
    shift_map: np.ndarray | None

    @property
    def node_count(self) -> int:
        return (self.A_tv.shape[0] + 1) // 2

    def shift(self, delta: np.ndarray) -> np.ndarray:
        if self.shift_map is None:
            raise ZeroDivisionError("shift undefined: psi11 = 0")
        return self.shift_map @ np.asarray(delta, dtype=float)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.A_tv)

    def sub_block(self) -> np.ndarray:
        """The (x_hat, z_hat) dynamics, excluding the average mode."""
        return self.A_tv[1:, 1:]

    def sub_block_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.sub_block())

    def is_hurwitz(self, include_average_mode: bool = True) -> bool:
        eigs = self.eigenvalues() if include_average_mode else self.sub_block_eigenvalues()
        return bool(np.all(eigs.real < 0))


def transverse_matrix(
    psi: PsiBlocks, mod_lap: ModifiedLaplacian, gains: Gains
) -> TransverseSystem:
    """Assemble the shifted transverse system matrix."""
    m = psi.Psi22.shape[0]  # N - 1
    Gamma = mod_lap.Gamma_hat
    zeros_m = np.zeros((m, m))
    A_tv = np.block(
        [
            [np.array([[psi.psi11]]), psi.Psi12, np.zeros((1, m))],
            [psi.Psi21, psi.Psi22 - gains.alpha * Gamma, np.eye(m)],
            [np.zeros((m, 1)), -gains.beta * Gamma, zeros_m],
        ]
    )
    return TransverseSystem(A_tv=A_tv, shift_map=None)


def transverse_system(
    dec: SpectralDecomposition,
    mod_lap: ModifiedLaplacian,
    ensemble: NodeEnsemble,
    gains: Gains,
) -> TransverseSystem:
    """Full construction including the disturbance shift map."""
    psi = psi_blocks(dec, mod_lap, ensemble)
    base = transverse_matrix(psi, mod_lap, gains)
    maps = disturbance_maps(dec, mod_lap)
    n = dec.node_count
    shift_map = None
    if psi.psi11 != 0.0:
        top = maps.q / psi.psi11
        mid = np.zeros((n - 1, n))
        bottom = maps.R_hat - (psi.Psi21 @ maps.q) / psi.psi11
        shift_map = np.vstack([top, mid, bottom])
    return TransverseSystem(A_tv=base.A_tv, shift_map=shift_map)
