"""Gain certification: theorem conditions, thresholds and analytic bounds.

Four regimes are distinguished by ensemble homogeneity and which gains are
zero. Each certify_* function evaluates the corresponding stability
conditions, the predicted consensus value and the applicable bound on the
integral states (or on the residual disagreement in the derivative-only
case). The heterogeneous condition embeds the optimal slack choice, so no
free parameter is exposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotHomogeneous, SingularEnsemble, UnstableAverage
from .netmodel import Gains, Instance
from .spectral import ModifiedLaplacian, h_norm_bound, modified_laplacian
from .transverse import psi_blocks

REGIME_HOMOGENEOUS_PID = "HomogeneousPID"
REGIME_HOMOGENEOUS_PI = "HomogeneousPI"
REGIME_HOMOGENEOUS_PD = "HomogeneousPD"
REGIME_HETEROGENEOUS_PID = "HeterogeneousPID"


@dataclass(frozen=True)
class Condition:
    name: str
    satisfied: bool
    margin: float

    def __post_init__(self):
        # normalize numpy scalars so certificates serialize cleanly
        object.__setattr__(self, "satisfied", bool(self.satisfied))
        object.__setattr__(self, "margin", float(self.margin))


@dataclass(frozen=True)
class Certificate:
    regime: str
    conditions: tuple[Condition, ...]
    x_inf: float | None = None
    z_inf_bound: float | None = None
    epsilon_bound: float | None = None
    mu: float | None = None

    @property
    def certified(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "certified": self.certified,
            "conditions": [
                {"name": c.name, "satisfied": c.satisfied, "margin": c.margin}
                for c in self.conditions
            ],
            "x_inf": self.x_inf,
            "z_inf_bound": self.z_inf_bound,
            "epsilon_bound": self.epsilon_bound,
            "mu": self.mu,
        }


@dataclass(frozen=True)
class H1Matrix:
    """I + H_hat and its spectral norm, used by the heterogeneous condition."""

    H1: np.ndarray
    norm: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "norm", float(np.linalg.norm(self.H1, 2)))


def h1_matrix(mod_lap: ModifiedLaplacian) -> H1Matrix:
    m = mod_lap.node_count - 1
    return H1Matrix(H1=np.eye(m) + mod_lap.H_hat)


def _require_homogeneous(instance: Instance) -> float:
    """Return the common stability margin rho* (poles are -rho*)."""
    if not instance.ensemble.is_homogeneous():
        raise NotHomogeneous(
            f"poles span [{instance.ensemble.rho.min()}, {instance.ensemble.rho.max()}]"
        )
    return -float(instance.ensemble.rho[0])


def _homogeneous_x_inf(instance: Instance, rho_star: float) -> float:
    if rho_star == 0.0:
        raise SingularEnsemble("all poles are zero: no finite consensus value")
    return float(np.mean(instance.ensemble.delta)) / rho_star


def certify_homogeneous_pid(instance: Instance, gains: Gains) -> Certificate:
    """Full PID on identical agents: certified for any positive gains.

    Stable agents (rho* > 0) give bounded consensus; unstable ones are
    flagged since the common trajectory then diverges (consensus is still
    reached in the disagreement sense).
    """
    rho_star = _require_homogeneous(instance)
    n = instance.node_count
    lam2 = instance.dec.lambda_2
    delta_norm = float(np.linalg.norm(instance.ensemble.delta))
    conditions = (
        Condition("alpha_positive", gains.alpha > 0, gains.alpha),
        Condition("beta_positive", gains.beta > 0, gains.beta),
        Condition("gamma_positive", gains.gamma > 0, gains.gamma),
        Condition("stable_poles", rho_star > 0, rho_star),
    )
    x_inf = _homogeneous_x_inf(instance, rho_star) if rho_star != 0.0 else None
    z_bound = np.sqrt(n**3 * (n - 1)) / (gains.gamma * lam2 + 1.0) * delta_norm
    mu = convergence_rate(instance, gains) if rho_star > 0 else None
    return Certificate(
        regime=REGIME_HOMOGENEOUS_PID,
        conditions=conditions,
        x_inf=x_inf,
        z_inf_bound=float(z_bound),
        mu=mu,
    )


def certify_homogeneous_pi(instance: Instance, gains: Gains) -> Certificate:
    """PI protocol (gamma = 0) on identical agents."""
    rho_star = _require_homogeneous(instance)
    n = instance.node_count
    delta_norm = float(np.linalg.norm(instance.ensemble.delta))
    conditions = (
        Condition("alpha_positive", gains.alpha > 0, gains.alpha),
        Condition("beta_positive", gains.beta > 0, gains.beta),
        Condition("gamma_zero", gains.gamma == 0, -abs(gains.gamma)),
        Condition("stable_poles", rho_star > 0, rho_star),
    )
    x_inf = _homogeneous_x_inf(instance, rho_star) if rho_star != 0.0 else None
    z_bound = np.sqrt(n * (n - 1)) * delta_norm
    mu = convergence_rate(instance, gains) if rho_star > 0 else None
    return Certificate(
        regime=REGIME_HOMOGENEOUS_PI,
        conditions=conditions,
        x_inf=x_inf,
        z_inf_bound=float(z_bound),
        mu=mu,
    )


def certify_homogeneous_pd(instance: Instance, gains: Gains) -> Certificate:
    """PD protocol (beta = 0): residual disagreement bounded by epsilon."""
    rho_star = _require_homogeneous(instance)
    n = instance.node_count
    lam2 = instance.dec.lambda_2
    lamN = instance.dec.lambda_max
    delta_norm = float(np.linalg.norm(instance.ensemble.delta))
    denom = gains.alpha * lamN + rho_star
    conditions = (
        Condition("alpha_positive", gains.alpha > 0, gains.alpha),
        Condition("beta_zero", gains.beta == 0, -abs(gains.beta)),
        Condition("feedback_dominates_pole", denom > 0, denom),
    )
    eps = None
    if denom > 0:
        eps = (
            (gains.gamma * lamN + 1.0)
            / (gains.gamma * lam2 + 1.0)
            * n
            / denom
            * delta_norm
        )
    return Certificate(
        regime=REGIME_HOMOGENEOUS_PD,
        conditions=conditions,
        epsilon_bound=eps,
    )


def convergence_rate(instance: Instance, gains: Gains) -> float:
    """Decay rate of the transverse modes for identical agents.

    Each nonzero Laplacian eigenvalue contributes a quadratic
    eta^2 + eta*(alpha*lam + rho*)/(gamma*lam + 1) + beta*lam/(gamma*lam + 1);
    the rate is the magnitude of the largest real part over all roots.
    """
    rho_star = _require_homogeneous(instance)
    worst = -np.inf
    for lam in instance.dec.lam[1:]:
        denom = gains.gamma * lam + 1.0
        b = (gains.alpha * lam + rho_star) / denom
        c = gains.beta * lam / denom
        disc = b * b - 4.0 * c
        if disc >= 0:
            re_dominant = (-b + np.sqrt(disc)) / 2.0
        else:
            re_dominant = -b / 2.0
        worst = max(worst, re_dominant)
    return float(abs(worst))


def _heterogeneous_quantities(instance: Instance, gamma: float):
    mod_lap = modified_laplacian(instance.dec, gamma)
    psi = psi_blocks(instance.dec, mod_lap, instance.ensemble)
    h1 = h1_matrix(mod_lap)
    return mod_lap, psi, h1


def min_alpha(instance: Instance, gamma: float, conservative: bool = False) -> float:
    """Infimum proportional gain satisfying the heterogeneous condition.

    With ``conservative=True`` the closed-form bound 1 + N/(gamma*lambda_2+1)
    replaces the exact spectral norm of I + H_hat.
    """
    _, psi, h1 = _heterogeneous_quantities(instance, gamma)
    if psi.psi11 >= 0:
        raise UnstableAverage(f"average pole psi11 = {psi.psi11:.6g} is nonnegative")
    n = instance.node_count
    lam2 = instance.dec.lambda_2
    h1_norm = 1.0 + h_norm_bound(instance.dec, gamma) if conservative else h1.norm
    rho = instance.ensemble.rho
    rr = float(psi.rho_bar @ psi.rho_bar)
    rhs = (np.max(np.abs(rho)) + rr / (4.0 * abs(psi.psi11)) * h1_norm**2) / n
    return float(rhs * (gamma * lam2 + 1.0) / lam2)


def z_infinity_bound(
    instance: Instance, gains: Gains, use_norm_bound: bool = False
) -> float:
    """Asymptotic bound on the norm of the integral states.

    ``use_norm_bound=True`` substitutes N/(gamma*lambda_2+1) for the exact
    spectral norm of H_hat; for identical agents that reduces the expression
    to the homogeneous closed form.
    """
    mod_lap, psi, _ = _heterogeneous_quantities(instance, gains.gamma)
    n = instance.node_count
    rho_bar_norm = float(np.linalg.norm(psi.rho_bar))
    if rho_bar_norm > 0 and psi.psi11 == 0.0:
        raise UnstableAverage("psi11 = 0: heterogeneous bound undefined")
    h_norm = h_norm_bound(instance.dec, gains.gamma) if use_norm_bound else mod_lap.h_norm
    het = 1.0 + (rho_bar_norm / (n * abs(psi.psi11)) if rho_bar_norm > 0 else 0.0)
    delta_norm = float(np.linalg.norm(instance.ensemble.delta))
    return float(np.sqrt(n * (n - 1)) * h_norm * het * delta_norm)


def certify_heterogeneous_pid(instance: Instance, gains: Gains) -> Certificate:
    """Heterogeneous agents under full PID: negative average pole plus a
    proportional-gain threshold. With beta = 0 the integral action is
    missing and the certificate fails its beta condition."""
    _, psi, h1 = _heterogeneous_quantities(instance, gains.gamma)
    if psi.psi11 >= 0:
        raise UnstableAverage(f"average pole psi11 = {psi.psi11:.6g} is nonnegative")
    n = instance.node_count
    lam2 = instance.dec.lambda_2
    lhs = gains.alpha * lam2 / (gains.gamma * lam2 + 1.0)
    rr = float(psi.rho_bar @ psi.rho_bar)
    rhs = (
        np.max(np.abs(instance.ensemble.rho))
        + rr / (4.0 * abs(psi.psi11)) * h1.norm**2
    ) / n
    conditions = (
        Condition("average_pole_negative", psi.psi11 < 0, -psi.psi11),
        Condition("beta_positive", gains.beta > 0, gains.beta),
        Condition("proportional_gain_threshold", lhs > rhs, float(lhs - rhs)),
    )
    rho_sum = float(np.sum(instance.ensemble.rho))
    x_inf = -float(np.sum(instance.ensemble.delta)) / rho_sum
    return Certificate(
        regime=REGIME_HETEROGENEOUS_PID,
        conditions=conditions,
        x_inf=x_inf,
        z_inf_bound=z_infinity_bound(instance, gains),
    )


def certify(instance: Instance, gains: Gains) -> Certificate:
    """Dispatch to the regime implied by the ensemble and gains."""
    if instance.ensemble.is_homogeneous():
        if gains.beta == 0:
            return certify_homogeneous_pd(instance, gains)
        if gains.gamma == 0:
            return certify_homogeneous_pi(instance, gains)
        return certify_homogeneous_pid(instance, gains)
    return certify_heterogeneous_pid(instance, gains)
