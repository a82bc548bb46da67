"""Shared generators and oracles for the test suite.

Random graphs are built as a random spanning tree plus extra edges, so
connectivity holds by construction. The affine-linear exact solution (used
as the integrator oracle) comes from the matrix exponential of the
augmented system and is the only place scipy is needed.
"""

import numpy as np
import pytest
from scipy.linalg import expm

from pidnet import Graph, Instance


def random_graph(rng: np.random.Generator, n: int, extra_edges: int | None = None,
                 w_range: tuple[float, float] = (0.2, 3.0)) -> Graph:
    """Random connected graph: random spanning tree plus extra edges."""
    perm = rng.permutation(n)
    edges = []
    have = set()
    for k in range(1, n):
        i, j = int(perm[int(rng.integers(0, k))]), int(perm[k])
        edges.append((i, j, float(rng.uniform(*w_range))))
        have.add((min(i, j), max(i, j)))
    if extra_edges is None:
        extra_edges = int(rng.integers(0, n))
    for _ in range(extra_edges):
        i, j = (int(v) for v in rng.integers(0, n, 2))
        if i != j and (min(i, j), max(i, j)) not in have:
            have.add((min(i, j), max(i, j)))
            edges.append((i, j, float(rng.uniform(*w_range))))
    return Graph(n, tuple(edges))


def random_heterogeneous_instance(rng: np.random.Generator, n: int) -> Instance:
    """Instance with strictly negative average pole and generic disturbance."""
    rho = rng.uniform(-3.0, 0.5, n)
    rho -= max(0.0, np.mean(rho) + 0.2)  # ensure a clearly negative average
    delta = rng.normal(0.0, 2.0, n)
    return Instance.from_graph(random_graph(rng, n), rho, delta)


def random_homogeneous_instance(
    rng: np.random.Generator, n: int, rho_star: float | None = None
) -> Instance:
    if rho_star is None:
        rho_star = float(rng.uniform(0.2, 3.0))
    delta = rng.normal(0.0, 2.0, n)
    return Instance.from_graph(random_graph(rng, n), -rho_star * np.ones(n), delta)


def exact_affine_solution(A: np.ndarray, b: np.ndarray, v0: np.ndarray, t: float) -> np.ndarray:
    """Closed-form solution of vdot = A v + b via the augmented exponential."""
    m = A.shape[0]
    M = np.zeros((m + 1, m + 1))
    M[:m, :m] = A
    M[:m, m] = b
    return (expm(t * M) @ np.concatenate([v0, [1.0]]))[:m]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)
