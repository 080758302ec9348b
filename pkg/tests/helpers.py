"""Shared generators for tests."""

import numpy as np


def random_stable_pair(rng: np.random.Generator, n: int = 4, margin: float = 0.1):
    """Random Hurwitz drift (spectral abscissa ``-margin``) and PSD diffusion."""
    A = rng.normal(size=(n, n))
    K = A - (np.max(np.linalg.eigvals(A).real) + margin) * np.eye(n)
    B = rng.normal(size=(n, n))
    return K, B @ B.T


def random_physical_cov(rng: np.random.Generator, n: int) -> np.ndarray:
    """``(nu) S S^T`` style state: symplectic image of a thermal diagonal."""
    from optomech.conditioning import beam_splitter_matrix
    from optomech.gaussian import symplectic_squeeze

    nus = 0.5 + rng.exponential(2.0, size=n)
    V = np.diag(np.repeat(nus, 2))
    for _ in range(3):
        S = np.eye(2 * n)
        for m in range(n):
            S[2 * m : 2 * m + 2, 2 * m : 2 * m + 2] = symplectic_squeeze(rng.uniform(0, 1.5), rng.uniform(-np.pi, np.pi))
        V = S @ V @ S.T
        if n > 1:
            i, j = rng.choice(n, size=2, replace=False)
            T = beam_splitter_matrix(n, int(i), int(j), rng.uniform(0, np.pi))
            V = T.T @ V @ T
    return 0.5 * (V + V.T)
