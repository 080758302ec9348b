"""
Small dense real-matrix kernel.

Everything here works on plain ``numpy`` arrays of at most a few dozen rows:
the steady-state Lyapunov solve, an exact-exponential covariance propagator
used as an independent check of that solve, eigen-spectrum queries and a
tolerance-controlled Moore-Penrose pseudo-inverse.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import expm

from .errors import ConvergenceFailure, SingularSystem, StepFailure, UnstableDrift

__all__ = [
    "SYMMETRY_RTOL",
    "PINV_RTOL",
    "as_square",
    "is_symmetric",
    "symmetrize",
    "spectrum_real_parts",
    "solve_lyapunov",
    "lyapunov_residual",
    "evolve_covariance",
    "evolve_to_steady_state",
    "pseudo_inverse",
]

SYMMETRY_RTOL = 1e-12
PINV_RTOL = 1e-10


def as_square(A: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    return M


def is_symmetric(A: NDArray[np.float64], rtol: float = SYMMETRY_RTOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(A))))
    return bool(np.max(np.abs(A - A.T)) <= rtol * scale)


def symmetrize(A: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * (A + A.T)


def spectrum_real_parts(K: ArrayLike) -> NDArray[np.float64]:
    """Real parts of the eigenvalues of ``K``, sorted in descending order."""
    K = as_square(K, "K")
    try:
        # LAPACK geev: Hessenberg reduction followed by shifted QR sweeps.
        eig = np.linalg.eigvals(K)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return np.sort(eig.real)[::-1]


def solve_lyapunov(K: ArrayLike, D: ArrayLike) -> NDArray[np.float64]:
    """
    Solve ``K V + V K^T + D = 0`` for the symmetric matrix ``V``.

    The equation is vectorized as ``(I (x) K + K (x) I) vec(V) = -vec(D)`` and
    solved directly. Both ``K`` and ``D`` are divided by ``max|K_ij|`` first,
    which leaves ``V`` unchanged but keeps the linear system well scaled when
    rates span many decades.

    Raises
    ------
    UnstableDrift
        If any eigenvalue of ``K`` has a non-negative real part.
    SingularSystem
        If the vectorized system is numerically rank-deficient.
    """
    K = as_square(K, "K")
    D = as_square(D, "D")
    if K.shape != D.shape:
        raise ValueError(f"K and D shapes differ: {K.shape} vs {D.shape}")
    if not is_symmetric(D):
        raise ValueError("D must be symmetric")

    top = spectrum_real_parts(K)[0]
    if top >= 0:
        raise UnstableDrift(f"drift matrix has eigenvalue with real part {top:.6g} >= 0")

    n = K.shape[0]
    scale = float(np.max(np.abs(K)))
    Ks = K / scale
    Ds = D / scale
    eye = np.eye(n)
    L = np.kron(eye, Ks) + np.kron(Ks, eye)
    sv = np.linalg.svd(L, compute_uv=False)
    if sv[-1] <= n * n * np.finfo(float).eps * sv[0]:
        raise SingularSystem(f"Lyapunov operator has condition number {sv[0] / max(sv[-1], 1e-300):.3g}")
    vec = np.linalg.solve(L, -Ds.reshape(-1, order="F"))
    return symmetrize(vec.reshape(n, n, order="F"))


def lyapunov_residual(
    K: ArrayLike, D: ArrayLike, V: ArrayLike, *, normalized: bool = False
) -> float:
    """
    Max-norm of ``K V + V K^T + D``.

    With ``normalized=True`` the residual of the equivalent equation with
    ``K`` and ``D`` divided by ``max|K_ij|`` is returned; this is the quantity
    that can be bounded in double precision when ``|K| |V|`` is huge.
    """
    K = np.asarray(K, dtype=float)
    D = np.asarray(D, dtype=float)
    V = np.asarray(V, dtype=float)
    if normalized:
        scale = float(np.max(np.abs(K)))
        K = K / scale
        D = D / scale
    R = K @ V + V @ K.T + D
    return float(np.max(np.abs(R)))


def _van_loan_step(K: NDArray[np.float64], D: NDArray[np.float64], h: float):
    # expm([[-K, D], [0, K^T]] h) = [[., G], [0, F]];  Phi = F^T,  Q = F^T G
    n = K.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = -K
    M[:n, n:] = D
    M[n:, n:] = K.T
    E = expm(M * h)
    phi = E[n:, n:].T
    q = phi @ E[:n, n:]
    return phi, symmetrize(q)


def _base_step(K: NDArray[np.float64], t: float) -> tuple[float, int]:
    norm = float(np.max(np.abs(K))) * K.shape[0]
    m = 0
    h = t
    while norm * h > 0.5 and m < 200:
        h *= 0.5
        m += 1
    return h, m


def evolve_covariance(
    K: ArrayLike, D: ArrayLike, V0: ArrayLike, t: float
) -> NDArray[np.float64]:
    """
    Covariance ``V(t)`` solving ``dV/dt = K V + V K^T + D`` with ``V(0) = V0``.

    Fixed-step exponential integrator: the interval is split into ``2**m``
    equal steps short enough that ``||K|| h <= 1/2``; one step is propagated
    exactly (transition matrix and accumulated noise from a single block
    matrix exponential), then steps are composed by repeated doubling. The
    per-step error is at the level of floating-point rounding.
    """
    K = as_square(K, "K")
    D = as_square(D, "D")
    V0 = as_square(V0, "V0")
    if not (K.shape == D.shape == V0.shape):
        raise ValueError("K, D and V0 must have equal shapes")
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return V0.copy()

    h, m = _base_step(K, t)
    phi, q = _van_loan_step(K, D, h)
    for _ in range(m):
        q = symmetrize(phi @ q @ phi.T + q)
        phi = phi @ phi
    V = symmetrize(phi @ V0 @ phi.T + q)
    if not np.all(np.isfinite(V)):
        raise StepFailure(f"non-finite covariance after evolving to t={t:g}")
    return V


def evolve_to_steady_state(
    K: ArrayLike,
    D: ArrayLike,
    V0: ArrayLike | None = None,
    *,
    rtol: float = 1e-13,
    max_doublings: int = 400,
) -> NDArray[np.float64]:
    """
    Run :func:`evolve_covariance` with doubling horizons until ``V`` is stationary.

    Starts at ``V0`` (vacuum ``I/2`` by default) and ``t0 = 1/max|K_ij|``;
    each iteration doubles the elapsed time. Stops when consecutive
    covariances agree to ``rtol * max(1, max|V|)``.
    """
    K = as_square(K, "K")
    D = as_square(D, "D")
    n = K.shape[0]
    V = 0.5 * np.eye(n) if V0 is None else as_square(V0, "V0").copy()

    t0 = 1.0 / float(np.max(np.abs(K)))
    h, m = _base_step(K, t0)
    phi, q = _van_loan_step(K, D, h)
    for _ in range(m):
        q = symmetrize(phi @ q @ phi.T + q)
        phi = phi @ phi
    V = symmetrize(phi @ V @ phi.T + q)

    for _ in range(max_doublings):
        V_next = symmetrize(phi @ V @ phi.T + q)
        if not np.all(np.isfinite(V_next)):
            raise StepFailure("covariance diverged; drift is probably unstable")
        change = float(np.max(np.abs(V_next - V)))
        V = V_next
        q = symmetrize(phi @ q @ phi.T + q)
        phi = phi @ phi
        if change <= rtol * max(1.0, float(np.max(np.abs(V)))) and np.max(np.abs(phi)) < 1e-14:
            return V
    raise StepFailure(f"no stationary covariance after {max_doublings} doublings")


def pseudo_inverse(B: ArrayLike, rtol: float = PINV_RTOL) -> NDArray[np.float64]:
    """
    Moore-Penrose pseudo-inverse of a symmetric positive semi-definite matrix.

    Eigenvalues below ``rtol * max|B_ij|`` are treated as exact zeros so that
    the structural zeros of a projected block are not resurrected.
    """
    B = as_square(B, "B")
    w, U = np.linalg.eigh(symmetrize(B))
    cutoff = rtol * float(np.max(np.abs(B)))
    inv = np.zeros_like(w)
    keep = w > cutoff
    inv[keep] = 1.0 / w[keep]
    return symmetrize((U * inv) @ U.T)
