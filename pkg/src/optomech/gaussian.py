"""
Covariance-matrix toolkit for n-mode Gaussian states.

Covariances are plain symmetric ``(2n, 2n)`` arrays in ``(q1, p1, ..., qn, pn)``
order with vacuum ``I/2``. Mode indices are zero-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import IndexOutOfRange, SingularCovariance, UnphysicalState
from .linalg import as_square, is_symmetric

__all__ = [
    "VACUUM",
    "PHYSICALITY_TOL",
    "symplectic_form",
    "symplectic_eigenvalues",
    "check_physical",
    "n_modes",
    "block",
    "wigner_value",
    "WignerGrid",
    "wigner_grid",
    "wigner_axes",
    "symplectic_squeeze",
    "SqueezedThermalFit",
    "fit_squeezed_thermal",
    "log_negativity",
    "purity",
]

VACUUM = 0.5
PHYSICALITY_TOL = 1e-9


def symplectic_form(n: int) -> NDArray[np.float64]:
    """Block-diagonal ``Omega`` with ``[[0, 1], [-1, 0]]`` blocks."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def n_modes(V: NDArray[np.float64]) -> int:
    dim = V.shape[0]
    if V.ndim != 2 or dim != V.shape[1] or dim % 2:
        raise ValueError(f"covariance must be (2n, 2n), got {V.shape}")
    return dim // 2


def symplectic_eigenvalues(V: ArrayLike) -> NDArray[np.float64]:
    """The n symplectic eigenvalues of V in ascending order (moduli of eig(i Omega V))."""
    V = as_square(V, "V")
    n = n_modes(V)
    nu = np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ V)))
    # eigenvalues come in +-nu pairs
    return 0.5 * (nu[0::2] + nu[1::2])


def check_physical(V: ArrayLike, tol: float = PHYSICALITY_TOL) -> NDArray[np.float64]:
    """Return ``V`` as an array, raising ``UnphysicalState`` if it is not a valid covariance."""
    V = as_square(V, "V")
    n_modes(V)
    if not is_symmetric(V):
        raise UnphysicalState("covariance matrix is not symmetric")
    nu = symplectic_eigenvalues(V)
    if nu[0] < VACUUM - tol or not np.all(np.linalg.eigvalsh(V) > 0):
        raise UnphysicalState(f"smallest symplectic eigenvalue {nu[0]:.12g} < 1/2")
    return V


def block(V: ArrayLike, modes: Sequence[int]) -> NDArray[np.float64]:
    """Principal submatrix of the selected modes, in the order given."""
    V = np.asarray(V, dtype=float)
    n = n_modes(V)
    modes = list(modes)
    if not modes or len(set(modes)) != len(modes) or any(not 0 <= m < n for m in modes):
        raise IndexOutOfRange(f"invalid mode selection {modes} for a {n}-mode state")
    idx = [2 * m + k for m in modes for k in (0, 1)]
    return V[np.ix_(idx, idx)].copy()


def _single_mode(J: ArrayLike) -> NDArray[np.float64]:
    J = np.asarray(J, dtype=float)
    if J.shape != (2, 2):
        raise ValueError(f"expected a 2x2 single-mode covariance, got {J.shape}")
    return J


def wigner_value(J: ArrayLike, alpha_r: ArrayLike, alpha_i: ArrayLike):
    """
    Wigner function of a zero-mean single-mode Gaussian state at ``alpha``.

    Phase-space points map to quadratures as ``(sqrt2 alpha_r, sqrt2 alpha_i)``.
    Broadcasts over ``alpha_r`` and ``alpha_i``.
    """
    J = _single_mode(J)
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if not det > 0:
        raise SingularCovariance(f"det J = {det!r} is not positive")
    a, b, c = J[1, 1] / det, -J[0, 1] / det, J[0, 0] / det
    fq = math.sqrt(2.0) * np.asarray(alpha_r, dtype=float)
    fp = math.sqrt(2.0) * np.asarray(alpha_i, dtype=float)
    quad = a * fq * fq + 2.0 * b * fq * fp + c * fp * fp
    return np.exp(-0.5 * quad) / (math.pi * math.sqrt(det))


@dataclass(frozen=True)
class WignerGrid:
    alpha_r: NDArray[np.float64] = field(repr=False)
    alpha_i: NDArray[np.float64] = field(repr=False)
    values: NDArray[np.float64] = field(repr=False)  # shape (len(alpha_r), len(alpha_i))

    def integral(self) -> float:
        """Riemann sum of the grid; assumes uniform axes."""
        dr = np.diff(self.alpha_r).mean()
        di = np.diff(self.alpha_i).mean()
        return float(self.values.sum() * dr * di)

    def covariance(self) -> NDArray[np.float64]:
        """Quadrature covariance recovered from the grid's second moments."""
        R, I = np.meshgrid(self.alpha_r, self.alpha_i, indexing="ij")
        w = self.values / self.values.sum()
        mr, mi = (w * R).sum(), (w * I).sum()
        crr = (w * (R - mr) ** 2).sum()
        cii = (w * (I - mi) ** 2).sum()
        cri = (w * (R - mr) * (I - mi)).sum()
        # alpha has covariance J / 2
        return 2.0 * np.array([[crr, cri], [cri, cii]])

    def write_csv(self, path: str | Path, header: str | None = None) -> None:
        R, I = np.meshgrid(self.alpha_r, self.alpha_i, indexing="ij")
        with open(path, "w", newline="") as fh:
            if header:
                for line in header.splitlines():
                    fh.write(f"# {line}\n")
            fh.write("alpha_r,alpha_i,w\n")
            for r, i, w in zip(R.ravel(), I.ravel(), self.values.ravel()):
                fh.write(f"{r:.12g},{i:.12g},{w:.12g}\n")

    def write_matrix(self, path: str | Path) -> None:
        """Blank-line separated ``alpha_r alpha_i w`` blocks, one per ``alpha_r`` (gnuplot pm3d layout)."""
        with open(path, "w") as fh:
            for k, r in enumerate(self.alpha_r):
                for i, w in zip(self.alpha_i, self.values[k]):
                    fh.write(f"{r:.12g} {i:.12g} {w:.12g}\n")
                fh.write("\n")


def wigner_grid(J: ArrayLike, alpha_r_axis: ArrayLike, alpha_i_axis: ArrayLike) -> WignerGrid:
    ar = np.asarray(alpha_r_axis, dtype=float)
    ai = np.asarray(alpha_i_axis, dtype=float)
    for name, axis in (("alpha_r", ar), ("alpha_i", ai)):
        if axis.ndim != 1 or axis.size < 2 or np.any(np.diff(axis) <= 0):
            raise ValueError(f"{name} axis must be strictly increasing with at least 2 points")
    R, I = np.meshgrid(ar, ai, indexing="ij")
    return WignerGrid(ar, ai, wigner_value(J, R, I))


def wigner_axes(
    J: ArrayLike, n_sigma: float = 6.0, min_points: int = 161, max_points: int = 2001
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Symmetric axes covering ``+-n_sigma`` marginal standard deviations.

    The point count per axis is raised above ``min_points`` when needed to keep
    the step below the conditional standard deviation along that axis, which
    keeps the Riemann sum accurate for strongly squeezed, rotated states.
    """
    J = _single_mode(J)
    det = J[0, 0] * J[1, 1] - J[0, 1] ** 2
    if not det > 0:
        raise SingularCovariance(f"det J = {det!r} is not positive")
    axes = []
    for k in (0, 1):
        sigma = math.sqrt(J[k, k] / 2.0)
        cond = math.sqrt(det / J[1 - k, 1 - k] / 2.0)
        span = 2.0 * n_sigma * sigma
        points = max(min_points, int(math.ceil(span / cond)) + 1)
        points = min(points, max_points) | 1  # odd so the origin is sampled
        axes.append(np.linspace(-n_sigma * sigma, n_sigma * sigma, points))
    return axes[0], axes[1]


def symplectic_squeeze(s: float, phi: float) -> NDArray[np.float64]:
    """Symmetric single-mode squeezing matrix for amplitude ``s`` at angle ``phi``."""
    if s < 0:
        raise ValueError("squeezing amplitude must be non-negative")
    ch, sh = math.cosh(s), math.sinh(s)
    c, sn = math.cos(phi), math.sin(phi)
    return np.array([[ch - c * sh, -sn * sh], [-sn * sh, ch + c * sh]])


@dataclass(frozen=True)
class SqueezedThermalFit:
    """Thermal occupancy, squeezing amplitude and angle of a one-mode state."""

    n_bar: float
    s: float
    phi: float

    def covariance(self) -> NDArray[np.float64]:
        S = symplectic_squeeze(self.s, self.phi)
        return (self.n_bar + VACUUM) * (S @ S)


def fit_squeezed_thermal(J: ArrayLike) -> SqueezedThermalFit:
    """
    Invert ``J = S(s, phi) (n + 1/2) S(s, phi)`` in closed form.

    ``n = sqrt(det J) - 1/2`` and ``phi = atan2(-2 J12, J22 - J11)``. The
    amplitude uses ``sinh 2s = sqrt((J22 - J11)^2 + 4 J12^2) / (2 sqrt(det J))``,
    equal to ``cosh 2s = Tr J / (2 sqrt(det J))`` but well conditioned at small
    ``s``. An unsqueezed state gets ``phi = 0``.
    """
    J = _single_mode(J)
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if not det > 0:
        raise SingularCovariance(f"det J = {det!r} is not positive")
    nu = math.sqrt(det)
    eps = np.finfo(float).eps
    tr = J[0, 0] + J[1, 1]
    j12 = 0.5 * (J[0, 1] + J[1, 0])
    # an off-diagonal at rounding level is taken as an exact zero, so a
    # diagonal state with J11 > J22 gets phi = pi rather than -pi + 0
    if abs(j12) <= 4 * eps * tr:
        j12 = 0.0
    diff = J[1, 1] - J[0, 0]
    aniso = math.hypot(diff, 2.0 * j12)
    s = 0.5 * math.asinh(aniso / (2.0 * nu))
    if aniso <= 4 * eps * tr:
        return SqueezedThermalFit(nu - VACUUM, 0.0, 0.0)
    phi = math.atan2(-2.0 * j12 + 0.0, diff)
    if phi <= -math.pi:
        phi += 2 * math.pi
    return SqueezedThermalFit(nu - VACUUM, s, phi)


def log_negativity(V: ArrayLike) -> float:
    """
    Logarithmic negativity of a two-mode state, natural log.

    Partial transposition flips the sign of the second mode's momentum.
    """
    V = as_square(V, "V")
    if V.shape != (4, 4):
        raise ValueError("log_negativity expects a two-mode (4x4) covariance")
    P = np.diag([1.0, 1.0, 1.0, -1.0])
    nu_min = symplectic_eigenvalues(P @ V @ P)[0]
    return max(0.0, -math.log(2.0 * nu_min))


def purity(V: ArrayLike) -> float:
    """``Tr rho^2 = 1 / (2^n sqrt(det V))``."""
    V = as_square(V, "V")
    n = n_modes(V)
    det = np.linalg.det(V)
    if not det > 0:
        raise SingularCovariance(f"det V = {det!r} is not positive")
    return float(1.0 / (2.0**n * math.sqrt(det)))
