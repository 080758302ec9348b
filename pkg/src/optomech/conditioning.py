"""
Gaussian measurement updates, beam splitters and the ancilla scheme.

Mode layout of the optomechanical state is mirror = 0, cavity = 1; the
vacuum ancilla, when attached, is mode 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import IndexOutOfRange, SingularCovariance
from .gaussian import (
    VACUUM,
    SqueezedThermalFit,
    block,
    fit_squeezed_thermal,
    log_negativity,
    n_modes,
)
from .linalg import pseudo_inverse, symmetrize
from .model import PhysicalParams, steady_state

__all__ = [
    "MIRROR",
    "CAVITY",
    "ANCILLA",
    "VACUUM_OFFSETS",
    "PartitionedCov",
    "homodyne_update",
    "vacuum_update",
    "attach_vacuum_ancilla",
    "beam_splitter_matrix",
    "beam_splitter",
    "Conditioning",
    "parse_conditioning",
    "condition_state",
    "conditioned_mirror",
    "Tripartite",
    "tripartite_entanglement",
    "tripartite_scan",
]

MIRROR, CAVITY, ANCILLA = 0, 1, 2

# "half" is the Gaussian conditioning identity with vacuum variance 1/2;
# "one" is the identity-offset form with the unit matrix added to B.
VACUUM_OFFSETS = {"half": VACUUM, "one": 1.0}


@dataclass(frozen=True)
class PartitionedCov:
    """``[[A, C], [C^T, B]]`` with ``B`` the block of the modes to be measured."""

    A: NDArray[np.float64]
    B: NDArray[np.float64]
    C: NDArray[np.float64]

    @classmethod
    def split(cls, V: ArrayLike, measured: Sequence[int]) -> "PartitionedCov":
        """Partition ``V`` into kept modes (original order) and ``measured`` modes."""
        V = np.asarray(V, dtype=float)
        n = n_modes(V)
        measured = list(measured)
        if not measured or any(not 0 <= m < n for m in measured) or len(set(measured)) != len(measured):
            raise IndexOutOfRange(f"invalid measured modes {measured} for a {n}-mode state")
        kept = [m for m in range(n) if m not in measured]
        if not kept:
            raise IndexOutOfRange("at least one mode must remain unmeasured")
        ka = [2 * m + k for m in kept for k in (0, 1)]
        kb = [2 * m + k for m in measured for k in (0, 1)]
        return cls(V[np.ix_(ka, ka)], V[np.ix_(kb, kb)], V[np.ix_(ka, kb)])

    def assemble(self) -> NDArray[np.float64]:
        return np.block([[self.A, self.C], [self.C.T, self.B]])


def _rotation(theta: float) -> NDArray[np.float64]:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def homodyne_update(p: PartitionedCov, angle: float = 0.0) -> NDArray[np.float64]:
    """
    Covariance of the kept modes after homodyning every measured mode.

    ``A - C [pi B pi]^+ C^T`` with ``pi = diag(1, 0)`` per measured mode, so the
    ``q`` (``x``) quadrature is detected. A non-zero ``angle`` first rotates each
    measured mode in phase space so the quadrature ``q cos(angle) + p sin(angle)``
    is detected instead.
    """
    n2 = p.B.shape[0] // 2
    B, C = p.B, p.C
    if angle:
        R = np.kron(np.eye(n2), _rotation(angle))
        B = R @ B @ R.T
        C = C @ R.T
    pi = np.kron(np.eye(n2), np.diag([1.0, 0.0]))
    return symmetrize(p.A - C @ pseudo_inverse(pi @ B @ pi) @ C.T)


def vacuum_update(p: PartitionedCov, offset: float = VACUUM) -> NDArray[np.float64]:
    """Covariance of the kept modes after projecting the measured modes onto vacuum: ``A - C (B + offset I)^-1 C^T``."""
    M = p.B + offset * np.eye(p.B.shape[0])
    try:
        inv = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance("B + offset is singular") from exc
    if not np.all(np.isfinite(inv)):
        raise SingularCovariance("B + offset is singular")
    return symmetrize(p.A - p.C @ inv @ p.C.T)


def attach_vacuum_ancilla(V: ArrayLike) -> NDArray[np.float64]:
    V = np.asarray(V, dtype=float)
    n = n_modes(V)
    out = np.zeros((2 * n + 2, 2 * n + 2))
    out[: 2 * n, : 2 * n] = V
    out[2 * n :, 2 * n :] = VACUUM * np.eye(2)
    return out


def beam_splitter_matrix(n: int, i: int, j: int, theta: float) -> NDArray[np.float64]:
    """Symplectic matrix of a beam splitter with mixing angle ``theta`` between modes ``i`` and ``j``."""
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRange(f"invalid beam-splitter modes ({i}, {j}) for {n} modes")
    S = np.eye(2 * n)
    c, s = math.cos(theta), math.sin(theta)
    for k in (0, 1):
        a, b = 2 * i + k, 2 * j + k
        S[a, a] = c
        S[b, b] = c
        S[a, b] = s
        S[b, a] = -s
    return S


def beam_splitter(V: ArrayLike, i: int, j: int, theta: float) -> NDArray[np.float64]:
    V = np.asarray(V, dtype=float)
    S = beam_splitter_matrix(n_modes(V), i, j, theta)
    return symmetrize(S.T @ V @ S)


@dataclass(frozen=True)
class Conditioning:
    """Measurement strategy applied to the optical side before fitting the mirror."""

    kind: str  # none | homodyne | vacuum | ancilla
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "homodyne", "vacuum", "ancilla"):
            raise ValueError(f"unknown conditioning {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "ancilla":
            return f"ancilla:{self.theta / math.pi:.12g}"
        return self.kind


def parse_conditioning(text: str) -> Conditioning:
    """Parse ``none``, ``homodyne``, ``vacuum`` or ``ancilla:<theta/pi>``."""
    text = text.strip().lower()
    if text in ("none", "homodyne", "vacuum"):
        return Conditioning(text)
    if text.startswith("ancilla:"):
        try:
            ratio = float(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad ancilla angle in {text!r}") from None
        return Conditioning("ancilla", ratio * math.pi)
    raise ValueError(f"unknown conditioning {text!r}; use none|homodyne|vacuum|ancilla:<theta_over_pi>")


def condition_state(
    V: ArrayLike, strategy: Conditioning, vacuum_offset: float = VACUUM
) -> NDArray[np.float64]:
    """Mirror covariance block after applying ``strategy`` to a mirror-cavity covariance ``V``."""
    V = np.asarray(V, dtype=float)
    if strategy.kind == "none":
        return block(V, [MIRROR])
    if strategy.kind == "homodyne":
        return homodyne_update(PartitionedCov.split(V, [CAVITY]))
    if strategy.kind == "vacuum":
        return vacuum_update(PartitionedCov.split(V, [CAVITY]), vacuum_offset)
    W = beam_splitter(attach_vacuum_ancilla(V), CAVITY, ANCILLA, strategy.theta)
    kept = vacuum_update(PartitionedCov.split(W, [ANCILLA]), vacuum_offset)
    return block(kept, [MIRROR])


def conditioned_mirror(
    params: PhysicalParams,
    strategy: Conditioning | str = "none",
    vacuum_offset: float = VACUUM,
) -> SqueezedThermalFit:
    """Squeezed-thermal fit of the steady mirror state after the given conditioning."""
    if isinstance(strategy, str):
        strategy = parse_conditioning(strategy)
    return fit_squeezed_thermal(condition_state(steady_state(params), strategy, vacuum_offset))


@dataclass(frozen=True)
class Tripartite:
    E_mirror_cavity: float
    E_mirror_ancilla: float
    E_cavity_ancilla: float


def tripartite_entanglement(V: ArrayLike, theta: float) -> Tripartite:
    """Pairwise log-negativities after mixing the cavity with a vacuum ancilla."""
    W = beam_splitter(attach_vacuum_ancilla(V), CAVITY, ANCILLA, theta)
    return Tripartite(
        log_negativity(block(W, [MIRROR, CAVITY])),
        log_negativity(block(W, [MIRROR, ANCILLA])),
        log_negativity(block(W, [CAVITY, ANCILLA])),
    )


def tripartite_scan(params: PhysicalParams, theta: float) -> Tripartite:
    return tripartite_entanglement(steady_state(params), theta)
