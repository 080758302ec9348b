"""
Linearized optomechanical model: laboratory parameters to drift and diffusion.

Quadrature ordering is ``(q, p, x, y)``: mirror position and momentum, then
the amplitude and phase quadratures of the intracavity field. Quadratures are
normalised so that the vacuum covariance is ``I/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy import constants

from .errors import ConfigError
from .linalg import solve_lyapunov, spectrum_real_parts

__all__ = [
    "KAPPA_CONVENTIONS",
    "PhysicalParams",
    "ModelRates",
    "ModelMatrices",
    "REFERENCE_PARAMS",
    "derive_kappa",
    "thermal_occupation",
    "coupling_G",
    "static_threshold_coupling",
    "build_model",
    "stability",
    "steady_state",
    "load_config",
    "params_to_config",
]

# amplitude: pi c / (2 L F), half the linewidth.  energy: pi c / (L F).
KAPPA_CONVENTIONS = ("amplitude", "energy")


def derive_kappa(finesse: float, cavity_length: float, convention: str = "amplitude") -> float:
    """Cavity decay rate in rad/s from finesse and length."""
    if finesse <= 0 or cavity_length <= 0:
        raise ConfigError("finesse and cavity_length must be positive")
    kappa = math.pi * constants.c / (2.0 * cavity_length * finesse)
    if convention == "amplitude":
        return kappa
    if convention == "energy":
        return 2.0 * kappa
    raise ConfigError(f"unknown kappa convention {convention!r}; expected one of {KAPPA_CONVENTIONS}")


def thermal_occupation(omega_m: float, temperature: float) -> float:
    """Bose-Einstein occupancy of a bath mode at angular frequency ``omega_m``."""
    if omega_m <= 0:
        raise ConfigError("omega_m must be positive")
    if temperature < 0:
        raise ConfigError("temperature must be non-negative")
    if temperature == 0:
        return 0.0
    x = constants.hbar * omega_m / (constants.k * temperature)
    return 1.0 / math.expm1(x)


def coupling_G(g0: float, drive_E: float, kappa: float, detuning: float) -> float:
    """Linearized mirror-field coupling ``G0 E / sqrt(kappa^2 + Delta^2)``."""
    if kappa <= 0:
        raise ConfigError("kappa must be positive")
    return g0 * drive_E / math.hypot(kappa, detuning)


def static_threshold_coupling(omega_m: float, kappa: float) -> float:
    """
    Largest ``G0 * E`` product for which ``omega_m (kappa^2 + Delta^2) > G^2 Delta``
    holds at every detuning ``Delta > 0``.

    The binding detuning is ``kappa / sqrt(3)``.
    """
    return math.sqrt(16.0 * math.sqrt(3.0) / 9.0 * omega_m * kappa**3)


@dataclass(frozen=True)
class PhysicalParams:
    """
    Laboratory-level inputs. All frequencies and rates are in rad/s.

    ``kappa_override`` replaces the finesse-derived decay rate when given.
    """

    omega_m: float
    omega_c: float
    omega_o: float
    drive_E: float
    g0: float
    temperature: float
    finesse: float
    cavity_length: float
    quality_factor: float = 1e5
    detuning: float = 0.0
    chi: float = 1.0
    kappa_convention: str = "amplitude"
    kappa_override: float | None = None

    def __post_init__(self):
        positive = ("omega_m", "drive_E", "g0", "finesse", "cavity_length", "quality_factor")
        for name in positive:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
        if not (np.isfinite(self.temperature) and self.temperature >= 0):
            raise ConfigError(f"temperature must be >= 0, got {self.temperature!r}")
        if not np.isfinite(self.detuning):
            raise ConfigError("detuning must be finite")
        # chi > 1 is allowed here so stability boundaries can be probed;
        # sweeps and config files restrict it to [0, 1].
        if not (np.isfinite(self.chi) and self.chi >= 0):
            raise ConfigError(f"chi must be >= 0, got {self.chi!r}")
        if self.kappa_convention not in KAPPA_CONVENTIONS:
            raise ConfigError(f"unknown kappa convention {self.kappa_convention!r}")
        if self.kappa_override is not None and not self.kappa_override > 0:
            raise ConfigError("kappa override must be positive")

    @property
    def kappa(self) -> float:
        if self.kappa_override is not None:
            return float(self.kappa_override)
        return derive_kappa(self.finesse, self.cavity_length, self.kappa_convention)

    @property
    def gamma_m(self) -> float:
        return self.omega_m / self.quality_factor

    @property
    def n_th(self) -> float:
        return thermal_occupation(self.omega_m, self.temperature)

    def at_detuning(self, delta_over_omega_m: float) -> "PhysicalParams":
        return replace(self, detuning=delta_over_omega_m * self.omega_m)


@dataclass(frozen=True)
class ModelRates:
    kappa: float
    gamma_m: float
    n_th: float
    G: float
    g: float


@dataclass(frozen=True)
class ModelMatrices:
    K: NDArray[np.float64] = field(repr=False)
    D: NDArray[np.float64] = field(repr=False)
    derived: ModelRates


# omega_m/2pi = 10 MHz, T = 0.4 K, finesse 1e4, 1 mm cavity, E = 6e12 s^-1,
# G0 = 1400 s^-1.  The energy-decay convention is the one for which this set
# is stable over 0 < Delta <= 2 omega_m; see README.
REFERENCE_PARAMS = PhysicalParams(
    omega_m=2 * math.pi * 10e6,
    omega_c=2 * math.pi * 3.7e14,
    omega_o=2 * math.pi * 3.7e14,
    drive_E=6e12,
    g0=1400.0,
    temperature=0.4,
    finesse=1e4,
    cavity_length=1e-3,
    quality_factor=1e5,
    detuning=2 * math.pi * 10e6,
    chi=1.0,
    kappa_convention="energy",
)


def build_model(params: PhysicalParams) -> ModelMatrices:
    """Drift ``K`` and diffusion ``D`` for the mirror-field fluctuations."""
    kappa = params.kappa
    gamma_m = params.gamma_m
    n_th = params.n_th
    wm = params.omega_m
    delta = params.detuning
    G = coupling_G(params.g0, params.drive_E, kappa, delta)
    g = params.chi * G

    K = np.array(
        [
            [0.0, wm, 0.0, 0.0],
            [-wm, -gamma_m, g, 0.0],
            [0.0, 0.0, -kappa, delta],
            [g, 0.0, -delta, -kappa],
        ]
    )
    # Markov limit of the Brownian force plus vacuum input noise (2 kappa * 1/2).
    D = np.diag([0.0, gamma_m * (2.0 * n_th + 1.0), kappa, kappa])
    return ModelMatrices(K=K, D=D, derived=ModelRates(kappa, gamma_m, n_th, G, g))


def stability(params: PhysicalParams) -> bool:
    model = build_model(params)
    return bool(spectrum_real_parts(model.K)[0] < 0)


def steady_state(params: PhysicalParams) -> NDArray[np.float64]:
    """Stationary 4x4 mirror-field covariance; raises ``UnstableDrift`` if none exists."""
    model = build_model(params)
    return solve_lyapunov(model.K, model.D)


# --- configuration files -----------------------------------------------------

_HZ_KEYS = {"omega_m_hz": "omega_m", "omega_c_hz": "omega_c", "omega_o_hz": "omega_o"}
# E and G0 are quoted as plain rates (s^-1); no 2*pi factor is applied.
_RATE_KEYS = {"drive_e_hz": "drive_E", "g0_hz": "g0", "kappa_per_s": "kappa_override"}
_PLAIN_KEYS = {
    "temperature_k": "temperature",
    "finesse": "finesse",
    "length_m": "cavity_length",
    "quality_factor": "quality_factor",
    "chi": "chi",
}
_EXTRA_KEYS = ("conditioning", "vacuum_offset")


def _parse_float(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite")
    return value


def load_config(path: str | Path) -> tuple[PhysicalParams, dict[str, str]]:
    """
    Read a ``key = value`` parameter file.

    Keys not present keep their value from :data:`REFERENCE_PARAMS`. Returns the
    parameters and a dict of the non-physical keys (``conditioning``,
    ``vacuum_offset``) that were set. Raises :class:`ConfigError` on unknown
    keys or bad values; ``OSError`` propagates.
    """
    text = Path(path).read_text()
    values: dict[str, object] = {}
    extras: dict[str, str] = {}
    detuning_ratio = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key in _HZ_KEYS:
            values[_HZ_KEYS[key]] = 2 * math.pi * _parse_float(key, value)
        elif key in _RATE_KEYS:
            values[_RATE_KEYS[key]] = _parse_float(key, value)
        elif key in _PLAIN_KEYS:
            values[_PLAIN_KEYS[key]] = _parse_float(key, value)
        elif key == "detuning_over_omega_m":
            detuning_ratio = _parse_float(key, value)
        elif key == "kappa_convention":
            values["kappa_convention"] = value
        elif key in _EXTRA_KEYS:
            extras[key] = value
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    chi = values.get("chi", REFERENCE_PARAMS.chi)
    if not 0 <= chi <= 1:
        raise ConfigError(f"chi must lie in [0, 1], got {chi}")
    params = replace(REFERENCE_PARAMS, **values)
    if detuning_ratio is None:
        detuning_ratio = REFERENCE_PARAMS.detuning / REFERENCE_PARAMS.omega_m
    return params.at_detuning(detuning_ratio), extras


def params_to_config(params: PhysicalParams, extras: dict[str, str] | None = None) -> str:
    """Inverse of :func:`load_config`, up to floating-point formatting."""
    lines = [
        f"omega_m_hz = {params.omega_m / (2 * math.pi):.17g}",
        f"omega_c_hz = {params.omega_c / (2 * math.pi):.17g}",
        f"omega_o_hz = {params.omega_o / (2 * math.pi):.17g}",
        f"drive_e_hz = {params.drive_E:.17g}",
        f"g0_hz = {params.g0:.17g}",
        f"temperature_k = {params.temperature:.17g}",
        f"finesse = {params.finesse:.17g}",
        f"length_m = {params.cavity_length:.17g}",
        f"quality_factor = {params.quality_factor:.17g}",
        f"detuning_over_omega_m = {params.detuning / params.omega_m:.17g}",
        f"chi = {params.chi:.17g}",
        f"kappa_convention = {params.kappa_convention}",
    ]
    if params.kappa_override is not None:
        lines.append(f"kappa_per_s = {params.kappa_override:.17g}")
    for key, value in (extras or {}).items():
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
