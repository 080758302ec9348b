"""
Closed-form mirror squeezing and occupancy, used as an oracle for the
numeric Lyapunov + fit pipeline.

Two readings of the denominator ``E_down`` are provided:

``printed``
    ``(-G^2 D + w d^2) * {G^2 [...]} + 2 N k (g + k) [...]`` exactly as typeset.
``regrouped``
    ``(-G^2 D + w d^2) * {G^2 [...] + 2 N k (g + k) [...]}``. This is the only
    grouping in which ``w E_up / E_down`` is dimensionless and tends to 1 as
    ``G -> 0``.

Both are large-Q expressions: their deviation from the numeric pipeline
shrinks roughly as ``1/Q``. ``N`` is taken as ``2 n_th + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from .errors import DomainError, OptomechError
from .gaussian import fit_squeezed_thermal
from .model import PhysicalParams, build_model, steady_state

__all__ = [
    "GROUPINGS",
    "ClosedFormContext",
    "squeezing_closed_form",
    "occupation_closed_form",
    "g_to_zero_ratio",
    "OracleRow",
    "compare_with_numeric",
    "write_oracle_csv",
    "ORACLE_COLUMNS",
]

GROUPINGS = ("printed", "regrouped")


@dataclass(frozen=True)
class ClosedFormContext:
    omega_m: float
    kappa: float
    gamma_m: float
    delta: float  # detuning
    G: float
    N: float

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "ClosedFormContext":
        model = build_model(params)
        d = model.derived
        return cls(params.omega_m, d.kappa, d.gamma_m, params.detuning, d.g, 2.0 * d.n_th + 1.0)

    @property
    def Gamma(self) -> float:
        return self.gamma_m + 2.0 * self.kappa

    @property
    def gamma(self) -> float:
        return self.kappa - self.Gamma

    @property
    def z2(self) -> float:
        return self.gamma**2 + self.delta**2

    @property
    def d2(self) -> float:
        return self.kappa**2 + self.delta**2

    @property
    def z(self) -> float:
        return math.sqrt(self.z2)

    @property
    def dd(self) -> float:
        return math.sqrt(self.d2)

    def _bracket(self) -> float:
        # w^4 - 2 w^2 (g k + D^2) + z^2 d^2
        w, k, D = self.omega_m, self.kappa, self.delta
        return w**4 - 2 * w**2 * (self.gamma * k + D**2) + self.z2 * self.d2

    def _static(self) -> float:
        # -G^2 D + w d^2
        return -self.G**2 * self.delta + self.omega_m * self.d2

    @property
    def E_up(self) -> float:
        w, k, D, G, N = self.omega_m, self.kappa, self.delta, self.G, self.N
        Gam, gam, z2, d2 = self.Gamma, self.gamma, self.z2, self.d2
        return (
            G**4 * w * Gam * k * D
            + 2 * N * k * (gam + k) * d2 * self._bracket()
            + G**2
            * (
                -2 * N * w**3 * k * (gam + k) * D
                + 2 * w**2 * gam * k * d2
                - 2 * k**2 * z2 * d2
                + N * w * D * (gam + k) * (2 * k * d2 + Gam * (D**2 - 2 * k**2))
            )
        )

    def E_down(self, grouping: str = "printed") -> float:
        w, k, D, G, N = self.omega_m, self.kappa, self.delta, self.G, self.N
        Gam, gam, d2 = self.Gamma, self.gamma, self.d2
        inner = G**2 * (
            -2 * w**2 * k**2
            + N * w * Gam * (gam + k) * D
            + 2 * gam * k * d2
        )
        tail = 2 * N * k * (gam + k) * self._bracket()
        if grouping == "printed":
            return self._static() * inner + tail
        if grouping == "regrouped":
            return self._static() * (inner + tail)
        raise ValueError(f"unknown grouping {grouping!r}; expected one of {GROUPINGS}")

    @property
    def A_up(self) -> float:
        w, k, D, G, N = self.omega_m, self.kappa, self.delta, self.G, self.N
        Gam, gam, z2, d2 = self.Gamma, self.gamma, self.z2, self.d2
        return (
            -(G**4) * w * Gam * k * D
            - 2 * N * k * d2 * (gam + k) * self._bracket()
            + G**2
            * (
                2 * N * w**3 * k * D * (gam + k)
                + 2 * k * d2 * (k * z2 - w**2 * gam)
                - N * w * D * (gam + k) * ((2 * gam - Gam) * k**2 + (2 * k + Gam) * D**2)
            )
        )

    @property
    def A_down(self) -> float:
        w, k, D, G = self.omega_m, self.kappa, self.delta, self.G
        Gam, gam, z2, d2 = self.Gamma, self.gamma, self.z2, self.d2
        return (
            2
            * self._static()
            * (
                -2 * w**4 * k * (gam + k)
                + G**2 * w * Gam**2 * D
                + 4 * w**2 * k * (gam + k) * (gam * k + D**2)
                - 2 * k * (gam + k) * z2 * d2
            )
        )


def _ratio(ctx: ClosedFormContext, grouping: str) -> float:
    down = ctx.E_down(grouping)
    if down == 0:
        raise DomainError(f"E_down vanishes at detuning {ctx.delta:.6g} rad/s")
    return ctx.omega_m * ctx.E_up / down


def squeezing_closed_form(params: PhysicalParams, grouping: str = "printed") -> float:
    """Mirror squeezing ``s = ln(w E_up / E_down) / 4``."""
    ctx = ClosedFormContext.from_params(params)
    arg = _ratio(ctx, grouping)
    if not arg > 0:
        raise DomainError(
            f"w E_up / E_down = {arg:.6g} <= 0 at detuning/omega_m = {params.detuning / params.omega_m:.6g}"
        )
    return 0.25 * math.log(arg)


def occupation_closed_form(params: PhysicalParams, grouping: str = "printed") -> float:
    """Mirror occupancy ``-1/2 + (A_up / A_down) sqrt(w E_down / E_up)``."""
    ctx = ClosedFormContext.from_params(params)
    arg = ctx.omega_m**2 / _ratio(ctx, grouping)
    if not arg > 0:
        raise DomainError(
            f"w E_down / E_up = {arg:.6g} s^-2 <= 0 at detuning/omega_m = {params.detuning / params.omega_m:.6g}"
        )
    if ctx.A_down == 0:
        raise DomainError("A_down vanishes")
    return -0.5 + ctx.A_up / ctx.A_down * math.sqrt(arg)


def g_to_zero_ratio(params: PhysicalParams, grouping: str = "printed") -> float:
    """``w E_up / E_down`` with the coupling switched off; zero squeezing needs 1."""
    ctx = replace(ClosedFormContext.from_params(params), G=0.0)
    return _ratio(ctx, grouping)


ORACLE_COLUMNS = (
    "delta_over_omega_m",
    "s_analytic",
    "s_numeric",
    "n_analytic",
    "n_numeric",
    "rel_err_s",
    "rel_err_n",
    "s_analytic_regrouped",
    "n_analytic_regrouped",
    "rel_err_s_regrouped",
    "rel_err_n_regrouped",
    "error",
)


@dataclass(frozen=True)
class OracleRow:
    delta_over_omega_m: float
    s_analytic: float | None
    s_numeric: float | None
    n_analytic: float | None
    n_numeric: float | None
    rel_err_s: float | None
    rel_err_n: float | None
    s_analytic_regrouped: float | None
    n_analytic_regrouped: float | None
    rel_err_s_regrouped: float | None
    rel_err_n_regrouped: float | None
    error: str = ""


def _rel(a: float | None, b: float | None) -> float | None:
    if a is None or b is None:
        return None
    return abs(a - b) / max(abs(b), 1e-300)


def _safe(fn, *args):
    try:
        return fn(*args), ""
    except DomainError as exc:
        return None, str(exc)


def compare_with_numeric(params: PhysicalParams, deltas_over_omega_m: Iterable[float]) -> list[OracleRow]:
    """Closed forms (both groupings) against the numeric fit at each detuning."""
    rows = []
    for ratio in deltas_over_omega_m:
        p = params.at_detuning(ratio)
        try:
            fit = fit_squeezed_thermal(steady_state(p)[:2, :2])
        except OptomechError as exc:
            rows.append(OracleRow(ratio, *([None] * 10), error=f"numeric: {exc}"))
            continue
        s_a, e1 = _safe(squeezing_closed_form, p, "printed")
        n_a, e2 = _safe(occupation_closed_form, p, "printed")
        s_r, e3 = _safe(squeezing_closed_form, p, "regrouped")
        n_r, e4 = _safe(occupation_closed_form, p, "regrouped")
        rows.append(
            OracleRow(
                ratio,
                s_a,
                fit.s,
                n_a,
                fit.n_bar,
                _rel(s_a, fit.s),
                _rel(n_a, fit.n_bar),
                s_r,
                n_r,
                _rel(s_r, fit.s),
                _rel(n_r, fit.n_bar),
                "; ".join(e for e in (e1, e2, e3, e4) if e),
            )
        )
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value.replace(",", ";")
    return f"{value:.12g}"


def write_oracle_csv(path: str | Path, params: PhysicalParams, rows: list[OracleRow]) -> None:
    """Discrepancy report with the ``G -> 0`` limit of both groupings in the header."""
    lim_p = g_to_zero_ratio(params, "printed")
    lim_r = g_to_zero_ratio(params, "regrouped")
    errs = [r.rel_err_s for r in rows if r.rel_err_s is not None]
    errs_r = [r.rel_err_s_regrouped for r in rows if r.rel_err_s_regrouped is not None]
    with open(path, "w", newline="") as fh:
        fh.write("# closed-form mirror squeezing/occupancy vs Lyapunov + fit\n")
        fh.write(f"# g_to_zero_ratio printed={lim_p:.12g} regrouped={lim_r:.12g} (1 required for s -> 0)\n")
        if errs:
            fh.write(f"# max_rel_err_s printed={max(errs):.6g}")
            if errs_r:
                fh.write(f" regrouped={max(errs_r):.6g}")
            fh.write(f" quality_factor={params.quality_factor:.6g}\n")
        fh.write(",".join(ORACLE_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(getattr(r, c)) for c in ORACLE_COLUMNS) + "\n")
