"""
Parameter sweeps over detuning, coupling scale and beam-splitter angle.

Every sweep returns one :class:`ScanRow` per input value, in input order.
Points without a stationary state are kept with ``stable=False`` and empty
numeric fields; other per-point failures are recorded in ``error``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .conditioning import (
    Conditioning,
    condition_state,
    tripartite_entanglement,
)
from .errors import OptomechError, UnstableDrift
from .gaussian import (
    VACUUM,
    block,
    check_physical,
    fit_squeezed_thermal,
    log_negativity,
    wigner_axes,
    wigner_grid,
)
from .linalg import lyapunov_residual, solve_lyapunov
from .model import PhysicalParams, build_model

log = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_DETUNING_GRID",
    "DEFAULT_CHI_GRID",
    "DEFAULT_THETA_GRID",
    "MIRROR_PANELS",
    "FIELD_PANELS",
    "ScanRow",
    "COLUMNS",
    "scan_detuning",
    "scan_chi",
    "scan_theta",
    "hysteresis",
    "write_rows_csv",
    "write_hysteresis_csv",
    "export_wigner",
]

DEFAULT_DETUNING_GRID = tuple(k / 100 for k in range(1, 201))
DEFAULT_CHI_GRID = tuple(k / 100 for k in range(0, 101))
DEFAULT_THETA_GRID = tuple(k / 100 for k in range(0, 101))  # theta / pi

# detuning / omega_m of the published Wigner panel sequences
MIRROR_PANELS = (0.0, 0.4, 0.7, 1.0, 1.3, 1.6, 1.9, 2.0)
FIELD_PANELS = MIRROR_PANELS

RESIDUAL_RTOL = 1e-10


@dataclass
class ScanRow:
    sweep_value: float
    delta_over_omega_m: float
    chi: float
    theta_over_pi: float | None = None
    stable: bool = False
    n_bar_M: float | None = None
    s_M: float | None = None
    phi_M: float | None = None
    n_bar_F: float | None = None
    s_F: float | None = None
    phi_F: float | None = None
    E_N_mirror_cavity: float | None = None
    n_bar_M_hom: float | None = None
    s_M_hom: float | None = None
    n_bar_M_vac: float | None = None
    s_M_vac: float | None = None
    conditioning: str = ""
    n_bar_M_cond: float | None = None
    s_M_cond: float | None = None
    phi_M_cond: float | None = None
    E_mc: float | None = None
    E_ma: float | None = None
    E_ca: float | None = None
    error: str = ""


COLUMNS = tuple(f.name for f in fields(ScanRow))


def _steady(params: PhysicalParams) -> np.ndarray:
    model = build_model(params)
    V = solve_lyapunov(model.K, model.D)
    res = lyapunov_residual(model.K, model.D, V, normalized=True)
    if res > RESIDUAL_RTOL * max(1.0, float(np.max(np.abs(model.D))) / float(np.max(np.abs(model.K)))):
        raise OptomechError(f"Lyapunov residual {res:.3g} above tolerance")
    return check_physical(V)


def _evaluate(
    params: PhysicalParams,
    row: ScanRow,
    conditioning: Conditioning | None,
    vacuum_offset: float,
    theta: float | None,
) -> ScanRow:
    try:
        V = _steady(params)
    except UnstableDrift as exc:
        row.error = str(exc)
        return row
    except OptomechError as exc:
        row.stable = True
        row.error = str(exc)
        return row
    row.stable = True
    try:
        M = check_physical(block(V, [0]))
        F = check_physical(block(V, [1]))
        fm, ff = fit_squeezed_thermal(M), fit_squeezed_thermal(F)
        hom = fit_squeezed_thermal(check_physical(condition_state(V, Conditioning("homodyne"))))
        vac = fit_squeezed_thermal(
            check_physical(condition_state(V, Conditioning("vacuum"), vacuum_offset))
        )
        cond = None
        if conditioning is not None:
            cond = fit_squeezed_thermal(check_physical(condition_state(V, conditioning, vacuum_offset)))
        tri = tripartite_entanglement(V, theta) if theta is not None else None
        E = log_negativity(V)
    except OptomechError as exc:
        row.error = str(exc)
        return row

    row.n_bar_M, row.s_M, row.phi_M = fm.n_bar, fm.s, fm.phi
    row.n_bar_F, row.s_F, row.phi_F = ff.n_bar, ff.s, ff.phi
    row.E_N_mirror_cavity = E
    row.n_bar_M_hom, row.s_M_hom = hom.n_bar, hom.s
    row.n_bar_M_vac, row.s_M_vac = vac.n_bar, vac.s
    if cond is not None:
        row.conditioning = conditioning.label
        row.n_bar_M_cond, row.s_M_cond, row.phi_M_cond = cond.n_bar, cond.s, cond.phi
    if tri is not None:
        row.E_mc, row.E_ma, row.E_ca = tri.E_mirror_cavity, tri.E_mirror_ancilla, tri.E_cavity_ancilla
    return row


def _run(tasks: Sequence[Callable[[], ScanRow]], workers: int) -> list[ScanRow]:
    if workers <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda task: task(), tasks))


def scan_detuning(
    params: PhysicalParams,
    delta_grid: Iterable[float] = DEFAULT_DETUNING_GRID,
    *,
    conditioning: Conditioning | None = None,
    vacuum_offset: float = VACUUM,
    workers: int = 1,
) -> list[ScanRow]:
    """Sweep ``Delta / omega_m`` at the coupling scale of ``params``."""
    grid = [float(x) for x in delta_grid]
    if not grid:
        raise ValueError("detuning grid is empty")

    def task(x):
        return lambda: _evaluate(
            params.at_detuning(x), ScanRow(x, x, params.chi), conditioning, vacuum_offset, None
        )

    return _run([task(x) for x in grid], workers)


def scan_chi(
    params: PhysicalParams,
    chi_grid: Iterable[float] = DEFAULT_CHI_GRID,
    *,
    conditioning: Conditioning | None = None,
    vacuum_offset: float = VACUUM,
    workers: int = 1,
) -> list[ScanRow]:
    """Sweep the coupling scale ``chi`` at zero detuning."""
    grid = [float(x) for x in chi_grid]
    if not grid:
        raise ValueError("chi grid is empty")
    if any(not 0 <= x <= 1 for x in grid):
        raise ValueError("chi values must lie in [0, 1]")
    base = params.at_detuning(0.0)

    def task(x):
        return lambda: _evaluate(
            replace(base, chi=x), ScanRow(x, 0.0, x), conditioning, vacuum_offset, None
        )

    return _run([task(x) for x in grid], workers)


def scan_theta(
    params: PhysicalParams,
    theta_grid: Iterable[float] = DEFAULT_THETA_GRID,
    *,
    vacuum_offset: float = VACUUM,
    workers: int = 1,
) -> list[ScanRow]:
    """
    Sweep the ancilla beam-splitter angle ``theta / pi`` at the detuning of ``params``.

    The conditioned columns hold the mirror after projecting the ancilla onto vacuum.
    """
    grid = [float(x) for x in theta_grid]
    if not grid:
        raise ValueError("theta grid is empty")
    if any(not 0 <= x <= 1 for x in grid):
        raise ValueError("theta / pi values must lie in [0, 1]")
    ratio = params.detuning / params.omega_m

    def task(x):
        def run():
            row = ScanRow(x, ratio, params.chi, theta_over_pi=x)
            return _evaluate(params, row, Conditioning("ancilla", x * math.pi), vacuum_offset, x * math.pi)

        return run

    return _run([task(x) for x in grid], workers)


def hysteresis(rows: Sequence[ScanRow]) -> list[tuple[float, float, float, str]]:
    """
    ``(delta_over_omega_m, s_M, E_N, branch)`` for every stable row of a detuning scan.

    Rows up to and including the maximum of ``s_M`` are ``ascending``; later
    rows are ``descending``.
    """
    good = [r for r in rows if r.stable and r.s_M is not None and r.E_N_mirror_cavity is not None]
    if not good:
        return []
    peak = max(range(len(good)), key=lambda k: good[k].s_M)
    return [
        (r.delta_over_omega_m, r.s_M, r.E_N_mirror_cavity, "ascending" if k <= peak else "descending")
        for k, r in enumerate(good)
    ]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value.replace(",", ";").replace("\n", " ")
    return f"{value:.12g}"


def write_rows_csv(path: str | Path, rows: Sequence[ScanRow], sweep: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# sweep={sweep} columns={','.join(COLUMNS)}\n")
        fh.write(",".join(COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(getattr(row, c)) for c in COLUMNS) + "\n")


def write_hysteresis_csv(path: str | Path, rows: Sequence[ScanRow]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("# columns=delta_over_omega_m,s_M,E_N,branch\n")
        fh.write("delta_over_omega_m,s_M,E_N,branch\n")
        for d, s, e, branch in hysteresis(rows):
            fh.write(f"{d:.12g},{s:.12g},{e:.12g},{branch}\n")


def export_wigner(
    params: PhysicalParams,
    subsystem: str,
    values: Iterable[float],
    out_dir: str | Path,
    *,
    sweep: str = "detuning",
    conditioning: Conditioning | None = None,
    vacuum_offset: float = VACUUM,
    matrix_format: bool = False,
) -> list[Path | None]:
    """
    Write one Wigner grid per sweep value as ``wigner_<subsystem>_<index>.csv``.

    ``sweep`` is ``detuning`` (values are ``Delta / omega_m``) or ``chi``
    (values are coupling scales at zero detuning). ``conditioning`` applies to
    the mirror only. Unstable points produce no file and a ``None`` entry.
    """
    if subsystem not in ("mirror", "field"):
        raise ValueError("subsystem must be 'mirror' or 'field'")
    if sweep not in ("detuning", "chi"):
        raise ValueError("sweep must be 'detuning' or 'chi'")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path | None] = []
    for index, x in enumerate(values):
        if sweep == "detuning":
            p = params.at_detuning(x)
        else:
            p = replace(params.at_detuning(0.0), chi=x)
        try:
            V = _steady(p)
        except OptomechError as exc:
            log.warning("no Wigner grid for %s=%g: %s", sweep, x, exc)
            written.append(None)
            continue
        if subsystem == "field":
            J = block(V, [1])
        elif conditioning is not None:
            J = condition_state(V, conditioning, vacuum_offset)
        else:
            J = block(V, [0])
        fit = fit_squeezed_thermal(J)
        grid = wigner_grid(J, *wigner_axes(J))
        header = (
            f"subsystem={subsystem} {sweep}={x:.12g} conditioning={conditioning.label if conditioning else 'none'}\n"
            f"n_bar={fit.n_bar:.12g} s={fit.s:.12g} phi={fit.phi:.12g}"
        )
        path = out_dir / f"wigner_{subsystem}_{index}.csv"
        grid.write_csv(path, header=header)
        if matrix_format:
            grid.write_matrix(out_dir / f"wigner_{subsystem}_{index}.dat")
        written.append(path)
    return written
