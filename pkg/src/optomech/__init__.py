"""Steady-state Gaussian optomechanics: covariance solver, squeezed-thermal fits, conditioning and scans."""

from .conditioning import (
    Conditioning,
    beam_splitter,
    condition_state,
    conditioned_mirror,
    homodyne_update,
    parse_conditioning,
    tripartite_entanglement,
    tripartite_scan,
    vacuum_update,
)
from .errors import (
    ConfigError,
    ConvergenceFailure,
    DomainError,
    IndexOutOfRange,
    OptomechError,
    SingularCovariance,
    SingularSystem,
    StepFailure,
    UnphysicalState,
    UnstableDrift,
)
from .gaussian import (
    SqueezedThermalFit,
    WignerGrid,
    block,
    check_physical,
    fit_squeezed_thermal,
    log_negativity,
    symplectic_eigenvalues,
    symplectic_squeeze,
    wigner_grid,
)
from .linalg import evolve_covariance, evolve_to_steady_state, solve_lyapunov
from .model import REFERENCE_PARAMS, PhysicalParams, build_model, load_config, steady_state
from .scan import ScanRow, export_wigner, scan_chi, scan_detuning, scan_theta

__version__ = "0.1.0"
