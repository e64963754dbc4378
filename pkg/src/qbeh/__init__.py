"""Gramians of quadratic bilinear systems with a Hadamard-product nonlinearity."""

__version__ = "0.1.0"

from .errors import (
    BlowUpError,
    CapacityError,
    DimensionError,
    DivergenceError,
    FormatError,
    NumericalError,
    PreconditionError,
    QbehError,
    StabilityError,
    SymmetryError,
    ValidationError,
)
from .gramian import SeriesReport, gramian_series, kron_residual, qbeh_residual
from .linalg import (
    SpectralSummary,
    hadamard,
    is_stable,
    kron,
    read_matrix_market,
    spectral_summary,
    unvectorize,
    vectorize,
    write_matrix_market,
)
from .lyapunov import lyap_residual, lyap_solve
from .simulate import (
    InputSignal,
    TrajectoryRecord,
    simulate_original_circuit,
    simulate_qbsh,
    volterra_scaling_check,
)
from .solver import (
    SolveOptions,
    SolveReport,
    StartMode,
    convergence_rate_check,
    fixed_point_solve,
    frechet_operator_matrix,
)
from .systems import (
    CircuitParams,
    QbshSystem,
    build_h_from_fg,
    build_transmission_line,
    load_system,
    save_system,
    scalar_system,
)
