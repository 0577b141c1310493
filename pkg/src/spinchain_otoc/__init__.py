"""Exact OTOC saturation values, dynamics, and phase diagrams for XXZ chains."""

from .chain import (
    Boundary,
    ChainSpec,
    ConfigOperator,
    HamiltonianBlocks,
    LocalOperatorSpec,
    PauliKind,
    SectorBasis,
    build_hamiltonian,
    build_local_operator,
    build_sector_basis,
    bulk_site,
)
from .diagnostics import (
    AnsatzReport,
    AnsatzVerdict,
    ansatz_report,
    degeneracy_lifting_period,
    ground_fluctuation,
    ground_state_participation,
    participation_ratio,
)
from .errors import (
    CapacityError,
    DomainError,
    FitError,
    NotFoundError,
    NumericError,
    ResourceBudgetError,
    SpinchainError,
    SweepError,
)
from .otoc import (
    HaarEstimate,
    InitialState,
    OtocConfig,
    OtocReport,
    TermIVMode,
    TimeGrid,
    TimeSeries,
    ToleranceMode,
    WindowAverage,
    ground_subspace_term,
    haar_infinite_temperature,
    operators_for,
    otoc_dynamics,
    saturation_degenerate,
    saturation_nondegenerate,
    time_average,
)
from .spectral import (
    DegeneratePartition,
    EigenSystem,
    OperatorMatrix,
    StateVector,
    diagonalize,
    group_degenerate,
    project_state,
    singleton_partition,
    to_eigenbasis,
    width_capped_partition,
    window_tolerance,
)
from .sweep import (
    GridSpec,
    ScalingFit,
    SweepGrid,
    SweepPoint,
    critical_points_by_size,
    extract_critical_point,
    fit_power_law,
    run_sweep,
)

__version__ = "0.1.0"
