"""Two-mode light states under delocalized single-photon addition.

The operator ``a1^dagger + exp(i phi) a2^dagger`` is applied to pairs of
coherent, thermal or squeezed states and to a two-mode squeezed vacuum.
Closed forms for the normalization, the single-photon-subspace NPT, the
joint photon-number distribution and the Wigner function are checked
against truncated Fock-space computations.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ContractError,
    ConvergenceError,
    DpaError,
    InvalidDimensionError,
    RegionError,
    TruncationError,
    WitnessUndefinedError,
)
from .fock import (  # noqa: E402
    FockCutoff,
    PhasePoint,
    annihilation_matrix,
    creation_matrix,
    displaced_parity,
    displacement_matrix,
    hermitian_eigenvalues,
    jacobi_eigh,
    number_matrix,
    parity_matrix,
)
from .states import (  # noqa: E402
    CoherentPair,
    DpaParams,
    EnergyBudget,
    SqueezedPair,
    ThermalPair,
    Tmsv,
    TwoModeDensity,
    VacuumPair,
    apply_dpa,
    budget_to_spec,
    build_input,
    default_cutoff,
    nbar_total,
    normalization_closed,
    output_state,
)
from .entanglement import (  # noqa: E402
    closed_pt_eigenvalues,
    npt_closed,
    partial_transpose,
    subspace_witness,
    witness_closed,
)
from .statistics import JpndTable, discorrelation_verdict, jpnd  # noqa: E402
from .wigner import (  # noqa: E402
    QuadratureConfig,
    SectionGrid,
    WignerEvaluator,
    section_grid,
    wigner_analytic,
    wigner_numeric,
    wln,
)
from .scenario import ResultRecord, ScenarioConfig, run_point  # noqa: E402
