"""Two exchange-coupled spin qubits under linear-sweep (LMSZ) drives.

The conserved product s1z*s2z splits the four-level problem into two
independent two-level sweeps whose transverse field is supplied entirely
by the exchange coupling.  The package provides exact symmetry-based
propagation, closed-form finite-window amplitudes (parabolic cylinder
functions of imaginary order), entanglement tracking, coupling-parameter
estimation, and classical-noise / non-Hermitian open-system extensions,
plus a scenario-driven CLI (``lmszpair --help``).
"""

from ._kernels import BACKEND_NAME
from .errors import (
    ConfigurationError,
    EstimationError,
    IntegrationError,
    InvalidInputError,
    LmszError,
    PoleError,
    RangeError,
)
from .estimation import (
    EstimatedCouplings,
    ProbabilityMeasurement,
    RabiFit,
    RabiTrace,
    fit_rabi_trace,
    invert_probabilities,
    rabi_probability,
)
from .model import (
    BASIS_LABELS,
    Constant,
    CouplingTensor,
    DecayRates,
    EffectiveBlock,
    FieldProtocol,
    NoisyRamp,
    Oscillating,
    Ramp,
    Tabulated,
    assemble_propagator,
    block_decompose,
    build_hamiltonian,
    check_symmetry,
)
from .observables import (
    ConcurrenceCurve,
    ScenarioReport,
    ScenarioSpec,
    asymptotic_concurrence,
    concurrence,
    concurrence_trajectory,
    exact_ramp_trajectory,
    scenario_asymptotics,
)
from .openquantum import (
    EnsembleResult,
    NoisePath,
    NoiseSpec,
    run_decaying_lmsz,
    run_noisy_lmsz,
    sample_noise_path,
)
from .propagation import (
    BlockPropagator,
    BlockTrajectory,
    TwoQubitState,
    TwoQubitTrajectory,
    Window,
    direct_propagate_4x4,
    lmsz_probability,
    numeric_lmsz_probability,
    propagate_block,
    propagate_two_qubit,
    tail_average,
)
from .specfun import (
    PCFArgument,
    PCFConfig,
    exact_amplitudes,
    exact_amplitudes_grid,
    gamma_complex,
    pcf_d,
    rgamma,
)

__version__ = "0.1.0"
