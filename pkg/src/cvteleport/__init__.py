"""Desk-scale simulator for continuous-variable teleportation viewed as a
random-displacement (thermalizing) channel, plus the matching dense-coding
channel, on truncated Fock spaces.

Three independent computation routes cover the same physics and are checked
against each other: the kernel-weighted displacement channel, the direct
protocol simulation (joint measurement, conditioning, correction), and the
closed-form Gaussian moment calculus.
"""

from .channel import (
    ChannelConfig,
    GaussianKernel,
    Kernel,
    SampledKernel,
    apply_channel,
    apply_thermal_form,
    fidelity_via_kernel,
    gaussian_kernel,
    grid_for,
    kernel_from,
    noisy_nbar,
)
from .defaults import DEFAULTS
from .densecoding import (
    DenseCodingChannel,
    channel_matrix,
    dense_coding_channel,
    empirical_mutual_information,
    histogram_mi_bits,
    mutual_information_gaussian,
    noisy_dense_coding,
    simulate_transmission,
)
from .epr import (
    EprVector,
    epr_overlap,
    epr_overlaps,
    f_w_element,
    kernel_value,
    kernel_values,
    psi_overlap,
    refined_kernel_values,
    tmsv,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionMismatchError,
    EnvelopeError,
    NumericalConsistencyError,
    TruncationError,
)
from .fock import (
    DensityMatrix,
    PhasePoint,
    TwoModeState,
    annihilation,
    cat_state,
    coherent_state,
    creation,
    displacement,
    fidelity,
    fock_state,
    mix_two_mode,
    momentum_operator,
    number_operator,
    partial_trace,
    position_operator,
    random_density_matrix,
    tensor,
    thermal_state,
    trace_distance,
    two_mode_pure,
    vacuum,
)
from .gaussian import (
    GaussianState,
    apply_gaussian_channel,
    coherent_gaussian,
    fock_to_gaussian_moments,
    gaussian_fidelity,
)
from .grids import PhaseGrid, default_extent, default_grid
from .teleport import (
    ConditionalOutcome,
    average_output,
    conditional_fidelities,
    conditional_output,
    mean_quadratures,
    outcome_density,
    sample_outcomes,
)

__version__ = "0.1.0"
