"""Versioned defaults table.

Every tolerance and grid rule used by the library lives here so that run
manifests can echo the exact numbers a result was produced with.  Changing
any value bumps ``version``.
"""

DEFAULTS = {
    "version": 1,
    # Truncated Fock basis |0> .. |n_max-1>
    "n_max": 40,
    # Phase-space quadrature grid: uniform, trapezoid weights, centered on 0
    "grid_resolution": 121,
    "grid_extent_rule": "5*sqrt(max(nbar,1) + mean_photon_input + 1)",
    "grid_refine_tol": 1e-5,
    # Kernel sanity: discrete normalization must sit inside 1 +/- this
    "kernel_norm_tol": 1e-3,
    # Channel output trace loss beyond this is a hard error
    "channel_leakage_bound": 1e-2,
    # Input states to channel/protocol ops may carry at most this trace deficit
    "input_trace_tol": 0.1,
    # State constructors warn when truncation leakage exceeds this
    "constructor_leakage_warn": 1e-8,
    # Matrix invariants
    "hermiticity_tol": 1e-12,
    "positivity_floor": -1e-10,
    "kernel_negative_floor": -1e-10,
    # Measurement outcomes with densities below this are flagged degenerate
    "degenerate_density_floor": 1e-300,
    # Rejection sampling: Gaussian envelope amplitude = inflation * max density
    "envelope_inflation": 1.5,
}
