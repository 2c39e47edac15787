"""Simulator and certification toolkit for two-memory OAM entanglement.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from oamsim._oamsim import (  # noqa: F401
    DomainError,
    RngStream,
    ValidationError,
    __version__,
    apply_noise,
    apply_storage,
    born_probability,
    bound_M,
    bound_W,
    build_spiral_spectrum,
    certify_dimension,
    density_from_pure,
    fit_lorentzian,
    forward_probabilities,
    hwhm_width,
    ideal_qutrit_pair,
    joint_state,
    kron_product,
    lg_amplitude,
    linear_inversion,
    lorentzian_eval,
    matrix_sqrt_psd,
    mle_reconstruct,
    mub_state,
    pair_visibilities,
    project_to_physical,
    qutrit_tomo_states,
    schmidt_threshold_check,
    simulate_coincidence_matrix,
    storage_profile,
    superposition_phase_mask,
    uhlmann_fidelity,
)
