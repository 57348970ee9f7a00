"""Simulated Sagnac-source polarization-entanglement experiments.

The heavy lifting lives in the compiled extension ``sagnacsim._core``:
two-photon states and entanglement metrics, polarization projector algebra,
the spatial-mixture source model, coincidence counting with accidentals,
fringe/CHSH/tomography analysis, and the scenario front-end.
"""

from ._core import (  # noqa: F401
    PI,
    BootstrapError,
    ChshMinusTerm,
    ChshSettings,
    ConfigError,
    ConvergenceError,
    DegeneratePhaseError,
    DensityMatrix,
    DistortionMap,
    FitDegenerateError,
    InvalidStateError,
    PhysicalityReport,
    PumpSpatialProfile,
    UndefinedCorrelatorError,
    UndefinedVisibilityError,
    __version__,
    accidental_rate,
    analyzer_projector,
    bell_phase_state,
    bootstrap_tomography,
    born_probability,
    builtin_scenario,
    calibrated_x_state,
    canonical_chsh_settings,
    chsh_E,
    chsh_S,
    chsh_optimize,
    chsh_predict,
    concurrence,
    derive_seed,
    fiber_mode_count,
    fidelity_to_pure,
    fit_fringe,
    infer_phase,
    joint_projector,
    laser_profile,
    led_profile,
    linear_projector,
    mix,
    published_chsh_settings,
    perpendicular,
    predict_rate,
    projector_from_waveplates,
    reproduce,
    run_scenario_file,
    run_scenario_text,
    sagnac_output,
    sample_counts,
    tomography_linear,
    tomography_mle,
    tomography_settings,
    tomography_settings_csv,
    validate_physical,
    visibility_from_extrema,
    waveplate_operator,
    wrap_phase,
    x_state,
)
