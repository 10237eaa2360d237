"""Input/output model equivalence and recursive least squares identification."""

from ._ioid import (
    EquivalenceCertificate,
    IOModel,
    NumericalError,
    ProjectedLimit,
    ReducibilityReport,
    RlsState,
    ValidationError,
    batch_solve,
    default_P0,
    excitation_report,
    generate_input,
    is_equivalent,
    lift_by_factor,
    lift_identity_check,
    lift_matrix,
    lift_true,
    load_model,
    projected_limit,
    reducibility_check,
    reduction_residual,
    regressor_dim,
    regressors,
    rls,
    run_experiment,
    run_tracked_identification,
    save_model,
    simulate,
    theta_equivalence_residual,
    trivial_embed,
)

__version__ = "0.1.0"
__all__ = [name for name in dir() if not name.startswith("_")]
