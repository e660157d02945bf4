//! Curvature jets at the center of conformal normal coordinates: symmetry
//! projection, validation, the metric and Laplacian expansions, and the
//! curvature identities and inequalities used for `n = 10, 11`.

mod constraints;
mod expansion;
mod identities;
mod jet;
mod tensor;
mod validate;

pub use expansion::{
    cnc_metric_expansion, cnc_operator_coeffs, rescaled_coeffs, DirectionalExpansion, OperatorCoeffs,
    OperatorPolynomials,
    EXPANSION_WARNING_RADIUS,
};
pub use identities::{
    build_r_bar_tilde, check_hv_inequalities, check_sextic_identity, dimension_gate, laplacian_cubed_from_identity,
    quadratic_terms, rbar2_weyl, rbar6_formula, realize_sextic_block, sextic_radial_laplacian, weyl_norms,
    GateReport, HvReport, InequalityMargin, QuadraticTerms, Rbar2Report, SexticIdentityCheck, SquareRoute,
    WeylNorms, RBAR2_TOLERANCE,
};
pub use jet::{generate_jet, project_symmetries, CurvatureJet, HypothesisClass, JetMetadata, JetSpec, ProjectionMode};
pub use validate::{validate_jet, ConstraintCheck, ConstraintReport, HYPOTHESIS_TOLERANCE, VALIDATION_TOLERANCE};

