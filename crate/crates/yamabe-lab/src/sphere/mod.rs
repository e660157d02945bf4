//! Exact calculus on the unit sphere: monomial moments, averages of Taylor
//! blocks and harmonic decomposition.

mod float_poly;
mod harmonic;
mod moments;
mod poly;

pub use float_poly::{monomial_moment_f64, radial_mean, FloatPolynomial};
pub use harmonic::{
    decompose_harmonic, decompose_harmonic_capped, harmonic_projection, reconstruct,
    HarmonicComponent, DEFAULT_MAX_DEGREE,
};
pub use moments::{
    expand_square, hessian_block, ladder_denominator, odd_moment_constant, sphere_inner,
    sphere_mean, sphere_monomial_integral_gamma, sphere_monomial_moment, taylor_block_average,
    verify_odd_moment, BlockAverage, OddMomentCheck, SphereArea, SquareExpansion,
    LADDER_TOLERANCE, SQUARE_TOLERANCE,
};
pub use poly::{
    exact, random_polynomial, rational, to_f64, CompiledPolynomial, Exponents, PolynomialJson, SphericalPolynomial,
    TermJson,
};

#[cfg(test)]
mod tests;
