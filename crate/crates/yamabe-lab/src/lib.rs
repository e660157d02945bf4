//! Numerical laboratory for the blow-up profile of the critical Yamabe
//! equation in dimensions ten and eleven.

pub mod bubble;
pub mod curvature;
pub mod error;
pub mod pohozaev;
pub mod profile;
pub mod quadrature;
pub mod radial;
pub mod sphere;
pub mod sturm_liouville;

pub use bubble::Dimension;
pub use error::{LabError, Result};

/// Guide chapters, compiled so their snippets run as doc tests.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/radial.md")]
    pub mod radial {}
    #[doc = include_str!("../../../book/src/moments.md")]
    pub mod moments {}
    #[doc = include_str!("../../../book/src/jets.md")]
    pub mod jets {}
    #[doc = include_str!("../../../book/src/profile.md")]
    pub mod profile {}
    #[doc = include_str!("../../../book/src/pohozaev.md")]
    pub mod pohozaev {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
