//! Exact universal Weyl-algebra realizations of finite-dimensional Lie
//! algebras, together with the identity suites that verify them.

pub mod bernoulli;
pub mod chains;
pub mod hyperbolic;
pub mod lie;
pub mod pbw;
pub mod rational;
pub mod realization;
pub mod verifier;
pub mod series;
pub mod weyl;
