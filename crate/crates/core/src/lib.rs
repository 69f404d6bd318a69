//! Exact sum-of-squares certificates for differences of term-normalized
//! symmetric polynomials.

pub mod certify;
pub mod exact;
pub mod grammodel;
pub mod matrix;
pub mod polyring;
pub mod rationalize;
pub mod sdpsolve;
pub mod symfunc;
pub mod pipeline;
pub mod posetgen;
