//! Exact computations for twisted equivariant cohomology of Cartan models,
//! generalized complex linear algebra and a finite-difference toolkit for
//! pseudo-holomorphic functions.

pub mod linalg;
pub mod dg;
pub mod cartan;
pub mod spectral;
pub mod gc;
pub mod elliptic;
pub mod corpus;
pub mod report;
