//! Cartan complexes of torus actions on finite models and their twisted cohomology.

pub mod complex;
pub mod model;
pub mod twisted;

pub use complex::{poly_label, poly_monomials, CartanComplex, EquivariantForm, Twisting};
pub use model::{CdgaModel, Generator, ModelError, ModelSpec, Term};
pub use twisted::{
    conjugation_identity, equivariant_cohomology, euler_mult_injectivity, exactness_solve, exp_b_transform, exp_form,
    f_window, formality_test, random_closed_form, random_form, relative_cohomology_graded, relative_twisted_cohomology,
    restriction_to_fiber, six_term_check, twisted_cohomology, CartanPair, EulerReport, FormalityReport,
    GradedCohomology, ModelMap, RelativeCohomology, TwistedCohomology,
};

use thiserror::Error;

use crate::dg::DgError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CartanError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dg(#[from] DgError),
    #[error("twisting is not d_G-closed")]
    NotClosed,
    #[error("twisting must have total degree 3")]
    NotDegreeThree,
    #[error("not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("window unstable: (even, odd) = {at_cap:?} at D but {at_cap_plus_two:?} at D + 2")]
    UnstableWindow { at_cap: (usize, usize), at_cap_plus_two: (usize, usize) },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("model has {model} contractions but rank {requested} was requested")]
    RankMismatch { model: usize, requested: usize },
    #[error("invalid model map: {0}")]
    InvalidMap(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}
