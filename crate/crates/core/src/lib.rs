//! Gaussian periods, cyclotomic-unit indices and certificates of vanishing
//! for eigenspaces of the p-part of the class group of Q(zeta_p).
//!
//! The pipeline works entirely in the residue field F_{q^n} of Q(zeta_p) at a
//! prime above an auxiliary prime q:
//!
//! * [`ff_arith`] builds the field canonically and supplies trace, powers and
//!   the discrete logarithm in the order-p subgroup.
//! * [`periods`] computes the Gaussian periods and the derived integers
//!   v, d_i and a_k.
//! * [`cyclo_units`] computes indices of the cyclotomic units beta_r modulo p
//!   and checks the identities tying them to the periods.
//! * [`quadforms`] covers class numbers of Q(sqrt(-p)) and representations
//!   by x^2 + D y^2.
//! * [`certifier`] assembles all of it into re-verifiable certificates.

pub mod certifier;
pub mod cyclo_units;
pub mod error;
pub mod ff_arith;
pub mod nt;
pub mod periods;
pub mod quadforms;
pub mod serde_big;

pub use error::{Error, Result};
pub use ff_arith::{build_field, CyclotomicSetup, FieldContext, FieldElement};
