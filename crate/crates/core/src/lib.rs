//! Negacyclic polynomial multiplication over F_q[x]/(x^n + 1) built from a
//! depth-limited transform and exact Toom-4/Karatsuba recursion, together
//! with the closed-form operation-count model that picks the parameters.
//!
//! The crate splits along the pipeline stages:
//!
//! - [`field`]: prime-field arithmetic with an operation-counting seam.
//! - [`poly`]: dense polynomials, the schoolbook oracle, binomial reduction.
//! - [`karatsuba`]: the recursive base-case multiplier.
//! - [`toom4`]: quarter-splitting multiplication with scaled interpolation
//!   driven by addition chains and one deferred rescale.
//! - [`addchain`]: chain validation and optimal search.
//! - [`ntt`]: the depth-ell transform, CRT components, and the end-to-end
//!   negacyclic multiplier.
//! - [`costmodel`]: exact weighted operation counts and the optimizer.
//! - [`opcounter`]: instrumented measurements and structural count audits.
//! - [`hybrid`]: strategy descriptors resolving to concrete pipelines.

pub mod addchain;
pub mod costmodel;
pub mod field;
pub mod hybrid;
pub mod karatsuba;
pub mod ntt;
pub mod opcounter;
pub mod poly;
pub mod toom4;

mod error;

pub use error::Error;
pub use field::{Field, FieldCtx};
pub use hybrid::{HybridParams, Resolved};
pub use ntt::{ComponentVector, InnerMul, NttPlan};
pub use opcounter::{OpCount, OpTally};
pub use poly::Poly;
