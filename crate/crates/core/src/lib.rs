//! Classical trajectories of generalized coherent states for the
//! Heisenberg-Weyl, SU(2), SU(1,1) and U(N+1) groups, the quantum states
//! they label, and an exact Schrödinger propagator that checks the two agree.

// `!(x > 0.0)` is how NaN gets rejected alongside nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod exec;
pub mod flow;
pub mod numeric;
pub mod observables;
pub mod oracle;
pub mod states;
pub mod verification;

pub use error::{Error, Result};
pub use exec::Execution;
