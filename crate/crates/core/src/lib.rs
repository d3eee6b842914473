//! Certified convex lower bounds for exact sparse optimization.
//!
//! The crate is organised bottom-up:
//!
//! * [`extreal`]: extended reals with Moreau lower and upper additions;
//! * [`conjugacy`]: conjugates, biconjugates and one-sided linear couplings on
//!   finite sampled spaces, computed exactly;
//! * [`sparse_norms`]: the `l0` pseudonorm, the top-k gauge norm and the
//!   k-support norm;
//! * [`caprac`]: the coupling `<x/|x|, y>` that is constant along primal rays,
//!   and the conjugate formulas it yields for `l0`;
//! * [`lower_bound`]: certified lower bounds for `l0`-constrained problems,
//!   a least-squares specialization and an exhaustive exact solver;
//! * [`gso`]: norms built from groups of coordinates or point families, and
//!   lower bounds for union-of-subspaces constraints.

pub mod caprac;
pub mod conjugacy;
pub mod error;
pub mod extreal;
pub mod gso;
pub mod lower_bound;
pub mod sparse_norms;
pub mod vector;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use gso::{GroupStructure, PointFamily};
pub use lower_bound::{BoundReport, LsqInstance};
pub use vector::SupportSet;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
