//! Potts model on Cayley trees: boundary-field recursion, exhaustive
//! consistency checks on finite balls, and the period-2 solutions of the
//! three-state antiferromagnet.
//!
//! - [`tree`]: finite balls `V_n` of the order-`k` Cayley tree.
//! - [`model`]: Hamiltonian, finite-volume measures, the recursion map and
//!   the brute-force consistency oracle.
//! - [`period2`]: the four-component period-2 system, the scalar reduction
//!   `f`, `g`, `h`, `h'`, and the derivative numerator `p(y)`.
//! - [`solver`]: bracketing, bisection, root enumeration of `h` and
//!   fixed-point iteration.
//! - [`scan`]: sweeps over `θ` with CSV / JSON output.
//! - [`cli`]: the `cayley-potts` command line.

pub mod cli;
pub mod exec;
pub mod model;
pub mod numeric;
pub mod period2;
pub mod scan;
pub mod solver;
pub mod tree;

pub use exec::Execution;
pub use model::{FieldVector, ModelParams};
pub use period2::{theta_cr, Period2System, ScalarMap, ZVector};
pub use solver::{find_h_roots, RootReport};
pub use tree::{build_tree, FiniteTree};
