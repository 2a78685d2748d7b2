//! Critical beta-splitting random trees.
//!
//! A clade of `n` leaves splits into sizes `(i, n - i)` with probability proportional to
//! `1 / (i (n - i))`. This crate samples these trees in discrete and continuous time,
//! grows them one leaf at a time, solves the recurrences of the size-bias chain that
//! describes the path to a random leaf, and checks all of it statistically.
//!
//! ```
//! use betasplit::{rng, tree};
//!
//! let mut rng = rng::stream(7);
//! let t = tree::sample_ctcs(20, &mut rng).unwrap();
//! assert_eq!(t.n_leaves(), 20);
//! assert_eq!(t.node_count(), 39);
//! ```

pub mod chain;
pub mod error;
pub mod growth;
pub mod newick;
pub mod numeric;
pub mod rng;
pub mod split;
pub mod stats;
pub mod svg;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use split::{constants, levy_tail, SplitLaw};
pub use tree::{BudTree, CladeTree};
