//! Compiles and runs the code listings of the guide in `book/` as doctests.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/split-law.md")]
pub mod split_law {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/trees.md")]
pub mod trees {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/chain.md")]
pub mod chain {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/growth.md")]
pub mod growth {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fringe.md")]
pub mod fringe {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/newick.md")]
pub mod newick {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
