//! Kernel-based question re-ranking for community question answering.
//!
//! Pure, allocation-only building blocks: bracketed syntax trees and
//! macro-trees, REL linking between question pairs, subset and partial tree
//! kernels, lexical and MT-evaluation features, an SMO solver over
//! precomputed Gram matrices, and ranking metrics.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod example;
pub mod features;
pub mod hash;
pub mod kernel;
pub mod rankeval;
pub mod rel;
pub mod svm;
pub mod tree;

pub use example::{Example, TreePair};
pub use kernel::{gram_matrix, Gram, KernelConfig, KernelError, KernelSpace};
pub use rel::{rel_link, RelConfig};
pub use tree::{macro_tree, node_count, parse_bracketed, to_bracketed, SyntaxTree};
