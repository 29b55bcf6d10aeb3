//! Executable Weihrauch problems.
//!
//! Streams over the naturals stand in for points of Baire space, a small
//! program language with a universal functional stands in for computable
//! functionals, and problems are bundles of verifiers and finite answer
//! kernels. On top of that sit the compositional product, the diamond
//! operator, the reduction of `F^⋄` to `F` for problems with `F ⋆ F ≤_W F`,
//! and the reduction game.

pub mod baire;
pub mod cli;
pub mod corpus;
pub mod diamond;
pub mod game;
pub mod machine;
pub mod nat;
pub mod problems;
pub mod star;
pub mod theorem1;

pub use baire::{FiniteWord, Stream, StreamError};
pub use machine::{Code, Outcome, Program};
pub use nat::Nat;
