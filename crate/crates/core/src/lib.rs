//! Synthesis and verification of best data minimisers.
//!
//! A *minimiser* for a program `p` is a pre-processor `m` on the inputs of
//! `p` with `p ∘ m = p` and `m ∘ m = m`: it replaces each input by a canonical
//! representative that the program cannot tell apart from the original. A
//! *best* minimiser discloses no more than any other minimiser, i.e. it maps
//! every class of inputs with equal outputs to a single representative.
//!
//! The pipeline is:
//!
//! 1. [`dsl`] parses a program over bounded inputs.
//! 2. [`symexec`] executes it symbolically into path conditions and output
//!    terms.
//! 3. [`synth`] derives per-input (distributed) or joint (monolithic)
//!    decision tables of guards and representatives, driving the finite
//!    domain solver in [`logic`].
//! 4. [`emit`] writes the tables as JSON documents or as source programs.
//!
//! [`oracle`] and [`knowledge`] recompute the same objects by brute-force
//! enumeration and check them against each other.

pub mod corpus;
pub mod dsl;
pub mod emit;
pub mod knowledge;
pub mod logic;
pub mod oracle;
pub mod random;
pub mod symexec;
pub mod synth;
pub mod value;

pub use value::{Domain, Type, Valuation, Value};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/language.md")]
    pub struct Language;
    #[doc = include_str!("../../../book/src/symbolic.md")]
    pub struct Symbolic;
    #[doc = include_str!("../../../book/src/synthesis.md")]
    pub struct Synthesis;
    #[doc = include_str!("../../../book/src/verification.md")]
    pub struct Verification;
    #[doc = include_str!("../../../book/src/disclosure.md")]
    pub struct Disclosure;
    #[doc = include_str!("../../../book/src/emission.md")]
    pub struct Emission;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
