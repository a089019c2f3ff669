//! An exact, desk-scale laboratory for universal fixed-to-variable lossless
//! source coding on finite alphabets.
//!
//! The crate works at type granularity throughout: sequences are never
//! materialized outside the brute-force oracles. It provides
//!
//! * exact combinatorics of empirical types ([`typeset`]), with class sizes
//!   as big naturals and probabilities in base-2 log domain;
//! * the fixed-to-variable code abstraction and exact epsilon-rates
//!   ([`coding`]);
//! * the universal constructions: Two-Stage codes, the Type Size code with
//!   its exact rate formula, and the binary interleaved code ([`universal`]);
//! * the code/guesser equivalence ([`guessing`]);
//! * finite-n distributions of empirical entropy and log class size with
//!   explicit Gaussian-approximation constants, and third-order rate fits
//!   ([`asymptotics`]);
//! * the mixture converse over constant-J manifolds, Laplace-approximation
//!   verification, and the closed-form Kraft allocation ([`converse`],
//!   [`laplace`]).
//!
//! Everything is deterministic; there is no randomness anywhere in the
//! toolchain.
//!
//! ```
//! use fvlab::{code_rate_bits, CodeKind, Dist, TypeSet};
//!
//! let p = Dist::new(vec![0.8, 0.2])?;
//! let ts = TypeSet::enumerate(20, 2)?;
//! let optimal = code_rate_bits(CodeKind::Optimal, &ts, &p, 0.1)?;
//! let universal = code_rate_bits(CodeKind::TypeSize, &ts, &p, 0.1)?;
//! assert!(optimal.bits <= universal.bits);
//! # Ok::<(), fvlab::Error>(())
//! ```

pub mod asymptotics;
pub mod coding;
pub mod converse;
pub mod dist;
pub mod error;
pub mod gaussian;
pub mod guessing;
pub mod laplace;
pub mod numeric;
pub mod oracles;
pub mod quadrature;
pub mod rates;
pub mod report;
mod tails;
pub mod typeset;
pub mod universal;

pub use dist::{Alphabet, Dist};
pub use error::{Error, Result};
pub use rates::{code_rate_bits, CodeKind, RateReport};
pub use typeset::{TypeSet, TypeVector};
