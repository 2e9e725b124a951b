//! Exact-arithmetic Metropolis scan chains on the Brauer monoid basis of
//! the BMW algebra (at `l = 1`).
//!
//! The crate is layered bottom-up:
//!
//! * [`brauer`]: diagrams, products with loop counting, enumeration.
//! * [`words`]: constrained reduced words and the BMW length `L`.
//! * [`chains`]: the per-generator chains `K_i`, the generic Metropolis
//!   construction, random/short/long scans, stationary distributions and
//!   distance diagnostics, all over `BigRational`.
//! * [`classes`]: communication classes keyed by lower horizontal edges,
//!   class pairing, permutation assignments and the one-strand embedding.
//! * [`ext`] and [`shifted`]: exact arithmetic in `Q(sqrt(theta), sqrt(Z))`,
//!   the restricted trace form, the shifted basis and the trace-norm bound.
//! * [`sampler`]: seeded simulation of the scans.
//! * [`verify`]: the orchestrated invariant suite behind `bmwwalk verify`.

pub mod brauer;
pub mod chains;
pub mod classes;
pub mod error;
pub mod ext;
pub mod rational;
pub mod sampler;
pub(crate) mod ser;
pub mod shifted;
pub mod verify;
pub mod words;

pub use brauer::{BrauerDiagram, GenKind, LoopProduct};
pub use error::{Error, Result};
pub use rational::{Rational, Theta};
pub use words::{BmwLength, Letter, LengthTable, ReducedWord};
