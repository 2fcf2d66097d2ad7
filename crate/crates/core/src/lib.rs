//! Singular series over quadratic number fields, smoothed sums of
//! `S(eta) - 1`, and the variance of prime counts in short intervals.

pub mod arith;
pub mod cli;
pub mod error;
pub mod field;
pub mod ideals;
pub mod output;
pub mod primes;
pub mod singular;
pub mod smoothing;
pub mod stats;

pub use error::{Error, Result};
pub use field::{BasisKind, FieldSpec, QuadInt};
pub use ideals::{IdealLattice, PrimeIdeal, SplitType, SquarefreeIdeal};
pub use primes::PrefixGrid;
pub use singular::{ResidueValue, SingularBox, SingularSeries, SingularValue};
pub use smoothing::{TestFunction, WeightKind};
pub use stats::{Sampler, VarianceRow, ZBaselineRow};
