//! Information-theoretic performance bounds for resource-constrained
//! selection.
//!
//! A system holds `N` objects, each with a relative probability `p(a_i)` of
//! delivering the desired performance. Only `M` of them can be selected. The
//! optimal strategy picks the `M` most probable objects, so its error
//! probability `π` is the mass left in the `N − M` least probable ones and its
//! merit probability is `ψ = 1 − π`.
//!
//! Given only the entropy `H` of `p`, this crate bounds `π` and `ψ`:
//!
//! * [`extrema`] builds the maximum- and minimum-entropy distributions with a
//!   prescribed tail mass `π` (the minimum reduces to a finite candidate set).
//! * [`bounds`] inverts those extremes into closed-form and tight numeric
//!   bounds on `π`/`ψ` for a given `H`.
//! * [`transform`] maps a performance requirement of `k` selected objects onto
//!   an equivalent single-object system over `k`-subsets or `k`-multisets.
//! * [`oracle`] holds brute-force validators and the Monte Carlo sweep harness.
//! * [`scenarios`] wraps cache prefetch and opportunistic scheduling models.
//!
//! The crate is `no_std` and only needs `alloc`. All logarithms are base 2 and
//! all transcendental functions go through `libm`, so results do not depend on
//! the platform's math library.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod distribution;
mod error;
pub mod extrema;
pub mod math;
pub mod oracle;
pub mod scenarios;
pub mod transform;

pub use bounds::{BoundOptions, BoundReport, ReportMode};
pub use distribution::{
    entropy, feasible_pi_range, make_distribution, make_distribution_with, tail_probability,
    EntropyValue, Limits, SortedDistribution, SystemShape, DEFAULT_EPS,
};
pub use error::{Error, Result};
pub use extrema::{CurveSample, MinEntropyResult};
pub use transform::{TransformKind, TransformLimits, TransformedSystem};
