//! Exact continued-fraction renormalization machinery for circle rotations,
//! Birkhoff sums of the non-integrable observable 1/‖·‖, Diophantine regime
//! classification, and simulators for reparameterized torus flows with two
//! quadratic stopping points.
//!
//! Layout:
//! - [`cf`]: angles as partial-quotient programs, the convergent ladder,
//!   β₀ partial sums, ℓ_n.
//! - [`rotation`]: orbits, gap statistics, renormalization towers, the
//!   near-rational bijection.
//! - [`birkhoff`]: S_n, Θ_n^β, the bound oracles, interval unions, bad sets.
//! - [`classify`]: approximability certificates, angle constructions, and
//!   the regime verdict.
//! - [`flow`]: crossing times, the cusped roof, special-flow and Euler
//!   simulators, occupancy series.

pub mod birkhoff;
pub mod cf;
pub mod classify;
pub mod flow;
pub mod numeric;
pub mod rotation;

pub use cf::{Angle, CfError, CirclePoint, ConvergentTable};
pub use numeric::{Int, Rat};

/// √2 − 1 as a partial-quotient prefix of the requested length.
pub fn sqrt2_minus_one_prefix(len: usize) -> Angle {
    let mut q = vec![Int::from(0)];
    q.extend(std::iter::repeat_n(Int::from(2), len));
    Angle::from_quotients(&q).expect("valid prefix")
}

/// The golden-type angle [0; 1, 1, …, 1, 2] with the requested number of
/// ones (canonical form of a Fibonacci convergent ratio).
pub fn golden_prefix(ones: usize) -> Angle {
    let mut q = vec![Int::from(0)];
    q.extend(std::iter::repeat_n(Int::from(1), ones));
    q.push(Int::from(2));
    Angle::from_quotients(&q).expect("valid prefix")
}
