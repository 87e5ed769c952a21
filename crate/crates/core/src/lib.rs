//! Computational toolkit for commutative monoid schemes: prime spectra and
//! semilattices of finitely presented commutative monoids, M-sets with
//! tensor and localization, topos points, Proj of graded monoids with
//! quasi-coherent sheaves, and the sigma-function calculus classifying
//! points over free monoids.

pub mod free_points;
pub mod graded;
pub mod json;
pub mod monoid;
pub mod msets;
pub mod schemes;
pub mod spectrum;
pub(crate) mod util;

/// Shared resource bounds for the budgeted algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    /// Step budget for word-problem searches.
    pub budget: u64,
    /// Truncation size for windowed comparisons of infinite carriers.
    pub window: u32,
    /// Maximum carrier size for exhaustive enumeration.
    pub cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            budget: 10_000,
            window: 6,
            cap: 20,
        }
    }
}
