/// Centralized tolerance constants. All equality and convergence checks in
/// the crate route through one instance of this record, so a scenario can
/// loosen or tighten them in one place.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Probability-mass bookkeeping (sums to one, truncation tails).
    pub mass: f64,
    /// Indifference detection: pool value vs. minimum wage, FOSD ties,
    /// knife-edge regime deduplication.
    pub indifference: f64,
    /// Fixed-point residual bound for equilibrium thresholds.
    pub fixed_point: f64,
    /// PMF mean reproduction after truncation.
    pub mean: f64,
    /// Sup-norm state change under which iteration is declared converged.
    pub convergence: f64,
    /// Quantization used when hashing states for cycle detection.
    pub cycle_resolution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass: 1e-12,
            indifference: 1e-12,
            fixed_point: 1e-10,
            mean: 1e-10,
            convergence: 1e-10,
            cycle_resolution: 1e-9,
        }
    }
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        mass: 1e-12,
        indifference: 1e-12,
        fixed_point: 1e-10,
        mean: 1e-10,
        convergence: 1e-10,
        cycle_resolution: 1e-9,
    };
}
