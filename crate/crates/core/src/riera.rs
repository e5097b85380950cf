//! Truncated double-coset sums for Weil-Petersson gradient norms.

/// Placeholder types until the module lands.
#[derive(Debug, Clone)]
pub struct RieraEvaluation;
#[derive(Debug, Clone)]
pub struct CosetRep;
