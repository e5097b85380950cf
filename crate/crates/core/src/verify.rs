//! Verification suites.

/// Placeholder types until the module lands.
#[derive(Debug, Clone)]
pub struct SuiteConfig;
#[derive(Debug, Clone)]
pub struct VerificationReport;
