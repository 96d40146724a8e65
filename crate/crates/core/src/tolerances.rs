//! Numerical tolerances shared across the crate.

/// Tolerance configuration. `Tolerances::DEFAULT` holds the values used
/// throughout the library; callers that need different thresholds pass
/// their own record to the `*_with` entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative Frobenius deviation ‖M − M†‖ / max(1, ‖M‖) accepted for Hermitian input.
    pub hermiticity: f64,
    /// ‖U†U − 1‖_F accepted for unitary input.
    pub unitarity: f64,
    /// |det U − 1| accepted for special unitary input.
    pub determinant: f64,
    /// |tr H| accepted for traceless input.
    pub trace: f64,
    /// Distance from ±π at which a log eigenphase is considered antipodal.
    pub branch: f64,
    /// Generators below this norm make the target the identity.
    pub identity_target: f64,
    /// Margin below 1 required of tr(H0²) for the Randers norm.
    pub wind_margin: f64,
    /// Largest condition estimate accepted for the continuation system.
    pub max_condition: f64,
    /// |tr(H1²) − 1| accepted for a unit control.
    pub unit_norm: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermiticity: 1e-12,
        unitarity: 1e-10,
        determinant: 1e-10,
        trace: 1e-10,
        branch: 1e-9,
        identity_target: 1e-12,
        wind_margin: 1e-12,
        max_condition: 1e12,
        unit_norm: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
