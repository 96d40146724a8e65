//! Independent checks of a solved instance: a time-ordered RK4 integration
//! of the Schrödinger equation driven by the advected control, and a report
//! aggregating the geometric invariants.

use nalgebra::SVD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{ComplexMatrix, HermitianOperator, SpecialUnitary};
use crate::error::{Error, Result};
use crate::geodesic::Geodesic;
use crate::geometry::{
    conserved_quantity_residuals_on, derivative_step, euler_poincare_residual_on, finsler_norm,
    first_variation, VariationField, DEFAULT_QUADRATURE_NODES,
};
use crate::problem::{ControlSolution, NavigationProblem};

pub const ORACLE_STEPS: usize = 2000;
pub const REUNITARIZE_EVERY: usize = 50;
pub const VARIATION_FIELDS: usize = 5;
pub const MIN_STEPS: usize = 10;

/// Nearest unitary W·V† from the SVD M = W Σ V†.
pub fn polar_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    let svd = SVD::new(m.clone(), true, true);
    let w = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    w * v_t
}

/// RK4 on U̇ = −i(H0 + H1(t))U with H1(t) the advected control, step T/steps,
/// re-unitarized every [`REUNITARIZE_EVERY`] steps and at the end.
pub fn integrate_schrodinger(
    h0: &HermitianOperator,
    h1_0: &HermitianOperator,
    u_i: &SpecialUnitary,
    duration: f64,
    steps: usize,
) -> Result<SpecialUnitary> {
    integrate_schrodinger_with(h0, h1_0, u_i, duration, steps, REUNITARIZE_EVERY)
}

/// As [`integrate_schrodinger`] with a custom re-unitarization cadence;
/// `cadence = 0` disables the projection.
pub fn integrate_schrodinger_with(
    h0: &HermitianOperator,
    h1_0: &HermitianOperator,
    u_i: &SpecialUnitary,
    duration: f64,
    steps: usize,
    cadence: usize,
) -> Result<SpecialUnitary> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_STEPS} steps required, got {steps}"
        )));
    }
    for found in [h1_0.dim(), u_i.dim()] {
        if found != h0.dim() {
            return Err(Error::DimensionMismatch {
                expected: h0.dim(),
                found,
            });
        }
    }
    // Only the advected control is taken from the geodesic; the propagator
    // comes from the integration below.
    let geodesic = Geodesic::new(h0, h1_0, u_i);
    let minus_i = Complex64::new(0.0, -1.0);
    let generator = |t: f64| (h0 + &geodesic.control_at(t)).into_matrix() * minus_i;

    let h = duration / steps as f64;
    let mut u = u_i.matrix().clone();
    for k in 0..steps {
        let t = k as f64 * h;
        let a_start = generator(t);
        let a_mid = generator(t + 0.5 * h);
        let a_end = generator(t + h);
        let k1 = &a_start * &u;
        let k2 = &a_mid * (&u + &k1 * Complex64::from(0.5 * h));
        let k3 = &a_mid * (&u + &k2 * Complex64::from(0.5 * h));
        let k4 = &a_end * (&u + &k3 * Complex64::from(h));
        u += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4)
            * Complex64::from(h / 6.0);
        if cadence > 0 && ((k + 1) % cadence == 0 || k + 1 == steps) {
            u = polar_unitary(&u);
        }
    }
    Ok(SpecialUnitary::from_matrix_unchecked(u))
}

/// Acceptance thresholds for [`VerificationReport::failures`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub endpoint_error: f64,
    pub oracle_gate_error: f64,
    pub finsler_deviation: f64,
    pub norm_drift: f64,
    pub conservation_residual: f64,
    pub ep_residual: f64,
    /// Bound on |δ| / max‖η‖_F.
    pub first_variation: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            endpoint_error: 1e-6,
            oracle_gate_error: 1e-6,
            finsler_deviation: 1e-10,
            norm_drift: 1e-12,
            conservation_residual: 1e-7,
            ep_residual: 1e-7,
            first_variation: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// ‖U(T) − U_F‖_F with the closed-form propagator.
    pub endpoint_error: f64,
    /// max |F − 1| along the path; `None` when the wind is too strong for the
    /// Randers norm.
    pub finsler_deviation: Option<f64>,
    /// max |tr(H1(t)²) − 1|.
    pub norm_drift: f64,
    /// max |tr(H0 Ḣ1)|.
    pub conservation_residual: f64,
    /// max ‖Ḣ1 + i[H0, H1]‖_F.
    pub ep_residual: f64,
    /// First variation over random endpoint-fixed fields, each divided by
    /// max‖η‖_F; `None` under strong wind.
    pub first_variation_samples: Option<Vec<f64>>,
    /// ‖U_oracle(T) − U_F‖_F from the RK4 integration.
    pub oracle_gate_error: f64,
    pub seed: u64,
}

impl VerificationReport {
    /// Names of the checks that exceed `thresholds`.
    pub fn failures(&self, thresholds: &Thresholds) -> Vec<&'static str> {
        let mut failed = Vec::new();
        let mut check = |name, value: f64, limit: f64| {
            if !(value.is_finite() && value <= limit) {
                failed.push(name);
            }
        };
        check("endpoint_error", self.endpoint_error, thresholds.endpoint_error);
        check("oracle_gate_error", self.oracle_gate_error, thresholds.oracle_gate_error);
        check("norm_drift", self.norm_drift, thresholds.norm_drift);
        check(
            "conservation_residual",
            self.conservation_residual,
            thresholds.conservation_residual,
        );
        check("ep_residual", self.ep_residual, thresholds.ep_residual);
        if let Some(f) = self.finsler_deviation {
            check("finsler_deviation", f, thresholds.finsler_deviation);
        }
        if let Some(samples) = &self.first_variation_samples {
            let worst = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            check("first_variation", worst, thresholds.first_variation);
        }
        failed
    }

    pub fn passes(&self, thresholds: &Thresholds) -> bool {
        self.failures(thresholds).is_empty()
    }
}

/// Runs every check on `solution` using `grid` samples along the path.
/// Variation fields are seeded from `problem.options.seed`.
pub fn verify_solution(
    problem: &NavigationProblem,
    solution: &ControlSolution,
    grid: usize,
) -> Result<VerificationReport> {
    solution.validate(problem.dim())?;
    let seed = problem.options.seed;
    let duration = solution.duration;
    let Some(h1_0) = &solution.h1_0 else {
        let gap = problem.u_i.distance(&problem.u_f);
        return Ok(VerificationReport {
            endpoint_error: gap,
            finsler_deviation: Some(0.0),
            norm_drift: 0.0,
            conservation_residual: 0.0,
            ep_residual: 0.0,
            first_variation_samples: Some(Vec::new()),
            oracle_gate_error: gap,
            seed,
        });
    };
    let grid = grid.max(2);
    let geodesic = Geodesic::new(&problem.h0, h1_0, &problem.u_i);
    let endpoint_error = geodesic.evolve(duration).distance(&problem.u_f);

    let (conservation_residual, norm_drift) =
        conserved_quantity_residuals_on(&geodesic, duration, grid);
    let step = derivative_step(duration);
    let times: Vec<f64> = (0..grid)
        .map(|k| duration * k as f64 / (grid - 1) as f64)
        .collect();
    let ep_residual = times
        .iter()
        .map(|&t| euler_poincare_residual_on(&geodesic, t, step))
        .fold(0.0, f64::max);

    let (finsler_deviation, first_variation_samples) = if problem.is_strong_wind() {
        (None, None)
    } else {
        let mut deviation: f64 = 0.0;
        for &t in &times {
            let f = finsler_norm(&(&problem.h0 + &geodesic.control_at(t)), &problem.h0)?;
            deviation = deviation.max((f - 1.0).abs());
        }
        let samples = (0..VARIATION_FIELDS as u64)
            .map(|k| {
                let field = VariationField::random_smooth(
                    problem.dim(),
                    duration,
                    DEFAULT_QUADRATURE_NODES,
                    seed.wrapping_add(k),
                );
                let delta = first_variation(&problem.h0, h1_0, duration, &field)?;
                Ok(delta / field.max_norm())
            })
            .collect::<Result<Vec<_>>>()?;
        (Some(deviation), Some(samples))
    };

    let oracle = integrate_schrodinger(&problem.h0, h1_0, &problem.u_i, duration, ORACLE_STEPS)?;
    Ok(VerificationReport {
        endpoint_error,
        finsler_deviation,
        norm_drift,
        conservation_residual,
        ep_residual,
        first_variation_samples,
        oracle_gate_error: oracle.distance(&problem.u_f),
        seed,
    })
}
