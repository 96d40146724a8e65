//! Randers norm on su(N), journey time, and variational diagnostics.
//!
//! Hamiltonians are passed in their Hermitian form; the Lie-algebra element
//! is ξ = −iH throughout. For the Randers norm we write
//!
//! ```text
//! a = tr(H0²),  p = tr(H H0),  q = tr(H²),  X = p² + q(1 − a)
//! F = (√X − p) / (1 − a)
//! ```
//!
//! which is the literal quantum Randers expression with the factor i·√(…)
//! taken as the positive root √X.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{random_unit_hermitian, HermitianOperator};
use crate::error::{Error, Result};
use crate::geodesic::{Geodesic, Trajectory};
use crate::quadrature::simpson;
use crate::tolerances::Tolerances;

/// Default node count for Simpson quadrature along a path.
pub const DEFAULT_QUADRATURE_NODES: usize = 401;

/// Central-difference step for Ḣ1 on a path of duration `duration`.
pub fn derivative_step(duration: f64) -> f64 {
    1e-5 * duration.abs().max(1.0)
}

struct RandersTerms {
    wind: f64,
    overlap: f64,
    root: f64,
}

fn randers_terms(h_total: &HermitianOperator, h0: &HermitianOperator) -> Result<RandersTerms> {
    if h_total.dim() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            found: h_total.dim(),
        });
    }
    let wind = h0.inner(h0);
    if wind >= 1.0 - Tolerances::DEFAULT.wind_margin {
        return Err(Error::WindTooStrong { wind });
    }
    let overlap = h_total.inner(h0);
    let speed_sq = h_total.inner(h_total);
    let radicand = overlap * overlap + speed_sq * (1.0 - wind);
    if radicand < -1e-14 {
        return Err(Error::InconsistentBranch { radicand });
    }
    Ok(RandersTerms {
        wind,
        overlap,
        root: radicand.max(0.0).sqrt(),
    })
}

/// Randers norm F(ξ) of ξ = −i·H_total under the wind −i·H0.
pub fn finsler_norm(h_total: &HermitianOperator, h0: &HermitianOperator) -> Result<f64> {
    let r = randers_terms(h_total, h0)?;
    Ok((r.root - r.overlap) / (1.0 - r.wind))
}

/// Directional derivative d/dε F(H + εD) at ε = 0.
pub fn finsler_derivative(
    h_total: &HermitianOperator,
    h0: &HermitianOperator,
    direction: &HermitianOperator,
) -> Result<f64> {
    let r = randers_terms(h_total, h0)?;
    let d_overlap = direction.inner(h0);
    let d_half_speed = h_total.inner(direction);
    let one_minus = 1.0 - r.wind;
    if r.root == 0.0 {
        return Err(Error::InconsistentBranch { radicand: 0.0 });
    }
    Ok(((r.overlap * d_overlap + one_minus * d_half_speed) / r.root - d_overlap) / one_minus)
}

/// ∫ F dt along the sampled trajectory by composite Simpson.
pub fn journey_time(traj: &Trajectory, h0: &HermitianOperator) -> Result<f64> {
    let n = traj.samples.len();
    if n < 2 || traj.duration == 0.0 {
        return Ok(0.0);
    }
    let values = traj
        .total_hamiltonians()
        .iter()
        .map(|h| finsler_norm(h, h0))
        .collect::<Result<Vec<_>>>()?;
    Ok(simpson(&values, traj.duration / (n - 1) as f64))
}

fn fd_control_derivative(geodesic: &Geodesic, t: f64, step: f64) -> HermitianOperator {
    let forward = geodesic.control_at(t + step);
    let backward = geodesic.control_at(t - step);
    &(&forward - &backward) * (0.5 / step)
}

/// ‖Ḣ1 + i[H0, H1]‖_F at time t with Ḣ1 from a central difference of the
/// advected control.
pub fn euler_poincare_residual(h0: &HermitianOperator, h1_0: &HermitianOperator, t: f64) -> f64 {
    let geodesic = Geodesic::new(h0, h1_0, &crate::algebra::SpecialUnitary::identity(h0.dim()));
    euler_poincare_residual_on(&geodesic, t, derivative_step(t))
}

pub(crate) fn euler_poincare_residual_on(geodesic: &Geodesic, t: f64, step: f64) -> f64 {
    let h1 = geodesic.control_at(t);
    let h1_dot = fd_control_derivative(geodesic, t, step);
    (&h1_dot + &geodesic.h0().i_commutator(&h1)).frobenius_norm()
}

/// (max |tr(H0 Ḣ1)|, max |tr(H1²) − 1|) over `samples` uniform points of [0, T].
pub fn conserved_quantity_residuals(
    h0: &HermitianOperator,
    h1_0: &HermitianOperator,
    duration: f64,
    samples: usize,
) -> (f64, f64) {
    let geodesic = Geodesic::new(h0, h1_0, &crate::algebra::SpecialUnitary::identity(h0.dim()));
    conserved_quantity_residuals_on(&geodesic, duration, samples)
}

pub(crate) fn conserved_quantity_residuals_on(
    geodesic: &Geodesic,
    duration: f64,
    samples: usize,
) -> (f64, f64) {
    let step = derivative_step(duration);
    let count = samples.max(2);
    let mut energy_flux: f64 = 0.0;
    let mut norm_drift: f64 = 0.0;
    for k in 0..count {
        let t = duration * k as f64 / (count - 1) as f64;
        let h1_dot = fd_control_derivative(geodesic, t, step);
        energy_flux = energy_flux.max(geodesic.h0().inner(&h1_dot).abs());
        let h1 = geodesic.control_at(t);
        norm_drift = norm_drift.max((h1.inner(&h1) - 1.0).abs());
    }
    (energy_flux, norm_drift)
}

/// One node of a variation field: η(t) and η̇(t), both traceless Hermitian.
/// The su(N) variation is −iη.
#[derive(Debug, Clone)]
pub struct VariationSample {
    pub t: f64,
    pub eta: HermitianOperator,
    pub eta_dot: HermitianOperator,
}

/// Variation η(t) sampled on a uniform grid over [0, T].
#[derive(Debug, Clone)]
pub struct VariationField {
    pub duration: f64,
    pub samples: Vec<VariationSample>,
    pub fixed_endpoints: bool,
}

impl VariationField {
    /// Samples `f(t) = (η(t), η̇(t))` on `nodes` uniform points.
    pub fn from_fn<F>(duration: f64, nodes: usize, fixed_endpoints: bool, f: F) -> Self
    where
        F: Fn(f64) -> (HermitianOperator, HermitianOperator),
    {
        assert!(nodes >= 2);
        let samples = (0..nodes)
            .map(|k| {
                let t = duration * k as f64 / (nodes - 1) as f64;
                let (eta, eta_dot) = f(t);
                VariationSample { t, eta, eta_dot }
            })
            .collect();
        Self {
            duration,
            samples,
            fixed_endpoints,
        }
    }

    pub fn zero(dim: usize, duration: f64, nodes: usize) -> Self {
        Self::from_fn(duration, nodes, true, |_| {
            (HermitianOperator::zeros(dim), HermitianOperator::zeros(dim))
        })
    }

    /// η(t) = Σ_{m=1}^{3} sin(mπt/T)·c_m·A_m with random traceless A_m and
    /// weights c_m, scaled so that max‖η‖_F over the grid is 1.
    pub fn random_smooth(dim: usize, duration: f64, nodes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<(f64, HermitianOperator)> = (1..=3)
            .map(|m| {
                let weight: f64 = rng.random_range(-1.0..1.0);
                let a = random_unit_hermitian(dim, rng.random());
                (m as f64, &a * weight)
            })
            .collect();
        let raw = Self::from_fn(duration, nodes, true, |t| {
            let mut eta = HermitianOperator::zeros(dim);
            let mut eta_dot = HermitianOperator::zeros(dim);
            for (m, a) in &modes {
                let k = m * std::f64::consts::PI / duration;
                eta = &eta + &(a * (k * t).sin());
                eta_dot = &eta_dot + &(a * (k * (k * t).cos()));
            }
            (eta, eta_dot)
        });
        let scale = raw.max_norm();
        if scale == 0.0 {
            return raw;
        }
        raw.scaled(1.0 / scale)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            duration: self.duration,
            fixed_endpoints: self.fixed_endpoints,
            samples: self
                .samples
                .iter()
                .map(|s| VariationSample {
                    t: s.t,
                    eta: &s.eta * factor,
                    eta_dot: &s.eta_dot * factor,
                })
                .collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.eta.frobenius_norm())
            .fold(0.0, f64::max)
    }

    fn endpoint_norm(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => a.eta.frobenius_norm().max(b.eta.frobenius_norm()),
            _ => 0.0,
        }
    }
}

const ENDPOINT_TOL: f64 = 1e-14;

/// δ(½∫F² dt) for the geodesic with initial control `h1_0` under the
/// endpoint-fixed variation δξ = η̇ − [ξ, η].
pub fn first_variation(
    h0: &HermitianOperator,
    h1_0: &HermitianOperator,
    duration: f64,
    variation: &VariationField,
) -> Result<f64> {
    if (variation.duration - duration).abs() > 1e-12 * duration.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "variation spans {} but the path lasts {duration}",
            variation.duration
        )));
    }
    let geodesic = Geodesic::new(h0, h1_0, &crate::algebra::SpecialUnitary::identity(h0.dim()));
    first_variation_along(h0, |t| geodesic.control_at(t), variation)
}

/// First variation along an arbitrary control path t ↦ H1(t).
pub fn first_variation_along<C>(
    h0: &HermitianOperator,
    control: C,
    variation: &VariationField,
) -> Result<f64>
where
    C: Fn(f64) -> HermitianOperator,
{
    let endpoint = variation.endpoint_norm();
    if !variation.fixed_endpoints || endpoint > ENDPOINT_TOL {
        return Err(Error::EndpointViolation { norm: endpoint });
    }
    let n = variation.samples.len();
    if n < 2 || variation.duration == 0.0 {
        return Ok(0.0);
    }
    let integrand = variation
        .samples
        .iter()
        .map(|s| {
            let h = h0 + &control(s.t);
            // δH = η̇ + i[H, η]  ⇔  δξ = η̇ − [ξ, η] with ξ = −iH.
            let dh = &s.eta_dot + &h.i_commutator(&s.eta);
            Ok(finsler_norm(&h, h0)? * finsler_derivative(&h, h0, &dh)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(simpson(&integrand, variation.duration / (n - 1) as f64))
}
