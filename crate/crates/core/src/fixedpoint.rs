//! Scalar root solve on the closed-form boundary relation.
//!
//! With V(T) = e^{iH0 T} U_F U_I⁻¹, a geodesic of duration T has
//! H1(0) = log(V(T))/T, and the unit-norm condition becomes
//! g(T) = ‖log V(T)‖_F − T = 0.

use log::debug;

use crate::algebra::{traceless_log, unitary_exp, HermitianOperator};
use crate::continuation::windfree_seed;
use crate::error::{Error, Result};
use crate::problem::{spin_half_control, ControlSolution, Diagnostics, MethodTag, NavigationProblem};

pub const DAMPING: f64 = 0.5;
pub const MAX_ITERATIONS: usize = 200;
pub const ITERATION_TOLERANCE: f64 = 1e-12;
pub const SCAN_POINTS: usize = 64;
/// Bisection endpoints with |g| above this straddle a branch jump, not a root.
const ROOT_ACCEPT: f64 = 1e-9;
const ROOT_MERGE: f64 = 1e-8;

/// Interval on which g changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
}

/// g(T) together with the generator L(T) = log V(T).
#[derive(Debug, Clone)]
pub struct BoundaryEvaluation {
    pub duration: f64,
    pub residual: f64,
    pub generator: HermitianOperator,
}

impl BoundaryEvaluation {
    /// Candidate H1(0) = L(T)/T.
    pub fn control(&self) -> HermitianOperator {
        &self.generator * (1.0 / self.duration)
    }
}

pub fn boundary_residual(problem: &NavigationProblem, duration: f64) -> Result<BoundaryEvaluation> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidArgument(format!("duration must be positive, got {duration}")));
    }
    let v = &(&unitary_exp(&problem.h0, -duration)? * &problem.u_f) * &problem.u_i.adjoint();
    let generator = traceless_log(&v).map_err(|e| match e {
        Error::BranchAmbiguity { phase, .. } => Error::BranchAmbiguity {
            phase,
            time: Some(duration),
        },
        other => other,
    })?;
    Ok(BoundaryEvaluation {
        duration,
        residual: generator.frobenius_norm() - duration,
        generator,
    })
}

fn bisect(problem: &NavigationProblem, bracket: RootBracket) -> Result<BoundaryEvaluation> {
    let RootBracket {
        mut lo,
        mut hi,
        mut g_lo,
        ..
    } = bracket;
    let mut best = boundary_residual(problem, lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let eval = boundary_residual(problem, mid)?;
        if eval.residual.abs() < best.residual.abs() {
            best = eval.clone();
        }
        if eval.residual == 0.0 {
            break;
        }
        if (eval.residual > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = eval.residual;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Root of g(T) nearest to the damped iteration from `start`, if it converges.
fn damped_iteration(problem: &NavigationProblem, start: f64) -> Result<(Option<BoundaryEvaluation>, usize)> {
    let mut t = start;
    for iteration in 0..MAX_ITERATIONS {
        let eval = boundary_residual(problem, t)?;
        if eval.residual.abs() < ITERATION_TOLERANCE {
            return Ok((Some(eval), iteration));
        }
        t += DAMPING * eval.residual;
        if !(t > 0.0) {
            break;
        }
    }
    Ok((None, MAX_ITERATIONS))
}

/// Smallest positive root of the boundary relation. `t_guess` defaults to
/// the wind-free transit time.
pub fn solve_fixedpoint(problem: &NavigationProblem, t_guess: Option<f64>) -> Result<ControlSolution> {
    problem.check_wind()?;
    let t_guess = match t_guess {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(Error::InvalidArgument(format!("T_guess must be positive, got {t}"))),
        None => match windfree_seed(&problem.u_i, &problem.u_f) {
            Ok(seed) => seed.duration,
            Err(Error::IdentityTarget) => return Ok(ControlSolution::trivial(problem)),
            Err(e) => return Err(e),
        },
    };

    let mut roots: Vec<BoundaryEvaluation> = Vec::new();
    let mut ambiguity: Option<Error> = None;

    let mut iterations = 0;
    match damped_iteration(problem, t_guess) {
        Ok((root, n)) => {
            iterations = n;
            roots.extend(root);
        }
        Err(e @ Error::BranchAmbiguity { .. }) => ambiguity = Some(e),
        Err(e) => return Err(e),
    }

    let (lo, hi) = (0.5 * t_guess, 2.0 * t_guess);
    let mut previous: Option<(f64, f64)> = None;
    for k in 0..SCAN_POINTS {
        let t = lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64;
        let g = match boundary_residual(problem, t) {
            Ok(eval) => eval.residual,
            Err(e @ Error::BranchAmbiguity { .. }) => {
                ambiguity.get_or_insert(e);
                previous = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((t_prev, g_prev)) = previous {
            if g == 0.0 || (g > 0.0) != (g_prev > 0.0) {
                let bracket = RootBracket {
                    lo: t_prev,
                    hi: t,
                    g_lo: g_prev,
                    g_hi: g,
                };
                match bisect(problem, bracket) {
                    Ok(eval) if eval.residual.abs() <= ROOT_ACCEPT => roots.push(eval),
                    Ok(eval) => debug!(
                        "bracket [{t_prev}, {t}] closes on a branch jump (|g| = {:.3e})",
                        eval.residual.abs()
                    ),
                    Err(e @ Error::BranchAmbiguity { .. }) => {
                        ambiguity.get_or_insert(e);
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        previous = Some((t, g));
    }

    roots.sort_by(|a, b| a.duration.total_cmp(&b.duration));
    roots.dedup_by(|b, a| (a.duration - b.duration).abs() <= ROOT_MERGE * a.duration.max(1.0));
    let Some(best) = roots.first() else {
        return Err(ambiguity.unwrap_or(Error::NoRoot));
    };

    let h1 = best.generator.normalized();
    let duration = best.duration;
    debug!("fixed point: T = {duration}, {} root(s)", roots.len());
    Ok(ControlSolution {
        diagnostics: Diagnostics {
            endpoint_error: problem.endpoint_error(&h1, duration),
            iterations,
            alternate_roots: roots[1..].iter().map(|r| r.duration).collect(),
            ..Diagnostics::default()
        },
        h1_0: Some(h1),
        duration,
        method: MethodTag::Fixedpoint,
    })
}

/// Analytic solution of the spin-½ problem H0 = −ωσz, U_I = 1, U_F = −iσx.
pub fn spin_half_closed_form(omega: f64) -> ControlSolution {
    let problem = NavigationProblem::spin_half(omega);
    let (h1, duration) = spin_half_control(omega);
    ControlSolution {
        diagnostics: Diagnostics {
            endpoint_error: problem.endpoint_error(&h1, duration),
            ..Diagnostics::default()
        },
        h1_0: Some(h1),
        duration,
        method: MethodTag::ClosedForm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_special_unitary, random_unit_hermitian, SpecialUnitary};
    use crate::geodesic;
    use crate::problem::SolverOptions;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    const OMEGAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

    #[test]
    fn spin_half_residual_vanishes() {
        for omega in OMEGAS {
            let p = NavigationProblem::spin_half(omega);
            let g = boundary_residual(&p, PI / SQRT_2).unwrap().residual;
            assert!(g.abs() < 1e-10, "omega {omega}: g = {g}");
        }
    }

    #[test]
    fn spin_half_roots_match_closed_form() {
        for omega in OMEGAS {
            let p = NavigationProblem::spin_half(omega);
            let sol = solve_fixedpoint(&p, None).unwrap();
            let expected = spin_half_closed_form(omega);
            assert!((sol.duration - PI / SQRT_2).abs() < 1e-9, "omega {omega}");
            let phi = omega * PI / SQRT_2;
            let n = [phi.cos(), phi.sin(), 0.0];
            let h1 = sol.h1_0.unwrap();
            let x = h1.inner(&HermitianOperator::pauli_x()) * FRAC_1_SQRT_2;
            let y = h1.inner(&HermitianOperator::pauli_y()) * FRAC_1_SQRT_2;
            let z = h1.inner(&HermitianOperator::pauli_z()) * FRAC_1_SQRT_2;
            assert!((x - n[0]).abs() < 1e-9 && (y - n[1]).abs() < 1e-9 && (z - n[2]).abs() < 1e-9);
            assert!((&h1 - expected.h1_0.as_ref().unwrap()).frobenius_norm() < 1e-9);
            assert!(sol.diagnostics.endpoint_error < 1e-9);
        }
    }

    #[test]
    fn closed_form_examples() {
        let sol = spin_half_closed_form(0.0);
        let sx = &HermitianOperator::pauli_x() * FRAC_1_SQRT_2;
        assert!((sol.h1_0.as_ref().unwrap() - &sx).frobenius_norm() < 1e-15);
        assert_eq!(sol.duration, PI / SQRT_2);

        for k in 0..=20 {
            let omega = k as f64 / 20.0;
            let sol = spin_half_closed_form(omega);
            assert!(sol.diagnostics.endpoint_error < 1e-10);
            let p = NavigationProblem::spin_half(omega);
            let g = boundary_residual(&p, sol.duration).unwrap().residual;
            assert!(g.abs() < 1e-12, "omega {omega}: g = {g}");
        }
    }

    #[test]
    fn zero_wind_residual_is_linear() {
        let u_f = random_special_unitary(3, 1.2, 4);
        let p = NavigationProblem::new(
            HermitianOperator::zeros(3),
            SpecialUnitary::identity(3),
            u_f,
            SolverOptions::default(),
        )
        .unwrap();
        let g1 = boundary_residual(&p, 0.5).unwrap().residual;
        let g2 = boundary_residual(&p, 0.9).unwrap().residual;
        assert!(((g2 - g1) / 0.4 + 1.0).abs() < 1e-12);
        let sol = solve_fixedpoint(&p, None).unwrap();
        assert!(sol.diagnostics.iterations <= 1);
        assert!((sol.duration - 1.2).abs() < 1e-12);
    }

    #[test]
    fn forward_constructed_roots() {
        for (n, seed) in [(2, 1), (2, 2), (3, 3), (3, 4)] {
            let h0 = &random_unit_hermitian(n, seed) * 0.3;
            let h1 = random_unit_hermitian(n, seed + 10);
            let u_i = random_special_unitary(n, 0.5, seed + 20);
            let t = 0.8;
            let u_f = geodesic::evolve(&h0, &h1, &u_i, t);
            let p = NavigationProblem::new(h0, u_i, u_f, SolverOptions::default()).unwrap();
            let eval = boundary_residual(&p, t).unwrap();
            assert!(eval.residual.abs() < 1e-10);
            assert!((&eval.control() - &h1).frobenius_norm() < 1e-10);

            let sol = solve_fixedpoint(&p, None).unwrap();
            assert!(sol.duration <= t + 1e-9);
            assert!(sol.diagnostics.endpoint_error < 1e-9);
        }
    }

    #[test]
    fn rejects_nonpositive_duration() {
        let p = NavigationProblem::spin_half(0.5);
        assert!(boundary_residual(&p, 0.0).is_err());
        assert!(solve_fixedpoint(&p, Some(-1.0)).is_err());
    }

    #[test]
    fn identity_target_is_trivial() {
        let p = NavigationProblem::new(
            &random_unit_hermitian(2, 1) * 0.3,
            SpecialUnitary::identity(2),
            SpecialUnitary::identity(2),
            SolverOptions::default(),
        )
        .unwrap();
        let sol = solve_fixedpoint(&p, None).unwrap();
        assert_eq!(sol.duration, 0.0);
    }
}
