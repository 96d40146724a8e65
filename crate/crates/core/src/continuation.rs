//! λ-homotopy solver: start from the wind-free solution, integrate the
//! linear derivative system for (H1(0), T) while the wind is scaled from 0 to
//! H0, then optionally Newton-polish the endpoint.

use log::debug;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::{
    orthonormal_basis, traceless_log, AlgebraBasis, ComplexMatrix, Eigh, HermitianOperator,
    SpecialUnitary,
};
use crate::error::{Error, Result};
use crate::geodesic;
use crate::problem::{ControlSolution, Diagnostics, MethodTag, NavigationProblem};
use crate::quadrature::GaussLegendre;
use crate::tolerances::Tolerances;

pub const MIN_QUAD_NODES: usize = 8;
pub const NEWTON_MAX_ITERATIONS: usize = 25;
pub const NEWTON_TOLERANCE: f64 = 1e-11;
pub const NEWTON_FD_STEP: f64 = 1e-7;

/// Point on the homotopy: wind λH0, initial control H1(0), duration T.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyState {
    pub lambda: f64,
    pub h1_0: HermitianOperator,
    pub duration: f64,
}

/// Square real system in (c_1, …, c_{N²−1}, T′) with H1′(0) = Σ c_k B_k.
/// The last row is the constraint tr(H1 H1′) = 0.
#[derive(Debug, Clone)]
pub struct DerivativeSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub basis: AlgebraBasis,
    /// Ratio of extreme singular values.
    pub condition: f64,
}

/// λ-derivatives at a homotopy state.
#[derive(Debug, Clone)]
pub struct HomotopyDerivative {
    pub d_h1_0: HermitianOperator,
    pub d_duration: f64,
    pub condition: f64,
}

/// L = log(U_F U_I⁻¹), T = ‖L‖_F, H1(0) = L/T.
pub fn windfree_seed(u_i: &SpecialUnitary, u_f: &SpecialUnitary) -> Result<HomotopyState> {
    if u_i.dim() != u_f.dim() {
        return Err(Error::DimensionMismatch {
            expected: u_i.dim(),
            found: u_f.dim(),
        });
    }
    let l = traceless_log(&(u_f * &u_i.adjoint()))?;
    let duration = l.frobenius_norm();
    if duration <= Tolerances::DEFAULT.identity_target {
        return Err(Error::IdentityTarget);
    }
    Ok(HomotopyState {
        lambda: 0.0,
        h1_0: &l * (1.0 / duration),
        duration,
    })
}

/// Quadrature weights for X ↦ ∫ f(t) e^{iH1 t} X e^{−iH1 t} dt in the
/// eigenbasis of H1: W_jk = Σ_n w_n f(t_n) e^{i(d_j − d_k)t_n}.
fn frame_weights(values: &DVector<f64>, nodes: &[f64], weights: &[f64], moment: u32) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |j, k| {
        let gap = values[j] - values[k];
        nodes
            .iter()
            .zip(weights)
            .map(|(&t, &w)| Complex64::from_polar(w * t.powi(moment as i32), gap * t))
            .sum()
    })
}

/// V (W ∘ V†XV) V†.
fn apply_frame(eig: &Eigh, weights: &ComplexMatrix, x: &HermitianOperator) -> HermitianOperator {
    let v = &eig.vectors;
    let inner = v.adjoint() * x.matrix() * v;
    let weighted = inner.component_mul(weights);
    HermitianOperator::symmetrize(v * weighted * v.adjoint())
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Assembly shared across the stages of one solve.
struct Homotopy<'a> {
    h0: &'a HermitianOperator,
    basis: AlgebraBasis,
    rule: GaussLegendre,
}

impl<'a> Homotopy<'a> {
    fn new(h0: &'a HermitianOperator, quad_nodes: usize) -> Result<Self> {
        if quad_nodes < MIN_QUAD_NODES {
            return Err(Error::InvalidArgument(format!(
                "quad_nodes must be at least {MIN_QUAD_NODES}, got {quad_nodes}"
            )));
        }
        Ok(Self {
            h0,
            basis: orthonormal_basis(h0.dim()),
            rule: GaussLegendre::new(quad_nodes),
        })
    }

    fn assemble(
        &self,
        lambda: f64,
        h1: &HermitianOperator,
        duration: f64,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let m = self.basis.len();
        let eig = h1.eigh()?;
        let (nodes, weights) = self.rule.on_interval(0.0, duration);
        let phi0 = frame_weights(&eig.values, &nodes, &weights, 0);
        let phi1 = frame_weights(&eig.values, &nodes, &weights, 1);
        let end = ComplexMatrix::from_fn(h1.dim(), h1.dim(), |j, k| {
            Complex64::from_polar(1.0, (eig.values[j] - eig.values[k]) * duration)
        });

        // ∫ e^{iH1 t}(H0 + t·i[H1, H0])e^{−iH1 t} dt
        let fixed = &apply_frame(&eig, &phi0, self.h0)
            + &apply_frame(&eig, &phi1, &h1.i_commutator(self.h0));
        // e^{iH1 T}(λH0 + H1)e^{−iH1 T}
        let endpoint = apply_frame(&eig, &end, &(&(self.h0 * lambda) + h1));
        let columns: Vec<HermitianOperator> = self
            .basis
            .elements()
            .iter()
            .map(|b| apply_frame(&eig, &phi0, b))
            .collect();

        let mut matrix = DMatrix::zeros(m + 1, m + 1);
        let mut rhs = DVector::zeros(m + 1);
        for (row, b) in self.basis.elements().iter().enumerate() {
            for (col, c) in columns.iter().enumerate() {
                matrix[(row, col)] = b.inner(c);
            }
            matrix[(row, m)] = b.inner(&endpoint);
            rhs[row] = -b.inner(&fixed);
        }
        for (col, b) in self.basis.elements().iter().enumerate() {
            matrix[(m, col)] = h1.inner(b);
        }
        Ok((matrix, rhs))
    }

    fn derivative(
        &self,
        lambda: f64,
        h1: &HermitianOperator,
        duration: f64,
    ) -> Result<HomotopyDerivative> {
        let (matrix, rhs) = self.assemble(lambda, h1, duration)?;
        let condition = condition_number(&matrix);
        if !(condition <= Tolerances::DEFAULT.max_condition) {
            return Err(Error::SingularSystem { lambda, condition });
        }
        let x = matrix
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularSystem { lambda, condition })?;
        let m = self.basis.len();
        Ok(HomotopyDerivative {
            d_h1_0: self.basis.combine(&x.as_slice()[..m]),
            d_duration: x[m],
            condition,
        })
    }
}

/// Builds the derivative system at `state` for the wind `state.lambda · h0`.
pub fn assemble_derivative_system(
    state: &HomotopyState,
    h0: &HermitianOperator,
    quad_nodes: usize,
) -> Result<DerivativeSystem> {
    let homotopy = Homotopy::new(h0, quad_nodes)?;
    let (matrix, rhs) = homotopy.assemble(state.lambda, &state.h1_0, state.duration)?;
    let condition = condition_number(&matrix);
    Ok(DerivativeSystem {
        matrix,
        rhs,
        basis: homotopy.basis,
        condition,
    })
}

/// Solves the derivative system for (H1′(0), T′).
pub fn homotopy_rhs(
    state: &HomotopyState,
    h0: &HermitianOperator,
    quad_nodes: usize,
) -> Result<HomotopyDerivative> {
    Homotopy::new(h0, quad_nodes)?.derivative(state.lambda, &state.h1_0, state.duration)
}

/// Integrated homotopy path plus per-step diagnostics.
#[derive(Debug, Clone)]
pub struct ContinuationPath {
    /// States at λ = k/steps for k = 0..=steps.
    pub states: Vec<HomotopyState>,
    pub condition_max: f64,
    /// Largest |‖H1(0)‖_F − 1| before renormalization.
    pub norm_drift_max: f64,
}

impl ContinuationPath {
    pub fn last(&self) -> &HomotopyState {
        self.states.last().expect("path holds the seed")
    }
}

/// Classic RK4 in λ from the wind-free seed to λ = 1.
pub fn continuation_path(
    problem: &NavigationProblem,
    steps: usize,
    quad_nodes: usize,
) -> Result<ContinuationPath> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let seed = windfree_seed(&problem.u_i, &problem.u_f)?;
    let homotopy = Homotopy::new(&problem.h0, quad_nodes)?;
    let h = 1.0 / steps as f64;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(seed);
    let mut condition_max: f64 = 0.0;
    let mut norm_drift_max: f64 = 0.0;

    for k in 0..steps {
        let state = states.last().unwrap();
        let lambda = k as f64 * h;
        let (h1, t) = (&state.h1_0, state.duration);

        let k1 = homotopy.derivative(lambda, h1, t)?;
        let k2 = homotopy.derivative(
            lambda + 0.5 * h,
            &(h1 + &(&k1.d_h1_0 * (0.5 * h))),
            t + 0.5 * h * k1.d_duration,
        )?;
        let k3 = homotopy.derivative(
            lambda + 0.5 * h,
            &(h1 + &(&k2.d_h1_0 * (0.5 * h))),
            t + 0.5 * h * k2.d_duration,
        )?;
        let k4 = homotopy.derivative(
            lambda + h,
            &(h1 + &(&k3.d_h1_0 * h)),
            t + h * k3.d_duration,
        )?;
        for d in [&k1, &k2, &k3, &k4] {
            condition_max = condition_max.max(d.condition);
        }

        let slope = &(&(&k1.d_h1_0 + &(&k2.d_h1_0 * 2.0)) + &(&k3.d_h1_0 * 2.0)) + &k4.d_h1_0;
        let next = h1 + &(&slope * (h / 6.0));
        let d_t = k1.d_duration + 2.0 * k2.d_duration + 2.0 * k3.d_duration + k4.d_duration;
        norm_drift_max = norm_drift_max.max((next.frobenius_norm() - 1.0).abs());

        states.push(HomotopyState {
            lambda: if k + 1 == steps { 1.0 } else { lambda + h },
            h1_0: next.traceless_part().normalized(),
            duration: t + h / 6.0 * d_t,
        });
    }
    debug!(
        "continuation: {steps} steps, max condition {condition_max:.3e}, max drift {norm_drift_max:.3e}"
    );
    Ok(ContinuationPath {
        states,
        condition_max,
        norm_drift_max,
    })
}

/// Runs the homotopy to λ = 1 and optionally polishes the result.
pub fn solve_continuation(
    problem: &NavigationProblem,
    steps: usize,
    quad_nodes: usize,
    polish: bool,
) -> Result<ControlSolution> {
    problem.check_wind()?;
    let path = match continuation_path(problem, steps, quad_nodes) {
        Err(Error::IdentityTarget) => return Ok(ControlSolution::trivial(problem)),
        other => other?,
    };
    let end = path.last();
    let mut solution = if polish {
        newton_polish(problem, &end.h1_0, end.duration)?
    } else {
        ControlSolution {
            diagnostics: Diagnostics {
                endpoint_error: problem.endpoint_error(&end.h1_0, end.duration),
                ..Diagnostics::default()
            },
            h1_0: Some(end.h1_0.clone()),
            duration: end.duration,
            method: MethodTag::Continuation,
        }
    };
    solution.method = MethodTag::Continuation;
    solution.diagnostics.steps = steps;
    solution.diagnostics.condition_max = Some(path.condition_max);
    solution.diagnostics.norm_drift_max = Some(path.norm_drift_max);
    Ok(solution)
}

/// Basis coordinates of log(U_F⁻¹ e^{−iH0 T} e^{−iH1(0) T} U_I).
fn boundary_defect(
    problem: &NavigationProblem,
    basis: &AlgebraBasis,
    h1: &HermitianOperator,
    duration: f64,
) -> Result<DVector<f64>> {
    let reached = geodesic::evolve(&problem.h0, h1, &problem.u_i, duration);
    let l = traceless_log(&(&problem.u_f.adjoint() * &reached))?;
    Ok(DVector::from_vec(basis.coordinates(&l)))
}

/// Orthonormal directions spanning the tangent space of the unit sphere at
/// `h1`, as columns 1.. of the Householder reflector that sends e_0 to ±h1.
fn tangent_directions(basis: &AlgebraBasis, h1: &HermitianOperator) -> Vec<HermitianOperator> {
    let m = basis.len();
    let c = DVector::from_vec(basis.coordinates(h1));
    let mut v = c.clone();
    // Pick the sign that avoids cancellation.
    if c[0] >= 0.0 {
        v[0] += 1.0;
    } else {
        v[0] -= 1.0;
    }
    let vv = v.norm_squared();
    (1..m)
        .map(|k| {
            let mut col = DVector::zeros(m);
            col[k] = 1.0;
            col -= &v * (2.0 * v[k] / vv);
            basis.combine(col.as_slice())
        })
        .collect()
}

/// Newton iteration on the boundary defect over the unit sphere × T.
pub fn newton_polish(
    problem: &NavigationProblem,
    h1_0: &HermitianOperator,
    duration: f64,
) -> Result<ControlSolution> {
    let basis = orthonormal_basis(problem.dim());
    let mut h1 = h1_0.traceless_part().normalized();
    let mut t = duration;
    let mut r = boundary_defect(problem, &basis, &h1, t)?;
    let mut iterations = 0;

    while r.norm() > NEWTON_TOLERANCE {
        if iterations == NEWTON_MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                iterations,
                residual: r.norm(),
            });
        }
        iterations += 1;

        let directions = tangent_directions(&basis, &h1);
        let m = basis.len();
        let mut jac = DMatrix::zeros(m, m);
        for (k, e) in directions.iter().enumerate() {
            let moved = (&h1 + &(e * NEWTON_FD_STEP)).normalized();
            let rk = boundary_defect(problem, &basis, &moved, t)?;
            jac.set_column(k, &((rk - &r) / NEWTON_FD_STEP));
        }
        let rt = boundary_defect(problem, &basis, &h1, t + NEWTON_FD_STEP)?;
        jac.set_column(m - 1, &((rt - &r) / NEWTON_FD_STEP));

        let step = jac.lu().solve(&(-&r)).ok_or(Error::NoConvergence {
            iterations,
            residual: r.norm(),
        })?;

        // Backtrack until the defect decreases.
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let mut delta = HermitianOperator::zeros(problem.dim());
            for (k, e) in directions.iter().enumerate() {
                delta = &delta + &(e * (scale * step[k]));
            }
            let trial_h1 = (&h1 + &delta).traceless_part().normalized();
            let trial_t = t + scale * step[m - 1];
            if let Ok(trial_r) = boundary_defect(problem, &basis, &trial_h1, trial_t) {
                if trial_r.norm() < r.norm() {
                    accepted = Some((trial_h1, trial_t, trial_r));
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some((next_h1, next_t, next_r)) = accepted else {
            return Err(Error::NoConvergence {
                iterations,
                residual: r.norm(),
            });
        };
        h1 = next_h1;
        t = next_t;
        r = next_r;
        debug!("newton iteration {iterations}: |R| = {:.3e}", r.norm());
    }

    Ok(ControlSolution {
        diagnostics: Diagnostics {
            endpoint_error: problem.endpoint_error(&h1, t),
            iterations,
            polished: true,
            ..Diagnostics::default()
        },
        h1_0: Some(h1),
        duration: t,
        method: MethodTag::Continuation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_special_unitary, random_unit_hermitian, unitary_exp};
    use crate::problem::{spin_half_control, SolverOptions};
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn forward_problem(
        n: usize,
        h0_norm: f64,
        duration: f64,
        seed: u64,
    ) -> (NavigationProblem, HermitianOperator) {
        let h0 = &random_unit_hermitian(n, seed) * h0_norm;
        let h1 = random_unit_hermitian(n, seed + 1000);
        let u_i = random_special_unitary(n, 0.8, seed + 2000);
        let u_f = geodesic::evolve(&h0, &h1, &u_i, duration);
        let problem = NavigationProblem::new(h0, u_i, u_f, SolverOptions::default()).unwrap();
        (problem, h1)
    }

    #[test]
    fn seed_examples() {
        let p = NavigationProblem::spin_half(0.0);
        let s = windfree_seed(&p.u_i, &p.u_f).unwrap();
        assert!((s.duration - PI / SQRT_2).abs() < 1e-12);
        let expected = &HermitianOperator::pauli_x() * FRAC_1_SQRT_2;
        assert!((&s.h1_0 - &expected).frobenius_norm() < 1e-12);

        assert_eq!(windfree_seed(&p.u_i, &p.u_i), Err(Error::IdentityTarget));

        let a = &random_unit_hermitian(3, 9) * 0.7;
        let u_i = random_special_unitary(3, 1.0, 10);
        let u_f = &unitary_exp(&a, 1.0).unwrap() * &u_i;
        let s = windfree_seed(&u_i, &u_f).unwrap();
        assert!((s.duration - 0.7).abs() < 1e-12);
        assert!((&s.h1_0 - &(&a * (1.0 / 0.7))).frobenius_norm() < 1e-12);
    }

    #[test]
    fn zero_wind_has_zero_derivative() {
        let h0 = HermitianOperator::zeros(3);
        let state = HomotopyState {
            lambda: 0.3,
            h1_0: random_unit_hermitian(3, 4),
            duration: 1.1,
        };
        let d = homotopy_rhs(&state, &h0, 32).unwrap();
        assert!(d.d_h1_0.frobenius_norm() < 1e-14);
        assert!(d.d_duration.abs() < 1e-14);
    }

    #[test]
    fn spin_half_derivative_matches_closed_form_family() {
        for omega in [0.25, 0.5, 1.0] {
            let p = NavigationProblem::spin_half(omega);
            let t = PI / SQRT_2;
            for lambda in [0.0, 0.4, 1.0] {
                let (h1, _) = spin_half_control(lambda * omega);
                let state = HomotopyState {
                    lambda,
                    h1_0: h1,
                    duration: t,
                };
                let d = homotopy_rhs(&state, &p.h0, 32).unwrap();
                let phi = lambda * omega * t;
                let expected = &(&(&HermitianOperator::pauli_x() * -phi.sin())
                    + &(&HermitianOperator::pauli_y() * phi.cos()))
                    * (omega * t * FRAC_1_SQRT_2);
                assert!(d.d_duration.abs() < 1e-10, "dT = {}", d.d_duration);
                assert!(
                    (&d.d_h1_0 - &expected).frobenius_norm() < 1e-10,
                    "omega {omega} lambda {lambda}"
                );
            }
        }
    }

    /// Dense Newton in (coordinates of H1, T) with the norm as an extra
    /// equation; independent of the tangent-space parameterization above.
    fn oracle_solve(
        h0: &HermitianOperator,
        u_i: &SpecialUnitary,
        u_f: &SpecialUnitary,
        guess: &HermitianOperator,
        t0: f64,
    ) -> (HermitianOperator, f64) {
        let basis = orthonormal_basis(h0.dim());
        let m = basis.len();
        let residual = |x: &DVector<f64>| -> DVector<f64> {
            let h1 = basis.combine(&x.as_slice()[..m]);
            let u = geodesic::evolve(h0, &h1, u_i, x[m]);
            let l = traceless_log(&(&u_f.adjoint() * &u)).unwrap();
            let mut r = DVector::from_vec(basis.coordinates(&l)).push(0.0);
            r[m] = h1.inner(&h1) - 1.0;
            r
        };
        let mut x = DVector::from_vec(basis.coordinates(guess)).push(t0);
        for _ in 0..50 {
            let r = residual(&x);
            if r.norm() < 1e-14 {
                break;
            }
            let mut jac = DMatrix::zeros(m + 1, m + 1);
            for k in 0..=m {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                jac.set_column(k, &((residual(&xp) - residual(&xm)) / (2.0 * h)));
            }
            x -= jac.lu().solve(&r).unwrap();
        }
        (basis.combine(&x.as_slice()[..m]), x[m])
    }

    #[test]
    fn derivative_matches_finite_difference_oracle() {
        for seed in [3, 17] {
            let (p, h1) = forward_problem(2, 0.5, 1.2, seed);
            let lambda = 0.6;
            let dl = 1e-4;
            let scaled = |l: f64| &p.h0 * l;
            // Reach λ = 0.6 from the exact λ = 1 solution.
            let (h1_mid, t_mid) = oracle_solve(&scaled(lambda), &p.u_i, &p.u_f, &h1, 1.2);
            let (h1_p, t_p) = oracle_solve(&scaled(lambda + dl), &p.u_i, &p.u_f, &h1_mid, t_mid);
            let (h1_m, t_m) = oracle_solve(&scaled(lambda - dl), &p.u_i, &p.u_f, &h1_mid, t_mid);
            let fd_h1 = &(&h1_p - &h1_m) * (0.5 / dl);
            let fd_t = (t_p - t_m) / (2.0 * dl);

            let state = HomotopyState {
                lambda,
                h1_0: h1_mid,
                duration: t_mid,
            };
            let d = homotopy_rhs(&state, &p.h0, 32).unwrap();
            assert!((d.d_duration - fd_t).abs() < 1e-6, "{} vs {}", d.d_duration, fd_t);
            assert!((&d.d_h1_0 - &fd_h1).frobenius_norm() < 1e-6);
        }
    }

    #[test]
    fn constraint_row_is_satisfied() {
        for seed in 0..5 {
            let h0 = &random_unit_hermitian(3, seed) * 0.6;
            let state = HomotopyState {
                lambda: 0.5,
                h1_0: random_unit_hermitian(3, seed + 50),
                duration: 0.9,
            };
            let d = homotopy_rhs(&state, &h0, 32).unwrap();
            assert!(state.h1_0.inner(&d.d_h1_0).abs() < 1e-10);
            let sys = assemble_derivative_system(&state, &h0, 32).unwrap();
            assert_eq!(sys.matrix.nrows(), 9);
            assert_eq!(sys.basis.len(), 8);
            assert!(sys.condition.is_finite());
        }
    }

    #[test]
    fn rejects_small_quadrature() {
        let state = HomotopyState {
            lambda: 0.0,
            h1_0: random_unit_hermitian(2, 1),
            duration: 1.0,
        };
        assert!(matches!(
            homotopy_rhs(&state, &HermitianOperator::zeros(2), 4),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn spin_half_solution() {
        let p = NavigationProblem::spin_half(0.5);
        let sol = solve_continuation(&p, 100, 32, false).unwrap();
        let (h1, t) = spin_half_control(0.5);
        assert!((sol.duration - t).abs() < 1e-6);
        assert!((sol.h1_0.as_ref().unwrap() - &h1).frobenius_norm() < 1e-5);
        assert!(sol.diagnostics.norm_drift_max.unwrap() < 1e-8);
    }

    #[test]
    fn zero_wind_returns_seed() {
        let u_i = random_special_unitary(3, 0.5, 1);
        let u_f = random_special_unitary(3, 1.1, 2);
        let p = NavigationProblem::new(HermitianOperator::zeros(3), u_i.clone(), u_f.clone(), SolverOptions::default())
            .unwrap();
        let seed = windfree_seed(&u_i, &u_f).unwrap();
        let sol = solve_continuation(&p, 10, 16, false).unwrap();
        assert_eq!(sol.duration, seed.duration);
        assert!((&sol.h1_0.unwrap() - &seed.h1_0).frobenius_norm() < 1e-15);
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
        let sol = solve_continuation(&p, 10, 16, false).unwrap();
        assert_eq!(sol.duration, 0.0);
        assert!(sol.h1_0.is_none());
    }

    #[test]
    fn recovers_forward_constructed_qutrit() {
        let (p, h1) = forward_problem(3, 0.4, 1.3, 7);
        let sol = solve_continuation(&p, 200, 32, false).unwrap();
        assert!((sol.duration - 1.3).abs() < 1e-6, "T = {}", sol.duration);
        assert!((sol.h1_0.as_ref().unwrap() - &h1).frobenius_norm() < 1e-6);
    }

    #[test]
    fn rk4_error_shrinks_at_fourth_order() {
        let (p, _) = forward_problem(2, 0.6, 1.4, 21);
        let errors: Vec<f64> = [25, 50, 100]
            .iter()
            .map(|&steps| {
                let path = continuation_path(&p, steps, 32).unwrap();
                let end = path.last();
                p.endpoint_error(&end.h1_0, end.duration)
            })
            .collect();
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(order > 3.5, "order {order}, errors {errors:?}");
        }
    }

    #[test]
    fn intermediate_states_hit_target() {
        let (p, _) = forward_problem(2, 0.5, 1.0, 5);
        let path = continuation_path(&p, 100, 32).unwrap();
        for k in [25, 50, 75, 100] {
            let s = &path.states[k];
            let wind = &p.h0 * s.lambda;
            let err = geodesic::evolve(&wind, &s.h1_0, &p.u_i, s.duration).distance(&p.u_f);
            assert!(err < 1e-4, "lambda {} error {err}", s.lambda);
        }
    }

    #[test]
    fn polish_keeps_exact_solution() {
        let (p, h1) = forward_problem(2, 0.5, 1.0, 11);
        let sol = newton_polish(&p, &h1, 1.0).unwrap();
        assert!(sol.diagnostics.iterations <= 1);
        assert!((&sol.h1_0.unwrap() - &h1).frobenius_norm() < 1e-10);
        assert!((sol.duration - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polish_recovers_small_perturbation() {
        for (n, seed) in [(2, 1), (3, 2), (3, 8)] {
            let (p, h1) = forward_problem(n, 0.4, 1.1, seed);
            let nudge = &random_unit_hermitian(n, seed + 77) * 1e-3;
            let guess = (&h1 + &nudge).normalized();
            let sol = newton_polish(&p, &guess, 1.1 + 1e-3).unwrap();
            assert!(sol.diagnostics.iterations <= 6, "{} iterations", sol.diagnostics.iterations);
            assert!(sol.diagnostics.endpoint_error < 1e-10);
            assert!((sol.duration - 1.1).abs() < 1e-9);
        }
    }

    #[test]
    fn polish_basin_sampling() {
        let mut attempts = 0;
        let mut successes = 0;
        for seed in 0..20 {
            let (p, h1) = forward_problem(2, 0.4, 1.0, 100 + seed);
            // Walk the perturbation out until the endpoint error is near 0.4.
            let dir = random_unit_hermitian(2, 500 + seed);
            let mut scale = 0.05;
            let mut guess = h1.clone();
            while scale < 2.0 {
                guess = (&h1 + &(&dir * scale)).normalized();
                if p.endpoint_error(&guess, 1.0) >= 0.4 {
                    break;
                }
                scale *= 1.2;
            }
            attempts += 1;
            if let Ok(sol) = newton_polish(&p, &guess, 1.0) {
                if sol.diagnostics.endpoint_error < 1e-9 {
                    successes += 1;
                }
            }
        }
        eprintln!("newton basin: {successes}/{attempts} guesses at endpoint error 0.4 converged");
        assert!(successes * 2 >= attempts);
    }
}
