//! Problem statement, solver options, solution record, and the JSON problem
//! file format.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{make_hermitian, HermitianOperator, SpecialUnitary};
use crate::error::{Error, Result};
use crate::json::{self, MatrixRows};
use crate::tolerances::Tolerances;
use crate::{continuation, fixedpoint, geodesic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Continuation,
    Fixedpoint,
    #[default]
    Auto,
}

impl std::str::FromStr for SolveMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuation" => Ok(Self::Continuation),
            "fixedpoint" => Ok(Self::Fixedpoint),
            "auto" => Ok(Self::Auto),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub method: SolveMethod,
    /// Uniform RK4 steps in λ for continuation.
    pub steps: usize,
    /// Gauss–Legendre nodes per derivative-system assembly.
    pub quad_nodes: usize,
    /// Newton-polish the continuation result.
    pub polish: bool,
    pub allow_strong_wind: bool,
    /// Seed for the random variation fields used in verification.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::Auto,
            steps: 100,
            quad_nodes: 32,
            polish: false,
            allow_strong_wind: false,
            seed: 0,
        }
    }
}

/// Background Hamiltonian, endpoints, and solver options.
#[derive(Debug, Clone)]
pub struct NavigationProblem {
    pub h0: HermitianOperator,
    pub u_i: SpecialUnitary,
    pub u_f: SpecialUnitary,
    pub options: SolverOptions,
}

impl NavigationProblem {
    pub fn new(
        h0: HermitianOperator,
        u_i: SpecialUnitary,
        u_f: SpecialUnitary,
        options: SolverOptions,
    ) -> Result<Self> {
        let n = h0.dim();
        for found in [u_i.dim(), u_f.dim()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        if n < 2 {
            return Err(Error::InvalidArgument("dimension must be at least 2".into()));
        }
        if h0.trace().abs() > Tolerances::DEFAULT.trace {
            return Err(Error::NonzeroTrace { trace: h0.trace() });
        }
        let problem = Self {
            h0,
            u_i,
            u_f,
            options,
        };
        problem.check_wind()?;
        problem.warn_strong_wind();
        Ok(problem)
    }

    /// H0 = −ωσz, U_I = 1, U_F = −iσx. Strong-wind values of ω set the override.
    pub fn spin_half(omega: f64) -> Self {
        let h0 = &HermitianOperator::pauli_z() * -omega;
        let u_f = SpecialUnitary::from_matrix_unchecked(
            HermitianOperator::pauli_x().matrix() * Complex64::new(0.0, -1.0),
        );
        let options = SolverOptions {
            allow_strong_wind: h0.inner(&h0) >= 1.0 - Tolerances::DEFAULT.wind_margin,
            ..SolverOptions::default()
        };
        Self {
            h0,
            u_i: SpecialUnitary::identity(2),
            u_f,
            options,
        }
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// tr(H0²).
    pub fn wind_strength(&self) -> f64 {
        self.h0.inner(&self.h0)
    }

    pub fn is_strong_wind(&self) -> bool {
        self.wind_strength() >= 1.0 - Tolerances::DEFAULT.wind_margin
    }

    /// Rejects tr(H0²) ≥ 1 unless the override is set.
    pub fn check_wind(&self) -> Result<()> {
        if self.is_strong_wind() && !self.options.allow_strong_wind {
            return Err(Error::WindTooStrong {
                wind: self.wind_strength(),
            });
        }
        Ok(())
    }

    fn warn_strong_wind(&self) {
        if self.is_strong_wind() {
            warn!(
                "tr(H0^2) = {:.6} >= 1: background dominates the control; Randers norm is undefined",
                self.wind_strength()
            );
        }
    }

    /// ‖U(T) − U_F‖_F for the closed-form evolution with initial control `h1_0`.
    pub fn endpoint_error(&self, h1_0: &HermitianOperator, duration: f64) -> f64 {
        geodesic::evolve(&self.h0, h1_0, &self.u_i, duration).distance(&self.u_f)
    }

    /// Runs the configured method. `auto` tries the root solve first and
    /// falls back to continuation when it finds no usable root.
    pub fn solve(&self) -> Result<ControlSolution> {
        let opts = &self.options;
        match opts.method {
            SolveMethod::Continuation => {
                continuation::solve_continuation(self, opts.steps, opts.quad_nodes, opts.polish)
            }
            SolveMethod::Fixedpoint => fixedpoint::solve_fixedpoint(self, None),
            SolveMethod::Auto => match fixedpoint::solve_fixedpoint(self, None) {
                Err(e @ (Error::NoRoot | Error::BranchAmbiguity { .. })) => {
                    warn!("root solve failed ({e}); falling back to continuation");
                    let mut sol = continuation::solve_continuation(
                        self,
                        opts.steps,
                        opts.quad_nodes,
                        opts.polish,
                    )?;
                    sol.diagnostics.fallback_reason = Some(e.to_string());
                    Ok(sol)
                }
                other => other,
            },
        }
    }
}

/// On-disk problem description; matrices use the `[re, im]` row format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub dim: usize,
    #[serde(rename = "H0")]
    pub h0: MatrixRows,
    #[serde(rename = "U_I", default, skip_serializing_if = "Option::is_none")]
    pub u_i: Option<MatrixRows>,
    #[serde(rename = "U_F")]
    pub u_f: MatrixRows,
    #[serde(default)]
    pub options: SolverOptions,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_problem(problem: &NavigationProblem) -> Self {
        Self {
            dim: problem.dim(),
            h0: json::to_rows(problem.h0.matrix()),
            u_i: Some(json::to_rows(problem.u_i.matrix())),
            u_f: json::to_rows(problem.u_f.matrix()),
            options: problem.options.clone(),
        }
    }

    /// Validates and converts. With `project_traceless`, a trace component in
    /// H0 is removed with a warning instead of being rejected.
    pub fn into_problem(self, project_traceless: bool) -> Result<NavigationProblem> {
        let tol = Tolerances::DEFAULT;
        let expect_dim = |found: usize| -> Result<()> {
            if found != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found,
                });
            }
            Ok(())
        };
        let h0 = json::from_rows(&self.h0)?;
        expect_dim(h0.nrows())?;
        let mut h0 = make_hermitian(&h0, tol.hermiticity)?;
        if h0.trace().abs() > tol.trace {
            if !project_traceless {
                return Err(Error::NonzeroTrace { trace: h0.trace() });
            }
            warn!("removing trace {:.6e} from H0 (global phase only)", h0.trace());
            h0 = h0.traceless_part();
        }
        let u_i = match &self.u_i {
            Some(rows) => {
                let m = json::from_rows(rows)?;
                expect_dim(m.nrows())?;
                SpecialUnitary::new(m, &tol)?
            }
            None => SpecialUnitary::identity(self.dim),
        };
        let u_f = json::from_rows(&self.u_f)?;
        expect_dim(u_f.nrows())?;
        let u_f = SpecialUnitary::new(u_f, &tol)?;
        NavigationProblem::new(h0, u_i, u_f, self.options)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Continuation,
    Fixedpoint,
    ClosedForm,
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Diagnostics {
    pub endpoint_error: f64,
    /// Root-solve or Newton iterations.
    pub iterations: usize,
    /// Continuation steps in λ.
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_max: Option<f64>,
    /// Largest |‖H1(0)‖_F − 1| before renormalization during continuation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_drift_max: Option<f64>,
    pub polished: bool,
    /// Other roots of the boundary relation (alternate geodesics).
    pub alternate_roots: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_reason: Option<String>,
}

/// Optimal initial control H1(0) and transit time T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSolution {
    #[serde(
        rename = "H1_0",
        with = "json::hermitian_opt",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub h1_0: Option<HermitianOperator>,
    #[serde(rename = "T")]
    pub duration: f64,
    pub method: MethodTag,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

impl ControlSolution {
    /// Zero-time solution for U_F = U_I.
    pub fn trivial(problem: &NavigationProblem) -> Self {
        Self {
            h1_0: None,
            duration: 0.0,
            method: MethodTag::Trivial,
            diagnostics: Diagnostics {
                endpoint_error: problem.u_i.distance(&problem.u_f),
                ..Diagnostics::default()
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    /// Checks dimension, trace and unit norm of H1(0).
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !self.duration.is_finite() || self.duration < 0.0 {
            return Err(Error::InvalidArgument(format!("invalid duration {}", self.duration)));
        }
        let Some(h1) = &self.h1_0 else {
            if self.duration != 0.0 {
                return Err(Error::InvalidArgument("H1_0 missing for positive T".into()));
            }
            return Ok(());
        };
        if h1.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: h1.dim(),
            });
        }
        if h1.trace().abs() > 1e-12 {
            return Err(Error::NonzeroTrace { trace: h1.trace() });
        }
        let drift = (h1.inner(h1) - 1.0).abs();
        if drift > Tolerances::DEFAULT.unit_norm {
            return Err(Error::InvalidArgument(format!(
                "H1_0 is not unit norm (|tr(H1^2) - 1| = {drift:.3e})"
            )));
        }
        Ok(())
    }
}

/// T = π/√2 and H1(0) = (cos(ωT)σx + sin(ωT)σy)/√2 for the spin-½ problem.
pub fn spin_half_control(omega: f64) -> (HermitianOperator, f64) {
    let duration = PI / SQRT_2;
    let phi = omega * duration;
    let h1 = &(&(&HermitianOperator::pauli_x() * phi.cos())
        + &(&HermitianOperator::pauli_y() * phi.sin()))
        * FRAC_1_SQRT_2;
    (h1, duration)
}
