//! Closed-form optimal evolution: the control advected by the background
//! field, the exact two-exponential propagator, trajectory sampling, and the
//! SU(2) → SO(3) covering map used for plotting.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::algebra::{ComplexMatrix, Eigh, HermitianOperator, SpecialUnitary};
use crate::error::{Error, Result};

/// Cached spectral data for a fixed (H0, H1(0), U_I) triple.
#[derive(Debug, Clone)]
pub struct Geodesic {
    h0: HermitianOperator,
    h1_0: HermitianOperator,
    u_i: SpecialUnitary,
    h0_eigh: Eigh,
    h1_eigh: Eigh,
}

impl Geodesic {
    pub fn new(h0: &HermitianOperator, h1_0: &HermitianOperator, u_i: &SpecialUnitary) -> Self {
        Self {
            h0: h0.clone(),
            h1_0: h1_0.clone(),
            u_i: u_i.clone(),
            h0_eigh: h0.eigh_unchecked(),
            h1_eigh: h1_0.eigh_unchecked(),
        }
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn h1_0(&self) -> &HermitianOperator {
        &self.h1_0
    }

    /// H1(t) = e^{−iH0 t} H1(0) e^{iH0 t}.
    pub fn control_at(&self, t: f64) -> HermitianOperator {
        if t == 0.0 || self.h0.is_zero() {
            return self.h1_0.clone();
        }
        self.h1_0.conjugate_by(&self.h0_eigh.propagator(t))
    }

    /// U(t) = e^{−iH0 t} e^{−iH1(0) t} U_I.
    pub fn evolve(&self, t: f64) -> SpecialUnitary {
        let wind = self.h0_eigh.propagator(t);
        let drive = self.h1_eigh.propagator(t);
        SpecialUnitary::from_matrix_unchecked(wind * drive * self.u_i.matrix())
    }
}

pub fn control_at(h0: &HermitianOperator, h1_0: &HermitianOperator, t: f64) -> HermitianOperator {
    if t == 0.0 || h0.is_zero() {
        return h1_0.clone();
    }
    h1_0.conjugate_by(&h0.eigh_unchecked().propagator(t))
}

pub fn evolve(
    h0: &HermitianOperator,
    h1_0: &HermitianOperator,
    u_i: &SpecialUnitary,
    t: f64,
) -> SpecialUnitary {
    Geodesic::new(h0, h1_0, u_i).evolve(t)
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub unitary: SpecialUnitary,
    pub control: HermitianOperator,
}

/// Samples of a controlled evolution on [0, T].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub duration: f64,
    pub samples: Vec<TrajectorySample>,
    pub h0: HermitianOperator,
    pub h1_0: HermitianOperator,
    pub u_i: SpecialUnitary,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Total Hamiltonian H0 + H1(t) at every sample.
    pub fn total_hamiltonians(&self) -> Vec<HermitianOperator> {
        self.samples.iter().map(|s| &self.h0 + &s.control).collect()
    }
}

/// Uniform grid of `count` samples on [0, T], endpoints included.
pub fn sample_trajectory(
    h0: &HermitianOperator,
    h1_0: &HermitianOperator,
    u_i: &SpecialUnitary,
    duration: f64,
    count: usize,
) -> Result<Trajectory> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!(
            "trajectory needs at least 2 samples, got {count}"
        )));
    }
    let geodesic = Geodesic::new(h0, h1_0, u_i);
    let samples = (0..count)
        .map(|k| {
            let t = if k == count - 1 {
                duration
            } else {
                duration * k as f64 / (count - 1) as f64
            };
            TrajectorySample {
                t,
                unitary: if k == 0 { u_i.clone() } else { geodesic.evolve(t) },
                control: geodesic.control_at(t),
            }
        })
        .collect();
    Ok(Trajectory {
        duration,
        samples,
        h0: h0.clone(),
        h1_0: h1_0.clone(),
        u_i: u_i.clone(),
    })
}

/// |cos(θ/2)| below which a rotation counts as a half turn.
const HALF_TURN_TOL: f64 = 1e-9;

/// Rotation vector θ·n of U = cos(θ/2)·1 − i sin(θ/2)·n·σ, with θ ∈ [0, π].
/// For half turns the axis sign is chosen so its first nonzero component is positive.
pub fn covering_map_su2(u: &SpecialUnitary) -> Result<[f64; 3]> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.dim(),
        });
    }
    let m = u.matrix();
    let i = Complex64::new(0.0, 1.0);
    // tr(σ_k U) = −2i sin(θ/2) n_k.
    let tr = m[(0, 0)] + m[(1, 1)];
    let tr_x = m[(1, 0)] + m[(0, 1)];
    let tr_y = i * m[(0, 1)] - i * m[(1, 0)];
    let tr_z = m[(0, 0)] - m[(1, 1)];
    let mut c = 0.5 * tr.re;
    let mut v = [-0.5 * tr_x.im, -0.5 * tr_y.im, -0.5 * tr_z.im];
    if c < 0.0 {
        // U and −U cover the same rotation.
        c = -c;
        v = v.map(|x| -x);
    }
    let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if s == 0.0 {
        return Ok([0.0; 3]);
    }
    let theta = 2.0 * s.atan2(c);
    let mut axis = v.map(|x| x / s);
    if c <= HALF_TURN_TOL {
        if let Some(first) = axis.iter().find(|x| x.abs() > HALF_TURN_TOL) {
            if *first < 0.0 {
                axis = axis.map(|x| -x);
            }
        }
    }
    debug_assert!(theta <= PI + 1e-12);
    Ok(axis.map(|x| theta * x))
}

/// Covering-map image of every sample; requires N = 2.
pub fn covering_curve(traj: &Trajectory) -> Result<Vec<(f64, [f64; 3])>> {
    traj.samples
        .iter()
        .map(|s| Ok((s.t, covering_map_su2(&s.unitary)?)))
        .collect()
}

/// `t,x,y,z` rows of the covering-map curve.
pub fn write_covering_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let curve = covering_curve(traj)?;
    writeln!(out, "t,x,y,z")?;
    for (t, [x, y, z]) in curve {
        writeln!(out, "{t},{x},{y},{z}")?;
    }
    Ok(())
}

/// `t,re_00,im_00,re_01,...` rows with U(t) in row-major order.
pub fn write_unitary_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let n = traj.dim();
    let mut header = String::from("t");
    for j in 0..n {
        for k in 0..n {
            header.push_str(&format!(",re_{j}{k},im_{j}{k}"));
        }
    }
    writeln!(out, "{header}")?;
    for s in &traj.samples {
        let m: &ComplexMatrix = s.unitary.matrix();
        let mut row = format!("{}", s.t);
        for j in 0..n {
            for k in 0..n {
                row.push_str(&format!(",{},{}", m[(j, k)].re, m[(j, k)].im));
            }
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_special_unitary, random_unit_hermitian, unitary_exp};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn sx() -> HermitianOperator {
        HermitianOperator::pauli_x()
    }
    fn sy() -> HermitianOperator {
        HermitianOperator::pauli_y()
    }
    fn sz() -> HermitianOperator {
        HermitianOperator::pauli_z()
    }

    fn minus_i_sigma_x() -> SpecialUnitary {
        SpecialUnitary::from_matrix_unchecked(sx().matrix() * Complex64::new(0.0, -1.0))
    }

    #[test]
    fn control_at_zero_time_is_initial_control() {
        let h0 = &random_unit_hermitian(3, 1) * 0.5;
        let h1 = random_unit_hermitian(3, 2);
        assert_eq!(control_at(&h0, &h1, 0.0), h1);
    }

    #[test]
    fn control_rotates_about_z() {
        // Pauli algebra: e^{iωσz t} σx e^{−iωσz t} = cos(2ωt)σx − sin(2ωt)σy.
        let omega = 0.37;
        let h0 = &sz() * -omega;
        let h1 = &sx() * FRAC_1_SQRT_2;
        for t in [0.1, 0.9, 2.5] {
            let a = 2.0 * omega * t;
            let expected = &(&(&sx() * a.cos()) - &(&sy() * a.sin())) * FRAC_1_SQRT_2;
            assert!((&control_at(&h0, &h1, t) - &expected).frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn commuting_control_is_stationary() {
        let h0 = HermitianOperator::diagonal(&[0.3, -0.1, -0.2]);
        let h1 = &HermitianOperator::diagonal(&[1.0, -2.0, 1.0]) * (1.0 / 6f64.sqrt());
        for t in [0.5, 3.0, 10.0] {
            assert!((&control_at(&h0, &h1, t) - &h1).frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn evolve_at_zero_is_initial_gate() {
        let u_i = random_special_unitary(3, 0.9, 4);
        let g = evolve(&random_unit_hermitian(3, 1), &random_unit_hermitian(3, 2), &u_i, 0.0);
        assert!(g.distance(&u_i) < 1e-14);
    }

    #[test]
    fn evolve_reaches_spin_half_target_for_every_wind() {
        let t_final = PI / SQRT_2;
        for omega in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let h0 = &sz() * -omega;
            let phi = omega * t_final;
            let h1 = &(&(&sx() * phi.cos()) + &(&sy() * phi.sin())) * FRAC_1_SQRT_2;
            let u = evolve(&h0, &h1, &SpecialUnitary::identity(2), t_final);
            assert!(u.distance(&minus_i_sigma_x()) < 1e-10, "omega={omega}");
        }
    }

    #[test]
    fn evolve_without_wind_is_single_exponential() {
        let h1 = random_unit_hermitian(3, 8);
        let u_i = random_special_unitary(3, 0.5, 9);
        let u = evolve(&HermitianOperator::zeros(3), &h1, &u_i, 1.3);
        let expected = &unitary_exp(&h1, 1.3).unwrap() * &u_i;
        assert!(u.distance(&expected) < 1e-14);
    }

    #[test]
    fn two_sample_trajectory_is_endpoints() {
        let h0 = &random_unit_hermitian(2, 3) * 0.4;
        let h1 = random_unit_hermitian(2, 4);
        let u_i = SpecialUnitary::identity(2);
        let traj = sample_trajectory(&h0, &h1, &u_i, 1.7, 2).unwrap();
        assert_eq!(traj.samples.len(), 2);
        assert_eq!(traj.samples[0].unitary, u_i);
        assert_eq!(traj.samples[1].t, 1.7);
        assert!(traj.samples[1].unitary.distance(&evolve(&h0, &h1, &u_i, 1.7)) < 1e-15);
        assert!(sample_trajectory(&h0, &h1, &u_i, 1.7, 1).is_err());
    }

    #[test]
    fn windless_spin_half_curve_is_radial() {
        let h1 = &sx() * FRAC_1_SQRT_2;
        let traj = sample_trajectory(
            &HermitianOperator::zeros(2),
            &h1,
            &SpecialUnitary::identity(2),
            PI / SQRT_2,
            51,
        )
        .unwrap();
        let curve = covering_curve(&traj).unwrap();
        for (_, p) in &curve {
            assert!(p[1].abs() < 1e-12 && p[2].abs() < 1e-12 && p[0] >= -1e-15);
        }
        let (_, end) = curve.last().unwrap();
        assert!((end[0] - PI).abs() < 1e-8);
    }

    #[test]
    fn trajectory_samples_stay_unitary() {
        let h0 = &random_unit_hermitian(4, 13) * 0.6;
        let h1 = random_unit_hermitian(4, 14);
        let u_i = random_special_unitary(4, 1.0, 15);
        let traj = sample_trajectory(&h0, &h1, &u_i, 2.0, 33).unwrap();
        for s in &traj.samples {
            let m = s.unitary.matrix();
            assert!((m.adjoint() * m - ComplexMatrix::identity(4, 4)).norm() < 1e-10);
        }
    }

    #[test]
    fn covering_map_known_points() {
        assert_eq!(covering_map_su2(&SpecialUnitary::identity(2)).unwrap(), [0.0; 3]);
        let p = covering_map_su2(&minus_i_sigma_x()).unwrap();
        assert!((p[0] - PI).abs() < 1e-15 && p[1] == 0.0 && p[2] == 0.0);
        let quarter = unitary_exp(&sz(), PI / 4.0).unwrap();
        let p = covering_map_su2(&quarter).unwrap();
        assert!(p[0].abs() < 1e-15 && p[1].abs() < 1e-15 && (p[2] - PI / 2.0).abs() < 1e-14);
        assert!(matches!(
            covering_map_su2(&SpecialUnitary::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn covering_map_half_turn_sign_convention() {
        // +iσx and −iσx are the same rotation; both map to (π, 0, 0).
        let plus = SpecialUnitary::from_matrix_unchecked(sx().matrix() * Complex64::new(0.0, 1.0));
        let p = covering_map_su2(&plus).unwrap();
        assert!((p[0] - PI).abs() < 1e-15);
    }

    #[test]
    fn csv_headers() {
        let h1 = &sx() * FRAC_1_SQRT_2;
        let traj =
            sample_trajectory(&HermitianOperator::zeros(2), &h1, &SpecialUnitary::identity(2), 1.0, 3)
                .unwrap();
        let mut buf = Vec::new();
        write_covering_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,y,z\n0,0,0,0\n"));
        assert_eq!(text.lines().count(), 4);

        let mut buf = Vec::new();
        write_unitary_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,re_00,im_00,re_01,im_01,re_10,im_10,re_11,im_11\n0,1,0,0,0,0,0,1,0\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn closed_form_satisfies_flow_property(
            n in 2usize..5, seed in any::<u64>(), s in 0.0..2.0f64, t in 0.0..2.0f64
        ) {
            let h0 = &random_unit_hermitian(n, seed) * 0.6;
            let h1 = random_unit_hermitian(n, seed.wrapping_add(1));
            let u_i = random_special_unitary(n, 1.0, seed.wrapping_add(2));
            let direct = evolve(&h0, &h1, &u_i, s + t);
            let midway = evolve(&h0, &h1, &u_i, s);
            let restarted = evolve(&h0, &control_at(&h0, &h1, s), &midway, t);
            prop_assert!(direct.distance(&restarted) < 1e-10);
        }

        #[test]
        fn advection_preserves_norm_and_spectrum(n in 2usize..5, seed in any::<u64>(), t in -5.0..5.0f64) {
            let h0 = &random_unit_hermitian(n, seed) * 0.8;
            let h1 = random_unit_hermitian(n, seed.wrapping_add(7));
            let ht = control_at(&h0, &h1, t);
            prop_assert!((ht.frobenius_norm() - h1.frobenius_norm()).abs() < 1e-13);
            for (a, b) in ht.eigenvalues().iter().zip(h1.eigenvalues()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
