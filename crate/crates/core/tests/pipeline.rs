use std::f64::consts::{PI, SQRT_2};

use zermelo::algebra::{random_special_unitary, random_unit_hermitian};
use zermelo::continuation::solve_continuation;
use zermelo::fixedpoint::solve_fixedpoint;
use zermelo::geodesic::evolve;
use zermelo::problem::{MethodTag, ProblemFile};
use zermelo::verify::{verify_solution, Thresholds};
use zermelo::{ControlSolution, NavigationProblem, SolveMethod, SolverOptions};

fn forward_instance(n: usize, wind: f64, duration: f64, seed: u64) -> (NavigationProblem, f64) {
    let h0 = &random_unit_hermitian(n, seed) * wind;
    let h1 = random_unit_hermitian(n, seed + 100);
    let u_i = random_special_unitary(n, 0.7, seed + 200);
    let u_f = evolve(&h0, &h1, &u_i, duration);
    let problem = NavigationProblem::new(h0, u_i, u_f, SolverOptions::default()).unwrap();
    (problem, duration)
}

#[test]
fn both_solvers_recover_forward_instances() {
    for (n, seed) in [(2, 1), (3, 2)] {
        let (problem, t_star) = forward_instance(n, 0.3, 0.9, seed);
        let cont = solve_continuation(&problem, 100, 32, true).unwrap();
        let fixed = solve_fixedpoint(&problem, None).unwrap();
        assert!((cont.duration - t_star).abs() < 1e-8, "N={n}");
        assert!((fixed.duration - t_star).abs() < 1e-8, "N={n}");
        let diff = cont.h1_0.as_ref().unwrap() - fixed.h1_0.as_ref().unwrap();
        assert!(diff.frobenius_norm() < 1e-7);
    }
}

#[test]
fn solved_instances_pass_verification() {
    let (problem, _) = forward_instance(3, 0.4, 1.1, 7);
    let solution = problem.solve().unwrap();
    let report = verify_solution(&problem, &solution, 101).unwrap();
    assert!(report.passes(&Thresholds::default()), "{:?}", report.failures(&Thresholds::default()));
}

#[test]
fn auto_prefers_fixedpoint() {
    let solution = NavigationProblem::spin_half(0.25).solve().unwrap();
    assert_eq!(solution.method, MethodTag::Fixedpoint);
    assert!((solution.duration - PI / SQRT_2).abs() < 1e-9);
}

#[test]
fn continuation_method_option() {
    let mut problem = NavigationProblem::spin_half(0.5);
    problem.options.method = SolveMethod::Continuation;
    problem.options.steps = 60;
    let solution = problem.solve().unwrap();
    assert_eq!(solution.method, MethodTag::Continuation);
    assert!(solution.diagnostics.endpoint_error < 1e-6);
}

#[test]
fn files_round_trip_through_json() {
    let (problem, _) = forward_instance(2, 0.2, 0.6, 11);
    let text = serde_json::to_string(&ProblemFile::from_problem(&problem)).unwrap();
    let reloaded = ProblemFile::from_json(&text).unwrap().into_problem(false).unwrap();
    assert_eq!(reloaded.h0, problem.h0);
    assert_eq!(reloaded.u_f.matrix(), problem.u_f.matrix());

    let solution = reloaded.solve().unwrap();
    let back = ControlSolution::from_json(&solution.to_json()).unwrap();
    assert_eq!(back, solution);
    back.validate(2).unwrap();
}
