mod oracles;

use std::f64::consts::PI;

use fracfem_core::oracle::{
    cone_obstacle, eigenvalue, smoothed_radius, CONE_CENTER, DEFAULT_CAP_RADIUS,
};
use fracfem_core::{
    assemble_load, assemble_stiffness, build_graded_mesh, energy_error, energy_norm_sq_exact,
    exact_rhs_linear, exact_solution, jacobi_p2, solve_linear, Domain, ExplicitSolution, Grading,
    OracleError, QuadratureRules, StarIndex,
};
use proptest::prelude::*;

#[test]
fn jacobi_polynomial_values() {
    assert!((jacobi_p2(0.5, 1.0) - 1.875).abs() < 1e-15);
    assert!((jacobi_p2(0.0, -1.0) - 1.0).abs() < 1e-12);
    assert!((jacobi_p2(0.5, -1.0) - 1.0).abs() < 1e-15);
    for s in [0.1, 0.3, 0.7, 0.9] {
        assert!((jacobi_p2(s, 1.0) - (s + 1.0) * (s + 2.0) / 2.0).abs() < 1e-14);
    }
    // Legendre P2 at s = 0
    for z in [-0.7, 0.0, 0.4] {
        assert!((jacobi_p2(0.0, z) - (3.0 * z * z - 1.0) / 2.0).abs() < 1e-14);
    }
}

#[test]
fn solution_and_forcing_values() {
    assert!((exact_solution(0.5, [0.0, 0.0]) - 1.0).abs() < 1e-15);
    assert_eq!(exact_solution(0.3, [0.8, 0.7]), 0.0);
    assert_eq!(exact_solution(0.3, [1.0, 0.0]), 0.0);
    let g = oracles::gamma(3.5);
    assert!((g - 3.323_350_970_447_842_6).abs() < 1e-13);
    assert!((exact_rhs_linear(0.5, [0.0, 0.0]) - 0.5 * g * g).abs() < 1e-12);
    for s in [0.1, 0.5, 0.9] {
        let g = oracles::gamma(3.0 + s);
        assert!((eigenvalue(s) - 2f64.powf(2.0 * s - 2.0) * g * g).abs() < 1e-12 * g * g);
    }
}

#[test]
fn obstacle_and_modified_forcing() {
    for s in [0.1, 0.5, 0.9] {
        let sol = ExplicitSolution::new(s, DEFAULT_CAP_RADIUS).unwrap();
        let x0 = [0.0, 0.0];
        assert!((sol.f(x0) - (sol.f_tilde(x0) - 19.0)).abs() < 1e-12);
        for k in 0..=2000 {
            let r = k as f64 / 2000.0;
            let x = [r * 0.6, r * 0.8];
            let gap = sol.u(x) - sol.chi(x);
            let df = sol.f_tilde(x) - sol.f(x);
            if r <= 0.2 {
                assert!(gap.abs() <= 1e-12, "r = {r}: gap {gap}");
                if r < 0.2 {
                    assert!(df > 0.0, "r = {r}");
                }
            } else {
                assert!(gap > 0.0, "s = {s}, r = {r}: gap {gap}");
                assert_eq!(df, 0.0);
            }
        }
        // Taylor matching at r = 1/5
        let e = 1e-7;
        assert!((sol.chi([0.2, 0.0]) - sol.u_radial(0.2)).abs() < 1e-15);
        let d_in = (sol.chi([0.2, 0.0]) - sol.chi([0.2 - e, 0.0])) / e;
        let d_out = (sol.chi([0.2 + e, 0.0]) - sol.chi([0.2, 0.0])) / e;
        assert!((d_in - d_out).abs() < 1e-5);
    }
}

#[test]
fn closed_form_derivatives_match_differences() {
    for s in [0.1, 0.5, 0.9] {
        let sol = ExplicitSolution::new(s, DEFAULT_CAP_RADIUS).unwrap();
        for r in [0.2, 0.45, 0.8] {
            let h = 1e-5;
            let fd1 = (sol.u_radial(r + h) - sol.u_radial(r - h)) / (2.0 * h);
            let fd2 = (sol.u_radial(r + h) - 2.0 * sol.u_radial(r) + sol.u_radial(r - h)) / (h * h);
            assert!(
                (fd1 - sol.du(r)).abs() <= 1e-7 * sol.du(r).abs().max(1.0),
                "s {s} r {r}"
            );
            // second differences lose half the digits at this step
            assert!(
                (fd2 - sol.d2u(r)).abs() <= 1e-4 * sol.d2u(r).abs().max(1.0),
                "s {s} r {r}"
            );
        }
    }
}

#[test]
fn cap_is_c1() {
    let rc = 0.02;
    assert!((smoothed_radius(0.0, rc) - 0.01).abs() < 1e-15);
    assert!((smoothed_radius(rc, rc) - rc).abs() < 1e-15);
    let e = 1e-8;
    let slope = (smoothed_radius(rc, rc) - smoothed_radius(rc - e, rc)) / e;
    assert!((slope - 1.0).abs() < 1e-6);
    assert!((cone_obstacle(CONE_CENTER, rc) - 0.49).abs() < 1e-15);
    assert!((cone_obstacle([0.25, 0.75], rc)).abs() < 1e-15);
}

/// `2π ∫₀^{π/2} f̃ u r dr` with `r = sin t`, adaptively.
fn e0_by_sine(s: f64) -> f64 {
    let sol = ExplicitSolution::new(s, DEFAULT_CAP_RADIUS).unwrap();
    2.0 * PI
        * oracles::adapt(
            |t| {
                let r = t.sin();
                sol.f_tilde([r, 0.0]) * sol.u_radial(r) * r * t.cos()
            },
            0.0,
            PI / 2.0,
            1e-15,
        )
}

#[test]
fn energy_norm_two_substitutions_agree() {
    for s in [0.1, 0.5, 0.9] {
        let a = energy_norm_sq_exact(s, 4).unwrap();
        let b = e0_by_sine(s);
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-12 * a, "s {s}: {a} vs {b}");
    }
    let e = energy_norm_sq_exact(0.5, 4).unwrap();
    assert!((e - 3.154_347_997_507_254).abs() < 1e-11 * e, "{e:.16}");
    assert!(matches!(
        energy_norm_sq_exact(1.0, 4),
        Err(OracleError::InvalidOrder(_))
    ));
    assert!(matches!(
        energy_norm_sq_exact(0.5, 1),
        Err(OracleError::NotConverged(_))
    ));
}

#[test]
fn invalid_parameters() {
    assert!(ExplicitSolution::new(0.0, 0.02).is_err());
    assert!(ExplicitSolution::new(0.5, 0.0).is_err());
    assert!(ExplicitSolution::new(0.5, 0.3).is_err());
}

/// The discrete linear problem with forcing `f̃` converges to `u`: this pins
/// the eigenvalue constant, since any other factor leaves an O(1) error.
#[test]
fn forcing_is_consistent_with_the_discrete_operator() {
    let s = 0.5;
    let sol = ExplicitSolution::new(s, DEFAULT_CAP_RADIUS).unwrap();
    let mesh = build_graded_mesh(&Domain::unit_disk(), Grading::new(0.3, 2.0).unwrap()).unwrap();
    let rules = QuadratureRules::default();
    let sys = assemble_stiffness(&mesh, &StarIndex::new(&mesh), s, &rules).unwrap();
    let f = assemble_load(&mesh, |x| sol.f_tilde(x), rules.q_load).unwrap();
    let l = sys.matrix.clone().cholesky().unwrap();
    let u = solve_linear(&l, &f).unwrap();
    let zero = vec![0.0; f.len()];
    let e_zero = energy_error(&zero, &sys.matrix, &f, sol.e0).unwrap();
    assert!((e_zero - sol.e0.sqrt()).abs() < 1e-14 * e_zero);
    let e = energy_error(&u.values, &sys.matrix, &f, sol.e0).unwrap();
    let e_chol = energy_error(&u.values, &l, &f, sol.e0).unwrap();
    assert!((e - e_chol).abs() < 1e-8 * e_zero);
    assert!(e < 0.4 * e_zero, "relative energy error {}", e / e_zero);
    // nodal values close to u
    let worst = mesh
        .dof_vertices()
        .iter()
        .enumerate()
        .map(|(d, &v)| (u.values[d] - sol.u(mesh.vertices()[v])).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.15, "max nodal deviation {worst}");
    assert!(energy_error(&zero[1..], &sys.matrix, &f, sol.e0).is_err());
}

proptest! {
    #[test]
    fn solution_is_radial(r in 0.0f64..1.2, a in 0.0f64..6.3, b in 0.0f64..6.3, s in 0.05f64..0.95) {
        let sol = ExplicitSolution::new(s, DEFAULT_CAP_RADIUS).unwrap();
        let x = [r * a.cos(), r * a.sin()];
        let y = [r * b.cos(), r * b.sin()];
        let tol = 1e-12 * (1.0 + sol.u(x).abs());
        prop_assert!((sol.u(x) - sol.u(y)).abs() <= tol);
        prop_assert!((sol.chi(x) - sol.chi(y)).abs() <= 1e-12 * (1.0 + sol.chi(x).abs()));
        prop_assert!((sol.u(x) - exact_solution(s, x)).abs() <= tol);
    }
}
