use fracfem_core::quadrature::{gauss_jacobi, gauss_legendre, TriangleRule};
use fracfem_core::special::{beta, gamma};
use fracfem_core::{LinalgError, SymMatrix};
use proptest::prelude::*;

#[test]
fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
    for n in 1..=20 {
        let g = gauss_legendre(n);
        assert!(g.weights.iter().all(|&w| w > 0.0));
        assert!(g.nodes.iter().all(|&x| x > 0.0 && x < 1.0));
        for k in 0..2 * n {
            let q: f64 = g.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n {n} k {k}");
        }
    }
}

#[test]
fn gauss_jacobi_moments() {
    for (a, b) in [(0.0, 0.0), (0.3, -0.4), (-0.8, 1.2), (0.5, 0.0)] {
        for n in 1..=12 {
            let g = gauss_jacobi(n, a, b);
            assert!(g.weights.iter().all(|&w| w > 0.0));
            for k in 0..2 * n {
                // ∫ (1 − x)^a (1 + x)^{b + k} dx
                let q: f64 = g.iter().map(|(x, w)| w * (1.0 + x).powi(k as i32)).sum();
                let kf = k as f64;
                let exact = 2f64.powf(a + b + kf + 1.0) * beta(a + 1.0, b + kf + 1.0);
                assert!((q - exact).abs() < 1e-12 * exact, "a {a} b {b} n {n} k {k}");
            }
        }
    }
}

#[test]
fn gamma_and_beta() {
    assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    assert!((gamma(5.0) - 24.0).abs() < 1e-12);
    assert!((beta(2.0, 3.0) - 1.0 / 12.0).abs() < 1e-15);
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[test]
fn collapsed_rule_exactness() {
    for q in 1..=10 {
        let r = TriangleRule::collapsed(q);
        assert!(r.weights.iter().all(|&w| w > 0.0));
        for i in 0..=(2 * q - 2) as u32 {
            for j in 0..=(2 * q - 2) as u32 - i {
                let v: f64 = r
                    .bary
                    .iter()
                    .zip(&r.weights)
                    .map(|(l, w)| w * l[1].powi(i as i32) * l[2].powi(j as i32))
                    .sum();
                let exact = factorial(i) * factorial(j) / factorial(i + j + 2);
                assert!((v - exact).abs() < 1e-14, "q {q} x^{i} y^{j}");
            }
        }
    }
}

#[test]
fn graded_rules_integrate_power_singularities() {
    for g in [-1.8f64, -1.2, -0.5, 0.4] {
        // vertex singularity (1 − λ0)^g; the collapse contributes one power
        let r = TriangleRule::graded(10, 3, 0.2, g + 1.0, false);
        assert!(r.weights.iter().all(|&w| w > 0.0));
        let v: f64 = r
            .bary
            .iter()
            .zip(&r.weights)
            .map(|(l, w)| w * (1.0 - l[0]).powf(g))
            .sum();
        // outer panels see r^{g+1} over a ratio of five
        assert!(
            (v - 1.0 / (g + 2.0)).abs() < 1e-8 * (1.0 / (g + 2.0)),
            "g {g}: {v}"
        );
    }
    for b in [-0.8f64, -0.3, 0.6, 1.4] {
        // edge singularity λ0^b
        let r = TriangleRule::graded(10, 3, 0.2, b, true);
        let v: f64 = r
            .bary
            .iter()
            .zip(&r.weights)
            .map(|(l, w)| w * l[0].powf(b))
            .sum();
        let exact = 1.0 / ((b + 1.0) * (b + 2.0));
        assert!((v - exact).abs() < 1e-8 * exact, "b {b}: {v} vs {exact}");
        let smooth: f64 = r
            .bary
            .iter()
            .zip(&r.weights)
            .map(|(l, w)| w * l[0].powf(b) * l[1] * l[2])
            .sum();
        // ∫ λ0^b λ1 λ2 = Γ(b+1) Γ(2) Γ(2) / Γ(b+5)
        let exact = gamma(b + 1.0) / gamma(b + 5.0);
        assert!(
            (smooth - exact).abs() < 1e-8 * exact,
            "b {b}: {smooth} vs {exact}"
        );
    }
}

fn naive_cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

fn random_spd(n: usize, tile: usize, seed: u64) -> SymMatrix {
    let mut x = seed | 1;
    let mut next = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let b: Vec<f64> = (0..n * n).map(|_| next()).collect();
    let mut m = SymMatrix::with_tile(n, tile);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (0..n).map(|k| b[k * n + i] * b[k * n + j]).sum();
            m.set(i, j, v + if i == j { 0.1 } else { 0.0 });
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn cholesky_matches_naive(n in 1usize..40, tile in 1usize..9, seed in any::<u64>()) {
        let a = random_spd(n, tile, seed);
        prop_assert_eq!(a.tile_size(), tile.min(n));
        let dense = a.to_dense();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
        let ax = a.matvec(&x);
        for i in 0..n {
            let r: f64 = (0..n).map(|j| dense[i * n + j] * x[j]).sum();
            prop_assert!((r - ax[i]).abs() < 1e-12 * (1.0 + r.abs()));
        }
        let packed: Vec<f64> = a.lower_row_major().collect();
        prop_assert_eq!(packed.len(), n * (n + 1) / 2);
        prop_assert_eq!(packed[packed.len() - 1], dense[n * n - 1]);
        let reference = naive_cholesky(&dense, n).unwrap();
        let l = a.clone().cholesky().unwrap();
        for i in 0..n {
            for j in 0..=i {
                let (p, q) = (l.factor_entry(i, j), reference[i * n + j]);
                prop_assert!((p - q).abs() < 1e-10 * (1.0 + q.abs()));
            }
        }
        let u = l.solve(&ax);
        for i in 0..n {
            prop_assert!((u[i] - x[i]).abs() < 1e-7);
        }
        let back = l.apply(&x);
        for i in 0..n {
            prop_assert!((back[i] - ax[i]).abs() < 1e-10 * (1.0 + ax[i].abs()));
        }
        let e: f64 = ax.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((l.energy(&x) - e).abs() < 1e-10 * e.abs().max(1.0));
        let y = l.forward(&ax);
        let z = l.backward(&y);
        for i in 0..n {
            prop_assert!((z[i] - u[i]).abs() < 1e-10 * (1.0 + u[i].abs()));
        }
        // Z = L^{-1} E agrees with column-wise forward solves
        let cols: Vec<usize> = (0..n).filter(|c| c % 3 == 1).collect();
        let (row0, zm) = l.forward_unit_columns(&cols);
        for (k, &c) in cols.iter().enumerate() {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            let f = l.forward(&e);
            for r in 0..n {
                let v = if r < row0 { 0.0 } else { zm[(r - row0, k)] };
                prop_assert!((v - f[r]).abs() < 1e-10 * (1.0 + f[r].abs()));
            }
        }
    }
}

#[test]
fn indefinite_matrix_is_rejected() {
    let mut a = random_spd(6, 4, 7);
    a.set(5, 5, -1.0);
    assert!(matches!(
        a.cholesky(),
        Err(LinalgError::NotPositiveDefinite(_))
    ));
}

#[test]
fn symmetric_updates() {
    let mut a = SymMatrix::with_tile(5, 2);
    a.add_sym(3, 1, 2.0);
    a.add_sym(2, 2, 1.5);
    a.add(1, 3, 0.5);
    assert_eq!(a.get(1, 3), 2.5);
    assert_eq!(a.get(3, 1), 2.5);
    assert_eq!(a.get(2, 2), 3.0);
    a.axpy_row(4, 2.0, &[1.0, 2.0, 3.0, 4.0, 5.0]);
    assert_eq!(a.get(4, 0), 2.0);
    assert_eq!(a.get(4, 4), 10.0);
}
