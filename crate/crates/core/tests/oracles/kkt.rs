//! Exhaustive active set enumeration for small complementarity problems
//! `u ≥ χ, Au − F ≥ 0, (Au − F)·(u − χ) = 0`.

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        m.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / m[k][k];
    }
    x
}

/// Every active set candidate satisfying the KKT sign conditions: `(set, u)`.
pub fn enumerate(a: &[Vec<f64>], f: &[f64], chi: &[f64]) -> Vec<(Vec<usize>, Vec<f64>)> {
    let n = f.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let act: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let free: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        let mut u = chi.to_vec();
        if !free.is_empty() {
            let m = free
                .iter()
                .map(|&i| free.iter().map(|&j| a[i][j]).collect())
                .collect();
            let rhs = free
                .iter()
                .map(|&i| f[i] - act.iter().map(|&j| a[i][j] * chi[j]).sum::<f64>())
                .collect();
            let x = gauss_solve(m, rhs);
            for (k, &i) in free.iter().enumerate() {
                u[i] = x[k];
            }
        }
        let lam: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * u[j]).sum::<f64>() - f[i])
            .collect();
        if free.iter().all(|&i| u[i] >= chi[i]) && act.iter().all(|&i| lam[i] >= 0.0) {
            out.push((act, u));
        }
    }
    out
}
