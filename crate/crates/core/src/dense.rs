//! Dense symmetric matrices stored as the lower triangle of square tiles,
//! and their in-place Cholesky factorisation.
//!
//! Only tiles `(I, J)` with `J <= I` are stored, each row-major and
//! contiguous, tile rows one after the other. The storage is padded to a
//! multiple of the tile size; padded diagonal entries are one.

use alloc::vec::Vec;

use faer::linalg::matmul::matmul;
use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Accum, MatMut, MatRef, Par};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (failure near row {0})")]
    NotPositiveDefinite(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

const DEFAULT_TILE: usize = 256;

#[derive(Clone, Debug)]
pub struct SymMatrix {
    n: usize,
    nb: usize,
    nt: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> SymMatrix {
        Self::with_tile(n, DEFAULT_TILE)
    }

    pub fn with_tile(n: usize, tile: usize) -> SymMatrix {
        let nb = tile.clamp(1, n.max(1));
        let nt = n.div_ceil(nb).max(1);
        let mut data = alloc::vec![0.0; nt * (nt + 1) / 2 * nb * nb];
        let pad = nt * nb;
        let mut m = SymMatrix {
            n,
            nb,
            nt,
            data: Vec::new(),
        };
        core::mem::swap(&mut m.data, &mut data);
        for i in n..pad {
            let o = m.offset(i, i);
            m.data[o] = 1.0;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> SymMatrix {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let o = m.offset(i, j);
                m.data[o] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tile_size(&self) -> usize {
        self.nb
    }

    #[inline]
    fn tile_offset(&self, bi: usize, bj: usize) -> usize {
        (bi * (bi + 1) / 2 + bj) * self.nb * self.nb
    }

    /// Storage offset of entry `(i, j)` with `j <= i`.
    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let nb = self.nb;
        self.tile_offset(i / nb, j / nb) + (i % nb) * nb + j % nb
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.data[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let o = self.offset(i, j);
        self.data[o] = v;
    }

    /// Adds `v` to the stored entry `(max(i, j), min(i, j))`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    /// Adds the symmetric rank-two pattern `v (e_i e_j^T + e_j e_i^T)`.
    #[inline]
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.add(i, i, 2.0 * v);
        } else {
            self.add(i, j, v);
        }
    }

    /// `A[i, j] += alpha * row[j]` for `j <= i`.
    pub fn axpy_row(&mut self, i: usize, alpha: f64, row: &[f64]) {
        let nb = self.nb;
        let bi = i / nb;
        let r = i % nb;
        for bj in 0..=bi {
            let o = self.tile_offset(bi, bj) + r * nb;
            let j0 = bj * nb;
            let len = if bj == bi { r + 1 } else { nb };
            let dst = &mut self.data[o..o + len];
            let src = &row[j0..j0 + len];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += alpha * s;
            }
        }
    }

    /// Full dense copy, row-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.get(i, j);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    /// Lower triangle, row-major: `A[0,0], A[1,0], A[1,1], A[2,0], ...`.
    pub fn lower_row_major(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| (0..=i).map(move |j| self.get(i, j)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let nb = self.nb;
        let pad = self.nt * nb;
        let mut xp = alloc::vec![0.0; pad];
        xp[..self.n].copy_from_slice(x);
        let mut y = alloc::vec![0.0; pad];
        for bi in 0..self.nt {
            for bj in 0..=bi {
                let t = &self.data[self.tile_offset(bi, bj)..][..nb * nb];
                for r in 0..nb {
                    let row = &t[r * nb..(r + 1) * nb];
                    let gi = bi * nb + r;
                    if bi == bj {
                        // lower part incl. diagonal, then mirror strictly lower
                        let mut acc = 0.0;
                        for c in 0..=r {
                            acc += row[c] * xp[bj * nb + c];
                        }
                        y[gi] += acc;
                        for c in 0..r {
                            y[bj * nb + c] += row[c] * xp[gi];
                        }
                    } else {
                        let xs = &xp[bj * nb..(bj + 1) * nb];
                        let mut acc = 0.0;
                        for c in 0..nb {
                            acc += row[c] * xs[c];
                        }
                        y[gi] += acc;
                        let xi = xp[gi];
                        let ys = &mut y[bj * nb..(bj + 1) * nb];
                        for c in 0..nb {
                            ys[c] += row[c] * xi;
                        }
                    }
                }
            }
        }
        y.truncate(self.n);
        y
    }

    /// Factors `A = L L^T` in place.
    pub fn cholesky(mut self) -> Result<Cholesky, LinalgError> {
        let nb = self.nb;
        let nt = self.nt;
        let tsz = nb * nb;
        let par = Par::Seq;
        let mut mem = faer::dyn_stack::MemBuffer::new(
            faer::linalg::cholesky::llt::factor::cholesky_in_place_scratch::<f64>(
                nb,
                par,
                Default::default(),
            ),
        );
        for k in 0..nt {
            let okk = self.tile_offset(k, k);
            {
                let tile = &mut self.data[okk..okk + tsz];
                let m = MatMut::from_row_major_slice_mut(tile, nb, nb);
                let stack = faer::dyn_stack::MemStack::new(&mut mem);
                faer::linalg::cholesky::llt::factor::cholesky_in_place(
                    m,
                    Default::default(),
                    par,
                    stack,
                    Default::default(),
                )
                .map_err(|_| LinalgError::NotPositiveDefinite(k * nb))?;
                for r in 0..nb {
                    let d = tile[r * nb + r];
                    if !(d > 0.0 && d.is_finite()) {
                        return Err(LinalgError::NotPositiveDefinite(k * nb + r));
                    }
                }
            }
            for i in k + 1..nt {
                let oik = self.tile_offset(i, k);
                let (head, tail) = self.data.split_at_mut(oik);
                let l = MatRef::from_row_major_slice(&head[okk..okk + tsz], nb, nb);
                let b = MatMut::from_row_major_slice_mut(&mut tail[..tsz], nb, nb);
                // B <- B L^{-T}  <=>  L B^T = B^T
                solve_lower_triangular_in_place(l, b.transpose_mut(), par);
            }
            for i in k + 1..nt {
                for j in k + 1..=i {
                    let oij = self.tile_offset(i, j);
                    let oik = self.tile_offset(i, k);
                    let ojk = self.tile_offset(j, k);
                    let (head, tail) = self.data.split_at_mut(oij);
                    let a = MatRef::from_row_major_slice(&head[oik..oik + tsz], nb, nb);
                    let b = MatRef::from_row_major_slice(&head[ojk..ojk + tsz], nb, nb);
                    let c = MatMut::from_row_major_slice_mut(&mut tail[..tsz], nb, nb);
                    matmul(c, Accum::Add, a, b.transpose(), -1.0, par);
                }
            }
        }
        Ok(Cholesky { l: self })
    }
}

/// Lower Cholesky factor in tiled storage.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: SymMatrix,
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.l.n
    }

    /// Row count of the padded layout used by `forward_unit_columns`.
    pub fn padded_dim(&self) -> usize {
        self.l.nt * self.l.nb
    }

    fn tile(&self, bi: usize, bj: usize) -> &[f64] {
        let nb = self.l.nb;
        &self.l.data[self.l.tile_offset(bi, bj)..][..nb * nb]
    }

    /// Entry `L[i, j]` for `j <= i`.
    pub fn factor_entry(&self, i: usize, j: usize) -> f64 {
        assert!(j <= i);
        self.l.data[self.l.offset(i, j)]
    }

    /// Solves `L y = b` in place on a padded vector.
    fn forward_padded(&self, b: &mut [f64]) {
        let nb = self.l.nb;
        for bi in 0..self.l.nt {
            for bj in 0..bi {
                let t = self.tile(bi, bj);
                let (done, rest) = b.split_at_mut(bi * nb);
                let ys = &done[bj * nb..(bj + 1) * nb];
                for r in 0..nb {
                    let row = &t[r * nb..(r + 1) * nb];
                    let mut acc = 0.0;
                    for c in 0..nb {
                        acc += row[c] * ys[c];
                    }
                    rest[r] -= acc;
                }
            }
            let t = self.tile(bi, bi);
            let ys = &mut b[bi * nb..(bi + 1) * nb];
            for r in 0..nb {
                let row = &t[r * nb..(r + 1) * nb];
                let mut acc = ys[r];
                for c in 0..r {
                    acc -= row[c] * ys[c];
                }
                ys[r] = acc / row[r];
            }
        }
    }

    /// Solves `L^T x = y` in place on a padded vector.
    fn backward_padded(&self, y: &mut [f64]) {
        let nb = self.l.nb;
        for bi in (0..self.l.nt).rev() {
            let t = self.tile(bi, bi);
            {
                let xs = &mut y[bi * nb..(bi + 1) * nb];
                for r in (0..nb).rev() {
                    let v = xs[r] / t[r * nb + r];
                    xs[r] = v;
                    for c in 0..r {
                        xs[c] -= t[r * nb + c] * v;
                    }
                }
            }
            if bi == 0 {
                continue;
            }
            for bj in 0..bi {
                let t = self.tile(bi, bj);
                let (lo, hi) = y.split_at_mut(bi * nb);
                let xs = &hi[..nb];
                let ys = &mut lo[bj * nb..(bj + 1) * nb];
                for r in 0..nb {
                    let v = xs[r];
                    let row = &t[r * nb..(r + 1) * nb];
                    for c in 0..nb {
                        ys[c] -= row[c] * v;
                    }
                }
            }
        }
    }

    fn padded(&self, b: &[f64]) -> Vec<f64> {
        let mut v = alloc::vec![0.0; self.l.nt * self.l.nb];
        v[..b.len()].copy_from_slice(b);
        v
    }

    /// `L^{-1} b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.l.n);
        let mut v = self.padded(b);
        self.forward_padded(&mut v);
        v.truncate(self.l.n);
        v
    }

    /// `L^{-T} y`.
    pub fn backward(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.l.n);
        let mut v = self.padded(y);
        self.backward_padded(&mut v);
        v.truncate(self.l.n);
        v
    }

    /// `A^{-1} b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.l.n);
        let mut v = self.padded(b);
        self.forward_padded(&mut v);
        self.backward_padded(&mut v);
        v.truncate(self.l.n);
        v
    }

    /// `L^T x`.
    pub fn lt_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.l.n);
        let nb = self.l.nb;
        let xp = self.padded(x);
        let mut out = alloc::vec![0.0; xp.len()];
        for bi in 0..self.l.nt {
            for bj in 0..=bi {
                let t = self.tile(bi, bj);
                let xs = &xp[bi * nb..(bi + 1) * nb];
                let os = &mut out[bj * nb..(bj + 1) * nb];
                for r in 0..nb {
                    let v = xs[r];
                    let row = &t[r * nb..(r + 1) * nb];
                    let len = if bi == bj { r + 1 } else { nb };
                    for c in 0..len {
                        os[c] += row[c] * v;
                    }
                }
            }
        }
        out.truncate(self.l.n);
        out
    }

    /// `L y`.
    pub fn l_mul(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.l.n);
        let nb = self.l.nb;
        let yp = self.padded(y);
        let mut out = alloc::vec![0.0; yp.len()];
        for bi in 0..self.l.nt {
            for bj in 0..=bi {
                let t = self.tile(bi, bj);
                let ys = &yp[bj * nb..(bj + 1) * nb];
                for r in 0..nb {
                    let row = &t[r * nb..(r + 1) * nb];
                    let len = if bi == bj { r + 1 } else { nb };
                    let mut acc = 0.0;
                    for c in 0..len {
                        acc += row[c] * ys[c];
                    }
                    out[bi * nb + r] += acc;
                }
            }
        }
        out.truncate(self.l.n);
        out
    }

    /// `A x` recovered from the factor.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.l_mul(&self.lt_mul(x))
    }

    /// `x^T A x = |L^T x|^2`.
    pub fn energy(&self, x: &[f64]) -> f64 {
        self.lt_mul(x).iter().map(|v| v * v).sum()
    }

    /// `Z = L^{-1} E` for the unit columns `E = [e_c]`, `c` in `cols`, as a
    /// dense column-major block covering rows `row0..n` (rows above `row0`
    /// vanish). Returns `(row0, Z)`.
    pub fn forward_unit_columns(&self, cols: &[usize]) -> (usize, faer::Mat<f64>) {
        let nb = self.l.nb;
        let m = cols.len();
        let first = cols.iter().copied().min().unwrap_or(self.l.n);
        let b0 = (first / nb).min(self.l.nt);
        let row0 = b0 * nb;
        let pad = self.l.nt * nb;
        let mut z = faer::Mat::<f64>::zeros(pad - row0, m);
        for (k, &c) in cols.iter().enumerate() {
            z[(c - row0, k)] = 1.0;
        }
        let par = Par::Seq;
        for bi in b0..self.l.nt {
            let (upper, cur) = z.as_mut().split_at_row_mut((bi - b0) * nb);
            let mut cur = cur.subrows_mut(0, nb);
            for bj in b0..bi {
                let t = MatRef::from_row_major_slice(self.tile(bi, bj), nb, nb);
                let prev = upper.as_ref().subrows((bj - b0) * nb, nb);
                matmul(cur.as_mut(), Accum::Add, t, prev, -1.0, par);
            }
            let t = MatRef::from_row_major_slice(self.tile(bi, bi), nb, nb);
            solve_lower_triangular_in_place(t, cur.as_mut(), par);
        }
        (row0, z)
    }

    /// `L^{-T} v` where `v` is given on rows `row0..` (padded layout) and is
    /// zero above.
    pub fn backward_from(&self, row0: usize, v: &[f64]) -> Vec<f64> {
        let mut full = alloc::vec![0.0; self.l.nt * self.l.nb];
        full[row0..row0 + v.len()].copy_from_slice(v);
        self.backward_padded(&mut full);
        full.truncate(self.l.n);
        full
    }
}
