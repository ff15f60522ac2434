//! Dense square complex matrices and the cyclic Jacobi eigensolver.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the length is not a square.
    pub fn from_vec(n: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data length mismatch");
        Matrix { n, data }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.n).map(|i| self.data[i * self.n + i]).collect()
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_mut(&mut self, s: f64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Matrix) {
        debug_assert_eq!(self.n, other.n);
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += b * s);
    }

    pub fn add_identity(&mut self, s: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += s;
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        debug_assert_eq!(n, other.n);
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                for (r, b) in row.iter_mut().zip(orow) {
                    *r += a * b;
                }
            }
        }
        Matrix { n, data: out }
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (n, m) = (self.n, other.n);
        let dim = n * m;
        let mut out = Matrix::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * dim + j * m + l] = a * other.data[k * m + l];
                    }
                }
            }
        }
        out
    }

    /// Real part of `Tr[self^† other]` (the Hilbert–Schmidt inner product).
    pub fn inner(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Real part of `Tr[self · other]`; equals [`Matrix::inner`] for Hermitian `self`.
    pub fn trace_product(&self, other: &Matrix) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                let b = other.data[k * n + i];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `|M - M^†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.n;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        dev
    }

    /// Replaces `M` by `(M + M^†)/2`.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in i + 1..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| i == j || self.data[i * n + j] == ZERO))
    }

    /// `U diag(values) U^†`.
    pub fn from_spectrum(values: &[f64], vectors: &Matrix) -> Matrix {
        let n = vectors.n;
        let mut out = vec![ZERO; n * n];
        for (k, &lam) in values.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = vectors.data[i * n + k] * lam;
                if a == ZERO {
                    continue;
                }
                let row = &mut out[i * n..(i + 1) * n];
                for (j, r) in row.iter_mut().enumerate() {
                    *r += a * vectors.data[j * n + k].conj();
                }
            }
        }
        let mut m = Matrix { n, data: out };
        m.symmetrize();
        m
    }

    /// Applies a real function to the spectrum of a Hermitian matrix.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        if self.is_diagonal() {
            let d: Vec<f64> = self.diag().iter().map(|z| f(z.re)).collect();
            return Matrix::from_diag(&d);
        }
        let (vals, vecs) = eigh(self);
        let mapped: Vec<f64> = vals.iter().map(|&v| f(v)).collect();
        Matrix::from_spectrum(&mapped, &vecs)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi on a Hermitian matrix. Returns ascending eigenvalues and,
/// if requested, the unitary whose columns are the eigenvectors.
fn jacobi(m: &Matrix, want_vectors: bool) -> (Vec<f64>, Option<Matrix>) {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = if want_vectors {
        Some(Matrix::identity(n))
    } else {
        None
    };
    let total = m.frobenius();
    let target = JACOBI_TOL * total;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 || r < 1e-300 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Phase so that the (p, q) entry becomes real and positive.
                let ph = apq / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let phc = ph.conj();
                // Columns: A[:,p] <- c A[:,p] - s e^{-i phi} A[:,q]; A[:,q] <- s A[:,p] + c e^{-i phi} A[:,q]
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q] * phc;
                    a[k * n + p] = akp * c - akq * s;
                    a[k * n + q] = akp * s + akq * c;
                }
                // Rows: conjugate coefficients.
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k] * ph;
                    a[p * n + k] = apk * c - aqk * s;
                    a[q * n + k] = apk * s + aqk * c;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v.data[k * n + p];
                        let vkq = v.data[k * n + q] * phc;
                        v.data[k * n + p] = vkp * c - vkq * s;
                        v.data[k * n + q] = vkp * s + vkq * c;
                    }
                }
            }
        }
    }
    let vals: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
    let sorted: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let vecs = v.map(|v| Matrix::from_fn(n, |i, k| v.data[i * n + order[k]]));
    (sorted, vecs)
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and unitary eigenvectors.
pub fn eigh(m: &Matrix) -> (Vec<f64>, Matrix) {
    if m.is_diagonal() {
        let n = m.n;
        let d: Vec<f64> = m.diag().iter().map(|z| z.re).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
        let vals = order.iter().map(|&i| d[i]).collect();
        let mut u = Matrix::zeros(n);
        for (k, &i) in order.iter().enumerate() {
            u.data[i * n + k] = ONE;
        }
        return (vals, u);
    }
    let (vals, vecs) = jacobi(m, true);
    (vals, vecs.expect("vectors requested"))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvalsh(m: &Matrix) -> Vec<f64> {
    if m.is_diagonal() {
        let mut d: Vec<f64> = m.diag().iter().map(|z| z.re).collect();
        d.sort_by(f64::total_cmp);
        return d;
    }
    jacobi(m, false).0
}

/// Stride bookkeeping for a region of `n` sites with local dimension `q`:
/// splits every basis index into the digits at `keep` positions and the rest.
pub(crate) struct LegSplit {
    /// Offset contributed by each basis index of the kept sites.
    pub keep: Vec<usize>,
    /// Offset contributed by each basis index of the complementary sites.
    pub rest: Vec<usize>,
}

impl LegSplit {
    /// `keep` must be sorted ascending positions in `0..n`.
    pub fn new(q: usize, n: usize, keep: &[usize]) -> Self {
        let rest: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
        LegSplit {
            keep: offsets(q, n, keep),
            rest: offsets(q, n, &rest),
        }
    }

    /// Partial trace over the complementary sites.
    pub fn trace_rest(&self, m: &Matrix) -> Matrix {
        let dk = self.keep.len();
        let n = m.n;
        let mut out = Matrix::zeros(dk);
        for (i, &oi) in self.keep.iter().enumerate() {
            for (j, &oj) in self.keep.iter().enumerate() {
                let mut acc = ZERO;
                for &t in &self.rest {
                    acc += m.data[(oi + t) * n + oj + t];
                }
                out.data[i * dk + j] = acc;
            }
        }
        out
    }

    /// `out += a ⊗ I_rest` with `a` acting on the kept sites.
    pub fn add_embedded(&self, a: &Matrix, scale: f64, out: &mut Matrix) {
        let n = out.n;
        let dk = self.keep.len();
        for (i, &oi) in self.keep.iter().enumerate() {
            for (j, &oj) in self.keep.iter().enumerate() {
                let v = a.data[i * dk + j] * scale;
                if v == ZERO {
                    continue;
                }
                for &t in &self.rest {
                    out.data[(oi + t) * n + oj + t] += v;
                }
            }
        }
    }

    pub fn embed(&self, a: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.keep.len() * self.rest.len());
        self.add_embedded(a, 1.0, &mut out);
        out
    }
}

/// Basis-index offsets for the sites at `positions` (first position most significant).
fn offsets(q: usize, n: usize, positions: &[usize]) -> Vec<usize> {
    let strides: Vec<usize> = positions.iter().map(|&p| q.pow((n - 1 - p) as u32)).collect();
    let count = q.pow(positions.len() as u32);
    let mut out = Vec::with_capacity(count);
    let k = positions.len();
    let mut digits = vec![0usize; k];
    for _ in 0..count {
        out.push(digits.iter().zip(&strides).map(|(d, s)| d * s).sum());
        let mut i = k;
        while i > 0 {
            i -= 1;
            digits[i] += 1;
            if digits[i] < q {
                break;
            }
            digits[i] = 0;
        }
    }
    out
}

/// Uniform averaging over one site: `M ↦ (I_x/q) ⊗ Tr_x M`, as an orthogonal
/// projection on operators of an `n`-site register.
pub(crate) struct SiteAverager {
    split: LegSplit,
    q: usize,
}

impl SiteAverager {
    pub fn new(q: usize, n: usize, position: usize) -> Self {
        let keep: Vec<usize> = (0..n).filter(|&p| p != position).collect();
        SiteAverager {
            split: LegSplit::new(q, n, &keep),
            q,
        }
    }

    /// Partial trace over the site.
    pub fn trace_out(&self, m: &Matrix) -> Matrix {
        self.split.trace_rest(m)
    }

    /// `(I_x/q) ⊗ Tr_x m`.
    pub fn average(&self, m: &Matrix) -> Matrix {
        let t = self.trace_out(m);
        let mut out = Matrix::zeros(m.n);
        self.split.add_embedded(&t, 1.0 / self.q as f64, &mut out);
        out
    }

    /// `m - average(m)`: the component of `m` that is traceless on the site.
    pub fn complement(&self, m: &Matrix) -> Matrix {
        m.sub(&self.average(m))
    }
}
