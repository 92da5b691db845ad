//! Dense complex linear algebra and quantum-state primitives.
//!
//! Everything in this crate evolves on Hilbert spaces of dimension at most a
//! few dozen (the largest production matrix is the 13-dimensional
//! single-excitation density operator of a 12-qubit run), so matrices are
//! plain row-major `Vec<C64>` buffers and the eigensolver is a cyclic
//! complex Jacobi iteration. No sparsity, no BLAS.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
// In no_std builds float math comes from the trait; builds whose dependency
// graph links std resolve the inherent methods instead and see this unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "matrix dimensions must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Diagonal matrix from real entries.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = C64::new(d, 0.0);
        }
        m
    }

    /// Rank-one projector |psi><psi| from amplitudes, normalized.
    pub fn outer(psi: &[C64]) -> Result<Self> {
        let norm_sq: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq < 1e-24 {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        let n = psi.len();
        let inv = 1.0 / norm_sq;
        Ok(Self::from_fn(n, n, |i, j| psi[i] * psi[j].conj() * inv))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn check_finite(&self) -> Result<()> {
        for z in &self.data {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Numeric("matrix contains a non-finite entry".into()));
            }
        }
        Ok(())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i])
    }

    pub fn conjugate(&self) -> Self {
        let mut m = self.clone();
        for z in &mut m.data {
            *z = z.conj();
        }
        m
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut m = self.clone();
        for z in &mut m.data {
            *z *= s;
        }
        m
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix dims differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius norm of the anti-Hermitian part.
    pub fn hermiticity_error(&self) -> f64 {
        debug_assert!(self.is_square());
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = self.data[i * n + j] - self.data[j * n + i].conj();
                let w = if i == j { 0.25 } else { 0.5 };
                acc += w * d.norm_sqr() * 2.0;
            }
        }
        acc.sqrt()
    }

    /// (A + A^dagger) / 2.
    pub fn hermitized(&self) -> Self {
        debug_assert!(self.is_square());
        let n = self.rows;
        Self::from_fn(n, n, |i, j| {
            0.5 * (self.data[i * n + j] + self.data[j * n + i].conj())
        })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_error() <= tol * self.frobenius_norm().max(1.0)
    }

    /// `out = a * b`, reusing `out`'s buffer. Panics on dimension mismatch.
    pub fn matmul_into(a: &Self, b: &Self, out: &mut Self) {
        assert_eq!(a.cols, b.rows, "matmul inner dims differ");
        assert_eq!((out.rows, out.cols), (a.rows, b.cols), "matmul output dims differ");
        out.data.iter_mut().for_each(|z| *z = C64::ZERO);
        let (n, m, p) = (a.rows, a.cols, b.cols);
        for i in 0..n {
            let a_row = &a.data[i * m..(i + 1) * m];
            let out_row = &mut out.data[i * p..(i + 1) * p];
            for (k, &aik) in a_row.iter().enumerate() {
                if aik == C64::ZERO {
                    continue;
                }
                let b_row = &b.data[k * p..(k + 1) * p];
                for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                    *o += aik * bkj;
                }
            }
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix dims differ");
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o += r;
        }
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix dims differ");
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o -= r;
        }
        out
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        ComplexMatrix::matmul_into(self, rhs, &mut out);
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scaled(C64::new(-1.0, 0.0))
    }
}

/// Pauli X.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![C64::ZERO, C64::ONE, C64::ONE, C64::ZERO]).unwrap()
}

/// Pauli Y.
pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        2,
        vec![C64::ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::ZERO],
    )
    .unwrap()
}

/// Pauli Z (diag(1, -1); the |0> basis state is the +1 eigenstate).
pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[1.0, -1.0])
}

/// Kronecker product; the first factor is the most significant subsystem.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a
        .rows()
        .checked_mul(b.rows())
        .ok_or_else(|| Error::Size("Kronecker row dimension overflows".into()))?;
    let cols = a
        .cols()
        .checked_mul(b.cols())
        .ok_or_else(|| Error::Size("Kronecker column dimension overflows".into()))?;
    rows.checked_mul(cols)
        .filter(|&n| n <= (1 << 26))
        .ok_or_else(|| Error::Size("Kronecker product too large".into()))?;
    let (br, bc) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij == C64::ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigenDecomposition {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvectors as columns.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenDecomposition {
    /// V diag(f(lambda)) V^dagger.
    pub fn apply(&self, mut f: impl FnMut(f64) -> C64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let fk = f(lam);
            for i in 0..n {
                scaled[(i, k)] = v[(i, k)] * fk;
            }
        }
        &scaled * &v.dagger()
    }
}

const HERMITICITY_TOL: f64 = 1e-10;

/// Eigendecomposition via cyclic complex Jacobi rotations.
///
/// The input must be Hermitian to within `1e-10` relative Frobenius error;
/// it is symmetrized internally before iteration so that integrator
/// round-off cannot poison the spectrum.
pub fn eigh(h: &ComplexMatrix) -> Result<HermitianEigenDecomposition> {
    if !h.is_square() {
        return Err(Error::Shape(format!(
            "eigh requires a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let scale = h.frobenius_norm().max(1.0);
    if h.hermiticity_error() > HERMITICITY_TOL * scale {
        return Err(Error::Shape("eigh input is not Hermitian within tolerance".into()));
    }
    let n = h.rows();
    let mut a = h.hermitized();
    let mut v = ComplexMatrix::identity(n);

    let off = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let tol = 1e-14 * scale;
    for _sweep in 0..64 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= tol / (n as f64) {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column rotation U with columns
                //   U[:,p] = (c, -s e^{-i phi}),  U[:,q] = (s, c e^{-i phi}).
                let sp = phase.conj() * s;
                let cp = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * sp;
                    a[(k, q)] = akp * s + akq * cp;
                }
                let spc = phase * s;
                let cpc = phase * c;
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * spc;
                    a[(q, k)] = apk * s + aqk * cpc;
                }
                a[(p, q)] = C64::ZERO;
                a[(q, p)] = C64::ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * sp;
                    v[(k, q)] = vkp * s + vkq * cp;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigenDecomposition { eigenvalues, eigenvectors })
}

/// Reduced density operator over the subsystems listed in `keep`.
///
/// `dims` lists every subsystem dimension with the first entry the most
/// significant index factor (matching [`kron`]); `rho` must be a unit-trace
/// square matrix on the full product space.
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !rho.is_square() {
        return Err(Error::Shape("partial_trace requires a square matrix".into()));
    }
    let mut total: usize = 1;
    for &d in dims {
        if d == 0 {
            return Err(Error::Shape("subsystem dimensions must be positive".into()));
        }
        total = total
            .checked_mul(d)
            .ok_or_else(|| Error::Size("product of subsystem dimensions overflows".into()))?;
    }
    if total != rho.rows() {
        return Err(Error::Shape(format!(
            "subsystem dimensions multiply to {total}, matrix is {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "partial_trace requires a unit-trace operator, trace = {tr}"
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Index(format!(
            "keep index out of range for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();

    // Row-major strides of each subsystem in the full index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let enumerate_offsets = |subsys: &[usize]| -> Vec<usize> {
        let mut offsets = vec![0usize];
        for &s in subsys {
            let mut next = Vec::with_capacity(offsets.len() * dims[s]);
            for &base in &offsets {
                for v in 0..dims[s] {
                    next.push(base + v * strides[s]);
                }
            }
            offsets = next;
        }
        offsets
    };
    let kept_offsets = enumerate_offsets(&kept);
    let traced_offsets = enumerate_offsets(&traced);

    let dk = kept_offsets.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (a, &oa) in kept_offsets.iter().enumerate() {
        for (b, &ob) in kept_offsets.iter().enumerate() {
            let mut acc = C64::ZERO;
            for &oe in &traced_offsets {
                acc += rho[(oa + oe, ob + oe)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// exp(-i h t) for Hermitian `h` (angular units) via eigendecomposition.
pub fn matexp_herm(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = eigh(h)?;
    Ok(eig.apply(|lam| C64::new(0.0, -lam * t).exp()))
}

#[cfg(test)]
pub(crate) fn random_matrix(rng: &mut impl rand::Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

#[cfg(test)]
pub(crate) fn random_hermitian(rng: &mut impl rand::Rng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n).hermitized()
}

/// G G^dagger / tr: always a valid density operator. Test helper.
#[cfg(test)]
pub(crate) fn random_density(rng: &mut impl rand::Rng, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n);
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    m.scaled(C64::new(1.0 / tr, 0.0))
}
