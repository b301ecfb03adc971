//! Dense complex linear algebra used throughout the crate.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> CMatrix {
    CMatrix::zeros(d, d)
}

/// (M + M†)/2
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Re tr(A† B), the real Frobenius inner product.
pub fn inner_re(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Re tr(A B) for Hermitian A.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    // tr(AB) = sum_kl A_kl B_lk ; for Hermitian A, A_kl = conj(A_lk)
    let n = a.nrows();
    let mut s = 0.0;
    for k in 0..n {
        for l in 0..n {
            let x = a[(k, l)];
            let y = b[(l, k)];
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    /// V f(Λ) V†
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Rotate a vector so its first non-negligible amplitude is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let scale = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let ph = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}

/// Eigendecomposition of the Hermitian part of `m`. Eigenvalues descending; each
/// eigenvector phase-fixed so that its first non-negligible entry is real positive.
pub fn eigh(m: &CMatrix) -> Eigh {
    let n = m.nrows();
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (j, &k) in idx.iter().enumerate() {
        values.push(eig.eigenvalues[k]);
        let mut col: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
        fix_phase(&mut col);
        for i in 0..n {
            vectors[(i, j)] = col[i];
        }
    }
    Eigh { values, vectors }
}

/// Eigenvalues of the Hermitian part, descending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigvalsh(m).last().copied().unwrap_or(0.0)
}

/// Number of eigenvalues above `rel * λ_max`.
pub fn numerical_rank_rel(m: &CMatrix, rel: f64) -> usize {
    let v = eigvalsh(m);
    let top = v.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    v.iter().filter(|&&x| x > rel * top).count()
}

/// Numerical rank at the default relative threshold 1e-10.
pub fn numerical_rank(m: &CMatrix) -> usize {
    numerical_rank_rel(m, 1e-10)
}

pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    eigh(m).map(|x| x.max(0.0).sqrt())
}

/// Inverse square root with eigenvalues floored at `floor`.
pub fn psd_inv_sqrt(m: &CMatrix, floor: f64) -> CMatrix {
    eigh(m).map(|x| 1.0 / x.max(floor).sqrt())
}

/// Projection onto the PSD cone (eigenvalue clipping).
pub fn psd_project(m: &CMatrix) -> CMatrix {
    eigh(m).map(|x| x.max(0.0))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// |v⟩⟨v|
pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn basis_ket(d: usize, j: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[j] = c(1.0, 0.0);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of an operator on C^{d1} ⊗ C^{d2} over the indicated factor.
pub fn partial_trace(op: &CMatrix, d1: usize, d2: usize, which: Subsystem) -> Result<CMatrix> {
    if op.nrows() != d1 * d2 || op.ncols() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, factors {}x{}",
            op.nrows(),
            op.ncols(),
            d1,
            d2
        )));
    }
    Ok(match which {
        Subsystem::Second => {
            let mut out = CMatrix::zeros(d1, d1);
            for i in 0..d1 {
                for j in 0..d1 {
                    let mut s = c(0.0, 0.0);
                    for k in 0..d2 {
                        s += op[(i * d2 + k, j * d2 + k)];
                    }
                    out[(i, j)] = s;
                }
            }
            out
        }
        Subsystem::First => {
            let mut out = CMatrix::zeros(d2, d2);
            for i in 0..d2 {
                for j in 0..d2 {
                    let mut s = c(0.0, 0.0);
                    for k in 0..d1 {
                        s += op[(k * d2 + i, k * d2 + j)];
                    }
                    out[(i, j)] = s;
                }
            }
            out
        }
    })
}

/// ½‖A − B‖₁ for Hermitian A, B.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * eigvalsh(&(a - b)).iter().map(|x| x.abs()).sum::<f64>()
}

/// Uhlmann fidelity (tr√(√ρ σ √ρ))² of two PSD operators (not renormalized).
pub fn fidelity_raw(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let s = psd_sqrt(rho);
    let m = &s * sigma * &s;
    let root: f64 = eigvalsh(&m).iter().map(|x| x.max(0.0).sqrt()).sum();
    root * root
}

/// Real matrix into complex.
pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| c(x, 0.0))
}

/// Orthonormal Hermitian basis of d×d matrices: for each pair j<k the symmetric
/// (|j⟩⟨k|+|k⟩⟨j|)/√2 and antisymmetric (−i|j⟩⟨k|+i|k⟩⟨j|)/√2, then d−1 traceless
/// diagonals. For d=2 this is σx/√2, σy/√2, σz/√2.
pub fn gell_mann_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = CMatrix::zeros(d, d);
            s[(j, k)] = c(h, 0.0);
            s[(k, j)] = c(h, 0.0);
            out.push(s);
            let mut a = CMatrix::zeros(d, d);
            a[(j, k)] = c(0.0, -h);
            a[(k, j)] = c(0.0, h);
            out.push(a);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = c(norm, 0.0);
        }
        m[(l, l)] = c(-(l as f64) * norm, 0.0);
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(2.0, 0.0), c(0.5, 0.5), c(0.0, 0.0), c(0.5, -0.5), c(1.0, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.1, 0.0), c(3.0, 0.0)],
        );
        let e = eigh(&m);
        assert!(e.values[0] >= e.values[1] && e.values[1] >= e.values[2]);
        let back = e.map(|x| x);
        assert!(max_abs(&(back - &m)) < 1e-12);
        for j in 0..3 {
            let first = e.vectors.column(j).iter().find(|z| z.norm() > 1e-8).copied().unwrap();
            assert!(first.im.abs() < 1e-12 && first.re > 0.0);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.7, 0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let ab = kron(&a, &b);
        let r2 = partial_trace(&ab, 2, 2, Subsystem::Second).unwrap();
        assert!(max_abs(&(r2 - &a * c(3.0, 0.0))) < 1e-14);
        let r1 = partial_trace(&ab, 2, 2, Subsystem::First).unwrap();
        assert!(max_abs(&(r1 - &b)) < 1e-14);
        assert!(partial_trace(&ab, 3, 2, Subsystem::First).is_err());
    }

    #[test]
    fn gell_mann_orthonormal() {
        for d in 2..5 {
            let g = gell_mann_basis(d);
            assert_eq!(g.len(), d * d - 1);
            for (i, a) in g.iter().enumerate() {
                assert!(is_hermitian(a, 1e-15));
                assert!(trace(a).norm() < 1e-14);
                for (j, b) in g.iter().enumerate() {
                    let ip = trace(&(a * b)).re;
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn trace_product_matches_naive() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.3), c(0.2, -0.3), c(-1.0, 0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.1), c(0.7, -0.3), c(0.0, 2.0), c(1.5, 0.0)]);
        let naive = trace(&(&a * &b)).re;
        assert!((trace_product_re(&a, &b) - naive).abs() < 1e-14);
    }
}
