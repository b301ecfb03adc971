use crate::error::{Error, Result};

use super::linalg::{
    basis_ket, c, eigvalsh, fidelity_raw, identity, is_hermitian, max_abs, projector, trace, CMatrix, CVector,
};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;

fn check_square(m: &CMatrix, what: &str) -> Result<usize> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::InvalidDimension(format!("{what} must be square and non-empty")));
    }
    Ok(m.nrows())
}

/// Hermitian and smallest eigenvalue above −PSD_TOL.
pub fn check_psd(m: &CMatrix, what: &str) -> Result<()> {
    if !is_hermitian(m, HERMITIAN_TOL.max(1e-12 * max_abs(m))) {
        return Err(Error::ConstraintViolation(format!("{what} is not Hermitian")));
    }
    let lo = eigvalsh(m).last().copied().unwrap_or(0.0);
    if lo < -PSD_TOL {
        return Err(Error::ConstraintViolation(format!("{what} has eigenvalue {lo:e}")));
    }
    Ok(())
}

/// A d×d Hermitian PSD matrix of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m, "density matrix")?;
        check_psd(&m, "density matrix")?;
        let t = trace(&m);
        if (t.re - 1.0).abs() > TRACE_TOL || t.im.abs() > TRACE_TOL {
            return Err(Error::ConstraintViolation(format!("density matrix trace {t}")));
        }
        Ok(Self { m })
    }

    /// Hermitizes, clips tiny negative eigenvalues and renormalizes. For solver output.
    pub fn from_approx(m: &CMatrix) -> Result<Self> {
        let h = super::linalg::psd_project(m);
        let t = trace(&h).re;
        if !(t > 0.0) {
            return Err(Error::ConstraintViolation("zero matrix".into()));
        }
        Self::new(h / c(t, 0.0))
    }

    pub fn pure(ket: &CVector) -> Result<Self> {
        let n = ket.norm();
        if n == 0.0 {
            return Err(Error::InvalidDimension("zero ket".into()));
        }
        let v = ket / c(n, 0.0);
        Ok(Self { m: projector(&v) })
    }

    pub fn basis_state(d: usize, j: usize) -> Self {
        Self { m: projector(&basis_ket(d, j)) }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { m: identity(d) / c(d as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn rank(&self) -> usize {
        super::linalg::numerical_rank(&self.m)
    }

    pub fn purity(&self) -> f64 {
        super::linalg::inner_re(&self.m, &self.m)
    }
}

/// Uhlmann fidelity F = (tr√(√ρ σ √ρ))², clamped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    Ok(fidelity_raw(rho.matrix(), sigma.matrix()).clamp(0.0, 1.0))
}

/// −tr(ρ ln ρ); eigenvalues below 1e-14 contribute nothing.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&eigvalsh(rho.matrix()))
}

pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values.iter().filter(|&&x| x > 1e-14).map(|&x| -x * x.ln()).sum::<f64>().max(0.0)
}

/// Ordered PSD outcomes summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    outcomes: Vec<CMatrix>,
}

impl Povm {
    pub fn new(outcomes: Vec<CMatrix>) -> Result<Self> {
        let first = outcomes.first().ok_or_else(|| Error::InvalidDimension("empty POVM".into()))?;
        let d = check_square(first, "POVM outcome")?;
        let mut sum = CMatrix::zeros(d, d);
        for (j, p) in outcomes.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::DimensionMismatch(format!("outcome {j} has wrong size")));
            }
            check_psd(p, &format!("outcome {j}"))?;
            sum += p;
        }
        let dev = max_abs(&(sum - identity(d)));
        if dev > 1e-10 {
            return Err(Error::ConstraintViolation(format!("outcomes sum to identity only within {dev:e}")));
        }
        Ok(Self { outcomes })
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_basis(u: &UnitaryMatrix) -> Self {
        let m = u.matrix();
        let outcomes = (0..m.ncols()).map(|j| projector(&m.column(j).into_owned())).collect();
        Self { outcomes }
    }

    pub fn computational(d: usize) -> Self {
        Self::from_basis(&UnitaryMatrix::identity(d))
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[CMatrix] {
        &self.outcomes
    }

    pub fn into_outcomes(self) -> Vec<CMatrix> {
        self.outcomes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    m: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let d = check_square(&m, "unitary")?;
        let dev = max_abs(&(m.adjoint() * &m - identity(d)));
        if dev > UNITARY_TOL {
            return Err(Error::ConstraintViolation(format!("U†U deviates from identity by {dev:e}")));
        }
        Ok(Self { m })
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn identity(d: usize) -> Self {
        Self { m: identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn kron(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        Self { m: self.m.kronecker(&other.m) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Locality {
    Entangled,
    Product(Vec<usize>),
}

/// K orthonormal bases, each stored as a unitary whose columns are the basis kets.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    dim: usize,
    bases: Vec<UnitaryMatrix>,
    locality: Locality,
}

impl BasisSet {
    pub fn new(dim: usize, locality: Locality) -> Result<Self> {
        if let Locality::Product(dims) = &locality {
            if dims.iter().product::<usize>() != dim || dims.contains(&0) {
                return Err(Error::InvalidDimension(format!("local dims {dims:?} do not factor {dim}")));
            }
        }
        Ok(Self { dim, bases: Vec::new(), locality })
    }

    pub fn push(&mut self, u: UnitaryMatrix) -> Result<()> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!("basis of dim {} in set of dim {}", u.dim(), self.dim)));
        }
        self.bases.push(u);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bases(&self) -> &[UnitaryMatrix] {
        &self.bases
    }

    pub fn locality(&self) -> &Locality {
        &self.locality
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }
}

fn clip_probabilities(mut p: Vec<f64>) -> Vec<f64> {
    for x in p.iter_mut() {
        if *x < 0.0 && *x >= -1e-10 {
            *x = 0.0;
        }
    }
    p
}

/// p_j = tr(ρ Π_j).
pub fn born_probabilities(rho: &DensityMatrix, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch(format!("state {} vs POVM {}", rho.dim(), povm.dim())));
    }
    let p = povm.outcomes().iter().map(|pi| super::linalg::trace_product_re(pi, rho.matrix())).collect();
    Ok(clip_probabilities(p))
}

/// p_j = ⟨b_j|ρ|b_j⟩ for the columns of U.
pub fn born_probabilities_basis(rho: &DensityMatrix, u: &UnitaryMatrix) -> Result<Vec<f64>> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch(format!("state {} vs basis {}", rho.dim(), u.dim())));
    }
    let m = u.matrix();
    let rm = rho.matrix() * m;
    let p = (0..m.ncols())
        .map(|j| {
            let mut s = c(0.0, 0.0);
            for i in 0..m.nrows() {
                s += m[(i, j)].conj() * rm[(i, j)];
            }
            s.re
        })
        .collect();
    Ok(clip_probabilities(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_examples() {
        let z = DensityMatrix::basis_state(2, 0);
        let o = DensityMatrix::basis_state(2, 1);
        let mix = DensityMatrix::maximally_mixed(2);
        assert!((fidelity(&z, &z).unwrap() - 1.0).abs() < 1e-9);
        assert!(fidelity(&z, &o).unwrap().abs() < 1e-9);
        assert!((fidelity(&z, &mix).unwrap() - 0.5).abs() < 1e-9);
        assert!(fidelity(&z, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&DensityMatrix::basis_state(3, 1)).abs() < 1e-9);
        let mix = DensityMatrix::maximally_mixed(4);
        assert!((von_neumann_entropy(&mix) - 4f64.ln()).abs() < 1e-9);
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(0.5, 0.0);
        m[(1, 1)] = c(0.5, 0.0);
        let r = DensityMatrix::new(m).unwrap();
        assert!((von_neumann_entropy(&r) - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn density_validation() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.2, 0.0);
        m[(1, 1)] = c(-0.2, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = c(1.0, 0.0);
        h[(0, 1)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(h).is_err());
    }

    #[test]
    fn born_examples() {
        let mix = DensityMatrix::maximally_mixed(3);
        let p = born_probabilities(&mix, &Povm::computational(3)).unwrap();
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let z = DensityMatrix::basis_state(3, 0);
        let p = born_probabilities_basis(&z, &UnitaryMatrix::identity(3)).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        // |⟨φ₁|0⟩|² for φ₁ with Bloch vector (−1, 1, 1)/√3
        let s = 1.0 / 3f64.sqrt();
        let phi = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.5 * (1.0 + s), 0.0), c(-0.5 * s, -0.5 * s), c(-0.5 * s, 0.5 * s), c(0.5 * (1.0 - s), 0.0)],
        );
        let rest = identity(2) - &phi;
        let z2 = DensityMatrix::basis_state(2, 0);
        let p = born_probabilities(&z2, &Povm::new(vec![phi, rest]).unwrap()).unwrap();
        assert!((p[0] - 0.788675134594813).abs() < 1e-12);
    }

    #[test]
    fn basis_set_checks_factorization() {
        assert!(BasisSet::new(6, Locality::Product(vec![2, 3])).is_ok());
        assert!(BasisSet::new(6, Locality::Product(vec![2, 2])).is_err());
        let mut b = BasisSet::new(2, Locality::Entangled).unwrap();
        assert!(b.push(UnitaryMatrix::identity(3)).is_err());
        b.push(UnitaryMatrix::identity(2)).unwrap();
        assert_eq!(b.len(), 1);
    }
}
