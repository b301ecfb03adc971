//! Quantum processes on a d-level system: Kraus, Choi and chi forms.
//!
//! Conventions: the Choi operator is ρ_Φ = Σ_{jk} |j⟩⟨k| ⊗ Φ(|j⟩⟨k|) with
//! tr ρ_Φ = d and ptr₂ ρ_Φ = 1 for trace-preserving Φ. The chi matrix uses the
//! operator basis Γ_l = |j⟩⟨k|, l = jd + k.

use crate::error::{Error, Result};
use crate::qcore::linalg::{
    c, eigh, hermitian_part, identity, kron, max_abs, numerical_rank, partial_trace, psd_inv_sqrt, trace, CMatrix,
    CVector, Subsystem,
};
use crate::qcore::random::{gaussian_matrix, Rng};
use crate::qcore::types::{check_psd, fidelity, DensityMatrix};

/// Tolerance of the trace-preservation checks.
pub const TP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    d: usize,
    ops: Vec<CMatrix>,
}

impl KrausSet {
    /// Validated trace-preserving set: Σ K†K = 1 within 1e-9.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let k = Self::new_non_tp(ops)?;
        if !k.is_trace_preserving() {
            return Err(Error::ConstraintViolation("Σ K†K differs from the identity".into()));
        }
        Ok(k)
    }

    /// Any set of equal-size square matrices.
    pub fn new_non_tp(ops: Vec<CMatrix>) -> Result<Self> {
        let d = ops.first().map(|k| k.nrows()).ok_or_else(|| Error::InvalidDimension("no Kraus operators".into()))?;
        if d == 0 || ops.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::DimensionMismatch("Kraus operators must be square and of one size".into()));
        }
        Ok(Self { d, ops })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn is_trace_preserving(&self) -> bool {
        let s = self.ops.iter().fold(CMatrix::zeros(self.d, self.d), |a, k| a + k.adjoint() * k);
        max_abs(&(s - identity(self.d))) <= TP_TOL
    }

    /// Σ K ρ K†
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.d {
            return Err(Error::DimensionMismatch(format!("state is {}-dimensional, channel {}", rho.nrows(), self.d)));
        }
        Ok(hermitian_part(&self.ops.iter().fold(CMatrix::zeros(self.d, self.d), |a, k| a + k * rho * k.adjoint())))
    }
}

fn check_square(m: &CMatrix, d: usize) -> Result<()> {
    if m.nrows() != d * d || m.ncols() != d * d {
        return Err(Error::DimensionMismatch(format!("expected {}x{}, got {}x{}", d * d, d * d, m.nrows(), m.ncols())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOperator {
    d: usize,
    m: CMatrix,
}

impl ChoiOperator {
    /// Hermitian, PSD and ptr₂ = 1 within 1e-9.
    pub fn new(m: CMatrix, d: usize) -> Result<Self> {
        check_square(&m, d)?;
        check_psd(&m, "Choi operator")?;
        let p = partial_trace(&m, d, d, Subsystem::Second)?;
        if max_abs(&(p - identity(d))) > TP_TOL {
            return Err(Error::ConstraintViolation("ptr₂ of the Choi operator is not the identity".into()));
        }
        Ok(Self { d, m })
    }

    pub(crate) fn new_unchecked(m: CMatrix, d: usize) -> Self {
        Self { d, m }
    }

    /// Nearest-looking valid Choi operator: PSD projection then ptr₂ renormalisation
    /// (1 ⊗ … sandwich with (ptr₂)^{-1/2} ⊗ 1).
    pub fn from_approx(m: &CMatrix, d: usize) -> Result<Self> {
        check_square(m, d)?;
        let p = crate::qcore::linalg::psd_project(m);
        let w = kron(&psd_inv_sqrt(&partial_trace(&p, d, d, Subsystem::Second)?, 1e-14), &identity(d));
        let out = hermitian_part(&(&w * p * &w));
        Ok(Self { d, m: out })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.m)
    }

    pub fn is_trace_preserving(&self) -> bool {
        partial_trace(&self.m, self.d, self.d, Subsystem::Second)
            .map(|p| max_abs(&(p - identity(self.d))) <= TP_TOL)
            .unwrap_or(false)
    }

    /// ρ_Φ / d as a density matrix on d².
    pub fn normalized_state(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_approx(&(&self.m / c(self.d as f64, 0.0)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiOperator {
    d: usize,
    m: CMatrix,
}

impl ChiOperator {
    /// Hermitian, PSD and Σ χ_{ll'} Γ_{l'}†Γ_l = 1 within 1e-9.
    pub fn new(m: CMatrix, d: usize) -> Result<Self> {
        check_square(&m, d)?;
        check_psd(&m, "chi matrix")?;
        let out = Self { d, m };
        if !out.is_trace_preserving() {
            return Err(Error::ConstraintViolation("chi matrix is not trace preserving".into()));
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Σ_{ll'} χ_{ll'} Γ_{l'}† Γ_l
    pub fn tp_operator(&self) -> CMatrix {
        // Γ_{l'}†Γ_l = |k'⟩⟨j'|j⟩⟨k| = δ_{jj'} |k'⟩⟨k|
        let d = self.d;
        let mut out = CMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                for kp in 0..d {
                    out[(kp, k)] += self.m[(j * d + k, j * d + kp)];
                }
            }
        }
        out
    }

    pub fn is_trace_preserving(&self) -> bool {
        max_abs(&(self.tp_operator() - identity(self.d))) <= TP_TOL
    }
}

/// Σ_j |j⟩|j⟩ / √d
pub fn maximally_entangled_ket(d: usize) -> Result<CVector> {
    if d < 2 {
        return Err(Error::InvalidDimension("d must be at least 2".into()));
    }
    let mut v = CVector::zeros(d * d);
    let a = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        v[j * d + j] = c(a, 0.0);
    }
    Ok(v)
}

/// (1 ⊗ K)|ME⟩√d: entry (j, i) ↦ K_{ij}.
fn choi_vector(k: &CMatrix) -> CVector {
    let d = k.nrows();
    CVector::from_fn(d * d, |idx, _| k[(idx % d, idx / d)])
}

/// Expansion coefficients of K in the Γ basis: entry jd + k ↦ K_{jk}.
fn chi_vector(k: &CMatrix) -> CVector {
    let d = k.nrows();
    CVector::from_fn(d * d, |idx, _| k[(idx / d, idx % d)])
}

pub fn kraus_to_choi(k: &KrausSet) -> Result<ChoiOperator> {
    if !k.is_trace_preserving() {
        return Err(Error::ConstraintViolation("Kraus set is not trace preserving".into()));
    }
    let n = k.d * k.d;
    let m = k.ops.iter().fold(CMatrix::zeros(n, n), |a, op| {
        let v = choi_vector(op);
        a + &v * v.adjoint()
    });
    Ok(ChoiOperator::new_unchecked(hermitian_part(&m), k.d))
}

pub fn kraus_to_chi(k: &KrausSet) -> Result<ChiOperator> {
    if !k.is_trace_preserving() {
        return Err(Error::ConstraintViolation("Kraus set is not trace preserving".into()));
    }
    let n = k.d * k.d;
    let m = k.ops.iter().fold(CMatrix::zeros(n, n), |a, op| {
        let v = chi_vector(op);
        a + &v * v.adjoint()
    });
    Ok(ChiOperator { d: k.d, m: hermitian_part(&m) })
}

/// U = Σ_l |e_l⟩⟨l| with |e_l⟩ = (1 ⊗ Γ_l)|ME⟩√d. For Γ_l = |j⟩⟨k| this is |k⟩|j⟩,
/// so U is the swap permutation.
pub fn transformation_unitary(d: usize) -> CMatrix {
    let n = d * d;
    let mut u = CMatrix::zeros(n, n);
    for j in 0..d {
        for k in 0..d {
            u[(k * d + j, j * d + k)] = c(1.0, 0.0);
        }
    }
    u
}

pub fn chi_to_choi(chi: &ChiOperator) -> ChoiOperator {
    let u = transformation_unitary(chi.d);
    ChoiOperator::new_unchecked(&u * &chi.m * u.adjoint(), chi.d)
}

pub fn choi_to_chi(choi: &ChoiOperator) -> ChiOperator {
    let u = transformation_unitary(choi.d);
    ChiOperator { d: choi.d, m: u.adjoint() * &choi.m * &u }
}

/// ρ_out = ptr₁(ρ_Φ (ρ_inᵀ ⊗ 1))
pub fn apply_channel_choi(choi: &ChoiOperator, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    let d = choi.d;
    if rho_in.dim() != d {
        return Err(Error::DimensionMismatch(format!("state is {}-dimensional, channel {}", rho_in.dim(), d)));
    }
    let prod = &choi.m * kron(&rho_in.matrix().transpose(), &identity(d));
    let out = hermitian_part(&partial_trace(&prod, d, d, Subsystem::First)?);
    DensityMatrix::new(out.clone()).or_else(|_| DensityMatrix::from_approx(&out))
}

/// Kraus operators √p₁σx, √p₂σy, √p₃σz, √(1−p₁−p₂−p₃) 1.
pub fn depolarizing_channel(p1: f64, p2: f64, p3: f64) -> Result<KrausSet> {
    let p0 = 1.0 - p1 - p2 - p3;
    if [p1, p2, p3].iter().any(|p| !(p.is_finite() && *p >= 0.0)) || p0 < -1e-15 {
        return Err(Error::InvalidProbabilities(format!("({p1}, {p2}, {p3})")));
    }
    let sx = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let sy = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let sz = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let s = |p: f64| c(p.max(0.0).sqrt(), 0.0);
    KrausSet::new(vec![sx * s(p1), sy * s(p2), sz * s(p3), identity(2) * s(p0)])
}

/// K_m = M_m S^{-1/2} with S = Σ M_m†M_m for r Gaussian d×d matrices M_m.
pub fn random_rank_r_process(d: usize, r: usize, rng: &mut Rng) -> Result<KrausSet> {
    if d < 2 {
        return Err(Error::InvalidDimension("d must be at least 2".into()));
    }
    if r == 0 || r > d * d {
        return Err(Error::InvalidRank(format!("r={r} outside 1..={}", d * d)));
    }
    let ms: Vec<CMatrix> = (0..r).map(|_| gaussian_matrix(d, d, rng)).collect();
    let s = ms.iter().fold(CMatrix::zeros(d, d), |a, m| a + m.adjoint() * m);
    let w = psd_inv_sqrt(&s, 0.0);
    KrausSet::new(ms.iter().map(|m| m * &w).collect())
}

/// p = ⟨κ|U† χ U|κ⟩ / d
pub fn rotated_diagonal_probability(chi: &CMatrix, u: &CMatrix, kappa: usize) -> Result<f64> {
    let n = chi.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch("chi and U must both be d²×d²".into()));
    }
    if kappa >= n {
        return Err(Error::IndexOutOfRange(format!("κ={kappa} outside 0..{n}")));
    }
    let col = u.column(kappa);
    let v = chi * col;
    let p = col.dotc(&v).re / d as f64;
    Ok(p.clamp(0.0, 1.0))
}

/// Γ'_κ = Σ_l U_{lκ} Γ_l, the d×d operator behind column κ of U.
pub fn rotated_basis_operator(u: &CMatrix, kappa: usize) -> Result<CMatrix> {
    let n = u.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || kappa >= u.ncols() {
        return Err(Error::IndexOutOfRange(format!("κ={kappa}")));
    }
    Ok(CMatrix::from_fn(d, d, |j, k| u[(j * d + k, kappa)]))
}

/// Largest singular pair of Γ' = Σ |b_m⟩ λ_m ⟨a_m|: returns (|a₁⟩⟨a₁|, |b₁⟩⟨b₁|).
/// |a₁⟩ is the top eigenvector of Γ'†Γ' (ties go to the one produced by the
/// phase-fixed eigendecomposition, first non-negligible amplitude real positive),
/// |b₁⟩ = Γ'|a₁⟩/λ₁.
pub fn sv_probe_pair(gamma: &CMatrix) -> Result<(DensityMatrix, CMatrix)> {
    let d = gamma.nrows();
    if d == 0 || gamma.ncols() != d {
        return Err(Error::DimensionMismatch("Γ' must be square".into()));
    }
    if max_abs(gamma) == 0.0 {
        return Err(Error::ConstraintViolation("Γ' is zero".into()));
    }
    let e = eigh(&(gamma.adjoint() * gamma));
    let a = e.vectors.column(0).into_owned();
    let mut b = gamma * &a;
    let l = b.norm();
    if l <= 1e-300 {
        return Err(Error::ConstraintViolation("Γ' has no resolvable singular value".into()));
    }
    b /= c(l, 0.0);
    let mut bv: Vec<_> = b.iter().copied().collect();
    crate::qcore::linalg::fix_phase(&mut bv);
    let b = CVector::from_vec(bv);
    Ok((DensityMatrix::pure(&a)?, hermitian_part(&(&b * b.adjoint()))))
}

/// Fidelity between two channels, F(ρ_Φ/d, ρ_Ψ/d).
pub fn process_fidelity(a: &ChoiOperator, b: &ChoiOperator) -> Result<f64> {
    if a.d != b.d {
        return Err(Error::DimensionMismatch("channels of different dimension".into()));
    }
    fidelity(&a.normalized_state()?, &b.normalized_state()?)
}

/// tr χ = d for trace-preserving chi matrices.
pub fn chi_trace(chi: &ChiOperator) -> f64 {
    trace(&chi.m).re
}
