//! Conic programs over products of complex Hermitian PSD cones.
//!
//! Minimize Σ_b Re tr(C_b X_b) subject to Σ_b Re tr(A_ib X_b) = b_i and X_b ⪰ 0.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, CMatrix};

/// One Hermitian operator acting on one cone block.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub block: usize,
    pub op: CMatrix,
}

/// Σ_terms Re tr(op · X_block) = rhs
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<Term>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn single(block: usize, op: CMatrix, rhs: f64) -> Self {
        Self { terms: vec![Term { block, op }], rhs }
    }

    pub fn evaluate(&self, x: &[CMatrix]) -> f64 {
        self.terms.iter().map(|t| crate::qcore::linalg::trace_product_re(&t.op, &x[t.block])).sum()
    }
}

/// Equalities reduced to an orthonormal system in real coordinates.
#[derive(Debug, Clone)]
pub struct ReducedConstraints {
    /// k × N, orthonormal rows
    pub coords: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// ‖b − projection of b onto the row space‖, scaled by 1 + ‖b‖
    pub inconsistency: f64,
    pub dropped: usize,
}

#[derive(Debug)]
pub struct ConstraintSet {
    pub blocks: Vec<usize>,
    pub constraints: Vec<LinearConstraint>,
    reduced: OnceLock<std::result::Result<ReducedConstraints, String>>,
}

impl Clone for ConstraintSet {
    fn clone(&self) -> Self {
        Self { blocks: self.blocks.clone(), constraints: self.constraints.clone(), reduced: OnceLock::new() }
    }
}

impl ConstraintSet {
    pub fn new(blocks: Vec<usize>, constraints: Vec<LinearConstraint>) -> Self {
        Self { blocks, constraints, reduced: OnceLock::new() }
    }

    pub fn total_coords(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        block_offsets(&self.blocks)
    }

    /// Orthonormalized constraints, computed once.
    pub fn reduced(&self) -> Result<&ReducedConstraints> {
        self.reduced.get_or_init(|| reduce(self)).as_ref().map_err(|e| Error::Solver(e.clone()))
    }
}

pub fn block_offsets(blocks: &[usize]) -> Vec<usize> {
    let mut off = Vec::with_capacity(blocks.len() + 1);
    let mut acc = 0;
    off.push(0);
    for n in blocks {
        acc += n * n;
        off.push(acc);
    }
    off
}

/// Real coordinates of a Hermitian matrix: diagonal, then √2 Re and √2 Im of the
/// strict upper triangle, so that Re tr(AB) equals the dot product of coordinates.
pub fn herm_to_coords(m: &CMatrix, out: &mut [f64]) {
    let n = m.nrows();
    let s2 = std::f64::consts::SQRT_2;
    let mut k = 0;
    for i in 0..n {
        out[k] = m[(i, i)].re;
        k += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // average the two triangles so non-Hermitian input maps to its Hermitian part
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[k] = s2 * z.re;
            out[k + 1] = s2 * z.im;
            k += 2;
        }
    }
}

pub fn coords_to_herm(v: &[f64], n: usize) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        m[(i, i)] = c(v[k], 0.0);
        k += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let z = c(h * v[k], h * v[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

pub fn blocks_to_coords(x: &[CMatrix], blocks: &[usize]) -> DVector<f64> {
    let off = block_offsets(blocks);
    let mut v = DVector::zeros(off[blocks.len()]);
    for (b, m) in x.iter().enumerate() {
        herm_to_coords(m, &mut v.as_mut_slice()[off[b]..off[b + 1]]);
    }
    v
}

pub fn coords_to_blocks(v: &[f64], blocks: &[usize]) -> Vec<CMatrix> {
    let off = block_offsets(blocks);
    blocks.iter().enumerate().map(|(b, &n)| coords_to_herm(&v[off[b]..off[b + 1]], n)).collect()
}

fn reduce(set: &ConstraintSet) -> std::result::Result<ReducedConstraints, String> {
    let n_coords = set.total_coords();
    let m = set.constraints.len();
    let off = set.offsets();
    if m == 0 {
        return Ok(ReducedConstraints {
            coords: DMatrix::zeros(0, n_coords),
            rhs: DVector::zeros(0),
            inconsistency: 0.0,
            dropped: 0,
        });
    }
    let mut a = DMatrix::<f64>::zeros(m, n_coords);
    let mut b = DVector::<f64>::zeros(m);
    let mut buf = vec![0.0; n_coords];
    for (i, con) in set.constraints.iter().enumerate() {
        for t in &con.terms {
            if t.block >= set.blocks.len() || t.op.nrows() != set.blocks[t.block] {
                return Err(format!("constraint {i} references an invalid block"));
            }
            let lo = off[t.block];
            let hi = off[t.block + 1];
            herm_to_coords(&t.op, &mut buf[lo..hi]);
            for k in lo..hi {
                a[(i, k)] += buf[k];
            }
        }
        b[i] = con.rhs;
    }
    // thin SVD of A; rows below the rank tolerance are dropped and their
    // right-hand sides checked for consistency
    let (u, sv, vt_rows) = if m <= n_coords {
        let svd = SVD::new(a.clone(), true, false);
        let u = svd.u.ok_or("svd failed")?;
        let s = svd.singular_values;
        (u, s, None)
    } else {
        let svd = SVD::new(a.clone(), true, true);
        let u = svd.u.ok_or("svd failed")?;
        let s = svd.singular_values;
        (u, s, svd.v_t)
    };
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Err("all constraints are zero".into());
    }
    let tol = 1e-10 * smax * (m.max(n_coords) as f64).sqrt();
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > tol).collect();
    let k = keep.len();
    let mut coords = DMatrix::<f64>::zeros(k, n_coords);
    let mut rhs = DVector::<f64>::zeros(k);
    let mut proj_b = DVector::<f64>::zeros(m);
    for (r, &i) in keep.iter().enumerate() {
        let ui = u.column(i);
        let ub = ui.dot(&b);
        rhs[r] = ub / sv[i];
        proj_b += ui * ub;
        match &vt_rows {
            Some(vt) => coords.row_mut(r).copy_from(&vt.row(i)),
            None => {
                // v_i = Aᵀ u_i / σ_i
                let vi = a.tr_mul(&ui) / sv[i];
                coords.row_mut(r).copy_from(&vi.transpose());
            }
        }
    }
    let inconsistency = (&b - proj_b).norm() / (1.0 + b.norm());
    Ok(ReducedConstraints { coords, rhs, inconsistency, dropped: m - k })
}

/// A conic program: minimize Σ Re tr(C_b X_b) over the constraint set.
#[derive(Debug, Clone)]
pub struct ConicProgram {
    pub set: Arc<ConstraintSet>,
    pub objective: Vec<CMatrix>,
}

impl ConicProgram {
    pub fn new(set: Arc<ConstraintSet>, objective: Vec<CMatrix>) -> Result<Self> {
        if objective.len() != set.blocks.len() || objective.iter().zip(&set.blocks).any(|(o, &n)| o.nrows() != n) {
            return Err(Error::DimensionMismatch("objective does not match cone blocks".into()));
        }
        Ok(Self { set, objective })
    }

    pub fn feasibility_only(set: Arc<ConstraintSet>) -> Self {
        let objective = set.blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        Self { set, objective }
    }

    pub fn with_objective(&self, objective: Vec<CMatrix>) -> Result<Self> {
        Self::new(self.set.clone(), objective)
    }

    pub fn blocks(&self) -> &[usize] {
        &self.set.blocks
    }

    pub fn objective_value(&self, x: &[CMatrix]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| crate::qcore::linalg::trace_product_re(c, x)).sum()
    }

    /// Largest absolute equality residual at `x`.
    pub fn max_residual(&self, x: &[CMatrix]) -> f64 {
        self.set.constraints.iter().map(|con| (con.evaluate(x) - con.rhs).abs()).fold(0.0, f64::max)
    }

    /// The equivalent program over real symmetric cones of doubled side: each
    /// Hermitian H = P + iQ becomes [[P, −Q], [Q, P]], and all data are halved so
    /// that objective and constraint values are preserved.
    pub fn to_real_embedding(&self) -> ConicProgram {
        let blocks: Vec<usize> = self.set.blocks.iter().map(|n| 2 * n).collect();
        let constraints = self
            .set
            .constraints
            .iter()
            .map(|con| LinearConstraint {
                terms: con.terms.iter().map(|t| Term { block: t.block, op: real_embed(&t.op) * c(0.5, 0.0) }).collect(),
                rhs: con.rhs,
            })
            .collect();
        let objective = self.objective.iter().map(|o| real_embed(o) * c(0.5, 0.0)).collect();
        ConicProgram { set: Arc::new(ConstraintSet::new(blocks, constraints)), objective }
    }
}

/// [[Re H, −Im H], [Im H, Re H]] as a complex matrix with zero imaginary part.
pub fn real_embed(h: &CMatrix) -> CMatrix {
    let n = h.nrows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = c(z.re, 0.0);
            out[(i + n, j + n)] = c(z.re, 0.0);
            out[(i, j + n)] = c(-z.im, 0.0);
            out[(i + n, j)] = c(z.im, 0.0);
        }
    }
    out
}

/// Inverse of [`real_embed`] on a (possibly unstructured) symmetric 2n×2n matrix,
/// averaging the redundant blocks.
pub fn real_extract(m: &CMatrix) -> CMatrix {
    let n = m.nrows() / 2;
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (m[(i, j)].re + m[(i + n, j + n)].re);
            let im = 0.5 * (m[(i + n, j)].re - m[(i, j + n)].re);
            out[(i, j)] = c(re, im);
        }
    }
    out
}
