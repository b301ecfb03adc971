//! Reference SDP backend: an infeasible-start primal–dual interior-point method
//! (HKM direction, Mehrotra predictor–corrector) on complex Hermitian cones,
//! followed by a low-rank Gauss–Newton polish of the primal solution.

use nalgebra::{Cholesky, DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, eigh, hermitian_part, trace_product_re, CMatrix};

use super::program::{
    block_offsets, blocks_to_coords, coords_to_blocks, ConicProgram, ReducedConstraints,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// stopped short of the requested tolerances; the best iterate is returned
    Inaccurate,
    Infeasible,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Inaccurate => "inaccurate",
            SolveStatus::Infeasible => "infeasible",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<CMatrix>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// largest equality violation of `x` on the original constraints
    pub residual: f64,
    pub polished: bool,
}

/// Anything that can solve a [`ConicProgram`].
pub trait SdpBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, program: &ConicProgram) -> Result<SdpSolution>;
}

#[derive(Debug, Clone)]
pub struct InteriorPoint {
    pub tol: f64,
    pub max_iters: usize,
    pub polish: bool,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 120, polish: true }
    }
}

impl InteriorPoint {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

impl SdpBackend for InteriorPoint {
    fn name(&self) -> &str {
        "interior-point"
    }

    fn solve(&self, program: &ConicProgram) -> Result<SdpSolution> {
        let red = program.set.reduced()?;
        let blocks = program.blocks().to_vec();
        if red.inconsistency > 1e-8 {
            return Ok(SdpSolution {
                x: blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect(),
                primal_objective: f64::NAN,
                dual_objective: f64::NAN,
                status: SolveStatus::Infeasible,
                iterations: 0,
                residual: f64::INFINITY,
                polished: false,
            });
        }
        let out = ipm(red, &blocks, &program.objective, self.tol, self.max_iters)?;
        let mut x = out.x.clone();
        let mut polished = false;
        if self.polish {
            if let Some(p) = polish(red, &blocks, program, &out) {
                x = p;
                polished = true;
            }
        }
        let residual = program.max_residual(&x);
        let primal_objective = program.objective_value(&x);
        Ok(SdpSolution {
            x,
            primal_objective,
            dual_objective: out.dobj,
            status: out.status,
            iterations: out.iters,
            residual,
            polished,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct IpmOutput {
    pub x: Vec<CMatrix>,
    pub pobj: f64,
    pub dobj: f64,
    pub mu: f64,
    pub pinf: f64,
    pub iters: usize,
    pub status: SolveStatus,
}

struct BlockFactors {
    /// X = R R†, R lower triangular
    r_adj: CMatrix,
    /// S⁻¹ = T T†, T = L^{-†} with S = L L†
    t: CMatrix,
    s_inv: CMatrix,
}

fn lower_inverse(l: &CMatrix) -> CMatrix {
    let n = l.nrows();
    let mut inv = CMatrix::identity(n, n);
    l.solve_lower_triangular_mut(&mut inv);
    inv
}

fn factor(x: &[CMatrix], s: &[CMatrix]) -> Option<Vec<BlockFactors>> {
    x.iter()
        .zip(s)
        .map(|(xb, sb)| {
            let cx = Cholesky::new(hermitian_part(xb))?;
            let cs = Cholesky::new(hermitian_part(sb))?;
            let linv = lower_inverse(&cs.l());
            let t = linv.adjoint();
            let s_inv = &t * &linv;
            Some(BlockFactors { r_adj: cx.l().adjoint(), t, s_inv })
        })
        .collect()
}

/// Largest α ≤ cap with X + αΔ ⪰ 0, given X = R R†.
fn max_step(r_adj: &CMatrix, delta: &CMatrix, cap: f64) -> f64 {
    let r = r_adj.adjoint();
    let rinv = lower_inverse(&r);
    let w = &rinv * delta * rinv.adjoint();
    let lo = crate::qcore::linalg::min_eigenvalue(&w);
    if lo >= 0.0 {
        cap
    } else {
        (-1.0 / lo).min(cap)
    }
}

fn inner(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| trace_product_re(x, y)).sum()
}

fn sym_product(a: &CMatrix, b: &CMatrix, cmat: &CMatrix) -> CMatrix {
    hermitian_part(&(a * b * cmat))
}

pub(crate) fn ipm(
    red: &ReducedConstraints,
    blocks: &[usize],
    objective: &[CMatrix],
    tol: f64,
    max_iters: usize,
) -> Result<IpmOutput> {
    let k = red.coords.nrows();
    let a = &red.coords;
    let b = &red.rhs;
    let off = block_offsets(blocks);
    let n_total: usize = blocks.iter().sum();
    let cvec = blocks_to_coords(objective, blocks);
    let bnorm = b.norm();
    let cnorm = cvec.norm();

    let alpha0 = (1.0 + bnorm) / (n_total as f64).sqrt();
    let beta0 = 1.0 + cnorm / (n_total as f64).sqrt();
    let mut x: Vec<CMatrix> = blocks.iter().map(|&n| CMatrix::identity(n, n) * c(alpha0, 0.0)).collect();
    let mut s: Vec<CMatrix> = blocks.iter().map(|&n| CMatrix::identity(n, n) * c(beta0, 0.0)).collect();
    let mut y = DVector::<f64>::zeros(k);

    let mut best: Option<(f64, IpmOutput)> = None;
    let mut stall = 0usize;
    let mut iters = 0usize;
    let mut status = SolveStatus::Inaccurate;

    for it in 0..max_iters {
        iters = it + 1;
        let xv = blocks_to_coords(&x, blocks);
        let sv = blocks_to_coords(&s, blocks);
        let rp = b - a * &xv;
        let rd = &cvec - a.tr_mul(&y) - &sv;
        let mu = xv.dot(&sv) / n_total as f64;
        let pobj = cvec.dot(&xv);
        let dobj = b.dot(&y);
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.norm() / (1.0 + bnorm);
        let dinf = rd.norm() / (1.0 + cnorm);
        let merit = relgap.max(pinf).max(dinf).max(mu / (1.0 + pobj.abs()));
        let snapshot = IpmOutput { x: x.clone(), pobj, dobj, mu, pinf, iters, status: SolveStatus::Inaccurate };
        match &best {
            Some((m, _)) if *m <= merit * 0.95 => stall += 1,
            _ => {
                best = Some((merit, snapshot));
                stall = 0;
            }
        }
        if relgap < tol && pinf < tol && dinf < tol {
            status = SolveStatus::Optimal;
            best = Some((merit, IpmOutput { status: SolveStatus::Optimal, ..best.unwrap().1 }));
            break;
        }
        if stall >= 6 || mu < 1e-22 {
            break;
        }
        let Some(fac) = factor(&x, &s) else { break };

        // Schur complement M_ij = Re tr(A_i X A_j S⁻¹) = Re⟨B_i, B_j⟩, B_j = R† A_j T
        let total_sq: usize = blocks.iter().map(|n| n * n).sum();
        let mut p = DMatrix::<f64>::zeros(2 * total_sq, k);
        for j in 0..k {
            let row = a.row(j);
            let mut base = 0;
            for (bi, &n) in blocks.iter().enumerate() {
                let seg: Vec<f64> = row.columns(off[bi], n * n).iter().copied().collect();
                let aj = super::program::coords_to_herm(&seg, n);
                let bj = &fac[bi].r_adj * aj * &fac[bi].t;
                for (q, z) in bj.iter().enumerate() {
                    p[(base + q, j)] = z.re;
                    p[(base + n * n + q, j)] = z.im;
                }
                base += 2 * n * n;
            }
        }
        let mut m = p.tr_mul(&p);
        let chol = {
            let mut reg = 0.0;
            let scale = (0..k).map(|i| m[(i, i)]).fold(0.0, f64::max).max(1e-300);
            loop {
                if let Some(ch) = Cholesky::new(m.clone()) {
                    break Some(ch);
                }
                reg = if reg == 0.0 { 1e-15 * scale } else { reg * 100.0 };
                if reg > 1e-4 * scale {
                    break None;
                }
                for i in 0..k {
                    m[(i, i)] += reg;
                }
            }
        };
        let Some(chol) = chol else { break };

        let rd_blocks = coords_to_blocks(rd.as_slice(), blocks);
        // X Rd S⁻¹ term shared by predictor and corrector
        let h2: Vec<CMatrix> = (0..blocks.len()).map(|bi| sym_product(&x[bi], &rd_blocks[bi], &fac[bi].s_inv)).collect();
        let a_h2 = a * blocks_to_coords(&h2, blocks);

        let direction = |rc_sinv: &[CMatrix]| -> (Vec<CMatrix>, DVector<f64>, Vec<CMatrix>) {
            let h1: Vec<CMatrix> = rc_sinv.iter().map(hermitian_part).collect();
            let rhs = &rp - a * blocks_to_coords(&h1, blocks) + &a_h2;
            let dy = chol.solve(&rhs);
            let ds_vec = &rd - a.tr_mul(&dy);
            let ds = coords_to_blocks(ds_vec.as_slice(), blocks);
            let dx: Vec<CMatrix> =
                (0..blocks.len()).map(|bi| &h1[bi] - sym_product(&x[bi], &ds[bi], &fac[bi].s_inv)).collect();
            (dx, dy, ds)
        };

        let steps = |dx: &[CMatrix], ds: &[CMatrix]| -> (f64, f64) {
            let mut ap = 1.0f64;
            let mut ad = 1.0f64;
            for bi in 0..blocks.len() {
                ap = ap.min(max_step(&fac[bi].r_adj, &dx[bi], 1e6));
                let ls = Cholesky::new(hermitian_part(&s[bi])).map(|ch| ch.l().adjoint());
                if let Some(ls) = ls {
                    ad = ad.min(max_step(&ls, &ds[bi], 1e6));
                } else {
                    ad = 0.0;
                }
            }
            (ap, ad)
        };

        // predictor
        let rc_aff: Vec<CMatrix> = x.iter().map(|xb| -xb.clone()).collect();
        let (dx_a, _dy_a, ds_a) = direction(&rc_aff);
        let (ap_a, ad_a) = steps(&dx_a, &ds_a);
        let x_aff: Vec<CMatrix> = x.iter().zip(&dx_a).map(|(xb, d)| xb + d * c(ap_a, 0.0)).collect();
        let s_aff: Vec<CMatrix> = s.iter().zip(&ds_a).map(|(sb, d)| sb + d * c(ad_a, 0.0)).collect();
        let mu_aff = inner(&x_aff, &s_aff) / n_total as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };

        // corrector
        let rc: Vec<CMatrix> = (0..blocks.len())
            .map(|bi| {
                &fac[bi].s_inv * c(sigma * mu, 0.0) - &x[bi] - &dx_a[bi] * &ds_a[bi] * &fac[bi].s_inv
            })
            .collect();
        let (dx, dy, ds) = direction(&rc);
        let (ap_max, ad_max) = steps(&dx, &ds);
        let gamma = 0.9 + 0.09 * ap_a.min(ad_a);
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            break;
        }
        for bi in 0..blocks.len() {
            x[bi] = hermitian_part(&(&x[bi] + &dx[bi] * c(ap, 0.0)));
            s[bi] = hermitian_part(&(&s[bi] + &ds[bi] * c(ad, 0.0)));
        }
        y += dy * ad;
    }
    let (_, mut out) = best.ok_or_else(|| Error::Solver("no iterate".into()))?;
    out.iters = iters;
    if status == SolveStatus::Optimal {
        out.status = SolveStatus::Optimal;
    }
    Ok(out)
}

/// Per-block orthonormal basis V of the face forced by zero-valued data: a
/// constraint tr(A X) = 0 with A ⪰ 0 implies A X = 0, so X = V Y V† with V
/// spanning the common kernel of all such A.
fn zero_data_faces(program: &ConicProgram) -> Vec<CMatrix> {
    let blocks = program.blocks();
    let mut acc: Vec<CMatrix> = blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect();
    for con in &program.set.constraints {
        if con.terms.len() != 1 || con.rhs.abs() > 1e-13 {
            continue;
        }
        let t = &con.terms[0];
        let e = eigh(&t.op);
        let top = e.values[0];
        if !(top > 0.0) || *e.values.last().unwrap() < -1e-12 * top {
            continue;
        }
        acc[t.block] += &t.op / c(top, 0.0);
    }
    acc.iter()
        .map(|a| {
            let n = a.nrows();
            let e = eigh(a);
            let keep: Vec<usize> = (0..n).filter(|&j| e.values[j] <= 1e-10).collect();
            let mut v = CMatrix::zeros(n, keep.len());
            for (k, &j) in keep.iter().enumerate() {
                v.set_column(k, &e.vectors.column(j));
            }
            v
        })
        .collect()
}

/// Restore the equalities exactly on the low-rank manifold X = V M M† V† near
/// the interior-point solution, V the zero-data face. Candidates are rank
/// profiles read off the spectrum; a candidate is kept only if it stays close to
/// the interior-point iterate and does not degrade the objective beyond the
/// solver's own accuracy.
fn polish(red: &ReducedConstraints, blocks: &[usize], program: &ConicProgram, out: &IpmOutput) -> Option<Vec<CMatrix>> {
    let faces = zero_data_faces(program);
    if faces.iter().any(|v| v.ncols() == 0) {
        return None;
    }
    let eig: Vec<_> = out.x.iter().zip(&faces).map(|(x, v)| eigh(&(v.adjoint() * x * v))).collect();
    let top = eig.iter().flat_map(|e| e.values.iter().copied()).fold(0.0, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let mut profiles: Vec<Vec<usize>> = Vec::new();
    for p in 2..=12 {
        let tau = 10f64.powi(-p);
        let prof: Vec<usize> = eig.iter().map(|e| e.values.iter().filter(|&&v| v > tau * top).count()).collect();
        if !profiles.contains(&prof) {
            profiles.push(prof);
        }
    }
    let full: Vec<usize> = faces.iter().map(|v| v.ncols()).collect();
    if !profiles.contains(&full) {
        profiles.push(full);
    }
    let scale = 1.0 + out.x.iter().map(crate::qcore::linalg::frobenius).sum::<f64>();
    let move_tol = 1e-3 * scale;
    let obj_slack = 1e-9 * (1.0 + out.pobj.abs()) + 10.0 * (out.pobj - out.dobj).abs() + 10.0 * out.mu.sqrt() + out.pinf;
    for prof in profiles {
        if prof.iter().sum::<usize>() == 0 {
            continue;
        }
        let m0: Vec<CMatrix> = eig
            .iter()
            .zip(&prof)
            .map(|(e, &r)| {
                let n = e.values.len();
                let mut l = CMatrix::zeros(n, r);
                for j in 0..r {
                    let s = e.values[j].max(0.0).sqrt();
                    for i in 0..n {
                        l[(i, j)] = e.vectors[(i, j)] * s;
                    }
                }
                l
            })
            .collect();
        let Some(m) = gauss_newton(red, blocks, &faces, m0) else { continue };
        let xt: Vec<CMatrix> =
            m.iter().zip(&faces).map(|(mb, v)| hermitian_part(&(v * mb * mb.adjoint() * v.adjoint()))).collect();
        let moved: f64 = xt.iter().zip(&out.x).map(|(a, b)| crate::qcore::linalg::frobenius(&(a - b))).sum();
        if moved > move_tol {
            continue;
        }
        let f = program.objective_value(&xt);
        if f > out.pobj + obj_slack {
            continue;
        }
        return Some(xt);
    }
    None
}

/// Solve A(V M M† V†) = b for M by Gauss–Newton with minimum-norm steps.
fn gauss_newton(red: &ReducedConstraints, blocks: &[usize], faces: &[CMatrix], mut l: Vec<CMatrix>) -> Option<Vec<CMatrix>> {
    let k = red.coords.nrows();
    let off = block_offsets(blocks);
    let target = 1e-14 * (1.0 + red.rhs.amax());
    let residual = |l: &[CMatrix]| -> DVector<f64> {
        let x: Vec<CMatrix> = l.iter().zip(faces).map(|(lb, v)| v * lb * lb.adjoint() * v.adjoint()).collect();
        &red.coords * blocks_to_coords(&x, blocks) - &red.rhs
    };
    let mut res = residual(&l);
    let mut rn = res.amax();
    // per-block Hermitian constraint slices, built once
    let rows: Vec<Vec<CMatrix>> = (0..k)
        .map(|i| {
            let row = red.coords.row(i);
            blocks
                .iter()
                .enumerate()
                .map(|(bi, &n)| {
                    let seg: Vec<f64> = row.columns(off[bi], n * n).iter().copied().collect();
                    let v = &faces[bi];
                    v.adjoint() * super::program::coords_to_herm(&seg, n) * v
                })
                .collect()
        })
        .collect();
    for _ in 0..40 {
        if rn <= target {
            return Some(l);
        }
        let nparams: usize = l.iter().map(|lb| 2 * lb.len()).sum();
        let mut jac = DMatrix::<f64>::zeros(k, nparams);
        for i in 0..k {
            let mut col = 0;
            for (bi, lb) in l.iter().enumerate() {
                let al = &rows[i][bi] * lb;
                for z in al.iter() {
                    jac[(i, col)] = 2.0 * z.re;
                    jac[(i, col + 1)] = 2.0 * z.im;
                    col += 2;
                }
            }
        }
        let svd = SVD::new(jac, true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let step = svd.solve(&res, 1e-12 * smax.max(1e-300)).ok()?;
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..8 {
            let trial: Vec<CMatrix> = {
                let mut col = 0;
                l.iter()
                    .map(|lb| {
                        let mut nl = lb.clone();
                        for z in nl.iter_mut() {
                            *z -= c(t * step[col], t * step[col + 1]);
                            col += 2;
                        }
                        nl
                    })
                    .collect()
            };
            let r2 = residual(&trial);
            let n2 = r2.amax();
            if n2 < rn {
                l = trial;
                res = r2;
                rn = n2;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if rn <= 1e-12 * (1.0 + red.rhs.amax()) {
        Some(l)
    } else {
        None
    }
}
