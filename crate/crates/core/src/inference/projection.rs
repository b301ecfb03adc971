//! Projections onto the physical sets used by the iterative estimators.

use crate::channels::transformation_unitary;
use crate::convex::ObjectKind;
use crate::qcore::linalg::{
    c, eigh, frobenius, hermitian_part, identity, kron, partial_trace, psd_inv_sqrt, psd_project, CMatrix, Subsystem,
};

/// Euclidean projection of `v` onto {x ≥ 0, Σx = total}.
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - total) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Nearest (Frobenius) PSD operator with trace `total`.
pub fn project_state(x: &CMatrix, total: f64) -> CMatrix {
    let e = eigh(x);
    let lam = project_simplex(&e.values, total);
    let mut scaled = e.vectors.clone();
    for (j, l) in lam.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= c(*l, 0.0);
        }
    }
    hermitian_part(&(scaled * e.vectors.adjoint()))
}

fn choi_affine(x: &CMatrix, d: usize) -> CMatrix {
    let p = partial_trace(x, d, d, Subsystem::Second).expect("square");
    let corr = kron(&(p - identity(d)), &identity(d)) / c(d as f64, 0.0);
    x - corr
}

/// PSD ∩ {ptr₂ X = 1}: Dykstra iterations, then the exact renormalisation
/// X ↦ (P^{-1/2} ⊗ 1) X (P^{-1/2} ⊗ 1) with P = ptr₂ X.
pub fn project_choi(x: &CMatrix, d: usize) -> CMatrix {
    let mut cur = hermitian_part(x);
    let mut q = CMatrix::zeros(d * d, d * d);
    for _ in 0..300 {
        let y = choi_affine(&cur, d);
        let next = psd_project(&(&y + &q));
        q = &y + &q - &next;
        let gap = frobenius(&(&next - &y));
        cur = next;
        if gap < 1e-12 {
            break;
        }
    }
    let p = partial_trace(&cur, d, d, Subsystem::Second).expect("square");
    let w = kron(&psd_inv_sqrt(&p, 1e-14), &identity(d));
    hermitian_part(&(&w * cur * &w))
}

/// Same set in the chi representation (unitarily equivalent to Choi).
pub fn project_chi(x: &CMatrix, d: usize) -> CMatrix {
    let u = transformation_unitary(d);
    let choi = project_choi(&(&u * x * u.adjoint()), d);
    hermitian_part(&(u.adjoint() * choi * &u))
}

/// {Π_j ≥ 0, Σ Π_j = 1}: Dykstra iterations, then S^{-1/2} Π_j S^{-1/2}.
pub fn project_povm(x: &[CMatrix]) -> Vec<CMatrix> {
    let m = x.len();
    let d = x[0].nrows();
    let mut cur: Vec<CMatrix> = x.iter().map(hermitian_part).collect();
    let mut q: Vec<CMatrix> = vec![CMatrix::zeros(d, d); m];
    for _ in 0..300 {
        let s = cur.iter().fold(CMatrix::zeros(d, d), |a, b| a + b);
        let corr = (s - identity(d)) / c(m as f64, 0.0);
        let mut gap = 0.0f64;
        for j in 0..m {
            let y = &cur[j] - &corr;
            let next = psd_project(&(&y + &q[j]));
            q[j] = &y + &q[j] - &next;
            gap = gap.max(frobenius(&(&next - &y)));
            cur[j] = next;
        }
        if gap < 1e-12 {
            break;
        }
    }
    let s = cur.iter().fold(CMatrix::zeros(d, d), |a, b| a + b);
    let w = psd_inv_sqrt(&s, 1e-14);
    cur.iter().map(|p| hermitian_part(&(&w * p * &w))).collect()
}

pub fn project(kind: ObjectKind, x: &[CMatrix]) -> Vec<CMatrix> {
    match kind {
        ObjectKind::State { .. } => vec![project_state(&x[0], 1.0)],
        ObjectKind::Choi { d } => vec![project_choi(&x[0], d)],
        ObjectKind::Chi { d } => vec![project_chi(&x[0], d)],
        ObjectKind::Povm { .. } => project_povm(x),
    }
}

/// Centre of the physical set: 1/d, 1/d on d² (Choi and chi), 1/M per outcome.
pub fn maximally_mixed(kind: ObjectKind) -> Vec<CMatrix> {
    match kind {
        ObjectKind::State { d } => vec![identity(d) / c(d as f64, 0.0)],
        ObjectKind::Choi { d } | ObjectKind::Chi { d } => vec![identity(d * d) / c(d as f64, 0.0)],
        ObjectKind::Povm { d, outcomes } => vec![identity(d) / c(outcomes as f64, 0.0); outcomes],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{kraus_to_choi, random_rank_r_process, ChiOperator, ChoiOperator};
    use crate::qcore::linalg::{max_abs, min_eigenvalue};
    use crate::qcore::random::{gaussian_matrix, rng_from_seed};
    use crate::qcore::types::Povm;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn simplex_projection_is_feasible(v in proptest::collection::vec(-5.0f64..5.0, 1..12), t in 0.1f64..3.0) {
            let p = project_simplex(&v, t);
            prop_assert!((p.iter().sum::<f64>() - t).abs() < 1e-10);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn simplex_projection_fixed_points() {
        assert_eq!(project_simplex(&[0.2, 0.8], 1.0), vec![0.2, 0.8]);
        let p = project_simplex(&[2.0, 0.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] == 0.0);
    }

    #[test]
    fn choi_projection_lands_in_the_set_and_fixes_members() {
        let mut rng = rng_from_seed(6);
        let k = random_rank_r_process(2, 2, &mut rng).unwrap();
        let choi = kraus_to_choi(&k).unwrap();
        let back = project_choi(choi.matrix(), 2);
        assert!(max_abs(&(back - choi.matrix())) < 1e-9);
        let g = gaussian_matrix(4, 4, &mut rng);
        let h = hermitian_part(&g);
        let p = project_choi(&h, 2);
        assert!(ChoiOperator::new(p, 2).is_ok());
        let chi = project_chi(&h, 2);
        assert!(ChiOperator::new(chi, 2).is_ok());
    }

    #[test]
    fn povm_projection() {
        let mut rng = rng_from_seed(7);
        let x: Vec<CMatrix> = (0..3).map(|_| hermitian_part(&gaussian_matrix(2, 2, &mut rng))).collect();
        let p = project_povm(&x);
        assert!(Povm::new(p.clone()).is_ok());
        assert!(p.iter().all(|o| min_eigenvalue(o) > -1e-12));
    }
}
