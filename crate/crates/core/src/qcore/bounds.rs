//! Closed-form benchmarks: parameter counts, basis-count bounds and the
//! deterministic constructions they are compared against.

use crate::error::{Error, Result};

use super::linalg::{basis_ket, c, eigvalsh, identity, CMatrix, CVector};
use super::types::Povm;

fn check_rank(d: usize, r: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    if r == 0 || r > d {
        return Err(Error::InvalidRank(format!("r={r} outside 1..={d}")));
    }
    Ok(())
}

/// (2d − r) r − 1 real parameters of a rank-r state.
pub fn rank_r_parameter_count(d: usize, r: usize) -> Result<usize> {
    check_rank(d, r)?;
    Ok((2 * d - r) * r - 1)
}

/// Sufficient number of generic bases, [4r(d−r) − 2]/(d − 1), valid for r ≤ d/2.
pub fn kw_bound(d: usize, r: usize) -> Result<f64> {
    check_rank(d, r)?;
    if d < 2 {
        return Err(Error::InvalidDimension("d must be at least 2".into()));
    }
    if 2 * r > d {
        return Err(Error::OutOfRegime(format!("r={r} exceeds d/2 for d={d}")));
    }
    Ok((4.0 * (r * (d - r)) as f64 - 2.0) / (d as f64 - 1.0))
}

/// 1 + ⌈(r² − r)/(d − 1)⌉ bases once the eigenbasis is among those measured.
///
/// An alternative reading divides by d² − 1 instead of d − 1; the d − 1 form
/// follows from counting d − 1 independent constraints per extra basis.
pub fn k0_bound(d: usize, r: usize) -> Result<usize> {
    check_rank(d, r)?;
    if d < 2 {
        return Err(Error::InvalidDimension("d must be at least 2".into()));
    }
    Ok(1 + (r * r - r).div_ceil(d - 1))
}

/// Outcomes of the element-probing POVM, (2d − r) r + 1.
pub fn bf_outcome_count(d: usize, r: usize) -> Result<usize> {
    check_rank(d, r)?;
    Ok((2 * d - r) * r + 1)
}

/// Element-probing POVM for rank-r states: r projectors |l⟩⟨l| (l < r), the real
/// and imaginary off-diagonal probes 1 + |l⟩⟨m| + h.c. and 1 − i|l⟩⟨m| + h.c. for
/// l < r, m > l, all scaled by one factor c, and the closing outcome 1 − Σ.
///
/// c = min(1/(2d), 1/λ_max(Σ unscaled)) is the largest admissible scale.
pub fn bf_povm(d: usize, r: usize) -> Result<Povm> {
    check_rank(d, r)?;
    let id = identity(d);
    let mut raw: Vec<CMatrix> = Vec::new();
    for l in 0..r {
        let mut p = CMatrix::zeros(d, d);
        p[(l, l)] = c(1.0, 0.0);
        raw.push(p);
    }
    for l in 0..r {
        for m in (l + 1)..d {
            let mut re = id.clone();
            re[(l, m)] += c(1.0, 0.0);
            re[(m, l)] += c(1.0, 0.0);
            raw.push(re);
            let mut im = id.clone();
            im[(l, m)] += c(0.0, -1.0);
            im[(m, l)] += c(0.0, 1.0);
            raw.push(im);
        }
    }
    let sum: CMatrix = raw.iter().fold(CMatrix::zeros(d, d), |a, b| a + b);
    let top = eigvalsh(&sum)[0];
    let scale = (1.0 / (2.0 * d as f64)).min(1.0 / top);
    if !(scale > 0.0) {
        return Err(Error::ConstructionFailure("no admissible scale".into()));
    }
    let mut outcomes: Vec<CMatrix> = raw.into_iter().map(|p| p * c(scale, 0.0)).collect();
    let closing = &id - outcomes.iter().fold(CMatrix::zeros(d, d), |a, b| a + b);
    outcomes.push(super::linalg::hermitian_part(&closing));
    let n = outcomes.len();
    debug_assert_eq!(n, (2 * d - r) * r + 1);
    Povm::new(outcomes)
}

/// Phase-retrieval input-state count: 4dr − 4r² while r ≤ ⌈d/2⌉, else d².
pub fn phase_retrieval_lic(d: usize, r: usize) -> Result<usize> {
    check_rank(d, r)?;
    let half = d.div_ceil(2);
    Ok(if r <= half { 4 * d * r - 4 * r * r } else { d * d })
}

/// |ψ₀⟩ = |0⟩ and |ψ_l⟩ = (|0⟩ + |l⟩)/√2.
pub fn bkd_input_kets(d: usize) -> Result<Vec<CVector>> {
    if d < 2 {
        return Err(Error::InvalidDimension("d must be at least 2".into()));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = vec![basis_ket(d, 0)];
    for l in 1..d {
        out.push((basis_ket(d, 0) + basis_ket(d, l)) * c(h, 0.0));
    }
    Ok(out)
}

/// 2d² − d outcomes for the projective unitary benchmark.
pub fn bkd_projective_mic(d: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::InvalidDimension("d must be at least 2".into()));
    }
    Ok(2 * d * d - d)
}

/// d input kets.
pub fn bkd_lic(d: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::InvalidDimension("d must be at least 2".into()));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::super::linalg::{max_abs, min_eigenvalue};
    use super::*;

    #[test]
    fn parameter_counts() {
        for d in 2..10 {
            assert_eq!(rank_r_parameter_count(d, 1).unwrap(), 2 * d - 2);
            assert_eq!(rank_r_parameter_count(d, d).unwrap(), d * d - 1);
        }
        assert_eq!(rank_r_parameter_count(4, 2).unwrap(), 11);
        assert!(rank_r_parameter_count(4, 5).is_err());
    }

    #[test]
    fn kw_values() {
        assert!((kw_bound(4, 1).unwrap() - 10.0 / 3.0).abs() < 1e-15);
        assert!((kw_bound(16, 1).unwrap() - 58.0 / 15.0).abs() < 1e-15);
        assert_eq!(kw_bound(2, 1).unwrap(), 2.0);
        assert!(matches!(kw_bound(4, 3), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn k0_values() {
        for d in 2..10 {
            assert_eq!(k0_bound(d, 1).unwrap(), 1);
            assert_eq!(k0_bound(d, d).unwrap(), d + 1);
        }
        assert_eq!(k0_bound(16, 2).unwrap(), 2);
        assert!(k0_bound(1, 1).is_err());
    }

    #[test]
    fn bf_examples() {
        assert_eq!(bf_povm(4, 1).unwrap().len(), 8);
        let p = bf_povm(2, 1).unwrap();
        assert_eq!(p.len(), 4);
        for o in p.outcomes() {
            assert!(min_eigenvalue(o) > -1e-12);
        }
        for d in 2..7 {
            for r in 1..=d {
                let p = bf_povm(d, r).unwrap();
                assert_eq!(p.len(), (2 * d - r) * r + 1);
                let s = p.outcomes().iter().fold(CMatrix::zeros(d, d), |a, b| a + b);
                assert!(max_abs(&(s - identity(d))) < 1e-10);
            }
        }
    }

    #[test]
    fn phase_retrieval_values() {
        assert_eq!(phase_retrieval_lic(4, 1).unwrap(), 12);
        assert_eq!(phase_retrieval_lic(2, 1).unwrap(), 4);
        assert_eq!(phase_retrieval_lic(10, 3).unwrap(), 84);
        assert_eq!(phase_retrieval_lic(3, 1).unwrap(), 8);
        assert_eq!(phase_retrieval_lic(3, 3).unwrap(), 9);
    }

    #[test]
    fn bkd_values() {
        let k = bkd_input_kets(3).unwrap();
        assert_eq!(k.len(), 3);
        for v in &k {
            assert!((v.norm() - 1.0).abs() < 1e-15);
        }
        for v in &k[1..] {
            assert!((k[0].dotc(v).norm_sqr() - 0.5).abs() < 1e-15);
        }
        assert_eq!(bkd_projective_mic(2).unwrap(), 6);
        assert_eq!(bkd_projective_mic(4).unwrap(), 28);
        assert_eq!(bkd_projective_mic(7).unwrap(), 91);
    }
}
