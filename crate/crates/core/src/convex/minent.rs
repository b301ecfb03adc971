use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::qcore::linalg::{eigh, hermitian_part, CMatrix};
use crate::qcore::random::{gaussian_matrix, Rng};
use crate::qcore::types::entropy_of_spectrum;

use super::feasible::{FeasibleSet, ObjectKind};
use super::sdp::{SdpBackend, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinEntropyConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// stop once one linearisation step lowers the entropy by less than this
    pub tol: f64,
    pub seed: u64,
}

impl Default for MinEntropyConfig {
    fn default() -> Self {
        Self { restarts: 3, max_iters: 30, tol: 1e-9, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct MinEntropyResult {
    /// operator in the set with the lowest entropy found (trace as in the set)
    pub estimator: CMatrix,
    /// von Neumann entropy of estimator / trace
    pub entropy: f64,
    pub iterations: usize,
}

fn normalised_entropy(x: &CMatrix, t: f64) -> f64 {
    let e = eigh(x);
    let v: Vec<f64> = e.values.iter().map(|l| (l / t).max(0.0)).collect();
    entropy_of_spectrum(&v)
}

/// G = −(log(X/t) + 1), the gradient of the entropy, with eigenvalues floored at 10⁻¹².
fn entropy_gradient(x: &CMatrix, t: f64) -> CMatrix {
    let e = eigh(x);
    let g = e.map(|l| -((l / t).max(1e-12).ln() + 1.0));
    hermitian_part(&g)
}

/// Minimum-entropy point of a single-block feasible set by successive
/// linearisation of the (concave) entropy. Each step solves one SDP; the
/// entropy never increases along the sequence. Several random linear starts
/// are tried and the lowest end point kept.
pub fn min_entropy_estimator(
    set: &FeasibleSet,
    cfg: &MinEntropyConfig,
    backend: &dyn SdpBackend,
) -> Result<MinEntropyResult> {
    let kind = set.kind();
    if matches!(kind, ObjectKind::Povm { .. }) {
        return Err(Error::ConstraintViolation("entropy minimisation needs a single-block set".into()));
    }
    let n = kind.blocks()[0];
    let t = kind.trace_value();
    let mut rng = Rng::seed_from_u64(cfg.seed);
    let mut best: Option<MinEntropyResult> = None;
    let mut total_iters = 0;
    for _ in 0..cfg.restarts.max(1) {
        let g0 = gaussian_matrix(n, n, &mut rng);
        let mut g = hermitian_part(&g0);
        let mut x: Option<CMatrix> = None;
        let mut h = f64::INFINITY;
        for _ in 0..cfg.max_iters.max(1) {
            total_iters += 1;
            let sol = backend.solve(&set.program(vec![g.clone()])?)?;
            if sol.status == SolveStatus::Infeasible {
                return Err(Error::Infeasible("empty feasible set".into()));
            }
            let xn = hermitian_part(&sol.x[0]);
            let hn = normalised_entropy(&xn, t);
            if hn > h {
                // numerical noise only; keep the previous point
                break;
            }
            let done = h - hn < cfg.tol;
            g = entropy_gradient(&xn, t);
            x = Some(xn);
            h = hn;
            if done {
                break;
            }
        }
        if let Some(x) = x {
            if best.as_ref().is_none_or(|b| h < b.entropy) {
                best = Some(MinEntropyResult { estimator: x, entropy: h, iterations: 0 });
            }
        }
    }
    let mut out = best.ok_or_else(|| Error::Solver("no minimum-entropy iterate".into()))?;
    out.iterations = total_iters;
    Ok(out)
}

/// Eigenbasis of an estimator, columns ordered by decreasing eigenvalue.
pub fn eigenbasis(x: &CMatrix) -> CMatrix {
    eigh(x).vectors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::feasible::{compile_constraints, DataConstraint, FeasibleSetSpec};
    use crate::convex::sdp::InteriorPoint;
    use crate::qcore::linalg::{c, projector, CVector};

    #[test]
    fn recovers_pure_state_from_partial_data() {
        // Bloch vector (0.6, 0, 0.8): pure. Fix z = 0.8 only; the minimum-entropy
        // states are the pure ones on the z = 0.8 circle.
        let mut s = FeasibleSetSpec::new(ObjectKind::State { d: 2 }).unwrap();
        let k0 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        s.push(DataConstraint::single(projector(&k0), 0.9)).unwrap();
        let set = compile_constraints(&s).unwrap();
        let r = min_entropy_estimator(&set, &MinEntropyConfig::default(), &InteriorPoint::default()).unwrap();
        assert!(r.entropy < 1e-4, "{}", r.entropy);
        assert!((r.estimator[(0, 0)].re - 0.9).abs() < 1e-7);
    }
}
