use crate::error::{Error, Result};
use crate::qcore::linalg::{c, min_eigenvalue, CMatrix};

use super::feasible::FeasibleSet;
use super::sdp::{SdpBackend, SolveStatus};
use super::witness::WitnessFunctional;

/// Outcome of one informational-completeness check.
#[derive(Debug, Clone)]
pub struct IccResult {
    pub f_max: f64,
    pub f_min: f64,
    /// f_max − f_min
    pub s_raw: f64,
    /// s_raw divided by the reference the caller supplied (s_raw when none)
    pub s_norm: f64,
    pub witness_max: Vec<CMatrix>,
    pub witness_min: Vec<CMatrix>,
    pub status: SolveStatus,
    /// largest data-equality violation of the two witnesses
    pub violation: f64,
    /// most negative eigenvalue over the witness blocks
    pub min_eig: f64,
    pub iterations: usize,
}

impl IccResult {
    /// Both witnesses are admissible and the normalised spread is below `eps`.
    pub fn is_ic(&self, eps: f64, delta_eq: f64) -> bool {
        self.status != SolveStatus::Infeasible && self.witnesses_valid(delta_eq) && self.s_norm < eps
    }

    pub fn witnesses_valid(&self, delta_eq: f64) -> bool {
        self.violation <= delta_eq && self.min_eig >= -delta_eq
    }

    /// ½ (X_max + X_min), the estimator once the set is certified.
    pub fn midpoint(&self) -> Vec<CMatrix> {
        self.witness_max.iter().zip(&self.witness_min).map(|(a, b)| (a + b) * c(0.5, 0.0)).collect()
    }
}

/// Reference spread used to normalise s: the first raw spread of a run,
/// floored at 10⁻³ of the witness range so an early singleton cannot zero it.
pub fn normalisation_reference(first_s_raw: f64, witness: &WitnessFunctional) -> f64 {
    first_s_raw.max(1e-3 * witness.spread()).max(f64::MIN_POSITIVE)
}

/// Minimise and maximise the witness over the set.
pub fn icc(
    set: &FeasibleSet,
    witness: &WitnessFunctional,
    backend: &dyn SdpBackend,
    s_ref: Option<f64>,
) -> Result<IccResult> {
    if witness.ops.len() != set.kind().blocks().len() {
        return Err(Error::DimensionMismatch("witness does not match the feasible set".into()));
    }
    let lo = backend.solve(&set.program(witness.ops.clone())?)?;
    let hi = backend.solve(&set.program(witness.negated())?)?;
    let status = match (lo.status, hi.status) {
        (SolveStatus::Infeasible, _) | (_, SolveStatus::Infeasible) => SolveStatus::Infeasible,
        (SolveStatus::Optimal, SolveStatus::Optimal) => SolveStatus::Optimal,
        _ => SolveStatus::Inaccurate,
    };
    let iterations = lo.iterations + hi.iterations;
    let (mut xmin, mut xmax) = (lo.x, hi.x);
    let (mut fmin, mut fmax) = (witness.evaluate(&xmin), witness.evaluate(&xmax));
    // both points are feasible, so each bounds both extremes
    if fmax < fmin {
        std::mem::swap(&mut xmin, &mut xmax);
        std::mem::swap(&mut fmin, &mut fmax);
    }
    let violation = set.spec.max_violation(&xmin).max(set.spec.max_violation(&xmax));
    let min_eig = xmin.iter().chain(&xmax).map(min_eigenvalue).fold(f64::INFINITY, f64::min);
    let s_raw = fmax - fmin;
    let s_norm = match s_ref {
        Some(r) => s_raw / r,
        None => s_raw,
    };
    Ok(IccResult {
        f_max: fmax,
        f_min: fmin,
        s_raw,
        s_norm,
        witness_max: xmax,
        witness_min: xmin,
        status,
        violation,
        min_eig,
        iterations,
    })
}
