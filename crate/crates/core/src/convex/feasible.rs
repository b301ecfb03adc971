use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, gell_mann_basis, identity, kron, trace, CMatrix};

use super::program::{ConicProgram, ConstraintSet, LinearConstraint, Term};

/// The physical set an estimator lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectKind {
    /// d×d density matrices
    State { d: usize },
    /// d²×d² Choi operators with ptr₂ = 1 (trace d)
    Choi { d: usize },
    /// d²×d² chi matrices in the |j⟩⟨k| operator basis (trace d)
    Chi { d: usize },
    /// `outcomes` d×d PSD operators summing to the identity
    Povm { d: usize, outcomes: usize },
}

impl ObjectKind {
    pub fn d(&self) -> usize {
        match *self {
            ObjectKind::State { d } | ObjectKind::Choi { d } | ObjectKind::Chi { d } | ObjectKind::Povm { d, .. } => d,
        }
    }

    pub fn blocks(&self) -> Vec<usize> {
        match *self {
            ObjectKind::State { d } => vec![d],
            ObjectKind::Choi { d } | ObjectKind::Chi { d } => vec![d * d],
            ObjectKind::Povm { d, outcomes } => vec![d; outcomes],
        }
    }

    /// Trace of the single-block objects (1 for states, d for channels).
    pub fn trace_value(&self) -> f64 {
        match *self {
            ObjectKind::State { .. } => 1.0,
            ObjectKind::Choi { d } | ObjectKind::Chi { d } => d as f64,
            ObjectKind::Povm { d, .. } => d as f64,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObjectKind::State { .. } => "state",
            ObjectKind::Choi { .. } => "choi",
            ObjectKind::Chi { .. } => "chi",
            ObjectKind::Povm { .. } => "povm",
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.d();
        if d == 0 {
            return Err(Error::InvalidDimension("d must be at least 1".into()));
        }
        if matches!(self, ObjectKind::Choi { .. } | ObjectKind::Chi { .. }) && d < 2 {
            return Err(Error::InvalidDimension("channels need d ≥ 2".into()));
        }
        if let ObjectKind::Povm { outcomes, .. } = self {
            if *outcomes < 2 {
                return Err(Error::InvalidDimension("POVMs need at least 2 outcomes".into()));
            }
        }
        Ok(())
    }
}

/// Σ_terms Re tr(op · X_block) = target.
#[derive(Debug, Clone, PartialEq)]
pub struct DataConstraint {
    pub functional: Vec<Term>,
    pub target: f64,
}

impl DataConstraint {
    pub fn single(op: CMatrix, target: f64) -> Self {
        Self { functional: vec![Term { block: 0, op }], target }
    }

    pub fn evaluate(&self, x: &[CMatrix]) -> f64 {
        self.functional.iter().map(|t| crate::qcore::linalg::trace_product_re(&t.op, &x[t.block])).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSetSpec {
    pub kind: ObjectKind,
    pub constraints: Vec<DataConstraint>,
    /// tolerance used to validate solver output against the data equalities
    pub delta_eq: f64,
}

pub const DEFAULT_DELTA_EQ: f64 = 1e-8;

impl FeasibleSetSpec {
    pub fn new(kind: ObjectKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, constraints: Vec::new(), delta_eq: DEFAULT_DELTA_EQ })
    }

    pub fn push(&mut self, constraint: DataConstraint) -> Result<()> {
        let blocks = self.kind.blocks();
        if !(-1e-12..=1.0 + 1e-12).contains(&constraint.target) || !constraint.target.is_finite() {
            return Err(Error::InvalidProbabilities(format!("target {} outside [0, 1]", constraint.target)));
        }
        for t in &constraint.functional {
            if t.block >= blocks.len() || t.op.nrows() != blocks[t.block] || t.op.ncols() != blocks[t.block] {
                return Err(Error::DimensionMismatch(format!(
                    "operator {}x{} does not act on block {} of a {} object",
                    t.op.nrows(),
                    t.op.ncols(),
                    t.block,
                    self.kind.name()
                )));
            }
        }
        self.constraints.push(constraint);
        Ok(())
    }

    pub fn with(mut self, constraint: DataConstraint) -> Result<Self> {
        self.push(constraint)?;
        Ok(self)
    }

    /// Largest violation of the data equalities at `x`.
    pub fn max_violation(&self, x: &[CMatrix]) -> f64 {
        self.constraints.iter().map(|k| (k.evaluate(x) - k.target).abs()).fold(0.0, f64::max)
    }
}

/// Equalities defining the physical set of `kind` (besides positivity).
pub fn physical_constraints(kind: ObjectKind) -> Vec<LinearConstraint> {
    match kind {
        ObjectKind::State { d } => vec![LinearConstraint::single(0, identity(d), 1.0)],
        ObjectKind::Choi { d } => {
            // tr(ρ' Ω_l⊗1) = 0 for traceless Ω_l, and tr ρ' = d
            let id = identity(d);
            let mut out: Vec<LinearConstraint> =
                gell_mann_basis(d).iter().map(|o| LinearConstraint::single(0, kron(o, &id), 0.0)).collect();
            out.push(LinearConstraint::single(0, identity(d * d), d as f64));
            out
        }
        ObjectKind::Chi { d } => {
            // Σ χ_{ll'} Γ_{l'}†Γ_l = 1 tested against each Hermitian H: tr(χ (1⊗Hᵀ)) = tr H
            let id = identity(d);
            let mut hs = gell_mann_basis(d);
            hs.push(identity(d) / c((d as f64).sqrt(), 0.0));
            hs.iter().map(|h| LinearConstraint::single(0, kron(&id, &h.transpose()), trace(h).re)).collect()
        }
        ObjectKind::Povm { d, outcomes } => {
            let mut hs = gell_mann_basis(d);
            hs.push(identity(d) / c((d as f64).sqrt(), 0.0));
            hs.iter()
                .map(|h| LinearConstraint {
                    terms: (0..outcomes).map(|j| Term { block: j, op: h.clone() }).collect(),
                    rhs: trace(h).re,
                })
                .collect()
        }
    }
}

/// A compiled feasible set: physical equalities plus data equalities, reduced once
/// and shared by every objective solved over it.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    pub spec: FeasibleSetSpec,
    pub set: Arc<ConstraintSet>,
}

impl FeasibleSet {
    pub fn kind(&self) -> ObjectKind {
        self.spec.kind
    }

    pub fn program(&self, objective: Vec<CMatrix>) -> Result<ConicProgram> {
        ConicProgram::new(self.set.clone(), objective)
    }
}

/// Build the conic description of `spec`: one PSD cone per block, the physical
/// equalities of the kind and the data equalities.
pub fn compile_constraints(spec: &FeasibleSetSpec) -> Result<FeasibleSet> {
    spec.kind.validate()?;
    let mut cons = physical_constraints(spec.kind);
    for dc in &spec.constraints {
        cons.push(LinearConstraint { terms: dc.functional.clone(), rhs: dc.target });
    }
    let set = Arc::new(ConstraintSet::new(spec.kind.blocks(), cons));
    let red = set.reduced()?;
    if red.inconsistency > 1e-8 {
        return Err(Error::Infeasible(format!(
            "data equalities are inconsistent (residual {:e}); map the data through inference first",
            red.inconsistency
        )));
    }
    Ok(FeasibleSet { spec: spec.clone(), set })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::max_abs;

    #[test]
    fn choi_and_chi_tp_constraints_hold_on_identity_channel() {
        let d = 3;
        // identity channel: Choi = Σ|jj⟩⟨kk|, chi = e_0-like with a single unit block
        let mut me = crate::qcore::linalg::CVector::zeros(d * d);
        for j in 0..d {
            me[j * d + j] = c(1.0, 0.0);
        }
        let choi = &me * me.adjoint();
        for con in physical_constraints(ObjectKind::Choi { d }) {
            assert!((con.evaluate(std::slice::from_ref(&choi)) - con.rhs).abs() < 1e-12);
        }
        let mut chi = CMatrix::zeros(d * d, d * d);
        // K = I = Σ_j |j⟩⟨j| has coefficients on l = j d + j
        for a in 0..d {
            for b in 0..d {
                chi[(a * d + a, b * d + b)] = c(1.0, 0.0);
            }
        }
        for con in physical_constraints(ObjectKind::Chi { d }) {
            assert!((con.evaluate(std::slice::from_ref(&chi)) - con.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn povm_completeness_constraints() {
        let p = crate::qcore::random::random_rank_r_povm(2, 1, 3, &mut crate::qcore::rng_from_seed(1)).unwrap();
        let x = p.outcomes().to_vec();
        for con in physical_constraints(ObjectKind::Povm { d: 2, outcomes: 3 }) {
            assert!((con.evaluate(&x) - con.rhs).abs() < 1e-12);
        }
        let s: CMatrix = x.iter().fold(CMatrix::zeros(2, 2), |a, b| a + b);
        assert!(max_abs(&(s - identity(2))) < 1e-10);
    }

    #[test]
    fn spec_rejects_bad_input() {
        let mut s = FeasibleSetSpec::new(ObjectKind::State { d: 2 }).unwrap();
        assert!(s.push(DataConstraint::single(identity(3), 0.5)).is_err());
        assert!(s.push(DataConstraint::single(identity(2), 1.5)).is_err());
        assert!(FeasibleSetSpec::new(ObjectKind::Povm { d: 2, outcomes: 1 }).is_err());
    }

    #[test]
    fn inconsistent_data_is_flagged() {
        let mut p0 = CMatrix::zeros(2, 2);
        p0[(0, 0)] = c(1.0, 0.0);
        let s = FeasibleSetSpec::new(ObjectKind::State { d: 2 })
            .unwrap()
            .with(DataConstraint::single(p0.clone(), 0.3))
            .unwrap()
            .with(DataConstraint::single(p0, 0.6))
            .unwrap();
        assert!(matches!(compile_constraints(&s), Err(Error::Infeasible(_))));
    }
}
