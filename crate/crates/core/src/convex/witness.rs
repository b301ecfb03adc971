use crate::error::Result;
use crate::qcore::linalg::{c, eigvalsh, identity, trace_product_re, CMatrix};
use crate::qcore::random::{random_rank_r_povm, random_rank_r_state, Rng};

use super::feasible::ObjectKind;

/// Linear objective f(X) = Σ_b Re tr(Z_b X_b) used to probe the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessFunctional {
    pub ops: Vec<CMatrix>,
}

impl WitnessFunctional {
    pub fn operator(z: CMatrix) -> Self {
        Self { ops: vec![z] }
    }

    pub fn evaluate(&self, x: &[CMatrix]) -> f64 {
        self.ops.iter().zip(x).map(|(z, xb)| trace_product_re(z, xb)).sum()
    }

    /// Σ_b (λ_max(Z_b) − λ_min(Z_b)), an upper bound on f over any set of unit-trace blocks.
    pub fn spread(&self) -> f64 {
        self.ops
            .iter()
            .map(|z| {
                let ev = eigvalsh(z);
                ev[0] - ev[ev.len() - 1]
            })
            .sum()
    }

    pub fn negated(&self) -> Vec<CMatrix> {
        self.ops.iter().map(|z| -z).collect()
    }
}

fn nondegenerate(ev: &[f64], gap: f64) -> bool {
    ev.windows(2).all(|w| w[0] - w[1] > gap)
}

fn off_diagonal_mass(z: &CMatrix) -> f64 {
    let n = z.nrows();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m = m.max(z[(i, j)].norm());
            }
        }
    }
    m
}

/// Z = ½ σ + ½ 1/n for a random full-rank density matrix σ, redrawn until Z
/// has a simple spectrum, λ_min ≥ 10⁻³/n and visible off-diagonal weight.
/// POVM sets get one random full-rank POVM element per outcome.
pub fn random_witness(kind: ObjectKind, rng: &mut Rng) -> Result<WitnessFunctional> {
    match kind {
        ObjectKind::Povm { d, outcomes } => {
            let mut last = None;
            for _ in 0..50 {
                let p = random_rank_r_povm(d, d, outcomes, rng)?;
                let ok = p.outcomes().iter().all(|z| *eigvalsh(z).last().unwrap() > 1e-6);
                if ok {
                    return Ok(WitnessFunctional { ops: p.into_outcomes() });
                }
                last = Some(p);
            }
            Ok(WitnessFunctional { ops: last.unwrap().into_outcomes() })
        }
        _ => {
            let n = kind.blocks()[0];
            let mut z = identity(n);
            for _ in 0..50 {
                let sigma = random_rank_r_state(n, n, rng)?;
                z = (sigma.matrix() + identity(n) / c(n as f64, 0.0)) * c(0.5, 0.0);
                let ev = eigvalsh(&z);
                let lmin = ev[n - 1];
                if lmin >= 1e-3 / n as f64 && (n == 1 || (nondegenerate(&ev, 1e-9) && off_diagonal_mass(&z) > 1e-3 / n as f64)) {
                    break;
                }
            }
            Ok(WitnessFunctional::operator(z))
        }
    }
}
