use crate::convex::{compile_constraints, icc, normalisation_reference, random_witness, IccResult, SdpBackend, Term};
use crate::error::{Error, Result};
use crate::harness::sampling::multinomial_sample;
use crate::inference::projection::project_povm;
use crate::inference::{ls_estimate, physical_probabilities, InferenceConfig, MeasurementGroup, MeasurementRecord};
use crate::qcore::random::{haar_pure_state, product_pure_state};
use crate::qcore::types::born_probabilities;

use super::{
    povm_fidelity, truth_povm, IterationRecord, SchemeConfig, SchemeKind, SchemeTrace, Stopwatch, Streams, Termination,
};

pub fn run_cqdt(cfg: &SchemeConfig) -> Result<SchemeTrace> {
    if cfg.scheme != SchemeKind::Cqdt {
        return Err(Error::ConstraintViolation(format!("scheme {} is not handled here", cfg.scheme)));
    }
    super::run_scheme(cfg)
}

/// Random pure probes of an unknown POVM, LS to physical probabilities, ICC
/// over the POVM set. Product probes when a factorisation is declared.
pub(crate) fn cqdt(cfg: &SchemeConfig, backend: &dyn SdpBackend) -> Result<SchemeTrace> {
    let kind = cfg.object();
    let mut st = Streams::new(cfg.seed);
    let truth = truth_povm(cfg, &mut st.truth)?;
    let witness = random_witness(kind, &mut st.witness)?;

    let mut record = MeasurementRecord::new(kind, cfg.copies);
    let mut iterations = Vec::new();
    let mut s_ref = None;
    let mut certified = false;
    let mut last: Option<IccResult> = None;
    for l in 1..=cfg.effective_budget() {
        let t0 = Stopwatch::start();
        let rho = match &cfg.local_dims {
            Some(dims) => product_pure_state(dims, &mut st.scheme)?,
            None => haar_pure_state(cfg.d, &mut st.scheme)?,
        };
        let probs = born_probabilities(&rho, &truth)?;
        let (freq, counts) = multinomial_sample(&probs, cfg.copies, &mut st.sampling)?;
        let ops = (0..truth.len()).map(|j| vec![Term { block: j, op: rho.matrix().clone() }]).collect();
        record.push(MeasurementGroup::new(ops, freq, counts)?)?;
        let targets = physical_probabilities(&record, true)?;
        let spec = record.feasible_spec(&targets)?;
        let set = compile_constraints(&spec)?;
        let mut res = icc(&set, &witness, backend, s_ref)?;
        if l == 1 {
            let r = normalisation_reference(res.s_raw, &witness);
            s_ref = Some(r);
            res.s_norm = res.s_raw / r;
        }
        let est = project_povm(&res.midpoint());
        certified = res.is_ic(cfg.epsilon, spec.delta_eq);
        iterations.push(IterationRecord {
            index: l,
            setting: "haar-input".into(),
            outcomes: record.total_outcomes(),
            s_raw: res.s_raw,
            s_norm: res.s_norm,
            fidelity: Some(povm_fidelity(&est, truth.outcomes())),
            wall_ms: t0.elapsed_ms(),
        });
        last = Some(res);
        if certified {
            break;
        }
    }
    let last = last.ok_or_else(|| Error::InvalidDimension("budget must be at least 1".into()))?;
    let estimator = if certified {
        project_povm(&last.midpoint())
    } else {
        project_povm(&ls_estimate(&record, &InferenceConfig::default())?.estimator)
    };
    let fid = povm_fidelity(&estimator, truth.outcomes());
    Ok(SchemeTrace {
        config: cfg.clone(),
        terminal_count: iterations.len(),
        total_outcomes: record.total_outcomes(),
        iterations,
        reason: if certified { Termination::Certified } else { Termination::BudgetExhausted },
        estimator,
        fidelity: Some(fid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::trace_distance;
    use crate::qcore::types::Povm;
    use crate::schemes::Truth;

    #[test]
    fn random_povm_certifies_and_matches() {
        let cfg = SchemeConfig { outcomes: Some(4), ..SchemeConfig::new(SchemeKind::Cqdt, 2, 1).with_seed(4) };
        let mut st = Streams::new(4);
        let truth = truth_povm(&cfg, &mut st.truth).unwrap();
        let t = run_cqdt(&cfg).unwrap();
        assert!(t.certified());
        for (a, b) in t.estimator.iter().zip(truth.outcomes()) {
            assert!(trace_distance(a, b) < 1e-3);
        }
    }

    #[test]
    fn one_probe_never_certifies() {
        let mut cfg = SchemeConfig { outcomes: Some(2), ..SchemeConfig::new(SchemeKind::Cqdt, 2, 1) }.with_budget(1);
        cfg.truth = Some(Truth::Povm(Povm::computational(2)));
        let t = run_cqdt(&cfg).unwrap();
        assert!(!t.certified());
        assert_eq!(t.terminal_count, 1);
    }
}
