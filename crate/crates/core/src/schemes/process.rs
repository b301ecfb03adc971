use rand::RngCore;

use crate::channels::{
    kraus_to_chi, rotated_basis_operator, rotated_diagonal_probability, sv_probe_pair, transformation_unitary,
    KrausSet,
};
use crate::convex::{
    compile_constraints, icc, min_entropy_estimator, normalisation_reference, random_witness, IccResult,
    MinEntropyConfig, ObjectKind, SdpBackend, Term,
};
use crate::error::{Error, Result};
use crate::harness::sampling::multinomial_sample;
use crate::inference::projection::{project_chi, project_choi};
use crate::inference::{
    ls_estimate, ml_estimate, physical_probabilities, InferenceConfig, MeasurementGroup, MeasurementRecord,
};
use crate::qcore::linalg::{c, eigh, hermitian_part, identity, kron, numerical_rank, trace_product_re, CMatrix};
use crate::qcore::random::{haar_pure_state, product_pure_state};
use crate::qcore::types::DensityMatrix;

use super::state::{state_loop, LoopParams, Selector};
use super::{
    channel_fidelity, kraus_choi_matrix, truth_process, AcqptMode, IterationRecord, SchemeConfig, SchemeKind,
    SchemeTrace, Stopwatch, Streams, Termination,
};

fn expect(cfg: &SchemeConfig, allowed: &[SchemeKind]) -> Result<()> {
    if !allowed.contains(&cfg.scheme) {
        return Err(Error::ConstraintViolation(format!("scheme {} is not handled here", cfg.scheme)));
    }
    Ok(())
}

pub fn run_actqpt(cfg: &SchemeConfig) -> Result<SchemeTrace> {
    expect(cfg, &[SchemeKind::Actqpt])?;
    super::run_scheme(cfg)
}

pub fn run_pactqpt(cfg: &SchemeConfig) -> Result<SchemeTrace> {
    expect(cfg, &[SchemeKind::Pactqpt])?;
    super::run_scheme(cfg)
}

pub fn run_acqpt(cfg: &SchemeConfig) -> Result<SchemeTrace> {
    expect(cfg, &[SchemeKind::Acqpt, SchemeKind::AcqptUnitary])?;
    super::run_scheme(cfg)
}

fn output_state(truth: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = hermitian_part(&truth.apply(rho.matrix())?);
    DensityMatrix::new(out.clone()).or_else(|_| DensityMatrix::from_approx(&out))
}

fn renormalised(p: &[f64]) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter().map(|x| x / s).collect()
}

/// Inputs → output-state ACT/PACT → Choi ICC.
pub(crate) fn actqpt(cfg: &SchemeConfig, backend: &dyn SdpBackend) -> Result<SchemeTrace> {
    let d = cfg.d;
    let kind = ObjectKind::Choi { d };
    let mut st = Streams::new(cfg.seed);
    let truth = truth_process(cfg, &mut st.truth)?;
    let truth_choi = kraus_choi_matrix(&truth)?;
    let witness = random_witness(kind, &mut st.witness)?;
    let product = cfg.scheme == SchemeKind::Pactqpt;
    let selector = if product { Selector::ProductMinEnt(cfg.factors()) } else { Selector::MinEnt };
    let inner_budget = SchemeConfig::default_budget(SchemeKind::Act, d);

    let mut record = MeasurementRecord::new(kind, cfg.copies);
    let mut iterations = Vec::new();
    let mut s_ref = None;
    let mut certified = false;
    let mut last: Option<IccResult> = None;
    for l in 1..=cfg.effective_budget() {
        let t0 = Stopwatch::start();
        let rho_in =
            if product { product_pure_state(&cfg.factors(), &mut st.scheme)? } else { haar_pure_state(d, &mut st.scheme)? };
        let rho_out = output_state(&truth, &rho_in)?;
        let inner_witness = random_witness(ObjectKind::State { d }, &mut st.witness)?;
        let params = LoopParams {
            selector: &selector,
            copies: cfg.copies,
            epsilon: cfg.epsilon,
            budget: inner_budget,
            witness: &inner_witness,
            backend,
        };
        let inner = state_loop(&rho_out, &params, &mut st.scheme, &mut st.sampling)?;
        let rin_t = rho_in.matrix().transpose();
        for (group, phat) in inner.record.groups.iter().zip(&inner.phat) {
            let ops = group
                .outcomes
                .iter()
                .map(|f| vec![Term { block: 0, op: kron(&rin_t, &f[0].op) }])
                .collect();
            record.push(MeasurementGroup::new(ops, renormalised(phat), None)?)?;
        }
        let targets = physical_probabilities(&record, true)?;
        let spec = record.feasible_spec(&targets)?;
        let set = compile_constraints(&spec)?;
        let mut res = icc(&set, &witness, backend, s_ref)?;
        if l == 1 {
            let r = normalisation_reference(res.s_raw, &witness);
            s_ref = Some(r);
            res.s_norm = res.s_raw / r;
        }
        let est = project_choi(&res.midpoint()[0], d);
        certified = res.is_ic(cfg.epsilon, spec.delta_eq);
        iterations.push(IterationRecord {
            index: l,
            setting: format!("input bases={}", inner.bases.len()),
            outcomes: record.total_outcomes(),
            s_raw: res.s_raw,
            s_norm: res.s_norm,
            fidelity: Some(channel_fidelity(&est, &truth_choi, d)),
            wall_ms: t0.elapsed_ms(),
        });
        last = Some(res);
        if certified {
            break;
        }
    }
    let last = last.ok_or_else(|| Error::InvalidDimension("budget must be at least 1".into()))?;
    let estimator = if certified {
        project_choi(&last.midpoint()[0], d)
    } else {
        project_choi(&ls_estimate(&record, &InferenceConfig::default())?.estimator[0], d)
    };
    let fid = channel_fidelity(&estimator, &truth_choi, d);
    Ok(SchemeTrace {
        config: cfg.clone(),
        terminal_count: iterations.len(),
        total_outcomes: record.total_outcomes(),
        iterations,
        reason: if certified { Termination::Certified } else { Termination::BudgetExhausted },
        estimator: vec![estimator],
        fidelity: Some(fid),
    })
}

/// κ_{M+1} = M mod r_{M+1}, zero-based.
pub fn next_kappa(probes_so_far: usize, rank: usize) -> usize {
    probes_so_far % rank.max(1)
}

/// Two chi-representation functionals (and their true probabilities) for the probe (U, κ).
fn probe(
    mode: AcqptMode,
    chi: &CMatrix,
    choi: &CMatrix,
    u: &CMatrix,
    kappa: usize,
    d: usize,
) -> Result<(CMatrix, CMatrix, f64)> {
    let n = d * d;
    match mode {
        AcqptMode::Ideal => {
            let col = u.column(kappa).into_owned();
            let f = &col * col.adjoint() / c(d as f64, 0.0);
            let g = identity(n) / c(d as f64, 0.0) - &f;
            let p = rotated_diagonal_probability(chi, u, kappa)?;
            Ok((hermitian_part(&f), hermitian_part(&g), p))
        }
        AcqptMode::Realizable => {
            let gamma = rotated_basis_operator(u, kappa)?;
            let (rho, pi) = sv_probe_pair(&gamma)?;
            let sw = transformation_unitary(d);
            let a = kron(&rho.matrix().transpose(), &pi);
            let b = kron(&rho.matrix().transpose(), &(identity(d) - &pi));
            let p = trace_product_re(choi, &a).clamp(0.0, 1.0);
            let fa = hermitian_part(&(sw.adjoint() * a * &sw));
            let fb = hermitian_part(&(sw.adjoint() * b * &sw));
            Ok((fa, fb, p))
        }
    }
}

/// Rotating-basis probes on the chi matrix, steered by minimum-entropy estimates.
pub(crate) fn acqpt(cfg: &SchemeConfig, backend: &dyn SdpBackend) -> Result<SchemeTrace> {
    let d = cfg.d;
    let n = d * d;
    let kind = ObjectKind::Chi { d };
    let mut st = Streams::new(cfg.seed);
    let truth = truth_process(cfg, &mut st.truth)?;
    let truth_choi = kraus_choi_matrix(&truth)?;
    let chi = kraus_to_chi(&truth)?.matrix().clone();
    let witness = random_witness(kind, &mut st.witness)?;
    let sw = transformation_unitary(d);
    let to_choi = |x: &CMatrix| &sw * x * sw.adjoint();

    let mut record = MeasurementRecord::new(kind, cfg.copies);
    let mut iterations = Vec::new();
    let mut u = identity(n);
    let mut kappa = 0;
    let mut s_ref = None;
    let mut certified = false;
    let mut last: Option<IccResult> = None;
    let budget = cfg.effective_budget();
    for m in 1..=budget {
        let t0 = Stopwatch::start();
        let (fa, fb, p) = probe(cfg.mode, &chi, &truth_choi, &u, kappa, d)?;
        let (freq, counts) = multinomial_sample(&[p, 1.0 - p], cfg.copies, &mut st.sampling)?;
        record.push(MeasurementGroup::from_operators(vec![fa, fb], freq, counts)?)?;
        let targets = physical_probabilities(&record, false)?;
        let spec = record.feasible_spec(&targets)?;
        let set = compile_constraints(&spec)?;
        let mut res = icc(&set, &witness, backend, s_ref)?;
        if m == 1 {
            let r = normalisation_reference(res.s_raw, &witness);
            s_ref = Some(r);
            res.s_norm = res.s_raw / r;
        }
        let est = project_chi(&res.midpoint()[0], d);
        certified = res.is_ic(cfg.epsilon, spec.delta_eq);
        let setting = format!("kappa={kappa}");
        if !certified && m < budget {
            let mcfg = MinEntropyConfig { seed: st.scheme.next_u64(), ..Default::default() };
            let me = min_entropy_estimator(&set, &mcfg, backend)?;
            let rank = if cfg.unitary() { 1 } else { numerical_rank(&me.estimator) };
            u = eigh(&me.estimator).vectors;
            kappa = next_kappa(m, rank);
        }
        iterations.push(IterationRecord {
            index: m,
            setting,
            outcomes: record.total_outcomes(),
            s_raw: res.s_raw,
            s_norm: res.s_norm,
            fidelity: Some(channel_fidelity(&to_choi(&est), &truth_choi, d)),
            wall_ms: t0.elapsed_ms(),
        });
        last = Some(res);
        if certified {
            break;
        }
    }
    let last = last.ok_or_else(|| Error::InvalidDimension("budget must be at least 1".into()))?;
    let estimator = if certified {
        project_chi(&last.midpoint()[0], d)
    } else {
        project_chi(&ml_estimate(&record, &InferenceConfig::default())?.estimator[0], d)
    };
    let fid = channel_fidelity(&to_choi(&estimator), &truth_choi, d);
    Ok(SchemeTrace {
        config: cfg.clone(),
        terminal_count: iterations.len(),
        total_outcomes: record.total_outcomes(),
        iterations,
        reason: if certified { Termination::Certified } else { Termination::BudgetExhausted },
        estimator: vec![estimator],
        fidelity: Some(fid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{kraus_to_choi, ChiOperator};
    use crate::qcore::random::{haar_unitary, rng_from_seed};
    use crate::schemes::Truth;

    #[test]
    fn kappa_rule() {
        assert!((1..20).all(|m| next_kappa(m, 1) == 0));
        let seq: Vec<usize> = (1..7).map(|m| next_kappa(m, 3)).collect();
        assert_eq!(seq, vec![1, 2, 0, 1, 2, 0]);
    }

    #[test]
    fn ideal_probes_sum_to_one_over_a_sweep() {
        let mut rng = rng_from_seed(4);
        let k = crate::channels::random_rank_r_process(2, 2, &mut rng).unwrap();
        let chi = kraus_to_chi(&k).unwrap();
        let choi = kraus_to_choi(&k).unwrap();
        let u = haar_unitary(4, &mut rng).unwrap();
        let total: f64 = (0..4)
            .map(|kappa| probe(AcqptMode::Ideal, chi.matrix(), choi.matrix(), u.matrix(), kappa, 2).unwrap().2)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probe_functionals_reproduce_probabilities() {
        let mut rng = rng_from_seed(8);
        let k = crate::channels::random_rank_r_process(2, 2, &mut rng).unwrap();
        let chi = kraus_to_chi(&k).unwrap();
        let choi = kraus_to_choi(&k).unwrap();
        let u = haar_unitary(4, &mut rng).unwrap();
        for mode in [AcqptMode::Ideal, AcqptMode::Realizable] {
            let (fa, fb, p) = probe(mode, chi.matrix(), choi.matrix(), u.matrix(), 1, 2).unwrap();
            assert!((trace_product_re(&fa, chi.matrix()) - p).abs() < 1e-12);
            assert!((trace_product_re(&fb, chi.matrix()) - (1.0 - p)).abs() < 1e-12);
        }
    }

    #[test]
    fn actqpt_identity_channel() {
        let mut cfg = SchemeConfig::new(SchemeKind::Actqpt, 2, 1).with_seed(2);
        cfg.truth = Some(Truth::Process(KrausSet::new(vec![identity(2)]).unwrap()));
        let t = run_actqpt(&cfg).unwrap();
        assert!(t.certified(), "{:?}", t.s_raw_series());
        assert!(t.terminal_count <= 6);
        assert!(t.fidelity.unwrap() > 0.999);
    }

    #[test]
    fn acqpt_unitary_d2() {
        let cfg = SchemeConfig::new(SchemeKind::AcqptUnitary, 2, 1).with_seed(11);
        let t = run_acqpt(&cfg).unwrap();
        assert!(t.certified(), "{:?}", t.s_raw_series());
        assert!(t.terminal_count <= 16);
        assert!(t.fidelity.unwrap() > 0.999);
        assert!(ChiOperator::new(t.estimator[0].clone(), 2).is_ok());
    }
}
