use rand::RngCore;

use crate::convex::{
    compile_constraints, icc, min_entropy_estimator, normalisation_reference, random_witness, IccResult,
    MinEntropyConfig, ObjectKind, SdpBackend, WitnessFunctional,
};
use crate::error::{Error, Result};
use crate::harness::sampling::multinomial_sample;
use crate::inference::projection::project_state;
use crate::inference::{ml_estimate, physical_probabilities, Copies, InferenceConfig, MeasurementGroup, MeasurementRecord};
use crate::qcore::linalg::{eigh, projector, CMatrix};
use crate::qcore::random::{haar_unitary, local_haar_unitary, Rng};
use crate::qcore::types::{born_probabilities_basis, fidelity, DensityMatrix, UnitaryMatrix};

use super::product::nearest_product_basis;
use super::{truth_state, IterationRecord, SchemeConfig, SchemeKind, SchemeTrace, Stopwatch, Streams, Termination};

/// How the next basis is chosen.
#[derive(Debug, Clone)]
pub(crate) enum Selector {
    Haar,
    LocalHaar(Vec<usize>),
    MinEnt,
    ProductMinEnt(Vec<usize>),
}

impl Selector {
    fn label(&self) -> &'static str {
        match self {
            Selector::Haar => "haar",
            Selector::LocalHaar(_) => "local-haar",
            Selector::MinEnt => "minent",
            Selector::ProductMinEnt(_) => "product-minent",
        }
    }
}

pub(crate) struct StateRun {
    pub record: MeasurementRecord,
    pub bases: Vec<UnitaryMatrix>,
    pub phat: Vec<Vec<f64>>,
    pub iterations: Vec<IterationRecord>,
    pub certified: bool,
    pub last: IccResult,
}

pub(crate) fn basis_projectors(u: &UnitaryMatrix) -> Vec<CMatrix> {
    (0..u.dim()).map(|j| projector(&u.matrix().column(j).into_owned())).collect()
}

pub(crate) fn density_of(x: &CMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(project_state(x, 1.0)).or_else(|_| DensityMatrix::from_approx(x))
}

pub(crate) struct LoopParams<'a> {
    pub selector: &'a Selector,
    pub copies: Copies,
    pub epsilon: f64,
    pub budget: usize,
    pub witness: &'a WitnessFunctional,
    pub backend: &'a dyn SdpBackend,
}

/// Measure → ML → ICC over bases until certified or out of budget. The first
/// basis is the computational one and its raw spread fixes the normalisation of
/// s, so it certifies only when that first spread is already below the floor of
/// the reference.
pub(crate) fn state_loop(
    truth: &DensityMatrix,
    p: &LoopParams<'_>,
    scheme_rng: &mut Rng,
    sampling_rng: &mut Rng,
) -> Result<StateRun> {
    let d = truth.dim();
    let mut record = MeasurementRecord::new(ObjectKind::State { d }, p.copies);
    let mut bases = Vec::new();
    let mut iterations = Vec::new();
    let mut u = UnitaryMatrix::identity(d);
    let mut label = "computational";
    let mut s_ref = None;
    let mut certified = false;
    let mut last = None;
    let mut phat = Vec::new();
    for k in 1..=p.budget {
        let t0 = Stopwatch::start();
        let probs = born_probabilities_basis(truth, &u)?;
        let (freq, counts) = multinomial_sample(&probs, p.copies, sampling_rng)?;
        record.push(MeasurementGroup::from_operators(basis_projectors(&u), freq, counts)?)?;
        bases.push(u.clone());
        phat = physical_probabilities(&record, false)?;
        let spec = record.feasible_spec(&phat)?;
        let set = compile_constraints(&spec)?;
        let mut res = icc(&set, p.witness, p.backend, s_ref)?;
        if k == 1 {
            let r = normalisation_reference(res.s_raw, p.witness);
            s_ref = Some(r);
            res.s_norm = res.s_raw / r;
        }
        let est = density_of(&res.midpoint()[0])?;
        let fid = fidelity(&est, truth)?;
        certified = res.is_ic(p.epsilon, spec.delta_eq);
        let done = certified || k == p.budget;
        if !done {
            u = next_basis(p.selector, &set, d, scheme_rng, p.backend)?;
        }
        iterations.push(IterationRecord {
            index: k,
            setting: label.to_string(),
            outcomes: record.total_outcomes(),
            s_raw: res.s_raw,
            s_norm: res.s_norm,
            fidelity: Some(fid),
            wall_ms: t0.elapsed_ms(),
        });
        label = p.selector.label();
        last = Some(res);
        if done {
            break;
        }
    }
    let last = last.ok_or_else(|| Error::InvalidDimension("budget must be at least 1".into()))?;
    Ok(StateRun { record, bases, phat, iterations, certified, last })
}

fn next_basis(
    sel: &Selector,
    set: &crate::convex::FeasibleSet,
    d: usize,
    rng: &mut Rng,
    backend: &dyn SdpBackend,
) -> Result<UnitaryMatrix> {
    match sel {
        Selector::Haar => haar_unitary(d, rng),
        Selector::LocalHaar(dims) => local_haar_unitary(dims, rng),
        Selector::MinEnt | Selector::ProductMinEnt(_) => {
            let cfg = MinEntropyConfig { seed: rng.next_u64(), ..Default::default() };
            let m = min_entropy_estimator(set, &cfg, backend)?;
            let u = UnitaryMatrix::new(eigh(&m.estimator).vectors)?;
            match sel {
                Selector::ProductMinEnt(dims) => nearest_product_basis(&u, dims),
                _ => Ok(u),
            }
        }
    }
}

fn finish(cfg: &SchemeConfig, truth: &DensityMatrix, run: StateRun) -> Result<SchemeTrace> {
    let estimator = if run.certified {
        density_of(&run.last.midpoint()[0])?
    } else {
        let ml = ml_estimate(&run.record, &InferenceConfig::default())?;
        density_of(&ml.estimator[0])?
    };
    let fid = fidelity(&estimator, truth)?;
    Ok(SchemeTrace {
        config: cfg.clone(),
        terminal_count: run.iterations.len(),
        total_outcomes: run.record.total_outcomes(),
        iterations: run.iterations,
        reason: if run.certified { Termination::Certified } else { Termination::BudgetExhausted },
        estimator: vec![estimator.into_matrix()],
        fidelity: Some(fid),
    })
}

fn run_with(cfg: &SchemeConfig, selector: Selector, backend: &dyn SdpBackend) -> Result<SchemeTrace> {
    let mut st = Streams::new(cfg.seed);
    let truth = truth_state(cfg, &mut st.truth)?;
    let witness = random_witness(ObjectKind::State { d: cfg.d }, &mut st.witness)?;
    let params = LoopParams {
        selector: &selector,
        copies: cfg.copies,
        epsilon: cfg.epsilon,
        budget: cfg.effective_budget(),
        witness: &witness,
        backend,
    };
    let run = state_loop(&truth, &params, &mut st.scheme, &mut st.sampling)?;
    finish(cfg, &truth, run)
}

pub(crate) fn random_bases(cfg: &SchemeConfig, backend: &dyn SdpBackend) -> Result<SchemeTrace> {
    let sel = match cfg.scheme {
        SchemeKind::Rlh => Selector::LocalHaar(cfg.factors()),
        _ => Selector::Haar,
    };
    run_with(cfg, sel, backend)
}

pub(crate) fn adaptive(cfg: &SchemeConfig, backend: &dyn SdpBackend) -> Result<SchemeTrace> {
    let sel = match cfg.scheme {
        SchemeKind::Pact => Selector::ProductMinEnt(cfg.factors()),
        _ => Selector::MinEnt,
    };
    run_with(cfg, sel, backend)
}

fn expect(cfg: &SchemeConfig, allowed: &[SchemeKind]) -> Result<()> {
    if !allowed.contains(&cfg.scheme) {
        return Err(Error::ConstraintViolation(format!("scheme {} is not handled here", cfg.scheme)));
    }
    Ok(())
}

/// Random Haar (rh) or local Haar (rlh) bases.
pub fn run_random_bases_cqst(cfg: &SchemeConfig) -> Result<SchemeTrace> {
    expect(cfg, &[SchemeKind::Rh, SchemeKind::Rlh])?;
    super::run_scheme(cfg)
}

pub fn run_act(cfg: &SchemeConfig) -> Result<SchemeTrace> {
    expect(cfg, &[SchemeKind::Act])?;
    super::run_scheme(cfg)
}

pub fn run_pact(cfg: &SchemeConfig) -> Result<SchemeTrace> {
    expect(cfg, &[SchemeKind::Pact])?;
    super::run_scheme(cfg)
}
