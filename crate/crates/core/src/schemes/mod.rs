//! Iterative compressive tomography drivers: measure, infer, certify, choose the
//! next setting.

mod detector;
mod process;
pub mod product;
mod state;

use std::fmt;
use std::str::FromStr;

use crate::channels::{kraus_to_choi, random_rank_r_process, KrausSet};
use crate::convex::{InteriorPoint, ObjectKind, SdpBackend};
use crate::error::{Error, Result};
use crate::inference::Copies;
use crate::qcore::linalg::{c, fidelity_raw, CMatrix};
use crate::qcore::random::{derive_seed, random_rank_r_povm, random_rank_r_state, rng_from_seed, Rng};
use crate::qcore::types::{DensityMatrix, Povm};

pub use detector::run_cqdt;
pub use process::{run_acqpt, run_actqpt, run_pactqpt};
pub use product::nearest_product_basis;
pub use state::{run_act, run_pact, run_random_bases_cqst};

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Rh,
    Rlh,
    Act,
    Pact,
    Actqpt,
    Pactqpt,
    Acqpt,
    AcqptUnitary,
    Cqdt,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 9] = [
        SchemeKind::Rh,
        SchemeKind::Rlh,
        SchemeKind::Act,
        SchemeKind::Pact,
        SchemeKind::Actqpt,
        SchemeKind::Pactqpt,
        SchemeKind::Acqpt,
        SchemeKind::AcqptUnitary,
        SchemeKind::Cqdt,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Rh => "rh",
            SchemeKind::Rlh => "rlh",
            SchemeKind::Act => "act",
            SchemeKind::Pact => "pact",
            SchemeKind::Actqpt => "actqpt",
            SchemeKind::Pactqpt => "pactqpt",
            SchemeKind::Acqpt => "acqpt",
            SchemeKind::AcqptUnitary => "acqpt-unitary",
            SchemeKind::Cqdt => "cqdt",
        }
    }

    /// Schemes that need a declared tensor factorisation of d.
    pub fn is_product(&self) -> bool {
        matches!(self, SchemeKind::Rlh | SchemeKind::Pact | SchemeKind::Pactqpt)
    }

    pub fn object(&self, d: usize, outcomes: usize) -> ObjectKind {
        match self {
            SchemeKind::Rh | SchemeKind::Rlh | SchemeKind::Act | SchemeKind::Pact => ObjectKind::State { d },
            SchemeKind::Actqpt | SchemeKind::Pactqpt => ObjectKind::Choi { d },
            SchemeKind::Acqpt | SchemeKind::AcqptUnitary => ObjectKind::Chi { d },
            SchemeKind::Cqdt => ObjectKind::Povm { d, outcomes },
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        SchemeKind::ALL
            .iter()
            .find(|k| k.name() == t)
            .copied()
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("unknown scheme {s:?}") })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AcqptMode {
    /// two-outcome projections onto rotated chi basis elements
    Ideal,
    /// input state and output projector from the largest singular pair
    Realizable,
}

impl fmt::Display for AcqptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AcqptMode::Ideal => "ideal",
            AcqptMode::Realizable => "realizable",
        })
    }
}

impl FromStr for AcqptMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ideal" => Ok(AcqptMode::Ideal),
            "realizable" | "realisable" => Ok(AcqptMode::Realizable),
            _ => Err(Error::Parse { line: 0, msg: format!("unknown mode {s:?}") }),
        }
    }
}

/// A known object to reconstruct instead of a generated one.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    State(DensityMatrix),
    Process(KrausSet),
    Povm(Povm),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub d: usize,
    pub r: usize,
    /// POVM outcome count for detector schemes (d² when absent)
    pub outcomes: Option<usize>,
    pub copies: Copies,
    pub epsilon: f64,
    /// iteration cap; the scheme default when absent
    pub budget: Option<usize>,
    pub seed: u64,
    pub local_dims: Option<Vec<usize>>,
    pub mode: AcqptMode,
    pub unitary_assumption: bool,
    pub truth: Option<Truth>,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind, d: usize, r: usize) -> Self {
        Self {
            scheme,
            d,
            r,
            outcomes: None,
            copies: Copies::Infinite,
            epsilon: DEFAULT_EPSILON,
            budget: None,
            seed: 0,
            local_dims: None,
            mode: AcqptMode::Ideal,
            unitary_assumption: scheme == SchemeKind::AcqptUnitary,
            truth: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_copies(mut self, copies: Copies) -> Self {
        self.copies = copies;
        self
    }

    pub fn with_local_dims(mut self, dims: Vec<usize>) -> Self {
        self.local_dims = Some(dims);
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.unwrap_or(self.d * self.d)
    }

    pub fn object(&self) -> ObjectKind {
        self.scheme.object(self.d, self.num_outcomes())
    }

    /// 3(d+1) bases, 2d² inputs, 6d² probes.
    pub fn default_budget(scheme: SchemeKind, d: usize) -> usize {
        match scheme {
            SchemeKind::Rh | SchemeKind::Rlh | SchemeKind::Act | SchemeKind::Pact => 3 * (d + 1),
            SchemeKind::Actqpt | SchemeKind::Pactqpt | SchemeKind::Cqdt => 2 * d * d,
            SchemeKind::Acqpt | SchemeKind::AcqptUnitary => 6 * d * d,
        }
    }

    pub fn effective_budget(&self) -> usize {
        self.budget.unwrap_or_else(|| Self::default_budget(self.scheme, self.d))
    }

    pub fn unitary(&self) -> bool {
        self.unitary_assumption || self.scheme == SchemeKind::AcqptUnitary
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        if d < 2 {
            return Err(Error::InvalidDimension(format!("d = {d}; schemes need d ≥ 2")));
        }
        let max_r = match self.object() {
            ObjectKind::Choi { .. } | ObjectKind::Chi { .. } => d * d,
            _ => d,
        };
        if self.r == 0 || self.r > max_r {
            return Err(Error::InvalidRank(format!("r = {} outside 1..={max_r}", self.r)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidProbabilities(format!("ε = {} must be positive", self.epsilon)));
        }
        if self.effective_budget() == 0 {
            return Err(Error::InvalidDimension("budget must be at least 1".into()));
        }
        if self.scheme == SchemeKind::Cqdt && self.num_outcomes() < 2 {
            return Err(Error::InvalidDimension("a POVM needs at least 2 outcomes".into()));
        }
        if let Some(ld) = &self.local_dims {
            if ld.is_empty() || ld.contains(&0) || ld.iter().product::<usize>() != d {
                return Err(Error::DimensionMismatch(format!("local dims {ld:?} do not factor d = {d}")));
            }
        } else if self.scheme.is_product() {
            return Err(Error::DimensionMismatch(format!("{} needs --local-dims", self.scheme)));
        }
        if let Some(t) = &self.truth {
            let ok = match (t, self.object()) {
                (Truth::State(s), ObjectKind::State { .. }) => s.dim() == d,
                (Truth::Process(k), ObjectKind::Choi { .. } | ObjectKind::Chi { .. }) => k.dim() == d,
                (Truth::Povm(p), ObjectKind::Povm { outcomes, .. }) => p.dim() == d && p.len() == outcomes,
                _ => false,
            };
            if !ok {
                return Err(Error::DimensionMismatch("supplied truth does not fit the scheme".into()));
            }
        }
        Ok(())
    }

    /// Local factorisation, or the single factor d.
    pub fn factors(&self) -> Vec<usize> {
        self.local_dims.clone().unwrap_or_else(|| vec![self.d])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Certified,
    BudgetExhausted,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Certified => "certified",
            Termination::BudgetExhausted => "budget-exhausted",
        })
    }
}

impl FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "certified" => Ok(Termination::Certified),
            "budget-exhausted" => Ok(Termination::BudgetExhausted),
            _ => Err(Error::Parse { line: 0, msg: format!("unknown termination {s:?}") }),
        }
    }
}

/// One pass of measure → infer → certify.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub index: usize,
    pub setting: String,
    /// outcomes measured so far
    pub outcomes: usize,
    pub s_raw: f64,
    pub s_norm: f64,
    pub fidelity: Option<f64>,
    pub wall_ms: f64,
}

/// Equality ignores wall time.
impl PartialEq for IterationRecord {
    fn eq(&self, o: &Self) -> bool {
        self.index == o.index
            && self.setting == o.setting
            && self.outcomes == o.outcomes
            && self.s_raw.to_bits() == o.s_raw.to_bits()
            && self.s_norm.to_bits() == o.s_norm.to_bits()
            && self.fidelity.map(f64::to_bits) == o.fidelity.map(f64::to_bits)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeTrace {
    pub config: SchemeConfig,
    pub iterations: Vec<IterationRecord>,
    /// K_IC, L_IC or M_IC when certified; iterations run otherwise
    pub terminal_count: usize,
    pub total_outcomes: usize,
    pub reason: Termination,
    pub estimator: Vec<CMatrix>,
    pub fidelity: Option<f64>,
}

impl SchemeTrace {
    pub fn certified(&self) -> bool {
        self.reason == Termination::Certified
    }

    /// Successive raw spreads.
    pub fn s_raw_series(&self) -> Vec<f64> {
        self.iterations.iter().map(|i| i.s_raw).collect()
    }

    /// Largest increase of s_raw between consecutive iterations (0 when monotone).
    pub fn max_monotonicity_violation(&self) -> f64 {
        self.s_raw_series().windows(2).map(|w| w[1] - w[0]).filter(|x| x.is_finite()).fold(0.0, f64::max)
    }
}

/// Wall-clock timer for iteration records; reads 0 on wasm32, which has no clock in std.
pub(crate) struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    pub fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64() * 1e3;
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

/// Independent random streams of one run.
pub(crate) struct Streams {
    pub truth: Rng,
    pub witness: Rng,
    pub scheme: Rng,
    pub sampling: Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            truth: rng_from_seed(derive_seed(seed, 1)),
            witness: rng_from_seed(derive_seed(seed, 2)),
            scheme: rng_from_seed(derive_seed(seed, 3)),
            sampling: rng_from_seed(derive_seed(seed, 4)),
        }
    }
}

pub(crate) fn truth_state(cfg: &SchemeConfig, rng: &mut Rng) -> Result<DensityMatrix> {
    match &cfg.truth {
        Some(Truth::State(s)) => Ok(s.clone()),
        _ => random_rank_r_state(cfg.d, cfg.r, rng),
    }
}

pub(crate) fn truth_process(cfg: &SchemeConfig, rng: &mut Rng) -> Result<KrausSet> {
    match &cfg.truth {
        Some(Truth::Process(k)) => Ok(k.clone()),
        _ => random_rank_r_process(cfg.d, cfg.r, rng),
    }
}

pub(crate) fn truth_povm(cfg: &SchemeConfig, rng: &mut Rng) -> Result<Povm> {
    match &cfg.truth {
        Some(Truth::Povm(p)) => Ok(p.clone()),
        _ => random_rank_r_povm(cfg.d, cfg.r, cfg.num_outcomes(), rng),
    }
}

/// F(ρ_Φ/d, σ_Φ/d) for d²×d² channel matrices of trace d.
pub(crate) fn channel_fidelity(a: &CMatrix, b: &CMatrix, d: usize) -> f64 {
    let s = c(1.0 / d as f64, 0.0);
    fidelity_raw(&(a * s), &(b * s)).clamp(0.0, 1.0)
}

/// Fidelity of the block-diagonal states ⊕_j Π_j / d.
pub fn povm_fidelity(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    let d = a[0].nrows() as f64;
    let s = c(1.0 / d, 0.0);
    let root: f64 = a.iter().zip(b).map(|(x, y)| fidelity_raw(&(x * s), &(y * s)).max(0.0).sqrt()).sum();
    (root * root).clamp(0.0, 1.0)
}

pub(crate) fn kraus_choi_matrix(k: &KrausSet) -> Result<CMatrix> {
    Ok(kraus_to_choi(k)?.matrix().clone())
}

/// Run the scheme named in the config with the reference SDP backend.
pub fn run_scheme(cfg: &SchemeConfig) -> Result<SchemeTrace> {
    run_scheme_with(cfg, &InteriorPoint::default())
}

pub fn run_scheme_with(cfg: &SchemeConfig, backend: &dyn SdpBackend) -> Result<SchemeTrace> {
    cfg.validate()?;
    match cfg.scheme {
        SchemeKind::Rh | SchemeKind::Rlh => state::random_bases(cfg, backend),
        SchemeKind::Act | SchemeKind::Pact => state::adaptive(cfg, backend),
        SchemeKind::Actqpt | SchemeKind::Pactqpt => process::actqpt(cfg, backend),
        SchemeKind::Acqpt | SchemeKind::AcqptUnitary => process::acqpt(cfg, backend),
        SchemeKind::Cqdt => detector::cqdt(cfg, backend),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("foo".parse::<SchemeKind>().is_err());
        assert_eq!("realizable".parse::<AcqptMode>().unwrap(), AcqptMode::Realizable);
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::new(SchemeKind::Rh, 4, 1).validate().is_ok());
        assert!(SchemeConfig::new(SchemeKind::Rh, 1, 1).validate().is_err());
        assert!(SchemeConfig::new(SchemeKind::Rh, 4, 5).validate().is_err());
        assert!(SchemeConfig::new(SchemeKind::Rlh, 4, 1).validate().is_err());
        assert!(SchemeConfig::new(SchemeKind::Rlh, 4, 1).with_local_dims(vec![2, 2]).validate().is_ok());
        assert!(SchemeConfig::new(SchemeKind::Rlh, 4, 1).with_local_dims(vec![2, 3]).validate().is_err());
        assert!(SchemeConfig::new(SchemeKind::Actqpt, 2, 4).validate().is_ok());
        assert_eq!(SchemeConfig::new(SchemeKind::Rh, 4, 1).effective_budget(), 15);
        assert_eq!(SchemeConfig::new(SchemeKind::Cqdt, 3, 1).effective_budget(), 18);
        assert_eq!(SchemeConfig::new(SchemeKind::Acqpt, 2, 1).effective_budget(), 24);
    }
}
