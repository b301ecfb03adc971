//! Maximum-likelihood and least-squares maps from observed frequencies to
//! physical probabilities.

pub mod projection;

use std::fmt;
use std::str::FromStr;

use crate::convex::{DataConstraint, FeasibleSetSpec, ObjectKind, Term};
use crate::error::{Error, Result};
use crate::qcore::linalg::{c, gell_mann_basis, inner_re, trace, trace_product_re, CMatrix};

/// Floor applied to probabilities inside the logarithm.
pub const LOG_FLOOR: f64 = 1e-14;

/// Copies per measurement setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Copies {
    Finite(u64),
    /// noiseless data: frequencies equal the Born probabilities
    Infinite,
}

impl Copies {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Copies::Infinite)
    }
}

impl fmt::Display for Copies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Copies::Finite(n) => write!(f, "{n}"),
            Copies::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Copies {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Copies::Infinite);
        }
        match t.parse::<u64>() {
            Ok(n) if n >= 1 => Ok(Copies::Finite(n)),
            _ => Err(Error::Parse { line: 0, msg: format!("copies must be a positive integer or inf, got {s:?}") }),
        }
    }
}

/// A linear functional on the blocks of the unknown object.
pub type Functional = Vec<Term>;

pub fn evaluate(f: &Functional, x: &[CMatrix]) -> f64 {
    f.iter().map(|t| trace_product_re(&t.op, &x[t.block])).sum()
}

/// One measurement setting: outcome functionals whose values sum to one on the
/// physical set, with the observed frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGroup {
    pub outcomes: Vec<Functional>,
    pub frequencies: Vec<f64>,
    pub counts: Option<Vec<u64>>,
}

impl MeasurementGroup {
    pub fn new(outcomes: Vec<Functional>, frequencies: Vec<f64>, counts: Option<Vec<u64>>) -> Result<Self> {
        if outcomes.len() != frequencies.len() || outcomes.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} outcomes but {} frequencies",
                outcomes.len(),
                frequencies.len()
            )));
        }
        let s: f64 = frequencies.iter().sum();
        if (s - 1.0).abs() > 1e-12 || frequencies.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidProbabilities(format!("frequencies sum to {s}")));
        }
        if let Some(cn) = &counts {
            if cn.len() != frequencies.len() {
                return Err(Error::DimensionMismatch("counts and frequencies differ in length".into()));
            }
        }
        Ok(Self { outcomes, frequencies, counts })
    }

    /// Single-block outcome operators.
    pub fn from_operators(ops: Vec<CMatrix>, frequencies: Vec<f64>, counts: Option<Vec<u64>>) -> Result<Self> {
        Self::new(ops.into_iter().map(|op| vec![Term { block: 0, op }]).collect(), frequencies, counts)
    }
}

/// The accumulated data of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub kind: ObjectKind,
    pub copies: Copies,
    pub groups: Vec<MeasurementGroup>,
}

impl MeasurementRecord {
    pub fn new(kind: ObjectKind, copies: Copies) -> Self {
        Self { kind, copies, groups: Vec::new() }
    }

    pub fn push(&mut self, group: MeasurementGroup) -> Result<()> {
        let blocks = self.kind.blocks();
        for f in &group.outcomes {
            for t in f {
                if t.block >= blocks.len() || t.op.nrows() != blocks[t.block] || t.op.ncols() != blocks[t.block] {
                    return Err(Error::DimensionMismatch(format!(
                        "outcome operator does not fit a {} object",
                        self.kind.name()
                    )));
                }
            }
        }
        if let (Copies::Finite(n), Some(cn)) = (self.copies, &group.counts) {
            if cn.iter().sum::<u64>() != n {
                return Err(Error::InvalidProbabilities(format!("counts do not sum to N = {n}")));
            }
        }
        self.groups.push(group);
        Ok(())
    }

    pub fn total_outcomes(&self) -> usize {
        self.groups.iter().map(|g| g.outcomes.len()).sum()
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        self.groups.iter().map(|g| g.frequencies.clone()).collect()
    }

    pub fn probabilities(&self, x: &[CMatrix]) -> Vec<Vec<f64>> {
        self.groups.iter().map(|g| g.outcomes.iter().map(|f| evaluate(f, x)).collect()).collect()
    }

    /// Feasible-set description pinning every outcome to `targets`.
    pub fn feasible_spec(&self, targets: &[Vec<f64>]) -> Result<FeasibleSetSpec> {
        if targets.len() != self.groups.len() {
            return Err(Error::DimensionMismatch("one target group per measurement group".into()));
        }
        let mut spec = FeasibleSetSpec::new(self.kind)?;
        for (g, t) in self.groups.iter().zip(targets) {
            if t.len() != g.outcomes.len() {
                return Err(Error::DimensionMismatch("target group length".into()));
            }
            for (f, p) in g.outcomes.iter().zip(t) {
                spec.push(DataConstraint { functional: f.clone(), target: p.clamp(0.0, 1.0) })?;
            }
        }
        Ok(spec)
    }
}

/// A x = b with x_l = tr(ρ Ω_l) over the traceless Gell-Mann basis Ω.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: nalgebra::DMatrix<f64>,
    pub b: nalgebra::DVector<f64>,
    pub basis: Vec<CMatrix>,
}

impl LinearSystem {
    /// Coordinates x of a state in the Ω basis.
    pub fn coordinates(&self, rho: &CMatrix) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(self.basis.len(), self.basis.iter().map(|o| trace_product_re(o, rho)))
    }
}

/// A_{jl} = tr(Π_j Ω_l), b_j = ν_j − tr(Π_j)/d for a state record.
pub fn build_linear_system(record: &MeasurementRecord) -> Result<LinearSystem> {
    let ObjectKind::State { d } = record.kind else {
        return Err(Error::DimensionMismatch("linear system is defined for state records".into()));
    };
    let basis = gell_mann_basis(d);
    let rows = record.total_outcomes();
    let mut a = nalgebra::DMatrix::zeros(rows, basis.len());
    let mut b = nalgebra::DVector::zeros(rows);
    let mut i = 0;
    for g in &record.groups {
        for (f, nu) in g.outcomes.iter().zip(&g.frequencies) {
            let mut tr = 0.0;
            for t in f {
                for (l, o) in basis.iter().enumerate() {
                    a[(i, l)] += inner_re(&t.op, o);
                }
                tr += trace(&t.op).re;
            }
            b[i] = nu - tr / d as f64;
            i += 1;
        }
    }
    Ok(LinearSystem { a, b, basis })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceConfig {
    pub max_iters: usize,
    /// relative objective gain below which the iteration stops
    pub tol: f64,
    /// starting point (projected onto the set); the set's centre when absent
    pub start: Option<Vec<CMatrix>>,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self { max_iters: 100_000, tol: 1e-9, start: None }
    }
}

#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub estimator: Vec<CMatrix>,
    /// physical probabilities p̂, grouped as the record
    pub probabilities: Vec<Vec<f64>>,
    /// final objective (log-likelihood for ML, squared error for LS)
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// objective after every accepted iteration (non-decreasing for ML,
    /// non-increasing for LS)
    pub history: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Objective {
    LogLikelihood,
    NegSquaredError,
}

fn value_grad(obj: Objective, record: &MeasurementRecord, x: &[CMatrix], with_grad: bool) -> (f64, Vec<CMatrix>) {
    let blocks = record.kind.blocks();
    let mut grad: Vec<CMatrix> = if with_grad { blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect() } else { Vec::new() };
    let mut val = 0.0;
    for g in &record.groups {
        for (f, &nu) in g.outcomes.iter().zip(&g.frequencies) {
            let p = evaluate(f, x);
            let w = match obj {
                Objective::LogLikelihood => {
                    if nu == 0.0 {
                        continue;
                    }
                    if p <= 0.0 {
                        // outside the likelihood's domain; keeps the line search off the boundary
                        return (f64::NEG_INFINITY, grad);
                    }
                    let pf = p.max(LOG_FLOOR);
                    val += nu * pf.ln();
                    nu / pf
                }
                Objective::NegSquaredError => {
                    val -= (p - nu) * (p - nu);
                    -2.0 * (p - nu)
                }
            };
            if with_grad {
                for t in f {
                    grad[t.block] += &t.op * c(w, 0.0);
                }
            }
        }
    }
    (val, grad)
}

fn inner_blocks(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| inner_re(x, y)).sum()
}

fn axpy(x: &[CMatrix], a: f64, y: &[CMatrix]) -> Vec<CMatrix> {
    x.iter().zip(y).map(|(u, v)| u + v * c(a, 0.0)).collect()
}

/// Norm of the gradient mapping (P(x + η∇) − x)/η relative to the gradient.
fn stationary(obj: Objective, record: &MeasurementRecord, x: &[CMatrix], eta: f64) -> bool {
    let (_, g) = value_grad(obj, record, x, true);
    let z = projection::project(record.kind, &axpy(x, eta, &g));
    let diff: Vec<CMatrix> = z.iter().zip(x).map(|(a, b)| a - b).collect();
    let gm = inner_blocks(&diff, &diff).sqrt() / eta;
    gm <= 1e-8 * inner_blocks(&g, &g).sqrt().max(1.0)
}

/// Accelerated projected-gradient ascent with monotone backtracking and
/// momentum restarts. Only objective-improving iterates are accepted.
fn ascend(obj: Objective, record: &MeasurementRecord, cfg: &InferenceConfig) -> Result<InferenceResult> {
    if record.groups.is_empty() {
        return Err(Error::InvalidProbabilities("empty measurement record".into()));
    }
    let kind = record.kind;
    let proj = |x: &[CMatrix]| projection::project(kind, x);
    let mut x = match &cfg.start {
        Some(s) => {
            if s.len() != kind.blocks().len() {
                return Err(Error::DimensionMismatch("starting point does not match the record".into()));
            }
            proj(s)
        }
        None => projection::maximally_mixed(kind),
    };
    let mut fx = value_grad(obj, record, &x, false).0;
    if fx == f64::NEG_INFINITY {
        let centre = projection::maximally_mixed(kind);
        x = x.iter().zip(&centre).map(|(a, b)| (a + b) * c(0.5, 0.0)).collect();
        fx = value_grad(obj, record, &x, false).0;
    }
    let mut history = vec![fx];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut eta = 1e-2;
    let mut small = 0;
    let mut converged = false;
    let mut iters = 0;
    while iters < cfg.max_iters {
        iters += 1;
        let (fy, gy) = value_grad(obj, record, &y, true);
        let mut accepted = None;
        while eta > 1e-20 {
            let z = proj(&axpy(&y, eta, &gy));
            let fz = value_grad(obj, record, &z, false).0;
            let diff: Vec<CMatrix> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
            let model = fy + inner_blocks(&gy, &diff) - inner_blocks(&diff, &diff) / (2.0 * eta);
            if fz >= model - 1e-15 * fy.abs().max(1.0) {
                accepted = Some((z, fz));
                break;
            }
            eta *= 0.5;
        }
        let Some((z, fz)) = accepted else {
            converged = true;
            break;
        };
        if fz < fx {
            // momentum overshot: restart from the current iterate
            if y == x {
                converged = true;
                break;
            }
            y = x.clone();
            t = 1.0;
            continue;
        }
        let gain = fz - fx;
        let prev = std::mem::replace(&mut x, z);
        fx = fz;
        history.push(fx);
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / tn;
        y = x.iter().zip(&prev).map(|(a, b)| a + (a - b) * c(beta, 0.0)).collect();
        t = tn;
        eta *= 1.25;
        if gain <= cfg.tol * fx.abs().max(1.0) {
            small += 1;
            if small >= 5 && stationary(obj, record, &x, eta) {
                converged = true;
                break;
            }
        } else {
            small = 0;
        }
    }
    let probabilities = record.probabilities(&x);
    let objective = match obj {
        Objective::LogLikelihood => fx,
        Objective::NegSquaredError => -fx,
    };
    if matches!(obj, Objective::NegSquaredError) {
        for h in history.iter_mut() {
            *h = -*h;
        }
    }
    Ok(InferenceResult { estimator: x, probabilities, objective, iterations: iters, converged, history })
}

/// Maximise Σ ν log tr(·) over the physical set of the record's kind.
/// Noiseless records report p̂ = ν, the frequencies being exact Born probabilities.
pub fn ml_estimate(record: &MeasurementRecord, cfg: &InferenceConfig) -> Result<InferenceResult> {
    let mut r = ascend(Objective::LogLikelihood, record, cfg)?;
    if record.copies.is_infinite() {
        r.probabilities = record.frequencies();
    }
    Ok(r)
}

/// Minimise Σ (tr(·) − ν)² over the physical set. The record's frequencies act as
/// the targets, which covers the second-level regularisation of ML outputs.
pub fn ls_estimate(record: &MeasurementRecord, cfg: &InferenceConfig) -> Result<InferenceResult> {
    let mut r = ascend(Objective::NegSquaredError, record, cfg)?;
    if record.copies.is_infinite() {
        r.probabilities = record.frequencies();
    }
    Ok(r)
}

/// p̂ for a record: ν itself when noiseless, otherwise the ML (or LS) map.
pub fn physical_probabilities(record: &MeasurementRecord, least_squares: bool) -> Result<Vec<Vec<f64>>> {
    if record.copies.is_infinite() {
        return Ok(record.frequencies());
    }
    let cfg = InferenceConfig::default();
    let r = if least_squares { ls_estimate(record, &cfg)? } else { ml_estimate(record, &cfg)? };
    Ok(r.probabilities)
}
