use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::inference::Copies;
use crate::qcore::random::splitmix64;
use crate::schemes::{run_scheme, SchemeConfig, SchemeKind, SchemeTrace};

pub const CSV_HEADER: &str = "scheme,d,r,N,trial,seed,terminal_count,total_outcomes,fidelity,reason";

const AGGREGATE_HEADER: &str =
    "scheme,d,r,N,trials,failures,mean_terminal_count,std_terminal_count,mean_total_outcomes,std_total_outcomes,mean_fidelity,std_fidelity";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// template; its seed is the master seed
    pub config: SchemeConfig,
    pub trials: usize,
    /// worker threads (all cores when absent)
    pub jobs: Option<usize>,
    /// directory for the trial and aggregate CSVs
    pub out_dir: Option<PathBuf>,
    /// also write one trace file per trial
    pub write_traces: bool,
}

impl ExperimentSpec {
    pub fn new(config: SchemeConfig, trials: usize) -> Self {
        Self { config, trials, jobs: None, out_dir: None, write_traces: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidDimension("trial count must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidDimension("--jobs must be at least 1".into()));
        }
        self.config.validate()
    }

    /// Base name of the output files.
    pub fn stem(&self) -> String {
        format!("{}-d{}-r{}-N{}", self.config.scheme, self.config.d, self.config.r, self.config.copies)
    }
}

/// Seed of trial `i`: splitmix64(master + i). Adding trials leaves earlier ones unchanged.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    splitmix64(master.wrapping_add(trial as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub scheme: SchemeKind,
    pub d: usize,
    pub r: usize,
    pub copies: Copies,
    pub trial: usize,
    pub seed: u64,
    pub terminal_count: usize,
    pub total_outcomes: usize,
    pub fidelity: f64,
    /// "certified", "budget-exhausted", or "error: ..." for failed trials
    pub reason: String,
}

impl TrialRow {
    pub fn certified(&self) -> bool {
        self.reason == "certified"
    }

    pub fn failed(&self) -> bool {
        self.reason.starts_with("error")
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:e},{}",
            self.scheme,
            self.d,
            self.r,
            self.copies,
            self.trial,
            self.seed,
            self.terminal_count,
            self.total_outcomes,
            self.fidelity,
            self.reason.replace([',', '\n'], ";")
        )
    }

    fn parse(line: &str, lineno: usize) -> Result<Self> {
        let f: Vec<&str> = line.splitn(10, ',').collect();
        if f.len() != 10 {
            return Err(Error::Parse { line: lineno, msg: format!("expected 10 fields, found {}", f.len()) });
        }
        let err = |name: &str| Error::Parse { line: lineno, msg: format!("bad {name} field") };
        Ok(Self {
            scheme: f[0].parse().map_err(|_| err("scheme"))?,
            d: f[1].parse().map_err(|_| err("d"))?,
            r: f[2].parse().map_err(|_| err("r"))?,
            copies: f[3].parse().map_err(|_| err("N"))?,
            trial: f[4].parse().map_err(|_| err("trial"))?,
            seed: f[5].parse().map_err(|_| err("seed"))?,
            terminal_count: f[6].parse().map_err(|_| err("terminal_count"))?,
            total_outcomes: f[7].parse().map_err(|_| err("total_outcomes"))?,
            fidelity: f[8].parse().map_err(|_| err("fidelity"))?,
            reason: f[9].to_string(),
        })
    }
}

/// Mean and sample standard deviation over the successful trials of one (scheme, d, r, N).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub scheme: SchemeKind,
    pub d: usize,
    pub r: usize,
    pub copies: Copies,
    pub trials: usize,
    pub failures: usize,
    pub mean_terminal_count: f64,
    pub std_terminal_count: f64,
    pub mean_total_outcomes: f64,
    pub std_total_outcomes: f64,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (m, var.sqrt())
}

impl AggregateStats {
    pub fn from_rows(rows: &[TrialRow]) -> Vec<AggregateStats> {
        let mut keys: Vec<(SchemeKind, usize, usize, Copies)> = Vec::new();
        for r in rows {
            let k = (r.scheme, r.d, r.r, r.copies);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(scheme, d, r, copies)| {
                let group: Vec<&TrialRow> =
                    rows.iter().filter(|x| (x.scheme, x.d, x.r, x.copies) == (scheme, d, r, copies)).collect();
                let ok: Vec<&&TrialRow> = group.iter().filter(|x| !x.failed()).collect();
                let tc: Vec<f64> = ok.iter().map(|x| x.terminal_count as f64).collect();
                let to: Vec<f64> = ok.iter().map(|x| x.total_outcomes as f64).collect();
                let fi: Vec<f64> = ok.iter().map(|x| x.fidelity).collect();
                let (mean_terminal_count, std_terminal_count) = mean_std(&tc);
                let (mean_total_outcomes, std_total_outcomes) = mean_std(&to);
                let (mean_fidelity, std_fidelity) = mean_std(&fi);
                AggregateStats {
                    scheme,
                    d,
                    r,
                    copies,
                    trials: group.len(),
                    failures: group.len() - ok.len(),
                    mean_terminal_count,
                    std_terminal_count,
                    mean_total_outcomes,
                    std_total_outcomes,
                    mean_fidelity,
                    std_fidelity,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct AggregateResult {
    pub rows: Vec<TrialRow>,
    pub stats: Vec<AggregateStats>,
    /// full traces of the successful trials, in trial order
    pub traces: Vec<SchemeTrace>,
}

impl AggregateResult {
    /// Statistics recomputed from the trial rows.
    pub fn recompute(&self) -> Vec<AggregateStats> {
        AggregateStats::from_rows(&self.rows)
    }

    pub fn trial_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    pub fn aggregate_csv(&self) -> String {
        let mut s = String::from(AGGREGATE_HEADER);
        s.push('\n');
        for a in &self.stats {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                a.scheme,
                a.d,
                a.r,
                a.copies,
                a.trials,
                a.failures,
                a.mean_terminal_count,
                a.std_terminal_count,
                a.mean_total_outcomes,
                a.std_total_outcomes,
                a.mean_fidelity,
                a.std_fidelity
            );
        }
        s
    }
}

pub fn write_trial_csv(path: &std::path::Path, res: &AggregateResult) -> Result<()> {
    fs::write(path, res.trial_csv())?;
    Ok(())
}

pub fn write_aggregate_csv(path: &std::path::Path, res: &AggregateResult) -> Result<()> {
    fs::write(path, res.aggregate_csv())?;
    Ok(())
}

/// Parse a trial CSV (header included).
pub fn read_trial_rows(text: &str) -> Result<Vec<TrialRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: "missing trial CSV header".into() }),
    }
    lines.filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| TrialRow::parse(l, i + 1)).collect()
}

fn run_trial(spec: &ExperimentSpec, trial: usize) -> (TrialRow, Option<SchemeTrace>) {
    let seed = trial_seed(spec.config.seed, trial);
    let cfg = spec.config.clone().with_seed(seed);
    let base = TrialRow {
        scheme: cfg.scheme,
        d: cfg.d,
        r: cfg.r,
        copies: cfg.copies,
        trial,
        seed,
        terminal_count: 0,
        total_outcomes: 0,
        fidelity: f64::NAN,
        reason: String::new(),
    };
    match run_scheme(&cfg) {
        Ok(t) => (
            TrialRow {
                terminal_count: t.terminal_count,
                total_outcomes: t.total_outcomes,
                fidelity: t.fidelity.unwrap_or(f64::NAN),
                reason: t.reason.to_string(),
                ..base
            },
            Some(t),
        ),
        Err(e) => (TrialRow { reason: format!("error: {e}"), ..base }, None),
    }
}

#[cfg(feature = "parallel")]
fn run_all(spec: &ExperimentSpec) -> Result<Vec<(TrialRow, Option<SchemeTrace>)>> {
    use rayon::prelude::*;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = spec.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::Io(e.to_string()))?;
    Ok(pool.install(|| (0..spec.trials).into_par_iter().map(|i| run_trial(spec, i)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_all(spec: &ExperimentSpec) -> Result<Vec<(TrialRow, Option<SchemeTrace>)>> {
    Ok((0..spec.trials).map(|i| run_trial(spec, i)).collect())
}

/// Run every trial on the worker pool, then write all files from this thread.
/// Failed trials become rows with an `error:` reason and the run continues.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<AggregateResult> {
    spec.validate()?;
    let results = run_all(spec)?;
    let mut rows = Vec::with_capacity(results.len());
    let mut traces = Vec::new();
    for (row, trace) in results {
        rows.push(row);
        traces.extend(trace);
    }
    let stats = AggregateStats::from_rows(&rows);
    let res = AggregateResult { rows, stats, traces };
    if let Some(dir) = &spec.out_dir {
        fs::create_dir_all(dir)?;
        let stem = spec.stem();
        write_trial_csv(&dir.join(format!("{stem}-trials.csv")), &res)?;
        write_aggregate_csv(&dir.join(format!("{stem}-aggregate.csv")), &res)?;
        if spec.write_traces {
            for t in &res.traces {
                let trial = res.rows.iter().find(|r| r.seed == t.config.seed).map_or(0, |r| r.trial);
                super::write_trace(&dir.join(format!("{stem}-trial{trial}.trace")), t)?;
            }
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rh_experiment_rows_and_stats() {
        let spec = ExperimentSpec::new(SchemeConfig::new(SchemeKind::Rh, 4, 1).with_seed(9), 10);
        let res = run_experiment(&spec).unwrap();
        assert_eq!(res.rows.len(), 10);
        let s = &res.stats[0];
        assert_eq!(s.trials, 10);
        let mean = res.rows.iter().map(|r| r.terminal_count as f64).sum::<f64>() / 10.0;
        assert!((s.mean_terminal_count - mean).abs() < 1e-12);
        assert!(s.std_terminal_count.is_finite());
        assert_eq!(res.recompute(), res.stats);
        let again = run_experiment(&spec).unwrap();
        assert_eq!(res.trial_csv(), again.trial_csv());
        assert_eq!(read_trial_rows(&res.trial_csv()).unwrap(), res.rows);
    }

    #[test]
    fn seeds_do_not_shift_when_trials_are_added() {
        let a: Vec<u64> = (0..5).map(|i| trial_seed(7, i)).collect();
        let b: Vec<u64> = (0..8).map(|i| trial_seed(7, i)).collect();
        assert_eq!(a[..], b[..5]);
    }

    #[test]
    fn failures_are_recorded() {
        let cfg = SchemeConfig::new(SchemeKind::Rh, 4, 1);
        let rows = vec![
            TrialRow {
                scheme: SchemeKind::Rh,
                d: 4,
                r: 1,
                copies: Copies::Infinite,
                trial: 0,
                seed: 1,
                terminal_count: 3,
                total_outcomes: 12,
                fidelity: 1.0,
                reason: "certified".into(),
            },
            TrialRow {
                trial: 1,
                reason: "error: solver failure".into(),
                terminal_count: 0,
                fidelity: f64::NAN,
                scheme: cfg.scheme,
                d: 4,
                r: 1,
                copies: Copies::Infinite,
                seed: 2,
                total_outcomes: 0,
            },
        ];
        let s = AggregateStats::from_rows(&rows);
        assert_eq!(s[0].failures, 1);
        assert_eq!(s[0].mean_terminal_count, 3.0);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(read_trial_rows("a,b\n").is_err());
    }
}
