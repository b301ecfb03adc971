use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use cqt::harness::{run_experiment, AggregateStats, ExperimentSpec};
use cqt::inference::Copies;
use cqt::qcore::bounds::{bkd_lic, bkd_projective_mic, k0_bound, kw_bound, phase_retrieval_lic};
use cqt::schemes::{SchemeConfig, SchemeKind};

use crate::config::parse_list;
use crate::CliError;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// state schemes against the KW and K₀ basis counts
    Qst,
    /// process schemes against d⁴−d² and the BKD counts
    Qpt,
    /// detector scheme against the phase-retrieval input count
    Qdt,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// qst, qpt or qdt
    #[arg(value_enum)]
    target: Target,
    /// dimensions, comma separated [default: 4 for qst, 2 for qpt and qdt]
    #[arg(long)]
    d: Option<String>,
    /// ranks, comma separated [default: 1]
    #[arg(long, alias = "r")]
    ranks: Option<String>,
    /// schemes, comma separated [default: rh,rlh,act,pact | actqpt,pactqpt,acqpt-unitary | cqdt]
    #[arg(long)]
    schemes: Option<String>,
    /// trials per grid point [default: 10]
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// master seed [default: 0]
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// copies per setting, an integer or inf [default: inf]
    #[arg(long, default_value = "inf")]
    copies: String,
    /// worker threads [default: all cores]
    #[arg(long)]
    jobs: Option<usize>,
    /// write the table as CSV to this file [default: print only]
    #[arg(long)]
    out: Option<PathBuf>,
}

/// d as a product of qubits, or None when d is not a power of two.
fn qubit_factors(d: usize) -> Option<Vec<usize>> {
    (d.is_power_of_two() && d > 1).then(|| vec![2; d.trailing_zeros() as usize])
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "n/a".into(), |x| x.to_string())
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn render(&self) -> String {
        let w: Vec<usize> = (0..self.header.len())
            .map(|j| self.rows.iter().map(|r| r[j].len()).chain([self.header[j].len()]).max().unwrap_or(0))
            .collect();
        let mut s = String::new();
        let line = |cells: Vec<&str>| cells.iter().zip(&w).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ");
        let _ = writeln!(s, "{}", line(self.header.clone()));
        for r in &self.rows {
            let _ = writeln!(s, "{}", line(r.iter().map(String::as_str).collect()));
        }
        s
    }

    fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

fn stats(cfg: SchemeConfig, a: &BenchArgs) -> Result<AggregateStats, CliError> {
    let spec = ExperimentSpec { jobs: a.jobs, ..ExperimentSpec::new(cfg, a.trials) };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let res = run_experiment(&spec)?;
    res.stats.into_iter().next().ok_or_else(|| CliError::Runtime("no trials ran".into()))
}

pub fn run(a: &BenchArgs) -> Result<(), CliError> {
    let copies: Copies = a.copies.parse().map_err(|_| CliError::Usage(format!("bad --copies {:?}", a.copies)))?;
    let default_d = if a.target == Target::Qst { "4" } else { "2" };
    let dims = parse_list("d", a.d.as_deref().unwrap_or(default_d))?;
    let ranks = parse_list("ranks", a.ranks.as_deref().unwrap_or("1"))?;
    let default_schemes = match a.target {
        Target::Qst => "rh,rlh,act,pact",
        Target::Qpt => "actqpt,pactqpt,acqpt-unitary",
        Target::Qdt => "cqdt",
    };
    let schemes: Vec<SchemeKind> = a
        .schemes
        .as_deref()
        .unwrap_or(default_schemes)
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("unknown scheme {s:?}"))))
        .collect::<Result<_, _>>()?;

    println!("# resolved config");
    println!("command = bench {}", format!("{:?}", a.target).to_lowercase());
    println!("d = {}", dims.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    println!("ranks = {}", ranks.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    println!("schemes = {}", schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(","));
    println!("trials = {}", a.trials);
    println!("seed = {}", a.seed);
    println!("copies = {copies}");
    println!("jobs = {}", fmt_opt(a.jobs));
    println!();

    let header = match a.target {
        Target::Qst => vec!["scheme", "d", "r", "trials", "mean_K_IC", "std_K_IC", "K_KW", "K0", "mean_fidelity"],
        Target::Qpt => vec![
            "scheme",
            "d",
            "r",
            "trials",
            "mean_L_IC",
            "mean_M_IC",
            "d4-d2",
            "bkd_L_IC",
            "bkd_M_IC",
            "mean_fidelity",
        ],
        Target::Qdt => vec!["scheme", "d", "r", "outcomes", "trials", "mean_L_IC", "std_L_IC", "phase_retrieval_L_IC", "mean_fidelity"],
    };
    let mut table = Table { header, rows: Vec::new() };
    for &d in &dims {
        for &r in &ranks {
            for &s in &schemes {
                let expected = match a.target {
                    Target::Qst => matches!(s, SchemeKind::Rh | SchemeKind::Rlh | SchemeKind::Act | SchemeKind::Pact),
                    Target::Qpt => matches!(
                        s,
                        SchemeKind::Actqpt | SchemeKind::Pactqpt | SchemeKind::Acqpt | SchemeKind::AcqptUnitary
                    ),
                    Target::Qdt => s == SchemeKind::Cqdt,
                };
                if !expected {
                    return Err(CliError::Usage(format!("scheme {s} does not belong to bench {:?}", a.target)));
                }
                let mut cfg = SchemeConfig::new(s, d, r).with_seed(a.seed).with_copies(copies);
                if s.is_product() {
                    match qubit_factors(d) {
                        Some(f) => cfg = cfg.with_local_dims(f),
                        None => {
                            eprintln!("skipping {s} at d={d}: not a power of two");
                            continue;
                        }
                    }
                }
                let st = stats(cfg, a)?;
                let fid = format!("{:.6}", st.mean_fidelity);
                let row = match a.target {
                    Target::Qst => vec![
                        s.to_string(),
                        d.to_string(),
                        r.to_string(),
                        st.trials.to_string(),
                        format!("{:.2}", st.mean_terminal_count),
                        format!("{:.2}", st.std_terminal_count),
                        fmt_opt(kw_bound(d, r).ok().map(|k| format!("{k:.2}"))),
                        fmt_opt(k0_bound(d, r).ok()),
                        fid,
                    ],
                    Target::Qpt => vec![
                        s.to_string(),
                        d.to_string(),
                        r.to_string(),
                        st.trials.to_string(),
                        format!("{:.2}", st.mean_terminal_count),
                        format!("{:.2}", st.mean_total_outcomes),
                        (d.pow(4) - d * d).to_string(),
                        fmt_opt(bkd_lic(d).ok()),
                        fmt_opt(bkd_projective_mic(d).ok()),
                        fid,
                    ],
                    Target::Qdt => vec![
                        s.to_string(),
                        d.to_string(),
                        r.to_string(),
                        (d * d).to_string(),
                        st.trials.to_string(),
                        format!("{:.2}", st.mean_terminal_count),
                        format!("{:.2}", st.std_terminal_count),
                        fmt_opt(phase_retrieval_lic(d, r).ok()),
                        fid,
                    ],
                };
                table.rows.push(row);
            }
        }
    }
    print!("{}", table.render());
    if let Some(p) = &a.out {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        std::fs::write(p, table.csv()).map_err(|e| CliError::Runtime(e.to_string()))?;
        println!("\n# wrote {}", p.display());
    }
    Ok(())
}
