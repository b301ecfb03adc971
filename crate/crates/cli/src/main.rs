mod bench;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cqt::channels::random_rank_r_process;
use cqt::convex::{compile_constraints, icc, random_witness, InteriorPoint};
use cqt::harness::{format_object, parse_constraints, run_experiment};
use cqt::qcore::bounds::bf_povm;
use cqt::qcore::random::{rng_from_seed, random_rank_r_povm, random_rank_r_state};
use cqt::schemes::{Truth, DEFAULT_EPSILON};

use config::{resolve, RunArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<cqt::error::Error> for CliError {
    fn from(e: cqt::error::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "cqt", version, about = "Compressive tomography with certified informational completeness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// State tomography with random Haar (rh) or local Haar (rlh) bases
    Cqst(RunArgs),
    /// Adaptive state tomography: next basis = eigenbasis of the minimum-entropy estimate
    Act(RunArgs),
    /// ACT restricted to product bases (needs --local-dims)
    Pact(RunArgs),
    /// Process tomography: ACT on the outputs of random pure inputs, certified over Choi operators
    Actqpt(RunArgs),
    /// ACTQPT with product inputs and product bases (needs --local-dims)
    Pactqpt(RunArgs),
    /// Process tomography by rotated chi-basis probes
    Acqpt(RunArgs),
    /// Detector tomography with random pure probes
    Cqdt(RunArgs),
    /// Certify one feasible set read from a constraint file
    Icc(IccArgs),
    /// Write a random state, process or POVM to a file
    Gen(GenArgs),
    /// Run a benchmark grid and print terminal counts next to the analytic bounds
    Bench(bench::BenchArgs),
}

#[derive(Args, Debug)]
struct IccArgs {
    /// constraint file (kind, d, then `constraint <p> [block <j>]` + matrix entries)
    #[arg(long)]
    constraints: PathBuf,
    /// expected object kind: state, choi, chi or povm [default: taken from the file]
    #[arg(long)]
    kind: Option<String>,
    /// expected dimension [default: taken from the file]
    #[arg(long)]
    d: Option<usize>,
    /// witness seed [default: 0]
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// threshold on the raw spread [default: 1e-6]
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// state, process, povm or bf-povm
    #[arg(long)]
    kind: String,
    /// dimension [default: 2]
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// rank [default: 1]
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// POVM outcomes [default: d²]
    #[arg(long)]
    outcomes: Option<usize>,
    /// seed [default: 0]
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

fn echo(lines: &[(String, String)]) {
    println!("# resolved config");
    for (k, v) in lines {
        println!("{k} = {v}");
    }
}

fn run(cmd: &str, args: &RunArgs) -> Result<(), CliError> {
    let resolved = resolve(cmd, args)?;
    echo(&resolved.echo);
    let res = run_experiment(&resolved.spec)?;
    println!();
    print!("{}", res.trial_csv());
    println!();
    print!("{}", res.aggregate_csv());
    if let Some(dir) = &resolved.spec.out_dir {
        println!("\n# wrote {}", dir.join(format!("{}-{{trials,aggregate}}.csv", resolved.spec.stem())).display());
    }
    let failed: Vec<_> = res.rows.iter().filter(|r| r.failed()).collect();
    if !failed.is_empty() {
        for r in &failed {
            eprintln!("trial {}: {}", r.trial, r.reason);
        }
        return Err(CliError::Runtime(format!("{} of {} trials failed", failed.len(), res.rows.len())));
    }
    Ok(())
}

fn run_icc(a: &IccArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.constraints)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.constraints.display())))?;
    let spec = parse_constraints(&text).map_err(|e| CliError::Usage(format!("{}: {e}", a.constraints.display())))?;
    if let Some(k) = &a.kind {
        if k != spec.kind.name() {
            return Err(CliError::Usage(format!("--kind {k} but the file holds a {} set", spec.kind.name())));
        }
    }
    if let Some(d) = a.d {
        if d != spec.kind.d() {
            return Err(CliError::Usage(format!("--d {d} but the file has d = {}", spec.kind.d())));
        }
    }
    println!("# resolved config");
    println!("command = icc");
    println!("constraints = {}", a.constraints.display());
    println!("kind = {}", spec.kind.name());
    println!("d = {}", spec.kind.d());
    println!("seed = {}", a.seed);
    println!("epsilon = {}", a.epsilon);
    let set = compile_constraints(&spec)?;
    let witness = random_witness(spec.kind, &mut rng_from_seed(a.seed))?;
    let res = icc(&set, &witness, &InteriorPoint::default(), None)?;
    println!("f_min = {:e}", res.f_min);
    println!("f_max = {:e}", res.f_max);
    println!("s_cvx_raw = {:e}", res.s_raw);
    println!("s_cvx_norm = {:e}", res.s_norm);
    println!("status = {:?}", res.status);
    println!("verdict = {}", if res.is_ic(a.epsilon, spec.delta_eq) { "IC" } else { "not IC" });
    Ok(())
}

fn run_gen(a: &GenArgs) -> Result<(), CliError> {
    let mut rng = rng_from_seed(a.seed);
    // bad dimensions or ranks are caller mistakes here
    let u = |e: cqt::error::Error| CliError::Usage(e.to_string());
    let obj = match a.kind.as_str() {
        "state" => Truth::State(random_rank_r_state(a.d, a.r, &mut rng).map_err(u)?),
        "process" => Truth::Process(random_rank_r_process(a.d, a.r, &mut rng).map_err(u)?),
        "povm" => Truth::Povm(random_rank_r_povm(a.d, a.r, a.outcomes.unwrap_or(a.d * a.d), &mut rng).map_err(u)?),
        "bf-povm" => Truth::Povm(bf_povm(a.d, a.r).map_err(u)?),
        k => return Err(CliError::Usage(format!("unknown --kind {k:?}; expected state, process, povm or bf-povm"))),
    };
    let text = format!(
        "# kind={} d={} r={} seed={}\n{}",
        a.kind,
        a.d,
        a.r,
        a.seed,
        format_object(&obj)
    );
    match &a.out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            std::fs::write(p, text).map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = match &cli.cmd {
        Cmd::Cqst(a) => run("cqst", a),
        Cmd::Act(a) => run("act", a),
        Cmd::Pact(a) => run("pact", a),
        Cmd::Actqpt(a) => run("actqpt", a),
        Cmd::Pactqpt(a) => run("pactqpt", a),
        Cmd::Acqpt(a) => run("acqpt", a),
        Cmd::Cqdt(a) => run("cqdt", a),
        Cmd::Icc(a) => run_icc(a),
        Cmd::Gen(a) => run_gen(a),
        Cmd::Bench(a) => bench::run(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("usage error: {m}\nrun `cqt help` for the flag list");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
