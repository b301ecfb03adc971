use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use cqt::harness::{parse_object, ExperimentSpec};
use cqt::inference::Copies;
use cqt::schemes::{AcqptMode, SchemeConfig, SchemeKind, DEFAULT_EPSILON};

use crate::CliError;

/// Flags shared by every scheme subcommand. Unset flags fall back to the
/// `--config` file, then to the listed default.
#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Hilbert-space dimension [default: 4]
    #[arg(long)]
    pub d: Option<usize>,
    /// rank of the generated state, process or POVM [default: 1]
    #[arg(long)]
    pub r: Option<usize>,
    /// rh or rlh; only cqst chooses a scheme [default: rh]
    #[arg(long)]
    pub scheme: Option<String>,
    /// number of independent trials [default: 1]
    #[arg(long)]
    pub trials: Option<usize>,
    /// master seed; trial i runs with splitmix64(seed + i) [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// copies per setting, an integer or inf [default: inf]
    #[arg(long)]
    pub copies: Option<String>,
    /// certification threshold on the normalised spread [default: 1e-6]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// iteration cap [default: 3(d+1) bases, 2d² inputs, 6d² probes]
    #[arg(long)]
    pub budget: Option<usize>,
    /// tensor factorisation of d, e.g. 2,2,2 [default: none; required by rlh, pact, pactqpt]
    #[arg(long = "local-dims")]
    pub local_dims: Option<String>,
    /// acqpt probes: ideal or realizable [default: ideal]
    #[arg(long)]
    pub mode: Option<String>,
    /// acqpt: take the next rank to be 1 [default: off]
    #[arg(long = "unitary-assumption")]
    pub unitary_assumption: bool,
    /// cqdt: number of POVM outcomes [default: d²]
    #[arg(long)]
    pub outcomes: Option<usize>,
    /// file holding the true object (see `gen`) instead of a generated one [default: generated]
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// worker threads [default: all cores]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// output directory for the trial and aggregate CSVs [default: none, print only]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// also write one trace file per trial into --out [default: off]
    #[arg(long)]
    pub traces: bool,
    /// key = value file with any of the flags above (flags win)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "d",
    "r",
    "scheme",
    "trials",
    "seed",
    "copies",
    "epsilon",
    "budget",
    "local-dims",
    "mode",
    "unitary-assumption",
    "outcomes",
    "truth",
    "jobs",
    "out",
    "traces",
];

/// `key = value` lines; `#` starts a comment; `_` and `-` are interchangeable in keys.
pub fn read_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{}:{}: expected key = value", path.display(), i + 1)));
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("{}:{}: unknown key {key:?}", path.display(), i + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

struct Resolver {
    file: HashMap<String, String>,
    echo: Vec<(String, String)>,
}

impl Resolver {
    fn pick<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display + Clone,
    {
        let v = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(s) => s.parse().map_err(|_| CliError::Usage(format!("config: bad value for {key}: {s:?}")))?,
                None => default,
            },
        };
        self.echo.push((key.to_string(), v.to_string()));
        Ok(v)
    }

    fn pick_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display + Clone,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) if s != "none" => {
                    Some(s.parse().map_err(|_| CliError::Usage(format!("config: bad value for {key}: {s:?}")))?)
                }
                _ => None,
            },
        };
        self.echo.push((key.to_string(), v.as_ref().map_or_else(|| "none".into(), T::to_string)));
        Ok(v)
    }

    fn pick_bool(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let v = if flag {
            true
        } else {
            match self.file.get(key) {
                Some(s) => s.parse().map_err(|_| CliError::Usage(format!("config: bad value for {key}: {s:?}")))?,
                None => false,
            }
        };
        self.echo.push((key.to_string(), v.to_string()));
        Ok(v)
    }
}

fn parse<T: FromStr>(what: &str, s: &str) -> Result<T, CliError> {
    s.parse().map_err(|_| CliError::Usage(format!("bad value for --{what}: {s:?}")))
}

pub fn parse_list(what: &str, s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',').map(|x| parse::<usize>(what, x.trim())).collect()
}

/// A fully resolved run: the experiment plus the key/value lines to echo.
pub struct Resolved {
    pub spec: ExperimentSpec,
    pub echo: Vec<(String, String)>,
}

/// Merge flags, config file and defaults for the subcommand `cmd`.
pub fn resolve(cmd: &str, args: &RunArgs) -> Result<Resolved, CliError> {
    let file = match &args.config {
        Some(p) => read_config_file(p)?,
        None => HashMap::new(),
    };
    let mut rv = Resolver { file, echo: vec![("command".into(), cmd.into())] };
    let d = rv.pick("d", args.d, 4usize)?;
    let r = rv.pick("r", args.r, 1usize)?;
    let scheme_name = rv.pick_opt("scheme", args.scheme.clone())?;
    let trials = rv.pick("trials", args.trials, 1usize)?;
    let seed = rv.pick("seed", args.seed, 0u64)?;
    let copies: Copies = parse("copies", &rv.pick("copies", args.copies.clone(), "inf".to_string())?)?;
    let epsilon = rv.pick("epsilon", args.epsilon, DEFAULT_EPSILON)?;
    let budget = rv.pick_opt("budget", args.budget)?;
    let local_dims = rv.pick_opt("local-dims", args.local_dims.clone())?;
    let mode: AcqptMode = parse("mode", &rv.pick("mode", args.mode.clone(), "ideal".to_string())?)?;
    let unitary = rv.pick_bool("unitary-assumption", args.unitary_assumption)?;
    let outcomes = rv.pick_opt("outcomes", args.outcomes)?;
    let truth_path: Option<String> = rv.pick_opt("truth", args.truth.as_ref().map(|p| p.display().to_string()))?;
    let jobs = rv.pick_opt("jobs", args.jobs)?;
    let out: Option<String> = rv.pick_opt("out", args.out.as_ref().map(|p| p.display().to_string()))?;
    let traces = rv.pick_bool("traces", args.traces)?;

    let scheme = match cmd {
        "cqst" => {
            let s: SchemeKind = parse("scheme", scheme_name.as_deref().unwrap_or("rh"))?;
            if !matches!(s, SchemeKind::Rh | SchemeKind::Rlh) {
                return Err(CliError::Usage(format!("cqst runs rh or rlh, not {s}")));
            }
            s
        }
        "acqpt" if unitary => SchemeKind::AcqptUnitary,
        other => {
            let s: SchemeKind = parse("scheme", other)?;
            if let Some(name) = &scheme_name {
                if parse::<SchemeKind>("scheme", name)? != s {
                    return Err(CliError::Usage(format!("--scheme {name} conflicts with the {cmd} subcommand")));
                }
            }
            s
        }
    };
    if d == 0 {
        return Err(CliError::Usage("--d must be at least 2".into()));
    }
    let mut cfg = SchemeConfig::new(scheme, d, r).with_seed(seed).with_copies(copies);
    cfg.epsilon = epsilon;
    cfg.budget = budget;
    cfg.mode = mode;
    cfg.unitary_assumption = unitary;
    cfg.outcomes = outcomes;
    cfg.local_dims = match local_dims {
        Some(s) => Some(parse_list("local-dims", &s)?),
        None => None,
    };
    if let Some(p) = truth_path {
        let text = std::fs::read_to_string(&p).map_err(|e| CliError::Usage(format!("cannot read truth {p}: {e}")))?;
        cfg.truth = Some(parse_object(&text).map_err(|e| CliError::Usage(format!("truth {p}: {e}")))?);
    }
    let spec = ExperimentSpec { config: cfg, trials, jobs, out_dir: out.map(PathBuf::from), write_traces: traces };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Resolved { spec, echo: rv.echo })
}
