//! Plain-text trace files.
//!
//! ```text
//! [config]
//! scheme = act
//! d = 2
//! ...
//! [truth]            (only when the config carries a known object, see format_object)
//! kind = state
//! matrix 2 2
//! <re im re im ...>  one line per row
//! [iterations]
//! index,setting,outcomes,s_raw,s_norm,fidelity,wall_ms
//! 1,computational,2,...
//! [estimator]
//! terminal_count = 2
//! total_outcomes = 4
//! reason = certified
//! fidelity = 1e0
//! blocks = 1
//! matrix 2 2
//! ...
//! ```
//! Reals use 17 significant digits so every value round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::channels::KrausSet;
use crate::convex::{DataConstraint, FeasibleSetSpec, ObjectKind, Term};
use crate::error::{Error, Result};
use crate::qcore::linalg::{c, CMatrix};
use crate::qcore::types::{DensityMatrix, Povm};
use crate::schemes::{IterationRecord, SchemeConfig, SchemeTrace, Truth};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "none".into(), T::to_string)
}

fn write_matrix(s: &mut String, m: &CMatrix) {
    let _ = writeln!(s, "matrix {} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).flat_map(|j| [num(m[(i, j)].re), num(m[(i, j)].im)]).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
}

pub fn format_trace(t: &SchemeTrace) -> String {
    let cfg = &t.config;
    let mut s = String::from("[config]\n");
    let dims = cfg.local_dims.as_ref().map(|v| v.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    let _ = writeln!(s, "scheme = {}", cfg.scheme);
    let _ = writeln!(s, "d = {}", cfg.d);
    let _ = writeln!(s, "r = {}", cfg.r);
    let _ = writeln!(s, "outcomes = {}", opt(&cfg.outcomes));
    let _ = writeln!(s, "copies = {}", cfg.copies);
    let _ = writeln!(s, "epsilon = {}", num(cfg.epsilon));
    let _ = writeln!(s, "budget = {}", opt(&cfg.budget));
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let _ = writeln!(s, "local_dims = {}", opt(&dims));
    let _ = writeln!(s, "mode = {}", cfg.mode);
    let _ = writeln!(s, "unitary_assumption = {}", cfg.unitary_assumption);
    if let Some(truth) = &cfg.truth {
        s.push_str("[truth]\n");
        s.push_str(&format_object(truth));
    }
    s.push_str("[iterations]\nindex,setting,outcomes,s_raw,s_norm,fidelity,wall_ms\n");
    for it in &t.iterations {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            it.index,
            it.setting.replace([',', '\n'], ";"),
            it.outcomes,
            num(it.s_raw),
            num(it.s_norm),
            it.fidelity.map_or_else(|| "none".into(), num),
            num(it.wall_ms)
        );
    }
    s.push_str("[estimator]\n");
    let _ = writeln!(s, "terminal_count = {}", t.terminal_count);
    let _ = writeln!(s, "total_outcomes = {}", t.total_outcomes);
    let _ = writeln!(s, "reason = {}", t.reason);
    let _ = writeln!(s, "fidelity = {}", t.fidelity.map_or_else(|| "none".into(), num));
    let _ = writeln!(s, "blocks = {}", t.estimator.len());
    for m in &t.estimator {
        write_matrix(&mut s, m);
    }
    s
}

/// `kind = state|process|povm` followed by the matrices (density matrix, Kraus
/// operators or POVM outcomes).
pub fn format_object(truth: &Truth) -> String {
    let mut s = String::new();
    let (kind, mats): (&str, Vec<CMatrix>) = match truth {
        Truth::State(r) => ("state", vec![r.matrix().clone()]),
        Truth::Process(k) => ("process", k.operators().to_vec()),
        Truth::Povm(p) => ("povm", p.outcomes().to_vec()),
    };
    let _ = writeln!(s, "kind = {kind}");
    for m in &mats {
        write_matrix(&mut s, m);
    }
    s
}

/// Inverse of [`format_object`]; the object is validated on the way in.
pub fn parse_object(text: &str) -> Result<Truth> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let sec = Section { name: "object", start: 1, lines };
    object_from(&mut Cursor::new(&sec))
}

fn object_from(tc: &mut Cursor<'_>) -> Result<Truth> {
    let (n, kind) = tc.key("kind")?;
    let mut mats = Vec::new();
    while !tc.done() {
        mats.push(tc.matrix()?);
    }
    let bad = |e: Error| Error::Parse { line: n, msg: format!("[{}] {e}", tc.section) };
    Ok(match kind {
        "state" => {
            if mats.len() != 1 {
                return Err(tc.err(n, "a state needs exactly one matrix"));
            }
            Truth::State(DensityMatrix::new(mats.pop().unwrap_or_default()).map_err(bad)?)
        }
        "process" => Truth::Process(KrausSet::new(mats).map_err(bad)?),
        "povm" => Truth::Povm(Povm::new(mats).map_err(bad)?),
        _ => return Err(tc.err(n, format!("unknown object kind {kind:?}"))),
    })
}

/// Feasible-set description for standalone certification:
///
/// ```text
/// kind = state        (state | choi | chi | povm)
/// d = 2
/// outcomes = 3        (povm only)
/// constraint 0.5      (target; `constraint <p> block <j>` addresses one POVM outcome)
/// matrix 2 2
/// ...
/// ```
/// Only single-term constraints can be written.
pub fn format_constraints(spec: &FeasibleSetSpec) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "kind = {}", spec.kind.name());
    let _ = writeln!(s, "d = {}", spec.kind.d());
    if let ObjectKind::Povm { outcomes, .. } = spec.kind {
        let _ = writeln!(s, "outcomes = {outcomes}");
    }
    for con in &spec.constraints {
        let [t] = con.functional.as_slice() else {
            return Err(Error::ConstraintViolation("constraint files hold single-term functionals only".into()));
        };
        let _ = writeln!(s, "constraint {} block {}", num(con.target), t.block);
        write_matrix(&mut s, &t.op);
    }
    Ok(s)
}

pub fn parse_constraints(text: &str) -> Result<FeasibleSetSpec> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let sec = Section { name: "constraints", start: 1, lines };
    let mut cur = Cursor::new(&sec);
    let (kn, kind_name) = cur.key("kind")?;
    let d: usize = cur.parsed("d")?;
    let kind = match kind_name {
        "state" => ObjectKind::State { d },
        "choi" => ObjectKind::Choi { d },
        "chi" => ObjectKind::Chi { d },
        "povm" => ObjectKind::Povm { d, outcomes: cur.parsed("outcomes")? },
        _ => return Err(cur.err(kn, format!("unknown kind {kind_name:?}"))),
    };
    let mut spec = FeasibleSetSpec::new(kind).map_err(|e| cur.err(kn, e.to_string()))?;
    while !cur.done() {
        let (n, head) = cur.next("constraint")?;
        let f: Vec<&str> = head.split_whitespace().collect();
        let target = match f.as_slice() {
            ["constraint", p, ..] => p.parse::<f64>().map_err(|_| cur.err(n, format!("bad target {p:?}")))?,
            _ => return Err(cur.err(n, "expected `constraint <target> [block <j>]`")),
        };
        let block = match f.as_slice() {
            [_, _] => 0,
            [_, _, "block", j] => j.parse::<usize>().map_err(|_| cur.err(n, format!("bad block {j:?}")))?,
            _ => return Err(cur.err(n, "expected `constraint <target> [block <j>]`")),
        };
        let op = cur.matrix()?;
        spec.push(DataConstraint { functional: vec![Term { block, op }], target }).map_err(|e| cur.err(n, e.to_string()))?;
    }
    Ok(spec)
}

pub fn write_trace(path: &Path, t: &SchemeTrace) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, format_trace(t))?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<SchemeTrace> {
    parse_trace(&fs::read_to_string(path)?)
}

/// Lines of one section, with 1-based line numbers.
struct Section<'a> {
    name: &'a str,
    start: usize,
    lines: Vec<(usize, &'a str)>,
}

struct Cursor<'a> {
    section: &'a str,
    lines: &'a [(usize, &'a str)],
    pos: usize,
    end_line: usize,
}

impl<'a> Cursor<'a> {
    fn new(sec: &'a Section<'a>) -> Self {
        let end_line = sec.lines.last().map_or(sec.start, |l| l.0);
        Self { section: sec.name, lines: &sec.lines, pos: 0, end_line }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { line, msg: format!("[{}] {}", self.section, msg.into()) }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let l = self.lines.get(self.pos).copied().ok_or_else(|| self.err(self.end_line, format!("missing {what}")))?;
        self.pos += 1;
        Ok(l)
    }

    fn done(&self) -> bool {
        self.pos >= self.lines.len()
    }

    fn key(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, l) = self.next(&format!("field {key}"))?;
        let (k, v) = l.split_once('=').ok_or_else(|| self.err(n, format!("expected `{key} = ...`")))?;
        if k.trim() != key {
            return Err(self.err(n, format!("expected field {key}, found {}", k.trim())));
        }
        Ok((n, v.trim()))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (n, v) = self.key(key)?;
        v.parse().map_err(|_| self.err(n, format!("bad value for {key}: {v:?}")))
    }

    fn optional<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        let (n, v) = self.key(key)?;
        if v == "none" {
            return Ok(None);
        }
        v.parse().map(Some).map_err(|_| self.err(n, format!("bad value for {key}: {v:?}")))
    }

    fn matrix(&mut self) -> Result<CMatrix> {
        let (n, head) = self.next("matrix header")?;
        let dims: Vec<usize> = head
            .strip_prefix("matrix ")
            .map(|r| r.split_whitespace().filter_map(|x| x.parse().ok()).collect())
            .unwrap_or_default();
        if dims.len() != 2 {
            return Err(self.err(n, "expected `matrix <rows> <cols>`"));
        }
        let mut m = CMatrix::zeros(dims[0], dims[1]);
        for i in 0..dims[0] {
            let (n, row) = self.next(&format!("matrix row {i}"))?;
            let v: Vec<f64> = row
                .split_whitespace()
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| self.err(n, format!("bad number in matrix row {i}")))?;
            if v.len() != 2 * dims[1] {
                return Err(self.err(n, format!("matrix row {i} has {} values, expected {}", v.len(), 2 * dims[1])));
            }
            for j in 0..dims[1] {
                m[(i, j)] = c(v[2 * j], v[2 * j + 1]);
            }
        }
        Ok(m)
    }
}

fn split_sections(text: &str) -> Result<Vec<Section<'_>>> {
    let mut out: Vec<Section<'_>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let n = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            out.push(Section { name, start: n, lines: Vec::new() });
        } else {
            match out.last_mut() {
                Some(s) => s.lines.push((n, line)),
                None => return Err(Error::Parse { line: n, msg: "content before the [config] section".into() }),
            }
        }
    }
    Ok(out)
}

fn parse_f(s: &str) -> Option<f64> {
    s.parse().ok()
}

pub fn parse_trace(text: &str) -> Result<SchemeTrace> {
    let sections = split_sections(text)?;
    let last_line = text.lines().count();
    let find = |name: &str| -> Result<&Section<'_>> {
        sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Parse { line: last_line, msg: format!("missing section [{name}]") })
    };
    let mut cur = Cursor::new(find("config")?);
    let mut cfg = SchemeConfig::new(cur.parsed("scheme")?, cur.parsed("d")?, cur.parsed("r")?);
    cfg.outcomes = cur.optional("outcomes")?;
    cfg.copies = cur.parsed("copies")?;
    cfg.epsilon = cur.parsed("epsilon")?;
    cfg.budget = cur.optional("budget")?;
    cfg.seed = cur.parsed("seed")?;
    cfg.local_dims = match cur.key("local_dims")? {
        (_, "none") => None,
        (n, v) => Some(
            v.split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| cur.err(n, format!("bad local_dims {v:?}")))?,
        ),
    };
    cfg.mode = cur.parsed("mode")?;
    cfg.unitary_assumption = cur.parsed("unitary_assumption")?;

    if let Some(sec) = sections.iter().find(|s| s.name == "truth") {
        cfg.truth = Some(object_from(&mut Cursor::new(sec))?);
    }

    let sec = find("iterations")?;
    let mut iterations = Vec::new();
    for (k, &(n, line)) in sec.lines.iter().enumerate() {
        if k == 0 && line.starts_with("index,") {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let err = |what: &str| Error::Parse { line: n, msg: format!("[iterations] bad {what}") };
        if f.len() != 7 {
            return Err(err("row: expected 7 fields"));
        }
        iterations.push(IterationRecord {
            index: f[0].parse().map_err(|_| err("index"))?,
            setting: f[1].to_string(),
            outcomes: f[2].parse().map_err(|_| err("outcomes"))?,
            s_raw: parse_f(f[3]).ok_or_else(|| err("s_raw"))?,
            s_norm: parse_f(f[4]).ok_or_else(|| err("s_norm"))?,
            fidelity: if f[5] == "none" { None } else { Some(parse_f(f[5]).ok_or_else(|| err("fidelity"))?) },
            wall_ms: parse_f(f[6]).ok_or_else(|| err("wall_ms"))?,
        });
    }

    let mut cur = Cursor::new(find("estimator")?);
    let terminal_count = cur.parsed("terminal_count")?;
    let total_outcomes = cur.parsed("total_outcomes")?;
    let reason = cur.parsed("reason")?;
    let fidelity = cur.optional("fidelity")?;
    let blocks: usize = cur.parsed("blocks")?;
    let estimator = (0..blocks).map(|_| cur.matrix()).collect::<Result<Vec<_>>>()?;
    Ok(SchemeTrace { config: cfg, iterations, terminal_count, total_outcomes, reason, estimator, fidelity })
}
