use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use biver::oracle::{
    check_aa, check_ae, Bounds, Counterexample, FailReason, Inconclusive, InconclusiveReason,
    OracleError, Verdict,
};
use biver::semantics::{Domain, EvalError, Store, Value};
use biver::structure::{bframe_violations, kateq, left_proj, right_proj, wellformed};
use biver::syntax::sort::{check_problem, SortError};
use biver::syntax::{parse_problem, Command, ParseError, Problem, SpecKind, Var};
use biver::transform::{chk, default_avoid, TransformError};
use biver::translate::{to_unary, TranslateError};
use biver::vcgen::smt::{check_obligations, SmtVerdict, SolverAnswer, SolverConfig, SolverError};
use biver::vcgen::{obligations, VcError};
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{source}", .path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: {source}", .path.display())]
    Sort { path: PathBuf, source: SortError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Vc(#[from] VcError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl CliError {
    pub fn to_json(&self) -> Json {
        json!({ "status": "error", "exit_code": Status::Error.exit_code(), "error": self.to_string() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Checks passed, or the property was verified within the bounds.
    Ok,
    Refuted,
    Inconclusive,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Refuted => 1,
            Status::Inconclusive => 2,
            Status::Error => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub status: Status,
    pub text: String,
    pub json: Json,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Oracle,
    Smt,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Backend, String> {
        match s {
            "oracle" => Ok(Backend::Oracle),
            "smt" => Ok(Backend::Smt),
            _ => Err(format!("unknown backend '{s}' (expected oracle or smt)")),
        }
    }
}

/// Parse `lo..hi`.
pub fn parse_domain(s: &str) -> Result<Domain, String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, found '{s}'"))?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad lower bound in '{s}'"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad upper bound in '{s}'"))?;
    if lo > hi {
        return Err(format!("empty range '{s}'"));
    }
    Ok(Domain::new(lo, hi))
}

/// Parse `name=lo..hi`.
pub fn parse_init(s: &str) -> Result<(String, Domain), String> {
    let (name, range) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=lo..hi, found '{s}'"))?;
    Ok((name.trim().to_string(), parse_domain(range)?))
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub backend: Backend,
    pub domain: Domain,
    pub fuel: u32,
    /// Per-variable initial ranges, overriding `domain` for the initial states.
    pub init: Vec<(String, Domain)>,
    /// Solver command line; falls back to the environment, then the default.
    pub solver: Option<String>,
    pub timeout: Duration,
}

impl Default for VerifyOptions {
    fn default() -> VerifyOptions {
        VerifyOptions {
            backend: Backend::Oracle,
            domain: Domain::new(-2, 2),
            fuel: 32,
            init: Vec::new(),
            solver: None,
            timeout: Duration::from_secs(10),
        }
    }
}

impl VerifyOptions {
    fn bounds(&self, p: &Problem) -> Result<Bounds, CliError> {
        let mut bounds = Bounds::new(self.domain, self.fuel);
        for (name, range) in &self.init {
            let x = p
                .vars
                .iter()
                .copied()
                .find(|v| v.name() == name)
                .ok_or_else(|| CliError::Usage(format!("--init: '{name}' is not a declared variable")))?;
            bounds = bounds.with_init(x, *range);
        }
        Ok(bounds)
    }

    fn solver_config(&self) -> SolverConfig {
        match &self.solver {
            Some(cmd) => SolverConfig::new(cmd, self.timeout),
            None => SolverConfig::from_env(self.timeout),
        }
    }
}

pub fn load(path: &Path) -> Result<Problem, CliError> {
    let src = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let p = parse_problem(&src).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    check_problem(&p).map_err(|source| CliError::Sort {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(p)
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

fn bounds_text(b: &Bounds) -> String {
    let mut s = format!("domain {}..{}, fuel {}", b.dom.lo, b.dom.hi, b.fuel);
    if !b.init.is_empty() {
        let init: Vec<String> = b
            .init
            .iter()
            .map(|(x, d)| format!("{}={}..{}", x.name(), d.lo, d.hi))
            .collect();
        write!(s, ", init {}", init.join(" ")).unwrap();
    }
    s
}

fn bounds_json(b: &Bounds) -> Json {
    let init: Map<String, Json> = b
        .init
        .iter()
        .map(|(x, d)| (x.name().to_string(), json!([d.lo, d.hi])))
        .collect();
    json!({ "domain": [b.dom.lo, b.dom.hi], "fuel": b.fuel, "init": init })
}

fn store_json(s: &Store) -> Json {
    let m: Map<String, Json> = s
        .sorted_by_name()
        .into_iter()
        .map(|(x, v)| {
            let v = match v {
                Value::Int(n) => json!(n),
                Value::Bool(b) => json!(b),
            };
            (x.name().to_string(), v)
        })
        .collect();
    Json::Object(m)
}

fn pair_json(s: &Store, t: &Store) -> Json {
    json!({ "left": store_json(s), "right": store_json(t) })
}

// ---------------------------------------------------------------------------
// check

fn projection_check(name: &str, given: Option<&Command>, proj: &Command, text: &mut String) -> (bool, Json) {
    match given {
        None => {
            writeln!(text, "{name} projection: no program given").unwrap();
            (true, json!({ "given": false, "matches": null, "projection": proj.to_string() }))
        }
        Some(c) => {
            let ok = kateq(proj, c);
            if ok {
                writeln!(text, "{name} projection: matches").unwrap();
            } else {
                writeln!(text, "{name} projection: differs from the given program").unwrap();
                writeln!(text, "  projection:\n{}", indent(&proj.to_string(), 4)).unwrap();
            }
            (ok, json!({ "given": true, "matches": ok, "projection": proj.to_string() }))
        }
    }
}

fn indent(s: &str, n: usize) -> String {
    let pad = " ".repeat(n);
    s.lines().map(|l| format!("{pad}{l}")).collect::<Vec<_>>().join("\n")
}

/// Parse, sort-check, and check well-formedness, framing, and that the
/// bi-command projects onto the given programs.
pub fn cmd_check(path: &Path) -> Result<Report, CliError> {
    let p = load(path)?;
    let mut text = format!("check: {}\nsorts: ok\n", file_name(path));

    let wf = wellformed(&p.bicom).err().unwrap_or_default();
    if wf.is_empty() {
        text.push_str("wellformed: ok\n");
    } else {
        text.push_str("wellformed: failed\n");
        for v in &wf {
            writeln!(text, "  {v}").unwrap();
        }
    }
    let frame = bframe_violations(&p.bicom, &default_avoid(&p));
    if frame.is_empty() {
        text.push_str("framed: ok\n");
    } else {
        text.push_str("framed: failed\n");
        for v in &frame {
            writeln!(text, "  {v}").unwrap();
        }
    }
    let (lok, ljson) = projection_check("left", p.left.as_ref(), &left_proj(&p.bicom), &mut text);
    let (rok, rjson) = projection_check("right", p.right.as_ref(), &right_proj(&p.bicom), &mut text);

    let ok = wf.is_empty() && frame.is_empty() && lok && rok;
    let status = if ok { Status::Ok } else { Status::Refuted };
    writeln!(text, "status: {}", if ok { "ok" } else { "failed" }).unwrap();
    let json = json!({
        "command": "check",
        "file": file_name(path),
        "status": if ok { "ok" } else { "failed" },
        "exit_code": status.exit_code(),
        "wellformed": { "ok": wf.is_empty(), "violations": wf.iter().map(|v| v.to_string()).collect::<Vec<_>>() },
        "framed": { "ok": frame.is_empty(), "violations": frame.iter().map(|v| v.to_string()).collect::<Vec<_>>() },
        "left_projection": ljson,
        "right_projection": rjson,
    });
    Ok(Report { status, text, json })
}

// ---------------------------------------------------------------------------
// transform / translate

/// The instrumented bi-command.
pub fn cmd_transform(path: &Path) -> Result<Report, CliError> {
    let p = load(path)?;
    let b = chk(&p.bicom, &default_avoid(&p))?;
    let out = b.to_string();
    let text = format!("{out}\n");
    let json = json!({
        "command": "transform",
        "file": file_name(path),
        "status": "ok",
        "exit_code": 0,
        "bicom": out,
    });
    Ok(Report {
        status: Status::Ok,
        text,
        json,
    })
}

/// The unary product program of the instrumented bi-command.
pub fn cmd_translate(path: &Path) -> Result<Report, CliError> {
    let p = load(path)?;
    let b = chk(&p.bicom, &default_avoid(&p))?;
    let out = to_unary(&b)?.to_string();
    let text = format!("{out}\n");
    let json = json!({
        "command": "translate",
        "file": file_name(path),
        "status": "ok",
        "exit_code": 0,
        "program": out,
    });
    Ok(Report {
        status: Status::Ok,
        text,
        json,
    })
}

// ---------------------------------------------------------------------------
// verify

fn reason_json(r: &FailReason, vars: &[Var]) -> Json {
    match r {
        FailReason::BicomFails { left, right } => json!({
            "kind": "alignment_fails", "at": pair_json(&left.restrict(vars), &right.restrict(vars))
        }),
        FailReason::PostViolated { left, right } => json!({
            "kind": "post_violated", "at": pair_json(&left.restrict(vars), &right.restrict(vars))
        }),
        FailReason::LeftFails { left } => json!({
            "kind": "left_fails", "at": { "left": store_json(&left.restrict(vars)) }
        }),
        FailReason::NoWitness { left } => json!({
            "kind": "no_witness", "at": { "left": store_json(&left.restrict(vars)) }
        }),
    }
}

fn verdict_json(v: &Verdict, vars: &[Var]) -> Json {
    match v {
        Verdict::HoldsBounded => json!({ "result": "holds_bounded" }),
        Verdict::Fails(Counterexample { left, right, reason }) => json!({
            "result": "fails",
            "initial": pair_json(&left.restrict(vars), &right.restrict(vars)),
            "reason": reason_json(reason, vars),
        }),
        Verdict::Inconclusive(Inconclusive { reason, left, right }) => json!({
            "result": "inconclusive",
            "initial": pair_json(&left.restrict(vars), &right.restrict(vars)),
            "reason": match reason {
                InconclusiveReason::FuelExhausted => "fuel_exhausted",
                InconclusiveReason::WitnessBound => "witness_bound",
            },
        }),
    }
}

/// Drop generated snapshot variables before showing a verdict.
fn visible(v: &Verdict, vars: &[Var]) -> Verdict {
    let r = |s: &Store| s.restrict(vars);
    match v {
        Verdict::HoldsBounded => Verdict::HoldsBounded,
        Verdict::Fails(c) => Verdict::Fails(Counterexample {
            left: r(&c.left),
            right: r(&c.right),
            reason: match &c.reason {
                FailReason::BicomFails { left, right } => FailReason::BicomFails {
                    left: r(left),
                    right: r(right),
                },
                FailReason::PostViolated { left, right } => FailReason::PostViolated {
                    left: r(left),
                    right: r(right),
                },
                FailReason::LeftFails { left } => FailReason::LeftFails { left: r(left) },
                FailReason::NoWitness { left } => FailReason::NoWitness { left: r(left) },
            },
        }),
        Verdict::Inconclusive(i) => Verdict::Inconclusive(Inconclusive {
            reason: i.reason,
            left: r(&i.left),
            right: r(&i.right),
        }),
    }
}

fn verdict_status(v: &Verdict) -> Status {
    match v {
        Verdict::HoldsBounded => Status::Ok,
        Verdict::Fails(_) => Status::Refuted,
        Verdict::Inconclusive(_) => Status::Inconclusive,
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Ok => "verified",
        Status::Refuted => "refuted",
        Status::Inconclusive => "inconclusive",
        Status::Error => "error",
    }
}

fn spec_word(k: SpecKind) -> &'static str {
    match k {
        SpecKind::ForallExists => "ae",
        SpecKind::ForallForall => "aa",
    }
}

/// Verify the problem's specification with the chosen backend.
pub fn cmd_verify(path: &Path, opts: &VerifyOptions) -> Result<Report, CliError> {
    let p = load(path)?;
    let bounds = opts.bounds(&p)?;
    match opts.backend {
        Backend::Oracle => verify_oracle(path, &p, &bounds),
        Backend::Smt => verify_smt(path, &p, &bounds, opts),
    }
}

fn verify_oracle(path: &Path, p: &Problem, bounds: &Bounds) -> Result<Report, CliError> {
    let vars = &p.vars;
    let mut text = format!(
        "verify: {} (oracle, {})\nbounds: {}\n",
        file_name(path),
        spec_word(p.spec.kind),
        bounds_text(bounds)
    );
    let (status, alignment, projections) = match p.spec.kind {
        SpecKind::ForallForall => {
            let v = check_aa(&p.bicom, &p.spec.pre, &p.spec.post, vars, bounds)?;
            writeln!(text, "alignment: {}", visible(&v, vars)).unwrap();
            (verdict_status(&v), v, None)
        }
        SpecKind::ForallExists => {
            if let Err(wf) = wellformed(&p.bicom) {
                return Err(OracleError::NotWellFormed(wf).into());
            }
            let frame = bframe_violations(&p.bicom, vars);
            if !frame.is_empty() {
                return Err(OracleError::NotFramed(frame).into());
            }
            let b = chk(&p.bicom, &default_avoid(p))?;
            let aa = check_aa(&b, &p.spec.pre, &p.spec.post, vars, bounds)?;
            let ae = check_ae(
                &left_proj(&p.bicom),
                &right_proj(&p.bicom),
                &p.spec.pre,
                &p.spec.post,
                vars,
                bounds,
            )?;
            writeln!(text, "instrumented alignment: {}", visible(&aa, vars)).unwrap();
            writeln!(text, "projections: {}", visible(&ae, vars)).unwrap();
            let status = match (&aa, &ae) {
                (Verdict::HoldsBounded, Verdict::Fails(_)) => {
                    text.push_str("warning: the alignment holds but the projections fail\n");
                    Status::Refuted
                }
                (Verdict::HoldsBounded, _) => Status::Ok,
                (Verdict::Fails(_), _) => Status::Refuted,
                (Verdict::Inconclusive(_), Verdict::Fails(_)) => Status::Refuted,
                (Verdict::Inconclusive(_), _) => Status::Inconclusive,
            };
            (status, aa, Some(ae))
        }
    };
    writeln!(text, "status: {}", status_word(status)).unwrap();
    let json = json!({
        "command": "verify",
        "file": file_name(path),
        "backend": "oracle",
        "spec": spec_word(p.spec.kind),
        "bounds": bounds_json(bounds),
        "status": status_word(status),
        "exit_code": status.exit_code(),
        "alignment": verdict_json(&alignment, vars),
        "projections": projections.as_ref().map(|v| verdict_json(v, vars)),
    });
    Ok(Report { status, text, json })
}

fn verify_smt(path: &Path, p: &Problem, bounds: &Bounds, opts: &VerifyOptions) -> Result<Report, CliError> {
    let cfg = opts.solver_config();
    let obs = obligations(p)?;
    let (verdict, results) = check_obligations(&obs, &cfg, &bounds.dom)?;
    let solver = cfg.command.join(" ");
    let mut text = format!(
        "verify: {} (smt, {})\nsolver: {solver}\nbounds: {} (counterexample replay)\n",
        file_name(path),
        spec_word(p.spec.kind),
        bounds_text(bounds)
    );
    let mut items = Vec::with_capacity(results.len());
    for r in &results {
        let label = r.obligation.label();
        let mut item = json!({
            "label": label,
            "origin": r.obligation.origin.to_string(),
            "goal": r.obligation.goal.to_string(),
            "formula": r.obligation.formula.to_string(),
        });
        match &r.answer {
            SolverAnswer::Unsat => {
                writeln!(text, "valid    {label}").unwrap();
                item["answer"] = json!("unsat");
            }
            SolverAnswer::Unknown(why) => {
                writeln!(text, "unknown  {label} ({why})").unwrap();
                item["answer"] = json!("unknown");
                item["reason"] = json!(why);
            }
            SolverAnswer::Sat(_) => {
                writeln!(text, "invalid  {label}").unwrap();
                item["answer"] = json!("sat");
                if let Some((s, t, holds)) = &r.replay {
                    let (s, t) = (s.restrict(&p.vars), t.restrict(&p.vars));
                    writeln!(text, "  counterexample: {s} | {t}").unwrap();
                    writeln!(
                        text,
                        "  replay: {}",
                        if *holds { "obligation holds there (spurious)" } else { "obligation fails there" }
                    )
                    .unwrap();
                    item["counterexample"] = pair_json(&s, &t);
                    item["replay_holds"] = json!(holds);
                }
            }
        }
        items.push(item);
    }
    let status = match verdict {
        SmtVerdict::Verified => Status::Ok,
        SmtVerdict::Refuted => Status::Refuted,
        SmtVerdict::Unknown => Status::Inconclusive,
    };
    writeln!(text, "status: {}", status_word(status)).unwrap();
    let json = json!({
        "command": "verify",
        "file": file_name(path),
        "backend": "smt",
        "spec": spec_word(p.spec.kind),
        "solver": solver,
        "timeout_ms": opts.timeout.as_millis() as u64,
        "bounds": bounds_json(bounds),
        "status": status_word(status),
        "exit_code": status.exit_code(),
        "obligations": items,
    });
    Ok(Report { status, text, json })
}
