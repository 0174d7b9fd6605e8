//! Verb dispatch.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use afenv::envelope::{envelope_diagram, EnvelopeError, EnvelopeResult};
use afenv::numeric::{contractivity_probe, cycle_norm_pair, cycle_pattern, operator_norm, DEFAULT_TOL};
use afenv::system::{telescope, triangular_system_from_bratteli, TelescopedSystem};
use afenv::{decide_compression_type, Decision, DirectSystem, SystemError};
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, EXIT_REJECTED};
use crate::export::{self, json, round_sig};
use crate::input::{parse_diagram_file, parse_maps, parse_system_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Verb {
    /// Check a system file, deciding every map.
    Validate,
    /// Decompose each map or report its cycle obstruction.
    Decide,
    /// Drop the unstable initial stages of a system.
    Telescope,
    /// Bratteli diagram of the enveloping AF algebra.
    Diagram,
    /// Bratteli diagram of the C*-envelope.
    Envelope,
    /// Witness elements of maps that are not contractive.
    Witness,
    /// Random contractivity check of every map.
    Probe,
    /// Realize a diagram by a triangular system and recover it.
    Roundtrip,
    /// Norms of the m-cycle pattern and its truncation.
    Norms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Dot,
}

/// Inclusive range of cycle lengths, written `a..b`, `a..=b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MRange {
    pub from: usize,
    pub to: usize,
}

impl Default for MRange {
    fn default() -> Self {
        MRange { from: 2, to: 10 }
    }
}

impl FromStr for MRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad cycle length {t:?}"));
        let (from, to) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => (parse(s)?, parse(s)?),
        };
        if from < 2 || to < from {
            return Err(format!("range {s:?} must satisfy 2 <= from <= to"));
        }
        Ok(MRange { from, to })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub tol: f64,
    pub trials: usize,
    pub seed: u64,
    pub format: Format,
    pub m: MRange,
    pub out: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol: DEFAULT_TOL,
            trials: 500,
            seed: 0,
            format: Format::Json,
            m: MRange::default(),
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub verb: Verb,
    pub input: Option<PathBuf>,
    pub options: Options,
}

/// What a successful run prints, and its exit status (0, or 2 when the
/// input was mathematically rejected).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout }
    }
}

/// `AFENV_SEED`, when set, wins over the `--seed` flag.
pub fn resolve_seed(flag: u64, env: Option<&str>) -> Result<u64, CliError> {
    match env {
        None => Ok(flag),
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("AFENV_SEED must be an unsigned integer, got {v:?}"))),
    }
}

pub fn run(cmd: &Command) -> Result<Outcome, CliError> {
    let o = &cmd.options;
    if !(o.tol > 0.0 && o.tol.is_finite()) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    if o.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let dot_verbs = [Verb::Diagram, Verb::Envelope, Verb::Roundtrip];
    if o.format == Format::Dot && !dot_verbs.contains(&cmd.verb) {
        return Err(CliError::Usage(format!("--format dot is not available for {:?}", cmd.verb)));
    }
    let input = || {
        cmd.input
            .as_deref()
            .ok_or_else(|| CliError::Usage("this verb needs an input file".into()))
    };
    match cmd.verb {
        Verb::Validate => validate(input()?, o),
        Verb::Decide => decide(input()?, o),
        Verb::Telescope => telescope_verb(input()?, o),
        Verb::Diagram => diagram(input()?, o),
        Verb::Envelope => envelope(input()?, o),
        Verb::Witness => witness(input()?, o),
        Verb::Probe => probe(input()?, o),
        Verb::Roundtrip => roundtrip(input()?, o),
        Verb::Norms => norms(o),
    }
}

fn write_out(o: &Options, files: &[(&str, &str)]) -> Result<(), CliError> {
    let Some(dir) = &o.out else { return Ok(()) };
    let io = |p: &Path, e: std::io::Error| CliError::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (name, contents) in files {
        let p = dir.join(name);
        fs::write(&p, contents).map_err(|e| io(&p, e))?;
    }
    Ok(())
}

fn emit<T: Serialize>(o: &Options, name: &str, value: &T) -> Result<Outcome, CliError> {
    let text = json(value);
    write_out(o, &[(&format!("{name}.json"), &text)])?;
    Ok(Outcome::ok(text))
}

fn telescoped(s: &DirectSystem) -> Result<TelescopedSystem, CliError> {
    telescope(s).map_err(|e| match e {
        SystemError::NotStabilized { .. } => CliError::NotStabilized(format!("{e}; supply more levels")),
        other => CliError::Validation {
            pointer: String::new(),
            message: other.to_string(),
        },
    })
}

fn system_error(e: SystemError) -> CliError {
    CliError::Validation {
        pointer: String::new(),
        message: e.to_string(),
    }
}

fn validate(path: &Path, o: &Options) -> Result<Outcome, CliError> {
    let s = parse_system_file(path)?;
    let value = json!({
        "valid": true,
        "spaces": s.spaces().len(),
        "maps": s.num_maps(),
        "tail": s.tail(),
        "components": s.decompositions().iter().map(|d| d.components().len()).collect::<Vec<_>>(),
    });
    emit(o, "validate", &value)
}

fn decide(path: &Path, o: &Options) -> Result<Outcome, CliError> {
    let src = parse_maps(path)?;
    let mut rejected = false;
    let maps: Vec<export::DecisionOut> = src
        .maps()
        .iter()
        .enumerate()
        .map(|(k, f)| match decide_compression_type(f) {
            Decision::Compression(d) => export::compression(k, &d),
            Decision::Obstruction(ob) => {
                rejected = true;
                export::obstruction(k, f, &ob)
            }
        })
        .collect();
    let mut out = emit(o, "decide", &json!({ "maps": maps }))?;
    if rejected {
        out.code = EXIT_REJECTED;
    }
    Ok(out)
}

fn telescope_verb(path: &Path, o: &Options) -> Result<Outcome, CliError> {
    let t = telescoped(&parse_system_file(path)?)?;
    emit(o, "telescope", &export::telescoped(&t))
}

fn diagram(path: &Path, o: &Options) -> Result<Outcome, CliError> {
    let t = telescoped(&parse_system_file(path)?)?;
    let d = t.bratteli().map_err(system_error)?;
    let (js, dt) = (json(&d), export::dot(&d, None));
    write_out(o, &[("bratteli.json", &js), ("bratteli.dot", &dt)])?;
    Ok(Outcome::ok(if o.format == Format::Dot { dt } else { js }))
}

fn envelope_of(t: &TelescopedSystem) -> Result<EnvelopeResult, CliError> {
    envelope_diagram(t).map_err(|e| match e {
        EnvelopeError::NotEssentiallyUnital { defects } => CliError::NotEssentiallyUnital { defects },
        EnvelopeError::NonStationary => CliError::NonStationary(e.to_string()),
        EnvelopeError::MissingQ { .. } => CliError::Validation {
            pointer: String::new(),
            message: e.to_string(),
        },
        EnvelopeError::System(s) => system_error(s),
    })
}

fn envelope_files(r: &EnvelopeResult) -> [(String, String); 4] {
    [
        ("bratteli.json".into(), json(&r.diagram)),
        ("envelope.json".into(), json(r)),
        ("envelope.dot".into(), export::dot(&r.diagram, Some(&r.removed))),
        ("quotient.dot".into(), export::dot(&r.quotient, None)),
    ]
}

fn envelope(path: &Path, o: &Options) -> Result<Outcome, CliError> {
    let t = telescoped(&parse_system_file(path)?)?;
    let r = envelope_of(&t)?;
    let files = envelope_files(&r);
    let refs: Vec<(&str, &str)> = files.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    write_out(o, &refs)?;
    Ok(Outcome::ok(match o.format {
        Format::Json => files[1].1.clone(),
        Format::Dot => files[2].1.clone(),
    }))
}

fn witness(path: &Path, o: &Options) -> Result<Outcome, CliError> {
    let src = parse_maps(path)?;
    let found: Vec<serde_json::Value> = src
        .maps()
        .iter()
        .enumerate()
        .filter_map(|(k, f)| {
            decide_compression_type(f).obstruction().map(|ob| {
                let w = export::witness(f, ob);
                let ratio = if w.witness_norm > 0.0 { round_sig(w.image_norm / w.witness_norm) } else { 0.0 };
                json!({ "index": k, "ratio": ratio, "obstruction": w })
            })
        })
        .collect();
    let rejected = !found.is_empty();
    let mut out = emit(o, "witness", &json!({ "witnesses": found }))?;
    if rejected {
        out.code = EXIT_REJECTED;
    }
    Ok(out)
}

fn probe(path: &Path, o: &Options) -> Result<Outcome, CliError> {
    let src = parse_maps(path)?;
    let mut rows = Vec::new();
    for (k, f) in src.maps().iter().enumerate() {
        let decision = decide_compression_type(f);
        let extra: Vec<_> = decision.obstruction().map(|ob| ob.witness.clone()).into_iter().collect();
        let report = contractivity_probe(f, o.trials, o.seed, o.tol, &extra).map_err(|e| CliError::Validation {
            pointer: format!("/maps/{k}"),
            message: e.to_string(),
        })?;
        rows.push(export::probe(k, decision.is_compression(), &report));
    }
    let rejected = rows.iter().any(|r| !r.contractive);
    let mut out = emit(o, "probe", &json!({ "seed": o.seed, "trials": o.trials, "maps": rows }))?;
    if rejected {
        out.code = EXIT_REJECTED;
    }
    Ok(out)
}

fn roundtrip(path: &Path, o: &Options) -> Result<Outcome, CliError> {
    let d = parse_diagram_file(path)?;
    let dims = d.all_dims();
    let transitions = d.transition_rows();
    let s = triangular_system_from_bratteli(&dims, &transitions).map_err(system_error)?;
    let r = envelope_of(&telescoped(&s)?)?;
    if r.quotient.all_dims() != dims || r.quotient.transition_rows() != transitions {
        return Err(CliError::Mismatch(format!(
            "recovered diagram differs from the input: {}",
            serde_json::to_string(&r.quotient).expect("serializable")
        )));
    }
    let sizes: Vec<usize> = s.spaces().iter().map(|g| g.n()).collect();
    let files = envelope_files(&r);
    let summary = json(&json!({ "match": true, "spaces": sizes, "envelope": r }));
    write_out(
        o,
        &[("roundtrip.json", &summary), ("envelope.dot", &files[2].1), ("quotient.dot", &files[3].1)],
    )?;
    Ok(Outcome::ok(match o.format {
        Format::Json => summary,
        Format::Dot => files[2].1.clone(),
    }))
}

#[derive(Debug, Serialize)]
struct NormRow {
    m: usize,
    cycle: f64,
    truncated: f64,
    cycle_formula: f64,
    truncated_formula: f64,
    ratio: f64,
    agree: bool,
}

fn norms(o: &Options) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    for m in o.m.from..=o.m.to {
        let norm_of = |truncated| {
            operator_norm(&cycle_pattern(m, truncated), o.tol)
                .map(|r| r.value)
                .map_err(|e| CliError::Validation {
                    pointer: String::new(),
                    message: e.to_string(),
                })
        };
        let (cycle, truncated) = (norm_of(false)?, norm_of(true)?);
        let (cf, tf) = cycle_norm_pair(m);
        rows.push(NormRow {
            m,
            cycle: round_sig(cycle),
            truncated: round_sig(truncated),
            cycle_formula: round_sig(cf),
            truncated_formula: round_sig(tf),
            ratio: round_sig(tf / cf),
            agree: (cycle - cf).abs() <= o.tol && (truncated - tf).abs() <= o.tol,
        });
    }
    emit(o, "norms", &rows)
}
