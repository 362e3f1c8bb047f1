//! `qk`: truncated Quillen complexes of p-groups from the command line.
//!
//! Exit codes: 0 success or match, 1 mismatch or failed invariant, 2 invalid
//! spec or arguments, 3 refused by a feasibility gate.

mod spec;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qk_core::homology::{reduced_homology_torsion_free, HomologyProfile, OrderComplex};
use qk_core::posets::espec;
use qk_core::verify::{
    a2_is_empty, omega_sets, poset_of, predicted_from_report, verify_corollary3, verify_equivalence_a2_az,
    verify_main1, verify_prop_extra, verify_techlem, ComplexKind, Limits, VerificationReport,
};
use qk_core::QkError;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use spec::LoadedSpec;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<QkError> for Failure {
    fn from(e: QkError) -> Self {
        let code = match e {
            QkError::Infeasible(_) => 3,
            QkError::InvariantViolated(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "qk", version, about = "Exact homology of truncated Quillen complexes of odd p-groups")]
struct Cli {
    /// Refuse groups with more elements than this.
    #[arg(long, global = true, default_value_t = 200_000)]
    max_elements: usize,
    /// Refuse order complexes with more simplices than this.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    max_simplices: usize,
    /// Write the JSON document here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduced homology of A>=2 (or A>Z) with the prediction from E(P).
    Homology {
        /// Inline JSON spec or path to a spec file.
        spec: String,
        /// Use the elementary abelian subgroups strictly above Omega_1(Z(P)).
        #[arg(long)]
        reduce_to_z: bool,
        /// Print (degree, rank) and (n, a_n) tables as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// The extraspecial family E(P) and its counts a_n.
    Espec {
        spec: String,
        #[arg(long)]
        csv: bool,
    },
    /// Check one of the structural results.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// The Omega family of integer sets.
    Omega {
        #[arg(long = "max")]
        max_element: u32,
        #[arg(long)]
        depth: usize,
    },
    /// Run `verify main1` over every *.json spec in a directory.
    Corpus {
        dir: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, env = "QK_JOBS", default_value_t = 0)]
        jobs: usize,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Predicted homology from E(P) against direct homology.
    Main1 { spec: String },
    /// A>=2 and A>Z have the same homology.
    A2Equiv { spec: String },
    /// Homology of A>=2 of an extraspecial group of exponent p.
    PropExtra(PropExtraArgs),
    /// M*_Z of a central product from those of its factors.
    Techlem { left: String, right: String },
    /// Homology concentrated in degrees t and t + k.
    Corollary3(Corollary3Args),
}

#[derive(Args)]
struct PropExtraArgs {
    #[arg(short)]
    p: u32,
    #[arg(short)]
    m: usize,
}

#[derive(Args)]
struct Corollary3Args {
    #[arg(short)]
    p: u32,
    #[arg(short)]
    t: u32,
    #[arg(short)]
    k: u32,
}

/// Comparable body plus timings, which are kept outside the body.
struct Outcome {
    result: Value,
    timings: BTreeMap<String, f64>,
    text: Option<String>,
    code: u8,
}

impl Outcome {
    fn document(&self) -> Value {
        json!({ "result": self.result, "timings_ms": self.timings })
    }
}

fn ranks_map(h: &HomologyProfile) -> Value {
    h.degrees.iter().map(|(d, x)| (d.to_string(), Value::from(x.rank))).collect::<serde_json::Map<_, _>>().into()
}

fn torsion_map(h: &HomologyProfile) -> Value {
    h.degrees
        .iter()
        .map(|(d, x)| (d.to_string(), Value::from(x.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>())))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn counts_map(counts: &BTreeMap<usize, u64>) -> Value {
    counts.iter().map(|(n, a)| (n.to_string(), Value::from(*a))).collect::<serde_json::Map<_, _>>().into()
}

fn timed<T>(
    timings: &mut BTreeMap<String, f64>,
    phase: &str,
    f: impl FnOnce() -> Result<T, QkError>,
) -> Result<T, Failure> {
    let start = Instant::now();
    let out = f();
    timings.insert(phase.into(), start.elapsed().as_secs_f64() * 1e3);
    Ok(out?)
}

fn construct(
    loaded: &LoadedSpec,
    limits: &Limits,
    timings: &mut BTreeMap<String, f64>,
) -> Result<qk_core::FiniteGroup, Failure> {
    let start = Instant::now();
    let g = loaded.build(limits)?;
    timings.insert("construct".into(), start.elapsed().as_secs_f64() * 1e3);
    Ok(g)
}

fn homology(spec: &str, reduce_to_z: bool, csv: bool, limits: &Limits) -> Result<Outcome, Failure> {
    let loaded = LoadedSpec::load(spec)?;
    let mut timings = BTreeMap::new();
    let g = construct(&loaded, limits, &mut timings)?;
    let kind = if reduce_to_z { ComplexKind::AGtZ } else { ComplexKind::AGe2 };
    let poset = timed(&mut timings, "poset", || poset_of(&g, kind))?;
    let complex = timed(&mut timings, "complex", || OrderComplex::from_poset(&poset, Some(limits.max_simplices)))?;
    let computed = timed(&mut timings, "homology", || reduced_homology_torsion_free(&complex))?;
    let e = timed(&mut timings, "espec", || espec(&g))?;
    let top = computed.degrees.keys().max().copied().unwrap_or(-1);
    let predicted = predicted_from_report(g.prime(), &e, a2_is_empty(&g)?, top)?;
    let matched = predicted.same_homology(&computed);
    let result = json!({
        "group": loaded.descriptor(&g),
        "complex": kind,
        "betti": ranks_map(&computed),
        "torsion": torsion_map(&computed),
        "espec_counts": counts_map(&e.counts),
        "predicted_betti": ranks_map(&predicted),
        "simplex_counts": complex.f_vector(),
        "match": matched,
        "version": VERSION,
    });
    let text = csv.then(|| {
        let mut s = String::from("degree,rank,torsion\n");
        for (d, x) in &computed.degrees {
            let t: Vec<String> = x.torsion.iter().map(|t| t.to_string()).collect();
            s += &format!("{d},{},{}\n", x.rank, t.join(" "));
        }
        s + &counts_csv(&e.counts)
    });
    Ok(Outcome { result, timings, text, code: 0 })
}

fn counts_csv(counts: &BTreeMap<usize, u64>) -> String {
    let mut s = String::from("n,a_n\n");
    for (n, a) in counts {
        s += &format!("{n},{a}\n");
    }
    s
}

fn espec_command(spec: &str, csv: bool, limits: &Limits) -> Result<Outcome, Failure> {
    let loaded = LoadedSpec::load(spec)?;
    let mut timings = BTreeMap::new();
    let g = construct(&loaded, limits, &mut timings)?;
    let e = timed(&mut timings, "espec", || espec(&g))?;
    let members: Vec<Value> =
        e.members.iter().map(|x| json!({ "order": x.order(), "generators": x.generators() })).collect();
    let result = json!({
        "group": loaded.descriptor(&g),
        "z_generators": e.z.generators(),
        "counts": counts_map(&e.counts),
        "members": members,
        "version": VERSION,
    });
    Ok(Outcome { result, timings, text: csv.then(|| counts_csv(&e.counts)), code: 0 })
}

fn report_outcome(report: VerificationReport) -> Result<Outcome, Failure> {
    let code = if report.matched { 0 } else { 1 };
    let mut body = serde_json::to_value(&report).map_err(|e| Failure { code: 1, message: e.to_string() })?;
    body.as_object_mut().expect("reports are objects").insert("version".into(), VERSION.into());
    Ok(Outcome { result: body, timings: report.timings, text: None, code })
}

fn build(spec: &str, limits: &Limits) -> Result<qk_core::FiniteGroup, Failure> {
    LoadedSpec::load(spec)?.build(limits)
}

fn verify(cmd: &VerifyCommand, limits: &Limits) -> Result<Outcome, Failure> {
    let report = match cmd {
        VerifyCommand::Main1 { spec } => verify_main1(&build(spec, limits)?, limits)?,
        VerifyCommand::A2Equiv { spec } => verify_equivalence_a2_az(&build(spec, limits)?, limits)?,
        VerifyCommand::PropExtra(a) => verify_prop_extra(a.p, a.m, limits)?,
        VerifyCommand::Techlem { left, right } => verify_techlem(&build(left, limits)?, &build(right, limits)?)?,
        VerifyCommand::Corollary3(a) => verify_corollary3(a.p, a.t, a.k, limits)?,
    };
    report_outcome(report)
}

fn omega(max_element: u32, depth: usize) -> Result<Outcome, Failure> {
    let sets = omega_sets(max_element, depth)?;
    let result = json!({
        "max_element": max_element,
        "depth": depth,
        "count": sets.len(),
        "sets": sets,
        "version": VERSION,
    });
    Ok(Outcome { result, timings: BTreeMap::new(), text: None, code: 0 })
}

#[derive(Serialize)]
struct CorpusRow {
    file: String,
    group: Option<String>,
    order: Option<u128>,
    matched: bool,
    torsion_entries: usize,
    code: u8,
    error: Option<String>,
}

fn corpus_row(path: &Path, limits: &Limits) -> CorpusRow {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let run = || -> Result<VerificationReport, Failure> {
        let g = LoadedSpec::load(&path.to_string_lossy())?.build(limits)?;
        Ok(verify_main1(&g, limits)?)
    };
    match run() {
        Ok(r) => {
            let torsion_entries = r.computed.as_ref().map_or(0, |h| h.degrees.values().map(|d| d.torsion.len()).sum());
            CorpusRow {
                file,
                group: Some(r.group.clone()),
                order: Some(r.order),
                matched: r.matched,
                torsion_entries,
                code: if r.matched { 0 } else { 1 },
                error: None,
            }
        }
        Err(f) => CorpusRow {
            file,
            group: None,
            order: None,
            matched: false,
            torsion_entries: 0,
            code: f.code,
            error: Some(f.message),
        },
    }
}

fn corpus(dir: &Path, jobs: usize, limits: &Limits) -> Result<Outcome, Failure> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::invalid(format!("no *.json specs in {}", dir.display())));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::invalid(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let rows: Vec<CorpusRow> = pool.install(|| files.par_iter().map(|f| corpus_row(f, limits)).collect());
    let mut text = format!("{:<28} {:<56} {:>8} {:>6} {:>8}\n", "file", "group", "order", "match", "torsion");
    for r in &rows {
        let order = r.order.map_or("-".into(), |o| o.to_string());
        let group = r.group.clone().unwrap_or_else(|| r.error.clone().unwrap_or_default());
        text += &format!("{:<28} {:<56} {:>8} {:>6} {:>8}\n", r.file, group, order, r.matched, r.torsion_entries);
    }
    let matched = rows.iter().filter(|r| r.matched).count();
    text += &format!("{matched}/{} matched\n", rows.len());
    // worst outcome wins: invalid, then infeasible, then mismatch
    let code = [2u8, 3, 1].into_iter().find(|c| rows.iter().any(|r| r.code == *c)).unwrap_or(0);
    let result = json!({ "rows": rows, "matched": matched, "total": rows.len(), "version": VERSION });
    let timings = BTreeMap::from([("total".to_string(), start.elapsed().as_secs_f64() * 1e3)]);
    Ok(Outcome { result, timings, text: Some(text), code })
}

fn emit(outcome: &Outcome, out: Option<&Path>) -> Result<(), Failure> {
    let doc = serde_json::to_string_pretty(&outcome.document()).expect("documents serialize") + "\n";
    let io = |e: std::io::Error| Failure::invalid(format!("cannot write output: {e}"));
    if let Some(path) = out {
        std::fs::write(path, &doc).map_err(io)?;
    }
    let shown = match (&outcome.text, out) {
        (Some(text), _) => text.as_str(),
        (None, Some(_)) => return Ok(()),
        (None, None) => doc.as_str(),
    };
    std::io::stdout().lock().write_all(shown.as_bytes()).map_err(io)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let limits = Limits { max_elements: cli.max_elements, max_simplices: cli.max_simplices };
    let outcome = match &cli.command {
        Command::Homology { spec, reduce_to_z, csv } => homology(spec, *reduce_to_z, *csv, &limits)?,
        Command::Espec { spec, csv } => espec_command(spec, *csv, &limits)?,
        Command::Verify(v) => verify(v, &limits)?,
        Command::Omega { max_element, depth } => omega(*max_element, *depth)?,
        Command::Corpus { dir, jobs } => corpus(dir, *jobs, &limits)?,
    };
    emit(&outcome, cli.out.as_deref())?;
    Ok(outcome.code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("qk: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
