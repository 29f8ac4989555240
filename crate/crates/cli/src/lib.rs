//! The `trifree` command line.
//!
//! Exit codes: 0 pass, 1 certification or audit failure, 2 usage or I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use trifree_core::audit::{audit, sample_families, theory_params, Family};
use trifree_core::io::{
    cover_text, edge_list, encode_graph, load_clique_cover, parse_cover, parse_edge_list, read_graph_cache,
    write_atomic, write_graph_cache, write_json,
};
use trifree_core::spectral::spectrum;
use trifree_core::{
    assign_signs, build_g, build_g1, check_structural, check_triangle_free, Certificate, CliqueCover, Error,
    Quadrangle, SignAssignment, SparseGraph,
};

pub const G_CACHE: &str = "g.pqg";
pub const G1_CACHE: &str = "g1.pqg";
pub const COVER_FILE: &str = "cover.txt";
pub const BUILD_JSON: &str = "build.json";

/// Largest fitted constant the audit accepts.
pub const AUDIT_C_THRESHOLD: f64 = 1.0;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "trifree", version, about = "Triangle-free pseudorandom graphs from W(q)")]
pub struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Exhaustive,
    Structural,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Edgelist,
    Cover,
    Pqg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build W(q), G1, the signs and G; write caches and build.json.
    Build {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Certify that G is triangle-free.
    Certify {
        /// Build directory or graph cache.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::Both)]
        level: Level,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Dense spectrum (n <= 2000) or Lanczos extremes.
    Spectrum {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sampled discrepancy audit of G.
    Audit {
        /// Build directory.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Comma-separated: uniform, single_line, line_union, neighborhood, sign_class, full.
        #[arg(long, value_delimiter = ',')]
        families: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Exact parameter sheet for order q.
    Params {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write a graph as an edge list or cache, or a build's cover file.
    Export {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Edgelist)]
        format: Format,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read an edge list or cover file, validate it and write it back canonically.
    Import {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Edgelist)]
        format: Format,
        /// Vertex count taken from (q^2+1)(q+1) instead of the largest id.
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Everything that determines a run's output.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub q: Option<u64>,
    pub seed: Option<u64>,
    pub paths: BTreeMap<String, String>,
    pub samples: Option<usize>,
    pub families: Option<Vec<String>>,
    pub k: Option<usize>,
    pub tolerance: Option<f64>,
    pub level: Option<Level>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn provenance(&self) -> Value {
        json!({
            "tool": "trifree",
            "version": env!("CARGO_PKG_VERSION"),
            "q": self.q,
            "seed": self.seed,
            "config_hash": self.hash(),
            "config": self,
        })
    }

    fn path(mut self, key: &str, p: &Path) -> Self {
        self.paths.insert(key.to_string(), p.display().to_string());
        self
    }
}

/// Failures with their exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::CertificateFailure(_)
            | Error::CoverViolation(_)
            | Error::TheoremViolation(_)
            | Error::IdentityViolation(_)
            | Error::NoConvergence { .. } => EXIT_FAIL,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // A second call in one process fails harmlessly; the pool is global.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match dispatch(cli.command, cli.threads) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, threads: Option<usize>) -> CmdResult {
    match cmd {
        Command::Build { q, seed, out } => cmd_build(q, seed, &out, threads),
        Command::Certify { graph, level, json } => cmd_certify(&graph, level, json.as_deref(), threads),
        Command::Spectrum { graph, k, tol, json } => cmd_spectrum(&graph, k, tol, json.as_deref(), threads),
        Command::Audit { graph, samples, families, seed, json } => {
            cmd_audit(&graph, samples, &families, seed, json.as_deref(), threads)
        }
        Command::Params { q, json } => cmd_params(q, json.as_deref()),
        Command::Export { graph, format, out } => cmd_export(&graph, format, out.as_deref(), threads),
        Command::Import { graph, format, q, out } => cmd_import(&graph, format, q, &out, threads),
    }
}

fn emit_json(path: Option<&Path>, value: &Value) -> std::result::Result<(), Failure> {
    match path {
        None => Ok(()),
        Some(p) if p.as_os_str() == "-" => {
            println!("{}", serde_json::to_string_pretty(value).expect("json"));
            Ok(())
        }
        Some(p) => Ok(write_json(p, value)?),
    }
}

/// Human-readable lines go to stderr when the JSON report takes stdout.
macro_rules! say {
    ($json:expr, $($arg:tt)*) => {
        if $json.is_some_and(|p: &Path| p.as_os_str() == "-") {
            eprintln!($($arg)*);
        } else {
            println!($($arg)*);
        }
    };
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn cmd_build(q: u64, seed: u64, out: &Path, threads: Option<usize>) -> CmdResult {
    let config = RunConfig {
        command: "build".into(),
        q: Some(q),
        seed: Some(seed),
        threads,
        ..Default::default()
    }
    .path("out", out);
    let gq = Quadrangle::new(q)?;
    let cover = build_g1(&gq)?;
    let signs = assign_signs(&cover, seed);
    let g = build_g(&cover, &signs)?;

    fs::create_dir_all(out).map_err(|e| Failure::from(Error::Io(e)))?;
    let g_bytes = encode_graph(&g);
    let g1_bytes = encode_graph(cover.graph());
    let cover_bytes = cover_text(&cover).into_bytes();
    write_atomic(&out.join(G_CACHE), &g_bytes)?;
    write_atomic(&out.join(G1_CACHE), &g1_bytes)?;
    write_atomic(&out.join(COVER_FILE), &cover_bytes)?;
    let record = json!({
        "provenance": config.provenance(),
        "q": q,
        "seed": seed,
        "n": g.n(),
        "cliques": cover.len(),
        "e_g": g.m(),
        "e_g1": cover.graph().m(),
        "sha256": {
            G_CACHE: sha256_hex(&g_bytes),
            G1_CACHE: sha256_hex(&g1_bytes),
            COVER_FILE: sha256_hex(&cover_bytes),
        },
    });
    write_json(&out.join(BUILD_JSON), &record)?;
    println!(
        "built q = {q}, seed = {seed}: n = {}, e(G1) = {}, e(G) = {} -> {}",
        g.n(),
        cover.graph().m(),
        g.m(),
        out.display()
    );
    Ok(EXIT_PASS)
}

/// Paths of a build, from either the directory or a file inside it.
struct BuildPaths {
    dir: PathBuf,
    graph: PathBuf,
}

fn resolve(path: &Path) -> BuildPaths {
    if path.is_dir() {
        BuildPaths { dir: path.to_path_buf(), graph: path.join(G_CACHE) }
    } else {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        BuildPaths { dir, graph: path.to_path_buf() }
    }
}

struct BuildInfo {
    q: u64,
    seed: u64,
}

fn read_build_info(dir: &Path) -> std::result::Result<BuildInfo, Failure> {
    let path = dir.join(BUILD_JSON);
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let field = |k: &str| v[k].as_u64().ok_or_else(|| usage(format!("{}: missing {k}", path.display())));
    Ok(BuildInfo { q: field("q")?, seed: field("seed")? })
}

/// The cover and signs of a build. Only unique ownership is checked here;
/// the structural certificate re-checks everything.
fn read_cover_and_signs(dir: &Path, n: usize) -> std::result::Result<(CliqueCover, SignAssignment, BuildInfo), Failure> {
    let info = read_build_info(dir)?;
    let path = dir.join(COVER_FILE);
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let cover = CliqueCover::new(n, parse_cover(&text)?)?;
    let signs = assign_signs(&cover, info.seed);
    Ok((cover, signs, info))
}

fn load_graph(path: &Path) -> std::result::Result<SparseGraph, Failure> {
    read_graph_cache(path).map_err(|e| match e {
        Error::Io(io) => usage(format!("{}: {io}", path.display())),
        other => other.into(),
    })
}

fn report_certificate(json_out: Option<&Path>, cert: &Certificate) {
    let tag = if cert.passed() { "PASS" } else { "FAIL" };
    say!(json_out, "[{tag}] {cert}");
}

pub fn cmd_certify(path: &Path, level: Level, json_out: Option<&Path>, threads: Option<usize>) -> CmdResult {
    let paths = resolve(path);
    let g = load_graph(&paths.graph)?;
    let mut config = RunConfig {
        command: "certify".into(),
        level: Some(level),
        threads,
        ..Default::default()
    }
    .path("graph", &paths.graph);

    let mut certs = Vec::new();
    if matches!(level, Level::Exhaustive | Level::Both) {
        certs.push(check_triangle_free(&g));
    }
    if matches!(level, Level::Structural | Level::Both) {
        let (cover, signs, info) = read_cover_and_signs(&paths.dir, g.n())?;
        config.q = Some(info.q);
        config.seed = Some(info.seed);
        certs.push(check_structural(&cover, &signs, &g));
    }
    certs.iter().for_each(|c| report_certificate(json_out, c));
    let pass = certs.iter().all(Certificate::passed);
    emit_json(
        json_out,
        &json!({
            "provenance": config.provenance(),
            "pass": pass,
            "certificates": certs,
        }),
    )?;
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_spectrum(path: &Path, k: usize, tol: f64, json_out: Option<&Path>, threads: Option<usize>) -> CmdResult {
    let paths = resolve(path);
    let g = load_graph(&paths.graph)?;
    let config = RunConfig {
        command: "spectrum".into(),
        k: Some(k),
        tolerance: Some(tol),
        threads,
        ..Default::default()
    }
    .path("graph", &paths.graph);
    let report = spectrum(&g, k, tol)?;
    say!(
        json_out,
        "{:?}: n = {}, d = {:?}, largest = {:.9}, smallest = {:.9}, lambda = {:.9}",
        report.method,
        report.n,
        report.d,
        report.largest(),
        report.smallest(),
        report.lambda
    );
    emit_json(json_out, &json!({ "provenance": config.provenance(), "report": report }))?;
    Ok(EXIT_PASS)
}

pub fn cmd_audit(
    path: &Path,
    samples: usize,
    families: &[String],
    seed: u64,
    json_out: Option<&Path>,
    threads: Option<usize>,
) -> CmdResult {
    let paths = resolve(path);
    let g = load_graph(&paths.graph)?;
    let fams = families
        .iter()
        .map(|s| s.parse::<Family>())
        .collect::<Result<Vec<_>, _>>()?;
    let (cover, signs, info) = read_cover_and_signs(&paths.dir, g.n())?;
    let config = RunConfig {
        command: "audit".into(),
        q: Some(info.q),
        seed: Some(info.seed),
        samples: Some(samples),
        families: Some(fams.iter().map(|f| f.name().to_string()).collect()),
        threads,
        ..Default::default()
    }
    .path("graph", &paths.graph);
    let sets = sample_families(&g, &cover, &signs, samples, &fams, seed)?;
    let report = audit(&g, &cover, &signs, &sets)?;
    say!(
        json_out,
        "audited {} samples at q = {}: max D = {:.4}, C-hat = {:.4} ({}), mixing ratio <= {:.4}",
        report.samples, report.q, report.max_discrepancy, report.c_hat, report.label, report.mixing_max_ratio
    );
    for (fam, s) in &report.per_family {
        say!(json_out, "  {fam:<13} count {:>6}  max D {:>9.4}  max D/(q ln n) {:.4}", s.count, s.max_discrepancy, s.max_normalized);
    }
    let pass = report.c_hat <= AUDIT_C_THRESHOLD;
    emit_json(
        json_out,
        &json!({
            "provenance": config.provenance(),
            "threshold": AUDIT_C_THRESHOLD,
            "pass": pass,
            "report": report,
        }),
    )?;
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_params(q: u64, json_out: Option<&Path>) -> CmdResult {
    let p = theory_params(q)?;
    let config = RunConfig { command: "params".into(), q: Some(q), ..Default::default() };
    say!(json_out, "q = {}", p.q);
    say!(json_out, "n = {}", p.n);
    say!(json_out, "p = {}", p.p_g);
    say!(json_out, "p1 = {}", p.p_g1);
    say!(json_out, "beta1 = {}", p.beta_g1);
    say!(json_out, "incidence d = {}, lambda = {:.9}", p.d_incidence, p.lambda_incidence);
    say!(json_out, "q ln n = {:.6}", p.beta_target_shape);
    say!(json_out, "union bound = {}", p.union_bound_failure);
    emit_json(json_out, &json!({ "provenance": config.provenance(), "params": p }))?;
    Ok(EXIT_PASS)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => Ok(write_atomic(p, bytes)?),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| usage(format!("stdout: {e}"))),
    }
}

pub fn cmd_export(path: &Path, format: Format, out: Option<&Path>, _threads: Option<usize>) -> CmdResult {
    let paths = resolve(path);
    let bytes = match format {
        Format::Edgelist => edge_list(&load_graph(&paths.graph)?).into_bytes(),
        Format::Pqg => encode_graph(&load_graph(&paths.graph)?),
        Format::Cover => {
            let cover_path = if path.is_dir() { paths.dir.join(COVER_FILE) } else { path.to_path_buf() };
            if !cover_path.is_file() {
                return Err(usage(format!("{}: no cover file", cover_path.display())));
            }
            cover_text(&load_clique_cover(&cover_path, None)?).into_bytes()
        }
    };
    write_output(out, &bytes)?;
    Ok(EXIT_PASS)
}

pub fn cmd_import(path: &Path, format: Format, q: Option<u64>, out: &Path, _threads: Option<usize>) -> CmdResult {
    let n = q.map(|q| ((q * q + 1) * (q + 1)) as usize);
    match format {
        Format::Edgelist => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            write_graph_cache(&parse_edge_list(&text, n)?, out)?;
        }
        Format::Cover => {
            if !path.is_file() {
                return Err(usage(format!("{}: no such file", path.display())));
            }
            let cover = load_clique_cover(path, n)?;
            write_atomic(out, cover_text(&cover).as_bytes())?;
        }
        Format::Pqg => {
            let g = load_graph(path)?;
            write_graph_cache(&g, out)?;
        }
    }
    Ok(EXIT_PASS)
}
