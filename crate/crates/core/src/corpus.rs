//! Pre-training corpus files: generation, overlap injection, validation and statistics.
//!
//! A corpus is JSON Lines, one example per line with the fields
//! `id, domain, init, program, goal, source, target` in that order, plus a
//! sidecar `<corpus>.manifest.json`. Lines spliced in by [`inject_overlap`]
//! carry a trailing `"injected":true` marker.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exec::execute_program;
use crate::program::parse_program;
use crate::sampler::{stream_rng, Example, SampleError, Sampler, SamplerConfig};
use crate::state::{parse_state, Domain, EnvState};

/// Literal separator between the serialized state and the program or instructions.
pub const SEP: &str = "[SEP]";

/// `left [SEP] right` with single spaces.
pub fn join_sep(left: &str, right: &str) -> String {
    let mut s = String::with_capacity(left.len() + right.len() + SEP.len() + 2);
    s.push_str(left);
    s.push(' ');
    s.push_str(SEP);
    s.push(' ');
    s.push_str(right);
    s
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("size error: {0}")]
    Size(String),
    #[error("could not produce a unique example at index {index} after {attempts} attempts")]
    DuplicatesExhausted { index: u64, attempts: u32 },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PretrainExample {
    pub id: u64,
    pub domain: Domain,
    pub init: String,
    pub program: String,
    pub goal: String,
    /// `init [SEP] program`
    pub source: String,
    /// Equal to `goal`.
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injected: Option<bool>,
}

impl PretrainExample {
    pub fn new(id: u64, example: &Example) -> Self {
        let init = example.init.render();
        let program = example.program.render();
        let goal = example.goal.render();
        Self {
            id,
            domain: example.init.domain(),
            source: join_sep(&init, &program),
            target: goal.clone(),
            init,
            program,
            goal,
            injected: None,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("plain strings serialize")
    }

    fn dedup_key(&self) -> [u8; 16] {
        dedup_key(&self.init, &self.program)
    }
}

fn dedup_key(init: &str, program: &str) -> [u8; 16] {
    let mut h = Sha256::new();
    h.update(init.as_bytes());
    h.update([0u8]);
    h.update(program.as_bytes());
    let full = h.finalize();
    let mut key = [0u8; 16];
    key.copy_from_slice(&full[..16]);
    key
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub domain: Domain,
    pub seed: u64,
    pub n: u64,
    pub overlap_ratio: f64,
    /// SHA-256 of the corpus file bytes, lowercase hex.
    pub digest: String,
    pub config: SamplerConfig,
    #[serde(default)]
    pub holdout_count: usize,
}

pub fn manifest_path(corpus: &Path) -> PathBuf {
    let mut name = corpus.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    corpus.with_file_name(name)
}

impl CorpusManifest {
    pub fn write(&self, corpus: &Path) -> Result<(), CorpusError> {
        let path = manifest_path(corpus);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(io_err(&path))
    }

    pub fn read(corpus: &Path) -> Result<Self, CorpusError> {
        let path = manifest_path(corpus);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| CorpusError::Malformed {
            path,
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Default)]
pub struct GenerateOptions<'a> {
    /// Worker threads; 0 or 1 generates on the calling thread's pool with one shard.
    pub workers: usize,
    /// Draw initial states from this pool instead of sampling them.
    pub initial_states: Option<&'a [EnvState]>,
}

/// Stream id of the `attempt`-th draw for example `index`.
fn example_stream(index: u64, attempt: u32) -> u64 {
    index | (u64::from(attempt) << 40)
}

fn draw(sampler: &Sampler<'_>, seed: u64, index: u64, attempt: u32) -> Result<PretrainExample, SampleError> {
    let mut rng = stream_rng(seed, example_stream(index, attempt));
    sampler.sample_example(&mut rng).map(|ex| PretrainExample::new(index, &ex))
}

fn shard_ranges(n: u64, shards: usize) -> Vec<Range<u64>> {
    let shards = shards.max(1) as u64;
    let per = n.div_ceil(shards);
    (0..shards)
        .map(|s| (s * per).min(n)..((s + 1) * per).min(n))
        .filter(|r| !r.is_empty())
        .collect()
}

fn write_shard(path: &Path, sampler: &Sampler<'_>, seed: u64, range: Range<u64>) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for i in range {
        let ex = draw(sampler, seed, i, 0)?;
        writeln!(w, "{}", ex.to_line()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `n` examples to `out` and its manifest.
///
/// Example `i` is drawn from the random stream `(cfg.seed, i)`, so the output
/// is byte-identical for any worker count. Workers fill per-range shard files
/// that are then concatenated in index order; a repeated `(init, program)`
/// pair is replaced by a redraw from the next stream of that index.
pub fn generate_corpus(
    domain: Domain,
    cfg: &SamplerConfig,
    n: u64,
    out: &Path,
    opts: &GenerateOptions<'_>,
) -> Result<CorpusManifest, CorpusError> {
    if n == 0 {
        return Err(CorpusError::Size("corpus size must be at least 1".into()));
    }
    let mut sampler = Sampler::new(domain, cfg)?;
    if let Some(pool) = opts.initial_states {
        sampler = sampler.with_initial_states(pool)?;
    }
    let seed = cfg.seed;
    let workers = opts.workers.max(1);

    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let scratch = tempfile::Builder::new()
        .prefix(".lemkit-shards")
        .tempdir_in(dir)
        .map_err(io_err(dir))?;
    let ranges = shard_ranges(n, workers);
    let shard_paths: Vec<PathBuf> = (0..ranges.len())
        .map(|i| scratch.path().join(format!("shard-{i:05}.jsonl")))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CorpusError::Size(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| {
        ranges
            .par_iter()
            .zip(shard_paths.par_iter())
            .map(|(range, path)| write_shard(path, &sampler, seed, range.clone()))
            .collect::<Result<Vec<()>, CorpusError>>()
    })?;

    let mut staged = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    let mut hasher = Sha256::new();
    let mut seen: HashSet<[u8; 16]> = HashSet::with_capacity(n as usize);
    {
        let mut w = BufWriter::new(staged.as_file_mut());
        let mut written = 0u64;
        for path in &shard_paths {
            let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
            for (k, line) in reader.lines().enumerate() {
                let mut line = line.map_err(io_err(path))?;
                let mut ex: PretrainExample = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                    path: path.clone(),
                    line: k + 1,
                    message: e.to_string(),
                })?;
                let mut attempt = 0;
                while !seen.insert(ex.dedup_key()) {
                    attempt += 1;
                    if attempt > cfg.max_retries {
                        return Err(CorpusError::DuplicatesExhausted {
                            index: ex.id,
                            attempts: attempt,
                        });
                    }
                    ex = draw(&sampler, seed, ex.id, attempt)?;
                    line = ex.to_line();
                }
                line.push('\n');
                hasher.update(line.as_bytes());
                w.write_all(line.as_bytes()).map_err(io_err(out))?;
                written += 1;
                if written.is_multiple_of(100_000) {
                    log::info!("{written} / {n} examples");
                }
            }
        }
        w.flush().map_err(io_err(out))?;
    }
    staged.persist(out).map_err(|e| CorpusError::Io {
        path: out.to_path_buf(),
        source: e.error,
    })?;

    let manifest = CorpusManifest {
        domain,
        seed,
        n,
        overlap_ratio: 0.0,
        digest: hex::encode(hasher.finalize()),
        config: cfg.clone(),
        holdout_count: cfg.holdout_states.len(),
    };
    manifest.write(out)?;
    Ok(manifest)
}

fn read_lines_inclusive(path: &Path) -> Result<Vec<String>, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text.split_inclusive('\n').map(String::from).collect())
}

fn parse_line(path: &Path, line_no: usize, line: &str) -> Result<PretrainExample, CorpusError> {
    serde_json::from_str(line.trim_end()).map_err(|e| CorpusError::Malformed {
        path: path.to_path_buf(),
        line: line_no,
        message: e.to_string(),
    })
}

/// Number of pool entries spliced in for `ratio` of a pool of `pool_len`.
pub fn injection_count(ratio: f64, pool_len: usize) -> usize {
    (ratio * pool_len as f64 + 1e-9).floor() as usize
}

/// Replaces `⌊ratio · |pool|⌋` seeded-random corpus lines with pool entries.
///
/// Replaced lines keep the corpus id at their position and gain the
/// `"injected":true` marker; every other line is copied byte for byte.
pub fn inject_overlap(
    corpus: &Path,
    pool: &Path,
    ratio: f64,
    seed: u64,
    out: &Path,
) -> Result<CorpusManifest, CorpusError> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(CorpusError::Size(format!("ratio {ratio} is outside [0, 1]")));
    }
    let mut lines = read_lines_inclusive(corpus)?;
    let pool_lines = read_lines_inclusive(pool)?;
    let k = injection_count(ratio, pool_lines.len());
    if k > lines.len() {
        return Err(CorpusError::Size(format!(
            "{k} holdout entries requested but the corpus has only {} lines",
            lines.len()
        )));
    }

    let mut positions = index::sample(&mut stream_rng(seed, 0), lines.len(), k).into_vec();
    positions.sort_unstable();
    let picks = index::sample(&mut stream_rng(seed, 1), pool_lines.len(), k).into_vec();
    for (&pos, &pick) in positions.iter().zip(&picks) {
        let original = parse_line(corpus, pos + 1, &lines[pos])?;
        let mut entry = parse_line(pool, pick + 1, &pool_lines[pick])?;
        if entry.domain != original.domain {
            return Err(CorpusError::Malformed {
                path: pool.to_path_buf(),
                line: pick + 1,
                message: format!("{} entry in a {} corpus", entry.domain, original.domain),
            });
        }
        entry.id = original.id;
        entry.injected = Some(true);
        lines[pos] = entry.to_line() + "\n";
    }

    let mut staged = tempfile::NamedTempFile::new_in(out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")))
        .map_err(io_err(out))?;
    let mut hasher = Sha256::new();
    {
        let mut w = BufWriter::new(staged.as_file_mut());
        for line in &lines {
            hasher.update(line.as_bytes());
            w.write_all(line.as_bytes()).map_err(io_err(out))?;
        }
        w.flush().map_err(io_err(out))?;
    }
    staged.persist(out).map_err(|e| CorpusError::Io {
        path: out.to_path_buf(),
        source: e.error,
    })?;

    let base = CorpusManifest::read(corpus).ok();
    let domain = match &base {
        Some(m) => m.domain,
        None => lines
            .first()
            .map(|l| parse_line(out, 1, l).map(|e| e.domain))
            .transpose()?
            .unwrap_or(Domain::Alchemy),
    };
    let manifest = CorpusManifest {
        domain,
        seed: base.as_ref().map_or(seed, |m| m.seed),
        n: lines.len() as u64,
        overlap_ratio: ratio,
        digest: hex::encode(hasher.finalize()),
        config: base.as_ref().map_or_else(|| SamplerConfig::for_domain(domain), |m| m.config.clone()),
        holdout_count: base.map_or(0, |m| m.holdout_count),
    };
    manifest.write(out)?;
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    ParseFailure,
    ExecFailure,
    GoalMismatch,
    Duplicate,
    HoldoutViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    /// 1-based line number.
    pub line: usize,
    pub id: Option<u64>,
    pub kind: FindingKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub lines: usize,
    pub injected: usize,
    pub parse_failures: usize,
    pub exec_failures: usize,
    pub goal_mismatches: usize,
    pub duplicates: usize,
    pub holdout_violations: usize,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.parse_failures + self.exec_failures + self.goal_mismatches + self.duplicates + self.holdout_violations == 0
    }

    fn record(&mut self, finding: Finding) {
        match finding.kind {
            FindingKind::ParseFailure => self.parse_failures += 1,
            FindingKind::ExecFailure => self.exec_failures += 1,
            FindingKind::GoalMismatch => self.goal_mismatches += 1,
            FindingKind::Duplicate => self.duplicates += 1,
            FindingKind::HoldoutViolation => self.holdout_violations += 1,
        }
        self.findings.push(finding);
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "lines               {}", self.lines)?;
        writeln!(f, "injected            {}", self.injected)?;
        writeln!(f, "parse failures      {}", self.parse_failures)?;
        writeln!(f, "execution failures  {}", self.exec_failures)?;
        writeln!(f, "goal mismatches     {}", self.goal_mismatches)?;
        writeln!(f, "duplicate pairs     {}", self.duplicates)?;
        writeln!(f, "holdout violations  {}", self.holdout_violations)?;
        for x in self.findings.iter().take(50) {
            let id = x.id.map_or_else(|| "-".to_string(), |i| i.to_string());
            writeln!(f, "  line {} id {id}: {:?}: {}", x.line, x.kind, x.detail)?;
        }
        if self.findings.len() > 50 {
            writeln!(f, "  ... {} more", self.findings.len() - 50)?;
        }
        Ok(())
    }
}

enum LineCheck {
    Ok { id: u64, key: [u8; 16], init: String, injected: bool },
    Bad(Finding),
}

fn check_line(line_no: usize, line: &str) -> LineCheck {
    let bad = |id, kind, detail: String| LineCheck::Bad(Finding { line: line_no, id, kind, detail });
    let ex: PretrainExample = match serde_json::from_str(line) {
        Ok(ex) => ex,
        Err(e) => return bad(None, FindingKind::ParseFailure, e.to_string()),
    };
    let id = Some(ex.id);
    let init = match parse_state(ex.domain, &ex.init) {
        Ok(s) => s,
        Err(e) => return bad(id, FindingKind::ParseFailure, format!("init: {e}")),
    };
    let program = match parse_program(ex.domain, &ex.program) {
        Ok(p) => p,
        Err(e) => return bad(id, FindingKind::ParseFailure, format!("program: {e}")),
    };
    if ex.source != join_sep(&ex.init, &ex.program) {
        return bad(id, FindingKind::ParseFailure, "source is not `init [SEP] program`".into());
    }
    let goal = match parse_state(ex.domain, &ex.goal) {
        Ok(s) => s,
        Err(e) => return bad(id, FindingKind::ParseFailure, format!("goal: {e}")),
    };
    let reached = match execute_program(&init, &program) {
        Ok(s) => s,
        Err(e) => return bad(id, FindingKind::ExecFailure, e.to_string()),
    };
    if reached != goal || ex.target != ex.goal {
        return bad(
            id,
            FindingKind::GoalMismatch,
            format!("program reaches `{}`, line says `{}`", reached.render(), ex.goal),
        );
    }
    LineCheck::Ok {
        id: ex.id,
        key: ex.dedup_key(),
        init: ex.init,
        injected: ex.injected == Some(true),
    }
}

/// Re-parses and re-executes every line. Findings are report content, not errors.
///
/// With a holdout set, a non-injected line whose initial state is held out is a violation.
pub fn validate_corpus(path: &Path, holdout: Option<&HashSet<String>>) -> Result<ValidationReport, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let lines: Vec<&str> = text.lines().collect();
    let checks: Vec<LineCheck> = lines.par_iter().enumerate().map(|(i, l)| check_line(i + 1, l)).collect();

    let mut report = ValidationReport {
        lines: lines.len(),
        ..Default::default()
    };
    let mut seen: HashSet<[u8; 16]> = HashSet::with_capacity(lines.len());
    for (i, check) in checks.into_iter().enumerate() {
        match check {
            LineCheck::Bad(f) => report.record(f),
            LineCheck::Ok { id, key, init, injected } => {
                if injected {
                    report.injected += 1;
                }
                if !seen.insert(key) {
                    report.record(Finding {
                        line: i + 1,
                        id: Some(id),
                        kind: FindingKind::Duplicate,
                        detail: "repeated (init, program) pair".into(),
                    });
                }
                if !injected && holdout.is_some_and(|h| h.contains(&init)) {
                    report.record(Finding {
                        line: i + 1,
                        id: Some(id),
                        kind: FindingKind::HoldoutViolation,
                        detail: format!("held-out initial state `{init}`"),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub examples: usize,
    pub injected: usize,
    pub domains: BTreeMap<String, usize>,
    pub functions: BTreeMap<String, usize>,
    /// Program length → example count.
    pub lengths: BTreeMap<usize, usize>,
}

impl std::fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "examples {}  injected {}", self.examples, self.injected)?;
        for (d, c) in &self.domains {
            writeln!(f, "domain   {d:<10} {c}")?;
        }
        for (name, c) in &self.functions {
            writeln!(f, "function {name:<10} {c}")?;
        }
        for (len, c) in &self.lengths {
            writeln!(f, "length   {len:<10} {c}")?;
        }
        Ok(())
    }
}

/// Function and program-length histograms.
pub fn corpus_stats(path: &Path) -> Result<CorpusStats, CorpusError> {
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut stats = CorpusStats::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let ex = parse_line(path, i + 1, &line)?;
        let program = parse_program(ex.domain, &ex.program).map_err(|e| CorpusError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        stats.examples += 1;
        stats.injected += usize::from(ex.injected == Some(true));
        *stats.domains.entry(ex.domain.to_string()).or_default() += 1;
        *stats.lengths.entry(program.len()).or_default() += 1;
        for f in program.actions().functions() {
            *stats.functions.entry(f.to_string()).or_default() += 1;
        }
    }
    Ok(stats)
}

/// Rendered states, one per line, for holdout sets and initial-state pools.
///
/// A line holding a JSON object (a corpus or episode record) contributes its `init` field.
pub fn read_state_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    #[derive(Deserialize)]
    struct Init {
        init: String,
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = vec![];
    for (i, line) in text.lines().map(str::trim).enumerate() {
        if line.is_empty() {
            continue;
        }
        if line.starts_with('{') {
            let record: Init = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            out.push(record.init);
        } else {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

pub fn load_states(path: &Path, domain: Domain) -> Result<Vec<EnvState>, CorpusError> {
    read_state_lines(path)?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            parse_state(domain, l).map_err(|e| CorpusError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
