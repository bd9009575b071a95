//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 1 when a check found problems, 2 on usage, input or I/O errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::{self, GenerateOptions};
use crate::dataset::{self, SourceFormat};
use crate::eval::{self, PredictionSet};
use crate::exec::execute_with_trace;
use crate::program::{enumerate_grammar, parse_program};
use crate::sampler::{stream_rng, Sampler, SamplerConfig};
use crate::state::{parse_state, Domain};

#[derive(Debug, Parser)]
#[command(name = "lemkit", version, about = "Symbolic environments, program corpora and state-tracking metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SamplerArgs {
    #[arg(long)]
    domain: Domain,
    #[arg(long)]
    seed: u64,
    /// Flat `key = value` sampler settings.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a program and print the resulting state.
    Execute {
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        state: String,
        #[arg(long)]
        program: String,
        /// Print the state after every action.
        #[arg(long)]
        trace: bool,
    },
    /// Print random valid states.
    SampleState {
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Print random programs, for `--state` or for freshly sampled states.
    SampleProgram {
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Write a pre-training corpus and its manifest.
    GenCorpus {
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Initial states (one per line) the corpus must not start from.
        #[arg(long)]
        holdout: Option<PathBuf>,
        /// Draw initial states from this file instead of sampling them.
        #[arg(long)]
        init_states: Option<PathBuf>,
    },
    /// Splice a fraction of a validation pool into a corpus.
    InjectOverlap {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        ratio: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-execute every corpus line and report inconsistencies.
    ValidateCorpus {
        corpus: PathBuf,
        #[arg(long)]
        holdout: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Turn episodes into (source, target) fine-tuning pairs.
    MakePairs {
        #[arg(long)]
        episodes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the domain of the first episode.
        #[arg(long)]
        domain: Option<Domain>,
    },
    /// Score a predictions file against episodes.
    Evaluate {
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        episodes: PathBuf,
        #[arg(long)]
        preds: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Function and program-length histograms of a corpus.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print a domain's program grammar.
    Grammar {
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        json: bool,
    },
    /// Convert an upstream dataset file into episode lines.
    Convert {
        #[arg(long)]
        from: SourceFormat,
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Message and exit code of a failed command.
struct Failure(i32, String);

type CmdResult = Result<i32, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure(2, e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn sampler_config(args: &SamplerArgs) -> Result<SamplerConfig, Failure> {
    let cfg = match &args.config {
        Some(path) => SamplerConfig::from_kv_str(args.domain, &read(path)?).map_err(usage)?,
        None => SamplerConfig::for_domain(args.domain),
    };
    Ok(cfg.with_seed(args.seed))
}

fn json_line(out: &mut dyn Write, value: &impl serde::Serialize) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string(value).expect("plain data serializes"))
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    let io = |e: std::io::Error| Failure(2, e.to_string());
    match command {
        Command::Execute {
            domain,
            state,
            program,
            trace,
        } => {
            let state = parse_state(domain, &state).map_err(|e| usage(format!("state: {e}")))?;
            let program = parse_program(domain, &program).map_err(|e| usage(format!("program: {e}")))?;
            match execute_with_trace(&state, &program) {
                Ok(states) if trace => {
                    for s in &states {
                        writeln!(out, "{s}").map_err(io)?;
                    }
                    Ok(0)
                }
                Ok(states) => {
                    writeln!(out, "{}", states.last().expect("trace has the initial state")).map_err(io)?;
                    Ok(0)
                }
                Err(e) => Err(Failure(1, e.to_string())),
            }
        }
        Command::SampleState { sampler, count } => {
            let cfg = sampler_config(&sampler)?;
            let s = Sampler::new(sampler.domain, &cfg).map_err(usage)?;
            for i in 0..count {
                writeln!(out, "{}", s.sample_state(&mut stream_rng(cfg.seed, i))).map_err(io)?;
            }
            Ok(0)
        }
        Command::SampleProgram { sampler, state, count } => {
            let cfg = sampler_config(&sampler)?;
            let s = Sampler::new(sampler.domain, &cfg).map_err(usage)?;
            let state = state
                .map(|t| parse_state(sampler.domain, &t).map_err(|e| usage(format!("state: {e}"))))
                .transpose()?;
            for i in 0..count {
                let mut rng = stream_rng(cfg.seed, i);
                match &state {
                    Some(st) => {
                        let p = s.sample_program(st, &mut rng).map_err(|e| Failure(1, e.to_string()))?;
                        writeln!(out, "{p}").map_err(io)?;
                    }
                    None => {
                        let ex = s.sample_example(&mut rng).map_err(|e| Failure(1, e.to_string()))?;
                        json_line(out, &corpus::PretrainExample::new(i, &ex)).map_err(io)?;
                    }
                }
            }
            Ok(0)
        }
        Command::GenCorpus {
            sampler,
            n,
            out: path,
            workers,
            holdout,
            init_states,
        } => {
            let mut cfg = sampler_config(&sampler)?;
            if let Some(h) = holdout {
                let states = corpus::load_states(&h, sampler.domain).map_err(usage)?;
                cfg.holdout_states = states.iter().map(|s| s.render()).collect();
            }
            let pool = init_states
                .map(|p| corpus::load_states(&p, sampler.domain).map_err(usage))
                .transpose()?;
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let opts = GenerateOptions {
                workers,
                initial_states: pool.as_deref(),
            };
            log::info!("generating {n} {} examples with {workers} workers", sampler.domain);
            let m = corpus::generate_corpus(sampler.domain, &cfg, n, &path, &opts).map_err(usage)?;
            writeln!(out, "wrote {} examples to {}", m.n, path.display()).map_err(io)?;
            writeln!(out, "sha256 {}", m.digest).map_err(io)?;
            Ok(0)
        }
        Command::InjectOverlap {
            corpus: input,
            pool,
            ratio,
            seed,
            out: path,
        } => {
            let m = corpus::inject_overlap(&input, &pool, ratio, seed, &path).map_err(usage)?;
            let pool_len = corpus::read_state_lines(&pool).map_err(usage)?.len();
            writeln!(
                out,
                "injected {} of {pool_len} pool entries into {} lines",
                corpus::injection_count(ratio, pool_len),
                m.n
            )
            .map_err(io)?;
            writeln!(out, "sha256 {}", m.digest).map_err(io)?;
            Ok(0)
        }
        Command::ValidateCorpus { corpus: path, holdout, json } => {
            let holdout = match holdout {
                Some(h) => {
                    let first = fs::read_to_string(&path)
                        .ok()
                        .and_then(|t| t.lines().next().map(String::from))
                        .and_then(|l| serde_json::from_str::<corpus::PretrainExample>(&l).ok());
                    let lines = corpus::read_state_lines(&h).map_err(usage)?;
                    let canonical = match first {
                        Some(ex) => lines
                            .iter()
                            .map(|l| parse_state(ex.domain, l).map(|s| s.render()).unwrap_or_else(|_| l.clone()))
                            .collect(),
                        None => lines.into_iter().collect(),
                    };
                    Some(canonical)
                }
                None => None,
            };
            let report = corpus::validate_corpus(&path, holdout.as_ref()).map_err(usage)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes")).map_err(io)?;
            } else {
                write!(out, "{report}").map_err(io)?;
            }
            Ok(if report.is_clean() { 0 } else { 1 })
        }
        Command::MakePairs { episodes, out: path, domain } => {
            let text = read(&episodes)?;
            let domain = match domain {
                Some(d) => d,
                None => first_domain(&text)?,
            };
            let eps = dataset::parse_episodes(&text, domain).map_err(usage)?;
            let pairs = dataset::emit_finetune_pairs(&eps);
            dataset::write_pairs(&path, &pairs).map_err(usage)?;
            writeln!(out, "wrote {} pairs from {} episodes", pairs.len(), eps.len()).map_err(io)?;
            Ok(0)
        }
        Command::Evaluate {
            domain,
            episodes,
            preds,
            json,
        } => {
            let eps = dataset::load_episodes(&episodes, domain).map_err(usage)?;
            let preds = dataset::load_predictions(&preds).map_err(usage)?;
            let set = PredictionSet::new(preds).map_err(usage)?;
            let report = eval::evaluate(domain, &eps, &set).map_err(usage)?;
            if json {
                writeln!(out, "{}", report.to_json()).map_err(io)?;
            } else {
                write!(out, "{report}").map_err(io)?;
            }
            Ok(0)
        }
        Command::Stats { corpus: path, json } => {
            let stats = corpus::corpus_stats(&path).map_err(usage)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&stats).expect("stats serialize")).map_err(io)?;
            } else {
                write!(out, "{stats}").map_err(io)?;
            }
            Ok(0)
        }
        Command::Grammar { domain, json } => {
            let g = enumerate_grammar(domain);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&g).expect("grammar serializes")).map_err(io)?;
            } else {
                write!(out, "{g}").map_err(io)?;
            }
            Ok(0)
        }
        Command::Convert {
            from,
            domain,
            input,
            out: path,
        } => {
            let records = dataset::convert(&read(&input)?, from, domain).map_err(usage)?;
            let mut w = std::io::BufWriter::new(fs::File::create(&path).map_err(io)?);
            for r in &records {
                json_line(&mut w, r).map_err(io)?;
            }
            w.flush().map_err(io)?;
            writeln!(out, "wrote {} episodes", records.len()).map_err(io)?;
            Ok(0)
        }
    }
}

fn first_domain(text: &str) -> Result<Domain, Failure> {
    #[derive(serde::Deserialize)]
    struct Head {
        domain: Domain,
    }
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| usage("episode file is empty"))?;
    serde_json::from_str::<Head>(line)
        .map(|h| h.domain)
        .map_err(|e| usage(format!("line 1: {e}")))
}
