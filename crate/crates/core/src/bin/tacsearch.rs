//! `tacsearch` command line: record a corpus into a feature database,
//! prove a single goal, or run a chronological evaluation.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use tacsearch_core::feature::ClassMask;
use tacsearch_core::harness::{evaluate, preset, record_corpus, report};
use tacsearch_core::knn::FeatureDb;
use tacsearch_core::prover::HammerConfig;
use tacsearch_core::script::{parse_corpus, TacticLib};
use tacsearch_core::search::{search, CoDistance, SearchOutcome, StrategyConfig};
use tacsearch_core::syntax::parse_closed_term;
use tacsearch_core::term::Goal;

#[derive(Parser)]
#[command(name = "tacsearch", version, about = "Learning-guided tactic-level proof search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a corpus, recording every tactic invocation into a database.
    Record {
        /// Corpus file or directory of .thy files.
        corpus: PathBuf,
        /// Output database path.
        #[arg(long)]
        db: PathBuf,
        /// Orthogonalize recorded labels.
        #[arg(long)]
        ortho: bool,
    },
    /// Search for a proof of one goal against a recorded database.
    Prove {
        /// The goal in term syntax, e.g. "!n:num. n + 0 = n".
        goal: String,
        /// Database produced by `record`.
        #[arg(long)]
        db: PathBuf,
        /// Strategy preset name (nh, sh, greedy, d0..d19, e2, e3).
        #[arg(long, default_value = "sh")]
        strategy: String,
        #[command(flatten)]
        flags: StrategyFlags,
    },
    /// Chronological re-proving evaluation over a corpus.
    Eval {
        /// Corpus file or directory of .thy files.
        corpus: PathBuf,
        /// Comma-separated strategy presets.
        #[arg(long, default_value = "nh,sh")]
        strategies: String,
        /// Attempt every N-th theorem.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Output directory for CSV reports.
        #[arg(long)]
        out: PathBuf,
        /// Run strategies concurrently.
        #[arg(long)]
        parallel_strategies: bool,
        #[command(flatten)]
        flags: StrategyFlags,
    },
}

/// Flag-level overrides applied on top of the chosen preset(s).
#[derive(Args, Clone, Default)]
struct StrategyFlags {
    /// Co-distance variant (1..5).
    #[arg(long)]
    codist: Option<u8>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    /// TF-IDF exponent.
    #[arg(long)]
    tau1: Option<f64>,
    #[arg(long)]
    preselect_n: Option<usize>,
    /// Per-tactic budget in seconds.
    #[arg(long)]
    tactic_timeout: Option<f64>,
    /// Whole-search budget in seconds.
    #[arg(long)]
    search_timeout: Option<f64>,
    /// Premises per hammer call (0 disables the hammer).
    #[arg(long)]
    hammer_premises: Option<usize>,
    /// Hammer prover budget in seconds.
    #[arg(long)]
    hammer_timeout: Option<f64>,
    #[arg(long)]
    ortho: bool,
    #[arg(long)]
    self_learn: bool,
    /// Drop the top-level-structure feature class.
    #[arg(long)]
    no_top_features: bool,
    /// Drop the higher-order subterm feature class.
    #[arg(long)]
    no_hosub_features: bool,
    /// Seed for generated-test tooling; the engine itself is
    /// deterministic and ignores it.
    #[arg(long)]
    seed: Option<u64>,
}

impl StrategyFlags {
    fn apply(&self, cfg: &mut StrategyConfig) {
        if let Some(v) = self.codist {
            let k1 = self.k1.unwrap_or(cfg.codist.k1);
            let k2 = self.k2.unwrap_or(cfg.codist.k2);
            cfg.codist = CoDistance::new(v, k1, k2);
        } else if self.k1.is_some() || self.k2.is_some() {
            let k1 = self.k1.unwrap_or(cfg.codist.k1);
            let k2 = self.k2.unwrap_or(cfg.codist.k2);
            cfg.codist = CoDistance::new(cfg.codist.variant, k1, k2);
        }
        if let Some(t) = self.tau1 {
            cfg.tau1 = t;
        }
        if let Some(n) = self.preselect_n {
            cfg.preselect_n = n;
        }
        if let Some(s) = self.tactic_timeout {
            cfg.tactic_budget = Duration::from_secs_f64(s);
        }
        if let Some(s) = self.search_timeout {
            cfg.search_budget = Duration::from_secs_f64(s);
        }
        if let Some(n) = self.hammer_premises {
            if n == 0 {
                cfg.hammer = None;
            } else {
                let budget = self
                    .hammer_timeout
                    .map(Duration::from_secs_f64)
                    .or(cfg.hammer.map(|h| h.budget))
                    .unwrap_or(HammerConfig::default().budget);
                cfg.hammer = Some(HammerConfig {
                    preselect_n: 500,
                    final_n: n,
                    budget,
                });
            }
        } else if let Some(s) = self.hammer_timeout {
            if let Some(h) = &mut cfg.hammer {
                h.budget = Duration::from_secs_f64(s);
            }
        }
        if self.ortho {
            cfg.ortho = true;
        }
        if self.self_learn {
            cfg.self_learn = true;
        }
        cfg.classes = ClassMask {
            use_top: cfg.classes.use_top && !self.no_top_features,
            use_hosub: cfg.classes.use_hosub && !self.no_hosub_features,
        };
    }
}

const EXIT_USAGE: u8 = 1;
const EXIT_CORPUS: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help/version are not usage errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{}", e);
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", e);
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Record { corpus, db, ortho } => {
            let theories = match parse_corpus(&corpus) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("corpus error: {}", e);
                    return Ok(ExitCode::from(EXIT_CORPUS));
                }
            };
            let recorded = match record_corpus(&theories, ortho) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("corpus error: {}", e);
                    return Ok(ExitCode::from(EXIT_CORPUS));
                }
            };
            recorded.save(&db)?;
            println!(
                "recorded {} goal vectors, {} theorem vectors, {} statements -> {}",
                recorded.total_docs(),
                recorded.theorem_vectors().len(),
                recorded.statements().len(),
                db.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Prove {
            goal,
            db,
            strategy,
            flags,
        } => {
            let mut cfg = match preset(&strategy) {
                Some(c) => c,
                None => {
                    eprintln!("unknown strategy `{}`", strategy);
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
            };
            flags.apply(&mut cfg);
            let term = match parse_closed_term(&goal) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("bad goal: {}", e);
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
            };
            let conjecture = Goal::conclusion_only(term);
            if let Err(e) = conjecture.check() {
                eprintln!("bad goal: {}", e);
                return Ok(ExitCode::from(EXIT_USAGE));
            }
            let database = FeatureDb::load(&db)?;
            let mut lib = TacticLib::from_db(&database);
            if let Some(h) = &cfg.hammer {
                lib.hammer_budget = h.budget;
            }
            let result = search(&conjecture, &database, &lib, &cfg);
            match &result.outcome {
                SearchOutcome::Proved { script, .. } => {
                    println!("proved in {} nodes, proof size {}", result.stats.node_count, result.stats.proof_size);
                    println!("{}", script);
                }
                SearchOutcome::Saturated => println!("saturated after {} nodes", result.stats.node_count),
                SearchOutcome::TimedOut => println!("timeout after {} nodes", result.stats.node_count),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            corpus,
            strategies,
            stride,
            out,
            parallel_strategies,
            flags,
        } => {
            let theories = match parse_corpus(&corpus) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("corpus error: {}", e);
                    return Ok(ExitCode::from(EXIT_CORPUS));
                }
            };
            let mut cfgs = Vec::new();
            for name in strategies.split(',') {
                let name = name.trim();
                match preset(name) {
                    Some(mut c) => {
                        flags.apply(&mut c);
                        cfgs.push(c);
                    }
                    None => {
                        eprintln!("unknown strategy `{}`", name);
                        return Ok(ExitCode::from(EXIT_USAGE));
                    }
                }
            }
            let rep = match evaluate(&theories, &cfgs, stride, parallel_strategies) {
                Ok(r) => r,
                Err(tacsearch_core::harness::HarnessError::Fairness(t)) => {
                    eprintln!("internal invariant violation: fairness audit at `{}`", t);
                    return Ok(ExitCode::from(EXIT_INTERNAL));
                }
                Err(e) => {
                    eprintln!("corpus error: {}", e);
                    return Ok(ExitCode::from(EXIT_CORPUS));
                }
            };
            report(&rep.records, &rep.table, &out)?;
            for row in &rep.table.rows {
                let pct = if row.attempted == 0 {
                    0.0
                } else {
                    100.0 * row.solved as f64 / row.attempted as f64
                };
                println!(
                    "{}: solved {}/{} ({:.1}%), U({}) = {}",
                    row.strategy, row.solved, row.attempted, pct, rep.table.reference, row.u_ref
                );
            }
            println!("reports written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
