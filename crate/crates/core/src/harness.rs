//! Chronological re-proving evaluation.
//!
//! Theorems are visited in corpus order. For each attempted theorem the
//! search runs against a database containing only strictly earlier
//! proofs; afterwards the human proof (and, under self-learning, the
//! generated proof) is recorded and the statement becomes available to
//! later rewriting and premise selection. Fairness is therefore
//! guaranteed by construction and additionally audited on every attempt.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::feature::{features_of_statement, ClassMask};
use crate::knn::{DbError, FeatureDb, Origin, OrthoConfig};
use crate::prover::HammerConfig;
use crate::script::{
    chronological_entries, parse_script, run_script_recorded, CorpusTheory, ScriptError, TacticLib,
};
use crate::search::{search, CoDistance, SearchOutcome, StrategyConfig};
use crate::term::Goal;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Corpus(#[from] ScriptError),
    #[error(transparent)]
    Db(#[from] DbError),
    #[error("recording failed for theorem `{theorem}`: {source}")]
    Recording {
        theorem: String,
        source: ScriptError,
    },
    #[error("fairness audit failed at theorem `{0}`: database contains later entries")]
    Fairness(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of one proof attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalOutcome {
    Proved,
    Saturated,
    Timeout,
}

impl EvalOutcome {
    pub fn tag(self) -> &'static str {
        match self {
            EvalOutcome::Proved => "proved",
            EvalOutcome::Saturated => "saturated",
            EvalOutcome::Timeout => "timeout",
        }
    }
}

/// One attempted theorem under one strategy.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub theorem: String,
    pub theory: String,
    pub strategy: String,
    pub outcome: EvalOutcome,
    pub elapsed: Duration,
    pub node_count: usize,
    pub proof_size: usize,
    pub script: Option<String>,
    /// (depth, effective width) expansion trace of the attempt.
    pub expansions: Vec<(u32, u32)>,
    pub ancestor_violations: usize,
    pub sibling_violations: usize,
}

/// Solved counts per strategy plus U(reference): goals solved by the
/// strategy but not by the reference strategy (the last one listed).
#[derive(Debug, Clone)]
pub struct StrategyRow {
    pub strategy: String,
    pub attempted: usize,
    pub solved: usize,
    pub u_ref: usize,
}

#[derive(Debug, Clone)]
pub struct StrategyTable {
    pub reference: String,
    pub rows: Vec<StrategyRow>,
}

#[derive(Debug)]
pub struct EvalReport {
    pub records: Vec<EvalRecord>,
    pub table: StrategyTable,
    /// Final databases per strategy, in strategy order.
    pub dbs: Vec<(String, FeatureDb)>,
}

/// Replays and records the whole corpus without proof attempts.
pub fn record_corpus(theories: &[CorpusTheory], ortho: bool) -> Result<FeatureDb, HarnessError> {
    let mut cfg = StrategyConfig::default();
    cfg.ortho = ortho;
    let (_, db) = run_strategy(theories, &cfg, None)?;
    Ok(db)
}

/// Runs every strategy over the corpus; every `stride`-th theorem is
/// attempted. Strategies are independent (each owns its database), so
/// `parallel` may fan them out across threads.
pub fn evaluate(
    theories: &[CorpusTheory],
    strategies: &[StrategyConfig],
    stride: usize,
    parallel: bool,
) -> Result<EvalReport, HarnessError> {
    let stride = stride.max(1);
    let runs: Vec<Result<(Vec<EvalRecord>, FeatureDb), HarnessError>> = if parallel {
        strategies
            .par_iter()
            .map(|cfg| run_strategy(theories, cfg, Some(stride)))
            .collect()
    } else {
        strategies
            .iter()
            .map(|cfg| run_strategy(theories, cfg, Some(stride)))
            .collect()
    };
    let mut records = Vec::new();
    let mut dbs = Vec::new();
    for (cfg, run) in strategies.iter().zip(runs) {
        let (recs, db) = run?;
        records.extend(recs);
        dbs.push((cfg.id.clone(), db));
    }
    let table = strategy_table(&records, strategies);
    Ok(EvalReport {
        records,
        table,
        dbs,
    })
}

fn run_strategy(
    theories: &[CorpusTheory],
    cfg: &StrategyConfig,
    stride: Option<usize>,
) -> Result<(Vec<EvalRecord>, FeatureDb), HarnessError> {
    let entries = chronological_entries(theories);
    let mut db = FeatureDb::new();
    let mut lib = TacticLib::new();
    if let Some(h) = &cfg.hammer {
        lib.hammer_budget = h.budget;
    }
    let ortho_cfg = if cfg.ortho {
        Some(OrthoConfig {
            neighborhood: 20,
            budget: cfg.tactic_budget,
        })
    } else {
        None
    };
    let mut records = Vec::new();
    let mut theorem_counter = 0usize;

    for entry in entries {
        let seq = entry.theorem.sequence_index;
        let goal = entry.theorem.statement.clone();
        let proof = match &entry.proof {
            None => {
                // Axioms only contribute their statements.
                db.add_statement(entry.theorem.clone());
                lib.add_theorem(entry.theorem.clone());
                continue;
            }
            Some(p) => p.clone(),
        };
        let attempt = match stride {
            Some(s) => theorem_counter % s == 0,
            None => false,
        };
        theorem_counter += 1;

        let mut generated_script: Option<String> = None;
        if attempt {
            if let Some(max) = db.max_seq_index() {
                if max >= seq {
                    return Err(HarnessError::Fairness(entry.theorem.name.clone()));
                }
            }
            let result = search(&goal, &db, &lib, cfg);
            let outcome = match &result.outcome {
                SearchOutcome::Proved { script, .. } => {
                    generated_script = Some(script.clone());
                    EvalOutcome::Proved
                }
                SearchOutcome::Saturated => EvalOutcome::Saturated,
                SearchOutcome::TimedOut => EvalOutcome::Timeout,
            };
            records.push(EvalRecord {
                theorem: entry.theorem.name.clone(),
                theory: entry.theory.clone(),
                strategy: cfg.id.clone(),
                outcome,
                elapsed: result.stats.elapsed,
                node_count: result.stats.node_count,
                proof_size: result.stats.proof_size,
                script: generated_script.clone(),
                expansions: result.stats.expansions,
                ancestor_violations: result.stats.audit.ancestor_violations,
                sibling_violations: result.stats.audit.sibling_violations,
            });
        }

        // Record the human proof (the recording build's precondition is
        // that it replays to closure).
        let stored = record_proof(&mut db, &lib, &goal, &proof, Origin::Human, seq, ortho_cfg)
            .map_err(|e| HarnessError::Recording {
                theorem: entry.theorem.name.clone(),
                source: e,
            })?;
        db.add_theorem_vector(
            &entry.theorem.name,
            features_of_statement(&entry.theorem),
            stored,
            seq,
        );

        // Self-learning: also record the generated proof.
        if cfg.self_learn {
            if let Some(script) = generated_script {
                let stored = record_proof(
                    &mut db,
                    &lib,
                    &goal,
                    &script,
                    Origin::Generated,
                    seq,
                    ortho_cfg,
                )
                .map_err(|e| HarnessError::Recording {
                    theorem: entry.theorem.name.clone(),
                    source: e,
                })?;
                db.extend_theorem_vector(&entry.theorem.name, stored);
            }
        }

        db.add_statement(entry.theorem.clone());
        lib.add_theorem(entry.theorem.clone());
    }
    Ok((records, db))
}

/// Replays one proof with the recorder sink attached and records every
/// emitted invocation. Returns the stored (possibly orthogonalized)
/// labels in order of first occurrence.
fn record_proof(
    db: &mut FeatureDb,
    lib: &TacticLib,
    goal: &Goal,
    proof: &str,
    origin: Origin,
    seq: usize,
    ortho: Option<OrthoConfig>,
) -> Result<Vec<String>, ScriptError> {
    let ast = parse_script(proof)?;
    let mut invocations: Vec<(Goal, String)> = Vec::new();
    let mut sink = |g: &Goal, label: &str| invocations.push((g.clone(), label.to_string()));
    let remaining = run_script_recorded(&ast, goal, lib, &mut sink)?;
    if !remaining.is_empty() {
        return Err(ScriptError::TacticFailed {
            tactic: proof.to_string(),
            kind: "left goals open",
            goal: crate::syntax::print_goal(goal),
            reason: format!("{} open goals remain", remaining.len()),
        });
    }
    let resolve = |s: &str| lib.resolve(s);
    let mut stored_labels: Vec<String> = Vec::new();
    for (g, label) in invocations {
        let stored = db
            .record_invocation(&g, &label, origin, seq, &resolve, ortho)
            .map_err(|e| ScriptError::Resolve(e.to_string()))?;
        if !stored_labels.contains(&stored) {
            stored_labels.push(stored);
        }
    }
    Ok(stored_labels)
}

/// Builds the solved/U table; the reference strategy is the last one.
pub fn strategy_table(records: &[EvalRecord], strategies: &[StrategyConfig]) -> StrategyTable {
    let reference = strategies
        .last()
        .map(|s| s.id.clone())
        .unwrap_or_default();
    let solved_set = |id: &str| -> Vec<&str> {
        records
            .iter()
            .filter(|r| r.strategy == id && r.outcome == EvalOutcome::Proved)
            .map(|r| r.theorem.as_str())
            .collect()
    };
    let ref_solved = solved_set(&reference);
    let rows = strategies
        .iter()
        .map(|s| {
            let mine = solved_set(&s.id);
            let attempted = records.iter().filter(|r| r.strategy == s.id).count();
            let u_ref = mine.iter().filter(|t| !ref_solved.contains(*t)).count();
            StrategyRow {
                strategy: s.id.clone(),
                attempted,
                solved: mine.len(),
                u_ref,
            }
        })
        .collect();
    StrategyTable { reference, rows }
}

// -- presets -----------------------------------------------------------------

/// Named preset strategies; the identifiers follow the ablation rows the
/// harness mirrors (`nh` and `sh` are the two headline strategies, the
/// `d*` rows vary one parameter each, `e2`/`e3` the learning schemes).
pub fn preset(name: &str) -> Option<StrategyConfig> {
    let mut cfg = StrategyConfig {
        id: name.to_string(),
        ..StrategyConfig::default()
    };
    match name {
        "d1" => {
            cfg.codist = CoDistance::new(1, 0.8, 0.8);
        }
        "d0" => {
            cfg.codist = CoDistance::new(2, 0.8, 0.8);
        }
        "d2" => {
            cfg.codist = CoDistance::new(1, 0.8, 0.8);
            cfg.classes = ClassMask {
                use_top: false,
                use_hosub: true,
            };
        }
        "d3" => {
            cfg.codist = CoDistance::new(1, 0.8, 0.8);
            cfg.classes = ClassMask {
                use_top: true,
                use_hosub: false,
            };
        }
        "d4" => {
            cfg.codist = CoDistance::new(1, 0.8, 0.8);
            cfg.tactic_budget = Duration::from_millis(4);
        }
        "d5" => {
            cfg.codist = CoDistance::new(1, 0.8, 0.8);
            cfg.tactic_budget = Duration::from_millis(100);
        }
        "d6" => {
            cfg.codist = CoDistance::new(3, 0.8, 0.8);
        }
        "d7" => {
            cfg.codist = CoDistance::new(4, 0.8, 0.8);
        }
        "d8" => {
            cfg.codist = CoDistance::new(4, 0.4, 0.4);
        }
        "d9" | "nh" => {
            cfg.codist = CoDistance::new(5, 0.8, 0.8);
        }
        "d16" => {
            cfg.codist = CoDistance::new(5, 0.8, 0.8);
            cfg.hammer = Some(HammerConfig {
                preselect_n: 500,
                final_n: 8,
                budget: Duration::from_millis(20),
            });
        }
        "d17" => {
            cfg.codist = CoDistance::new(5, 0.8, 0.8);
            cfg.hammer = Some(HammerConfig {
                preselect_n: 500,
                final_n: 16,
                budget: Duration::from_millis(20),
            });
        }
        "d18" => {
            cfg.codist = CoDistance::new(5, 0.8, 0.8);
            cfg.hammer = Some(HammerConfig {
                preselect_n: 500,
                final_n: 8,
                budget: Duration::from_millis(100),
            });
        }
        "d19" | "sh" => {
            cfg.codist = CoDistance::new(5, 0.8, 0.8);
            cfg.hammer = Some(HammerConfig {
                preselect_n: 500,
                final_n: 16,
                budget: Duration::from_millis(100),
            });
        }
        "e2" => {
            cfg.codist = CoDistance::new(5, 0.8, 0.8);
            cfg.self_learn = true;
        }
        "e3" => {
            cfg.codist = CoDistance::new(5, 0.8, 0.8);
            cfg.self_learn = true;
            cfg.ortho = true;
        }
        "greedy" => {
            cfg.codist = CoDistance::new(1, 0.8, 0.8);
            cfg.greedy = true;
        }
        _ => return None,
    }
    Some(cfg)
}

// -- reports -------------------------------------------------------------------

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Emits `results.csv`, `strategy_table.csv`, `size_histogram.csv`,
/// `time_curve.csv` and `per_theory.csv` into the output directory.
/// Elapsed-time columns (and the whole time curve) are the only
/// run-dependent content; everything else is deterministic.
pub fn report(records: &[EvalRecord], table: &StrategyTable, out_dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out_dir)?;
    let mut results = String::from("theorem,theory,strategy,outcome,nodes,proof_size,script,elapsed_s\n");
    for r in records {
        results.push_str(&format!(
            "{},{},{},{},{},{},{},{:.4}\n",
            csv_quote(&r.theorem),
            csv_quote(&r.theory),
            csv_quote(&r.strategy),
            r.outcome.tag(),
            r.node_count,
            r.proof_size,
            csv_quote(r.script.as_deref().unwrap_or("")),
            r.elapsed.as_secs_f64(),
        ));
    }
    fs::write(out_dir.join("results.csv"), results)?;

    let mut strat = String::from("strategy,attempted,solved,solved_pct,u_ref\n");
    for row in &table.rows {
        let pct = if row.attempted == 0 {
            0.0
        } else {
            100.0 * row.solved as f64 / row.attempted as f64
        };
        strat.push_str(&format!(
            "{},{},{},{:.2},{}\n",
            csv_quote(&row.strategy),
            row.attempted,
            row.solved,
            pct,
            row.u_ref
        ));
    }
    fs::write(out_dir.join("strategy_table.csv"), strat)?;

    let mut hist = String::from("strategy,size,count\n");
    let strategies: Vec<&str> = {
        let mut seen = Vec::new();
        for r in records {
            if !seen.contains(&r.strategy.as_str()) {
                seen.push(r.strategy.as_str());
            }
        }
        seen
    };
    for s in &strategies {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for r in records
            .iter()
            .filter(|r| r.strategy == *s && r.outcome == EvalOutcome::Proved)
        {
            *counts.entry(r.proof_size).or_insert(0) += 1;
        }
        for (size, count) in counts {
            hist.push_str(&format!("{},{},{}\n", csv_quote(s), size, count));
        }
    }
    fs::write(out_dir.join("size_histogram.csv"), hist)?;

    let mut curve = String::from("strategy,bucket_s,cumulative_solved\n");
    let max_elapsed = records
        .iter()
        .map(|r| r.elapsed.as_secs_f64())
        .fold(0.0f64, f64::max);
    let buckets = ((max_elapsed / 0.1).ceil() as usize + 1).max(1);
    for s in &strategies {
        for b in 1..=buckets {
            let t = b as f64 * 0.1;
            let solved = records
                .iter()
                .filter(|r| {
                    r.strategy == *s
                        && r.outcome == EvalOutcome::Proved
                        && r.elapsed.as_secs_f64() < t
                })
                .count();
            curve.push_str(&format!("{},{:.1},{}\n", csv_quote(s), t, solved));
        }
    }
    fs::write(out_dir.join("time_curve.csv"), curve)?;

    let mut per_theory = String::from("strategy,theory,attempted,proved,pct\n");
    let theories: Vec<&str> = {
        let mut seen = Vec::new();
        for r in records {
            if !seen.contains(&r.theory.as_str()) {
                seen.push(r.theory.as_str());
            }
        }
        seen
    };
    for s in &strategies {
        for th in &theories {
            let attempted = records
                .iter()
                .filter(|r| r.strategy == *s && r.theory == *th)
                .count();
            let proved = records
                .iter()
                .filter(|r| {
                    r.strategy == *s && r.theory == *th && r.outcome == EvalOutcome::Proved
                })
                .count();
            let pct = if attempted == 0 {
                0.0
            } else {
                100.0 * proved as f64 / attempted as f64
            };
            per_theory.push_str(&format!(
                "{},{},{},{},{:.2}\n",
                csv_quote(s),
                csv_quote(th),
                attempted,
                proved,
                pct
            ));
        }
    }
    fs::write(out_dir.join("per_theory.csv"), per_theory)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_corpus_text;

    fn tiny_corpus() -> Vec<CorpusTheory> {
        let text = r#"
theory base
axiom ADD_zero: "!n:num. 0 + n = n"
axiom ADD_suc: "!m:num. !n:num. SUC m + n = SUC (m + n)"

thm truth: "T"
proof: taut_tac

thm zero_zero: "0 + 0 = 0"
proof: rewrite_tac [ADD_zero]

thm add_zero_right: "!n:num. n + 0 = n"
proof: induct_num_tac THENL [rewrite_tac [ADD_zero], rewrite_tac [ADD_suc]]

thm truth_imp: "T ==> T"
proof: strip_tac THEN accept_tac
"#;
        let theories = parse_corpus_text(text, "mem").unwrap();
        crate::script::parse_corpus_ordered(theories).unwrap()
    }

    #[test]
    fn recording_replays_whole_corpus_and_counts_vectors() {
        let theories = tiny_corpus();
        let db = record_corpus(&theories, false).unwrap();
        // 1 + 1 + 3 + 2 atomic executions: induction branches run one
        // rewrite each, strip/accept once each.
        assert_eq!(db.total_docs(), 7);
        assert_eq!(db.theorem_vectors().len(), 4);
        assert_eq!(db.statements().len(), 6);
    }

    #[test]
    fn stride_controls_attempt_count() {
        let theories = tiny_corpus();
        let cfg = preset("nh").unwrap();
        let report = evaluate(&theories, &[cfg], 2, false).unwrap();
        // 4 theorems, stride 2: attempts at indices 0 and 2.
        assert_eq!(report.records.len(), 2);
    }

    #[test]
    fn u_table_of_identical_strategies_is_zero() {
        let theories = tiny_corpus();
        let mut a = preset("nh").unwrap();
        a.id = "nh_a".into();
        let mut b = preset("nh").unwrap();
        b.id = "nh_b".into();
        let report = evaluate(&theories, &[a, b], 1, false).unwrap();
        for row in &report.table.rows {
            assert_eq!(row.u_ref, 0, "identical strategies must have U = 0");
        }
    }

    #[test]
    fn degenerate_budget_stops_searches_immediately() {
        let theories = tiny_corpus();
        let mut cfg = preset("nh").unwrap();
        cfg.search_budget = Duration::from_micros(5);
        let report = evaluate(&theories, &[cfg], 1, false).unwrap();
        // The budget is checked between iterations, so at most one
        // candidate is ever applied; nothing is proved beyond one-step
        // closures.
        for r in &report.records {
            assert!(
                r.expansions.len() <= 1,
                "degenerate budget still expanded {} times",
                r.expansions.len()
            );
        }
        assert!(report
            .records
            .iter()
            .any(|r| r.outcome == EvalOutcome::Timeout));
    }

    #[test]
    fn reports_write_all_files() {
        let theories = tiny_corpus();
        let cfg = preset("nh").unwrap();
        let rep = evaluate(&theories, &[cfg], 1, false).unwrap();
        let dir = std::env::temp_dir().join(format!("tacsearch_report_{}", std::process::id()));
        report(&rep.records, &rep.table, &dir).unwrap();
        for f in [
            "results.csv",
            "strategy_table.csv",
            "size_histogram.csv",
            "time_curve.csv",
            "per_theory.csv",
        ] {
            assert!(dir.join(f).exists(), "missing {}", f);
        }
        let hist = fs::read_to_string(dir.join("size_histogram.csv")).unwrap();
        assert!(hist.starts_with("strategy,size,count"));
        fs::remove_dir_all(&dir).ok();
    }
}
