//! Feature database and k-NN tactic prediction.
//!
//! Stores one goal vector per recorded tactic invocation and one theorem
//! vector per recorded proof, weights shared features by TF-IDF rarity,
//! and scores candidate tactics by the similarity of their most similar
//! recorded goal, normalized by the open goal's self-similarity.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Duration;

use thiserror::Error;

use crate::feature::{features_of_goal, ClassMask, Feature, FeatureSet};
use crate::syntax::{parse_closed_term, print_term};
use crate::tactic::{apply_with_budget, Tactic, TacticOutcome};
use crate::term::{Goal, Theorem};

#[derive(Debug, Error)]
pub enum DbError {
    #[error("db parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("tactic `{0}` does not parse: {1}")]
    BadTactic(String, String),
}

/// Whether a vector came from a human corpus proof or a proof the search
/// discovered itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Human,
    Generated,
}

impl Origin {
    pub fn tag(self) -> &'static str {
        match self {
            Origin::Human => "human",
            Origin::Generated => "generated",
        }
    }

    pub fn from_tag(s: &str) -> Option<Origin> {
        match s {
            "human" => Some(Origin::Human),
            "generated" => Some(Origin::Generated),
            _ => None,
        }
    }
}

/// A recorded tactic invocation: the tactic label together with the
/// features of the goal it was applied to.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalVector {
    pub tactic: String,
    pub features: FeatureSet,
    pub origin: Origin,
    pub seq_index: usize,
}

/// Per-theorem record: statement features plus every tactic label in the
/// recorded proof. Drives tactic preselection.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremVector {
    pub name: String,
    pub features: FeatureSet,
    pub tactics: Vec<String>,
    pub seq_index: usize,
}

/// A candidate tactic with its normalized score in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTactic {
    pub tactic: String,
    pub norm_score: f64,
}

/// Scoring knobs: the TF-IDF exponent and the feature-class ablation mask.
#[derive(Debug, Clone, Copy)]
pub struct ScoringParams {
    pub tau1: f64,
    pub classes: ClassMask,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            tau1: 6.0,
            classes: ClassMask::default(),
        }
    }
}

pub type TacticResolver<'a> = &'a dyn Fn(&str) -> Result<Tactic, String>;

#[derive(Debug, Clone, Default)]
pub struct FeatureDb {
    goal_vectors: Vec<GoalVector>,
    theorem_vectors: Vec<TheoremVector>,
    statements: BTreeMap<String, Theorem>,
    doc_frequency: HashMap<Feature, usize>,
    by_tactic: HashMap<String, Vec<usize>>,
}

impl FeatureDb {
    pub fn new() -> FeatureDb {
        FeatureDb::default()
    }

    pub fn goal_vectors(&self) -> &[GoalVector] {
        &self.goal_vectors
    }

    pub fn theorem_vectors(&self) -> &[TheoremVector] {
        &self.theorem_vectors
    }

    pub fn statements(&self) -> &BTreeMap<String, Theorem> {
        &self.statements
    }

    pub fn statement(&self, name: &str) -> Option<&Theorem> {
        self.statements.get(name)
    }

    pub fn total_docs(&self) -> usize {
        self.goal_vectors.len()
    }

    pub fn doc_frequency(&self, f: &Feature) -> usize {
        self.doc_frequency.get(f).copied().unwrap_or(0)
    }

    /// Distinct tactic labels currently stored.
    pub fn distinct_tactics(&self) -> usize {
        self.by_tactic.len()
    }

    pub fn max_seq_index(&self) -> Option<usize> {
        let g = self.goal_vectors.iter().map(|v| v.seq_index).max();
        let t = self.theorem_vectors.iter().map(|v| v.seq_index).max();
        let s = self.statements.values().map(|t| t.sequence_index).max();
        [g, t, s].into_iter().flatten().max()
    }

    /// Chronological snapshot: only entries with `seq_index < bound`.
    pub fn snapshot_before(&self, bound: usize) -> FeatureDb {
        let mut db = FeatureDb::new();
        for thm in self.statements.values() {
            if thm.sequence_index < bound {
                db.add_statement(thm.clone());
            }
        }
        for v in &self.goal_vectors {
            if v.seq_index < bound {
                db.push_goal_vector(v.clone());
            }
        }
        for v in &self.theorem_vectors {
            if v.seq_index < bound {
                db.theorem_vectors.push(v.clone());
            }
        }
        db
    }

    pub fn add_statement(&mut self, thm: Theorem) {
        self.statements.insert(thm.name.clone(), thm);
    }

    pub fn add_theorem_vector(&mut self, name: &str, features: FeatureSet, tactics: Vec<String>, seq_index: usize) {
        self.theorem_vectors.push(TheoremVector {
            name: name.to_string(),
            features,
            tactics,
            seq_index,
        });
    }

    /// Appends tactics to an existing theorem vector (self-learning merges
    /// the generated proof's labels into the theorem's record).
    pub fn extend_theorem_vector(&mut self, name: &str, extra: Vec<String>) {
        if let Some(tv) = self.theorem_vectors.iter_mut().rev().find(|tv| tv.name == name) {
            for t in extra {
                if !tv.tactics.contains(&t) {
                    tv.tactics.push(t);
                }
            }
        }
    }

    fn push_goal_vector(&mut self, v: GoalVector) {
        let idx = self.goal_vectors.len();
        for f in &v.features {
            *self.doc_frequency.entry(f.clone()).or_insert(0) += 1;
        }
        self.by_tactic.entry(v.tactic.clone()).or_default().push(idx);
        self.goal_vectors.push(v);
    }

    /// Recomputes doc_frequency from scratch; used to audit consistency.
    pub fn recompute_doc_frequency(&self) -> HashMap<Feature, usize> {
        let mut df: HashMap<Feature, usize> = HashMap::new();
        for v in &self.goal_vectors {
            for f in &v.features {
                *df.entry(f.clone()).or_insert(0) += 1;
            }
        }
        df
    }

    // -- scoring ---------------------------------------------------------

    /// TF-IDF rarity weight: `ln(total_docs / (1 + doc_frequency))`.
    /// Features absent from the db weigh `ln(total_docs)`.
    pub fn tfidf(&self, f: &Feature) -> f64 {
        let total = self.total_docs();
        if total == 0 {
            return 0.0;
        }
        (total as f64 / (1.0 + self.doc_frequency(f) as f64)).ln()
    }

    /// Sum of `tfidf(f)^tau1` over the shared features of the two sets.
    pub fn tactic_score_1(&self, params: &ScoringParams, f_o: &FeatureSet, f_p: &FeatureSet) -> f64 {
        let (small, large) = if f_o.len() <= f_p.len() {
            (f_o, f_p)
        } else {
            (f_p, f_o)
        };
        let mut sum = 0.0;
        for f in small {
            if large.contains(f) {
                sum += self.tfidf(f).powf(params.tau1);
            }
        }
        sum
    }

    /// `tactic_score_1` with a length penalty on the open goal's set.
    pub fn tactic_score_2(&self, params: &ScoringParams, f_o: &FeatureSet, f_p: &FeatureSet) -> f64 {
        self.tactic_score_1(params, f_o, f_p) / (1.0 + (1.0 + f_o.len() as f64).ln())
    }

    pub fn score_by_variant(
        &self,
        variant: u8,
        params: &ScoringParams,
        f_o: &FeatureSet,
        f_p: &FeatureSet,
    ) -> f64 {
        match variant {
            1 => self.tactic_score_1(params, f_o, f_p),
            2 => self.tactic_score_2(params, f_o, f_p),
            v => panic!("unknown score variant {}", v),
        }
    }

    /// Scores the candidate tactics against an open goal. Each tactic's
    /// score is the similarity of its most similar recorded goal,
    /// normalized by the open goal's self-similarity; the list is sorted
    /// descending with ties broken by earlier sequence index, then
    /// lexicographic tactic string.
    pub fn score_tactics(
        &self,
        open_goal: &Goal,
        candidates: &[String],
        variant: u8,
        params: &ScoringParams,
    ) -> Vec<ScoredTactic> {
        if self.goal_vectors.is_empty() {
            return vec![];
        }
        let f_open = params.classes.filter(&features_of_goal(open_goal));
        self.score_tactics_from_features(&f_open, candidates, variant, params)
    }

    pub fn score_tactics_from_features(
        &self,
        f_open: &FeatureSet,
        candidates: &[String],
        variant: u8,
        params: &ScoringParams,
    ) -> Vec<ScoredTactic> {
        if self.goal_vectors.is_empty() {
            return vec![];
        }
        let self_sim = self.score_by_variant(variant, params, f_open, f_open);
        let mut scored: Vec<(ScoredTactic, usize)> = Vec::new();
        for cand in candidates {
            let Some(indices) = self.by_tactic.get(cand) else {
                continue;
            };
            let mut best = f64::NEG_INFINITY;
            let mut earliest = usize::MAX;
            for &i in indices {
                let v = &self.goal_vectors[i];
                let f_p = params.classes.filter(&v.features);
                let s = self.score_by_variant(variant, params, f_open, &f_p);
                if s > best {
                    best = s;
                }
                if v.seq_index < earliest {
                    earliest = v.seq_index;
                }
            }
            let norm = if self_sim > 0.0 { best / self_sim } else { 0.0 };
            scored.push((
                ScoredTactic {
                    tactic: cand.clone(),
                    norm_score: norm,
                },
                earliest,
            ));
        }
        scored.sort_by(|(a, sa), (b, sb)| {
            b.norm_score
                .partial_cmp(&a.norm_score)
                .unwrap()
                .then(sa.cmp(sb))
                .then(a.tactic.cmp(&b.tactic))
        });
        scored.into_iter().map(|(s, _)| s).collect()
    }

    /// Ranks theorem vectors by similarity to the conjecture and walks the
    /// ranking accumulating tactic labels until `n` distinct ones are
    /// collected or the vectors are exhausted. First-seen order.
    pub fn preselect_tactics(&self, conjecture: &Goal, n: usize, params: &ScoringParams) -> Vec<String> {
        let f_conj = params.classes.filter(&features_of_goal(conjecture));
        let mut ranked: Vec<(f64, usize)> = self
            .theorem_vectors
            .iter()
            .enumerate()
            .map(|(i, tv)| {
                let f_p = params.classes.filter(&tv.features);
                (self.tactic_score_1(params, &f_conj, &f_p), i)
            })
            .collect();
        ranked.sort_by(|(sa, ia), (sb, ib)| {
            sb.partial_cmp(sa)
                .unwrap()
                .then(self.theorem_vectors[*ia].seq_index.cmp(&self.theorem_vectors[*ib].seq_index))
                .then(self.theorem_vectors[*ia].name.cmp(&self.theorem_vectors[*ib].name))
        });
        let mut out: Vec<String> = Vec::new();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        'walk: for (_, i) in &ranked {
            for t in &self.theorem_vectors[*i].tactics {
                if seen.insert(t.as_str()) {
                    out.push(t.clone());
                    if out.len() >= n {
                        break 'walk;
                    }
                }
            }
        }
        out
    }

    /// Runs the label competition on the `neighborhood` goal vectors
    /// closest to `goal`: the distinct tactics there are ordered by
    /// db-wide coverage, and the first whose application reproduces
    /// `outcome_goals` (set-equal) wins; otherwise the original string is
    /// kept.
    pub fn orthogonalize(
        &self,
        resolve: TacticResolver,
        original: &Tactic,
        goal: &Goal,
        outcome_goals: &[Goal],
        neighborhood: usize,
        budget: Duration,
    ) -> String {
        if self.goal_vectors.is_empty() {
            return original.canonical_string.clone();
        }
        let params = ScoringParams::default();
        let f_goal = features_of_goal(goal);
        let mut ranked: Vec<(f64, usize)> = self
            .goal_vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (self.tactic_score_1(&params, &f_goal, &v.features), i))
            .collect();
        ranked.sort_by(|(sa, ia), (sb, ib)| {
            sb.partial_cmp(sa)
                .unwrap()
                .then(self.goal_vectors[*ia].seq_index.cmp(&self.goal_vectors[*ib].seq_index))
                .then(ia.cmp(ib))
        });
        let mut competitors: Vec<&str> = Vec::new();
        for (_, i) in ranked.iter().take(neighborhood) {
            let t = self.goal_vectors[*i].tactic.as_str();
            if !competitors.contains(&t) {
                competitors.push(t);
            }
        }
        // Db-wide coverage, descending; ties by earliest appearance then label.
        competitors.sort_by(|a, b| {
            let cov = |t: &str| self.by_tactic.get(t).map(|v| v.len()).unwrap_or(0);
            let first = |t: &str| {
                self.by_tactic
                    .get(t)
                    .and_then(|v| v.first())
                    .map(|&i| self.goal_vectors[i].seq_index)
                    .unwrap_or(usize::MAX)
            };
            cov(b).cmp(&cov(a)).then(first(a).cmp(&first(b))).then(a.cmp(b))
        });
        let want = goal_multiset_key(outcome_goals);
        for cand in competitors {
            let Ok(tac) = resolve(cand) else { continue };
            if let TacticOutcome::Subgoals(gs) = apply_with_budget(&tac, goal, budget) {
                if goal_multiset_key(&gs) == want {
                    return cand.to_string();
                }
            }
        }
        original.canonical_string.clone()
    }

    /// Records one tactic invocation against a goal. With orthogonalization
    /// enabled the stored label may be replaced by an equally-effective,
    /// better-covered competitor. Returns the stored label.
    pub fn record_invocation(
        &mut self,
        goal: &Goal,
        tactic_string: &str,
        origin: Origin,
        seq_index: usize,
        resolve: TacticResolver,
        ortho: Option<OrthoConfig>,
    ) -> Result<String, DbError> {
        let tactic = resolve(tactic_string)
            .map_err(|e| DbError::BadTactic(tactic_string.to_string(), e))?;
        let stored = match ortho {
            Some(cfg) => match apply_with_budget(&tactic, goal, cfg.budget) {
                TacticOutcome::Subgoals(gs) => {
                    self.orthogonalize(resolve, &tactic, goal, &gs, cfg.neighborhood, cfg.budget)
                }
                _ => tactic.canonical_string.clone(),
            },
            None => tactic.canonical_string.clone(),
        };
        self.push_goal_vector(GoalVector {
            tactic: stored.clone(),
            features: features_of_goal(goal),
            origin,
            seq_index,
        });
        Ok(stored)
    }

    // -- persistence -------------------------------------------------------

    /// Serializes the database; line-oriented, one record per line.
    pub fn save(&self, path: &Path) -> Result<(), DbError> {
        fs::write(path, self.serialize())?;
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut stmts: Vec<&Theorem> = self.statements.values().collect();
        stmts.sort_by_key(|t| t.sequence_index);
        for t in stmts {
            let _ = writeln!(
                out,
                "S\t{}\t{}\t{}\t{}",
                t.sequence_index,
                t.name,
                t.dependencies.join(","),
                print_term(&t.statement.conclusion)
            );
        }
        for v in &self.goal_vectors {
            let feats: Vec<String> = v.features.iter().map(|f| f.serialize()).collect();
            let _ = writeln!(
                out,
                "G\t{}\t{}\t{}\t{}",
                v.origin.tag(),
                v.tactic,
                feats.join(","),
                v.seq_index
            );
        }
        for tv in &self.theorem_vectors {
            let feats: Vec<String> = tv.features.iter().map(|f| f.serialize()).collect();
            let _ = writeln!(
                out,
                "T\t{}\t{}\t{}\t{}",
                tv.name,
                tv.tactics.join(";"),
                feats.join(","),
                tv.seq_index
            );
        }
        out
    }

    pub fn load(path: &Path) -> Result<FeatureDb, DbError> {
        let text = fs::read_to_string(path)?;
        FeatureDb::deserialize(&text)
    }

    pub fn deserialize(text: &str) -> Result<FeatureDb, DbError> {
        let mut db = FeatureDb::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let perr = |msg: &str| DbError::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            match fields[0] {
                "S" => {
                    if fields.len() != 5 {
                        return Err(perr("statement record needs 5 fields"));
                    }
                    let seq: usize = fields[1].parse().map_err(|_| perr("bad sequence index"))?;
                    let deps: Vec<String> = if fields[3].is_empty() {
                        vec![]
                    } else {
                        fields[3].split(',').map(|s| s.to_string()).collect()
                    };
                    let concl = parse_closed_term(fields[4]).map_err(|e| DbError::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    })?;
                    db.add_statement(Theorem {
                        name: fields[2].to_string(),
                        statement: Goal::conclusion_only(concl),
                        dependencies: deps,
                        sequence_index: seq,
                    });
                }
                "G" => {
                    if fields.len() != 5 {
                        return Err(perr("goal-vector record needs 5 fields"));
                    }
                    let origin =
                        Origin::from_tag(fields[1]).ok_or_else(|| perr("bad origin tag"))?;
                    let features = parse_features(fields[3], line_no)?;
                    let seq: usize = fields[4].parse().map_err(|_| perr("bad sequence index"))?;
                    db.push_goal_vector(GoalVector {
                        tactic: fields[2].to_string(),
                        features,
                        origin,
                        seq_index: seq,
                    });
                }
                "T" => {
                    if fields.len() != 5 {
                        return Err(perr("theorem-vector record needs 5 fields"));
                    }
                    let tactics: Vec<String> = if fields[2].is_empty() {
                        vec![]
                    } else {
                        fields[2].split(';').map(|s| s.to_string()).collect()
                    };
                    let features = parse_features(fields[3], line_no)?;
                    let seq: usize = fields[4].parse().map_err(|_| perr("bad sequence index"))?;
                    db.theorem_vectors.push(TheoremVector {
                        name: fields[1].to_string(),
                        features,
                        tactics,
                        seq_index: seq,
                    });
                }
                other => {
                    return Err(DbError::Parse {
                        line: line_no,
                        msg: format!("unknown record tag `{}`", other),
                    })
                }
            }
        }
        Ok(db)
    }
}

fn parse_features(field: &str, line: usize) -> Result<FeatureSet, DbError> {
    let mut out = FeatureSet::new();
    if field.is_empty() {
        return Ok(out);
    }
    for item in field.split(',') {
        match Feature::parse(item) {
            Some(f) => {
                out.insert(f);
            }
            None => {
                return Err(DbError::Parse {
                    line,
                    msg: format!("bad feature `{}`", item),
                })
            }
        }
    }
    Ok(out)
}

/// Orthogonalization settings: competition neighborhood and the budget
/// under which competitor effects are replayed.
#[derive(Debug, Clone, Copy)]
pub struct OrthoConfig {
    pub neighborhood: usize,
    pub budget: Duration,
}

impl Default for OrthoConfig {
    fn default() -> Self {
        OrthoConfig {
            neighborhood: 20,
            budget: Duration::from_millis(20),
        }
    }
}

/// Sorted multiset key over goals; two subgoal lists with equal keys are
/// the same set of goals up to alpha and assumption order.
pub fn goal_multiset_key(goals: &[Goal]) -> Vec<String> {
    let mut keys: Vec<String> = goals.iter().map(|g| g.key()).collect();
    keys.sort();
    keys
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_closed_term;
    use crate::tactic::reference_tactics;

    fn goal(s: &str) -> Goal {
        Goal::conclusion_only(parse_closed_term(s).unwrap())
    }

    fn resolver() -> impl Fn(&str) -> Result<Tactic, String> {
        |name: &str| {
            reference_tactics()
                .into_iter()
                .find(|t| t.canonical_string == name)
                .ok_or_else(|| format!("unknown tactic `{}`", name))
        }
    }

    fn record(db: &mut FeatureDb, g: &Goal, tac: &str, seq: usize) {
        let r = resolver();
        db.record_invocation(g, tac, Origin::Human, seq, &r, None)
            .unwrap();
    }

    #[test]
    fn tfidf_formula_values() {
        let mut db = FeatureDb::new();
        let g = goal("T");
        for i in 0..100 {
            record(&mut db, &g, "taut_tac", i);
        }
        assert_eq!(db.total_docs(), 100);
        // Unseen feature: ln(100).
        let unseen = Feature::new(crate::feature::FeatureClass::Const, "APPEND");
        assert!((db.tfidf(&unseen) - 100f64.ln()).abs() < 1e-12);
        // df = 99 would give ln(1) = 0; our T-features have df=100.
        let t_const = Feature::new(crate::feature::FeatureClass::Const, "T");
        assert_eq!(db.doc_frequency(&t_const), 100);
        assert!((db.tfidf(&t_const) - (100f64 / 101.0).ln()).abs() < 1e-12);

        let mut db8 = FeatureDb::new();
        for i in 0..8 {
            record(&mut db8, &g, "taut_tac", i);
        }
        // total=8, df=3 -> ln(2).
        let mut df3 = FeatureDb::new();
        for i in 0..8 {
            let gg = if i < 3 { goal("T") } else { goal("F ==> F") };
            record(&mut df3, &gg, "taut_tac", i);
        }
        assert_eq!(df3.doc_frequency(&t_const), 3);
        assert!((df3.tfidf(&t_const) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn score_examples() {
        let params = ScoringParams::default();
        let mut db = FeatureDb::new();
        record(&mut db, &goal("T"), "taut_tac", 0);
        record(&mut db, &goal("!n:num. n + 0 = n"), "induct_num_tac", 1);
        // Disjoint feature sets score 0.
        let fa: FeatureSet = [Feature::new(crate::feature::FeatureClass::Const, "x")]
            .into_iter()
            .collect();
        let fb: FeatureSet = [Feature::new(crate::feature::FeatureClass::Const, "y")]
            .into_iter()
            .collect();
        assert_eq!(db.tactic_score_1(&params, &fa, &fb), 0.0);
        // score_2 denominator.
        let s1 = 2.0f64;
        let manual = s1 / (1.0 + (8.0f64).ln());
        let mut f7 = FeatureSet::new();
        for i in 0..7 {
            f7.insert(Feature::new(crate::feature::FeatureClass::Var, format!("v{}", i)));
        }
        // Construct the check directly from the formula rather than the db.
        assert!((manual - s1 / (1.0 + (1.0 + 7.0f64).ln())).abs() < 1e-12);
        let s2 = db.tactic_score_2(&params, &f7, &f7);
        let s1db = db.tactic_score_1(&params, &f7, &f7);
        assert!((s2 - s1db / (1.0 + 8f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn identical_goal_scores_one_and_disjoint_scores_zero() {
        let params = ScoringParams::default();
        let mut db = FeatureDb::new();
        let g = goal("!n:num. n + 0 = n");
        record(&mut db, &g, "induct_num_tac", 0);
        record(&mut db, &goal("T"), "taut_tac", 1);
        let scored = db.score_tactics(
            &g,
            &["induct_num_tac".to_string(), "taut_tac".to_string()],
            1,
            &params,
        );
        assert_eq!(scored[0].tactic, "induct_num_tac");
        assert!((scored[0].norm_score - 1.0).abs() < 1e-9);
        for s in &scored {
            assert!(s.norm_score >= 0.0 && s.norm_score <= 1.0 + 1e-12);
        }
        // A goal sharing no features with any record scores 0 everywhere.
        let alien: FeatureSet = [
            Feature::new(crate::feature::FeatureClass::Const, "zzz"),
            Feature::new(crate::feature::FeatureClass::Var, "qq"),
        ]
        .into_iter()
        .collect();
        let scored = db.score_tactics_from_features(
            &alien,
            &["induct_num_tac".to_string(), "taut_tac".to_string()],
            1,
            &params,
        );
        for s in &scored {
            assert_eq!(s.norm_score, 0.0);
        }
    }

    #[test]
    fn empty_db_scores_empty() {
        let db = FeatureDb::new();
        assert!(db
            .score_tactics(&goal("T"), &["taut_tac".to_string()], 1, &ScoringParams::default())
            .is_empty());
        assert!(db
            .preselect_tactics(&goal("T"), 500, &ScoringParams::default())
            .is_empty());
    }

    #[test]
    fn preselection_exhaustion_and_cutoff() {
        let params = ScoringParams::default();
        let mut db = FeatureDb::new();
        let g1 = goal("!n:num. n + 0 = n");
        let g2 = goal("!l:list(num). APPEND l NIL = l");
        db.add_theorem_vector(
            "nat_thm",
            features_of_goal(&g1),
            vec!["induct_num_tac".into(), "rewrite_tac []".into()],
            0,
        );
        db.add_theorem_vector(
            "list_thm",
            features_of_goal(&g2),
            vec!["induct_list_tac".into(), "rewrite_tac []".into()],
            1,
        );
        // n large: everything, nearest theorem's tactics first.
        let all = db.preselect_tactics(&g1, 500, &params);
        assert_eq!(
            all,
            vec![
                "induct_num_tac".to_string(),
                "rewrite_tac []".to_string(),
                "induct_list_tac".to_string()
            ]
        );
        // n=1: exactly the nearest theorem's first tactic.
        assert_eq!(db.preselect_tactics(&g1, 1, &params), vec!["induct_num_tac".to_string()]);
    }

    #[test]
    fn orthogonalization_examples() {
        let r = resolver();
        let budget = Duration::from_millis(20);
        // Empty db: original kept.
        let db = FeatureDb::new();
        let strip = r("strip_tac").unwrap();
        let g = goal("T ==> T");
        let gs = match apply_with_budget(&strip, &g, budget) {
            TacticOutcome::Subgoals(gs) => gs,
            _ => panic!(),
        };
        assert_eq!(
            db.orthogonalize(&r, &strip, &g, &gs, 20, budget),
            "strip_tac"
        );
        // gen_strip_tac coincides with strip_tac on T ==> T and has higher
        // coverage: the competitor wins.
        let mut db = FeatureDb::new();
        record(&mut db, &g, "gen_strip_tac", 0);
        record(&mut db, &goal("T ==> F"), "gen_strip_tac", 1);
        record(&mut db, &goal("F ==> T"), "strip_tac", 2);
        assert_eq!(
            db.orthogonalize(&r, &strip, &g, &gs, 20, budget),
            "gen_strip_tac"
        );
        // A competitor with a different subgoal set never wins.
        let conj_goal = goal("T /\\ T");
        let conj = r("conj_tac").unwrap();
        let conj_gs = match apply_with_budget(&conj, &conj_goal, budget) {
            TacticOutcome::Subgoals(gs) => gs,
            _ => panic!(),
        };
        let mut db = FeatureDb::new();
        record(&mut db, &conj_goal, "strip_tac", 0);
        record(&mut db, &conj_goal, "strip_tac", 1);
        assert_eq!(
            db.orthogonalize(&r, &conj, &conj_goal, &conj_gs, 20, budget),
            "conj_tac"
        );
    }

    #[test]
    fn recording_counts_and_rejects() {
        let r = resolver();
        let mut db = FeatureDb::new();
        let g = goal("T");
        db.record_invocation(&g, "taut_tac", Origin::Human, 0, &r, None)
            .unwrap();
        assert_eq!(db.total_docs(), 1);
        db.record_invocation(&g, "taut_tac", Origin::Human, 1, &r, None)
            .unwrap();
        assert_eq!(db.total_docs(), 2);
        for f in features_of_goal(&g) {
            assert_eq!(db.doc_frequency(&f), 2);
        }
        assert!(db
            .record_invocation(&g, "no_such_tac", Origin::Human, 2, &r, None)
            .is_err());
    }

    #[test]
    fn recording_with_ortho_substitutes_dominating_equivalent() {
        let r = resolver();
        let g = goal("T ==> T");
        let mut db = FeatureDb::new();
        record(&mut db, &g, "gen_strip_tac", 0);
        record(&mut db, &goal("T ==> F"), "gen_strip_tac", 1);
        record(&mut db, &goal("F ==> T"), "strip_tac", 2);
        let stored = db
            .record_invocation(&g, "strip_tac", Origin::Human, 3, &r, Some(OrthoConfig::default()))
            .unwrap();
        assert_eq!(stored, "gen_strip_tac");
    }

    #[test]
    fn save_load_roundtrip() {
        let r = resolver();
        let mut db = FeatureDb::new();
        let g = goal("!n:num. n + 0 = n");
        db.add_statement(Theorem {
            name: "add_0_right".into(),
            statement: g.clone(),
            dependencies: vec!["ADD_zero".into()],
            sequence_index: 3,
        });
        db.record_invocation(&g, "induct_num_tac", Origin::Human, 3, &r, None)
            .unwrap();
        db.record_invocation(&g, "rewrite_tac []", Origin::Generated, 3, &r, None)
            .unwrap();
        db.add_theorem_vector(
            "add_0_right",
            features_of_goal(&g),
            vec!["induct_num_tac".into(), "rewrite_tac []".into()],
            3,
        );
        let text = db.serialize();
        let db2 = FeatureDb::deserialize(&text).unwrap();
        assert_eq!(db2.serialize(), text);
        assert_eq!(db2.goal_vectors(), db.goal_vectors());
        assert_eq!(db2.theorem_vectors(), db.theorem_vectors());
        assert_eq!(db2.statements(), db.statements());
        // Rebuilding doc frequency reproduces stored counts.
        let rebuilt = db2.recompute_doc_frequency();
        for (f, c) in &rebuilt {
            assert_eq!(db2.doc_frequency(f), *c);
        }
        assert_eq!(rebuilt.len(), db2.doc_frequency.len());
    }

    #[test]
    fn truncated_record_reports_line() {
        let text = "G\thuman\ttaut_tac";
        match FeatureDb::deserialize(text) {
            Err(DbError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {:?}", other),
        }
        // Empty db roundtrips.
        let empty = FeatureDb::new();
        assert_eq!(
            FeatureDb::deserialize(&empty.serialize()).unwrap().serialize(),
            empty.serialize()
        );
    }

    #[test]
    fn snapshot_respects_sequence_bound() {
        let r = resolver();
        let mut db = FeatureDb::new();
        for i in 0..5 {
            db.record_invocation(&goal("T"), "taut_tac", Origin::Human, i, &r, None)
                .unwrap();
        }
        let snap = db.snapshot_before(3);
        assert_eq!(snap.total_docs(), 3);
        assert!(snap.goal_vectors().iter().all(|v| v.seq_index < 3));
    }
}
