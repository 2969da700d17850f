//! Benchmark harness: category suites, Best-of-N generation under a chosen
//! strategy, exact-oracle scoring and per-category reports.

mod report;
mod suite;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::json_digest;
use crate::generator::{DecodeConfig, GenError, PlantedPredictor, PlantedPredictorConfig};
use crate::microworld::{grid_to_scene, oracle_check, render_prompt, Category, GridShape, TaskSpec, TokenGrid};
use crate::seed::{self, streams};
use crate::selector::{generate_candidates, score_candidates, top_k, SelectError, DEFAULT_K, DEFAULT_N};
use crate::verifier::{AnswererConfig, Strategy, VerifyError};

pub use report::{comparison_svg, emit_report, report_csv, wilson_interval, Interval, ReportFormats, Z95};
pub use suite::random_spec;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    Config(String),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchStrategy {
    /// A single decode, no verification.
    None,
    Outcome,
    Rule,
    Cot,
}

impl BenchStrategy {
    pub fn verifier(self) -> Option<Strategy> {
        match self {
            BenchStrategy::None => None,
            BenchStrategy::Outcome => Some(Strategy::Outcome),
            BenchStrategy::Rule => Some(Strategy::Rule),
            BenchStrategy::Cot => Some(Strategy::Cot),
        }
    }

    pub fn name(self) -> &'static str {
        self.verifier().map_or("none", Strategy::name)
    }

    pub fn from_name(s: &str) -> Option<Self> {
        if s == "none" {
            return Some(BenchStrategy::None);
        }
        Strategy::from_name(s).map(|v| match v {
            Strategy::Outcome => BenchStrategy::Outcome,
            Strategy::Rule => BenchStrategy::Rule,
            Strategy::Cot => BenchStrategy::Cot,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Oracle pass of the best-ranked candidate.
    Top1,
    /// Mean oracle pass over the top K candidates.
    MeanTopk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub counts: BTreeMap<Category, usize>,
    pub generator: PlantedPredictorConfig,
    pub decode: DecodeConfig,
    pub strategy: BenchStrategy,
    pub n: usize,
    pub k: usize,
    pub answerer: AnswererConfig,
    pub seed: u64,
    pub aggregation: Aggregation,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            counts: Category::GENEVAL.into_iter().map(|c| (c, 100)).collect(),
            generator: PlantedPredictorConfig::default(),
            decode: DecodeConfig::default(),
            strategy: BenchStrategy::Cot,
            n: DEFAULT_N,
            k: DEFAULT_K,
            answerer: AnswererConfig::exact(),
            seed: 0,
            aggregation: Aggregation::Top1,
        }
    }
}

impl BenchConfig {
    /// `counts` prompts of each listed category, everything else default.
    pub fn with_counts(counts: &[(Category, usize)]) -> Self {
        Self { counts: counts.iter().copied().collect(), ..Self::default() }
    }

    /// Validated copy with `strategy = none` forcing `N = K = 1`.
    pub fn resolved(&self) -> Result<Self, BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.into()));
        if self.counts.is_empty() {
            return bad("at least one category is required");
        }
        if self.counts.values().any(|&c| c == 0) {
            return bad("category counts must be at least 1");
        }
        if self.n == 0 || self.k == 0 {
            return bad("N and K must be at least 1");
        }
        self.generator.validate()?;
        self.decode.validate()?;
        self.answerer.validate()?;
        let mut out = self.clone();
        if out.strategy == BenchStrategy::None {
            out.n = 1;
            out.k = 1;
        }
        Ok(out)
    }

    pub fn digest(&self) -> String {
        json_digest(self)
    }
}

fn category_index(c: Category) -> u64 {
    Category::ALL.iter().position(|&x| x == c).unwrap() as u64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteItem {
    pub category: Category,
    pub index: usize,
    pub spec: TaskSpec,
    /// Base seed for generating and verifying this prompt.
    pub seed: u64,
}

pub fn build_suite(cfg: &BenchConfig) -> Vec<SuiteItem> {
    cfg.counts
        .iter()
        .flat_map(|(&category, &count)| {
            let ci = category_index(category);
            (0..count).map(move |index| SuiteItem {
                category,
                index,
                spec: random_spec(category, seed::derive_path(cfg.seed, &[streams::SUITE, ci, index as u64])),
                seed: seed::derive_path(cfg.seed, &[streams::PROMPTS, ci, index as u64]),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptOutcome {
    pub category: Category,
    pub prompt: String,
    pub seed: u64,
    /// Ranked candidate indices kept (at most K).
    pub ranked: Vec<usize>,
    /// Verifier scores of the kept candidates; empty for strategy none.
    pub scores: Vec<f64>,
    /// Oracle pass of each kept candidate.
    pub passes: Vec<bool>,
}

impl PromptOutcome {
    pub fn top1(&self) -> bool {
        self.passes[0]
    }

    pub fn mean_topk(&self) -> f64 {
        self.passes.iter().filter(|&&p| p).count() as f64 / self.passes.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryResult {
    pub category: Category,
    pub prompts: usize,
    /// Rate under the configured aggregation.
    pub rate: f64,
    pub ci: Interval,
    pub top1_passes: usize,
    pub top1: f64,
    pub mean_topk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub config_digest: String,
    pub categories: Vec<CategoryResult>,
    /// Unweighted mean of the category rates.
    pub overall: f64,
    /// Wilson interval at the overall rate over all prompts.
    pub overall_ci: Interval,
    pub overall_top1: f64,
    pub overall_mean_topk: f64,
    pub prompts: usize,
    pub outcomes: Vec<PromptOutcome>,
}

fn run_item(item: &SuiteItem, cfg: &BenchConfig, predictor: &PlantedPredictor) -> Result<PromptOutcome, BenchError> {
    let set = generate_candidates(
        predictor,
        &item.spec,
        cfg.n,
        &cfg.decode,
        seed::derive(item.seed, streams::CANDIDATES),
    )?;
    let (ranked, scores) = match cfg.strategy.verifier() {
        None => (vec![0], Vec::new()),
        Some(strategy) => {
            let set = score_candidates(set.clone(), strategy, &cfg.answerer, seed::derive(item.seed, streams::VERIFY))?;
            let sel = top_k(&set, cfg.k, seed::derive(item.seed, streams::TIES))?;
            let scores = sel.ranked.iter().map(|&i| sel.scores[i]).collect();
            (sel.ranked, scores)
        }
    };
    let passes = ranked
        .iter()
        .map(|&i| pass(&set.candidates[i].grid, &item.spec))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PromptOutcome { category: item.category, prompt: render_prompt(&item.spec), seed: item.seed, ranked, scores, passes })
}

fn pass(grid: &TokenGrid, spec: &TaskSpec) -> Result<bool, BenchError> {
    let scene = grid_to_scene(grid).map_err(GenError::from)?;
    Ok(oracle_check(&scene, spec).pass)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let cfg = cfg.resolved()?;
    let predictor = PlantedPredictor::new(cfg.generator, GridShape::default())?;
    let suite = build_suite(&cfg);
    let outcomes = suite
        .par_iter()
        .map(|item| run_item(item, &cfg, &predictor))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(cfg, outcomes))
}

fn aggregate(cfg: BenchConfig, outcomes: Vec<PromptOutcome>) -> BenchReport {
    let categories: Vec<CategoryResult> = cfg
        .counts
        .keys()
        .map(|&category| {
            let rows: Vec<_> = outcomes.iter().filter(|o| o.category == category).collect();
            let prompts = rows.len();
            let top1_passes = rows.iter().filter(|o| o.top1()).count();
            let top1 = top1_passes as f64 / prompts as f64;
            let mean_topk = rows.iter().map(|o| o.mean_topk()).sum::<f64>() / prompts as f64;
            let rate = match cfg.aggregation {
                Aggregation::Top1 => top1,
                Aggregation::MeanTopk => mean_topk,
            };
            CategoryResult { category, prompts, rate, ci: wilson_interval(rate, prompts, Z95), top1_passes, top1, mean_topk }
        })
        .collect();
    let mean = |f: fn(&CategoryResult) -> f64| categories.iter().map(f).sum::<f64>() / categories.len() as f64;
    let overall = mean(|c| c.rate);
    let prompts = outcomes.len();
    BenchReport {
        config_digest: cfg.digest(),
        config: cfg,
        overall,
        overall_ci: wilson_interval(overall, prompts, Z95),
        overall_top1: mean(|c| c.top1),
        overall_mean_topk: mean(|c| c.mean_topk),
        categories,
        prompts,
        outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(strategy: BenchStrategy) -> BenchConfig {
        BenchConfig {
            counts: Category::GENEVAL.into_iter().map(|c| (c, 6)).collect(),
            decode: DecodeConfig::with_steps(8),
            strategy,
            n: 4,
            k: 2,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn suite_counts_and_determinism() {
        let cfg = BenchConfig::with_counts(&[(Category::TwoObjects, 100)]);
        let s = build_suite(&cfg);
        assert_eq!(s.len(), 100);
        assert!(s.iter().all(|i| i.spec.category() == Category::TwoObjects));
        assert_eq!(s, build_suite(&cfg));
        let all = build_suite(&small(BenchStrategy::Cot));
        for c in Category::GENEVAL {
            assert!(all.iter().any(|i| i.category == c));
        }
    }

    #[test]
    fn none_forces_single_candidate() {
        let r = small(BenchStrategy::None).resolved().unwrap();
        assert_eq!((r.n, r.k), (1, 1));
        assert!(BenchConfig { counts: BTreeMap::new(), ..Default::default() }.resolved().is_err());
        assert!(BenchConfig::with_counts(&[(Category::Colors, 0)]).resolved().is_err());
    }

    #[test]
    fn perfect_generator_scores_one() {
        for strategy in [BenchStrategy::None, BenchStrategy::Outcome, BenchStrategy::Cot] {
            let cfg = BenchConfig { generator: PlantedPredictorConfig::noiseless(), ..small(strategy) };
            let r = run_bench(&cfg).unwrap();
            assert_eq!(r.overall, 1.0, "{strategy:?}");
        }
    }

    #[test]
    fn overall_is_category_mean() {
        let r = run_bench(&small(BenchStrategy::Rule)).unwrap();
        let m = r.categories.iter().map(|c| c.rate).sum::<f64>() / r.categories.len() as f64;
        assert!((r.overall - m).abs() < 1e-12);
        assert_eq!(r.prompts, 36);
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&run_bench(&small(BenchStrategy::Rule)).unwrap()).unwrap());
    }
}
