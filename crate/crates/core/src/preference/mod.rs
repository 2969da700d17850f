//! Preference pairs for DPO, the DPO loss with its gradient, and
//! chain-of-thought label records.

mod dpo;

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{DecodeConfig, Predictor};
use crate::microworld::{render_prompt, Category, TaskSpec, TokenGrid};
use crate::seed::{self, streams};
use crate::selector::{generate_candidates, score_candidates, SelectError};
use crate::verifier::{run_cot, Answer, AnswererConfig, Strategy, VerifyError};

pub use dpo::{dpo_gradient, dpo_loss, sigmoid, softplus, DpoGradient, DpoInputs};

pub const DEFAULT_N_PER_PROMPT: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrefError {
    #[error("non-finite DPO input or result")]
    NonFinite,
    #[error("beta must be positive, got {0}")]
    BadBeta(f64),
    #[error("n_per_prompt must be at least 2, got {0}")]
    TooFewCandidates(usize),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairConfig {
    pub n_per_prompt: usize,
    pub strategy: Strategy,
    pub answerer: AnswererConfig,
    pub decode: DecodeConfig,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            n_per_prompt: DEFAULT_N_PER_PROMPT,
            strategy: Strategy::Rule,
            answerer: AnswererConfig::exact(),
            decode: DecodeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredGrid {
    pub candidate: usize,
    pub grid: TokenGrid,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub spec_index: usize,
    pub prompt: String,
    pub spec: TaskSpec,
    pub preferred: ScoredGrid,
    pub rejected: ScoredGrid,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairBuild {
    pub pairs: Vec<PreferencePair>,
    /// Indices of specs whose candidates all scored the same.
    pub skipped: Vec<usize>,
}

/// Seed for the candidates of spec `i`.
pub fn prompt_seed(seed: u64, i: usize) -> u64 {
    seed::derive_path(seed, &[streams::PROMPTS, i as u64])
}

fn pair_for<P: Predictor>(
    i: usize,
    spec: &TaskSpec,
    predictor: &P,
    cfg: &PairConfig,
    seed: u64,
) -> Result<Option<PreferencePair>, PrefError> {
    let ps = prompt_seed(seed, i);
    let set = generate_candidates(predictor, spec, cfg.n_per_prompt, &cfg.decode, seed::derive(ps, streams::CANDIDATES))?;
    let set = score_candidates(set, cfg.strategy, &cfg.answerer, seed::derive(ps, streams::VERIFY))?;
    let scores = set.scores()?;
    // First index wins among equal extremes.
    let mut hi = 0;
    let mut lo = 0;
    for (j, &s) in scores.iter().enumerate() {
        if s > scores[hi] {
            hi = j;
        }
        if s < scores[lo] {
            lo = j;
        }
    }
    if scores[hi] == scores[lo] {
        return Ok(None);
    }
    let pick = |j: usize| ScoredGrid { candidate: j, grid: set.candidates[j].grid.clone(), score: scores[j] };
    Ok(Some(PreferencePair {
        spec_index: i,
        prompt: render_prompt(spec),
        spec: spec.clone(),
        preferred: pick(hi),
        rejected: pick(lo),
        strategy: cfg.strategy,
    }))
}

/// One pair per spec from the highest- and lowest-scored of
/// `n_per_prompt` candidates. Specs without a strict score gap are skipped.
pub fn build_pairs<P: Predictor>(
    specs: &[TaskSpec],
    predictor: &P,
    cfg: &PairConfig,
    seed: u64,
) -> Result<PairBuild, PrefError> {
    if cfg.n_per_prompt < 2 {
        return Err(PrefError::TooFewCandidates(cfg.n_per_prompt));
    }
    let results = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| pair_for(i, spec, predictor, cfg, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut build = PairBuild { pairs: Vec::new(), skipped: Vec::new() };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Some(p) => build.pairs.push(p),
            None => build.skipped.push(i),
        }
    }
    Ok(build)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Preferred,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotLabelRecord {
    pub prompt: String,
    pub pair_index: usize,
    pub role: Role,
    pub grid: TokenGrid,
    pub transcript: String,
    pub final_answer: Answer,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CotLabelConfig {
    pub answerer: AnswererConfig,
    /// Long compositional prompts are left out unless set.
    pub include_long: bool,
}

/// A transcript for both grids of every pair, in seeded shuffled order.
pub fn build_cot_labels(
    pairs: &[PreferencePair],
    cfg: &CotLabelConfig,
    seed: u64,
) -> Result<Vec<CotLabelRecord>, PrefError> {
    let mut records = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        if !cfg.include_long && p.spec.category() == Category::LongCompositional {
            continue;
        }
        for (r, role, g) in [(0, Role::Preferred, &p.preferred), (1, Role::Rejected, &p.rejected)] {
            let v = run_cot(&g.grid, &p.spec, &cfg.answerer, seed::derive_path(seed, &[streams::VERIFY, i as u64, r]))?;
            let t = v.transcript.expect("cot verdicts carry a transcript");
            records.push(CotLabelRecord {
                prompt: p.prompt.clone(),
                pair_index: i,
                role,
                grid: g.grid.clone(),
                transcript: t.raw,
                final_answer: t.final_answer,
            });
        }
    }
    records.shuffle(&mut seed::rng(seed::derive(seed, streams::SHUFFLE)));
    Ok(records)
}

/// Writes one compact JSON value per line.
pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut w: W) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(r: R) -> std::io::Result<Vec<T>> {
    r.lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}
