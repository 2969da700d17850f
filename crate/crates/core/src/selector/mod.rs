//! Best-of-N: decode N candidates, score each with a verification strategy
//! and keep the top K, breaking score ties with a seeded shuffle.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::json_digest;
use crate::generator::{decode_iterative, DecodeConfig, GenError, Predictor};
use crate::microworld::{TaskSpec, TokenGrid};
use crate::seed::{self, streams};
use crate::verifier::{verify, AnswererConfig, Strategy, Verdict, VerifyError};

pub const DEFAULT_N: usize = 20;
pub const DEFAULT_K: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectError {
    #[error("candidate set has not been scored")]
    MissingVerdicts,
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub grid: TokenGrid,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub spec: TaskSpec,
    pub candidates: Vec<Candidate>,
    /// Empty until scored, then one per candidate.
    #[serde(default)]
    pub verdicts: Vec<Verdict>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn is_scored(&self) -> bool {
        !self.candidates.is_empty() && self.verdicts.len() == self.candidates.len()
    }

    pub fn scores(&self) -> Result<Vec<f64>, SelectError> {
        if !self.is_scored() {
            return Err(SelectError::MissingVerdicts);
        }
        Ok(self.verdicts.iter().map(|v| v.score).collect())
    }
}

/// Seed of candidate `i`.
pub fn candidate_seed(base_seed: u64, i: usize) -> u64 {
    seed::derive(base_seed, i as u64)
}

pub fn generate_candidates<P: Predictor>(
    predictor: &P,
    spec: &TaskSpec,
    n: usize,
    decode: &DecodeConfig,
    base_seed: u64,
) -> Result<CandidateSet, SelectError> {
    if n == 0 {
        return Err(SelectError::ZeroCount("N"));
    }
    let candidates = (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = candidate_seed(base_seed, i);
            decode_iterative(predictor, spec, decode, seed).map(|grid| Candidate { grid, seed })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CandidateSet { spec: spec.clone(), candidates, verdicts: Vec::new() })
}

/// Verification seed of candidate `i`.
pub fn verify_seed(seed: u64, i: usize) -> u64 {
    seed::derive_path(seed, &[streams::CANDIDATES, i as u64])
}

pub fn score_candidates(
    mut set: CandidateSet,
    strategy: Strategy,
    answerer: &AnswererConfig,
    seed: u64,
) -> Result<CandidateSet, SelectError> {
    set.verdicts = set
        .candidates
        .par_iter()
        .enumerate()
        .map(|(i, c)| verify(strategy, &c.grid, &set.spec, answerer, verify_seed(seed, i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Candidate indices, best first; `min(K, N)` long.
    pub ranked: Vec<usize>,
    pub k: usize,
    pub strategy: Strategy,
    /// Candidates sharing a score, one group per distinct score with more
    /// than one member, highest score first. Each group is in the shuffled
    /// order used for ranking.
    pub tie_groups: Vec<Vec<usize>>,
    /// Score of every candidate, by index.
    pub scores: Vec<f64>,
}

impl Selection {
    pub fn best(&self) -> usize {
        self.ranked[0]
    }
}

/// Full ranking of `scores`: descending, equal scores shuffled with `tie_seed`.
pub fn rank(scores: &[f64], tie_seed: u64) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut rng = seed::rng(seed::derive(tie_seed, streams::TIES));
    let mut groups = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].shuffle(&mut rng);
            groups.push(order[start..end].to_vec());
        }
        start = end;
    }
    (order, groups)
}

pub fn top_k(set: &CandidateSet, k: usize, tie_seed: u64) -> Result<Selection, SelectError> {
    if k == 0 {
        return Err(SelectError::ZeroCount("K"));
    }
    let scores = set.scores()?;
    let (mut ranked, tie_groups) = rank(&scores, tie_seed);
    ranked.truncate(k);
    Ok(Selection { ranked, k, strategy: set.verdicts[0].strategy, tie_groups, scores })
}

/// Everything one Best-of-N run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BestOfNConfig {
    pub n: usize,
    pub k: usize,
    pub strategy: Strategy,
    pub answerer: AnswererConfig,
    pub decode: DecodeConfig,
}

impl Default for BestOfNConfig {
    fn default() -> Self {
        Self {
            n: DEFAULT_N,
            k: DEFAULT_K,
            strategy: Strategy::Cot,
            answerer: AnswererConfig::exact(),
            decode: DecodeConfig::default(),
        }
    }
}

/// Decode, verify and rank. Candidate, verification and tie seeds all
/// derive from `seed`.
pub fn best_of_n<P: Predictor>(
    predictor: &P,
    spec: &TaskSpec,
    cfg: &BestOfNConfig,
    seed: u64,
) -> Result<(CandidateSet, Selection), SelectError> {
    let set = generate_candidates(predictor, spec, cfg.n, &cfg.decode, seed::derive(seed, streams::CANDIDATES))?;
    let set = score_candidates(set, cfg.strategy, &cfg.answerer, seed::derive(seed, streams::VERIFY))?;
    let sel = top_k(&set, cfg.k, seed::derive(seed, streams::TIES))?;
    Ok((set, sel))
}

/// JSON run record of one selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub prompt: String,
    pub spec: TaskSpec,
    pub seed: u64,
    pub candidate_seeds: Vec<u64>,
    pub scores: Vec<f64>,
    pub ranked: Vec<usize>,
    pub tie_groups: Vec<Vec<usize>>,
    pub strategy: Strategy,
    pub config: BestOfNConfig,
    pub config_digest: String,
    pub selected: Vec<TokenGrid>,
}

impl SelectionRecord {
    pub fn new(cfg: &BestOfNConfig, seed: u64, set: &CandidateSet, sel: &Selection) -> Self {
        Self {
            prompt: crate::microworld::render_prompt(&set.spec),
            spec: set.spec.clone(),
            seed,
            candidate_seeds: set.candidates.iter().map(|c| c.seed).collect(),
            scores: sel.scores.clone(),
            ranked: sel.ranked.clone(),
            tie_groups: sel.tie_groups.clone(),
            strategy: sel.strategy,
            config: cfg.clone(),
            config_digest: json_digest(cfg),
            selected: sel.ranked.iter().map(|&i| set.candidates[i].grid.clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{PlantedPredictor, PlantedPredictorConfig};
    use crate::microworld::{Color, GridShape, Shape};

    fn scored(scores: &[f64]) -> CandidateSet {
        let grid = TokenGrid::from_tokens(GridShape::new(1, 1), vec![0]).unwrap();
        CandidateSet {
            spec: TaskSpec::single_object(Shape::Circle, Color::Red),
            candidates: scores.iter().map(|_| Candidate { grid: grid.clone(), seed: 0 }).collect(),
            verdicts: scores
                .iter()
                .map(|&score| Verdict { strategy: Strategy::Rule, score, yes: 0, n: 1, answers: vec![], transcript: None })
                .collect(),
        }
    }

    #[test]
    fn ranks_by_score() {
        let sel = top_k(&scored(&[0.5, 1.0, 0.75]), 2, 0).unwrap();
        assert_eq!(sel.ranked, [1, 2]);
        assert!(sel.tie_groups.is_empty());
    }

    #[test]
    fn k_beyond_n_returns_all() {
        assert_eq!(top_k(&scored(&[0.0, 1.0]), 5, 0).unwrap().ranked, [1, 0]);
    }

    #[test]
    fn unscored_and_zero_k_fail() {
        let mut set = scored(&[1.0]);
        assert_eq!(top_k(&set, 0, 0), Err(SelectError::ZeroCount("K")));
        set.verdicts.clear();
        assert_eq!(top_k(&set, 1, 0), Err(SelectError::MissingVerdicts));
    }

    #[test]
    fn ties_are_grouped_and_ordered() {
        let sel = top_k(&scored(&[0.5, 1.0, 0.5, 1.0, 0.0]), 5, 9).unwrap();
        assert_eq!(sel.tie_groups.len(), 2);
        let mut hi = sel.tie_groups[0].clone();
        hi.sort();
        assert_eq!(hi, [1, 3]);
        assert_eq!(sel.ranked[4], 4);
        assert_eq!(&sel.ranked[..2], &sel.tie_groups[0][..]);
    }

    #[test]
    fn single_candidate_equals_direct_decode() {
        let p = PlantedPredictor::new(PlantedPredictorConfig::default(), GridShape::default()).unwrap();
        let spec = TaskSpec::single_object(Shape::Cross, Color::Green);
        let d = DecodeConfig::with_steps(8);
        let set = generate_candidates(&p, &spec, 1, &d, 77).unwrap();
        assert_eq!(set.candidates[0].grid, decode_iterative(&p, &spec, &d, seed::derive(77, 0)).unwrap());
        assert_eq!(set.candidates[0].seed, seed::derive(77, 0));
    }

    #[test]
    fn best_of_n_is_deterministic() {
        let p = PlantedPredictor::new(PlantedPredictorConfig::default(), GridShape::default()).unwrap();
        let spec = TaskSpec::counting(Shape::Square, Color::Blue, 3).unwrap();
        let cfg = BestOfNConfig { n: 6, decode: DecodeConfig::with_steps(8), ..Default::default() };
        let a = best_of_n(&p, &spec, &cfg, 5).unwrap();
        let b = best_of_n(&p, &spec, &cfg, 5).unwrap();
        assert_eq!(a, b);
        let rec = SelectionRecord::new(&cfg, 5, &a.0, &a.1);
        assert_eq!(rec.selected.len(), 4);
        let s = a.1.scores.clone();
        for &i in &a.1.ranked {
            for j in (0..s.len()).filter(|j| !a.1.ranked.contains(j)) {
                assert!(s[i] >= s[j]);
            }
        }
    }
}
