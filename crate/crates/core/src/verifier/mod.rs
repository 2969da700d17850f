//! Outcome, rule-based and chain-of-thought verification over the
//! micro-world, with a simulated answerer that flips exact answers at a
//! configurable rate.

mod questions;
pub mod templates;
mod transcript;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::microworld::{grid_to_scene, oracle_check, Scene, TaskSpec, TokenGrid, WorldError};
use crate::seed::{self, streams};

pub use questions::{decompose, AtomicQuestion, Check};
pub use transcript::{
    cot_score, parse_transcript, parse_transcript_bytes, Answer, Transcript, ANSWER_END, ANSWER_START, THINK_END,
    THINK_START,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("decomposition is empty; the score is undefined")]
    EmptyDecomposition,
    #[error("malformed transcript at byte {position}: {reason}")]
    Malformed { position: usize, reason: String },
    #[error("flip rate must lie in [0, 1], got {0}")]
    BadFlipRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Outcome,
    Rule,
    Cot,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Outcome, Strategy::Rule, Strategy::Cot];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Outcome => "outcome",
            Strategy::Rule => "rule",
            Strategy::Cot => "cot",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswererConfig {
    /// Probability of inverting each exact answer, independently per question.
    pub flip_rate: f64,
}

impl Default for AnswererConfig {
    fn default() -> Self {
        Self::exact()
    }
}

impl AnswererConfig {
    pub fn exact() -> Self {
        Self { flip_rate: 0.0 }
    }

    pub fn coin() -> Self {
        Self { flip_rate: 0.5 }
    }

    pub fn with_flip_rate(flip_rate: f64) -> Result<Self, VerifyError> {
        let c = Self { flip_rate };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        if !(0.0..=1.0).contains(&self.flip_rate) {
            return Err(VerifyError::BadFlipRate(self.flip_rate));
        }
        Ok(())
    }

    fn apply(&self, exact: bool, seed: u64) -> Answer {
        let flip = seed::unit_uniform(seed, 0) < self.flip_rate;
        Answer::from_bool(exact ^ flip)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub strategy: Strategy,
    pub score: f64,
    /// Number of yes answers.
    pub yes: usize,
    /// Number of questions asked (1 for outcome).
    pub n: usize,
    pub answers: Vec<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Transcript>,
}

fn scene_of(grid: &TokenGrid) -> Result<Scene, VerifyError> {
    Ok(grid_to_scene(grid)?)
}

/// Answers one question about a complete grid.
pub fn answer(grid: &TokenGrid, q: &AtomicQuestion, cfg: &AnswererConfig, seed: u64) -> Result<Answer, VerifyError> {
    cfg.validate()?;
    let scene = scene_of(grid)?;
    Ok(cfg.apply(q.check.evaluate(&scene), seed))
}

/// The seed used for question `j` of a rule or CoT verification.
pub fn question_seed(seed: u64, j: usize) -> u64 {
    seed::derive_path(seed, &[streams::VERIFY, j as u64])
}

fn answer_all(
    scene: &Scene,
    questions: &[AtomicQuestion],
    cfg: &AnswererConfig,
    seed: u64,
) -> Result<Vec<Answer>, VerifyError> {
    if questions.is_empty() {
        return Err(VerifyError::EmptyDecomposition);
    }
    Ok(questions
        .iter()
        .enumerate()
        .map(|(j, q)| cfg.apply(q.check.evaluate(scene), question_seed(seed, j)))
        .collect())
}

fn lattice_verdict(strategy: Strategy, answers: Vec<Answer>, transcript: Option<Transcript>) -> Result<Verdict, VerifyError> {
    let score = cot_score(&answers)?;
    let yes = answers.iter().filter(|a| a.is_yes()).count();
    Ok(Verdict { strategy, score, yes, n: answers.len(), answers, transcript })
}

pub fn run_outcome(grid: &TokenGrid, spec: &TaskSpec, cfg: &AnswererConfig, seed: u64) -> Result<Verdict, VerifyError> {
    cfg.validate()?;
    let scene = scene_of(grid)?;
    let a = cfg.apply(oracle_check(&scene, spec).pass, seed::derive(seed, streams::OUTCOME));
    Ok(Verdict {
        strategy: Strategy::Outcome,
        score: if a.is_yes() { 1.0 } else { 0.0 },
        yes: a.is_yes() as usize,
        n: 1,
        answers: vec![a],
        transcript: None,
    })
}

pub fn run_rule(grid: &TokenGrid, spec: &TaskSpec, cfg: &AnswererConfig, seed: u64) -> Result<Verdict, VerifyError> {
    cfg.validate()?;
    let scene = scene_of(grid)?;
    let answers = answer_all(&scene, &decompose(spec), cfg, seed)?;
    lattice_verdict(Strategy::Rule, answers, None)
}

pub fn run_cot(grid: &TokenGrid, spec: &TaskSpec, cfg: &AnswererConfig, seed: u64) -> Result<Verdict, VerifyError> {
    cfg.validate()?;
    let scene = scene_of(grid)?;
    let qs = decompose(spec);
    let answers = answer_all(&scene, &qs, cfg, seed)?;
    let t = Transcript::from_pairs(qs.into_iter().map(|q| q.text).collect(), answers.clone())?;
    lattice_verdict(Strategy::Cot, answers, Some(t))
}

pub fn verify(
    strategy: Strategy,
    grid: &TokenGrid,
    spec: &TaskSpec,
    cfg: &AnswererConfig,
    seed: u64,
) -> Result<Verdict, VerifyError> {
    match strategy {
        Strategy::Outcome => run_outcome(grid, spec, cfg, seed),
        Strategy::Rule => run_rule(grid, spec, cfg, seed),
        Strategy::Cot => run_cot(grid, spec, cfg, seed),
    }
}
