use serde::{Deserialize, Serialize};

use super::{cfg_combine, GenError, Predictor, PredictorSession, ScheduleState, DEFAULT_CFG_SCALE, DEFAULT_STEPS};
use crate::microworld::{TaskSpec, Token, TokenGrid};
use crate::seed::{self, streams};

/// Default scale of the Gumbel noise added to confidences at step 0.
pub const DEFAULT_CHOICE_TEMPERATURE: f64 = 4.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeConfig {
    pub steps: usize,
    pub cfg_scale: f64,
    /// Confidence noise scale; annealed linearly to 0 at the last step.
    #[serde(default = "default_choice_temperature")]
    pub choice_temperature: f64,
}

fn default_choice_temperature() -> f64 {
    DEFAULT_CHOICE_TEMPERATURE
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self { steps: DEFAULT_STEPS, cfg_scale: DEFAULT_CFG_SCALE, choice_temperature: DEFAULT_CHOICE_TEMPERATURE }
    }
}

impl DecodeConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self { steps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.steps == 0 {
            return Err(GenError::BadStep { t: 0, total: 0 });
        }
        if !self.cfg_scale.is_finite() || !self.choice_temperature.is_finite() || self.choice_temperature < 0.0 {
            return Err(GenError::BadConfig("cfg scale and choice temperature must be finite".into()));
        }
        Ok(())
    }
}

/// Positions committed at one step, in commit order.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub committed: Vec<(usize, Token)>,
    pub masked_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTrace {
    pub grid: TokenGrid,
    pub steps: Vec<StepRecord>,
}

pub fn decode_iterative<P: Predictor>(
    predictor: &P,
    spec: &TaskSpec,
    config: &DecodeConfig,
    seed: u64,
) -> Result<TokenGrid, GenError> {
    decode_with_trace(predictor, spec, config, seed).map(|t| t.grid)
}

struct Proposal {
    position: usize,
    token: Token,
    confidence: f64,
}

/// Iterative parallel decoding that also records what each step committed.
///
/// Per-cell randomness is addressed by `(seed, step, position)`, so the
/// result does not depend on the order in which cells are evaluated.
pub fn decode_with_trace<P: Predictor>(
    predictor: &P,
    spec: &TaskSpec,
    config: &DecodeConfig,
    seed: u64,
) -> Result<DecodeTrace, GenError> {
    config.validate()?;
    let shape = predictor.grid_shape();
    let session = predictor.session(spec, seed)?;
    let schedule = ScheduleState::cosine(shape.cells(), config.steps)?;
    let mut grid = TokenGrid::all_masked(shape);
    let mut steps = Vec::with_capacity(config.steps);
    let decode_key = seed::derive(seed, streams::DECODE);

    for t in 1..=config.steps {
        let masked = grid.masked_positions();
        let target = schedule.masked_after[t];
        let to_commit = masked.len().saturating_sub(target);
        if to_commit == 0 {
            steps.push(StepRecord { step: t, committed: Vec::new(), masked_after: masked.len() });
            continue;
        }
        let out = session.predict(&grid, &masked)?;
        if out.cond.len() != masked.len() || out.uncond.len() != masked.len() {
            return Err(GenError::LengthMismatch(out.cond.len(), masked.len()));
        }
        let key = seed::derive(decode_key, t as u64);
        let noise = config.choice_temperature * (1.0 - t as f64 / config.steps as f64);
        let mut proposals = Vec::with_capacity(masked.len());
        for (j, &pos) in masked.iter().enumerate() {
            let guided = cfg_combine(&out.cond[j], &out.uncond[j], config.cfg_scale)?;
            let probs = softmax(&guided).ok_or(GenError::NonFinite(pos))?;
            let token = sample_index(&probs, seed::unit_uniform(key, 2 * pos as u64));
            let mut confidence = probs[token].ln();
            if noise > 0.0 {
                confidence += noise * seed::gumbel(key, 2 * pos as u64 + 1);
            }
            proposals.push(Proposal { position: pos, token: token as Token, confidence });
        }
        // Highest confidence first; equal confidences go to the lower index.
        proposals.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then(a.position.cmp(&b.position)));
        let committed: Vec<_> = proposals[..to_commit].iter().map(|p| (p.position, p.token)).collect();
        for &(pos, tok) in &committed {
            grid.set(pos, tok);
        }
        steps.push(StepRecord { step: t, committed, masked_after: grid.masked_count() });
    }
    debug_assert!(grid.is_complete());
    Ok(DecodeTrace { grid, steps })
}

fn softmax(logits: &[f64]) -> Option<Vec<f64>> {
    if logits.iter().any(|l| !l.is_finite()) || logits.is_empty() {
        return None;
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    Some(exps.into_iter().map(|e| e / z).collect())
}

/// Inverse-CDF draw that never selects a zero-probability entry.
fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}
