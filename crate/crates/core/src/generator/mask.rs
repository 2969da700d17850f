use rand::seq::index;
use rand::Rng;

use super::{gamma, GenError};
use crate::microworld::{Token, TokenGrid, MASK};
use crate::seed;

/// Binary mask over token positions; `true` means "replace with MASK".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    bits: Vec<bool>,
}

impl Mask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn all(n: usize) -> Self {
        Self { bits: vec![true; n] }
    }

    pub fn none(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

/// Exactly `round(eta · n)` positions set, uniformly without replacement.
pub fn sample_mask(n_tokens: usize, eta: f64, seed: u64) -> Result<Mask, GenError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(GenError::BadEta(eta));
    }
    let count = ((eta * n_tokens as f64).round() as usize).min(n_tokens);
    let mut bits = vec![false; n_tokens];
    for i in index::sample(&mut seed::rng(seed), n_tokens, count).iter() {
        bits[i] = true;
    }
    Ok(Mask { bits })
}

/// One masked-token-prediction example.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub eta: f64,
    pub input: TokenGrid,
    /// `(position, original token)` for every masked position, ascending.
    pub targets: Vec<(usize, Token)>,
    pub mask: Mask,
}

impl TrainingExample {
    /// Writes the targets back into the input.
    pub fn reconstruct(&self) -> TokenGrid {
        let mut g = self.input.clone();
        for &(i, t) in &self.targets {
            g.set(i, t);
        }
        g
    }
}

/// Draws `r ~ U(0, 1)`, sets `η = γ(r)` and masks a uniform `η`-fraction.
pub fn masked_training_example(grid: &TokenGrid, seed: u64) -> Result<TrainingExample, GenError> {
    grid.ensure_complete()?;
    let r: f64 = seed::rng(seed::derive(seed, 0)).gen();
    let eta = gamma(r);
    let mask = sample_mask(grid.len(), eta, seed::derive(seed, 1))?;
    let mut ex = masked_training_example_with_mask(grid, mask)?;
    ex.eta = eta;
    Ok(ex)
}

pub fn masked_training_example_with_mask(grid: &TokenGrid, mask: Mask) -> Result<TrainingExample, GenError> {
    grid.ensure_complete()?;
    if mask.len() != grid.len() {
        return Err(GenError::LengthMismatch(mask.len(), grid.len()));
    }
    let mut input = grid.clone();
    let targets = mask
        .positions()
        .map(|i| {
            input.set(i, MASK);
            (i, grid.get(i))
        })
        .collect();
    let eta = mask.count() as f64 / mask.len().max(1) as f64;
    Ok(TrainingExample { eta, input, targets, mask })
}
