use std::f64::consts::PI;

use super::GenError;

/// Masking-ratio schedule `γ(r) = cos(π r / 2)`, used both for drawing
/// training ratios and for the inference schedule.
pub fn gamma(r: f64) -> f64 {
    (PI * r / 2.0).cos()
}

/// Number of cells still masked after step `t` of `total`:
/// `ceil(N · cos(π t / 2T))` for `t < T`, and 0 at `t = T`.
///
/// `N · cos(π t / 2T)` is an integer only when the cosine is rational,
/// i.e. 1, 1/2 or 0; those cases are computed exactly so that f64 rounding
/// of `cos(π/3)` cannot bump the ceiling.
pub fn cosine_masked_count(n: usize, t: usize, total: usize) -> Result<usize, GenError> {
    if total == 0 || t > total {
        return Err(GenError::BadStep { t, total });
    }
    if t == 0 {
        return Ok(n);
    }
    if t == total {
        return Ok(0);
    }
    if 3 * t == 2 * total {
        return Ok(n.div_ceil(2));
    }
    let value = n as f64 * gamma(t as f64 / total as f64);
    Ok((value.ceil() as usize).min(n))
}

/// Full per-step target of masked counts for one decoding run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleState {
    pub total_steps: usize,
    pub step: usize,
    pub n_tokens: usize,
    /// `masked_after[t]` for `t` in `0..=total_steps`.
    pub masked_after: Vec<usize>,
}

impl ScheduleState {
    pub fn cosine(n_tokens: usize, total_steps: usize) -> Result<Self, GenError> {
        let masked_after = (0..=total_steps)
            .map(|t| cosine_masked_count(n_tokens, t, total_steps))
            .collect::<Result<_, _>>()?;
        Ok(Self { total_steps, step: 0, n_tokens, masked_after })
    }

    /// Cells to commit during step `t` (1-based).
    pub fn commits_at(&self, t: usize) -> usize {
        self.masked_after[t - 1] - self.masked_after[t]
    }
}
