use serde::{Deserialize, Serialize};

use super::PrefError;

/// Log-probabilities of the preferred (`w`) and rejected (`l`) examples
/// under the policy being trained and the frozen reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpoInputs {
    pub logp_dpo_w: f64,
    pub logp_dpo_l: f64,
    pub logp_sft_w: f64,
    pub logp_sft_l: f64,
    pub beta: f64,
}

/// Partial derivatives of the loss, one per log-probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpoGradient {
    pub logp_dpo_w: f64,
    pub logp_dpo_l: f64,
    pub logp_sft_w: f64,
    pub logp_sft_l: f64,
}

impl DpoGradient {
    pub fn as_array(&self) -> [f64; 4] {
        [self.logp_dpo_w, self.logp_dpo_l, self.logp_sft_w, self.logp_sft_l]
    }
}

impl DpoInputs {
    pub fn validate(&self) -> Result<(), PrefError> {
        let all = [self.logp_dpo_w, self.logp_dpo_l, self.logp_sft_w, self.logp_sft_l, self.beta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(PrefError::NonFinite);
        }
        if self.beta <= 0.0 {
            return Err(PrefError::BadBeta(self.beta));
        }
        Ok(())
    }

    /// Difference of log-ratios, preferred minus rejected.
    pub fn margin(&self) -> f64 {
        (self.logp_dpo_w - self.logp_sft_w) - (self.logp_dpo_l - self.logp_sft_l)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function, stable for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `−ln σ(β·Δ)`, evaluated as `softplus(−β·Δ)`.
pub fn dpo_loss(inp: &DpoInputs) -> Result<f64, PrefError> {
    inp.validate()?;
    let loss = softplus(-inp.beta * inp.margin());
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(PrefError::NonFinite)
    }
}

pub fn dpo_gradient(inp: &DpoInputs) -> Result<DpoGradient, PrefError> {
    inp.validate()?;
    let g = inp.beta * sigmoid(-inp.beta * inp.margin());
    Ok(DpoGradient { logp_dpo_w: -g, logp_dpo_l: g, logp_sft_w: g, logp_sft_l: -g })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inp(dw: f64, dl: f64, sw: f64, sl: f64, beta: f64) -> DpoInputs {
        DpoInputs { logp_dpo_w: dw, logp_dpo_l: dl, logp_sft_w: sw, logp_sft_l: sl, beta }
    }

    #[test]
    fn identical_policies_give_ln2() {
        let l = dpo_loss(&inp(-3.0, -5.0, -3.0, -5.0, 0.1)).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        let g = dpo_gradient(&inp(-1.0, -1.0, -1.0, -1.0, 1.0)).unwrap();
        assert_eq!(g.as_array(), [-0.5, 0.5, 0.5, -0.5]);
    }

    #[test]
    fn margin_two() {
        // softplus(-2) from a 30-digit evaluation.
        let l = dpo_loss(&inp(0.0, -1.0, -2.0, -1.0, 1.0)).unwrap();
        assert!((l - 0.126_928_011_042_972_5).abs() < 1e-15);
    }

    #[test]
    fn extreme_margins_stay_finite() {
        assert_eq!(dpo_loss(&inp(0.0, -1e4, -1e4, 0.0, 1.0)).unwrap(), 0.0);
        let big = dpo_loss(&inp(-1e4, 0.0, 0.0, -1e4, 1.0)).unwrap();
        assert!((big - 2e4).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(dpo_loss(&inp(f64::NAN, 0.0, 0.0, 0.0, 1.0)), Err(PrefError::NonFinite));
        assert_eq!(dpo_gradient(&inp(0.0, f64::INFINITY, 0.0, 0.0, 1.0)), Err(PrefError::NonFinite));
        assert_eq!(dpo_loss(&inp(0.0, 0.0, 0.0, 0.0, 0.0)), Err(PrefError::BadBeta(0.0)));
    }
}
