//! Verification prompt templates, kept for documentation parity with a
//! model-backed verifier. Placeholders are `{image}`, `{prompt}` and
//! `{question}`.

use super::Strategy;

pub const COT: &str = include_str!("../../templates/cot.txt");
pub const OUTCOME: &str = include_str!("../../templates/outcome.txt");
pub const RULE: &str = include_str!("../../templates/rule.txt");

pub fn template(strategy: Strategy) -> &'static str {
    match strategy {
        Strategy::Cot => COT,
        Strategy::Outcome => OUTCOME,
        Strategy::Rule => RULE,
    }
}

/// Fills the placeholders. `question` is only used by the rule template.
pub fn fill(strategy: Strategy, image: &str, prompt: &str, question: &str) -> String {
    template(strategy)
        .trim_end()
        .replace("{image}", image)
        .replace("{prompt}", prompt)
        .replace("{question}", question)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_present() {
        assert!(COT.contains("{image}") && COT.contains("{prompt}"));
        assert!(COT.contains("<think_start> <think_end>") && COT.contains("<answer_start> <answer_end>"));
        assert!(OUTCOME.contains("{image}") && OUTCOME.contains("{prompt}"));
        assert!(RULE.contains("{image}") && RULE.contains("{question}"));
    }

    #[test]
    fn fill_substitutes() {
        let s = fill(Strategy::Rule, "<img>", "", "Is there a circle?");
        assert!(s.starts_with("<img> Is there a circle? "));
        assert!(!s.contains('{'));
    }
}
