//! The chain-of-thought transcript format.
//!
//! ```text
//! <think_start>Q1? A1; Q2? A2;<think_end> <answer_start>A<answer_end>
//! ```
//!
//! Answers are `yes`/`no` (any case). Whitespace is allowed between
//! segments, and the `;` after the last pair may be omitted. See
//! `docs/transcript-format.md`.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::VerifyError;

pub const THINK_START: &str = "<think_start>";
pub const THINK_END: &str = "<think_end>";
pub const ANSWER_START: &str = "<answer_start>";
pub const ANSWER_END: &str = "<answer_end>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }

    pub fn flipped(self) -> Self {
        Self::from_bool(!self.is_yes())
    }

    fn parse(word: &str) -> Option<Self> {
        if word.eq_ignore_ascii_case("yes") {
            Some(Answer::Yes)
        } else if word.eq_ignore_ascii_case("no") {
            Some(Answer::No)
        } else {
            None
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_yes() { "yes" } else { "no" })
    }
}

/// Score of a list of answers: the fraction answered yes.
pub fn cot_score(answers: &[Answer]) -> Result<f64, VerifyError> {
    if answers.is_empty() {
        return Err(VerifyError::EmptyDecomposition);
    }
    Ok(answers.iter().filter(|a| a.is_yes()).count() as f64 / answers.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    /// Question texts, each ending in `?`.
    pub questions: Vec<String>,
    pub answers: Vec<Answer>,
    pub final_answer: Answer,
    /// Exact surface text.
    pub raw: String,
    /// The stated final answer disagrees with "yes iff every answer is yes".
    /// Never set on generated transcripts.
    pub mismatched_final: bool,
}

impl Transcript {
    /// Builds a transcript whose final answer follows the all-yes rule.
    pub fn from_pairs(questions: Vec<String>, answers: Vec<Answer>) -> Result<Self, VerifyError> {
        if questions.is_empty() {
            return Err(VerifyError::EmptyDecomposition);
        }
        if questions.len() != answers.len() {
            return Err(VerifyError::Malformed { position: 0, reason: "unpaired questions and answers".into() });
        }
        for q in &questions {
            let body = q.strip_suffix('?').unwrap_or(q);
            if !q.ends_with('?') || body.trim().is_empty() || body.contains(['?', ';', '<']) {
                return Err(VerifyError::Malformed { position: 0, reason: format!("bad question text {q:?}") });
            }
        }
        let final_answer = Answer::from_bool(answers.iter().all(|a| a.is_yes()));
        let raw = render(&questions, &answers, final_answer);
        Ok(Self { questions, answers, final_answer, raw, mismatched_final: false })
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    pub fn yes_count(&self) -> usize {
        self.answers.iter().filter(|a| a.is_yes()).count()
    }

    /// `S = (1/n) Σ s_j`, from the per-question answers only.
    pub fn score(&self) -> f64 {
        cot_score(&self.answers).expect("parsed transcripts have at least one pair")
    }

    /// Canonical rendering of the parsed content.
    pub fn to_canonical(&self) -> String {
        render(&self.questions, &self.answers, self.final_answer)
    }
}

fn render(questions: &[String], answers: &[Answer], final_answer: Answer) -> String {
    let pairs: Vec<String> = questions.iter().zip(answers).map(|(q, a)| format!("{q} {a};")).collect();
    format!("{THINK_START}{}{THINK_END} {ANSWER_START}{final_answer}{ANSWER_END}", pairs.join(" "))
}

struct Cursor<'a> {
    s: &'a str,
    i: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, at: usize, reason: &str) -> Result<T, VerifyError> {
        Err(VerifyError::Malformed { position: at, reason: reason.into() })
    }

    fn skip_ws(&mut self) {
        let b = self.s.as_bytes();
        while self.i < b.len() && b[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.i..]
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) {
            self.i += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), VerifyError> {
        if self.eat(lit) {
            Ok(())
        } else {
            self.err(self.i, &format!("expected {lit}"))
        }
    }

    fn answer(&mut self) -> Result<Answer, VerifyError> {
        let start = self.i;
        let b = self.s.as_bytes();
        while self.i < b.len() && b[self.i].is_ascii_alphabetic() {
            self.i += 1;
        }
        if start == self.i {
            return self.err(start, "missing answer");
        }
        match Answer::parse(&self.s[start..self.i]) {
            Some(a) => Ok(a),
            None => self.err(start, "answer must be yes or no"),
        }
    }
}

pub fn parse_transcript(text: &str) -> Result<Transcript, VerifyError> {
    let mut c = Cursor { s: text, i: 0 };
    c.skip_ws();
    c.expect(THINK_START)?;
    let mut questions = Vec::new();
    let mut answers = Vec::new();
    loop {
        c.skip_ws();
        if c.eat(THINK_END) {
            if questions.is_empty() {
                return c.err(c.i - THINK_END.len(), "no question/answer pairs");
            }
            break;
        }
        if c.i == text.len() {
            return c.err(c.i, "missing <think_end>");
        }
        let start = c.i;
        let Some(k) = c.rest().find(['?', ';', '<']).map(|k| start + k) else {
            return c.err(text.len(), "question without '?'");
        };
        if text.as_bytes()[k] != b'?' {
            return c.err(k, "question without '?'");
        }
        if text[start..k].trim().is_empty() {
            return c.err(start, "empty question");
        }
        questions.push(text[start..=k].trim().to_string());
        c.i = k + 1;
        c.skip_ws();
        answers.push(c.answer()?);
        c.skip_ws();
        if !c.eat(";") && !c.rest().starts_with(THINK_END) {
            return c.err(c.i, "expected ';' after answer");
        }
    }
    let post_think = c.i;
    c.skip_ws();
    if !c.eat(ANSWER_START) {
        return c.err(post_think, "missing <answer_start>");
    }
    c.skip_ws();
    let final_answer = c.answer()?;
    c.skip_ws();
    c.expect(ANSWER_END)?;
    c.skip_ws();
    if c.i != text.len() {
        return c.err(c.i, "trailing content after <answer_end>");
    }
    let mismatched_final = final_answer != Answer::from_bool(answers.iter().all(|a| a.is_yes()));
    Ok(Transcript { questions, answers, final_answer, raw: text.to_string(), mismatched_final })
}

/// Byte-level entry point; invalid UTF-8 is reported as a malformed
/// transcript at the first invalid byte.
pub fn parse_transcript_bytes(bytes: &[u8]) -> Result<Transcript, VerifyError> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse_transcript(s),
        Err(e) => Err(VerifyError::Malformed { position: e.valid_up_to(), reason: "invalid UTF-8".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE: &str = "<think_start>Is there a circle? yes; Is it red? no;<think_end> <answer_start>no<answer_end>";

    #[test]
    fn parses_grammar_example() {
        let t = parse_transcript(EXAMPLE).unwrap();
        assert_eq!(t.questions, ["Is there a circle?", "Is it red?"]);
        assert_eq!(t.answers, [Answer::Yes, Answer::No]);
        assert_eq!(t.final_answer, Answer::No);
        assert_eq!(t.score(), 0.5);
        assert!(!t.mismatched_final);
        assert_eq!(t.raw, EXAMPLE);
        assert_eq!(t.to_canonical(), EXAMPLE);
    }

    #[test]
    fn tolerant_forms() {
        let t = parse_transcript(
            "  <think_start> Is there a circle?   YES ;\n Is it red?No <think_end>\n<answer_start> Yes <answer_end>\n",
        )
        .unwrap();
        assert_eq!(t.answers, [Answer::Yes, Answer::No]);
        assert_eq!(t.final_answer, Answer::Yes);
        assert!(t.mismatched_final);
    }

    #[test]
    fn missing_answer_start_reported_after_think() {
        let text = "<think_start>Is there a circle? yes;<think_end> <answer_end>";
        let at = text.find(THINK_END).unwrap() + THINK_END.len();
        match parse_transcript(text) {
            Err(VerifyError::Malformed { position, reason }) => {
                assert_eq!(position, at);
                assert!(reason.contains("answer_start"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn structured_failures() {
        let cases = [
            ("", 0),
            ("Is there a circle? yes;", 0),
            ("<think_start><think_end> <answer_start>no<answer_end>", 13),
            ("<think_start>Is there a circle yes;<think_end> <answer_start>no<answer_end>", 34),
            ("<think_start>Is there a circle? maybe;<think_end> <answer_start>no<answer_end>", 32),
            ("<think_start>Is there a circle? yes", 35),
            ("<think_start>Is there a circle? yes;<think_end> <answer_start>no<answer_end> extra", 77),
            ("<think_start>? yes;<think_end> <answer_start>no<answer_end>", 13),
        ];
        for (text, pos) in cases {
            match parse_transcript(text) {
                Err(VerifyError::Malformed { position, .. }) => assert_eq!(position, pos, "{text:?}"),
                other => panic!("{text:?} -> {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_utf8_is_structured() {
        let err = parse_transcript_bytes(b"<think_start>\xff").unwrap_err();
        assert_eq!(err, VerifyError::Malformed { position: 13, reason: "invalid UTF-8".into() });
    }

    #[test]
    fn score_is_direct_mean() {
        use Answer::*;
        assert_eq!(cot_score(&[Yes, No, Yes, Yes]).unwrap(), 0.75);
        assert_eq!(cot_score(&[]), Err(VerifyError::EmptyDecomposition));
    }

    fn question() -> impl Strategy<Value = String> {
        "[A-Za-z][A-Za-z0-9 ]{0,20}".prop_map(|s| format!("{}?", s.trim_end()))
    }

    proptest! {
        #[test]
        fn generated_round_trip(pairs in prop::collection::vec((question(), any::<bool>()), 1..12)) {
            let (qs, bs): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let t = Transcript::from_pairs(qs, bs.into_iter().map(Answer::from_bool).collect()).unwrap();
            let back = parse_transcript(&t.raw).unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert!(!back.mismatched_final);
        }

        #[test]
        fn never_panics(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
            let _ = parse_transcript_bytes(&bytes);
        }
    }
}
