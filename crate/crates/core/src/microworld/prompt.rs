//! Closed template grammar for prompts. See `docs/prompt-grammar.md`.
//!
//! Rendering is canonical; parsing additionally accepts `an` for `a`,
//! digit counts, "to the left/right of", letter case and a trailing period.

use super::{Category, Color, Relation, RelationSpec, Requirement, Shape, TaskSpec, WorldError};

const NUMBER_WORDS: [&str; 5] = ["zero", "one", "two", "three", "four"];

fn kind(shape: Shape, color: Color) -> String {
    format!("a {color} {shape}")
}

fn attributed(shape: Shape, color: Color) -> String {
    format!("a {shape} that is {color}")
}

pub fn render_prompt(spec: &TaskSpec) -> String {
    let o = spec.objects();
    let body = match spec.category() {
        Category::SingleObject => kind(o[0].shape, o[0].color),
        Category::Colors => attributed(o[0].shape, o[0].color),
        Category::Counting => format!(
            "{} {} {}",
            NUMBER_WORDS.get(o[0].count).copied().unwrap_or("many"),
            o[0].color,
            o[0].shape.plural()
        ),
        Category::TwoObjects => format!("{} and {}", kind(o[0].shape, o[0].color), kind(o[1].shape, o[1].color)),
        Category::ColorAttribution => format!(
            "{} and {}",
            attributed(o[0].shape, o[0].color),
            attributed(o[1].shape, o[1].color)
        ),
        Category::Position => format!(
            "{} {} {}",
            kind(o[0].shape, o[0].color),
            spec.relations()[0].relation.phrase(),
            kind(o[1].shape, o[1].color)
        ),
        Category::LongCompositional => {
            let names: Vec<_> = o.iter().map(|r| kind(r.shape, r.color)).collect();
            let (last, init) = names.split_last().expect("validated non-empty");
            let clauses: Vec<_> = spec
                .relations()
                .iter()
                .map(|r| {
                    let (s, t) = (o[r.subject], o[r.object]);
                    format!("the {} {} is {} the {} {}", s.color, s.shape, r.relation.phrase(), t.color, t.shape)
                })
                .collect();
            format!("{} and {}, where {}", init.join(", "), last, clauses.join(" and "))
        }
    };
    format!("a photo of {body}")
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Comma,
    Period,
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    end: usize,
}

enum Phrase {
    Kind(Shape, Color),
    Attributed(Shape, Color),
    Counted(Shape, Color, usize),
}

type PResult<T> = Result<T, WorldError>;

impl<'a> Parser<'a> {
    fn new(lower: &'a str) -> PResult<Self> {
        let mut toks = Vec::new();
        let bytes = lower.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let b = bytes[i];
            if b.is_ascii_whitespace() {
                i += 1;
            } else if b == b',' {
                toks.push((i, Tok::Comma));
                i += 1;
            } else if b == b'.' {
                toks.push((i, Tok::Period));
                i += 1;
            } else if b.is_ascii_alphanumeric() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                toks.push((start, Tok::Word(&lower[start..i])));
            } else {
                return Err(WorldError::UnparsablePrompt { offset: i, reason: "unexpected character".into() });
            }
        }
        Ok(Self { toks, pos: 0, end: lower.len() })
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn fail<T>(&self, reason: impl Into<String>) -> PResult<T> {
        Err(WorldError::UnparsablePrompt { offset: self.offset(), reason: reason.into() })
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn peek_word(&self, n: usize) -> Option<&'a str> {
        match self.toks.get(self.pos + n) {
            Some((_, Tok::Word(w))) => Some(w),
            _ => None,
        }
    }

    fn word(&mut self) -> PResult<&'a str> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = *w;
                self.pos += 1;
                Ok(w)
            }
            _ => self.fail("expected a word"),
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.peek_word(0) == Some(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.fail(format!("expected '{w}'"))
        }
    }

    fn eat_comma(&mut self) -> bool {
        if self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_end(&mut self) -> bool {
        if self.peek() == Some(&Tok::Period) {
            self.pos += 1;
        }
        self.pos == self.toks.len()
    }

    fn article(&mut self) -> PResult<()> {
        if self.eat_word("a") || self.eat_word("an") {
            Ok(())
        } else {
            self.fail("expected an article")
        }
    }

    fn color(&mut self) -> PResult<Color> {
        let at = self.offset();
        let w = self.word()?;
        Color::ALL.into_iter().find(|c| c.name() == w).ok_or(WorldError::UnparsablePrompt {
            offset: at,
            reason: format!("unknown color '{w}'"),
        })
    }

    fn shape(&mut self, plural: bool) -> PResult<Shape> {
        let at = self.offset();
        let w = self.word()?;
        Shape::ALL
            .into_iter()
            .find(|s| if plural { s.plural() == w } else { s.name() == w })
            .ok_or(WorldError::UnparsablePrompt { offset: at, reason: format!("unknown shape '{w}'") })
    }

    fn phrase(&mut self) -> PResult<Phrase> {
        if let Some(n) = self.peek_word(0).and_then(parse_number) {
            self.pos += 1;
            let color = self.color()?;
            let shape = self.shape(true)?;
            return Ok(Phrase::Counted(shape, color, n));
        }
        self.article()?;
        let is_color = self.peek_word(0).is_some_and(|w| Color::ALL.iter().any(|c| c.name() == w));
        if is_color {
            let color = self.color()?;
            let shape = self.shape(false)?;
            Ok(Phrase::Kind(shape, color))
        } else {
            let shape = self.shape(false)?;
            self.expect_word("that")?;
            self.expect_word("is")?;
            let color = self.color()?;
            Ok(Phrase::Attributed(shape, color))
        }
    }

    fn kind_phrase(&mut self) -> PResult<(Shape, Color)> {
        let at = self.offset();
        match self.phrase()? {
            Phrase::Kind(s, c) => Ok((s, c)),
            _ => Err(WorldError::UnparsablePrompt { offset: at, reason: "expected 'a <color> <shape>'".into() }),
        }
    }

    fn attributed_phrase(&mut self) -> PResult<(Shape, Color)> {
        let at = self.offset();
        match self.phrase()? {
            Phrase::Attributed(s, c) => Ok((s, c)),
            _ => Err(WorldError::UnparsablePrompt { offset: at, reason: "expected 'a <shape> that is <color>'".into() }),
        }
    }

    fn relation(&mut self) -> Option<Relation> {
        let start = self.pos;
        if self.eat_word("above") {
            return Some(Relation::Above);
        }
        if self.eat_word("below") {
            return Some(Relation::Below);
        }
        if self.eat_word("to") && !self.eat_word("the") {
            self.pos = start;
            return None;
        }
        let side = if self.eat_word("left") {
            Relation::LeftOf
        } else if self.eat_word("right") {
            Relation::RightOf
        } else {
            self.pos = start;
            return None;
        };
        if self.eat_word("of") {
            Some(side)
        } else {
            self.pos = start;
            None
        }
    }

    fn reference(&mut self, objects: &[(Shape, Color)]) -> PResult<usize> {
        let at = self.offset();
        self.expect_word("the")?;
        let color = self.color()?;
        let shape = self.shape(false)?;
        objects.iter().position(|&k| k == (shape, color)).ok_or(WorldError::UnparsablePrompt {
            offset: at,
            reason: format!("'{color} {shape}' was not introduced"),
        })
    }

    fn finish(&mut self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.fail("unexpected trailing text")
        }
    }

    fn prompt(&mut self) -> PResult<TaskSpec> {
        self.article()?;
        self.expect_word("photo")?;
        self.expect_word("of")?;
        let first_at = self.offset();
        let first = self.phrase()?;
        let spec = match first {
            Phrase::Counted(shape, color, count) => {
                self.finish()?;
                TaskSpec::new(Category::Counting, vec![Requirement { shape, color, count }], vec![])
            }
            Phrase::Attributed(s, c) => {
                if self.at_end() {
                    TaskSpec::new(Category::Colors, vec![Requirement::one(s, c)], vec![])
                } else {
                    self.expect_word("and")?;
                    let (s2, c2) = self.attributed_phrase()?;
                    self.finish()?;
                    TaskSpec::new(
                        Category::ColorAttribution,
                        vec![Requirement::one(s, c), Requirement::one(s2, c2)],
                        vec![],
                    )
                }
            }
            Phrase::Kind(s, c) => {
                if self.at_end() {
                    TaskSpec::new(Category::SingleObject, vec![Requirement::one(s, c)], vec![])
                } else if let Some(relation) = self.relation() {
                    let (s2, c2) = self.kind_phrase()?;
                    self.finish()?;
                    TaskSpec::new(
                        Category::Position,
                        vec![Requirement::one(s, c), Requirement::one(s2, c2)],
                        vec![RelationSpec { subject: 0, relation, object: 1 }],
                    )
                } else if self.eat_word("and") {
                    let (s2, c2) = self.kind_phrase()?;
                    self.finish()?;
                    TaskSpec::new(
                        Category::TwoObjects,
                        vec![Requirement::one(s, c), Requirement::one(s2, c2)],
                        vec![],
                    )
                } else if self.eat_comma() {
                    self.long_tail((s, c))?
                } else {
                    return self.fail("expected 'and', ',' or a relation");
                }
            }
        };
        spec.map_err(|e| WorldError::UnparsablePrompt { offset: first_at, reason: e.to_string() })
    }

    fn long_tail(&mut self, first: (Shape, Color)) -> PResult<Result<TaskSpec, WorldError>> {
        let mut objects = vec![first];
        loop {
            let last = self.eat_word("and");
            objects.push(self.kind_phrase()?);
            if last {
                break;
            }
            if self.eat_word("and") {
                objects.push(self.kind_phrase()?);
                break;
            }
            if !self.eat_comma() {
                return self.fail("expected ',' or 'and' in object list");
            }
        }
        if !self.eat_comma() {
            return self.fail("expected ', where'");
        }
        self.expect_word("where")?;
        let mut relations = Vec::new();
        loop {
            let subject = self.reference(&objects)?;
            self.eat_word("is");
            let Some(relation) = self.relation() else {
                return self.fail("expected a relation");
            };
            let object = self.reference(&objects)?;
            relations.push(RelationSpec { subject, relation, object });
            if !self.eat_word("and") {
                break;
            }
        }
        self.finish()?;
        Ok(TaskSpec::long_compositional(objects, relations))
    }
}

fn parse_number(w: &str) -> Option<usize> {
    NUMBER_WORDS
        .iter()
        .position(|&n| n == w)
        .or_else(|| w.parse().ok())
        .filter(|&n| n >= 2)
}

pub fn parse_prompt(text: &str) -> Result<TaskSpec, WorldError> {
    let lower = text.to_ascii_lowercase();
    Parser::new(&lower)?.prompt()
}
