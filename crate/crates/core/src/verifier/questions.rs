//! Rule-based decomposition of a spec into atomic yes/no questions.
//!
//! Order is fixed: presence of each shape, then counts, then colors, then
//! relations. The conjunction of all checks is exactly the oracle verdict.

use serde::{Deserialize, Serialize};

use crate::microworld::{Category, Color, Relation, Scene, Shape, TaskSpec};

const COUNT_WORDS: [&str; 7] = ["zero", "one", "two", "three", "four", "five", "six"];

/// A structured predicate over a scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Check {
    /// At least one object of the shape.
    Presence { shape: Shape, plural: bool },
    /// Exactly `count` objects of the shape.
    Count { shape: Shape, count: usize },
    /// Some object of the shape has the color, or with `all` every object
    /// of the shape has it (and there is at least one).
    Color { shape: Shape, color: Color, all: bool },
    /// Relation between the canonical instances of two kinds.
    Relation { subject: (Shape, Color), relation: Relation, object: (Shape, Color) },
}

impl Check {
    pub fn evaluate(&self, scene: &Scene) -> bool {
        match *self {
            Check::Presence { shape, .. } => scene.count_shape(shape) > 0,
            Check::Count { shape, count } => scene.count_shape(shape) == count,
            Check::Color { shape, color, all: false } => scene.count(shape, color) > 0,
            Check::Color { shape, color, all: true } => {
                let n = scene.count_shape(shape);
                n > 0 && scene.count(shape, color) == n
            }
            Check::Relation { subject, relation, object } => {
                match (scene.canonical(subject.0, subject.1), scene.canonical(object.0, object.1)) {
                    (Some(a), Some(b)) => relation.holds(a.anchor, b.anchor),
                    _ => false,
                }
            }
        }
    }

    /// English surface form, always ending in a single `?`.
    pub fn text(&self) -> String {
        match *self {
            Check::Presence { shape, plural: false } => format!("Is there a {shape}?"),
            Check::Presence { shape, plural: true } => format!("Are there {}?", shape.plural()),
            Check::Count { shape, count } => {
                let n = COUNT_WORDS.get(count).map_or_else(|| count.to_string(), |w| w.to_string());
                format!("Are there {n} {}?", shape.plural())
            }
            Check::Color { shape, color, all: false } => format!("Is the {shape} {color}?"),
            Check::Color { shape, color, all: true } => format!("Are the {} {color}?", shape.plural()),
            Check::Relation { subject, relation, object } => format!(
                "Is the {} {} {} the {} {}?",
                subject.1,
                subject.0,
                relation.phrase(),
                object.1,
                object.0
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AtomicQuestion {
    pub text: String,
    pub check: Check,
}

impl AtomicQuestion {
    pub fn new(check: Check) -> Self {
        Self { text: check.text(), check }
    }
}

pub fn decompose(spec: &TaskSpec) -> Vec<AtomicQuestion> {
    let counting = spec.category() == Category::Counting;
    let mut checks = Vec::new();
    let mut shapes: Vec<Shape> = Vec::new();
    for r in spec.objects() {
        if !shapes.contains(&r.shape) {
            shapes.push(r.shape);
            checks.push(Check::Presence { shape: r.shape, plural: counting });
        }
    }
    if counting {
        for r in spec.objects() {
            checks.push(Check::Count { shape: r.shape, count: r.count });
        }
    }
    for r in spec.objects() {
        checks.push(Check::Color { shape: r.shape, color: r.color, all: counting });
    }
    let o = spec.objects();
    for rel in spec.relations() {
        checks.push(Check::Relation {
            subject: (o[rel.subject].shape, o[rel.subject].color),
            relation: rel.relation,
            object: (o[rel.object].shape, o[rel.object].color),
        });
    }
    checks.into_iter().map(AtomicQuestion::new).collect()
}
