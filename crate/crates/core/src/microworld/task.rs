use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

use super::{Color, Shape, WorldError};

/// Compositional prompt categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    SingleObject,
    TwoObjects,
    Counting,
    Colors,
    Position,
    ColorAttribution,
    LongCompositional,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::SingleObject,
        Category::TwoObjects,
        Category::Counting,
        Category::Colors,
        Category::Position,
        Category::ColorAttribution,
        Category::LongCompositional,
    ];

    /// The six short-prompt categories scored by the benchmark by default.
    pub const GENEVAL: [Category; 6] = [
        Category::SingleObject,
        Category::TwoObjects,
        Category::Counting,
        Category::Colors,
        Category::Position,
        Category::ColorAttribution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::SingleObject => "single_object",
            Category::TwoObjects => "two_objects",
            Category::Counting => "counting",
            Category::Colors => "colors",
            Category::Position => "position",
            Category::ColorAttribution => "color_attribution",
            Category::LongCompositional => "long_compositional",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LeftOf,
    RightOf,
    Above,
    Below,
}

impl Relation {
    pub const ALL: [Relation; 4] = [Relation::LeftOf, Relation::RightOf, Relation::Above, Relation::Below];

    pub fn phrase(self) -> &'static str {
        match self {
            Relation::LeftOf => "left of",
            Relation::RightOf => "right of",
            Relation::Above => "above",
            Relation::Below => "below",
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            Relation::LeftOf => Relation::RightOf,
            Relation::RightOf => Relation::LeftOf,
            Relation::Above => Relation::Below,
            Relation::Below => Relation::Above,
        }
    }

    /// Whether `subject` stands in this relation to `object`, by anchor
    /// coordinates (row 0 is the top of the grid).
    pub fn holds(self, subject: super::Cell, object: super::Cell) -> bool {
        match self {
            Relation::LeftOf => subject.col < object.col,
            Relation::RightOf => subject.col > object.col,
            Relation::Above => subject.row < object.row,
            Relation::Below => subject.row > object.row,
        }
    }
}

/// A required object kind with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Requirement {
    pub shape: Shape,
    pub color: Color,
    pub count: usize,
}

impl Requirement {
    pub fn one(shape: Shape, color: Color) -> Self {
        Self { shape, color, count: 1 }
    }
}

/// `objects[subject] relation objects[object]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationSpec {
    pub subject: usize,
    pub relation: Relation,
    pub object: usize,
}

#[derive(Deserialize)]
struct TaskSpecRepr {
    category: Category,
    objects: Vec<Requirement>,
    #[serde(default)]
    relations: Vec<RelationSpec>,
}

/// What a prompt asks for. Construction validates the per-category shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TaskSpecRepr")]
pub struct TaskSpec {
    pub(crate) category: Category,
    pub(crate) objects: Vec<Requirement>,
    pub(crate) relations: Vec<RelationSpec>,
}

impl TryFrom<TaskSpecRepr> for TaskSpec {
    type Error = WorldError;

    fn try_from(r: TaskSpecRepr) -> Result<Self, WorldError> {
        TaskSpec::new(r.category, r.objects, r.relations)
    }
}

impl TaskSpec {
    pub fn new(
        category: Category,
        objects: Vec<Requirement>,
        relations: Vec<RelationSpec>,
    ) -> Result<Self, WorldError> {
        let spec = Self { category, objects, relations };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec without validation. Only useful for exercising error
    /// paths of consumers that must cope with malformed input.
    pub fn new_unchecked(category: Category, objects: Vec<Requirement>, relations: Vec<RelationSpec>) -> Self {
        Self { category, objects, relations }
    }

    pub fn single_object(shape: Shape, color: Color) -> Self {
        Self::new(Category::SingleObject, vec![Requirement::one(shape, color)], vec![]).unwrap()
    }

    pub fn colors(shape: Shape, color: Color) -> Self {
        Self::new(Category::Colors, vec![Requirement::one(shape, color)], vec![]).unwrap()
    }

    pub fn counting(shape: Shape, color: Color, count: usize) -> Result<Self, WorldError> {
        Self::new(Category::Counting, vec![Requirement { shape, color, count }], vec![])
    }

    pub fn two_objects(a: (Shape, Color), b: (Shape, Color)) -> Result<Self, WorldError> {
        Self::new(
            Category::TwoObjects,
            vec![Requirement::one(a.0, a.1), Requirement::one(b.0, b.1)],
            vec![],
        )
    }

    pub fn color_attribution(a: (Shape, Color), b: (Shape, Color)) -> Result<Self, WorldError> {
        Self::new(
            Category::ColorAttribution,
            vec![Requirement::one(a.0, a.1), Requirement::one(b.0, b.1)],
            vec![],
        )
    }

    pub fn position(a: (Shape, Color), relation: Relation, b: (Shape, Color)) -> Result<Self, WorldError> {
        Self::new(
            Category::Position,
            vec![Requirement::one(a.0, a.1), Requirement::one(b.0, b.1)],
            vec![RelationSpec { subject: 0, relation, object: 1 }],
        )
    }

    pub fn long_compositional(objects: Vec<(Shape, Color)>, relations: Vec<RelationSpec>) -> Result<Self, WorldError> {
        Self::new(
            Category::LongCompositional,
            objects.into_iter().map(|(s, c)| Requirement::one(s, c)).collect(),
            relations,
        )
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn objects(&self) -> &[Requirement] {
        &self.objects
    }

    pub fn relations(&self) -> &[RelationSpec] {
        &self.relations
    }

    /// Total number of objects a satisfying scene must contain.
    pub fn total_objects(&self) -> usize {
        self.objects.iter().map(|r| r.count).sum()
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::InvalidSpec(m));
        let n = self.objects.len();
        let name = self.category.name();
        let singles = self.objects.iter().all(|r| r.count == 1);
        let distinct_shapes = self.objects.iter().map(|r| r.shape).collect::<BTreeSet<_>>().len() == n;
        let distinct_kinds =
            self.objects.iter().map(|r| (r.shape, r.color)).collect::<BTreeSet<_>>().len() == n;

        for r in &self.relations {
            if r.subject >= n || r.object >= n {
                return bad(format!("relation references object {} of {n}", r.subject.max(r.object)));
            }
            if r.subject == r.object {
                return bad(format!("relation relates object {} to itself", r.subject));
            }
        }

        match self.category {
            Category::SingleObject | Category::Colors => {
                if n != 1 || !singles {
                    return bad(format!("{name} needs exactly one object"));
                }
            }
            Category::Counting => {
                if n != 1 {
                    return bad("counting needs exactly one object kind".into());
                }
                let c = self.objects[0].count;
                if !(2..=4).contains(&c) {
                    return bad(format!("counting needs a count in [2, 4], got {c}"));
                }
            }
            Category::TwoObjects | Category::Position | Category::ColorAttribution => {
                if n != 2 || !singles {
                    return bad(format!("{name} needs exactly two single objects"));
                }
                if !distinct_shapes {
                    return bad(format!("{name} needs two different shapes"));
                }
                if self.category == Category::ColorAttribution && self.objects[0].color == self.objects[1].color {
                    return bad("color_attribution needs two different colors".into());
                }
            }
            Category::LongCompositional => {
                if !(4..=6).contains(&n) || !singles {
                    return bad(format!("long_compositional needs 4-6 single objects, got {n}"));
                }
                if !distinct_kinds {
                    return bad("long_compositional objects must differ in shape or color".into());
                }
                if self.relations.len() < 2 {
                    return bad("long_compositional needs at least two relations".into());
                }
            }
        }

        match self.category {
            Category::Position => {
                if self.relations.len() != 1 || self.relations[0].subject != 0 || self.relations[0].object != 1 {
                    return bad("position needs exactly one relation from object 0 to object 1".into());
                }
            }
            Category::LongCompositional => {}
            _ => {
                if !self.relations.is_empty() {
                    return bad(format!("{name} takes no relations"));
                }
            }
        }
        Ok(())
    }
}
