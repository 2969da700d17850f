//! Exact ground-truth check of a scene against a task spec.
//!
//! Semantics:
//! - presence categories: at least `count` objects of the required
//!   (shape, color);
//! - counting: exactly `count` objects of the shape, all of the required
//!   color ("three blue squares" means three squares and they are blue);
//! - relations compare the anchors of the canonical (first in row-major
//!   order) instance of each kind; a missing instance fails the relation.

use serde::{Deserialize, Serialize};

use super::{Category, RelationSpec, Requirement, Scene, TaskSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementOutcome {
    pub requirement: Requirement,
    /// Objects matching both shape and color.
    pub observed: usize,
    /// Objects matching the shape in any color.
    pub observed_shape: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationOutcome {
    pub relation: RelationSpec,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryVerdict {
    pub category: Category,
    pub pass: bool,
    pub requirements: Vec<RequirementOutcome>,
    pub relations: Vec<RelationOutcome>,
}

pub fn oracle_check(scene: &Scene, spec: &TaskSpec) -> CategoryVerdict {
    let exact = spec.category() == Category::Counting;
    let requirements: Vec<_> = spec
        .objects()
        .iter()
        .map(|&req| {
            let observed = scene.count(req.shape, req.color);
            let observed_shape = scene.count_shape(req.shape);
            let pass = if exact {
                observed == req.count && observed_shape == req.count
            } else {
                observed >= req.count
            };
            RequirementOutcome { requirement: req, observed, observed_shape, pass }
        })
        .collect();

    let relations: Vec<_> = spec
        .relations()
        .iter()
        .map(|&rel| RelationOutcome { relation: rel, pass: relation_holds(scene, spec.objects(), rel) })
        .collect();

    let pass = requirements.iter().all(|r| r.pass) && relations.iter().all(|r| r.pass);
    CategoryVerdict { category: spec.category(), pass, requirements, relations }
}

pub(crate) fn relation_holds(scene: &Scene, objects: &[Requirement], rel: RelationSpec) -> bool {
    let (s, o) = (objects[rel.subject], objects[rel.object]);
    match (scene.canonical(s.shape, s.color), scene.canonical(o.shape, o.color)) {
        (Some(a), Some(b)) => rel.relation.holds(a.anchor, b.anchor),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microworld::{Color, GridShape, ObjectSpec, Relation, Shape};

    fn scene(objs: &[(Shape, Color, usize, usize)]) -> Scene {
        Scene::new(
            GridShape::default(),
            objs.iter().map(|&(s, c, x, y)| ObjectSpec::new(s, c, x, y)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn counting_short_fails() {
        let spec = TaskSpec::counting(Shape::Circle, Color::Red, 3).unwrap();
        let s = scene(&[(Shape::Circle, Color::Red, 0, 0), (Shape::Circle, Color::Red, 1, 0)]);
        let v = oracle_check(&s, &spec);
        assert!(!v.pass);
        assert_eq!(v.requirements[0].observed, 2);
    }

    #[test]
    fn counting_is_exact() {
        let spec = TaskSpec::counting(Shape::Circle, Color::Red, 2).unwrap();
        let two = scene(&[(Shape::Circle, Color::Red, 0, 0), (Shape::Circle, Color::Red, 1, 0)]);
        assert!(oracle_check(&two, &spec).pass);
        let three = scene(&[
            (Shape::Circle, Color::Red, 0, 0),
            (Shape::Circle, Color::Red, 1, 0),
            (Shape::Circle, Color::Red, 2, 0),
        ]);
        assert!(!oracle_check(&three, &spec).pass);
        let off_color = scene(&[
            (Shape::Circle, Color::Red, 0, 0),
            (Shape::Circle, Color::Red, 1, 0),
            (Shape::Circle, Color::Blue, 2, 0),
        ]);
        assert!(!oracle_check(&off_color, &spec).pass);
    }

    #[test]
    fn presence_is_at_least() {
        let spec = TaskSpec::single_object(Shape::Square, Color::Blue);
        let s = scene(&[(Shape::Square, Color::Blue, 0, 0), (Shape::Square, Color::Blue, 3, 3)]);
        assert!(oracle_check(&s, &spec).pass);
    }

    #[test]
    fn position_left_of_by_column() {
        let spec = TaskSpec::position((Shape::Circle, Color::Red), Relation::LeftOf, (Shape::Square, Color::Blue)).unwrap();
        let s = scene(&[(Shape::Circle, Color::Red, 1, 2), (Shape::Square, Color::Blue, 5, 2)]);
        assert!(oracle_check(&s, &spec).pass);
        let flipped = scene(&[(Shape::Circle, Color::Red, 5, 2), (Shape::Square, Color::Blue, 1, 2)]);
        assert!(!oracle_check(&flipped, &spec).pass);
    }

    #[test]
    fn attribute_swap_fails() {
        let spec = TaskSpec::color_attribution((Shape::Circle, Color::Red), (Shape::Square, Color::Blue)).unwrap();
        let s = scene(&[(Shape::Circle, Color::Blue, 0, 0), (Shape::Square, Color::Red, 4, 4)]);
        let v = oracle_check(&s, &spec);
        assert!(!v.pass);
        assert!(v.requirements.iter().all(|r| !r.pass));
    }

    #[test]
    fn missing_object_fails_relation() {
        let spec = TaskSpec::position((Shape::Circle, Color::Red), Relation::Above, (Shape::Square, Color::Blue)).unwrap();
        let s = scene(&[(Shape::Circle, Color::Red, 0, 0)]);
        let v = oracle_check(&s, &spec);
        assert!(!v.relations[0].pass);
    }
}
