use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::microworld::{Category, Color, GridShape, Relation, RelationSpec, Shape, TaskSpec};
use crate::seed;

fn kind<R: Rng>(rng: &mut R) -> (Shape, Color) {
    (*Shape::ALL.choose(rng).unwrap(), *Color::ALL.choose(rng).unwrap())
}

fn two_shapes<R: Rng>(rng: &mut R) -> (Shape, Shape) {
    let i = index::sample(rng, Shape::ALL.len(), 2);
    (Shape::ALL[i.index(0)], Shape::ALL[i.index(1)])
}

/// A random valid spec of `category`. Relations in long prompts are read off
/// a random placement of the objects, so every suite spec is satisfiable.
pub fn random_spec(category: Category, seed: u64) -> TaskSpec {
    let mut rng = seed::rng(seed);
    let rng = &mut rng;
    match category {
        Category::SingleObject => {
            let (s, c) = kind(rng);
            TaskSpec::single_object(s, c)
        }
        Category::Colors => {
            let (s, c) = kind(rng);
            TaskSpec::colors(s, c)
        }
        Category::Counting => {
            let (s, c) = kind(rng);
            TaskSpec::counting(s, c, rng.gen_range(2..=4)).unwrap()
        }
        Category::TwoObjects => {
            let (a, b) = two_shapes(rng);
            TaskSpec::two_objects((a, *Color::ALL.choose(rng).unwrap()), (b, *Color::ALL.choose(rng).unwrap()))
                .unwrap()
        }
        Category::ColorAttribution => {
            let (a, b) = two_shapes(rng);
            let c = index::sample(rng, Color::ALL.len(), 2);
            TaskSpec::color_attribution((a, Color::ALL[c.index(0)]), (b, Color::ALL[c.index(1)])).unwrap()
        }
        Category::Position => {
            let (a, b) = two_shapes(rng);
            let rel = *Relation::ALL.choose(rng).unwrap();
            TaskSpec::position((a, *Color::ALL.choose(rng).unwrap()), rel, (b, *Color::ALL.choose(rng).unwrap()))
                .unwrap()
        }
        Category::LongCompositional => long_compositional(rng),
    }
}

fn long_compositional<R: Rng>(rng: &mut R) -> TaskSpec {
    let n = rng.gen_range(4..=6);
    let kinds: Vec<(Shape, Color)> = index::sample(rng, Shape::ALL.len() * Color::ALL.len(), n)
        .iter()
        .map(|k| (Shape::ALL[k / Color::ALL.len()], Color::ALL[k % Color::ALL.len()]))
        .collect();
    let grid = GridShape::default();
    let cells: Vec<_> = index::sample(rng, grid.cells(), n).iter().map(|i| grid.cell(i)).collect();

    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let m = rng.gen_range(2..=3);
    let relations = pairs[..m]
        .iter()
        .map(|&(a, b)| {
            let (s, o) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            let holding: Vec<Relation> =
                Relation::ALL.into_iter().filter(|r| r.holds(cells[s], cells[o])).collect();
            RelationSpec { subject: s, relation: *holding.choose(rng).unwrap(), object: o }
        })
        .collect();
    TaskSpec::long_compositional(kinds, relations).expect("relations read off a placement are valid")
}
