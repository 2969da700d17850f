use rand::seq::index;

use super::oracle::relation_holds;
use super::{GridShape, ObjectSpec, Relation, Scene, TaskSpec, WorldError};
use crate::seed;

const MAX_ATTEMPTS: usize = 20_000;

/// Samples a scene on the default 8x8 grid that satisfies `spec` exactly.
pub fn sample_scene(spec: &TaskSpec, seed: u64) -> Result<Scene, WorldError> {
    sample_scene_on(spec, GridShape::default(), seed)
}

/// Samples a scene containing exactly the required objects, placed on
/// distinct uniformly drawn cells subject to the spec's relations.
pub fn sample_scene_on(spec: &TaskSpec, grid: GridShape, seed: u64) -> Result<Scene, WorldError> {
    let total = spec.total_objects();
    if total > grid.cells() {
        return Err(WorldError::InfeasibleSpec(format!(
            "{total} objects do not fit on {} cells",
            grid.cells()
        )));
    }
    spec.validate()?;
    check_orderable(spec, grid)?;

    let kinds: Vec<_> = spec
        .objects()
        .iter()
        .flat_map(|r| std::iter::repeat_n((r.shape, r.color), r.count))
        .collect();
    let mut rng = seed::rng(seed);
    for _ in 0..MAX_ATTEMPTS {
        let cells = index::sample(&mut rng, grid.cells(), total);
        let objects = kinds
            .iter()
            .zip(cells.iter())
            .map(|(&(s, c), i)| {
                let cell = grid.cell(i);
                ObjectSpec::new(s, c, cell.col, cell.row)
            })
            .collect();
        let scene = Scene::new(grid, objects)?;
        if spec.relations().iter().all(|&r| relation_holds(&scene, spec.objects(), r)) {
            return Ok(scene);
        }
    }
    Err(WorldError::InfeasibleSpec(format!(
        "no placement satisfying the relations found in {MAX_ATTEMPTS} attempts"
    )))
}

/// Relations induce strict orders on columns and rows; a cycle, or a chain
/// longer than the grid edge, cannot be realised.
fn check_orderable(spec: &TaskSpec, grid: GridShape) -> Result<(), WorldError> {
    let n = spec.objects().len();
    for (horizontal, edge) in [(true, grid.width), (false, grid.height)] {
        // before[a] contains b when a must sit strictly before b on this axis.
        let mut before = vec![Vec::new(); n];
        for r in spec.relations() {
            let (a, b) = match (r.relation, horizontal) {
                (Relation::LeftOf, true) | (Relation::Above, false) => (r.subject, r.object),
                (Relation::RightOf, true) | (Relation::Below, false) => (r.object, r.subject),
                _ => continue,
            };
            before[a].push(b);
        }
        // Longest path by memoised DFS, detecting cycles.
        let mut state = vec![0u8; n];
        let mut depth = vec![0usize; n];
        fn visit(v: usize, before: &[Vec<usize>], state: &mut [u8], depth: &mut [usize]) -> Result<usize, ()> {
            match state[v] {
                1 => return Err(()),
                2 => return Ok(depth[v]),
                _ => {}
            }
            state[v] = 1;
            let mut d = 1;
            for &w in &before[v] {
                d = d.max(1 + visit(w, before, state, depth)?);
            }
            state[v] = 2;
            depth[v] = d;
            Ok(d)
        }
        for v in 0..n {
            let d = visit(v, &before, &mut state, &mut depth)
                .map_err(|_| WorldError::InfeasibleSpec("contradictory relations".into()))?;
            if d > edge {
                return Err(WorldError::InfeasibleSpec(format!(
                    "relation chain of {d} objects exceeds grid edge {edge}"
                )));
            }
        }
    }
    Ok(())
}
