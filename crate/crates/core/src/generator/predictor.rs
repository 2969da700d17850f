//! Predictor interface and the planted-scene predictor.
//!
//! The planted predictor stands in for a trained token head: for a given
//! (spec, seed) it samples a scene satisfying the spec, corrupts each object
//! independently with probability `epsilon`, and peaks its conditional
//! logits at the resulting grid. Its unconditional branch ignores the spec
//! and leans toward background.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GenError;
use crate::microworld::{
    sample_scene_on, scene_to_grid, Cell, CONTENT_VOCAB, Color, GridShape, ObjectSpec, Scene, TaskSpec, TokenGrid, BACKGROUND,
};
use crate::seed::{self, streams};

/// Per-position logits over the content vocabulary (all tokens but MASK).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorOutput {
    pub cond: Vec<Vec<f64>>,
    pub uncond: Vec<Vec<f64>>,
}

/// A token predictor conditioned on a prompt.
pub trait Predictor: Sync {
    type Session: PredictorSession;

    fn grid_shape(&self) -> GridShape;

    /// Binds the predictor to one prompt and one decoding seed.
    fn session(&self, spec: &TaskSpec, seed: u64) -> Result<Self::Session, GenError>;
}

pub trait PredictorSession {
    /// Conditional and unconditional logits for each of `positions`, in order.
    fn predict(&self, partial: &TokenGrid, positions: &[usize]) -> Result<PredictorOutput, GenError>;
}

/// Unconditional logit bonus for background.
const UNCOND_BACKGROUND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedPredictorConfig {
    /// Per-object corruption probability.
    pub epsilon: f64,
    /// Conditional logits are `1 / temperature` at the planted token.
    pub temperature: f64,
    /// Fixed planted-scene seed; `None` derives it from the decoding seed.
    #[serde(default)]
    pub scene_seed: Option<u64>,
}

impl Default for PlantedPredictorConfig {
    fn default() -> Self {
        Self { epsilon: 0.3, temperature: 0.25, scene_seed: None }
    }
}

impl PlantedPredictorConfig {
    pub fn noiseless() -> Self {
        Self { epsilon: 0.0, temperature: 1e-3, scene_seed: None }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(GenError::BadConfig(format!("epsilon {} outside [0, 1]", self.epsilon)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(GenError::BadConfig(format!("temperature {} must be positive", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Corruption {
    Dropped,
    Recolored { to: Color },
    Displaced { to: Cell },
}

/// The scene a planted predictor aims at, with the corruption applied to
/// each object of the clean sample (in the clean scene's order).
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedScene {
    pub clean: Scene,
    pub scene: Scene,
    pub corruptions: Vec<Option<Corruption>>,
}

impl PlantedScene {
    pub fn is_uncorrupted(&self) -> bool {
        self.corruptions.iter().all(Option::is_none)
    }
}

pub fn plant_scene(spec: &TaskSpec, grid: GridShape, epsilon: f64, seed: u64) -> Result<PlantedScene, GenError> {
    let clean = sample_scene_on(spec, grid, seed::derive(seed, streams::PLANT))?;
    let mut rng = seed::rng(seed::derive(seed, streams::CORRUPT));
    let mut objects: Vec<Option<ObjectSpec>> = clean.objects().iter().copied().map(Some).collect();
    let mut corruptions = Vec::with_capacity(objects.len());
    for i in 0..objects.len() {
        if rng.gen::<f64>() >= epsilon {
            corruptions.push(None);
            continue;
        }
        let obj = objects[i].expect("untouched so far");
        let c = match rng.gen_range(0..3) {
            0 => Corruption::Dropped,
            1 => {
                let others: Vec<_> = Color::ALL.into_iter().filter(|&c| c != obj.color).collect();
                Corruption::Recolored { to: others[rng.gen_range(0..others.len())] }
            }
            _ => {
                let occupied: Vec<Cell> = objects.iter().flatten().map(|o| o.anchor).collect();
                let free: Vec<Cell> =
                    (0..grid.cells()).map(|i| grid.cell(i)).filter(|c| !occupied.contains(c)).collect();
                if free.is_empty() {
                    Corruption::Dropped
                } else {
                    Corruption::Displaced { to: free[rng.gen_range(0..free.len())] }
                }
            }
        };
        objects[i] = match c {
            Corruption::Dropped => None,
            Corruption::Recolored { to } => Some(ObjectSpec { color: to, ..obj }),
            Corruption::Displaced { to } => Some(ObjectSpec { anchor: to, ..obj }),
        };
        corruptions.push(Some(c));
    }
    let scene = Scene::new(grid, objects.into_iter().flatten().collect())?;
    Ok(PlantedScene { clean, scene, corruptions })
}

#[derive(Debug, Clone)]
pub struct PlantedPredictor {
    config: PlantedPredictorConfig,
    grid: GridShape,
}

impl PlantedPredictor {
    pub fn new(config: PlantedPredictorConfig, grid: GridShape) -> Result<Self, GenError> {
        config.validate()?;
        Ok(Self { config, grid })
    }

    pub fn config(&self) -> &PlantedPredictorConfig {
        &self.config
    }

    /// The planted scene a session with this `seed` would target.
    pub fn planted(&self, spec: &TaskSpec, seed: u64) -> Result<PlantedScene, GenError> {
        let scene_seed = self.config.scene_seed.unwrap_or(seed);
        plant_scene(spec, self.grid, self.config.epsilon, scene_seed)
    }
}

impl Predictor for PlantedPredictor {
    type Session = PlantedSession;

    fn grid_shape(&self) -> GridShape {
        self.grid
    }

    fn session(&self, spec: &TaskSpec, seed: u64) -> Result<PlantedSession, GenError> {
        let planted = self.planted(spec, seed)?;
        Ok(PlantedSession { target: scene_to_grid(&planted.scene), planted, peak: 1.0 / self.config.temperature })
    }
}

#[derive(Debug, Clone)]
pub struct PlantedSession {
    planted: PlantedScene,
    target: TokenGrid,
    peak: f64,
}

impl PlantedSession {
    pub fn planted(&self) -> &PlantedScene {
        &self.planted
    }

    pub fn target(&self) -> &TokenGrid {
        &self.target
    }
}

impl PredictorSession for PlantedSession {
    fn predict(&self, partial: &TokenGrid, positions: &[usize]) -> Result<PredictorOutput, GenError> {
        if partial.len() != self.target.len() {
            return Err(GenError::LengthMismatch(partial.len(), self.target.len()));
        }
        let mut uncond_row = vec![0.0; CONTENT_VOCAB];
        uncond_row[BACKGROUND as usize] = UNCOND_BACKGROUND;
        let mut cond = Vec::with_capacity(positions.len());
        for &p in positions {
            let mut row = vec![0.0; CONTENT_VOCAB];
            row[self.target.get(p) as usize] = self.peak;
            cond.push(row);
        }
        Ok(PredictorOutput { cond, uncond: vec![uncond_row; positions.len()] })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microworld::{Shape, MASK};

    fn two() -> TaskSpec {
        TaskSpec::two_objects((Shape::Circle, Color::Red), (Shape::Square, Color::Blue)).unwrap()
    }

    #[test]
    fn noiseless_argmax_is_planted_grid() {
        let p = PlantedPredictor::new(PlantedPredictorConfig::noiseless(), GridShape::default()).unwrap();
        let s = p.session(&two(), 4).unwrap();
        let all: Vec<_> = (0..64).collect();
        let out = s.predict(&TokenGrid::all_masked(GridShape::default()), &all).unwrap();
        for (i, row) in out.cond.iter().enumerate() {
            let argmax = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            assert_eq!(argmax as u16, s.target().get(i));
            assert_ne!(argmax as u16, MASK);
        }
        assert!(s.planted().is_uncorrupted());
        assert_eq!(s.planted().scene, s.planted().clean);
    }

    #[test]
    fn epsilon_one_corrupts_everything() {
        let spec = TaskSpec::counting(Shape::Triangle, Color::Yellow, 4).unwrap();
        for seed in 0..200 {
            let p = plant_scene(&spec, GridShape::default(), 1.0, seed).unwrap();
            assert!(p.corruptions.iter().all(Option::is_some));
        }
    }

    #[test]
    fn displacement_falls_back_to_drop_on_full_grid() {
        let spec = TaskSpec::counting(Shape::Circle, Color::Red, 4).unwrap();
        for seed in 0..50 {
            let p = plant_scene(&spec, GridShape::new(2, 2), 1.0, seed).unwrap();
            // The grid starts full, so the first corruption cannot be a move.
            assert!(!matches!(p.corruptions[0], Some(Corruption::Displaced { .. })));
        }
    }

    #[test]
    fn unconditional_ignores_spec() {
        let p = PlantedPredictor::new(PlantedPredictorConfig::default(), GridShape::default()).unwrap();
        let a = p.session(&two(), 1).unwrap();
        let b = p.session(&TaskSpec::single_object(Shape::Cross, Color::Green), 9).unwrap();
        let g = TokenGrid::all_masked(GridShape::default());
        assert_eq!(a.predict(&g, &[0, 5]).unwrap().uncond, b.predict(&g, &[0, 5]).unwrap().uncond);
    }

    #[test]
    fn config_validation() {
        let bad = PlantedPredictorConfig { temperature: 0.0, ..Default::default() };
        assert!(PlantedPredictor::new(bad, GridShape::default()).is_err());
        let bad = PlantedPredictorConfig { epsilon: 1.2, ..Default::default() };
        assert!(PlantedPredictor::new(bad, GridShape::default()).is_err());
    }
}
