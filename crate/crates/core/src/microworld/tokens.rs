use serde::{Deserialize, Serialize};

use super::{Cell, Color, GridShape, ObjectSpec, Scene, Shape, WorldError};

/// A vocabulary index.
pub type Token = u16;

/// Empty cell.
pub const BACKGROUND: Token = 0;
/// Not yet decoded.
pub const MASK: Token = 17;
/// `{background} ∪ shapes×colors ∪ {MASK}`.
pub const VOCAB_SIZE: usize = 18;
/// Tokens a predictor may emit (everything but MASK).
pub const CONTENT_VOCAB: usize = VOCAB_SIZE - 1;

pub fn object_token(shape: Shape, color: Color) -> Token {
    (1 + shape.index() * Color::ALL.len() + color.index()) as Token
}

pub fn token_object(token: Token) -> Option<(Shape, Color)> {
    if token == BACKGROUND || token >= MASK {
        return None;
    }
    let i = token as usize - 1;
    Some((Shape::ALL[i / Color::ALL.len()], Color::ALL[i % Color::ALL.len()]))
}

#[derive(Deserialize)]
struct TokenGridRepr {
    width: usize,
    height: usize,
    tokens: Vec<Token>,
}

/// The discrete image: one token per cell, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TokenGridRepr")]
pub struct TokenGrid {
    width: usize,
    height: usize,
    tokens: Vec<Token>,
}

impl TryFrom<TokenGridRepr> for TokenGrid {
    type Error = WorldError;

    fn try_from(r: TokenGridRepr) -> Result<Self, WorldError> {
        TokenGrid::from_tokens(GridShape::new(r.width, r.height), r.tokens)
    }
}

impl TokenGrid {
    pub fn from_tokens(shape: GridShape, tokens: Vec<Token>) -> Result<Self, WorldError> {
        if shape.cells() == 0 {
            return Err(WorldError::InvalidGrid("grid must be at least 1x1".into()));
        }
        if tokens.len() != shape.cells() {
            return Err(WorldError::InvalidGrid(format!(
                "{} tokens for a {}x{} grid",
                tokens.len(),
                shape.width,
                shape.height
            )));
        }
        if let Some(t) = tokens.iter().find(|&&t| t as usize >= VOCAB_SIZE) {
            return Err(WorldError::InvalidGrid(format!("token {t} outside vocabulary")));
        }
        Ok(Self { width: shape.width, height: shape.height, tokens })
    }

    pub fn all_masked(shape: GridShape) -> Self {
        Self { width: shape.width, height: shape.height, tokens: vec![MASK; shape.cells()] }
    }

    pub fn shape(&self) -> GridShape {
        GridShape::new(self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn get(&self, index: usize) -> Token {
        self.tokens[index]
    }

    /// Panics if `token` is outside the vocabulary.
    pub fn set(&mut self, index: usize, token: Token) {
        assert!((token as usize) < VOCAB_SIZE, "token {token} outside vocabulary");
        self.tokens[index] = token;
    }

    pub fn masked_positions(&self) -> Vec<usize> {
        self.tokens.iter().enumerate().filter(|(_, &t)| t == MASK).map(|(i, _)| i).collect()
    }

    pub fn masked_count(&self) -> usize {
        self.tokens.iter().filter(|&&t| t == MASK).count()
    }

    pub fn is_complete(&self) -> bool {
        !self.tokens.contains(&MASK)
    }

    pub fn ensure_complete(&self) -> Result<(), WorldError> {
        match self.masked_count() {
            0 => Ok(()),
            masked => Err(WorldError::IncompleteGrid { masked }),
        }
    }
}

pub fn scene_to_grid(scene: &Scene) -> TokenGrid {
    let shape = scene.grid_shape();
    let mut tokens = vec![BACKGROUND; shape.cells()];
    for o in scene.objects() {
        tokens[shape.index(o.anchor)] = object_token(o.shape, o.color);
    }
    TokenGrid { width: shape.width, height: shape.height, tokens }
}

pub fn grid_to_scene(grid: &TokenGrid) -> Result<Scene, WorldError> {
    grid.ensure_complete()?;
    let shape = grid.shape();
    let objects = grid
        .tokens
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| {
            token_object(t).map(|(s, c)| {
                let Cell { col, row } = shape.cell(i);
                ObjectSpec::new(s, c, col, row)
            })
        })
        .collect();
    Scene::new(shape, objects)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_layout_is_a_bijection() {
        let mut seen = std::collections::BTreeSet::new();
        for s in Shape::ALL {
            for c in Color::ALL {
                let t = object_token(s, c);
                assert!(t != BACKGROUND && t != MASK);
                assert_eq!(token_object(t), Some((s, c)));
                seen.insert(t);
            }
        }
        assert_eq!(seen.len(), 16);
        assert_eq!(token_object(BACKGROUND), None);
        assert_eq!(token_object(MASK), None);
    }

    #[test]
    fn empty_scene_is_all_background() {
        let g = scene_to_grid(&Scene::empty(GridShape::new(4, 4)));
        assert_eq!(g.tokens(), &[BACKGROUND; 16]);
        assert!(g.is_complete());
    }

    #[test]
    fn single_object_lands_in_its_cell() {
        let s = Scene::new(GridShape::new(2, 2), vec![ObjectSpec::new(Shape::Circle, Color::Red, 0, 0)]).unwrap();
        let g = scene_to_grid(&s);
        assert_eq!(g.tokens(), &[object_token(Shape::Circle, Color::Red), BACKGROUND, BACKGROUND, BACKGROUND]);
    }

    #[test]
    fn two_objects_two_tokens() {
        let s = Scene::new(
            GridShape::new(3, 3),
            vec![
                ObjectSpec::new(Shape::Cross, Color::Green, 2, 1),
                ObjectSpec::new(Shape::Square, Color::Blue, 0, 2),
            ],
        )
        .unwrap();
        let g = scene_to_grid(&s);
        assert_eq!(g.tokens().iter().filter(|&&t| t != BACKGROUND).count(), 2);
        assert_eq!(grid_to_scene(&g).unwrap(), s);
    }

    #[test]
    fn all_background_decodes_to_empty_scene() {
        let g = TokenGrid::from_tokens(GridShape::new(3, 2), vec![BACKGROUND; 6]).unwrap();
        assert!(grid_to_scene(&g).unwrap().objects().is_empty());
    }

    #[test]
    fn masked_grid_is_incomplete() {
        let mut g = TokenGrid::from_tokens(GridShape::new(2, 2), vec![BACKGROUND; 4]).unwrap();
        g.set(3, MASK);
        assert_eq!(grid_to_scene(&g), Err(WorldError::IncompleteGrid { masked: 1 }));
    }

    #[test]
    fn grid_json_validates_tokens() {
        assert!(serde_json::from_str::<TokenGrid>(r#"{"width":1,"height":1,"tokens":[18]}"#).is_err());
        assert!(serde_json::from_str::<TokenGrid>(r#"{"width":2,"height":1,"tokens":[0]}"#).is_err());
        let g: TokenGrid = serde_json::from_str(r#"{"width":2,"height":1,"tokens":[0,5]}"#).unwrap();
        assert_eq!(g.get(1), 5);
    }
}
