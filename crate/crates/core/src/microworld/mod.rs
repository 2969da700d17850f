//! The synthetic scene domain.
//!
//! A scene is a set of single-cell objects (shape, color) placed on a
//! `width x height` grid. Prompts, token grids and the pass/fail oracle are
//! all defined over this domain so that every downstream procedure can be
//! checked exactly.

mod oracle;
mod prompt;
mod sample;
mod task;
mod tokens;

pub use oracle::{oracle_check, CategoryVerdict, RelationOutcome, RequirementOutcome};
pub use prompt::{parse_prompt, render_prompt};
pub use sample::{sample_scene, sample_scene_on};
pub use task::{Category, Relation, RelationSpec, Requirement, TaskSpec};
pub use tokens::{
    grid_to_scene, object_token, scene_to_grid, token_object, Token, TokenGrid, BACKGROUND, CONTENT_VOCAB, MASK,
    VOCAB_SIZE,
};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Default grid edge length.
pub const DEFAULT_GRID: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("infeasible spec: {0}")]
    InfeasibleSpec(String),
    #[error("unparsable prompt at byte {offset}: {reason}")]
    UnparsablePrompt { offset: usize, reason: String },
    #[error("incomplete grid: {masked} masked token(s)")]
    IncompleteGrid { masked: usize },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Circle,
    Square,
    Triangle,
    Cross,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Circle, Shape::Square, Shape::Triangle, Shape::Cross];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Square => "square",
            Shape::Triangle => "triangle",
            Shape::Cross => "cross",
        }
    }

    pub fn plural(self) -> &'static str {
        match self {
            Shape::Circle => "circles",
            Shape::Square => "squares",
            Shape::Triangle => "triangles",
            Shape::Cross => "crosses",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Green, Color::Blue, Color::Yellow];

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Yellow => "yellow",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// RGB used for debug rendering.
    pub fn rgb(self) -> [u8; 3] {
        match self {
            Color::Red => [220, 40, 40],
            Color::Green => [40, 170, 60],
            Color::Blue => [40, 80, 220],
            Color::Yellow => [235, 200, 30],
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Grid cell, `col` in `[0, width)`, `row` in `[0, height)`. Row 0 is the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

/// Row-major ordering: top row first, then left to right.
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.row, self.col).cmp(&(other.row, other.col))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Grid dimensions in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    pub width: usize,
    pub height: usize,
}

impl GridShape {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn cells(&self) -> usize {
        self.width * self.height
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.col < self.width && cell.row < self.height
    }
}

impl Default for GridShape {
    fn default() -> Self {
        Self::new(DEFAULT_GRID, DEFAULT_GRID)
    }
}

/// One placed object. Every object occupies exactly its anchor cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub shape: Shape,
    pub color: Color,
    pub anchor: Cell,
}

impl ObjectSpec {
    pub fn new(shape: Shape, color: Color, col: usize, row: usize) -> Self {
        Self { shape, color, anchor: Cell::new(col, row) }
    }
}

#[derive(Deserialize)]
struct SceneRepr {
    width: usize,
    height: usize,
    objects: Vec<ObjectSpec>,
}

/// A set of placed objects. Objects are kept in row-major anchor order so
/// that equal sets compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SceneRepr")]
pub struct Scene {
    width: usize,
    height: usize,
    objects: Vec<ObjectSpec>,
}

impl TryFrom<SceneRepr> for Scene {
    type Error = WorldError;

    fn try_from(r: SceneRepr) -> Result<Self, Self::Error> {
        Scene::new(GridShape::new(r.width, r.height), r.objects)
    }
}

impl Scene {
    pub fn new(shape: GridShape, mut objects: Vec<ObjectSpec>) -> Result<Self, WorldError> {
        if shape.width == 0 || shape.height == 0 {
            return Err(WorldError::InvalidScene("grid must be at least 1x1".into()));
        }
        objects.sort_by_key(|o| o.anchor);
        for o in &objects {
            if !shape.contains(o.anchor) {
                return Err(WorldError::InvalidScene(format!(
                    "anchor ({}, {}) outside {}x{} grid",
                    o.anchor.col, o.anchor.row, shape.width, shape.height
                )));
            }
        }
        if let Some(w) = objects.windows(2).find(|w| w[0].anchor == w[1].anchor) {
            return Err(WorldError::InvalidScene(format!(
                "two objects share cell ({}, {})",
                w[0].anchor.col, w[0].anchor.row
            )));
        }
        Ok(Self { width: shape.width, height: shape.height, objects })
    }

    pub fn empty(shape: GridShape) -> Self {
        Self { width: shape.width, height: shape.height, objects: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn grid_shape(&self) -> GridShape {
        GridShape::new(self.width, self.height)
    }

    pub fn objects(&self) -> &[ObjectSpec] {
        &self.objects
    }

    pub fn object_at(&self, cell: Cell) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.anchor == cell)
    }

    pub fn count(&self, shape: Shape, color: Color) -> usize {
        self.objects.iter().filter(|o| o.shape == shape && o.color == color).count()
    }

    pub fn count_shape(&self, shape: Shape) -> usize {
        self.objects.iter().filter(|o| o.shape == shape).count()
    }

    /// First matching object in row-major order. Relations are evaluated
    /// between these canonical instances.
    pub fn canonical(&self, shape: Shape, color: Color) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.shape == shape && o.color == color)
    }

    /// Binary PPM (P6) debug rendering, `cell_px` pixels per cell.
    pub fn to_ppm(&self, cell_px: usize) -> Vec<u8> {
        let (w, h) = (self.width * cell_px, self.height * cell_px);
        let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
        let mut pixels = vec![245u8; w * h * 3];
        for o in &self.objects {
            let rgb = o.color.rgb();
            for dy in 0..cell_px {
                for dx in 0..cell_px {
                    if glyph_covers(o.shape, dx, dy, cell_px) {
                        let x = o.anchor.col * cell_px + dx;
                        let y = o.anchor.row * cell_px + dy;
                        pixels[(y * w + x) * 3..(y * w + x) * 3 + 3].copy_from_slice(&rgb);
                    }
                }
            }
        }
        out.extend_from_slice(&pixels);
        out
    }
}

fn glyph_covers(shape: Shape, dx: usize, dy: usize, size: usize) -> bool {
    let s = size as f64;
    let (x, y) = (dx as f64 + 0.5 - s / 2.0, dy as f64 + 0.5 - s / 2.0);
    let r = s * 0.4;
    match shape {
        Shape::Circle => x * x + y * y <= r * r,
        Shape::Square => x.abs() <= r && y.abs() <= r,
        Shape::Triangle => y <= r && y >= -r && x.abs() <= (y + r) / 2.0,
        Shape::Cross => (x.abs() <= r / 3.0 && y.abs() <= r) || (y.abs() <= r / 3.0 && x.abs() <= r),
    }
}
