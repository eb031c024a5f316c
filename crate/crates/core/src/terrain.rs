//! Elevation ingestion and the discretized mission grid.
//!
//! A [`HeightGrid`] is the raw raster as read from disk. [`discretize`] averages
//! it into square mission cells and precomputes, for every cell, the eight
//! outgoing edges of its neighborhood with their run length and slope angle.
//!
//! Cell coordinates are `(a, b)`: `a` runs west to east, `b` runs south to
//! north. Raster row 0 is the northernmost row, as in ESRI ASCII grids.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_NODATA: f64 = -9999.0;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("cell size {cell_size_m} m is finer than the raster resolution {resolution_m} m")]
    CellTooSmall { cell_size_m: f64, resolution_m: f64 },
    #[error("raster extent does not cover a single {0} m cell")]
    NoCells(f64),
    #[error("cell ({a}, {b}) has no valid elevation samples")]
    EmptyCell { a: usize, b: usize },
    #[error("invalid synthetic terrain: {0}")]
    InvalidSynth(String),
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> TerrainError {
    TerrainError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Raw raster elevation field in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightGrid {
    pub rows: usize,
    pub cols: usize,
    pub resolution_m: f64,
    /// Lower-left corner of the raster in meters.
    pub origin: (f64, f64),
    /// Row-major, row 0 northernmost.
    pub heights: Vec<f64>,
    pub nodata: f64,
}

impl HeightGrid {
    pub fn new(
        rows: usize,
        cols: usize,
        resolution_m: f64,
        origin: (f64, f64),
        heights: Vec<f64>,
        nodata: f64,
    ) -> Result<Self, TerrainError> {
        if rows == 0 || cols == 0 {
            return Err(TerrainError::InvalidRaster(format!(
                "raster must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if !(resolution_m > 0.0 && resolution_m.is_finite()) {
            return Err(TerrainError::InvalidRaster(format!(
                "resolution must be positive, got {resolution_m}"
            )));
        }
        if heights.len() != rows * cols {
            return Err(TerrainError::InvalidRaster(format!(
                "expected {} samples, got {}",
                rows * cols,
                heights.len()
            )));
        }
        if let Some(i) = heights
            .iter()
            .position(|&h| !Self::is_nodata_value(h, nodata) && !h.is_finite())
        {
            return Err(TerrainError::InvalidRaster(format!(
                "sample at row {}, column {} is not finite",
                i / cols,
                i % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            resolution_m,
            origin,
            heights,
            nodata,
        })
    }

    fn is_nodata_value(h: f64, nodata: f64) -> bool {
        h == nodata || (nodata.is_nan() && h.is_nan())
    }

    pub fn is_nodata(&self, row: usize, col: usize) -> bool {
        Self::is_nodata_value(self.get(row, col), self.nodata)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.heights[row * self.cols + col]
    }

    pub fn with_resolution(mut self, resolution_m: f64) -> Result<Self, TerrainError> {
        if !(resolution_m > 0.0 && resolution_m.is_finite()) {
            return Err(TerrainError::InvalidRaster(format!(
                "resolution must be positive, got {resolution_m}"
            )));
        }
        self.resolution_m = resolution_m;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemFormat {
    AsciiGrid,
    CsvHeightmap,
}

pub fn load_dem(path: impl AsRef<Path>, format: DemFormat) -> Result<HeightGrid, TerrainError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TerrainError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        DemFormat::AsciiGrid => parse_ascii_grid(&text),
        DemFormat::CsvHeightmap => parse_csv_heightmap(&text, 1.0),
    }
}

const ASCII_HEADER: [&str; 6] = [
    "ncols",
    "nrows",
    "xllcorner",
    "yllcorner",
    "cellsize",
    "nodata_value",
];

/// Parses an ESRI ASCII grid with the six-line header in its canonical order.
pub fn parse_ascii_grid(text: &str) -> Result<HeightGrid, TerrainError> {
    let mut lines = text.lines().enumerate();
    let mut header = [0.0f64; 6];
    for (slot, key) in ASCII_HEADER.iter().enumerate() {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| parse_err(slot + 1, 1, format!("missing header line `{key}`")))?;
        let lineno = idx + 1;
        let mut tokens = line.split_whitespace();
        let name = tokens
            .next()
            .ok_or_else(|| parse_err(lineno, 1, format!("expected `{key}`")))?;
        if !name.eq_ignore_ascii_case(key) {
            return Err(parse_err(
                lineno,
                1,
                format!("expected header key `{key}`, found `{name}`"),
            ));
        }
        let value = tokens
            .next()
            .ok_or_else(|| parse_err(lineno, 2, format!("missing value for `{key}`")))?;
        header[slot] = value
            .parse::<f64>()
            .map_err(|_| parse_err(lineno, 2, format!("`{value}` is not a number")))?;
        if tokens.next().is_some() {
            return Err(parse_err(lineno, 3, "trailing tokens after header value"));
        }
    }
    let as_count = |v: f64, line: usize, key: &str| -> Result<usize, TerrainError> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(parse_err(line, 2, format!("`{key}` must be a positive integer")))
        }
    };
    let cols = as_count(header[0], 1, "ncols")?;
    let rows = as_count(header[1], 2, "nrows")?;
    let resolution = header[4];
    if !(resolution > 0.0) {
        return Err(parse_err(5, 2, "cellsize must be positive"));
    }
    let nodata = header[5];

    let mut heights = Vec::with_capacity(rows * cols);
    let mut row = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if row == rows {
            return Err(parse_err(lineno, 1, format!("more than {rows} data rows")));
        }
        let before = heights.len();
        for (col, tok) in line.split_whitespace().enumerate() {
            let v = tok
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, col + 1, format!("`{tok}` is not a number")))?;
            heights.push(v);
        }
        let got = heights.len() - before;
        if got != cols {
            return Err(parse_err(
                lineno,
                got.min(cols) + 1,
                format!("expected {cols} values, found {got}"),
            ));
        }
        row += 1;
    }
    if row != rows {
        return Err(parse_err(
            ASCII_HEADER.len() + row + 1,
            1,
            format!("expected {rows} data rows, found {row}"),
        ));
    }
    HeightGrid::new(rows, cols, resolution, (header[2], header[3]), heights, nodata)
}

/// Parses a header-less comma-separated heightmap, row 0 northernmost.
pub fn parse_csv_heightmap(text: &str, resolution_m: f64) -> Result<HeightGrid, TerrainError> {
    let mut heights = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let before = heights.len();
        for (col, tok) in line.split(',').enumerate() {
            let tok = tok.trim();
            let v = tok
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, col + 1, format!("`{tok}` is not a number")))?;
            heights.push(v);
        }
        let got = heights.len() - before;
        match cols {
            None => cols = Some(got),
            Some(c) if c != got => {
                return Err(parse_err(
                    lineno,
                    got.min(c) + 1,
                    format!("expected {c} values, found {got}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err(1, 1, "empty heightmap"))?;
    HeightGrid::new(rows, cols, resolution_m, (0.0, 0.0), heights, DEFAULT_NODATA)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub a: usize,
    pub b: usize,
}

impl Cell {
    pub const fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// One-epoch moves in the fixed expansion order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Stay,
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
}

impl Direction {
    pub const ALL: [Direction; 9] = [
        Direction::Stay,
        Direction::E,
        Direction::NE,
        Direction::N,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];

    pub const MOVES: [Direction; 8] = [
        Direction::E,
        Direction::NE,
        Direction::N,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];

    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::Stay => (0, 0),
            Direction::E => (1, 0),
            Direction::NE => (1, 1),
            Direction::N => (0, 1),
            Direction::NW => (-1, 1),
            Direction::W => (-1, 0),
            Direction::SW => (-1, -1),
            Direction::S => (0, -1),
            Direction::SE => (1, -1),
        }
    }

    pub fn is_diagonal(self) -> bool {
        let (da, db) = self.offset();
        da != 0 && db != 0
    }

    /// Index into the 8-slot edge arrays; `None` for `Stay`.
    pub fn slot(self) -> Option<usize> {
        Self::MOVES.iter().position(|&d| d == self)
    }

    pub fn between(from: Cell, to: Cell) -> Option<Direction> {
        let da = to.a as isize - from.a as isize;
        let db = to.b as isize - from.b as isize;
        Self::ALL.into_iter().find(|d| d.offset() == (da, db))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub to: usize,
    pub distance_m: f64,
    pub slope_deg: f64,
}

/// Discretized `A x B` mission grid. Cell index is `a * B + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    pub a_count: usize,
    pub b_count: usize,
    pub cell_size_m: f64,
    pub cell_height: Vec<f64>,
    pub traversable: Vec<bool>,
    edges: Vec<[Option<Edge>; 8]>,
}

impl CellGrid {
    pub fn from_heights(
        a_count: usize,
        b_count: usize,
        cell_size_m: f64,
        cell_height: Vec<f64>,
        traversable: Vec<bool>,
    ) -> Result<Self, TerrainError> {
        if a_count == 0 || b_count == 0 {
            return Err(TerrainError::NoCells(cell_size_m));
        }
        if !(cell_size_m > 0.0 && cell_size_m.is_finite()) {
            return Err(TerrainError::InvalidRaster(format!(
                "cell size must be positive, got {cell_size_m}"
            )));
        }
        let n = a_count * b_count;
        if cell_height.len() != n || traversable.len() != n {
            return Err(TerrainError::InvalidRaster(format!(
                "expected {n} cell heights and traversability flags"
            )));
        }
        if let Some(i) = cell_height.iter().position(|h| !h.is_finite()) {
            return Err(TerrainError::InvalidRaster(format!(
                "cell {} has non-finite height",
                i
            )));
        }
        let mut grid = Self {
            a_count,
            b_count,
            cell_size_m,
            cell_height,
            traversable,
            edges: vec![[None; 8]; n],
        };
        for idx in 0..n {
            if !grid.traversable[idx] {
                continue;
            }
            let from = grid.cell(idx);
            for (slot, dir) in Direction::MOVES.into_iter().enumerate() {
                let Some(to) = grid.step(from, dir) else { continue };
                let to_idx = grid.index(to);
                if !grid.traversable[to_idx] {
                    continue;
                }
                let distance_m = if dir.is_diagonal() {
                    cell_size_m * std::f64::consts::SQRT_2
                } else {
                    cell_size_m
                };
                let rise = grid.cell_height[to_idx] - grid.cell_height[idx];
                grid.edges[idx][slot] = Some(Edge {
                    to: to_idx,
                    distance_m,
                    slope_deg: rise.atan2(distance_m).to_degrees(),
                });
            }
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.a_count * self.b_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, cell: Cell) -> usize {
        debug_assert!(self.contains(cell));
        cell.a * self.b_count + cell.b
    }

    pub fn cell(&self, idx: usize) -> Cell {
        Cell::new(idx / self.b_count, idx % self.b_count)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.a < self.a_count && cell.b < self.b_count
    }

    pub fn step(&self, from: Cell, dir: Direction) -> Option<Cell> {
        let (da, db) = dir.offset();
        let a = from.a.checked_add_signed(da)?;
        let b = from.b.checked_add_signed(db)?;
        let to = Cell::new(a, b);
        self.contains(to).then_some(to)
    }

    pub fn height(&self, idx: usize) -> f64 {
        self.cell_height[idx]
    }

    pub fn is_traversable(&self, idx: usize) -> bool {
        self.traversable[idx]
    }

    pub fn edge(&self, from: usize, dir: Direction) -> Option<&Edge> {
        dir.slot().and_then(|s| self.edges[from][s].as_ref())
    }

    /// Outgoing edges of `from` in the fixed direction order (stay excluded).
    pub fn edges_from(&self, from: usize) -> impl Iterator<Item = (Direction, &Edge)> + '_ {
        Direction::MOVES
            .into_iter()
            .zip(self.edges[from].iter())
            .filter_map(|(d, e)| e.as_ref().map(|e| (d, e)))
    }

    /// Edge between two cells if they are 8-neighbors.
    pub fn edge_between(&self, from: usize, to: usize) -> Option<&Edge> {
        let dir = Direction::between(self.cell(from), self.cell(to))?;
        self.edge(from, dir)
    }

    /// True when `to` is reachable from `from` in one epoch (including staying).
    pub fn adjacent_or_same(&self, from: usize, to: usize) -> bool {
        from == to && self.traversable[from] || self.edge_between(from, to).is_some()
    }

    /// Euclidean distance between cell centers in meters.
    pub fn center_distance_m(&self, from: Cell, to: Cell) -> f64 {
        let da = from.a as f64 - to.a as f64;
        let db = from.b as f64 - to.b as f64;
        da.hypot(db) * self.cell_size_m
    }
}

/// Averages raster samples into square mission cells of `cell_size_m`.
///
/// A raster sample belongs to the cell containing its center. Cells with
/// fewer than half valid samples are kept but marked non-traversable.
pub fn discretize(hg: &HeightGrid, cell_size_m: f64) -> Result<CellGrid, TerrainError> {
    if !(cell_size_m.is_finite() && cell_size_m >= hg.resolution_m) {
        return Err(TerrainError::CellTooSmall {
            cell_size_m,
            resolution_m: hg.resolution_m,
        });
    }
    let extent_x = hg.cols as f64 * hg.resolution_m;
    let extent_y = hg.rows as f64 * hg.resolution_m;
    let a_count = (extent_x / cell_size_m + 1e-9).floor() as usize;
    let b_count = (extent_y / cell_size_m + 1e-9).floor() as usize;
    if a_count == 0 || b_count == 0 {
        return Err(TerrainError::NoCells(cell_size_m));
    }
    let n = a_count * b_count;
    let mut sum = vec![0.0; n];
    let mut valid = vec![0usize; n];
    let mut total = vec![0usize; n];
    for row in 0..hg.rows {
        let y = (hg.rows - row) as f64 * hg.resolution_m - 0.5 * hg.resolution_m;
        let b = (y / cell_size_m).floor() as usize;
        if b >= b_count {
            continue;
        }
        for col in 0..hg.cols {
            let x = (col as f64 + 0.5) * hg.resolution_m;
            let a = (x / cell_size_m).floor() as usize;
            if a >= a_count {
                continue;
            }
            let idx = a * b_count + b;
            total[idx] += 1;
            if !hg.is_nodata(row, col) {
                valid[idx] += 1;
                sum[idx] += hg.get(row, col);
            }
        }
    }
    let mut heights = Vec::with_capacity(n);
    let mut traversable = Vec::with_capacity(n);
    for idx in 0..n {
        if valid[idx] == 0 {
            return Err(TerrainError::EmptyCell {
                a: idx / b_count,
                b: idx % b_count,
            });
        }
        heights.push(sum[idx] / valid[idx] as f64);
        traversable.push(2 * valid[idx] >= total[idx]);
    }
    CellGrid::from_heights(a_count, b_count, cell_size_m, heights, traversable)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthKind {
    Flat,
    /// Constant rise per meter along +x (east).
    Ramp { grade: f64 },
    /// Constant rise per meter along +y (north).
    RampNorth { grade: f64 },
    /// North-south ridge through the middle column, falling linearly to 0 at the edges.
    Ridge { height: f64 },
}

pub fn synth_terrain(
    kind: SynthKind,
    a_count: usize,
    b_count: usize,
    cell_size_m: f64,
) -> Result<CellGrid, TerrainError> {
    if a_count == 0 || b_count == 0 {
        return Err(TerrainError::InvalidSynth(format!(
            "grid must be at least 1x1, got {a_count}x{b_count}"
        )));
    }
    let n = a_count * b_count;
    let heights: Vec<f64> = match kind {
        SynthKind::Flat => vec![0.0; n],
        SynthKind::Ramp { grade } | SynthKind::RampNorth { grade } if !grade.is_finite() => {
            return Err(TerrainError::InvalidSynth(format!("grade {grade} is not finite")))
        }
        SynthKind::Ramp { grade } => (0..n)
            .map(|i| grade * (i / b_count) as f64 * cell_size_m)
            .collect(),
        SynthKind::RampNorth { grade } => (0..n)
            .map(|i| grade * (i % b_count) as f64 * cell_size_m)
            .collect(),
        SynthKind::Ridge { height } if !height.is_finite() => {
            return Err(TerrainError::InvalidSynth(format!("height {height} is not finite")))
        }
        SynthKind::Ridge { height } => {
            let center = (a_count - 1) as f64 / 2.0;
            (0..n)
                .map(|i| {
                    let a = (i / b_count) as f64;
                    if center == 0.0 {
                        height
                    } else {
                        height * (1.0 - (a - center).abs() / center)
                    }
                })
                .collect()
        }
    };
    CellGrid::from_heights(a_count, b_count, cell_size_m, heights, vec![true; n])
}
