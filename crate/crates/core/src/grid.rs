//! Dynamic occupancy grid data model and the line-oriented `DOGM v1` frame
//! format.
//!
//! A frame file is a header line
//!
//! ```text
//! DOGM v1 <timestamp> <origin_x> <origin_y> <cell_size> <width> <height>
//! ```
//!
//! followed by `width * height` row-major cell lines
//! `<m_occ> <m_free> <vx> <vy> <cov_xx> <cov_xy> <cov_yy>`. Cell positions are
//! derived from the header and never stored. Several frames may be
//! concatenated in one stream.

use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, Vec2};

/// Default grid resolution, meters.
pub const DEFAULT_CELL_SIZE: f64 = 0.2;

const MASS_TOLERANCE: f64 = 1e-12;

/// Symmetric 2×2 velocity covariance, (m/s)².
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cov2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Cov2 {
    pub const ZERO: Cov2 = Cov2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub fn isotropic(variance: f64) -> Self {
        Self {
            xx: variance,
            xy: 0.0,
            yy: variance,
        }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CellError {
    #[error("non-finite value in cell state")]
    NonFinite,
    #[error("negative belief mass (m_occ={m_occ}, m_free={m_free})")]
    NegativeMass { m_occ: f64, m_free: f64 },
    #[error("mass constraint violated: m_occ + m_free = {m_occ} + {m_free} > 1")]
    MassConstraint { m_occ: f64, m_free: f64 },
    #[error("velocity covariance is not positive semi-definite")]
    Covariance,
}

/// State of one grid cell: Dempster-Shafer masses, center position,
/// velocity and velocity covariance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellState {
    pub m_occ: f64,
    pub m_free: f64,
    pub pos: Point2,
    pub vel: Vec2,
    pub vel_cov: Cov2,
}

impl CellState {
    /// Fully unknown cell (no mass assigned) at rest.
    pub fn unknown(pos: Point2) -> Self {
        Self {
            pos,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), CellError> {
        let values = [
            self.m_occ,
            self.m_free,
            self.vel.x,
            self.vel.y,
            self.vel_cov.xx,
            self.vel_cov.xy,
            self.vel_cov.yy,
        ];
        if values.iter().any(|v| !v.is_finite()) || !self.pos.is_finite() {
            return Err(CellError::NonFinite);
        }
        if self.m_occ < 0.0 || self.m_free < 0.0 {
            return Err(CellError::NegativeMass {
                m_occ: self.m_occ,
                m_free: self.m_free,
            });
        }
        if self.m_occ + self.m_free > 1.0 + MASS_TOLERANCE {
            return Err(CellError::MassConstraint {
                m_occ: self.m_occ,
                m_free: self.m_free,
            });
        }
        let c = self.vel_cov;
        let scale = 1.0 + c.xx.abs() * c.yy.abs();
        if c.xx < 0.0 || c.yy < 0.0 || c.det() < -1e-12 * scale {
            return Err(CellError::Covariance);
        }
        Ok(())
    }

    /// Pignistic occupancy probability: unknown mass is split evenly.
    pub fn occupancy_probability(&self) -> f64 {
        self.m_occ + 0.5 * (1.0 - self.m_occ - self.m_free)
    }

    pub fn speed(&self) -> f64 {
        self.vel.norm()
    }
}

/// Row/column address of a cell. Orders row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Placement and extent of a grid, without cell contents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub origin: Point2,
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
}

impl GridGeometry {
    pub fn cell_center(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.origin.x + col as f64 * self.cell_size,
            self.origin.y + row as f64 * self.cell_size,
        )
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inclusive index range of cells whose centers may fall inside the
    /// axis-aligned box `[lo, hi]`, clipped to the grid. `None` if disjoint.
    pub fn index_range(&self, lo: Point2, hi: Point2) -> Option<(CellIndex, CellIndex)> {
        let a = self.cell_size;
        let c0 = ((lo.x - self.origin.x) / a).ceil().max(0.0);
        let r0 = ((lo.y - self.origin.y) / a).ceil().max(0.0);
        let c1 = ((hi.x - self.origin.x) / a).floor().min(self.width as f64 - 1.0);
        let r1 = ((hi.y - self.origin.y) / a).floor().min(self.height as f64 - 1.0);
        if c1 < c0 || r1 < r0 {
            return None;
        }
        Some((
            CellIndex::new(r0 as usize, c0 as usize),
            CellIndex::new(r1 as usize, c1 as usize),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("cell ({row}, {col}) outside {height}x{width} grid")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
    #[error("expected {expected} cells, got {got}")]
    CellCount { expected: usize, got: usize },
    #[error("timestamp must be finite and non-negative, got {0}")]
    Timestamp(f64),
    #[error("cell size must be finite and positive, got {0}")]
    CellSize(f64),
    #[error("origin must be finite")]
    Origin,
    #[error("cell {index}: {source}")]
    Cell {
        index: usize,
        #[source]
        source: CellError,
    },
}

/// Timestamped snapshot of the grid. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFrame {
    timestamp: f64,
    geometry: GridGeometry,
    cells: Vec<CellState>,
}

impl GridFrame {
    /// Validates every cell and overwrites each `pos` with the center derived
    /// from the grid geometry.
    pub fn new(timestamp: f64, geometry: GridGeometry, mut cells: Vec<CellState>) -> Result<Self, GridError> {
        if !timestamp.is_finite() || timestamp < 0.0 {
            return Err(GridError::Timestamp(timestamp));
        }
        if !geometry.cell_size.is_finite() || geometry.cell_size <= 0.0 {
            return Err(GridError::CellSize(geometry.cell_size));
        }
        if !geometry.origin.is_finite() {
            return Err(GridError::Origin);
        }
        if cells.len() != geometry.len() {
            return Err(GridError::CellCount {
                expected: geometry.len(),
                got: cells.len(),
            });
        }
        for (index, cell) in cells.iter_mut().enumerate() {
            cell.pos = geometry.cell_center(index / geometry.width, index % geometry.width);
            cell.validate().map_err(|source| GridError::Cell { index, source })?;
        }
        Ok(Self {
            timestamp,
            geometry,
            cells,
        })
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn origin(&self) -> Point2 {
        self.geometry.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.geometry.cell_size
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn linear_index(&self, idx: CellIndex) -> usize {
        idx.row * self.geometry.width + idx.col
    }

    pub fn index_of(&self, linear: usize) -> CellIndex {
        CellIndex::new(linear / self.geometry.width, linear % self.geometry.width)
    }

    pub fn cell(&self, idx: CellIndex) -> Result<&CellState, GridError> {
        self.check(idx.row, idx.col)?;
        Ok(&self.cells[self.linear_index(idx)])
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Result<Point2, GridError> {
        self.check(row, col)?;
        Ok(self.geometry.cell_center(row, col))
    }

    fn check(&self, row: usize, col: usize) -> Result<(), GridError> {
        if row >= self.geometry.height || col >= self.geometry.width {
            return Err(GridError::IndexOutOfRange {
                row,
                col,
                width: self.geometry.width,
                height: self.geometry.height,
            });
        }
        Ok(())
    }

    pub fn iter_indexed(&self) -> impl Iterator<Item = (CellIndex, &CellState)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.index_of(i), c))
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: cell {cell}: malformed record: {reason}")]
    MalformedCell {
        line: usize,
        cell: usize,
        reason: String,
    },
    #[error("line {line}: cell {cell}: {source}")]
    InvalidCell {
        line: usize,
        cell: usize,
        #[source]
        source: CellError,
    },
    #[error("line {line}: truncated payload: expected {expected} cells, missing from cell {cell}")]
    Truncated {
        line: usize,
        cell: usize,
        expected: usize,
    },
    #[error("line {line}: invalid frame: {source}")]
    InvalidFrame {
        line: usize,
        #[source]
        source: GridError,
    },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

impl ParseError {
    /// 1-based line the error refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::MalformedHeader { line, .. }
            | ParseError::MalformedCell { line, .. }
            | ParseError::InvalidCell { line, .. }
            | ParseError::Truncated { line, .. }
            | ParseError::InvalidFrame { line, .. } => Some(*line),
            ParseError::Io(_) => None,
        }
    }
}

/// Appends one frame in canonical form. Floats use Rust's shortest
/// round-trip decimal formatting.
pub fn write_frame(out: &mut String, frame: &GridFrame) {
    let g = frame.geometry();
    let _ = writeln!(
        out,
        "DOGM v1 {} {} {} {} {} {}",
        frame.timestamp, g.origin.x, g.origin.y, g.cell_size, g.width, g.height
    );
    for c in frame.cells() {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            c.m_occ, c.m_free, c.vel.x, c.vel.y, c.vel_cov.xx, c.vel_cov.xy, c.vel_cov.yy
        );
    }
}

pub fn serialize_frame(frame: &GridFrame) -> String {
    let mut s = String::with_capacity(48 + frame.cells().len() * 24);
    write_frame(&mut s, frame);
    s
}

/// Parses exactly one frame.
pub fn parse_frame(text: &str) -> Result<GridFrame, ParseError> {
    let mut frames = parse_frames(text)?;
    match frames.len() {
        1 => Ok(frames.pop().unwrap()),
        n => Err(ParseError::MalformedHeader {
            line: 1,
            reason: format!("expected exactly one frame, found {n}"),
        }),
    }
}

pub fn parse_frames(text: &str) -> Result<Vec<GridFrame>, ParseError> {
    FrameReader::new(text.as_bytes()).collect()
}

/// Streaming reader over a (possibly concatenated) frame stream. Blank lines
/// between frames are skipped.
pub struct FrameReader<R> {
    input: R,
    line_no: usize,
    buf: String,
    failed: bool,
}

impl<R: BufRead> FrameReader<R> {
    pub fn new(input: R) -> Self {
        Self {
            input,
            line_no: 0,
            buf: String::new(),
            failed: false,
        }
    }

    fn next_line(&mut self) -> Result<Option<&str>, ParseError> {
        self.buf.clear();
        if self.input.read_line(&mut self.buf)? == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        Ok(Some(self.buf.trim()))
    }

    fn read_frame(&mut self) -> Result<Option<GridFrame>, ParseError> {
        let header = loop {
            match self.next_line()? {
                None => return Ok(None),
                Some("") => continue,
                Some(h) => break h.to_owned(),
            }
        };
        let header_line = self.line_no;
        let (timestamp, geometry) = parse_header(&header, header_line)?;
        let expected = geometry.len();
        let mut cells = Vec::with_capacity(expected);
        for cell in 0..expected {
            let line = match self.next_line()? {
                Some(l) => l,
                None => {
                    return Err(ParseError::Truncated {
                        line: self.line_no,
                        cell,
                        expected,
                    })
                }
            };
            if line.starts_with("DOGM") || line.is_empty() {
                return Err(ParseError::Truncated {
                    line: self.line_no,
                    cell,
                    expected,
                });
            }
            let state = parse_cell(line).map_err(|reason| ParseError::MalformedCell {
                line: self.line_no,
                cell,
                reason,
            })?;
            let state = CellState {
                pos: geometry.cell_center(cell / geometry.width.max(1), cell % geometry.width.max(1)),
                ..state
            };
            state.validate().map_err(|source| ParseError::InvalidCell {
                line: self.line_no,
                cell,
                source,
            })?;
            cells.push(state);
        }
        GridFrame::new(timestamp, geometry, cells)
            .map(Some)
            .map_err(|source| ParseError::InvalidFrame {
                line: header_line,
                source,
            })
    }
}

impl<R: BufRead> Iterator for FrameReader<R> {
    type Item = Result<GridFrame, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let r = self.read_frame();
        if r.is_err() {
            self.failed = true;
        }
        r.transpose()
    }
}

fn parse_header(line: &str, line_no: usize) -> Result<(f64, GridGeometry), ParseError> {
    let err = |reason: String| ParseError::MalformedHeader { line: line_no, reason };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 8 {
        return Err(err(format!("expected 8 fields, found {}", fields.len())));
    }
    if fields[0] != "DOGM" || fields[1] != "v1" {
        return Err(err(format!("expected `DOGM v1`, found `{} {}`", fields[0], fields[1])));
    }
    let float = |i: usize, name: &str| -> Result<f64, ParseError> {
        fields[i]
            .parse::<f64>()
            .map_err(|e| err(format!("{name}: {e}")))
    };
    let int = |i: usize, name: &str| -> Result<usize, ParseError> {
        fields[i]
            .parse::<usize>()
            .map_err(|e| err(format!("{name}: {e}")))
    };
    let timestamp = float(2, "timestamp")?;
    let geometry = GridGeometry {
        origin: Point2::new(float(3, "origin_x")?, float(4, "origin_y")?),
        cell_size: float(5, "cell_size")?,
        width: int(6, "width")?,
        height: int(7, "height")?,
    };
    if !timestamp.is_finite() || timestamp < 0.0 {
        return Err(err(format!("timestamp must be finite and non-negative, got {timestamp}")));
    }
    if !geometry.cell_size.is_finite() || geometry.cell_size <= 0.0 {
        return Err(err(format!("cell_size must be positive, got {}", geometry.cell_size)));
    }
    if !geometry.origin.is_finite() {
        return Err(err("origin must be finite".into()));
    }
    Ok((timestamp, geometry))
}

fn parse_cell(line: &str) -> Result<CellState, String> {
    let mut v = [0.0f64; 7];
    let mut it = line.split_whitespace();
    for (i, slot) in v.iter_mut().enumerate() {
        let tok = it.next().ok_or_else(|| format!("expected 7 fields, found {i}"))?;
        *slot = tok.parse::<f64>().map_err(|e| format!("field {}: {e}", i + 1))?;
    }
    if it.next().is_some() {
        return Err("expected 7 fields, found more".into());
    }
    Ok(CellState {
        m_occ: v[0],
        m_free: v[1],
        pos: Point2::ZERO,
        vel: Vec2::new(v[2], v[3]),
        vel_cov: Cov2 {
            xx: v[4],
            xy: v[5],
            yy: v[6],
        },
    })
}
