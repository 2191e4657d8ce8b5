//! Grid environment: map parsing, rooms, and the geometric queries used by
//! movement and communication (vision rings, deposit discs, line visibility).
//!
//! Cells are unit squares whose centers sit on the integer lattice; all
//! distances are Euclidean between cell centers.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

/// Grid position, `row` before `col` so the derived order is row-major.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CellCoord {
    pub row: usize,
    pub col: usize,
}

impl CellCoord {
    pub fn new(row: usize, col: usize) -> Self {
        CellCoord { row, col }
    }

    /// Squared center-to-center distance, exact in integers.
    pub fn dist2(self, other: CellCoord) -> u64 {
        let dr = self.row.abs_diff(other.row) as u64;
        let dc = self.col.abs_diff(other.col) as u64;
        dr * dr + dc * dc
    }

    /// Euclidean center-to-center distance.
    pub fn dist(self, other: CellCoord) -> f64 {
        (self.dist2(other) as f64).sqrt()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CellKind {
    Wall,
    Free,
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map text is empty")]
    Empty,
    #[error("map is not rectangular: line {line} has width {found}, expected {expected}")]
    NotRectangular {
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error("map border must be all '#': breach at row {row}, col {col}")]
    Unbordered { row: usize, col: usize },
    #[error("unknown map character {ch:?} at row {row}, col {col}")]
    UnknownChar { ch: char, row: usize, col: usize },
    #[error("map defines no rooms")]
    NoRooms,
    #[error("failed to read map file: {0}")]
    Io(#[from] std::io::Error),
}

/// Immutable occupancy grid with room labels.
///
/// Map text format: one line per row, `#` for walls, `.` for unlabeled free
/// cells (corridors), and an ASCII alphanumeric character for a free cell
/// belonging to the room of that name. The outer border must be all walls and
/// at least one room must exist.
#[derive(Clone, Debug)]
pub struct Environment {
    width: usize,
    height: usize,
    kinds: Vec<CellKind>,
    labels: Vec<Option<char>>,
    rooms: BTreeMap<char, Vec<CellCoord>>,
    free_cells: Vec<CellCoord>,
}

impl Environment {
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let mut lines: Vec<&str> = text.lines().collect();
        while lines.last().is_some_and(|l| l.is_empty()) {
            lines.pop();
        }
        if lines.is_empty() {
            return Err(MapError::Empty);
        }
        let width = lines[0].chars().count();
        let height = lines.len();
        for (i, line) in lines.iter().enumerate() {
            let w = line.chars().count();
            if w != width {
                return Err(MapError::NotRectangular {
                    line: i,
                    found: w,
                    expected: width,
                });
            }
        }

        let mut kinds = vec![CellKind::Wall; width * height];
        let mut labels = vec![None; width * height];
        let mut rooms: BTreeMap<char, Vec<CellCoord>> = BTreeMap::new();
        for (row, line) in lines.iter().enumerate() {
            for (col, ch) in line.chars().enumerate() {
                let idx = row * width + col;
                let border =
                    row == 0 || row == height - 1 || col == 0 || col == width - 1;
                match ch {
                    '#' => {}
                    '.' => {
                        if border {
                            return Err(MapError::Unbordered { row, col });
                        }
                        kinds[idx] = CellKind::Free;
                    }
                    c if c.is_ascii_alphanumeric() => {
                        if border {
                            return Err(MapError::Unbordered { row, col });
                        }
                        kinds[idx] = CellKind::Free;
                        labels[idx] = Some(c);
                        rooms.entry(c).or_default().push(CellCoord::new(row, col));
                    }
                    c => return Err(MapError::UnknownChar { ch: c, row, col }),
                }
            }
        }
        if rooms.is_empty() {
            return Err(MapError::NoRooms);
        }
        let free_cells = (0..height)
            .flat_map(|r| (0..width).map(move |c| CellCoord::new(r, c)))
            .filter(|&c| kinds[c.row * width + c.col] == CellKind::Free)
            .collect();
        Ok(Environment {
            width,
            height,
            kinds,
            labels,
            rooms,
            free_cells,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, MapError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn idx(&self, c: CellCoord) -> usize {
        c.row * self.width + c.col
    }

    pub fn in_bounds(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn kind(&self, c: CellCoord) -> CellKind {
        self.kinds[self.idx(c)]
    }

    pub fn is_free(&self, c: CellCoord) -> bool {
        self.kind(c) == CellKind::Free
    }

    /// Room label of a cell, `None` for walls and corridors.
    pub fn room(&self, c: CellCoord) -> Option<char> {
        self.labels[self.idx(c)]
    }

    pub fn rooms(&self) -> &BTreeMap<char, Vec<CellCoord>> {
        &self.rooms
    }

    /// All free cells in row-major order.
    pub fn free_cells(&self) -> &[CellCoord] {
        &self.free_cells
    }

    /// Per-cell free mask in row-major order.
    pub fn free_mask(&self) -> Vec<bool> {
        self.kinds.iter().map(|&k| k == CellKind::Free).collect()
    }

    /// Free cells on the discrete circle of the given radius around `center`:
    /// cells whose center lies within half a cell of the circle line
    /// (`|d - radius| <= 0.5`). Row-major order.
    pub fn cells_on_circumference(&self, center: CellCoord, radius: f64) -> Vec<CellCoord> {
        self.ring_cells(center, &ring_offsets(radius))
    }

    /// `cells_on_circumference` with a precomputed offset table.
    pub fn ring_cells(&self, center: CellCoord, offsets: &[(i32, i32)]) -> Vec<CellCoord> {
        let mut out = Vec::with_capacity(offsets.len());
        for &(dr, dc) in offsets {
            let row = center.row as i64 + dr as i64;
            let col = center.col as i64 + dc as i64;
            if self.in_bounds(row, col) {
                let cell = CellCoord::new(row as usize, col as usize);
                if self.is_free(cell) {
                    out.push(cell);
                }
            }
        }
        out
    }

    /// Free cells whose center-to-center distance from `center` is at most
    /// `radius`, paired with that distance. Row-major order; includes `center`
    /// itself when free.
    pub fn cells_within(&self, center: CellCoord, radius: f64) -> Vec<(CellCoord, f64)> {
        self.disc_cells(center, &disc_offsets(radius))
    }

    /// `cells_within` with a precomputed offset table.
    pub fn disc_cells(
        &self,
        center: CellCoord,
        offsets: &[(i32, i32, f64)],
    ) -> Vec<(CellCoord, f64)> {
        let mut out = Vec::with_capacity(offsets.len());
        for &(dr, dc, d) in offsets {
            let row = center.row as i64 + dr as i64;
            let col = center.col as i64 + dc as i64;
            if self.in_bounds(row, col) {
                let cell = CellCoord::new(row as usize, col as usize);
                if self.is_free(cell) {
                    out.push((cell, d));
                }
            }
        }
        out
    }

    /// True when every cell touched by the center-to-center segment is free.
    /// Both endpoints must be free. Passing exactly through a lattice corner
    /// requires all four surrounding cells to be free (no corner cutting).
    pub fn line_clear(&self, from: CellCoord, to: CellCoord) -> bool {
        debug_assert!(self.is_free(from) && self.is_free(to));
        let mut clear = true;
        supercover_visit(from, to, |cell| {
            if self.is_free(cell) {
                true
            } else {
                clear = false;
                false
            }
        });
        clear
    }
}

/// Offsets `(dr, dc)` of the discrete circle of `radius` around the origin,
/// row-major.
pub fn ring_offsets(radius: f64) -> Vec<(i32, i32)> {
    debug_assert!(radius >= 1.0);
    let lo = (radius - 0.5).max(0.0);
    let lo2 = lo * lo;
    let hi = radius + 0.5;
    let hi2 = hi * hi;
    let reach = hi.ceil() as i32;
    let mut out = Vec::new();
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            let d2 = (dr as f64) * (dr as f64) + (dc as f64) * (dc as f64);
            if d2 >= lo2 && d2 <= hi2 {
                out.push((dr, dc));
            }
        }
    }
    out
}

/// Offsets `(dr, dc, distance)` of the closed disc of `radius` around the
/// origin, row-major.
pub fn disc_offsets(radius: f64) -> Vec<(i32, i32, f64)> {
    debug_assert!(radius >= 0.0);
    let r2 = radius * radius;
    let reach = radius.ceil() as i32;
    let mut out = Vec::new();
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            let d2 = (dr as f64) * (dr as f64) + (dc as f64) * (dc as f64);
            if d2 <= r2 {
                out.push((dr, dc, d2.sqrt()));
            }
        }
    }
    out
}

/// Visits every cell whose closed unit square the segment between the two
/// cell centers touches, in order from `from` to `to`. The visitor returns
/// `false` to stop early. When the segment crosses a lattice corner exactly,
/// both side cells are visited.
pub fn supercover_visit(
    from: CellCoord,
    to: CellCoord,
    mut visit: impl FnMut(CellCoord) -> bool,
) {
    let (y0, x0) = (from.row as i64, from.col as i64);
    let (y1, x1) = (to.row as i64, to.col as i64);
    let dy = y1 - y0;
    let dx = x1 - x0;
    let ystep = dy.signum();
    let xstep = dx.signum();
    let dy = dy.abs();
    let dx = dx.abs();
    let ddy = 2 * dy;
    let ddx = 2 * dx;
    let cell = |y: i64, x: i64| CellCoord::new(y as usize, x as usize);

    if !visit(cell(y0, x0)) {
        return;
    }
    let (mut y, mut x) = (y0, x0);
    if dx >= dy {
        let mut error = dx;
        let mut errorprev = dx;
        for _ in 0..dx {
            x += xstep;
            error += ddy;
            if error > ddx {
                y += ystep;
                error -= ddx;
                let corner = error + errorprev;
                if corner < ddx {
                    if !visit(cell(y - ystep, x)) {
                        return;
                    }
                } else if corner > ddx {
                    if !visit(cell(y, x - xstep)) {
                        return;
                    }
                } else {
                    // segment passes exactly through the lattice corner
                    if !visit(cell(y - ystep, x)) || !visit(cell(y, x - xstep)) {
                        return;
                    }
                }
            }
            if !visit(cell(y, x)) {
                return;
            }
            errorprev = error;
        }
    } else {
        let mut error = dy;
        let mut errorprev = dy;
        for _ in 0..dy {
            y += ystep;
            error += ddx;
            if error > ddy {
                x += xstep;
                error -= ddy;
                let corner = error + errorprev;
                if corner < ddy {
                    if !visit(cell(y, x - xstep)) {
                        return;
                    }
                } else if corner > ddy {
                    if !visit(cell(y - ystep, x)) {
                        return;
                    }
                } else {
                    if !visit(cell(y, x - xstep)) || !visit(cell(y - ystep, x)) {
                        return;
                    }
                }
            }
            if !visit(cell(y, x)) {
                return;
            }
            errorprev = error;
        }
    }
}

/// All cells touched by the segment between the two cell centers, including
/// both endpoints, ordered from `from` to `to`.
pub fn supercover(from: CellCoord, to: CellCoord) -> Vec<CellCoord> {
    let mut out = Vec::new();
    supercover_visit(from, to, |c| {
        out.push(c);
        true
    });
    out
}

/// Cells traversed when moving between the two centers: the supercover with
/// the origin excluded and the target included. Empty for a stationary move.
pub fn path_cells(from: CellCoord, to: CellCoord) -> Vec<CellCoord> {
    if from == to {
        return Vec::new();
    }
    let mut out = supercover(from, to);
    out.remove(0);
    out
}
