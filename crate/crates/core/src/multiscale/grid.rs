use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LifeError {
    #[error("grid dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("line {line}, column {column}: unexpected character {found:?}")]
    BadCharacter { line: usize, column: usize, found: char },
    #[error("pattern has no rows")]
    NoRows,
    #[error("RLE header: {0}")]
    RleHeader(String),
    #[error("RLE rule {0:?} is not B3/S23")]
    UnsupportedRule(String),
    #[error("RLE body: {0}")]
    RleBody(String),
    #[error("pattern of {pw}x{ph} does not fit a {width}x{height} grid at offset ({x}, {y})")]
    DoesNotFit { pw: usize, ph: usize, width: usize, height: usize, x: usize, y: usize },
    #[error("need at least {need} frames, got {got}")]
    TooFewFrames { got: usize, need: usize },
    #[error("frame {index} is {got:?}, expected {expected:?}")]
    FrameMismatch { index: usize, got: (usize, usize, Topology), expected: (usize, usize, Topology) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    #[default]
    Torus,
    Bounded,
}

/// A rectangular Life board. `x` is the column, `y` the row counted downward.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LifeGrid {
    width: usize,
    height: usize,
    cells: Vec<bool>,
    topology: Topology,
}

impl LifeGrid {
    pub fn new(width: usize, height: usize, topology: Topology) -> Result<Self, LifeError> {
        if width == 0 || height == 0 {
            return Err(LifeError::EmptyDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            cells: vec![false; width * height],
            topology,
        })
    }

    /// Builds a grid from rows of cells; short rows are padded with dead cells.
    pub fn from_rows(rows: &[Vec<bool>], topology: Topology) -> Result<Self, LifeError> {
        let height = rows.len();
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut g = Self::new(width, height, topology)?;
        for (y, row) in rows.iter().enumerate() {
            for (x, &alive) in row.iter().enumerate() {
                g.set(x, y, alive);
            }
        }
        Ok(g)
    }

    /// Parses plaintext: `.` dead, `#`, `O` or `*` alive, lines starting
    /// with `!` are comments.
    pub fn parse_plaintext(text: &str, topology: Topology) -> Result<Self, LifeError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.starts_with('!') {
                continue;
            }
            let mut row = Vec::with_capacity(line.len());
            for (j, ch) in line.chars().enumerate() {
                row.push(match ch {
                    '.' => false,
                    '#' | 'O' | '*' => true,
                    other => {
                        return Err(LifeError::BadCharacter {
                            line: i + 1,
                            column: j + 1,
                            found: other,
                        })
                    }
                });
            }
            rows.push(row);
        }
        while rows.last().is_some_and(|r| r.is_empty()) {
            rows.pop();
        }
        if rows.is_empty() {
            return Err(LifeError::NoRows);
        }
        Self::from_rows(&rows, topology)
    }

    /// Parses the run-length encoded pattern format. Only the standard
    /// B3/S23 rule is accepted.
    pub fn parse_rle(text: &str, topology: Topology) -> Result<Self, LifeError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or(LifeError::NoRows)?;
        let mut width = None;
        let mut height = None;
        for part in header.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| LifeError::RleHeader(format!("expected key = value in {part:?}")))?;
            let value = value.trim();
            let dim = || {
                value
                    .parse::<usize>()
                    .map_err(|_| LifeError::RleHeader(format!("bad size {value:?}")))
            };
            match key.trim() {
                "x" => width = Some(dim()?),
                "y" => height = Some(dim()?),
                "rule" => {
                    let r = value.to_ascii_uppercase();
                    if r != "B3/S23" && r != "23/3" {
                        return Err(LifeError::UnsupportedRule(value.into()));
                    }
                }
                other => return Err(LifeError::RleHeader(format!("unknown key {other:?}"))),
            }
        }
        let (width, height) = match (width, height) {
            (Some(w), Some(h)) => (w, h),
            _ => return Err(LifeError::RleHeader("missing x or y".into())),
        };
        let mut g = Self::new(width, height, topology)?;
        let (mut x, mut y) = (0usize, 0usize);
        let mut run = 0usize;
        'body: for line in lines {
            for ch in line.chars() {
                match ch {
                    '0'..='9' => run = run * 10 + ch.to_digit(10).unwrap() as usize,
                    'b' | 'o' | '$' => {
                        let n = run.max(1);
                        run = 0;
                        if ch == '$' {
                            y += n;
                            x = 0;
                            continue;
                        }
                        if x + n > width || y >= height {
                            return Err(LifeError::RleBody(format!("run past the {width}x{height} box at row {y}")));
                        }
                        if ch == 'o' {
                            for i in 0..n {
                                g.set(x + i, y, true);
                            }
                        }
                        x += n;
                    }
                    '!' => break 'body,
                    c if c.is_whitespace() => {}
                    other => return Err(LifeError::RleBody(format!("unexpected {other:?}"))),
                }
            }
        }
        Ok(g)
    }

    /// Chooses the parser from the text: RLE if the first non-comment line is
    /// an `x = ...` header, plaintext otherwise.
    pub fn parse_pattern(text: &str, topology: Topology) -> Result<Self, LifeError> {
        let first = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('!'));
        match first {
            Some(l) if l.starts_with('x') && l.contains('=') => Self::parse_rle(text, topology),
            _ => Self::parse_plaintext(text, topology),
        }
    }

    pub fn to_plaintext(&self) -> String {
        let mut s = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                s.push(if self.get(x, y) { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }

    pub fn to_rle(&self) -> String {
        let mut body = String::new();
        for y in 0..self.height {
            let mut x = 0;
            while x < self.width {
                let alive = self.get(x, y);
                let start = x;
                while x < self.width && self.get(x, y) == alive {
                    x += 1;
                }
                if alive || x < self.width {
                    let n = x - start;
                    if n > 1 {
                        let _ = write!(body, "{n}");
                    }
                    body.push(if alive { 'o' } else { 'b' });
                }
            }
            body.push(if y + 1 == self.height { '!' } else { '$' });
        }
        format!("x = {}, y = {}, rule = B3/S23\n{body}\n", self.width, self.height)
    }

    /// Copies `pattern` into a fresh `width` x `height` grid with its top-left
    /// corner at `(x, y)`.
    pub fn embed(pattern: &LifeGrid, width: usize, height: usize, x: usize, y: usize, topology: Topology) -> Result<Self, LifeError> {
        if x + pattern.width > width || y + pattern.height > height {
            return Err(LifeError::DoesNotFit {
                pw: pattern.width,
                ph: pattern.height,
                width,
                height,
                x,
                y,
            });
        }
        let mut g = Self::new(width, height, topology)?;
        for (px, py) in pattern.live_cells() {
            g.set(px + x, py + y, true);
        }
        Ok(g)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, alive: bool) {
        self.cells[y * self.width + x] = alive;
    }

    /// Cell state at a possibly out-of-range coordinate: wrapped on a torus,
    /// dead outside a bounded grid.
    pub fn get_wrapped(&self, x: i64, y: i64) -> bool {
        match self.wrap(x, y) {
            Some((x, y)) => self.get(x, y),
            None => false,
        }
    }

    pub fn wrap(&self, x: i64, y: i64) -> Option<(usize, usize)> {
        match self.topology {
            Topology::Torus => Some((
                x.rem_euclid(self.width as i64) as usize,
                y.rem_euclid(self.height as i64) as usize,
            )),
            Topology::Bounded => {
                if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
                    Some((x as usize, y as usize))
                } else {
                    None
                }
            }
        }
    }

    /// Live cells in row-major order as `(x, y)`.
    pub fn live_cells(&self) -> Vec<(usize, usize)> {
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .filter(|&(x, y)| self.get(x, y))
            .collect()
    }

    pub fn population(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn live_neighbors(&self, x: usize, y: usize) -> u8 {
        let mut n = 0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if (dx, dy) != (0, 0) && self.get_wrapped(x as i64 + dx, y as i64 + dy) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Shifts every cell by `(dx, dy)`; cells leaving a bounded grid are lost.
    pub fn translate(&self, dx: i64, dy: i64) -> Self {
        let mut out = Self {
            cells: vec![false; self.cells.len()],
            ..self.clone()
        };
        for (x, y) in self.live_cells() {
            if let Some((nx, ny)) = out.wrap(x as i64 + dx, y as i64 + dy) {
                out.set(nx, ny, true);
            }
        }
        out
    }
}

/// One generation: a live cell with two or three live neighbours survives,
/// a dead cell with exactly three becomes alive, every other cell is dead.
pub fn life_step(g: &LifeGrid) -> LifeGrid {
    let mut next = LifeGrid {
        cells: vec![false; g.cells.len()],
        ..g.clone()
    };
    for y in 0..g.height {
        for x in 0..g.width {
            let n = g.live_neighbors(x, y);
            let alive = matches!((g.get(x, y), n), (true, 2) | (true, 3) | (false, 3));
            next.set(x, y, alive);
        }
    }
    next
}

/// `g` followed by `generations` successive steps.
pub fn run(g: &LifeGrid, generations: usize) -> Vec<LifeGrid> {
    let mut frames = Vec::with_capacity(generations + 1);
    frames.push(g.clone());
    for _ in 0..generations {
        let next = life_step(frames.last().unwrap());
        frames.push(next);
    }
    frames
}

/// Standard patterns in plaintext.
pub mod patterns {
    pub const GLIDER: &str = ".#.\n..#\n###\n";
    pub const BLOCK: &str = "##\n##\n";
    pub const BLINKER: &str = "#\n#\n#\n";
}
