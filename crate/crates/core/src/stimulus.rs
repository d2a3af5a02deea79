//! Behavioral DVS front end: frame sequences, frame-differencing event
//! generation, and synthetic moving-object stimuli.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Default frame-differencing threshold on 8-bit intensity deltas.
pub const DEFAULT_THRESHOLD: u8 = 50;

/// Grayscale frames sharing one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Grid<u8>>,
    fps: f64,
}

impl FrameSequence {
    pub fn new(frames: Vec<Grid<u8>>, fps: f64) -> Result<Self> {
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(Error::param(format!("fps must be positive, got {fps}")));
        }
        if let Some(first) = frames.first() {
            let dims = first.dims();
            if let Some(bad) = frames.iter().find(|f| f.dims() != dims) {
                return Err(Error::shape(
                    format!("{}x{}", dims.0, dims.1),
                    format!("{}x{}", bad.rows(), bad.cols()),
                ));
            }
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[Grid<u8>] {
        &self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// `(rows, cols)`, or `(0, 0)` for an empty sequence.
    pub fn dims(&self) -> (usize, usize) {
        self.frames.first().map(Grid::dims).unwrap_or((0, 0))
    }

    pub fn mirrored(&self) -> Self {
        Self {
            frames: self.frames.iter().map(Grid::mirrored).collect(),
            fps: self.fps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    On = 0,
    Off = 1,
}

impl Polarity {
    pub fn sign(self) -> i8 {
        match self {
            Polarity::On => 1,
            Polarity::Off => -1,
        }
    }
}

/// Binary spike tensor laid out as `(T, 2, H, W)`; polarity slot 0 is ON,
/// slot 1 is OFF.
#[derive(Debug, Clone, PartialEq)]
pub struct EventVolume {
    steps: usize,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
    bin_duration: f64,
}

/// One spike, as written to event CSV files (`x` = column, `y` = row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DvsEvent {
    pub t: usize,
    pub y: usize,
    pub x: usize,
    pub polarity: Polarity,
}

impl EventVolume {
    pub fn zeros(steps: usize, rows: usize, cols: usize, bin_duration: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::param("event volume needs at least one time bin"));
        }
        Ok(Self {
            steps,
            rows,
            cols,
            data: vec![0; steps * 2 * rows * cols],
            bin_duration,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bin_duration(&self) -> f64 {
        self.bin_duration
    }

    fn offset(&self, t: usize, polarity: Polarity, row: usize, col: usize) -> usize {
        ((t * 2 + polarity as usize) * self.rows + row) * self.cols + col
    }

    pub fn get(&self, t: usize, polarity: Polarity, row: usize, col: usize) -> bool {
        self.data[self.offset(t, polarity, row, col)] != 0
    }

    /// Sets one spike, clearing the opposite polarity at that pixel.
    pub fn set(&mut self, t: usize, polarity: Polarity, row: usize, col: usize, on: bool) {
        let other = match polarity {
            Polarity::On => Polarity::Off,
            Polarity::Off => Polarity::On,
        };
        if on {
            let o = self.offset(t, other, row, col);
            self.data[o] = 0;
        }
        let i = self.offset(t, polarity, row, col);
        self.data[i] = on as u8;
    }

    /// Row-major `H × W` plane of one polarity at bin `t`.
    pub fn plane(&self, t: usize, polarity: Polarity) -> &[u8] {
        let start = self.offset(t, polarity, 0, 0);
        &self.data[start..start + self.rows * self.cols]
    }

    /// Polarity-agnostic spike map at bin `t`, as magnitudes 0.0 / 1.0.
    pub fn magnitude_frame(&self, t: usize) -> Grid<f64> {
        let on = self.plane(t, Polarity::On);
        let off = self.plane(t, Polarity::Off);
        let data = on
            .iter()
            .zip(off)
            .map(|(&a, &b)| if a | b != 0 { 1.0 } else { 0.0 })
            .collect();
        Grid::from_vec(self.rows, self.cols, data)
    }

    pub fn count(&self, polarity: Polarity) -> usize {
        (0..self.steps)
            .map(|t| self.plane(t, polarity).iter().filter(|&&v| v != 0).count())
            .sum()
    }

    pub fn total_spikes(&self) -> usize {
        self.count(Polarity::On) + self.count(Polarity::Off)
    }

    /// Events sorted by `t`, then row, then column.
    pub fn events(&self) -> Vec<DvsEvent> {
        let mut out = Vec::new();
        for t in 0..self.steps {
            for row in 0..self.rows {
                for col in 0..self.cols {
                    for polarity in [Polarity::On, Polarity::Off] {
                        if self.get(t, polarity, row, col) {
                            out.push(DvsEvent {
                                t,
                                y: row,
                                x: col,
                                polarity,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for t in 0..self.steps {
            for polarity in [Polarity::On, Polarity::Off] {
                for row in 0..self.rows {
                    for col in 0..self.cols {
                        let i = out.offset(t, polarity, row, self.cols - 1 - col);
                        out.data[i] = self.data[self.offset(t, polarity, row, col)];
                    }
                }
            }
        }
        out
    }

    /// Copy of this volume keeping only bin `t`.
    pub fn isolate_bin(&self, t: usize) -> Self {
        let mut out = Self {
            data: vec![0; self.data.len()],
            ..self.clone()
        };
        for polarity in [Polarity::On, Polarity::Off] {
            let start = self.offset(t, polarity, 0, 0);
            let n = self.rows * self.cols;
            out.data[start..start + n].copy_from_slice(&self.data[start..start + n]);
        }
        out
    }
}

/// Frame differencing: an ON spike where intensity rises by more than
/// `threshold`, an OFF spike where it falls by more than `threshold`.
pub fn frames_to_events(seq: &FrameSequence, threshold: u8) -> Result<EventVolume> {
    if seq.len() < 2 {
        return Err(Error::EmptySequence(seq.len()));
    }
    if threshold == 0 {
        return Err(Error::param("threshold must be positive"));
    }
    let (rows, cols) = seq.dims();
    let mut vol = EventVolume::zeros(seq.len() - 1, rows, cols, 1.0 / seq.fps())?;
    let thr = i16::from(threshold);
    for (t, pair) in seq.frames().windows(2).enumerate() {
        for (i, (&a, &b)) in pair[0]
            .as_slice()
            .iter()
            .zip(pair[1].as_slice())
            .enumerate()
        {
            let delta = i16::from(b) - i16::from(a);
            let (row, col) = (i / cols, i % cols);
            if delta > thr {
                vol.set(t, Polarity::On, row, col, true);
            } else if -delta > thr {
                vol.set(t, Polarity::Off, row, col, true);
            }
        }
    }
    Ok(vol)
}

/// Centered horizontal crop to a square `H × H` frame.
pub fn crop_square(seq: &FrameSequence) -> Result<FrameSequence> {
    let (rows, cols) = seq.dims();
    if cols < rows {
        return Err(Error::UnsupportedAspect {
            height: rows,
            width: cols,
        });
    }
    let left = (cols - rows) / 2;
    let frames = seq
        .frames()
        .iter()
        .map(|f| {
            let mut data = Vec::with_capacity(rows * rows);
            for r in 0..rows {
                data.extend_from_slice(&f.row(r)[left..left + rows]);
            }
            Grid::from_vec(rows, rows, data)
        })
        .collect();
    FrameSequence::new(frames, seq.fps())
}

/// Standard luma weighting for RGB to 8-bit gray.
pub fn rgb_to_luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
    TopToBottom,
    BottomToTop,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
            Direction::TopToBottom => Direction::BottomToTop,
            Direction::BottomToTop => Direction::TopToBottom,
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Direction::LeftToRight | Direction::RightToLeft)
    }

    pub fn code(self) -> &'static str {
        match self {
            Direction::LeftToRight => "l2r",
            Direction::RightToLeft => "r2l",
            Direction::TopToBottom => "t2b",
            Direction::BottomToTop => "b2t",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2r" | "left-to-right" => Ok(Direction::LeftToRight),
            "r2l" | "right-to-left" => Ok(Direction::RightToLeft),
            "t2b" | "top-to-bottom" => Ok(Direction::TopToBottom),
            "b2t" | "bottom-to-top" => Ok(Direction::BottomToTop),
            other => Err(Error::param(format!("unknown direction {other:?}"))),
        }
    }
}

/// Generated stimulus; `truncated` is set when the object left the grid
/// before the requested number of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Stimulus {
    pub frames: FrameSequence,
    pub truncated: bool,
}

const BRIGHT: u8 = 255;
const DARK: u8 = 0;
const SYNTHETIC_FPS: f64 = 60.0;

/// Position along the motion axis at frame `k`, or `None` once outside.
fn track(start: usize, speed: usize, k: usize, forward: bool, extent: usize) -> Option<usize> {
    let step = speed * k;
    if forward {
        let p = start + step;
        (p < extent).then_some(p)
    } else {
        start.checked_sub(step)
    }
}

/// One-pixel-wide bright bar on a dark background, spanning the full
/// perpendicular extent, advancing `speed` pixels per frame. `length` is
/// the number of frames.
pub fn gen_moving_bar(
    rows: usize,
    cols: usize,
    speed: usize,
    direction: Direction,
    length: usize,
) -> Result<Stimulus> {
    if speed == 0 {
        return Err(Error::param("speed must be at least 1"));
    }
    if rows == 0 || cols == 0 || length == 0 {
        return Err(Error::param("grid and length must be non-empty"));
    }
    let extent = if direction.is_horizontal() {
        cols
    } else {
        rows
    };
    let forward = matches!(direction, Direction::LeftToRight | Direction::TopToBottom);
    let start = if forward { 0 } else { extent - 1 };
    let mut truncated = false;
    let mut frames = Vec::with_capacity(length);
    for k in 0..length {
        let mut f = Grid::filled(rows, cols, DARK);
        match track(start, speed, k, forward, extent) {
            Some(p) if direction.is_horizontal() => (0..rows).for_each(|r| f[(r, p)] = BRIGHT),
            Some(p) => (0..cols).for_each(|c| f[(p, c)] = BRIGHT),
            None => truncated = true,
        }
        frames.push(f);
    }
    Ok(Stimulus {
        frames: FrameSequence::new(frames, SYNTHETIC_FPS)?,
        truncated,
    })
}

/// Dark disc on a bright background. The disc covers lattice points within
/// Euclidean distance `radius` of its center; it starts tangent to the
/// entry edge, centered on the perpendicular axis.
pub fn gen_moving_ball(
    rows: usize,
    cols: usize,
    radius: usize,
    speed: usize,
    direction: Direction,
    length: usize,
) -> Result<Stimulus> {
    if speed == 0 {
        return Err(Error::param("speed must be at least 1"));
    }
    if length == 0 || 2 * radius + 1 > rows.min(cols) {
        return Err(Error::param(format!(
            "ball of radius {radius} does not fit a {rows}x{cols} grid"
        )));
    }
    let extent = if direction.is_horizontal() {
        cols
    } else {
        rows
    };
    let forward = matches!(direction, Direction::LeftToRight | Direction::TopToBottom);
    let start = if forward { radius } else { extent - 1 - radius };
    let mut truncated = false;
    let mut frames = Vec::with_capacity(length);
    for k in 0..length {
        let mut f = Grid::filled(rows, cols, BRIGHT);
        match track(start, speed, k, forward, extent) {
            Some(p) => {
                let center = if direction.is_horizontal() {
                    (rows / 2, p)
                } else {
                    (p, cols / 2)
                };
                if !paint_disc(&mut f, center, radius) {
                    truncated = true;
                }
            }
            None => truncated = true,
        }
        frames.push(f);
    }
    Ok(Stimulus {
        frames: FrameSequence::new(frames, SYNTHETIC_FPS)?,
        truncated,
    })
}

/// Paints the disc and reports whether it was fully inside the grid.
fn paint_disc(f: &mut Grid<u8>, (cr, cc): (usize, usize), radius: usize) -> bool {
    let r = radius as isize;
    let mut inside = true;
    for dr in -r..=r {
        for dc in -r..=r {
            if dr * dr + dc * dc > r * r {
                continue;
            }
            let (row, col) = (cr as isize + dr, cc as isize + dc);
            if row >= 0 && col >= 0 && (row as usize) < f.rows() && (col as usize) < f.cols() {
                f[(row as usize, col as usize)] = DARK;
            } else {
                inside = false;
            }
        }
    }
    inside
}

/// Salt-and-pepper flicker: each pixel of each frame is independently
/// inverted with probability `prob`. Deterministic in `seed`.
pub fn add_flicker_noise(seq: &FrameSequence, prob: f64, seed: u64) -> Result<FrameSequence> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::param(format!(
            "noise probability {prob} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = seq
        .frames()
        .iter()
        .map(|f| {
            f.map(|&v| {
                if prob > 0.0 && rng.gen_bool(prob) {
                    255 - v
                } else {
                    v
                }
            })
        })
        .collect();
    FrameSequence::new(frames, seq.fps())
}
