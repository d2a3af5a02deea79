//! Time-stepped functional model of the digital motion-prediction array.
//!
//! Each cell carries four nodes: a stored divided spike (`vstore`, with a
//! time-to-live standing in for capacitor decay), a visited flag
//! (`spike_occurred`), a prediction flag and the RGC output
//! (`amplified_spike`). A step reads only the pre-step snapshot and
//! commits every cell at once, so results do not depend on cell order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io::{read_grid_csv, write_grid_csv};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitalParams {
    /// Divider ratio applied to the incoming spike.
    pub fraction: f64,
    /// Level the divided spike must reach to be stored.
    pub threshold: f64,
    /// Gain of the motion-selective block.
    pub amplified_fraction: f64,
    /// Cells looked ahead in each of the four directions.
    pub prediction_levels: usize,
    /// Steps a stored spike survives.
    pub vstore_ttl: u32,
    /// Steps a visited flag survives; `None` keeps it for the whole run.
    pub visit_horizon: Option<u32>,
}

impl Default for DigitalParams {
    fn default() -> Self {
        Self {
            fraction: 0.5,
            threshold: 0.5,
            amplified_fraction: 1.5,
            prediction_levels: 4,
            vstore_ttl: 2,
            visit_horizon: None,
        }
    }
}

impl DigitalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::param(format!(
                "fraction must be in (0, 1], got {}",
                self.fraction
            )));
        }
        if !self.threshold.is_finite() {
            return Err(Error::param("threshold must be finite"));
        }
        if !(self.amplified_fraction > 1.0) || !self.amplified_fraction.is_finite() {
            return Err(Error::param(format!(
                "amplified_fraction must be > 1, got {}",
                self.amplified_fraction
            )));
        }
        if self.prediction_levels == 0 {
            return Err(Error::param("prediction_levels must be >= 1"));
        }
        if self.vstore_ttl == 0 {
            return Err(Error::param("vstore_ttl must be >= 1"));
        }
        if self.visit_horizon == Some(0) {
            return Err(Error::param("visit_horizon must be >= 1 when set"));
        }
        Ok(())
    }
}

/// Divides a spike and reports whether the result is stored. The
/// comparison is inclusive.
pub fn spike_division(dvs: f64, p: &DigitalParams) -> (f64, bool) {
    let reduced = dvs * p.fraction;
    (reduced, reduced >= p.threshold)
}

/// Amplifies a present spike when any 4-neighbor holds a stored spike.
pub fn digital_ms(
    dvs: f64,
    top: f64,
    bottom: f64,
    left: f64,
    right: f64,
    p: &DigitalParams,
) -> f64 {
    if dvs > 0.0 && [top, bottom, left, right].iter().any(|&v| v > 0.0) {
        dvs * p.amplified_fraction
    } else {
        dvs
    }
}

/// Predicts a cell when any looked-ahead neighbor holds a stored spike and
/// the cell has not been visited.
pub fn predict_node(neighbor_vstores: &[f64], spike_occurred: bool) -> bool {
    !spike_occurred && neighbor_vstores.iter().any(|&v| v > 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalArrayState {
    pub vstore: Grid<f64>,
    pub vstore_ttl: Grid<u32>,
    pub spike_occurred: Grid<bool>,
    /// Remaining steps of each visited flag; unused without a horizon.
    pub visit_ttl: Grid<u32>,
    pub prediction: Grid<bool>,
    pub amplified_spike: Grid<f64>,
}

const DIRECTIONS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

impl DigitalArrayState {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            vstore: Grid::new(rows, cols),
            vstore_ttl: Grid::new(rows, cols),
            spike_occurred: Grid::new(rows, cols),
            visit_ttl: Grid::new(rows, cols),
            prediction: Grid::new(rows, cols),
            amplified_spike: Grid::new(rows, cols),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.vstore.dims()
    }

    pub fn mirrored(&self) -> Self {
        Self {
            vstore: self.vstore.mirrored(),
            vstore_ttl: self.vstore_ttl.mirrored(),
            spike_occurred: self.spike_occurred.mirrored(),
            visit_ttl: self.visit_ttl.mirrored(),
            prediction: self.prediction.mirrored(),
            amplified_spike: self.amplified_spike.mirrored(),
        }
    }

    /// Cells whose RGC output reached `level`.
    pub fn amplified_mask(&self, level: f64) -> Grid<bool> {
        self.amplified_spike.map(|&v| v > 0.0 && v >= level)
    }

    /// Checks the node-level invariants that must hold after every step.
    pub fn check_invariants(&self) -> Result<()> {
        for ((r, c, &pred), &visited) in self
            .prediction
            .iter_indexed()
            .zip(self.spike_occurred.as_slice())
        {
            if pred && visited {
                return Err(Error::Invariant(format!(
                    "cell ({r},{c}) is both predicted and visited"
                )));
            }
        }
        if let Some(v) = self.vstore.as_slice().iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Invariant(format!("negative stored spike {v}")));
        }
        Ok(())
    }
}

/// Advances the array by one DVS frame of non-negative spike magnitudes.
pub fn step(
    state: &DigitalArrayState,
    dvs: &Grid<f64>,
    p: &DigitalParams,
) -> Result<DigitalArrayState> {
    let (rows, cols) = state.dims();
    if dvs.dims() != (rows, cols) {
        return Err(Error::shape(
            format!("{rows}x{cols} frame"),
            format!("{}x{} frame", dvs.rows(), dvs.cols()),
        ));
    }
    if let Some(v) = dvs.as_slice().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::param(format!(
            "spike magnitude {v} is negative or NaN"
        )));
    }
    let prev = state;
    let mut next = prev.clone();

    // Visited flags.
    for (i, &mag) in dvs.as_slice().iter().enumerate() {
        if mag > 0.0 {
            next.spike_occurred.as_mut_slice()[i] = true;
            if let Some(h) = p.visit_horizon {
                next.visit_ttl.as_mut_slice()[i] = h;
            }
        }
    }

    // Spike division; stored values refresh their time-to-live.
    for (i, &mag) in dvs.as_slice().iter().enumerate() {
        let (reduced, store) = spike_division(mag, p);
        if store {
            next.vstore.as_mut_slice()[i] = reduced;
            next.vstore_ttl.as_mut_slice()[i] = p.vstore_ttl;
        }
    }

    // Motion-selective amplification against the pre-step stored spikes.
    for r in 0..rows {
        for c in 0..cols {
            let [top, bottom, left, right] =
                DIRECTIONS.map(|(dr, dc)| neighbor(&prev.vstore, r, c, dr, dc).unwrap_or(0.0));
            next.amplified_spike[(r, c)] = digital_ms(dvs[(r, c)], top, bottom, left, right, p);
        }
    }

    // Prediction against the post-division stored spikes.
    let mut ahead = Vec::with_capacity(4 * p.prediction_levels);
    for r in 0..rows {
        for c in 0..cols {
            ahead.clear();
            for (dr, dc) in DIRECTIONS {
                for k in 1..=p.prediction_levels as isize {
                    ahead.push(neighbor(&next.vstore, r, c, dr * k, dc * k).unwrap_or(0.0));
                }
            }
            next.prediction[(r, c)] = predict_node(&ahead, next.spike_occurred[(r, c)]);
        }
    }

    // Decay.
    for (v, ttl) in next
        .vstore
        .as_mut_slice()
        .iter_mut()
        .zip(next.vstore_ttl.as_mut_slice())
    {
        if *ttl > 0 {
            *ttl -= 1;
        }
        if *ttl == 0 {
            *v = 0.0;
        }
    }
    if p.visit_horizon.is_some() {
        for (seen, ttl) in next
            .spike_occurred
            .as_mut_slice()
            .iter_mut()
            .zip(next.visit_ttl.as_mut_slice())
        {
            if *ttl > 0 {
                *ttl -= 1;
                if *ttl == 0 {
                    *seen = false;
                }
            }
        }
    }
    Ok(next)
}

fn neighbor(g: &Grid<f64>, r: usize, c: usize, dr: isize, dc: isize) -> Option<f64> {
    g.get_signed(r as isize + dr, c as isize + dc).copied()
}

/// Runs every frame from an empty array, returning the state after each.
pub fn run(frames: &[Grid<f64>], p: &DigitalParams) -> Result<Vec<DigitalArrayState>> {
    p.validate()?;
    let Some(first) = frames.first() else {
        return Ok(Vec::new());
    };
    let mut state = DigitalArrayState::new(first.rows(), first.cols());
    let mut out = Vec::with_capacity(frames.len());
    for f in frames {
        state = step(&state, f, p)?;
        state.check_invariants()?;
        out.push(state.clone());
    }
    Ok(out)
}

pub const DUMP_FIELDS: [&str; 6] = [
    "vstore",
    "vstore_ttl",
    "spike_occurred",
    "visit_ttl",
    "prediction",
    "amplified_spike",
];

/// Writes one `<field>_<step>.csv` per state field into `dir`.
pub fn dump_state(dir: &Path, step: usize, state: &DigitalArrayState) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = |f: &str| dir.join(format!("{f}_{step}.csv"));
    write_grid_csv(&name("vstore"), &state.vstore)?;
    write_grid_csv(&name("vstore_ttl"), &state.vstore_ttl)?;
    write_grid_csv(
        &name("spike_occurred"),
        &state.spike_occurred.map(|&b| b as u8),
    )?;
    write_grid_csv(&name("visit_ttl"), &state.visit_ttl)?;
    write_grid_csv(&name("prediction"), &state.prediction.map(|&b| b as u8))?;
    write_grid_csv(&name("amplified_spike"), &state.amplified_spike)?;
    Ok(())
}

/// Inverse of [`dump_state`].
pub fn restore_state(dir: &Path, step: usize) -> Result<DigitalArrayState> {
    let name = |f: &str| dir.join(format!("{f}_{step}.csv"));
    let flag = |g: Grid<u8>| g.map(|&v| v != 0);
    let state = DigitalArrayState {
        vstore: read_grid_csv(&name("vstore"))?,
        vstore_ttl: read_grid_csv(&name("vstore_ttl"))?,
        spike_occurred: flag(read_grid_csv(&name("spike_occurred"))?),
        visit_ttl: read_grid_csv(&name("visit_ttl"))?,
        prediction: flag(read_grid_csv(&name("prediction"))?),
        amplified_spike: read_grid_csv(&name("amplified_spike"))?,
    };
    let dims = state.dims();
    let all_match = [
        state.vstore_ttl.dims(),
        state.spike_occurred.dims(),
        state.visit_ttl.dims(),
        state.prediction.dims(),
        state.amplified_spike.dims(),
    ]
    .iter()
    .all(|&d| d == dims);
    if !all_match {
        return Err(Error::format(
            dir,
            format!("state dump {step} has inconsistent grid sizes"),
        ));
    }
    Ok(state)
}

/// The left-to-right scenario of the array walkthrough: a three-cell tall
/// object (rows 6..=8) whose leading edge reaches column 7 in the second
/// frame and advances one column per frame after that.
pub fn walkthrough_frames(n: usize, frames: usize) -> Vec<Grid<f64>> {
    (0..frames)
        .map(|k| {
            let mut g = Grid::new(n, n);
            if k >= 1 {
                let col = 6 + k;
                if col < n {
                    for row in 6..=8 {
                        g[(row, col)] = 1.0;
                    }
                }
            }
            g
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_rule() {
        let p = DigitalParams::default();
        assert_eq!(spike_division(1.0, &p), (0.5, true));
        assert_eq!(spike_division(0.0, &p), (0.0, false));
        assert_eq!(spike_division(0.8, &p), (0.4, false));
    }

    #[test]
    fn ms_rule() {
        let p = DigitalParams::default();
        assert_eq!(digital_ms(1.0, 0.0, 0.0, 0.5, 0.0, &p), 1.5);
        assert_eq!(digital_ms(1.0, 0.0, 0.0, 0.0, 0.0, &p), 1.0);
        assert_eq!(digital_ms(0.0, 0.5, 0.5, 0.5, 0.5, &p), 0.0);
    }

    #[test]
    fn predict_rule() {
        let mut ahead = vec![0.0; 16];
        ahead[10] = 0.5; // third level to the left
        assert!(predict_node(&ahead, false));
        assert!(!predict_node(&[0.5; 16], true));
        assert!(!predict_node(&[0.0; 16], false));
    }

    #[test]
    fn four_level_reach() {
        let p = DigitalParams::default();
        let mut f = Grid::new(1, 9);
        f[(0, 0)] = 1.0;
        let s = step(&DigitalArrayState::new(1, 9), &f, &p).unwrap();
        let predicted: Vec<usize> = (0..9).filter(|&c| s.prediction[(0, c)]).collect();
        assert_eq!(predicted, vec![1, 2, 3, 4]);
    }

    #[test]
    fn quiescent_step_only_decays() {
        let p = DigitalParams::default();
        let empty = Grid::new(4, 4);
        let s0 = DigitalArrayState::new(4, 4);
        assert_eq!(step(&s0, &empty, &p).unwrap(), s0);

        let mut s = s0.clone();
        s.vstore[(1, 1)] = 0.5;
        s.vstore_ttl[(1, 1)] = 2;
        let next = step(&s, &empty, &p).unwrap();
        assert_eq!(next.vstore[(1, 1)], 0.5);
        assert_eq!(next.vstore_ttl[(1, 1)], 1);
        let next = step(&next, &empty, &p).unwrap();
        assert_eq!(next.vstore[(1, 1)], 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = DigitalParams::default();
        let r = step(&DigitalArrayState::new(4, 4), &Grid::new(3, 4), &p);
        assert!(matches!(r, Err(Error::ShapeMismatch { .. })));
        let mut neg = Grid::new(4, 4);
        neg[(0, 0)] = -1.0;
        assert!(step(&DigitalArrayState::new(4, 4), &neg, &p).is_err());
    }

    #[test]
    fn visit_horizon_expires_flags() {
        let p = DigitalParams {
            visit_horizon: Some(2),
            ..Default::default()
        };
        let mut f = Grid::new(1, 3);
        f[(0, 1)] = 1.0;
        let s = step(&DigitalArrayState::new(1, 3), &f, &p).unwrap();
        assert!(s.spike_occurred[(0, 1)]);
        let s = step(&s, &Grid::new(1, 3), &p).unwrap();
        assert!(!s.spike_occurred[(0, 1)]);
    }

    #[test]
    fn invalid_params_rejected() {
        for p in [
            DigitalParams {
                fraction: 0.0,
                ..Default::default()
            },
            DigitalParams {
                amplified_fraction: 1.0,
                ..Default::default()
            },
            DigitalParams {
                prediction_levels: 0,
                ..Default::default()
            },
            DigitalParams {
                vstore_ttl: 0,
                ..Default::default()
            },
        ] {
            assert!(p.validate().is_err());
        }
    }

    #[test]
    fn dump_restore_roundtrip() {
        let p = DigitalParams::default();
        let states = run(&walkthrough_frames(16, 4), &p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        dump_state(dir.path(), 3, &states[3]).unwrap();
        assert_eq!(restore_state(dir.path(), 3).unwrap(), states[3]);
    }
}
