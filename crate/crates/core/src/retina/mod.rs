//! Algorithmic motion-prediction retina: receptive-field pooling of ON
//! events, biphasic temporal filtering, gap-junction exchange between
//! neighboring ganglion cells, and post-rectification.

mod gap_junction;
mod kernel;

pub use gap_junction::{
    accumulate_gj, gap_junction_interactions, gap_junction_interactions_oriented,
    post_rectification, GapJunctionParams, GjTensor, Link, Orientation,
};
pub use kernel::{
    bc_activations, bc_nonlinearities, build_biphasic_filter, build_gaussian_kernel, stride,
    window_count, BiphasicKernel, Kernel2D, SquareBiphasic, TapGenerator,
};

use crate::error::{Error, Result};
use crate::stimulus::EventVolume;

/// Real-valued activation tensor of shape `(T, kx, ky)`. `x` indexes
/// receptive fields down the frame rows, `y` across the columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BcGrid {
    steps: usize,
    kx: usize,
    ky: usize,
    data: Vec<f64>,
}

impl BcGrid {
    pub fn zeros(steps: usize, kx: usize, ky: usize) -> Result<Self> {
        if kx == 0 || ky == 0 {
            return Err(Error::param("BC grid needs kx, ky >= 1"));
        }
        Ok(Self {
            steps,
            kx,
            ky,
            data: vec![0.0; steps * kx * ky],
        })
    }

    pub fn from_vec(steps: usize, kx: usize, ky: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != steps * kx * ky {
            return Err(Error::shape(
                format!("{} values", steps * kx * ky),
                format!("{} values", data.len()),
            ));
        }
        let mut g = Self::zeros(steps, kx, ky)?;
        g.data = data;
        Ok(g)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            data: vec![0.0; self.data.len()],
            ..*self
        }
    }

    /// `(T, kx, ky)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.steps, self.kx, self.ky)
    }

    fn index(&self, t: usize, x: usize, y: usize) -> usize {
        debug_assert!(t < self.steps && x < self.kx && y < self.ky);
        (t * self.kx + x) * self.ky + y
    }

    pub fn get(&self, t: usize, x: usize, y: usize) -> f64 {
        self.data[self.index(t, x, y)]
    }

    pub fn set(&mut self, t: usize, x: usize, y: usize, v: f64) {
        let i = self.index(t, x, y);
        self.data[i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Reflects the `y` (column) axis.
    pub fn mirrored(&self) -> Self {
        let mut out = self.zeros_like();
        for t in 0..self.steps {
            for x in 0..self.kx {
                for y in 0..self.ky {
                    out.set(t, x, self.ky - 1 - y, self.get(t, x, y));
                }
            }
        }
        out
    }

    /// Sum over the grid at bin `t`, row-major.
    pub fn bin_total(&self, t: usize) -> f64 {
        let n = self.kx * self.ky;
        self.data[t * n..(t + 1) * n].iter().sum()
    }
}

/// Rectified RGC activity, `(T, kx, ky)`, non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct MpOutput(pub BcGrid);

impl MpOutput {
    pub fn grid(&self) -> &BcGrid {
        &self.0
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, t: usize, x: usize, y: usize) -> f64 {
        self.0.get(t, x, y)
    }

    pub fn mirrored(&self) -> Self {
        MpOutput(self.0.mirrored())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetinaConfig {
    /// Receptive-field side in pixels.
    pub ks: usize,
    /// Overlap fraction between neighboring fields; stride is `round(ks*ko)`.
    pub ko: f64,
    /// Gaussian width; `None` means `ks / 4`.
    pub sigma: Option<f64>,
    /// Biphasic window length in bins.
    pub f_t: usize,
    pub gap_junction: GapJunctionParams,
}

impl Default for RetinaConfig {
    fn default() -> Self {
        Self {
            ks: 4,
            ko: 0.5,
            sigma: None,
            f_t: 4,
            gap_junction: GapJunctionParams::default(),
        }
    }
}

impl RetinaConfig {
    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(self.ks as f64 / 4.0)
    }

    pub fn stride(&self) -> usize {
        stride(self.ks, self.ko)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks == 0 {
            return Err(Error::param("ks must be >= 1"));
        }
        if !(self.ko > 0.0 && self.ko <= 1.0) {
            return Err(Error::param(format!(
                "ko must be in (0, 1], got {}",
                self.ko
            )));
        }
        if !(self.sigma() > 0.0) {
            return Err(Error::param("sigma must be positive"));
        }
        if self.f_t < 2 || !self.f_t.is_multiple_of(2) {
            return Err(Error::param(format!(
                "f_t must be even and >= 2, got {}",
                self.f_t
            )));
        }
        self.gap_junction.validate()
    }
}

/// Every intermediate of one pipeline run.
#[derive(Debug, Clone)]
pub struct RetinaStages {
    pub bc: BcGrid,
    pub pos_nl: BcGrid,
    pub neg_nl: BcGrid,
    pub pos_gj: BcGrid,
    pub neg_gj: BcGrid,
    pub mp: MpOutput,
}

pub fn run_retina_pipeline(events: &EventVolume, cfg: &RetinaConfig) -> Result<MpOutput> {
    run_retina_stages(events, cfg, Orientation::Standard).map(|s| s.mp)
}

/// Pooling, temporal filtering, gap-junction exchange on both channels,
/// then rectification.
pub fn run_retina_stages(
    events: &EventVolume,
    cfg: &RetinaConfig,
    orientation: Orientation,
) -> Result<RetinaStages> {
    cfg.validate()?;
    let bc = bc_activations(events, cfg.ks, cfg.ko, cfg.sigma())?;
    let filter = build_biphasic_filter(cfg.f_t)?;
    let (pos_nl, neg_nl) = bc_nonlinearities(&bc, &filter);
    let pos_links = gap_junction_interactions_oriented(&pos_nl, cfg.gap_junction, orientation);
    let neg_links = gap_junction_interactions_oriented(&neg_nl, cfg.gap_junction, orientation);
    let pos_gj = accumulate_gj(&pos_nl, &pos_links)?;
    let neg_gj = accumulate_gj(&neg_nl, &neg_links)?;
    let mp = post_rectification(&pos_gj, &neg_gj)?;
    if let Some(bad) = mp.0.as_slice().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Invariant(format!(
            "rectified output {bad} is negative or NaN"
        )));
    }
    Ok(RetinaStages {
        bc,
        pos_nl,
        neg_nl,
        pos_gj,
        neg_gj,
        mp,
    })
}
