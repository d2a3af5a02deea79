//! Spatial receptive-field pooling and the temporal biphasic filter.

use super::BcGrid;
use crate::error::{Error, Result};
use crate::stimulus::{EventVolume, Polarity};

/// Square, radially symmetric pooling kernel normalized to unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.size + col]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Sampled 2-D Gaussian centered on the kernel center (a half-pixel offset
/// for even sizes), normalized to sum 1.
pub fn build_gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel2D> {
    if size == 0 {
        return Err(Error::param("kernel size must be at least 1"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("sigma must be positive, got {sigma}")));
    }
    let center = (size as f64 - 1.0) / 2.0;
    let denom = 2.0 * sigma * sigma;
    let mut weights = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let di = i as f64 - center;
            let dj = j as f64 - center;
            weights.push((-(di * di + dj * dj) / denom).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(Kernel2D { size, weights })
}

/// Receptive-field stride `round(ks * ko)`, clamped to at least one pixel.
/// Halves round to even.
pub fn stride(ks: usize, ko: f64) -> usize {
    ((ks as f64 * ko).round_ties_even() as usize).max(1)
}

/// Number of valid (unpadded) windows of `ks` at stride `s` along `extent`.
pub fn window_count(extent: usize, ks: usize, s: usize) -> usize {
    (extent - ks) / s + 1
}

/// Correlates each bin's ON-polarity plane with a Gaussian receptive field
/// at stride `round(ks * ko)`, valid windows only.
pub fn bc_activations(events: &EventVolume, ks: usize, ko: f64, sigma: f64) -> Result<BcGrid> {
    if !(ko > 0.0 && ko <= 1.0) {
        return Err(Error::param(format!(
            "overlap ko must be in (0, 1], got {ko}"
        )));
    }
    let (rows, cols) = (events.rows(), events.cols());
    if ks > rows || ks > cols {
        return Err(Error::param(format!(
            "kernel size {ks} exceeds frame {rows}x{cols}"
        )));
    }
    let kernel = build_gaussian_kernel(ks, sigma)?;
    let s = stride(ks, ko);
    let kx = window_count(rows, ks, s);
    let ky = window_count(cols, ks, s);
    let mut bc = BcGrid::zeros(events.steps(), kx, ky)?;
    for t in 0..events.steps() {
        let plane = events.plane(t, Polarity::On);
        for x in 0..kx {
            for y in 0..ky {
                let v = correlate_window(&kernel, plane, cols, x * s, y * s);
                bc.set(t, x, y, v);
            }
        }
    }
    Ok(bc)
}

/// Window sum with columns `j` and `ks-1-j` added as a pair before joining
/// the running total, so a horizontally mirrored input gives bit-identical
/// results.
fn correlate_window(k: &Kernel2D, plane: &[u8], cols: usize, r0: usize, c0: usize) -> f64 {
    let ks = k.size();
    let mut acc = 0.0;
    for i in 0..ks {
        let row = &plane[(r0 + i) * cols + c0..(r0 + i) * cols + c0 + ks];
        for j in 0..ks / 2 {
            let a = k.weight(i, j) * f64::from(row[j]);
            let b = k.weight(i, ks - 1 - j) * f64::from(row[ks - 1 - j]);
            acc += a + b;
        }
        if ks % 2 == 1 {
            acc += k.weight(i, ks / 2) * f64::from(row[ks / 2]);
        }
    }
    acc
}

/// Temporal filter with a positive (pass) lobe followed by an equal negative
/// (refractory) lobe. Taps are in impulse-response order: tap 0 weights the
/// current bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BiphasicKernel {
    taps: Vec<f64>,
}

/// Source of biphasic tap values for a given window length.
pub trait TapGenerator {
    fn taps(&self, window: usize) -> Vec<f64>;
}

/// Equal-magnitude square lobes: `+2/f_t` for the first half, `-2/f_t` for
/// the second.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquareBiphasic;

impl TapGenerator for SquareBiphasic {
    fn taps(&self, window: usize) -> Vec<f64> {
        let h = 2.0 / window as f64;
        let half = window / 2;
        std::iter::repeat_n(h, half)
            .chain(std::iter::repeat_n(-h, half))
            .collect()
    }
}

const TAP_SUM_TOL: f64 = 1e-9;

impl BiphasicKernel {
    /// Validates lobe signs and the zero-sum constraint.
    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        let n = taps.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::param(format!(
                "biphasic window must be even and >= 2, got {n}"
            )));
        }
        let (pos, neg) = taps.split_at(n / 2);
        if !pos.iter().all(|&v| v > 0.0) || !neg.iter().all(|&v| v < 0.0) {
            return Err(Error::param("biphasic taps must be positive then negative"));
        }
        let sum: f64 = taps.iter().sum();
        if sum.abs() > TAP_SUM_TOL {
            return Err(Error::param(format!(
                "biphasic taps sum to {sum}, expected 0"
            )));
        }
        Ok(Self { taps })
    }

    pub fn generate(generator: &impl TapGenerator, window: usize) -> Result<Self> {
        if window < 2 || !window.is_multiple_of(2) {
            return Err(Error::param(format!(
                "biphasic window must be even and >= 2, got {window}"
            )));
        }
        Self::from_taps(generator.taps(window))
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn window(&self) -> usize {
        self.taps.len()
    }

    pub fn negated(&self) -> Self {
        Self {
            taps: self.taps.iter().map(|v| -v).collect(),
        }
    }
}

pub fn build_biphasic_filter(window: usize) -> Result<BiphasicKernel> {
    BiphasicKernel::generate(&SquareBiphasic, window)
}

/// Causal temporal convolution of every BC trace with the filter (`pos`)
/// and with the negated filter (`neg`). Output bin `t` reads input bins
/// `t-f_t+1 ..= t`; bins before 0 count as zero.
pub fn bc_nonlinearities(bc: &BcGrid, filter: &BiphasicKernel) -> (BcGrid, BcGrid) {
    let pos = temporal_convolve(bc, filter);
    let neg = temporal_convolve(bc, &filter.negated());
    (pos, neg)
}

fn temporal_convolve(bc: &BcGrid, filter: &BiphasicKernel) -> BcGrid {
    let (steps, kx, ky) = bc.shape();
    let mut out = bc.zeros_like();
    for x in 0..kx {
        for y in 0..ky {
            for t in 0..steps {
                let mut acc = 0.0;
                for (k, &tap) in filter.taps().iter().enumerate().take(t + 1) {
                    acc += tap * bc.get(t - k, x, y);
                }
                out.set(t, x, y, acc);
            }
        }
    }
    out
}
