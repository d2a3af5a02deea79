//! Lateral gap-junction exchange between neighboring RGCs.
//!
//! Each cell classifies its 3x3 neighborhood into incoming and outgoing
//! links. With the standard orientation the classified offsets `(dx, dy)`
//! are `(-1,-1) (-1,0) (0,-1)` incoming and `(0,1) (1,0) (1,1)` outgoing:
//! six neighbors, a hexagonal lattice drawn on a rectangular index grid.
//! The interaction tensor `GJ[a, b, c, d, t]` is only non-zero for
//! `|a-c| <= 1` and `|b-d| <= 1`, so it is stored as a 9-wide band per
//! source cell instead of a dense `kx*ky*kx*ky*T` block.

use super::{BcGrid, MpOutput};
use crate::error::{Error, Result};

/// Coupling strength: `gj_s = gj_nf / gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapJunctionParams {
    pub gj_nf: f64,
    pub gamma: f64,
}

impl Default for GapJunctionParams {
    fn default() -> Self {
        Self {
            gj_nf: 0.5,
            gamma: 6.0,
        }
    }
}

impl GapJunctionParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gj_nf) {
            return Err(Error::param(format!(
                "gj_nf must be in [0, 1], got {}",
                self.gj_nf
            )));
        }
        if !(self.gamma >= 1.0) || !self.gamma.is_finite() {
            return Err(Error::param(format!(
                "gamma must be >= 1, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn scaler(&self) -> f64 {
        self.gj_nf / self.gamma
    }
}

/// Which diagonal pair of the 3x3 neighborhood is left unlinked.
/// `Mirrored` is the standard classification reflected across the
/// vertical axis, for checking direction symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Standard,
    Mirrored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Incoming,
    Outgoing,
    None,
}

impl Orientation {
    /// Classifies neighbor `(nx, ny)` relative to cell `(x, y)`.
    pub fn classify(self, x: isize, y: isize, nx: isize, ny: isize) -> Link {
        let (ny, y) = match self {
            Orientation::Standard => (ny, y),
            Orientation::Mirrored => (-ny, -y),
        };
        if (ny < y && nx <= x) || (ny == y && nx < x) {
            Link::Incoming
        } else if (ny > y && nx >= x) || (ny == y && nx > x) {
            Link::Outgoing
        } else {
            Link::None
        }
    }
}

/// Banded interaction tensor. Entry `GJ[a, b, a+dx, b+dy, t]` lives at
/// band slot `(dx+1)*3 + (dy+1)` of source cell `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GjTensor {
    steps: usize,
    kx: usize,
    ky: usize,
    band: Vec<f64>,
    params: GapJunctionParams,
}

const BAND: usize = 9;

fn slot(dx: isize, dy: isize) -> usize {
    ((dx + 1) * 3 + (dy + 1)) as usize
}

impl GjTensor {
    fn zeros(steps: usize, kx: usize, ky: usize, params: GapJunctionParams) -> Self {
        Self {
            steps,
            kx,
            ky,
            band: vec![0.0; steps * kx * ky * BAND],
            params,
        }
    }

    /// `(kx, ky, T)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.kx, self.ky, self.steps)
    }

    pub fn params(&self) -> GapJunctionParams {
        self.params
    }

    pub fn gj_s(&self) -> f64 {
        self.params.scaler()
    }

    fn base(&self, t: usize, a: usize, b: usize) -> usize {
        ((t * self.kx + a) * self.ky + b) * BAND
    }

    fn entry_mut(&mut self, a: usize, b: usize, c: usize, d: usize, t: usize) -> &mut f64 {
        let i = self.base(t, a, b) + slot(c as isize - a as isize, d as isize - b as isize);
        &mut self.band[i]
    }

    /// Dense-index view `GJ[a, b, c, d, t]`; zero outside the band.
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize, t: usize) -> f64 {
        let dx = c as isize - a as isize;
        let dy = d as isize - b as isize;
        if dx.abs() > 1 || dy.abs() > 1 {
            return 0.0;
        }
        self.band[self.base(t, a, b) + slot(dx, dy)]
    }
}

pub fn gap_junction_interactions(bc_nl: &BcGrid, params: GapJunctionParams) -> GjTensor {
    gap_junction_interactions_oriented(bc_nl, params, Orientation::Standard)
}

/// Builds the interaction tensor. Visits `(t, x, y, dx, dy)` in
/// lexicographic order; each classified in-bounds neighbor receives
/// `value = bc_nl[x, y, t] * gj_s`, added to `GJ[n, cell]` when incoming
/// and subtracted from `GJ[cell, n]` when outgoing.
pub fn gap_junction_interactions_oriented(
    bc_nl: &BcGrid,
    params: GapJunctionParams,
    orientation: Orientation,
) -> GjTensor {
    let (steps, kx, ky) = bc_nl.shape();
    let gj_s = params.scaler();
    let mut gj = GjTensor::zeros(steps, kx, ky, params);
    for t in 0..steps {
        for x in 0..kx {
            for y in 0..ky {
                let value = bc_nl.get(t, x, y) * gj_s;
                for dx in -1isize..=1 {
                    for dy in -1isize..=1 {
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if nx < 0 || ny < 0 || nx >= kx as isize || ny >= ky as isize {
                            continue;
                        }
                        let (nxu, nyu) = (nx as usize, ny as usize);
                        match orientation.classify(x as isize, y as isize, nx, ny) {
                            Link::Incoming => *gj.entry_mut(nxu, nyu, x, y, t) += value,
                            Link::Outgoing => *gj.entry_mut(x, y, nxu, nyu, t) -= value,
                            Link::None => {}
                        }
                    }
                }
            }
        }
    }
    gj
}

/// Adds `sum(GJ[:, :, x, y, t]) - sum(GJ[x, y, :, :, t])` to every cell.
/// Both sums run over source/target indices in row-major order.
pub fn accumulate_gj(bc: &BcGrid, gj: &GjTensor) -> Result<BcGrid> {
    let (steps, kx, ky) = bc.shape();
    if gj.shape() != (kx, ky, steps) {
        let (gx, gy, gt) = gj.shape();
        return Err(Error::shape(
            format!("GJ {kx}x{ky}x{kx}x{ky}x{steps}"),
            format!("GJ {gx}x{gy}x{gx}x{gy}x{gt}"),
        ));
    }
    let mut out = bc.clone();
    for t in 0..steps {
        for x in 0..kx {
            for y in 0..ky {
                let mut incoming = 0.0;
                let mut outgoing = 0.0;
                for a in x.saturating_sub(1)..=(x + 1).min(kx - 1) {
                    for b in y.saturating_sub(1)..=(y + 1).min(ky - 1) {
                        incoming += gj.get(a, b, x, y, t);
                        outgoing += gj.get(x, y, a, b, t);
                    }
                }
                out.set(t, x, y, bc.get(t, x, y) + (incoming - outgoing));
            }
        }
    }
    Ok(out)
}

/// Clamps negatives of both channels to zero and sums them.
pub fn post_rectification(pos_gj: &BcGrid, neg_gj: &BcGrid) -> Result<MpOutput> {
    if pos_gj.shape() != neg_gj.shape() {
        return Err(Error::shape(
            format!("{:?}", pos_gj.shape()),
            format!("{:?}", neg_gj.shape()),
        ));
    }
    let mut out = pos_gj.zeros_like();
    for ((o, &p), &n) in out
        .as_mut_slice()
        .iter_mut()
        .zip(pos_gj.as_slice())
        .zip(neg_gj.as_slice())
    {
        *o = p.max(0.0) + n.max(0.0);
    }
    Ok(MpOutput(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_of_offsets() {
        let s = Orientation::Standard;
        assert_eq!(s.classify(1, 1, 0, 1), Link::Incoming);
        assert_eq!(s.classify(1, 1, 2, 0), Link::None);
        assert_eq!(s.classify(1, 1, 0, 2), Link::None);
        assert_eq!(s.classify(1, 1, 1, 1), Link::None);
        assert_eq!(s.classify(1, 1, 2, 2), Link::Outgoing);
        let linked = (-1..=1)
            .flat_map(|dx| (-1..=1).map(move |dy| (dx, dy)))
            .filter(|&(dx, dy)| s.classify(0, 0, dx, dy) != Link::None)
            .count();
        assert_eq!(linked, 6);
    }

    #[test]
    fn mirrored_classification_reflects_columns() {
        for dx in -1..=1 {
            for dy in -1..=1 {
                assert_eq!(
                    Orientation::Mirrored.classify(0, 0, dx, dy) == Link::None,
                    Orientation::Standard.classify(0, 0, dx, -dy) == Link::None
                );
            }
        }
    }

    #[test]
    fn default_scaler() {
        let p = GapJunctionParams::default();
        assert!((p.scaler() - 0.5 / 6.0).abs() < 1e-15);
        assert!((p.scaler() - 0.083_333_333).abs() < 1e-9);
    }

    #[test]
    fn invalid_params() {
        assert!(GapJunctionParams {
            gj_nf: 1.5,
            gamma: 6.0
        }
        .validate()
        .is_err());
        assert!(GapJunctionParams {
            gj_nf: 0.5,
            gamma: 0.5
        }
        .validate()
        .is_err());
    }

    #[test]
    fn zero_gj_leaves_bc_unchanged() {
        let mut bc = BcGrid::zeros(2, 3, 3).unwrap();
        bc.as_mut_slice()
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = i as f64);
        let gj = gap_junction_interactions(&bc.zeros_like(), GapJunctionParams::default());
        assert_eq!(accumulate_gj(&bc, &gj).unwrap(), bc);
    }

    #[test]
    fn two_cell_hand_trace() {
        // 2x1 grid, only GJ[0,0,1,0,t] = v.
        let params = GapJunctionParams::default();
        let mut gj = GjTensor::zeros(1, 2, 1, params);
        *gj.entry_mut(0, 0, 1, 0, 0) = 0.25;
        let bc = BcGrid::zeros(1, 2, 1).unwrap();
        let out = accumulate_gj(&bc, &gj).unwrap();
        assert_eq!(out.get(0, 0, 0), -0.25);
        assert_eq!(out.get(0, 1, 0), 0.25);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let gj = gap_junction_interactions(
            &BcGrid::zeros(1, 2, 2).unwrap(),
            GapJunctionParams::default(),
        );
        assert!(accumulate_gj(&BcGrid::zeros(1, 3, 2).unwrap(), &gj).is_err());
    }

    #[test]
    fn rectification_rule() {
        let pos = BcGrid::from_vec(1, 1, 2, vec![-1.0, 2.0]).unwrap();
        let neg = BcGrid::from_vec(1, 1, 2, vec![3.0, -4.0]).unwrap();
        let mp = post_rectification(&pos, &neg).unwrap();
        assert_eq!(mp.0.as_slice(), &[3.0, 2.0]);
    }
}
