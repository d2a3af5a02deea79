#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retina_mp::retina::BcGrid;

/// Dense `GJ[a][b][c][d][t]` built with the literal five-level loop and the
/// literal incoming/outgoing conditions.
pub fn naive_gj(bc_nl: &BcGrid, gj_s: f64) -> Vec<f64> {
    let (steps, kx, ky) = bc_nl.shape();
    let idx = |a: usize, b: usize, c: usize, d: usize, t: usize| {
        (((a * ky + b) * kx + c) * ky + d) * steps + t
    };
    let mut gj = vec![0.0; kx * ky * kx * ky * steps];
    for t in 0..steps {
        for x in 0..kx {
            for y in 0..ky {
                for dx in [-1i64, 0, 1] {
                    for dy in [-1i64, 0, 1] {
                        let value = bc_nl.get(t, x, y) * gj_s;
                        let (xi, yi) = (x as i64, y as i64);
                        let (nx, ny) = (xi + dx, yi + dy);
                        if !(0 <= nx && nx < kx as i64 && 0 <= ny && ny < ky as i64) {
                            continue;
                        }
                        let mut incoming = false;
                        let mut outgoing = false;
                        if (ny < yi && nx <= xi) || (ny == yi && nx < xi) {
                            incoming = true;
                        } else if (ny > yi && nx >= xi) || (ny == yi && nx > xi) {
                            outgoing = true;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if incoming {
                            gj[idx(nx, ny, x, y, t)] += value;
                        } else if outgoing {
                            gj[idx(x, y, nx, ny, t)] -= value;
                        }
                    }
                }
            }
        }
    }
    gj
}

/// `BC[x, y, t] += sum(GJ[:, :, x, y, t]) - sum(GJ[x, y, :, :, t])`.
pub fn naive_accumulate(bc: &BcGrid, gj: &[f64]) -> BcGrid {
    let (steps, kx, ky) = bc.shape();
    let idx = |a: usize, b: usize, c: usize, d: usize, t: usize| {
        (((a * ky + b) * kx + c) * ky + d) * steps + t
    };
    let mut out = bc.clone();
    for t in 0..steps {
        for x in 0..kx {
            for y in 0..ky {
                let mut inc = 0.0;
                let mut outg = 0.0;
                for a in 0..kx {
                    for b in 0..ky {
                        inc += gj[idx(a, b, x, y, t)];
                        outg += gj[idx(x, y, a, b, t)];
                    }
                }
                out.set(t, x, y, out.get(t, x, y) + (inc - outg));
            }
        }
    }
    out
}

pub fn random_grid(rng: &mut ChaCha8Rng, steps: usize, kx: usize, ky: usize) -> BcGrid {
    let data = (0..steps * kx * ky)
        .map(|_| rng.gen_range(-2.0..2.0))
        .collect();
    BcGrid::from_vec(steps, kx, ky, data).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
