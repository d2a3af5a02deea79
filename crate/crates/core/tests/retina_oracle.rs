mod common;

use common::{naive_accumulate, naive_gj, random_grid, rng};
use rand::Rng;
use retina_mp::retina::{
    accumulate_gj, bc_activations, build_gaussian_kernel, gap_junction_interactions,
    GapJunctionParams,
};
use retina_mp::stimulus::{EventVolume, Polarity};

#[test]
fn banded_tensor_matches_dense_transliteration() {
    let params = GapJunctionParams::default();
    for seed in 0..100 {
        let mut r = rng(seed);
        let (steps, kx, ky) = (r.gen_range(1..=3), r.gen_range(1..=4), r.gen_range(1..=4));
        let bc = random_grid(&mut r, steps, kx, ky);
        let dense = naive_gj(&bc, params.scaler());
        let banded = gap_junction_interactions(&bc, params);
        for a in 0..kx {
            for b in 0..ky {
                for c in 0..kx {
                    for d in 0..ky {
                        for t in 0..steps {
                            let i = (((a * ky + b) * kx + c) * ky + d) * steps + t;
                            assert_eq!(banded.get(a, b, c, d, t), dense[i], "seed {seed}");
                        }
                    }
                }
            }
        }
        assert_eq!(
            accumulate_gj(&bc, &banded).unwrap(),
            naive_accumulate(&bc, &dense)
        );
    }
}

#[test]
fn hex_neighborhood_closed_form() {
    let params = GapJunctionParams::default();
    let s = params.scaler();
    let mut r = rng(7);
    let bc = random_grid(&mut r, 2, 5, 6);
    let out = accumulate_gj(&bc, &gap_junction_interactions(&bc, params)).unwrap();
    let hex = [(-1, -1), (-1, 0), (0, -1), (0, 1), (1, 0), (1, 1)];
    for t in 0..2 {
        for x in 0..5i64 {
            for y in 0..6i64 {
                let v = bc.get(t, x as usize, y as usize);
                let mut expect = v;
                for (dx, dy) in hex {
                    let (nx, ny) = (x + dx, y + dy);
                    if (0..5).contains(&nx) && (0..6).contains(&ny) {
                        expect += s * (v - bc.get(t, nx as usize, ny as usize));
                    }
                }
                let got = out.get(t, x as usize, y as usize);
                assert!(
                    (got - expect).abs() < 1e-12,
                    "({t},{x},{y}) {got} vs {expect}"
                );
            }
        }
    }
}

#[test]
fn gaussian_kernel_brute_force() {
    let k = build_gaussian_kernel(3, 0.75).unwrap();
    let raw: Vec<f64> = (0..9)
        .map(|i| {
            let (dr, dc) = ((i / 3) as f64 - 1.0, (i % 3) as f64 - 1.0);
            (-(dr * dr + dc * dc) / (2.0 * 0.75 * 0.75)).exp()
        })
        .collect();
    let z: f64 = raw.iter().sum();
    for (i, w) in raw.iter().enumerate() {
        assert!((k.weight(i / 3, i % 3) - w / z).abs() < 1e-15);
    }
}

#[test]
fn activations_match_direct_correlation() {
    let mut r = rng(3);
    let (rows, cols, steps) = (11, 13, 3);
    let mut ev = EventVolume::zeros(steps, rows, cols, 1.0).unwrap();
    for t in 0..steps {
        for row in 0..rows {
            for col in 0..cols {
                match r.gen_range(0..6) {
                    0 => ev.set(t, Polarity::On, row, col, true),
                    1 => ev.set(t, Polarity::Off, row, col, true),
                    _ => {}
                }
            }
        }
    }
    let (ks, ko, sigma) = (4, 0.5, 1.0);
    let bc = bc_activations(&ev, ks, ko, sigma).unwrap();
    let k = build_gaussian_kernel(ks, sigma).unwrap();
    let s = 2;
    let (kx, ky) = ((rows - ks) / s + 1, (cols - ks) / s + 1);
    assert_eq!(bc.shape(), (steps, kx, ky));
    for t in 0..steps {
        for x in 0..kx {
            for y in 0..ky {
                let mut acc = 0.0;
                for i in 0..ks {
                    for j in 0..ks {
                        if ev.get(t, Polarity::On, x * s + i, y * s + j) {
                            acc += k.weight(i, j);
                        }
                    }
                }
                assert!((bc.get(t, x, y) - acc).abs() < 1e-12);
            }
        }
    }
}
