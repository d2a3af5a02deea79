//! Dark ball through the retina model. Only brightening (ON) events are
//! pooled, so activity follows the trailing edge; prints that edge and
//! the peak RGC column per bin, then writes heatmaps.
//!
//! cargo run --example retina_pipeline -- [out_dir]

use std::path::PathBuf;

use retina_mp::io::write_heatmaps;
use retina_mp::retina::{run_retina_stages, Orientation, RetinaConfig};
use retina_mp::stimulus::{frames_to_events, gen_moving_ball, Direction};

fn main() -> retina_mp::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("retina_pipeline"));
    let (size, radius, speed) = (64, 6, 2);
    let stim = gen_moving_ball(size, size, radius, speed, Direction::LeftToRight, 20)?;
    let events = frames_to_events(&stim.frames, 50)?;

    let cfg = RetinaConfig::default();
    let stages = run_retina_stages(&events, &cfg, Orientation::Standard)?;
    let (steps, kx, ky) = stages.mp.shape();
    println!("RGC grid {kx}x{ky}, stride {}, {steps} bins", cfg.stride());
    println!("bin  on_edge  peak_col  peak");
    for t in 0..steps {
        let mut best = (0, 0.0);
        for y in 0..ky {
            let col: f64 = (0..kx).map(|x| stages.mp.get(t, x, y)).sum();
            if col > best.1 {
                best = (y, col);
            }
        }
        let edge = speed * (t + 1);
        let peak_px = best.0 * cfg.stride() + cfg.ks / 2;
        println!("{t:>3}  {edge:>7}  {peak_px:>8}  {:.4}", best.1);
    }
    let files = write_heatmaps(&out, &stages.mp)?;
    println!("{} heatmaps in {}", files.len(), out.display());
    Ok(())
}
