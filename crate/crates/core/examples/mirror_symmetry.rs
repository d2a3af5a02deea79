//! Runs a stimulus and its horizontal mirror through both models and
//! reports which stages come out as exact mirror images.
//!
//! cargo run --example mirror_symmetry

use retina_mp::digital::{run, DigitalParams};
use retina_mp::retina::{run_retina_stages, BcGrid, Orientation, RetinaConfig};
use retina_mp::stimulus::{frames_to_events, gen_moving_ball, Direction};
use retina_mp::Grid;

fn gap(a: &BcGrid, b: &BcGrid) -> f64 {
    a.mirrored()
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn main() -> retina_mp::Result<()> {
    let stim = gen_moving_ball(64, 64, 6, 2, Direction::LeftToRight, 21)?;
    let ev = frames_to_events(&stim.frames, 50)?;
    let ev_m = frames_to_events(&stim.frames.mirrored(), 50)?;
    let cfg = RetinaConfig::default();
    let a = run_retina_stages(&ev, &cfg, Orientation::Standard)?;
    let b = run_retina_stages(&ev_m, &cfg, Orientation::Standard)?;
    println!(
        "BC activations     max mirror gap {:.3e}",
        gap(&a.bc, &b.bc)
    );
    println!(
        "nonlinearities     max mirror gap {:.3e}",
        gap(&a.pos_nl, &b.pos_nl)
    );
    println!(
        "gap junctions      max mirror gap {:.3e}",
        gap(&a.pos_gj, &b.pos_gj)
    );
    println!(
        "rectified output   max mirror gap {:.3e}",
        gap(&a.mp.0, &b.mp.0)
    );

    let c = run_retina_stages(&ev_m, &cfg, Orientation::Mirrored)?;
    println!(
        "mirrored lattice   max mirror gap {:.3e}",
        gap(&a.mp.0, &c.mp.0)
    );

    let frames: Vec<Grid<f64>> = (0..ev.steps()).map(|t| ev.magnitude_frame(t)).collect();
    let frames_m: Vec<Grid<f64>> = frames.iter().map(Grid::mirrored).collect();
    let p = DigitalParams::default();
    let da = run(&frames, &p)?;
    let db = run(&frames_m, &p)?;
    let exact = da.iter().zip(&db).all(|(x, y)| &x.mirrored() == y);
    println!(
        "digital array      {} steps, exact mirror: {exact}",
        da.len()
    );
    Ok(())
}
