//! Writes a short synthetic clip as PGM frames, reads it back and converts
//! it to DVS events.
//!
//! cargo run --example convert_frames -- [out_dir]

use std::path::PathBuf;

use retina_mp::io::{read_frame_dir, write_events_csv, write_pgm};
use retina_mp::stimulus::{
    frames_to_events, gen_moving_bar, Direction, Polarity, DEFAULT_THRESHOLD,
};

fn main() -> retina_mp::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("convert_frames"));
    let frames_dir = out.join("frames");
    std::fs::create_dir_all(&frames_dir).expect("create output directory");

    let clip = gen_moving_bar(24, 32, 2, Direction::LeftToRight, 10)?;
    for (i, f) in clip.frames.frames().iter().enumerate() {
        write_pgm(&frames_dir.join(format!("frame_{i:03}.pgm")), f)?;
    }

    let seq = read_frame_dir(&frames_dir, 30.0)?;
    let events = frames_to_events(&seq, DEFAULT_THRESHOLD)?;
    println!(
        "{} frames -> {} bins, {} ON, {} OFF",
        seq.len(),
        events.steps(),
        events.count(Polarity::On),
        events.count(Polarity::Off)
    );
    for e in events.events().iter().take(4) {
        println!("  t={} x={} y={} {:?}", e.t, e.x, e.y, e.polarity);
    }
    let csv = out.join("events.csv");
    write_events_csv(&csv, &events)?;
    println!("wrote {}", csv.display());
    Ok(())
}
