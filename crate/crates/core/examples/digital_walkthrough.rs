//! Three-cell object crossing a 16x16 digital array left to right, printed
//! step by step: `#` amplified, `o` first-contact spike, `p` predicted.
//!
//! cargo run --example digital_walkthrough

use retina_mp::digital::{run, walkthrough_frames, DigitalParams};

fn main() -> retina_mp::Result<()> {
    let p = DigitalParams::default();
    let frames = walkthrough_frames(16, 6);
    let states = run(&frames, &p)?;
    for (t, s) in states.iter().enumerate() {
        println!("step {t}");
        for r in 3..12 {
            let line: String = (3..16)
                .map(|c| {
                    let a = s.amplified_spike[(r, c)];
                    if a >= p.amplified_fraction {
                        '#'
                    } else if a > 0.0 {
                        'o'
                    } else if s.prediction[(r, c)] {
                        'p'
                    } else {
                        '.'
                    }
                })
                .collect();
            println!("  {line}");
        }
    }
    Ok(())
}
