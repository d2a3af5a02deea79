//! Digital array run followed by AER readout: wire encoding, decoding and
//! a per-step event count.
//!
//! cargo run --example aer_readout

use retina_mp::aer::{aer_decode, from_bytes, of_kind, to_bytes, EventKind};
use retina_mp::cli::readout;
use retina_mp::digital::{run, walkthrough_frames, DigitalParams};

fn main() -> retina_mp::Result<()> {
    let p = DigitalParams::default();
    let states = run(&walkthrough_frames(16, 6), &p)?;
    let events = readout(&states, p.amplified_fraction);
    let wire = to_bytes(&events);
    println!("{} events, {} bytes on the wire", events.len(), wire.len());

    let back = from_bytes(&wire)?;
    assert_eq!(back, events);
    let amplified = of_kind(&back, EventKind::Amplified);
    let predicted = of_kind(&back, EventKind::Predicted);
    let maps = aer_decode(&predicted, 16, states.len())?;
    for (t, (m, s)) in maps.iter().zip(&states).enumerate() {
        assert_eq!(m, &s.prediction);
        let amp = amplified.iter().filter(|e| e.step as usize == t).count();
        let pred = predicted.iter().filter(|e| e.step as usize == t).count();
        println!("step {t}: {amp:>2} amplified, {pred:>3} predicted");
    }
    for e in amplified.iter().take(3) {
        println!("  {:?}", e);
    }
    Ok(())
}
