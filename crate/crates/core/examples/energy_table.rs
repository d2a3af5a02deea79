//! Energy comparison for the reference scenario, then with full address
//! words and a larger array with extrapolated digital compute.
//!
//! cargo run --example energy_table

use retina_mp::energy::{
    estimate, format_table, DigitalScaling, EnergyConstants, Integration, Scenario,
};

fn main() -> retina_mp::Result<()> {
    let k = EnergyConstants::default();
    let reference = Scenario::default();
    println!("{}", format_table(&estimate(&reference, &k)?));

    let addressed = reference.with_address_width();
    let r = estimate(&addressed, &k)?;
    println!("{}-bit addresses:", addressed.bits_per_spike);
    for c in &r.configs {
        println!(
            "  {:<34} total {:.4} nJ, normalized {:.3}",
            c.integration.label(),
            c.total / 1e-9,
            c.normalized_total
        );
    }

    let big = Scenario {
        array_n: 16,
        n_spikes: 128,
        ..reference
    };
    let scaled = EnergyConstants {
        digital_scaling: DigitalScaling::LinearInSpikes,
        ..k
    };
    let r = estimate(&big, &scaled)?;
    println!("16x16, 128 spikes, digital compute scaled by spike count:");
    for i in Integration::ALL {
        println!("  {:<34} {:.4} nJ", i.label(), r.get(i).total / 1e-9);
    }
    Ok(())
}
