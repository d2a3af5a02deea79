//! Closed-form energy accounting for three sensor/compute integration
//! options: DVS chip plus digital MP logic on a PCB (LVDS link), DVS plus
//! a 3D-stacked mixed-signal MP array, and DVS plus a 3D-stacked digital
//! MP array.
//!
//! All quantities are in joules. Readout energy is spikes times bits per
//! spike times the per-bit link cost. DVS static and event-generation
//! energy are reported alongside but never enter the MP totals.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const PJ: f64 = 1e-12;
const NJ: f64 = 1e-9;

/// How the measured digital compute energy carries over to other scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DigitalScaling {
    /// The measured reference value, whatever the scenario.
    #[default]
    Constant,
    /// Extrapolation: reference value times `n_spikes / reference_spikes`.
    LinearInSpikes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConstants {
    /// Mixed-signal array energy per MP event.
    pub mp_event_energy_mixed: f64,
    /// Per-event mixed-signal energy used instead of the one above when
    /// set; defaults to the measured 0.519 nJ spread over 28 events.
    pub mixed_event_override: Option<f64>,
    /// Digital MP compute energy measured on the reference scenario.
    pub digital_compute: f64,
    pub digital_scaling: DigitalScaling,
    /// Spike count of the scenario the measured values come from.
    pub reference_spikes: u64,
    pub lvds_per_bit: f64,
    pub die3d_per_bit: f64,
    /// DVS static energy per millisecond of simulated time.
    pub dvs_static_per_ms: f64,
    /// DVS bipolar-signal generation energy per event.
    pub bipolar_gen: f64,
    /// DVS bias energy per microsecond of spike activity.
    pub bias: f64,
}

impl Default for EnergyConstants {
    fn default() -> Self {
        Self {
            mp_event_energy_mixed: 18.56e-12,
            mixed_event_override: Some(0.519e-9 / 28.0),
            digital_compute: 2.24e-9,
            digital_scaling: DigitalScaling::Constant,
            reference_spikes: 28,
            lvds_per_bit: 12.34e-12,
            die3d_per_bit: 176.2e-15,
            dvs_static_per_ms: 15.68e-9,
            bipolar_gen: 1.34e-12,
            bias: 0.32e-12,
        }
    }
}

impl EnergyConstants {
    /// Same constants without the mixed-signal override, so mixed compute
    /// is exactly `n_spikes * 18.56 pJ`.
    pub fn per_event_only() -> Self {
        Self {
            mixed_event_override: None,
            ..Self::default()
        }
    }

    pub fn mixed_event_energy(&self) -> f64 {
        self.mixed_event_override
            .unwrap_or(self.mp_event_energy_mixed)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("mp_event_energy_mixed", self.mp_event_energy_mixed),
            ("digital_compute", self.digital_compute),
            ("lvds_per_bit", self.lvds_per_bit),
            ("die3d_per_bit", self.die3d_per_bit),
            ("dvs_static_per_ms", self.dvs_static_per_ms),
            ("bipolar_gen", self.bipolar_gen),
            ("bias", self.bias),
        ];
        for (name, v) in named {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!(
                    "energy constant {name} must be positive, got {v}"
                )));
            }
        }
        if let Some(v) = self.mixed_event_override {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!(
                    "mixed_event_override must be positive, got {v}"
                )));
            }
        }
        if self.reference_spikes == 0 {
            return Err(Error::param("reference_spikes must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Cells per side of the MP array.
    pub array_n: usize,
    pub n_spikes: u64,
    /// Seconds.
    pub spike_duration: f64,
    /// Seconds.
    pub sim_duration: f64,
    pub bits_per_spike: u32,
}

impl Default for Scenario {
    /// 7x7 array, 28 spikes of 1 us each over 1 ms, one bit per spike.
    fn default() -> Self {
        Self {
            array_n: 7,
            n_spikes: 28,
            spike_duration: 1e-6,
            sim_duration: 1e-3,
            bits_per_spike: 1,
        }
    }
}

impl Scenario {
    /// Bits needed to carry a full `(row, col)` address for an `n × n` array.
    pub fn address_width_bits(array_n: usize) -> u32 {
        let cells = (array_n * array_n).max(2) as u64;
        64 - (cells - 1).leading_zeros()
    }

    pub fn with_address_width(self) -> Self {
        Self {
            bits_per_spike: Self::address_width_bits(self.array_n),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.array_n == 0 {
            return Err(Error::param("array_n must be >= 1"));
        }
        if self.bits_per_spike == 0 {
            return Err(Error::param("bits_per_spike must be >= 1"));
        }
        if !(self.spike_duration > 0.0) || !(self.sim_duration > 0.0) {
            return Err(Error::param("durations must be positive"));
        }
        Ok(())
    }

    pub fn total_bits(&self) -> f64 {
        self.n_spikes as f64 * f64::from(self.bits_per_spike)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integration {
    PcbDigital,
    Mixed3d,
    Digital3d,
}

impl Integration {
    pub const ALL: [Integration; 3] = [
        Integration::PcbDigital,
        Integration::Mixed3d,
        Integration::Digital3d,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Integration::PcbDigital => "DVS Chip + Digital MP",
            Integration::Mixed3d => "DVS Chip + Mixed Signal MP (3D)",
            Integration::Digital3d => "DVS Chip + Digital MP (3D)",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Integration::PcbDigital => "pcb_digital",
            Integration::Mixed3d => "mixed_3d",
            Integration::Digital3d => "digital_3d",
        }
    }

    fn per_bit(self, k: &EnergyConstants) -> f64 {
        match self {
            Integration::PcbDigital => k.lvds_per_bit,
            Integration::Mixed3d | Integration::Digital3d => k.die3d_per_bit,
        }
    }

    fn compute(self, s: &Scenario, k: &EnergyConstants) -> f64 {
        match self {
            Integration::Mixed3d => s.n_spikes as f64 * k.mixed_event_energy(),
            Integration::PcbDigital | Integration::Digital3d => match k.digital_scaling {
                DigitalScaling::Constant => k.digital_compute,
                DigitalScaling::LinearInSpikes => {
                    k.digital_compute * s.n_spikes as f64 / k.reference_spikes as f64
                }
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigEnergy {
    pub integration: Integration,
    pub compute: f64,
    pub readout: f64,
    pub total: f64,
    /// `total / total(PcbDigital)`.
    pub normalized_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub scenario: Scenario,
    pub configs: [ConfigEnergy; 3],
    /// Informational, excluded from totals.
    pub dvs_static: f64,
    /// Informational, excluded from totals.
    pub dvs_event_gen: f64,
    /// Informational, excluded from totals.
    pub dvs_bias: f64,
}

impl EnergyReport {
    pub fn get(&self, integration: Integration) -> &ConfigEnergy {
        self.configs
            .iter()
            .find(|c| c.integration == integration)
            .expect("every integration is reported")
    }
}

pub fn estimate(scenario: &Scenario, k: &EnergyConstants) -> Result<EnergyReport> {
    scenario.validate()?;
    k.validate()?;
    let raw = Integration::ALL.map(|integration| {
        let compute = integration.compute(scenario, k);
        let readout = scenario.total_bits() * integration.per_bit(k);
        (integration, compute, readout, compute + readout)
    });
    let baseline = raw[0].3;
    if baseline == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    let configs = raw.map(|(integration, compute, readout, total)| ConfigEnergy {
        integration,
        compute,
        readout,
        total,
        normalized_total: total / baseline,
    });
    Ok(EnergyReport {
        scenario: *scenario,
        configs,
        dvs_static: k.dvs_static_per_ms * scenario.sim_duration / 1e-3,
        dvs_event_gen: scenario.n_spikes as f64 * k.bipolar_gen,
        dvs_bias: k.bias * scenario.n_spikes as f64 * scenario.spike_duration / 1e-6,
    })
}

fn nj(v: f64) -> String {
    format!("{:.4} nJ", v / NJ)
}

fn pj(v: f64) -> String {
    format!("{:.4} pJ", v / PJ)
}

/// Aligned text grid, one column per integration option.
pub fn format_table(r: &EnergyReport) -> String {
    let head: Vec<String> = std::iter::once("Energy Type".to_string())
        .chain(r.configs.iter().map(|c| c.integration.label().to_string()))
        .collect();
    let rows: Vec<Vec<String>> = vec![
        head,
        row("MP Compute Energy", r, |c| nj(c.compute)),
        row("MP Readout Energy", r, |c| pj(c.readout)),
        row("MP Total Energy", r, |c| nj(c.total)),
        row("Normalized MP Total Energy", r, |c| {
            format!("{:.3}", c.normalized_total)
        }),
    ];
    let widths: Vec<usize> = (0..4)
        .map(|i| rows.iter().map(|row| row[i].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (n, cells) in rows.iter().enumerate() {
        let line: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        out.push_str(line.join(" | ").trim_end());
        out.push('\n');
        if n == 0 {
            let total: usize = widths.iter().sum::<usize>() + 3 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    let s = &r.scenario;
    let _ = writeln!(
        out,
        "\nscenario: {n}x{n} array, {sp} spikes x {b} bit, {d} s spikes over {w} s",
        n = s.array_n,
        sp = s.n_spikes,
        b = s.bits_per_spike,
        d = s.spike_duration,
        w = s.sim_duration,
    );
    let _ = writeln!(
        out,
        "DVS (not in totals): static {}, event generation {}, bias {}",
        nj(r.dvs_static),
        pj(r.dvs_event_gen),
        pj(r.dvs_bias)
    );
    out
}

fn row(name: &str, r: &EnergyReport, f: impl Fn(&ConfigEnergy) -> String) -> Vec<String> {
    std::iter::once(name.to_string())
        .chain(r.configs.iter().map(f))
        .collect()
}

/// `integration,compute_j,readout_j,total_j,normalized_total`.
pub fn format_csv(r: &EnergyReport) -> String {
    let mut out = String::from("integration,compute_j,readout_j,total_j,normalized_total\n");
    for c in &r.configs {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{}",
            c.integration.key(),
            c.compute,
            c.readout,
            c.total,
            c.normalized_total
        );
    }
    out
}
