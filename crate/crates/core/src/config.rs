//! INI-style run configuration.
//!
//! ```text
//! # comment
//! [retina]
//! ks = 4
//! digital.prediction_levels = 3
//! ```
//!
//! Keys are either written under a `[retina]`, `[digital]` or `[energy]`
//! header or carry the section as a dotted prefix. Keys before any header
//! may omit the section when the name is unique across sections. Unknown
//! keys and sections are errors.

use std::fs;
use std::path::Path;

use crate::digital::DigitalParams;
use crate::energy::{DigitalScaling, EnergyConstants, Scenario};
use crate::error::{Error, Result};
use crate::retina::RetinaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub retina: RetinaConfig,
    pub digital: DigitalParams,
    pub energy: EnergyConstants,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Retina,
    Digital,
    Energy,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        match name {
            "retina" => Some(Section::Retina),
            "digital" => Some(Section::Digital),
            "energy" => Some(Section::Energy),
            _ => None,
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Retina => &["ks", "ko", "sigma", "f_t", "gj_nf", "gamma"],
            Section::Digital => &[
                "fraction",
                "threshold",
                "amplified_fraction",
                "prediction_levels",
                "vstore_ttl",
                "visit_horizon",
            ],
            Section::Energy => &[
                "mp_event_energy_mixed",
                "mixed_event_override",
                "digital_compute",
                "digital_scaling",
                "reference_spikes",
                "lvds_per_bit",
                "die3d_per_bit",
                "dvs_static_per_ms",
                "bipolar_gen",
                "bias",
                "array_n",
                "n_spikes",
                "spike_duration",
                "sim_duration",
                "bits_per_spike",
            ],
        }
    }
}

const SECTIONS: [Section; 3] = [Section::Retina, Section::Digital, Section::Energy];

pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    let mut current: Option<Section> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| Error::Config { line: line_no, msg };
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(format!("unterminated section header {line:?}")))?;
            current = Some(
                Section::parse(name.trim())
                    .ok_or_else(|| err(format!("unknown section [{}]", name.trim())))?,
            );
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let (section, name) = resolve(key, current).map_err(err)?;
        cfg.set(section, name, value).map_err(err)?;
    }
    cfg.validate().map_err(|e| Error::Config {
        line: 0,
        msg: e.to_string(),
    })?;
    Ok(cfg)
}

fn strip_comment(line: &str) -> &str {
    let end = line.find(['#', ';']).unwrap_or(line.len());
    &line[..end]
}

fn resolve(key: &str, current: Option<Section>) -> std::result::Result<(Section, &str), String> {
    if let Some((prefix, name)) = key.split_once('.') {
        let section =
            Section::parse(prefix).ok_or_else(|| format!("unknown section prefix {prefix:?}"))?;
        if let Some(cur) = current {
            if cur != section {
                return Err(format!(
                    "key {key:?} does not belong to the current section"
                ));
            }
        }
        return check_key(section, name).map(|n| (section, n));
    }
    if let Some(section) = current {
        return check_key(section, key).map(|n| (section, n));
    }
    let owners: Vec<Section> = SECTIONS
        .into_iter()
        .filter(|s| s.keys().contains(&key))
        .collect();
    match owners[..] {
        [s] => Ok((s, key)),
        [] => Err(format!("unknown key {key:?}")),
        _ => Err(format!("key {key:?} is ambiguous without a section")),
    }
}

fn check_key(section: Section, name: &str) -> std::result::Result<&str, String> {
    if section.keys().contains(&name) {
        Ok(name)
    } else {
        Err(format!("unknown key {name:?} in section {section:?}"))
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: cannot parse {value:?}"))
}

fn optional<T: std::str::FromStr>(
    key: &str,
    value: &str,
) -> std::result::Result<Option<T>, String> {
    if value.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

impl Config {
    fn set(&mut self, section: Section, key: &str, v: &str) -> std::result::Result<(), String> {
        match section {
            Section::Retina => {
                let r = &mut self.retina;
                match key {
                    "ks" => r.ks = num(key, v)?,
                    "ko" => r.ko = num(key, v)?,
                    "sigma" => r.sigma = optional(key, v)?,
                    "f_t" => r.f_t = num(key, v)?,
                    "gj_nf" => r.gap_junction.gj_nf = num(key, v)?,
                    "gamma" => r.gap_junction.gamma = num(key, v)?,
                    _ => unreachable!("checked by resolve"),
                }
            }
            Section::Digital => {
                let d = &mut self.digital;
                match key {
                    "fraction" => d.fraction = num(key, v)?,
                    "threshold" => d.threshold = num(key, v)?,
                    "amplified_fraction" => d.amplified_fraction = num(key, v)?,
                    "prediction_levels" => d.prediction_levels = num(key, v)?,
                    "vstore_ttl" => d.vstore_ttl = num(key, v)?,
                    "visit_horizon" => d.visit_horizon = optional(key, v)?,
                    _ => unreachable!("checked by resolve"),
                }
            }
            Section::Energy => {
                let (k, s) = (&mut self.energy, &mut self.scenario);
                match key {
                    "mp_event_energy_mixed" => k.mp_event_energy_mixed = num(key, v)?,
                    "mixed_event_override" => k.mixed_event_override = optional(key, v)?,
                    "digital_compute" => k.digital_compute = num(key, v)?,
                    "digital_scaling" => {
                        k.digital_scaling = match v {
                            "constant" => DigitalScaling::Constant,
                            "linear" => DigitalScaling::LinearInSpikes,
                            _ => {
                                return Err(format!(
                                    "digital_scaling must be constant or linear, got {v:?}"
                                ))
                            }
                        }
                    }
                    "reference_spikes" => k.reference_spikes = num(key, v)?,
                    "lvds_per_bit" => k.lvds_per_bit = num(key, v)?,
                    "die3d_per_bit" => k.die3d_per_bit = num(key, v)?,
                    "dvs_static_per_ms" => k.dvs_static_per_ms = num(key, v)?,
                    "bipolar_gen" => k.bipolar_gen = num(key, v)?,
                    "bias" => k.bias = num(key, v)?,
                    "array_n" => s.array_n = num(key, v)?,
                    "n_spikes" => s.n_spikes = num(key, v)?,
                    "spike_duration" => s.spike_duration = num(key, v)?,
                    "sim_duration" => s.sim_duration = num(key, v)?,
                    "bits_per_spike" => s.bits_per_spike = num(key, v)?,
                    _ => unreachable!("checked by resolve"),
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.retina.validate()?;
        self.digital.validate()?;
        self.energy.validate()?;
        self.scenario.validate()
    }

    /// Effective values, one `section.key = value` per line.
    pub fn echo(&self) -> String {
        let r = &self.retina;
        let d = &self.digital;
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        [
            format!("retina.ks = {}", r.ks),
            format!("retina.ko = {}", r.ko),
            format!("retina.sigma = {}", r.sigma()),
            format!("retina.f_t = {}", r.f_t),
            format!("retina.gj_nf = {}", r.gap_junction.gj_nf),
            format!("retina.gamma = {}", r.gap_junction.gamma),
            format!("digital.fraction = {}", d.fraction),
            format!("digital.threshold = {}", d.threshold),
            format!("digital.amplified_fraction = {}", d.amplified_fraction),
            format!("digital.prediction_levels = {}", d.prediction_levels),
            format!("digital.vstore_ttl = {}", d.vstore_ttl),
            format!(
                "digital.visit_horizon = {}",
                opt(d.visit_horizon.map(|h| h.to_string()))
            ),
        ]
        .join("\n")
            + "\n"
    }
}
