//! Command-line front end: argument definitions and the subcommand drivers.
//! The `retina-mp` binary only parses arguments and maps errors to exit
//! codes.

use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aer::{self, EventKind};
use crate::config::{load_config, Config};
use crate::digital::{self, DigitalArrayState};
use crate::energy::{self, DigitalScaling, Scenario};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io;
use crate::retina::{run_retina_stages, MpOutput, Orientation};
use crate::stimulus::{
    add_flicker_noise, crop_square, frames_to_events, gen_moving_ball, gen_moving_bar, Direction,
    EventVolume, FrameSequence, Polarity, DEFAULT_THRESHOLD,
};

const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(
    name = "retina-mp",
    version,
    about = "Retina-inspired motion prediction toolkit"
)]
pub struct Cli {
    /// INI-style parameter file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for synthetic stimulus noise.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert grayscale frames to a DVS event CSV.
    Convert(ConvertArgs),
    /// Run the retina and/or digital pipeline end to end.
    Run(RunArgs),
    /// Drive the digital array from a spike script or frames.
    Digital(DigitalArgs),
    /// Print the energy comparison table.
    Energy(EnergyArgs),
    /// Render an activity CSV to heatmaps.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Directory of netpbm frames or a raw frame stack.
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: u8,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Crop wide frames to a centered square.
    #[arg(long)]
    pub crop: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pipeline {
    Retina,
    Digital,
    Both,
}

impl Pipeline {
    fn retina(self) -> bool {
        matches!(self, Pipeline::Retina | Pipeline::Both)
    }

    fn digital(self) -> bool {
        matches!(self, Pipeline::Digital | Pipeline::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StimulusKind {
    Ball,
    Bar,
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Frames to use instead of a synthetic stimulus.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StimulusKind::Ball)]
    pub stimulus: StimulusKind,
    /// l2r, r2l, t2b or b2t.
    #[arg(long, default_value = "l2r")]
    pub direction: Direction,
    /// Side of the synthetic frames in pixels.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Number of synthetic frames.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Pixels per frame.
    #[arg(long, default_value_t = 2)]
    pub speed: usize,
    #[arg(long, default_value_t = 6)]
    pub radius: usize,
    #[arg(long, value_enum, default_value_t = Pipeline::Both)]
    pub pipeline: Pipeline,
    /// Mirror the stimulus horizontally before processing.
    #[arg(long)]
    pub mirror: bool,
    /// Per-pixel flicker probability.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: u8,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Also write the wall time into summary.txt (breaks byte-identical reruns).
    #[arg(long)]
    pub record_time: bool,
}

#[derive(Debug, Args)]
pub struct DigitalArgs {
    /// Spike script (`.script`, `.txt`) or frames.
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: u8,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long)]
    pub array_n: Option<usize>,
    #[arg(long)]
    pub spikes: Option<u64>,
    #[arg(long)]
    pub bits_per_spike: Option<u32>,
    /// Charge full row/column addresses instead of one bit per spike.
    #[arg(long, conflicts_with = "bits_per_spike")]
    pub address_width: bool,
    /// Seconds.
    #[arg(long)]
    pub spike_duration: Option<f64>,
    /// Seconds.
    #[arg(long)]
    pub sim_duration: Option<f64>,
    /// Scale digital compute linearly with spike count (extrapolation).
    #[arg(long)]
    pub scale_digital: bool,
    /// Use the 18.56 pJ per-event mixed-signal energy without the override.
    #[arg(long)]
    pub per_event_mixed: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Activity CSV (`t,x,y,value`).
    pub input: PathBuf,
}

/// Everything that determines the output of [`cmd_run`].
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub run: RunArgs,
    pub config: Config,
    pub out: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub frames: usize,
    pub on_events: usize,
    pub off_events: usize,
    pub mp_bins: usize,
    pub amplified_events: usize,
    pub predicted_events: usize,
}

pub fn run_cli(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => load_config(p)?,
        None => Config::default(),
    };
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let say = |msg: String| {
        if !cli.quiet {
            println!("{msg}");
        }
    };
    match cli.command {
        Command::Convert(a) => {
            let path = cmd_convert(&a, &out)?;
            say(format!("wrote {}", path.display()));
        }
        Command::Run(a) => {
            let manifest = RunManifest {
                run: a,
                config,
                out,
                seed: cli.seed,
            };
            let start = Instant::now();
            let s = cmd_run(&manifest)?;
            say(format!(
                "{} frames, {} ON / {} OFF events, {} amplified, {} predicted, {:.3} s",
                s.frames,
                s.on_events,
                s.off_events,
                s.amplified_events,
                s.predicted_events,
                start.elapsed().as_secs_f64()
            ));
        }
        Command::Digital(a) => {
            let states = cmd_digital(&a, &config, &out)?;
            say(format!(
                "{} steps written to {}",
                states.len(),
                out.join("digital").display()
            ));
        }
        Command::Energy(a) => {
            let (text, csv) = cmd_energy(&a, &config)?;
            print!("{text}\n{csv}");
            if let Some(dir) = &cli.out {
                create_dir(dir)?;
                write(&dir.join("energy.txt"), &text)?;
                write(&dir.join("energy.csv"), &csv)?;
            }
        }
        Command::Render(a) => {
            let files = cmd_render(&a.input, &out)?;
            say(format!(
                "{} heatmaps in {}",
                files.len(),
                out.join("heatmaps").display()
            ));
        }
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `<out>/events.csv`.
pub fn cmd_convert(a: &ConvertArgs, out: &Path) -> Result<PathBuf> {
    let mut seq = io::load_frames(&a.input, a.fps)?;
    if a.crop {
        seq = crop_square(&seq)?;
    }
    let events = frames_to_events(&seq, a.threshold)?;
    create_dir(out)?;
    let path = out.join("events.csv");
    io::write_events_csv(&path, &events)?;
    Ok(path)
}

/// Exclusive claim on an output directory, released on drop.
struct OutputLock(PathBuf);

impl OutputLock {
    fn acquire(dir: &Path) -> Result<Self> {
        create_dir(dir)?;
        let path = dir.join(".lock");
        OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Self(path))
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub fn load_stimulus(run: &RunArgs, seed: u64) -> Result<FrameSequence> {
    let mut seq = match &run.input {
        Some(p) => io::load_frames(p, run.fps)?,
        None => {
            let s = match run.stimulus {
                StimulusKind::Ball => gen_moving_ball(
                    run.size,
                    run.size,
                    run.radius,
                    run.speed,
                    run.direction,
                    run.steps,
                )?,
                StimulusKind::Bar => {
                    gen_moving_bar(run.size, run.size, run.speed, run.direction, run.steps)?
                }
            };
            s.frames
        }
    };
    if run.noise > 0.0 {
        seq = add_flicker_noise(&seq, run.noise, seed)?;
    }
    if run.mirror {
        seq = seq.mirrored();
    }
    Ok(seq)
}

/// Per-bin spike magnitudes for the digital array.
pub fn digital_frames(events: &EventVolume) -> Vec<Grid<f64>> {
    (0..events.steps())
        .map(|t| events.magnitude_frame(t))
        .collect()
}

/// AMPLIFIED and PREDICTED streams of a digital run, merged canonically.
pub fn readout(states: &[DigitalArrayState], level: f64) -> Vec<aer::AerEvent> {
    let amplified: Vec<Grid<bool>> = states.iter().map(|s| s.amplified_mask(level)).collect();
    let predicted: Vec<Grid<bool>> = states.iter().map(|s| s.prediction.clone()).collect();
    aer::merge([
        aer::aer_encode(&amplified, EventKind::Amplified),
        aer::aer_encode(&predicted, EventKind::Predicted),
    ])
}

fn write_digital(
    dir: &Path,
    states: &[DigitalArrayState],
    level: f64,
) -> Result<Vec<aer::AerEvent>> {
    let ddir = dir.join("digital");
    for (t, s) in states.iter().enumerate() {
        digital::dump_state(&ddir, t, s)?;
    }
    let events = readout(states, level);
    aer::write_aer(&dir.join("readout.aer"), &events)?;
    write(&dir.join("readout.csv"), &aer::to_csv(&events))?;
    Ok(events)
}

/// Full pipeline. Output is a function of the manifest alone.
pub fn cmd_run(m: &RunManifest) -> Result<RunSummary> {
    m.config.validate().map_err(|e| Error::Config {
        line: 0,
        msg: e.to_string(),
    })?;
    let start = Instant::now();
    let _lock = OutputLock::acquire(&m.out)?;
    let run = &m.run;
    let seq = load_stimulus(run, m.seed)?;
    let events = frames_to_events(&seq, run.threshold)?;
    io::write_events_csv(&m.out.join("events.csv"), &events)?;

    let mut summary = RunSummary {
        frames: seq.len(),
        on_events: events.count(Polarity::On),
        off_events: events.count(Polarity::Off),
        ..Default::default()
    };

    if run.pipeline.retina() {
        let stages = run_retina_stages(&events, &m.config.retina, Orientation::Standard)?;
        io::write_mp_csv(&m.out.join("mp.csv"), &stages.mp)?;
        io::write_heatmaps(&m.out.join("heatmaps"), &stages.mp)?;
        summary.mp_bins = stages.mp.shape().0;
    }
    if run.pipeline.digital() {
        let states = digital::run(&digital_frames(&events), &m.config.digital)?;
        let aer_events = write_digital(&m.out, &states, m.config.digital.amplified_fraction)?;
        summary.amplified_events = aer::of_kind(&aer_events, EventKind::Amplified).len();
        summary.predicted_events = aer::of_kind(&aer_events, EventKind::Predicted).len();
    }

    let mut text = String::new();
    let source = match &run.input {
        Some(p) => p.display().to_string(),
        None => format!(
            "synthetic {} {} size={} steps={} speed={} radius={}",
            format!("{:?}", run.stimulus).to_lowercase(),
            run.direction.code(),
            run.size,
            run.steps,
            run.speed,
            run.radius
        ),
    };
    let _ = writeln!(text, "input = {source}");
    let _ = writeln!(
        text,
        "pipeline = {}",
        format!("{:?}", run.pipeline).to_lowercase()
    );
    let _ = writeln!(text, "mirror = {}", run.mirror);
    let _ = writeln!(text, "noise = {}", run.noise);
    let _ = writeln!(text, "seed = {}", m.seed);
    let _ = writeln!(text, "threshold = {}", run.threshold);
    text.push_str(&m.config.echo());
    let _ = writeln!(text, "frames = {}", summary.frames);
    let _ = writeln!(text, "on_events = {}", summary.on_events);
    let _ = writeln!(text, "off_events = {}", summary.off_events);
    let _ = writeln!(text, "mp_bins = {}", summary.mp_bins);
    let _ = writeln!(text, "amplified_events = {}", summary.amplified_events);
    let _ = writeln!(text, "predicted_events = {}", summary.predicted_events);
    if run.record_time {
        let _ = writeln!(text, "wall_time_s = {:.6}", start.elapsed().as_secs_f64());
    }
    write(&m.out.join("summary.txt"), &text)?;
    Ok(summary)
}

fn is_script(path: &Path) -> bool {
    path.is_file()
        && matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("script" | "txt")
        )
}

/// State dumps under `<out>/digital/` plus the AER readout.
pub fn cmd_digital(a: &DigitalArgs, config: &Config, out: &Path) -> Result<Vec<DigitalArrayState>> {
    let frames = if is_script(&a.input) {
        io::read_spike_script(&a.input)?
    } else {
        let seq = io::load_frames(&a.input, 30.0)?;
        digital_frames(&frames_to_events(&seq, a.threshold)?)
    };
    let states = digital::run(&frames, &config.digital)?;
    let _lock = OutputLock::acquire(out)?;
    write_digital(out, &states, config.digital.amplified_fraction)?;
    Ok(states)
}

pub fn energy_scenario(a: &EnergyArgs, config: &Config) -> Scenario {
    let mut s = config.scenario;
    if let Some(n) = a.array_n {
        s.array_n = n;
    }
    if let Some(n) = a.spikes {
        s.n_spikes = n;
    }
    if let Some(b) = a.bits_per_spike {
        s.bits_per_spike = b;
    }
    if let Some(d) = a.spike_duration {
        s.spike_duration = d;
    }
    if let Some(d) = a.sim_duration {
        s.sim_duration = d;
    }
    if a.address_width {
        s = s.with_address_width();
    }
    s
}

/// Aligned table and CSV for the scenario.
pub fn cmd_energy(a: &EnergyArgs, config: &Config) -> Result<(String, String)> {
    let mut k = config.energy;
    if a.scale_digital {
        k.digital_scaling = DigitalScaling::LinearInSpikes;
    }
    if a.per_event_mixed {
        k.mixed_event_override = None;
    }
    let report = energy::estimate(&energy_scenario(a, config), &k)?;
    Ok((energy::format_table(&report), energy::format_csv(&report)))
}

pub fn cmd_render(input: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let mp: MpOutput = io::read_mp_csv(input)?;
    io::write_heatmaps(&out.join("heatmaps"), &mp)
}
