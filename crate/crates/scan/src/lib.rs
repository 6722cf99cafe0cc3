//! Sweeps of coherence, Floquet spectra and dip positions driven by a JSON
//! configuration, with CSV/PGM output.

pub mod config;
pub mod engine;
pub mod output;

use std::path::{Path, PathBuf};

use thiserror::Error;

use config::ScanConfig;
use engine::{Quantity, Sample};
use output::{cell, opt_cell, Csv, Manifest};

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{location}: {source}")]
    Model {
        location: String,
        #[source]
        source: floquet_dd::Error,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl ScanError {
    /// 2 for configuration problems, 3 for numerical failures, 4 for
    /// capacity limits, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScanError::Config(_) => 2,
            ScanError::Model { source, .. } if source.is_capacity() => 4,
            ScanError::Model { source, .. } if source.is_validation() => 2,
            ScanError::Model { .. } => 3,
            ScanError::Io(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Trace,
    Map,
    Spectrum,
    Dips,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Trace => "trace",
            Command::Map => "map",
            Command::Spectrum => "spectrum",
            Command::Dips => "dips",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Pgm,
    Both,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub output: PathBuf,
    pub format: Format,
    pub quantity: Quantity,
    /// Worker threads; 0 picks the number of CPUs.
    pub threads: usize,
}

/// Loads `config` and runs `command`, returning the paths written.
pub fn run(command: Command, config: &Path, opts: &RunOptions) -> Result<Vec<PathBuf>, ScanError> {
    let (cfg, raw) = config::load_config(config)?;
    run_with(command, &cfg, &raw, opts)
}

pub fn run_with(command: Command, cfg: &ScanConfig, raw: &[u8], opts: &RunOptions) -> Result<Vec<PathBuf>, ScanError> {
    let files = match command {
        Command::Trace => vec![("trace.csv".to_string(), run_trace(cfg, opts.threads)?)],
        Command::Map => run_map(cfg, opts)?,
        Command::Spectrum => vec![("spectrum.csv".to_string(), run_spectrum(cfg)?)],
        Command::Dips => vec![("dips.csv".to_string(), run_dips(cfg)?)],
    };
    let manifest = Manifest {
        tool: "floquet-scan",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        quantity: opts.quantity.column(),
        config_sha1: output::content_hash(raw),
        config: cfg,
        outputs: Vec::new(),
    };
    output::write_all(&opts.output, files, manifest)
}

fn single_axis(cfg: &ScanConfig, what: &str) -> Result<(), ScanError> {
    if cfg.field_axis.is_some() {
        return Err(ScanError::Config(format!("{what} takes only a τ axis; remove axes.field or use map")));
    }
    Ok(())
}

/// `tau_s,coherence,envelope`.
pub fn run_trace(cfg: &ScanConfig, threads: usize) -> Result<Vec<u8>, ScanError> {
    single_axis(cfg, "trace")?;
    let taus = cfg.tau_axis.values();
    let models = engine::build_models(cfg, None)?;
    let pool = engine::thread_pool(threads)?;
    let rows = engine::evaluate_grid(&models, cfg, &taus, &pool)?;
    let mut csv = Csv::new(&["tau_s", "coherence", "envelope"]);
    for (tau, s) in taus.iter().zip(&rows[0]) {
        csv.row(&[cell(*tau), cell(s.coherence), cell(s.envelope)]);
    }
    Ok(csv.into_bytes())
}

/// Map CSV (`field,tau_s,<quantity>`), optional PGM and overlay CSV.
pub fn run_map(cfg: &ScanConfig, opts: &RunOptions) -> Result<Vec<(String, Vec<u8>)>, ScanError> {
    let axis = cfg
        .field_axis
        .as_ref()
        .ok_or_else(|| ScanError::Config("map needs axes.field".into()))?;
    let fields = axis.values();
    let taus = cfg.tau_axis.values();
    let models = engine::build_models(cfg, Some(&fields))?;
    let pool = engine::thread_pool(opts.threads)?;
    let grid: Vec<Vec<Sample>> = engine::evaluate_grid(&models, cfg, &taus, &pool)?;
    let q = opts.quantity;
    let values: Vec<Vec<f64>> = grid.iter().map(|r| r.iter().map(|s| s.get(q)).collect()).collect();

    let mut files = Vec::new();
    if matches!(opts.format, Format::Csv | Format::Both) {
        let mut csv = Csv::new(&["field", "tau_s", q.column()]);
        for (f, row) in fields.iter().zip(&values) {
            for (t, v) in taus.iter().zip(row) {
                csv.row(&[cell(*f), cell(*t), cell(*v)]);
            }
        }
        files.push(("map.csv".to_string(), csv.into_bytes()));
    }
    if matches!(opts.format, Format::Pgm | Format::Both) {
        files.push(("map.pgm".to_string(), output::pgm(&values)));
    }
    if cfg.outputs.overlay {
        let mut csv = Csv::new(&["field", "curve", "tau_s"]);
        for (f, m) in fields.iter().zip(&models) {
            for (name, tau) in engine::overlay(m, cfg) {
                csv.row(&[cell(*f), name, cell(tau)]);
            }
        }
        files.push(("overlay.csv".to_string(), csv.into_bytes()));
    }
    Ok(files)
}

/// `tau_s,phase_1..phase_D,crossing`.
pub fn run_spectrum(cfg: &ScanConfig) -> Result<Vec<u8>, ScanError> {
    single_axis(cfg, "spectrum")?;
    let taus = cfg.tau_axis.values();
    let models = engine::build_models(cfg, None)?;
    let scan = engine::spectrum(&models[0], cfg, &taus)?;
    let d = scan.phases.first().map_or(0, Vec::len);
    let mut header: Vec<String> = vec!["tau_s".into()];
    header.extend((1..=d).map(|k| format!("phase_{k}")));
    header.push("crossing".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&header_refs);
    for (i, tau) in scan.taus.iter().enumerate() {
        let mut cells = vec![cell(*tau)];
        cells.extend(scan.phases[i].iter().map(|p| cell(*p)));
        cells.push(if scan.crossing[i] { "1".into() } else { "0".into() });
        csv.row(&cells);
    }
    Ok(csv.into_bytes())
}

/// `tau_dip_s,method,delta_rad,depth,harmonic`.
pub fn run_dips(cfg: &ScanConfig) -> Result<Vec<u8>, ScanError> {
    single_axis(cfg, "dips")?;
    let models = engine::build_models(cfg, None)?;
    let rows = engine::dips(&models[0], cfg)?;
    let mut csv = Csv::new(&["tau_dip_s", "method", "delta_rad", "depth", "harmonic"]);
    for r in rows {
        csv.row(&[
            cell(r.tau_dip_s),
            r.method.to_string(),
            opt_cell(r.delta_rad),
            opt_cell(r.depth),
            r.harmonic.to_string(),
        ]);
    }
    Ok(csv.into_bytes())
}
