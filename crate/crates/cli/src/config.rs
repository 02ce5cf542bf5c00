//! Command-line arguments, optional JSON config files, and the resolved run
//! configurations that get hashed into every output.
//!
//! Every flag is optional on the command line. A config file holds the same
//! keys (snake_case) and fills in whatever the flags leave unset; anything still
//! missing takes its default.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use floquet_core::lattice::{BoundaryCondition, EdgeConfig, MIN_CELLS};
use floquet_core::quench::DetectionConfig;
use floquet_core::topology::{PhaseDiagramConfig, DEFAULT_BOUNDARY_TOL, DEFAULT_RESOLUTION};
use floquet_core::{Frame, ModelParams};
use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "floquet", version, about = "Floquet chiral phases: invariants, quench read-out, edge modes, pulse schedules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariants (nu0, nu_pi) over a grid of drive amplitudes.
    PhaseDiagram(PhaseDiagramArgs),
    /// Quench traces, BIS and the winding numbers read from them.
    Quench(QuenchArgs),
    /// Eigenphases and edge weights of a finite chain.
    Spectrum(SpectrumArgs),
    /// Counts of 0 and pi edge modes of an open chain.
    Edges(EdgesArgs),
    /// Pulse schedule for N periods at one momentum.
    Pulses(PulsesArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    /// JSON file with default values for any of the flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

fn parse_frame(s: &str) -> Result<Frame, String> {
    match s.to_ascii_lowercase().as_str() {
        "plain" => Ok(Frame::Plain),
        "sym1" => Ok(Frame::Sym1),
        "sym2" => Ok(Frame::Sym2),
        _ => Err(format!("unknown frame {s:?}; expected plain, sym1 or sym2")),
    }
}

fn parse_frames(s: &str) -> Result<FrameSelection, String> {
    match s.to_ascii_lowercase().as_str() {
        "both" => Ok(FrameSelection::Both),
        other => parse_frame(other).map(FrameSelection::One),
    }
}

fn parse_boundary(s: &str) -> Result<BoundaryCondition, String> {
    match s.to_ascii_lowercase().as_str() {
        "open" => Ok(BoundaryCondition::Open),
        "periodic" => Ok(BoundaryCondition::Periodic),
        _ => Err(format!("unknown boundary {s:?}; expected open or periodic")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameSelection {
    Both,
    #[serde(untagged)]
    One(Frame),
}

impl FrameSelection {
    pub fn frames(self) -> Vec<Frame> {
        match self {
            FrameSelection::Both => Frame::SYMMETRIC.to_vec(),
            FrameSelection::One(f) => vec![f],
        }
    }
}

/// Fill every `None` in `$dst` from `$src`.
macro_rules! overlay {
    ($dst:expr => $src:expr; $($field:ident),* $(,)?) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field; } )*
    };
}

fn read_file<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn out_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(file).unwrap_or_else(|| PathBuf::from("."))
}

fn require(name: &str, v: Option<Angle>) -> Result<f64, CliError> {
    v.map(Angle::radians)
        .ok_or_else(|| CliError::Config(format!("missing --{}", name.replace('_', "-"))))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub tx_min: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    pub tx_max: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    pub ty_min: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    pub ty_max: Option<Angle>,
    /// Cells along t_x.
    #[arg(long)]
    pub nx: Option<usize>,
    /// Cells along t_y.
    #[arg(long)]
    pub ny: Option<usize>,
    /// Momentum points per winding evaluation.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub boundary_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagramRun {
    pub format: u32,
    pub command: &'static str,
    pub tx_min: f64,
    pub tx_max: f64,
    pub ty_min: f64,
    pub ty_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub resolution: usize,
    pub boundary_tol: f64,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl PhaseDiagramArgs {
    pub fn resolve(mut self) -> Result<PhaseDiagramRun, CliError> {
        let file: Self = read_file(self.common.config.as_deref())?;
        overlay!(self => file; tx_min, tx_max, ty_min, ty_max, nx, ny, resolution, boundary_tol);
        let get = |a: Option<Angle>, d: f64| a.map_or(d, Angle::radians);
        let run = PhaseDiagramRun {
            format: FORMAT_VERSION,
            command: "phase-diagram",
            tx_min: get(self.tx_min, 0.0),
            tx_max: get(self.tx_max, 3.0 * PI),
            ty_min: get(self.ty_min, 0.0),
            ty_max: get(self.ty_max, 3.0 * PI),
            nx: self.nx.unwrap_or(60),
            ny: self.ny.unwrap_or(60),
            resolution: self.resolution.unwrap_or(DEFAULT_RESOLUTION),
            boundary_tol: self.boundary_tol.unwrap_or(DEFAULT_BOUNDARY_TOL),
            out_dir: out_dir(self.common.out_dir, file.common.out_dir),
        };
        if run.nx == 0 || run.ny == 0 {
            return Err(CliError::Config("grid needs at least one cell per axis".into()));
        }
        Ok(run)
    }
}

impl PhaseDiagramRun {
    pub fn diagram_config(&self) -> PhaseDiagramConfig {
        PhaseDiagramConfig {
            resolution: self.resolution,
            boundary_tol: self.boundary_tol,
        }
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub tx: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    pub ty: Option<Angle>,
    /// sym1, sym2 or both.
    #[arg(long, value_parser = parse_frames)]
    pub frame: Option<FrameSelection>,
    /// Number of Floquet periods N.
    #[arg(long)]
    pub steps: Option<u32>,
    /// Points on the momentum grid.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Projective measurements per averaged point; exact averages when absent.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub floor_tol: Option<f64>,
    #[arg(long)]
    pub slope_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchRun {
    pub format: u32,
    pub command: &'static str,
    pub tx: f64,
    pub ty: f64,
    pub frames: Vec<Frame>,
    pub steps: u32,
    pub grid: usize,
    pub shots: Option<u64>,
    pub seed: u64,
    pub floor_tol: Option<f64>,
    pub slope_min: Option<f64>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl QuenchArgs {
    pub fn resolve(mut self) -> Result<QuenchRun, CliError> {
        let file: Self = read_file(self.common.config.as_deref())?;
        overlay!(self => file; tx, ty, frame, steps, grid, shots, seed, floor_tol, slope_min);
        Ok(QuenchRun {
            format: FORMAT_VERSION,
            command: "quench",
            tx: require("tx", self.tx)?,
            ty: require("ty", self.ty)?,
            frames: self.frame.unwrap_or(FrameSelection::Both).frames(),
            steps: self.steps.unwrap_or(60),
            grid: self.grid.unwrap_or(512),
            shots: self.shots,
            seed: self.seed.unwrap_or(0),
            floor_tol: self.floor_tol,
            slope_min: self.slope_min,
            out_dir: out_dir(self.common.out_dir, file.common.out_dir),
        })
    }
}

impl QuenchRun {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.tx, self.ty)
    }

    pub fn detection(&self) -> DetectionConfig {
        DetectionConfig {
            floor_tol: self.floor_tol,
            slope_min: self.slope_min,
            ..DetectionConfig::default()
        }
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tx: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    pub ty: Option<Angle>,
    /// plain, sym1 or sym2.
    #[arg(long, value_parser = parse_frame)]
    pub frame: Option<Frame>,
    /// Number of unit cells L.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Cells at each end counted as edge; defaults to max(2, L/10).
    #[arg(long)]
    pub edge_cells: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    /// open or periodic.
    #[arg(long, value_parser = parse_boundary)]
    pub boundary: Option<BoundaryCondition>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRun {
    pub format: u32,
    pub command: &'static str,
    pub tx: f64,
    pub ty: f64,
    pub frame: Frame,
    pub cells: usize,
    pub edge_cells: usize,
    pub boundary: BoundaryCondition,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

fn chain_cells(cells: Option<usize>, default: usize) -> Result<usize, CliError> {
    let cells = cells.unwrap_or(default);
    if cells < MIN_CELLS {
        return Err(CliError::Config(format!("need at least {MIN_CELLS} cells, got {cells}")));
    }
    Ok(cells)
}

impl SpectrumArgs {
    pub fn resolve(mut self) -> Result<SpectrumRun, CliError> {
        let file: Self = read_file(self.common.config.as_deref())?;
        overlay!(self.chain => file.chain; tx, ty, frame, cells, edge_cells);
        overlay!(self => file; boundary);
        let cells = chain_cells(self.chain.cells, 40)?;
        Ok(SpectrumRun {
            format: FORMAT_VERSION,
            command: "spectrum",
            tx: require("tx", self.chain.tx)?,
            ty: require("ty", self.chain.ty)?,
            frame: self.chain.frame.unwrap_or(Frame::Sym1),
            cells,
            edge_cells: self
                .chain
                .edge_cells
                .unwrap_or_else(|| floquet_core::lattice::default_edge_cells(cells)),
            boundary: self.boundary.unwrap_or(BoundaryCondition::Open),
            out_dir: out_dir(self.common.out_dir, file.common.out_dir),
        })
    }
}

impl SpectrumRun {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.tx, self.ty)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    /// Eigenphase window around 0 and pi.
    #[arg(long)]
    pub e_tol: Option<f64>,
    /// Minimum edge weight of a counted mode.
    #[arg(long)]
    pub weight_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgesRun {
    pub format: u32,
    pub command: &'static str,
    pub tx: f64,
    pub ty: f64,
    pub frame: Frame,
    pub cells: usize,
    pub edge_cells: usize,
    pub e_tol: f64,
    pub weight_tol: f64,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl EdgesArgs {
    pub fn resolve(mut self) -> Result<EdgesRun, CliError> {
        let file: Self = read_file(self.common.config.as_deref())?;
        overlay!(self.chain => file.chain; tx, ty, frame, cells, edge_cells);
        overlay!(self => file; e_tol, weight_tol);
        let cells = chain_cells(self.chain.cells, 40)?;
        let defaults = EdgeConfig::default();
        Ok(EdgesRun {
            format: FORMAT_VERSION,
            command: "edges",
            tx: require("tx", self.chain.tx)?,
            ty: require("ty", self.chain.ty)?,
            frame: self.chain.frame.unwrap_or(Frame::Sym1),
            cells,
            edge_cells: self
                .chain
                .edge_cells
                .unwrap_or_else(|| floquet_core::lattice::default_edge_cells(cells)),
            e_tol: positive("e_tol", self.e_tol.unwrap_or(defaults.e_tol))?,
            weight_tol: self.weight_tol.unwrap_or(defaults.weight_tol),
            out_dir: out_dir(self.common.out_dir, file.common.out_dir),
        })
    }
}

impl EdgesRun {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.tx, self.ty)
    }

    pub fn edge_config(&self) -> EdgeConfig {
        EdgeConfig {
            e_tol: self.e_tol,
            edge_cells: Some(self.edge_cells),
            weight_tol: self.weight_tol,
        }
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulsesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub tx: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    pub ty: Option<Angle>,
    /// Momentum k.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<Angle>,
    /// plain, sym1 or sym2.
    #[arg(long, value_parser = parse_frame)]
    pub frame: Option<Frame>,
    /// Number of periods N.
    #[arg(long)]
    pub steps: Option<u32>,
    /// Reference Rabi frequency in Hz; pulse durations are angle / omega.
    #[arg(long)]
    pub omega_ref: Option<f64>,
    /// Keep zero-angle pulses as empty slots.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub keep_zero: Option<bool>,
    /// Re-simulate the schedule and compare with the target operator.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub verify: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulsesRun {
    pub format: u32,
    pub command: &'static str,
    pub tx: f64,
    pub ty: f64,
    pub k: f64,
    pub frame: Frame,
    pub steps: u32,
    pub omega_ref_hz: f64,
    pub keep_zero: bool,
    pub verify: bool,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl PulsesArgs {
    pub fn resolve(mut self) -> Result<PulsesRun, CliError> {
        let file: Self = read_file(self.common.config.as_deref())?;
        overlay!(self => file; tx, ty, k, frame, steps, omega_ref, keep_zero, verify);
        let omega = self
            .omega_ref
            .ok_or_else(|| CliError::Config("missing --omega-ref".into()))?;
        Ok(PulsesRun {
            format: FORMAT_VERSION,
            command: "pulses",
            tx: require("tx", self.tx)?,
            ty: require("ty", self.ty)?,
            k: require("k", self.k)?,
            frame: self.frame.unwrap_or(Frame::Sym1),
            steps: self.steps.unwrap_or(1),
            omega_ref_hz: positive("omega_ref", omega)?,
            keep_zero: self.keep_zero.unwrap_or(false),
            verify: self.verify.unwrap_or(false),
            out_dir: out_dir(self.common.out_dir, file.common.out_dir),
        })
    }
}

impl PulsesRun {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.tx, self.ty)
    }
}
