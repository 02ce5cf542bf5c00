use std::collections::BTreeMap;
use std::path::PathBuf;

use floquet_core::lattice::{classify_edge_modes, lattice_spectrum, open_spectrum_checked, LatticeSpectrum};
use floquet_core::model::floquet_operator;
use floquet_core::pulsegen::{compile_schedule, simulate_schedule, CompileOptions, PulseSchedule};
use floquet_core::quench::{analyze_trace, evolve_polarizations, BisReport, PolarizationTrace, QuenchSpec};
use floquet_core::spinalg::{distance_up_to_phase, Axis};
use floquet_core::topology::{phase_diagram, BoundaryFlags, GridAxis, InvariantPair, Transition, Windings};
use floquet_core::{Error, Frame};
use serde::Serialize;

use crate::config::{Command, EdgesRun, PhaseDiagramRun, PulsesRun, QuenchRun, SpectrumRun};
use crate::error::CliError;
use crate::output::Sink;

/// Largest schedule-vs-target distance accepted by `pulses --verify`.
pub const VERIFY_TOL: f64 = 1e-10;

/// Resolves the config and runs the command; returns the files written.
pub fn run(command: Command) -> Result<Vec<PathBuf>, CliError> {
    match command {
        Command::PhaseDiagram(a) => run_phase_diagram(&a.resolve()?),
        Command::Quench(a) => run_quench(&a.resolve()?),
        Command::Spectrum(a) => run_spectrum(&a.resolve()?),
        Command::Edges(a) => run_edges(&a.resolve()?),
        Command::Pulses(a) => run_pulses(&a.resolve()?),
    }
}

fn frame_name(f: Frame) -> &'static str {
    match f {
        Frame::Plain => "plain",
        Frame::Sym1 => "sym1",
        Frame::Sym2 => "sym2",
    }
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DiagramRow {
    t_x: f64,
    t_y: f64,
    nu0: Option<i32>,
    nu_pi: Option<i32>,
    boundary_flag: &'static str,
    min_gap0: f64,
    min_gap_pi: f64,
}

fn flag_name(b: BoundaryFlags) -> &'static str {
    match (b.zero, b.pi) {
        (false, false) => "none",
        (true, false) => "zero",
        (false, true) => "pi",
        (true, true) => "both",
    }
}

#[derive(Serialize)]
struct PhaseCount {
    nu0: i32,
    nu_pi: i32,
    cells: usize,
}

#[derive(Serialize)]
struct DiagramSummary {
    cells: usize,
    flagged_cells: usize,
    gapless_centers: usize,
    phases: Vec<PhaseCount>,
    transitions: Vec<Transition>,
    inconsistent_transitions: usize,
    unflagged_jumps: Vec<((usize, usize), (usize, usize))>,
}

pub fn run_phase_diagram(run: &PhaseDiagramRun) -> Result<Vec<PathBuf>, CliError> {
    let d = phase_diagram(
        GridAxis::new(run.tx_min, run.tx_max, run.nx),
        GridAxis::new(run.ty_min, run.ty_max, run.ny),
        run.diagram_config(),
    )?;
    let mut sink = Sink::new(&run.out_dir, run)?;
    sink.csv(
        "phase_diagram.csv",
        d.cells.iter().map(|c| DiagramRow {
            t_x: c.tx,
            t_y: c.ty,
            nu0: c.invariants.map(|i| i.nu0),
            nu_pi: c.invariants.map(|i| i.nu_pi),
            boundary_flag: flag_name(c.boundary),
            min_gap0: c.min_gap0,
            min_gap_pi: c.min_gap_pi,
        }),
    )?;
    let mut counts: BTreeMap<(i32, i32), usize> = BTreeMap::new();
    for inv in d.cells.iter().filter_map(|c| c.invariants) {
        *counts.entry((inv.nu0, inv.nu_pi)).or_default() += 1;
    }
    let transitions = d.transitions();
    let summary = DiagramSummary {
        cells: d.cells.len(),
        flagged_cells: d.cells.iter().filter(|c| c.boundary.any()).count(),
        gapless_centers: d.cells.iter().filter(|c| c.invariants.is_none()).count(),
        phases: counts
            .into_iter()
            .map(|((nu0, nu_pi), cells)| PhaseCount { nu0, nu_pi, cells })
            .collect(),
        inconsistent_transitions: transitions.iter().filter(|t| !t.matches_closing_gaps()).count(),
        transitions,
        unflagged_jumps: d.unflagged_jumps(),
    };
    sink.json("phase_diagram.json", run, summary)?;
    Ok(sink.written().to_vec())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TraceRow {
    k: f64,
    sigma_x_avg: f64,
    sigma_y_avg: f64,
    stderr_x: f64,
    stderr_y: f64,
}

fn trace_rows(t: &PolarizationTrace) -> Vec<TraceRow> {
    let (x, y) = (t.measured(Axis::X), t.measured(Axis::Y));
    (0..t.k.len())
        .map(|j| TraceRow {
            k: t.k[j],
            sigma_x_avg: x[j],
            sigma_y_avg: y[j],
            stderr_x: t.sampled.as_ref().map_or(0.0, |s| s.x[j].stderr),
            stderr_y: t.sampled.as_ref().map_or(0.0, |s| s.y[j].stderr),
        })
        .collect()
}

#[derive(Serialize)]
struct QuenchReport {
    frames: Vec<BisReport>,
    nu1: Option<i32>,
    nu2: Option<i32>,
    nu0: Option<i32>,
    nu_pi: Option<i32>,
}

pub fn run_quench(run: &QuenchRun) -> Result<Vec<PathBuf>, CliError> {
    let cfg = run.detection();
    let mut sink = Sink::new(&run.out_dir, run)?;
    let mut reports = Vec::new();
    for &frame in &run.frames {
        let mut spec = QuenchSpec::new(run.params(), frame, run.steps, run.grid);
        if let Some(shots) = run.shots {
            spec = spec.with_shots(shots, run.seed);
        }
        let trace = evolve_polarizations(&spec)?;
        sink.csv(&format!("quench_{}.csv", frame_name(frame)), trace_rows(&trace))?;
        let report = analyze_trace(&trace, &cfg).map_err(|e| match e {
            Error::NoBisFound => CliError::NoBis {
                frame: frame_name(frame).into(),
            },
            e => e.into(),
        })?;
        reports.push(report);
    }
    let winding = |f: Frame| reports.iter().find(|r| r.frame == f).map(|r| r.winding);
    let (nu1, nu2) = (winding(Frame::Sym1), winding(Frame::Sym2));
    let inv: Option<InvariantPair> = match (nu1, nu2) {
        (Some(nu1), Some(nu2)) => Some(Windings { nu1, nu2 }.invariants()?),
        _ => None,
    };
    let report = QuenchReport {
        frames: reports,
        nu1,
        nu2,
        nu0: inv.map(|i| i.nu0),
        nu_pi: inv.map(|i| i.nu_pi),
    };
    sink.json("quench.json", run, report)?;
    Ok(sink.written().to_vec())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    phase: f64,
    edge_weight_left: f64,
    edge_weight_right: f64,
}

fn spectrum_rows(s: &LatticeSpectrum) -> impl Iterator<Item = SpectrumRow> + '_ {
    s.phases.iter().enumerate().map(|(i, &phase)| SpectrumRow {
        index: i,
        phase,
        edge_weight_left: s.edge_left[i],
        edge_weight_right: s.edge_right[i],
    })
}

pub fn run_spectrum(run: &SpectrumRun) -> Result<Vec<PathBuf>, CliError> {
    let s = lattice_spectrum(&run.params(), run.frame, run.cells, run.boundary, run.edge_cells)?;
    let mut sink = Sink::new(&run.out_dir, run)?;
    sink.csv("spectrum.csv", spectrum_rows(&s))?;
    Ok(sink.written().to_vec())
}

#[derive(Serialize)]
struct EdgesReport {
    n_zero: usize,
    n_pi: usize,
}

pub fn run_edges(run: &EdgesRun) -> Result<Vec<PathBuf>, CliError> {
    let cfg = run.edge_config();
    let s = open_spectrum_checked(&run.params(), run.frame, run.cells, &cfg)?;
    let count = classify_edge_modes(&s, &cfg);
    let mut sink = Sink::new(&run.out_dir, run)?;
    sink.csv("edges_spectrum.csv", spectrum_rows(&s))?;
    sink.json(
        "edges.json",
        run,
        EdgesReport {
            n_zero: count.n_zero,
            n_pi: count.n_pi,
        },
    )?;
    Ok(sink.written().to_vec())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Verification {
    distance: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct PulsesReport {
    pulse_count: usize,
    total_duration_s: f64,
    schedule: PulseSchedule,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Verification>,
}

pub fn run_pulses(run: &PulsesRun) -> Result<Vec<PathBuf>, CliError> {
    let p = run.params();
    let mut opts = CompileOptions::new(run.steps, run.omega_ref_hz);
    opts.keep_zero = run.keep_zero;
    let schedule = compile_schedule(run.k, &p, run.frame, &opts)?;
    let verification = if run.verify {
        let target = floquet_operator(run.k, &p, run.frame).pow(run.steps);
        let distance = distance_up_to_phase(&simulate_schedule(&schedule)?, &target);
        Some(Verification {
            distance,
            tolerance: VERIFY_TOL,
            passed: distance < VERIFY_TOL,
        })
    } else {
        None
    };
    let failed = verification.as_ref().filter(|v| !v.passed).map(|v| v.distance);
    let mut sink = Sink::new(&run.out_dir, run)?;
    sink.json(
        "pulses.json",
        run,
        PulsesReport {
            pulse_count: schedule.pulses.len(),
            total_duration_s: schedule.total_duration(),
            schedule,
            verification,
        },
    )?;
    if let Some(distance) = failed {
        return Err(CliError::Verification {
            distance,
            tolerance: VERIFY_TOL,
        });
    }
    Ok(sink.written().to_vec())
}
