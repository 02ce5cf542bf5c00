//! Winding numbers of the symmetric-frame Bloch axes, the gap invariants
//! `nu0 = (nu1 + nu2)/2` and `nu_pi = (nu1 - nu2)/2`, and the phase diagram.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bloch_axis, quasienergy, Frame, ModelParams};

pub const MIN_RESOLUTION: usize = 256;
pub const DEFAULT_RESOLUTION: usize = 2048;
pub const MAX_RESOLUTION: usize = 1 << 20;
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-3;

/// Uniform periodic grid `k_j = -pi + 2 pi j / m`, endpoint excluded.
pub fn k_grid(m: usize) -> impl ExactSizeIterator<Item = f64> + Clone {
    (0..m).map(move |j| -PI + TAU * j as f64 / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gap {
    Zero,
    Pi,
}

impl Gap {
    pub fn distance(self, energy: f64) -> f64 {
        match self {
            Gap::Zero => energy,
            Gap::Pi => PI - energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Windings {
    pub nu1: i32,
    pub nu2: i32,
}

impl Windings {
    pub fn invariants(&self) -> Result<InvariantPair> {
        if (self.nu1 + self.nu2) % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "windings ({}, {}) have mixed parity",
                self.nu1, self.nu2
            )));
        }
        Ok(InvariantPair {
            nu0: (self.nu1 + self.nu2) / 2,
            nu_pi: (self.nu1 - self.nu2) / 2,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantPair {
    pub nu0: i32,
    pub nu_pi: i32,
}

impl InvariantPair {
    pub fn get(&self, gap: Gap) -> i32 {
        match gap {
            Gap::Zero => self.nu0,
            Gap::Pi => self.nu_pi,
        }
    }
}

/// Total change of `atan2(n_y, n_x)` over the zone divided by `2 pi`.
///
/// The grid is doubled until every step turns by less than `pi/2`.
pub fn accumulated_winding(p: &ModelParams, frame: Frame, resolution: usize) -> Result<f64> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooLow(resolution));
    }
    if !frame.is_chiral() {
        return Err(Error::NotChiralFrame(frame));
    }
    let mut m = resolution;
    while m <= MAX_RESOLUTION {
        let angles = k_grid(m)
            .map(|k| bloch_axis(k, p, frame).map(|a| a.angle()))
            .collect::<Result<Vec<_>>>()?;
        let mut total = 0.0;
        let mut ok = true;
        for (j, phi) in angles.iter().enumerate() {
            let next = angles[(j + 1) % m];
            let d = wrap_angle(next - phi);
            if d.abs() >= FRAC_PI_2 {
                ok = false;
                break;
            }
            total += d;
        }
        if ok {
            return Ok(total / TAU);
        }
        m *= 2;
    }
    Err(Error::InsufficientResolution { cap: MAX_RESOLUTION })
}

pub fn winding_number(p: &ModelParams, frame: Frame, resolution: usize) -> Result<i32> {
    accumulated_winding(p, frame, resolution).map(|w| w.round() as i32)
}

pub fn windings(p: &ModelParams, resolution: usize) -> Result<Windings> {
    Ok(Windings {
        nu1: winding_number(p, Frame::Sym1, resolution)?,
        nu2: winding_number(p, Frame::Sym2, resolution)?,
    })
}

/// `(nu0, nu_pi)`; the undriven point `t_x = t_y = 0` is the trivial pair `(0, 0)`.
pub fn gap_invariants(p: &ModelParams, resolution: usize) -> Result<InvariantPair> {
    if p.is_undriven() {
        return Ok(InvariantPair { nu0: 0, nu_pi: 0 });
    }
    windings(p, resolution)?.invariants()
}

pub fn min_gap(p: &ModelParams, which: Gap, resolution: usize) -> f64 {
    k_grid(resolution.max(1))
        .map(|k| which.distance(quasienergy(k, p)))
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

fn wrap_angle(d: f64) -> f64 {
    let w = d.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// One axis of the phase-diagram grid: `cells` equal bins over `[lo, hi]`,
/// each sampled at its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Self {
        Self { lo, hi, cells }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    /// Index of the bin containing `x`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if self.cells == 1 && (x - self.center(0)).abs() <= self.width().abs() * 0.5 + 1e-12 {
            return Some(0);
        }
        let w = self.width();
        if w == 0.0 {
            return None;
        }
        let i = ((x - self.lo) / w).floor();
        (i >= 0.0 && (i as usize) < self.cells).then_some(i as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramConfig {
    pub resolution: usize,
    pub boundary_tol: f64,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            boundary_tol: DEFAULT_BOUNDARY_TOL,
        }
    }
}

/// Which gaps may close somewhere inside a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BoundaryFlags {
    pub zero: bool,
    pub pi: bool,
}

impl BoundaryFlags {
    pub fn any(&self) -> bool {
        self.zero || self.pi
    }

    pub fn contains(&self, gap: Gap) -> bool {
        match gap {
            Gap::Zero => self.zero,
            Gap::Pi => self.pi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
    pub tx: f64,
    pub ty: f64,
    /// Invariants at the cell center; `None` when the center itself is gapless.
    pub invariants: Option<InvariantPair>,
    pub min_gap0: f64,
    pub min_gap_pi: f64,
    pub boundary: BoundaryFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub tx_axis: GridAxis,
    pub ty_axis: GridAxis,
    pub config: PhaseDiagramConfig,
    /// Row-major over `(iy, ix)`.
    pub cells: Vec<Cell>,
}

/// Computes every cell; cells run in parallel on the current rayon pool and the
/// output order is fixed by grid index.
///
/// A cell is flagged for a gap when the gap minimum sampled at its center, minus
/// the largest change it can undergo within the cell and between k-grid points,
/// drops below `boundary_tol`. The gap minimum moves by at most `|dt|` per unit of
/// parameter distance and by at most `|t| |dk|` along the k-grid, so an unflagged
/// cell is gapped over its whole area.
pub fn phase_diagram(tx_axis: GridAxis, ty_axis: GridAxis, config: PhaseDiagramConfig) -> Result<PhaseDiagram> {
    if tx_axis.cells == 0 || ty_axis.cells == 0 {
        return Err(Error::InvalidArgument("cell counts must be positive".into()));
    }
    if config.resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooLow(config.resolution));
    }
    let n = tx_axis.cells * ty_axis.cells;
    let cells = (0..n)
        .into_par_iter()
        .map(|idx| {
            let (iy, ix) = (idx / tx_axis.cells, idx % tx_axis.cells);
            evaluate_cell(ix, iy, &tx_axis, &ty_axis, &config)
        })
        .collect();
    Ok(PhaseDiagram {
        tx_axis,
        ty_axis,
        config,
        cells,
    })
}

fn evaluate_cell(ix: usize, iy: usize, ax: &GridAxis, ay: &GridAxis, cfg: &PhaseDiagramConfig) -> Cell {
    let (tx, ty) = (ax.center(ix), ay.center(iy));
    let p = ModelParams::new(tx, ty);
    let (wx, wy) = (ax.width().abs(), ay.width().abs());
    let half_diag = 0.5 * wx.hypot(wy);
    let t_max = (tx.abs() + 0.5 * wx).hypot(ty.abs() + 0.5 * wy);
    let k_slack = t_max * PI / cfg.resolution as f64;
    let min_gap0 = min_gap(&p, Gap::Zero, cfg.resolution);
    let min_gap_pi = min_gap(&p, Gap::Pi, cfg.resolution);
    let boundary = BoundaryFlags {
        zero: min_gap0 - half_diag - k_slack < cfg.boundary_tol,
        pi: min_gap_pi - half_diag - k_slack < cfg.boundary_tol,
    };
    Cell {
        ix,
        iy,
        tx,
        ty,
        invariants: gap_invariants(&p, cfg.resolution).ok(),
        min_gap0,
        min_gap_pi,
        boundary,
    }
}

/// A change of invariants between two unflagged cells along a row or column,
/// separated only by flagged cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub before: InvariantPair,
    pub after: InvariantPair,
    /// Union of the boundary flags of the cells in between.
    pub crossed: BoundaryFlags,
}

impl Transition {
    /// True when only invariants of gaps that were flagged in between changed.
    pub fn matches_closing_gaps(&self) -> bool {
        [Gap::Zero, Gap::Pi]
            .iter()
            .all(|&g| self.before.get(g) == self.after.get(g) || self.crossed.contains(g))
    }
}

impl PhaseDiagram {
    pub fn cell(&self, ix: usize, iy: usize) -> &Cell {
        &self.cells[iy * self.tx_axis.cells + ix]
    }

    /// Cell whose bin contains `(tx, ty)`.
    pub fn cell_at(&self, tx: f64, ty: f64) -> Option<&Cell> {
        Some(self.cell(self.tx_axis.locate(tx)?, self.ty_axis.locate(ty)?))
    }

    /// Pairs of edge-adjacent unflagged cells whose invariants differ.
    pub fn unflagged_jumps(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        let (nx, ny) = (self.tx_axis.cells, self.ty_axis.cells);
        for iy in 0..ny {
            for ix in 0..nx {
                let a = self.cell(ix, iy);
                for (jx, jy) in [(ix + 1, iy), (ix, iy + 1)] {
                    if jx >= nx || jy >= ny {
                        continue;
                    }
                    let b = self.cell(jx, jy);
                    if !a.boundary.any() && !b.boundary.any() && a.invariants != b.invariants {
                        out.push(((ix, iy), (jx, jy)));
                    }
                }
            }
        }
        out
    }

    /// Every transition along rows and columns, in grid order.
    pub fn transitions(&self) -> Vec<Transition> {
        let (nx, ny) = (self.tx_axis.cells, self.ty_axis.cells);
        let mut out = Vec::new();
        for iy in 0..ny {
            let line: Vec<_> = (0..nx).map(|ix| (ix, iy)).collect();
            self.scan_line(&line, &mut out);
        }
        for ix in 0..nx {
            let line: Vec<_> = (0..ny).map(|iy| (ix, iy)).collect();
            self.scan_line(&line, &mut out);
        }
        out
    }

    fn scan_line(&self, line: &[(usize, usize)], out: &mut Vec<Transition>) {
        let mut last: Option<((usize, usize), InvariantPair)> = None;
        let mut crossed = BoundaryFlags::default();
        for &(ix, iy) in line {
            let c = self.cell(ix, iy);
            if c.boundary.any() {
                crossed.zero |= c.boundary.zero;
                crossed.pi |= c.boundary.pi;
                continue;
            }
            let Some(inv) = c.invariants else { continue };
            if let Some((from, before)) = last {
                if before != inv {
                    out.push(Transition {
                        from,
                        to: (ix, iy),
                        before,
                        after: inv,
                        crossed,
                    });
                }
            }
            last = Some(((ix, iy), inv));
            crossed = BoundaryFlags::default();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_cases() {
        let w = windings(&ModelParams::in_pi_units(0.5, 0.5), DEFAULT_RESOLUTION).unwrap();
        assert_eq!((w.nu1, w.nu2), (1, 1));
        let w = windings(&ModelParams::in_pi_units(2.5, 0.5), DEFAULT_RESOLUTION).unwrap();
        assert_eq!((w.nu1, w.nu2), (1, 5));
        assert_eq!(
            w.invariants().unwrap(),
            InvariantPair { nu0: 3, nu_pi: -2 }
        );
    }

    #[test]
    fn small_drive_winds_once() {
        // the region around the origin is connected to (0.5pi, 0.5pi) without a gap closing
        let p = ModelParams::new(0.1, 0.1);
        assert_eq!(winding_number(&p, Frame::Sym1, 2048).unwrap(), 1);
        assert_eq!(winding_number(&p, Frame::Sym2, 2048).unwrap(), 1);
        assert_eq!(gap_invariants(&p, 2048).unwrap(), InvariantPair { nu0: 1, nu_pi: 0 });
    }

    #[test]
    fn undriven_is_trivial() {
        let p = ModelParams::new(0.0, 0.0);
        assert_eq!(gap_invariants(&p, 2048).unwrap(), InvariantPair { nu0: 0, nu_pi: 0 });
        assert!(winding_number(&p, Frame::Sym1, 2048).is_err());
    }

    #[test]
    fn low_resolution_rejected() {
        let p = ModelParams::in_pi_units(0.5, 0.5);
        assert_eq!(winding_number(&p, Frame::Sym1, 255), Err(Error::ResolutionTooLow(255)));
    }

    #[test]
    fn gapless_grid_point_rejected() {
        // E = pi at k = 0, which is on the grid
        let p = ModelParams::in_pi_units(1.0, 0.5);
        assert!(matches!(
            winding_number(&p, Frame::Sym2, 512),
            Err(Error::GaplessPoint { .. })
        ));
    }

    #[test]
    fn min_gap_examples() {
        assert!(min_gap(&ModelParams::in_pi_units(1.0, 0.5), Gap::Pi, 2048) < 1e-12);
        assert_eq!(min_gap(&ModelParams::new(0.0, 0.0), Gap::Zero, 2048), 0.0);
        let p = ModelParams::in_pi_units(0.5, 0.5);
        assert!(min_gap(&p, Gap::Zero, 2048) > 1.0);
        assert!(min_gap(&p, Gap::Pi, 2048) > 1.0);
    }

    #[test]
    fn wrap_angle_range() {
        for d in [-7.0, -PI, -0.1, 0.0, 3.0, PI, 9.5] {
            let w = wrap_angle(d);
            assert!(w > -PI - 1e-15 && w <= PI);
            assert!(((d - w) / TAU - ((d - w) / TAU).round()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cell_grid_samples_the_point() {
        let a = GridAxis::new(2.5 * PI, 2.5 * PI, 1);
        let b = GridAxis::new(0.5 * PI, 0.5 * PI, 1);
        let d = phase_diagram(a, b, PhaseDiagramConfig::default()).unwrap();
        assert_eq!(d.cells.len(), 1);
        assert_eq!(d.cells[0].invariants, Some(InvariantPair { nu0: 3, nu_pi: -2 }));
        assert!(!d.cells[0].boundary.any());
        assert!(d.cell_at(2.5 * PI, 0.5 * PI).is_some());
    }

    #[test]
    fn pi_line_is_flagged() {
        let d = phase_diagram(
            GridAxis::new(0.9 * PI, 1.1 * PI, 4),
            GridAxis::new(0.1, 0.3, 2),
            PhaseDiagramConfig::default(),
        )
        .unwrap();
        for iy in 0..2 {
            assert!(d.cell(1, iy).boundary.pi && d.cell(2, iy).boundary.pi);
        }
    }

    #[test]
    fn zero_cells_rejected() {
        let a = GridAxis::new(0.0, 1.0, 0);
        assert!(phase_diagram(a, a, PhaseDiagramConfig::default()).is_err());
    }
}
