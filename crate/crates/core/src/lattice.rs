//! Real-space Floquet operator of an `L`-cell chain and its edge modes.
//!
//! Cell `j` holds two orbitals at indices `2j, 2j+1`. Hopping from cell `j` to
//! `j+1` carries the block `(t_x/2) sx` for the x step and `(i t_y/2) sy` for the
//! y step, so the Bloch transform of the periodic chain gives back
//! `t_x cos k sx` and `t_y sin k sy`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Frame, ModelParams};
use crate::spinalg::Axis;
use crate::topology::{min_gap, Gap, DEFAULT_RESOLUTION};

pub type CMatrix = DMatrix<Complex64>;

pub const MIN_CELLS: usize = 4;
/// Eigenvalues of `(U + U^dagger)/2` closer than this are resolved together.
const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Open,
    Periodic,
}

/// The two halves of the drive: `H1 = t_y sin k sy`, `H2 = t_x cos k sx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    H1,
    H2,
}

fn check_cells(cells: usize) -> Result<()> {
    if cells < MIN_CELLS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_CELLS} cells, got {cells}"
        )));
    }
    Ok(())
}

pub fn build_real_space_step(p: &ModelParams, step: Step, cells: usize, bc: BoundaryCondition) -> Result<CMatrix> {
    check_cells(cells)?;
    let (pauli, amp) = match step {
        Step::H1 => (Axis::Y.pauli(), Complex64::new(0.0, 0.5 * p.ty)),
        Step::H2 => (Axis::X.pauli(), Complex64::new(0.5 * p.tx, 0.0)),
    };
    let mut h = CMatrix::zeros(2 * cells, 2 * cells);
    let bonds = match bc {
        BoundaryCondition::Open => cells - 1,
        BoundaryCondition::Periodic => cells,
    };
    for j in 0..bonds {
        let jn = (j + 1) % cells;
        for r in 0..2 {
            for c in 0..2 {
                let a = amp * pauli.get(r, c);
                h[(2 * jn + r, 2 * j + c)] += a;
                h[(2 * j + c, 2 * jn + r)] += a.conj();
            }
        }
    }
    Ok(h)
}

/// `exp(-i scale H)` for each requested scale, from one Hermitian eigendecomposition.
struct HermitianExp {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl HermitianExp {
    fn new(h: CMatrix) -> Self {
        let eig = SymmetricEigen::new(h);
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    fn exp(&self, scale: f64) -> CMatrix {
        let mut left = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -scale * lam);
            left.column_mut(j).iter_mut().for_each(|v| *v *= phase);
        }
        left * self.vectors.adjoint()
    }
}

pub fn real_space_floquet(p: &ModelParams, frame: Frame, cells: usize, bc: BoundaryCondition) -> Result<CMatrix> {
    let y = HermitianExp::new(build_real_space_step(p, Step::H1, cells, bc)?);
    let x = HermitianExp::new(build_real_space_step(p, Step::H2, cells, bc)?);
    Ok(match frame {
        Frame::Plain => x.exp(1.0) * y.exp(1.0),
        Frame::Sym1 => {
            let half = x.exp(0.5);
            &half * y.exp(1.0) * &half
        }
        Frame::Sym2 => {
            let half = y.exp(0.5);
            &half * x.exp(1.0) * &half
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpectrum {
    pub cells: usize,
    pub edge_cells: usize,
    /// Eigenphases in `(-pi, pi]`, ascending.
    pub phases: Vec<f64>,
    /// Eigenvectors as columns, in the order of `phases`.
    pub vectors: CMatrix,
    pub edge_left: Vec<f64>,
    pub edge_right: Vec<f64>,
}

impl LatticeSpectrum {
    pub fn edge_weight(&self, i: usize) -> f64 {
        self.edge_left[i] + self.edge_right[i]
    }
}

pub fn default_edge_cells(cells: usize) -> usize {
    (cells / 10).max(2)
}

/// Diagonalizes a unitary through its Hermitian parts `A = (U + U^dagger)/2` and
/// `B = (U - U^dagger)/(2i)`: eigenvectors of `A`, with each degenerate cluster
/// re-diagonalized by `B` restricted to it.
pub fn unitary_spectrum(u: &CMatrix, edge_cells: usize) -> Result<LatticeSpectrum> {
    let dim = u.nrows();
    if dim != u.ncols() || !dim.is_multiple_of(2) || dim == 0 {
        return Err(Error::InvalidArgument("expected a square matrix of even size".into()));
    }
    let cells = dim / 2;
    let ud = u.adjoint();
    let a = (u + &ud).scale(0.5);
    let b = (u - &ud) * Complex64::new(0.0, -0.5);

    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut vectors = CMatrix::zeros(dim, dim);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] < CLUSTER_TOL {
            end += 1;
        }
        let block = CMatrix::from_fn(dim, end - start, |r, c| eig.eigenvectors[(r, order[start + c])]);
        let resolved = if end - start == 1 {
            block
        } else {
            let restricted = block.adjoint() * &b * &block;
            let sub = SymmetricEigen::new(hermitize(&restricted));
            &block * sub.eigenvectors
        };
        vectors.columns_mut(start, end - start).copy_from(&resolved);
        start = end;
    }

    let mut phases: Vec<(f64, usize)> = (0..dim)
        .map(|c| {
            let v = vectors.column(c);
            let re = (v.adjoint() * &a * v)[(0, 0)].re;
            let im = (v.adjoint() * &b * v)[(0, 0)].re;
            (im.atan2(re), c)
        })
        .collect();
    phases.sort_by(|x, y| x.0.total_cmp(&y.0));
    let sorted = CMatrix::from_fn(dim, dim, |r, c| vectors[(r, phases[c].1)]);

    let edge_cells = edge_cells.min(cells);
    let weight = |col: usize, range: std::ops::Range<usize>| -> f64 {
        range.map(|r| sorted[(r, col)].norm_sqr()).sum()
    };
    let edge_left = (0..dim).map(|c| weight(c, 0..2 * edge_cells)).collect();
    let edge_right = (0..dim).map(|c| weight(c, dim - 2 * edge_cells..dim)).collect();

    Ok(LatticeSpectrum {
        cells,
        edge_cells,
        phases: phases.into_iter().map(|(p, _)| if p == -std::f64::consts::PI { -p } else { p }).collect(),
        vectors: sorted,
        edge_left,
        edge_right,
    })
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn lattice_spectrum(
    p: &ModelParams,
    frame: Frame,
    cells: usize,
    bc: BoundaryCondition,
    edge_cells: usize,
) -> Result<LatticeSpectrum> {
    unitary_spectrum(&real_space_floquet(p, frame, cells, bc)?, edge_cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    pub e_tol: f64,
    /// `None` uses [`default_edge_cells`].
    pub edge_cells: Option<usize>,
    pub weight_tol: f64,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        Self {
            e_tol: 1e-3,
            edge_cells: None,
            weight_tol: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCount {
    pub n_zero: usize,
    pub n_pi: usize,
}

/// Counts edge-localized eigenstates at phase 0 and pi in a spectrum.
pub fn classify_edge_modes(spec: &LatticeSpectrum, cfg: &EdgeConfig) -> EdgeCount {
    let mut count = EdgeCount { n_zero: 0, n_pi: 0 };
    for (i, &ph) in spec.phases.iter().enumerate() {
        if spec.edge_weight(i) <= cfg.weight_tol {
            continue;
        }
        if ph.abs() < cfg.e_tol {
            count.n_zero += 1;
        } else if (ph.abs() - std::f64::consts::PI).abs() < cfg.e_tol {
            count.n_pi += 1;
        }
    }
    count
}

/// Open-chain spectrum after checking that both bulk gaps exceed `2 e_tol`.
pub fn open_spectrum_checked(p: &ModelParams, frame: Frame, cells: usize, cfg: &EdgeConfig) -> Result<LatticeSpectrum> {
    check_cells(cells)?;
    let gap_zero = min_gap(p, Gap::Zero, DEFAULT_RESOLUTION);
    let gap_pi = min_gap(p, Gap::Pi, DEFAULT_RESOLUTION);
    let required = 2.0 * cfg.e_tol;
    if gap_zero <= required || gap_pi <= required {
        return Err(Error::BulkGapTooSmall {
            gap_zero,
            gap_pi,
            required,
        });
    }
    let edge_cells = cfg.edge_cells.unwrap_or_else(|| default_edge_cells(cells));
    lattice_spectrum(p, frame, cells, BoundaryCondition::Open, edge_cells)
}

pub fn count_edge_modes(p: &ModelParams, frame: Frame, cells: usize, cfg: &EdgeConfig) -> Result<EdgeCount> {
    Ok(classify_edge_modes(&open_spectrum_checked(p, frame, cells, cfg)?, cfg))
}
