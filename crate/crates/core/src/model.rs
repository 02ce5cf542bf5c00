//! Momentum-space drive: step angles, one-period Floquet operators and the
//! Bloch-axis field of the symmetric frames.
//!
//! The half-period exponents are `theta_x = t_x cos k` and `theta_y = t_y sin k`,
//! so one period of the plain frame is `exp(-i theta_x sx) exp(-i theta_y sy)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spinalg::{pauli_decompose, Axis, Unitary2};

/// Quasienergies closer than this to 0 or pi are treated as gap closings.
pub const TOL_GAP: f64 = 1e-9;

/// Drive amplitudes `(t_x, t_y)`, dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub tx: f64,
    pub ty: f64,
}

impl ModelParams {
    pub fn new(tx: f64, ty: f64) -> Self {
        Self { tx, ty }
    }

    /// Amplitudes given in units of pi.
    pub fn in_pi_units(tx: f64, ty: f64) -> Self {
        Self::new(tx * std::f64::consts::PI, ty * std::f64::consts::PI)
    }

    pub fn is_undriven(&self) -> bool {
        self.tx == 0.0 && self.ty == 0.0
    }
}

/// Starting point of the drive period.
///
/// `Sym1` starts in the middle of the x step and `Sym2` in the middle of the
/// y step. Both are conjugate to `Plain` and both are chiral under `sigma_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Plain,
    Sym1,
    Sym2,
}

impl Frame {
    pub const SYMMETRIC: [Frame; 2] = [Frame::Sym1, Frame::Sym2];

    pub fn is_chiral(self) -> bool {
        !matches!(self, Frame::Plain)
    }

    /// Bloch component that vanishes on the band-inversion surface of this frame's quench.
    pub fn quench_axis(self) -> Result<Axis> {
        match self {
            Frame::Sym1 => Ok(Axis::Y),
            Frame::Sym2 => Ok(Axis::X),
            Frame::Plain => Err(Error::NotChiralFrame(self)),
        }
    }

    /// The in-plane component whose slope is read at the band-inversion surface.
    pub fn slope_axis(self) -> Result<Axis> {
        match self {
            Frame::Sym1 => Ok(Axis::X),
            Frame::Sym2 => Ok(Axis::Y),
            Frame::Plain => Err(Error::NotChiralFrame(self)),
        }
    }
}

/// `(theta_x, theta_y) = (t_x cos k, t_y sin k)`.
pub fn step_angles(k: f64, p: &ModelParams) -> (f64, f64) {
    let (s, c) = k.sin_cos();
    (p.tx * c, p.ty * s)
}

/// One period as a list of Pauli rotations, first-applied first.
pub fn step_sequence(k: f64, p: &ModelParams, frame: Frame) -> Vec<(Axis, f64)> {
    let (tx, ty) = step_angles(k, p);
    match frame {
        Frame::Plain => vec![(Axis::Y, ty), (Axis::X, tx)],
        Frame::Sym1 => vec![(Axis::X, 0.5 * tx), (Axis::Y, ty), (Axis::X, 0.5 * tx)],
        Frame::Sym2 => vec![(Axis::Y, 0.5 * ty), (Axis::X, tx), (Axis::Y, 0.5 * ty)],
    }
}

pub fn floquet_operator(k: f64, p: &ModelParams, frame: Frame) -> Unitary2 {
    step_sequence(k, p, frame)
        .into_iter()
        .fold(Unitary2::identity(), |acc, (axis, angle)| {
            Unitary2::rotation(axis, angle) * acc
        })
}

/// `E(k) = arccos(cos theta_x cos theta_y)` in `[0, pi]`.
pub fn quasienergy(k: f64, p: &ModelParams) -> f64 {
    let (tx, ty) = step_angles(k, p);
    (tx.cos() * ty.cos()).clamp(-1.0, 1.0).acos()
}

/// Unit axis `n` and quasienergy `E` with `U = exp(-i E n.sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAxis {
    pub energy: f64,
    pub n: [f64; 3],
}

impl BlochAxis {
    pub fn component(&self, axis: Axis) -> f64 {
        self.n[axis.index()]
    }

    /// Planar angle `atan2(n_y, n_x)`.
    pub fn angle(&self) -> f64 {
        self.n[1].atan2(self.n[0])
    }
}

pub fn bloch_axis(k: f64, p: &ModelParams, frame: Frame) -> Result<BlochAxis> {
    bloch_axis_with_tol(k, p, frame, TOL_GAP)
}

pub fn bloch_axis_with_tol(k: f64, p: &ModelParams, frame: Frame, tol_gap: f64) -> Result<BlochAxis> {
    if !frame.is_chiral() {
        return Err(Error::NotChiralFrame(frame));
    }
    let c = pauli_decompose(&floquet_operator(k, p, frame))?;
    let energy = c.energy();
    let s = energy.sin();
    if energy < tol_gap || std::f64::consts::PI - energy < tol_gap || s == 0.0 {
        return Err(Error::GaplessPoint { k, energy });
    }
    Ok(BlochAxis {
        energy,
        n: c.vector().map(|v| v / s),
    })
}
