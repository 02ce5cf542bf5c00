//! Exact two-level algebra.
//!
//! Matrices act on the basis `(|e>, |g>)`: the excited level `|e>` is spin up
//! (`sigma_z = +1`) and the ground level `|g>` is spin down. Every exponential
//! uses the convention `exp(-i * angle * n.sigma) = cos(angle) I - i sin(angle) n.sigma`.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance for algebraic identities.
pub const TOL: f64 = 1e-12;

/// Unitarity tolerance used to reject inputs to [`pauli_decompose`].
pub const UNITARY_CHECK_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A Pauli direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn pauli(self) -> Unitary2 {
        match self {
            Axis::X => Unitary2::new([[ZERO, ONE], [ONE, ZERO]]),
            Axis::Y => Unitary2::new([[ZERO, -I], [I, ZERO]]),
            Axis::Z => Unitary2::new([[ONE, ZERO], [ZERO, -ONE]]),
        }
    }
}

/// A 2x2 complex matrix, unitary whenever it comes out of this crate's constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: [[Complex64; 2]; 2],
}

impl Unitary2 {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    /// `exp(-i angle sigma_axis)` for a Pauli axis; never fails.
    pub fn rotation(axis: Axis, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let p = axis.pauli();
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (col, v) in row.iter_mut().enumerate() {
                let id = if r == col { c } else { 0.0 };
                *v = Complex64::new(id, 0.0) - I * s * p.m[r][col];
            }
        }
        Self { m }
    }

    /// Rebuild `phase * (c0 I - i (cx sx + cy sy + cz sz))`.
    pub fn from_pauli(c: &PauliCoeffs) -> Self {
        let g = Complex64::from_polar(1.0, c.phase);
        let m = [
            [
                g * Complex64::new(c.c0, -c.cz),
                g * Complex64::new(-c.cy, -c.cx),
            ],
            [
                g * Complex64::new(c.cy, -c.cx),
                g * Complex64::new(c.c0, c.cz),
            ],
        ];
        Self { m }
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.m[r][c]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|v| *v *= z);
        out
    }

    /// Largest entrywise modulus of `U^dagger U - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint() * *self;
        max_abs_diff(&p, &Self::identity())
    }

    /// `self^n` by repeated squaring.
    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = *self;
        let mut acc = Self::identity();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn apply(&self, s: &SpinState) -> SpinState {
        let a = s.amplitudes();
        SpinState::from_raw([
            self.m[0][0] * a[0] + self.m[0][1] * a[1],
            self.m[1][0] * a[0] + self.m[1][1] * a[1],
        ])
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let a = &self.m;
        let b = &rhs.m;
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Unitary2 { m }
    }
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &Unitary2, b: &Unitary2) -> f64 {
    a.m.iter()
        .flatten()
        .zip(b.m.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Frobenius distance `min_phi ||a - e^{i phi} b||`.
pub fn distance_up_to_phase(a: &Unitary2, b: &Unitary2) -> f64 {
    let overlap = (b.adjoint() * *a).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    let bb = b.scale(phase);
    a.m.iter()
        .flatten()
        .zip(bb.m.iter().flatten())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Pauli decomposition `U = e^{i phase} (c0 I - i (cx sx + cy sy + cz sz))`.
///
/// The global phase is removed so that the remainder lies in SU(2). When `det U`
/// is already 1 the phase is zero, so `c0 = cos E` keeps its sign and `E` spans `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliCoeffs {
    pub phase: f64,
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
}

impl PauliCoeffs {
    pub fn vector(&self) -> [f64; 3] {
        [self.cx, self.cy, self.cz]
    }

    /// Rotation half-angle `E = arccos(c0)` in `[0, pi]`.
    pub fn energy(&self) -> f64 {
        self.c0.clamp(-1.0, 1.0).acos()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0 * self.c0 + self.cx * self.cx + self.cy * self.cy + self.cz * self.cz
    }
}

/// `exp(-i angle (n.sigma))` with `n = axis / |axis|`.
pub fn su2_exp(axis: [f64; 3], angle: f64) -> Result<Unitary2> {
    if !angle.is_finite() || axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite axis or angle".into()));
    }
    let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        if angle == 0.0 {
            return Ok(Unitary2::identity());
        }
        return Err(Error::DegenerateAxis);
    }
    let [nx, ny, nz] = axis.map(|v| v / norm);
    let (s, c) = angle.sin_cos();
    Ok(Unitary2::from_pauli(&PauliCoeffs {
        phase: 0.0,
        c0: c,
        cx: s * nx,
        cy: s * ny,
        cz: s * nz,
    }))
}

pub fn pauli_decompose(u: &Unitary2) -> Result<PauliCoeffs> {
    let deviation = u.unitarity_deviation();
    if deviation > UNITARY_CHECK_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let phase = u.det().arg() / 2.0;
    let v = u.scale(Complex64::from_polar(1.0, -phase));
    let m = v.entries();
    let c0 = (m[0][0] + m[1][1]) * 0.5;
    let cz = (m[0][0] - m[1][1]) * I * 0.5;
    let cx = (m[0][1] + m[1][0]) * I * 0.5;
    let cy = (m[1][0] - m[0][1]) * 0.5;
    Ok(PauliCoeffs {
        phase,
        c0: c0.re,
        cx: cx.re,
        cy: cy.re,
        cz: cz.re,
    })
}

/// A normalized pure state over `(|e>, |g>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    amps: [Complex64; 2],
}

impl SpinState {
    /// Normalizes the given amplitudes over `(|e>, |g>)`.
    pub fn new(amps: [Complex64; 2]) -> Result<Self> {
        let n = (amps[0].norm_sqr() + amps[1].norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument("zero or non-finite state".into()));
        }
        Ok(Self {
            amps: [amps[0] / n, amps[1] / n],
        })
    }

    /// `a_g |g> + a_e |e>`, normalized; argument order follows the ket notation.
    pub fn from_ground_excited(g: Complex64, e: Complex64) -> Result<Self> {
        Self::new([e, g])
    }

    pub fn excited() -> Self {
        Self { amps: [ONE, ZERO] }
    }

    pub fn ground() -> Self {
        Self { amps: [ZERO, ONE] }
    }

    fn from_raw(amps: [Complex64; 2]) -> Self {
        Self { amps }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        (self.amps[0].norm_sqr() + self.amps[1].norm_sqr()).sqrt()
    }

    /// Bloch vector `(<sx>, <sy>, <sz>)`.
    pub fn bloch(&self) -> [f64; 3] {
        let [a, b] = self.amps;
        let cross = a.conj() * b;
        [
            2.0 * cross.re,
            2.0 * cross.im,
            a.norm_sqr() - b.norm_sqr(),
        ]
    }
}

pub fn expectation(state: &SpinState, axis: Axis) -> f64 {
    state.bloch()[axis.index()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn approx_eq(a: &Unitary2, b: &Unitary2, tol: f64) -> bool {
        max_abs_diff(a, b) <= tol
    }

    #[test]
    fn zero_angle_is_identity() {
        for axis in [[1.0, 0.0, 0.0], [0.3, -2.0, 0.7], [0.0, 0.0, 5.0]] {
            let u = su2_exp(axis, 0.0).unwrap();
            assert!(approx_eq(&u, &Unitary2::identity(), TOL));
        }
        assert!(approx_eq(
            &su2_exp([0.0; 3], 0.0).unwrap(),
            &Unitary2::identity(),
            0.0
        ));
    }

    #[test]
    fn quarter_turn_about_x() {
        let u = su2_exp([1.0, 0.0, 0.0], FRAC_PI_2).unwrap();
        let expect = Axis::X.pauli().scale(-I);
        assert!(approx_eq(&u, &expect, TOL));
    }

    #[test]
    fn same_axis_angles_add() {
        let a = su2_exp([1.0, 0.0, 0.0], 0.3).unwrap();
        let b = su2_exp([1.0, 0.0, 0.0], 0.4).unwrap();
        let c = su2_exp([1.0, 0.0, 0.0], 0.7).unwrap();
        assert!(approx_eq(&(a * b), &c, TOL));
    }

    #[test]
    fn degenerate_axis_rejected() {
        assert_eq!(su2_exp([0.0; 3], 0.1), Err(Error::DegenerateAxis));
    }

    #[test]
    fn axis_is_normalized() {
        let a = su2_exp([0.0, 3.0, 0.0], 0.9).unwrap();
        let b = Unitary2::rotation(Axis::Y, 0.9);
        assert!(approx_eq(&a, &b, TOL));
    }

    #[test]
    fn decompose_identity() {
        let c = pauli_decompose(&Unitary2::identity()).unwrap();
        assert!((c.c0 - 1.0).abs() < TOL);
        assert!(c.vector().iter().all(|v| v.abs() < TOL));
    }

    #[test]
    fn decompose_quarter_turn_about_y() {
        let c = pauli_decompose(&su2_exp([0.0, 1.0, 0.0], FRAC_PI_2).unwrap()).unwrap();
        assert!(c.c0.abs() < TOL);
        assert!((c.cy - 1.0).abs() < TOL);
        assert!(c.cx.abs() < TOL && c.cz.abs() < TOL);
    }

    #[test]
    fn decompose_keeps_sign_of_c0_for_su2() {
        // E > pi/2 must survive the round trip so that both gaps stay visible
        let u = su2_exp([0.6, 0.8, 0.0], 2.5).unwrap();
        let c = pauli_decompose(&u).unwrap();
        assert!((c.energy() - 2.5).abs() < 1e-12);
        assert!((c.cx - 2.5f64.sin() * 0.6).abs() < TOL);
        assert!((c.cy - 2.5f64.sin() * 0.8).abs() < TOL);
    }

    #[test]
    fn decompose_strips_global_phase() {
        let u = su2_exp([0.2, -0.5, 0.3], 1.1).unwrap();
        let v = u.scale(Complex64::from_polar(1.0, 0.4));
        let c = pauli_decompose(&v).unwrap();
        assert!((c.phase - 0.4).abs() < TOL);
        assert!(approx_eq(&Unitary2::from_pauli(&c), &v, TOL));
        assert!((c.norm_sqr() - 1.0).abs() < TOL);
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Unitary2::new([[ONE, ONE], [ZERO, ONE]]);
        assert!(matches!(pauli_decompose(&m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn turn_by_pi_negates() {
        let n = [0.3, 0.4, -0.2];
        let a = su2_exp(n, 0.8).unwrap();
        let b = su2_exp(n, 0.8 + PI).unwrap();
        assert!(approx_eq(&b, &a.scale(-ONE), TOL));
        let c = su2_exp(n, 0.8 + 2.0 * PI).unwrap();
        assert!(approx_eq(&c, &a, TOL));
        let (ca, cc) = (pauli_decompose(&a).unwrap(), pauli_decompose(&c).unwrap());
        assert!((ca.energy() - cc.energy()).abs() < 1e-10);
        for (x, y) in ca.vector().iter().zip(cc.vector()) {
            assert!((x - y).abs() < TOL);
        }
    }

    #[test]
    fn spin_expectations() {
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        // (|g> - i|e>)/sqrt2 is the +1 eigenvector of sigma_y in the (e, g) basis
        let s = SpinState::from_ground_excited(r, -I * r).unwrap();
        assert!((expectation(&s, Axis::Y) - 1.0).abs() < TOL);
        let s = SpinState::from_ground_excited(r, -r).unwrap();
        assert!((expectation(&s, Axis::X) + 1.0).abs() < TOL);
        assert!(expectation(&SpinState::ground(), Axis::X).abs() < TOL);
        assert!((expectation(&SpinState::ground(), Axis::Z) + 1.0).abs() < TOL);
        assert!((expectation(&SpinState::excited(), Axis::Z) - 1.0).abs() < TOL);
    }

    #[test]
    fn pow_matches_repeated_product() {
        let u = su2_exp([0.1, 0.9, 0.4], 0.77).unwrap();
        let mut acc = Unitary2::identity();
        for _ in 0..13 {
            acc = acc * u;
        }
        assert!(approx_eq(&u.pow(13), &acc, 1e-12));
    }

    #[test]
    fn distance_ignores_global_phase() {
        let u = su2_exp([0.1, 0.9, 0.4], 0.77).unwrap();
        let v = u.scale(Complex64::from_polar(1.0, 2.1));
        assert!(distance_up_to_phase(&u, &v) < 1e-14);
        let w = su2_exp([0.1, 0.9, 0.4], 0.78).unwrap();
        assert!(distance_up_to_phase(&u, &w) > 1e-3);
    }
}
