//! Microwave pulse schedules for the drive sequence.
//!
//! A pulse of angle `a` about axis `s` implements `exp(-i a s)`, i.e. a Rabi
//! frequency `Omega` held for `a / Omega`.
//!
//! A rotation about x is a pulse at phase 0 deg, about y at 90 deg. Negative
//! angles become positive ones with the phase advanced by 180 deg.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{step_sequence, Frame, ModelParams};
use crate::spinalg::{Axis, Unitary2};

pub const SCHEDULE_FORMAT: u32 = 1;
/// Pulses shorter than this are dropped unless zero slots are kept; catches
/// `cos(pi/2)` and friends, which are not exactly zero in floating point.
pub const ZERO_ANGLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub phase_deg: u32,
    pub angle_rad: f64,
    pub duration_s: f64,
}

impl Pulse {
    /// Rotation axis implied by the phase: `(cos phi, sin phi, 0)`.
    pub fn axis(&self) -> Result<(Axis, f64)> {
        match self.phase_deg {
            0 => Ok((Axis::X, 1.0)),
            90 => Ok((Axis::Y, 1.0)),
            180 => Ok((Axis::X, -1.0)),
            270 => Ok((Axis::Y, -1.0)),
            other => Err(Error::InvalidArgument(format!("pulse phase {other} deg"))),
        }
    }

    pub fn unitary(&self) -> Result<Unitary2> {
        let (axis, sign) = self.axis()?;
        Ok(Unitary2::rotation(axis, sign * self.angle_rad))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub format: u32,
    pub omega_ref_hz: f64,
    pub pulses: Vec<Pulse>,
}

impl PulseSchedule {
    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration_s).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    pub repetitions: u32,
    pub omega_ref_hz: f64,
    /// Keep zero-angle pulses as empty slots.
    pub keep_zero: bool,
}

impl CompileOptions {
    pub fn new(repetitions: u32, omega_ref_hz: f64) -> Self {
        Self {
            repetitions,
            omega_ref_hz,
            keep_zero: false,
        }
    }
}

fn pulse(axis: Axis, angle: f64, omega: f64) -> Pulse {
    let base = match axis {
        Axis::X => 0,
        Axis::Y => 90,
        Axis::Z => unreachable!("drive has no z rotations"),
    };
    let (phase_deg, angle_rad) = if angle < 0.0 { (base + 180, -angle) } else { (base, angle) };
    Pulse {
        phase_deg,
        angle_rad,
        duration_s: angle_rad / omega,
    }
}

pub fn compile_schedule(k: f64, p: &ModelParams, frame: Frame, opts: &CompileOptions) -> Result<PulseSchedule> {
    if !(opts.omega_ref_hz > 0.0 && opts.omega_ref_hz.is_finite()) {
        return Err(Error::InvalidArgument("reference Rabi frequency must be positive".into()));
    }
    if opts.repetitions == 0 {
        return Err(Error::InvalidArgument("need at least one repetition".into()));
    }
    let period: Vec<Pulse> = step_sequence(k, p, frame)
        .into_iter()
        .filter(|&(_, a)| opts.keep_zero || a.abs() >= ZERO_ANGLE)
        .map(|(axis, a)| pulse(axis, a, opts.omega_ref_hz))
        .collect();
    let pulses = (0..opts.repetitions).flat_map(|_| period.iter().copied()).collect();
    Ok(PulseSchedule {
        format: SCHEDULE_FORMAT,
        omega_ref_hz: opts.omega_ref_hz,
        pulses,
    })
}

/// Product of the pulse rotations, first pulse rightmost.
pub fn simulate_schedule(s: &PulseSchedule) -> Result<Unitary2> {
    s.pulses
        .iter()
        .try_fold(Unitary2::identity(), |acc, p| Ok(p.unitary()? * acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::floquet_operator;
    use crate::spinalg::distance_up_to_phase;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn plain_at_zero_momentum() {
        let p = ModelParams::new(1.2, 0.7);
        let s = compile_schedule(0.0, &p, Frame::Plain, &CompileOptions::new(1, 1e6)).unwrap();
        assert_eq!(s.pulses.len(), 1);
        assert_eq!(s.pulses[0].phase_deg, 0);
        assert!((s.pulses[0].angle_rad - 1.2).abs() < 1e-15);

        let opts = CompileOptions {
            keep_zero: true,
            ..CompileOptions::new(1, 1e6)
        };
        let s = compile_schedule(0.0, &p, Frame::Plain, &opts).unwrap();
        assert_eq!(s.pulses.len(), 2);
        assert_eq!(s.pulses[0].phase_deg, 90);
        assert_eq!(s.pulses[0].duration_s, 0.0);
    }

    #[test]
    fn symmetric_frame_has_three_pulses_per_period() {
        let p = ModelParams::in_pi_units(0.5, 0.5);
        let s = compile_schedule(FRAC_PI_4, &p, Frame::Sym2, &CompileOptions::new(1, 2.0)).unwrap();
        let phases: Vec<u32> = s.pulses.iter().map(|q| q.phase_deg).collect();
        assert_eq!(phases, vec![90, 0, 90]);
        let half_y = 0.5 * p.ty * FRAC_PI_4.sin();
        assert!((s.pulses[0].angle_rad - half_y).abs() < 1e-15);
        assert!((s.pulses[1].angle_rad - p.tx * FRAC_PI_4.cos()).abs() < 1e-15);

        let s = compile_schedule(FRAC_PI_4, &p, Frame::Sym1, &CompileOptions::new(10, 2.0)).unwrap();
        assert_eq!(s.pulses.len(), 30);
    }

    #[test]
    fn vanishing_x_step_is_elided() {
        let p = ModelParams::in_pi_units(2.5, 0.5);
        let s = compile_schedule(FRAC_PI_2, &p, Frame::Sym2, &CompileOptions::new(3, 1.0)).unwrap();
        assert!(s.pulses.iter().all(|q| q.phase_deg % 180 == 90));
        assert_eq!(s.pulses.len(), 6);
        let s = compile_schedule(0.0, &p, Frame::Sym2, &CompileOptions::new(3, 1.0)).unwrap();
        assert!(s.pulses.iter().all(|q| q.phase_deg % 180 == 0));
        assert_eq!(s.pulses.len(), 3);
    }

    #[test]
    fn negative_angles_shift_phase() {
        let p = ModelParams::new(-1.0, 1.0);
        let s = compile_schedule(0.0, &p, Frame::Plain, &CompileOptions::new(1, 1.0)).unwrap();
        assert_eq!(s.pulses[0].phase_deg, 180);
        assert!((s.pulses[0].angle_rad - 1.0).abs() < 1e-15);
    }

    #[test]
    fn durations() {
        let p = ModelParams::new(2.0, 3.0);
        let s = compile_schedule(0.9, &p, Frame::Sym1, &CompileOptions::new(4, 5.0)).unwrap();
        let angles: f64 = s.pulses.iter().map(|q| q.angle_rad).sum();
        assert!((s.total_duration() - angles / 5.0).abs() < 1e-14);
        for q in &s.pulses {
            assert_eq!(q.duration_s, q.angle_rad / 5.0);
        }
    }

    #[test]
    fn simulate_examples() {
        let empty = PulseSchedule {
            format: SCHEDULE_FORMAT,
            omega_ref_hz: 1.0,
            pulses: vec![],
        };
        assert_eq!(simulate_schedule(&empty).unwrap(), Unitary2::identity());
        // angles are exponents of exp(-i angle sigma), so a spin flip takes pi/2
        let flip = PulseSchedule {
            pulses: vec![pulse(Axis::X, FRAC_PI_2, 1.0)],
            ..empty.clone()
        };
        let u = simulate_schedule(&flip).unwrap();
        assert!(distance_up_to_phase(&u, &Axis::X.pauli()) < 1e-12);
        let full = PulseSchedule {
            pulses: vec![pulse(Axis::X, PI, 1.0)],
            ..empty
        };
        let u = simulate_schedule(&full).unwrap();
        assert!(distance_up_to_phase(&u, &Unitary2::identity()) < 1e-12);
    }

    #[test]
    fn round_trip() {
        let p = ModelParams::new(4.1, -2.3);
        for frame in [Frame::Plain, Frame::Sym1, Frame::Sym2] {
            let s = compile_schedule(-2.2, &p, frame, &CompileOptions::new(7, 1.0)).unwrap();
            let target = floquet_operator(-2.2, &p, frame).pow(7);
            assert!(distance_up_to_phase(&simulate_schedule(&s).unwrap(), &target) < 1e-10);
        }
    }

    #[test]
    fn bad_options() {
        let p = ModelParams::new(1.0, 1.0);
        assert!(compile_schedule(0.1, &p, Frame::Plain, &CompileOptions::new(0, 1.0)).is_err());
        assert!(compile_schedule(0.1, &p, Frame::Plain, &CompileOptions::new(1, 0.0)).is_err());
    }

    #[test]
    fn json_shape() {
        let p = ModelParams::new(1.0, 1.0);
        let s = compile_schedule(0.3, &p, Frame::Plain, &CompileOptions::new(1, 1.0)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert_eq!(v["format"], 1);
        assert!(v["pulses"][0]["phase_deg"].is_u64());
    }
}
