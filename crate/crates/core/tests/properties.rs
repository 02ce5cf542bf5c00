use std::f64::consts::{PI, TAU};

use floquet_core::model::{bloch_axis, floquet_operator, quasienergy, step_angles};
use floquet_core::pulsegen::{compile_schedule, simulate_schedule, CompileOptions};
use floquet_core::quench::{evolve_polarizations, QuenchSpec};
use floquet_core::spinalg::{distance_up_to_phase, max_abs_diff, pauli_decompose, su2_exp, Axis, Unitary2};
use floquet_core::topology::{accumulated_winding, min_gap, winding_number, Gap};
use floquet_core::{Frame, ModelParams};
use proptest::prelude::*;

fn frame() -> impl Strategy<Value = Frame> {
    prop_oneof![Just(Frame::Plain), Just(Frame::Sym1), Just(Frame::Sym2)]
}

fn chiral_frame() -> impl Strategy<Value = Frame> {
    prop_oneof![Just(Frame::Sym1), Just(Frame::Sym2)]
}

fn unit_axis() -> impl Strategy<Value = [f64; 3]> {
    (-1.0..1.0f64, -PI..PI).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        [r * phi.cos(), r * phi.sin(), z]
    })
}

/// Winding of `(c_x, c_y)` as a trapezoid sum of `(c_x c_y' - c_y c_x') / |c|^2`,
/// with the fields and their derivatives written out from the expanded products.
fn winding_integral(p: &ModelParams, frame: Frame, m: usize) -> f64 {
    let mut sum = 0.0;
    for j in 0..m {
        let k = -PI + TAU * j as f64 / m as f64;
        let (a, b) = step_angles(k, p);
        let (da, db) = (-p.tx * k.sin(), p.ty * k.cos());
        let (cx, cy, dcx, dcy) = match frame {
            Frame::Sym1 => (
                b.cos() * a.sin(),
                b.sin(),
                -b.sin() * a.sin() * db + b.cos() * a.cos() * da,
                b.cos() * db,
            ),
            Frame::Sym2 => (
                a.sin(),
                a.cos() * b.sin(),
                a.cos() * da,
                -a.sin() * b.sin() * da + a.cos() * b.cos() * db,
            ),
            Frame::Plain => unreachable!(),
        };
        sum += (cx * dcy - cy * dcx) / (cx * cx + cy * cy);
    }
    sum / m as f64
}

fn gapped(p: &ModelParams, margin: f64) -> bool {
    min_gap(p, Gap::Zero, 2048) > margin && min_gap(p, Gap::Pi, 2048) > margin
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn long_products_stay_unitary(axes in prop::collection::vec((unit_axis(), -10.0..10.0f64), 10_000)) {
        let mut u = Unitary2::identity();
        for (n, theta) in &axes {
            u = su2_exp(*n, *theta).unwrap() * u;
        }
        prop_assert!(u.unitarity_deviation() < 1e-9);
    }

    #[test]
    fn decompose_round_trip(n in unit_axis(), theta in -7.0..7.0f64, phase in -PI..PI) {
        let u = su2_exp(n, theta).unwrap().scale(num_complex::Complex64::from_polar(1.0, phase));
        let c = pauli_decompose(&u).unwrap();
        prop_assert!(max_abs_diff(&Unitary2::from_pauli(&c), &u) < 1e-12);
    }

    #[test]
    fn double_cover(n in unit_axis(), theta in -7.0..7.0f64) {
        let u = su2_exp(n, theta).unwrap();
        let half = su2_exp(n, theta + PI).unwrap();
        let full = su2_exp(n, theta + TAU).unwrap();
        prop_assert!(max_abs_diff(&half, &u.scale((-1.0).into())) < 1e-12);
        prop_assert!(max_abs_diff(&full, &u) < 1e-12);
    }

    #[test]
    fn operator_is_periodic_in_k(k in -PI..PI, tx in 0.0..10.0f64, ty in 0.0..10.0f64, f in frame()) {
        let p = ModelParams::new(tx, ty);
        let a = floquet_operator(k, &p, f);
        let b = floquet_operator(k + TAU, &p, f);
        prop_assert!(max_abs_diff(&a, &b) < 1e-12);
        prop_assert!((quasienergy(k, &p) - quasienergy(k + TAU, &p)).abs() < 1e-12);
    }

    #[test]
    fn chiral_frames_have_planar_axes(k in -PI..PI, tx in 0.0..10.0f64, ty in 0.0..10.0f64, f in chiral_frame()) {
        let p = ModelParams::new(tx, ty);
        let u = floquet_operator(k, &p, f);
        let z = Axis::Z.pauli();
        prop_assert!(max_abs_diff(&(z * u * z), &u.adjoint()) < 1e-12);
        if let Ok(ax) = bloch_axis(k, &p, f) {
            prop_assert!(ax.n[2].abs() < 1e-10);
        }
    }

    #[test]
    fn winding_matches_integral(tx in 0.0..3.0 * PI, ty in 0.0..3.0 * PI, f in chiral_frame()) {
        let p = ModelParams::new(tx, ty);
        prop_assume!(gapped(&p, 0.05));
        let w = winding_number(&p, f, 2048).unwrap();
        let integral = winding_integral(&p, f, 1 << 16);
        prop_assert!((integral - f64::from(w)).abs() < 1e-3, "{} vs {}", integral, w);
    }

    #[test]
    fn winding_is_quantized_and_stable(tx in 0.0..3.0 * PI, ty in 0.0..3.0 * PI, f in chiral_frame()) {
        let p = ModelParams::new(tx, ty);
        prop_assume!(gapped(&p, 0.05));
        let raw = accumulated_winding(&p, f, 4096).unwrap();
        prop_assert!((raw - raw.round()).abs() < 1e-6);
        prop_assert_eq!(winding_number(&p, f, 1024).unwrap(), winding_number(&p, f, 2048).unwrap());
    }

    #[test]
    fn schedule_round_trip(k in -PI..PI, tx in -10.0..10.0f64, ty in -10.0..10.0f64, f in frame(), n in 1u32..=20) {
        let p = ModelParams::new(tx, ty);
        let s = compile_schedule(k, &p, f, &CompileOptions::new(n, 1.0e7)).unwrap();
        let target = floquet_operator(k, &p, f).pow(n);
        prop_assert!(distance_up_to_phase(&simulate_schedule(&s).unwrap(), &target) < 1e-10);
        let total: f64 = s.pulses.iter().map(|q| q.angle_rad / 1.0e7).sum();
        prop_assert_eq!(s.total_duration(), total);
    }
}

#[test]
fn noise_free_series_stay_on_the_sphere() {
    for (tx, ty) in [(0.5, 0.5), (2.5, 0.5), (1.3, 2.2)] {
        for f in Frame::SYMMETRIC {
            let spec = QuenchSpec::new(ModelParams::in_pi_units(tx, ty), f, 60, 64);
            let trace = evolve_polarizations(&spec).unwrap();
            for series in &trace.series {
                for v in series {
                    let norm = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                    assert!((norm - 1.0).abs() < 1e-10);
                }
            }
        }
    }
}
