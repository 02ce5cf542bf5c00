//! Digital quench: stroboscopic evolution under a symmetric-frame Floquet
//! operator, time-averaged spin polarizations, and the read-out of winding
//! numbers from band-inversion surfaces (BIS).
//!
//! Sym1 is a y-direction quench starting from `(|g> - i|e>)/sqrt2`, Sym2 an
//! x-direction quench starting from `(|g> - |e>)/sqrt2`. The BIS of a frame is
//! where its quench-direction Bloch component vanishes; there the quench-direction
//! average vanishes and the slope of the other in-plane average gives `g = +-1`.
//! With `k_perp` pointing from `n_q < 0` to `n_q > 0`, points where `n_q` decreases
//! along `+k` form `k+` and the rest `k-`, and `nu = (sum_{k+} g - sum_{k-} g) / 2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bloch_axis, floquet_operator, Frame, ModelParams};
use crate::spinalg::{Axis, SpinState};
use crate::topology::k_grid;

/// Smallest accepted `|d<sigma_o>/dk|` at a BIS of a shot-sampled trace.
pub const DEFAULT_SLOPE_MIN: f64 = 0.2;
/// Same for noise-free traces, where only finite-N ripple competes with the slope.
pub const DEFAULT_SLOPE_MIN_EXACT: f64 = 0.02;

/// BIS detection floor for the quench-direction average. Candidates are only
/// kept when a zero of `n_q` lies nearby, so a generous floor costs nothing but
/// a few extra root searches; short runs dephase less and need more room.
pub fn default_floor_tol(steps: u32) -> f64 {
    if steps >= 60 {
        0.5
    } else {
        0.7
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchSpec {
    pub params: ModelParams,
    pub frame: Frame,
    /// Number of Floquet periods `N`.
    pub steps: u32,
    /// Size of the uniform periodic k-grid.
    pub grid: usize,
    pub shots: Option<u64>,
    pub seed: u64,
}

impl QuenchSpec {
    pub fn new(params: ModelParams, frame: Frame, steps: u32, grid: usize) -> Self {
        Self {
            params,
            frame,
            steps,
            grid,
            shots: None,
            seed: 0,
        }
    }

    pub fn with_shots(mut self, shots: u64, seed: u64) -> Self {
        self.shots = Some(shots);
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("step count must be at least 1".into()));
        }
        if self.grid < 8 {
            return Err(Error::InvalidArgument("k-grid needs at least 8 points".into()));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        self.frame.quench_axis().map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionConfig {
    /// `None` picks [`default_floor_tol`] from the step count.
    pub floor_tol: Option<f64>,
    /// `None` picks [`DEFAULT_SLOPE_MIN`] for sampled traces and
    /// [`DEFAULT_SLOPE_MIN_EXACT`] otherwise.
    pub slope_min: Option<f64>,
    /// Grid points searched on each side of a candidate for a sign change of
    /// `n_q`; `None` uses `grid / 32`.
    pub search_window: Option<usize>,
}


#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledAverages {
    pub shots: u64,
    pub x: Vec<Estimate>,
    pub y: Vec<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationTrace {
    pub params: ModelParams,
    pub frame: Frame,
    pub steps: u32,
    pub k: Vec<f64>,
    /// Per k, the Bloch vector after each period `t = 1..=N`.
    pub series: Vec<Vec<[f64; 3]>>,
    /// Per k, `(1/N) sum_{t=1}^{N}` of the series.
    pub average: Vec<[f64; 3]>,
    pub sampled: Option<SampledAverages>,
}

impl PolarizationTrace {
    pub fn exact(&self, axis: Axis) -> Vec<f64> {
        self.average.iter().map(|v| v[axis.index()]).collect()
    }

    /// Sampled averages when shots were requested, otherwise the exact ones.
    pub fn measured(&self, axis: Axis) -> Vec<f64> {
        match (&self.sampled, axis) {
            (Some(s), Axis::X) => s.x.iter().map(|e| e.value).collect(),
            (Some(s), Axis::Y) => s.y.iter().map(|e| e.value).collect(),
            _ => self.exact(axis),
        }
    }

    fn spacing(&self) -> f64 {
        TAU / self.k.len() as f64
    }
}

/// Infinite-mass ground state of the pre-quench Hamiltonian for `frame`.
pub fn initial_state(frame: Frame) -> Result<SpinState> {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match frame {
        Frame::Sym1 => SpinState::from_ground_excited(r, Complex64::new(0.0, -FRAC_1_SQRT_2)),
        Frame::Sym2 => SpinState::from_ground_excited(r, -r),
        Frame::Plain => Err(Error::NotChiralFrame(frame)),
    }
}

/// Binomial read-out of a polarization from `shots` projective measurements.
///
/// Each `(seed, stream)` pair is an independent ChaCha20 stream.
pub fn sample_shots(polarization: f64, shots: u64, seed: u64, stream: u64) -> Result<Estimate> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if polarization.is_nan() || polarization.abs() > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "polarization {polarization} outside [-1, 1]"
        )));
    }
    let p = (0.5 * (1.0 + polarization)).clamp(0.0, 1.0);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let dist = Binomial::new(shots, p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let successes = dist.sample(&mut rng);
    let p_hat = successes as f64 / shots as f64;
    Ok(Estimate {
        value: 2.0 * p_hat - 1.0,
        stderr: 2.0 * (p_hat * (1.0 - p_hat) / shots as f64).sqrt(),
    })
}

pub fn evolve_polarizations(spec: &QuenchSpec) -> Result<PolarizationTrace> {
    spec.validate()?;
    let psi0 = initial_state(spec.frame)?;
    let k: Vec<f64> = k_grid(spec.grid).collect();
    let series: Vec<Vec<[f64; 3]>> = k
        .par_iter()
        .map(|&kk| {
            let u = floquet_operator(kk, &spec.params, spec.frame);
            let mut psi = psi0;
            (0..spec.steps)
                .map(|_| {
                    psi = u.apply(&psi);
                    psi.bloch()
                })
                .collect()
        })
        .collect();
    let n = spec.steps as f64;
    let average: Vec<[f64; 3]> = series
        .iter()
        .map(|s| {
            let mut acc = [0.0; 3];
            for v in s {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
            }
            acc.map(|a| a / n)
        })
        .collect();
    let sampled = match spec.shots {
        None => None,
        Some(shots) => {
            let draw = |axis: Axis| -> Result<Vec<Estimate>> {
                average
                    .par_iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let stream = 2 * j as u64 + axis.index() as u64;
                        sample_shots(v[axis.index()], shots, spec.seed, stream)
                    })
                    .collect()
            };
            Some(SampledAverages {
                shots,
                x: draw(Axis::X)?,
                y: draw(Axis::Y)?,
            })
        }
    };
    Ok(PolarizationTrace {
        params: spec.params,
        frame: spec.frame,
        steps: spec.steps,
        k,
        series,
        average,
        sampled,
    })
}

fn n_component(trace: &PolarizationTrace, k: f64) -> Result<f64> {
    let axis = trace.frame.quench_axis()?;
    Ok(bloch_axis(k, &trace.params, trace.frame)?.component(axis))
}

fn wrap_k(k: f64) -> f64 {
    (k + PI).rem_euclid(TAU) - PI
}

fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_k(a - b).abs()
}

/// Nearest sign change of `n_q` around grid index `i`, refined by bisection.
fn nearest_root(trace: &PolarizationTrace, i: usize, window: usize) -> Result<Option<f64>> {
    let h = trace.spacing();
    let k_at = |j: i64| -PI + h * j as f64;
    let i = i as i64;
    for d in 0..=window as i64 {
        for j in [i + d, i - d - 1] {
            let (ka, kb) = (k_at(j), k_at(j + 1));
            let (fa, fb) = (n_component(trace, ka)?, n_component(trace, kb)?);
            if fa == 0.0 {
                return Ok(Some(ka));
            }
            if fb == 0.0 {
                return Ok(Some(kb));
            }
            if fa * fb < 0.0 {
                return bisect(trace, ka, kb, fa).map(Some);
            }
        }
    }
    Ok(None)
}

fn bisect(trace: &PolarizationTrace, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = n_component(trace, m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// BIS momenta in ascending order within `[-pi, pi)`.
///
/// Candidates are sign changes of the quench-direction average and local minima
/// of its magnitude below the floor; each candidate is snapped to the nearest
/// zero of `n_q`, and candidates with no zero nearby are dropped.
pub fn find_bis(trace: &PolarizationTrace, cfg: &DetectionConfig) -> Result<Vec<f64>> {
    let q = trace.frame.quench_axis()?;
    let v = trace.measured(q);
    let m = v.len();
    let floor = cfg.floor_tol.unwrap_or_else(|| default_floor_tol(trace.steps));
    let window = cfg.search_window.unwrap_or(m / 32).max(1);
    let mut candidates = Vec::new();
    for i in 0..m {
        let (l, r) = ((i + m - 1) % m, (i + 1) % m);
        let a = v[i].abs();
        let local_min = a < floor && a <= v[l].abs() && a <= v[r].abs();
        if local_min || v[i] * v[r] < 0.0 {
            candidates.push(i);
        }
    }
    let mut roots: Vec<f64> = Vec::new();
    for i in candidates {
        if let Some(root) = nearest_root(trace, i, window)? {
            let root = wrap_k(root);
            if roots.iter().all(|r| circular_distance(*r, root) > 1e-9) {
                roots.push(root);
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::NoBisFound);
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BisClass {
    /// `n_q` decreases along `+k`.
    Plus,
    /// `n_q` increases along `+k`.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisPoint {
    pub k: f64,
    /// `d/dk` of the slope-axis average at the BIS.
    pub slope: f64,
    /// `+1` when `k_perp` is along `+k`.
    pub orientation: i8,
    pub g: i8,
    pub class: BisClass,
}

/// Direction of `k_perp` at a BIS, from the sign of `n_q` on either side.
pub fn perp_orientation(trace: &PolarizationTrace, k_bis: f64) -> Result<i8> {
    let d = 0.25 * trace.spacing();
    let (left, right) = (n_component(trace, k_bis - d)?, n_component(trace, k_bis + d)?);
    if left < 0.0 && right > 0.0 {
        Ok(1)
    } else if left > 0.0 && right < 0.0 {
        Ok(-1)
    } else {
        Err(Error::NoSignChange { k: k_bis })
    }
}

/// Derivative of the slope-axis average at `k_bis` from the two nearest grid
/// points on each side (cubic Lagrange stencil, periodic).
pub fn average_derivative(trace: &PolarizationTrace, k_bis: f64) -> Result<f64> {
    let o = trace.frame.slope_axis()?;
    let u = trace.measured(o);
    let m = u.len() as i64;
    let h = trace.spacing();
    let k_bis = wrap_k(k_bis);
    let j = ((k_bis + PI) / h).floor() as i64;
    let nodes: Vec<(f64, f64)> = (j - 1..=j + 2)
        .map(|jj| (-PI + h * jj as f64, u[jj.rem_euclid(m) as usize]))
        .collect();
    let mut der = 0.0;
    for (a, &(xa, ya)) in nodes.iter().enumerate() {
        let mut basis = 0.0;
        for (b, &(xb, _)) in nodes.iter().enumerate() {
            if b == a {
                continue;
            }
            let mut term = 1.0 / (xa - xb);
            for (c, &(xc, _)) in nodes.iter().enumerate() {
                if c != a && c != b {
                    term *= (k_bis - xc) / (xa - xc);
                }
            }
            basis += term;
        }
        der += ya * basis;
    }
    Ok(der)
}

/// `g = -d<sigma_o>/dk_perp` for a given orientation of `k_perp`.
pub fn slope_with_orientation(
    trace: &PolarizationTrace,
    k_bis: f64,
    orientation: i8,
    cfg: &DetectionConfig,
) -> Result<BisPoint> {
    let slope = average_derivative(trace, k_bis)?;
    let slope_min = cfg.slope_min.unwrap_or(if trace.sampled.is_some() {
        DEFAULT_SLOPE_MIN
    } else {
        DEFAULT_SLOPE_MIN_EXACT
    });
    if slope.is_nan() || slope.abs() < slope_min {
        return Err(Error::AmbiguousSlope { k: k_bis, slope });
    }
    let along_perp = slope * f64::from(orientation);
    let g = if along_perp > 0.0 { -1 } else { 1 };
    Ok(BisPoint {
        k: k_bis,
        slope,
        orientation,
        g,
        class: if orientation < 0 {
            BisClass::Plus
        } else {
            BisClass::Minus
        },
    })
}

pub fn slope_at_bis(trace: &PolarizationTrace, k_bis: f64, cfg: &DetectionConfig) -> Result<BisPoint> {
    let orientation = perp_orientation(trace, k_bis)?;
    slope_with_orientation(trace, k_bis, orientation, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisReport {
    pub frame: Frame,
    pub points: Vec<BisPoint>,
    pub winding: i32,
}

impl BisReport {
    pub fn momenta(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.k).collect()
    }
}

/// BIS read-out of an already evolved trace.
pub fn analyze_trace(trace: &PolarizationTrace, cfg: &DetectionConfig) -> Result<BisReport> {
    let points = find_bis(trace, cfg)?
        .into_iter()
        .map(|k| slope_at_bis(trace, k, cfg))
        .collect::<Result<Vec<_>>>()?;
    let twice: i32 = points
        .iter()
        .map(|p| match p.class {
            BisClass::Plus => i32::from(p.g),
            BisClass::Minus => -i32::from(p.g),
        })
        .sum();
    if twice % 2 != 0 {
        return Err(Error::NonIntegerWinding { twice });
    }
    Ok(BisReport {
        frame: trace.frame,
        points,
        winding: twice / 2,
    })
}

pub fn winding_from_quench(spec: &QuenchSpec, cfg: &DetectionConfig) -> Result<BisReport> {
    analyze_trace(&evolve_polarizations(spec)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinalg::expectation;
    use std::f64::consts::FRAC_PI_2;

    fn case(tx: f64, ty: f64, frame: Frame, steps: u32) -> QuenchSpec {
        QuenchSpec::new(ModelParams::in_pi_units(tx, ty), frame, steps, 512)
    }

    #[test]
    fn initial_states() {
        let s1 = initial_state(Frame::Sym1).unwrap();
        let s2 = initial_state(Frame::Sym2).unwrap();
        assert!((expectation(&s1, Axis::Y) - 1.0).abs() < 1e-12);
        assert!((expectation(&s2, Axis::X) + 1.0).abs() < 1e-12);
        assert!(expectation(&s1, Axis::Z).abs() < 1e-12);
        assert!(expectation(&s2, Axis::Z).abs() < 1e-12);
        assert!(initial_state(Frame::Plain).is_err());
    }

    #[test]
    fn time_average_is_mean_of_series() {
        let t = evolve_polarizations(&case(0.5, 0.5, Frame::Sym1, 7)).unwrap();
        for (s, a) in t.series.iter().zip(&t.average) {
            assert_eq!(s.len(), 7);
            for c in 0..3 {
                let mean = s.iter().map(|v| v[c]).sum::<f64>() / 7.0;
                assert!((mean - a[c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn undriven_trace_is_stationary() {
        let t = evolve_polarizations(&QuenchSpec::new(ModelParams::new(0.0, 0.0), Frame::Sym2, 20, 64)).unwrap();
        for s in &t.series {
            for v in s {
                assert!((v[0] + 1.0).abs() < 1e-12 && v[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn case_one_zeros() {
        let t = evolve_polarizations(&case(0.5, 0.5, Frame::Sym1, 60)).unwrap();
        let y = t.exact(Axis::Y);
        // grid of 512 points contains k = -pi (index 0) and k = 0 (index 256)
        assert!(y[0].abs() < 1e-12 && y[256].abs() < 1e-12);
        let t = evolve_polarizations(&case(0.5, 0.5, Frame::Sym2, 60)).unwrap();
        let x = t.exact(Axis::X);
        assert!(x[128].abs() < 1e-12 && x[384].abs() < 1e-12);
    }

    #[test]
    fn case_one_slopes() {
        let cfg = DetectionConfig::default();
        let r = winding_from_quench(&case(0.5, 0.5, Frame::Sym1, 60), &cfg).unwrap();
        assert_eq!(r.points.len(), 2);
        let at_pi = &r.points[0];
        let at_zero = &r.points[1];
        assert!((at_pi.k + PI).abs() < 1e-9 && at_zero.k.abs() < 1e-9);
        assert_eq!((at_pi.g, at_zero.g), (1, -1));
        assert_eq!((at_pi.class, at_zero.class), (BisClass::Plus, BisClass::Minus));
        assert_eq!(r.winding, 1);

        let r = winding_from_quench(&case(0.5, 0.5, Frame::Sym2, 60), &cfg).unwrap();
        let ks = r.momenta();
        assert!((ks[0] + FRAC_PI_2).abs() < 1e-9 && (ks[1] - FRAC_PI_2).abs() < 1e-9);
        assert_eq!((r.points[0].g, r.points[1].g), (-1, 1));
        assert_eq!(r.winding, 1);
    }

    #[test]
    fn reversed_orientation_flips_g() {
        let cfg = DetectionConfig::default();
        let t = evolve_polarizations(&case(0.5, 0.5, Frame::Sym1, 60)).unwrap();
        let a = slope_with_orientation(&t, 0.0, 1, &cfg).unwrap();
        let b = slope_with_orientation(&t, 0.0, -1, &cfg).unwrap();
        assert_eq!(a.g, -b.g);
    }

    #[test]
    fn shots_are_deterministic() {
        let a = sample_shots(0.3, 1000, 7, 3).unwrap();
        let b = sample_shots(0.3, 1000, 7, 3).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let c = sample_shots(0.3, 1000, 7, 4).unwrap();
        assert_ne!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn certain_outcome_has_no_error() {
        let e = sample_shots(1.0, 1_000_000, 1, 0).unwrap();
        assert_eq!((e.value, e.stderr), (1.0, 0.0));
        let e = sample_shots(-1.0, 10, 1, 0).unwrap();
        assert_eq!((e.value, e.stderr), (-1.0, 0.0));
    }

    #[test]
    fn sampling_rejects_bad_input() {
        assert!(sample_shots(1.5, 10, 0, 0).is_err());
        assert!(sample_shots(0.0, 0, 0, 0).is_err());
        assert!(sample_shots(f64::NAN, 10, 0, 0).is_err());
    }

    #[test]
    fn no_bis_when_polarization_never_dips() {
        // undriven: <sigma_x> stays at -1 and n is undefined, so nothing qualifies
        let t = evolve_polarizations(&QuenchSpec::new(ModelParams::new(0.0, 0.0), Frame::Sym2, 10, 64)).unwrap();
        assert_eq!(find_bis(&t, &DetectionConfig::default()), Err(Error::NoBisFound));
    }

    #[test]
    fn spec_validation() {
        let mut s = case(0.5, 0.5, Frame::Sym1, 60);
        s.steps = 0;
        assert!(evolve_polarizations(&s).is_err());
        let s = case(0.5, 0.5, Frame::Plain, 60);
        assert!(evolve_polarizations(&s).is_err());
    }
}
