//! Bohmian trajectories in freely evolving plane-wave superpositions.
//!
//! Every Fock state is an eigenstate of the free Hamiltonian, so a superposition
//! evolves as `c_n e^{-iE_n t}`. Particle `l` moves with `v_l = Im(∂_l ψ / ψ)`,
//! evaluated analytically from the slice through the other particles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{check_length, free_energy, FockState};
use crate::hamiltonian::StateVector;
use crate::sampling::{harmonic_center, SampleSet};
use crate::wavefunction::{wrap, DickePair, ManyBodyState};
use crate::{Error, Result};

/// `|ψ|²` below this fraction of the mean density counts as a node.
pub const NODE_DENSITY: f64 = 1e-14;
/// Steps are halved while `|ψ|²` is below this fraction of the mean density.
pub const HALVING_DENSITY: f64 = 1e-10;
pub const MAX_HALVINGS: u32 = 30;
pub const DEFAULT_DT: f64 = 1e-3;

/// `c_n → c_n e^{-iE_n t}` over any basis (blocks may be merged).
pub fn evolve_state(v: &StateVector, t: f64, l: f64) -> Result<StateVector> {
    check_length(l)?;
    let amplitudes = v
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, c)| c * Complex64::from_polar(1.0, -free_energy(&v.basis().state(i), l) * t))
        .collect();
    StateVector::new(v.basis().clone(), amplitudes)
}

/// A superposition with the energy of each component.
#[derive(Clone, Debug)]
pub struct FreeEvolution {
    n: usize,
    l: f64,
    terms: Vec<(FockState, Complex64, f64)>,
    mean_density: f64,
}

impl FreeEvolution {
    pub fn new(state: &ManyBodyState, l: f64) -> Result<Self> {
        check_length(l)?;
        let n = state.particle_count();
        let norm: f64 = state.terms().iter().map(|(_, c)| c.norm_sqr()).sum();
        Ok(FreeEvolution {
            n,
            l,
            terms: state
                .terms()
                .iter()
                .map(|(s, c)| (s.clone(), *c, free_energy(s, l)))
                .collect(),
            mean_density: norm / l.powi(n as i32),
        })
    }

    pub fn particle_count(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.l
    }

    /// `∫|ψ|² / L^N`.
    pub fn mean_density(&self) -> f64 {
        self.mean_density
    }

    /// The state at time `t`. A single component only gains a global phase,
    /// which is dropped.
    pub fn at(&self, t: f64) -> ManyBodyState {
        let terms = if self.terms.len() == 1 {
            vec![(self.terms[0].0.clone(), self.terms[0].1)]
        } else {
            self.terms
                .iter()
                .map(|(s, c, e)| (s.clone(), c * Complex64::from_polar(1.0, -e * t)))
                .collect()
        };
        ManyBodyState::new(terms).expect("terms were validated")
    }

    pub fn is_stationary(&self) -> bool {
        let e0 = self.terms[0].2;
        self.terms.iter().all(|t| t.2 == e0)
    }
}

/// `v_l = Im(∂_l ψ / ψ)` for every particle. Fails near nodes.
pub fn velocity(state: &ManyBodyState, positions: &[f64], l: f64) -> Result<Vec<f64>> {
    let norm: f64 = state.terms().iter().map(|(_, c)| c.norm_sqr()).sum();
    velocity_with_mean(state, positions, l, norm / l.powi(positions.len() as i32))
}

fn velocity_with_mean(
    state: &ManyBodyState,
    positions: &[f64],
    l: f64,
    mean: f64,
) -> Result<Vec<f64>> {
    let n = positions.len();
    if n != state.particle_count() {
        return Err(Error::DimensionMismatch {
            expected: state.particle_count(),
            found: n,
        });
    }
    let mut others = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        others.clear();
        others.extend(
            positions
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &x)| x),
        );
        let slice = state.slice(&others, l)?;
        let psi = slice.eval(positions[j]);
        let density = psi.norm_sqr();
        if density < NODE_DENSITY * mean {
            return Err(Error::NearNode {
                density: density / mean,
            });
        }
        out.push((slice.derivative(positions[j]) / psi).im);
    }
    Ok(out)
}

/// Closed form for `|N - K, K⟩` in modes `(0, 1)`:
/// `v = (π/L)(1 + (|S|² - |M|²) / |S e^{2πix/L} + M|²)`.
pub fn dicke_velocity(pair: &DickePair, x: f64, l: f64) -> f64 {
    let psi = pair.s * Complex64::from_polar(1.0, 2.0 * PI * x / l) + pair.m;
    PI / l * (1.0 + (pair.s.norm_sqr() - pair.m.norm_sqr()) / psi.norm_sqr())
}

#[derive(Clone, Debug, Serialize)]
pub struct BohmianOptions {
    pub dt: f64,
    /// Strictly increasing, positive output times.
    pub snapshots: Vec<f64>,
}

impl Default for BohmianOptions {
    fn default() -> Self {
        BohmianOptions {
            dt: DEFAULT_DT,
            snapshots: vec![0.1, 0.2, 0.3, 0.4],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Realization {
    pub index: usize,
    /// Unwrapped positions at `t = 0` followed by each snapshot.
    pub positions: Vec<Vec<f64>>,
    /// Steps that were halved near a node.
    pub node_events: u64,
    /// Set when the run stopped; `positions` then holds the completed snapshots.
    pub error: Option<Error>,
}

impl Realization {
    pub fn completed(&self) -> bool {
        self.error.is_none()
    }

    /// Positions at output `i`, wrapped into `[0, L)`.
    pub fn wrapped(&self, i: usize, l: f64) -> Vec<f64> {
        self.positions[i].iter().map(|&x| wrap(x, l)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySet {
    pub l: f64,
    /// `0` followed by the snapshot times.
    pub times: Vec<f64>,
    pub realizations: Vec<Realization>,
}

struct Integrator<'a> {
    dynamics: &'a FreeEvolution,
    stationary: Option<ManyBodyState>,
    node_events: u64,
}

impl Integrator<'_> {
    fn state(&self, t: f64) -> ManyBodyState {
        match &self.stationary {
            Some(s) => s.clone(),
            None => self.dynamics.at(t),
        }
    }

    fn v(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let state = self.state(t);
        velocity_with_mean(&state, x, self.dynamics.l, self.dynamics.mean_density)
    }

    fn density_ratio(&self, t: f64, x: &[f64]) -> Result<f64> {
        let state = self.state(t);
        let (last, others) = x.split_last().expect("non-empty");
        Ok(state.slice(others, self.dynamics.l)?.eval(*last).norm_sqr()
            / self.dynamics.mean_density)
    }

    fn rk4(&self, t: f64, x: &[f64], h: f64) -> Result<Vec<f64>> {
        let shifted =
            |k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        let k1 = self.v(t, x)?;
        let k2 = self.v(t + 0.5 * h, &shifted(&k1, 0.5 * h))?;
        let k3 = self.v(t + 0.5 * h, &shifted(&k2, 0.5 * h))?;
        let k4 = self.v(t + h, &shifted(&k3, h))?;
        Ok((0..x.len())
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    }

    fn advance(&mut self, t: f64, x: &mut Vec<f64>, h: f64, depth: u32) -> Result<()> {
        let near = self.density_ratio(t, x)? < HALVING_DENSITY;
        let attempt = if near { None } else { Some(self.rk4(t, x, h)) };
        match attempt {
            Some(Ok(next)) => {
                *x = next;
                Ok(())
            }
            Some(Err(e)) if !matches!(e, Error::NearNode { .. }) => Err(e),
            _ => {
                if depth >= MAX_HALVINGS {
                    return Err(Error::StepUnderflow { time: t });
                }
                self.node_events += 1;
                self.advance(t, x, 0.5 * h, depth + 1)?;
                self.advance(t + 0.5 * h, x, 0.5 * h, depth + 1)
            }
        }
    }
}

fn check_snapshots(opts: &BohmianOptions) -> Result<()> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    let mut last = 0.0;
    for &t in &opts.snapshots {
        if !(t > last) || !t.is_finite() {
            return Err(Error::invalid(
                "snapshots",
                "times must be positive and increasing",
            ));
        }
        last = t;
    }
    Ok(())
}

/// Integrates one trajectory; snapshot times are hit exactly.
pub fn integrate_one(
    dynamics: &FreeEvolution,
    start: &[f64],
    opts: &BohmianOptions,
    index: usize,
) -> Realization {
    let mut integrator = Integrator {
        dynamics,
        stationary: dynamics.is_stationary().then(|| dynamics.at(0.0)),
        node_events: 0,
    };
    let mut x = start.to_vec();
    let mut positions = vec![x.clone()];
    let mut t = 0.0;
    let mut error = None;
    'outer: for &target in &opts.snapshots {
        let span = target - t;
        let steps = (span / opts.dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            let now = t + s as f64 * h;
            if let Err(e) = integrator.advance(now, &mut x, h, 0) {
                error = Some(e);
                break 'outer;
            }
        }
        t = target;
        positions.push(x.clone());
    }
    Realization {
        index,
        positions,
        node_events: integrator.node_events,
        error,
    }
}

/// Integrates every sample of `initial` as one realization, in parallel.
pub fn integrate(
    state: &ManyBodyState,
    initial: &SampleSet,
    opts: &BohmianOptions,
) -> Result<TrajectorySet> {
    check_snapshots(opts)?;
    if initial.n != state.particle_count() {
        return Err(Error::DimensionMismatch {
            expected: state.particle_count(),
            found: initial.n,
        });
    }
    let dynamics = FreeEvolution::new(state, initial.l)?;
    let realizations = initial
        .samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| integrate_one(&dynamics, s.positions(), opts, i))
        .collect();
    let mut times = vec![0.0];
    times.extend_from_slice(&opts.snapshots);
    Ok(TrajectorySet {
        l: initial.l,
        times,
        realizations,
    })
}

/// Positions of completed realizations at output `i`, rotated by each
/// realization's own `t = 0` center (harmonic `m`).
pub fn aligned_positions(set: &TrajectorySet, i: usize, harmonic: u32) -> (Vec<f64>, usize) {
    let mut skipped = 0;
    let mut out = Vec::new();
    for r in set.realizations.iter().filter(|r| r.completed()) {
        match harmonic_center(&r.wrapped(0, set.l), set.l, harmonic) {
            Ok((c, _)) => out.extend(r.positions[i].iter().map(|&x| wrap(x - c, set.l))),
            Err(_) => skipped += 1,
        }
    }
    (out, skipped)
}

#[derive(Clone, Debug, Serialize)]
pub struct NotchTrack {
    pub times: Vec<f64>,
    /// Peak of the aligned density (from the harmonic phase), unwrapped in time.
    pub peak: Vec<f64>,
    /// `2|⟨e^{2πimx/L}⟩|` of the aligned positions at each output.
    pub contrast: Vec<f64>,
    pub skipped: usize,
}

impl NotchTrack {
    pub fn displacement(&self) -> f64 {
        self.peak.last().copied().unwrap_or(0.0) - self.peak[0]
    }
}

/// Follows the aligned density profile through the `m`-th Fourier component.
pub fn track_notch(set: &TrajectorySet, harmonic: u32) -> NotchTrack {
    let l = set.l;
    let period = l / harmonic as f64;
    let mut peak = Vec::with_capacity(set.times.len());
    let mut contrast = Vec::with_capacity(set.times.len());
    let mut skipped = 0;
    for i in 0..set.times.len() {
        let (xs, s) = aligned_positions(set, i, harmonic);
        skipped = s;
        let z: Complex64 = xs
            .iter()
            .map(|&x| Complex64::from_polar(1.0, 2.0 * PI * harmonic as f64 * x / l))
            .sum();
        contrast.push(if xs.is_empty() {
            0.0
        } else {
            2.0 * z.norm() / xs.len() as f64
        });
        let p = z.arg() / (2.0 * PI) * period;
        let p = match peak.last() {
            Some(&prev) => {
                prev + crate::wavefunction::wrap_angle(2.0 * PI * (p - prev) / period) * period
                    / (2.0 * PI)
            }
            None => p,
        };
        peak.push(p);
    }
    NotchTrack {
        times: set.times.clone(),
        peak,
        contrast,
        skipped,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    /// Two-sample KS between transported positions and direct draws at `T`.
    pub ks_statistic: f64,
    pub p_value: f64,
    /// Largest position change when the step is halved, over the checked runs.
    pub dt_halving_shift: f64,
    pub failed: usize,
}

/// Transports exact draws of `|ψ(0)|²` to `T` and compares particle 0 with exact
/// draws of `|ψ(T)|²`.
pub fn equivariance_check(
    state: &ManyBodyState,
    l: f64,
    dt: f64,
    t_final: f64,
    n_realizations: usize,
    seed_value: u64,
) -> Result<EquivarianceReport> {
    use crate::sampling::sequential_sample;
    use crate::seed::derive;
    use crate::stats::ks_two_sample;

    let dynamics = FreeEvolution::new(state, l)?;
    let initial = sequential_sample(state, l, n_realizations, derive(seed_value, 0))?;
    let opts = BohmianOptions {
        dt,
        snapshots: vec![t_final],
    };
    let run = integrate(state, &initial, &opts)?;
    let failed = run.realizations.iter().filter(|r| !r.completed()).count();
    let moved: Vec<f64> = run
        .realizations
        .iter()
        .filter(|r| r.completed())
        .map(|r| wrap(r.positions[1][0], l))
        .collect();
    let direct = sequential_sample(
        &dynamics.at(t_final),
        l,
        n_realizations,
        derive(seed_value, 1),
    )?;
    let ks = ks_two_sample(&moved, &direct.particle(0))?;

    let half = BohmianOptions {
        dt: dt / 2.0,
        snapshots: vec![t_final],
    };
    let dt_halving_shift = initial
        .samples
        .iter()
        .take(16)
        .enumerate()
        .map(|(i, s)| {
            let a = integrate_one(&dynamics, s.positions(), &opts, i);
            let b = integrate_one(&dynamics, s.positions(), &half, i);
            if a.completed() && b.completed() {
                a.positions[1]
                    .iter()
                    .zip(&b.positions[1])
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(EquivarianceReport {
        ks_statistic: ks.statistic,
        p_value: ks.p_value,
        dt_halving_shift,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate_all_momenta;
    use crate::seed;
    use crate::wavefunction::{dicke_sm, PositionConfig};
    use std::sync::Arc;

    fn fock(modes: &[(i32, u32)]) -> ManyBodyState {
        ManyBodyState::from_fock(&FockState::new(modes.iter().copied())).unwrap()
    }

    #[test]
    fn evolution_phases() {
        let basis = Arc::new(enumerate_all_momenta(3, 1).unwrap());
        let v = StateVector::random(basis.clone(), 4);
        let same = evolve_state(&v, 0.0, 1.0).unwrap();
        assert_eq!(same.amplitudes(), v.amplitudes());
        let i0 = basis.index_of(&FockState::new([(0, 3)])).unwrap();
        let i1 = basis.index_of(&FockState::two_mode(0, 2, 1, 1)).unwrap();
        let t = 0.37;
        let w = evolve_state(&v, t, 1.0).unwrap();
        let rel = |s: &StateVector| s.amplitudes()[i1] / s.amplitudes()[i0];
        let advance = (rel(&v) / rel(&w)).arg();
        let expected = crate::wavefunction::wrap_angle(2.0 * PI * PI * t);
        assert!((advance - expected).abs() < 1e-12);
    }

    #[test]
    fn flat_condensate_is_at_rest() {
        let v = velocity(&fock(&[(0, 4)]), &[0.1, 0.2, 0.5, 0.9], 1.0).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn closed_form_and_finite_differences_agree() {
        let mut rng = seed::rng(21);
        let l = 1.0;
        for (n, k) in [(8usize, 3usize), (8, 4), (6, 1)] {
            let state = fock(&[(0, (n - k) as u32), (1, k as u32)]);
            for _ in 0..10 {
                let cfg = PositionConfig::random(n, l, &mut rng).unwrap();
                let x = cfg.positions();
                let v = velocity(&state, x, l).unwrap();
                for j in 0..n {
                    let others: Vec<f64> = x
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != j)
                        .map(|(_, &y)| y)
                        .collect();
                    let pair = dicke_sm(k, &others, l).unwrap();
                    assert!((v[j] - dicke_velocity(&pair, x[j], l)).abs() < 1e-10);
                    let slice = state.slice(&others, l).unwrap();
                    let h = 1e-6 * l;
                    let fd = (slice.eval(x[j] + h) - slice.eval(x[j] - h)) / (2.0 * h);
                    let v_fd = (fd / slice.eval(x[j])).im;
                    assert!((v[j] - v_fd).abs() < 1e-6 * (1.0 + v[j].abs()));
                }
            }
        }
    }

    #[test]
    fn black_particles_all_move_at_pi_over_l() {
        let mut rng = seed::rng(22);
        for l in [1.0, 2.5] {
            let cfg = PositionConfig::random(8, l, &mut rng).unwrap();
            let v = velocity(&fock(&[(0, 4), (1, 4)]), cfg.positions(), l).unwrap();
            assert!(v.iter().all(|x| (x - PI / l).abs() < 1e-10));
            let v = velocity(&fock(&[(-1, 4), (1, 4)]), cfg.positions(), l).unwrap();
            assert!(v.iter().all(|x| x.abs() < 1e-10));
        }
    }

    #[test]
    fn double_soliton_field_is_reflection_odd() {
        let state = fock(&[(-1, 3), (1, 3)]);
        let x = [0.11, 0.27, 0.4, 0.52, 0.71, 0.93];
        let reflected: Vec<f64> = x.iter().map(|&y| wrap(1.0 - y, 1.0)).collect();
        let a = velocity(&state, &x, 1.0).unwrap();
        let b = velocity(&state, &reflected, 1.0).unwrap();
        for (u, w) in a.iter().zip(&b) {
            assert!((u + w).abs() < 1e-10);
        }
    }

    #[test]
    fn stationary_field_does_not_depend_on_time() {
        let dynamics = FreeEvolution::new(&fock(&[(0, 5), (1, 3)]), 1.0).unwrap();
        let x = [0.1, 0.15, 0.3, 0.33, 0.6, 0.62, 0.8, 0.95];
        let a = velocity(&dynamics.at(0.0), &x, 1.0).unwrap();
        let b = velocity(&dynamics.at(0.731), &x, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn node_is_reported() {
        let state = fock(&[(0, 1), (1, 1)]);
        // ψ ∝ 1 + e^{2πi(x1 - x2)}... vanishes at x1 - x2 = 1/2
        assert!(matches!(
            velocity(&state, &[0.0, 0.5], 1.0),
            Err(Error::NearNode { .. })
        ));
    }

    #[test]
    fn mean_velocity_matches_momentum() {
        use crate::sampling::sequential_sample;
        let (n, k) = (6usize, 2usize);
        let state = fock(&[(0, (n - k) as u32), (1, k as u32)]);
        let set = sequential_sample(&state, 1.0, 4000, 3).unwrap();
        let per_sample: Vec<f64> = set
            .samples
            .iter()
            .map(|s| {
                velocity(&state, s.positions(), 1.0)
                    .unwrap()
                    .iter()
                    .sum::<f64>()
                    / n as f64
            })
            .collect();
        let m = per_sample.len() as f64;
        let mean = per_sample.iter().sum::<f64>() / m;
        let var = per_sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let expected = 2.0 * PI * k as f64 / n as f64;
        assert!(
            (mean - expected).abs() < 3.0 * (var / m).sqrt() + 1e-12,
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn snapshots_are_hit_and_black_state_rotates_rigidly() {
        let state = fock(&[(0, 2), (1, 2)]);
        let dynamics = FreeEvolution::new(&state, 1.0).unwrap();
        let start = [0.1, 0.3, 0.35, 0.8];
        let opts = BohmianOptions {
            dt: 0.003,
            snapshots: vec![0.05, 0.1234],
        };
        let r = integrate_one(&dynamics, &start, &opts, 0);
        assert!(r.completed());
        assert_eq!(r.positions.len(), 3);
        for (x0, x1) in start.iter().zip(&r.positions[2]) {
            assert!((x1 - x0 - PI * 0.1234).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_snapshots() {
        let state = fock(&[(0, 2)]);
        let set = crate::sampling::sequential_sample(&state, 1.0, 2, 0).unwrap();
        let opts = BohmianOptions {
            dt: 1e-3,
            snapshots: vec![0.2, 0.1],
        };
        assert!(integrate(&state, &set, &opts).is_err());
    }
}
