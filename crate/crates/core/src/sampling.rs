//! Position samples from `|ψ|²`, circular alignment and histograms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::check_length;
use crate::seed;
use crate::wavefunction::{
    annihilate, apply_field, plane_wave, sparse_from_terms, sparse_inner, uniform_grid, wrap,
    ManyBodyState, PositionConfig, SparseFock,
};
use crate::{Error, Result};

/// Acceptance rates outside this band produce a warning.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.1, 0.9);
pub const MIN_BINS: usize = 8;
/// Attempts to find a start configuration with non-zero density.
const START_ATTEMPTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Metropolis,
    Sequential,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub method: Method,
    pub seed: u64,
    /// Sweeps (N single-particle proposals each) discarded per chain.
    pub burn_in: usize,
    /// Sweeps between kept samples.
    pub thinning: usize,
    pub acceptance_rate: f64,
    pub proposal_width: f64,
    pub chains: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleSet {
    pub n: usize,
    pub l: f64,
    pub samples: Vec<PositionConfig>,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
    /// Samples dropped by alignment.
    pub skipped: usize,
}

impl SampleSet {
    /// All coordinates of all samples.
    pub fn pooled(&self) -> Vec<f64> {
        self.samples
            .iter()
            .flat_map(|s| s.positions().iter().copied())
            .collect()
    }

    /// Coordinate `i` of every sample.
    pub fn particle(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.positions()[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct MetropolisOptions {
    pub n_samples: usize,
    /// Defaults to `1000 N` sweeps.
    pub burn_in: Option<usize>,
    /// Defaults to `N` sweeps.
    pub thinning: Option<usize>,
    /// Standard deviation of the circular Gaussian step; defaults to `L/8`.
    pub proposal_width: Option<f64>,
    pub chains: usize,
    pub seed: u64,
}

impl MetropolisOptions {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        MetropolisOptions {
            n_samples,
            burn_in: None,
            thinning: None,
            proposal_width: None,
            chains: 1,
            seed,
        }
    }
}

/// Acceptance probability for a symmetric proposal.
#[inline]
pub fn acceptance(p_old: f64, p_new: f64) -> f64 {
    if p_old <= 0.0 {
        1.0
    } else {
        (p_new / p_old).min(1.0)
    }
}

fn others_except(positions: &[f64], j: usize, out: &mut Vec<f64>) {
    out.clear();
    out.extend(
        positions
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &x)| x),
    );
}

struct Chain {
    samples: Vec<PositionConfig>,
    accepted: u64,
    proposed: u64,
}

fn run_chain(
    state: &ManyBodyState,
    l: f64,
    keep: usize,
    burn_in: usize,
    thinning: usize,
    width: f64,
    chain_seed: u64,
) -> Result<Chain> {
    let n = state.particle_count();
    let mut rng = seed::rng(chain_seed);
    let mut x: Vec<f64> = Vec::new();
    for attempt in 0.. {
        if attempt == START_ATTEMPTS {
            return Err(Error::DegenerateConditional);
        }
        x = (0..n).map(|_| wrap(rng.random::<f64>() * l, l)).collect();
        let cfg = PositionConfig::new(x.clone(), l)?;
        if state.amplitude(&cfg)?.norm_sqr() > 0.0 {
            break;
        }
    }
    let mut others = Vec::with_capacity(n);
    let (mut accepted, mut proposed) = (0u64, 0u64);
    let mut sweep = |x: &mut Vec<f64>, rng: &mut seed::Rng| -> Result<()> {
        for j in 0..n {
            others_except(x, j, &mut others);
            let slice = state.slice(&others, l)?;
            let old = slice.eval(x[j]).norm_sqr();
            let step: f64 = rng.sample(StandardNormal);
            let candidate = wrap(x[j] + width * step, l);
            let new = slice.eval(candidate).norm_sqr();
            proposed += 1;
            if rng.random::<f64>() < acceptance(old, new) {
                x[j] = candidate;
                accepted += 1;
            }
        }
        Ok(())
    };
    for _ in 0..burn_in {
        sweep(&mut x, &mut rng)?;
    }
    let mut samples = Vec::with_capacity(keep);
    for _ in 0..keep {
        for _ in 0..thinning.max(1) {
            sweep(&mut x, &mut rng)?;
        }
        samples.push(PositionConfig::new(x.clone(), l)?);
    }
    Ok(Chain {
        samples,
        accepted,
        proposed,
    })
}

/// Metropolis sampling of `|ψ|²` with single-particle circular Gaussian moves.
/// Chains are independent with derived seeds, so the result does not depend on
/// the thread count.
pub fn metropolis_sample(
    state: &ManyBodyState,
    l: f64,
    opts: &MetropolisOptions,
) -> Result<SampleSet> {
    check_length(l)?;
    let n = state.particle_count();
    if opts.n_samples == 0 {
        return Err(Error::invalid("n_samples", "need at least one sample"));
    }
    if opts.chains == 0 || opts.chains > opts.n_samples {
        return Err(Error::invalid("chains", "need 1 <= chains <= n_samples"));
    }
    let burn_in = opts.burn_in.unwrap_or(1000 * n);
    let thinning = opts.thinning.unwrap_or(n).max(1);
    let width = opts.proposal_width.unwrap_or(l / 8.0);
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid("proposal_width", "must be positive"));
    }
    let base = opts.n_samples / opts.chains;
    let extra = opts.n_samples % opts.chains;
    let chains: Vec<Chain> = (0..opts.chains)
        .into_par_iter()
        .map(|c| {
            let keep = base + usize::from(c < extra);
            run_chain(
                state,
                l,
                keep,
                burn_in,
                thinning,
                width,
                seed::derive(opts.seed, c as u64),
            )
        })
        .collect::<Result<_>>()?;
    let accepted: u64 = chains.iter().map(|c| c.accepted).sum();
    let proposed: u64 = chains.iter().map(|c| c.proposed).sum();
    let rate = if proposed > 0 {
        accepted as f64 / proposed as f64
    } else {
        0.0
    };
    let mut warnings = Vec::new();
    if rate < ACCEPTANCE_BAND.0 || rate > ACCEPTANCE_BAND.1 {
        warnings.push(format!(
            "acceptance rate {rate:.3} outside [{}, {}]",
            ACCEPTANCE_BAND.0, ACCEPTANCE_BAND.1
        ));
    }
    Ok(SampleSet {
        n,
        l,
        samples: chains.into_iter().flat_map(|c| c.samples).collect(),
        provenance: Provenance {
            method: Method::Metropolis,
            seed: opts.seed,
            burn_in,
            thinning,
            acceptance_rate: rate,
            proposal_width: width,
            chains: opts.chains,
        },
        warnings,
        skipped: 0,
    })
}

/// A real trigonometric polynomial density `f(x) = Σ_m f_m e^{2πimx/L}` with
/// `∫f = 1`.
#[derive(Clone, Debug)]
pub struct TrigDensity {
    /// `f_{-d} .. f_d`.
    coeffs: Vec<Complex64>,
    l: f64,
}

impl TrigDensity {
    fn degree(&self) -> i64 {
        (self.coeffs.len() / 2) as i64
    }

    fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let d = self.degree();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - d, c))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms()
            .map(|(m, c)| (c * plane_wave(m as f64, x, self.l)).re)
            .sum()
    }

    /// `∫_0^x f`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.terms()
            .map(|(m, c)| {
                if m == 0 {
                    c.re * x
                } else {
                    let w = 2.0 * PI * m as f64 / self.l;
                    (c * (plane_wave(m as f64, x, self.l) - 1.0) / Complex64::new(0.0, w)).re
                }
            })
            .sum()
    }

    /// Inverse CDF by bisection.
    pub fn quantile(&self, u: f64) -> f64 {
        let (mut a, mut b) = (0.0, self.l);
        for _ in 0..64 {
            let mid = 0.5 * (a + b);
            if self.cdf(mid) < u {
                a = mid;
            } else {
                b = mid;
            }
        }
        wrap(0.5 * (a + b), self.l)
    }
}

/// Density of the next coordinate given the amputated state `|Φ⟩`.
fn next_density(phi: &SparseFock, kmax: i32, l: f64) -> Result<TrigDensity> {
    let width = 2 * kmax as usize + 1;
    let lowered: Vec<SparseFock> = (0..width).map(|m| annihilate(phi, m)).collect();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * width - 1];
    let mut total = 0.0;
    for k in 0..width {
        if lowered[k].is_empty() {
            continue;
        }
        for kp in 0..width {
            if lowered[kp].is_empty() {
                continue;
            }
            let g = sparse_inner(&lowered[k], &lowered[kp]);
            if k == kp {
                total += g.re;
            }
            coeffs[kp + width - 1 - k] += g;
        }
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateConditional);
    }
    coeffs.iter_mut().for_each(|c| *c /= total * l);
    Ok(TrigDensity { coeffs, l })
}

fn normalize_sparse(v: &mut SparseFock) -> Result<()> {
    let norm = v.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateConditional);
    }
    v.values_mut().for_each(|c| *c /= norm);
    Ok(())
}

/// Exact marginal density of the next coordinate after `prefix` was observed.
pub fn marginal_density(state: &ManyBodyState, prefix: &[f64], l: f64) -> Result<TrigDensity> {
    check_length(l)?;
    if prefix.len() >= state.particle_count() {
        return Err(Error::DimensionMismatch {
            expected: state.particle_count() - 1,
            found: prefix.len(),
        });
    }
    let kmax = state.max_abs_mode();
    let mut phi = sparse_from_terms(state.terms(), kmax);
    normalize_sparse(&mut phi)?;
    for &x in prefix {
        phi = apply_field(&phi, x, kmax, l);
        normalize_sparse(&mut phi)?;
    }
    next_density(&phi, kmax, l)
}

/// The first `count` coordinates of an exact draw from `|ψ|²`.
pub fn sequential_prefix<R: Rng + ?Sized>(
    state: &ManyBodyState,
    count: usize,
    l: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_length(l)?;
    if count > state.particle_count() {
        return Err(Error::DimensionMismatch {
            expected: state.particle_count(),
            found: count,
        });
    }
    let kmax = state.max_abs_mode();
    let mut phi = sparse_from_terms(state.terms(), kmax);
    normalize_sparse(&mut phi)?;
    let mut xs = Vec::with_capacity(count);
    for _ in 0..count {
        let density = next_density(&phi, kmax, l)?;
        let x = density.quantile(rng.random::<f64>());
        phi = apply_field(&phi, x, kmax, l);
        normalize_sparse(&mut phi)?;
        xs.push(x);
    }
    Ok(xs)
}

/// One exact draw: each coordinate from its conditional marginal.
pub fn sequential_draw<R: Rng + ?Sized>(
    state: &ManyBodyState,
    l: f64,
    rng: &mut R,
) -> Result<PositionConfig> {
    if state.particle_count() < 2 {
        return Err(Error::invalid("n", "sequential draw needs N >= 2"));
    }
    PositionConfig::new(sequential_prefix(state, state.particle_count(), l, rng)?, l)
}

/// Independent exact draws; sample `i` uses the stream derived from `(seed, i)`.
pub fn sequential_sample(
    state: &ManyBodyState,
    l: f64,
    n_samples: usize,
    seed_value: u64,
) -> Result<SampleSet> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "need at least one sample"));
    }
    let samples: Vec<PositionConfig> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng(seed::derive(seed_value, i as u64));
            sequential_draw(state, l, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(SampleSet {
        n: state.particle_count(),
        l,
        samples,
        provenance: Provenance {
            method: Method::Sequential,
            seed: seed_value,
            burn_in: 0,
            thinning: 0,
            acceptance_rate: 1.0,
            proposal_width: 0.0,
            chains: n_samples,
        },
        warnings: Vec::new(),
        skipped: 0,
    })
}

/// Below this magnitude the center-of-mass direction is undefined.
pub const COM_EPS: f64 = 1e-12;

/// `Σ_i e^{2πi m x_i/L}` as `(direction, magnitude)`, the direction expressed as
/// a position in `[0, L/m)`.
pub fn harmonic_center(positions: &[f64], l: f64, harmonic: u32) -> Result<(f64, f64)> {
    if positions.is_empty() {
        return Err(Error::invalid("positions", "need at least one particle"));
    }
    if harmonic == 0 {
        return Err(Error::invalid("harmonic", "must be >= 1"));
    }
    let z: Complex64 = positions
        .iter()
        .map(|&x| plane_wave(harmonic as f64, x, l))
        .sum();
    let magnitude = z.norm();
    if magnitude < COM_EPS {
        return Err(Error::UndefinedDirection { magnitude });
    }
    let period = l / harmonic as f64;
    Ok((wrap(z.arg() / (2.0 * PI) * period, period), magnitude))
}

/// Direction and length of the vector sum of the particles' unit vectors.
pub fn center_of_mass(config: &PositionConfig) -> Result<(f64, f64)> {
    harmonic_center(config.positions(), config.length(), 1)
}

/// Rotates each sample so its center of mass (first harmonic) sits at 0.
pub fn align_samples(set: &SampleSet) -> SampleSet {
    align_samples_harmonic(set, 1)
}

/// As [`align_samples`], using the `harmonic`-th Fourier component.
pub fn align_samples_harmonic(set: &SampleSet, harmonic: u32) -> SampleSet {
    let mut skipped = set.skipped;
    let samples = set
        .samples
        .iter()
        .filter_map(|s| match harmonic_center(s.positions(), set.l, harmonic) {
            Ok((x, _)) => Some(s.shifted(-x)),
            Err(_) => {
                skipped += 1;
                None
            }
        })
        .collect();
    SampleSet {
        samples,
        skipped,
        ..set.clone()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlignedHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    /// `counts / (total Δx)`.
    pub density: Vec<f64>,
    /// Position the samples were aligned to.
    pub reference_direction: f64,
}

impl AlignedHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// `1 - min/mean` of the density.
    pub fn notch_depth(&self) -> f64 {
        let mean = self.density.iter().sum::<f64>() / self.density.len() as f64;
        let min = self.density.iter().cloned().fold(f64::INFINITY, f64::min);
        1.0 - min / mean
    }
}

/// Histogram of `values` on `[lo, hi)` with uniform bins.
pub fn histogram_range(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<AlignedHistogram> {
    if bins < MIN_BINS {
        return Err(Error::invalid(
            "bins",
            format!("need at least {MIN_BINS}, got {bins}"),
        ));
    }
    if !(hi > lo) {
        return Err(Error::invalid("range", "empty histogram range"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let b = ((v - lo) / width).floor();
        let b = if b < 0.0 {
            0
        } else {
            (b as usize).min(bins - 1)
        };
        counts[b] += 1;
    }
    let total = values.len() as u64;
    let density = counts
        .iter()
        .map(|&c| {
            if total > 0 {
                c as f64 / (total as f64 * width)
            } else {
                0.0
            }
        })
        .collect();
    Ok(AlignedHistogram {
        bin_edges: (0..=bins).map(|i| lo + i as f64 * width).collect(),
        counts,
        total,
        density,
        reference_direction: 0.0,
    })
}

/// Pooled positions of every particle of every sample over `[0, L)`.
pub fn histogram(set: &SampleSet, bins: usize) -> Result<AlignedHistogram> {
    histogram_range(&set.pooled(), bins, 0.0, set.l)
}

/// `2 |⟨e^{2πimx/L}⟩|` over pooled positions; 1 for a `1 + cos` profile, 0 for flat.
pub fn harmonic_contrast(positions: &[f64], l: f64, harmonic: u32) -> f64 {
    if positions.is_empty() {
        return 0.0;
    }
    let z: Complex64 = positions
        .iter()
        .map(|&x| plane_wave(harmonic as f64, x, l))
        .sum();
    2.0 * z.norm() / positions.len() as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct NotchDepths {
    /// Continuous minimum of each normalized conditional density.
    pub depths: Vec<f64>,
    /// Minimum over the evaluation grid.
    pub grid_depths: Vec<f64>,
    /// `(|S| - |M|)² / (L (|S| + |M|)²)` when the conditional has two modes.
    pub bounds: Vec<Option<f64>>,
    pub histogram: AlignedHistogram,
    pub skipped: usize,
}

/// Draws `N - 1` positions exactly and records the depth of the remaining
/// particle's conditional density, per sample.
pub fn notch_depth_histogram(
    state: &ManyBodyState,
    l: f64,
    n_samples: usize,
    bins: usize,
    grid: usize,
    seed_value: u64,
) -> Result<NotchDepths> {
    let n = state.particle_count();
    if n < 2 {
        return Err(Error::invalid("n", "need N >= 2"));
    }
    let grid_points = uniform_grid(grid.max(2), l);
    let rows: Vec<Option<(f64, f64, Option<f64>)>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng(seed::derive(seed_value, i as u64));
            let fixed = sequential_prefix(state, n - 1, l, &mut rng)?;
            let slice = state.slice(&fixed, l)?;
            let depth = match slice.min_density() {
                Ok(d) => d,
                Err(Error::DegenerateConditional) => return Ok(None),
                Err(e) => return Err(e),
            };
            let on_grid = slice.on_grid(&grid_points, fixed)?.min_density();
            let live: Vec<Complex64> = slice
                .coefficients()
                .map(|(_, c)| c)
                .filter(|c| c.norm() > 0.0)
                .collect();
            let bound = match live.as_slice() {
                [a, b] => Some((a.norm() - b.norm()).powi(2) / (l * (a.norm() + b.norm()).powi(2))),
                _ => None,
            };
            Ok(Some((depth, on_grid, bound)))
        })
        .collect::<Result<_>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let kept: Vec<(f64, f64, Option<f64>)> = rows.into_iter().flatten().collect();
    let depths: Vec<f64> = kept.iter().map(|r| r.0).collect();
    let histogram = histogram_range(&depths, bins, 0.0, 1.0 / l)?;
    Ok(NotchDepths {
        depths,
        grid_depths: kept.iter().map(|r| r.1).collect(),
        bounds: kept.iter().map(|r| r.2).collect(),
        histogram,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::FockState;
    use crate::stats::{chi_square, ks_two_sample, ks_uniform};
    use crate::wavefunction::conditional;
    use proptest::prelude::*;

    fn fock(modes: &[(i32, u32)]) -> ManyBodyState {
        ManyBodyState::from_fock(&FockState::new(modes.iter().copied())).unwrap()
    }

    #[test]
    fn center_of_mass_examples() {
        let cfg = PositionConfig::new(vec![0.3; 4], 1.0).unwrap();
        let (x, m) = center_of_mass(&cfg).unwrap();
        assert!((x - 0.3).abs() < 1e-12 && (m - 4.0).abs() < 1e-12);
        let cfg = PositionConfig::new(vec![0.0, 0.5], 1.0).unwrap();
        assert!(matches!(
            center_of_mass(&cfg),
            Err(Error::UndefinedDirection { .. })
        ));
        let cfg = PositionConfig::new(vec![0.0, 0.25], 1.0).unwrap();
        let (x, m) = center_of_mass(&cfg).unwrap();
        assert!((x - 0.125).abs() < 1e-12 && (m - 2f64.sqrt()).abs() < 1e-12);
        let (x, _) = harmonic_center(&[0.1, 0.6], 1.0, 2).unwrap();
        assert!((x - 0.1).abs() < 1e-12);
    }

    fn set_from(configs: Vec<Vec<f64>>, l: f64) -> SampleSet {
        SampleSet {
            n: configs[0].len(),
            l,
            samples: configs
                .into_iter()
                .map(|c| PositionConfig::new(c, l).unwrap())
                .collect(),
            provenance: Provenance {
                method: Method::Sequential,
                seed: 0,
                burn_in: 0,
                thinning: 0,
                acceptance_rate: 1.0,
                proposal_width: 0.0,
                chains: 1,
            },
            warnings: vec![],
            skipped: 0,
        }
    }

    #[test]
    fn alignment_skips_undefined_samples() {
        let set = set_from(vec![vec![0.0, 0.5], vec![0.2, 0.4]], 1.0);
        let aligned = align_samples(&set);
        assert_eq!(aligned.skipped, 1);
        assert_eq!(aligned.len(), 1);
        let (x, _) = center_of_mass(&aligned.samples[0]).unwrap();
        assert!(x.min(1.0 - x) < 1e-9);
    }

    #[test]
    fn histogram_counts_everything() {
        let set = set_from(vec![vec![0.0, 0.999, 0.5], vec![0.25, 0.75, 0.1]], 1.0);
        let h = histogram(&set, 8).unwrap();
        assert_eq!(h.total, 6);
        assert_eq!(h.counts.iter().sum::<u64>(), 6);
        let integral: f64 = h.density.iter().sum::<f64>() / 8.0;
        assert!((integral - 1.0).abs() < 1e-12);
        assert!(histogram(&set, 7).is_err());
    }

    /// Transition matrix of the kernel on three states with a symmetric proposal.
    #[test]
    fn detailed_balance_on_three_points() {
        let target = [0.2, 0.5, 0.3];
        let propose = 0.5; // to each of the other two states
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    t[i][j] = propose * acceptance(target[i], target[j]);
                }
            }
            t[i][i] = 1.0 - (0..3).filter(|&j| j != i).map(|j| t[i][j]).sum::<f64>();
        }
        for i in 0..3 {
            for j in 0..3 {
                assert!((target[i] * t[i][j] - target[j] * t[j][i]).abs() < 1e-15);
            }
            let stationary: f64 = (0..3).map(|k| target[k] * t[k][i]).sum();
            assert!((stationary - target[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn trig_density_cdf_is_consistent() {
        let state = fock(&[(0, 3), (1, 2)]);
        let d = marginal_density(&state, &[0.1, 0.4], 1.0).unwrap();
        assert!((d.cdf(1.0) - 1.0).abs() < 1e-12);
        let h = 1e-6;
        for x in [0.1, 0.33, 0.8] {
            let numeric = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
            assert!((numeric - d.eval(x)).abs() < 1e-6);
            assert!((d.cdf(d.quantile(d.cdf(x))) - d.cdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn last_marginal_is_the_conditional() {
        let grid = uniform_grid(64, 1.0);
        for state in [fock(&[(0, 3), (1, 2)]), fock(&[(-1, 1), (0, 2), (2, 2)])] {
            let prefix = [0.05, 0.3, 0.61, 0.9];
            let d = marginal_density(&state, &prefix, 1.0).unwrap();
            let cw = conditional(&state, &prefix, &grid, 1.0).unwrap();
            for (x, rho) in grid.iter().zip(cw.density()) {
                assert!((d.eval(*x) - rho).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn flat_state_marginals_are_uniform() {
        let state = fock(&[(0, 4)]);
        for prefix in [&[][..], &[0.2][..], &[0.2, 0.7, 0.1][..]] {
            let d = marginal_density(&state, prefix, 1.0).unwrap();
            for x in [0.0, 0.3, 0.77] {
                assert!((d.eval(x) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_particle_pair_distance() {
        let state = fock(&[(0, 1), (1, 1)]);
        // density of r = x1 - x2 (mod 1) is 1 + cos 2πr
        let bins = 20;
        let expected_frac: Vec<f64> = (0..bins)
            .map(|b| {
                let (a, c) = (b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
                (c - a) + ((2.0 * PI * c).sin() - (2.0 * PI * a).sin()) / (2.0 * PI)
            })
            .collect();
        let check = |set: &SampleSet| {
            let r: Vec<f64> = set
                .samples
                .iter()
                .map(|s| wrap(s.positions()[0] - s.positions()[1], 1.0))
                .collect();
            let h = histogram_range(&r, bins, 0.0, 1.0).unwrap();
            let obs: Vec<f64> = h.counts.iter().map(|&c| c as f64).collect();
            let exp: Vec<f64> = expected_frac.iter().map(|f| f * r.len() as f64).collect();
            chi_square(&obs, &exp, 1).unwrap().p_value
        };
        let seq = sequential_sample(&state, 1.0, 10_000, 5).unwrap();
        assert!(check(&seq) > 0.01);
        let mut opts = MetropolisOptions::new(10_000, 6);
        opts.chains = 4;
        opts.thinning = Some(4);
        let met = metropolis_sample(&state, 1.0, &opts).unwrap();
        assert!(check(&met) > 0.01);
        assert!(met.warnings.is_empty());
    }

    #[test]
    fn flat_state_metropolis_is_uniform() {
        let state = fock(&[(0, 3)]);
        let mut opts = MetropolisOptions::new(10_000, 8);
        opts.burn_in = Some(10);
        let set = metropolis_sample(&state, 1.0, &opts).unwrap();
        let r = ks_uniform(&set.particle(0), 1.0).unwrap();
        assert!(r.statistic < 0.02, "{r:?}");
        // flat target: every proposal is accepted
        assert_eq!(set.provenance.acceptance_rate, 1.0);
        assert_eq!(set.warnings.len(), 1);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let state = fock(&[(0, 2), (1, 2)]);
        let mut opts = MetropolisOptions::new(20, 3);
        opts.chains = 3;
        opts.burn_in = Some(5);
        let a = metropolis_sample(&state, 1.0, &opts).unwrap();
        let b = metropolis_sample(&state, 1.0, &opts).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = sequential_sample(&state, 1.0, 20, 3).unwrap();
        let d = sequential_sample(&state, 1.0, 20, 3).unwrap();
        assert_eq!(c.samples, d.samples);
    }

    #[test]
    fn sequential_and_metropolis_agree_after_alignment() {
        let state = fock(&[(0, 2), (1, 2)]);
        let seq = align_samples(&sequential_sample(&state, 1.0, 4000, 1).unwrap());
        let mut opts = MetropolisOptions::new(4000, 2);
        opts.chains = 8;
        opts.burn_in = Some(200);
        let met = align_samples(&metropolis_sample(&state, 1.0, &opts).unwrap());
        let p = ks_two_sample(&seq.particle(0), &met.particle(0))
            .unwrap()
            .p_value;
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn black_depths_vanish() {
        let state = fock(&[(0, 4), (1, 4)]);
        let r = notch_depth_histogram(&state, 1.0, 50, 20, 256, 4).unwrap();
        assert_eq!(r.depths.len() + r.skipped, 50);
        assert!(r.depths.iter().all(|&d| (0.0..1e-10).contains(&d)));
        assert_eq!(r.histogram.counts[0], r.depths.len() as u64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn alignment_commutes_with_rotation(
            xs in prop::collection::vec(0.0f64..1.0, 2..7),
            d in 0.0f64..1.0,
        ) {
            let set = set_from(vec![xs.clone()], 1.0);
            let rotated = set_from(vec![xs.iter().map(|&x| wrap(x + d, 1.0)).collect()], 1.0);
            let a = align_samples(&set);
            let b = align_samples(&rotated);
            prop_assert_eq!(a.len(), b.len());
            if let (Some(s), Some(t)) = (a.samples.first(), b.samples.first()) {
                for (x, y) in s.positions().iter().zip(t.positions()) {
                    let diff = wrap(x - y + 0.5, 1.0) - 0.5;
                    prop_assert!(diff.abs() < 1e-9);
                }
                let (c, _) = center_of_mass(s).unwrap();
                prop_assert!(c.min(1.0 - c) < 1e-9);
            }
        }
    }
}
