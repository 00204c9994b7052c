//! Lieb-Liniger Hamiltonian in a fixed-momentum Fock block.
//!
//! In the plane-wave basis the contact interaction reads
//! `(g/2L) Σ a†_{k+m} a†_{l-m} a_l a_k`, with every mode index restricted to
//! `[-k_max, k_max]`. The operator conserves total momentum, so it acts inside
//! one [`BasisSet`]. All matrix elements are real and the matrix is symmetric.

mod lanczos;
mod sweep;

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{enumerate_basis, mode_energy, BasisSet, FockState};
use crate::{seed, Error, Result};

pub use sweep::{
    converged_yrast, fidelity_sweep, ConvergedYrast, CutoffOptions, SweepCell, SweepGrid, SweepRow,
};

/// Blocks below this dimension keep a cached sparse matrix.
pub const CACHE_DIMENSION: usize = 200_000;
/// Cached matrices are also capped by stored non-zeros (roughly 12 bytes each).
pub const CACHE_NONZEROS: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub n: usize,
    pub k: i64,
    pub kmax: usize,
    /// Contact coupling, energy × length.
    pub g: f64,
    /// Ring length.
    pub l: f64,
}

impl ModelParams {
    pub fn new(n: usize, k: i64, kmax: usize, g: f64, l: f64) -> Self {
        ModelParams { n, k, kmax, g, l }
    }

    pub fn validate(&self) -> Result<()> {
        crate::basis::check_length(self.l)?;
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::invalid(
                "g",
                format!("coupling must be >= 0, got {}", self.g),
            ));
        }
        Ok(())
    }

    pub fn with_kmax(self, kmax: usize) -> Self {
        ModelParams { kmax, ..self }
    }

    /// `ξ = 1/√(gN/L)`; `None` for the ideal gas.
    pub fn healing_length(&self) -> Option<f64> {
        crate::meanfield::healing_length(self.g, self.n, self.l).ok()
    }

    fn matches(&self, basis: &BasisSet) -> bool {
        basis.particle_count() == self.n
            && basis.momentum() == Some(self.k)
            && basis.kmax() == self.kmax
    }
}

/// Complex amplitudes over a basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    basis: Arc<BasisSet>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(basis: Arc<BasisSet>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: amplitudes.len(),
            });
        }
        Ok(StateVector { basis, amplitudes })
    }

    /// The unit vector on one Fock state.
    pub fn basis_vector(basis: Arc<BasisSet>, state: &FockState) -> Result<Self> {
        let i = basis.index_of(state).ok_or_else(|| Error::OutOfRange {
            what: "Fock state",
            detail: format!("{state} is not in the basis"),
        })?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(StateVector { basis, amplitudes })
    }

    /// Seeded complex Gaussian amplitudes, normalized.
    pub fn random(basis: Arc<BasisSet>, seed_value: u64) -> Self {
        let mut rng = seed::rng(seed_value);
        let amplitudes: Vec<Complex64> = (0..basis.len())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let mut v = StateVector { basis, amplitudes };
        v.normalize();
        v
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|c| *c /= n);
        }
    }

    pub fn same_basis(&self, other: &StateVector) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if !self.same_basis(other) {
            return Err(Error::BasisMismatch);
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Weight of each Fock state, largest first.
    pub fn top_components(&self, count: usize) -> Vec<(FockState, Complex64)> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.amplitudes[b]
                .norm_sqr()
                .total_cmp(&self.amplitudes[a].norm_sqr())
                .then(a.cmp(&b))
        });
        idx.into_iter()
            .take(count)
            .map(|i| (self.basis.state(i), self.amplitudes[i]))
            .collect()
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `|⟨u|v⟩|²`.
pub fn fidelity(u: &StateVector, v: &StateVector) -> Result<f64> {
    Ok(u.inner(v)?.norm_sqr())
}

struct Csr {
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

/// The Hamiltonian of one momentum block.
pub struct Hamiltonian {
    params: ModelParams,
    basis: Arc<BasisSet>,
    csr: Option<Csr>,
}

impl Hamiltonian {
    /// Enumerates the block and caches the sparse matrix when it is small enough.
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let basis = Arc::new(enumerate_basis(params.n, params.k, params.kmax)?);
        let mut h = Hamiltonian {
            params,
            basis,
            csr: None,
        };
        if h.dim() < CACHE_DIMENSION {
            h.csr = h.build_csr();
        }
        Ok(h)
    }

    /// Same operator without the cached matrix.
    pub fn matrix_free(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let basis = Arc::new(enumerate_basis(params.n, params.k, params.kmax)?);
        Ok(Hamiltonian {
            params,
            basis,
            csr: None,
        })
    }

    /// Operator over an arbitrary basis (including a merged all-momenta one).
    pub fn on_basis(params: ModelParams, basis: Arc<BasisSet>) -> Result<Self> {
        params.validate()?;
        if basis.particle_count() != params.n || basis.kmax() != params.kmax {
            return Err(Error::BasisMismatch);
        }
        Ok(Hamiltonian {
            params,
            basis,
            csr: None,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_cached(&self) -> bool {
        self.csr.is_some()
    }

    /// Calls `f(j, H_ji)` for every generated element of column `i`. Repeated
    /// `j` are possible and must be summed.
    fn for_each_in_column(&self, i: usize, scratch: &mut Vec<u16>, mut f: impl FnMut(usize, f64)) {
        let basis = &*self.basis;
        let occ = basis.occupations(i);
        let kmax = basis.kmax() as i32;
        let width = occ.len();
        let l = self.params.l;

        let kinetic: f64 = occ
            .iter()
            .enumerate()
            .map(|(m, &n)| n as f64 * mode_energy(m as i32 - kmax, l))
            .sum();
        f(i, kinetic);
        if self.params.g == 0.0 {
            return;
        }

        let prefactor = self.params.g / (2.0 * l);
        let occupied: Vec<usize> = (0..width).filter(|&m| occ[m] > 0).collect();
        scratch.clear();
        scratch.extend_from_slice(occ);
        for (a, &r) in occupied.iter().enumerate() {
            for &s in &occupied[a..] {
                let (nr, ns) = (occ[r] as f64, occ[s] as f64);
                let (ann, c_ann) = if r == s {
                    if occ[r] < 2 {
                        continue;
                    }
                    ((nr * (nr - 1.0)).sqrt(), 1.0)
                } else {
                    ((nr * ns).sqrt(), 2.0)
                };
                scratch[r] -= 1;
                scratch[s] -= 1;
                let total = r + s;
                let p_lo = total.saturating_sub(width - 1);
                for p in p_lo..=total / 2 {
                    let q = total - p;
                    let (mp, mq) = (scratch[p] as f64, scratch[q] as f64);
                    let (cre, c_cre) = if p == q {
                        (((mp + 1.0) * (mp + 2.0)).sqrt(), 1.0)
                    } else {
                        (((mp + 1.0) * (mq + 1.0)).sqrt(), 2.0)
                    };
                    scratch[p] += 1;
                    scratch[q] += 1;
                    if let Some(j) = basis.index_of_occupations(scratch) {
                        f(j, prefactor * c_ann * c_cre * ann * cre);
                    } else {
                        debug_assert!(false, "interaction left the basis");
                    }
                    scratch[p] -= 1;
                    scratch[q] -= 1;
                }
                scratch[r] += 1;
                scratch[s] += 1;
            }
        }
    }

    /// Merged, column-sorted row `i` of the matrix.
    fn row(&self, i: usize, scratch: &mut Vec<u16>) -> Vec<(u32, f64)> {
        let mut entries: Vec<(u32, f64)> = Vec::new();
        self.for_each_in_column(i, scratch, |j, h| entries.push((j as u32, h)));
        entries.sort_unstable_by_key(|&(j, _)| j);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (j, h) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == j => *acc += h,
                _ => merged.push((j, h)),
            }
        }
        merged
    }

    fn build_csr(&self) -> Option<Csr> {
        let rows: Vec<Vec<(u32, f64)>> = (0..self.dim())
            .into_par_iter()
            .map_init(Vec::new, |scratch, i| self.row(i, scratch))
            .collect();
        let nnz: usize = rows.iter().map(Vec::len).sum();
        if nnz > CACHE_NONZEROS {
            return None;
        }
        let mut row_start = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_start.push(0);
        for row in rows {
            for (j, h) in row {
                cols.push(j);
                vals.push(h);
            }
            row_start.push(cols.len());
        }
        Some(Csr {
            row_start,
            cols,
            vals,
        })
    }

    /// `y = H x` on raw amplitude slices.
    pub fn apply_slice(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        match &self.csr {
            Some(csr) => {
                y.par_iter_mut().enumerate().for_each(|(i, yi)| {
                    let range = csr.row_start[i]..csr.row_start[i + 1];
                    *yi = csr.cols[range.clone()]
                        .iter()
                        .zip(&csr.vals[range])
                        .map(|(&j, &h)| x[j as usize] * h)
                        .sum();
                });
            }
            None => {
                y.par_iter_mut()
                    .enumerate()
                    .for_each_init(Vec::new, |scratch, (i, yi)| {
                        // H is real symmetric, so column i doubles as row i.
                        let mut acc = Complex64::new(0.0, 0.0);
                        self.for_each_in_column(i, scratch, |j, h| acc += x[j] * h);
                        *yi = acc;
                    });
            }
        }
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if !(Arc::ptr_eq(v.basis(), &self.basis) || **v.basis() == *self.basis) {
            return Err(Error::BasisMismatch);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_slice(v.amplitudes(), &mut out);
        StateVector::new(self.basis.clone(), out)
    }

    /// Merged matrix row `i` as `(column, value)` pairs.
    pub fn matrix_row(&self, i: usize) -> Vec<(usize, f64)> {
        let mut scratch = Vec::new();
        self.row(i, &mut scratch)
            .into_iter()
            .map(|(j, h)| (j as usize, h))
            .collect()
    }

    /// Gershgorin bound `max_i Σ_j |H_ij|` on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        match &self.csr {
            Some(csr) => (0..self.dim())
                .map(|i| {
                    csr.vals[csr.row_start[i]..csr.row_start[i + 1]]
                        .iter()
                        .map(|h| h.abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max),
            None => (0..self.dim())
                .into_par_iter()
                .map_init(Vec::new, |scratch, i| {
                    self.row(i, scratch)
                        .iter()
                        .map(|(_, h)| h.abs())
                        .sum::<f64>()
                })
                .reduce(|| 0.0, f64::max),
        }
    }

    /// Dense row-major matrix; intended for small blocks and tests.
    pub fn dense(&self) -> Vec<f64> {
        let d = self.dim();
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for (j, h) in self.matrix_row(i) {
                m[i * d + j] = h;
            }
        }
        m
    }
}

/// `H v` for the block described by `params`, without caching.
pub fn apply_hamiltonian(params: &ModelParams, v: &StateVector) -> Result<StateVector> {
    params.validate()?;
    if !params.matches(v.basis()) {
        return Err(Error::BasisMismatch);
    }
    let h = Hamiltonian {
        params: *params,
        basis: v.basis().clone(),
        csr: None,
    };
    h.apply(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Backend {
    /// Repeated application of `C - H`.
    PowerIteration,
    /// Restarted Lanczos with full reorthogonalization.
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct YrastOptions {
    /// Target residual `‖Hv - Ev‖`.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub backend: Backend,
    /// Estimate the second-lowest level of the block to flag degeneracy.
    pub check_degeneracy: bool,
    /// Keep `⟨v_n|H|v_n⟩` for every power-iteration step.
    pub record_history: bool,
}

impl Default for YrastOptions {
    fn default() -> Self {
        YrastOptions {
            tol: 1e-10,
            max_iters: 1_000_000,
            seed: 0,
            backend: Backend::PowerIteration,
            check_degeneracy: true,
            record_history: false,
        }
    }
}

/// Levels closer than this count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct YrastResult {
    pub state: StateVector,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Shift constant used by power iteration (0 for Lanczos).
    pub shift: f64,
    /// Lowest level of the block orthogonal to `state`, when estimated.
    pub second_energy: Option<f64>,
    pub degenerate: bool,
    pub history: Vec<f64>,
}

/// Lowest eigenstate of the `(N, K)` block.
pub fn find_yrast(params: &ModelParams, opts: &YrastOptions) -> Result<YrastResult> {
    let h = Hamiltonian::new(*params)?;
    find_yrast_with(&h, opts)
}

pub fn find_yrast_with(h: &Hamiltonian, opts: &YrastOptions) -> Result<YrastResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol", "tolerance must be positive"));
    }
    let start = StateVector::random(h.basis().clone(), opts.seed);
    let mut result = match opts.backend {
        Backend::PowerIteration => power_iteration(h, start, opts)?,
        Backend::Lanczos => {
            let run = lanczos::lowest(
                |x, y| h.apply_slice(x, y),
                start.amplitudes(),
                &[],
                lanczos::KRYLOV_DIM,
                opts.tol,
                opts.max_iters,
            )?;
            YrastResult {
                state: StateVector::new(h.basis().clone(), run.vector)?,
                energy: run.value,
                residual: run.residual,
                iterations: run.matvecs,
                shift: 0.0,
                second_energy: None,
                degenerate: false,
                history: Vec::new(),
            }
        }
    };
    if opts.check_degeneracy && h.dim() > 1 {
        let probe = StateVector::random(h.basis().clone(), seed::derive(opts.seed, 1));
        let second = lanczos::lowest(
            |x, y| h.apply_slice(x, y),
            probe.amplitudes(),
            &[result.state.amplitudes()],
            lanczos::KRYLOV_DIM.min(h.dim() - 1).max(1),
            1e-6,
            4 * lanczos::KRYLOV_DIM,
        )
        .map(|run| run.value)
        .ok();
        result.second_energy = second;
        result.degenerate = second.is_some_and(|e1| (e1 - result.energy).abs() < DEGENERACY_TOL);
    }
    Ok(result)
}

fn power_iteration(
    h: &Hamiltonian,
    mut v: StateVector,
    opts: &YrastOptions,
) -> Result<YrastResult> {
    let dim = h.dim();
    let shift = h.spectral_bound();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    for iteration in 0..=opts.max_iters {
        h.apply_slice(v.amplitudes(), &mut w);
        let energy = inner(v.amplitudes(), &w).re;
        residual = v
            .amplitudes()
            .iter()
            .zip(&w)
            .map(|(a, b)| (b - a * energy).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if opts.record_history {
            history.push(energy);
        }
        if residual <= opts.tol {
            return Ok(YrastResult {
                state: v,
                energy,
                residual,
                iterations: iteration,
                shift,
                second_energy: None,
                degenerate: false,
                history,
            });
        }
        if iteration == opts.max_iters {
            break;
        }
        // v <- (C - H) v / ‖·‖
        for (a, b) in v.amplitudes.iter_mut().zip(&w) {
            *a = *a * shift - b;
        }
        v.normalize();
    }
    Err(Error::NotConverged {
        iterations: opts.max_iters,
        residual,
    })
}
