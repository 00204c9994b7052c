//! Position-space amplitudes of bosonic plane-wave Fock states.
//!
//! Mode `k` is `e^{2πikx/L}/√L`. A two-mode state `|n_p, n_q⟩` has the closed
//! form `Π_i a_i^p · e_{n_q}(b_1..b_N) / √(L^N C(N, n_q))` with
//! `a_i = e^{2πix_i/L}` and `b_i = a_i^{q-p}`, where `e_j` is the elementary
//! symmetric polynomial. Other states go through repeated application of the
//! field operator `ψ(x) = Σ_k φ_k(x) a_k`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{check_length, FockState};
use crate::hamiltonian::StateVector;
use crate::{Error, Result};

pub const DEFAULT_GRID: usize = 1024;
/// Ryser evaluation is `O(2^N N)`; beyond this it is refused.
pub const PERMANENT_MAX: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `e^{2πi k x / L}`.
#[inline]
pub fn plane_wave(k: f64, x: f64, l: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k * x / l)
}

/// Maps `x` into `[0, L)`.
#[inline]
pub fn wrap(x: f64, l: f64) -> f64 {
    let y = x.rem_euclid(l);
    if y >= l {
        0.0
    } else {
        y
    }
}

/// Wraps an angle into `(-π, π]`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let y = (a + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositionConfig {
    positions: Vec<f64>,
    l: f64,
}

impl PositionConfig {
    pub fn new(positions: Vec<f64>, l: f64) -> Result<Self> {
        check_length(l)?;
        if positions.is_empty() {
            return Err(Error::invalid("positions", "need at least one particle"));
        }
        if let Some(x) = positions.iter().find(|&&x| !(x >= 0.0 && x < l)) {
            return Err(Error::OutOfRange {
                what: "position",
                detail: format!("{x} is outside [0, {l})"),
            });
        }
        Ok(PositionConfig { positions, l })
    }

    /// Wraps every coordinate onto the ring first.
    pub fn wrapped(positions: Vec<f64>, l: f64) -> Result<Self> {
        check_length(l)?;
        Self::new(positions.into_iter().map(|x| wrap(x, l)).collect(), l)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, l: f64, rng: &mut R) -> Result<Self> {
        Self::new(
            (0..n).map(|_| wrap(rng.random::<f64>() * l, l)).collect(),
            l,
        )
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn length(&self) -> f64 {
        self.l
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Rigid rotation by `d`.
    pub fn shifted(&self, d: f64) -> Self {
        PositionConfig {
            positions: self
                .positions
                .iter()
                .map(|&x| wrap(x + d, self.l))
                .collect(),
            l: self.l,
        }
    }

    pub fn into_positions(self) -> Vec<f64> {
        self.positions
    }
}

/// `e_0..=e_degree` of `values`, by the product recurrence.
pub fn elementary_symmetric(values: &[Complex64], degree: usize) -> Vec<Complex64> {
    let mut e = vec![ZERO; degree + 1];
    e[0] = ONE;
    for (count, &a) in values.iter().enumerate() {
        for j in (1..=degree.min(count + 1)).rev() {
            e[j] = e[j] + a * e[j - 1];
        }
    }
    e
}

/// Permanent of a row-major `n × n` matrix (Ryser, Gray-code order).
pub fn permanent(m: &[Complex64], n: usize) -> Result<Complex64> {
    if m.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: m.len(),
        });
    }
    if n == 0 {
        return Ok(ONE);
    }
    if n > PERMANENT_MAX {
        return Err(Error::invalid(
            "n",
            format!("permanent limited to n <= {PERMANENT_MAX}, got {n}"),
        ));
    }
    let mut row_sums = vec![ZERO; n];
    let mut in_set = vec![false; n];
    let mut members = 0usize;
    let mut total = ZERO;
    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        let sign = if in_set[col] { -1.0 } else { 1.0 };
        in_set[col] = !in_set[col];
        if in_set[col] {
            members += 1;
        } else {
            members -= 1;
        }
        for (i, s) in row_sums.iter_mut().enumerate() {
            *s += m[i * n + col] * sign;
        }
        let prod: Complex64 = row_sums.iter().product();
        if members % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        total = -total;
    }
    Ok(total)
}

/// Amplitude of a Fock state from the permanent of `φ_{k_j}(x_i)`; the test oracle.
pub fn amplitude_by_permanent(state: &FockState, config: &PositionConfig) -> Result<Complex64> {
    let n = state.particle_count();
    check_particles(n, config.len())?;
    let l = config.length();
    let modes: Vec<i32> = state
        .modes()
        .iter()
        .flat_map(|&(k, c)| std::iter::repeat_n(k, c as usize))
        .collect();
    let m: Vec<Complex64> = config
        .positions()
        .iter()
        .flat_map(|&x| modes.iter().map(move |&k| plane_wave(k as f64, x, l)))
        .collect();
    let perm = permanent(&m, n)?;
    let ln_norm = n as f64 * l.ln()
        + ln_factorial(n)
        + state
            .modes()
            .iter()
            .map(|&(_, c)| ln_factorial(c as usize))
            .sum::<f64>();
    Ok(perm * (-0.5 * ln_norm).exp())
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn check_particles(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A finite superposition of Fock states with a common particle number.
#[derive(Clone, Debug)]
pub struct ManyBodyState {
    n: usize,
    terms: Vec<(FockState, Complex64)>,
}

impl ManyBodyState {
    pub fn new(terms: Vec<(FockState, Complex64)>) -> Result<Self> {
        let n = terms
            .first()
            .map(|(s, _)| s.particle_count())
            .ok_or_else(|| Error::invalid("state", "no components"))?;
        if n == 0 {
            return Err(Error::invalid("state", "need at least one particle"));
        }
        if let Some((s, _)) = terms.iter().find(|(s, _)| s.particle_count() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.particle_count(),
            });
        }
        Ok(ManyBodyState { n, terms })
    }

    pub fn from_fock(state: &FockState) -> Result<Self> {
        Self::new(vec![(state.clone(), ONE)])
    }

    pub fn from_vector(v: &StateVector) -> Result<Self> {
        let terms = v
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, &c)| (v.basis().state(i), c))
            .collect();
        Self::new(terms)
    }

    pub fn particle_count(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(FockState, Complex64)] {
        &self.terms
    }

    pub fn max_abs_mode(&self) -> i32 {
        self.terms
            .iter()
            .map(|(s, _)| s.max_abs_mode() as i32)
            .max()
            .unwrap_or(0)
    }

    /// Single Fock component, if the state is one.
    pub fn as_fock(&self) -> Option<&FockState> {
        match self.terms.as_slice() {
            [(s, _)] => Some(s),
            _ => None,
        }
    }

    /// `ψ(others..., x)` as a function of the last coordinate.
    pub fn slice(&self, others: &[f64], l: f64) -> Result<Slice> {
        check_length(l)?;
        check_particles(self.n - 1, others.len())?;
        let kmax = self.max_abs_mode();
        let mut coeffs = vec![ZERO; 2 * kmax as usize + 1];
        let mut generic: Vec<(FockState, Complex64)> = Vec::new();
        for (state, c) in &self.terms {
            match state.modes() {
                [(k, _)] => {
                    let (m, _, pref) = two_mode_parts(*k, *k + 1, self.n, 0, others, l);
                    coeffs[(*k + kmax) as usize] += c * pref * m;
                }
                [(p, _), (q, nq)] => {
                    let (m, s, pref) = two_mode_parts(*p, *q, self.n, *nq as usize, others, l);
                    coeffs[(*p + kmax) as usize] += c * pref * m;
                    coeffs[(*q + kmax) as usize] += c * pref * s;
                }
                _ => generic.push((state.clone(), *c)),
            }
        }
        if !generic.is_empty() {
            let d = field_reduction(&generic, kmax, others, l);
            let scale = (-0.5 * ln_factorial(self.n)).exp() / l.sqrt();
            for (c, dk) in coeffs.iter_mut().zip(d) {
                *c += dk * scale;
            }
        }
        Ok(Slice {
            kmin: -kmax,
            coeffs,
            l,
        })
    }

    pub fn amplitude(&self, config: &PositionConfig) -> Result<Complex64> {
        check_particles(self.n, config.len())?;
        let (last, others) = config.positions().split_last().expect("non-empty");
        Ok(self.slice(others, config.length())?.eval(*last))
    }
}

/// `(M, S, prefactor)` for the slice of `|n_p = N - n_q, n_q⟩`:
/// `ψ(x) = pref · (M e^{2πipx/L} + S e^{2πiqx/L})`.
fn two_mode_parts(
    p: i32,
    q: i32,
    n: usize,
    nq: usize,
    others: &[f64],
    l: f64,
) -> (Complex64, Complex64, Complex64) {
    let d = (q - p) as f64;
    let b: Vec<Complex64> = others.iter().map(|&x| plane_wave(d, x, l)).collect();
    let e = elementary_symmetric(&b, nq);
    let m = e[nq];
    let s = if nq >= 1 { e[nq - 1] } else { ZERO };
    let sum: f64 = others.iter().sum();
    let ln_norm = n as f64 * l.ln() + ln_binomial(n, nq);
    let pref = plane_wave(p as f64, sum, l) * (-0.5 * ln_norm).exp();
    (m, s, pref)
}

/// A Fock-space vector keyed by dense occupations over `-kmax..=kmax`.
pub(crate) type SparseFock = BTreeMap<Vec<u16>, Complex64>;

pub(crate) fn sparse_from_terms(terms: &[(FockState, Complex64)], kmax: i32) -> SparseFock {
    let mut v = SparseFock::new();
    for (s, c) in terms {
        let occ = s.to_dense(kmax as usize).expect("mode within kmax");
        *v.entry(occ).or_insert(ZERO) += c;
    }
    v
}

/// `a_m |v⟩` for the mode at dense index `m`.
pub(crate) fn annihilate(v: &SparseFock, m: usize) -> SparseFock {
    let mut out = SparseFock::new();
    for (occ, c) in v {
        if occ[m] > 0 {
            let mut lowered = occ.clone();
            lowered[m] -= 1;
            *out.entry(lowered).or_insert(ZERO) += c * (occ[m] as f64).sqrt();
        }
    }
    out
}

/// `ψ(x)|v⟩` with `ψ(x) = Σ_k e^{2πikx/L} a_k / √L`.
pub(crate) fn apply_field(v: &SparseFock, x: f64, kmax: i32, l: f64) -> SparseFock {
    let width = 2 * kmax as usize + 1;
    let inv_sqrt_l = 1.0 / l.sqrt();
    let phases: Vec<Complex64> = (0..width)
        .map(|m| plane_wave((m as i32 - kmax) as f64, x, l) * inv_sqrt_l)
        .collect();
    let mut next = SparseFock::new();
    for (occ, c) in v {
        for m in 0..width {
            if occ[m] == 0 {
                continue;
            }
            let mut lowered = occ.clone();
            lowered[m] -= 1;
            *next.entry(lowered).or_insert(ZERO) += c * phases[m] * (occ[m] as f64).sqrt();
        }
    }
    next
}

pub(crate) fn sparse_inner(a: &SparseFock, b: &SparseFock) -> Complex64 {
    a.iter()
        .filter_map(|(occ, x)| b.get(occ).map(|y| x.conj() * y))
        .sum()
}

/// `⟨0|ψ(x_{N-1})…ψ(x_1)|Φ⟩` expressed on the single-particle modes `-kmax..=kmax`.
fn field_reduction(
    terms: &[(FockState, Complex64)],
    kmax: i32,
    others: &[f64],
    l: f64,
) -> Vec<Complex64> {
    let width = 2 * kmax as usize + 1;
    let mut current = sparse_from_terms(terms, kmax);
    for &x in others {
        current = apply_field(&current, x, kmax, l);
    }
    let mut d = vec![ZERO; width];
    for (occ, c) in current {
        if let Some(m) = occ.iter().position(|&n| n == 1) {
            d[m] += c;
        }
    }
    d
}

/// `ψ(x) = Σ_k c_k e^{2πikx/L}`, a one-variable trigonometric polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Slice {
    kmin: i32,
    coeffs: Vec<Complex64>,
    l: f64,
}

impl Slice {
    pub fn from_coefficients(kmin: i32, coeffs: Vec<Complex64>, l: f64) -> Self {
        Slice { kmin, coeffs, l }
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.kmin + i as i32, c))
    }

    pub fn length(&self) -> f64 {
        self.l
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coefficients()
            .filter(|(_, c)| *c != ZERO)
            .map(|(k, c)| c * plane_wave(k as f64, x, self.l))
            .sum()
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        self.coefficients()
            .filter(|(_, c)| *c != ZERO)
            .map(|(k, c)| {
                c * plane_wave(k as f64, x, self.l)
                    * Complex64::new(0.0, 2.0 * PI * k as f64 / self.l)
            })
            .sum()
    }

    /// `∫_0^L |ψ|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.l * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Minimum of `|ψ|² / ∫|ψ|²` over the ring.
    pub fn min_density(&self) -> Result<f64> {
        let norm = self.norm_sqr();
        if !(norm > 0.0) {
            return Err(Error::DegenerateConditional);
        }
        let live: Vec<Complex64> = self.coeffs.iter().copied().filter(|c| *c != ZERO).collect();
        match live.as_slice() {
            [_] => Ok(1.0 / self.l),
            [a, b] => Ok((a.norm() - b.norm()).powi(2) / norm),
            _ => Ok(self.refine_minimum(DEFAULT_GRID).1 / norm),
        }
    }

    /// Location and value of the minimum of `|ψ|²`, unnormalized.
    pub fn refine_minimum(&self, grid: usize) -> (f64, f64) {
        let dx = self.l / grid as f64;
        let (best, _) = (0..grid)
            .map(|j| (j, self.eval(j as f64 * dx).norm_sqr()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("grid non-empty");
        let f = |x: f64| self.eval(x).norm_sqr();
        let (mut a, mut b) = ((best as f64 - 1.0) * dx, (best as f64 + 1.0) * dx);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if (b - a).abs() < 1e-15 * self.l {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d);
            }
        }
        let x = 0.5 * (a + b);
        (wrap(x, self.l), f(x))
    }

    /// Normalized samples on a uniform grid.
    pub fn on_grid(&self, grid: &[f64], fixed: Vec<f64>) -> Result<ConditionalWF> {
        ConditionalWF::from_values(
            grid.to_vec(),
            grid.iter().map(|&x| self.eval(x)).collect(),
            fixed,
            self.l,
        )
    }
}

/// `x_j = j L / points`.
pub fn uniform_grid(points: usize, l: f64) -> Vec<f64> {
    (0..points).map(|j| j as f64 * l / points as f64).collect()
}

/// One particle's wave function with the others held fixed, on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionalWF {
    pub grid: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub fixed: Vec<f64>,
    pub l: f64,
}

impl ConditionalWF {
    /// Normalizes so that `Σ|ψ|²Δx = 1` (uniform grid on `[0, L)`) and rotates
    /// the global phase to zero at the point of largest modulus.
    pub fn from_values(
        grid: Vec<f64>,
        values: Vec<Complex64>,
        fixed: Vec<f64>,
        l: f64,
    ) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::invalid(
                "grid",
                "need at least two points matching the values",
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 || *grid.last().unwrap() >= l {
            return Err(Error::invalid(
                "grid",
                "must be strictly increasing inside [0, L)",
            ));
        }
        let dx = l / grid.len() as f64;
        let total: f64 = values.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx;
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateConditional);
        }
        let (imax, _) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .expect("non-empty");
        let phase = values[imax].conj() / values[imax].norm();
        let scale = phase / total.sqrt();
        let amplitudes = values.iter().map(|c| c * scale).collect();
        Ok(ConditionalWF {
            grid,
            amplitudes,
            fixed,
            l,
        })
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Phase in `(-π, π]`, zero at the largest modulus.
    pub fn phase(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.arg()).collect()
    }

    /// Phase unwrapped along the grid (jumps larger than π are folded).
    pub fn unwrapped_phase(&self) -> Vec<f64> {
        let raw = self.phase();
        let mut out = Vec::with_capacity(raw.len());
        let mut acc = raw[0];
        out.push(acc);
        for w in raw.windows(2) {
            acc += wrap_angle(w[1] - w[0]);
            out.push(acc);
        }
        out
    }

    /// Index of the smallest density on the grid.
    pub fn argmin(&self) -> usize {
        self.amplitudes
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i)
            .expect("non-empty")
    }

    pub fn min_density(&self) -> f64 {
        self.amplitudes[self.argmin()].norm_sqr()
    }

    /// Indices of strict local minima of the density (cyclic).
    pub fn local_minima(&self) -> Vec<usize> {
        let d = self.density();
        let n = d.len();
        (0..n)
            .filter(|&i| d[i] < d[(i + n - 1) % n] && d[i] <= d[(i + 1) % n])
            .collect()
    }

    /// Phase step across the grid interval at the density minimum `i`, with the
    /// smooth background (mean of the neighbouring steps) removed.
    pub fn phase_jump_at(&self, i: usize) -> f64 {
        let n = self.amplitudes.len();
        let step = |j: usize| {
            wrap_angle(self.amplitudes[(j + 1) % n].arg() - self.amplitudes[j % n].arg())
        };
        let jump = |j: usize| (step(j) - 0.5 * (step((j + n - 1) % n) + step((j + 1) % n))).abs();
        jump((i + n - 1) % n).max(jump(i))
    }

    pub fn phase_jump(&self) -> f64 {
        self.phase_jump_at(self.argmin())
    }
}

/// Conditional wave function on `grid`: the last coordinate is free.
pub fn conditional(
    state: &ManyBodyState,
    fixed: &[f64],
    grid: &[f64],
    l: f64,
) -> Result<ConditionalWF> {
    if state.particle_count() < 2 {
        return Err(Error::invalid("n", "conditional needs N >= 2"));
    }
    state.slice(fixed, l)?.on_grid(grid, fixed.to_vec())
}

/// The pair `S = e_{K-1}(a)`, `M = e_K(a)` over the fixed phase factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DickePair {
    pub s: Complex64,
    pub m: Complex64,
    pub k: usize,
    pub sources: Vec<Complex64>,
}

impl DickePair {
    /// Exact minimum of the normalized conditional density.
    pub fn min_density(&self, l: f64) -> f64 {
        let (s, m) = (self.s.norm(), self.m.norm());
        (s - m).powi(2) / (l * (s * s + m * m))
    }

    /// `(|S| - |M|)² / (L (|S| + |M|)²)`, a lower bound on the minimum.
    pub fn gray_bound(&self, l: f64) -> f64 {
        let (s, m) = (self.s.norm(), self.m.norm());
        (s - m).powi(2) / (l * (s + m).powi(2))
    }
}

pub fn dicke_sm(k: usize, fixed: &[f64], l: f64) -> Result<DickePair> {
    check_length(l)?;
    let n = fixed.len() + 1;
    if k < 1 || k > n - 1 {
        return Err(Error::OutOfRange {
            what: "K",
            detail: format!("need 1 <= K <= N-1 = {}, got {k}", n - 1),
        });
    }
    let sources: Vec<Complex64> = fixed.iter().map(|&x| plane_wave(1.0, x, l)).collect();
    let e = elementary_symmetric(&sources, k);
    Ok(DickePair {
        s: e[k - 1],
        m: e[k],
        k,
        sources,
    })
}

/// `ψ_con ∝ S e^{2πix/L} + M` on the grid.
pub fn dicke_conditional(
    n: usize,
    k: usize,
    fixed: &[f64],
    grid: &[f64],
    l: f64,
) -> Result<ConditionalWF> {
    check_particles(n - 1, fixed.len())?;
    let pair = dicke_sm(k, fixed, l)?;
    let slice = Slice::from_coefficients(0, vec![pair.m, pair.s], l);
    slice.on_grid(grid, fixed.to_vec())
}

/// For `|N/2, N/2⟩` the conditional is `∝ 1 + e^{2πi(x+X)/L}` with
/// `X = Σx_i - (L/π) Arg M`; returned wrapped into `[0, L)`.
pub fn black_shift(fixed: &[f64], l: f64) -> Result<f64> {
    let n = fixed.len() + 1;
    if n % 2 != 0 {
        return Err(Error::invalid(
            "n",
            format!("black soliton needs even N, got {n}"),
        ));
    }
    let pair = dicke_sm(n / 2, fixed, l)?;
    let sum: f64 = fixed.iter().sum();
    Ok(wrap(sum - l / PI * pair.m.arg(), l))
}

/// Where the black conditional vanishes: `L/2 - X`.
pub fn black_notch(fixed: &[f64], l: f64) -> Result<f64> {
    Ok(wrap(l / 2.0 - black_shift(fixed, l)?, l))
}

/// `|n_p = N/2, n_{p+M} = N/2⟩` with `p = -⌊M/2⌋`: `M` density notches.
pub fn multi_soliton_state(n: usize, notches: u32) -> Result<FockState> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::invalid("n", format!("need even N > 0, got {n}")));
    }
    if notches == 0 {
        return Err(Error::invalid("M", "need at least one notch"));
    }
    let low = -((notches / 2) as i32);
    let half = (n / 2) as u32;
    Ok(FockState::two_mode(low, half, low + notches as i32, half))
}

#[derive(Clone, Debug, Serialize)]
pub struct RestorationReport {
    /// Largest `|I(x)/c - ψ(x)|` over the configurations.
    pub max_deviation: f64,
    /// `c = L √(L^N C(N, N/2))`.
    pub scale: f64,
    /// Spread of `I(x)/ψ(x)` relative to its mean.
    pub scale_spread: f64,
}

/// `I(x) = ∫_0^L dX e^{-2πiKX/L} Π_i (1 + e^{2πi(x_i+X)/L})`, `K = N/2`, by the
/// trapezoid rule on `points` nodes.
pub fn restoration_integral(config: &PositionConfig, points: usize) -> Complex64 {
    let l = config.length();
    let n = config.len();
    let k = (n / 2) as f64;
    let h = l / points as f64;
    (0..points)
        .map(|j| {
            let x0 = j as f64 * h;
            let prod: Complex64 = config
                .positions()
                .iter()
                .map(|&x| ONE + plane_wave(1.0, x + x0, l))
                .product();
            plane_wave(-k, x0, l) * prod
        })
        .sum::<Complex64>()
        * h
}

/// Compares the translated-product integral with the twin-Fock amplitude.
pub fn symmetry_restoration_check(
    configs: &[PositionConfig],
    points: usize,
) -> Result<RestorationReport> {
    let first = configs
        .first()
        .ok_or_else(|| Error::invalid("configs", "empty"))?;
    let n = first.len();
    let l = first.length();
    if n % 2 != 0 {
        return Err(Error::invalid("n", format!("need even N, got {n}")));
    }
    if points <= n / 2 {
        return Err(Error::invalid(
            "points",
            format!("need more than N/2 = {} nodes", n / 2),
        ));
    }
    let state =
        ManyBodyState::from_fock(&FockState::two_mode(0, (n / 2) as u32, 1, (n / 2) as u32))?;
    let scale = l * (0.5 * (n as f64 * l.ln() + ln_binomial(n, n / 2))).exp();
    let rows: Vec<(f64, Complex64)> = configs
        .par_iter()
        .map(|c| {
            check_particles(n, c.len())?;
            let psi = state.amplitude(c)?;
            let integral = restoration_integral(c, points);
            Ok(((integral / scale - psi).norm(), integral / psi))
        })
        .collect::<Result<_>>()?;
    let max_deviation = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let mean: Complex64 = rows.iter().map(|r| r.1).sum::<Complex64>() / rows.len() as f64;
    let scale_spread = rows.iter().map(|r| (r.1 - mean).norm()).fold(0.0, f64::max) / mean.norm();
    Ok(RestorationReport {
        max_deviation,
        scale,
        scale_spread,
    })
}
