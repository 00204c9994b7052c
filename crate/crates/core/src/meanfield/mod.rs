//! Mean-field dark and gray solitons on the ring.
//!
//! The Gross-Pitaevskii equation `i ∂_t ψ = -½ ψ'' + gN |ψ|² ψ` with
//! `∫|ψ|² = 1` has uniformly travelling solutions `ψ(x, t) = φ(x - vt) e^{-iμt}`,
//! where `φ` obeys `-½ φ'' + i v φ' + gN |φ|² φ = μ φ`. One-notch profiles are
//! built from `ρ = ρ₁ + Δ sn²(κ(x - L/2) | m)`, `κ = 2K(m)/L`, with the current
//! and boost fixed by periodicity and the prescribed average momentum.

pub mod elliptic;
mod relax;

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::basis::check_length;
use crate::wavefunction::uniform_grid;
use crate::{Error, Result};
use elliptic::{ellip_d, ellip_k, ellip_pi, ellip_pi_incomplete, jacobi};

pub use relax::{relax_soliton, RelaxOptions, RelaxResult};

pub const DEFAULT_GRID: usize = 1024;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Allowed deviation of `∫|ψ|²` from 1.
pub const NORM_TOL: f64 = 1e-8;
/// Relative size of Fourier coefficients treated as roundoff.
pub const SPECTRAL_FLOOR: f64 = 1e-14;

/// `ξ = 1/√(gN/L)`.
pub fn healing_length(g: f64, n: usize, l: f64) -> Result<f64> {
    check_length(l)?;
    if !(g > 0.0 && g.is_finite()) || n == 0 {
        return Err(Error::invalid("g", "healing length needs g > 0 and N > 0"));
    }
    Ok(1.0 / (g * n as f64 / l).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct GpeProfile {
    pub grid: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub gn: f64,
    /// Requested average momentum per particle, units of `2π/L`.
    pub k_avg: f64,
    pub l: f64,
    /// Drift velocity of the profile.
    pub velocity: f64,
    /// Chemical potential of the co-moving equation.
    pub mu: f64,
    /// Elliptic parameter, when the elliptic construction was used.
    pub m: Option<f64>,
}

impl GpeProfile {
    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Phase relative to the largest amplitude.
    pub fn phase(&self) -> Vec<f64> {
        let (imax, _) = self
            .psi
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .expect("non-empty");
        let r = self.psi[imax].conj() / self.psi[imax].norm();
        self.psi.iter().map(|c| (c * r).arg()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.l / self.psi.len() as f64
    }

    pub fn min_density(&self) -> f64 {
        self.density().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Largest `|-½φ'' + ivφ' + gN|φ|²φ - μφ|` on the grid, after dropping
    /// Fourier coefficients below `SPECTRAL_FLOOR` of the largest.
    pub fn residual(&self) -> f64 {
        let mut hat = fft(&self.psi, false);
        let top = hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for c in hat.iter_mut() {
            if c.norm() < SPECTRAL_FLOOR * top {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        self.residual_of(&hat)
    }

    /// Same without filtering; floors near `ε (πP/L)²` for `P` grid points.
    pub fn unfiltered_residual(&self) -> f64 {
        self.residual_of(&fft(&self.psi, false))
    }

    fn residual_of(&self, hat: &[Complex64]) -> f64 {
        let psi = derivative_from_spectrum(hat, self.l, 0);
        let d1 = derivative_from_spectrum(hat, self.l, 1);
        let d2 = derivative_from_spectrum(hat, self.l, 2);
        psi.iter()
            .zip(d1.iter().zip(&d2))
            .map(|(p, (a, b))| {
                (-0.5 * b + Complex64::new(0.0, self.velocity) * a + self.gn * p.norm_sqr() * p
                    - self.mu * p)
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Accumulated phase around the ring, `2π × winding`.
    pub fn winding(&self) -> f64 {
        let n = self.psi.len();
        (0..n)
            .map(|i| (self.psi[(i + 1) % n] / self.psi[i]).arg())
            .sum()
    }
}

fn fft(values: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    plan.process(&mut buf);
    buf
}

/// Integer wavenumber of FFT bin `i` (the Nyquist bin counts as negative).
fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n.div_ceil(2) {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// `d^order ψ/dx^order` by FFT on a uniform periodic grid.
pub fn spectral_derivative(psi: &[Complex64], l: f64, order: u32) -> Vec<Complex64> {
    derivative_from_spectrum(&fft(psi, false), l, order)
}

fn derivative_from_spectrum(hat: &[Complex64], l: f64, order: u32) -> Vec<Complex64> {
    let n = hat.len();
    let mut hat = hat.to_vec();
    for (i, c) in hat.iter_mut().enumerate() {
        let q = wavenumber(i, n);
        if order % 2 == 1 && n % 2 == 0 && q == -(n as i64) / 2 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, 2.0 * PI * q as f64 / l);
        *c *= ik.powu(order) / n as f64;
    }
    fft(&hat, true)
}

/// `(L/2πi) ∫ψ* ψ' dx` in units of `2π/L`, from the Fourier weights.
pub fn average_momentum(psi: &[Complex64], l: f64) -> Result<f64> {
    let n = psi.len();
    if n < 2 {
        return Err(Error::invalid("grid", "need at least two points"));
    }
    let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * l / n as f64;
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let hat = fft(psi, false);
    let weight: f64 = hat.iter().map(|c| c.norm_sqr()).sum();
    Ok(hat
        .iter()
        .enumerate()
        .map(|(i, c)| wavenumber(i, n) as f64 * c.norm_sqr())
        .sum::<f64>()
        / weight)
}

fn check_momentum(k_avg: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&k_avg) {
        return Err(Error::invalid(
            "k_avg",
            format!("need 0 <= k_avg <= 1, got {k_avg}"),
        ));
    }
    Ok(())
}

fn plane_wave_profile(k: f64, gn: f64, grid: &[f64], l: f64, k_avg: f64) -> GpeProfile {
    let q = 2.0 * PI * k / l;
    GpeProfile {
        grid: grid.to_vec(),
        psi: grid
            .iter()
            .map(|&x| Complex64::from_polar(1.0 / l.sqrt(), q * x))
            .collect(),
        gn,
        k_avg,
        l,
        velocity: 0.0,
        mu: 0.5 * q * q + gn / l,
        m: None,
    }
}

/// `(1 + A e^{2πix/L}) / √(L(1 + A²))` with `A²/(1 + A²) = k_avg`.
pub fn ideal_limit_soliton(k_avg: f64, points: usize, l: f64) -> Result<GpeProfile> {
    check_length(l)?;
    check_momentum(k_avg)?;
    let grid = uniform_grid(points.max(2), l);
    if k_avg == 1.0 {
        return Ok(plane_wave_profile(1.0, 0.0, &grid, l, k_avg));
    }
    let a = (k_avg / (1.0 - k_avg)).sqrt();
    let scale = 1.0 / (l * (1.0 + a * a)).sqrt();
    Ok(GpeProfile {
        psi: grid
            .iter()
            .map(|&x| {
                (Complex64::new(1.0, 0.0) + Complex64::from_polar(a, 2.0 * PI * x / l)) * scale
            })
            .collect(),
        grid,
        gn: 0.0,
        k_avg,
        l,
        velocity: if k_avg == 0.0 { 0.0 } else { PI / l },
        mu: 0.0,
        m: None,
    })
}

/// Parameters of the one-notch elliptic solution.
#[derive(Clone, Copy, Debug)]
struct Elliptic {
    m: f64,
    kappa: f64,
    rho1: f64,
    delta: f64,
    /// Current `ρ θ'` of the real-density part, signed.
    current: f64,
    velocity: f64,
    mu: f64,
}

impl Elliptic {
    fn rho(&self, x: f64, l: f64) -> f64 {
        let (s, _, _) = jacobi(self.kappa * (x - 0.5 * l), self.m);
        self.rho1 + self.delta * s * s
    }
}

/// `Δ`, `ρ₁`, `ρ₃` for parameter `m` at coupling `u = gN`.
fn shape(m: f64, u: f64, l: f64) -> (f64, f64, f64, f64) {
    let k = ellip_k(m);
    let kappa = 2.0 * k / l;
    let width = kappa * kappa / u;
    let delta = m * width;
    let rho1 = 1.0 / l - delta * ellip_d(m) / k;
    (kappa, delta, rho1, rho1 + width)
}

/// `m` with `ρ₁ = 0`: `4 m K(m) D(m) = u L`.
fn black_parameter(u: f64, l: f64) -> Result<f64> {
    let f = |m: f64| 4.0 * m * ellip_k(m) * ellip_d(m) - u * l;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut hi = 1.0 - 1e-16;
    while f(hi) <= 0.0 {
        // K(m) diverges only logarithmically; larger couplings need m closer to 1.
        hi = 1.0 - (1.0 - hi) * 1e-2;
        if 1.0 - hi < 1e-300 {
            return Err(Error::NoSolution {
                detail: format!("coupling gN = {u} too large for the elliptic solver"),
            });
        }
    }
    b = b.min(hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

fn black(u: f64, l: f64) -> Result<Elliptic> {
    let m = black_parameter(u, l)?;
    let (kappa, delta, _, rho3) = shape(m, u, l);
    Ok(Elliptic {
        m,
        kappa,
        rho1: 0.0,
        delta,
        current: 0.0,
        velocity: PI / l,
        mu: 0.5 * u * (delta + rho3) - 0.5 * (PI / l).powi(2),
    })
}

/// Phase gained by the real-density part over one period, `J ∫dx/ρ - J L²`,
/// and the parameters, at parameter `m`.
fn gray_at(m: f64, u: f64, l: f64, sign: f64, k_avg: f64) -> (f64, Elliptic) {
    let (kappa, delta, rho1, rho3) = shape(m, u, l);
    let rho2 = rho1 + delta;
    let j = sign * (u * rho1 * rho2 * rho3).max(0.0).sqrt();
    let n = -delta / rho1;
    let inv_rho = 2.0 * ellip_pi(n, m) / (kappa * rho1);
    let velocity = 2.0 * PI * k_avg / l - j * l;
    let mu_chi = 0.5 * u * (rho1 + rho2 + rho3);
    (
        j * (inv_rho - l * l),
        Elliptic {
            m,
            kappa,
            rho1,
            delta,
            current: j,
            velocity,
            mu: mu_chi - 0.5 * velocity * velocity,
        },
    )
}

fn gray(u: f64, k_avg: f64, l: f64, tol: f64) -> Result<Elliptic> {
    let m_black = black_parameter(u, l)?;
    // winding 0 below one half, 1 above
    let (sign, target) = if k_avg < 0.5 {
        (-1.0, -2.0 * PI * k_avg)
    } else {
        (1.0, 2.0 * PI * (1.0 - k_avg))
    };
    let g = |t: f64| {
        let (phase, e) = gray_at(t * m_black, u, l, sign, k_avg);
        (sign * (phase - target), e)
    };
    let (mut a, mut b) = (1e-12, 1.0 - 1e-12);
    let (ga, gb) = (g(a).0, g(b).0);
    if !(ga < 0.0 && gb > 0.0) {
        return Err(Error::NoSolution {
            detail: format!("momentum condition not bracketed: residuals {ga:.3e}, {gb:.3e}"),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a < tol * 1e-6 || mid <= a || mid >= b {
            break;
        }
        if g(mid).0 > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let (residual, e) = g(0.5 * (a + b));
    if residual.abs() > tol.max(1e-12) * 1e3 {
        return Err(Error::NoSolution {
            detail: format!("momentum condition residual {residual:.3e}"),
        });
    }
    Ok(e)
}

fn sample_elliptic(e: &Elliptic, grid: &[f64], l: f64, black: bool) -> Vec<Complex64> {
    if black {
        return grid
            .iter()
            .map(|&x| {
                let (s, _, _) = jacobi(e.kappa * (x - 0.5 * l), e.m);
                Complex64::from_polar(-e.delta.sqrt() * s, e.velocity * x)
            })
            .collect();
    }
    let n = -e.delta / e.rho1;
    let (sk, ck, dk) = jacobi(ellip_k(e.m), e.m);
    let g_half = ellip_pi_incomplete(n, sk.min(1.0), ck.abs(), dk) / e.rho1;
    grid.iter()
        .map(|&x| {
            let y = e.kappa * (x - 0.5 * l);
            let (s, c, d) = jacobi(y, e.m);
            let g = ellip_pi_incomplete(n, s, c.abs(), d) / e.rho1;
            let theta = e.current / e.kappa * (g + g_half) + e.velocity * x;
            Complex64::from_polar(e.rho(x, l).sqrt(), theta)
        })
        .collect()
}

/// Dark (`k_avg = 1/2`) or gray soliton with one notch at `x = L/2` and zero
/// phase at `x = 0`.
pub fn gpe_soliton(gn: f64, k_avg: f64, points: usize, l: f64, tol: f64) -> Result<GpeProfile> {
    check_length(l)?;
    check_momentum(k_avg)?;
    if !(gn >= 0.0 && gn.is_finite()) {
        return Err(Error::invalid("gn", format!("need gN >= 0, got {gn}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if points < 2 {
        return Err(Error::invalid("grid", "need at least two points"));
    }
    let grid = uniform_grid(points, l);
    if k_avg == 0.0 || k_avg == 1.0 {
        return Ok(plane_wave_profile(k_avg, gn, &grid, l, k_avg));
    }
    if gn == 0.0 {
        return ideal_limit_soliton(k_avg, points, l);
    }
    let is_black = k_avg == 0.5;
    let e = if is_black {
        black(gn, l)?
    } else {
        gray(gn, k_avg, l, tol)?
    };
    let profile = GpeProfile {
        psi: sample_elliptic(&e, &grid, l, is_black),
        grid,
        gn,
        k_avg,
        l,
        velocity: e.velocity,
        mu: e.mu,
        m: Some(e.m),
    };
    // 1 - m loses digits at strong coupling; refuse rather than return a bad profile
    let residual = profile.residual();
    if !(residual <= 10.0 * tol * gn.max(1.0)) {
        return Err(Error::NoSolution {
            detail: format!("plug-back residual {residual:.3e} at m = {}", e.m),
        });
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(f: impl Fn(f64) -> Complex64, points: usize) -> Vec<Complex64> {
        uniform_grid(points, 1.0).into_iter().map(f).collect()
    }

    #[test]
    fn momentum_examples() {
        let flat = profile(|_| Complex64::new(1.0, 0.0), 64);
        assert!(average_momentum(&flat, 1.0).unwrap().abs() < 1e-14);
        let wave = profile(|x| Complex64::from_polar(1.0, 2.0 * PI * x), 64);
        assert!((average_momentum(&wave, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let half = profile(
            |x| (1.0 + Complex64::from_polar(1.0, 2.0 * PI * x)) / 2f64.sqrt(),
            64,
        );
        assert!((average_momentum(&half, 1.0).unwrap() - 0.5).abs() < 1e-14);
        let unnormalized = profile(|_| Complex64::new(2.0, 0.0), 64);
        assert!(matches!(
            average_momentum(&unnormalized, 1.0),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn ideal_limit_examples() {
        for j in 0..=8 {
            let k = j as f64 / 8.0;
            let p = ideal_limit_soliton(k, 128, 1.0).unwrap();
            assert!((average_momentum(&p.psi, 1.0).unwrap() - k).abs() < 1e-10);
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        let half = ideal_limit_soliton(0.5, 128, 1.0).unwrap();
        assert!(half.min_density() < 1e-28);
        let quarter = ideal_limit_soliton(0.25, 128, 1.0).unwrap();
        let a = 1.0 / 3f64.sqrt();
        assert!((quarter.min_density() - (1.0 - a).powi(2) / (1.0 + a * a)).abs() < 1e-14);
        let flat = ideal_limit_soliton(0.0, 16, 2.0).unwrap();
        assert!(flat.density().iter().all(|d| (d - 0.5).abs() < 1e-15));
        assert!(ideal_limit_soliton(1.5, 16, 1.0).is_err());
    }

    #[test]
    fn healing_length_examples() {
        assert_eq!(healing_length(1.0, 1, 1.0).unwrap(), 1.0);
        assert!((healing_length(0.08, 8, 1.0).unwrap() - 1.25).abs() < 1e-14);
        let a = healing_length(0.4, 5, 1.0).unwrap();
        let b = healing_length(0.1, 5, 1.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-14);
        assert!(healing_length(0.0, 5, 1.0).is_err());
    }

    #[test]
    fn solitons_solve_the_comoving_equation() {
        for gn in [0.0, 1e-3, 1.0, 10.0, 100.0] {
            for k in [0.1, 0.25, 0.5, 0.75, 0.9] {
                let p = gpe_soliton(gn, k, DEFAULT_GRID, 1.0, DEFAULT_TOL).unwrap();
                assert!(
                    (p.norm() - 1.0).abs() < 1e-10,
                    "norm gn={gn} k={k}: {}",
                    p.norm()
                );
                let r = p.residual();
                assert!(r < 10.0 * DEFAULT_TOL, "residual gn={gn} k={k}: {r:e}");
                assert!(p.unfiltered_residual() < 1e-6);
                let q = average_momentum(&p.psi, 1.0).unwrap();
                assert!((q - k).abs() < 1e-8, "momentum gn={gn} k={k}: {q}");
                let w = p.winding() / (2.0 * PI);
                assert!(
                    k == 0.5 || (w - w.round()).abs() < 1e-8,
                    "winding gn={gn} k={k}: {w}"
                );
                assert!(p.psi[0].arg().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_coupling_approaches_the_ideal_limit() {
        for k in [0.25, 0.5, 0.8] {
            let ideal = ideal_limit_soliton(k, 256, 1.0).unwrap();
            let p = gpe_soliton(1e-9, k, 256, 1.0, DEFAULT_TOL).unwrap();
            let dev = p
                .psi
                .iter()
                .zip(&ideal.psi)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-8, "k={k}: {dev:e}");
        }
    }

    #[test]
    fn black_soliton_signature() {
        let p = gpe_soliton(400.0, 0.5, 2048, 1.0, DEFAULT_TOL).unwrap();
        assert!(p.min_density() < 1e-5);
        let phase = p.phase();
        let i = p
            .density()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let jump = crate::wavefunction::wrap_angle(phase[i + 1] - phase[i - 1]).abs();
        assert!((jump - PI).abs() < 0.01, "{jump}");
        // notch narrows with the healing length
        let wide = gpe_soliton(4.0, 0.5, 2048, 1.0, DEFAULT_TOL).unwrap();
        let d_narrow = p.density()[1024 + 40];
        let d_wide = wide.density()[1024 + 40];
        assert!(d_narrow > d_wide);
    }

    #[test]
    fn black_minimum_does_not_increase_with_coupling() {
        let mut last = f64::INFINITY;
        for gn in [0.0, 0.5, 2.0, 8.0, 32.0] {
            let d = gpe_soliton(gn, 0.5, 1024, 1.0, DEFAULT_TOL)
                .unwrap()
                .min_density();
            assert!(d <= last + 1e-14);
            last = d;
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gpe_soliton(-1.0, 0.5, 64, 1.0, 1e-10).is_err());
        assert!(gpe_soliton(1.0, 1.2, 64, 1.0, 1e-10).is_err());
        assert!(gpe_soliton(1.0, 0.5, 64, 0.0, 1e-10).is_err());
    }
}
