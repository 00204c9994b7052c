use rayon::prelude::*;
use serde::Serialize;

use super::{fidelity, find_yrast, Backend, ModelParams, StateVector, YrastOptions, YrastResult};
use crate::basis::{basis_size, free_yrast_state};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct CutoffOptions {
    pub kmax_start: usize,
    /// Largest cutoff tried while doubling.
    pub kmax_limit: usize,
    /// Accepted change of fidelity and relative energy between cutoffs.
    pub tol: f64,
    /// Doubling stops before a basis larger than this.
    pub max_dim: u128,
    pub yrast: YrastOptions,
}

impl Default for CutoffOptions {
    fn default() -> Self {
        CutoffOptions {
            kmax_start: 2,
            kmax_limit: 16,
            tol: 1e-6,
            max_dim: 400_000,
            yrast: YrastOptions {
                backend: Backend::Lanczos,
                check_degeneracy: false,
                ..Default::default()
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergedYrast {
    pub result: YrastResult,
    pub kmax: usize,
    /// Overlap with the free yrast state of the same block.
    pub fidelity: f64,
    pub fidelity_change: f64,
    pub energy_change: f64,
    pub converged: bool,
    /// `(kmax, energy, fidelity)` at each cutoff visited.
    pub history: Vec<(usize, f64, f64)>,
}

fn free_fidelity(params: &ModelParams, state: &StateVector) -> Result<f64> {
    let target = StateVector::basis_vector(
        state.basis().clone(),
        &free_yrast_state(params.n, params.k)?,
    )?;
    fidelity(&target, state)
}

/// Doubles the cutoff from `kmax_start` until energy and free-yrast fidelity
/// stop changing by more than `tol`. `params.kmax` is ignored.
pub fn converged_yrast(params: &ModelParams, opts: &CutoffOptions) -> Result<ConvergedYrast> {
    if opts.kmax_start == 0 || opts.kmax_limit < opts.kmax_start {
        return Err(Error::invalid(
            "kmax",
            format!(
                "need 1 <= start <= limit, got {}..{}",
                opts.kmax_start, opts.kmax_limit
            ),
        ));
    }
    let mut kmax = opts.kmax_start;
    let first = basis_size(params.n, params.k, kmax)?;
    if first > opts.max_dim {
        return Err(Error::OutOfRange {
            what: "basis size",
            detail: format!("{first} states at k_max={kmax} exceeds {}", opts.max_dim),
        });
    }
    let mut history = Vec::new();
    let mut previous: Option<(f64, f64)> = None;
    loop {
        let p = params.with_kmax(kmax);
        let result = find_yrast(&p, &opts.yrast)?;
        let f = free_fidelity(&p, &result.state)?;
        history.push((kmax, result.energy, f));
        let (df, de) = match previous {
            Some((e, f0)) => (
                (f - f0).abs(),
                (result.energy - e).abs() / result.energy.abs().max(1.0),
            ),
            None => (f64::INFINITY, f64::INFINITY),
        };
        let converged = df < opts.tol && de < opts.tol;
        let next_too_large = basis_size(params.n, params.k, kmax * 2)? > opts.max_dim;
        if converged || kmax * 2 > opts.kmax_limit || next_too_large {
            return Ok(ConvergedYrast {
                result,
                kmax,
                fidelity: f,
                fidelity_change: df,
                energy_change: de,
                converged,
                history,
            });
        }
        previous = Some((result.energy, f));
        kmax *= 2;
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum SweepGrid {
    Coupling(Vec<f64>),
    /// Values of `1/ξ = √(gN/L)`; the coupling is recovered per `N`.
    InverseHealingLength(Vec<f64>),
}

impl SweepGrid {
    fn values(&self) -> &[f64] {
        match self {
            SweepGrid::Coupling(v) | SweepGrid::InverseHealingLength(v) => v,
        }
    }

    fn coupling(&self, value: f64, n: usize, l: f64) -> f64 {
        match self {
            SweepGrid::Coupling(_) => value,
            SweepGrid::InverseHealingLength(_) => value * value * l / n as f64,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub fidelity: f64,
    pub energy: f64,
    pub kmax: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: usize,
    pub g: f64,
    pub xi: Option<f64>,
    pub xi_inverse: f64,
    pub outcome: Result<SweepCell>,
}

/// Fidelity of the `K = N/2` yrast state with `|N/2, N/2⟩` over a grid. Cells are
/// independent and run in parallel; failures stay in their row.
pub fn fidelity_sweep(
    ns: &[usize],
    grid: &SweepGrid,
    l: f64,
    opts: &CutoffOptions,
) -> Vec<SweepRow> {
    let cells: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| grid.values().iter().map(move |&v| (n, v)))
        .collect();
    cells
        .into_par_iter()
        .map(|(n, value)| {
            let g = grid.coupling(value, n, l);
            let xi_inverse = (g * n as f64 / l).max(0.0).sqrt();
            let xi = (xi_inverse > 0.0).then(|| 1.0 / xi_inverse);
            let outcome = if n == 0 || n % 2 != 0 {
                Err(Error::invalid("n", format!("need even N > 0, got {n}")))
            } else {
                converged_yrast(&ModelParams::new(n, (n / 2) as i64, 0, g, l), opts).map(|c| {
                    SweepCell {
                        fidelity: c.fidelity,
                        energy: c.result.energy,
                        kmax: c.kmax,
                        converged: c.converged,
                    }
                })
            };
            SweepRow {
                n,
                g,
                xi,
                xi_inverse,
                outcome,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_gas_converges_immediately() {
        let c = converged_yrast(
            &ModelParams::new(4, 2, 0, 0.0, 1.0),
            &CutoffOptions::default(),
        )
        .unwrap();
        assert!(c.converged);
        assert_eq!(c.kmax, 4);
        assert!((c.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_conversion_shares_abscissa() {
        let grid = SweepGrid::InverseHealingLength(vec![0.5, 1.0]);
        let opts = CutoffOptions {
            kmax_limit: 4,
            ..Default::default()
        };
        let rows = fidelity_sweep(&[2, 4, 3], &grid, 1.0, &opts);
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!((r.g * r.n as f64 - r.xi_inverse * r.xi_inverse).abs() < 1e-12);
        }
        let bad: Vec<_> = rows.iter().filter(|r| r.outcome.is_err()).collect();
        assert_eq!(bad.len(), 2);
        assert!(bad.iter().all(|r| r.n == 3));
        for r in rows.iter().filter(|r| r.n != 3) {
            let cell = r.outcome.as_ref().unwrap();
            assert!(cell.fidelity > 0.0 && cell.fidelity <= 1.0 + 1e-12);
        }
    }
}
